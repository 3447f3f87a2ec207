//! Topological graphs `E = (E⁰, E¹, r, s)` over 1-complexes.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::space::{Complex1, Dir, Piece, PlMap, Point, SegmentImage, Q};

/// One axiom check with a witness or counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.axiom,
                c.witness
            )?;
        }
        Ok(())
    }
}

/// A compact topological graph. Construction validates the axioms.
#[derive(Debug, Clone)]
pub struct TopGraph {
    base: Arc<Complex1>,
    edges: Arc<Complex1>,
    r: PlMap,
    s: PlMap,
    report: ValidationReport,
    /// Number of sheets when built from a dynamical system.
    copies: Option<usize>,
}

/// Edges over a vertex (loops) or over a vertex pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeFiber {
    pub v: Point,
    pub w: Point,
    pub edges: Vec<Point>,
}

impl EdgeFiber {
    pub fn n(&self) -> usize {
        self.edges.len()
    }
}

/// Verdict of the edge equivalence test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeEquivalence {
    pub equivalent: bool,
    /// Base parameter radius of matching neighbourhoods (when equivalent).
    pub radius: Option<Q>,
    /// Reason for a negative verdict.
    pub witness: Option<String>,
}

/// Checks the graph axioms on raw data without building a graph.
pub fn validate_parts(base: &Arc<Complex1>, edges: &Arc<Complex1>, r: &PlMap, s: &PlMap) -> ValidationReport {
    let mut checks = Vec::new();
    let shapes = [("r", r), ("s", s)].map(|(name, m)| {
        let ok = crate::space::same_complex(m.source(), edges) && crate::space::same_complex(m.target(), base);
        AxiomCheck {
            axiom: if name == "r" { "r: E1 -> E0" } else { "s: E1 -> E0" },
            passed: ok,
            witness: if ok {
                "source and target match".into()
            } else {
                format!("{name} has the wrong source or target")
            },
        }
    });
    let shapes_ok = shapes.iter().all(|c| c.passed);
    checks.extend(shapes);
    for (name, m) in [("r", r), ("s", s)] {
        let total = m.is_total();
        checks.push(AxiomCheck {
            axiom: if name == "r" { "r continuous" } else { "s continuous" },
            passed: total,
            witness: if total {
                "pieces agree at breakpoints and vertices".into()
            } else {
                format!("{name} is not defined everywhere")
            },
        });
    }
    checks.push(AxiomCheck {
        axiom: "compact",
        passed: base.is_compact() && edges.is_compact(),
        witness: format!(
            "finite complexes: {} + {} cells, {} + {} cells",
            base.vertex_count(),
            base.segment_count(),
            edges.vertex_count(),
            edges.segment_count()
        ),
    });
    checks.push(AxiomCheck {
        axiom: "r proper",
        passed: r.is_proper(),
        witness: "compact source".into(),
    });
    if shapes_ok {
        let rep = s.is_local_homeomorphism();
        checks.push(AxiomCheck {
            axiom: "s local homeomorphism",
            passed: rep.ok,
            witness: match &rep.counterexample {
                None => format!("star maps bijective at {} points", rep.checked_points),
                Some((p, why)) => format!("{} at {}", why, edges.describe(p)),
            },
        });
    }
    ValidationReport { checks }
}

impl TopGraph {
    pub fn new(base: Arc<Complex1>, edges: Arc<Complex1>, r: PlMap, s: PlMap) -> Result<Self> {
        let report = validate_parts(&base, &edges, &r, &s);
        if !report.passed() {
            let msg = report
                .failures()
                .map(|c| format!("{}: {}", c.axiom, c.witness))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::InvalidGraph(msg));
        }
        Ok(TopGraph {
            base,
            edges,
            r,
            s,
            report,
            copies: None,
        })
    }

    /// Discrete graph from vertex ids and `(edge id, source id, range id)`.
    pub fn discrete(vertices: &[&str], edge_list: &[(&str, &str, &str)]) -> Result<Self> {
        let base = Arc::new(Complex1::discrete(vertices.iter().copied())?);
        let edges = Arc::new(Complex1::discrete(edge_list.iter().map(|e| e.0))?);
        let lookup = |id: &str| {
            base.vertex_index(id)
                .map(|v| Some(Point::Vertex(v)))
                .ok_or_else(|| Error::schema("/edges", format!("unknown vertex {id:?}")))
        };
        let s_img = edge_list.iter().map(|e| lookup(e.1)).collect::<Result<Vec<_>>>()?;
        let r_img = edge_list.iter().map(|e| lookup(e.2)).collect::<Result<Vec<_>>>()?;
        let s = PlMap::from_vertex_images(edges.clone(), base.clone(), s_img)?;
        let r = PlMap::from_vertex_images(edges.clone(), base.clone(), r_img)?;
        TopGraph::new(base, edges, r, s)
    }

    /// Graph of a multivariable dynamical system: `E¹ = {1..n} × X`, `s` the
    /// projection and `r = σ_i` on copy `i`. Edge vertex ids are `"{x}#{i}"`.
    pub fn from_dynamical_system(x: Arc<Complex1>, maps: &[PlMap]) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Precondition("a dynamical system needs at least one map".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            if !crate::space::same_complex(m.source(), &x) || !crate::space::same_complex(m.target(), &x) {
                return Err(Error::Precondition(format!("map {} is not a self-map of X", i + 1)));
            }
        }
        let n = maps.len();
        let nv = x.vertex_count();
        let ns = x.segment_count();
        let mut ids = Vec::with_capacity(n * nv);
        let mut segs = Vec::with_capacity(n * ns);
        for i in 0..n {
            for id in x.vertex_ids() {
                ids.push(format!("{id}#{}", i + 1));
            }
            for &(a, b) in x.segments() {
                segs.push((a + i * nv, b + i * nv));
            }
        }
        let edges = Arc::new(Complex1::new(ids, segs)?);
        let mut s_v = Vec::new();
        let mut s_seg = Vec::new();
        let mut r_v = Vec::new();
        let mut r_seg = Vec::new();
        for m in maps {
            for v in 0..nv {
                s_v.push(Some(Point::Vertex(v)));
                r_v.push(m.vertex_images()[v].clone());
            }
            for (k, si) in m.segment_images().iter().enumerate() {
                s_seg.push(SegmentImage::single(Piece::Affine {
                    seg: k,
                    from: Q::zero(),
                    to: Q::one(),
                }));
                r_seg.push(si.clone());
            }
        }
        let s = PlMap::new(edges.clone(), x.clone(), s_v, s_seg)?;
        let r = PlMap::new(edges.clone(), x.clone(), r_v, r_seg)?;
        let mut g = TopGraph::new(x, edges, r, s)?;
        g.copies = Some(n);
        Ok(g)
    }

    pub fn base(&self) -> &Arc<Complex1> {
        &self.base
    }

    pub fn edges(&self) -> &Arc<Complex1> {
        &self.edges
    }

    pub fn r(&self) -> &PlMap {
        &self.r
    }

    pub fn s(&self) -> &PlMap {
        &self.s
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_discrete(&self) -> bool {
        self.base.is_discrete() && self.edges.is_discrete()
    }

    /// Number of copies of `X` when built from a dynamical system.
    pub fn copies(&self) -> Option<usize> {
        self.copies
    }

    /// Point `x` on copy `i` (0-based) of a dynamical-system graph.
    pub fn lift_to_copy(&self, i: usize, x: &Point) -> Point {
        let (nv, ns) = (self.base.vertex_count(), self.base.segment_count());
        match x {
            Point::Vertex(v) => Point::Vertex(v + i * nv),
            Point::Interior { seg, t } => Point::Interior {
                seg: seg + i * ns,
                t: t.clone(),
            },
        }
    }

    /// `s⁻¹(w)`, finite since `s` is a local homeomorphism.
    pub fn s_fiber(&self, w: &Point) -> Result<Vec<Point>> {
        self.s.preimage(w)
    }

    /// `E¹_v = {e : r(e) = v = s(e)}`.
    pub fn loops_at(&self, v: &Point) -> Result<EdgeFiber> {
        self.edges_between(v, v)
    }

    /// `E¹_{v,w} = r⁻¹(v) ∩ s⁻¹(w)`.
    pub fn edges_between(&self, v: &Point, w: &Point) -> Result<EdgeFiber> {
        self.base.check_point(v)?;
        let edges = self
            .s_fiber(w)?
            .into_iter()
            .filter(|e| self.r.try_eval(e).as_ref() == Some(v))
            .collect();
        Ok(EdgeFiber {
            v: v.clone(),
            w: w.clone(),
            edges,
        })
    }

    /// The direction at `e` that `s` maps onto base direction `d`.
    pub fn lift_dir(&self, e: &Point, d: Dir) -> Option<Dir> {
        self.edges
            .directions(e)
            .into_iter()
            .find(|de| self.s.germ(e, *de).and_then(|g| g.dir) == Some(d))
    }

    /// Exact comparison of the germs of `r ∘ (s|_U)⁻¹` at `e` and `e2`.
    pub fn edge_equivalent(&self, e: &Point, e2: &Point) -> Result<EdgeEquivalence> {
        self.edges.check_point(e)?;
        self.edges.check_point(e2)?;
        let no = |why: String| EdgeEquivalence {
            equivalent: false,
            radius: None,
            witness: Some(why),
        };
        let y = self.s.eval(e)?;
        if self.s.eval(e2)? != y {
            return Ok(no("s(e) and s(e2) differ".into()));
        }
        if self.r.eval(e)? != self.r.eval(e2)? {
            return Ok(no("r(e) and r(e2) differ".into()));
        }
        let mut radius: Option<Q> = None;
        for d in self.base.directions(&y) {
            let (Some(d1), Some(d2)) = (self.lift_dir(e, d), self.lift_dir(e2, d)) else {
                return Err(Error::Precondition("s is not locally injective here".into()));
            };
            let (s1, s2) = (self.s.germ(e, d1).unwrap(), self.s.germ(e2, d2).unwrap());
            let (r1, r2) = (self.r.germ(e, d1).unwrap(), self.r.germ(e2, d2).unwrap());
            // speed of r per unit base parameter
            let v1 = &r1.slope / &s1.slope;
            let v2 = &r2.slope / &s2.slope;
            if r1.dir != r2.dir || v1 != v2 {
                return Ok(no(format!(
                    "germs of r along base direction (segment {}, {}) differ",
                    d.seg,
                    if d.forward { "forward" } else { "backward" }
                )));
            }
            for reach in [&s1.reach * &s1.slope, &s2.reach * &s2.slope, &r1.reach * &s1.slope, &r2.reach * &s2.slope] {
                radius = Some(match radius {
                    Some(x) if x <= reach => x,
                    _ => reach,
                });
            }
        }
        Ok(EdgeEquivalence {
            equivalent: true,
            radius: Some(radius.unwrap_or_else(Q::one)),
            witness: None,
        })
    }
}
