//! Canonical example graphs and certificates, also emitted by
//! `topcorr fixtures`.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;

use crate::cover::{CertificatePiece, ConjugacyCertificate};
use crate::graph::TopGraph;
use crate::space::{q, qi, Complex1, Piece, PlMap, PlSet, Point, SegmentImage, Q};

/// Subdivided interval `[0,1]` with vertices at the given increasing
/// positions (first `0`, last `1`); vertex ids are the positions.
#[derive(Debug, Clone)]
pub struct Interval {
    pub complex: Arc<Complex1>,
    pub nodes: Vec<Q>,
}

impl Interval {
    pub fn new(nodes: Vec<Q>) -> Self {
        let ids: Vec<String> = nodes.iter().map(crate::space::format_q).collect();
        Interval {
            complex: Arc::new(Complex1::path(ids).expect("valid path")),
            nodes,
        }
    }

    /// The point at global position `y ∈ [0,1]`.
    pub fn point(&self, y: &Q) -> Point {
        if let Ok(j) = self.nodes.binary_search(y) {
            return Point::Vertex(j);
        }
        let j = self.nodes.partition_point(|n| n < y) - 1;
        let (a, b) = (&self.nodes[j], &self.nodes[j + 1]);
        Point::Interior {
            seg: j,
            t: (y - a) / (b - a),
        }
    }

    /// Global position of a point.
    pub fn position(&self, p: &Point) -> Q {
        match p {
            Point::Vertex(v) => self.nodes[*v].clone(),
            Point::Interior { seg, t } => {
                let (a, b) = (&self.nodes[*seg], &self.nodes[*seg + 1]);
                a + (b - a) * t
            }
        }
    }

    /// Self-map given by linear interpolation of `graph` (sorted by `x`,
    /// covering `[0,1]`).
    pub fn map(&self, graph: &[(Q, Q)]) -> PlMap {
        let f = |t: &Q| -> Q {
            let i = graph.partition_point(|(x, _)| x < t);
            if i < graph.len() && graph[i].0 == *t {
                return graph[i].1.clone();
            }
            let ((x0, y0), (x1, y1)) = (&graph[i - 1], &graph[i]);
            y0 + (y1 - y0) * (t - x0) / (x1 - x0)
        };
        let vertex_images = self.nodes.iter().map(|n| Some(self.point(&f(n)))).collect();
        let mut segments = Vec::new();
        for k in 0..self.nodes.len() - 1 {
            let (a, b) = (&self.nodes[k], &self.nodes[k + 1]);
            let mut cuts = vec![a.clone(), b.clone()];
            for w in graph.windows(2) {
                let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
                if a < x0 && x0 < b {
                    cuts.push(x0.clone());
                }
                if y0 != y1 {
                    for n in &self.nodes {
                        let lo = y0.min(y1);
                        let hi = y0.max(y1);
                        if lo < n && n < hi {
                            let x = x0 + (x1 - x0) * (n - y0) / (y1 - y0);
                            if a < &x && &x < b {
                                cuts.push(x);
                            }
                        }
                    }
                }
            }
            cuts.sort();
            cuts.dedup();
            let mut breaks = Vec::new();
            let mut pieces = Vec::new();
            for (i, w) in cuts.windows(2).enumerate() {
                if i > 0 {
                    breaks.push((&w[0] - a) / (b - a));
                }
                let (y0, y1) = (f(&w[0]), f(&w[1]));
                if y0 == y1 {
                    pieces.push(Piece::Constant(self.point(&y0)));
                } else {
                    let mid = (&y0 + &y1) / qi(2);
                    let j = self.nodes.partition_point(|n| *n < mid) - 1;
                    let (na, nb) = (&self.nodes[j], &self.nodes[j + 1]);
                    pieces.push(Piece::Affine {
                        seg: j,
                        from: (&y0 - na) / (nb - na),
                        to: (&y1 - na) / (nb - na),
                    });
                }
            }
            segments.push(SegmentImage { breaks, pieces });
        }
        PlMap::new(self.complex.clone(), self.complex.clone(), vertex_images, segments)
            .expect("interpolated map is continuous")
    }
}

fn pts(v: &[(Q, Q)]) -> Vec<(Q, Q)> {
    v.to_vec()
}

/// `g` below `c`, `h` above `c`; the two must agree at `c`.
pub fn splice(g: &[(Q, Q)], h: &[(Q, Q)], c: &Q, at_c: &Q) -> Vec<(Q, Q)> {
    let mut out: Vec<(Q, Q)> = g.iter().filter(|(x, _)| x < c).cloned().collect();
    out.push((c.clone(), at_c.clone()));
    out.extend(h.iter().filter(|(x, _)| x > c).cloned());
    out
}

/// Discrete graph: `E⁰={a,b}`, `e1: a→a`, `e2: a→b`, `e3: b→a` (source → range).
pub fn d1() -> TopGraph {
    TopGraph::discrete(&["a", "b"], &[("e1", "a", "a"), ("e2", "a", "b"), ("e3", "b", "a")])
        .expect("D1 is valid")
}

/// D1 with an extra loop at `b`.
pub fn d1_plus() -> TopGraph {
    TopGraph::discrete(
        &["a", "b"],
        &[("e1", "a", "a"), ("e2", "a", "b"), ("e3", "b", "a"), ("e4", "b", "b")],
    )
    .expect("valid")
}

/// D1 with the loop moved to `b`; conjugate to D1 by swapping `a` and `b`.
pub fn d1_swapped() -> TopGraph {
    TopGraph::discrete(&["a", "b"], &[("f1", "b", "b"), ("f2", "b", "a"), ("f3", "a", "b")])
        .expect("valid")
}

/// Two-point system `X={p,q}` with `σ₁=id`, `σ₂=swap`.
pub fn swap2() -> TopGraph {
    let x = Arc::new(Complex1::discrete(["p", "q"]).unwrap());
    let id = PlMap::identity(x.clone());
    let swap = PlMap::from_vertex_images(
        x.clone(),
        x.clone(),
        vec![Some(Point::Vertex(1)), Some(Point::Vertex(0))],
    )
    .unwrap();
    TopGraph::from_dynamical_system(x, &[id, swap]).expect("valid")
}

/// The interval `[0,1]` with vertices `0, 1/3, 2/3, 1`.
pub fn thirds() -> Interval {
    Interval::new(vec![qi(0), q(1, 3), q(2, 3), qi(1)])
}

fn ident() -> Vec<(Q, Q)> {
    vec![(qi(0), qi(0)), (qi(1), qi(1))]
}

fn clamp() -> Vec<(Q, Q)> {
    vec![(qi(0), q(1, 3)), (q(1, 3), q(1, 3)), (q(2, 3), q(2, 3)), (qi(1), q(2, 3))]
}

/// `σ₁ = t`, `σ₂ = clamp(t, 1/3, 2/3)`.
pub fn dkflip_e() -> TopGraph {
    let x = thirds();
    let maps = [x.map(&ident()), x.map(&clamp())];
    TopGraph::from_dynamical_system(x.complex, &maps).expect("valid")
}

/// `ρ₁ = min(t, 2/3)`, `ρ₂ = max(t, 1/3)`.
pub fn dkflip_f() -> TopGraph {
    let x = thirds();
    let rho1 = pts(&[(qi(0), qi(0)), (q(2, 3), q(2, 3)), (qi(1), q(2, 3))]);
    let rho2 = pts(&[(qi(0), q(1, 3)), (q(1, 3), q(1, 3)), (qi(1), qi(1))]);
    let maps = [x.map(&rho1), x.map(&rho2)];
    TopGraph::from_dynamical_system(x.complex, &maps).expect("valid")
}

/// Rotation of the 3-cycle by one vertex.
fn rotation(cx: &Arc<Complex1>) -> PlMap {
    let n = cx.vertex_count();
    PlMap::new(
        cx.clone(),
        cx.clone(),
        (0..n).map(|v| Some(Point::Vertex((v + 1) % n))).collect(),
        (0..n)
            .map(|s| {
                SegmentImage::single(Piece::Affine {
                    seg: (s + 1) % n,
                    from: Q::zero(),
                    to: Q::one(),
                })
            })
            .collect(),
    )
    .unwrap()
}

/// Circle systems `E = (rot, id)` and `F = (id, rot)`.
pub fn circle_pair() -> (TopGraph, TopGraph) {
    let cx = Arc::new(Complex1::cycle(["c0", "c1", "c2"]).unwrap());
    let rot = rotation(&cx);
    let id = PlMap::identity(cx.clone());
    let e = TopGraph::from_dynamical_system(cx.clone(), &[rot.clone(), id.clone()]).unwrap();
    let f = TopGraph::from_dynamical_system(cx, &[id, rot]).unwrap();
    (e, f)
}

/// Three maps agreeing on the band `(1/3, 2/3)`.
fn three_maps() -> [Vec<(Q, Q)>; 3] {
    let s3 = pts(&[(qi(0), q(2, 3)), (q(1, 3), q(1, 3)), (q(2, 3), q(2, 3)), (qi(1), q(1, 3))]);
    [ident(), clamp(), s3]
}

/// Splice point of the three-sheet example.
pub const DEFECT_CUT: (i64, i64) = (1, 2);

/// Three-sheet system whose F-side cyclically permutes the sheets past
/// `t = 1/2`: `ρ_k = σ_k` on `[0,1/2]` and `σ_{k+1 mod 3}` on `[1/2,1]`.
pub fn three_cycle_pair() -> (TopGraph, TopGraph) {
    let x = thirds();
    let sig = three_maps();
    let c = q(DEFECT_CUT.0, DEFECT_CUT.1);
    let e_maps: Vec<PlMap> = sig.iter().map(|g| x.map(g)).collect();
    let f_maps: Vec<PlMap> = (0..3)
        .map(|k| x.map(&splice(&sig[k], &sig[(k + 1) % 3], &c, &c)))
        .collect();
    let e = TopGraph::from_dynamical_system(x.complex.clone(), &e_maps).unwrap();
    let f = TopGraph::from_dynamical_system(x.complex, &f_maps).unwrap();
    (e, f)
}

/// A random two-map system on `[0,1]` whose maps coincide on a band `(a,b)`,
/// and its partner that exchanges the maps at the band midpoint.
#[derive(Debug, Clone)]
pub struct RandomPair {
    pub interval: Interval,
    pub e: TopGraph,
    pub f: TopGraph,
    pub band: (Q, Q),
}

pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> RandomPair {
    const D: i64 = 48;
    let a = q(rng.gen_range(6..=20), D);
    let b = q(rng.gen_range(28..=42), D);
    let interval = Interval::new(vec![qi(0), a.clone(), b.clone(), qi(1)]);
    let mut val = || q(rng.gen_range(0..=D), D);
    let (ya, yb) = (val(), val());
    let make = |y0: Q, y1: Q| vec![(qi(0), y0), (a.clone(), ya.clone()), (b.clone(), yb.clone()), (qi(1), y1)];
    let s1 = make(val(), val());
    let mut s2 = make(val(), val());
    while s2[0].1 == s1[0].1 || s2[3].1 == s1[3].1 {
        s2 = make(val(), val());
    }
    let c = (&a + &b) / qi(2);
    let yc = (&ya + &yb) / qi(2);
    let r1 = splice(&s1, &s2, &c, &yc);
    let r2 = splice(&s2, &s1, &c, &yc);
    let x = interval.complex.clone();
    let e = TopGraph::from_dynamical_system(x.clone(), &[interval.map(&s1), interval.map(&s2)]).unwrap();
    let f = TopGraph::from_dynamical_system(x, &[interval.map(&r1), interval.map(&r2)]).unwrap();
    RandomPair {
        interval,
        e,
        f,
        band: (a, b),
    }
}

/// Maps copy `i` of `E¹` onto copy `perm[i]` of `F¹` for two
/// dynamical-system graphs over the same space.
pub fn copy_map(e: &TopGraph, f: &TopGraph, perm: &[usize]) -> PlMap {
    let (nv, ns) = (e.base().vertex_count(), e.base().segment_count());
    let mut vertex_images = Vec::new();
    let mut segments = Vec::new();
    for &j in perm {
        vertex_images.extend((0..nv).map(|v| Some(Point::Vertex(v + j * nv))));
        segments.extend((0..ns).map(|s| {
            SegmentImage::single(Piece::Affine {
                seg: s + j * ns,
                from: Q::zero(),
                to: Q::one(),
            })
        }));
    }
    PlMap::new(e.edges().clone(), f.edges().clone(), vertex_images, segments).expect("copy map is continuous")
}

impl Interval {
    /// `{x : lo < x < hi}` in global position, with `lo < 0` or `hi > 1`
    /// meaning the side is closed off by the end of the interval.
    pub fn open_range(&self, lo: &Q, hi: &Q) -> PlSet {
        let mut cuts = vec![Vec::new(); self.complex.segment_count()];
        for y in [lo, hi] {
            if let Point::Interior { seg, t } = self.point(&y.clone().max(Q::zero()).min(Q::one())) {
                cuts[seg].push(t);
            }
        }
        PlSet::from_predicate(&self.complex, cuts, |p| {
            let x = self.position(p);
            *lo < x && x < *hi
        })
    }
}

/// Two pieces `[0, hi)` with the identity pairing and `(lo, 1]` with copy
/// `i` sent to copy `perm[i]`.
pub fn band_certificate(x: &Interval, e: &TopGraph, f: &TopGraph, lo: &Q, hi: &Q, perm: &[usize]) -> ConjugacyCertificate {
    let n = perm.len();
    let id: Vec<usize> = (0..n).collect();
    ConjugacyCertificate {
        tau: PlMap::identity(x.complex.clone()),
        pieces: vec![
            CertificatePiece {
                u: x.open_range(&qi(-1), hi),
                gamma: copy_map(e, f, &id),
            },
            CertificatePiece {
                u: x.open_range(lo, &qi(2)),
                gamma: copy_map(e, f, perm),
            },
        ],
    }
}

/// `U₁ = [0, 2/3)` with `γ = id`, `U₂ = (1/3, 1]` with the copies swapped.
pub fn dkflip_certificate() -> ConjugacyCertificate {
    band_certificate(&thirds(), &dkflip_e(), &dkflip_f(), &q(1, 3), &q(2, 3), &[1, 0])
}

/// As for DKFLIP, with copy `k+1` sent to copy `k` over `(1/3, 1]`.
pub fn three_cycle_certificate() -> ConjugacyCertificate {
    let (e, f) = three_cycle_pair();
    band_certificate(&thirds(), &e, &f, &q(1, 3), &q(2, 3), &[2, 0, 1])
}

impl RandomPair {
    pub fn certificate(&self) -> ConjugacyCertificate {
        band_certificate(&self.interval, &self.e, &self.f, &self.band.0, &self.band.1, &[1, 0])
    }
}

/// The whole circle as one piece, copies swapped.
pub fn circle_certificate() -> ConjugacyCertificate {
    let (e, f) = circle_pair();
    ConjugacyCertificate {
        tau: PlMap::identity(e.base().clone()),
        pieces: vec![CertificatePiece {
            u: PlSet::full(e.base()),
            gamma: copy_map(&e, &f, &[1, 0]),
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dkflip_maps_match_formulas() {
        let x = thirds();
        let sigma2 = x.map(&clamp());
        let p = x.point(&q(9, 10));
        assert_eq!(sigma2.eval(&p).unwrap(), Point::Vertex(2));
        assert_eq!(x.position(&sigma2.eval(&x.point(&q(1, 2))).unwrap()), q(1, 2));
        assert_eq!(sigma2.eval(&Point::Vertex(0)).unwrap(), Point::Vertex(1));
        let g = dkflip_e();
        assert!(g.report().passed());
        assert!(dkflip_f().report().passed());
    }

    #[test]
    fn spliced_maps_are_continuous() {
        let (e, f) = three_cycle_pair();
        assert_eq!(e.copies(), Some(3));
        assert_eq!(f.copies(), Some(3));
        let mut rng = rand::rngs::mock::StepRng::new(7, 0x9e37_79b9_7f4a_7c15);
        let rp = random_pair(&mut rng);
        assert!(rp.e.report().passed() && rp.f.report().passed());
    }
}
