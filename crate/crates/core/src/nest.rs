//! Two-dimensional nest representations over a vertex pair, the family
//! `ρ_{v,z}` over a sheeted open set, and pointwise diagonalization.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corr::{same_graph, CoefFn, CorrVector};
use crate::error::{Error, Result};
use crate::fock::AlgebraElement;
use crate::graph::TopGraph;
use crate::space::{q, qi, refinement_points, OpenSet, Piece, PlSet, Point, ScalarField, Q};

/// Tolerance on the weight bound `Σ|λ_e| ≤ 1`.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Upper-triangular `[[a, b], [0, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UT2 {
    pub a: C64,
    pub b: C64,
    pub d: C64,
}

impl UT2 {
    pub fn zero() -> Self {
        UT2 {
            a: C64::zero(),
            b: C64::zero(),
            d: C64::zero(),
        }
    }

    pub fn identity() -> Self {
        UT2 {
            a: C64::one(),
            b: C64::zero(),
            d: C64::one(),
        }
    }

    pub fn diag(a: C64, d: C64) -> Self {
        UT2 { a, b: C64::zero(), d }
    }

    pub fn corner(b: C64) -> Self {
        UT2 {
            a: C64::zero(),
            b,
            d: C64::zero(),
        }
    }

    pub fn mul(&self, o: &UT2) -> UT2 {
        UT2 {
            a: self.a * o.a,
            b: self.a * o.b + self.b * o.d,
            d: self.d * o.d,
        }
    }

    pub fn add(&self, o: &UT2) -> UT2 {
        UT2 {
            a: self.a + o.a,
            b: self.b + o.b,
            d: self.d + o.d,
        }
    }

    pub fn scale(&self, c: C64) -> UT2 {
        UT2 {
            a: self.a * c,
            b: self.b * c,
            d: self.d * c,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.b == C64::zero()
    }

    pub fn inverse(&self) -> Option<UT2> {
        if self.a == C64::zero() || self.d == C64::zero() {
            return None;
        }
        Some(UT2 {
            a: 1.0 / self.a,
            b: -self.b / (self.a * self.d),
            d: 1.0 / self.d,
        })
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        // eigenvalues of M*M: trace t, determinant |ad|^2
        let t = self.a.norm_sqr() + self.b.norm_sqr() + self.d.norm_sqr();
        let det = (self.a * self.d).norm_sqr();
        let disc = (t * t - 4.0 * det).max(0.0);
        ((t + disc.sqrt()) / 2.0).sqrt()
    }
}

impl fmt::Display for UT2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [0, {}]]", self.a, self.b, self.d)
    }
}

/// Evaluates an element given the images of coefficients and of single
/// vectors; tensors of degree ≥ 2 vanish since strict corners square to 0.
fn eval_with(a: &AlgebraElement, pi: impl Fn(&CoefFn) -> UT2, corner: impl Fn(&CorrVector) -> C64) -> UT2 {
    let mut m = pi(a.x0());
    for u in a.terms() {
        if u.degree() != 1 {
            continue;
        }
        for (c, xs) in u.terms() {
            m = m.add(&UT2::corner(c * corner(&xs[0])));
        }
    }
    m
}

/// A nest representation `π(f) = diag(f(v), f(w))`,
/// `t(x) = [[0, Σ λ_e x(e)], [0, 0]]` over `E¹_{v,w}`.
#[derive(Debug, Clone)]
pub struct NestRep {
    graph: Arc<TopGraph>,
    pub v: Point,
    pub w: Point,
    pub fiber: Vec<Point>,
    pub lambda: Vec<C64>,
}

/// Weights given per fiber edge; edges not listed get weight 0.
pub fn build_nest_rep(graph: &Arc<TopGraph>, v: &Point, w: &Point, weights: &[(Point, C64)]) -> Result<NestRep> {
    let fib = graph.edges_between(v, w)?;
    if fib.n() == 0 {
        return Err(Error::EmptyFiber {
            v: graph.base().describe(v),
            w: graph.base().describe(w),
        });
    }
    let mut lambda = vec![C64::zero(); fib.n()];
    for (e, l) in weights {
        match fib.edges.iter().position(|x| x == e) {
            Some(i) => lambda[i] += l,
            None => return Err(Error::WeightOffFiber(graph.edges().describe(e))),
        }
    }
    let total: f64 = lambda.iter().map(|l| l.norm()).sum();
    if total == 0.0 {
        return Err(Error::ZeroWeights);
    }
    if total > 1.0 + WEIGHT_TOL {
        return Err(Error::WeightBound(total));
    }
    Ok(NestRep {
        graph: graph.clone(),
        v: v.clone(),
        w: w.clone(),
        fiber: fib.edges,
        lambda,
    })
}

impl NestRep {
    pub fn corner(&self, x: &CorrVector) -> C64 {
        self.fiber.iter().zip(&self.lambda).map(|(e, l)| l * x.eval(e)).sum()
    }
}

pub fn eval_nest_rep(rho: &NestRep, a: &AlgebraElement) -> Result<UT2> {
    if !same_graph(&rho.graph, a.graph()) {
        return Err(Error::GraphMismatch);
    }
    Ok(eval_with(a, |f| UT2::diag(f.eval(&rho.v), f.eval(&rho.w)), |x| rho.corner(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalityReport {
    pub corner: C64,
    pub diagonal: bool,
    /// Whether `x` vanishes on `E¹_{v,w}` (the support hypothesis).
    pub support_off_fiber: bool,
}

pub fn diagonality_check(rho: &NestRep, x: &CorrVector) -> Result<DiagonalityReport> {
    let m = eval_nest_rep(rho, &AlgebraElement::t(x.clone())?)?;
    Ok(DiagonalityReport {
        corner: m.b,
        diagonal: m.is_diagonal(),
        support_off_fiber: rho.fiber.iter().all(|e| x.eval(e) == C64::zero()),
    })
}

/// The family `v ↦ ρ_{v,z}` over an open set `W` whose preimage splits into
/// sheets mapped homeomorphically onto `W`, all with the same range.
#[derive(Debug, Clone)]
pub struct RhoFamily {
    graph: Arc<TopGraph>,
    pub w: OpenSet,
    pub sheets: Vec<PlSet>,
    pub z: Vec<C64>,
}

impl RhoFamily {
    pub fn new(graph: &Arc<TopGraph>, w: OpenSet, z: Vec<C64>) -> Result<Self> {
        let sheets = graph.s().preimage_set(&w).components();
        if sheets.len() != z.len() {
            return Err(Error::SheetStructure(format!(
                "{} sheets over W but z has length {}",
                sheets.len(),
                z.len()
            )));
        }
        let fam = RhoFamily {
            graph: graph.clone(),
            w,
            sheets,
            z,
        };
        fam.check_sheets()?;
        Ok(fam)
    }

    /// Checks one point per sheet over every atom of `W` refined by all
    /// critical images, and agreement of `r` across sheets.
    fn check_sheets(&self) -> Result<()> {
        let g = &self.graph;
        let base = g.base();
        let mut cuts: Vec<Vec<Q>> = (0..base.segment_count()).map(|s| self.w.seg_cuts(s).to_vec()).collect();
        let mut add = |p: &Point| {
            if let Point::Interior { seg, t } = p {
                cuts[*seg].push(t.clone());
            }
        };
        for v in 0..g.edges().vertex_count() {
            add(&g.s().eval(&Point::Vertex(v))?);
        }
        for map in [g.s(), g.r()] {
            for s in 0..g.edges().segment_count() {
                for b in map.breaks(s) {
                    add(&g.s().eval(&Point::Interior { seg: s, t: b.clone() })?);
                }
            }
        }
        let pts = refinement_points(base, &cuts);
        for u in pts.iter().filter(|u| self.w.contains(u)) {
            let lifts = self.sheet_points(u)?;
            let r0 = g.r().eval(&lifts[0])?;
            for e in &lifts[1..] {
                if g.r().eval(e)? != r0 {
                    return Err(Error::SheetStructure(format!(
                        "sheets have different ranges over {}",
                        base.describe(u)
                    )));
                }
            }
        }
        // quarter points inside gaps
        for s in 0..base.segment_count() {
            let mut knots = vec![Q::zero()];
            let mut c = cuts[s].clone();
            c.sort();
            c.dedup();
            knots.extend(c.into_iter().filter(|t| *t > Q::zero() && *t < Q::one()));
            knots.push(Q::one());
            for win in knots.windows(2) {
                for k in [1, 3] {
                    let u = Point::Interior {
                        seg: s,
                        t: &win[0] + (&win[1] - &win[0]) * q(k, 4),
                    };
                    if self.w.contains(&u) {
                        let lifts = self.sheet_points(&u)?;
                        let r0 = g.r().eval(&lifts[0])?;
                        if lifts[1..].iter().any(|e| g.r().try_eval(e).as_ref() != Some(&r0)) {
                            return Err(Error::SheetStructure(format!(
                                "sheets have different ranges over {}",
                                base.describe(&u)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The point of each sheet over `u ∈ W`.
    pub fn sheet_points(&self, u: &Point) -> Result<Vec<Point>> {
        let fiber = self.graph.s_fiber(u)?;
        self.sheets
            .iter()
            .enumerate()
            .map(|(i, sh)| {
                let hits: Vec<&Point> = fiber.iter().filter(|e| sh.contains(e)).collect();
                if hits.len() == 1 {
                    Ok(hits[0].clone())
                } else {
                    Err(Error::SheetStructure(format!(
                        "sheet {} has {} points over {}",
                        i + 1,
                        hits.len(),
                        self.graph.base().describe(u)
                    )))
                }
            })
            .collect()
    }

    /// `ρ_{v,z}(A)`: `π(f) = diag(f(σ(v)), f(v))`, corner `Σ zᵢ x(eᵢ(v))`.
    pub fn eval(&self, v: &Point, a: &AlgebraElement) -> Result<UT2> {
        if !self.w.contains(v) {
            return Err(Error::Precondition(format!("{} is outside W", self.graph.base().describe(v))));
        }
        if !same_graph(&self.graph, a.graph()) {
            return Err(Error::GraphMismatch);
        }
        let lifts = self.sheet_points(v)?;
        let sigma_v = self.graph.r().eval(&lifts[0])?;
        Ok(eval_with(
            a,
            |f| UT2::diag(f.eval(&sigma_v), f.eval(v)),
            |x| lifts.iter().zip(&self.z).map(|(e, zi)| zi * x.eval(e)).sum(),
        ))
    }

    /// `1 + ‖z‖₂`, the reported norm bound.
    pub fn norm_bound(&self) -> f64 {
        1.0 + self.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Restriction of a 2-dimensional representation to `C(E⁰)`:
/// `f ↦ [[f(u), c(f)], [0, f(v)]]`.
pub struct RestrictedRep<'a> {
    pub graph: Arc<TopGraph>,
    pub u: Point,
    pub v: Point,
    pub corner: Box<dyn Fn(&CoefFn) -> C64 + 'a>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub a: UT2,
    pub a_inv: UT2,
    pub beta: C64,
    /// Largest corner residual of `A ρ(f) A⁻¹` over the test functions.
    pub residual: f64,
    pub tested: usize,
}

/// Hat at `u` vanishing at `v`.
fn separating_hat(graph: &TopGraph, u: &Point, v: &Point) -> ScalarField {
    let base = graph.base();
    let mut r = q(1, 4);
    for d in base.directions(u) {
        r = r.min(base.reach(u, d) / qi(2));
        let t0 = base.start_param(u, d);
        if let Some(tv) = base.param_on(v, d.seg) {
            let dist = if d.forward { &tv - &t0 } else { &t0 - &tv };
            if dist > Q::zero() {
                r = r.min(dist / qi(2));
            }
        }
    }
    ScalarField::hat(base, u, &r)
}

/// Finds upper-triangular `A` with `A ρ(·) A⁻¹` diagonal on `C(E⁰)`:
/// `A = I` when `u = v`, otherwise `A = [[1, β], [0, 1]]` with
/// `β = c(f*) / (f*(u) − f*(v))` on a separating hat `f*`, verified on ten
/// random PL functions.
pub fn diagonalize_nest_rep(rep: &RestrictedRep<'_>, seed: u64) -> Result<Diagonalization> {
    let g = &rep.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = Vec::new();
    for _ in 0..10 {
        let base = g.base();
        let mut cuts = vec![Vec::new(); base.segment_count()];
        for p in [&rep.u, &rep.v] {
            if let Point::Interior { seg, t } = p {
                cuts[*seg].push(t.clone());
            }
        }
        let vals: Vec<(Point, C64)> = refinement_points(base, &cuts)
            .into_iter()
            .map(|p| (p, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let f = ScalarField::interpolate(base, &cuts, |p| {
            vals.iter().find(|(x, _)| x == p).map_or(C64::zero(), |(_, c)| *c)
        });
        tests.push(CoefFn::new(g, f)?);
    }
    let (a, beta) = if rep.u == rep.v {
        (UT2::identity(), C64::zero())
    } else {
        let hat = CoefFn::new(g, separating_hat(g, &rep.u, &rep.v))?;
        let denom = hat.eval(&rep.u) - hat.eval(&rep.v);
        let beta = (rep.corner)(&hat) / denom;
        (
            UT2 {
                a: C64::one(),
                b: beta,
                d: C64::one(),
            },
            beta,
        )
    };
    let a_inv = a.inverse().expect("unipotent");
    let mut residual: f64 = 0.0;
    for f in &tests {
        let rho = UT2 {
            a: f.eval(&rep.u),
            b: (rep.corner)(f),
            d: f.eval(&rep.v),
        };
        let conj = a.mul(&rho).mul(&a_inv);
        let scale = 1.0 + rho.norm();
        residual = residual.max(conj.b.norm() / scale);
    }
    if residual > 1e-9 {
        return Err(Error::NotTriangularizable(format!(
            "corner residual {residual:.3e} after conjugation"
        )));
    }
    Ok(Diagonalization {
        a,
        a_inv,
        beta,
        residual,
        tested: tests.len(),
    })
}

/// Whether the map `s` has only affine pieces over `W`'s sheets.
#[allow(dead_code)]
fn affine_only(graph: &TopGraph) -> bool {
    graph
        .s()
        .segment_images()
        .iter()
        .all(|si| si.pieces.iter().all(|p| matches!(p, Piece::Affine { .. })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn d1_nest_reps() {
        let g = Arc::new(fixtures::d1());
        let (a, b) = (g.base().vertex("a"), g.base().vertex("b"));
        let e2 = g.edges().vertex("e2");
        let rho = build_nest_rep(&g, &b, &a, &[(e2.clone(), c(1.0))]).unwrap();
        let x = CorrVector::from_values(&g, vec![c(0.0), c(1.0), c(0.0)]).unwrap();
        let m = eval_nest_rep(&rho, &AlgebraElement::t(x.clone()).unwrap()).unwrap();
        assert_eq!(m, UT2::corner(c(1.0)));
        assert!(matches!(build_nest_rep(&g, &b, &b, &[]), Err(Error::EmptyFiber { .. })));
        assert!(matches!(
            build_nest_rep(&g, &b, &a, &[(e2.clone(), c(0.0))]),
            Err(Error::ZeroWeights)
        ));
        assert!(matches!(
            build_nest_rep(&g, &b, &a, &[(e2, c(1.5))]),
            Err(Error::WeightBound(_))
        ));
        let off = CorrVector::from_values(&g, vec![c(1.0), c(0.0), c(1.0)]).unwrap();
        let rep = diagonality_check(&rho, &off).unwrap();
        assert!(rep.diagonal && rep.support_off_fiber);
        let u = crate::corr::TensorVector::elementary(vec![x.clone(), x]).unwrap();
        assert_eq!(eval_nest_rep(&rho, &AlgebraElement::tn(u).unwrap()).unwrap(), UT2::zero());
    }

    #[test]
    fn dkflip_rho_family_over_band() {
        let g = Arc::new(fixtures::dkflip_e());
        let w = PlSet::interval(g.base(), 1, &qi(0), &qi(1));
        let fam = RhoFamily::new(&g, w, vec![c(1.0), c(0.0)]).unwrap();
        let v = Point::Interior { seg: 1, t: q(1, 3) };
        let x = CorrVector::new(
            &g,
            ScalarField::interpolate(g.edges(), &[], |p| match p {
                Point::Vertex(i) => c(*i as f64),
                _ => c(0.0),
            }),
        )
        .unwrap();
        let m = fam.eval(&v, &AlgebraElement::t(x.clone()).unwrap()).unwrap();
        let e1 = g.lift_to_copy(0, &v);
        assert!((m.b - x.eval(&e1)).norm() < 1e-15);
        // the whole interval is not sheeted with equal ranges
        let full = PlSet::full(g.base());
        assert!(RhoFamily::new(&g, full, vec![c(1.0), c(0.0)]).is_err());
    }

    #[test]
    fn diagonalization() {
        let g = Arc::new(fixtures::dkflip_e());
        let u = Point::Interior { seg: 0, t: q(1, 2) };
        let v = Point::Interior { seg: 2, t: q(1, 2) };
        let (uu, vv) = (u.clone(), v.clone());
        // corner c(f) = 0.7 (f(u) - f(v)), a coboundary
        let rep = RestrictedRep {
            graph: g.clone(),
            u,
            v,
            corner: Box::new(move |f: &CoefFn| (f.eval(&uu) - f.eval(&vv)) * 0.7),
        };
        let d = diagonalize_nest_rep(&rep, 1).unwrap();
        assert!((d.beta - c(0.7)).norm() < 1e-12);
        let same = RestrictedRep {
            graph: g.clone(),
            u: Point::Vertex(0),
            v: Point::Vertex(0),
            corner: Box::new(|_| C64::zero()),
        };
        assert_eq!(diagonalize_nest_rep(&same, 1).unwrap().a, UT2::identity());
        let bad = RestrictedRep {
            graph: g,
            u: Point::Vertex(0),
            v: Point::Vertex(3),
            corner: Box::new(|f: &CoefFn| f.eval(&Point::Vertex(1))),
        };
        assert!(matches!(diagonalize_nest_rep(&bad, 1), Err(Error::NotTriangularizable(_))));
    }
}
