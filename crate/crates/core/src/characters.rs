//! Characters of the tensor algebra over a vertex: the ball parametrization
//! `z ↦ θ_{v,z}`, evaluation on polynomial elements, the conditional
//! expectation and the bump coordinates `κ`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_traits::{One, Zero};

use crate::corr::{same_graph, CoefFn, CorrVector};
use crate::error::{Error, Result};
use crate::fock::AlgebraElement;
use crate::graph::TopGraph;
use crate::space::{q, qi, PlFunction, PlSet, Point, ScalarField, Q};

/// Tolerance on `‖z‖₂ ≤ 1`.
pub const BALL_TOL: f64 = 1e-12;

/// `|E¹_v|` and the ordered loop list.
pub fn fiber_dimension(graph: &TopGraph, v: &Point) -> Result<(usize, Vec<Point>)> {
    let fib = graph.loops_at(v)?;
    Ok((fib.n(), fib.edges))
}

/// The character `θ_{v,z}`.
#[derive(Debug, Clone)]
pub struct CharacterPoint {
    graph: Arc<TopGraph>,
    v: Point,
    z: Vec<C64>,
    loops: Vec<Point>,
}

impl CharacterPoint {
    pub fn new(graph: &Arc<TopGraph>, v: Point, z: Vec<C64>) -> Result<Self> {
        let (n, loops) = fiber_dimension(graph, &v)?;
        if z.len() != n {
            return Err(Error::InvalidCharacter(format!(
                "z has length {} but the vertex has {n} loops",
                z.len()
            )));
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 + BALL_TOL {
            return Err(Error::InvalidCharacter(format!("‖z‖ = {norm} exceeds 1")));
        }
        Ok(CharacterPoint {
            graph: graph.clone(),
            v,
            z,
            loops,
        })
    }

    pub fn v(&self) -> &Point {
        &self.v
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn loops(&self) -> &[Point] {
        &self.loops
    }

    /// `t_z(x) = Σ zᵢ x(eᵢ)`.
    pub fn t_z(&self, x: &CorrVector) -> C64 {
        self.loops.iter().zip(&self.z).map(|(e, zi)| zi * x.eval(e)).sum()
    }
}

/// `θ(A)`: `x₀(v) + Σ c Π_k t_z(x_k)` over elementary terms.
pub fn eval_character(theta: &CharacterPoint, a: &AlgebraElement) -> Result<C64> {
    if !same_graph(&theta.graph, a.graph()) {
        return Err(Error::GraphMismatch);
    }
    let mut val = a.x0().eval(&theta.v);
    for u in a.terms() {
        for (c, xs) in u.terms() {
            val += c * xs.iter().map(|x| theta.t_z(x)).product::<C64>();
        }
    }
    Ok(val)
}

/// The conditional expectation `Ξ(A) = x₀`.
pub fn expectation(a: &AlgebraElement) -> CoefFn {
    a.x0().clone()
}

/// Contractions `𝔱ᵢ` supported in disjoint sheets `Uᵢ` around the loops,
/// identically one on `Vᵢ`.
#[derive(Debug, Clone)]
pub struct BumpFamily {
    pub v: Point,
    pub loops: Vec<Point>,
    /// Base radius of the collar.
    pub radius: Q,
    pub outer: Vec<PlSet>,
    pub inner: Vec<PlSet>,
    pub bumps: Vec<CorrVector>,
}

/// Largest admissible collar radius around `v`, in base parameter units:
/// stays inside the segment and within the affine reach of every lift.
fn collar_radius(graph: &TopGraph, v: &Point) -> Result<Q> {
    let base = graph.base();
    let mut rho = q(1, 4);
    for d in base.directions(v) {
        rho = rho.min(base.reach(v, d) / qi(2));
        for e in graph.s_fiber(v)? {
            let Some(de) = graph.lift_dir(&e, d) else { continue };
            let g = graph.s().germ(&e, de).expect("s is total");
            rho = rho.min(&g.reach * &g.slope / qi(2));
        }
    }
    Ok(rho)
}

/// Base trapezoid: 1 within `rho/2` of `v`, 0 beyond `rho`, linear between.
fn base_trapezoid(graph: &TopGraph, v: &Point, rho: &Q) -> PlFunction {
    let base = graph.base();
    let mut cuts = vec![Vec::new(); base.segment_count()];
    for d in base.directions(v) {
        let t0 = base.start_param(v, d);
        for frac in [q(1, 2), qi(1)] {
            let off = rho * &frac;
            cuts[d.seg].push(if d.forward { &t0 + off } else { &t0 - off });
        }
        if !v.is_vertex() {
            cuts[d.seg].push(t0);
        }
    }
    let centre = v.clone();
    PlFunction::from_nodes(base, cuts, |p| {
        if *p == centre {
            return Q::one();
        }
        for d in base.directions(&centre) {
            let t0 = base.start_param(&centre, d);
            if let Some(t) = base.param_on(p, d.seg) {
                let dist = if d.forward { &t - &t0 } else { &t0 - &t };
                if dist > Q::zero() && dist <= *rho {
                    return if dist * qi(2) <= *rho { Q::one() } else { Q::zero() };
                }
            }
        }
        Q::zero()
    })
}

/// Canonical PL bumps around the loops at `v`.
pub fn make_bumps(graph: &Arc<TopGraph>, v: &Point) -> Result<BumpFamily> {
    let (_, loops) = fiber_dimension(graph, v)?;
    let rho = collar_radius(graph, v)?;
    let b = base_trapezoid(graph, v, &rho);
    let outer_base = crate::space::threshold_set(&b, &crate::space::Threshold::Above(Q::zero()));
    let inner_base = crate::space::threshold_set(&b, &crate::space::Threshold::Above(q(1, 2)));
    let lifted = ScalarField::from_pl(&b).pullback(graph.s())?;
    let sheets = graph.s().preimage_set(&outer_base).components();
    let inner_all = graph.s().preimage_set(&inner_base);
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    let mut bumps = Vec::new();
    for e in &loops {
        let u = sheets
            .iter()
            .find(|c| c.contains(e))
            .cloned()
            .ok_or_else(|| Error::Precondition("loop outside the collar preimage".into()))?;
        inner.push(inner_all.intersection(&u));
        bumps.push(CorrVector::new(graph, lifted.mask(&u))?);
        outer.push(u);
    }
    Ok(BumpFamily {
        v: v.clone(),
        loops,
        radius: rho,
        outer,
        inner,
        bumps,
    })
}

/// `κ(θ) = (θ(t(𝔱₁)), …, θ(t(𝔱ₙ)))`.
pub fn character_coordinates(bumps: &BumpFamily, theta: &CharacterPoint) -> Result<Vec<C64>> {
    if bumps.v != theta.v || bumps.loops != theta.loops {
        return Err(Error::InvalidCharacter("bump family belongs to another vertex".into()));
    }
    bumps
        .bumps
        .iter()
        .map(|t| eval_character(theta, &AlgebraElement::t(t.clone())?))
        .collect()
}
