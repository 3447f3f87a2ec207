//! The correspondence `X(E)` over `C(E⁰)`: module actions, inner product,
//! norm and elementary tensors, on piecewise-polynomial representatives.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{same_complex, Point, ScalarField};

/// Whether two graph handles describe the same graph.
pub fn same_graph(a: &Arc<TopGraph>, b: &Arc<TopGraph>) -> bool {
    Arc::ptr_eq(a, b)
        || (same_complex(a.base(), b.base())
            && same_complex(a.edges(), b.edges())
            && a.r() == b.r()
            && a.s() == b.s())
}

/// An element of `X(E)`: a field on `E¹`.
#[derive(Debug, Clone)]
pub struct CorrVector {
    graph: Arc<TopGraph>,
    field: ScalarField,
}

/// An element of `C(E⁰)`.
#[derive(Debug, Clone)]
pub struct CoefFn {
    graph: Arc<TopGraph>,
    field: ScalarField,
}

impl CorrVector {
    pub fn new(graph: &Arc<TopGraph>, field: ScalarField) -> Result<Self> {
        if !same_complex(field.complex(), graph.edges()) {
            return Err(Error::GraphMismatch);
        }
        Ok(CorrVector {
            graph: graph.clone(),
            field,
        })
    }

    pub fn zero(graph: &Arc<TopGraph>) -> Self {
        CorrVector {
            graph: graph.clone(),
            field: ScalarField::zero(graph.edges()),
        }
    }

    /// Vector given by its values at the vertices of `E¹` (linear along
    /// segments).
    pub fn from_values(graph: &Arc<TopGraph>, values: Vec<C64>) -> Result<Self> {
        CorrVector::new(graph, ScalarField::from_vertex_values(graph.edges(), values)?)
    }

    pub fn graph(&self) -> &Arc<TopGraph> {
        &self.graph
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn eval(&self, e: &Point) -> C64 {
        self.field.eval(e)
    }

    /// `x·χ` where `χ` is PL, zero exactly on `points` among its nodes and one
    /// at every other vertex.
    pub fn vanishing_on(&self, points: &[Point]) -> Result<CorrVector> {
        let cx = self.field.complex();
        let mut cuts = vec![Vec::new(); cx.segment_count()];
        for p in points {
            if let Point::Interior { seg, t } = p {
                cuts[*seg].push(t.clone());
            }
        }
        let chi = ScalarField::interpolate(cx, &cuts, |p| {
            if points.contains(p) {
                C64::zero()
            } else {
                C64::one()
            }
        });
        CorrVector::new(&self.graph, self.field.mul(&chi)?)
    }

    fn check(&self, other_graph: &Arc<TopGraph>) -> Result<()> {
        if same_graph(&self.graph, other_graph) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    pub fn add(&self, other: &CorrVector) -> Result<CorrVector> {
        self.check(&other.graph)?;
        CorrVector::new(&self.graph, self.field.add(&other.field)?)
    }

    pub fn scale(&self, c: C64) -> CorrVector {
        CorrVector {
            graph: self.graph.clone(),
            field: self.field.scale(c),
        }
    }

    /// `f · x` (left action through `r`).
    pub fn left(&self, f: &CoefFn) -> Result<CorrVector> {
        self.check(&f.graph)?;
        let fr = f.field.pullback(self.graph.r())?;
        CorrVector::new(&self.graph, fr.mul(&self.field)?)
    }

    /// `x · g` (right action through `s`).
    pub fn right(&self, g: &CoefFn) -> Result<CorrVector> {
        self.check(&g.graph)?;
        let gs = g.field.pullback(self.graph.s())?;
        CorrVector::new(&self.graph, self.field.mul(&gs)?)
    }
}

impl CoefFn {
    pub fn new(graph: &Arc<TopGraph>, field: ScalarField) -> Result<Self> {
        if !same_complex(field.complex(), graph.base()) {
            return Err(Error::GraphMismatch);
        }
        Ok(CoefFn {
            graph: graph.clone(),
            field,
        })
    }

    pub fn constant(graph: &Arc<TopGraph>, c: C64) -> Self {
        CoefFn {
            graph: graph.clone(),
            field: ScalarField::constant(graph.base(), c),
        }
    }

    pub fn one(graph: &Arc<TopGraph>) -> Self {
        CoefFn::constant(graph, C64::new(1.0, 0.0))
    }

    pub fn from_values(graph: &Arc<TopGraph>, values: Vec<C64>) -> Result<Self> {
        CoefFn::new(graph, ScalarField::from_vertex_values(graph.base(), values)?)
    }

    pub fn graph(&self) -> &Arc<TopGraph> {
        &self.graph
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn eval(&self, v: &Point) -> C64 {
        self.field.eval(v)
    }

    pub fn mul(&self, other: &CoefFn) -> Result<CoefFn> {
        CoefFn::new(&self.graph, self.field.mul(&other.field)?)
    }

    pub fn add(&self, other: &CoefFn) -> Result<CoefFn> {
        CoefFn::new(&self.graph, self.field.add(&other.field)?)
    }

    pub fn scale(&self, c: C64) -> CoefFn {
        CoefFn {
            graph: self.graph.clone(),
            field: self.field.scale(c),
        }
    }

    pub fn conj(&self) -> CoefFn {
        CoefFn {
            graph: self.graph.clone(),
            field: self.field.conj(),
        }
    }
}

/// `(f·x·g)(e) = f(r(e)) x(e) g(s(e))`.
pub fn act(f: &CoefFn, x: &CorrVector, g: &CoefFn) -> Result<CorrVector> {
    x.left(f)?.right(g)
}

/// `⟨x, y⟩(v) = Σ_{s(e)=v} conj(x(e)) y(e)`.
pub fn inner_product(x: &CorrVector, y: &CorrVector) -> Result<CoefFn> {
    x.check(&y.graph)?;
    let prod = x.field.conj().mul(&y.field)?;
    CoefFn::new(&x.graph, prod.push_sum(x.graph.s())?)
}

/// `‖x‖ = sup_v ⟨x,x⟩(v)^{1/2}`.
pub fn corr_norm(x: &CorrVector) -> Result<f64> {
    let ip = inner_product(x, x)?;
    Ok(ip.field.sup_real().max(0.0).sqrt())
}

/// A homogeneous element of the `n`-fold tensor power `X(E)^{⊗n}`.
#[derive(Debug, Clone)]
pub struct TensorVector {
    graph: Arc<TopGraph>,
    degree: usize,
    terms: Vec<(C64, Vec<CorrVector>)>,
}

impl TensorVector {
    pub fn zero(graph: &Arc<TopGraph>, degree: usize) -> Self {
        TensorVector {
            graph: graph.clone(),
            degree,
            terms: Vec::new(),
        }
    }

    pub fn elementary(factors: Vec<CorrVector>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::Precondition("an elementary tensor needs at least one factor".into()));
        };
        let graph = first.graph.clone();
        for x in &factors {
            x.check(&graph)?;
        }
        Ok(TensorVector {
            graph,
            degree: factors.len(),
            terms: vec![(C64::new(1.0, 0.0), factors)],
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn graph(&self) -> &Arc<TopGraph> {
        &self.graph
    }

    pub fn terms(&self) -> &[(C64, Vec<CorrVector>)] {
        &self.terms
    }

    pub fn add(&self, other: &TensorVector) -> Result<TensorVector> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        if !same_graph(&self.graph, &other.graph) {
            return Err(Error::GraphMismatch);
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(TensorVector {
            graph: self.graph.clone(),
            degree: self.degree,
            terms,
        })
    }

    pub fn scale(&self, c: C64) -> TensorVector {
        TensorVector {
            graph: self.graph.clone(),
            degree: self.degree,
            terms: self.terms.iter().map(|(a, xs)| (a * c, xs.clone())).collect(),
        }
    }
}

/// `⟨x₁⊗…⊗xₙ, y₁⊗…⊗yₙ⟩` by the recursion `⟨x₁⊗x', y₁⊗y'⟩ = ⟨x', ⟨x₁,y₁⟩·y'⟩`.
fn elementary_inner(xs: &[CorrVector], ys: &[CorrVector]) -> Result<CoefFn> {
    let mut h = inner_product(&xs[0], &ys[0])?;
    for (x, y) in xs.iter().zip(ys).skip(1) {
        h = inner_product(x, &y.left(&h)?)?;
    }
    Ok(h)
}

pub fn tensor_inner_product(u: &TensorVector, w: &TensorVector) -> Result<CoefFn> {
    if u.degree != w.degree {
        return Err(Error::DegreeMismatch(u.degree, w.degree));
    }
    if !same_graph(&u.graph, &w.graph) {
        return Err(Error::GraphMismatch);
    }
    let mut acc = CoefFn::constant(&u.graph, C64::new(0.0, 0.0));
    for (a, xs) in &u.terms {
        for (b, ys) in &w.terms {
            let h = elementary_inner(xs, ys)?.scale(a.conj() * b);
            acc = acc.add(&h)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn d1() -> Arc<TopGraph> {
        Arc::new(fixtures::d1())
    }

    #[test]
    fn d1_actions_and_inner_products() {
        let g = d1();
        let x = CorrVector::from_values(&g, vec![c(1.0); 3]).unwrap();
        let ind_a = CoefFn::from_values(&g, vec![c(1.0), c(0.0)]).unwrap();
        let y = act(&ind_a, &x, &CoefFn::one(&g)).unwrap();
        let vals: Vec<C64> = (0..3).map(|e| y.eval(&Point::Vertex(e))).collect();
        assert_eq!(vals, vec![c(1.0), c(0.0), c(1.0)]);
        let ip = inner_product(&x, &x).unwrap();
        assert_eq!(ip.eval(&Point::Vertex(0)), c(2.0));
        assert_eq!(ip.eval(&Point::Vertex(1)), c(1.0));
        assert!((corr_norm(&x).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(corr_norm(&CorrVector::zero(&g)).unwrap(), 0.0);
    }

    #[test]
    fn d1_tensor_inner_product() {
        let g = d1();
        let delta = |k: usize| {
            let mut v = vec![c(0.0); 3];
            v[k] = c(1.0);
            CorrVector::from_values(&g, v).unwrap()
        };
        let t = TensorVector::elementary(vec![delta(1), delta(0)]).unwrap();
        let h = tensor_inner_product(&t, &t).unwrap();
        assert_eq!(h.eval(&Point::Vertex(0)), c(1.0));
        assert_eq!(h.eval(&Point::Vertex(1)), c(0.0));
        let one = TensorVector::elementary(vec![delta(1)]).unwrap();
        assert!(matches!(
            tensor_inner_product(&t, &one),
            Err(Error::DegreeMismatch(2, 1))
        ));
    }

    #[test]
    fn dkflip_constant_vector() {
        let g = Arc::new(fixtures::dkflip_e());
        let x = CorrVector::new(&g, ScalarField::one(g.edges())).unwrap();
        let ip = inner_product(&x, &x).unwrap();
        for p in g.base().sample_grid(5) {
            assert!((ip.eval(&p) - c(2.0)).norm() < 1e-12);
        }
        assert!((corr_norm(&x).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_graphs_are_rejected() {
        let a = d1();
        let b = Arc::new(fixtures::swap2());
        let x = CorrVector::zero(&a);
        let y = CorrVector::zero(&b);
        assert!(matches!(inner_product(&x, &y), Err(Error::GraphMismatch)));
    }
}
