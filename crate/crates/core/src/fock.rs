//! Polynomial elements of the tensor algebra and their truncated Fock
//! matrices over discrete graphs.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::corr::{same_graph, CoefFn, CorrVector, TensorVector};
use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::Point;

/// A finite sum `π(x₀) + Σₙ tⁿ(xₙ)`.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    graph: Arc<TopGraph>,
    x0: CoefFn,
    /// Homogeneous parts of degree ≥ 1 (several may share a degree).
    terms: Vec<TensorVector>,
}

impl AlgebraElement {
    pub fn zero(graph: &Arc<TopGraph>) -> Self {
        AlgebraElement {
            graph: graph.clone(),
            x0: CoefFn::constant(graph, C64::new(0.0, 0.0)),
            terms: Vec::new(),
        }
    }

    pub fn coef(f: CoefFn) -> Self {
        AlgebraElement {
            graph: f.graph().clone(),
            x0: f,
            terms: Vec::new(),
        }
    }

    pub fn t(x: CorrVector) -> Result<Self> {
        AlgebraElement::tn(TensorVector::elementary(vec![x])?)
    }

    pub fn tn(u: TensorVector) -> Result<Self> {
        let mut a = AlgebraElement::zero(u.graph());
        a.terms.push(u);
        Ok(a)
    }

    pub fn graph(&self) -> &Arc<TopGraph> {
        &self.graph
    }

    pub fn x0(&self) -> &CoefFn {
        &self.x0
    }

    pub fn terms(&self) -> &[TensorVector] {
        &self.terms
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(TensorVector::degree).max().unwrap_or(0)
    }

    fn check(&self, other: &AlgebraElement) -> Result<()> {
        if same_graph(&self.graph, &other.graph) {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(AlgebraElement {
            graph: self.graph.clone(),
            x0: self.x0.add(&other.x0)?,
            terms,
        })
    }

    pub fn scale(&self, c: C64) -> AlgebraElement {
        AlgebraElement {
            graph: self.graph.clone(),
            x0: self.x0.scale(c),
            terms: self.terms.iter().map(|u| u.scale(c)).collect(),
        }
    }

    /// Product in the tensor algebra:
    /// `π(f)tⁿ(u) = tⁿ(f·u)`, `tⁿ(u)π(g) = tⁿ(u·g)`, `tⁿ(u)tᵐ(w) = tⁿ⁺ᵐ(u⊗w)`.
    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(other)?;
        let g = &self.graph;
        let mut out = AlgebraElement::coef(self.x0.mul(&other.x0)?);
        for w in &other.terms {
            out.terms.push(map_factors(w, |xs| {
                xs[0] = xs[0].left(&self.x0)?;
                Ok(())
            })?);
        }
        for u in &self.terms {
            out.terms.push(map_factors(u, |xs| {
                let last = xs.len() - 1;
                xs[last] = xs[last].right(&other.x0)?;
                Ok(())
            })?);
            for w in &other.terms {
                let mut acc = TensorVector::zero(g, u.degree() + w.degree());
                for (a, xs) in u.terms() {
                    for (b, ys) in w.terms() {
                        let mut f = xs.clone();
                        f.extend(ys.iter().cloned());
                        acc = acc.add(&TensorVector::elementary(f)?.scale(a * b))?;
                    }
                }
                out.terms.push(acc);
            }
        }
        Ok(out)
    }
}

fn map_factors(u: &TensorVector, f: impl Fn(&mut Vec<CorrVector>) -> Result<()>) -> Result<TensorVector> {
    let mut acc = TensorVector::zero(u.graph(), u.degree());
    for (a, xs) in u.terms() {
        let mut ys = xs.clone();
        f(&mut ys)?;
        acc = acc.add(&TensorVector::elementary(ys)?.scale(*a))?;
    }
    Ok(acc)
}

/// Basis of the truncated Fock space: vertices (degree 0) and composable
/// paths `(e₁,…,eₙ)` with `s(e_k) = r(e_{k+1})`, `n ≤ depth`; degree-major,
/// then lexicographic by edge id.
#[derive(Debug, Clone)]
pub struct PathBasis {
    graph: Arc<TopGraph>,
    depth: usize,
    /// Degree-0 entries hold a single vertex index; others hold edge indices.
    entries: Vec<(usize, Vec<usize>)>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

impl PathBasis {
    pub fn new(graph: &Arc<TopGraph>, depth: usize) -> Result<Self> {
        if !graph.is_discrete() {
            return Err(Error::NotDiscrete);
        }
        let base = graph.base();
        let edges = graph.edges();
        let r = |e: usize| vertex_of(graph.r().try_eval(&Point::Vertex(e)));
        let s = |e: usize| vertex_of(graph.s().try_eval(&Point::Vertex(e)));
        let mut by_id: Vec<usize> = (0..edges.vertex_count()).collect();
        by_id.sort_by(|a, b| edges.vertex_id(*a).cmp(edges.vertex_id(*b)));
        let mut vs: Vec<usize> = (0..base.vertex_count()).collect();
        vs.sort_by(|a, b| base.vertex_id(*a).cmp(base.vertex_id(*b)));
        let mut entries: Vec<(usize, Vec<usize>)> = vs.into_iter().map(|v| (0, vec![v])).collect();
        let mut layer: Vec<Vec<usize>> = by_id.iter().map(|e| vec![*e]).collect();
        for n in 1..=depth {
            entries.extend(layer.iter().map(|p| (n, p.clone())));
            // extend at the end: next edge f with r(f) = s(last)
            let mut next = Vec::new();
            for p in &layer {
                let last = *p.last().unwrap();
                for f in &by_id {
                    if r(*f) == s(last) {
                        let mut q = p.clone();
                        q.push(*f);
                        next.push(q);
                    }
                }
            }
            layer = next;
        }
        let index = entries.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Ok(PathBasis {
            graph: graph.clone(),
            depth,
            entries,
            index,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(degree, vertex or edge indices)` of each basis vector.
    pub fn entries(&self) -> &[(usize, Vec<usize>)] {
        &self.entries
    }

    pub fn position(&self, degree: usize, ids: &[usize]) -> Option<usize> {
        self.index.get(&(degree, ids.to_vec())).copied()
    }

    /// Human-readable label using vertex/edge ids.
    pub fn label(&self, i: usize) -> String {
        let (n, ids) = &self.entries[i];
        if *n == 0 {
            self.graph.base().vertex_id(ids[0]).to_string()
        } else {
            ids.iter()
                .map(|e| self.graph.edges().vertex_id(*e))
                .collect::<Vec<_>>()
                .join(" ")
        }
    }

    /// Range vertex of a basis vector: the vertex itself or `r(e₁)`.
    fn range_vertex(&self, i: usize) -> usize {
        let (n, ids) = &self.entries[i];
        if *n == 0 {
            ids[0]
        } else {
            vertex_of(self.graph.r().try_eval(&Point::Vertex(ids[0])))
        }
    }
}

fn vertex_of(p: Option<Point>) -> usize {
    match p {
        Some(Point::Vertex(v)) => v,
        _ => unreachable!("discrete graphs map vertices to vertices"),
    }
}

/// Matrix of an operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<C64>,
    /// Degree shift of a homogeneous operator, if known.
    pub shift: Option<usize>,
}

impl OperatorMatrix {
    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

fn check_basis(graph: &Arc<TopGraph>, b: &PathBasis) -> Result<()> {
    if same_graph(graph, &b.graph) {
        Ok(())
    } else {
        Err(Error::GraphMismatch)
    }
}

/// `π_∞(f)`: diagonal, `f(r(e₁))` on paths and `f(v)` on vertices.
pub fn pi_op(f: &CoefFn, b: &PathBasis) -> Result<OperatorMatrix> {
    check_basis(f.graph(), b)?;
    let n = b.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = f.eval(&Point::Vertex(b.range_vertex(i)));
    }
    Ok(OperatorMatrix {
        matrix: m,
        shift: Some(0),
    })
}

/// `t_∞(x)`: `μ ↦ Σ_e x(e) eμ` over `e` with `s(e) = r(μ)`; the top degree
/// is truncated to zero.
pub fn creation_op(x: &CorrVector, b: &PathBasis) -> Result<OperatorMatrix> {
    check_basis(x.graph(), b)?;
    let g = &b.graph;
    let n = b.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let (deg, ids) = &b.entries[j];
        if *deg == b.depth {
            continue;
        }
        let rv = b.range_vertex(j);
        for e in 0..g.edges().vertex_count() {
            if vertex_of(g.s().try_eval(&Point::Vertex(e))) != rv {
                continue;
            }
            let mut path = vec![e];
            if *deg > 0 {
                path.extend(ids.iter().copied());
            }
            if let Some(i) = b.position(deg + 1, &path) {
                m[(i, j)] += x.eval(&Point::Vertex(e));
            }
        }
    }
    Ok(OperatorMatrix {
        matrix: m,
        shift: Some(1),
    })
}

/// Matrix of a polynomial element.
pub fn element_matrix(a: &AlgebraElement, b: &PathBasis) -> Result<OperatorMatrix> {
    let mut m = pi_op(a.x0(), b)?.matrix;
    for u in a.terms() {
        for (c, xs) in u.terms() {
            let mut prod = DMatrix::<C64>::identity(b.len(), b.len());
            for x in xs {
                prod *= creation_op(x, b)?.matrix;
            }
            m += prod * *c;
        }
    }
    let shift = match (a.terms().is_empty(), a.terms().first()) {
        (true, _) => Some(0),
        (false, Some(u)) if a.terms().iter().all(|w| w.degree() == u.degree()) && is_zero_coef(a.x0(), b) => {
            Some(u.degree())
        }
        _ => None,
    };
    Ok(OperatorMatrix { matrix: m, shift })
}

fn is_zero_coef(f: &CoefFn, b: &PathBasis) -> bool {
    (0..b.graph.base().vertex_count()).all(|v| f.eval(&Point::Vertex(v)).norm() == 0.0)
}

/// Operator norm at truncation depth `depth`: a lower bound for the norm
/// in the tensor algebra, nondecreasing in `depth`.
pub fn norm_lower_bound(a: &AlgebraElement, depth: usize) -> Result<f64> {
    let b = PathBasis::new(a.graph(), depth)?;
    Ok(element_matrix(a, &b)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr::{act, corr_norm};
    use crate::fixtures;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn setup() -> (Arc<TopGraph>, PathBasis) {
        let g = Arc::new(fixtures::d1());
        let b = PathBasis::new(&g, 2).unwrap();
        (g, b)
    }

    fn delta(g: &Arc<TopGraph>, k: usize) -> CorrVector {
        let mut v = vec![c(0.0); 3];
        v[k] = c(1.0);
        CorrVector::from_values(g, v).unwrap()
    }

    #[test]
    fn d1_basis() {
        let (_, b) = setup();
        let labels: Vec<String> = (0..b.len()).map(|i| b.label(i)).collect();
        // paths (e_i, e_j) with s(e_i) = r(e_j)
        assert_eq!(
            labels,
            ["a", "b", "e1", "e2", "e3", "e1 e1", "e1 e3", "e2 e1", "e2 e3", "e3 e2"]
        );
    }

    #[test]
    fn creation_and_pi_examples() {
        let (g, b) = setup();
        let t = creation_op(&delta(&g, 1), &b).unwrap().matrix;
        let a = b.position(0, &[0]).unwrap();
        let bv = b.position(0, &[1]).unwrap();
        let e2 = b.position(1, &[1]).unwrap();
        assert_eq!(t[(e2, a)], c(1.0));
        assert!(t.column(bv).iter().all(|z| z.norm() == 0.0));
        let ind_a = CoefFn::from_values(&g, vec![c(1.0), c(0.0)]).unwrap();
        let p = pi_op(&ind_a, &b).unwrap().matrix;
        assert_eq!(p[(e2, e2)], c(0.0));
        assert_eq!(p[(a, a)], c(1.0));
        let u = TensorVector::elementary(vec![delta(&g, 1), delta(&g, 0)]).unwrap();
        let m = element_matrix(&AlgebraElement::tn(u).unwrap(), &b).unwrap();
        let e2e1 = b.position(2, &[1, 0]).unwrap();
        assert_eq!(m.matrix[(e2e1, a)], c(1.0));
        assert_eq!(m.shift, Some(2));
    }

    #[test]
    fn covariance_relations() {
        let (g, b) = setup();
        let x = CorrVector::from_values(&g, vec![c(0.5), C64::new(0.0, 2.0), c(-1.0)]).unwrap();
        let f = CoefFn::from_values(&g, vec![c(3.0), C64::new(1.0, 1.0)]).unwrap();
        let one = CoefFn::one(&g);
        let lhs = creation_op(&act(&f, &x, &one).unwrap(), &b).unwrap().matrix;
        let rhs = pi_op(&f, &b).unwrap().matrix * creation_op(&x, &b).unwrap().matrix;
        assert_eq!(lhs, rhs);
        let lhs = creation_op(&act(&one, &x, &f).unwrap(), &b).unwrap().matrix;
        let rhs = creation_op(&x, &b).unwrap().matrix * pi_op(&f, &b).unwrap().matrix;
        assert_eq!(lhs, rhs);
        let bound = norm_lower_bound(&AlgebraElement::t(x.clone()).unwrap(), 1).unwrap();
        assert!(bound >= corr_norm(&x).unwrap() - 1e-12);
    }

    #[test]
    fn non_discrete_is_rejected() {
        let g = Arc::new(fixtures::dkflip_e());
        assert!(matches!(PathBasis::new(&g, 1), Err(Error::NotDiscrete)));
    }
}
