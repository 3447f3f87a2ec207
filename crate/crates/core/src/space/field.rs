use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_traits::{One, Signed, Zero};

use super::{half, plfn::PlFunction, qf, sorted_unique, Complex1, Piece, PlMap, PlSet, Point, Q};
use crate::error::{Error, Result};

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn constant(c: C64) -> Self {
        Poly(vec![c])
    }

    /// `a + b t`.
    pub fn linear(a: C64, b: C64) -> Self {
        Poly(vec![a, b])
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.0.iter().rev().fold(C64::zero(), |acc, c| acc * t + c)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|i| {
                    self.0.get(i).copied().unwrap_or_default()
                        + other.0.get(i).copied().unwrap_or_default()
                })
                .collect(),
        )
        .trim()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::default();
        }
        let mut out = vec![C64::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trim()
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect()).trim()
    }

    pub fn conj(&self) -> Poly {
        Poly(self.0.iter().map(|x| x.conj()).collect())
    }

    /// `p(alpha + beta t)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Poly {
        let lin = Poly(vec![C64::new(alpha, 0.0), C64::new(beta, 0.0)]);
        self.0
            .iter()
            .rev()
            .fold(Poly::default(), |acc, c| acc.mul(&lin).add(&Poly::constant(*c)))
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    fn trim(mut self) -> Poly {
        while self.0.len() > 1 && self.0.last() == Some(&C64::zero()) {
            self.0.pop();
        }
        self
    }

    /// Maximum of the real part over `[lo, hi]`.
    pub fn max_real(&self, lo: f64, hi: f64) -> f64 {
        let re = Poly(self.0.iter().map(|c| C64::new(c.re, 0.0)).collect());
        let d = re.derivative();
        let f = |t: f64| re.eval(t).re;
        let mut best = f(lo).max(f(hi));
        match d.degree() {
            0 => {}
            1 if d.0.len() == 2 => {
                let (a, b) = (d.0[0].re, d.0[1].re);
                if b != 0.0 {
                    let t = -a / b;
                    if t > lo && t < hi {
                        best = best.max(f(t));
                    }
                }
            }
            _ => {
                // bracket sign changes of the derivative and bisect
                const N: usize = 256;
                let dv = |t: f64| d.eval(t).re;
                let step = (hi - lo) / N as f64;
                for k in 0..N {
                    let (mut a, mut b) = (lo + k as f64 * step, lo + (k + 1) as f64 * step);
                    best = best.max(f(a));
                    if dv(a).signum() != dv(b).signum() {
                        for _ in 0..60 {
                            let m = 0.5 * (a + b);
                            if dv(a).signum() == dv(m).signum() {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        best = best.max(f(0.5 * (a + b)));
                    }
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FieldSeg {
    breaks: Vec<Q>,
    /// Polynomials in the segment parameter `t`, one per gap.
    polys: Vec<Poly>,
}

impl FieldSeg {
    fn constant(c: C64) -> Self {
        FieldSeg {
            breaks: Vec::new(),
            polys: vec![Poly::constant(c)],
        }
    }

    fn gap_of(&self, t: &Q) -> usize {
        match self.breaks.binary_search(t) {
            Ok(i) => i,
            Err(i) => i,
        }
    }

    fn knots(&self) -> Vec<Q> {
        let mut k = vec![Q::zero()];
        k.extend(self.breaks.iter().cloned());
        k.push(Q::one());
        k
    }

    /// Re-expresses on the given (finer) breaks.
    fn refined(&self, breaks: &[Q]) -> Vec<Poly> {
        let mut knots = vec![Q::zero()];
        knots.extend(breaks.iter().cloned());
        knots.push(Q::one());
        knots
            .windows(2)
            .map(|w| self.polys[self.gap_of(&half(&w[0], &w[1]))].clone())
            .collect()
    }
}

/// A continuous complex-valued function on a complex, polynomial in the
/// segment parameter on each piece of a finite subdivision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    complex: Arc<Complex1>,
    vertex_values: Vec<C64>,
    segs: Vec<FieldSeg>,
}

impl ScalarField {
    pub fn constant(complex: &Arc<Complex1>, c: C64) -> Self {
        ScalarField {
            complex: complex.clone(),
            vertex_values: vec![c; complex.vertex_count()],
            segs: vec![FieldSeg::constant(c); complex.segment_count()],
        }
    }

    pub fn zero(complex: &Arc<Complex1>) -> Self {
        ScalarField::constant(complex, C64::zero())
    }

    pub fn one(complex: &Arc<Complex1>) -> Self {
        ScalarField::constant(complex, C64::new(1.0, 0.0))
    }

    /// Field on a discrete space (or vertex values extended by linear
    /// interpolation along segments).
    pub fn from_vertex_values(complex: &Arc<Complex1>, values: Vec<C64>) -> Result<Self> {
        if values.len() != complex.vertex_count() {
            return Err(Error::Precondition(format!(
                "expected {} vertex values, found {}",
                complex.vertex_count(),
                values.len()
            )));
        }
        let segs = complex
            .segments()
            .iter()
            .map(|&(a, b)| FieldSeg {
                breaks: Vec::new(),
                polys: vec![Poly::linear(values[a], values[b] - values[a])],
            })
            .collect();
        Ok(ScalarField {
            complex: complex.clone(),
            vertex_values: values,
            segs,
        })
    }

    /// Linear interpolation of `f` between vertices and the given cuts.
    pub fn interpolate(complex: &Arc<Complex1>, cuts: &[Vec<Q>], f: impl Fn(&Point) -> C64) -> Self {
        let vertex_values: Vec<C64> = (0..complex.vertex_count())
            .map(|v| f(&Point::Vertex(v)))
            .collect();
        let segs = (0..complex.segment_count())
            .map(|s| {
                let breaks = sorted_unique(
                    cuts.get(s)
                        .cloned()
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|t| t.is_positive() && *t < Q::one())
                        .collect(),
                );
                let mut knots = vec![Q::zero()];
                knots.extend(breaks.iter().cloned());
                knots.push(Q::one());
                let vals: Vec<C64> = knots
                    .iter()
                    .map(|t| f(&complex.point_on(s, t.clone())))
                    .collect();
                let polys = knots
                    .windows(2)
                    .zip(vals.windows(2))
                    .map(|(k, v)| {
                        let (t0, t1) = (qf(&k[0]), qf(&k[1]));
                        let slope = (v[1] - v[0]) / (t1 - t0);
                        Poly::linear(v[0] - slope * t0, slope)
                    })
                    .collect();
                FieldSeg { breaks, polys }
            })
            .collect();
        ScalarField {
            complex: complex.clone(),
            vertex_values,
            segs,
        }
    }

    /// Linear interpolation of `f` on `n` equal subintervals per segment.
    pub fn sampled(complex: &Arc<Complex1>, n: usize, f: impl Fn(&Point) -> C64) -> Self {
        let cuts: Vec<Vec<Q>> = (0..complex.segment_count())
            .map(|_| (1..n).map(|k| super::q(k as i64, n as i64)).collect())
            .collect();
        ScalarField::interpolate(complex, &cuts, f)
    }

    pub fn from_pl(f: &PlFunction) -> Self {
        let cx = f.complex().clone();
        let cuts: Vec<Vec<Q>> = (0..cx.segment_count())
            .map(|s| {
                let (k, _) = f.segment_knots(s);
                k[1..k.len() - 1].to_vec()
            })
            .collect();
        ScalarField::interpolate(&cx, &cuts, |p| C64::new(f.eval_f64(p), 0.0))
    }

    /// Real hat: 1 at `centre`, 0 at parameter distance `>= radius`, linear
    /// in between (`radius` at most the distance to the segment ends).
    pub fn hat(complex: &Arc<Complex1>, centre: &Point, radius: &Q) -> Self {
        let mut cuts = vec![Vec::new(); complex.segment_count()];
        for d in complex.directions(centre) {
            let t0 = complex.start_param(centre, d);
            cuts[d.seg].push(if d.forward { &t0 + radius } else { &t0 - radius });
            cuts[d.seg].push(t0);
        }
        ScalarField::interpolate(complex, &cuts, |p| {
            C64::new(if p == centre { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn complex(&self) -> &Arc<Complex1> {
        &self.complex
    }

    pub fn eval(&self, p: &Point) -> C64 {
        match p {
            Point::Vertex(v) => self.vertex_values[*v],
            Point::Interior { seg, t } => {
                let fs = &self.segs[*seg];
                fs.polys[fs.gap_of(t)].eval(qf(t))
            }
        }
    }

    /// Value at a floating segment parameter (`0 < t < 1`).
    pub fn eval_at(&self, seg: usize, t: f64) -> C64 {
        let fs = &self.segs[seg];
        let i = fs.breaks.partition_point(|b| qf(b) < t);
        fs.polys[i].eval(t)
    }

    fn zip_with(&self, other: &ScalarField, vf: impl Fn(C64, C64) -> C64, pf: impl Fn(&Poly, &Poly) -> Poly) -> Result<ScalarField> {
        if !super::map::same_complex(&self.complex, &other.complex) {
            return Err(Error::GraphMismatch);
        }
        let vertex_values = self
            .vertex_values
            .iter()
            .zip(&other.vertex_values)
            .map(|(a, b)| vf(*a, *b))
            .collect();
        let segs = self
            .segs
            .iter()
            .zip(&other.segs)
            .map(|(a, b)| {
                let mut br = a.breaks.clone();
                br.extend(b.breaks.iter().cloned());
                let br = sorted_unique(br);
                let pa = a.refined(&br);
                let pb = b.refined(&br);
                FieldSeg {
                    breaks: br,
                    polys: pa.iter().zip(&pb).map(|(x, y)| pf(x, y)).collect(),
                }
            })
            .collect();
        Ok(ScalarField {
            complex: self.complex.clone(),
            vertex_values,
            segs,
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b, Poly::add)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a * b, Poly::mul)
    }

    pub fn scale(&self, c: C64) -> ScalarField {
        ScalarField {
            complex: self.complex.clone(),
            vertex_values: self.vertex_values.iter().map(|x| x * c).collect(),
            segs: self
                .segs
                .iter()
                .map(|fs| FieldSeg {
                    breaks: fs.breaks.clone(),
                    polys: fs.polys.iter().map(|p| p.scale(c)).collect(),
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> ScalarField {
        ScalarField {
            complex: self.complex.clone(),
            vertex_values: self.vertex_values.iter().map(|x| x.conj()).collect(),
            segs: self
                .segs
                .iter()
                .map(|fs| FieldSeg {
                    breaks: fs.breaks.clone(),
                    polys: fs.polys.iter().map(Poly::conj).collect(),
                })
                .collect(),
        }
    }

    /// `self ∘ map` for a total map into `self`'s complex.
    pub fn pullback(&self, map: &PlMap) -> Result<ScalarField> {
        if !super::map::same_complex(map.target(), &self.complex) {
            return Err(Error::GraphMismatch);
        }
        if !map.is_total() {
            return Err(Error::Precondition("pullback requires a total map".into()));
        }
        let src = map.source().clone();
        let vertex_values = map
            .vertex_images()
            .iter()
            .map(|p| self.eval(p.as_ref().unwrap()))
            .collect();
        let mut segs = Vec::with_capacity(src.segment_count());
        for si in map.segment_images() {
            let mut breaks = Vec::new();
            let mut polys = Vec::new();
            for (k, piece) in si.pieces.iter().enumerate() {
                let (lo, hi) = si.bounds(k);
                if k > 0 {
                    breaks.push(lo.clone());
                }
                match piece {
                    Piece::Constant(p) => polys.push(Poly::constant(self.eval(p))),
                    Piece::Undefined => unreachable!(),
                    Piece::Affine { seg, from, to } => {
                        let fs = &self.segs[*seg];
                        // u = alpha + beta t
                        let beta = (to - from) / (&hi - &lo);
                        let alpha = from - &beta * &lo;
                        let (af, bf) = (qf(&alpha), qf(&beta));
                        let mut inner: Vec<Q> = fs
                            .breaks
                            .iter()
                            .filter(|c| (from < *c && *c < to) || (to < *c && *c < from))
                            .map(|c| (c - &alpha) / &beta)
                            .collect();
                        inner.sort();
                        let mut knots = vec![lo.clone()];
                        knots.extend(inner.iter().cloned());
                        knots.push(hi.clone());
                        for (j, w) in knots.windows(2).enumerate() {
                            if j > 0 {
                                breaks.push(w[0].clone());
                            }
                            let um = &alpha + &beta * half(&w[0], &w[1]);
                            polys.push(fs.polys[fs.gap_of(&um)].compose_affine(af, bf));
                        }
                    }
                }
            }
            segs.push(FieldSeg { breaks, polys });
        }
        Ok(ScalarField {
            complex: src,
            vertex_values,
            segs,
        })
    }

    /// Fiber sums along a local homeomorphism `s`: `(s_* h)(y) = Σ_{s(e)=y} h(e)`.
    pub fn push_sum(&self, s: &PlMap) -> Result<ScalarField> {
        if !super::map::same_complex(s.source(), &self.complex) {
            return Err(Error::GraphMismatch);
        }
        let base = s.target().clone();
        let mut vertex_values = Vec::with_capacity(base.vertex_count());
        for w in 0..base.vertex_count() {
            let pre = s.preimage(&Point::Vertex(w))?;
            vertex_values.push(pre.iter().map(|p| self.eval(p)).sum());
        }
        // contributions per base segment: (u_lo, u_hi, poly in u)
        let mut contrib: Vec<Vec<(Q, Q, Poly)>> = vec![Vec::new(); base.segment_count()];
        for (e, si) in s.segment_images().iter().enumerate() {
            let fs = &self.segs[e];
            for (k, piece) in si.pieces.iter().enumerate() {
                let (lo, hi) = si.bounds(k);
                let Piece::Affine { seg, from, to } = piece else {
                    return Err(Error::Precondition(
                        "fiber sums need a map without constant or undefined pieces".into(),
                    ));
                };
                // t = gamma + delta u
                let delta = (&hi - &lo) / (to - from);
                let gamma = &lo - &delta * from;
                let mut knots = vec![lo.clone()];
                knots.extend(fs.breaks.iter().filter(|b| lo < **b && **b < hi).cloned());
                knots.push(hi.clone());
                for w in knots.windows(2) {
                    let p = fs.polys[fs.gap_of(&half(&w[0], &w[1]))]
                        .compose_affine(qf(&gamma), qf(&delta));
                    let ua = (&w[0] - &gamma) / &delta;
                    let ub = (&w[1] - &gamma) / &delta;
                    let (ua, ub) = if ua < ub { (ua, ub) } else { (ub, ua) };
                    contrib[*seg].push((ua, ub, p));
                }
            }
        }
        let segs = contrib
            .into_iter()
            .map(|cs| {
                let mut br: Vec<Q> = Vec::new();
                for (a, b, _) in &cs {
                    br.push(a.clone());
                    br.push(b.clone());
                }
                let br: Vec<Q> = sorted_unique(br)
                    .into_iter()
                    .filter(|t| t.is_positive() && *t < Q::one())
                    .collect();
                let mut knots = vec![Q::zero()];
                knots.extend(br.iter().cloned());
                knots.push(Q::one());
                let polys = knots
                    .windows(2)
                    .map(|w| {
                        let m = half(&w[0], &w[1]);
                        cs.iter()
                            .filter(|(a, b, _)| *a < m && m < *b)
                            .fold(Poly::constant(C64::zero()), |acc, (_, _, p)| acc.add(p))
                    })
                    .collect();
                FieldSeg { breaks: br, polys }
            })
            .collect();
        Ok(ScalarField {
            complex: base,
            vertex_values,
            segs,
        })
    }

    /// Multiplies by the indicator of `set`. Continuity is the caller's
    /// responsibility (typically the field vanishes near the boundary).
    pub fn mask(&self, set: &PlSet) -> ScalarField {
        let vertex_values = self
            .vertex_values
            .iter()
            .enumerate()
            .map(|(v, x)| if set.contains(&Point::Vertex(v)) { *x } else { C64::zero() })
            .collect();
        let segs = self
            .segs
            .iter()
            .enumerate()
            .map(|(s, fs)| {
                let mut br = fs.breaks.clone();
                br.extend(set.seg_cuts(s).iter().cloned());
                let br = sorted_unique(br);
                let polys = fs.refined(&br);
                let mut knots = vec![Q::zero()];
                knots.extend(br.iter().cloned());
                knots.push(Q::one());
                let polys = polys
                    .into_iter()
                    .zip(knots.windows(2))
                    .map(|(p, w)| {
                        if set.contains(&Point::Interior { seg: s, t: half(&w[0], &w[1]) }) {
                            p
                        } else {
                            Poly::constant(C64::zero())
                        }
                    })
                    .collect();
                FieldSeg { breaks: br, polys }
            })
            .collect();
        ScalarField {
            complex: self.complex.clone(),
            vertex_values,
            segs,
        }
    }

    /// Supremum of the real part.
    pub fn sup_real(&self) -> f64 {
        let mut best = self
            .vertex_values
            .iter()
            .map(|c| c.re)
            .fold(f64::NEG_INFINITY, f64::max);
        for fs in &self.segs {
            let knots = fs.knots();
            for (w, p) in knots.windows(2).zip(&fs.polys) {
                best = best.max(p.max_real(qf(&w[0]), qf(&w[1])));
            }
        }
        best
    }

    /// Maximum modulus over vertices and a grid of `n` points per piece.
    pub fn max_abs_sampled(&self, n: usize) -> f64 {
        let mut best = self.vertex_values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for fs in &self.segs {
            let knots = fs.knots();
            for (w, p) in knots.windows(2).zip(&fs.polys) {
                let (a, b) = (qf(&w[0]), qf(&w[1]));
                for k in 0..=n {
                    best = best.max(p.eval(a + (b - a) * k as f64 / n as f64).norm());
                }
            }
        }
        best
    }

    /// Largest polynomial degree of any piece.
    pub fn degree(&self) -> usize {
        self.segs
            .iter()
            .flat_map(|fs| fs.polys.iter().map(Poly::degree))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{q, qi, SegmentImage};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pullback_composes_polynomials() {
        let cx = Arc::new(Complex1::path(["0", "1"]).unwrap());
        // f(t) = t, g = f*f = t^2
        let f = ScalarField::from_vertex_values(&cx, vec![c(0.0), c(1.0)]).unwrap();
        let g = f.mul(&f).unwrap();
        assert_eq!(g.degree(), 2);
        // fold t -> |2t-1|
        let fold = PlMap::new(
            cx.clone(),
            cx.clone(),
            vec![Some(Point::Vertex(1)), Some(Point::Vertex(1))],
            vec![SegmentImage {
                breaks: vec![q(1, 2)],
                pieces: vec![
                    Piece::Affine { seg: 0, from: qi(1), to: qi(0) },
                    Piece::Affine { seg: 0, from: qi(0), to: qi(1) },
                ],
            }],
        )
        .unwrap();
        let h = g.pullback(&fold).unwrap();
        for t in [0.1, 0.3, 0.5, 0.8] {
            let x = (2.0 * t - 1.0f64).abs();
            assert!((h.eval_at(0, t) - c(x * x)).norm() < 1e-12);
        }
        assert!((g.sup_real() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn push_sum_over_double_cover() {
        // circle of two segments double covers the one-loop circle
        let up = Arc::new(Complex1::cycle(["a", "b"]).unwrap());
        let down = Arc::new(Complex1::new(vec!["x".into()], vec![(0, 0)]).unwrap());
        let s = PlMap::new(
            up.clone(),
            down.clone(),
            vec![Some(Point::Vertex(0)), Some(Point::Vertex(0))],
            vec![
                SegmentImage::single(Piece::Affine { seg: 0, from: qi(0), to: qi(1) }),
                SegmentImage::single(Piece::Affine { seg: 0, from: qi(0), to: qi(1) }),
            ],
        )
        .unwrap();
        assert!(s.is_local_homeomorphism().ok);
        let h = ScalarField::from_vertex_values(&up, vec![c(1.0), c(3.0)]).unwrap();
        let sum = h.push_sum(&s).unwrap();
        assert!((sum.eval(&Point::Vertex(0)) - c(4.0)).norm() < 1e-12);
        // (1 + 2t) + (3 - 2t) = 4
        assert!((sum.eval(&Point::Interior { seg: 0, t: q(1, 3) }) - c(4.0)).norm() < 1e-12);
    }

    #[test]
    fn max_real_of_cubic() {
        // t - t^3 on [0,1] peaks at 1/sqrt(3)
        let p = Poly(vec![c(0.0), c(1.0), c(0.0), c(-1.0)]);
        let expected = 2.0 / (3.0 * 3f64.sqrt());
        assert!((p.max_real(0.0, 1.0) - expected).abs() < 1e-12);
    }
}
