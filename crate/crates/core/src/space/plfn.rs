use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{half, q, qf, sorted_unique, Complex1, Cover, Piece, PlMap, PlSet, Point, Q};
use crate::error::{Error, Result};

/// Exact rational piecewise-linear real function on a complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlFunction {
    complex: Arc<Complex1>,
    vertex_values: Vec<Q>,
    /// Per segment: interior knots and the values there.
    segs: Vec<(Vec<Q>, Vec<Q>)>,
}

/// Superlevel, sublevel or band sets of a PL function (strict inequalities).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    Above(Q),
    Below(Q),
    Band(Q, Q),
}

impl Threshold {
    fn holds(&self, x: &Q) -> bool {
        match self {
            Threshold::Above(c) => x > c,
            Threshold::Below(c) => x < c,
            Threshold::Band(lo, hi) => lo < x && x < hi,
        }
    }

    fn levels(&self) -> Vec<&Q> {
        match self {
            Threshold::Above(c) | Threshold::Below(c) => vec![c],
            Threshold::Band(lo, hi) => vec![lo, hi],
        }
    }
}

/// Cuts refined by the quarter points of every gap (endpoints `0`, `1` included).
pub fn quarter_refine(cuts: &[Q]) -> Vec<Q> {
    let mut knots = vec![Q::zero()];
    knots.extend(sorted_unique(cuts.to_vec()));
    knots.push(Q::one());
    let mut out = Vec::new();
    for (i, w) in knots.windows(2).enumerate() {
        if i > 0 {
            out.push(w[0].clone());
        }
        for k in 1..4 {
            out.push(&w[0] + (&w[1] - &w[0]) * q(k, 4));
        }
    }
    out
}

impl PlFunction {
    pub fn new(complex: &Arc<Complex1>, vertex_values: Vec<Q>, segs: Vec<(Vec<Q>, Vec<Q>)>) -> Result<Self> {
        if vertex_values.len() != complex.vertex_count() || segs.len() != complex.segment_count() {
            return Err(Error::Precondition("PL function shape does not match complex".into()));
        }
        for (k, v) in &segs {
            if k.len() != v.len() || k.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Precondition("PL function knots must be increasing".into()));
            }
            if k.iter().any(|t| !t.is_positive() || *t >= Q::one()) {
                return Err(Error::Precondition("PL function knots must lie in (0,1)".into()));
            }
        }
        Ok(PlFunction {
            complex: complex.clone(),
            vertex_values,
            segs,
        })
    }

    pub fn constant(complex: &Arc<Complex1>, c: Q) -> Self {
        PlFunction {
            complex: complex.clone(),
            vertex_values: vec![c; complex.vertex_count()],
            segs: vec![(Vec::new(), Vec::new()); complex.segment_count()],
        }
    }

    /// Linear interpolation of `value` between vertices and the given cuts.
    pub fn from_nodes(complex: &Arc<Complex1>, cuts: Vec<Vec<Q>>, value: impl Fn(&Point) -> Q) -> Self {
        let vertex_values = (0..complex.vertex_count())
            .map(|v| value(&Point::Vertex(v)))
            .collect();
        let segs = (0..complex.segment_count())
            .map(|s| {
                let c: Vec<Q> = sorted_unique(
                    cuts.get(s)
                        .cloned()
                        .unwrap_or_default()
                        .into_iter()
                        .filter(|t| t.is_positive() && *t < Q::one())
                        .collect(),
                );
                let vals = c
                    .iter()
                    .map(|t| value(&Point::Interior { seg: s, t: t.clone() }))
                    .collect();
                (c, vals)
            })
            .collect();
        PlFunction {
            complex: complex.clone(),
            vertex_values,
            segs,
        }
    }

    pub fn complex(&self) -> &Arc<Complex1> {
        &self.complex
    }

    /// Knots `[0, .., 1]` and values of segment `s`.
    pub fn segment_knots(&self, s: usize) -> (Vec<Q>, Vec<Q>) {
        let (a, b) = self.complex.segment(s);
        let (k, v) = &self.segs[s];
        let mut knots = vec![Q::zero()];
        knots.extend(k.iter().cloned());
        knots.push(Q::one());
        let mut vals = vec![self.vertex_values[a].clone()];
        vals.extend(v.iter().cloned());
        vals.push(self.vertex_values[b].clone());
        (knots, vals)
    }

    pub fn eval(&self, p: &Point) -> Q {
        match p {
            Point::Vertex(v) => self.vertex_values[*v].clone(),
            Point::Interior { seg, t } => {
                let (knots, vals) = self.segment_knots(*seg);
                let i = match knots.binary_search(t) {
                    Ok(i) => return vals[i].clone(),
                    Err(i) => i,
                };
                let (t0, t1) = (&knots[i - 1], &knots[i]);
                &vals[i - 1] + (&vals[i] - &vals[i - 1]) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn eval_f64(&self, p: &Point) -> f64 {
        qf(&self.eval(p))
    }

    pub fn max_value(&self) -> Q {
        let mut m = self.vertex_values.iter().max().cloned().unwrap_or_else(Q::zero);
        for (_, v) in &self.segs {
            if let Some(x) = v.iter().max() {
                if *x > m {
                    m = x.clone();
                }
            }
        }
        m
    }

    /// `self ∘ map` for a total map.
    pub fn pullback(&self, map: &PlMap) -> Result<PlFunction> {
        if !map.is_total() {
            return Err(Error::Precondition("pullback requires a total map".into()));
        }
        let src = map.source();
        let mut segs = Vec::with_capacity(src.segment_count());
        for (s, si) in map.segment_images().iter().enumerate() {
            let mut cuts = si.breaks.clone();
            for (k, piece) in si.pieces.iter().enumerate() {
                if let Piece::Affine { seg, from, to } = piece {
                    let (lo, hi) = si.bounds(k);
                    for u in &self.segs[*seg].0 {
                        if (from < u && u < to) || (to < u && u < from) {
                            cuts.push(&lo + (u - from) * (&hi - &lo) / (to - from));
                        }
                    }
                }
            }
            let cuts = sorted_unique(cuts);
            let vals = cuts
                .iter()
                .map(|t| self.eval(&map.try_eval(&Point::Interior { seg: s, t: t.clone() }).unwrap()))
                .collect();
            segs.push((cuts, vals));
        }
        let vertex_values = map
            .vertex_images()
            .iter()
            .map(|p| self.eval(p.as_ref().unwrap()))
            .collect();
        Ok(PlFunction {
            complex: src.clone(),
            vertex_values,
            segs,
        })
    }
}

/// `{p : f(p) satisfies th}`, computed exactly.
pub fn threshold_set(f: &PlFunction, th: &Threshold) -> PlSet {
    let cx = f.complex();
    let mut cuts = Vec::with_capacity(cx.segment_count());
    for s in 0..cx.segment_count() {
        let (knots, vals) = f.segment_knots(s);
        let mut c: Vec<Q> = knots.clone();
        for i in 1..knots.len() {
            let (y0, y1) = (&vals[i - 1], &vals[i]);
            for lvl in th.levels() {
                if (y0 < lvl && lvl < y1) || (y1 < lvl && lvl < y0) {
                    c.push(&knots[i - 1] + (&knots[i] - &knots[i - 1]) * (lvl - y0) / (y1 - y0));
                }
            }
        }
        cuts.push(c);
    }
    PlSet::from_predicate(cx, cuts, |p| th.holds(&f.eval(p)))
}

/// Whether the closed star of node `knots[i]` on a segment lies in `set`.
fn closed_star_in(set: &PlSet, s: usize, knots: &[Q], i: usize) -> bool {
    let pt = |t: &Q| set.complex().point_on(s, t.clone());
    let mut ok = set.contains(&pt(&knots[i]));
    if i > 0 {
        ok &= set.contains(&pt(&knots[i - 1])) && set.contains(&pt(&half(&knots[i - 1], &knots[i])));
    }
    if i + 1 < knots.len() {
        ok &= set.contains(&pt(&knots[i + 1])) && set.contains(&pt(&half(&knots[i], &knots[i + 1])));
    }
    ok
}

/// A PL partition of unity subordinate to an open cover: `f_i >= 0`,
/// `Σ f_i = 1`, and `{f_i > 0} ⊂ U_i`.
///
/// Nodes are the vertices, all cuts of the cover and the quarter points of
/// every gap between them; node weights are 1 for each set containing the
/// closed star of the node, normalized, and interpolated linearly.
pub fn partition_of_unity(cover: &Cover) -> Result<Vec<PlFunction>> {
    let Some(first) = cover.first() else {
        return Err(Error::NotCovering("empty cover".into()));
    };
    let cx = first.complex().clone();
    if let Some(p) = super::set::uncovered_point(&cx, cover) {
        return Err(Error::NotCovering(cx.describe(&p)));
    }
    let n = cover.len();
    let seg_nodes: Vec<Vec<Q>> = (0..cx.segment_count())
        .map(|s| {
            let mut c = Vec::new();
            for u in cover {
                c.extend(u.seg_cuts(s).iter().cloned());
            }
            quarter_refine(&c)
        })
        .collect();
    let weights = |phi: Vec<bool>, at: String| -> Result<Vec<Q>> {
        let total = phi.iter().filter(|b| **b).count();
        if total == 0 {
            return Err(Error::NotCovering(format!("no set contains the closed star of {at}")));
        }
        Ok(phi
            .into_iter()
            .map(|b| if b { q(1, total as i64) } else { Q::zero() })
            .collect())
    };
    let mut vertex_w: Vec<Vec<Q>> = Vec::with_capacity(cx.vertex_count());
    for v in 0..cx.vertex_count() {
        let phi = cover
            .iter()
            .map(|u| {
                let mut ok = u.contains(&Point::Vertex(v));
                for (s, &(a, b)) in cx.segments().iter().enumerate() {
                    let mut knots = vec![Q::zero()];
                    knots.extend(seg_nodes[s].iter().cloned());
                    knots.push(Q::one());
                    if a == v {
                        ok &= closed_star_in(u, s, &knots, 0);
                    }
                    if b == v {
                        ok &= closed_star_in(u, s, &knots, knots.len() - 1);
                    }
                }
                ok
            })
            .collect();
        vertex_w.push(weights(phi, cx.vertex_id(v).to_string())?);
    }
    let mut seg_w: Vec<Vec<Vec<Q>>> = Vec::with_capacity(cx.segment_count());
    for (s, nodes) in seg_nodes.iter().enumerate() {
        let mut knots = vec![Q::zero()];
        knots.extend(nodes.iter().cloned());
        knots.push(Q::one());
        let mut per_node = Vec::with_capacity(nodes.len());
        for i in 1..knots.len() - 1 {
            let phi = cover.iter().map(|u| closed_star_in(u, s, &knots, i)).collect();
            per_node.push(weights(phi, format!("segment {s} @ {}", super::format_q(&knots[i])))?);
        }
        seg_w.push(per_node);
    }
    Ok((0..n)
        .map(|i| PlFunction {
            complex: cx.clone(),
            vertex_values: vertex_w.iter().map(|w| w[i].clone()).collect(),
            segs: seg_nodes
                .iter()
                .zip(&seg_w)
                .map(|(nodes, w)| (nodes.clone(), w.iter().map(|x| x[i].clone()).collect()))
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::qi;

    fn unit() -> Arc<Complex1> {
        Arc::new(Complex1::path(["0", "1"]).unwrap())
    }

    #[test]
    fn two_set_partition() {
        let cx = unit();
        let u1 = PlSet::open_star(&cx, 0, &q(2, 3));
        let u2 = PlSet::open_star(&cx, 1, &q(2, 3));
        let pu = partition_of_unity(&vec![u1.clone(), u2.clone()]).unwrap();
        assert_eq!(pu[0].eval(&Point::Vertex(0)), qi(1));
        assert_eq!(pu[1].eval(&Point::Vertex(1)), qi(1));
        let mid = Point::Interior { seg: 0, t: q(1, 2) };
        assert_eq!(pu[0].eval(&mid), q(1, 2));
        assert_eq!(pu[1].eval(&mid), q(1, 2));
        for (f, u) in pu.iter().zip([&u1, &u2]) {
            let supp = threshold_set(f, &Threshold::Above(Q::zero()));
            assert!(supp.is_subset(u));
        }
    }

    #[test]
    fn uncovered_cover_is_rejected() {
        let cx = unit();
        let u1 = PlSet::open_star(&cx, 0, &q(1, 3));
        assert!(matches!(partition_of_unity(&vec![u1]), Err(Error::NotCovering(_))));
    }

    #[test]
    fn threshold_solves_exactly() {
        let cx = unit();
        let f = PlFunction::from_nodes(&cx, vec![], |p| match p {
            Point::Vertex(0) => qi(0),
            _ => qi(1),
        });
        let s = threshold_set(&f, &Threshold::Band(q(1, 3), q(1, 2)));
        assert_eq!(s, PlSet::interval(&cx, 0, &q(1, 3), &q(1, 2)));
    }
}
