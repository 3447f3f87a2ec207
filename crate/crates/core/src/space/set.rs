use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{half, sorted_unique, Complex1, Point, Q};

/// A constructible subset of a complex: finitely many points and open
/// intervals. Each segment is cut at finitely many parameters; membership is
/// recorded for every cut point and every gap between consecutive cuts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlSet {
    complex: Arc<Complex1>,
    vertices: Vec<bool>,
    segs: Vec<SegSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SegSet {
    cuts: Vec<Q>,
    at_cut: Vec<bool>,
    /// `gaps.len() == cuts.len() + 1`.
    gaps: Vec<bool>,
}

/// Open subsets are represented by the same type; `is_open` checks it.
pub type OpenSet = PlSet;

/// A finite family of open sets.
pub type Cover = Vec<OpenSet>;

impl SegSet {
    fn knots(&self) -> Vec<Q> {
        let mut k = Vec::with_capacity(self.cuts.len() + 2);
        k.push(Q::zero());
        k.extend(self.cuts.iter().cloned());
        k.push(Q::one());
        k
    }

    fn contains(&self, t: &Q) -> bool {
        match self.cuts.binary_search(t) {
            Ok(i) => self.at_cut[i],
            Err(i) => self.gaps[i],
        }
    }

    /// Drops cuts that do not separate anything.
    fn normalize(&mut self) {
        let mut i = 0;
        while i < self.cuts.len() {
            if self.at_cut[i] == self.gaps[i] && self.gaps[i] == self.gaps[i + 1] {
                self.cuts.remove(i);
                self.at_cut.remove(i);
                self.gaps.remove(i + 1);
            } else {
                i += 1;
            }
        }
    }
}

impl PlSet {
    /// Builds the set `{p : pred(p)}`, assuming membership is constant on
    /// every open gap between the given cuts (evaluated at gap midpoints).
    pub fn from_predicate(
        complex: &Arc<Complex1>,
        cuts: Vec<Vec<Q>>,
        pred: impl Fn(&Point) -> bool,
    ) -> PlSet {
        let vertices = (0..complex.vertex_count())
            .map(|v| pred(&Point::Vertex(v)))
            .collect();
        let mut segs = Vec::with_capacity(complex.segment_count());
        for s in 0..complex.segment_count() {
            let c: Vec<Q> = cuts
                .get(s)
                .map(|c| {
                    c.iter()
                        .filter(|t| t.is_positive() && **t < Q::one())
                        .cloned()
                        .collect()
                })
                .unwrap_or_default();
            let c = sorted_unique(c);
            let at_cut = c
                .iter()
                .map(|t| pred(&Point::Interior { seg: s, t: t.clone() }))
                .collect();
            let mut knots = vec![Q::zero()];
            knots.extend(c.iter().cloned());
            knots.push(Q::one());
            let gaps = knots
                .windows(2)
                .map(|w| pred(&Point::Interior { seg: s, t: half(&w[0], &w[1]) }))
                .collect();
            let mut ss = SegSet { cuts: c, at_cut, gaps };
            ss.normalize();
            segs.push(ss);
        }
        PlSet {
            complex: complex.clone(),
            vertices,
            segs,
        }
    }

    pub fn empty(complex: &Arc<Complex1>) -> PlSet {
        PlSet::from_predicate(complex, Vec::new(), |_| false)
    }

    pub fn full(complex: &Arc<Complex1>) -> PlSet {
        PlSet::from_predicate(complex, Vec::new(), |_| true)
    }

    pub fn point(complex: &Arc<Complex1>, p: &Point) -> PlSet {
        let cuts = match p {
            Point::Interior { seg, t } => {
                let mut c = vec![Vec::new(); complex.segment_count()];
                c[*seg].push(t.clone());
                c
            }
            Point::Vertex(_) => Vec::new(),
        };
        PlSet::from_predicate(complex, cuts, |x| x == p)
    }

    /// Set of vertices, given by index.
    pub fn vertex_set(complex: &Arc<Complex1>, vs: &[usize]) -> PlSet {
        PlSet::from_predicate(complex, Vec::new(), |p| match p {
            Point::Vertex(v) => vs.contains(v),
            _ => false,
        })
    }

    /// Open interval `(from, to)` of the interior of segment `seg`.
    pub fn interval(complex: &Arc<Complex1>, seg: usize, from: &Q, to: &Q) -> PlSet {
        let mut cuts = vec![Vec::new(); complex.segment_count()];
        cuts[seg] = vec![from.clone(), to.clone()];
        PlSet::from_predicate(complex, cuts, |p| match p {
            Point::Interior { seg: s, t } => *s == seg && from < t && t < to,
            _ => false,
        })
    }

    /// Open star of vertex `v`: the vertex and parameter distance `< radius`
    /// along every incident segment end, with `0 < radius <= 1`.
    pub fn open_star(complex: &Arc<Complex1>, v: usize, radius: &Q) -> PlSet {
        let r = radius.clone().min(Q::one());
        let cuts = complex
            .segments()
            .iter()
            .map(|&(a, b)| {
                let mut c = Vec::new();
                if a == v {
                    c.push(r.clone());
                }
                if b == v {
                    c.push(Q::one() - &r);
                }
                c
            })
            .collect();
        PlSet::from_predicate(complex, cuts, |p| match p {
            Point::Vertex(w) => *w == v,
            Point::Interior { seg, t } => {
                let (a, b) = complex.segment(*seg);
                (a == v && *t < r) || (b == v && Q::one() - t < r)
            }
        })
    }

    pub fn complex(&self) -> &Arc<Complex1> {
        &self.complex
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Vertex(v) => self.vertices.get(*v).copied().unwrap_or(false),
            Point::Interior { seg, t } => self.segs.get(*seg).is_some_and(|s| s.contains(t)),
        }
    }

    pub fn seg_cuts(&self, seg: usize) -> &[Q] {
        &self.segs[seg].cuts
    }

    pub fn all_cuts(&self) -> Vec<Vec<Q>> {
        self.segs.iter().map(|s| s.cuts.clone()).collect()
    }

    fn combined_cuts(&self, other: &PlSet) -> Vec<Vec<Q>> {
        self.segs
            .iter()
            .zip(&other.segs)
            .map(|(a, b)| {
                let mut c = a.cuts.clone();
                c.extend(b.cuts.iter().cloned());
                c
            })
            .collect()
    }

    pub fn union(&self, other: &PlSet) -> PlSet {
        PlSet::from_predicate(&self.complex, self.combined_cuts(other), |p| {
            self.contains(p) || other.contains(p)
        })
    }

    pub fn intersection(&self, other: &PlSet) -> PlSet {
        PlSet::from_predicate(&self.complex, self.combined_cuts(other), |p| {
            self.contains(p) && other.contains(p)
        })
    }

    pub fn difference(&self, other: &PlSet) -> PlSet {
        PlSet::from_predicate(&self.complex, self.combined_cuts(other), |p| {
            self.contains(p) && !other.contains(p)
        })
    }

    pub fn complement(&self) -> PlSet {
        PlSet::from_predicate(&self.complex, self.all_cuts(), |p| !self.contains(p))
    }

    pub fn union_all<'a>(complex: &Arc<Complex1>, sets: impl IntoIterator<Item = &'a PlSet>) -> PlSet {
        sets.into_iter()
            .fold(PlSet::empty(complex), |acc, s| acc.union(s))
    }

    pub fn is_empty(&self) -> bool {
        !self.vertices.iter().any(|b| *b)
            && self
                .segs
                .iter()
                .all(|s| !s.at_cut.iter().any(|b| *b) && !s.gaps.iter().any(|b| *b))
    }

    pub fn is_subset(&self, other: &PlSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Whether the first or last gap of segment `s` lies in the set.
    fn end_gap(&self, s: usize, at_start: bool) -> bool {
        let g = &self.segs[s].gaps;
        if at_start {
            g[0]
        } else {
            *g.last().unwrap()
        }
    }

    pub fn closure(&self) -> PlSet {
        let mut out = self.clone();
        for (s, &(a, b)) in self.complex.segments().iter().enumerate() {
            if self.end_gap(s, true) {
                out.vertices[a] = true;
            }
            if self.end_gap(s, false) {
                out.vertices[b] = true;
            }
            let seg = &mut out.segs[s];
            for i in 0..seg.cuts.len() {
                seg.at_cut[i] |= seg.gaps[i] || seg.gaps[i + 1];
            }
            seg.normalize();
        }
        out
    }

    pub fn interior(&self) -> PlSet {
        let mut out = self.clone();
        for (s, &(a, b)) in self.complex.segments().iter().enumerate() {
            if !self.end_gap(s, true) {
                out.vertices[a] = false;
            }
            if !self.end_gap(s, false) {
                out.vertices[b] = false;
            }
            let seg = &mut out.segs[s];
            for i in 0..seg.cuts.len() {
                seg.at_cut[i] &= seg.gaps[i] && seg.gaps[i + 1];
            }
            seg.normalize();
        }
        out
    }

    pub fn is_open(&self) -> bool {
        self.interior() == *self
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == *self
    }

    /// One representative point for each atom (vertex, cut point, open gap),
    /// whether or not it belongs to the set.
    pub fn atom_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = (0..self.vertices.len()).map(Point::Vertex).collect();
        for (s, seg) in self.segs.iter().enumerate() {
            let knots = seg.knots();
            for (i, w) in knots.windows(2).enumerate() {
                if i > 0 {
                    out.push(Point::Interior { seg: s, t: w[0].clone() });
                }
                out.push(Point::Interior { seg: s, t: half(&w[0], &w[1]) });
            }
        }
        out
    }

    /// The set as isolated points (vertices and cut points) and open
    /// intervals `(seg, from, to)` between consecutive cuts.
    pub fn parts(&self) -> (Vec<Point>, Vec<(usize, Q, Q)>) {
        let mut points: Vec<Point> = (0..self.vertices.len())
            .filter(|&v| self.vertices[v])
            .map(Point::Vertex)
            .collect();
        let mut intervals = Vec::new();
        for (s, seg) in self.segs.iter().enumerate() {
            for (i, c) in seg.cuts.iter().enumerate() {
                if seg.at_cut[i] {
                    points.push(Point::Interior { seg: s, t: c.clone() });
                }
            }
            let knots = seg.knots();
            for (i, w) in knots.windows(2).enumerate() {
                if seg.gaps[i] {
                    intervals.push((s, w[0].clone(), w[1].clone()));
                }
            }
        }
        (points, intervals)
    }

    /// A random point of the open gaps of the set, chosen proportionally to
    /// length; `None` when the set has no interior in any segment.
    pub fn random_point<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Option<Point> {
        let mut gaps = Vec::new();
        for (s, seg) in self.segs.iter().enumerate() {
            let knots = seg.knots();
            for (i, w) in knots.windows(2).enumerate() {
                if seg.gaps[i] {
                    gaps.push((s, w[0].clone(), w[1].clone()));
                }
            }
        }
        let total: Q = gaps.iter().map(|(_, a, b)| b - a).sum();
        if gaps.is_empty() {
            return None;
        }
        let den: i64 = 1 << 30;
        let mut u = &total * Q::new(rng.gen_range(1..den).into(), den.into());
        for (seg, a, b) in gaps {
            let len = &b - &a;
            if u < len {
                return Some(Point::Interior { seg, t: a + u });
            }
            u -= len;
        }
        unreachable!("u < total")
    }

    /// Smallest representative point contained in the set (by `Point` order).
    pub fn min_point(&self) -> Option<Point> {
        self.atom_points().into_iter().filter(|p| self.contains(p)).min()
    }

    /// Connected components, ordered by their smallest representative point.
    pub fn components(&self) -> Vec<PlSet> {
        // atoms: vertices, then per segment alternating gap/cut/gap/...
        let nv = self.vertices.len();
        let mut offsets = Vec::with_capacity(self.segs.len());
        let mut total = nv;
        for seg in &self.segs {
            offsets.push(total);
            total += 2 * seg.cuts.len() + 1;
        }
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let n = p[c];
                p[c] = r;
                c = n;
            }
            r
        }
        let mut member = vec![false; total];
        member[..nv].copy_from_slice(&self.vertices);
        for (s, seg) in self.segs.iter().enumerate() {
            let off = offsets[s];
            for (i, g) in seg.gaps.iter().enumerate() {
                member[off + 2 * i] = *g;
            }
            for (i, c) in seg.at_cut.iter().enumerate() {
                member[off + 2 * i + 1] = *c;
            }
            let (a, b) = self.complex.segment(s);
            let last = off + 2 * seg.cuts.len();
            let mut links = vec![(a, off), (last, b)];
            for j in off..last {
                links.push((j, j + 1));
            }
            for (x, y) in links {
                if member[x] && member[y] {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                    if rx != ry {
                        parent[rx.max(ry)] = rx.min(ry);
                    }
                }
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        let mut label = vec![usize::MAX; total];
        for x in 0..total {
            if member[x] {
                let r = find(&mut parent, x);
                let idx = match roots.iter().position(|&y| y == r) {
                    Some(i) => i,
                    None => {
                        roots.push(r);
                        roots.len() - 1
                    }
                };
                label[x] = idx;
            }
        }
        let mut comps: Vec<PlSet> = (0..roots.len())
            .map(|c| {
                let mut set = self.clone();
                for v in 0..nv {
                    set.vertices[v] = label[v] == c;
                }
                for (s, seg) in set.segs.iter_mut().enumerate() {
                    let off = offsets[s];
                    for i in 0..seg.gaps.len() {
                        seg.gaps[i] = label[off + 2 * i] == c;
                    }
                    for i in 0..seg.at_cut.len() {
                        seg.at_cut[i] = label[off + 2 * i + 1] == c;
                    }
                    seg.normalize();
                }
                set
            })
            .collect();
        comps.sort_by_key(|c| c.min_point());
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Compact human-readable description.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (v, b) in self.vertices.iter().enumerate() {
            if *b {
                parts.push(self.complex.vertex_id(v).to_string());
            }
        }
        for (s, seg) in self.segs.iter().enumerate() {
            let knots = seg.knots();
            for (i, g) in seg.gaps.iter().enumerate() {
                if *g {
                    parts.push(format!(
                        "seg{s}({},{})",
                        super::format_q(&knots[i]),
                        super::format_q(&knots[i + 1])
                    ));
                }
            }
            for (i, c) in seg.at_cut.iter().enumerate() {
                if *c {
                    parts.push(format!("seg{s}@{}", super::format_q(&seg.cuts[i])));
                }
            }
        }
        format!("{{{}}}", parts.join(", "))
    }
}

/// Vertices, cut points and gap midpoints of the subdivision by `cuts`.
pub fn refinement_points(complex: &Complex1, cuts: &[Vec<Q>]) -> Vec<Point> {
    let mut out: Vec<Point> = (0..complex.vertex_count()).map(Point::Vertex).collect();
    for s in 0..complex.segment_count() {
        let mut knots = vec![Q::zero()];
        knots.extend(sorted_unique(
            cuts.get(s)
                .cloned()
                .unwrap_or_default()
                .into_iter()
                .filter(|t| t.is_positive() && *t < Q::one())
                .collect(),
        ));
        knots.push(Q::one());
        for (i, w) in knots.windows(2).enumerate() {
            if i > 0 {
                out.push(Point::Interior { seg: s, t: w[0].clone() });
            }
            out.push(Point::Interior { seg: s, t: half(&w[0], &w[1]) });
        }
    }
    out
}

/// First point of the complex not covered by the union of `cover`.
pub fn uncovered_point(complex: &Arc<Complex1>, cover: &[OpenSet]) -> Option<Point> {
    PlSet::union_all(complex, cover).complement().min_point()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{q, qi};

    fn unit3() -> Arc<Complex1> {
        Arc::new(Complex1::path(["0", "1/3", "2/3", "1"]).unwrap())
    }

    #[test]
    fn stars_are_open_and_closure_adds_boundary() {
        let cx = unit3();
        let st = PlSet::open_star(&cx, 1, &qi(1));
        assert!(st.is_open());
        assert!(st.contains(&Point::Vertex(1)));
        assert!(!st.contains(&Point::Vertex(0)));
        let cl = st.closure();
        assert!(cl.contains(&Point::Vertex(0)) && cl.contains(&Point::Vertex(2)));
        assert!(cl.is_closed());
        // vertex 0 is an endpoint, so it is interior to the closure
        assert!(st.is_subset(&cl.interior()) && cl.interior().contains(&Point::Vertex(0)));
    }

    #[test]
    fn components_split_disjoint_intervals() {
        let cx = unit3();
        let a = PlSet::interval(&cx, 0, &q(1, 4), &q(1, 2));
        let b = PlSet::open_star(&cx, 3, &q(1, 2));
        let u = a.union(&b);
        let comps = u.components();
        // ordered by smallest point; vertices sort before interior points
        assert_eq!(comps, vec![b.clone(), a.clone()]);
        assert!(u.is_open());
        assert!(!PlSet::point(&cx, &Point::Vertex(1)).is_open());
    }

    #[test]
    fn boolean_algebra() {
        let cx = unit3();
        let a = PlSet::open_star(&cx, 0, &qi(1)).union(&PlSet::open_star(&cx, 1, &qi(1)));
        let b = PlSet::open_star(&cx, 2, &qi(1)).union(&PlSet::open_star(&cx, 3, &qi(1)));
        assert_eq!(a.union(&b), PlSet::full(&cx));
        let ab = a.intersection(&b);
        assert_eq!(ab, PlSet::interval(&cx, 1, &qi(0), &qi(1)));
        assert!(a.difference(&a).is_empty());
        assert_eq!(a.complement().complement(), a);
        assert!(uncovered_point(&cx, &[a.clone()]).is_some());
        assert!(uncovered_point(&cx, &[a, b]).is_none());
    }
}
