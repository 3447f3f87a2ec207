use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::{format_q, q, Q};
use crate::error::{Error, Result};

/// A finite 1-dimensional simplicial complex (multigraph with loops allowed).
///
/// Compactness and covering dimension at most one hold by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex1 {
    vertices: Vec<String>,
    segments: Vec<(usize, usize)>,
    components: Vec<usize>,
    index: HashMap<String, usize>,
}

/// A direction of motion at a point: along `seg` with increasing (`forward`)
/// or decreasing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dir {
    pub seg: usize,
    pub forward: bool,
}

/// A point of a complex: a vertex or an interior point `t in (0,1)` of a segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Vertex(usize),
    Interior { seg: usize, t: Q },
}

impl Complex1 {
    pub fn new(vertices: Vec<String>, segments: Vec<(usize, usize)>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::schema(
                    format!("/vertices/{i}"),
                    format!("duplicate vertex id {v:?}"),
                ));
            }
        }
        for (k, &(a, b)) in segments.iter().enumerate() {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::schema(
                    format!("/segments/{k}"),
                    "segment endpoint references a missing vertex",
                ));
            }
        }
        // union-find for component labels
        let mut parent: Vec<usize> = (0..vertices.len()).collect();
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
        for &(a, b) in &segments {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut labels = HashMap::new();
        let mut components = Vec::with_capacity(vertices.len());
        for v in 0..vertices.len() {
            let r = find(&mut parent, v);
            let next = labels.len();
            components.push(*labels.entry(r).or_insert(next));
        }
        Ok(Complex1 {
            vertices,
            segments,
            components,
            index,
        })
    }

    /// Discrete space with the given points.
    pub fn discrete<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        Complex1::new(ids.into_iter().map(Into::into).collect(), Vec::new())
    }

    /// Path complex `n0 - n1 - ... - nk` with the given vertex labels.
    pub fn path<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let vertices: Vec<String> = ids.into_iter().map(Into::into).collect();
        let segments = (1..vertices.len()).map(|i| (i - 1, i)).collect();
        Complex1::new(vertices, segments)
    }

    /// Cycle `n0 - n1 - ... - nk - n0`.
    pub fn cycle<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let vertices: Vec<String> = ids.into_iter().map(Into::into).collect();
        let n = vertices.len();
        let segments = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Complex1::new(vertices, segments)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vertex(&self, id: &str) -> Point {
        Point::Vertex(
            self.vertex_index(id)
                .unwrap_or_else(|| panic!("no vertex {id:?}")),
        )
    }

    pub fn segments(&self) -> &[(usize, usize)] {
        &self.segments
    }

    pub fn segment(&self, s: usize) -> (usize, usize) {
        self.segments[s]
    }

    pub fn component_of_vertex(&self, v: usize) -> usize {
        self.components[v]
    }

    pub fn component_count(&self) -> usize {
        self.components.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn component_of(&self, p: &Point) -> usize {
        match p {
            Point::Vertex(v) => self.components[*v],
            Point::Interior { seg, .. } => self.components[self.segments[*seg].0],
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.segments.is_empty()
    }

    /// Always true: a finite complex is compact.
    pub fn is_compact(&self) -> bool {
        true
    }

    /// Always at most one for a 1-complex.
    pub fn covering_dimension(&self) -> usize {
        usize::from(!self.segments.is_empty())
    }

    /// The canonical point at parameter `t in [0,1]` of segment `seg`.
    pub fn point_on(&self, seg: usize, t: Q) -> Point {
        let (a, b) = self.segments[seg];
        if t.is_zero() {
            Point::Vertex(a)
        } else if t.is_one() {
            Point::Vertex(b)
        } else {
            Point::Interior { seg, t }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Vertex(v) => *v < self.vertices.len(),
            Point::Interior { seg, t } => {
                *seg < self.segments.len() && t.is_positive() && *t < Q::one()
            }
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideComplex(format!("{p:?}")))
        }
    }

    /// Directions leaving `p`. A vertex has one per incident segment end
    /// (two for a loop); an interior point has two.
    pub fn directions(&self, p: &Point) -> Vec<Dir> {
        match p {
            Point::Vertex(v) => {
                let mut out = Vec::new();
                for (s, &(a, b)) in self.segments.iter().enumerate() {
                    if a == *v {
                        out.push(Dir { seg: s, forward: true });
                    }
                    if b == *v {
                        out.push(Dir { seg: s, forward: false });
                    }
                }
                out
            }
            Point::Interior { seg, .. } => vec![
                Dir { seg: *seg, forward: true },
                Dir { seg: *seg, forward: false },
            ],
        }
    }

    /// Parameter of `p` when leaving it along `d`.
    pub fn start_param(&self, p: &Point, d: Dir) -> Q {
        match p {
            Point::Vertex(_) => {
                if d.forward {
                    Q::zero()
                } else {
                    Q::one()
                }
            }
            Point::Interior { t, .. } => t.clone(),
        }
    }

    /// Largest parameter distance one can travel from `p` along `d`
    /// before hitting the segment end.
    pub fn reach(&self, p: &Point, d: Dir) -> Q {
        let t = self.start_param(p, d);
        if d.forward {
            Q::one() - t
        } else {
            t
        }
    }

    /// Moves `delta` (parameter length) from `p` along `d`.
    pub fn advance(&self, p: &Point, d: Dir, delta: &Q) -> Point {
        let t = self.start_param(p, d);
        let t = if d.forward { t + delta } else { t - delta };
        self.point_on(d.seg, t)
    }

    /// Parameter of `p` on segment `seg`, if `p` lies on its closure.
    /// For a vertex that is both endpoints (loop) the start parameter 0 is returned.
    pub fn param_on(&self, p: &Point, seg: usize) -> Option<Q> {
        match p {
            Point::Interior { seg: s, t } if *s == seg => Some(t.clone()),
            Point::Interior { .. } => None,
            Point::Vertex(v) => {
                let (a, b) = self.segments[seg];
                if a == *v {
                    Some(Q::zero())
                } else if b == *v {
                    Some(Q::one())
                } else {
                    None
                }
            }
        }
    }

    /// Human-readable description using vertex ids.
    pub fn describe(&self, p: &Point) -> String {
        match p {
            Point::Vertex(v) => self
                .vertices
                .get(*v)
                .cloned()
                .unwrap_or_else(|| format!("<vertex {v}>")),
            Point::Interior { seg, t } => format!("segment {seg} @ {}", format_q(t)),
        }
    }

    /// All vertices followed by a few interior points per segment, for
    /// exhaustive-ish checks.
    pub fn sample_grid(&self, per_segment: usize) -> Vec<Point> {
        let mut out: Vec<Point> = (0..self.vertices.len()).map(Point::Vertex).collect();
        for s in 0..self.segments.len() {
            for k in 1..=per_segment {
                out.push(Point::Interior {
                    seg: s,
                    t: q(k as i64, per_segment as i64 + 1),
                });
            }
        }
        out
    }

    /// A uniformly-ish random point with a dyadic parameter.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let nv = self.vertices.len();
        let ns = self.segments.len();
        if ns == 0 || rng.gen_bool(0.05) {
            return Point::Vertex(rng.gen_range(0..nv));
        }
        let seg = rng.gen_range(0..ns);
        let den: i64 = 1 << 30;
        let num = rng.gen_range(1..den);
        Point::Interior { seg, t: q(num, den) }
    }
}

impl Point {
    pub fn is_vertex(&self) -> bool {
        matches!(self, Point::Vertex(_))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Vertex(v) => write!(f, "vertex {v}"),
            Point::Interior { seg, t } => write!(f, "segment {seg} @ {}", format_q(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::qi;

    #[test]
    fn rejects_bad_segment_reference() {
        let err = Complex1::new(vec!["a".into()], vec![(0, 1)]).unwrap_err();
        assert!(err.to_string().contains("/segments/0"));
    }

    #[test]
    fn components_and_directions() {
        let cx = Complex1::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![(0, 1), (2, 2)],
        )
        .unwrap();
        assert_eq!(cx.component_count(), 2);
        assert_eq!(cx.directions(&Point::Vertex(2)).len(), 2);
        assert_eq!(cx.directions(&Point::Vertex(0)).len(), 1);
        assert_eq!(cx.point_on(0, qi(1)), Point::Vertex(1));
        assert_eq!(cx.covering_dimension(), 1);
        assert!(cx.is_compact());
    }
}
