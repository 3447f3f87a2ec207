use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{format_q, half, q, sorted_unique, Complex1, Dir, PlSet, Point, Q};
use crate::error::{Error, Result};

/// Image of one closed subsegment of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    /// Affine path in target segment `seg` from parameter `from` to `to`.
    Affine { seg: usize, from: Q, to: Q },
    Constant(Point),
    /// Outside the domain of a partial map.
    Undefined,
}

/// Subdivision of one source segment: `breaks` strictly inside `(0,1)`,
/// sorted, and one piece per subsegment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentImage {
    pub breaks: Vec<Q>,
    pub pieces: Vec<Piece>,
}

impl SegmentImage {
    pub fn single(piece: Piece) -> Self {
        SegmentImage {
            breaks: Vec::new(),
            pieces: vec![piece],
        }
    }

    /// Parameter interval of piece `k`.
    pub fn bounds(&self, k: usize) -> (Q, Q) {
        let lo = if k == 0 { Q::zero() } else { self.breaks[k - 1].clone() };
        let hi = if k == self.breaks.len() {
            Q::one()
        } else {
            self.breaks[k].clone()
        };
        (lo, hi)
    }

    /// Index of the piece whose open interval contains `t`, or `Err(k)` when
    /// `t` equals `breaks[k]`.
    fn locate(&self, t: &Q) -> std::result::Result<usize, usize> {
        match self.breaks.binary_search(t) {
            Ok(k) => Err(k),
            Err(k) => Ok(k),
        }
    }
}

/// Local behaviour of a map when leaving a point in a given direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Germ {
    pub image: Point,
    /// Image direction, `None` for a locally constant germ.
    pub dir: Option<Dir>,
    /// Ratio of target to source parameter speed.
    pub slope: Q,
    /// Source parameter length over which the germ stays affine.
    pub reach: Q,
}

/// Outcome of the local homeomorphism test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalHomeoReport {
    pub ok: bool,
    /// Number of vertices and breakpoints whose star map was checked.
    pub checked_points: usize,
    /// Folding or non-open point, with a reason.
    pub counterexample: Option<(Point, String)>,
}

/// A (possibly partial) piecewise-linear map between 1-complexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlMap {
    source: Arc<Complex1>,
    target: Arc<Complex1>,
    vertex_images: Vec<Option<Point>>,
    segments: Vec<SegmentImage>,
}

fn piece_start(target: &Complex1, piece: &Piece) -> Option<Point> {
    match piece {
        Piece::Affine { seg, from, .. } => Some(target.point_on(*seg, from.clone())),
        Piece::Constant(p) => Some(p.clone()),
        Piece::Undefined => None,
    }
}

fn piece_end(target: &Complex1, piece: &Piece) -> Option<Point> {
    match piece {
        Piece::Affine { seg, to, .. } => Some(target.point_on(*seg, to.clone())),
        Piece::Constant(p) => Some(p.clone()),
        Piece::Undefined => None,
    }
}

/// Affine parameter inside a piece spanning `[lo, hi]`.
fn affine_at(from: &Q, to: &Q, lo: &Q, hi: &Q, t: &Q) -> Q {
    from + (to - from) * (t - lo) / (hi - lo)
}

impl PlMap {
    pub fn new(
        source: Arc<Complex1>,
        target: Arc<Complex1>,
        vertex_images: Vec<Option<Point>>,
        segments: Vec<SegmentImage>,
    ) -> Result<Self> {
        if vertex_images.len() != source.vertex_count() {
            return Err(Error::schema(
                "/vertex_images",
                format!(
                    "expected {} vertex images, found {}",
                    source.vertex_count(),
                    vertex_images.len()
                ),
            ));
        }
        if segments.len() != source.segment_count() {
            return Err(Error::schema(
                "/segment_images",
                format!(
                    "expected {} segment images, found {}",
                    source.segment_count(),
                    segments.len()
                ),
            ));
        }
        for (v, img) in vertex_images.iter().enumerate() {
            if let Some(p) = img {
                if !target.contains(p) {
                    return Err(Error::schema(
                        format!("/vertex_images/{}", source.vertex_id(v)),
                        "image outside target complex",
                    ));
                }
            }
        }
        let mut normalized = Vec::with_capacity(segments.len());
        for (s, mut si) in segments.into_iter().enumerate() {
            let path = format!("/segment_images/{s}");
            if si.pieces.len() != si.breaks.len() + 1 {
                return Err(Error::schema(
                    format!("{path}/targets"),
                    "need exactly one target per subsegment",
                ));
            }
            for (k, b) in si.breaks.iter().enumerate() {
                if !b.is_positive() || *b >= Q::one() {
                    return Err(Error::schema(
                        format!("{path}/breaks/{k}"),
                        "breakpoint must lie in (0,1)",
                    ));
                }
                if k > 0 && si.breaks[k - 1] >= *b {
                    return Err(Error::schema(
                        format!("{path}/breaks/{k}"),
                        "breakpoints must be strictly increasing",
                    ));
                }
            }
            for (k, piece) in si.pieces.iter_mut().enumerate() {
                match piece {
                    Piece::Affine { seg, from, to } => {
                        let bad = |x: &Q| x.is_negative() || *x > Q::one();
                        if *seg >= target.segment_count() || bad(from) || bad(to) {
                            return Err(Error::schema(
                                format!("{path}/targets/{k}"),
                                "affine target outside target complex",
                            ));
                        }
                        if from == to {
                            *piece = Piece::Constant(target.point_on(*seg, from.clone()));
                        }
                    }
                    Piece::Constant(p) => {
                        if !target.contains(p) {
                            return Err(Error::schema(
                                format!("{path}/targets/{k}"),
                                "constant image outside target complex",
                            ));
                        }
                    }
                    Piece::Undefined => {}
                }
            }
            normalized.push(si);
        }
        let map = PlMap {
            source,
            target,
            vertex_images,
            segments: normalized,
        };
        map.check_continuity()?;
        Ok(map)
    }

    fn check_continuity(&self) -> Result<()> {
        for (s, si) in self.segments.iter().enumerate() {
            let (a, b) = self.source.segment(s);
            for k in 1..si.pieces.len() {
                let left = piece_end(&self.target, &si.pieces[k - 1]);
                let right = piece_start(&self.target, &si.pieces[k]);
                if let (Some(l), Some(r)) = (left, right) {
                    if l != r {
                        return Err(Error::Discontinuous(format!(
                            "segment {s} breakpoint {}",
                            format_q(&si.breaks[k - 1])
                        )));
                    }
                }
            }
            let first = piece_start(&self.target, &si.pieces[0]);
            let last = piece_end(&self.target, si.pieces.last().unwrap());
            for (v, img) in [(a, first), (b, last)] {
                if let (Some(vi), Some(p)) = (&self.vertex_images[v], img) {
                    if *vi != p {
                        return Err(Error::Discontinuous(format!(
                            "vertex {} (segment {s})",
                            self.source.vertex_id(v)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn identity(cx: Arc<Complex1>) -> Self {
        let vertex_images = (0..cx.vertex_count()).map(|v| Some(Point::Vertex(v))).collect();
        let segments = (0..cx.segment_count())
            .map(|s| {
                SegmentImage::single(Piece::Affine {
                    seg: s,
                    from: Q::zero(),
                    to: Q::one(),
                })
            })
            .collect();
        PlMap {
            source: cx.clone(),
            target: cx,
            vertex_images,
            segments,
        }
    }

    /// Map of a discrete source given by vertex images.
    pub fn from_vertex_images(
        source: Arc<Complex1>,
        target: Arc<Complex1>,
        images: Vec<Option<Point>>,
    ) -> Result<Self> {
        if !source.is_discrete() {
            return Err(Error::NotDiscrete);
        }
        PlMap::new(source, target, images, Vec::new())
    }

    pub fn source(&self) -> &Arc<Complex1> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Complex1> {
        &self.target
    }

    pub fn vertex_images(&self) -> &[Option<Point>] {
        &self.vertex_images
    }

    pub fn segment_images(&self) -> &[SegmentImage] {
        &self.segments
    }

    pub fn is_total(&self) -> bool {
        self.vertex_images.iter().all(Option::is_some)
            && self
                .segments
                .iter()
                .all(|si| si.pieces.iter().all(|p| *p != Piece::Undefined))
    }

    fn eval_piece(&self, s: usize, k: usize, t: &Q) -> Option<Point> {
        let si = &self.segments[s];
        match &si.pieces[k] {
            Piece::Affine { seg, from, to } => {
                let (lo, hi) = si.bounds(k);
                Some(self.target.point_on(*seg, affine_at(from, to, &lo, &hi, t)))
            }
            Piece::Constant(p) => Some(p.clone()),
            Piece::Undefined => None,
        }
    }

    /// Image of `p`, or `None` outside the domain.
    pub fn try_eval(&self, p: &Point) -> Option<Point> {
        match p {
            Point::Vertex(v) => self.vertex_images.get(*v).cloned().flatten(),
            Point::Interior { seg, t } => {
                let si = self.segments.get(*seg)?;
                match si.locate(t) {
                    Ok(k) => self.eval_piece(*seg, k, t),
                    Err(k) => piece_end(&self.target, &si.pieces[k])
                        .or_else(|| piece_start(&self.target, &si.pieces[k + 1])),
                }
            }
        }
    }

    pub fn eval(&self, p: &Point) -> Result<Point> {
        self.source.check_point(p)?;
        self.try_eval(p)
            .ok_or_else(|| Error::Undefined(self.source.describe(p)))
    }

    /// All points mapped onto `p`, sorted.
    ///
    /// Fails when a constant piece maps onto `p` (infinite level set).
    pub fn preimage(&self, p: &Point) -> Result<Vec<Point>> {
        self.target.check_point(p)?;
        let mut out = Vec::new();
        for (v, img) in self.vertex_images.iter().enumerate() {
            if img.as_ref() == Some(p) {
                out.push(Point::Vertex(v));
            }
        }
        for (s, si) in self.segments.iter().enumerate() {
            for (k, b) in si.breaks.iter().enumerate() {
                let img = piece_end(&self.target, &si.pieces[k])
                    .or_else(|| piece_start(&self.target, &si.pieces[k + 1]));
                if img.as_ref() == Some(p) {
                    out.push(Point::Interior { seg: s, t: b.clone() });
                }
            }
            for (k, piece) in si.pieces.iter().enumerate() {
                match piece {
                    Piece::Constant(c) if c == p => {
                        return Err(Error::DegeneratePiece {
                            segment: s,
                            piece: k,
                            image: self.target.describe(c),
                        })
                    }
                    Piece::Affine { seg, from, to } => {
                        if let Point::Interior { seg: ps, t: u } = p {
                            let inside = (from < u && u < to) || (to < u && u < from);
                            if ps == seg && inside {
                                let (lo, hi) = si.bounds(k);
                                let t = &lo + (u - from) * (&hi - &lo) / (to - from);
                                out.push(Point::Interior { seg: s, t });
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Index of the piece met when leaving parameter `t0` of segment `s`.
    fn piece_towards(&self, s: usize, t0: &Q, forward: bool) -> usize {
        let br = &self.segments[s].breaks;
        if forward {
            br.iter().filter(|b| *b <= t0).count()
        } else {
            br.iter().filter(|b| *b < t0).count()
        }
    }

    /// Germ of the map at `p` in direction `d`; `None` if undefined there.
    pub fn germ(&self, p: &Point, d: Dir) -> Option<Germ> {
        let t0 = self.source.start_param(p, d);
        let k = self.piece_towards(d.seg, &t0, d.forward);
        let si = &self.segments[d.seg];
        let (lo, hi) = si.bounds(k);
        let reach = if d.forward { &hi - &t0 } else { &t0 - &lo };
        match &si.pieces[k] {
            Piece::Undefined => None,
            Piece::Constant(c) => Some(Germ {
                image: c.clone(),
                dir: None,
                slope: Q::zero(),
                reach,
            }),
            Piece::Affine { seg, from, to } => {
                let u0 = affine_at(from, to, &lo, &hi, &t0);
                let increasing = to > from;
                Some(Germ {
                    image: self.target.point_on(*seg, u0),
                    dir: Some(Dir {
                        seg: *seg,
                        forward: increasing == d.forward,
                    }),
                    slope: (to - from).abs() / (&hi - &lo),
                    reach,
                })
            }
        }
    }

    /// Points where the star map must be checked: vertices and breakpoints.
    fn critical_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = (0..self.source.vertex_count()).map(Point::Vertex).collect();
        for (s, si) in self.segments.iter().enumerate() {
            for b in &si.breaks {
                pts.push(Point::Interior { seg: s, t: b.clone() });
            }
        }
        pts
    }

    /// Tests whether every point of the domain has a neighbourhood mapped
    /// homeomorphically onto an open set: no constant pieces, and at every
    /// vertex and breakpoint the induced map on directions is a bijection
    /// onto the directions at the image point.
    pub fn is_local_homeomorphism(&self) -> LocalHomeoReport {
        let mut checked = 0;
        for (s, si) in self.segments.iter().enumerate() {
            for (k, piece) in si.pieces.iter().enumerate() {
                if let Piece::Constant(_) = piece {
                    let (lo, hi) = si.bounds(k);
                    return LocalHomeoReport {
                        ok: false,
                        checked_points: checked,
                        counterexample: Some((
                            Point::Interior { seg: s, t: half(&lo, &hi) },
                            "constant piece collapses an interval".into(),
                        )),
                    };
                }
            }
        }
        for p in self.critical_points() {
            let Some(image) = self.try_eval(&p) else { continue };
            let dirs = self.source.directions(&p);
            let mut images = Vec::with_capacity(dirs.len());
            let mut in_domain = true;
            for d in &dirs {
                match self.germ(&p, *d).and_then(|g| g.dir) {
                    Some(id) => images.push(id),
                    None => in_domain = false,
                }
            }
            if !in_domain {
                // boundary of the domain of a partial map
                continue;
            }
            checked += 1;
            let mut sorted = images.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != images.len() {
                return LocalHomeoReport {
                    ok: false,
                    checked_points: checked,
                    counterexample: Some((p, "fold: two directions share an image germ".into())),
                };
            }
            let mut target_dirs = self.target.directions(&image);
            target_dirs.sort();
            if target_dirs != sorted {
                return LocalHomeoReport {
                    ok: false,
                    checked_points: checked,
                    counterexample: Some((
                        p,
                        "image of a neighbourhood is not open at the image point".into(),
                    )),
                };
            }
        }
        LocalHomeoReport {
            ok: true,
            checked_points: checked,
            counterexample: None,
        }
    }

    /// Maps between compact complexes are proper.
    pub fn is_proper(&self) -> bool {
        self.source.is_compact()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PlMap) -> Result<PlMap> {
        if !same_complex(&self.target, &other.source) {
            return Err(Error::GraphMismatch);
        }
        let vertex_images = self
            .vertex_images
            .iter()
            .map(|img| img.as_ref().and_then(|p| other.try_eval(p)))
            .collect();
        let mut segments = Vec::with_capacity(self.segments.len());
        for si in &self.segments {
            let mut breaks: Vec<Q> = Vec::new();
            let mut pieces: Vec<Piece> = Vec::new();
            for (k, piece) in si.pieces.iter().enumerate() {
                let (lo, hi) = si.bounds(k);
                if k > 0 {
                    breaks.push(lo.clone());
                }
                match piece {
                    Piece::Undefined => pieces.push(Piece::Undefined),
                    Piece::Constant(p) => pieces.push(
                        other
                            .try_eval(p)
                            .map_or(Piece::Undefined, Piece::Constant),
                    ),
                    Piece::Affine { seg, from, to } => {
                        let (sub_breaks, sub_pieces) =
                            other.push_affine(*seg, from, to, &lo, &hi);
                        breaks.extend(sub_breaks);
                        pieces.extend(sub_pieces);
                    }
                }
            }
            segments.push(simplify(breaks, pieces));
        }
        Ok(PlMap {
            source: self.source.clone(),
            target: other.target.clone(),
            vertex_images,
            segments,
        })
    }

    /// Pushes the affine path `[lo,hi] -> seg [from,to]` through `self`,
    /// returning the interior breaks (in the `[lo,hi]` parameter) and pieces.
    fn push_affine(&self, seg: usize, from: &Q, to: &Q, lo: &Q, hi: &Q) -> (Vec<Q>, Vec<Piece>) {
        let si = &self.segments[seg];
        let (umin, umax) = if from < to { (from, to) } else { (to, from) };
        let mut us: Vec<Q> = si
            .breaks
            .iter()
            .filter(|c| umin < *c && *c < umax)
            .cloned()
            .collect();
        if from > to {
            us.reverse();
        }
        let to_t = |u: &Q| lo + (u - from) * (hi - lo) / (to - from);
        let mut knots_u = vec![from.clone()];
        knots_u.extend(us.iter().cloned());
        knots_u.push(to.clone());
        let breaks: Vec<Q> = us.iter().map(to_t).collect();
        let mut pieces = Vec::with_capacity(knots_u.len() - 1);
        for w in knots_u.windows(2) {
            let (ua, ub) = (&w[0], &w[1]);
            let mid = half(ua, ub);
            let k = si.locate(&mid).unwrap_or_else(|k| k);
            let (clo, chi) = si.bounds(k);
            pieces.push(match &si.pieces[k] {
                Piece::Undefined => Piece::Undefined,
                Piece::Constant(p) => Piece::Constant(p.clone()),
                Piece::Affine { seg: s2, from: f2, to: t2 } => Piece::Affine {
                    seg: *s2,
                    from: affine_at(f2, t2, &clo, &chi, ua),
                    to: affine_at(f2, t2, &clo, &chi, ub),
                },
            });
        }
        (breaks, pieces)
    }

    /// Inverse of an injective map with no constant pieces. The inverse is
    /// partial when the map is not onto.
    pub fn inverse(&self) -> Result<PlMap> {
        let nt = self.target.segment_count();
        let mut per_seg: Vec<Vec<(Q, Q, Piece)>> = vec![Vec::new(); nt];
        for (s, si) in self.segments.iter().enumerate() {
            for (k, piece) in si.pieces.iter().enumerate() {
                let (lo, hi) = si.bounds(k);
                match piece {
                    Piece::Undefined => {}
                    Piece::Constant(p) => {
                        return Err(Error::NotInjective(format!(
                            "segment {s} piece {k} is constant at {}",
                            self.target.describe(p)
                        )))
                    }
                    Piece::Affine { seg, from, to } => {
                        let (a, b, inv) = if from < to {
                            (from.clone(), to.clone(), Piece::Affine { seg: s, from: lo, to: hi })
                        } else {
                            (to.clone(), from.clone(), Piece::Affine { seg: s, from: hi, to: lo })
                        };
                        per_seg[*seg].push((a, b, inv));
                    }
                }
            }
        }
        let mut segments = Vec::with_capacity(nt);
        for (ts, mut ivs) in per_seg.into_iter().enumerate() {
            ivs.sort_by(|x, y| x.0.cmp(&y.0));
            let mut breaks = Vec::new();
            let mut pieces = Vec::new();
            let mut cursor = Q::zero();
            for (a, b, inv) in ivs {
                if a < cursor {
                    return Err(Error::NotInjective(format!(
                        "two pieces overlap on target segment {ts}"
                    )));
                }
                if a > cursor {
                    if !cursor.is_zero() {
                        breaks.push(cursor.clone());
                    }
                    pieces.push(Piece::Undefined);
                    breaks.push(a.clone());
                } else if !cursor.is_zero() {
                    breaks.push(cursor.clone());
                }
                pieces.push(inv);
                cursor = b;
            }
            if cursor < Q::one() {
                if !cursor.is_zero() {
                    breaks.push(cursor.clone());
                }
                pieces.push(Piece::Undefined);
            }
            segments.push(simplify(breaks, pieces));
        }
        let mut vertex_images = Vec::with_capacity(self.target.vertex_count());
        for w in 0..self.target.vertex_count() {
            let pre = self.preimage(&Point::Vertex(w))?;
            match pre.len() {
                0 => vertex_images.push(None),
                1 => vertex_images.push(Some(pre[0].clone())),
                _ => {
                    return Err(Error::NotInjective(format!(
                        "vertex {} has {} preimages",
                        self.target.vertex_id(w),
                        pre.len()
                    )))
                }
            }
        }
        let inv = PlMap {
            source: self.target.clone(),
            target: self.source.clone(),
            vertex_images,
            segments,
        };
        inv.check_continuity()?;
        Ok(inv)
    }

    /// The set of points where the map is defined.
    pub fn domain(&self) -> PlSet {
        let cuts = self.segments.iter().map(|si| si.breaks.clone()).collect();
        PlSet::from_predicate(&self.source, cuts, |p| self.try_eval(p).is_some())
    }

    /// `{p : self(p) ∈ set}`.
    pub fn preimage_set(&self, set: &PlSet) -> PlSet {
        let mut cuts = Vec::with_capacity(self.segments.len());
        for si in &self.segments {
            let mut c = si.breaks.clone();
            for (k, piece) in si.pieces.iter().enumerate() {
                if let Piece::Affine { seg, from, to } = piece {
                    let (lo, hi) = si.bounds(k);
                    for u in set.seg_cuts(*seg) {
                        let inside = (from < u && u < to) || (to < u && u < from);
                        if inside {
                            c.push(&lo + (u - from) * (&hi - &lo) / (to - from));
                        }
                    }
                }
            }
            cuts.push(sorted_unique(c));
        }
        PlSet::from_predicate(&self.source, cuts, |p| {
            self.try_eval(p).is_some_and(|img| set.contains(&img))
        })
    }

    /// Image of `set` under an injective map (via the inverse).
    pub fn image_set(&self, set: &PlSet) -> Result<PlSet> {
        let inv = self.inverse()?;
        Ok(inv.preimage_set(set).intersection(&inv.domain()))
    }

    /// The map restricted to the closure of `set`; undefined elsewhere.
    pub fn restrict(&self, set: &PlSet) -> PlMap {
        let cl = set.closure();
        let vertex_images = self
            .vertex_images
            .iter()
            .enumerate()
            .map(|(v, img)| if cl.contains(&Point::Vertex(v)) { img.clone() } else { None })
            .collect();
        let mut segments = Vec::with_capacity(self.segments.len());
        for (s, si) in self.segments.iter().enumerate() {
            let mut knots = vec![Q::zero()];
            let mut inner = si.breaks.clone();
            inner.extend(cl.seg_cuts(s).iter().cloned());
            knots.extend(sorted_unique(inner));
            knots.push(Q::one());
            let mut breaks = Vec::new();
            let mut pieces = Vec::new();
            for (i, w) in knots.windows(2).enumerate() {
                if i > 0 {
                    breaks.push(w[0].clone());
                }
                let mid = half(&w[0], &w[1]);
                if !cl.contains(&Point::Interior { seg: s, t: mid.clone() }) {
                    pieces.push(Piece::Undefined);
                    continue;
                }
                let k = si.locate(&mid).unwrap_or_else(|k| k);
                let (lo, hi) = si.bounds(k);
                pieces.push(match &si.pieces[k] {
                    Piece::Affine { seg, from, to } => Piece::Affine {
                        seg: *seg,
                        from: affine_at(from, to, &lo, &hi, &w[0]),
                        to: affine_at(from, to, &lo, &hi, &w[1]),
                    },
                    other => other.clone(),
                });
            }
            segments.push(simplify(breaks, pieces));
        }
        PlMap {
            source: self.source.clone(),
            target: self.target.clone(),
            vertex_images,
            segments,
        }
    }

    /// Target cuts across which the number of preimages lying in `set` can
    /// change: images of vertices, breakpoints and cuts of `set`.
    fn image_cuts(&self, set: &PlSet) -> Vec<Vec<Q>> {
        let mut cuts = vec![Vec::new(); self.target.segment_count()];
        let mut push = |p: Option<Point>| {
            if let Some(Point::Interior { seg, t }) = p {
                cuts[seg].push(t);
            }
        };
        for v in 0..self.source.vertex_count() {
            push(self.try_eval(&Point::Vertex(v)));
        }
        for (s, si) in self.segments.iter().enumerate() {
            for t in si.breaks.iter().chain(set.seg_cuts(s)) {
                push(self.try_eval(&Point::Interior { seg: s, t: t.clone() }));
            }
        }
        cuts
    }

    /// `{y : pred(|f⁻¹(y) ∩ set|)}` for a map without constant pieces.
    pub fn fiber_count_set(&self, set: &PlSet, pred: impl Fn(usize) -> bool) -> Result<PlSet> {
        for (s, si) in self.segments.iter().enumerate() {
            if let Some(k) = si.pieces.iter().position(|p| matches!(p, Piece::Constant(_))) {
                return Err(Error::DegeneratePiece {
                    segment: s,
                    piece: k,
                    image: "a constant".into(),
                });
            }
        }
        let cuts = self.image_cuts(set);
        Ok(PlSet::from_predicate(&self.target, cuts, |y| {
            let pre = self.preimage(y).expect("no constant pieces");
            pred(pre.iter().filter(|e| set.contains(e)).count())
        }))
    }

    /// `f(set)` for a map without constant pieces.
    pub fn forward_image(&self, set: &PlSet) -> Result<PlSet> {
        self.fiber_count_set(set, |n| n > 0)
    }

    /// Pieces of segment `s` over `[a, b]`, reparametrized to `[0, 1]`.
    pub fn slice(&self, s: usize, a: &Q, b: &Q) -> SegmentImage {
        let si = &self.segments[s];
        let mut knots = vec![a.clone()];
        knots.extend(si.breaks.iter().filter(|t| a < *t && *t < b).cloned());
        knots.push(b.clone());
        let len = b - a;
        let breaks = knots[1..knots.len() - 1].iter().map(|t| (t - a) / &len).collect();
        let pieces = knots
            .windows(2)
            .map(|w| {
                let k = si.locate(&half(&w[0], &w[1])).unwrap_or_else(|k| k);
                let (lo, hi) = si.bounds(k);
                match &si.pieces[k] {
                    Piece::Affine { seg, from, to } => Piece::Affine {
                        seg: *seg,
                        from: affine_at(from, to, &lo, &hi, &w[0]),
                        to: affine_at(from, to, &lo, &hi, &w[1]),
                    },
                    other => other.clone(),
                }
            })
            .collect();
        simplify(breaks, pieces)
    }

    /// Source parameters of the breakpoints of segment `s`.
    pub fn breaks(&self, s: usize) -> &[Q] {
        &self.segments[s].breaks
    }

    /// Checks that `self` and `other` agree on `region` (everywhere when
    /// `None`). Returns the first disagreement.
    ///
    /// Exact for PL data: both maps are affine on every gap of the common
    /// refinement, so agreement at three interior points of each gap and at
    /// every cut point decides equality.
    pub fn agrees_with(&self, other: &PlMap, region: Option<&PlSet>) -> std::result::Result<(), Point> {
        let cx = &self.source;
        for v in 0..cx.vertex_count() {
            let p = Point::Vertex(v);
            if region.map_or(true, |r| r.contains(&p)) && self.try_eval(&p) != other.try_eval(&p) {
                return Err(p);
            }
        }
        for s in 0..cx.segment_count() {
            let mut cuts = self.segments[s].breaks.clone();
            cuts.extend(other.segments[s].breaks.iter().cloned());
            if let Some(r) = region {
                cuts.extend(r.seg_cuts(s).iter().cloned());
            }
            let mut knots = vec![Q::zero()];
            knots.extend(sorted_unique(cuts));
            knots.push(Q::one());
            for (i, w) in knots.windows(2).enumerate() {
                if i > 0 {
                    let p = Point::Interior { seg: s, t: w[0].clone() };
                    if region.map_or(true, |r| r.contains(&p)) && self.try_eval(&p) != other.try_eval(&p) {
                        return Err(p);
                    }
                }
                let mid = Point::Interior { seg: s, t: half(&w[0], &w[1]) };
                if region.map_or(true, |r| r.contains(&mid)) {
                    for (n, d) in [(1, 4), (2, 4), (3, 4)] {
                        let t = &w[0] + (&w[1] - &w[0]) * q(n, d);
                        let p = Point::Interior { seg: s, t };
                        if self.try_eval(&p) != other.try_eval(&p) {
                            return Err(p);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn same_complex(a: &Arc<Complex1>, b: &Arc<Complex1>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Merges consecutive pieces that describe one affine path.
fn simplify(breaks: Vec<Q>, pieces: Vec<Piece>) -> SegmentImage {
    let mut knots = vec![Q::zero()];
    knots.extend(breaks);
    knots.push(Q::one());
    let mut out_b: Vec<Q> = Vec::new();
    let mut out_p: Vec<Piece> = Vec::new();
    let mut out_lo: Vec<Q> = Vec::new();
    for (k, piece) in pieces.into_iter().enumerate() {
        let (lo, hi) = (knots[k].clone(), knots[k + 1].clone());
        if let Some(prev) = out_p.last_mut() {
            let prev_lo = out_lo.last().unwrap().clone();
            let merged = match (&*prev, &piece) {
                (Piece::Undefined, Piece::Undefined) => true,
                (Piece::Constant(a), Piece::Constant(b)) => a == b,
                (
                    Piece::Affine { seg: s1, from: f1, to: t1 },
                    Piece::Affine { seg: s2, from: f2, to: t2 },
                ) => {
                    s1 == s2
                        && t1 == f2
                        && (t1 - f1) / (&lo - &prev_lo) == (t2 - f2) / (&hi - &lo)
                }
                _ => false,
            };
            if merged {
                if let (Piece::Affine { to, .. }, Piece::Affine { to: t2, .. }) = (prev, &piece) {
                    *to = t2.clone();
                }
                continue;
            }
            out_b.push(lo.clone());
        }
        out_lo.push(lo);
        out_p.push(piece);
    }
    SegmentImage {
        breaks: out_b,
        pieces: out_p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{qi, q};

    fn unit() -> Arc<Complex1> {
        Arc::new(Complex1::path(["0", "1"]).unwrap())
    }

    /// t -> |2t - 1| on a single segment.
    fn fold() -> PlMap {
        let cx = unit();
        PlMap::new(
            cx.clone(),
            cx,
            vec![Some(Point::Vertex(1)), Some(Point::Vertex(1))],
            vec![SegmentImage {
                breaks: vec![q(1, 2)],
                pieces: vec![
                    Piece::Affine { seg: 0, from: qi(1), to: qi(0) },
                    Piece::Affine { seg: 0, from: qi(0), to: qi(1) },
                ],
            }],
        )
        .unwrap()
    }

    #[test]
    fn fold_is_not_local_homeomorphism() {
        let rep = fold().is_local_homeomorphism();
        assert!(!rep.ok);
        let (p, _) = rep.counterexample.unwrap();
        assert_eq!(p, Point::Interior { seg: 0, t: q(1, 2) });
    }

    #[test]
    fn identity_is_local_homeomorphism_and_self_inverse() {
        let id = PlMap::identity(unit());
        assert!(id.is_local_homeomorphism().ok);
        assert_eq!(id.inverse().unwrap(), id);
        assert!(id.is_proper());
        let p = Point::Interior { seg: 0, t: q(1, 7) };
        assert_eq!(id.eval(&p).unwrap(), p);
    }

    #[test]
    fn fold_preimages_and_composition() {
        let f = fold();
        let pre = f.preimage(&Point::Interior { seg: 0, t: q(1, 2) }).unwrap();
        assert_eq!(
            pre,
            vec![
                Point::Interior { seg: 0, t: q(1, 4) },
                Point::Interior { seg: 0, t: q(3, 4) }
            ]
        );
        let ff = f.then(&f).unwrap();
        // |2|2t-1|-1| has breaks at 1/4, 1/2, 3/4
        assert_eq!(ff.breaks(0), &[q(1, 4), q(1, 2), q(3, 4)]);
        assert_eq!(ff.eval(&Point::Interior { seg: 0, t: q(1, 8) }).unwrap(), Point::Interior { seg: 0, t: q(1, 2) });
        assert!(f.inverse().is_err());
    }

    #[test]
    fn discontinuity_is_rejected() {
        let cx = unit();
        let err = PlMap::new(
            cx.clone(),
            cx,
            vec![Some(Point::Vertex(0)), Some(Point::Vertex(1))],
            vec![SegmentImage {
                breaks: vec![q(1, 2)],
                pieces: vec![
                    Piece::Affine { seg: 0, from: qi(0), to: q(1, 3) },
                    Piece::Affine { seg: 0, from: q(1, 2), to: qi(1) },
                ],
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Discontinuous(_)));
    }

    #[test]
    fn constant_piece_preimage_errors() {
        let cx = unit();
        let m = PlMap::new(
            cx.clone(),
            cx,
            vec![Some(Point::Vertex(0)), Some(Point::Vertex(0))],
            vec![SegmentImage::single(Piece::Constant(Point::Vertex(0)))],
        )
        .unwrap();
        assert!(matches!(
            m.preimage(&Point::Vertex(0)),
            Err(Error::DegeneratePiece { segment: 0, .. })
        ));
        assert!(m.preimage(&Point::Interior { seg: 0, t: q(1, 2) }).unwrap().is_empty());
    }

    #[test]
    fn restriction_and_forward_images() {
        let f = fold();
        let cx = f.source().clone();
        let left = PlSet::interval(&cx, 0, &qi(0), &q(1, 2));
        let r = f.restrict(&left);
        assert!(r.inverse().is_ok());
        assert_eq!(r.try_eval(&Point::Interior { seg: 0, t: q(3, 4) }), None);
        let img = f.forward_image(&left).unwrap();
        assert_eq!(img, PlSet::interval(&cx, 0, &qi(0), &qi(1)));
        let double = f.fiber_count_set(&PlSet::full(&cx), |n| n == 2).unwrap();
        assert!(double.contains(&Point::Interior { seg: 0, t: q(1, 3) }));
        assert!(!double.contains(&Point::Vertex(0)));
    }
}
