//! Regluing a graph along a modified sheet cocycle.

use std::sync::Arc;

use crate::cover::{permutation_data, Perm, PermutationData, SheetedSet};
use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{format_q, half, qi, Complex1, Piece, PlMap, PlSet, Point, SegmentImage, Q};

const MAX_HALVINGS: usize = 24;

/// A graph obtained from `E` by regluing its sheets over a cover, with the
/// maps back to `E` on each cover set.
#[derive(Debug, Clone)]
pub struct Regluing {
    pub graph: Arc<TopGraph>,
    pub cocycle: PermutationData,
    /// For each `U_i`: the map `G¹ ⇀ E¹` on the closure of `s_G⁻¹(U_i)`
    /// sending sheet `k` to sheet `k`.
    pub to_source: Vec<PlMap>,
    /// Sheets of each `U_i` in the new graph.
    pub sheets: Vec<Vec<PlSet>>,
}

impl Regluing {
    /// The cover sets of the new graph with their sheets.
    pub fn side(&self, e_side: &[SheetedSet]) -> Vec<SheetedSet> {
        e_side
            .iter()
            .zip(&self.sheets)
            .map(|(u, sheets)| SheetedSet {
                set: u.set.clone(),
                sheets: sheets.clone(),
            })
            .collect()
    }
}

/// A closed subsegment `[a, b]` of base segment `seg` inside chart `chart`.
struct Cell {
    seg: usize,
    a: Q,
    b: Q,
    chart: usize,
}

/// Subdivides until every closed cell lies in some cover set.
fn cells(cx: &Arc<Complex1>, side: &[SheetedSet]) -> Result<Vec<Cell>> {
    let mut cuts: Vec<Vec<Q>> = (0..cx.segment_count())
        .map(|s| {
            let mut c: Vec<Q> = side.iter().flat_map(|u| u.set.seg_cuts(s).to_vec()).collect();
            c.sort();
            c.dedup();
            c
        })
        .collect();
    'outer: for _ in 0..MAX_HALVINGS {
        let mut out = Vec::new();
        for (s, c) in cuts.iter().enumerate() {
            let mut knots = vec![qi(0)];
            knots.extend(c.iter().cloned());
            knots.push(qi(1));
            for w in knots.windows(2) {
                let closed = PlSet::interval(cx, s, &w[0], &w[1]).closure();
                let Some(chart) = side.iter().position(|u| closed.is_subset(&u.set)) else {
                    cuts = cuts
                        .iter()
                        .map(|c| {
                            let mut k = vec![qi(0)];
                            k.extend(c.iter().cloned());
                            k.push(qi(1));
                            let mut out = c.clone();
                            out.extend(k.windows(2).map(|w| half(&w[0], &w[1])));
                            out.sort();
                            out
                        })
                        .collect();
                    continue 'outer;
                };
                out.push(Cell {
                    seg: s,
                    a: w[0].clone(),
                    b: w[1].clone(),
                    chart,
                });
            }
        }
        return Ok(out);
    }
    Err(Error::SheetStructure("no subdivision fits every cell into a cover set".into()))
}

/// `π_{i,j}` with the identity on the diagonal.
fn transition(data: &PermutationData, i: usize, j: usize) -> Option<Perm> {
    if i == j {
        Some(Perm::identity(data.m[i]))
    } else {
        data.get(i, j).cloned()
    }
}

/// The point of `s⁻¹(p)` in sheet `k` of chart `c`.
fn node_lift(e: &TopGraph, side: &[SheetedSet], p: &Point, c: usize, k: usize) -> Result<Point> {
    let hits: Vec<Point> = e
        .s()
        .preimage(p)?
        .into_iter()
        .filter(|x| side[c].sheets[k].contains(x))
        .collect();
    match <[Point; 1]>::try_from(hits) {
        Ok([x]) => Ok(x),
        Err(h) => Err(Error::SheetStructure(format!(
            "sheet {} of set {} has {} points over {}",
            k + 1,
            c + 1,
            h.len(),
            e.base().describe(p)
        ))),
    }
}

/// Reglues `E` so that its permutation data over `side` become `cocycle`.
/// Returns `E` itself when the cocycle is already that of `E`.
pub fn reglue(e: &Arc<TopGraph>, side: &[SheetedSet], cocycle: &PermutationData) -> Result<Regluing> {
    let own = permutation_data(side)?;
    if own.m != cocycle.m || own.perms.keys().ne(cocycle.perms.keys()) {
        return Err(Error::Precondition(
            "cocycle is not defined on the intersecting pairs of the cover".into(),
        ));
    }
    if own == *cocycle {
        return Ok(Regluing {
            graph: e.clone(),
            cocycle: own,
            to_source: side
                .iter()
                .map(|u| PlMap::identity(e.edges().clone()).restrict(&e.s().preimage_set(&u.set)))
                .collect(),
            sheets: side.iter().map(|u| u.sheets.clone()).collect(),
        });
    }
    let cx = e.base();
    let cells = cells(cx, side)?;

    // Nodes: base vertices, then interior cell endpoints.
    let mut nodes: Vec<(Point, String)> = (0..cx.vertex_count())
        .map(|v| (Point::Vertex(v), cx.vertex_id(v).to_string()))
        .collect();
    for c in &cells {
        if c.a > qi(0) {
            let t = c.a.clone();
            nodes.push((Point::Interior { seg: c.seg, t: t.clone() }, format!("s{}@{}", c.seg, format_q(&t))));
        }
    }
    let node_of = |p: &Point| nodes.iter().position(|(n, _)| n == p).expect("cell endpoint is a node");
    let mut node_chart = Vec::with_capacity(nodes.len());
    for (p, _) in &nodes {
        let c = side
            .iter()
            .position(|u| u.set.contains(p))
            .ok_or_else(|| Error::NotCovering(cx.describe(p)))?;
        node_chart.push(c);
    }
    let pi = |i: usize, j: usize| {
        transition(cocycle, i, j).ok_or_else(|| {
            Error::SheetStructure(format!("sets {} and {} meet but carry no permutation", i + 1, j + 1))
        })
    };

    // Vertices of the new edge space.
    let mut offset = Vec::with_capacity(nodes.len());
    let mut ids = Vec::new();
    for (n, (_, name)) in nodes.iter().enumerate() {
        offset.push(ids.len());
        for k in 0..side[node_chart[n]].m() {
            ids.push(format!("{name}/{}", k + 1));
        }
    }
    let mut segments = Vec::new();
    let mut seg_cell = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        let n0 = node_of(&cx.point_on(c.seg, c.a.clone()));
        let n1 = node_of(&cx.point_on(c.seg, c.b.clone()));
        let (p0, p1) = (pi(c.chart, node_chart[n0])?, pi(c.chart, node_chart[n1])?);
        for k in 0..side[c.chart].m() {
            segments.push((offset[n0] + p0.apply(k), offset[n1] + p1.apply(k)));
            seg_cell.push((ci, k));
        }
    }
    let edges = Arc::new(Complex1::new(ids, segments)?);

    // Lifts of each cell through each sheet of its chart.
    let mut lifts: Vec<Vec<PlMap>> = Vec::with_capacity(cells.len());
    for c in &cells {
        let over = e.s().preimage_set(&PlSet::interval(cx, c.seg, &c.a, &c.b));
        let row = side[c.chart]
            .sheets
            .iter()
            .map(|sh| e.s().restrict(&sh.intersection(&over)).inverse())
            .collect::<Result<Vec<_>>>()?;
        lifts.push(row);
    }
    let mut node_lifts: Vec<Vec<Point>> = Vec::with_capacity(nodes.len());
    for (n, (p, _)) in nodes.iter().enumerate() {
        let c = node_chart[n];
        node_lifts.push((0..side[c].m()).map(|k| node_lift(e, side, p, c, k)).collect::<Result<_>>()?);
    }

    let mut s_vertices = Vec::new();
    let mut r_vertices = Vec::new();
    for (n, (p, _)) in nodes.iter().enumerate() {
        for x in &node_lifts[n] {
            s_vertices.push(Some(p.clone()));
            r_vertices.push(Some(e.r().eval(x)?));
        }
    }
    let mut s_segments = Vec::new();
    let mut r_segments = Vec::new();
    for &(ci, k) in &seg_cell {
        let c = &cells[ci];
        s_segments.push(SegmentImage::single(Piece::Affine {
            seg: c.seg,
            from: c.a.clone(),
            to: c.b.clone(),
        }));
        r_segments.push(lifts[ci][k].then(e.r())?.slice(c.seg, &c.a, &c.b));
    }
    let s = PlMap::new(edges.clone(), cx.clone(), s_vertices, s_segments)?;
    let r = PlMap::new(edges.clone(), cx.clone(), r_vertices, r_segments).map_err(|err| match err {
        Error::Discontinuous(at) => Error::AgreementFails(format!("reglued sheets have different ranges at {at}")),
        other => other,
    })?;
    let graph = Arc::new(TopGraph::new(cx.clone(), edges.clone(), r, s)?);

    // Maps back to E over each cover set.
    let mut to_source = Vec::with_capacity(side.len());
    let mut sheets = Vec::with_capacity(side.len());
    for (i, u) in side.iter().enumerate() {
        let closure = u.set.closure();
        // label in chart c of the E-sheet reached from new label k
        let label = |c: usize, k: usize| -> Option<usize> {
            let back = transition(cocycle, c, i)?;
            let fwd = transition(&own, i, c)?;
            Some(fwd.apply(back.apply(k)))
        };
        let mut vimg = Vec::with_capacity(edges.vertex_count());
        for (n, (p, _)) in nodes.iter().enumerate() {
            let c = node_chart[n];
            for k in 0..side[c].m() {
                vimg.push(if closure.contains(p) {
                    label(c, k).map(|kk| node_lifts[n][kk].clone())
                } else {
                    None
                });
            }
        }
        let simg = seg_cell
            .iter()
            .map(|&(ci, k)| {
                let c = &cells[ci];
                match label(c.chart, k) {
                    Some(kk) => lifts[ci][kk].slice(c.seg, &c.a, &c.b),
                    None => SegmentImage::single(Piece::Undefined),
                }
            })
            .collect();
        let over = graph.s().preimage_set(&u.set);
        let map = PlMap::new(edges.clone(), e.edges().clone(), vimg, simg)?.restrict(&over);
        sheets.push(u.sheets.iter().map(|sh| map.preimage_set(sh).intersection(&over)).collect());
        to_source.push(map);
    }
    Ok(Regluing {
        graph,
        cocycle: cocycle.clone(),
        to_source,
        sheets,
    })
}

/// `Ẽ` with `π^Ẽ_{i,j} = π^E_{i,j} ∘ (l l')` and all other data unchanged.
pub fn intermediate_graph(
    e: &Arc<TopGraph>,
    side: &[SheetedSet],
    pair: (usize, usize),
    transposition: (usize, usize),
) -> Result<Regluing> {
    let mut data = permutation_data(side)?;
    let (i, j) = pair;
    let p = data
        .get(i, j)
        .ok_or_else(|| Error::Precondition(format!("sets {} and {} do not intersect", i + 1, j + 1)))?;
    let (l, l2) = transposition;
    if l >= p.len() || l2 >= p.len() {
        return Err(Error::InvalidFlip(format!("transposition ({} {}) is out of range", l + 1, l2 + 1)));
    }
    let np = p.compose(&Perm::transposition(p.len(), l, l2));
    data.perms.insert((j, i), np.inverse());
    data.perms.insert((i, j), np);
    reglue(e, side, &data)
}
