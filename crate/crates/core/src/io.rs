//! JSON documents: graphs, certificates, covers and reports.
//!
//! Rationals are strings `"p/q"` (integers and terminating decimals are
//! accepted on input). A point is a vertex id or `{"seg": k, "t": q}`. A
//! map piece is `{"seg": k, "from": q, "to": q}`, `{"const": point}` or
//! `null` where the map is undefined. Keys are written in sorted order.

use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::cover::{AdmissibleCover, CertificatePiece, ConjugacyCertificate, CoverMetadata, SheetedSet};
use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{format_q, parse_q, Complex1, Piece, PlMap, PlSet, Point, SegmentImage, Q};

/// A JSON value with the pointer it was found at.
#[derive(Clone)]
struct At<'a> {
    v: &'a Value,
    path: String,
}

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::schema(if path.is_empty() { "/" } else { path }, msg)
}

impl<'a> At<'a> {
    fn root(v: &'a Value) -> Self {
        At { v, path: String::new() }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        err(&self.path, msg)
    }

    fn obj(&self) -> Result<&'a Map<String, Value>> {
        self.v.as_object().ok_or_else(|| self.err("expected an object"))
    }

    fn get(&self, key: &str) -> Result<At<'a>> {
        self.opt(key)?.ok_or_else(|| self.err(format!("missing field {key:?}")))
    }

    fn opt(&self, key: &str) -> Result<Option<At<'a>>> {
        Ok(self.obj()?.get(key).map(|v| At {
            v,
            path: format!("{}/{key}", self.path),
        }))
    }

    fn items(&self) -> Result<Vec<At<'a>>> {
        let arr = self.v.as_array().ok_or_else(|| self.err("expected an array"))?;
        Ok(arr
            .iter()
            .enumerate()
            .map(|(i, v)| At {
                v,
                path: format!("{}/{i}", self.path),
            })
            .collect())
    }

    fn str(&self) -> Result<&'a str> {
        self.v.as_str().ok_or_else(|| self.err("expected a string"))
    }

    fn usize(&self) -> Result<usize> {
        self.v
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| self.err("expected a non-negative integer"))
    }

    fn q(&self) -> Result<Q> {
        let text = match self.v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(self.err("expected a rational such as \"1/3\"")),
        };
        parse_q(&text).ok_or_else(|| self.err(format!("cannot parse {text:?} as a rational")))
    }
}

fn q_json(x: &Q) -> Value {
    Value::String(format_q(x))
}

// ---------------------------------------------------------------- complexes

pub fn complex_to_json(cx: &Complex1) -> Value {
    let mut m = Map::new();
    m.insert("vertices".into(), json!(cx.vertex_ids()));
    if cx.segment_count() > 0 {
        let segs: Vec<Value> = cx
            .segments()
            .iter()
            .map(|&(a, b)| json!([cx.vertex_id(a), cx.vertex_id(b)]))
            .collect();
        m.insert("segments".into(), Value::Array(segs));
    }
    Value::Object(m)
}

fn load_complex(at: &At) -> Result<Complex1> {
    let mut ids: Vec<String> = Vec::new();
    for v in at.get("vertices")?.items()? {
        let id = v.str()?;
        if ids.iter().any(|x| x == id) {
            return Err(v.err(format!("duplicate vertex id {id:?}")));
        }
        ids.push(id.to_string());
    }
    let mut segs = Vec::new();
    if let Some(sv) = at.opt("segments")? {
        for s in sv.items()? {
            let pair = s.items()?;
            if pair.len() != 2 {
                return Err(s.err("a segment is a pair of vertex ids"));
            }
            let mut ends = [0; 2];
            for (k, end) in pair.iter().enumerate() {
                let id = end.str()?;
                ends[k] = ids
                    .iter()
                    .position(|x| x == id)
                    .ok_or_else(|| s.err(format!("unknown vertex id {id:?}")))?;
            }
            segs.push((ends[0], ends[1]));
        }
    }
    Complex1::new(ids, segs).map_err(|e| at.err(e.to_string()))
}

// ------------------------------------------------------------------- points

pub fn point_to_json(cx: &Complex1, p: &Point) -> Value {
    match p {
        Point::Vertex(v) => Value::String(cx.vertex_id(*v).to_string()),
        Point::Interior { seg, t } => json!({ "seg": seg, "t": format_q(t) }),
    }
}

fn load_point(cx: &Complex1, at: &At) -> Result<Point> {
    if let Some(id) = at.v.as_str() {
        return cx
            .vertex_index(id)
            .map(Point::Vertex)
            .ok_or_else(|| at.err(format!("unknown vertex id {id:?}")));
    }
    let (sa, ta) = (at.get("seg")?, at.get("t")?);
    let (seg, t) = (sa.usize()?, ta.q()?);
    if seg >= cx.segment_count() {
        return Err(sa.err(format!("segment {seg} does not exist")));
    }
    if t <= Q::from_integer(0.into()) || t >= Q::from_integer(1.into()) {
        return Err(ta.err("interior parameter must lie in (0, 1)"));
    }
    Ok(cx.point_on(seg, t))
}

// --------------------------------------------------------------------- maps

pub fn map_to_json(m: &PlMap) -> Value {
    let (src, tgt) = (m.source(), m.target());
    let vimg: Map<String, Value> = m
        .vertex_images()
        .iter()
        .enumerate()
        .filter_map(|(v, img)| img.as_ref().map(|p| (src.vertex_id(v).to_string(), point_to_json(tgt, p))))
        .collect();
    let segs: Vec<Value> = m
        .segment_images()
        .iter()
        .map(|si| {
            let targets: Vec<Value> = si
                .pieces
                .iter()
                .map(|p| match p {
                    Piece::Affine { seg, from, to } => json!({ "seg": seg, "from": format_q(from), "to": format_q(to) }),
                    Piece::Constant(p) => json!({ "const": point_to_json(tgt, p) }),
                    Piece::Undefined => Value::Null,
                })
                .collect();
            json!({ "breaks": si.breaks.iter().map(q_json).collect::<Vec<_>>(), "targets": targets })
        })
        .collect();
    json!({ "vertex_images": vimg, "segment_images": segs })
}

fn load_piece(tgt: &Complex1, at: &At) -> Result<Piece> {
    if at.v.is_null() {
        return Ok(Piece::Undefined);
    }
    if let Some(c) = at.opt("const")? {
        return Ok(Piece::Constant(load_point(tgt, &c)?));
    }
    let sa = at.get("seg")?;
    let seg = sa.usize()?;
    if seg >= tgt.segment_count() {
        return Err(sa.err(format!("target segment {seg} does not exist")));
    }
    Ok(Piece::Affine {
        seg,
        from: at.get("from")?.q()?,
        to: at.get("to")?.q()?,
    })
}

fn load_map(src: &Arc<Complex1>, tgt: &Arc<Complex1>, at: &At) -> Result<PlMap> {
    let va = at.get("vertex_images")?;
    let mut vimg = vec![None; src.vertex_count()];
    for (id, v) in va.obj()? {
        let x = At {
            v,
            path: format!("{}/{id}", va.path),
        };
        let k = src
            .vertex_index(id)
            .ok_or_else(|| x.err(format!("unknown source vertex {id:?}")))?;
        if !v.is_null() {
            vimg[k] = Some(load_point(tgt, &x)?);
        }
    }
    let mut segs = Vec::with_capacity(src.segment_count());
    match at.opt("segment_images")? {
        Some(sa) => {
            let items = sa.items()?;
            if items.len() != src.segment_count() {
                return Err(sa.err(format!(
                    "expected {} segment images, found {}",
                    src.segment_count(),
                    items.len()
                )));
            }
            for it in items {
                let breaks = it.get("breaks")?.items()?.iter().map(At::q).collect::<Result<Vec<Q>>>()?;
                let ta = it.get("targets")?;
                let pieces = ta.items()?.iter().map(|t| load_piece(tgt, t)).collect::<Result<Vec<_>>>()?;
                if pieces.len() != breaks.len() + 1 {
                    return Err(ta.err("expected one target per piece (breaks + 1)"));
                }
                segs.push(SegmentImage { breaks, pieces });
            }
        }
        None if src.segment_count() > 0 => return Err(at.err("missing field \"segment_images\"")),
        None => {}
    }
    PlMap::new(src.clone(), tgt.clone(), vimg, segs).map_err(|e| match e {
        Error::Schema { path, message } => err(&format!("{}{}", at.path, path), message),
        other => at.err(other.to_string()),
    })
}

// --------------------------------------------------------------------- sets

pub fn set_to_json(set: &PlSet) -> Value {
    let cx = set.complex();
    let (points, intervals) = set.parts();
    json!({
        "points": points.iter().map(|p| point_to_json(cx, p)).collect::<Vec<_>>(),
        "intervals": intervals
            .iter()
            .map(|(s, a, b)| json!({ "seg": s, "from": format_q(a), "to": format_q(b) }))
            .collect::<Vec<_>>(),
    })
}

/// Open sets also accept `"stars": [{"vertex": id, "radius": q}]`.
fn load_set(cx: &Arc<Complex1>, at: &At) -> Result<PlSet> {
    let mut out = PlSet::empty(cx);
    if let Some(ps) = at.opt("points")? {
        for x in ps.items()? {
            out = out.union(&PlSet::point(cx, &load_point(cx, &x)?));
        }
    }
    let (zero, one) = (Q::from_integer(0.into()), Q::from_integer(1.into()));
    if let Some(is) = at.opt("intervals")? {
        for x in is.items()? {
            let sa = x.get("seg")?;
            let seg = sa.usize()?;
            let (from, to) = (x.get("from")?.q()?, x.get("to")?.q()?);
            if seg >= cx.segment_count() {
                return Err(sa.err(format!("segment {seg} does not exist")));
            }
            if !(zero <= from && from < to && to <= one) {
                return Err(x.err("need 0 <= from < to <= 1"));
            }
            out = out.union(&PlSet::interval(cx, seg, &from, &to));
        }
    }
    if let Some(ss) = at.opt("stars")? {
        for x in ss.items()? {
            let va = x.get("vertex")?;
            let id = va.str()?;
            let v = cx
                .vertex_index(id)
                .ok_or_else(|| va.err(format!("unknown vertex id {id:?}")))?;
            let ra = x.get("radius")?;
            let r = ra.q()?;
            if !(zero < r && r <= one) {
                return Err(ra.err("radius must lie in (0, 1]"));
            }
            out = out.union(&PlSet::open_star(cx, v, &r));
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------- graphs

pub fn graph_to_json(g: &TopGraph) -> Value {
    json!({
        "base": complex_to_json(g.base()),
        "edges": complex_to_json(g.edges()),
        "r": map_to_json(g.r()),
        "s": map_to_json(g.s()),
    })
}

pub fn graph_from_json(v: &Value) -> Result<TopGraph> {
    let root = At::root(v);
    let base = Arc::new(load_complex(&root.get("base")?)?);
    let edges = Arc::new(load_complex(&root.get("edges")?)?);
    let r = load_map(&edges, &base, &root.get("r")?)?;
    let s = load_map(&edges, &base, &root.get("s")?)?;
    TopGraph::new(base, edges, r, s)
}

// ------------------------------------------------------------- certificates

pub fn certificate_to_json(c: &ConjugacyCertificate) -> Value {
    json!({
        "tau": map_to_json(&c.tau),
        "pieces": c
            .pieces
            .iter()
            .map(|p| json!({ "U": set_to_json(&p.u), "gamma": map_to_json(&p.gamma) }))
            .collect::<Vec<_>>(),
    })
}

pub fn certificate_from_json(v: &Value, e: &TopGraph, f: &TopGraph) -> Result<ConjugacyCertificate> {
    let root = At::root(v);
    let tau = load_map(e.base(), f.base(), &root.get("tau")?)?;
    let pieces = root
        .get("pieces")?
        .items()?
        .iter()
        .map(|a| {
            Ok(CertificatePiece {
                u: load_set(e.base(), &a.get("U")?)?,
                gamma: load_map(e.edges(), f.edges(), &a.get("gamma")?)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConjugacyCertificate { tau, pieces })
}

// ------------------------------------------------------------------- covers

fn sheeted_to_json(s: &SheetedSet) -> Value {
    json!({ "set": set_to_json(&s.set), "sheets": s.sheets.iter().map(set_to_json).collect::<Vec<_>>() })
}

fn load_sheeted(base: &Arc<Complex1>, edges: &Arc<Complex1>, at: &At) -> Result<SheetedSet> {
    let set = load_set(base, &at.get("set")?)?;
    let sheets = at
        .get("sheets")?
        .items()?
        .iter()
        .map(|x| load_set(edges, x))
        .collect::<Result<_>>()?;
    Ok(SheetedSet { set, sheets })
}

pub fn cover_to_json(c: &AdmissibleCover) -> Value {
    let sets: Vec<Value> = (0..c.len())
        .map(|i| {
            json!({
                "U": sheeted_to_json(&c.e_side[i]),
                "V": sheeted_to_json(&c.f_side[i]),
                "gamma": map_to_json(&c.gammas[i]),
            })
        })
        .collect();
    let mut doc = json!({ "tau": map_to_json(&c.tau), "sets": sets });
    if let Some(m) = &c.metadata {
        doc["metadata"] = json!({
            "pou_threshold": format_q(&m.pou_threshold),
            "cut_high": format_q(&m.cut_high),
            "cut_low": format_q(&m.cut_low),
            "band": [format_q(&m.band.0), format_q(&m.band.1)],
            "nodes": m.nodes,
            "refined_pairs": m.refined_pairs.iter().map(|(i, j)| json!([i + 1, j + 1])).collect::<Vec<_>>(),
            "shrink_passes": m.shrink_passes,
        });
    }
    doc
}

pub fn cover_from_json(v: &Value, e: &TopGraph, f: &TopGraph) -> Result<AdmissibleCover> {
    let root = At::root(v);
    let tau = load_map(e.base(), f.base(), &root.get("tau")?)?;
    let (mut e_side, mut f_side, mut gammas) = (Vec::new(), Vec::new(), Vec::new());
    for a in root.get("sets")?.items()? {
        e_side.push(load_sheeted(e.base(), e.edges(), &a.get("U")?)?);
        f_side.push(load_sheeted(f.base(), f.edges(), &a.get("V")?)?);
        gammas.push(load_map(e.edges(), f.edges(), &a.get("gamma")?)?);
    }
    let metadata = root.opt("metadata")?.map(|m| load_metadata(&m)).transpose()?;
    Ok(AdmissibleCover {
        tau,
        e_side,
        f_side,
        gammas,
        metadata,
    })
}

fn load_metadata(at: &At) -> Result<CoverMetadata> {
    let ba = at.get("band")?;
    let band = ba.items()?;
    if band.len() != 2 {
        return Err(ba.err("band is a pair"));
    }
    let mut refined_pairs = Vec::new();
    for x in at.get("refined_pairs")?.items()? {
        let ij = x.items()?;
        if ij.len() != 2 {
            return Err(x.err("a pair has two indices"));
        }
        let idx = |a: &At| -> Result<usize> { a.usize()?.checked_sub(1).ok_or_else(|| a.err("indices are 1-based")) };
        refined_pairs.push((idx(&ij[0])?, idx(&ij[1])?));
    }
    Ok(CoverMetadata {
        pou_threshold: at.get("pou_threshold")?.q()?,
        cut_high: at.get("cut_high")?.q()?,
        cut_low: at.get("cut_low")?.q()?,
        band: (band[0].q()?, band[1].q()?),
        nodes: at.get("nodes")?.usize()?,
        refined_pairs,
        shrink_passes: at.get("shrink_passes")?.usize()?,
    })
}

// -------------------------------------------------------------------- files

/// Canonical text: sorted keys, two-space indentation, trailing newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// A vertex id or `seg@t`.
pub fn parse_point(cx: &Complex1, spec: &str) -> Result<Point> {
    let spec = spec.trim();
    if let Some(v) = cx.vertex_index(spec) {
        return Ok(Point::Vertex(v));
    }
    let bad = || Error::Precondition(format!("{spec:?} is neither a vertex id nor seg@t"));
    let (seg, t) = spec.split_once('@').ok_or_else(bad)?;
    let seg: usize = seg.parse().map_err(|_| bad())?;
    let t = parse_q(t).ok_or_else(bad)?;
    let p = cx.point_on(seg, t);
    cx.check_point(&p)?;
    Ok(p)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| err("", format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_canonical_string(v))?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<TopGraph> {
    graph_from_json(&read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn graphs_round_trip() {
        for g in [fixtures::d1(), fixtures::swap2(), fixtures::dkflip_e(), fixtures::dkflip_f()] {
            let doc = graph_to_json(&g);
            let back = graph_from_json(&doc).unwrap();
            assert_eq!(graph_to_json(&back), doc);
        }
    }

    #[test]
    fn pointer_paths() {
        let mut doc = graph_to_json(&fixtures::d1());
        doc["base"]["segments"] = json!([["a", "nope"]]);
        match graph_from_json(&doc) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "/base/segments/0"),
            other => panic!("{other:?}"),
        }
        let mut doc = graph_to_json(&fixtures::dkflip_e());
        doc["r"]["segment_images"][1]["targets"][0]["from"] = json!("x");
        match graph_from_json(&doc) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "/r/segment_images/1/targets/0/from"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificates_and_covers_round_trip() {
        let (e, f) = (fixtures::dkflip_e(), fixtures::dkflip_f());
        let cert = fixtures::dkflip_certificate();
        let doc = certificate_to_json(&cert);
        let back = certificate_from_json(&doc, &e, &f).unwrap();
        assert_eq!(back.tau, cert.tau);
        assert_eq!(certificate_to_json(&back), doc);
        let cover = crate::cover::build_admissible_cover(&e, &f, &cert).unwrap();
        let doc = cover_to_json(&cover);
        let back = cover_from_json(&doc, &e, &f).unwrap();
        assert_eq!(cover_to_json(&back), doc);
        assert_eq!(back.metadata, cover.metadata);
    }
}
