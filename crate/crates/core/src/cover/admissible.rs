use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{
    half, partition_of_unity, q, quarter_refine, threshold_set, Complex1, OpenSet, PlFunction, PlMap, PlSet,
    Point, Threshold, Q,
};

use super::certificate::{verify_certificate, CertificatePiece, CheckReport, ConjugacyCertificate};
use super::permutation::{pair_permutation, SheetedSet};

/// Constants of the construction: the partition-of-unity threshold, the
/// cutoffs for the two shrunk sets and the band kept for the overlap pieces.
pub fn pou_threshold() -> Q {
    q(1, 3)
}

pub fn cut_high() -> Q {
    q(3, 5)
}

pub fn cut_low() -> Q {
    q(2, 5)
}

pub fn band() -> (Q, Q) {
    (q(3, 10), q(7, 10))
}

/// Cap on rounds of halving when fitting node stars into certificate sets.
const MAX_HALVINGS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverMetadata {
    pub pou_threshold: Q,
    pub cut_high: Q,
    pub cut_low: Q,
    pub band: (Q, Q),
    /// Number of subdivision nodes whose stars start the construction.
    pub nodes: usize,
    /// Intersecting pairs treated by the band refinement, in order.
    pub refined_pairs: Vec<(usize, usize)>,
    /// Passes of the `1/3` shrink.
    pub shrink_passes: usize,
}

/// An admissible cover with both sides and the intertwiners `γ_i`.
#[derive(Debug, Clone)]
pub struct AdmissibleCover {
    pub tau: PlMap,
    pub e_side: Vec<SheetedSet>,
    pub f_side: Vec<SheetedSet>,
    /// `γ_i` restricted to the closure of `s_E⁻¹(U_i)`.
    pub gammas: Vec<PlMap>,
    pub metadata: Option<CoverMetadata>,
}

impl AdmissibleCover {
    /// Assembles a cover from `(U_i, sheets, γ_i)`; the `F` side is
    /// `V_i = τ(U_i)`, `V_ik = γ_i(U_ik)`.
    pub fn from_parts(e: &TopGraph, tau: PlMap, parts: Vec<(OpenSet, Vec<PlSet>, PlMap)>) -> Result<Self> {
        let mut e_side = Vec::with_capacity(parts.len());
        let mut f_side = Vec::with_capacity(parts.len());
        let mut gammas = Vec::with_capacity(parts.len());
        for (u, sheets, gamma) in parts {
            let d = e.s().preimage_set(&u);
            let g = gamma.restrict(&d);
            f_side.push(SheetedSet {
                set: tau.forward_image(&u)?,
                sheets: sheets.iter().map(|sh| g.forward_image(sh)).collect::<Result<_>>()?,
            });
            e_side.push(SheetedSet { set: u, sheets });
            gammas.push(g);
        }
        Ok(AdmissibleCover {
            tau,
            e_side,
            f_side,
            gammas,
            metadata: None,
        })
    }

    /// The certificate pieces used as the cover, with the components of
    /// `s_E⁻¹(U)` as sheets.
    pub fn from_certificate_pieces(e: &TopGraph, cert: &ConjugacyCertificate) -> Result<Self> {
        let parts = cert
            .pieces
            .iter()
            .map(|p| (p.u.clone(), e.s().preimage_set(&p.u).components(), p.gamma.clone()))
            .collect();
        AdmissibleCover::from_parts(e, cert.tau.clone(), parts)
    }

    pub fn len(&self) -> usize {
        self.e_side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_side.is_empty()
    }

    pub fn m(&self) -> Vec<usize> {
        self.e_side.iter().map(SheetedSet::m).collect()
    }

    pub fn as_certificate(&self) -> ConjugacyCertificate {
        ConjugacyCertificate {
            tau: self.tau.clone(),
            pieces: self
                .e_side
                .iter()
                .zip(&self.gammas)
                .map(|(s, g)| CertificatePiece {
                    u: s.set.clone(),
                    gamma: g.clone(),
                })
                .collect(),
        }
    }
}

fn first_point(set: &PlSet) -> Option<String> {
    set.min_point().map(|p| set.complex().describe(&p))
}

/// Checks (C1)–(C6) exactly.
pub fn check_admissible(e: &TopGraph, f: &TopGraph, cover: &AdmissibleCover) -> CheckReport {
    let mut rep = CheckReport::default();
    let n = cover.len();
    rep.push("C1", check_c1(e, cover));
    let cert_rep = verify_certificate(e, f, &cover.as_certificate());
    rep.push(
        "C2",
        match cert_rep.failures().next() {
            None => Ok(format!("{} intertwiners verified", n)),
            Some(c) => Err(format!("{}: {}", c.name, c.witness)),
        },
    );
    let sets: Vec<&OpenSet> = cover.e_side.iter().map(|s| &s.set).collect();
    let c3 = (|| {
        for i in 0..n {
            for j in i + 1..n {
                let ij = sets[i].intersection(sets[j]);
                if ij.is_empty() {
                    continue;
                }
                for k in j + 1..n {
                    if let Some(x) = first_point(&ij.intersection(sets[k])) {
                        return Err(format!("U{} ∩ U{} ∩ U{} contains {x}", i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        Ok("no triple intersections".to_string())
    })();
    rep.push("C3", c3);
    let c4 = (|| {
        let closures: Vec<PlSet> = sets.iter().map(|s| s.closure()).collect();
        for i in 0..n {
            for j in i + 1..n {
                let a = closures[i].difference(sets[j]);
                let b = closures[j].difference(sets[i]);
                if let Some(x) = first_point(&a.intersection(&b)) {
                    return Err(format!("cl U{0} ∖ U{1} and cl U{1} ∖ U{0} share {x}", i + 1, j + 1));
                }
            }
        }
        Ok("boundaries separated".to_string())
    })();
    rep.push("C4", c4);
    for (name, side) in [("C5", &cover.e_side), ("C6", &cover.f_side)] {
        let outcome = (|| {
            let mut pairs = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if side[i].set.intersection(&side[j].set).is_empty() {
                        continue;
                    }
                    pair_permutation(&side[i], &side[j], i, j)?;
                    pairs += 1;
                }
            }
            Ok(format!("{pairs} intersecting pairs matched by permutations"))
        })();
        rep.push(name, outcome);
    }
    rep
}

fn check_c1(e: &TopGraph, cover: &AdmissibleCover) -> std::result::Result<String, String> {
    for (i, side) in cover.e_side.iter().enumerate() {
        if !side.set.is_open() {
            return Err(format!("U{} is not open", i + 1));
        }
        let pre = e.s().preimage_set(&side.set);
        let union = PlSet::union_all(e.edges(), &side.sheets);
        if union != pre {
            let diff = union.difference(&pre).union(&pre.difference(&union));
            return Err(format!(
                "sheets of U{} do not partition s⁻¹(U{}) near {}",
                i + 1,
                i + 1,
                first_point(&diff).unwrap_or_default()
            ));
        }
        for (k, sk) in side.sheets.iter().enumerate() {
            if !sk.is_open() {
                return Err(format!("U{}{} is not open", i + 1, k + 1));
            }
            for sl in &side.sheets[k + 1..] {
                if let Some(x) = first_point(&sk.intersection(sl)) {
                    return Err(format!("sheets of U{} overlap at {x}", i + 1));
                }
            }
            let once = e.s().fiber_count_set(sk, |c| c == 1).map_err(|x| x.to_string())?;
            if once != side.set {
                let diff = side.set.difference(&once);
                return Err(format!(
                    "s does not map U{}{} bijectively onto U{} (at {})",
                    i + 1,
                    k + 1,
                    i + 1,
                    first_point(&diff).unwrap_or_default()
                ));
            }
        }
    }
    Ok(format!("m = {:?}", cover.m()))
}

/// Nodes of a subdivision: vertices, then cuts in segment order.
fn nodes(cx: &Complex1, cuts: &[Vec<Q>]) -> Vec<Point> {
    let mut out: Vec<Point> = (0..cx.vertex_count()).map(Point::Vertex).collect();
    for (s, c) in cuts.iter().enumerate() {
        out.extend(c.iter().map(|t| Point::Interior { seg: s, t: t.clone() }));
    }
    out
}

/// Open star of `node` in the subdivision by `cuts`.
fn node_star(cx: &std::sync::Arc<Complex1>, cuts: &[Vec<Q>], node: &Point) -> PlSet {
    PlSet::from_predicate(cx, cuts.to_vec(), |x| {
        if x == node {
            return true;
        }
        let Point::Interior { seg, t } = x else { return false };
        let c = &cuts[*seg];
        if c.binary_search(t).is_ok() {
            return false;
        }
        let i = c.partition_point(|k| k < t);
        let lo = if i == 0 { Q::zero() } else { c[i - 1].clone() };
        let hi = if i == c.len() { Q::from_integer(1.into()) } else { c[i].clone() };
        cx.point_on(*seg, lo) == *node || cx.point_on(*seg, hi) == *node
    })
}

fn halve(cuts: &[Vec<Q>]) -> Vec<Vec<Q>> {
    cuts.iter()
        .map(|c| {
            let mut knots = vec![Q::zero()];
            knots.extend(c.iter().cloned());
            knots.push(Q::from_integer(1.into()));
            let mut out = c.clone();
            out.extend(knots.windows(2).map(|w| half(&w[0], &w[1])));
            out.sort();
            out
        })
        .collect()
}

/// Working set: open set, sheets, certificate piece supplying `γ`.
#[derive(Debug, Clone)]
struct Work {
    u: OpenSet,
    sheets: Vec<PlSet>,
    piece: usize,
}

/// Subdivides until every closed node star lies in a certificate set.
fn star_cover(e: &TopGraph, cert: &ConjugacyCertificate) -> Result<Vec<Work>> {
    let cx = e.base();
    let mut cuts: Vec<Vec<Q>> = (0..cx.segment_count())
        .map(|s| {
            let mut c = vec![q(1, 2)];
            for p in &cert.pieces {
                c.extend(p.u.seg_cuts(s).iter().cloned());
            }
            c.sort();
            c.dedup();
            c
        })
        .collect();
    'outer: for _ in 0..MAX_HALVINGS {
        let mut work = Vec::new();
        for node in nodes(cx, &cuts) {
            let star = node_star(cx, &cuts, &node);
            let closed = star.closure();
            let Some(piece) = cert.pieces.iter().position(|p| closed.is_subset(&p.u)) else {
                cuts = halve(&cuts);
                continue 'outer;
            };
            let sheets = e.s().preimage_set(&star).components();
            work.push(Work { u: star, sheets, piece });
        }
        return Ok(work);
    }
    Err(Error::InvalidCertificate(
        "no subdivision fits every node star into a certificate set".into(),
    ))
}

fn restrict_sheets(e: &TopGraph, sheets: &[PlSet], u: &OpenSet) -> Vec<PlSet> {
    let pre = e.s().preimage_set(u);
    sheets.iter().map(|s| s.intersection(&pre)).collect()
}

/// Replaces each `U_i` by `{f_i > 1/3}` for a subordinate partition of unity.
fn shrink(e: &TopGraph, work: Vec<Work>) -> Result<Vec<Work>> {
    let cover: Vec<OpenSet> = work.iter().map(|w| w.u.clone()).collect();
    let pou = partition_of_unity(&cover)?;
    Ok(work
        .into_iter()
        .zip(pou)
        .map(|(w, f)| {
            let u = threshold_set(&f, &Threshold::Above(pou_threshold())).intersection(&w.u);
            let sheets = restrict_sheets(e, &w.sheets, &u);
            Work { u, sheets, piece: w.piece }
        })
        .collect())
}

/// PL function equal to 1 on `a`, 0 on `b` (disjoint closed sets), values
/// in `[0,1]`.
pub(crate) fn separating_function(cx: &std::sync::Arc<Complex1>, a: &PlSet, b: &PlSet) -> PlFunction {
    let cuts: Vec<Vec<Q>> = (0..cx.segment_count())
        .map(|s| {
            let mut c = a.seg_cuts(s).to_vec();
            c.extend(b.seg_cuts(s).iter().cloned());
            quarter_refine(&c)
        })
        .collect();
    PlFunction::from_nodes(cx, cuts, |p| {
        if a.contains(p) {
            Q::from_integer(1.into())
        } else if b.contains(p) {
            Q::zero()
        } else {
            q(1, 2)
        }
    })
}

/// Atoms of the Boolean algebra generated by `parts` inside `whole`.
fn atoms(whole: &PlSet, parts: &[PlSet]) -> Vec<PlSet> {
    let mut out = vec![whole.clone()];
    for z in parts {
        out = out
            .into_iter()
            .flat_map(|a| [a.intersection(z), a.difference(z)])
            .filter(|a| !a.is_empty())
            .collect();
    }
    out
}

/// Band refinement of an intersecting pair; returns the overlap pieces.
fn refine_pair(
    e: &TopGraph,
    f: &TopGraph,
    cert: &ConjugacyCertificate,
    work: &mut [Work],
    i: usize,
    j: usize,
) -> Result<Vec<Work>> {
    let cx = e.base();
    let (ui, uj) = (work[i].u.clone(), work[j].u.clone());
    let both = ui.intersection(&uj);
    let a = ui.closure().difference(&uj);
    let b = uj.closure().difference(&ui);
    let sep = separating_function(cx, &a, &b);
    let gi = cert.pieces[work[i].piece].gamma.restrict(&e.s().preimage_set(&ui));
    let gj = cert.pieces[work[j].piece].gamma.restrict(&e.s().preimage_set(&uj));
    let mut parts = Vec::new();
    for sk in &work[i].sheets {
        let vk = gi.forward_image(sk)?;
        for sl in &work[j].sheets {
            parts.push(e.s().forward_image(&sk.intersection(sl))?);
            let vl = gj.forward_image(sl)?;
            let x = f.s().forward_image(&vk.intersection(&vl))?;
            parts.push(cert.tau.preimage_set(&x));
        }
    }
    let ys = atoms(&both, &parts);
    let hi = threshold_set(&sep, &Threshold::Above(cut_high()));
    let lo = threshold_set(&sep, &Threshold::Below(cut_low()));
    let (b0, b1) = band();
    let mid = threshold_set(&sep, &Threshold::Band(b0, b1));
    let new_i = ui.intersection(&hi);
    let new_j = uj.intersection(&lo);
    let mut extra = Vec::new();
    for y in ys {
        let y2 = y.intersection(&mid);
        if y2.is_empty() {
            continue;
        }
        extra.push(Work {
            sheets: restrict_sheets(e, &work[i].sheets, &y2),
            u: y2,
            piece: work[i].piece,
        });
    }
    work[i].sheets = restrict_sheets(e, &work[i].sheets, &new_i);
    work[i].u = new_i;
    work[j].sheets = restrict_sheets(e, &work[j].sheets, &new_j);
    work[j].u = new_j;
    Ok(extra)
}

fn c4_holds(work: &[Work]) -> bool {
    let closures: Vec<PlSet> = work.iter().map(|w| w.u.closure()).collect();
    (0..work.len()).all(|i| {
        (i + 1..work.len()).all(|j| {
            closures[i]
                .difference(&work[j].u)
                .intersection(&closures[j].difference(&work[i].u))
                .is_empty()
        })
    })
}

/// Builds an admissible cover from a verified certificate: node stars of a
/// fine subdivision, the `1/3` partition-of-unity shrink, and the band
/// refinement of every intersecting pair in lexicographic order.
pub fn build_admissible_cover(e: &TopGraph, f: &TopGraph, cert: &ConjugacyCertificate) -> Result<AdmissibleCover> {
    let rep = verify_certificate(e, f, cert);
    if let Some(c) = rep.failures().next() {
        return Err(Error::InvalidCertificate(format!("{}: {}", c.name, c.witness)));
    }
    let stars = star_cover(e, cert)?;
    let node_count = stars.len();
    let mut work = shrink(e, stars)?;
    let mut shrink_passes = 1;
    let n = work.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !work[i].u.intersection(&work[j].u).is_empty())
        .collect();
    let mut refined = Vec::new();
    let mut extra = Vec::new();
    for &(i, j) in &pairs {
        if work[i].u.intersection(&work[j].u).is_empty() {
            continue;
        }
        extra.extend(refine_pair(e, f, cert, &mut work, i, j)?);
        refined.push((i, j));
    }
    work.extend(extra);
    work.retain(|w| !w.u.is_empty());
    while !c4_holds(&work) && shrink_passes < 4 {
        work = shrink(e, work)?;
        work.retain(|w| !w.u.is_empty());
        shrink_passes += 1;
    }
    let parts = work
        .into_iter()
        .map(|w| (w.u, w.sheets, cert.pieces[w.piece].gamma.clone()))
        .collect();
    let mut cover = AdmissibleCover::from_parts(e, cert.tau.clone(), parts)?;
    cover.metadata = Some(CoverMetadata {
        pou_threshold: pou_threshold(),
        cut_high: cut_high(),
        cut_low: cut_low(),
        band: band(),
        nodes: node_count,
        refined_pairs: refined,
        shrink_passes,
    });
    let check = check_admissible(e, f, &cover);
    if let Some(c) = check.failures().next() {
        return Err(Error::NotAdmissible {
            condition: c.name.clone(),
            detail: c.witness.clone(),
        });
    }
    Ok(cover)
}
