//! Acceptance criteria 1 to 9, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topcorr::characters::{eval_character, fiber_dimension, make_bumps, CharacterPoint};
use topcorr::corr::{act, inner_product, CoefFn, CorrVector, TensorVector};
use topcorr::cover::{
    build_admissible_cover, check_admissible, decide_local_conjugacy_discrete, permutation_data, verify_certificate,
    ConjugacyCertificate, DiscreteVerdict,
};
use topcorr::equiv::{full_equivalence, gamma_flip_with_angle, random_field, step_cover, verify_unitary, CorrUnitary, StepKind};
use topcorr::fock::{creation_op, element_matrix, pi_op, AlgebraElement, PathBasis};
use topcorr::graph::TopGraph;
use topcorr::nest::{build_nest_rep, diagonality_check};
use topcorr::space::{q, Point, ScalarField, Q};
use topcorr::{fixtures, Result};

const GRID: i64 = 512;
const SEED: u64 = 20261016;

type Outcome = std::result::Result<String, String>;

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ k)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gauss_int<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-4..=4) as f64, rng.gen_range(-4..=4) as f64)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Base points `k/512` on every segment, plus the vertices.
fn base_grid(g: &TopGraph) -> Vec<Point> {
    let cx = g.base();
    let mut pts: Vec<Point> = (0..cx.vertex_count()).map(Point::Vertex).collect();
    for seg in 0..cx.segment_count() {
        pts.extend((1..GRID).map(|k| cx.point_on(seg, q(k, GRID))));
    }
    pts
}

/// `s⁻¹(v)` read off the copy structure of a dynamical-system graph.
fn copy_fiber(g: &TopGraph, v: &Point) -> Vec<Point> {
    (0..g.copies().expect("dynamical system")).map(|i| g.lift_to_copy(i, v)).collect()
}

fn discrete_fiber(g: &TopGraph, v: &Point) -> Vec<Point> {
    (0..g.edges().vertex_count())
        .map(Point::Vertex)
        .filter(|e| g.s().try_eval(e).as_ref() == Some(v))
        .collect()
}

fn range_of(g: &TopGraph, e: &Point) -> Point {
    g.r().try_eval(e).expect("r is total")
}

/// Positivity, module compatibility and Cauchy-Schwarz at every point of
/// `pts`, with inner products recomputed from the fibers.
fn axioms_at(
    g: &Arc<TopGraph>,
    pts: &[Point],
    fiber: impl Fn(&Point) -> Vec<Point>,
    x: &CorrVector,
    y: &CorrVector,
    f: &CoefFn,
    h: &CoefFn,
    tol: f64,
) -> std::result::Result<f64, String> {
    let ip = |a: &CorrVector, b: &CorrVector, v: &Point| -> C64 {
        fiber(v).iter().map(|e| a.eval(e).conj() * b.eval(e)).sum()
    };
    let fxh = lib(act(f, x, h))?;
    let lib_xy = lib(inner_product(x, y))?;
    let lib_xyh = lib(inner_product(x, &lib(y.right(h))?))?;
    let lib_fx_y = lib(inner_product(&lib(x.left(f))?, y))?;
    let lib_x_fy = lib(inner_product(x, &lib(y.left(&f.conj()))?))?;
    let mut worst = 0.0f64;
    let mut bump = |d: f64, what: &str, p: &Point| -> std::result::Result<(), String> {
        worst = worst.max(d);
        ensure(d <= tol, || format!("{what} off by {d:e} at {p:?}"))
    };
    for v in pts {
        let (xx, yy, xy) = (ip(x, x, v), ip(y, y, v), ip(x, y, v));
        bump((lib_xy.eval(v) - xy).norm(), "<x,y> vs fiber sum", v)?;
        bump((-xx.re).max(0.0) + xx.im.abs(), "positivity", v)?;
        bump((xy.norm_sqr() - xx.re * yy.re).max(0.0), "Cauchy-Schwarz", v)?;
        bump((lib_xyh.eval(v) - xy * h.eval(v)).norm(), "<x,y.g> = <x,y>g", v)?;
        bump((lib_fx_y.eval(v) - lib_x_fy.eval(v)).norm(), "<f.x,y> = <x,f*.y>", v)?;
        for e in fiber(v) {
            let want = f.eval(&range_of(g, &e)) * x.eval(&e) * h.eval(v);
            bump((fxh.eval(&e) - want).norm(), "(f.x.g)(e)", &e)?;
        }
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let dk = Arc::new(fixtures::dkflip_e());
    let pts = base_grid(&dk);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = lib(CorrVector::new(&dk, random_field(dk.edges(), &mut r)))?;
        let y = lib(CorrVector::new(&dk, random_field(dk.edges(), &mut r)))?;
        let f = lib(CoefFn::new(&dk, random_field(dk.base(), &mut r)))?;
        let h = lib(CoefFn::new(&dk, random_field(dk.base(), &mut r)))?;
        worst = worst.max(axioms_at(&dk, &pts, |v| copy_fiber(&dk, v), &x, &y, &f, &h, 1e-12)?);
    }
    let d1 = Arc::new(fixtures::d1());
    let pts: Vec<Point> = (0..d1.base().vertex_count()).map(Point::Vertex).collect();
    for _ in 0..200 {
        let mut vals = |n: usize| (0..n).map(|_| gauss_int(&mut r)).collect::<Vec<_>>();
        let (ne, nb) = (d1.edges().vertex_count(), d1.base().vertex_count());
        let x = lib(CorrVector::from_values(&d1, vals(ne)))?;
        let y = lib(CorrVector::from_values(&d1, vals(ne)))?;
        let f = lib(CoefFn::from_values(&d1, vals(nb)))?;
        let h = lib(CoefFn::from_values(&d1, vals(nb)))?;
        axioms_at(&d1, &pts, |v| discrete_fiber(&d1, v), &x, &y, &f, &h, 0.0)?;
    }
    Ok(format!("DKFLIP worst deviation {worst:.1e} (tol 1e-12); D1 exact"))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    for g in [fixtures::d1(), fixtures::swap2()] {
        let g = Arc::new(g);
        let (ne, nb) = (g.edges().vertex_count(), g.base().vertex_count());
        let bases: Vec<PathBasis> = (0..=4).map(|n| lib(PathBasis::new(&g, n))).collect::<std::result::Result<_, _>>()?;
        for _ in 0..100 {
            let mut vals = |n: usize| (0..n).map(|_| gauss_int(&mut r)).collect::<Vec<_>>();
            let f = lib(CoefFn::from_values(&g, vals(nb)))?;
            let h = lib(CoefFn::from_values(&g, vals(nb)))?;
            let x = lib(CorrVector::from_values(&g, vals(ne)))?;
            for b in &bases {
                let lhs = &lib(pi_op(&f, b))?.matrix * &lib(creation_op(&x, b))?.matrix;
                ensure(lhs == lib(creation_op(&lib(x.left(&f))?, b))?.matrix, || {
                    format!("pi(f)t(x) != t(f.x) at depth {}", b.depth())
                })?;
                let rhs = &lib(creation_op(&x, b))?.matrix * &lib(pi_op(&h, b))?.matrix;
                ensure(rhs == lib(creation_op(&lib(x.right(&h))?, b))?.matrix, || {
                    format!("t(x)pi(g) != t(x.g) at depth {}", b.depth())
                })?;
            }
        }
    }
    Ok("D1 and SWAP2, depths 0..=4, 100 triples each, exact".into())
}

fn loop_count_by_copies(g: &TopGraph, v: &Point) -> usize {
    copy_fiber(g, v).iter().filter(|e| range_of(g, e) == *v).count()
}

fn loop_count_discrete(g: &TopGraph, v: &Point) -> usize {
    discrete_fiber(g, v).iter().filter(|e| range_of(g, e) == *v).count()
}

/// `#{i : σᵢ(y) = y}` for `σ₁ = id`, `σ₂ = clamp(·, 1/3, 2/3)`.
fn dkflip_loops(y: &Q) -> usize {
    let clamp = y.clone().max(q(1, 3)).min(q(2, 3));
    1 + usize::from(clamp == *y)
}

fn random_ball<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    let z: Vec<C64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1.0 {
        z
    } else {
        let radius: f64 = rng.gen();
        z.into_iter().map(|w| w * (radius / norm)).collect()
    }
}

fn random_vector<R: Rng>(g: &Arc<TopGraph>, rng: &mut R) -> std::result::Result<CorrVector, String> {
    lib(CorrVector::new(g, random_field(g.edges(), rng)))
}

/// `f + t(x) + t(x⊗x') + t(x⊗x'⊗x'')` with random fields.
fn random_polynomial<R: Rng>(g: &Arc<TopGraph>, rng: &mut R) -> std::result::Result<AlgebraElement, String> {
    let mut a = AlgebraElement::coef(lib(CoefFn::new(g, random_field(g.base(), rng)))?);
    for degree in 1..=3 {
        let factors = (0..degree).map(|_| random_vector(g, rng)).collect::<std::result::Result<Vec<_>, _>>()?;
        let term = lib(AlgebraElement::tn(lib(TensorVector::elementary(factors))?))?;
        a = lib(a.add(&term.scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))?;
    }
    Ok(a)
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut checked = 0;
    for g in [fixtures::d1(), fixtures::d1_plus(), fixtures::d1_swapped(), fixtures::swap2()] {
        for v in (0..g.base().vertex_count()).map(Point::Vertex) {
            let n = lib(fiber_dimension(&g, &v))?.0;
            ensure(n == loop_count_discrete(&g, &v), || format!("fiber dimension {n} at {v:?}"))?;
            checked += 1;
        }
    }
    let d1 = fixtures::d1();
    let named = |id| lib(fiber_dimension(&d1, &d1.base().vertex(id))).map(|p| p.0);
    ensure(named("a")? == 1 && named("b")? == 0, || "D1 loop counts".into())?;

    let thirds = fixtures::thirds();
    let dk = fixtures::dkflip_e();
    let (ce, cf) = fixtures::circle_pair();
    let (te, tf) = fixtures::three_cycle_pair();
    for k in 0..=48 {
        let y = q(k, 48);
        let p = thirds.point(&y);
        let n = lib(fiber_dimension(&dk, &p))?.0;
        ensure(n == dkflip_loops(&y), || format!("DKFLIP fiber dimension {n} at {y}"))?;
        for g in [&fixtures::dkflip_f(), &te, &tf] {
            let n = lib(fiber_dimension(g, &p))?.0;
            ensure(n == loop_count_by_copies(g, &p), || format!("fiber dimension {n} at {y}"))?;
        }
        checked += 4;
    }
    for g in [&ce, &cf] {
        for p in base_grid(g).into_iter().step_by(37) {
            let n = lib(fiber_dimension(g, &p))?.0;
            ensure(n == loop_count_by_copies(g, &p), || format!("circle fiber dimension {n} at {p:?}"))?;
            checked += 1;
        }
    }
    let named: Vec<usize> = [q(1, 2), q(1, 4), q(9, 10)]
        .iter()
        .map(|y| lib(fiber_dimension(&dk, &thirds.point(y))).map(|p| p.0))
        .collect::<std::result::Result<_, _>>()?;
    let expected: Vec<usize> = [q(1, 2), q(1, 4), q(9, 10)].iter().map(dkflip_loops).collect();
    ensure(named == expected, || format!("DKFLIP named points {named:?}"))?;

    let dk = Arc::new(dk);
    let d1 = Arc::new(d1);
    let sites = [
        (dk.clone(), thirds.point(&q(1, 2))),
        (dk.clone(), thirds.point(&q(1, 4))),
        (d1.clone(), d1.base().vertex("a")),
    ];
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (g, v) = &sites[i % sites.len()];
        let n = lib(fiber_dimension(g, v))?.0;
        let theta = lib(CharacterPoint::new(g, v.clone(), random_ball(&mut r, n)))?;
        let (a, b) = (random_polynomial(g, &mut r)?, random_polynomial(g, &mut r)?);
        let ab = lib(eval_character(&theta, &lib(a.mul(&b))?))?;
        let d = (ab - lib(eval_character(&theta, &a))? * lib(eval_character(&theta, &b))?).norm();
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("θ(AB) - θ(A)θ(B) = {d:e} at {v:?}"))?;
    }

    for i in 0..100 {
        let (g, v) = &sites[i % sites.len()];
        let bumps = lib(make_bumps(g, v))?;
        let mut chi = ScalarField::one(g.edges());
        for t in &bumps.bumps {
            chi = lib(chi.sub(t.field()))?;
        }
        let x = random_vector(g, &mut r)?;
        let masked = lib(CorrVector::new(g, lib(x.field().mul(&chi))?))?;
        let theta = lib(CharacterPoint::new(g, v.clone(), random_ball(&mut r, bumps.loops.len())))?;
        let val = lib(eval_character(&theta, &lib(AlgebraElement::t(masked))?))?;
        ensure(val == C64::new(0.0, 0.0), || format!("θ(t(x)) = {val} for x vanishing near the loops"))?;
    }
    Ok(format!(
        "{checked} fiber dimensions match the loop oracle; multiplicativity worst {worst:.1e}; 100 masked vectors give exactly 0"
    ))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let (mut built, mut refused) = (0, 0);
    for g in [fixtures::d1(), fixtures::d1_plus(), fixtures::d1_swapped(), fixtures::swap2()] {
        let g = Arc::new(g);
        let nv = g.base().vertex_count();
        for (v, w) in (0..nv).flat_map(|v| (0..nv).map(move |w| (Point::Vertex(v), Point::Vertex(w)))) {
            let fiber: Vec<Point> = discrete_fiber(&g, &w).into_iter().filter(|e| range_of(&g, e) == v).collect();
            let n = fiber.len();
            ensure(lib(g.edges_between(&v, &w))?.n() == n, || format!("edges_between({v:?},{w:?})"))?;
            let weights: Vec<(Point, C64)> = fiber.iter().map(|e| (e.clone(), c(1.0 / n.max(1) as f64, 0.0))).collect();
            let rho = match build_nest_rep(&g, &v, &w, &weights) {
                Ok(rho) if n >= 1 => rho,
                Ok(_) => return Err(format!("built a nest representation over empty ({v:?},{w:?})")),
                Err(_) if n == 0 => {
                    refused += 1;
                    continue;
                }
                Err(e) => return Err(format!("({v:?},{w:?}) with {n} edges: {e}")),
            };
            built += 1;
            for (e, (_, l)) in fiber.iter().zip(&weights) {
                let mut vals = vec![c(0.0, 0.0); g.edges().vertex_count()];
                let Point::Vertex(k) = e else { unreachable!() };
                vals[*k] = c(1.0, 0.0);
                let rep = lib(diagonality_check(&rho, &lib(CorrVector::from_values(&g, vals))?))?;
                ensure(!rep.diagonal && rep.corner == *l, || format!("t(δ_e) corner {} at {e:?}", rep.corner))?;
            }
            for _ in 0..100 {
                let vals = (0..g.edges().vertex_count()).map(|_| gauss_int(&mut r)).collect();
                let x = lib(lib(CorrVector::from_values(&g, vals))?.vanishing_on(&fiber))?;
                let rep = lib(diagonality_check(&rho, &x))?;
                ensure(rep.support_off_fiber && rep.diagonal, || format!("masked vector not diagonal over ({v:?},{w:?})"))?;
            }
        }
    }
    Ok(format!("{built} pairs built, {refused} empty pairs refused, 100 masked vectors diagonal per pair"))
}

/// A discrete graph as `(source, range)` pairs over `0..nv`.
#[derive(Debug, Clone)]
struct Discrete {
    nv: usize,
    edges: Vec<(usize, usize)>,
}

impl Discrete {
    fn random<R: Rng>(rng: &mut R, nv: usize, ne: usize) -> Self {
        Discrete {
            nv,
            edges: (0..ne).map(|_| (rng.gen_range(0..nv), rng.gen_range(0..nv))).collect(),
        }
    }

    fn relabelled<R: Rng>(&self, rng: &mut R) -> Self {
        let mut tau: Vec<usize> = (0..self.nv).collect();
        tau.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = self.edges.iter().map(|&(s, r)| (tau[s], tau[r])).collect();
        edges.shuffle(rng);
        Discrete { nv: self.nv, edges }
    }

    fn graph(&self) -> TopGraph {
        let vs: Vec<String> = (0..self.nv).map(|v| format!("v{v}")).collect();
        let es: Vec<(String, String, String)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(s, r))| (format!("e{k}"), vs[s].clone(), vs[r].clone()))
            .collect();
        let vref: Vec<&str> = vs.iter().map(String::as_str).collect();
        let eref: Vec<(&str, &str, &str)> = es.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
        TopGraph::discrete(&vref, &eref).expect("random discrete graph is valid")
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Brute force over vertex bijections `τ` and, at each vertex, over
/// bijections of source fibers intertwining the ranges.
fn conjugate_by_definition(e: &Discrete, f: &Discrete) -> bool {
    if e.nv != f.nv {
        return false;
    }
    let fiber = |g: &Discrete, v: usize| -> Vec<usize> { (0..g.edges.len()).filter(|&k| g.edges[k].0 == v).collect() };
    permutations(e.nv).into_iter().any(|tau| {
        (0..e.nv).all(|v| {
            let (fe, ff) = (fiber(e, v), fiber(f, tau[v]));
            fe.len() == ff.len()
                && permutations(fe.len())
                    .iter()
                    .any(|p| fe.iter().zip(p).all(|(&a, &i)| f.edges[ff[i]].1 == tau[e.edges[a].1]))
        })
    })
}

fn vertex_index(p: Option<Point>) -> std::result::Result<usize, String> {
    match p {
        Some(Point::Vertex(v)) => Ok(v),
        other => Err(format!("expected a vertex, got {other:?}")),
    }
}

/// `τ` and the edge bijection `e ↦ γ_{s(e)}(e)` read off a certificate.
fn induced_bijection(
    e: &TopGraph,
    f: &TopGraph,
    cert: &ConjugacyCertificate,
) -> std::result::Result<(Vec<usize>, Vec<usize>), String> {
    let tau = (0..e.base().vertex_count())
        .map(|v| vertex_index(cert.tau.try_eval(&Point::Vertex(v))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut gamma = Vec::new();
    for k in 0..e.edges().vertex_count() {
        let ek = Point::Vertex(k);
        let s = e.s().try_eval(&ek).ok_or("s undefined")?;
        let piece = cert.pieces.iter().find(|p| p.u.contains(&s)).ok_or("no piece covers s(e)")?;
        let img = vertex_index(piece.gamma.try_eval(&ek))?;
        let (sf, rf) = (vertex_index(f.s().try_eval(&Point::Vertex(img)))?, vertex_index(f.r().try_eval(&Point::Vertex(img)))?);
        let (se, re) = (vertex_index(Some(s))?, vertex_index(e.r().try_eval(&ek))?);
        ensure(sf == tau[se] && rf == tau[re], || format!("γ does not intertwine at edge {k}"))?;
        gamma.push(img);
    }
    let mut seen = tau.clone();
    seen.sort_unstable();
    ensure(seen == (0..tau.len()).collect::<Vec<_>>(), || "τ is not a bijection".into())?;
    let mut seen = gamma.clone();
    seen.sort_unstable();
    ensure(seen == (0..gamma.len()).collect::<Vec<_>>(), || "γ is not a bijection".into())?;
    Ok((tau, gamma))
}

fn random_discrete_pairs(seed: u64, count: usize) -> Vec<(Discrete, Discrete)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let nv = r.gen_range(1..=4);
            let ne = r.gen_range(1..=5);
            let e = Discrete::random(&mut r, nv, ne);
            let f = match r.gen_range(0..3) {
                0 => e.relabelled(&mut r),
                1 => {
                    let mut f = e.relabelled(&mut r);
                    let k = r.gen_range(0..ne);
                    f.edges[k].1 = r.gen_range(0..nv);
                    f
                }
                _ => Discrete::random(&mut r, nv, ne),
            };
            (e, f)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let (mut yes, mut no) = (0, 0);
    for (k, (de, df)) in random_discrete_pairs(5, 500).iter().enumerate() {
        let (e, f) = (de.graph(), df.graph());
        let oracle = conjugate_by_definition(de, df);
        match lib(decide_local_conjugacy_discrete(&e, &f))? {
            DiscreteVerdict::Conjugate(cert) => {
                ensure(oracle, || format!("pair {k}: library says conjugate, oracle disagrees: {de:?} {df:?}"))?;
                let rep = verify_certificate(&e, &f, &cert);
                ensure(rep.passed(), || format!("pair {k}: certificate rejected\n{rep}"))?;
                induced_bijection(&e, &f, &cert).map_err(|m| format!("pair {k}: {m}"))?;
                yes += 1;
            }
            DiscreteVerdict::NotConjugate(why) => {
                ensure(!oracle, || format!("pair {k}: library says {why}, oracle finds a conjugacy: {de:?} {df:?}"))?;
                no += 1;
            }
        }
    }
    Ok(format!("500 pairs, 0 disagreements ({yes} conjugate with valid certificates, {no} not)"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let (ce, cf) = fixtures::circle_pair();
    let mut cases = vec![
        ("DKFLIP".to_string(), fixtures::dkflip_e(), fixtures::dkflip_f(), fixtures::dkflip_certificate()),
        ("circle".to_string(), ce, cf, fixtures::circle_certificate()),
    ];
    for k in 0..20 {
        let p = fixtures::random_pair(&mut r);
        cases.push((format!("random #{k}"), p.e.clone(), p.f.clone(), p.certificate()));
    }
    let mut sets = 0;
    for (name, e, f, cert) in &cases {
        let rep = verify_certificate(e, f, cert);
        ensure(rep.passed(), || format!("{name}: certificate rejected\n{rep}"))?;
        let cover = lib(build_admissible_cover(e, f, cert)).map_err(|m| format!("{name}: {m}"))?;
        let rep = check_admissible(e, f, &cover);
        ensure(rep.passed(), || format!("{name}: {rep}"))?;
        let m = cover.metadata.as_ref().ok_or(format!("{name}: no metadata"))?;
        ensure(
            m.pou_threshold == q(1, 3) && m.cut_low == q(2, 5) && m.cut_high == q(3, 5) && m.band == (q(3, 10), q(7, 10)),
            || format!("{name}: thresholds {m:?}"),
        )?;
        sets += cover.len();
    }
    Ok(format!("{} systems, {sets} cover sets, C1-C6 pass, thresholds 1/3, 2/5, 3/5, (3/10, 7/10)", cases.len()))
}

const SAMPLES: usize = 2000;

fn criterion_7() -> Outcome {
    let (e, f) = (Arc::new(fixtures::dkflip_e()), Arc::new(fixtures::dkflip_f()));
    let cover = lib(build_admissible_cover(&e, &f, &fixtures::dkflip_certificate()))?;
    let eq = lib(full_equivalence(&e, &f, &cover))?;
    ensure(eq.unitary.flips() == 1, || format!("{} flips", eq.unitary.flips()))?;
    let rep = lib(verify_unitary(&eq.unitary, SAMPLES, 7))?;
    ensure(rep.passed(1e-9), || rep.to_string())?;

    let StepKind::Flip(spec) = eq.unitary.steps()[0].kind else {
        return Err("first step is not a flip".into());
    };
    let (g0, g1) = (&eq.chain[0], &eq.chain[1]);
    let sc = lib(step_cover(g0, g1, &cover))?;
    let bad = lib(gamma_flip_with_angle(&g0.graph, &g1.graph, &sc, spec, std::f64::consts::FRAC_PI_3))?;
    let mut steps = vec![bad];
    steps.extend(eq.unitary.steps()[1..].iter().cloned());
    let control = lib(verify_unitary(&lib(CorrUnitary::new(steps))?, SAMPLES, 7))?;
    ensure(control.continuity > 1e-3, || format!("negative control not detected\n{control}"))?;
    Ok(format!(
        "1 flip; residuals isometry {:.1e}, left {:.1e}, right {:.1e}, continuity {:.1e} over {SAMPLES} samples (seed 7); corrupted g: continuity defect {:.2e}",
        rep.isometry,
        rep.left_module,
        rep.right_module,
        rep.continuity,
        control.continuity
    ))
}

fn criterion_8() -> Outcome {
    let (e, f) = fixtures::three_cycle_pair();
    let (e, f) = (Arc::new(e), Arc::new(f));
    let cover = lib(build_admissible_cover(&e, &f, &fixtures::three_cycle_certificate()))?;
    let eq = lib(full_equivalence(&e, &f, &cover))?;
    ensure(eq.unitary.flips() == 2, || format!("{} flips", eq.unitary.flips()))?;
    let target = lib(permutation_data(&cover.f_side))?;
    let last = eq.chain.last().ok_or("empty chain")?;
    let recomputed = lib(permutation_data(&last.side(&cover.e_side)))?;
    ensure(eq.final_data == target && recomputed == target, || "final permutation data differs from F".into())?;
    let rep = lib(verify_unitary(&eq.unitary, SAMPLES, 8))?;
    ensure(rep.passed(1e-9), || rep.to_string())?;
    Ok(format!("2 flips; final data equals F; composed residual {:.1e} over {SAMPLES} samples (seed 8)", rep.max_residual()))
}

/// A random word of length at most 3 in coefficients and creation operators,
/// transported to `F` along `(τ, γ)`.
fn random_word<R: Rng>(
    r: &mut R,
    e: &Arc<TopGraph>,
    f: &Arc<TopGraph>,
    tau: &[usize],
    gamma: &[usize],
) -> std::result::Result<(AlgebraElement, AlgebraElement), String> {
    let mut a = AlgebraElement::coef(CoefFn::one(e));
    let mut b = AlgebraElement::coef(CoefFn::one(f));
    for _ in 0..r.gen_range(1..=3) {
        if r.gen_bool(0.5) {
            let vals: Vec<C64> = (0..tau.len()).map(|_| gauss_int(r)).collect();
            let mut moved = vec![c(0.0, 0.0); tau.len()];
            for (v, x) in vals.iter().enumerate() {
                moved[tau[v]] = *x;
            }
            a = lib(a.mul(&AlgebraElement::coef(lib(CoefFn::from_values(e, vals))?)))?;
            b = lib(b.mul(&AlgebraElement::coef(lib(CoefFn::from_values(f, moved))?)))?;
        } else {
            let vals: Vec<C64> = (0..gamma.len()).map(|_| gauss_int(r)).collect();
            let mut moved = vec![c(0.0, 0.0); gamma.len()];
            for (k, x) in vals.iter().enumerate() {
                moved[gamma[k]] = *x;
            }
            a = lib(a.mul(&lib(AlgebraElement::t(lib(CorrVector::from_values(e, vals))?))?))?;
            b = lib(b.mul(&lib(AlgebraElement::t(lib(CorrVector::from_values(f, moved))?))?))?;
        }
    }
    Ok((a, b))
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut pairs: Vec<(TopGraph, TopGraph)> = vec![
        (fixtures::d1(), fixtures::d1()),
        (fixtures::swap2(), fixtures::swap2()),
        (fixtures::d1(), fixtures::d1_swapped()),
    ];
    pairs.extend(random_discrete_pairs(9, 60).into_iter().map(|(a, b)| (a.graph(), b.graph())));
    let (mut used, mut entries) = (0, 0usize);
    for (e, f) in pairs {
        let DiscreteVerdict::Conjugate(cert) = lib(decide_local_conjugacy_discrete(&e, &f))? else { continue };
        let (e, f) = (Arc::new(e), Arc::new(f));
        let (tau, gamma) = induced_bijection(&e, &f, &cert)?;
        used += 1;
        for depth in 0..=3 {
            let (be, bf) = (lib(PathBasis::new(&e, depth))?, lib(PathBasis::new(&f, depth))?);
            ensure(be.len() == bf.len(), || format!("basis sizes {} vs {}", be.len(), bf.len()))?;
            let image: Vec<usize> = be
                .entries()
                .iter()
                .map(|(n, ids)| {
                    let moved: Vec<usize> = if *n == 0 { vec![tau[ids[0]]] } else { ids.iter().map(|k| gamma[*k]).collect() };
                    bf.position(*n, &moved).ok_or_else(|| format!("path {ids:?} has no image"))
                })
                .collect::<std::result::Result<_, _>>()?;
            for _ in 0..5 {
                let (a, b) = random_word(&mut r, &e, &f, &tau, &gamma)?;
                let (ma, mb) = (lib(element_matrix(&a, &be))?.matrix, lib(element_matrix(&b, &bf))?.matrix);
                for i in 0..be.len() {
                    for j in 0..be.len() {
                        ensure(ma[(i, j)] == mb[(image[i], image[j])], || {
                            format!("entry ({i},{j}) at depth {depth} not intertwined")
                        })?;
                    }
                }
                entries += be.len() * be.len();
            }
        }
    }
    Ok(format!("{used} conjugate pairs, depths 0..=3, {entries} matrix entries intertwined exactly"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("correspondence axioms", criterion_1),
        ("covariance relations", criterion_2),
        ("characters", criterion_3),
        ("nest representations", criterion_4),
        ("discrete local conjugacy vs oracle", criterion_5),
        ("admissible covers", criterion_6),
        ("flip unitary", criterion_7),
        ("converse composition", criterion_8),
        ("Fock-level consistency", criterion_9),
    ];
    let mut failed = 0;
    let mut timings = BTreeMap::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        timings.insert(k + 1, start.elapsed());
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{:.1?}]", k + 1, timings[&(k + 1)]),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
