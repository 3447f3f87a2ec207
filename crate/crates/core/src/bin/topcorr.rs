use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use topcorr::characters::{character_coordinates, fiber_dimension, make_bumps, CharacterPoint};
use topcorr::corr::{CoefFn, CorrVector};
use topcorr::cover::{
    build_admissible_cover, check_admissible, ConjugacyCertificate, decide_local_conjugacy_discrete, verify_certificate, CheckReport,
    DiscreteVerdict,
};
use topcorr::equiv::{full_equivalence, verify_unitary, StepKind};
use topcorr::fock::{element_matrix, AlgebraElement, PathBasis};
use topcorr::graph::TopGraph;
use topcorr::nest::{build_nest_rep, diagonality_check};
use topcorr::space::Point;
use topcorr::{fixtures, io, Error, Result};

/// Topological graphs over 1-complexes: validation, characters, nest
/// representations, Fock matrices, local conjugacy, admissible covers and
/// explicit unitary equivalences.
#[derive(Parser)]
#[command(name = "topcorr", version)]
struct Cli {
    /// Print JSON reports instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the graph axioms.
    Validate { file: PathBuf },
    /// Loop count at a vertex and the bump coordinates of sample characters.
    Characters {
        file: PathBuf,
        /// Vertex id or `seg@t`.
        #[arg(long)]
        vertex: String,
    },
    /// Edge fiber over `(v, w)`, a sample nest representation and diagonality reports.
    Nestrep {
        file: PathBuf,
        /// `v,w`, each a vertex id or `seg@t`.
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Truncated Fock matrix of an element of a discrete graph's tensor algebra.
    Fock {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Sum of words, e.g. `2*a.b + @v`: `a.b` is `T(δ_a)T(δ_b)`, `@v` is `π(δ_v)`.
        #[arg(long)]
        element: String,
    },
    /// Decide local conjugacy (discrete graphs) or verify a certificate.
    Conjugacy {
        e: PathBuf,
        f: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write the certificate found to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an admissible cover from a certificate and check (C1)–(C6).
    Cover {
        e: PathBuf,
        f: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and verify the unitary `X(E) → X(F)`.
    Equivalence {
        e: PathBuf,
        f: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Residual tolerance for the exit status.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Write the fixture corpus to a directory.
    Fixtures { dir: PathBuf },
}

fn load(path: &Path) -> Result<Arc<TopGraph>> {
    io::read_graph(path).map(Arc::new)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn fmt_c(z: C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn report_json(r: &CheckReport) -> Value {
    json!({
        "passed": r.passed(),
        "checks": r.checks.iter().map(|k| json!({ "name": k.name, "passed": k.passed, "witness": k.witness })).collect::<Vec<_>>(),
    })
}

fn emit(as_json: bool, doc: &Value, text: &str) {
    if as_json {
        print!("{}", io::to_canonical_string(doc));
    } else {
        println!("{text}");
    }
}

fn validate(file: &Path, as_json: bool) -> Result<()> {
    let doc = io::read_json(file)?;
    match io::graph_from_json(&doc) {
        Ok(g) => {
            let r = g.report();
            let checks: Vec<Value> = r
                .checks
                .iter()
                .map(|k| json!({ "axiom": k.axiom, "passed": k.passed, "witness": k.witness }))
                .collect();
            emit(as_json, &json!({ "valid": true, "checks": checks }), &format!("valid\n{r}"));
            Ok(())
        }
        Err(Error::InvalidGraph(msg)) => {
            emit(as_json, &json!({ "valid": false, "reason": msg }), &format!("invalid: {msg}"));
            Err(Error::InvalidGraph(msg))
        }
        Err(e) => Err(e),
    }
}

fn characters(file: &Path, vertex: &str, as_json: bool) -> Result<()> {
    let g = load(file)?;
    let v = io::parse_point(g.base(), vertex)?;
    let (n, loops) = fiber_dimension(&g, &v)?;
    let loop_ids: Vec<String> = loops.iter().map(|e| g.edges().describe(e)).collect();
    let mut samples = vec![vec![c(0.0); n]];
    for k in 0..n {
        let mut z = vec![c(0.0); n];
        z[k] = c(0.5);
        samples.push(z);
    }
    let mut rows = Vec::new();
    let mut text = format!("n = {n}\nloops: {}\n", loop_ids.join(", "));
    if n > 0 || g.is_discrete() || v.is_vertex() {
        let bumps = make_bumps(&g, &v)?;
        for z in samples {
            let theta = CharacterPoint::new(&g, v.clone(), z.clone())?;
            let kappa = character_coordinates(&bumps, &theta)?;
            let zs: Vec<String> = z.iter().map(|x| fmt_c(*x)).collect();
            let ks: Vec<String> = kappa.iter().map(|x| fmt_c(*x)).collect();
            text.push_str(&format!("z = [{}]  κ(θ) = [{}]\n", zs.join(", "), ks.join(", ")));
            rows.push(json!({ "z": zs, "kappa": ks }));
        }
    }
    emit(
        as_json,
        &json!({ "vertex": g.base().describe(&v), "n": n, "loops": loop_ids, "samples": rows }),
        text.trim_end(),
    );
    Ok(())
}

fn random_vector(g: &Arc<TopGraph>, rng: &mut ChaCha8Rng) -> Result<CorrVector> {
    CorrVector::new(g, topcorr::equiv::random_field(g.edges(), rng))
}

fn nestrep(file: &Path, pair: &str, seed: u64, as_json: bool) -> Result<()> {
    let g = load(file)?;
    let (a, b) = pair
        .split_once(',')
        .ok_or_else(|| Error::Precondition("--pair takes v,w".into()))?;
    let (v, w) = (io::parse_point(g.base(), a)?, io::parse_point(g.base(), b)?);
    let fiber = g.edges_between(&v, &w)?;
    let ids: Vec<String> = fiber.edges.iter().map(|e| g.edges().describe(e)).collect();
    let n = fiber.n();
    let weights: Vec<(Point, C64)> = fiber.edges.iter().map(|e| (e.clone(), c(1.0 / n.max(1) as f64))).collect();
    let rho = build_nest_rep(&g, &v, &w, &weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generic = random_vector(&g, &mut rng)?;
    let masked = generic.vanishing_on(&fiber.edges)?;
    let mut rows = Vec::new();
    let mut text = format!("fiber E¹_(v,w) = {{{}}} (n = {n})\nweights 1/{n} on each edge\n", ids.join(", "));
    for (name, x) in [("generic", &generic), ("masked", &masked)] {
        let r = diagonality_check(&rho, &x)?;
        text.push_str(&format!(
            "{name:8} corner {}  diagonal {}  vanishes on fiber {}\n",
            fmt_c(r.corner),
            r.diagonal,
            r.support_off_fiber
        ));
        rows.push(json!({ "vector": name, "corner": fmt_c(r.corner), "diagonal": r.diagonal, "vanishes_on_fiber": r.support_off_fiber }));
    }
    text.push_str(&format!("seed {seed}"));
    emit(as_json, &json!({ "fiber": ids, "n": n, "seed": seed, "reports": rows }), &text);
    Ok(())
}

fn delta_vector(g: &Arc<TopGraph>, id: &str) -> Result<CorrVector> {
    let k = g
        .edges()
        .vertex_index(id)
        .ok_or_else(|| Error::Precondition(format!("unknown edge {id:?}")))?;
    let mut vals = vec![c(0.0); g.edges().vertex_count()];
    vals[k] = c(1.0);
    CorrVector::from_values(g, vals)
}

fn delta_coef(g: &Arc<TopGraph>, id: &str) -> Result<CoefFn> {
    let k = g
        .base()
        .vertex_index(id)
        .ok_or_else(|| Error::Precondition(format!("unknown vertex {id:?}")))?;
    let mut vals = vec![c(0.0); g.base().vertex_count()];
    vals[k] = c(1.0);
    CoefFn::from_values(g, vals)
}

/// Parses `2*a.b + @v - c`.
fn parse_element(g: &Arc<TopGraph>, spec: &str) -> Result<AlgebraElement> {
    let mut acc = AlgebraElement::zero(g);
    let normalized = spec.replace('-', "+-");
    for term in normalized.split('+').map(str::trim).filter(|t| !t.is_empty()) {
        let (sign, term) = match term.strip_prefix('-') {
            Some(t) => (-1.0, t.trim()),
            None => (1.0, term),
        };
        let (scale, word) = match term.split_once('*') {
            Some((k, w)) => (
                k.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Precondition(format!("bad coefficient in {term:?}")))?,
                w.trim(),
            ),
            None => (1.0, term),
        };
        let mut prod = AlgebraElement::coef(CoefFn::one(g));
        for letter in word.split('.').map(str::trim) {
            let factor = match letter.strip_prefix('@') {
                Some(v) => AlgebraElement::coef(delta_coef(g, v)?),
                None => AlgebraElement::t(delta_vector(g, letter)?)?,
            };
            prod = prod.mul(&factor)?;
        }
        acc = acc.add(&prod.scale(c(sign * scale)))?;
    }
    Ok(acc)
}

fn fock(file: &Path, depth: usize, element: &str, as_json: bool) -> Result<()> {
    let g = load(file)?;
    let a = parse_element(&g, element)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for n in 0..=depth {
        let b = PathBasis::new(&g, n)?;
        let m = element_matrix(&a, &b)?;
        let norm = m.norm();
        text.push_str(&format!("depth {n}: {}×{}  ‖·‖ ≥ {norm:.9}\n", m.matrix.nrows(), m.matrix.ncols()));
        rows.push(json!({ "depth": n, "dimension": b.len(), "norm_lower_bound": norm }));
    }
    emit(as_json, &json!({ "element": element, "depths": rows }), text.trim_end());
    Ok(())
}

fn conjugacy(e: &Path, f: &Path, cert: Option<&Path>, out: Option<&Path>, as_json: bool) -> Result<()> {
    let (ge, gf) = (load(e)?, load(f)?);
    let (verdict, certificate, checks) = match cert {
        Some(path) => {
            let c = io::certificate_from_json(&io::read_json(path)?, &ge, &gf)?;
            let rep = verify_certificate(&ge, &gf, &c);
            let verdict = if rep.passed() { "Conjugate" } else { "CertificateRejected" };
            (verdict.to_string(), Some(c), Some(rep))
        }
        None => {
            if !(ge.is_discrete() && gf.is_discrete()) {
                return Err(Error::Precondition(
                    "deciding local conjugacy of non-discrete graphs needs --certificate".into(),
                ));
            }
            match decide_local_conjugacy_discrete(&ge, &gf)? {
                DiscreteVerdict::Conjugate(c) => ("Conjugate".to_string(), Some(c), None),
                DiscreteVerdict::NotConjugate(why) => (format!("NotConjugate: {why}"), None, None),
            }
        }
    };
    let cert_json = certificate.as_ref().map(io::certificate_to_json);
    if let (Some(path), Some(doc)) = (out, &cert_json) {
        io::write_json(path, doc)?;
    }
    let mut text = format!("verdict: {verdict}");
    if let Some(r) = &checks {
        text.push_str(&format!("\n{r}"));
    }
    if let (None, Some(doc)) = (out, &cert_json) {
        text.push_str(&format!("\ncertificate:\n{}", io::to_canonical_string(doc).trim_end()));
    }
    let mut doc = json!({ "verdict": verdict, "certificate": cert_json });
    if let Some(r) = &checks {
        doc["checks"] = report_json(r);
    }
    emit(as_json, &doc, &text);
    Ok(())
}

fn cover(e: &Path, f: &Path, cert: &Path, out: Option<&Path>, as_json: bool) -> Result<()> {
    let (ge, gf) = (load(e)?, load(f)?);
    let c = io::certificate_from_json(&io::read_json(cert)?, &ge, &gf)?;
    let cov = build_admissible_cover(&ge, &gf, &c)?;
    let rep = check_admissible(&ge, &gf, &cov);
    let doc = io::cover_to_json(&cov);
    if let Some(path) = out {
        io::write_json(path, &doc)?;
    }
    let m = cov.metadata.as_ref().expect("built covers carry metadata");
    let text = format!(
        "{} sets, thresholds 1/3 = {}, cuts {} / {}, band ({}, {})\n{rep}",
        cov.len(),
        topcorr::space::format_q(&m.pou_threshold),
        topcorr::space::format_q(&m.cut_low),
        topcorr::space::format_q(&m.cut_high),
        topcorr::space::format_q(&m.band.0),
        topcorr::space::format_q(&m.band.1),
    );
    emit(as_json, &json!({ "cover": doc, "checks": report_json(&rep) }), &text);
    if rep.passed() {
        Ok(())
    } else {
        Err(Error::NotAdmissible {
            condition: rep.failures().map(|k| k.name.clone()).collect::<Vec<_>>().join(", "),
            detail: "see report".into(),
        })
    }
}

fn equivalence(e: &Path, f: &Path, cert: &Path, seed: u64, samples: usize, tol: f64, as_json: bool) -> Result<bool> {
    let (ge, gf) = (load(e)?, load(f)?);
    let c = io::certificate_from_json(&io::read_json(cert)?, &ge, &gf)?;
    let cov = build_admissible_cover(&ge, &gf, &c)?;
    let eq = full_equivalence(&ge, &gf, &cov)?;
    let rep = verify_unitary(&eq.unitary, samples, seed)?;
    let steps: Vec<Value> = eq
        .unitary
        .steps()
        .iter()
        .map(|s| match s.kind {
            StepKind::Identity => json!({ "kind": "identity" }),
            StepKind::Flip(sp) => json!({
                "kind": "flip",
                "pair": [sp.i0 + 1, sp.j0 + 1],
                "transposition": [sp.k0 + 1, sp.l0 + 1],
            }),
        })
        .collect();
    let mut text = format!("{} cover sets, {} flip(s)\n", cov.len(), eq.unitary.flips());
    for (n, s) in eq.unitary.steps().iter().enumerate() {
        text.push_str(&match s.kind {
            StepKind::Identity => format!("step {}: identity unitary onto F\n", n + 1),
            StepKind::Flip(sp) => format!(
                "step {}: flip on sets ({},{}) exchanging sheets ({} {})\n",
                n + 1,
                sp.i0 + 1,
                sp.j0 + 1,
                sp.k0 + 1,
                sp.l0 + 1
            ),
        });
    }
    text.push_str(&rep.to_string());
    let passed = rep.passed(tol);
    text.push_str(&format!("\n{} at tolerance {tol:e}", if passed { "PASS" } else { "FAIL" }));
    let doc = json!({
        "flips": eq.unitary.flips(),
        "steps": steps,
        "verification": {
            "seed": rep.seed,
            "samples": rep.samples,
            "flip_samples": rep.focused,
            "isometry": rep.isometry,
            "left_module": rep.left_module,
            "right_module": rep.right_module,
            "continuity": rep.continuity,
            "anchors": rep.anchors,
            "tolerance": tol,
            "passed": passed,
        },
    });
    emit(as_json, &doc, &text);
    Ok(passed)
}

fn write_fixtures(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let graph = |name: &str, g: &TopGraph| io::write_json(&dir.join(format!("{name}.json")), &io::graph_to_json(g));
    let cert = |name: &str, c: &ConjugacyCertificate| io::write_json(&dir.join(format!("{name}.json")), &io::certificate_to_json(c));
    graph("D1", &fixtures::d1())?;
    graph("D1plus", &fixtures::d1_plus())?;
    graph("SWAP2", &fixtures::swap2())?;
    graph("DKFLIP_E", &fixtures::dkflip_e())?;
    graph("DKFLIP_F", &fixtures::dkflip_f())?;
    cert("DKFLIP_cert", &fixtures::dkflip_certificate())?;
    let (ce, cf) = fixtures::circle_pair();
    graph("CIRCLE_E", &ce)?;
    graph("CIRCLE_F", &cf)?;
    cert("CIRCLE_cert", &fixtures::circle_certificate())?;
    let (te, tf) = fixtures::three_cycle_pair();
    graph("THREECYCLE_E", &te)?;
    graph("THREECYCLE_F", &tf)?;
    cert("THREECYCLE_cert", &fixtures::three_cycle_certificate())?;
    println!("wrote 12 files to {}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let j = cli.json;
    match cli.command {
        Command::Validate { file } => validate(&file, j)?,
        Command::Characters { file, vertex } => characters(&file, &vertex, j)?,
        Command::Nestrep { file, pair, seed } => nestrep(&file, &pair, seed, j)?,
        Command::Fock { file, depth, element } => fock(&file, depth, &element, j)?,
        Command::Conjugacy { e, f, certificate, out } => conjugacy(&e, &f, certificate.as_deref(), out.as_deref(), j)?,
        Command::Cover { e, f, certificate, out } => cover(&e, &f, &certificate, out.as_deref(), j)?,
        Command::Equivalence {
            e,
            f,
            certificate,
            seed,
            samples,
            tol,
        } => return equivalence(&e, &f, &certificate, seed, samples, tol, j),
        Command::Fixtures { dir } => write_fixtures(&dir)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
