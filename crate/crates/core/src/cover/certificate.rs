use std::fmt;

use crate::graph::TopGraph;
use crate::error::Result;
use crate::space::{same_complex, uncovered_point, OpenSet, PlMap, PlSet};

/// One local conjugacy: an open `U ⊂ E⁰` and `γ : s_E⁻¹(U) → s_F⁻¹(τU)`.
/// `γ` may be defined on a larger set; only `s_E⁻¹(U)` is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificatePiece {
    pub u: OpenSet,
    pub gamma: PlMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyCertificate {
    pub tau: PlMap,
    pub pieces: Vec<CertificatePiece>,
}

impl ConjugacyCertificate {
    /// `τ = id` and `γ = id` on the single piece `U = E⁰`.
    pub fn identity(g: &TopGraph) -> Self {
        ConjugacyCertificate {
            tau: PlMap::identity(g.base().clone()),
            pieces: vec![CertificatePiece {
                u: PlSet::full(g.base()),
                gamma: PlMap::identity(g.edges().clone()),
            }],
        }
    }

    /// The certificate of `F` against `E`: `τ⁻¹` with pieces `(τU, γ⁻¹)`.
    pub fn inverse(&self, e: &TopGraph) -> Result<Self> {
        let tau_inv = self.tau.inverse()?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let d = e.s().preimage_set(&p.u);
                Ok(CertificatePiece {
                    u: self.tau.forward_image(&p.u)?,
                    gamma: p.gamma.restrict(&d).inverse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConjugacyCertificate { tau: tau_inv, pieces })
    }
}

/// A named check with a witness or counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub(crate) fn push(&mut self, name: impl Into<String>, outcome: std::result::Result<String, String>) {
        let (passed, witness) = match outcome {
            Ok(w) => (true, w),
            Err(w) => (false, w),
        };
        self.checks.push(Check {
            name: name.into(),
            passed,
            witness,
        });
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.witness)?;
        }
        Ok(())
    }
}

/// Checks that `τ` is a homeomorphism onto `F⁰`.
fn check_tau(e: &TopGraph, f: &TopGraph, tau: &PlMap) -> std::result::Result<String, String> {
    if !same_complex(tau.source(), e.base()) || !same_complex(tau.target(), f.base()) {
        return Err("τ is not a map E⁰ → F⁰".into());
    }
    if !tau.is_total() {
        return Err("τ is not defined everywhere".into());
    }
    let lh = tau.is_local_homeomorphism();
    if let Some((p, why)) = lh.counterexample {
        return Err(format!("{why} at {}", e.base().describe(&p)));
    }
    match tau.inverse() {
        Ok(inv) if inv.is_total() => Ok(format!("{} critical points checked", lh.checked_points)),
        Ok(_) => Err("τ is not onto F⁰".into()),
        Err(err) => Err(err.to_string()),
    }
}

/// Checks every axiom of a local conjugacy certificate exactly.
pub fn verify_certificate(e: &TopGraph, f: &TopGraph, cert: &ConjugacyCertificate) -> CheckReport {
    let mut rep = CheckReport::default();
    let tau_ok = check_tau(e, f, &cert.tau);
    let tau_fine = tau_ok.is_ok();
    rep.push("τ homeomorphism", tau_ok);
    if !tau_fine {
        return rep;
    }
    let covers = (|| {
        for (i, p) in cert.pieces.iter().enumerate() {
            if !same_complex(p.u.complex(), e.base()) {
                return Err(format!("U{} is not a subset of E⁰", i + 1));
            }
            if !p.u.is_open() {
                return Err(format!("U{} = {} is not open", i + 1, p.u.describe()));
            }
        }
        let sets: Vec<OpenSet> = cert.pieces.iter().map(|p| p.u.clone()).collect();
        match uncovered_point(e.base(), &sets) {
            Some(x) => Err(format!("{} is not covered", e.base().describe(&x))),
            None => Ok(format!("{} open sets cover E⁰", sets.len())),
        }
    })();
    let cover_fine = covers.is_ok();
    rep.push("cover", covers);
    if !cover_fine {
        return rep;
    }
    for (i, p) in cert.pieces.iter().enumerate() {
        let name = |what: &str| format!("piece {}: {what}", i + 1);
        if !same_complex(p.gamma.source(), e.edges()) || !same_complex(p.gamma.target(), f.edges()) {
            rep.push(name("γ : E¹ → F¹"), Err("γ has the wrong source or target".into()));
            continue;
        }
        let d = e.s().preimage_set(&p.u);
        let missing = d.difference(&p.gamma.domain());
        let defined = missing.is_empty();
        rep.push(
            name("γ defined on s_E⁻¹(U)"),
            match missing.min_point() {
                None => Ok(d.describe()),
                Some(x) => Err(format!("γ undefined at {}", e.edges().describe(&x))),
            },
        );
        if !defined {
            continue;
        }
        let g = p.gamma.restrict(&d);
        rep.push(name("γ homeomorphism onto s_F⁻¹(τU)"), check_gamma_homeo(e, f, &cert.tau, &p.u, &d, &g));
        for (label, me, mf) in [("s", e.s(), f.s()), ("r", e.r(), f.r())] {
            let outcome = (|| {
                let lhs = me.then(&cert.tau).map_err(|x| x.to_string())?;
                let rhs = g.then(mf).map_err(|x| x.to_string())?;
                match lhs.agrees_with(&rhs, Some(&d)) {
                    Ok(()) => Ok("exact on s_E⁻¹(U)".to_string()),
                    Err(x) => {
                        let show = |m: &PlMap| m.try_eval(&x).map_or("undefined".into(), |y| f.base().describe(&y));
                        Err(format!(
                            "at {}: τ∘{label}_E = {} but {label}_F∘γ = {}",
                            e.edges().describe(&x),
                            show(&lhs),
                            show(&rhs)
                        ))
                    }
                }
            })();
            rep.push(name(&format!("{label}-intertwining")), outcome);
        }
    }
    rep
}

fn check_gamma_homeo(
    e: &TopGraph,
    f: &TopGraph,
    tau: &PlMap,
    u: &OpenSet,
    d: &PlSet,
    g: &PlMap,
) -> std::result::Result<String, String> {
    let lh = g.is_local_homeomorphism();
    if let Some((x, why)) = lh.counterexample {
        if d.contains(&x) {
            return Err(format!("{why} at {}", e.edges().describe(&x)));
        }
    }
    let doubles = g.fiber_count_set(d, |n| n >= 2).map_err(|x| x.to_string())?;
    if let Some(y) = doubles.min_point() {
        return Err(format!("γ is not injective: {} has two preimages", f.edges().describe(&y)));
    }
    let image = g.forward_image(d).map_err(|x| x.to_string())?;
    let tau_u = tau.forward_image(u).map_err(|x| x.to_string())?;
    let want = f.s().preimage_set(&tau_u);
    if image != want {
        let diff = image.difference(&want).union(&want.difference(&image));
        let y = diff.min_point().expect("sets differ");
        return Err(format!(
            "image of γ differs from s_F⁻¹(τU) at {}",
            f.edges().describe(&y)
        ));
    }
    Ok(format!("onto {}", want.describe()))
}
