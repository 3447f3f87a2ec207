//! The unitaries `Γ : X(E) → X(F)` built from an admissible cover.

use std::cell::RefCell;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::corr::CorrVector;
use crate::cover::{permutation_data, separating_function, sigma_data, AdmissibleCover, Perm};
use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{PlFunction, PlMap, PlSet, Point, ScalarField, Q};

/// Default number of samples per segment used by [`CorrUnitary::apply`].
pub const DEFAULT_SAMPLES: usize = 512;

/// Samples per segment, overridable through `TOPCORR_SAMPLES`.
pub fn samples_per_segment() -> usize {
    std::env::var("TOPCORR_SAMPLES")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_SAMPLES)
}

/// The flip data: cover sets `i0, j0` and the sheets `k0, l0` over `i0`
/// exchanged by `σ_{i0,j0} = (k0 l0)`. Zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlipSpec {
    pub i0: usize,
    pub j0: usize,
    pub k0: usize,
    pub l0: usize,
}

/// Which formula computes `Γx` at a point of `F¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `x ∘ γ_i⁻¹`.
    Pullback(usize),
    /// `cos h · x∘γ_{i0}⁻¹ + sin h · x∘γ_{j0}⁻¹`.
    Exchange,
    /// `e^{2ih} (cos h · x∘γ_{i0}⁻¹ − sin h · x∘γ_{j0}⁻¹)`.
    TwistedExchange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    Identity,
    Flip(FlipSpec),
}

#[derive(Debug, Clone)]
struct Exchange {
    spec: FlipSpec,
    /// `g / angle`, a PL function on `F⁰` with values in `[0, 1]`.
    g: PlFunction,
    angle: f64,
    first: PlSet,
    second: PlSet,
}

/// One unitary `X(E) → X(F)`, stored as a branch table over `F¹`.
#[derive(Debug, Clone)]
pub struct UnitaryStep {
    pub kind: StepKind,
    source: Arc<TopGraph>,
    target: Arc<TopGraph>,
    tau_inv: PlMap,
    gamma_inv: Vec<PlMap>,
    domains: Vec<PlSet>,
    exchange: Option<Exchange>,
}

fn inverses(cover: &AdmissibleCover) -> Result<(PlMap, Vec<PlMap>)> {
    let tau_inv = cover.tau.inverse()?;
    let gamma_inv = cover.gammas.iter().map(PlMap::inverse).collect::<Result<_>>()?;
    Ok((tau_inv, gamma_inv))
}

fn domains(f: &TopGraph, cover: &AdmissibleCover) -> Vec<PlSet> {
    cover.f_side.iter().map(|v| f.s().preimage_set(&v.set)).collect()
}

fn sigmas(cover: &AdmissibleCover) -> Result<Vec<((usize, usize), Perm)>> {
    let pe = permutation_data(&cover.e_side)?;
    let pf = permutation_data(&cover.f_side)?;
    Ok(sigma_data(&pe, &pf)?
        .into_iter()
        .filter(|((i, j), p)| i < j && !p.is_identity())
        .collect())
}

/// `Γ(x) = x ∘ γ⁻¹` for a cover with `Π_E = Π_F`.
pub fn gamma_identity(e: &Arc<TopGraph>, f: &Arc<TopGraph>, cover: &AdmissibleCover) -> Result<UnitaryStep> {
    if let Some(((i, j), _)) = sigmas(cover)?.into_iter().next() {
        return Err(Error::PermutationMismatch(i + 1, j + 1));
    }
    for i in 0..cover.len() {
        for j in i + 1..cover.len() {
            let both = cover.e_side[i].set.intersection(&cover.e_side[j].set);
            if both.is_empty() {
                continue;
            }
            let region = e.s().preimage_set(&both);
            if let Err(p) = cover.gammas[i].agrees_with(&cover.gammas[j], Some(&region)) {
                return Err(Error::AgreementFails(format!(
                    "γ_{} and γ_{} differ at {}",
                    i + 1,
                    j + 1,
                    e.edges().describe(&p)
                )));
            }
        }
    }
    let (tau_inv, gamma_inv) = inverses(cover)?;
    Ok(UnitaryStep {
        kind: StepKind::Identity,
        source: e.clone(),
        target: f.clone(),
        tau_inv,
        gamma_inv,
        domains: domains(f, cover),
        exchange: None,
    })
}

/// The unique flip of a cover whose data differ by one transposition.
pub fn find_flip(cover: &AdmissibleCover) -> Result<FlipSpec> {
    let diff = sigmas(cover)?;
    let [((i0, j0), p)] = diff.as_slice() else {
        return Err(Error::InvalidFlip(format!(
            "permutation data differ on {} pairs, expected exactly one",
            diff.len()
        )));
    };
    let moved: Vec<usize> = (0..p.len()).filter(|&k| p.apply(k) != k).collect();
    if moved.len() != 2 {
        return Err(Error::InvalidFlip(format!("σ_{{{},{}}} = {p} is not a transposition", i0 + 1, j0 + 1)));
    }
    Ok(FlipSpec {
        i0: *i0,
        j0: *j0,
        k0: moved[0],
        l0: moved[1],
    })
}

/// The flip unitary for a cover whose data differ by `(k0 l0)` on `(i0, j0)`.
pub fn gamma_flip(e: &Arc<TopGraph>, f: &Arc<TopGraph>, cover: &AdmissibleCover, spec: FlipSpec) -> Result<UnitaryStep> {
    gamma_flip_with_angle(e, f, cover, spec, FRAC_PI_2)
}

/// [`gamma_flip`] with `g = angle` on `cl(V_{j0}) ∖ V_{i0}`. Only
/// `angle = π/2` yields a continuous field.
pub fn gamma_flip_with_angle(
    e: &Arc<TopGraph>,
    f: &Arc<TopGraph>,
    cover: &AdmissibleCover,
    spec: FlipSpec,
    angle: f64,
) -> Result<UnitaryStep> {
    let found = find_flip(cover)?;
    let same_pair = (found.i0, found.j0) == (spec.i0, spec.j0);
    let same_swap = [found.k0, found.l0] == [spec.k0, spec.l0] || [found.k0, found.l0] == [spec.l0, spec.k0];
    if !(same_pair && same_swap) {
        return Err(Error::InvalidFlip(format!(
            "cover data differ by ({} {}) on ({},{}), not by ({} {}) on ({},{})",
            found.k0 + 1,
            found.l0 + 1,
            found.i0 + 1,
            found.j0 + 1,
            spec.k0 + 1,
            spec.l0 + 1,
            spec.i0 + 1,
            spec.j0 + 1
        )));
    }
    let FlipSpec { i0, j0, k0, l0 } = spec;
    let pf = permutation_data(&cover.f_side)?;
    let pi = pf.get(i0, j0).expect("flip pair intersects");
    let v = |i: usize, k: usize| f.s().preimage_set(&cover.f_side[i].set).intersection(&cover.f_side[i].sheets[k]);
    let first = v(i0, k0).intersection(&v(j0, pi.apply(k0)));
    let second = v(i0, l0).intersection(&v(j0, pi.apply(l0)));
    let (vi, vj) = (&cover.f_side[i0].set, &cover.f_side[j0].set);
    let g = separating_function(f.base(), &vj.closure().difference(vi), &vi.closure().difference(vj));
    let (tau_inv, gamma_inv) = inverses(cover)?;
    Ok(UnitaryStep {
        kind: StepKind::Flip(spec),
        source: e.clone(),
        target: f.clone(),
        tau_inv,
        gamma_inv,
        domains: domains(f, cover),
        exchange: Some(Exchange {
            spec,
            g,
            angle,
            first,
            second,
        }),
    })
}

impl UnitaryStep {
    pub fn source(&self) -> &Arc<TopGraph> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TopGraph> {
        &self.target
    }

    /// The two exchange regions of a flip, as one subset of `F¹`.
    pub fn exchange_region(&self) -> Option<PlSet> {
        self.exchange.as_ref().map(|x| x.first.union(&x.second))
    }

    pub fn tau_inv(&self) -> &PlMap {
        &self.tau_inv
    }

    pub fn branch(&self, a: &Point) -> Result<Branch> {
        if let Some(x) = &self.exchange {
            if x.first.contains(a) {
                return Ok(Branch::Exchange);
            }
            if x.second.contains(a) {
                return Ok(Branch::TwistedExchange);
            }
        }
        self.domains
            .iter()
            .position(|d| d.contains(a))
            .map(Branch::Pullback)
            .ok_or_else(|| Error::NotCovering(self.target.edges().describe(a)))
    }

    fn pull(&self, i: usize, a: &Point) -> Result<Point> {
        self.gamma_inv[i]
            .try_eval(a)
            .ok_or_else(|| Error::Undefined(format!("γ_{}⁻¹ at {}", i + 1, self.target.edges().describe(a))))
    }

    /// `Γx(a) = Σ c · x(p)` for the given branch formula.
    pub fn terms(&self, a: &Point, branch: Branch) -> Result<Vec<(C64, Point)>> {
        match branch {
            Branch::Pullback(i) => Ok(vec![(C64::new(1.0, 0.0), self.pull(i, a)?)]),
            Branch::Exchange | Branch::TwistedExchange => {
                let x = self
                    .exchange
                    .as_ref()
                    .ok_or_else(|| Error::InvalidFlip("identity step has no exchange branch".into()))?;
                let h = x.angle * x.g.eval_f64(&self.target.s().eval(a)?);
                let (p, q) = (self.pull(x.spec.i0, a)?, self.pull(x.spec.j0, a)?);
                let (c, s) = (C64::new(h.cos(), 0.0), C64::new(h.sin(), 0.0));
                Ok(if branch == Branch::Exchange {
                    vec![(c, p), (s, q)]
                } else {
                    let phase = C64::from_polar(1.0, 2.0 * h);
                    vec![(phase * c, p), (-phase * s, q)]
                })
            }
        }
    }

    /// Target parameters where the branch or a `γ_i⁻¹` piece changes.
    pub fn anchors(&self, seg: usize) -> Vec<Q> {
        let mut c: Vec<Q> = self.domains.iter().flat_map(|d| d.seg_cuts(seg).to_vec()).collect();
        for g in &self.gamma_inv {
            c.extend(g.breaks(seg).iter().cloned());
        }
        if let Some(x) = &self.exchange {
            c.extend(x.first.seg_cuts(seg).iter().cloned());
            c.extend(x.second.seg_cuts(seg).iter().cloned());
            c.extend(self.target.s().breaks(seg).iter().cloned());
        }
        c.sort();
        c.dedup();
        c
    }
}

/// A composite of unitary steps `X(E) → X(G_1) → … → X(F)`.
#[derive(Debug, Clone)]
pub struct CorrUnitary {
    steps: Vec<UnitaryStep>,
    tau: PlMap,
    tau_inv: PlMap,
}

impl CorrUnitary {
    pub fn new(steps: Vec<UnitaryStep>) -> Result<Self> {
        let (last, rest) = steps
            .split_last()
            .ok_or_else(|| Error::Precondition("a unitary needs at least one step".into()))?;
        for w in steps.windows(2) {
            if !crate::corr::same_graph(&w[0].target, &w[1].source) {
                return Err(Error::GraphMismatch);
            }
        }
        let mut tau_inv = last.tau_inv.clone();
        for s in rest.iter().rev() {
            tau_inv = tau_inv.then(&s.tau_inv)?;
        }
        Ok(CorrUnitary {
            tau: tau_inv.inverse()?,
            tau_inv,
            steps,
        })
    }

    pub fn steps(&self) -> &[UnitaryStep] {
        &self.steps
    }

    pub fn flips(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.kind, StepKind::Flip(_))).count()
    }

    pub fn source(&self) -> &Arc<TopGraph> {
        &self.steps[0].source
    }

    pub fn target(&self) -> &Arc<TopGraph> {
        &self.steps[self.steps.len() - 1].target
    }

    /// The base homeomorphism `τ : E⁰ → F⁰`.
    pub fn tau(&self) -> &PlMap {
        &self.tau
    }

    pub fn tau_inv(&self) -> &PlMap {
        &self.tau_inv
    }

    /// Base points of `E⁰` over which some flip mixes two sheets.
    pub fn flip_focus(&self) -> Result<PlSet> {
        let mut focus = PlSet::empty(self.source().base());
        for (n, step) in self.steps.iter().enumerate() {
            let Some(region) = step.exchange_region() else { continue };
            let mut set = step.target.s().forward_image(&region)?;
            for s in self.steps[..=n].iter().rev() {
                set = s.tau_inv.forward_image(&set)?;
            }
            focus = focus.union(&set);
        }
        Ok(focus)
    }

    /// Expands `(Γ_{n-1} ∘ … ∘ Γ_0 x)(a)` for `a` in the target of step
    /// `n - 1` into `Σ c · x(p)`, forcing the branch of step `n - 1` when
    /// `branch` is given.
    pub fn expand(&self, n: usize, a: &Point, branch: Option<Branch>) -> Result<Vec<(C64, Point)>> {
        let mut acc = vec![(C64::new(1.0, 0.0), a.clone())];
        for (depth, step) in self.steps[..n].iter().enumerate().rev() {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for (c, p) in acc {
                let b = match branch {
                    Some(b) if depth + 1 == n => b,
                    _ => step.branch(&p)?,
                };
                next.extend(step.terms(&p, b)?.into_iter().map(|(d, q)| (c * d, q)));
            }
            acc = next;
        }
        Ok(acc)
    }

    /// `Σ c · x(p)` with `Γx(a) = Σ c · x(p)`.
    pub fn terms(&self, a: &Point) -> Result<Vec<(C64, Point)>> {
        self.expand(self.steps.len(), a, None)
    }

    /// `Γx(a)`, evaluated pointwise from the branch table.
    pub fn eval(&self, x: &CorrVector, a: &Point) -> Result<C64> {
        Ok(self.terms(a)?.iter().map(|(c, p)| c * x.eval(p)).sum())
    }

    /// `Γx` as a sampled field: linear interpolation on
    /// [`samples_per_segment`] subintervals plus the branch anchors.
    pub fn apply(&self, x: &CorrVector) -> Result<CorrVector> {
        if !crate::corr::same_graph(x.graph(), self.source()) {
            return Err(Error::GraphMismatch);
        }
        let n = samples_per_segment();
        let target = self.target();
        let last = &self.steps[self.steps.len() - 1];
        let cuts: Vec<Vec<Q>> = (0..target.edges().segment_count())
            .map(|s| {
                let mut c = last.anchors(s);
                c.extend((1..n).map(|k| crate::space::q(k as i64, n as i64)));
                c
            })
            .collect();
        let failure = RefCell::new(None);
        let field = ScalarField::interpolate(target.edges(), &cuts, |a| match self.eval(x, a) {
            Ok(v) => v,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err.to_string());
                C64::new(f64::NAN, 0.0)
            }
        });
        if let Some(msg) = failure.into_inner() {
            return Err(Error::Precondition(msg));
        }
        CorrVector::new(target, field)
    }
}
