//! Sampled verification of the isometry and bimodule identities.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::unitary::CorrUnitary;
use crate::corr::CorrVector;
use crate::error::Result;
use crate::space::{half, q, Complex1, PlSet, ScalarField, Q};

/// Maximal residuals over the samples. `continuity` compares each branch
/// formula with its neighbour at every anchor of the branch table.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub samples: usize,
    pub seed: u64,
    pub isometry: f64,
    pub left_module: f64,
    pub right_module: f64,
    pub continuity: f64,
    pub anchors: usize,
    /// Samples drawn over the flip regions.
    pub focused: usize,
}

impl VerificationReport {
    /// Largest of the isometry and module residuals.
    pub fn max_residual(&self) -> f64 {
        self.isometry.max(self.left_module).max(self.right_module)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.continuity <= tol
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples       {} (seed {})", self.samples, self.seed)?;
        writeln!(f, "isometry      {:.3e}", self.isometry)?;
        writeln!(f, "left module   {:.3e}", self.left_module)?;
        writeln!(f, "right module  {:.3e}", self.right_module)?;
        writeln!(f, "flip samples  {}", self.focused)?;
        write!(f, "continuity    {:.3e} over {} anchors", self.continuity, self.anchors)
    }
}

/// Independent stream for sample `i`.
pub fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Random complex PL field with nodes at the quarter points.
pub fn random_field<R: Rng>(cx: &Arc<Complex1>, rng: &mut R) -> ScalarField {
    let cuts: Vec<Vec<Q>> = (0..cx.segment_count()).map(|_| vec![q(1, 4), q(1, 2), q(3, 4)]).collect();
    let rng = RefCell::new(rng);
    ScalarField::interpolate(cx, &cuts, |_| {
        let mut r = rng.borrow_mut();
        C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    })
}

/// Flip regions on both bases, for stratified sampling.
struct Focus {
    base: PlSet,
    edges: PlSet,
}

fn sample(u: &CorrUnitary, focus: Option<&Focus>, rng: &mut ChaCha8Rng) -> Result<[f64; 3]> {
    let (src, tgt) = (u.source(), u.target());
    let x = CorrVector::new(src, random_field(src.edges(), rng))?;
    let f = random_field(src.base(), rng);

    let v = match focus.and_then(|z| z.base.random_point(rng)) {
        Some(v) => v,
        None => src.base().random_point(rng),
    };
    let lhs: f64 = src.s().preimage(&v)?.iter().map(|e| x.eval(e).norm_sqr()).sum();
    let mut rhs = 0.0;
    for a in tgt.s().preimage(&u.tau().eval(&v)?)? {
        rhs += u.eval(&x, &a)?.norm_sqr();
    }
    let iso = (lhs - rhs).abs();

    let a = match focus.and_then(|z| z.edges.random_point(rng)) {
        Some(a) => a,
        None => tgt.edges().random_point(rng),
    };
    let terms = u.terms(&a)?;
    let mut gx = C64::new(0.0, 0.0);
    let mut gxf = C64::new(0.0, 0.0);
    let mut gfx = C64::new(0.0, 0.0);
    for (c, p) in &terms {
        let xp = x.eval(p);
        gx += c * xp;
        gxf += c * xp * f.eval(&src.s().eval(p)?);
        gfx += c * f.eval(&src.r().eval(p)?) * xp;
    }
    let right = (gxf - gx * f.eval(&u.tau_inv().eval(&tgt.s().eval(&a)?)?)).norm();
    let left = (gfx - f.eval(&u.tau_inv().eval(&tgt.r().eval(&a)?)?) * gx).norm();
    Ok([iso, left, right])
}

/// Largest jump of `Γx` across the anchors of every step, for one `x`.
fn continuity(u: &CorrUnitary, x: &CorrVector) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, step) in u.steps().iter().enumerate() {
        let cx = step.target().edges();
        for seg in 0..cx.segment_count() {
            let mut knots = vec![q(0, 1)];
            knots.extend(step.anchors(seg));
            knots.push(q(1, 1));
            for w in knots.windows(2) {
                let branch = step.branch(&cx.point_on(seg, half(&w[0], &w[1])))?;
                for t in w {
                    let p = cx.point_on(seg, t.clone());
                    let value = |b| -> Result<C64> {
                        Ok(u.expand(n + 1, &p, b)?.iter().map(|(c, e)| c * x.eval(e)).sum())
                    };
                    worst = worst.max((value(Some(branch))? - value(None)?).norm());
                    count += 1;
                }
            }
        }
    }
    Ok((worst, count))
}

/// Samples random `x, f` and points, one seeded stream per sample (every
/// other sample placed over the flip regions), and
/// reports the maximal residuals of
/// `⟨Γx,Γx⟩∘τ = ⟨x,x⟩`, `Γ(f·x) = ρ(f)·Γx` and `Γ(x·f) = Γx·ρ(f)`.
pub fn verify_unitary(u: &CorrUnitary, samples: usize, seed: u64) -> Result<VerificationReport> {
    let base = u.flip_focus()?;
    let over = u.tau().forward_image(&base)?;
    let focus = Focus {
        edges: u.target().s().preimage_set(&over),
        base,
    };
    let focused = if focus.base.interior().is_empty() { 0 } else { samples / 2 };
    let per: Vec<[f64; 3]> = (0..samples)
        .into_par_iter()
        .map(|i| sample(u, (i % 2 == 0).then_some(&focus), &mut sample_rng(seed, i)))
        .collect::<Result<_>>()?;
    let max = |k: usize| per.iter().map(|r| r[k]).fold(0.0, f64::max);
    let rounds = samples.clamp(1, 4);
    let jumps: Vec<(f64, usize)> = (0..rounds)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(!seed, i);
            let x = CorrVector::new(u.source(), random_field(u.source().edges(), &mut rng))?;
            continuity(u, &x)
        })
        .collect::<Result<_>>()?;
    Ok(VerificationReport {
        samples,
        seed,
        isometry: max(0),
        left_module: max(1),
        right_module: max(2),
        continuity: jumps.iter().map(|j| j.0).fold(0.0, f64::max),
        anchors: jumps.iter().map(|j| j.1).sum(),
        focused,
    })
}
