//! The converse construction: flips through intermediate graphs, then the
//! identity unitary onto `F`.

use std::sync::Arc;

use super::reglue::{reglue, Regluing};
use super::unitary::{find_flip, gamma_flip, gamma_identity, CorrUnitary, FlipSpec};
use crate::cover::{permutation_data, sigma_data, AdmissibleCover, Perm, PermutationData};
use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::PlMap;

/// One flip of the chain: `π_{i,j}` composed with the transposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipRecord {
    pub pair: (usize, usize),
    pub transposition: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Equivalence {
    pub unitary: CorrUnitary,
    pub flips: Vec<FlipRecord>,
    /// `E`, then each intermediate graph in order.
    pub chain: Vec<Regluing>,
    /// Permutation data of the last graph of the chain.
    pub final_data: PermutationData,
}

/// Cover of `G` relative to `H` when both are regluings of the same `E`.
pub fn step_cover(g: &Regluing, h: &Regluing, cover: &AdmissibleCover) -> Result<AdmissibleCover> {
    let id = PlMap::identity(g.graph.base().clone());
    let parts = cover
        .e_side
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let gamma = g.to_source[i].then(&h.to_source[i].inverse()?)?;
            Ok((u.set.clone(), g.sheets[i].clone(), gamma))
        })
        .collect::<Result<_>>()?;
    AdmissibleCover::from_parts(&g.graph, id, parts)
}

/// `Γ = Γ_id ∘ Γ_flip ∘ … ∘ Γ_flip`. For each pair `i < j`, `σ_{i,j}` is
/// split into transpositions inside its cycles, each realized by one flip.
pub fn full_equivalence(e: &Arc<TopGraph>, f: &Arc<TopGraph>, cover: &AdmissibleCover) -> Result<Equivalence> {
    let pe = permutation_data(&cover.e_side)?;
    let pf = permutation_data(&cover.f_side)?;
    let sigma = sigma_data(&pe, &pf)?;

    let mut chain = vec![reglue(e, &cover.e_side, &pe)?];
    let mut steps = Vec::new();
    let mut flips = Vec::new();
    let mut data = pe;
    for (&(i, j), s) in sigma.iter().filter(|((i, j), _)| i < j) {
        for &(k, l) in s.transpositions().iter().rev() {
            let p = data.perms[&(i, j)].compose(&Perm::transposition(s.len(), k, l));
            data.perms.insert((j, i), p.inverse());
            data.perms.insert((i, j), p);
            let next = reglue(e, &cover.e_side, &data)?;
            let prev = chain.last().expect("chain starts with E");
            let sc = step_cover(prev, &next, cover)?;
            let spec = find_flip(&sc)?;
            let expected = FlipSpec {
                i0: i,
                j0: j,
                k0: k,
                l0: l,
            };
            if spec != expected {
                return Err(Error::InvalidFlip(format!("intermediate cover flips {spec:?}, expected {expected:?}")));
            }
            steps.push(gamma_flip(&prev.graph, &next.graph, &sc, spec)?);
            flips.push(FlipRecord {
                pair: (i, j),
                transposition: (k, l),
            });
            chain.push(next);
        }
    }

    let last = chain.last().expect("chain starts with E");
    let parts = cover
        .e_side
        .iter()
        .enumerate()
        .map(|(i, u)| Ok((u.set.clone(), last.sheets[i].clone(), last.to_source[i].then(&cover.gammas[i])?)))
        .collect::<Result<_>>()?;
    let fc = AdmissibleCover::from_parts(&last.graph, cover.tau.clone(), parts)?;
    let final_data = permutation_data(&last.side(&cover.e_side))?;
    steps.push(gamma_identity(&last.graph, f, &fc)?);
    Ok(Equivalence {
        unitary: CorrUnitary::new(steps)?,
        flips,
        chain,
        final_data,
    })
}
