use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::space::{OpenSet, PlSet};

/// A permutation of `{0..m}`, stored as the image list `k ↦ p[k]`.
/// Displayed 1-based in cycle notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(m: usize) -> Self {
        Perm((0..m).collect())
    }

    /// The transposition `(a b)` on `{0..m}`.
    pub fn transposition(m: usize, a: usize, b: usize) -> Self {
        let mut p = Perm::identity(m);
        p.0.swap(a, b);
        p
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &k in &images {
            if k >= images.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Precondition(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Perm(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &l)| k == l)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (k, &l) in self.0.iter().enumerate() {
            inv[l] = k;
        }
        Perm(inv)
    }

    /// Cycles of length at least two, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut k = self.0[start];
            while k != start {
                seen[k] = true;
                cyc.push(k);
                k = self.0[k];
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Transpositions `t₁, …, t_n` with `self = t₁ ∘ … ∘ t_n`, taken inside
    /// the cycles: `(c₀ … c_r) = (c₀ c₁) ∘ (c₁ c₂) ∘ … ∘ (c_{r-1} c_r)`.
    pub fn transpositions(&self) -> Vec<(usize, usize)> {
        self.cycles()
            .iter()
            .flat_map(|c| c.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect::<Vec<_>>())
            .collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "id");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|k| (k + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// An open set together with its ordered sheets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetedSet {
    pub set: OpenSet,
    pub sheets: Vec<PlSet>,
}

impl SheetedSet {
    pub fn m(&self) -> usize {
        self.sheets.len()
    }
}

/// `(i, j) ↦ π_{i,j}` for every intersecting pair, `π_{i,j}(k) = l` iff
/// sheet `k` over `i` meets sheet `l` over `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PermutationData {
    pub m: Vec<usize>,
    pub perms: BTreeMap<(usize, usize), Perm>,
}

impl PermutationData {
    pub fn get(&self, i: usize, j: usize) -> Option<&Perm> {
        self.perms.get(&(i, j))
    }
}

/// The sheet-matching permutation of one intersecting pair, or a
/// description of the violation.
pub(crate) fn pair_permutation(a: &SheetedSet, b: &SheetedSet, i: usize, j: usize) -> std::result::Result<Perm, String> {
    if a.m() != b.m() {
        return Err(format!("sets {} and {} intersect but carry {} and {} sheets", i + 1, j + 1, a.m(), b.m()));
    }
    let mut images = Vec::with_capacity(a.m());
    for (k, sk) in a.sheets.iter().enumerate() {
        let hits: Vec<usize> = b
            .sheets
            .iter()
            .enumerate()
            .filter(|(_, sl)| !sk.intersection(sl).is_empty())
            .map(|(l, _)| l)
            .collect();
        if hits.len() != 1 {
            let ls: Vec<String> = hits.iter().map(|l| (l + 1).to_string()).collect();
            return Err(format!(
                "(i,j,k) = ({},{},{}) meets sheets l ∈ {{{}}}",
                i + 1,
                j + 1,
                k + 1,
                ls.join(",")
            ));
        }
        images.push(hits[0]);
    }
    Perm::from_images(images).map_err(|_| format!("sheet matching of ({},{}) is not a bijection", i + 1, j + 1))
}

/// Permutation data of one side of a cover.
pub fn permutation_data(sides: &[SheetedSet]) -> Result<PermutationData> {
    let mut data = PermutationData {
        m: sides.iter().map(SheetedSet::m).collect(),
        perms: BTreeMap::new(),
    };
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            if sides[i].set.intersection(&sides[j].set).is_empty() {
                continue;
            }
            let p = pair_permutation(&sides[i], &sides[j], i, j).map_err(|detail| Error::NotAdmissible {
                condition: "C5".into(),
                detail,
            })?;
            data.perms.insert((j, i), p.inverse());
            data.perms.insert((i, j), p);
        }
    }
    Ok(data)
}

/// `σ_{i,j} = (π^F_{i,j})⁻¹ ∘ π^E_{i,j}` on every pair.
pub fn sigma_data(e: &PermutationData, f: &PermutationData) -> Result<BTreeMap<(usize, usize), Perm>> {
    if e.perms.keys().ne(f.perms.keys()) {
        return Err(Error::Precondition("permutation data are defined on different index pairs".into()));
    }
    Ok(e
        .perms
        .iter()
        .map(|(ij, pe)| (*ij, f.perms[ij].inverse().compose(pe)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_algebra() {
        let c = Perm(vec![1, 2, 0]);
        assert_eq!(c.to_string(), "(1 2 3)");
        assert_eq!(c.compose(&c.inverse()), Perm::identity(3));
        let ts = c.transpositions();
        assert_eq!(ts.len(), 2);
        let d = Perm(vec![3, 2, 1, 0, 4]);
        let td = d.transpositions();
        assert_eq!(td.len(), 2);
        let prod = td
            .iter()
            .fold(Perm::identity(5), |acc, &(a, b)| acc.compose(&Perm::transposition(5, a, b)));
        assert_eq!(prod, d);
        let prod = ts
            .iter()
            .fold(Perm::identity(3), |acc, &(a, b)| acc.compose(&Perm::transposition(3, a, b)));
        assert_eq!(prod, c);
        assert_eq!(Perm::transposition(2, 0, 1).to_string(), "(1 2)");
        assert!(Perm::from_images(vec![0, 0]).is_err());
    }
}
