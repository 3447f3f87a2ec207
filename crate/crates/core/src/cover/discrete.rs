use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::space::{PlMap, PlSet, Point};

use super::certificate::{CertificatePiece, ConjugacyCertificate};

/// Default cap on search nodes for the bijection search.
pub const SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscreteVerdict {
    Conjugate(ConjugacyCertificate),
    NotConjugate(String),
}

impl DiscreteVerdict {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, DiscreteVerdict::Conjugate(_))
    }
}

/// `n[v][w] = |E¹_{v,w}|` (range `v`, source `w`).
pub fn count_matrix(g: &TopGraph) -> Result<Vec<Vec<usize>>> {
    let n = g.base().vertex_count();
    (0..n)
        .map(|v| {
            (0..n)
                .map(|w| Ok(g.edges_between(&Point::Vertex(v), &Point::Vertex(w))?.n()))
                .collect()
        })
        .collect()
}

/// Per-vertex invariant: loops, in-degree (as range), out-degree (as source).
fn signature(n: &[Vec<usize>], v: usize) -> (usize, usize, usize) {
    let range: usize = n[v].iter().sum();
    let source: usize = n.iter().map(|row| row[v]).sum();
    (n[v][v], range, source)
}

struct Search<'a> {
    ne: &'a [Vec<usize>],
    nf: &'a [Vec<usize>],
    sig_e: Vec<(usize, usize, usize)>,
    sig_f: Vec<(usize, usize, usize)>,
    tau: Vec<usize>,
    used: Vec<bool>,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self, v: usize) -> Result<bool> {
        if v == self.ne.len() {
            return Ok(true);
        }
        for w in 0..self.nf.len() {
            if self.used[w] || self.sig_e[v] != self.sig_f[w] {
                continue;
            }
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::Budget(self.budget));
            }
            let consistent = (0..v).all(|u| {
                let tu = self.tau[u];
                self.ne[v][u] == self.nf[w][tu] && self.ne[u][v] == self.nf[tu][w]
            }) && self.ne[v][v] == self.nf[w][w];
            if !consistent {
                continue;
            }
            self.tau.push(w);
            self.used[w] = true;
            if self.run(v + 1)? {
                return Ok(true);
            }
            self.tau.pop();
            self.used[w] = false;
        }
        Ok(false)
    }
}

/// Decides local conjugacy of discrete graphs: conjugate iff some bijection
/// `τ` preserves all edge counts `n_{v,w}`.
pub fn decide_local_conjugacy_discrete(e: &TopGraph, f: &TopGraph) -> Result<DiscreteVerdict> {
    decide_with_budget(e, f, SEARCH_BUDGET)
}

pub fn decide_with_budget(e: &TopGraph, f: &TopGraph, budget: u64) -> Result<DiscreteVerdict> {
    if !e.is_discrete() || !f.is_discrete() {
        return Err(Error::NotDiscrete);
    }
    let (n0, m0) = (e.base().vertex_count(), e.edges().vertex_count());
    if n0 != f.base().vertex_count() {
        return Ok(DiscreteVerdict::NotConjugate(format!(
            "|E⁰| = {n0} but |F⁰| = {}",
            f.base().vertex_count()
        )));
    }
    if m0 != f.edges().vertex_count() {
        return Ok(DiscreteVerdict::NotConjugate(format!(
            "|E¹| = {m0} but |F¹| = {}",
            f.edges().vertex_count()
        )));
    }
    let ne = count_matrix(e)?;
    let nf = count_matrix(f)?;
    let sig_e: Vec<_> = (0..n0).map(|v| signature(&ne, v)).collect();
    let sig_f: Vec<_> = (0..n0).map(|v| signature(&nf, v)).collect();
    let (mut a, mut b) = (sig_e.clone(), sig_f.clone());
    a.sort();
    b.sort();
    if a != b {
        return Ok(DiscreteVerdict::NotConjugate(
            "vertex signatures (loops, range degree, source degree) differ".into(),
        ));
    }
    let mut search = Search {
        ne: &ne,
        nf: &nf,
        sig_e,
        sig_f,
        tau: Vec::with_capacity(n0),
        used: vec![false; n0],
        visited: 0,
        budget,
    };
    if !search.run(0)? {
        return Ok(DiscreteVerdict::NotConjugate(
            "no bijection of vertices preserves the edge counts".into(),
        ));
    }
    Ok(DiscreteVerdict::Conjugate(discrete_certificate(e, f, &search.tau)?))
}

/// Certificate for a count-preserving bijection: singleton pieces with
/// fibers matched in order.
pub fn discrete_certificate(e: &TopGraph, f: &TopGraph, tau: &[usize]) -> Result<ConjugacyCertificate> {
    let n0 = e.base().vertex_count();
    let tau_map = PlMap::from_vertex_images(
        e.base().clone(),
        f.base().clone(),
        tau.iter().map(|&w| Some(Point::Vertex(w))).collect(),
    )?;
    let mut pieces = Vec::with_capacity(n0);
    for v in 0..n0 {
        let mut images = vec![None; e.edges().vertex_count()];
        for w in 0..n0 {
            let fe = e.edges_between(&Point::Vertex(w), &Point::Vertex(v))?.edges;
            let ff = f
                .edges_between(&Point::Vertex(tau[w]), &Point::Vertex(tau[v]))?
                .edges;
            if fe.len() != ff.len() {
                return Err(Error::InvalidCertificate(format!(
                    "edge counts differ over ({}, {})",
                    e.base().vertex_id(w),
                    e.base().vertex_id(v)
                )));
            }
            for (x, y) in fe.into_iter().zip(ff) {
                if let Point::Vertex(k) = x {
                    images[k] = Some(y);
                }
            }
        }
        pieces.push(CertificatePiece {
            u: PlSet::vertex_set(e.base(), &[v]),
            gamma: PlMap::from_vertex_images(e.edges().clone(), f.edges().clone(), images)?,
        });
    }
    Ok(ConjugacyCertificate { tau: tau_map, pieces })
}
