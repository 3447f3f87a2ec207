//! Local conjugacy certificates, the discrete decision procedure,
//! admissible covers and their permutation data.

mod admissible;
mod certificate;
mod discrete;
mod permutation;

pub(crate) use admissible::separating_function;
pub use admissible::{
    band, build_admissible_cover, check_admissible, cut_high, cut_low, pou_threshold, AdmissibleCover,
    CoverMetadata,
};
pub use certificate::{verify_certificate, CertificatePiece, Check, CheckReport, ConjugacyCertificate};
pub use discrete::{
    count_matrix, decide_local_conjugacy_discrete, decide_with_budget, discrete_certificate, DiscreteVerdict,
    SEARCH_BUDGET,
};
pub use permutation::{permutation_data, sigma_data, Perm, PermutationData, SheetedSet};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::space::{q, PlMap, PlSet, Point};

    fn nontrivial_sigmas(cover: &AdmissibleCover) -> Vec<((usize, usize), Perm)> {
        let pe = permutation_data(&cover.e_side).unwrap();
        let pf = permutation_data(&cover.f_side).unwrap();
        sigma_data(&pe, &pf)
            .unwrap()
            .into_iter()
            .filter(|(ij, s)| ij.0 < ij.1 && !s.is_identity())
            .collect()
    }

    #[test]
    fn dkflip_certificate_checks() {
        let (e, f) = (fixtures::dkflip_e(), fixtures::dkflip_f());
        let cert = fixtures::dkflip_certificate();
        let rep = verify_certificate(&e, &f, &cert);
        assert!(rep.passed(), "{rep}");
        let inv = cert.inverse(&e).unwrap();
        assert!(verify_certificate(&f, &e, &inv).passed());
        let mut bad = cert.clone();
        bad.pieces[1].gamma = PlMap::identity(e.edges().clone());
        let rep = verify_certificate(&e, &f, &bad);
        let fail = rep.failures().next().unwrap();
        assert_eq!(fail.name, "piece 2: r-intertwining");
        // the defect at t = 0.9 on copy 2
        let x = fixtures::thirds();
        let e09 = e.lift_to_copy(1, &x.point(&q(9, 10)));
        assert_ne!(e.r().eval(&e09).unwrap(), f.r().eval(&e09).unwrap());
        for g in [fixtures::d1(), fixtures::swap2(), e.clone(), f.clone()] {
            assert!(verify_certificate(&g, &g, &ConjugacyCertificate::identity(&g)).passed());
        }
    }

    #[test]
    fn discrete_decisions() {
        let d1 = fixtures::d1();
        let DiscreteVerdict::Conjugate(c) = decide_local_conjugacy_discrete(&d1, &d1).unwrap() else {
            panic!("D1 is conjugate to itself");
        };
        assert_eq!(c.tau, PlMap::identity(d1.base().clone()));
        let sw = fixtures::d1_swapped();
        let DiscreteVerdict::Conjugate(c) = decide_local_conjugacy_discrete(&d1, &sw).unwrap() else {
            panic!("swap works");
        };
        assert_eq!(c.tau.eval(&Point::Vertex(0)).unwrap(), Point::Vertex(1));
        assert!(verify_certificate(&d1, &sw, &c).passed());
        assert!(!decide_local_conjugacy_discrete(&d1, &fixtures::d1_plus()).unwrap().is_conjugate());
        assert!(matches!(
            decide_local_conjugacy_discrete(&fixtures::dkflip_e(), &fixtures::dkflip_e()),
            Err(crate::Error::NotDiscrete)
        ));
    }

    #[test]
    fn dkflip_two_set_cover_and_permutations() {
        let (e, f) = (fixtures::dkflip_e(), fixtures::dkflip_f());
        let cover = AdmissibleCover::from_certificate_pieces(&e, &fixtures::dkflip_certificate()).unwrap();
        let rep = check_admissible(&e, &f, &cover);
        assert!(rep.passed(), "{rep}");
        let pe = permutation_data(&cover.e_side).unwrap();
        let pf = permutation_data(&cover.f_side).unwrap();
        assert!(pe.get(0, 1).unwrap().is_identity());
        assert_eq!(pf.get(0, 1).unwrap().to_string(), "(1 2)");
        assert_eq!(sigma_data(&pe, &pf).unwrap()[&(0, 1)].to_string(), "(1 2)");
    }

    #[test]
    fn built_covers_are_admissible() {
        let (e, f) = (fixtures::dkflip_e(), fixtures::dkflip_f());
        let cover = build_admissible_cover(&e, &f, &fixtures::dkflip_certificate()).unwrap();
        assert!(cover.len() >= 2);
        assert!(cover.m().iter().all(|&m| m == 2));
        assert_eq!(nontrivial_sigmas(&cover).len(), 1);
        let meta = cover.metadata.as_ref().unwrap();
        assert_eq!(meta.pou_threshold, q(1, 3));

        let (ce, cf) = fixtures::circle_pair();
        let cc = build_admissible_cover(&ce, &cf, &fixtures::circle_certificate()).unwrap();
        assert!(cc.len() >= 3);

        let d1 = fixtures::d1();
        let dc = build_admissible_cover(&d1, &d1, &ConjugacyCertificate::identity(&d1)).unwrap();
        assert_eq!(dc.len(), 2);

        let (te, tf) = fixtures::three_cycle_pair();
        let tc = build_admissible_cover(&te, &tf, &fixtures::three_cycle_certificate()).unwrap();
        let sig = nontrivial_sigmas(&tc);
        assert_eq!(sig.len(), 1);
        assert_eq!(sig[0].1.cycles().len(), 1);
        assert_eq!(sig[0].1.cycles()[0].len(), 3);
    }

    #[test]
    fn violations_are_reported() {
        let (e, f) = fixtures::circle_pair();
        let cx = e.base();
        // three arcs, each the circle minus a closed neighbourhood of a vertex
        let arc = |v: usize| PlSet::open_star(cx, v, &q(1, 10)).closure().complement();
        let cert = ConjugacyCertificate {
            tau: PlMap::identity(cx.clone()),
            pieces: (0..3)
                .map(|v| CertificatePiece {
                    u: arc(v),
                    gamma: fixtures::circle_certificate().pieces[0].gamma.clone(),
                })
                .collect(),
        };
        let cover = AdmissibleCover::from_certificate_pieces(&e, &cert).unwrap();
        let rep = check_admissible(&e, &f, &cover);
        let c3 = rep.checks.iter().find(|c| c.name == "C3").unwrap();
        assert!(!c3.passed, "{rep}");
        // mismatched sheet labels: one set's sheets merged into a single one
        let mut bad = AdmissibleCover::from_certificate_pieces(&fixtures::dkflip_e(), &fixtures::dkflip_certificate()).unwrap();
        let merged = bad.e_side[1].sheets[0].union(&bad.e_side[1].sheets[1]);
        bad.e_side[1].sheets = vec![merged.clone(), merged];
        let rep = check_admissible(&fixtures::dkflip_e(), &fixtures::dkflip_f(), &bad);
        let c5 = rep.checks.iter().find(|c| c.name == "C5").unwrap();
        assert!(!c5.passed && c5.witness.contains("meets sheets"), "{rep}");
    }
}
