//! Explicit unitary equivalences `X(E) ≅ X(F)` from admissible covers:
//! the identity and flip unitaries, regluing through intermediate graphs
//! and sampled verification.

mod chain;
mod reglue;
mod unitary;
mod verify;

pub use chain::{full_equivalence, step_cover, Equivalence, FlipRecord};
pub use reglue::{intermediate_graph, reglue, Regluing};
pub use unitary::{
    find_flip, gamma_flip, gamma_flip_with_angle, gamma_identity, samples_per_segment, Branch, CorrUnitary,
    FlipSpec, StepKind, UnitaryStep, DEFAULT_SAMPLES,
};
pub use verify::{random_field, sample_rng, verify_unitary, VerificationReport};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cover::{build_admissible_cover, check_admissible, permutation_data, AdmissibleCover};
    use crate::error::Error;
    use crate::fixtures;

    #[test]
    fn direct_identity_is_rejected_on_dkflip() {
        let (e, f) = (Arc::new(fixtures::dkflip_e()), Arc::new(fixtures::dkflip_f()));
        let cover = AdmissibleCover::from_certificate_pieces(&e, &fixtures::dkflip_certificate()).unwrap();
        assert!(matches!(gamma_identity(&e, &f, &cover), Err(Error::PermutationMismatch(1, 2))));
    }

    #[test]
    fn identity_unitary_of_a_graph() {
        let e = Arc::new(fixtures::dkflip_e());
        let cert = crate::cover::ConjugacyCertificate::identity(&e);
        let cover = AdmissibleCover::from_certificate_pieces(&e, &cert).unwrap();
        let u = CorrUnitary::new(vec![gamma_identity(&e, &e, &cover).unwrap()]).unwrap();
        let rep = verify_unitary(&u, 50, 7).unwrap();
        assert!(rep.passed(1e-12), "{rep}");
    }

    #[test]
    fn dkflip_needs_one_flip() {
        let (e, f) = (Arc::new(fixtures::dkflip_e()), Arc::new(fixtures::dkflip_f()));
        let cover = build_admissible_cover(&e, &f, &fixtures::dkflip_certificate()).unwrap();
        let eq = full_equivalence(&e, &f, &cover).unwrap();
        assert_eq!(eq.unitary.flips(), 1);
        let g = &eq.chain[1];
        let side = g.side(&cover.e_side);
        assert_eq!(permutation_data(&side).unwrap(), eq.final_data);
        assert_eq!(eq.final_data, permutation_data(&cover.f_side).unwrap());
        let rep = verify_unitary(&eq.unitary, 200, 1).unwrap();
        assert!(rep.passed(1e-9), "{rep}");

        let spec = eq.flips[0].clone();
        let sc_prev = &eq.chain[0];
        let ts = intermediate_graph(&e, &cover.e_side, spec.pair, spec.transposition).unwrap();
        assert_eq!(ts.cocycle, g.cocycle);
        let back = intermediate_graph(&ts.graph, &ts.side(&cover.e_side), spec.pair, spec.transposition).unwrap();
        assert_eq!(back.cocycle, sc_prev.cocycle);
        let same = intermediate_graph(&e, &cover.e_side, spec.pair, (0, 0)).unwrap();
        assert!(Arc::ptr_eq(&same.graph, &e));
    }

    #[test]
    fn corrupted_angle_is_detected() {
        let (e, f) = (Arc::new(fixtures::dkflip_e()), Arc::new(fixtures::dkflip_f()));
        let cover = build_admissible_cover(&e, &f, &fixtures::dkflip_certificate()).unwrap();
        let eq = full_equivalence(&e, &f, &cover).unwrap();
        let flip = &eq.unitary.steps()[0];
        let StepKind::Flip(spec) = flip.kind else { panic!("first step is a flip") };
        let (g0, g1) = (&eq.chain[0], &eq.chain[1]);
        let sc = step_cover(g0, g1, &cover).unwrap();
        let bad = gamma_flip_with_angle(&g0.graph, &g1.graph, &sc, spec, std::f64::consts::FRAC_PI_3).unwrap();
        let mut steps = vec![bad];
        steps.extend(eq.unitary.steps()[1..].iter().cloned());
        let rep = verify_unitary(&CorrUnitary::new(steps).unwrap(), 100, 3).unwrap();
        assert!(rep.continuity > 1e-3, "{rep}");
    }

    #[test]
    fn three_cycle_needs_two_flips() {
        let (e, f) = fixtures::three_cycle_pair();
        let (e, f) = (Arc::new(e), Arc::new(f));
        let cover = build_admissible_cover(&e, &f, &fixtures::three_cycle_certificate()).unwrap();
        let eq = full_equivalence(&e, &f, &cover).unwrap();
        assert_eq!(eq.unitary.flips(), 2);
        assert_eq!(eq.final_data, permutation_data(&cover.f_side).unwrap());
        for w in eq.chain.windows(2) {
            assert!(check_admissible(&w[0].graph, &w[1].graph, &step_cover(&w[0], &w[1], &cover).unwrap()).passed());
        }
        let rep = verify_unitary(&eq.unitary, 200, 2).unwrap();
        assert!(rep.passed(1e-9), "{rep}");
    }
}
