mod props;

use lawruk_core::slowvar::LogPowerPhi;
use proptest::prelude::*;
use props::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn root_multiplicities_sum_to_degree(roots in root_set(), scale in nonzero_complex()) {
        check_root_split(roots, scale)?;
    }

    #[test]
    fn covering_verdict_is_scaling_invariant(p in point_problem(), factor in nonzero_complex(), row in 0usize..3) {
        check_covering_scaling(p, factor, row)?;
    }

    #[test]
    fn tangential_adjoint_is_an_involution(op in operator(6, true, false)) {
        check_adjoint_involution(op)?;
    }

    #[test]
    fn nu_decompose_reassembles(op in operator(6, false, false), extra in 0u32..3) {
        check_reassembly(op, extra)?;
    }

    #[test]
    fn tableau_respects_order_bounds(problem in disk_problem()) {
        check_tableau_bounds(problem)?;
    }

    #[test]
    fn green_identity_harmonic(problem in disk_problem(), u in field_terms(), w in field_terms(), seed in any::<u64>()) {
        check_green_identity(problem, u, w, seed)?;
    }

    #[test]
    fn green_identity_polynomial(problem in disk_problem(), u in field_terms(), w in field_terms(), seed in any::<u64>()) {
        check_green_with(problem, u, w, seed, false)?;
    }

    #[test]
    fn norm_monotone_in_s(seq in sequence(512), s in -3.0f64..8.0, ds in 0.0f64..4.0, phi in phi_choice()) {
        check_norm_monotone(seq, s, ds, phi)?;
    }

    #[test]
    fn norm_axioms_and_parity(a in sequence(128), b in sequence(128), c in complex(5.0), s in -3.0f64..8.0, phi in phi_choice()) {
        check_norm_axioms(a, b, c, s, phi)?;
    }

    #[test]
    fn interpolation_identity((seq, s, eps, phi) in interpolation_case()) {
        check_interpolation_identity(seq, s, eps, phi)?;
    }

    #[test]
    fn phi_is_positive(exps in prop::collection::vec(-3.0f64..3.0, 0..4), t in 0.0f64..300.0) {
        let phi = LogPowerPhi::new(exps).unwrap();
        let v = phi.eval(t.exp()).unwrap();
        prop_assert!(v > 0.0);
    }

    #[test]
    fn solved_modes_are_exact(p in 1u32..=3, band in 8usize..96, seed in any::<u64>()) {
        check_exactness(p, band, band, seed)?;
    }

    #[test]
    fn kernel_elements_are_exact(p in 1u32..=3, band in 4usize..256) {
        check_kernel(p, band)?;
    }

    #[test]
    fn solvability_matches_orthogonality(band in 4usize..64, seed in any::<u64>(), perturb in any::<bool>()) {
        check_solvability(band, seed, perturb)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn regularity_shift_is_m1(s in 3.5f64..6.5, phi in phi_choice()) {
        check_regularity_shift(s, phi, 256)?;
    }
}
