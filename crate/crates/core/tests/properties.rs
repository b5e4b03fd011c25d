//! Property suites: tube-law identities, collocation reversibility and
//! idempotence, jump admissibility, fluctuation invariants, HLL positivity
//! and junction invariances.

mod common;

use common::*;
use hemowb::tube_law::TubeLaw;
use hemowb::Sigma;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn relacion_holds(law in law_strategy(), a in 0.1..3.0f64) {
        check_relacion(law, a)?;
    }

    #[test]
    fn flux_consistency(law in law_strategy(), s in sigma_strategy(), ratio in 0.3..3.0f64, fr in -2.0..2.0f64) {
        let model = nd_model(law, 0.0);
        check_consistency(&model, &s, &subcritical(&model, &s, ratio, fr))?;
    }

    #[test]
    fn beta_closed_form_matches_quadrature(s in sigma_strategy(), a1 in 0.2..4.0f64, a2 in 0.2..4.0f64) {
        check_beta(&nd_model(TubeLaw::arterial(), 0.0), &s, a1, a2)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn derivatives_match_finite_differences(law in law_strategy(), a in 0.1..3.0f64) {
        let h = 1e-6 * a;
        let fd1 = (law.phi(a + h) - law.phi(a - h)) / (2.0 * h);
        let fd2 = (law.dphi(a + h) - law.dphi(a - h)) / (2.0 * h);
        let v = law.eval(a);
        prop_assert!(rel(v.dphi, fd1, v.dphi.abs()) <= 1e-6);
        prop_assert!(rel(v.d2phi, fd2, v.d2phi.abs().max(1e-3)) <= 1e-6);
    }

    #[test]
    fn reversibility_one_stage(case in smooth_case(), cell in 0usize..20) {
        check_reversibility(&case, 2, cell)?;
    }

    #[test]
    fn reversibility_two_stage(case in smooth_case(), cell in 0usize..20) {
        check_reversibility(&case, 3, cell)?;
    }

    #[test]
    fn problem_p_is_idempotent(case in smooth_case(), order in 1u8..=3, base in 2usize..22, other in 0usize..24) {
        check_idempotence(&case, order, base, other)?;
    }

    #[test]
    fn jumps_are_admissible(case in smooth_case(), order in 1u8..=3, jump in -0.2..0.2f64) {
        check_jump_admissibility(&case, order, jump)?;
    }

    #[test]
    fn energy_constant_without_sources(case in smooth_case(), order in 1u8..=3, jump in -0.2..0.2f64) {
        check_energy_constancy(&case, order, jump)?;
    }

    #[test]
    fn stationary_pairs_have_no_fluctuations(
        law in law_strategy(), sl in sigma_strategy(), sr in sigma_strategy(),
        ratio in 0.7..1.6f64, fr in -0.6..0.6f64,
    ) {
        prop_assume!(sl != sr);
        let model = nd_model(law, 0.0);
        check_wb_pair(&model, &sl, &sr, &subcritical(&model, &sl, ratio, fr))?;
    }

    #[test]
    fn fluctuations_sum_to_flux_jump(
        law in law_strategy(), sl in sigma_strategy(), sr in sigma_strategy(),
        rl in 0.7..1.6f64, fl in -0.6..0.6f64, rr in 0.7..1.6f64, frr in -0.6..0.6f64, same in any::<bool>(),
    ) {
        let model = nd_model(law, 0.0);
        let sr = if same { sl } else { sr };
        check_sum_identity(&model, &sl, &subcritical(&model, &sl, rl, fl), &sr, &subcritical(&model, &sr, rr, frr))?;
    }

    #[test]
    fn hll_keeps_areas_positive(
        law in law_strategy(),
        data in prop::collection::vec((0.01..5.0f64, -3.0..3.0f64), 4..40),
        wb in any::<bool>(),
    ) {
        check_hll_positivity(law, &data, wb)?;
    }

    #[test]
    fn junction_relabeling_invariance(
        law in law_strategy(),
        raw in prop::collection::vec((sigma_strategy(), 0.8..1.3f64, -0.3..0.3f64, any::<bool>()), 2..5),
        perm_seed in any::<u64>(),
    ) {
        let model = nd_model(law, 0.0);
        let ends = junction_ends(&model, &raw);
        let mut perm: Vec<usize> = (0..ends.len()).collect();
        // Deterministic shuffle from the seed.
        let mut s = perm_seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        check_relabeling(&model, &ends, &perm)?;
    }
}

#[test]
fn relacion_on_a_dense_grid() {
    for law in laws() {
        for k in 0..1000 {
            check_relacion(law, 0.1 + 2.9 * k as f64 / 999.0).unwrap();
        }
    }
}

#[test]
fn wb_pair_with_identical_sigma_is_trivial() {
    let model = nd_model(TubeLaw::arterial(), 0.0);
    let s = Sigma::new(1.0, 1.0, 0.0);
    check_wb_pair(&model, &s, &s, &subcritical(&model, &s, 1.2, 0.3)).unwrap();
}
