mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn laplace_residual_is_bounded(dims in set_dims(), p in field_point()) {
        check_laplace(&(dims, p))?;
    }

    #[test]
    fn geometry_is_invariant_under_scaling(case in scale_case()) {
        check_scaling(&case)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn superposition_is_linear(
        v1 in volts5(),
        v2 in volts5(),
        alpha in -5.0..5.0f64,
        beta in -5.0..5.0f64,
        p in field_point(),
    ) {
        check_superposition(&(v1, v2, alpha, beta, p))?;
    }

    #[test]
    fn field_is_minus_the_potential_gradient(v in volts5(), p in field_point()) {
        check_gradient(&(v, p))?;
    }

    #[test]
    fn multipoles_rotate_covariantly_and_ignore_offsets(case in multipole_case()) {
        check_multipole_covariance(&case)?;
    }

    #[test]
    fn layouts_mirror_respect_the_gap_and_mesh_deterministically(case in any_geometry()) {
        check_geometry(&case)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn aperture_matches_ray_cast(case in na_case()) {
        check_na(&case)?;
    }
}

#[test]
fn coax_converges_monotonically_to_half_a_percent() {
    let e = coax_errors();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    assert!(e[3] <= 0.005, "{e:?}");
}

#[test]
fn sweep_csv_is_bit_identical_across_runs_and_workers() {
    let serial = sweep_csv(1);
    assert_eq!(serial, sweep_csv(1));
    assert_eq!(serial, sweep_csv(4));
    assert_eq!(serial, sweep_csv(4));
}
