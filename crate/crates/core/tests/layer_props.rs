use proptest::prelude::*;

mod props;

use props::layer::{v0_equation, v0_partials, v1_equation, v1_partials};

proptest! {
    #![proptest_config(props::config(props::CASES))]

    #[test]
    fn v0_solves_its_equation(t in 0.0..3.0f64, tau in -40.0..40.0f64, moving_frame in any::<bool>()) {
        v0_equation(t, tau, moving_frame)?;
    }

    #[test]
    fn v1_solves_its_equation(t in 0.0..3.0f64, tau in -40.0..40.0f64, c1 in -2.0..2.0f64) {
        v1_equation(t, tau, c1)?;
    }

    #[test]
    fn v0_partials_match_differences(t in 0.01..2.99f64, tau in -20.0..20.0f64, moving_frame in any::<bool>()) {
        v0_partials(t, tau, moving_frame)?;
    }

    #[test]
    fn v1_partials_match_differences(t in 0.01..2.99f64, tau in -20.0..20.0f64, c1 in -1.0..1.0f64) {
        v1_partials(t, tau, c1)?;
    }
}
