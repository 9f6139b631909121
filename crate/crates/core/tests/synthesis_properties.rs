mod common;

use common::{cosine_series, q_z};
use proptest::prelude::*;
use qsp_pe::qsp::chebyshev_grid;
use qsp_pe::synthesis::synthesize_phase_factors;
use qsp_pe::trigpoly::{parity_modes, TrigPoly};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_reproduces_target(
        d in 1usize..=32,
        raw in prop::collection::vec(-1.0f64..1.0, 17),
        level in 0.2f64..1.0,
    ) {
        let vals: Vec<f64> = parity_modes(d).zip(raw.iter().cycle()).map(|(_, &v)| v).collect();
        let p = TrigPoly::from_parity_coefficients(d, &vals);
        prop_assume!(p.sup_norm() > 1e-3);
        let u = p.scaled(level / p.sup_norm());
        let tol = 1e-9;
        let rep = synthesize_phase_factors(&u, tol, 200).unwrap();
        let phi = &rep.phases.angles;
        // Symmetry is exact by construction.
        prop_assert_eq!(phi[d], phi[0] + std::f64::consts::FRAC_PI_2);
        for j in 1..d {
            prop_assert_eq!(phi[j].to_bits(), phi[d - j].to_bits());
        }
        let modes = u.modes();
        for t in chebyshev_grid(512) {
            let p00 = q_z(t, phi)[(0, 0)].norm_sqr();
            let target = cosine_series(&modes, t).0.powi(2);
            prop_assert!((p00 - target).abs() <= 2.0 * tol + 1e-10, "t={t}: {p00} vs {target}");
        }
    }
}
