use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use tfwave_core::incident::{select_band, WavePacket};
use tfwave_core::synthesis::time_oracle;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(10))]

    /// Inverse transform of `transform` over a wide band recovers `value`.
    #[test]
    fn transform_pair_round_trip(
        x in -3.0f64..3.0, y in -3.0f64..3.0, th in 0.0f64..(2.0 * PI), tau in -4.0f64..4.0,
        sigma in 0.8f64..2.0, omega0 in 20.0f64..40.0,
    ) {
        let p = WavePacket::new(sigma, omega0, 12.0, C::from_polar(1.0, th), 1.0).unwrap();
        let band = select_band(&p, 1e-16, 0.5).unwrap();
        prop_assume!(band.w1 > 0.5);
        let z = C::new(x, y);
        let t = p.delay(z) + tau * sigma;
        let u = time_oracle(|w| p.transform(z, C::new(w, 0.0)), band.w1, band.w2, t, 1e-14).unwrap();
        let v = p.value(z, t);
        let scale = 1.0 / ((2.0 * PI).sqrt() * sigma);
        prop_assert!((u - v).norm() <= 1e-10 * scale, "{u} vs {v}");
    }
}

proptest! {
    #![proptest_config(config(128))]

    /// With `t0 >= R/c + 7.5 sigma` the packet is negligible at t = 0 on the disk of radius R.
    #[test]
    fn initial_condition_is_negligible(
        r in 0.0f64..1.0, phi in 0.0f64..(2.0 * PI), th in 0.0f64..(2.0 * PI),
        radius in 1.0f64..20.0, sigma in 0.5f64..3.0, c in 0.5f64..2.0,
    ) {
        let t0 = radius / c + 7.5 * sigma;
        let p = WavePacket::new(sigma, 30.0, t0, C::from_polar(1.0, th), c).unwrap();
        let x = C::from_polar(r * radius, phi);
        prop_assert!(p.value(x, 0.0).norm() <= 1e-12 / ((2.0 * PI).sqrt() * sigma));
    }

    /// `|U(omega + i delta)| <= |U(omega)| e^{delta s_max}` with `s_max` the largest delay,
    /// for packets that start outside the disk (`t0 >= R/c`); the ratio itself is
    /// `e^{-delta s + sigma^2 delta^2 / 2}`.
    #[test]
    fn damped_transform_growth(
        r in 0.0f64..1.0, phi in 0.0f64..(2.0 * PI), th in 0.0f64..(2.0 * PI),
        omega in 1.0f64..20.0, delta in 0.0f64..0.05, lead in 0.0f64..30.0,
    ) {
        let (radius, sigma) = (5.0, 1.5);
        let t0 = radius + lead;
        let p = WavePacket::new(sigma, 10.0, t0, C::from_polar(1.0, th), 1.0).unwrap();
        let x = C::from_polar(r * radius, phi);
        let s_max = radius + t0;
        let damped = p.transform(x, C::new(omega, delta)).norm();
        let real = p.transform(x, C::new(omega, 0.0)).norm();
        prop_assert!(damped <= real * (delta * s_max).exp());
        let exact = (-delta * p.delay(x) + 0.5 * sigma * sigma * delta * delta).exp();
        prop_assert!((damped / real - exact).abs() <= 1e-12 * exact);
    }
}
