use proptest::prelude::*;
use semiq::algebra::{
    classical_relations, entropy, evs_to_multipliers, ilambda_from_i, invariant_i, multipliers_to_evs, spectrum,
    t_of_ilambda, transform_coeffs,
};
use semiq::{ExpectationState, ModelParams, MultiplierState};

fn params(hbar: f64) -> ModelParams {
    ModelParams { hbar, ..ModelParams::default() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// A valid multiplier state with `ħI_λ = z`, anisotropy `r` and correlation `c`.
fn multiplier_state(hbar: f64, z: f64, r: f64, c: f64, a: f64, p_a: f64) -> MultiplierState {
    let il = z / hbar;
    let g = il / (1.0 - c * c).sqrt();
    MultiplierState::new(g * r, g / r, c * g, a, p_a)
}

prop_compose! {
    fn arb_multipliers()(
        hbar in log_uniform(1e-3, 10.0),
        z in log_uniform(1e-3, 10.0),
        r in log_uniform(1e-2, 1e2),
        c in -0.95f64..0.95,
        a in -2.0f64..2.0,
        p_a in -2.0f64..2.0,
    ) -> (f64, MultiplierState) {
        (hbar, multiplier_state(hbar, z, r, c, a, p_a))
    }
}

prop_compose! {
    fn arb_expectations()(
        hbar in log_uniform(1e-3, 10.0),
        gap in log_uniform(1e-5, 1e6),
        x2 in log_uniform(1e-3, 1e3),
        skew in -3.0f64..3.0,
    ) -> (f64, ExpectationState) {
        let i = 0.25 * hbar * hbar * (1.0 + gap);
        let l = skew * i.sqrt();
        let p2 = (i + 0.25 * l * l) / x2;
        (hbar, ExpectationState::new(x2, p2, l, 0.3, -0.1))
    }
}

/// `-Σ p_n ln p_n` summed term by term until the terms vanish.
fn direct_entropy(z: f64) -> f64 {
    let one_minus_q = -(-2.0 * z).exp_m1();
    let ln_one_minus_q = one_minus_q.ln();
    let mut sum = 0.0;
    for n in 0.. {
        let ln_p = ln_one_minus_q - 2.0 * z * n as f64;
        let p = ln_p.exp();
        if p < 1e-300 {
            break;
        }
        sum -= p * ln_p;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn temperature_squared_is_uncertainty((hbar, s) in arb_multipliers()) {
        let p = params(hbar);
        let e = multipliers_to_evs(&s, &p).unwrap();
        let t = t_of_ilambda(s.determinant().sqrt(), hbar).unwrap();
        prop_assert!(rel(t * t, invariant_i(&e)) <= 1e-10);
    }

    #[test]
    fn multiplier_round_trip((hbar, s) in arb_multipliers()) {
        let p = params(hbar);
        let e = multipliers_to_evs(&s, &p).unwrap();
        prop_assume!(invariant_i(&e) > 0.25 * hbar * hbar + 1e-6);
        let back = evs_to_multipliers(&e, &p).unwrap();
        let scale = s.lambda1.max(s.lambda2);
        for (x, y) in back.to_array().iter().zip(s.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9 * scale.max(y.abs()), "{:?} vs {:?}", back, s);
        }
    }

    #[test]
    fn expectation_round_trip((hbar, e) in arb_expectations()) {
        let p = params(hbar);
        prop_assume!(invariant_i(&e) > 0.25 * hbar * hbar + 1e-6);
        let s = evs_to_multipliers(&e, &p).unwrap();
        let back = multipliers_to_evs(&s, &p).unwrap();
        prop_assert!(rel(back.x2, e.x2) <= 1e-9);
        prop_assert!(rel(back.p2, e.p2) <= 1e-9);
        prop_assert!((back.l - e.l).abs() <= 1e-9 * (e.x2 * e.p2).sqrt());
        prop_assert_eq!((back.a, back.p_a), (e.a, e.p_a));
    }

    #[test]
    fn ilambda_and_temperature_are_inverse(hbar in log_uniform(1e-3, 10.0), gap in log_uniform(1e-6, 1e6)) {
        let i = 0.25 * hbar * hbar * (1.0 + gap);
        prop_assume!(i <= 1e6);
        let t = t_of_ilambda(ilambda_from_i(i, hbar).unwrap(), hbar).unwrap();
        prop_assert!(rel(t * t, i) <= 1e-9);
    }

    #[test]
    fn entropy_matches_spectrum(z in log_uniform(1e-3, 30.0), hbar in log_uniform(1e-3, 10.0)) {
        let il = z / hbar;
        let s = MultiplierState::new(il, il, 0.0, 0.0, 0.0);
        let sp = spectrum(il, hbar, 4096).unwrap();
        let direct = direct_entropy(z);
        prop_assert!((entropy(&s, &params(hbar)).unwrap() - direct).abs() <= 1e-9);
        prop_assert!((sp.spectral_entropy - direct).abs() <= 1e-9);
        prop_assert!((sp.purity - z.tanh()).abs() <= 1e-12);
        prop_assert!(sp.truncation_mass >= 0.0);
        prop_assert!(sp.probs.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn entropy_decreases_towards_pure_state(z1 in log_uniform(1e-3, 50.0), factor in 1.001f64..10.0) {
        let p = params(1.0);
        let s1 = entropy(&MultiplierState::new(z1, z1, 0.0, 0.0, 0.0), &p).unwrap();
        let z2 = z1 * factor;
        let s2 = entropy(&MultiplierState::new(z2, z2, 0.0, 0.0, 0.0), &p).unwrap();
        prop_assert!(s1 >= 0.0 && s2 >= 0.0);
        prop_assert!(s2 <= s1);
    }

    #[test]
    fn transform_product_is_determinant((_hbar, s) in arb_multipliers()) {
        let c = transform_coeffs(&s).unwrap();
        prop_assert!(c.lambda_v > 0.0 && c.lambda_t > 0.0);
        prop_assert!(rel(c.lambda_v * c.lambda_t, s.determinant()) <= 1e-12);
    }

    #[test]
    fn ilambda_converges_quadratically_in_hbar(i in log_uniform(1.0, 1e2)) {
        let classical = 0.5 / i.sqrt();
        let err = |h: f64| (ilambda_from_i(i, h).unwrap() - classical).abs();
        let ratio = err(1e-1) / err(1e-2);
        prop_assert!((90.0..=110.0).contains(&ratio), "ratio {}", ratio);
        let ratio = err(1e-2) / err(1e-3);
        prop_assert!((90.0..=110.0).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn small_hbar_multipliers_match_classical(x2 in log_uniform(1e-1, 1e1), p2 in log_uniform(1e-1, 1e1), c in -0.9f64..0.9) {
        let l = 2.0 * c * (x2 * p2).sqrt();
        let e = ExpectationState::new(x2, p2, l, 0.0, 0.0);
        let q = evs_to_multipliers(&e, &params(1e-5)).unwrap();
        let cl = classical_relations(&e).unwrap();
        let scale = cl.lambda1_cl.max(cl.lambda2_cl);
        prop_assert!((q.lambda1 - cl.lambda1_cl).abs() <= 1e-6 * scale);
        prop_assert!((q.lambda2 - cl.lambda2_cl).abs() <= 1e-6 * scale);
        prop_assert!((q.lambda3 - cl.lambda3_cl).abs() <= 1e-6 * scale);
    }
}
