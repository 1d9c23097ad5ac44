use proptest::prelude::*;
use semiq::algebra::{classical_relations, evs_to_multipliers};
use semiq::dynamics::{
    frozen_k_nl, integrate, monitor_invariants, propagate, rhs_expectations, rhs_multipliers, sample_on_grid,
    ExpectationFlow, InitialState, IntegratorConfig, Method, MultiplierFlow, Representation, Reversed,
};
use semiq::shell::EnergyShell;
use semiq::{ExpectationState, Mode, ModelParams, MultiplierState};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0, 0.0f64..2.0, log_uniform(1e-3, 2.0))
        .prop_map(|(m_q, m_cl, omega_q, e, hbar)| ModelParams { m_q, m_cl, omega_q, e, hbar })
}

prop_compose! {
    fn arb_multipliers()(
        l1 in log_uniform(0.1, 10.0),
        l2 in log_uniform(0.1, 10.0),
        c in -0.99f64..0.99,
        a in -3.0f64..3.0,
        p_a in -3.0f64..3.0,
    ) -> MultiplierState {
        MultiplierState::new(l1, l2, c * (l1 * l2).sqrt(), a, p_a)
    }
}

/// Central difference of `g` along `dir` at `y`.
fn directional(g: impl Fn(&[f64; 5]) -> f64, y: [f64; 5], dir: [f64; 5], h: f64) -> f64 {
    let shift = |s: f64| std::array::from_fn(|i| y[i] + s * h * dir[i]);
    (g(&shift(1.0)) - g(&shift(-1.0))) / (2.0 * h)
}

fn max_rel_diff(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / scale))
}

/// Exact `e = 0` solution: free quantum oscillator, uniformly moving classical coordinate.
fn free_solution(e0: &ExpectationState, p: &ModelParams, t: f64) -> [f64; 5] {
    let mw = p.m_q * p.omega_q;
    let (s, c) = (2.0 * p.omega_q * t).sin_cos();
    let x2 = 0.5 * (e0.x2 + e0.p2 / (mw * mw)) + 0.5 * (e0.x2 - e0.p2 / (mw * mw)) * c + e0.l / (2.0 * mw) * s;
    let p2 = 0.5 * (e0.p2 + mw * mw * e0.x2) + 0.5 * (e0.p2 - mw * mw * e0.x2) * c - 0.5 * mw * e0.l * s;
    let l = e0.l * c + (e0.p2 / mw - mw * e0.x2) * s;
    [x2, p2, l, e0.a + e0.p_a / p.m_cl * t, e0.p_a]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn multiplier_field_is_tangent_to_level_sets(s in arb_multipliers(), p in arb_params(), k in log_uniform(0.1, 10.0)) {
        let f = rhs_multipliers(&s, &p, k);
        let det = |y: &[f64; 5]| y[0] * y[1] - y[2] * y[2];
        let d = directional(det, s.to_array(), f, 1e-4);
        prop_assert!(d.abs() <= 1e-8, "derivative {}", d);
    }

    #[test]
    fn expectation_field_is_tangent_to_level_sets(
        x2 in log_uniform(0.1, 10.0),
        p2 in log_uniform(0.1, 10.0),
        c in -0.99f64..0.99,
        a in -3.0f64..3.0,
        p in arb_params(),
    ) {
        let e = ExpectationState::new(x2, p2, 2.0 * c * (x2 * p2).sqrt(), a, 0.2);
        let f = rhs_expectations(&e, &p, Mode::Quantum);
        let inv = |y: &[f64; 5]| y[0] * y[1] - 0.25 * y[2] * y[2];
        let d = directional(inv, e.to_array(), f, 1e-4);
        prop_assert!(d.abs() <= 1e-8, "derivative {}", d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn time_reversal_recovers_initial_state(e_r in 1.26f64..1.4, coupling in 0.0f64..1.0, t_end in 10.0f64..100.0) {
        let p = ModelParams { e: coupling, hbar: 1e-3, ..ModelParams::default() };
        let shell = EnergyShell::default();
        let e0 = shell.state_for_i(shell.i_for_relative_energy(e_r, &p).unwrap(), &p).unwrap();
        let cfg = IntegratorConfig { t_end, ..IntegratorConfig::default() };
        let flow = ExpectationFlow { params: p, mode: Mode::Quantum };
        let y1 = propagate(&flow, e0.to_array(), &cfg, |_| Ok(())).unwrap();
        let back = propagate(&Reversed(flow), y1, &cfg, |_| Ok(())).unwrap();
        prop_assert!(max_rel_diff(&back, &e0.to_array()) <= 1e-6);

        let s0 = evs_to_multipliers(&e0, &p).unwrap();
        let mflow = MultiplierFlow { params: p, k_nl: frozen_k_nl(&s0, &p).unwrap() };
        let y1 = propagate(&mflow, s0.to_array(), &cfg, |_| Ok(())).unwrap();
        let back = propagate(&Reversed(mflow), y1, &cfg, |_| Ok(())).unwrap();
        prop_assert!(max_rel_diff(&back, &s0.to_array()) <= 1e-6);
    }

    #[test]
    fn nearby_initial_states_stay_close(i in 0.05f64..0.6, coupling in 0.0f64..2.0, dir in 0usize..5) {
        let p = ModelParams { e: coupling, ..ModelParams::default() };
        let e0 = EnergyShell::default().state_for_i(i, &p).unwrap();
        let delta = 1e-8;
        let mut y1 = e0.to_array();
        y1[dir] += delta;
        let cfg = IntegratorConfig { t_end: 1.0, ..IntegratorConfig::default() };
        let flow = ExpectationFlow { params: p, mode: Mode::Quantum };
        let grid = [0.25, 0.5, 0.75, 1.0];
        let a = sample_on_grid(&flow, e0.to_array(), &cfg, &grid).unwrap();
        let b = sample_on_grid(&flow, y1, &cfg, &grid).unwrap();
        for (k, t) in grid.iter().enumerate() {
            let sep = a[k].iter().zip(&b[k]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            prop_assert!(sep <= 10.0 * t.exp() * delta, "t = {}: separation {:e}", t, sep);
        }
    }

    #[test]
    fn classical_ilambda_is_constant(i in 0.01f64..0.6, coupling in 0.0f64..2.0) {
        let p = ModelParams { e: coupling, ..ModelParams::default() };
        let e0 = EnergyShell::default().state_for_i(i, &p).unwrap();
        let cfg = IntegratorConfig { t_end: 100.0, rel_tol: 1e-12, abs_tol: 1e-14, ..IntegratorConfig::default() };
        let traj = integrate(&InitialState::Expectations(e0), &p, &cfg, Representation::Expectations(Mode::Classical)).unwrap();
        let il0 = classical_relations(&e0).unwrap().i_lambda_cl;
        for e in traj.expectations() {
            let il = classical_relations(&e).unwrap().i_lambda_cl;
            prop_assert!(((il - il0) / il0).abs() <= 1e-8);
        }
    }

    #[test]
    fn multiplier_and_moment_drift_stay_small(i in 0.05f64..0.6, coupling in 0.0f64..1.5) {
        let p = ModelParams { e: coupling, hbar: 1e-3, ..ModelParams::default() };
        let e0 = EnergyShell::default().state_for_i(i, &p).unwrap();
        let cfg = IntegratorConfig { t_end: 50.0, ..IntegratorConfig::default() };
        for rep in [Representation::Multipliers, Representation::Expectations(Mode::Quantum)] {
            let traj = integrate(&InitialState::Expectations(e0), &p, &cfg, rep).unwrap();
            prop_assert!(monitor_invariants(&traj, &p).max() <= 1e-7);
        }
    }
}

fn rk4_error(dt: f64, p: &ModelParams, e0: &ExpectationState, t_end: f64) -> f64 {
    let cfg = IntegratorConfig { method: Method::Rk4Fixed, dt_init: dt, t_end, ..IntegratorConfig::default() };
    let flow = ExpectationFlow { params: *p, mode: Mode::Quantum };
    let y = propagate(&flow, e0.to_array(), &cfg, |_| Ok(())).unwrap();
    max_rel_diff(&y, &free_solution(e0, p, t_end))
}

#[test]
fn rk4_is_fourth_order_on_the_free_solution() {
    let p = ModelParams { e: 0.0, omega_q: 1.3, ..ModelParams::default() };
    let e0 = ExpectationState::new(1.4, 0.9, 0.35, 0.2, 0.7);
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&dt| rk4_error(dt, &p, &e0, 10.0)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((8.0..=32.0).contains(&ratio), "errors {errs:?}");
    }
}

#[test]
fn rk4_drift_shrinks_sixteenfold_when_step_halves() {
    let p = ModelParams { hbar: 1e-3, ..ModelParams::default() };
    let e0 = EnergyShell::default().state_for_i(0.2, &p).unwrap();
    let drift = |dt: f64| {
        let cfg = IntegratorConfig { method: Method::Rk4Fixed, dt_init: dt, t_end: 20.0, ..IntegratorConfig::default() };
        let traj = integrate(&InitialState::Expectations(e0), &p, &cfg, Representation::Expectations(Mode::Quantum)).unwrap();
        monitor_invariants(&traj, &p).max()
    };
    let (coarse, fine) = (drift(2e-2), drift(1e-2));
    let ratio = coarse / fine;
    assert!((8.0..=32.0).contains(&ratio), "drift {coarse:e} -> {fine:e}");
}

#[test]
fn free_solution_matches_adaptive_integration() {
    let p = ModelParams { e: 0.0, ..ModelParams::default() };
    let e0 = ExpectationState::new(2.0, 0.5, -0.3, 0.0, 1.0);
    let cfg = IntegratorConfig { t_end: 30.0, ..IntegratorConfig::default() };
    let flow = ExpectationFlow { params: p, mode: Mode::Quantum };
    let y = propagate(&flow, e0.to_array(), &cfg, |_| Ok(())).unwrap();
    assert!(max_rel_diff(&y, &free_solution(&e0, &p, 30.0)) <= 1e-8);
}
