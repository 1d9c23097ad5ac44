//! Integration of the multiplier, expectation-value and classical representations,
//! with invariant-drift monitoring.

pub mod rhs;
pub mod solver;

pub use rhs::{rhs_expectations, rhs_multipliers, ExpectationFlow, Flow, MultiplierFlow, PointFlow, Reversed};
pub use solver::{Method, Solver, SolverSettings, StepSpan, MIN_STEP};

use crate::algebra::{
    evs_to_multipliers, i_lambda, multipliers_to_evs, t_of_ilambda, ExpectationState, InvariantSet, Mode,
    ModelParams, MultiplierState,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial trial step (adaptive) or the fixed step (RK4).
    pub dt_init: f64,
    pub t_end: f64,
    /// Record every `sample_stride`-th accepted step (the final state is always recorded).
    pub sample_stride: usize,
    pub drift_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            dt_init: 1e-2,
            t_end: 100.0,
            sample_stride: 1,
            drift_tol: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.rel_tol, "integrator.rel_tol"),
            (self.abs_tol, "integrator.abs_tol"),
            (self.dt_init, "integrator.dt_init"),
            (self.t_end, "integrator.t_end"),
            (self.drift_tol, "integrator.drift_tol"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if self.sample_stride == 0 {
            return Err(Error::Validation("integrator.sample_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            method: self.method,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            dt_init: self.dt_init,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Multipliers,
    Expectations(Mode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Multipliers(MultiplierState),
    Expectations(ExpectationState),
}

impl InitialState {
    pub fn to_expectations(&self, p: &ModelParams) -> Result<ExpectationState> {
        match self {
            InitialState::Multipliers(s) => multipliers_to_evs(s, p),
            InitialState::Expectations(e) => Ok(*e),
        }
    }
}

/// `k_nl = T(I_λ)/I_λ = √I/I_λ` for a multiplier state.
pub fn frozen_k_nl(s: &MultiplierState, p: &ModelParams) -> Result<f64> {
    let il = i_lambda(s)?;
    Ok(t_of_ilambda(il, p.hbar)? / il)
}

/// Sampled solution of one of the representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub representation: Representation,
    pub times: Vec<f64>,
    /// Raw state vectors in the trajectory's representation.
    pub states: Vec<[f64; 5]>,
    pub invariant_log: Vec<InvariantSet>,
    /// Frozen nonlinearity constant (multiplier representation only).
    pub k_nl: Option<f64>,
    pub accepted_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// State `i` in expectation-value form.
    pub fn expectation(&self, i: usize) -> ExpectationState {
        let y = self.states[i];
        match self.representation {
            Representation::Expectations(_) => ExpectationState::from_array(y),
            Representation::Multipliers => {
                // x2 = kλ₂, p2 = kλ₁, L = -2kλ₃ with the frozen k.
                let k = self.k_nl.unwrap_or(f64::NAN);
                ExpectationState::new(k * y[1], k * y[0], -2.0 * k * y[2], y[3], y[4])
            }
        }
    }

    /// State `i` in multiplier form; `None` where the multipliers do not exist.
    pub fn multipliers(&self, i: usize, p: &ModelParams) -> Option<MultiplierState> {
        match self.representation {
            Representation::Multipliers => Some(MultiplierState::from_array(self.states[i])),
            Representation::Expectations(_) => evs_to_multipliers(&self.expectation(i), p).ok(),
        }
    }

    pub fn expectations(&self) -> Vec<ExpectationState> {
        (0..self.len()).map(|i| self.expectation(i)).collect()
    }
}

pub(crate) fn invariants_of(rep: Representation, y: &[f64; 5], p: &ModelParams, k_nl: Option<f64>) -> InvariantSet {
    match rep {
        Representation::Multipliers => {
            let s = MultiplierState::from_array(*y);
            let inv = match k_nl {
                Some(k) => InvariantSet::of_multipliers_with_k(&s, p, k),
                None => InvariantSet::of_multipliers(&s, p),
            };
            // Drifted out of the admissible cone; report non-finite values.
            inv.unwrap_or(InvariantSet {
                i_uncert: f64::NAN,
                i_lambda: f64::NAN,
                energy: f64::NAN,
                e_r: f64::NAN,
                t_val: f64::NAN,
                lambda0: f64::NAN,
                entropy: f64::NAN,
            })
        }
        Representation::Expectations(mode) => InvariantSet::of_expectations(&ExpectationState::from_array(*y), p, mode),
    }
}

/// Relative deviation `|q - q0| / |q0|`, absolute when `q0 == 0`.
pub fn relative_drift(q: f64, q0: f64) -> f64 {
    if q == q0 {
        return 0.0;
    }
    let d = (q - q0).abs();
    if q0 != 0.0 && q0.is_finite() {
        d / q0.abs()
    } else if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Scale used to normalize drifts of `I` for states whose `I(0)` may vanish.
fn i_scale(e: &ExpectationState, i0: f64) -> f64 {
    let s = i0.abs().max(e.x2 * e.p2).max(0.25 * e.l * e.l);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Maximum relative drifts over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// Drift of `I_λ`; zero when `I_λ` is infinite throughout (pure/delta limit).
    pub i_lambda: f64,
    pub i_uncert: f64,
    pub energy: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.i_lambda.max(self.i_uncert).max(self.energy)
    }
}

pub fn monitor_invariants(traj: &Trajectory, _p: &ModelParams) -> DriftReport {
    let Some(first) = traj.invariant_log.first() else {
        return DriftReport { i_lambda: 0.0, i_uncert: 0.0, energy: 0.0 };
    };
    let e0 = traj.expectation(0);
    let scale = i_scale(&e0, first.i_uncert);
    let mut report = DriftReport { i_lambda: 0.0, i_uncert: 0.0, energy: 0.0 };
    for inv in &traj.invariant_log {
        report.i_lambda = report.i_lambda.max(relative_drift(inv.i_lambda, first.i_lambda));
        report.i_uncert = report.i_uncert.max((inv.i_uncert - first.i_uncert).abs() / scale);
        report.energy = report.energy.max(relative_drift(inv.energy, first.energy));
    }
    report
}

/// Integrates an arbitrary field from `t = 0` to `cfg.t_end`, calling `on_step`
/// after every accepted step.
pub fn propagate<F, const N: usize>(
    flow: &F,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    mut on_step: impl FnMut(&StepSpan<N>) -> Result<()>,
) -> Result<[f64; N]>
where
    F: Flow<N>,
{
    cfg.validate()?;
    let mut solver = Solver::new(flow, 0.0, y0, cfg.solver_settings());
    while solver.time() < cfg.t_end {
        let span = solver.step(cfg.t_end)?;
        on_step(&span)?;
    }
    Ok(*solver.state())
}

/// Uniform grid `t_k = k·t_end/(n-1)`, `k = 0..n`.
pub fn uniform_grid(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
}

/// Solution values at increasing `times` within `[0, cfg.t_end]`, read off the
/// dense output so that sampling does not perturb the step sequence.
pub fn sample_on_grid<F, const N: usize>(
    flow: &F,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<Vec<[f64; N]>>
where
    F: Flow<N>,
{
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        out.push(y0);
        next += 1;
    }
    propagate(flow, y0, cfg, |span| {
        while next < times.len() && times[next] <= span.t1 {
            let t = times[next];
            out.push(if t == span.t1 { span.y1 } else { span.hermite(t) });
            next += 1;
        }
        Ok(())
    })?;
    if out.len() != times.len() {
        return Err(Error::Validation(format!(
            "sample times must be increasing and end by t_end = {}",
            cfg.t_end
        )));
    }
    Ok(out)
}

/// Integrates `initial` in representation `rep`, sampling every
/// `cfg.sample_stride` accepted steps and aborting once `I_λ`/`I` or `E` drift
/// beyond `cfg.drift_tol`.
pub fn integrate(
    initial: &InitialState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    rep: Representation,
) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    let (y0, k_nl) = match (rep, initial) {
        (Representation::Multipliers, InitialState::Multipliers(s)) => (*s, Some(frozen_k_nl(s, p)?)),
        (Representation::Multipliers, InitialState::Expectations(e)) => {
            let s = evs_to_multipliers(e, p)?;
            (s, Some(frozen_k_nl(&s, p)?))
        }
        (Representation::Expectations(mode), init) => {
            let e = init.to_expectations(p)?;
            e.validate(p, mode)?;
            return run(ExpectationFlow { params: *p, mode }, e.to_array(), None, p, cfg, rep);
        }
    };
    y0.validate()?;
    let k = k_nl.unwrap_or(f64::NAN);
    run(MultiplierFlow { params: *p, k_nl: k }, y0.to_array(), k_nl, p, cfg, rep)
}

fn run<F: Flow<5>>(
    flow: F,
    y0: [f64; 5],
    k_nl: Option<f64>,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    rep: Representation,
) -> Result<Trajectory> {
    let inv0 = invariants_of(rep, &y0, p, k_nl);
    let scale = i_scale(&ExpectationState::from_array(y0), inv0.i_uncert);
    let mut traj = Trajectory {
        representation: rep,
        times: vec![0.0],
        states: vec![y0],
        invariant_log: vec![inv0],
        k_nl,
        accepted_steps: 0,
    };
    let mut count = 0usize;
    let check = |t: f64, inv: &InvariantSet| -> Result<()> {
        let (name, drift) = match rep {
            Representation::Multipliers => ("I_lambda", relative_drift(inv.i_lambda, inv0.i_lambda)),
            Representation::Expectations(_) => {
                let d = (inv.i_uncert - inv0.i_uncert).abs() / scale;
                ("I", if d.is_nan() { f64::INFINITY } else { d })
            }
        };
        if !(drift <= cfg.drift_tol) {
            return Err(Error::DriftExceeded { quantity: name, t, drift, tol: cfg.drift_tol });
        }
        let de = relative_drift(inv.energy, inv0.energy);
        if !(de <= cfg.drift_tol) {
            return Err(Error::DriftExceeded { quantity: "E", t, drift: de, tol: cfg.drift_tol });
        }
        Ok(())
    };
    propagate(&flow, y0, cfg, |span| {
        count += 1;
        let is_last = span.t1 >= cfg.t_end;
        if count.is_multiple_of(cfg.sample_stride) || is_last {
            let inv = invariants_of(rep, &span.y1, p, k_nl);
            check(span.t1, &inv)?;
            traj.times.push(span.t1);
            traj.states.push(span.y1);
            traj.invariant_log.push(inv);
        }
        Ok(())
    })?;
    traj.accepted_steps = count;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_trajectory_has_zero_drift() {
        let p = ModelParams::default();
        let s = MultiplierState::new(1.0, 1.0, 0.0, 0.0, 0.0);
        let traj = integrate(
            &InitialState::Multipliers(s),
            &p,
            &IntegratorConfig::default().with_t_end(5.0),
            Representation::Multipliers,
        )
        .unwrap();
        let d = monitor_invariants(&traj, &p);
        assert_eq!(d.max(), 0.0);
        assert!(traj.states.iter().all(|y| *y == s.to_array()));
    }

    #[test]
    fn pure_limit_blocks_multiplier_representation() {
        let p = ModelParams::default();
        let ground = ExpectationState::new(0.5, 0.5, 0.0, 0.3, 0.1);
        let err = integrate(
            &InitialState::Expectations(ground),
            &p,
            &IntegratorConfig::default().with_t_end(1.0),
            Representation::Multipliers,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PureLimit { .. }));
        // The moment representation handles the same state.
        let traj = integrate(
            &InitialState::Expectations(ground),
            &p,
            &IntegratorConfig::default().with_t_end(1.0),
            Representation::Expectations(Mode::Quantum),
        )
        .unwrap();
        assert!(traj.len() > 1);
    }

    #[test]
    fn sampling_stride_and_final_sample() {
        let p = ModelParams::default();
        let e = ExpectationState::new(1.0, 1.2, 0.1, 0.2, 0.5);
        let cfg = IntegratorConfig { method: Method::Rk4Fixed, dt_init: 0.01, t_end: 1.0, sample_stride: 7, ..Default::default() };
        let traj = integrate(&InitialState::Expectations(e), &p, &cfg, Representation::Expectations(Mode::Quantum)).unwrap();
        assert_eq!(traj.accepted_steps, 100);
        assert_eq!(traj.len(), 1 + 100 / 7 + 1);
        assert_eq!(traj.final_time(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn drift_violation_aborts() {
        let p = ModelParams::default();
        let e = ExpectationState::new(2.0, 0.7, 0.1, 0.0, 1.5);
        let cfg = IntegratorConfig { method: Method::Rk4Fixed, dt_init: 0.5, t_end: 50.0, drift_tol: 1e-12, ..Default::default() };
        let err = integrate(&InitialState::Expectations(e), &p, &cfg, Representation::Expectations(Mode::Quantum)).unwrap_err();
        assert!(matches!(err, Error::DriftExceeded { .. }), "{err:?}");
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = IntegratorConfig { rel_tol: 0.0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
        let cfg = IntegratorConfig { sample_stride: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
