//! Maximal Lyapunov exponent by two-trajectory renormalization (Benettin).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{evs_to_multipliers, ExpectationState, InvariantSet, ModelParams, MultiplierState};
use crate::dynamics::{
    frozen_k_nl, invariants_of, relative_drift, DriftReport, ExpectationFlow, Flow, InitialState, IntegratorConfig, MultiplierFlow,
    Representation, Solver,
};
use crate::error::{Error, Result};

/// Fraction of the convergence series used to judge convergence.
pub const FINAL_WINDOW: f64 = 0.2;
/// Allowed relative spread of the final window.
pub const MAX_RELATIVE_SPREAD: f64 = 0.2;
/// Absolute spread always tolerated, so that near-zero exponents can converge.
pub const SPREAD_FLOOR: f64 = 1e-3;
/// Number of contiguous blocks in the batch-means error estimate.
pub const ERROR_BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub renorm_dt: f64,
    pub horizon: f64,
    pub d0: f64,
    pub seed: u64,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            renorm_dt: 1.0,
            horizon: 2000.0,
            d0: 1e-8,
            seed: 1,
        }
    }
}

impl LyapunovParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.renorm_dt > 0.0 && self.horizon >= self.renorm_dt) {
            return Err(Error::Validation(format!(
                "lyapunov needs 0 < renorm_dt <= horizon (got {}, {})",
                self.renorm_dt, self.horizon
            )));
        }
        if !(1e-10..=1e-6).contains(&self.d0) {
            return Err(Error::Validation(format!("lyapunov.d0 must lie in [1e-10, 1e-6] (got {})", self.d0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovResult {
    pub lambda_max: f64,
    /// `(t, running estimate)` after every renormalization.
    pub convergence_series: Vec<(f64, f64)>,
    pub renorm_interval: f64,
    pub horizon: f64,
    /// Batch-means standard error of the estimate, never below the spread of the final window.
    pub uncertainty: f64,
    /// Invariant drift of the reference trajectory.
    pub drift: DriftReport,
}

impl LyapunovResult {
    /// Fraction of the running estimates that are strictly positive.
    pub fn positive_fraction(&self) -> f64 {
        if self.convergence_series.is_empty() {
            return 0.0;
        }
        let n = self.convergence_series.iter().filter(|(_, v)| *v > 0.0).count();
        n as f64 / self.convergence_series.len() as f64
    }
}

/// Unit vector in `R⁵` drawn from a seeded generator.
pub fn perturbation_direction(seed: u64) -> [f64; 5] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = [0.0f64; 5];
    for c in v.iter_mut() {
        *c = StandardNormal.sample(&mut rng);
    }
    let n = norm(&v);
    v.map(|c| c / n)
}

fn norm(v: &[f64; 5]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn sub(a: &[f64; 5], b: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| a[i] - b[i])
}

enum Tracked<'a> {
    Moments(Solver<'a, ExpectationFlow, 5>),
    Multipliers(MultiplierFlow),
}

pub fn lyapunov_max(
    initial: &InitialState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    rep: Representation,
    params: &LyapunovParams,
) -> Result<LyapunovResult> {
    params.validate()?;
    cfg.validate()?;
    match rep {
        Representation::Expectations(mode) => {
            let e = initial.to_expectations(p)?;
            e.validate(p, mode)?;
            let flow = ExpectationFlow { params: *p, mode };
            let inv = |y: &[f64; 5]| InvariantSet::of_expectations(&ExpectationState::from_array(*y), p, mode);
            benettin(e.to_array(), params, cfg, inv, |y0| Ok(Tracked::Moments(Solver::new(&flow, 0.0, y0, cfg.solver_settings()))), &flow)
        }
        Representation::Multipliers => {
            let s = match initial {
                InitialState::Multipliers(s) => *s,
                InitialState::Expectations(e) => evs_to_multipliers(e, p)?,
            };
            s.validate()?;
            let flow = MultiplierFlow { params: *p, k_nl: frozen_k_nl(&s, p)? };
            let k = flow.k_nl;
            let inv = move |y: &[f64; 5]| invariants_of(Representation::Multipliers, y, p, Some(k));
            let make = |y0: [f64; 5]| -> Result<Tracked<'_>> {
                let ps = MultiplierState::from_array(y0);
                Ok(Tracked::Multipliers(MultiplierFlow { params: *p, k_nl: frozen_k_nl(&ps, p)? }))
            };
            benettin(s.to_array(), params, cfg, inv, make, &flow)
        }
    }
}

fn benettin<'a, F: Flow<5>>(
    y0: [f64; 5],
    params: &LyapunovParams,
    cfg: &IntegratorConfig,
    invariants: impl Fn(&[f64; 5]) -> InvariantSet,
    make_perturbed: impl Fn([f64; 5]) -> Result<Tracked<'a>>,
    flow: &F,
) -> Result<LyapunovResult> {
    let settings = cfg.solver_settings();
    let dir = perturbation_direction(params.seed);
    let z0: [f64; 5] = std::array::from_fn(|i| y0[i] + params.d0 * dir[i]);

    let mut reference = Solver::new(flow, 0.0, y0, settings);
    let mut perturbed = make_perturbed(z0)?;
    let mut z = z0;
    let mut z_step = settings.dt_init;

    let inv0 = invariants(&y0);
    let mut drift = DriftReport { i_lambda: 0.0, i_uncert: 0.0, energy: 0.0 };
    let i_scale = {
        let e = ExpectationState::from_array(y0);
        inv0.i_uncert.abs().max(e.x2 * e.p2).max(f64::MIN_POSITIVE)
    };

    let n = (params.horizon / params.renorm_dt).round().max(1.0) as usize;
    let mut series = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    let mut log_sum = 0.0;
    for k in 1..=n {
        let t = k as f64 * params.renorm_dt;
        reference.advance_to(t)?;
        z = match &mut perturbed {
            Tracked::Moments(solver) => {
                solver.advance_to(t)?;
                *solver.state()
            }
            Tracked::Multipliers(pflow) => {
                // The perturbed state carries its own frozen k_nl, so restart per interval.
                let mut s = Solver::new(&*pflow, t - params.renorm_dt, z, crate::dynamics::SolverSettings { dt_init: z_step, ..settings });
                s.advance_to(t)?;
                z_step = s.step_size();
                *s.state()
            }
        };
        let y = *reference.state();
        let sep = sub(&z, &y);
        let d = norm(&sep);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let growth = (d / params.d0).ln();
        log_sum += growth;
        local.push(growth / params.renorm_dt);
        series.push((t, log_sum / t));
        z = std::array::from_fn(|i| y[i] + sep[i] * (params.d0 / d));
        match &mut perturbed {
            Tracked::Moments(solver) => solver.reset_state(z),
            Tracked::Multipliers(_) => {
                perturbed = make_perturbed(z)?;
            }
        }

        let inv = invariants(&y);
        drift.i_lambda = drift.i_lambda.max(relative_drift(inv.i_lambda, inv0.i_lambda));
        drift.i_uncert = drift.i_uncert.max((inv.i_uncert - inv0.i_uncert).abs() / i_scale);
        drift.energy = drift.energy.max(relative_drift(inv.energy, inv0.energy));
    }

    let lambda_max = log_sum / (n as f64 * params.renorm_dt);
    let start = ((1.0 - FINAL_WINDOW) * series.len() as f64).floor() as usize;
    let window = &series[start.min(series.len() - 1)..];
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    let spread = hi - lo;
    if spread > MAX_RELATIVE_SPREAD * lambda_max.abs() + SPREAD_FLOOR {
        return Err(Error::NonConverged { estimate: lambda_max, spread });
    }
    Ok(LyapunovResult {
        lambda_max,
        convergence_series: series,
        renorm_interval: params.renorm_dt,
        horizon: n as f64 * params.renorm_dt,
        uncertainty: spread.max(batch_standard_error(&local)),
        drift,
    })
}

/// Standard error of the mean of a correlated series from `ERROR_BATCHES` block means.
fn batch_standard_error(values: &[f64]) -> f64 {
    let len = values.len() / ERROR_BATCHES;
    if len == 0 {
        return 0.0;
    }
    let means: Vec<f64> = values.chunks_exact(len).take(ERROR_BATCHES).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let b = means.len() as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_is_deterministic_unit_vector() {
        let a = perturbation_direction(7);
        assert_eq!(a, perturbation_direction(7));
        assert_ne!(a, perturbation_direction(8));
        assert!((norm(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_d0() {
        let params = LyapunovParams { d0: 1e-3, ..Default::default() };
        assert!(params.validate().is_err());
    }

    #[test]
    fn decoupled_system_has_vanishing_exponent() {
        let p = ModelParams { e: 0.0, ..Default::default() };
        let init = InitialState::Expectations(ExpectationState::new(1.0, 0.8, 0.3, 0.0, 0.5));
        let params = LyapunovParams { horizon: 1e4, renorm_dt: 5.0, ..Default::default() };
        let r = lyapunov_max(&init, &p, &IntegratorConfig::default(), Representation::Expectations(crate::Mode::Quantum), &params).unwrap();
        assert!(r.lambda_max.abs() <= 1e-3, "{}", r.lambda_max);
    }
}
