//! Regime characterization along an `E_r` grid at fixed energy.

use rayon::prelude::*;

use super::lyapunov::{lyapunov_max, LyapunovParams};
use super::poincare::poincare;
use crate::algebra::{Mode, ModelParams};
use crate::dynamics::{DriftReport, InitialState, IntegratorConfig, Representation};
use crate::error::{Error, Result};
use crate::limit::{sample_moments, sup_distance};
use crate::shell::EnergyShell;

/// Grid used by [`RegimeSweep`] section summaries.
pub const OCCUPANCY_GRID: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// `λ_max` at or below this is quasiclassical.
    pub lambda_low: f64,
    /// `λ_max` above this may be classical.
    pub lambda_high: f64,
    /// Largest distance to the classical reference accepted for the classical label.
    pub classical_distance: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { lambda_low: 1e-3, lambda_high: 5e-2, classical_distance: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    Quasiclassical,
    Transitional,
    Classical,
}

impl RegimeLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegimeLabel::Quasiclassical => "quasiclassical",
            RegimeLabel::Transitional => "transitional",
            RegimeLabel::Classical => "classical",
        }
    }
}

impl RegimeThresholds {
    pub fn label(&self, lambda_max: f64, classical_distance: f64) -> RegimeLabel {
        if lambda_max <= self.lambda_low {
            RegimeLabel::Quasiclassical
        } else if lambda_max > self.lambda_high && classical_distance <= self.classical_distance {
            RegimeLabel::Classical
        } else {
            RegimeLabel::Transitional
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub lyapunov: LyapunovParams,
    pub thresholds: RegimeThresholds,
    /// Horizon of the comparison against the classical reference.
    pub classical_horizon: f64,
    /// Worker threads; `0` uses the global pool.
    pub threads: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            lyapunov: LyapunovParams::default(),
            thresholds: RegimeThresholds::default(),
            classical_horizon: 10.0,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda_max: f64,
    pub uncertainty: f64,
    pub positive_fraction: f64,
    pub crossings: usize,
    /// [`PoincareSection::occupancy`](super::PoincareSection::occupancy) on an [`OCCUPANCY_GRID`] grid.
    pub occupancy: f64,
    pub drift: DriftReport,
    pub classical_distance: f64,
    pub label: RegimeLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Reached(SweepPoint),
    /// The requested `E_r` cannot be realized on the shell in quantum mode.
    Unreachable(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSweep {
    pub e_r_values: Vec<f64>,
    pub i_values: Vec<f64>,
    pub outcomes: Vec<SweepOutcome>,
}

pub fn regime_sweep(
    shell: &EnergyShell,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<RegimeSweep> {
    p.validate()?;
    cfg.validate()?;
    shell.validate()?;
    settings.lyapunov.validate()?;
    if grid.is_empty() {
        return Err(Error::Validation("sweep grid must not be empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Validation("sweep grid must be positive and strictly increasing".into()));
    }
    let i_values = grid
        .iter()
        .map(|&e_r| shell.i_for_relative_energy(e_r, p))
        .collect::<Result<Vec<_>>>()?;
    let run = || -> Vec<SweepOutcome> {
        i_values.par_iter().map(|&i| sweep_point(shell, p, cfg, i, settings)).collect()
    };
    let outcomes = if settings.threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(settings.threads)
            .build()
            .map_err(|e| Error::Validation(format!("cannot build worker pool: {e}")))?
            .install(run)
    };
    Ok(RegimeSweep { e_r_values: grid.to_vec(), i_values, outcomes })
}

fn sweep_point(shell: &EnergyShell, p: &ModelParams, cfg: &IntegratorConfig, i: f64, settings: &SweepSettings) -> SweepOutcome {
    if i < p.i_min() {
        return SweepOutcome::Unreachable(format!("I = {i:e} is below hbar^2/4 = {:e}", p.i_min()));
    }
    match evaluate(shell, p, cfg, i, settings) {
        Ok(point) => SweepOutcome::Reached(point),
        Err(Error::Unreachable(msg)) => SweepOutcome::Unreachable(msg),
        Err(e @ Error::PureLimit { .. }) => SweepOutcome::Unreachable(e.to_string()),
        Err(e) => SweepOutcome::Failed(e.to_string()),
    }
}

fn evaluate(shell: &EnergyShell, p: &ModelParams, cfg: &IntegratorConfig, i: f64, settings: &SweepSettings) -> Result<SweepPoint> {
    let start = shell.state_for_i(i, p)?;
    let init = InitialState::Expectations(start);
    let rep = Representation::Expectations(Mode::Quantum);
    let lyap = lyapunov_max(&init, p, cfg, rep, &settings.lyapunov)?;
    let section_cfg = cfg.with_t_end(settings.lyapunov.horizon);
    let (crossings, occupancy) = match poincare(&init, p, &section_cfg, rep) {
        Ok(s) => (s.len(), s.occupancy(OCCUPANCY_GRID)),
        Err(Error::NoCrossings) => (0, 0.0),
        Err(e) => return Err(e),
    };
    let short = cfg.with_t_end(settings.classical_horizon);
    let semi = sample_moments(&start, p, &short, Mode::Quantum)?;
    let reference = sample_moments(&shell.state_for_i(0.0, p)?, p, &short, Mode::Classical)?;
    let classical_distance = sup_distance(&semi, &reference);
    Ok(SweepPoint {
        lambda_max: lyap.lambda_max,
        uncertainty: lyap.uncertainty,
        positive_fraction: lyap.positive_fraction(),
        crossings,
        occupancy,
        drift: lyap.drift,
        classical_distance,
        label: settings.thresholds.label(lyap.lambda_max, classical_distance),
    })
}
