//! The two routes to the classical limit, the classical reference dynamics and
//! the moment-factorization check at `I_cl = 0`.

use rayon::prelude::*;

use crate::algebra::{
    entropy_of_z, ilambda_from_gap, lambda0_of_z, multipliers_to_evs, ExpectationState, Mode, ModelParams,
    MultiplierState, ASYMPTOTIC_Z,
};
use crate::dynamics::{
    integrate, sample_on_grid, uniform_grid, ExpectationFlow, InitialState, IntegratorConfig, PointFlow,
    Representation, Trajectory,
};
use crate::error::{Error, Result};
use crate::shell::EnergyShell;

/// Samples per trajectory used when comparing two trajectories.
pub const COMPARISON_SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `ħ → 0` at fixed `I`.
    HbarFirst,
    /// `I → ħ²/4` at fixed `ħ`.
    IFirst,
}

impl Ordering {
    pub fn name(self) -> &'static str {
        match self {
            Ordering::HbarFirst => "hbar_first",
            Ordering::IFirst => "i_first",
        }
    }
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hbar_first" => Ok(Ordering::HbarFirst),
            "i_first" => Ok(Ordering::IFirst),
            other => Err(Error::Validation(format!("unknown limit ordering '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSchedule {
    pub ordering: Ordering,
    pub hbar_seq: Vec<f64>,
    /// Relative gaps `g` with `I = (ħ²/4)(1 + g)`, visited for each `ħ` (i_first).
    pub i_gap_seq: Vec<f64>,
    /// The fixed `I` of the hbar_first route.
    pub i_fixed: f64,
    /// Energy shell on which initial moments are placed.
    pub base: EnergyShell,
    /// Horizon of the trajectory comparison; `0` skips it.
    pub t_end: f64,
}

/// `[a, a·r, a·r², …]` with `n` terms. Ratios `1/m` with integer `m` are
/// applied by division so that e.g. `0.01` is produced exactly.
pub fn geometric(first: f64, ratio: f64, n: usize) -> Vec<f64> {
    let inv = 1.0 / ratio;
    (0..n)
        .map(|k| {
            if inv.fract() == 0.0 {
                first / inv.powi(k as i32)
            } else {
                first * ratio.powi(k as i32)
            }
        })
        .collect()
}

impl LimitSchedule {
    pub fn hbar_first() -> Self {
        Self {
            ordering: Ordering::HbarFirst,
            hbar_seq: geometric(1.0, 0.1, 4),
            i_gap_seq: Vec::new(),
            i_fixed: 1.0,
            base: EnergyShell { energy: 2.0, quantum_fraction: 0.8, a0: 0.0 },
            t_end: 50.0,
        }
    }

    pub fn i_first() -> Self {
        Self {
            ordering: Ordering::IFirst,
            hbar_seq: vec![1.0],
            i_gap_seq: geometric(0.1, 0.1, 4),
            ..Self::hbar_first()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn decreasing(name: &str, v: &[f64]) -> Result<()> {
            if v.is_empty() {
                return Err(Error::Validation(format!("{name} must not be empty")));
            }
            if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Validation(format!("{name} must be positive")));
            }
            if v.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Validation(format!("{name} must be strictly decreasing")));
            }
            Ok(())
        }
        decreasing("limit.hbar_seq", &self.hbar_seq)?;
        match self.ordering {
            Ordering::IFirst => decreasing("limit.i_gap_seq", &self.i_gap_seq)?,
            Ordering::HbarFirst => {
                if !(self.i_fixed > 0.0 && self.i_fixed.is_finite()) {
                    return Err(Error::Validation(format!("limit.i_fixed must be positive (got {})", self.i_fixed)));
                }
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Validation(format!("limit.t_end must be non-negative (got {})", self.t_end)));
        }
        self.base.validate()
    }

    /// `(ħ, I, I - ħ²/4)` for every step, in schedule order.
    pub fn steps(&self) -> Vec<(f64, f64, f64)> {
        match self.ordering {
            Ordering::HbarFirst => self
                .hbar_seq
                .iter()
                .map(|&h| (h, self.i_fixed, self.i_fixed - 0.25 * h * h))
                .collect(),
            Ordering::IFirst => self
                .hbar_seq
                .iter()
                .flat_map(|&h| {
                    self.i_gap_seq.iter().map(move |&g| {
                        let gap = g * 0.25 * h * h;
                        (h, 0.25 * h * h + gap, gap)
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRecord {
    pub hbar: f64,
    pub i: f64,
    pub i_lambda: f64,
    pub hbar_i_lambda: f64,
    pub purity: f64,
    pub entropy: f64,
    pub lambda0: f64,
    /// Ground-state weight `p₀ = 1 - e^{-2ħI_λ}`.
    pub p0: f64,
    /// Sup-norm distance to the classical reference; NaN when not computed.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitVerdict {
    /// `I > ħ²/4` held at every step.
    pub constraint_respected: bool,
    /// Least-squares slope of `ln|I_λ - 1/(2√I)|` against `ln ħ` (hbar_first).
    pub fitted_order: Option<f64>,
    /// The ordering's expected trends hold across the whole schedule.
    pub trends_hold: bool,
    pub final_purity: f64,
    pub final_entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub ordering: Ordering,
    pub records: Vec<LimitRecord>,
    pub verdict: LimitVerdict,
}

/// Thermodynamic record of a quantum state with invariant `i = ħ²/4 + gap`.
pub fn limit_record(hbar: f64, i: f64, gap: f64) -> Result<LimitRecord> {
    if !(gap > 0.0) {
        return Err(Error::PureLimit { gap, threshold: 0.0 });
    }
    let il = ilambda_from_gap(i, gap, hbar)?;
    let z = hbar * il;
    Ok(LimitRecord {
        hbar,
        i,
        i_lambda: il,
        hbar_i_lambda: z,
        purity: z.tanh(),
        entropy: entropy_of_z(z),
        lambda0: lambda0_of_z(z),
        p0: -(-2.0 * z).exp_m1(),
        distance: f64::NAN,
    })
}

pub fn run_limit(sched: &LimitSchedule, p: &ModelParams, cfg: &IntegratorConfig) -> Result<LimitReport> {
    sched.validate()?;
    p.validate()?;
    cfg.validate()?;
    let steps = sched.steps();
    let cfg = cfg.with_t_end(sched.t_end);
    let reference = if sched.t_end > 0.0 {
        let start = sched.base.state_for_i(0.0, p)?;
        Some(sample_moments(&start, p, &cfg, Mode::Classical)?)
    } else {
        None
    };
    let records = steps
        .par_iter()
        .map(|&(hbar, i, gap)| {
            let mut rec = limit_record(hbar, i, gap)?;
            if let Some(reference) = &reference {
                let q = ModelParams { hbar, ..*p };
                let start = sched.base.state_for_i(i, &q)?;
                let traj = sample_moments(&start, &q, &cfg, Mode::Quantum)?;
                rec.distance = sup_distance(&traj, reference);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = judge(sched.ordering, &records);
    Ok(LimitReport { ordering: sched.ordering, records, verdict })
}

fn judge(ordering: Ordering, records: &[LimitRecord]) -> LimitVerdict {
    let constraint_respected = records.iter().all(|r| r.i > 0.25 * r.hbar * r.hbar);
    let last = records.last().copied();
    let pairs = || records.windows(2).map(|w| (w[0], w[1]));
    let (fitted_order, trends_hold) = match ordering {
        Ordering::HbarFirst => {
            let err = |r: &LimitRecord| (r.i_lambda - 0.5 / r.i.sqrt()).abs();
            let pts: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| err(r) > 0.0)
                .map(|r| (r.hbar.ln(), err(r).ln()))
                .collect();
            let trends = pairs().all(|(a, b)| {
                err(&b) < err(&a) && b.hbar_i_lambda < a.hbar_i_lambda && b.purity < a.purity
            });
            (fit_slope(&pts), trends)
        }
        Ordering::IFirst => {
            let trends = pairs().all(|(a, b)| {
                b.hbar != a.hbar
                    || (b.i_lambda > a.i_lambda && b.purity >= a.purity && b.entropy <= a.entropy)
            });
            (None, trends)
        }
    };
    LimitVerdict {
        constraint_respected,
        fitted_order,
        trends_hold,
        final_purity: last.map_or(f64::NAN, |r| r.purity),
        final_entropy: last.map_or(f64::NAN, |r| r.entropy),
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Classical-mode moment trajectory; admits `I_cl = 0`.
pub fn classical_reference(initial: &ExpectationState, p: &ModelParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate(
        &InitialState::Expectations(*initial),
        p,
        cfg,
        Representation::Expectations(Mode::Classical),
    )
}

/// Moment trajectory on the uniform comparison grid over `[0, cfg.t_end]`.
pub fn sample_moments(
    initial: &ExpectationState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    mode: Mode,
) -> Result<Vec<[f64; 5]>> {
    p.validate()?;
    initial.validate(p, mode)?;
    let flow = ExpectationFlow { params: *p, mode };
    sample_on_grid(&flow, initial.to_array(), cfg, &uniform_grid(cfg.t_end, COMPARISON_SAMPLES))
}

/// `max_t ‖a(t) - b(t)‖ / ‖b(0)‖` over a common grid.
pub fn sup_distance(a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
    let norm = |v: &[f64; 5]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let scale = b.first().map(norm).filter(|s| *s > 0.0).unwrap_or(1.0);
    a.iter()
        .zip(b)
        .map(|(x, y)| norm(&std::array::from_fn(|i| x[i] - y[i])))
        .fold(0.0, f64::max)
        / scale
}

/// Sup-norm distances between semiquantum trajectories started on `shell` with
/// invariants `i_values` and the classical trajectory with `I = 0` on the same shell.
pub fn convergence_to_classical(
    shell: &EnergyShell,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    i_values: &[f64],
) -> Result<Vec<f64>> {
    let reference = sample_moments(&shell.state_for_i(0.0, p)?, p, cfg, Mode::Classical)?;
    i_values
        .par_iter()
        .map(|&i| {
            let traj = sample_moments(&shell.state_for_i(i, p)?, p, cfg, Mode::Quantum)?;
            Ok(sup_distance(&traj, &reference))
        })
        .collect()
}

/// Largest relative residual between powers of the point-classical solution
/// and the classical moment trajectory, for second moments `(n, m)` with
/// `n + m = 2`. Each residual is normalized by the sup of its moment series.
pub fn factorization_check(
    initial: &ExpectationState,
    signs: (f64, f64),
    p: &ModelParams,
    cfg: &IntegratorConfig,
    moments: &[(u32, u32)],
) -> Result<f64> {
    p.validate()?;
    initial.validate(p, Mode::Classical)?;
    let (sx, sp) = signs;
    if sx.abs() != 1.0 || sp.abs() != 1.0 {
        return Err(Error::Validation(format!("signs must be ±1 (got {sx}, {sp})")));
    }
    if initial.l != 0.0 && initial.l.signum() != sx * sp {
        return Err(Error::InconsistentSigns { l: initial.l });
    }
    if moments.is_empty() {
        return Err(Error::Validation("no moments requested".into()));
    }
    for &(n, m) in moments {
        if n + m != 2 {
            return Err(Error::Validation(format!(
                "only second moments are tracked by the moment dynamics (got ({n}, {m}))"
            )));
        }
    }
    let grid = uniform_grid(cfg.t_end, COMPARISON_SAMPLES);
    let point0 = [sx * initial.x2.sqrt(), sp * initial.p2.sqrt(), initial.a, initial.p_a];
    let point = sample_on_grid(&PointFlow { params: *p }, point0, cfg, &grid)?;
    let evs = sample_on_grid(
        &ExpectationFlow { params: *p, mode: Mode::Classical },
        initial.to_array(),
        cfg,
        &grid,
    )?;
    let mut worst = 0.0f64;
    for &(n, m) in moments {
        let (pow, idx): (fn(&[f64; 4]) -> f64, usize) = match (n, m) {
            (2, 0) => (|y| y[0] * y[0], 0),
            (0, 2) => (|y| y[1] * y[1], 1),
            _ => (|y| 2.0 * y[0] * y[1], 2),
        };
        let scale = evs.iter().map(|e| e[idx].abs()).fold(0.0, f64::max);
        let diff = point.iter().zip(&evs).map(|(y, e)| (pow(y) - e[idx]).abs()).fold(0.0, f64::max);
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    pub x2: f64,
    pub p2: f64,
    pub l: f64,
    pub i: f64,
    pub purity: f64,
    /// Moments equal `(ħ/2, ħ/2, 0)` and `I = ħ²/4` to rounding.
    pub consistent: bool,
}

/// Moments of the pure state reached as `I_λ → ∞` for the unit oscillator.
pub fn ground_state_check(hbar: f64) -> Result<GroundState> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Domain(format!("hbar must be positive (got {hbar})")));
    }
    let il = 2.0 * ASYMPTOTIC_Z / hbar;
    let p = ModelParams { hbar, ..Default::default() };
    let e = multipliers_to_evs(&MultiplierState::new(il, il, 0.0, 0.0, 0.0), &p)?;
    let i = crate::algebra::invariant_i(&e);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
    Ok(GroundState {
        x2: e.x2,
        p2: e.p2,
        l: e.l,
        i,
        purity: (hbar * il).tanh(),
        consistent: close(e.x2, 0.5 * hbar) && close(e.p2, 0.5 * hbar) && e.l == 0.0 && close(i, 0.25 * hbar * hbar),
    })
}
