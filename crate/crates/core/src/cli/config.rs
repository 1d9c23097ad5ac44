//! `key = value` run configuration with dotted section keys and flag overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::algebra::{ExpectationState, Mode, ModelParams, MultiplierState};
use crate::chaos::{LyapunovParams, RegimeThresholds, SweepSettings};
use crate::dynamics::{InitialState, IntegratorConfig, Method, Representation};
use crate::error::{Error, Result};
use crate::limit::{LimitSchedule, Ordering};
use crate::shell::EnergyShell;

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("model.m_q", "1", "quantum oscillator mass"),
    ("model.m_cl", "1", "classical oscillator mass"),
    ("model.omega_q", "1", "bare quantum frequency"),
    ("model.e", "1", "coupling constant"),
    ("model.hbar", "1", "Planck constant (0 only with the ev representation)"),
    ("initial.kind", "ev", "ev | multipliers | shell"),
    ("initial.x2", "1", "<x^2>(0) for kind = ev"),
    ("initial.p2", "1", "<p^2>(0) for kind = ev"),
    ("initial.l", "0", "<L>(0) for kind = ev"),
    ("initial.lambda1", "1", "lambda1(0) for kind = multipliers"),
    ("initial.lambda2", "1", "lambda2(0) for kind = multipliers"),
    ("initial.lambda3", "0", "lambda3(0) for kind = multipliers"),
    ("initial.a", "1", "A(0) for kinds ev and multipliers"),
    ("initial.p_a", "0", "P_A(0) for kinds ev and multipliers"),
    ("shell.energy", "1", "total energy of shell initial conditions"),
    ("shell.quantum_fraction", "0.8", "share of the energy held by the quantum oscillator"),
    ("shell.a0", "0", "A(0) on the shell"),
    ("shell.e_r", "2", "relative energy selecting I for kind = shell"),
    ("integrator.representation", "ev", "ev | multipliers"),
    ("integrator.mode", "quantum", "quantum | classical statistics for the ev representation"),
    ("integrator.method", "rk45", "rk45 | rk4"),
    ("integrator.rel_tol", "1e-10", "relative tolerance (rk45)"),
    ("integrator.abs_tol", "1e-12", "absolute tolerance (rk45)"),
    ("integrator.dt_init", "0.01", "initial step (rk45) or fixed step (rk4)"),
    ("integrator.t_end", "100", "final time"),
    ("integrator.sample_stride", "1", "record every n-th accepted step"),
    ("integrator.drift_tol", "1e-6", "abort when I/I_lambda or E drift beyond this"),
    ("limit.ordering", "i_first", "i_first | hbar_first"),
    ("limit.hbar_seq", "", "decreasing hbar values; empty selects the ordering's default"),
    ("limit.i_gap_seq", "0.1,0.01,0.001,0.0001", "relative gaps g, I = (hbar^2/4)(1+g)"),
    ("limit.i_fixed", "1", "fixed I of the hbar_first route"),
    ("limit.energy", "2", "shell energy for the trajectory comparison"),
    ("limit.quantum_fraction", "0.8", "shell quantum fraction for the trajectory comparison"),
    ("limit.t_end", "50", "comparison horizon; 0 skips trajectories"),
    ("lyapunov.renorm_dt", "1", "renormalization interval"),
    ("lyapunov.horizon", "2000", "total integration time"),
    ("lyapunov.d0", "1e-8", "initial separation"),
    ("sweep.grid", "1.26,1.4,1.6,1.8,2,2.5,3,5,10,30", "increasing E_r values"),
    ("sweep.threads", "0", "worker threads (0 = all cores)"),
    ("sweep.horizon", "10000", "Lyapunov horizon per sweep point"),
    ("sweep.classical_horizon", "10", "horizon of the classical-reference comparison"),
    ("sweep.lambda_low", "1e-3", "quasiclassical threshold on lambda_max"),
    ("sweep.lambda_high", "5e-2", "classical threshold on lambda_max"),
    ("sweep.classical_distance", "1e-2", "classical label needs this distance to the reference"),
    ("output", "semiq.csv", "CSV path; the manifest is written to <output>.manifest"),
    ("seed", "1", "seed of the Lyapunov perturbation direction"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Simulate,
    Limit,
    Lyapunov,
    Poincare,
    Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Simulate,
        Experiment::Limit,
        Experiment::Lyapunov,
        Experiment::Poincare,
        Experiment::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Limit => "limit",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Poincare => "poincare",
            Experiment::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Expectations(ExpectationState),
    Multipliers(MultiplierState),
    Shell { shell: EnergyShell, e_r: f64 },
}

impl InitialSpec {
    pub fn resolve(&self, p: &ModelParams) -> Result<InitialState> {
        Ok(match self {
            InitialSpec::Expectations(e) => InitialState::Expectations(*e),
            InitialSpec::Multipliers(s) => InitialState::Multipliers(*s),
            InitialSpec::Shell { shell, e_r } => {
                let i = shell.i_for_relative_energy(*e_r, p)?;
                InitialState::Expectations(shell.state_for_i(i, p)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: ModelParams,
    pub initial: InitialSpec,
    pub representation: Representation,
    pub integrator: IntegratorConfig,
    pub limit: LimitSchedule,
    pub lyapunov: LyapunovParams,
    pub shell: EnergyShell,
    pub sweep_grid: Vec<f64>,
    pub sweep: SweepSettings,
    pub output: PathBuf,
    pub seed: u64,
    /// Effective value of every key, defaults included.
    pub echo: BTreeMap<String, String>,
}

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Default,
    Line(usize),
    Flag,
}

struct Values {
    map: BTreeMap<&'static str, (String, Origin)>,
}

impl Values {
    fn bad(&self, key: &str, msg: String) -> Error {
        match self.map[key].1 {
            Origin::Line(line) => Error::Parse { line, msg },
            Origin::Flag => Error::Validation(format!("flag --{key}: {msg}")),
            Origin::Default => Error::Validation(msg),
        }
    }

    fn str(&self, key: &str) -> &str {
        &self.map[key].0
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key);
        v.parse::<f64>()
            .map_err(|_| self.bad(key, format!("{key} expects a number (got '{v}')")))
    }

    fn uint(&self, key: &str) -> Result<u64> {
        let v = self.str(key);
        v.parse::<u64>()
            .map_err(|_| self.bad(key, format!("{key} expects a non-negative integer (got '{v}')")))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.str(key);
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|item| {
                item.trim()
                    .parse::<f64>()
                    .map_err(|_| self.bad(key, format!("{key} expects comma-separated numbers (got '{v}')")))
            })
            .collect()
    }

    fn choice(&self, key: &str, options: &[&str]) -> Result<String> {
        let v = self.str(key);
        if options.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(self.bad(key, format!("{key} must be one of {} (got '{v}')", options.join(", "))))
        }
    }
}

fn lookup(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(k, _, _)| *k)
}

/// Parses configuration text plus `key=value` overrides (flag syntax without
/// the leading dashes) for the given experiment.
pub fn parse_config(experiment: Experiment, text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut values = Values {
        map: KEYS.iter().map(|(k, d, _)| (*k, (d.to_string(), Origin::Default))).collect(),
    };
    let mut seen = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected 'key = value', found '{content}'") });
        };
        let k = k.trim();
        let Some(key) = lookup(k) else {
            return Err(Error::Parse { line, msg: format!("unknown key '{k}'") });
        };
        if let Some(prev) = seen.insert(key, line) {
            return Err(Error::Parse { line, msg: format!("duplicate key '{k}' (first set on line {prev})") });
        }
        values.map.insert(key, (v.trim().to_string(), Origin::Line(line)));
    }
    for (k, v) in overrides {
        let key = lookup(k).ok_or_else(|| Error::Validation(format!("unknown key '{k}' in flag --{k}")))?;
        values.map.insert(key, (v.trim().to_string(), Origin::Flag));
    }
    build(experiment, &values)
}

/// Splits `--key=value` arguments into override pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    args.iter()
        .map(|a| {
            let body = a
                .strip_prefix("--")
                .ok_or_else(|| Error::Validation(format!("unexpected argument '{a}'")))?;
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("flag '{a}' must have the form --key=value")))?;
            Ok((k.to_string(), v.to_string()))
        })
        .collect()
}

fn build(experiment: Experiment, v: &Values) -> Result<RunConfig> {
    let model = ModelParams {
        m_q: v.f64("model.m_q")?,
        m_cl: v.f64("model.m_cl")?,
        omega_q: v.f64("model.omega_q")?,
        e: v.f64("model.e")?,
        hbar: v.f64("model.hbar")?,
    };
    model.validate()?;

    let shell = EnergyShell {
        energy: v.f64("shell.energy")?,
        quantum_fraction: v.f64("shell.quantum_fraction")?,
        a0: v.f64("shell.a0")?,
    };
    let a = v.f64("initial.a")?;
    let p_a = v.f64("initial.p_a")?;
    let initial = match v.choice("initial.kind", &["ev", "multipliers", "shell"])?.as_str() {
        "ev" => InitialSpec::Expectations(ExpectationState::new(
            v.f64("initial.x2")?,
            v.f64("initial.p2")?,
            v.f64("initial.l")?,
            a,
            p_a,
        )),
        "multipliers" => InitialSpec::Multipliers(MultiplierState::new(
            v.f64("initial.lambda1")?,
            v.f64("initial.lambda2")?,
            v.f64("initial.lambda3")?,
            a,
            p_a,
        )),
        _ => {
            shell.validate()?;
            InitialSpec::Shell { shell, e_r: v.f64("shell.e_r")? }
        }
    };

    let mode = match v.choice("integrator.mode", &["quantum", "classical"])?.as_str() {
        "quantum" => Mode::Quantum,
        _ => Mode::Classical,
    };
    let representation = match v.choice("integrator.representation", &["ev", "multipliers"])?.as_str() {
        "ev" => Representation::Expectations(mode),
        _ => Representation::Multipliers,
    };
    let uses_multipliers = matches!(representation, Representation::Multipliers)
        || matches!(initial, InitialSpec::Multipliers(_));
    if model.hbar == 0.0 && uses_multipliers {
        return Err(Error::Validation(
            "multipliers need model.hbar > 0; use initial.kind = ev and integrator.representation = ev".into(),
        ));
    }
    if mode == Mode::Classical && matches!(initial, InitialSpec::Multipliers(_)) {
        return Err(Error::Validation("classical mode needs an ev initial state".into()));
    }

    let integrator = IntegratorConfig {
        method: match v.choice("integrator.method", &["rk45", "rk4"])?.as_str() {
            "rk45" => Method::Rk45Adaptive,
            _ => Method::Rk4Fixed,
        },
        rel_tol: v.f64("integrator.rel_tol")?,
        abs_tol: v.f64("integrator.abs_tol")?,
        dt_init: v.f64("integrator.dt_init")?,
        t_end: v.f64("integrator.t_end")?,
        sample_stride: v.uint("integrator.sample_stride")? as usize,
        drift_tol: v.f64("integrator.drift_tol")?,
    };
    integrator.validate()?;

    let ordering: Ordering = v.choice("limit.ordering", &["i_first", "hbar_first"])?.parse()?;
    let defaults = match ordering {
        Ordering::HbarFirst => LimitSchedule::hbar_first(),
        Ordering::IFirst => LimitSchedule::i_first(),
    };
    let hbar_seq = v.list("limit.hbar_seq")?;
    let limit = LimitSchedule {
        ordering,
        hbar_seq: if hbar_seq.is_empty() { defaults.hbar_seq } else { hbar_seq },
        i_gap_seq: v.list("limit.i_gap_seq")?,
        i_fixed: v.f64("limit.i_fixed")?,
        base: EnergyShell {
            energy: v.f64("limit.energy")?,
            quantum_fraction: v.f64("limit.quantum_fraction")?,
            a0: 0.0,
        },
        t_end: v.f64("limit.t_end")?,
    };

    let seed = v.uint("seed")?;
    let lyapunov = LyapunovParams {
        renorm_dt: v.f64("lyapunov.renorm_dt")?,
        horizon: v.f64("lyapunov.horizon")?,
        d0: v.f64("lyapunov.d0")?,
        seed,
    };
    let sweep = SweepSettings {
        lyapunov: LyapunovParams { horizon: v.f64("sweep.horizon")?, ..lyapunov },
        thresholds: RegimeThresholds {
            lambda_low: v.f64("sweep.lambda_low")?,
            lambda_high: v.f64("sweep.lambda_high")?,
            classical_distance: v.f64("sweep.classical_distance")?,
        },
        classical_horizon: v.f64("sweep.classical_horizon")?,
        threads: v.uint("sweep.threads")? as usize,
    };

    let output = v.str("output");
    if output.is_empty() {
        return Err(Error::Validation("output must not be empty".into()));
    }

    match experiment {
        Experiment::Limit => limit.validate()?,
        Experiment::Lyapunov => lyapunov.validate()?,
        Experiment::Sweep => {
            shell.validate()?;
            sweep.lyapunov.validate()?;
            if !(sweep.classical_horizon > 0.0) {
                return Err(Error::Validation("sweep.classical_horizon must be positive".into()));
            }
        }
        Experiment::Simulate | Experiment::Poincare => {}
    }

    Ok(RunConfig {
        experiment,
        model,
        initial,
        representation,
        integrator,
        limit,
        lyapunov,
        shell,
        sweep_grid: v.list("sweep.grid")?,
        sweep,
        output: PathBuf::from(output),
        seed,
        echo: v.map.iter().map(|(k, (val, _))| (k.to_string(), val.clone())).collect(),
    })
}
