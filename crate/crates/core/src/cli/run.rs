//! Experiment orchestration and deterministic CSV/manifest emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{Experiment, RunConfig};
use crate::algebra::{classical_relations, InvariantSet, Mode, ModelParams};
use crate::chaos::{lyapunov_max, poincare, regime_sweep, SweepOutcome};
use crate::dynamics::{frozen_k_nl, integrate, monitor_invariants, DriftReport, InitialState, Representation, Trajectory};
use crate::error::{Error, Result};
use crate::limit::run_limit;

pub const SIMULATE_HEADER: &str = "t,lambda1,lambda2,lambda3,A,P_A,x2,p2,L,I,I_lambda,E,E_r,S";
pub const LIMIT_HEADER: &str = "hbar,I,I_lambda,hbar_I_lambda,purity,S,lambda0,p0,distance";
pub const LYAPUNOV_HEADER: &str = "t,lambda_estimate";
pub const POINCARE_HEADER: &str = "t,x2,p2,L,P_A,A";
pub const SWEEP_HEADER: &str = "E_r,I,status,label,lambda_max,uncertainty,positive_fraction,crossings,occupancy,drift_I_lambda,drift_I,drift_E,classical_distance";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
    /// One-line human summary of the result.
    pub headline: String,
}

/// 17 significant digits; empty for NaN.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Fold -0 into 0 so that mirrored runs print identically.
        format!("{:.16e}", x + 0.0)
    }
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

struct Manifest(String);

impl Manifest {
    fn new(cfg: &RunConfig) -> Self {
        let mut m = Manifest(String::new());
        m.put("semiq.version", env!("CARGO_PKG_VERSION"));
        m.put("experiment", cfg.experiment.name());
        m.put("seed", cfg.seed);
        for (k, v) in &cfg.echo {
            m.put(&format!("config.{k}"), v);
        }
        m
    }

    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key} = {value}");
    }

    fn invariants(&mut self, prefix: &str, inv: &InvariantSet) {
        self.put(&format!("{prefix}.I"), num(inv.i_uncert));
        self.put(&format!("{prefix}.I_lambda"), num(inv.i_lambda));
        self.put(&format!("{prefix}.T"), num(inv.t_val));
        self.put(&format!("{prefix}.lambda0"), num(inv.lambda0));
        self.put(&format!("{prefix}.S"), num(inv.entropy));
        self.put(&format!("{prefix}.E"), num(inv.energy));
        self.put(&format!("{prefix}.E_r"), num(inv.e_r));
    }

    fn drift(&mut self, d: &DriftReport) {
        self.put("drift.I_lambda", num(d.i_lambda));
        self.put("drift.I", num(d.i_uncert));
        self.put("drift.E", num(d.energy));
    }

    /// Frozen `k_nl` and the initial invariants of a single-trajectory run.
    fn initial(&mut self, init: &InitialState, p: &ModelParams, rep: Representation) -> Result<()> {
        let (k, inv) = match (rep, init) {
            (Representation::Expectations(mode), _) => {
                let e = init.to_expectations(p)?;
                (None, InvariantSet::of_expectations(&e, p, mode))
            }
            (Representation::Multipliers, InitialState::Multipliers(s)) => {
                (Some(frozen_k_nl(s, p)?), InvariantSet::of_multipliers(s, p)?)
            }
            (Representation::Multipliers, InitialState::Expectations(e)) => {
                let s = crate::algebra::evs_to_multipliers(e, p)?;
                (Some(frozen_k_nl(&s, p)?), InvariantSet::of_multipliers(&s, p)?)
            }
        };
        self.put("k_nl", k.map_or_else(|| "none".to_string(), num));
        self.invariants("initial", &inv);
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let p = &cfg.model;
    let mut manifest = Manifest::new(cfg);
    let mut csv = String::new();
    let (rows, headline) = match cfg.experiment {
        Experiment::Simulate => {
            let init = cfg.initial.resolve(p)?;
            manifest.initial(&init, p, cfg.representation)?;
            let traj = integrate(&init, p, &cfg.integrator, cfg.representation)?;
            let drift = monitor_invariants(&traj, p);
            manifest.drift(&drift);
            manifest.put("accepted_steps", traj.accepted_steps);
            write_trajectory(&mut csv, &traj, p)?;
            (traj.len(), format!("{} samples to t = {}, max drift {:e}", traj.len(), traj.final_time(), drift.max()))
        }
        Experiment::Limit => {
            manifest.put("k_nl", "none");
            let report = run_limit(&cfg.limit, p, &cfg.integrator)?;
            csv.push_str(LIMIT_HEADER);
            csv.push('\n');
            for r in &report.records {
                let fields = [r.hbar, r.i, r.i_lambda, r.hbar_i_lambda, r.purity, r.entropy, r.lambda0, r.p0, r.distance];
                push_row(&mut csv, fields.iter().map(|v| num(*v)));
            }
            let v = &report.verdict;
            manifest.put("verdict.constraint_respected", v.constraint_respected);
            manifest.put("verdict.trends_hold", v.trends_hold);
            manifest.put("verdict.fitted_order", v.fitted_order.map_or_else(String::new, num));
            manifest.put("verdict.final_purity", num(v.final_purity));
            manifest.put("verdict.final_entropy", num(v.final_entropy));
            (
                report.records.len(),
                format!(
                    "{} steps, final purity {:.6}, final S {:.3e}",
                    report.records.len(),
                    v.final_purity,
                    v.final_entropy
                ),
            )
        }
        Experiment::Lyapunov => {
            let init = cfg.initial.resolve(p)?;
            manifest.initial(&init, p, cfg.representation)?;
            let r = lyapunov_max(&init, p, &cfg.integrator, cfg.representation, &cfg.lyapunov)?;
            csv.push_str(LYAPUNOV_HEADER);
            csv.push('\n');
            for (t, v) in &r.convergence_series {
                push_row(&mut csv, [num(*t), num(*v)].into_iter());
            }
            manifest.drift(&r.drift);
            manifest.put("lambda_max", num(r.lambda_max));
            manifest.put("uncertainty", num(r.uncertainty));
            manifest.put("positive_fraction", num(r.positive_fraction()));
            (r.convergence_series.len(), format!("lambda_max = {:.6e} +/- {:.1e}", r.lambda_max, r.uncertainty))
        }
        Experiment::Poincare => {
            let init = cfg.initial.resolve(p)?;
            manifest.initial(&init, p, cfg.representation)?;
            let s = poincare(&init, p, &cfg.integrator, cfg.representation)?;
            csv.push_str(POINCARE_HEADER);
            csv.push('\n');
            for ((t, pt), a) in s.crossing_times.iter().zip(&s.points).zip(&s.residuals) {
                push_row(&mut csv, [*t, pt[0], pt[1], pt[2], pt[3], *a].iter().map(|v| num(*v)));
            }
            manifest.put("crossings", s.len());
            manifest.put("occupancy", num(s.occupancy(crate::chaos::sweep::OCCUPANCY_GRID)));
            (s.len(), format!("{} crossings", s.len()))
        }
        Experiment::Sweep => {
            manifest.put("k_nl", "none");
            let sweep = regime_sweep(&cfg.shell, p, &cfg.integrator, &cfg.sweep_grid, &cfg.sweep)?;
            csv.push_str(SWEEP_HEADER);
            csv.push('\n');
            let mut worst = 0.0f64;
            for (k, outcome) in sweep.outcomes.iter().enumerate() {
                let head = [num(sweep.e_r_values[k]), num(sweep.i_values[k])];
                let tail: Vec<String> = match outcome {
                    SweepOutcome::Reached(pt) => {
                        worst = worst.max(pt.drift.max());
                        vec![
                            "reached".into(),
                            pt.label.name().into(),
                            num(pt.lambda_max),
                            num(pt.uncertainty),
                            num(pt.positive_fraction),
                            pt.crossings.to_string(),
                            num(pt.occupancy),
                            num(pt.drift.i_lambda),
                            num(pt.drift.i_uncert),
                            num(pt.drift.energy),
                            num(pt.classical_distance),
                        ]
                    }
                    SweepOutcome::Unreachable(msg) | SweepOutcome::Failed(msg) => {
                        let status = if matches!(outcome, SweepOutcome::Unreachable(_)) { "unreachable" } else { "failed" };
                        manifest.put(&format!("point.{k}.diagnostic"), msg);
                        let mut v = vec![status.to_string()];
                        v.resize(11, String::new());
                        v
                    }
                };
                push_row(&mut csv, head.into_iter().chain(tail));
            }
            manifest.put("drift.max", num(worst));
            (sweep.outcomes.len(), format!("{} sweep points, max drift {:e}", sweep.outcomes.len(), worst))
        }
    };
    manifest.put("rows", rows);

    let manifest_file = manifest_path(&cfg.output);
    write_file(&cfg.output, &csv)?;
    write_file(&manifest_file, &manifest.0)?;
    Ok(RunSummary { csv: cfg.output.clone(), manifest: manifest_file, rows, headline })
}

fn push_row(out: &mut String, fields: impl Iterator<Item = String>) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(&f);
        first = false;
    }
    out.push('\n');
}

fn write_trajectory(out: &mut String, traj: &Trajectory, p: &ModelParams) -> Result<()> {
    out.push_str(SIMULATE_HEADER);
    out.push('\n');
    for k in 0..traj.len() {
        let e = traj.expectation(k);
        let inv = &traj.invariant_log[k];
        let lambdas = match traj.representation {
            Representation::Expectations(Mode::Classical) => {
                classical_relations(&e).ok().map(|c| [c.lambda1_cl, c.lambda2_cl, c.lambda3_cl])
            }
            _ => traj.multipliers(k, p).map(|s| [s.lambda1, s.lambda2, s.lambda3]),
        };
        let lambda_fields = match lambdas {
            Some(l) => l.map(num),
            None => [String::new(), String::new(), String::new()],
        };
        let fields = [num(traj.times[k])]
            .into_iter()
            .chain(lambda_fields)
            .chain([e.a, e.p_a, e.x2, e.p2, e.l, inv.i_uncert, inv.i_lambda, inv.energy, inv.e_r, inv.entropy].map(num));
        push_row(out, fields);
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
