//! Poincaré section on the plane `A = 0` crossed with `dA/dt > 0`.

use crate::algebra::{evs_to_multipliers, ExpectationState, ModelParams, MultiplierState};
use crate::dynamics::{
    frozen_k_nl, propagate, ExpectationFlow, Flow, InitialState, IntegratorConfig, MultiplierFlow, Representation,
    Solver, StepSpan,
};
use crate::error::{Error, Result};

/// Refined crossings satisfy `|A| ≤ CROSSING_TOL`.
pub const CROSSING_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoincareSection {
    /// `(⟨x̂²⟩, ⟨p̂²⟩, ⟨L̂⟩, P_A)` at each crossing.
    pub points: Vec<[f64; 4]>,
    pub crossing_times: Vec<f64>,
    /// `A` at each refined crossing.
    pub residuals: Vec<f64>,
}

impl PoincareSection {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of the cells of a `grid × grid` partition of the bounding box
    /// of the `(⟨x̂²⟩, ⟨L̂⟩)` projection that contain at least one point.
    /// Curves occupy `O(1/grid)` of the cells, area-filling sets `O(1)`.
    pub fn occupancy(&self, grid: usize) -> f64 {
        if self.points.len() < 2 || grid == 0 {
            return 0.0;
        }
        let bounds = |k: usize| {
            self.points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])))
        };
        let (x_lo, x_hi) = bounds(0);
        let (l_lo, l_hi) = bounds(2);
        let cell = |v: f64, lo: f64, hi: f64| {
            if hi > lo {
                (((v - lo) / (hi - lo) * grid as f64) as usize).min(grid - 1)
            } else {
                0
            }
        };
        let mut seen = vec![false; grid * grid];
        for p in &self.points {
            seen[cell(p[0], x_lo, x_hi) * grid + cell(p[2], l_lo, l_hi)] = true;
        }
        seen.iter().filter(|s| **s).count() as f64 / (grid * grid) as f64
    }
}

pub fn poincare(
    initial: &InitialState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
    rep: Representation,
) -> Result<PoincareSection> {
    p.validate()?;
    cfg.validate()?;
    match rep {
        Representation::Expectations(mode) => {
            let e = initial.to_expectations(p)?;
            e.validate(p, mode)?;
            let flow = ExpectationFlow { params: *p, mode };
            section(&flow, e.to_array(), cfg, |y| [y[0], y[1], y[2], y[4]])
        }
        Representation::Multipliers => {
            let s = match initial {
                InitialState::Multipliers(s) => *s,
                InitialState::Expectations(e) => evs_to_multipliers(e, p)?,
            };
            s.validate()?;
            let k = frozen_k_nl(&s, p)?;
            let flow = MultiplierFlow { params: *p, k_nl: k };
            section(&flow, s.to_array(), cfg, |y| {
                let m = MultiplierState::from_array(*y);
                let e = ExpectationState::new(k * m.lambda2, k * m.lambda1, -2.0 * k * m.lambda3, m.a, m.p_a);
                [e.x2, e.p2, e.l, e.p_a]
            })
        }
    }
}

fn section<F: Flow<5>>(
    flow: &F,
    y0: [f64; 5],
    cfg: &IntegratorConfig,
    project: impl Fn(&[f64; 5]) -> [f64; 4],
) -> Result<PoincareSection> {
    let mut out = PoincareSection::default();
    propagate(flow, y0, cfg, |span| {
        if span.y0[3] < 0.0 && span.y1[3] >= 0.0 {
            let (t, y) = refine(flow, span, cfg)?;
            out.points.push(project(&y));
            out.crossing_times.push(t);
            out.residuals.push(y[3]);
        }
        Ok(())
    })?;
    if out.is_empty() {
        return Err(Error::NoCrossings);
    }
    Ok(out)
}

/// Locates `A = 0` inside an accepted step: bisection on the Hermite
/// interpolant, then Newton corrections on states re-integrated from the
/// start of the step.
fn refine<F: Flow<5>>(flow: &F, span: &StepSpan<5>, cfg: &IntegratorConfig) -> Result<(f64, [f64; 5])> {
    let (mut lo, mut hi) = (span.t0, span.t1);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if span.hermite(mid)[3] < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * span.t1.abs().max(1.0) {
            break;
        }
    }
    let settings = crate::dynamics::SolverSettings { dt_init: span.t1 - span.t0, ..cfg.solver_settings() };
    let state_at = |t: f64| -> Result<[f64; 5]> {
        if t <= span.t0 {
            return Ok(span.y0);
        }
        let mut s = Solver::new(flow, span.t0, span.y0, settings);
        s.advance_to(t)?;
        Ok(*s.state())
    };
    let mut t = 0.5 * (lo + hi);
    let mut y = state_at(t)?;
    for _ in 0..MAX_REFINEMENTS {
        if y[3].abs() <= CROSSING_TOL {
            break;
        }
        let rate = flow.eval(&y)[3];
        if !(rate > 0.0) {
            break;
        }
        t = (t - y[3] / rate).max(span.t0);
        y = state_at(t)?;
    }
    Ok((t, y))
}
