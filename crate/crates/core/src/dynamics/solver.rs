//! Explicit Runge-Kutta steppers: classical RK4 with a fixed step and the
//! Dormand-Prince 5(4) pair with local extrapolation and FSAL reuse.

use super::rhs::Flow;
use crate::error::{Error, Result};

/// Adaptive steps smaller than this abort the integration.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4",
            Method::Rk45Adaptive => "rk45",
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Endpoint data of one accepted step, enough for cubic Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct StepSpan<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> StepSpan<N> {
    /// Cubic Hermite interpolant at time `t ∈ [t0, t1]`.
    pub fn hermite(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        std::array::from_fn(|i| h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i])
    }

    /// Time derivative of the Hermite interpolant.
    pub fn hermite_derivative(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        std::array::from_fn(|i| d00 * self.y0[i] + d10 * self.f0[i] + d01 * self.y1[i] + d11 * self.f1[i])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
}

/// Incremental integrator holding `(t, y, f(y))` and the current step size.
pub struct Solver<'a, F, const N: usize> {
    flow: &'a F,
    settings: SolverSettings,
    weights: [f64; N],
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    accepted: usize,
    evaluations: usize,
}

impl<'a, F: Flow<N>, const N: usize> Solver<'a, F, N> {
    pub fn new(flow: &'a F, t0: f64, y0: [f64; N], settings: SolverSettings) -> Self {
        let f = flow.eval(&y0);
        Self {
            flow,
            settings,
            weights: flow.error_weights(),
            t: t0,
            y: y0,
            f,
            h: settings.dt_init,
            accepted: 0,
            evaluations: 1,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn derivative(&self) -> &[f64; N] {
        &self.f
    }

    /// Current (next trial) step size.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Replaces the current state (used for renormalization); keeps the step size.
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.f = self.flow.eval(&y);
        self.evaluations += 1;
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<StepSpan<N>> {
        let remaining = t_limit - self.t;
        if remaining <= 0.0 {
            return Err(Error::Domain(format!("step target {t_limit} is not ahead of t = {}", self.t)));
        }
        let span = match self.settings.method {
            Method::Rk4Fixed => self.step_rk4(remaining),
            Method::Rk45Adaptive => self.step_dp45(remaining)?,
        };
        if !span.y1.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { t: span.t1 });
        }
        self.accepted += 1;
        Ok(span)
    }

    /// Integrates up to exactly `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            self.step(t_target)?;
        }
        Ok(())
    }

    fn finish(&mut self, h: f64, last: bool, t_limit_remaining: f64, y1: [f64; N], f1: [f64; N]) -> StepSpan<N> {
        let span = StepSpan {
            t0: self.t,
            y0: self.y,
            f0: self.f,
            t1: if last { self.t + t_limit_remaining } else { self.t + h },
            y1,
            f1,
        };
        self.t = span.t1;
        self.y = y1;
        self.f = f1;
        span
    }

    fn step_rk4(&mut self, remaining: f64) -> StepSpan<N> {
        let nominal = self.settings.dt_init;
        // Absorb a final sliver into the last step instead of taking a tiny one.
        let last = remaining <= nominal * (1.0 + 1e-9);
        let h = if last { remaining } else { nominal };
        let y = &self.y;
        let k1 = self.f;
        let k2 = self.flow.eval(&axpy(y, 0.5 * h, &[(1.0, &k1)]));
        let k3 = self.flow.eval(&axpy(y, 0.5 * h, &[(1.0, &k2)]));
        let k4 = self.flow.eval(&axpy(y, h, &[(1.0, &k3)]));
        let y1 = axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
        let f1 = self.flow.eval(&y1);
        self.evaluations += 4;
        self.finish(h, last, remaining, y1, f1)
    }

    fn step_dp45(&mut self, remaining: f64) -> Result<StepSpan<N>> {
        let SolverSettings { rel_tol, abs_tol, .. } = self.settings;
        loop {
            let last = self.h >= remaining * (1.0 - 1e-12);
            let h = if last { remaining } else { self.h };
            let y = &self.y;
            let k1 = self.f;
            let k2 = self.flow.eval(&axpy(y, h, &[(A21, &k1)]));
            let k3 = self.flow.eval(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = self.flow.eval(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = self.flow.eval(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = self
                .flow
                .eval(&axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y1 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = self.flow.eval(&y1);
            self.evaluations += 6;

            // Max norm over components, measured in the field's physical units.
            let mut err = 0.0f64;
            for i in 0..N {
                let w = self.weights[i];
                let e = w * h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = abs_tol + rel_tol * w * y[i].abs().max(y1[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                self.h = 0.25 * h;
            } else if err <= 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the nominal step when this one was shortened to hit the target.
                self.h = if last { self.h.max(h * fac) } else { h * fac };
                return Ok(self.finish(h, last, remaining, y1, k7));
            } else {
                self.h = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
            if self.h < MIN_STEP {
                return Err(Error::StepUnderflow { t: self.t, dt: self.h });
            }
        }
    }
}
