//! Vector fields of the three dynamical representations.

use crate::algebra::{ExpectationState, Mode, ModelParams, MultiplierState};

/// An autonomous vector field on `R^N`.
pub trait Flow<const N: usize>: Sync {
    fn eval(&self, y: &[f64; N]) -> [f64; N];

    /// Per-component factors converting state errors into the units in which
    /// tolerances are specified.
    fn error_weights(&self) -> [f64; N] {
        [1.0; N]
    }
}

/// Closed multiplier system. `k_nl = T(I_λ)/I_λ` is a constant of the motion
/// and is frozen from the initial state.
pub fn rhs_multipliers(s: &MultiplierState, p: &ModelParams, k_nl: f64) -> [f64; 5] {
    let w2 = p.omega_sq(s.a);
    [
        2.0 * p.m_q * w2 * s.lambda3,
        -2.0 / p.m_q * s.lambda3,
        -s.lambda1 / p.m_q + p.m_q * w2 * s.lambda2,
        s.p_a / p.m_cl,
        -p.e * p.e * p.m_q * s.a * k_nl * s.lambda2,
    ]
}

/// Second-moment equations. Both statistics share the same functional form;
/// `mode` only restricts the admissible initial `I`.
pub fn rhs_expectations(e: &ExpectationState, p: &ModelParams, _mode: Mode) -> [f64; 5] {
    let w2 = p.omega_sq(e.a);
    [
        e.l / p.m_q,
        -p.m_q * w2 * e.l,
        2.0 * e.p2 / p.m_q - 2.0 * p.m_q * w2 * e.x2,
        e.p_a / p.m_cl,
        -p.e * p.e * p.m_q * e.a * e.x2,
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct MultiplierFlow {
    pub params: ModelParams,
    pub k_nl: f64,
}

impl Flow<5> for MultiplierFlow {
    #[inline]
    fn eval(&self, y: &[f64; 5]) -> [f64; 5] {
        rhs_multipliers(&MultiplierState::from_array(*y), &self.params, self.k_nl)
    }

    /// Errors are measured on the moments `(k·λ₁, k·λ₂, 2k·λ₃)` they induce.
    fn error_weights(&self) -> [f64; 5] {
        let k = self.k_nl;
        [k, k, 2.0 * k, 1.0, 1.0]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExpectationFlow {
    pub params: ModelParams,
    pub mode: Mode,
}

impl Flow<5> for ExpectationFlow {
    #[inline]
    fn eval(&self, y: &[f64; 5]) -> [f64; 5] {
        rhs_expectations(&ExpectationState::from_array(*y), &self.params, self.mode)
    }
}

/// Fully classical point dynamics `(x, p, A, P_A)` of the same Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct PointFlow {
    pub params: ModelParams,
}

impl Flow<4> for PointFlow {
    #[inline]
    fn eval(&self, y: &[f64; 4]) -> [f64; 4] {
        let p = &self.params;
        let [x, px, a, pa] = *y;
        [
            px / p.m_q,
            -p.m_q * p.omega_sq(a) * x,
            pa / p.m_cl,
            -p.e * p.e * p.m_q * a * x * x,
        ]
    }
}

/// The same field with time running backwards.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<F>(pub F);

impl<const N: usize, F: Flow<N>> Flow<N> for Reversed<F> {
    #[inline]
    fn eval(&self, y: &[f64; N]) -> [f64; N] {
        self.0.eval(y).map(|v| -v)
    }

    fn error_weights(&self) -> [f64; N] {
        self.0.error_weights()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{multipliers_to_evs, t_of_ilambda};

    #[test]
    fn decoupled_classical_pair_is_free() {
        let p = ModelParams { e: 0.0, ..Default::default() };
        let d = rhs_multipliers(&MultiplierState::new(1.3, 0.4, 0.2, 3.0, -1.5), &p, 0.7);
        assert_eq!(d[3], -1.5);
        assert_eq!(d[4], 0.0);
        let d = rhs_expectations(&ExpectationState::new(1.3, 0.4, 0.2, 3.0, -1.5), &p, Mode::Quantum);
        assert_eq!((d[3], d[4]), (-1.5, 0.0));
    }

    #[test]
    fn harmonic_fixed_point() {
        let p = ModelParams::default();
        let d = rhs_multipliers(&MultiplierState::new(1.0, 1.0, 0.0, 0.0, 0.0), &p, 0.3);
        assert_eq!(d, [0.0; 5]);
    }

    #[test]
    fn chain_rule_maps_multiplier_field_onto_moment_field() {
        let p = ModelParams { m_q: 1.7, m_cl: 0.6, omega_q: 0.9, e: 1.3, hbar: 0.8 };
        let s = MultiplierState::new(2.0, 0.7, -0.4, 0.35, -0.8);
        let il = (s.determinant()).sqrt();
        let k = t_of_ilambda(il, p.hbar).unwrap() / il;
        let ds = rhs_multipliers(&s, &p, k);
        let ev = multipliers_to_evs(&s, &p).unwrap();
        let de = rhs_expectations(&ev, &p, Mode::Quantum);
        // x2 = kλ₂, p2 = kλ₁, L = -2kλ₃ with k constant
        let mapped = [k * ds[1], k * ds[0], -2.0 * k * ds[2], ds[3], ds[4]];
        for (a, b) in mapped.iter().zip(de.iter()) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn reversed_negates() {
        let f = PointFlow { params: ModelParams::default() };
        let y = [0.3, -0.2, 1.0, 0.5];
        let a = f.eval(&y);
        let b = Reversed(f).eval(&y);
        for i in 0..4 {
            assert_eq!(a[i], -b[i]);
        }
    }
}
