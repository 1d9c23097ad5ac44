//! Closed-form algebra of the MaxEnt statistical operator
//! `ρ = exp(-(λ₀ + λ₁x̂² + λ₂p̂² + λ₃L̂))` with `L̂ = x̂p̂ + p̂x̂`.
//!
//! Everything here is a pure function of value inputs. Expressions in the
//! dimensionless combination `z = ħ·I_λ` go through `exp_m1`/`ln_1p`/`tanh`
//! forms so that neither the pure limit (`z → ∞`) nor the mixed limit
//! (`z → 0`) overflows or cancels.

use crate::error::{Error, Result};

/// Relative threshold on `I - ħ²/4` below which the pure limit is considered reached.
pub const EPS_PURE: f64 = 1e-12;

/// Above this value of `ħ·I_λ` the asymptotic (ground-state) branches are used.
pub const ASYMPTOTIC_Z: f64 = 700.0;

/// Physical constants of the semiquantum Hamiltonian
/// `H = ½(p̂²/m_q + P_A²/m_cl + m_q(ω_q² + e²A²)x̂²)` plus `ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub m_q: f64,
    pub m_cl: f64,
    pub omega_q: f64,
    pub e: f64,
    pub hbar: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            m_q: 1.0,
            m_cl: 1.0,
            omega_q: 1.0,
            e: 1.0,
            hbar: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(m_q: f64, m_cl: f64, omega_q: f64, e: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            m_q,
            m_cl,
            omega_q,
            e,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.m_q > 0.0, "m_q > 0"),
            (self.m_cl > 0.0, "m_cl > 0"),
            (self.omega_q > 0.0, "omega_q > 0"),
            (self.e >= 0.0, "e >= 0"),
            (self.hbar >= 0.0, "hbar >= 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::Validation(format!("model parameters violate {what}")));
            }
        }
        let all_finite = [self.m_q, self.m_cl, self.omega_q, self.e, self.hbar]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Validation("model parameters must be finite".into()));
        }
        Ok(())
    }

    /// `ω² = ω_q² + e²A²`.
    #[inline]
    pub fn omega_sq(&self, a: f64) -> f64 {
        self.omega_q * self.omega_q + self.e * self.e * a * a
    }

    /// Lower bound on `I` imposed by the uncertainty principle.
    #[inline]
    pub fn i_min(&self) -> f64 {
        0.25 * self.hbar * self.hbar
    }
}

/// Which statistics a set of second moments obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `I ≥ ħ²/4`.
    Quantum,
    /// `I_cl ≥ 0`, `L = 2xp`.
    Classical,
}

/// `(λ₁, λ₂, λ₃, A, P_A)`: the phase point of the closed multiplier system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierState {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub a: f64,
    pub p_a: f64,
}

impl MultiplierState {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, a: f64, p_a: f64) -> Self {
        Self {
            lambda1,
            lambda2,
            lambda3,
            a,
            p_a,
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.lambda1, self.lambda2, self.lambda3, self.a, self.p_a]
    }

    pub fn from_array(y: [f64; 5]) -> Self {
        Self::new(y[0], y[1], y[2], y[3], y[4])
    }

    /// `λ₁λ₂ - λ₃²`, the square of `I_λ`.
    #[inline]
    pub fn determinant(&self) -> f64 {
        self.lambda1.mul_add(self.lambda2, -self.lambda3 * self.lambda3)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) {
            return Err(Error::Domain(format!(
                "multipliers must satisfy lambda1 > 0 and lambda2 > 0 (got {}, {})",
                self.lambda1, self.lambda2
            )));
        }
        if !(self.determinant() > 0.0) {
            return Err(Error::Domain(format!(
                "lambda1*lambda2 - lambda3^2 must be positive (got {:e})",
                self.determinant()
            )));
        }
        Ok(())
    }
}

/// `(⟨x̂²⟩, ⟨p̂²⟩, ⟨L̂⟩, A, P_A)`: expectation-value representation of the same phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationState {
    pub x2: f64,
    pub p2: f64,
    pub l: f64,
    pub a: f64,
    pub p_a: f64,
}

impl ExpectationState {
    pub fn new(x2: f64, p2: f64, l: f64, a: f64, p_a: f64) -> Self {
        Self { x2, p2, l, a, p_a }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x2, self.p2, self.l, self.a, self.p_a]
    }

    pub fn from_array(y: [f64; 5]) -> Self {
        Self::new(y[0], y[1], y[2], y[3], y[4])
    }

    /// Checks the admissibility constraint of the given statistics.
    pub fn validate(&self, p: &ModelParams, mode: Mode) -> Result<()> {
        if !(self.x2 >= 0.0 && self.p2 >= 0.0) || !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "second moments must be finite and non-negative (x2 = {}, p2 = {})",
                self.x2, self.p2
            )));
        }
        let i = invariant_i(self);
        match mode {
            Mode::Quantum => {
                // Rounding at the exact ground state must not reject it.
                let floor = p.i_min() * (1.0 - 1e-12);
                if i < floor {
                    return Err(Error::Domain(format!(
                        "uncertainty relation violated: I = {i:e} < hbar^2/4 = {:e}",
                        p.i_min()
                    )));
                }
            }
            Mode::Classical => {
                let scale = self.x2 * self.p2;
                if i < -1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Domain(format!("classical I_cl = {i:e} is negative")));
                }
            }
        }
        Ok(())
    }
}

/// All conserved or derived scalars of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSet {
    pub i_uncert: f64,
    /// `+∞` at the pure (quantum) or delta (classical) limit.
    pub i_lambda: f64,
    pub energy: f64,
    pub e_r: f64,
    pub t_val: f64,
    pub lambda0: f64,
    pub entropy: f64,
}

impl InvariantSet {
    pub fn of_multipliers(s: &MultiplierState, p: &ModelParams) -> Result<Self> {
        let il = i_lambda(s)?;
        Self::of_multipliers_with_k(s, p, t_of_ilambda(il, p.hbar)? / il)
    }

    /// As [`of_multipliers`](Self::of_multipliers), but with the moments taken
    /// through a fixed map `x2 = kλ₂, p2 = kλ₁, L = -2kλ₃`. Along a trajectory
    /// with frozen `k_nl` this measures `I` and `E` of the moments actually
    /// produced by the integration.
    pub fn of_multipliers_with_k(s: &MultiplierState, p: &ModelParams, k: f64) -> Result<Self> {
        let il = i_lambda(s)?;
        let ev = ExpectationState::new(k * s.lambda2, k * s.lambda1, -2.0 * k * s.lambda3, s.a, s.p_a);
        let t_val = t_of_ilambda(il, p.hbar)?;
        let i_uncert = invariant_i(&ev);
        let energy = energy(&ev, p);
        let (lambda0, entropy) = if p.hbar > 0.0 {
            (lambda0(il, p.hbar)?, entropy(s, p)?)
        } else {
            let l0 = (std::f64::consts::PI / il).ln();
            (l0, l0 + 1.0)
        };
        Ok(Self {
            i_uncert,
            i_lambda: il,
            energy,
            e_r: relative_energy(energy, i_uncert, p.omega_q).unwrap_or(f64::INFINITY),
            t_val,
            lambda0,
            entropy,
        })
    }

    /// Invariants of an expectation-value state. Limit cases are reported with
    /// infinite `I_λ` instead of an error.
    pub fn of_expectations(e: &ExpectationState, p: &ModelParams, mode: Mode) -> Self {
        let i_uncert = invariant_i(e);
        let energy = energy(e, p);
        let e_r = relative_energy(energy, i_uncert, p.omega_q).unwrap_or(f64::INFINITY);
        let t_val = i_uncert.max(0.0).sqrt();
        let quantum = mode == Mode::Quantum && p.hbar > 0.0;
        let (i_lambda, lambda0, entropy) = if quantum {
            match ilambda_from_i(i_uncert, p.hbar) {
                Ok(il) => {
                    let z = p.hbar * il;
                    (il, lambda0_of_z(z), entropy_of_z(z))
                }
                Err(_) => (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            }
        } else if i_uncert > 0.0 {
            let il = 0.5 / t_val;
            let l0 = (std::f64::consts::PI / il).ln();
            (il, l0, l0 + 1.0)
        } else {
            (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        Self {
            i_uncert,
            i_lambda,
            energy,
            e_r,
            t_val,
            lambda0,
            entropy,
        }
    }
}

/// Eigenvalue summary of `ρ` in its eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    /// Stored prefix of `p_n`; stops early once terms underflow or stop decreasing.
    pub probs: Vec<f64>,
    pub purity: f64,
    /// Entropy of the full (untruncated) geometric spectrum.
    pub spectral_entropy: f64,
    /// Probability mass not covered by `probs`.
    pub truncation_mass: f64,
}

/// `λ_V = √(λ₁λ₂) + λ₃`, `λ_T = √(λ₁λ₂) - λ₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCoeffs {
    pub lambda_v: f64,
    pub lambda_t: f64,
}

/// Multipliers of the classical phase-space density and the classical invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRelations {
    pub i_cl: f64,
    pub i_lambda_cl: f64,
    pub lambda1_cl: f64,
    pub lambda2_cl: f64,
    pub lambda3_cl: f64,
    pub lambda0_cl: f64,
}

/// `I_λ = √(λ₁λ₂ - λ₃²)`.
pub fn i_lambda(s: &MultiplierState) -> Result<f64> {
    s.validate()?;
    Ok(s.determinant().sqrt())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite (got {v})")))
    }
}

/// `T(I_λ) = (ħ/2)·coth(ħI_λ)`, with the `ħ → 0` limit `1/(2I_λ)`.
pub fn t_of_ilambda(i_lambda: f64, hbar: f64) -> Result<f64> {
    check_positive("I_lambda", i_lambda)?;
    if !(hbar >= 0.0) {
        return Err(Error::Domain(format!("hbar must be non-negative (got {hbar})")));
    }
    let z = hbar * i_lambda;
    Ok(if z == 0.0 {
        0.5 / i_lambda
    } else if z > ASYMPTOTIC_Z {
        0.5 * hbar
    } else if z <= 1.0 {
        // (1/2I_λ)·(z/tanh z) stays finite when ħ is tiny.
        0.5 / i_lambda * (z / z.tanh())
    } else {
        0.5 * hbar / z.tanh()
    })
}

/// `λ₀ = -ln(e^{ħI_λ} - e^{-ħI_λ})`, evaluated as `-z - ln(1 - e^{-2z})`.
pub fn lambda0(i_lambda: f64, hbar: f64) -> Result<f64> {
    check_positive("I_lambda", i_lambda)?;
    check_positive("hbar", hbar)?;
    Ok(lambda0_of_z(hbar * i_lambda))
}

pub(crate) fn lambda0_of_z(z: f64) -> f64 {
    if z > ASYMPTOTIC_Z {
        -z
    } else {
        -z - (-(-2.0 * z).exp_m1()).ln()
    }
}

/// `S(z) = z·coth z - ln(2 sinh z)` in the form `2z/(e^{2z}-1) - ln(1 - e^{-2z})`.
pub(crate) fn entropy_of_z(z: f64) -> f64 {
    if z > ASYMPTOTIC_Z {
        0.0
    } else {
        2.0 * z / (2.0 * z).exp_m1() - (-(-2.0 * z).exp_m1()).ln()
    }
}

/// Inverse of `I = T(I_λ)²`:
/// `I_λ = (1/2ħ)·ln((√I + ħ/2)/(√I - ħ/2))`, or `1/(2√I)` at `ħ = 0`.
pub fn ilambda_from_i(i: f64, hbar: f64) -> Result<f64> {
    if !(hbar >= 0.0) || !i.is_finite() {
        return Err(Error::Domain(format!("invalid inputs I = {i}, hbar = {hbar}")));
    }
    let i_min = 0.25 * hbar * hbar;
    let gap = i - i_min;
    let threshold = if hbar > 0.0 { EPS_PURE * i_min } else { EPS_PURE };
    if !(gap > threshold) {
        return Err(Error::PureLimit { gap, threshold });
    }
    ilambda_from_gap(i, gap, hbar)
}

/// Same as [`ilambda_from_i`] but with `I - ħ²/4` supplied separately, which
/// keeps full relative precision for states close to the ground state.
pub(crate) fn ilambda_from_gap(i: f64, gap: f64, hbar: f64) -> Result<f64> {
    let sqrt_i = i.sqrt();
    if hbar == 0.0 {
        return Ok(0.5 / sqrt_i);
    }
    // √I - ħ/2 without cancellation.
    let d = gap / (sqrt_i + 0.5 * hbar);
    Ok((hbar / d).ln_1p() / (2.0 * hbar))
}

/// `⟨x̂²⟩ = kλ₂`, `⟨p̂²⟩ = kλ₁`, `⟨L̂⟩ = -2kλ₃` with `k = T(I_λ)/I_λ`.
pub fn multipliers_to_evs(s: &MultiplierState, p: &ModelParams) -> Result<ExpectationState> {
    let il = i_lambda(s)?;
    let k = t_of_ilambda(il, p.hbar)? / il;
    Ok(ExpectationState {
        x2: k * s.lambda2,
        p2: k * s.lambda1,
        l: -2.0 * k * s.lambda3,
        a: s.a,
        p_a: s.p_a,
    })
}

/// Inverts [`multipliers_to_evs`]. Fails with [`Error::PureLimit`] when
/// `I - ħ²/4` is within `EPS_PURE` (relative) of zero.
pub fn evs_to_multipliers(e: &ExpectationState, p: &ModelParams) -> Result<MultiplierState> {
    if !(e.x2 > 0.0 && e.p2 > 0.0) {
        return Err(Error::Domain(format!(
            "x2 and p2 must be positive (got {}, {})",
            e.x2, e.p2
        )));
    }
    let i = invariant_i(e);
    let i_min = p.i_min();
    let gap = e.x2.mul_add(e.p2, -0.25f64.mul_add(e.l * e.l, i_min));
    let threshold = if p.hbar > 0.0 { EPS_PURE * i_min } else { EPS_PURE };
    if !(gap > threshold) {
        return Err(Error::PureLimit { gap, threshold });
    }
    let il = ilambda_from_gap(i, gap, p.hbar)?;
    let scale = il / i.sqrt();
    Ok(MultiplierState {
        lambda1: e.p2 * scale,
        lambda2: e.x2 * scale,
        lambda3: -0.5 * e.l * scale,
        a: e.a,
        p_a: e.p_a,
    })
}

/// `I = ⟨x̂²⟩⟨p̂²⟩ - ⟨L̂⟩²/4`. Negative values are returned as data.
#[inline]
pub fn invariant_i(e: &ExpectationState) -> f64 {
    e.x2.mul_add(e.p2, -0.25 * e.l * e.l)
}

/// `E = ⟨H⟩`.
pub fn energy(e: &ExpectationState, p: &ModelParams) -> f64 {
    0.5 * (e.p2 / p.m_q + e.p_a * e.p_a / p.m_cl + p.m_q * p.omega_sq(e.a) * e.x2)
}

/// `E_r = |E| / (√I·ω_q)`.
pub fn relative_energy(energy: f64, i: f64, omega_q: f64) -> Result<f64> {
    if !(i > 0.0) {
        return Err(Error::Domain(format!("relative energy needs I > 0 (got {i})")));
    }
    check_positive("omega_q", omega_q)?;
    Ok(energy.abs() / (i.sqrt() * omega_q))
}

/// `S = λ₀ + Σ λᵢ⟨Ôᵢ⟩ = λ₀ + 2I_λ·T(I_λ)`.
///
/// Evaluated as `(λ₀ + z) + I_λ(2T - ħ)`, both brackets being small and
/// positive near the pure limit, so the result never cancels to a negative value.
pub fn entropy(s: &MultiplierState, p: &ModelParams) -> Result<f64> {
    let il = i_lambda(s)?;
    check_positive("hbar", p.hbar)?;
    Ok(entropy_of_z(p.hbar * il))
}

/// Geometric spectrum `p_n = (1 - q)qⁿ` with `q = e^{-2ħI_λ}`.
pub fn spectrum(i_lambda: f64, hbar: f64, n_max: usize) -> Result<SpectrumSummary> {
    check_positive("I_lambda", i_lambda)?;
    check_positive("hbar", hbar)?;
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let z = hbar * i_lambda;
    let one_minus_q = -(-2.0 * z).exp_m1();
    let mut probs: Vec<f64> = Vec::with_capacity(n_max.min(4096));
    for n in 0..n_max {
        let pn = one_minus_q * (-2.0 * z * n as f64).exp();
        if !(pn > 0.0) || probs.last().is_some_and(|&prev| pn >= prev) {
            break;
        }
        probs.push(pn);
    }
    let truncation_mass = (-2.0 * z * probs.len() as f64).exp();
    Ok(SpectrumSummary {
        probs,
        purity: z.tanh(),
        spectral_entropy: entropy_of_z(z),
        truncation_mass,
    })
}

pub fn transform_coeffs(s: &MultiplierState) -> Result<TransformCoeffs> {
    s.validate()?;
    let g = (s.lambda1 * s.lambda2).sqrt();
    let c = TransformCoeffs {
        lambda_v: g + s.lambda3,
        lambda_t: g - s.lambda3,
    };
    if !(c.lambda_v > 0.0 && c.lambda_t > 0.0) {
        return Err(Error::Domain(format!(
            "transform coefficients must be positive (lambda_V = {:e}, lambda_T = {:e})",
            c.lambda_v, c.lambda_t
        )));
    }
    Ok(c)
}

/// Classical MaxEnt relations: `I_λcl = 1/(2√I_cl)`, multipliers and `λ₀cl = ln(π/I_λcl)`.
pub fn classical_relations(e: &ExpectationState) -> Result<ClassicalRelations> {
    let i_cl = invariant_i(e);
    if !(i_cl > EPS_PURE) {
        return Err(Error::DeltaLimit { i_cl });
    }
    let sqrt_i = i_cl.sqrt();
    let il = 0.5 / sqrt_i;
    let scale = il / sqrt_i;
    Ok(ClassicalRelations {
        i_cl,
        i_lambda_cl: il,
        lambda1_cl: e.p2 * scale,
        lambda2_cl: e.x2 * scale,
        lambda3_cl: -0.5 * e.l * scale,
        lambda0_cl: (std::f64::consts::PI / il).ln(),
    })
}
