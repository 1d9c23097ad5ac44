//! Chaos quantifiers: maximal Lyapunov exponent, Poincaré sections and
//! relative-energy regime sweeps.

pub mod lyapunov;
pub mod poincare;
pub mod sweep;

pub use lyapunov::{lyapunov_max, perturbation_direction, LyapunovParams, LyapunovResult};
pub use poincare::{poincare, PoincareSection, CROSSING_TOL};
pub use sweep::{regime_sweep, RegimeLabel, RegimeSweep, RegimeThresholds, SweepOutcome, SweepPoint, SweepSettings};
