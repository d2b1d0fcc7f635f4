//! Active and passive multiplexing analysis.
//!
//! With independent per-cavity occupation probability p, the number of
//! cavities that maximizes the probability of exactly one active cavity is
//! Ñ = −1/ln(1−p); the realized optimum is an integer neighbor of Ñ. A
//! passive N-cavity chain costs roughly N·κ_i/κ_ex of photon efficiency.

use crate::error::{Error, Result};
use crate::params::CavityParams;
use alloc::format;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Summary of a multiplexing design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplexPlan {
    /// Per-cavity active probability.
    pub p: f64,
    /// Real-valued optimum Ñ = −1/ln(1−p).
    pub n_real: f64,
    /// Integer cavity count maximizing the exactly-one probability.
    pub n_opt: u32,
    /// Probability of exactly one active cavity at `n_opt`.
    pub p_tilde: f64,
}

/// Probability that exactly one of `n` cavities is active: n·p·(1−p)^{n−1}.
pub fn exactly_one_prob(n: u32, p: f64) -> f64 {
    debug_assert!(n >= 1 && (0.0..1.0).contains(&p));
    n as f64 * p * (1.0 - p).powi(n as i32 - 1)
}

/// Optimal cavity count for exactly-one-active heralding: the real-valued
/// Ñ and the integer argmax among its neighbors (never below 1).
pub fn optimal_count(p: f64) -> Result<(f64, u32)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
    }
    let n_real = -1.0 / (1.0 - p).ln();
    let lo = (n_real.floor() as u32).max(1);
    let hi = (n_real.ceil() as u32).max(1);
    let n_opt = if exactly_one_prob(hi, p) > exactly_one_prob(lo, p) { hi } else { lo };
    Ok((n_real, n_opt))
}

/// Full plan at probability `p`.
///
/// ```
/// let plan = cavqed_core::multiplex::plan(0.1)?;
/// assert!((plan.n_real - 9.49).abs() < 0.01);
/// assert_eq!(plan.n_opt, 9);
/// # Ok::<(), cavqed_core::Error>(())
/// ```
pub fn plan(p: f64) -> Result<MultiplexPlan> {
    let (n_real, n_opt) = optimal_count(p)?;
    Ok(MultiplexPlan { p, n_real, n_opt, p_tilde: exactly_one_prob(n_opt, p) })
}

/// Loss of a photon crossing a chain of N inactive cavities:
/// the rough estimate N·κ_i/κ_ex and the resonant-pass value
/// 1 − |t_empty|^{2N} with t_empty = (κ_i − κ_ex)/(κ_i + κ_ex).
///
/// An inactive cavity is modeled on resonance with the traveling photon,
/// which is the worst case; callers wanting the off-resonant (lossless)
/// bound can compare against zero.
pub fn passive_chain_loss(n: u32, params: &CavityParams) -> (f64, f64) {
    let approx = n as f64 * params.kappa_i / params.kappa_ex;
    let t_empty =
        (params.kappa_i - params.kappa_ex) / (params.kappa_i + params.kappa_ex);
    let exact = 1.0 - t_empty.abs().powi(2 * n as i32);
    (approx, exact)
}
