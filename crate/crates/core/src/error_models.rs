//! Warm-atom error channels: linear coupling drift and common Doppler
//! shift.
//!
//! Both sweeps reuse the ideal control pulse (synthesized for the
//! unperturbed parameters), perturb the dynamics only, and report the
//! fidelity correction F₀ − F on a symmetric grid together with a
//! zero-constant quadratic fit c₁x + c₂x².

use crate::dynamics::{
    integrate_absorption, integrate_retrieval, retrieval_metrics, DriveSpec,
};
use crate::error::{Error, Result};
use crate::mode::ModeShape;
use crate::ode::Tolerances;
use crate::presets::Preset;
use crate::pulse::time_reverse;
use crate::synth::{case2_point, synthesize_exact};
use alloc::format;
use alloc::vec::Vec;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Which direction of the protocol a sweep perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepJob {
    /// Forward retrieval; the figure of merit is the mode-overlap fidelity.
    Retrieval,
    /// Absorption with the time-reversed pulse; figure of merit |c_s(T)|².
    Absorption,
}

/// Outcome of an error-channel sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Dimensionless abscissa (Δg/g or Δd/g).
    pub xs: Vec<f64>,
    /// F₀ − F per grid point (F₀ evaluated at x = 0).
    pub infidelity: Vec<f64>,
    /// Least-squares coefficients (c₁, c₂) of c₁x + c₂x².
    pub fit: (f64, f64),
    /// Largest absolute fit residual.
    pub residual: f64,
    /// Set when the grid leaves the stated validity window (case-2 drift
    /// beyond Δx, Doppler beyond 0.25).
    pub validity_warning: bool,
}

/// Linear drift profile g(t) = g + Δg·(t − T/2)/T.
pub fn g_drift_profile(
    g: f64,
    dg: f64,
    duration: f64,
) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |t: f64| g + dg * (t - 0.5 * duration) / duration
}

/// Drift magnitude from the transverse velocity: Δg/g = v⊥·T/λ_ev.
/// `v_perp` in m/s (≡ nm/ns), `duration` in ns, `lambda_ev` in nm.
pub fn estimate_dg_ratio(v_perp: f64, duration: f64, lambda_ev: f64) -> f64 {
    debug_assert!(v_perp >= 0.0 && duration > 0.0 && lambda_ev > 0.0);
    v_perp * duration / lambda_ev
}

/// Least-squares polynomial fit with the constant term pinned to zero
/// (the sweeps define infidelity(0) = 0 by construction). `degree` is 1 or
/// 2; returns the coefficients of x, x², … in order.
pub fn polyfit_through_origin(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if degree == 0 || degree > 2 {
        return Err(Error::Domain(format!("degree must be 1 or 2, got {degree}")));
    }
    if xs.len() != ys.len() {
        return Err(Error::GridMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < degree + 1 {
        return Err(Error::Domain("too few points for the requested degree".into()));
    }
    for (i, a) in xs.iter().enumerate() {
        for b in xs.iter().skip(i + 1) {
            if a == b {
                return Err(Error::Domain(format!("duplicate abscissa {a}")));
            }
        }
    }
    // Column scaling keeps the normal equations well conditioned when the
    // abscissa range is far from unity.
    let scale: f64 = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::FitRank);
    }
    let cols: Vec<Vec<f64>> = (1..=degree)
        .map(|p| xs.iter().map(|x| (x / scale).powi(p as i32)).collect())
        .collect();
    match degree {
        1 => {
            let sxx: f64 = cols[0].iter().map(|v| v * v).sum();
            if sxx == 0.0 {
                return Err(Error::FitRank);
            }
            let sxy: f64 = cols[0].iter().zip(ys).map(|(v, y)| v * y).sum();
            Ok(alloc::vec![sxy / sxx / scale])
        }
        _ => {
            let a11: f64 = cols[0].iter().map(|v| v * v).sum();
            let a12: f64 = cols[0].iter().zip(&cols[1]).map(|(a, b)| a * b).sum();
            let a22: f64 = cols[1].iter().map(|v| v * v).sum();
            let b1: f64 = cols[0].iter().zip(ys).map(|(v, y)| v * y).sum();
            let b2: f64 = cols[1].iter().zip(ys).map(|(v, y)| v * y).sum();
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-14 * (a11 * a22).max(1e-300) {
                return Err(Error::FitRank);
            }
            let c1 = (b1 * a22 - a12 * b2) / det;
            let c2 = (a11 * b2 - a12 * b1) / det;
            Ok(alloc::vec![c1 / scale, c2 / (scale * scale)])
        }
    }
}

struct SweepSetup {
    preset: Preset,
    mode: ModeShape,
    grid_n: usize,
    tol: Tolerances,
}

impl SweepSetup {
    fn new(preset: &Preset, grid_n: usize, tol: Tolerances) -> Result<Self> {
        Ok(SweepSetup {
            preset: preset.clone(),
            mode: ModeShape::sine_squared(preset.t_ns)?,
            grid_n,
            tol,
        })
    }

    fn eta_target(&self) -> Result<f64> {
        self.preset.target_eta_r().ok_or_else(|| {
            Error::Preset(format!(
                "preset {} has no published infidelity to target",
                self.preset.name
            ))
        })
    }

    /// Figure of merit at one perturbation: retrieval fidelity or
    /// absorption efficiency, with the ideal pulse and perturbed dynamics.
    fn figure_of_merit(
        &self,
        job: SweepJob,
        dg_over_g: f64,
        doppler: f64,
    ) -> Result<f64> {
        let params = self.preset.params();
        let det = self.preset.detunings()?;
        let eta_r = self.eta_target()?;
        let synth = synthesize_exact(&params, &self.mode, &det, eta_r, self.grid_n)?;
        let run_det = det.doppler_shifted(doppler);
        let g = params.g;
        let duration = self.mode.duration();
        match job {
            SweepJob::Retrieval => {
                let mut drive = DriveSpec::retrieval(synth.pulse, run_det);
                if dg_over_g != 0.0 {
                    drive = drive
                        .with_coupling_profile(g_drift_profile(g, dg_over_g * g, duration));
                }
                let traj = integrate_retrieval(&params, &drive, self.tol)?;
                Ok(retrieval_metrics(&traj, &self.mode, det.delta_p)?.fidelity_f)
            }
            SweepJob::Absorption => {
                let reversed = time_reverse(&synth.pulse);
                let mut drive = DriveSpec::absorb_photon(reversed, run_det, &self.mode)?;
                if dg_over_g != 0.0 {
                    drive = drive
                        .with_coupling_profile(g_drift_profile(g, dg_over_g * g, duration));
                }
                let traj = integrate_absorption(&params, &drive, self.tol)?;
                Ok(retrieval_metrics(&traj, &self.mode, det.delta_p)?.eta_abs)
            }
        }
    }
}

fn assemble(
    xs: &[f64],
    merits: Vec<f64>,
    baseline: f64,
    validity_warning: bool,
) -> Result<SweepResult> {
    let infidelity: Vec<f64> = merits.iter().map(|f| baseline - f).collect();
    let (fit, residual) = if xs.len() >= 3 {
        let coeffs = polyfit_through_origin(xs, &infidelity, 2)?;
        let resid = xs
            .iter()
            .zip(&infidelity)
            .map(|(x, y)| (coeffs[0] * x + coeffs[1] * x * x - y).abs())
            .fold(0.0, f64::max);
        ((coeffs[0], coeffs[1]), resid)
    } else {
        ((0.0, 0.0), 0.0)
    };
    Ok(SweepResult { xs: xs.into(), infidelity, fit, residual, validity_warning })
}

/// Figure of merit at a single coupling-drift point, in the sweep's sign
/// convention: positive `x` means the coupling *decays* over the transit —
/// an atom receding from the surface with Δg/g = v⊥T/λ_ev sees
/// g(t) = g − Δg·(t − T/2)/T. Exposed so sweep points can be dispatched to
/// worker pools; [`sweep_dg`] evaluates exactly this.
pub fn drift_merit(
    preset: &Preset,
    job: SweepJob,
    x: f64,
    grid_n: usize,
    tol: Tolerances,
) -> Result<f64> {
    SweepSetup::new(preset, grid_n, tol)?.figure_of_merit(job, -x, 0.0)
}

/// Figure of merit at a single Doppler point: positive `x` = Δd/g means
/// the atomic resonances are upshifted in the lab frame, so both detunings
/// Δ₁ = ω₁−ω_es and Δ₂ = ω_c−ω_eg decrease by Δd. [`sweep_doppler`]
/// evaluates exactly this.
pub fn doppler_merit(
    preset: &Preset,
    job: SweepJob,
    x: f64,
    grid_n: usize,
    tol: Tolerances,
) -> Result<f64> {
    let g = preset.params().g;
    SweepSetup::new(preset, grid_n, tol)?.figure_of_merit(job, 0.0, -x * g)
}

/// Sweep the coupling-drift magnitude Δg/g over `grid`, with the control
/// pulse designed for Δg = 0. Case-1 presets must stay within ±0.1; case-2
/// sweeps beyond the resonance width Δx are flagged, not rejected.
/// Abscissa sign convention as in [`drift_merit`].
pub fn sweep_dg(
    preset: &Preset,
    grid: &[f64],
    job: SweepJob,
    grid_n: usize,
    tol: Tolerances,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Domain("empty sweep grid".into()));
    }
    let warning = dg_grid_validity(preset, grid)?;
    let baseline = drift_merit(preset, job, 0.0, grid_n, tol)?;
    let merits: Result<Vec<f64>> =
        grid.iter().map(|&x| drift_merit(preset, job, x, grid_n, tol)).collect();
    assemble(grid, merits?, baseline, warning)
}

/// Sweep the common Doppler shift Δd/g over `grid`: both one-photon
/// detunings move together, the two-photon detuning and the pulse stay
/// fixed. Grids beyond |Δd/g| = 0.25 are flagged.
///
/// Sign convention: positive Δd means the atomic resonances are upshifted
/// in the lab frame, so both detunings Δ₁ = ω₁−ω_es and Δ₂ = ω_c−ω_eg
/// decrease by Δd.
pub fn sweep_doppler(
    preset: &Preset,
    grid: &[f64],
    job: SweepJob,
    grid_n: usize,
    tol: Tolerances,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Domain("empty sweep grid".into()));
    }
    let warning = doppler_grid_validity(grid);
    let baseline = doppler_merit(preset, job, 0.0, grid_n, tol)?;
    let merits: Result<Vec<f64>> =
        grid.iter().map(|&x| doppler_merit(preset, job, x, grid_n, tol)).collect();
    assemble(grid, merits?, baseline, warning)
}

/// Validate a drift-sweep grid for a preset: case-1 grids beyond ±0.1 are
/// rejected, case-2 grids beyond the resonance width Δx return `true`
/// (warning). Shared by [`sweep_dg`] and external sweep drivers.
pub fn dg_grid_validity(preset: &Preset, grid: &[f64]) -> Result<bool> {
    let max_abs = grid.iter().map(|x| x.abs()).fold(0.0, f64::max);
    match preset.case {
        1 => {
            if max_abs > 0.1 + 1e-12 {
                return Err(Error::Domain(format!(
                    "case-1 drift sweeps are limited to |Δg/g| ≤ 0.1, got {max_abs}"
                )));
            }
            Ok(false)
        }
        _ => Ok(max_abs > case2_point(&preset.params())?.delta_x),
    }
}

/// Whether a Doppler grid leaves the stated ±0.25 validity window.
pub fn doppler_grid_validity(grid: &[f64]) -> bool {
    grid.iter().map(|x| x.abs()).fold(0.0, f64::max) > 0.25 + 1e-12
}

/// Symmetric grid of `n` points on [−half_width, half_width], n odd so the
/// origin is included.
pub fn symmetric_grid(half_width: f64, n: usize) -> Vec<f64> {
    let n = if n.is_multiple_of(2) { n + 1 } else { n };
    (0..n)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64)
        .collect()
}
