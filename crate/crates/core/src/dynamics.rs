//! Time integration of the driven three-level amplitude equations.
//!
//! With the |e⟩ → i|e⟩ phase convention used throughout (the same one the
//! synthesis formulas assume), the equations of motion for the amplitudes
//! of |s,0⟩, |e,0⟩, and |g,1⟩ read
//!
//! ```text
//! ċ_s = −i(Δ₁−Δ₂)·c_s − Ω*(t)·c_e
//! ċ_e = −(γ−iΔ₂)·c_e + Ω(t)·c_s + g(t)·c_g
//! ċ_g = −κ·c_g − g(t)·c_e − √(2κ_ex)·a_in(t)
//! ```
//!
//! with Ω(t) = Ω₀(t)e^{iφ₀(t)} and the input-output relation
//! a_out = a_in + √(2κ_ex)·c_g. Retrieval starts from c_s = 1 with no input
//! field; absorption starts from vacuum with a normalized input photon.
//! The sign of the drive term is fixed by requiring the norm-balance
//! identity (see [`norm_balance_defect`]) to close.

use crate::error::{Error, Result};
use crate::grid::{trapz, trapz_c, TimeGrid};
use crate::mode::ModeShape;
use crate::ode::{integrate, Tolerances};
use crate::params::{CavityParams, Detunings};
use crate::pulse::ControlPulse;
use crate::C64;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

type FieldFn = Box<dyn Fn(f64) -> C64 + Send + Sync>;
type CouplingFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Everything that drives one integration: the control pulse, an optional
/// waveguide input field, an optional time-varying coupling g(t), and the
/// detunings.
pub struct DriveSpec {
    pub pulse: ControlPulse,
    input_field: Option<FieldFn>,
    g_of_t: Option<CouplingFn>,
    pub detunings: Detunings,
}

impl DriveSpec {
    /// Retrieval drive: control pulse only, no input field.
    pub fn retrieval(pulse: ControlPulse, detunings: Detunings) -> Self {
        DriveSpec { pulse, input_field: None, g_of_t: None, detunings }
    }

    /// Absorption drive with an explicit input field a_in(t) (ns^{-1/2}).
    /// The field may carry at most one photon: ∫|a_in|²dt ≤ 1 + 10⁻⁹.
    pub fn absorption(
        pulse: ControlPulse,
        detunings: Detunings,
        input_field: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let grid = pulse.grid();
        let norm: Vec<f64> = grid.times().map(|t| input_field(t).norm_sqr()).collect();
        let total = trapz(&norm, grid.dt());
        if total > 1.0 + 1e-9 {
            return Err(Error::Domain(format!(
                "input field carries ∫|a_in|²dt = {total} > 1"
            )));
        }
        Ok(DriveSpec {
            pulse,
            input_field: Some(Box::new(input_field)),
            g_of_t: None,
            detunings,
        })
    }

    /// Absorption drive with the standard photon input a_in = h(t)e^{−iΔp t}.
    pub fn absorb_photon(pulse: ControlPulse, detunings: Detunings, mode: &ModeShape) -> Result<Self> {
        let mode = mode.clone();
        let dp = detunings.delta_p;
        Self::absorption(pulse, detunings, move |t| {
            C64::from_polar(mode.h(t), -dp * t)
        })
    }

    /// Absorption drive with the time-mirrored photon a_in = h(T−t)e^{−iΔp t},
    /// for modes without the t ↔ T−t symmetry.
    pub fn absorb_photon_mirrored(
        pulse: ControlPulse,
        detunings: Detunings,
        mode: &ModeShape,
    ) -> Result<Self> {
        let mode = mode.clone();
        let dp = detunings.delta_p;
        let duration = mode.duration();
        Self::absorption(pulse, detunings, move |t| {
            C64::from_polar(mode.h(duration - t), -dp * t)
        })
    }

    /// Override the constant coupling with g(t).
    pub fn with_coupling_profile(
        mut self,
        g_of_t: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.g_of_t = Some(Box::new(g_of_t));
        self
    }

    pub fn has_input(&self) -> bool {
        self.input_field.is_some()
    }

    fn input_at(&self, t: f64) -> C64 {
        match &self.input_field {
            Some(f) => f(t),
            None => C64::new(0.0, 0.0),
        }
    }
}

/// Time series of the three amplitudes together with the waveguide fields.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub c_s: Vec<C64>,
    pub c_e: Vec<C64>,
    pub c_g: Vec<C64>,
    pub a_in: Vec<C64>,
    pub a_out: Vec<C64>,
}

impl Trajectory {
    /// Total excitation norm |c_s|² + |c_e|² + |c_g|² at sample `k`.
    pub fn norm_at(&self, k: usize) -> f64 {
        self.c_s[k].norm_sqr() + self.c_e[k].norm_sqr() + self.c_g[k].norm_sqr()
    }
}

/// Efficiencies and fidelity of a retrieval (or absorption) run.
#[derive(Debug, Clone, Copy)]
pub struct RetrievalMetrics {
    /// ∫|a_out|² dt.
    pub eta_r: f64,
    /// ∫ h(t)e^{iΔp t} a_out(t) dt.
    pub overlap: C64,
    /// |overlap|².
    pub fidelity_f: f64,
    /// |c_s(T)|² — meaningful for absorption runs.
    pub eta_abs: f64,
}

/// Integrate a retrieval run: initial state c_s = 1, no input field.
pub fn integrate_retrieval(
    params: &CavityParams,
    drive: &DriveSpec,
    tol: Tolerances,
) -> Result<Trajectory> {
    if drive.has_input() {
        return Err(Error::Domain(
            "retrieval runs take no input field; use integrate_absorption".into(),
        ));
    }
    run(params, drive, [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], tol)
}

/// Integrate an absorption run: initial vacuum state, input field required.
pub fn integrate_absorption(
    params: &CavityParams,
    drive: &DriveSpec,
    tol: Tolerances,
) -> Result<Trajectory> {
    if !drive.has_input() {
        return Err(Error::Domain(
            "absorption runs need an input field; use integrate_retrieval".into(),
        ));
    }
    run(params, drive, [C64::new(0.0, 0.0); 3], tol)
}

fn run(
    params: &CavityParams,
    drive: &DriveSpec,
    y0: [C64; 3],
    tol: Tolerances,
) -> Result<Trajectory> {
    let grid = drive.pulse.grid().clone();
    let det = drive.detunings;
    let two_photon = det.delta1 - det.delta2;
    let e_decay = C64::new(-params.gamma, det.delta2);
    let kappa = params.kappa();
    let drive_in = (2.0 * params.kappa_ex).sqrt();
    let g_const = params.g;
    let g_fn = |t: f64| match &drive.g_of_t {
        Some(f) => f(t),
        None => g_const,
    };

    let rhs = |t: f64, y: &[C64; 3]| {
        let omega = C64::from_polar(drive.pulse.omega_at(t), drive.pulse.phi_at(t));
        let g = g_fn(t);
        let a_in = drive.input_at(t);
        let cs = y[0];
        let ce = y[1];
        let cg = y[2];
        [
            C64::new(0.0, -two_photon) * cs - omega.conj() * ce,
            e_decay * ce + omega * cs + g * cg,
            -kappa * cg - g * ce - drive_in * a_in,
        ]
    };

    let times: Vec<f64> = grid.times().collect();
    let sol = integrate(rhs, y0, 0.0, grid.duration(), &times, tol)?;

    let mut c_s = Vec::with_capacity(sol.len());
    let mut c_e = Vec::with_capacity(sol.len());
    let mut c_g = Vec::with_capacity(sol.len());
    let mut a_in = Vec::with_capacity(sol.len());
    let mut a_out = Vec::with_capacity(sol.len());
    for (k, y) in sol.iter().enumerate() {
        let inp = drive.input_at(times[k]);
        c_s.push(y[0]);
        c_e.push(y[1]);
        c_g.push(y[2]);
        a_in.push(inp);
        a_out.push(inp + drive_in * y[2]);
    }
    let traj = Trajectory { grid, c_s, c_e, c_g, a_in, a_out };
    for k in 0..traj.c_s.len() {
        let norm = traj.norm_at(k);
        if norm > 1.0 + 1e-8 {
            return Err(Error::Integrator(format!(
                "norm {norm} exceeds 1 at t = {}",
                traj.grid.t(k)
            )));
        }
    }
    Ok(traj)
}

/// Efficiency and fidelity of a trajectory against the target mode
/// h(t)e^{−iΔp t}.
pub fn retrieval_metrics(
    traj: &Trajectory,
    mode: &ModeShape,
    delta_p: f64,
) -> Result<RetrievalMetrics> {
    if (mode.duration() - traj.grid.duration()).abs() > 1e-9 * mode.duration() {
        return Err(Error::GridMismatch { left: traj.grid.len(), right: traj.grid.len() });
    }
    let dt = traj.grid.dt();
    let out_sq: Vec<f64> = traj.a_out.iter().map(|a| a.norm_sqr()).collect();
    let eta_r = trapz(&out_sq, dt);
    let weighted: Vec<C64> = traj
        .grid
        .times()
        .zip(&traj.a_out)
        .map(|(t, a)| C64::from_polar(mode.h(t), delta_p * t) * a)
        .collect();
    let overlap = trapz_c(&weighted, dt);
    let eta_abs = traj.c_s.last().map(|c| c.norm_sqr()).unwrap_or(0.0);
    Ok(RetrievalMetrics { eta_r, overlap, fidelity_f: overlap.norm_sqr(), eta_abs })
}

/// Residual of the excitation-number balance
/// norm(0) = norm(T) + 2γ∫|c_e|² + 2κ_i∫|c_g|² + ∫|a_out|² − ∫|a_in|²,
/// which every faithful integration must close to quadrature accuracy.
pub fn norm_balance_defect(params: &CavityParams, traj: &Trajectory) -> f64 {
    let dt = traj.grid.dt();
    let n = traj.c_s.len();
    let ce_sq: Vec<f64> = traj.c_e.iter().map(|c| c.norm_sqr()).collect();
    let cg_sq: Vec<f64> = traj.c_g.iter().map(|c| c.norm_sqr()).collect();
    let out_sq: Vec<f64> = traj.a_out.iter().map(|a| a.norm_sqr()).collect();
    let in_sq: Vec<f64> = traj.a_in.iter().map(|a| a.norm_sqr()).collect();
    let initial = traj.norm_at(0);
    let fin = traj.norm_at(n - 1);
    initial
        - (fin
            + 2.0 * params.gamma * trapz(&ce_sq, dt)
            + 2.0 * params.kappa_i * trapz(&cg_sq, dt)
            + trapz(&out_sq, dt)
            - trapz(&in_sq, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{ControlPulse, PulseCase, PulseMeta};

    fn lossless_params() -> CavityParams {
        CavityParams::from_paper_units(1.6, 0.9, 0.0, 0.0061).unwrap()
    }

    fn flat_pulse(duration: f64, n: usize, amp: f64) -> ControlPulse {
        let grid = TimeGrid::new(duration, n).unwrap();
        let omega0 = grid.sample(|t| {
            let s = (core::f64::consts::PI * t / duration).sin();
            amp * s * s
        });
        let phi0 = alloc::vec![0.0; n];
        ControlPulse::new(
            grid,
            omega0,
            phi0,
            PulseMeta { case: PulseCase::Exact, eta_r: 0.0, delta_p: 0.0, truncated: false },
        )
        .unwrap()
    }

    #[test]
    fn undriven_atom_only_rotates_its_phase() {
        let p = lossless_params();
        let det = Detunings { delta1: 2.0, delta2: 0.5, delta_p: 1.5 };
        let pulse = ControlPulse::zero(TimeGrid::new(3.0, 512).unwrap(), PulseCase::Exact, 1.5);
        let traj =
            integrate_retrieval(&p, &DriveSpec::retrieval(pulse, det), Tolerances::default())
                .unwrap();
        for (k, t) in traj.grid.times().enumerate() {
            let expected = C64::from_polar(1.0, -(det.delta1 - det.delta2) * t);
            assert!((traj.c_s[k] - expected).norm() < 1e-8, "t = {t}");
            assert!(traj.c_e[k].norm() < 1e-12);
            assert!(traj.c_g[k].norm() < 1e-12);
        }
        let metrics =
            retrieval_metrics(&traj, &ModeShape::sine_squared(3.0).unwrap(), 1.5).unwrap();
        assert!(metrics.eta_r < 1e-12);
    }

    #[test]
    fn decoupled_lossless_cavity_reflects_the_photon() {
        // g(t) ≡ 0 and κ_i = 0: a long resonant pulse reflects completely.
        let p = lossless_params();
        let mode = ModeShape::sine_squared(200.0).unwrap();
        let pulse =
            ControlPulse::zero(TimeGrid::new(200.0, 4096).unwrap(), PulseCase::Exact, 0.0);
        let drive = DriveSpec::absorb_photon(pulse, Detunings::default(), &mode)
            .unwrap()
            .with_coupling_profile(|_| 0.0);
        let traj = integrate_absorption(&p, &drive, Tolerances::default()).unwrap();
        let dt = traj.grid.dt();
        let in_sq: Vec<f64> = traj.a_in.iter().map(|a| a.norm_sqr()).collect();
        let out_sq: Vec<f64> = traj.a_out.iter().map(|a| a.norm_sqr()).collect();
        let diff = (trapz(&out_sq, dt) - trapz(&in_sq, dt)).abs();
        assert!(diff < 1e-6, "photon number defect {diff}");
        assert!(traj.c_s.last().unwrap().norm() < 1e-12);
        // Adiabatic empty-cavity reflection flips the sign.
        let mid = traj.grid.len() / 2;
        let ratio = traj.a_out[mid] / traj.a_in[mid];
        assert!((ratio + 1.0).norm() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn input_field_norm_is_validated() {
        let pulse = ControlPulse::zero(TimeGrid::new(1.0, 64).unwrap(), PulseCase::Exact, 0.0);
        let res = DriveSpec::absorption(pulse, Detunings::default(), |_| C64::new(2.0, 0.0));
        assert!(res.is_err());
    }

    #[test]
    fn constant_coupling_profile_is_bit_identical_to_default() {
        let p = lossless_params();
        let pulse = flat_pulse(4.0, 1024, 3.0);
        let det = Detunings::default();
        let base = integrate_retrieval(
            &p,
            &DriveSpec::retrieval(pulse.clone(), det),
            Tolerances::default(),
        )
        .unwrap();
        let g = p.g;
        let overridden = integrate_retrieval(
            &p,
            &DriveSpec::retrieval(pulse, det).with_coupling_profile(move |_| g),
            Tolerances::default(),
        )
        .unwrap();
        for k in 0..base.c_s.len() {
            assert_eq!(base.c_s[k], overridden.c_s[k]);
            assert_eq!(base.c_e[k], overridden.c_e[k]);
            assert_eq!(base.c_g[k], overridden.c_g[k]);
        }
    }

    #[test]
    fn norm_balance_closes_for_a_driven_run() {
        let p = CavityParams::from_paper_units(1.6, 0.9, 0.01, 0.0061).unwrap();
        let pulse = flat_pulse(4.0, 2048, 4.0);
        let det = Detunings::default();
        let traj =
            integrate_retrieval(&p, &DriveSpec::retrieval(pulse, det), Tolerances::default())
                .unwrap();
        let defect = norm_balance_defect(&p, &traj).abs();
        assert!(defect < 1e-6, "defect {defect}");
        // The run actually moved population.
        assert!(traj.norm_at(traj.c_s.len() - 1) < 0.99);
    }

    #[test]
    fn metrics_on_a_perfect_output() {
        // Build a fake trajectory whose output is exactly the target mode.
        let mode = ModeShape::sine_squared(2.0).unwrap();
        let grid = TimeGrid::new(2.0, 2048).unwrap();
        let dp = 0.7;
        let a_out: Vec<C64> =
            grid.times().map(|t| C64::from_polar(mode.h(t), -dp * t)).collect();
        let zeros = alloc::vec![C64::new(0.0, 0.0); grid.len()];
        let traj = Trajectory {
            grid: grid.clone(),
            c_s: zeros.clone(),
            c_e: zeros.clone(),
            c_g: zeros.clone(),
            a_in: zeros.clone(),
            a_out,
        };
        let m = retrieval_metrics(&traj, &mode, dp).unwrap();
        assert!((m.eta_r - 1.0).abs() < 1e-9);
        assert!((m.fidelity_f - 1.0).abs() < 1e-9);
        // Zero output → all zeros.
        let empty = Trajectory {
            a_out: zeros.clone(),
            ..traj
        };
        let m0 = retrieval_metrics(&empty, &mode, dp).unwrap();
        assert_eq!(m0.eta_r, 0.0);
        assert_eq!(m0.fidelity_f, 0.0);
    }

    #[test]
    fn duration_mismatch_is_an_error() {
        let mode = ModeShape::sine_squared(2.0).unwrap();
        let grid = TimeGrid::new(3.0, 64).unwrap();
        let zeros = alloc::vec![C64::new(0.0, 0.0); 64];
        let traj = Trajectory {
            grid,
            c_s: zeros.clone(),
            c_e: zeros.clone(),
            c_g: zeros.clone(),
            a_in: zeros.clone(),
            a_out: zeros,
        };
        assert!(retrieval_metrics(&traj, &mode, 0.0).is_err());
    }
}
