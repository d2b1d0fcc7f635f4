//! Waveguide transmission, pulse filtering, and finite-pulse gate
//! fidelities for the atom-cavity system.
//!
//! The single-mode (chiral) transmission coefficient is
//!
//! ```text
//! t(Δ_ap, Δ_cp) = [κ_i + iΔ_cp + g²/(iΔ_ap+γ) − κ_ex]
//!               / [κ_i + iΔ_cp + g²/(iΔ_ap+γ) + κ_ex]
//! ```
//!
//! where Δ_ap (Δ_cp) is the atom (cavity) detuning from the probe. A pulse
//! is filtered either by multiplying its spectrum with t(ω) — valid because
//! the equations of motion are linear — or by integrating those equations
//! in time; the two routes must agree and both are exposed.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::trapz;
use crate::mode::ModeShape;
use crate::ode::{integrate, Tolerances};
use crate::params::CavityParams;
use crate::C64;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Spectral energy fraction allowed above one eighth of Nyquist before the
/// grid is deemed too coarse for filtering.
const BANDWIDTH_LEAK_TOL: f64 = 1e-8;

/// Complex transmission coefficient for a probe with atom detuning
/// `delta_ap` and cavity detuning `delta_cp`. `atom_coupled = false` takes
/// g → 0 (atom in the uncoupled state or absent).
pub fn transmission(
    params: &CavityParams,
    delta_ap: f64,
    delta_cp: f64,
    atom_coupled: bool,
) -> C64 {
    let g2 = if atom_coupled { params.g * params.g } else { 0.0 };
    let core = C64::new(params.kappa_i, delta_cp) + g2 / C64::new(params.gamma, delta_ap);
    (core - params.kappa_ex) / (core + params.kappa_ex)
}

/// Sampled transmission over a frequency grid (rad/ns; a probe component at
/// offset ω from the common atom-cavity resonance sees t(ω, ω)).
#[derive(Debug, Clone)]
pub struct FilterSpectrum {
    pub omega: Vec<f64>,
    pub t: Vec<C64>,
}

/// Evaluate t on a frequency grid, with both detunings following the probe
/// offset (photon carrier on the common atom-cavity resonance).
pub fn transmission_spectrum(
    params: &CavityParams,
    omega: &[f64],
    atom_coupled: bool,
) -> FilterSpectrum {
    let t = omega.iter().map(|&w| transmission(params, w, w, atom_coupled)).collect();
    FilterSpectrum { omega: omega.into(), t }
}

/// Filter a resonant-carrier pulse through the cavity in the frequency
/// domain: zero-pad by at least 4×, multiply each spectral bin by t, and
/// transform back. The grid must resolve the pulse bandwidth with at least
/// an 8× Nyquist margin or a bandwidth error is returned.
pub fn filter_pulse(
    params: &CavityParams,
    a_in: &[C64],
    dt: f64,
    atom_coupled: bool,
) -> Result<Vec<C64>> {
    if a_in.len() < 8 {
        return Err(Error::Bandwidth("input needs at least 8 samples".into()));
    }
    let n = a_in.len();
    let padded_len = fft::next_pow2(4 * n);
    let mut buf = vec![C64::new(0.0, 0.0); padded_len];
    buf[..n].copy_from_slice(a_in);
    fft::forward(&mut buf)?;

    // Nyquist-margin check: spectral energy above ν_nyq/8 must be noise.
    let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
    if total > 0.0 {
        let nyq = PI / dt;
        let mut high = 0.0;
        for (k, v) in buf.iter().enumerate() {
            if fft::bin_frequency(k, padded_len, dt).abs() > nyq / 8.0 {
                high += v.norm_sqr();
            }
        }
        if high / total > BANDWIDTH_LEAK_TOL {
            return Err(Error::Bandwidth(format!(
                "spectral energy fraction {:.2e} above one eighth of Nyquist; refine the grid",
                high / total
            )));
        }
    }

    for (k, v) in buf.iter_mut().enumerate() {
        let w = fft::bin_frequency(k, padded_len, dt);
        *v *= transmission(params, w, w, atom_coupled);
    }
    fft::inverse(&mut buf)?;
    buf.truncate(n);
    Ok(buf)
}

/// Filter the same pulse by integrating the driven mode equations
/// ċ_g = −κc_g − ig·c_e − √(2κ_ex)a_in, ċ_e = −γc_e − ig·c_g in time
/// (resonant carrier). Cross-validates [`filter_pulse`].
pub fn filter_pulse_ode(
    params: &CavityParams,
    a_in: &[C64],
    dt: f64,
    atom_coupled: bool,
    tol: Tolerances,
) -> Result<Vec<C64>> {
    let n = a_in.len();
    if n < 2 {
        return Err(Error::Bandwidth("input needs at least 2 samples".into()));
    }
    let g = if atom_coupled { params.g } else { 0.0 };
    let kappa = params.kappa();
    let gamma = params.gamma;
    let drive = (2.0 * params.kappa_ex).sqrt();
    let input = |t: f64| {
        let x = (t / dt).clamp(0.0, (n - 1) as f64);
        let k = (x as usize).min(n - 2);
        let frac = x - k as f64;
        a_in[k] * (1.0 - frac) + a_in[k + 1] * frac
    };
    let rhs = |t: f64, y: &[C64; 2]| {
        let ig = C64::new(0.0, g);
        [-kappa * y[0] - ig * y[1] - drive * input(t), -gamma * y[1] - ig * y[0]]
    };
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let span = (n - 1) as f64 * dt;
    let sol = integrate(rhs, [C64::new(0.0, 0.0); 2], 0.0, span, &times, tol)?;
    Ok(sol.iter().zip(&times).map(|(y, &t)| input(t) + drive * y[0]).collect())
}

/// Closed-form fidelities of a sine-squared pulse of duration T crossing
/// the cavity, for the empty cavity (`f1`) and the atom-coupled cavity
/// (`f2`), with F = |∫a_out·a_in* dt|². `err1`/`err2` are the 1 − √F
/// deficits; the expansion is trustworthy while they stay below ~0.05.
#[derive(Debug, Clone, Copy)]
pub struct PulseFidelities {
    pub f1: f64,
    pub f2: f64,
    pub err1: f64,
    pub err2: f64,
}

/// Adiabatic-expansion fidelities for a sine-squared probe of duration T:
/// 1−√F₁ = 2κ_i/κ + (8π²/3)(1−κ_i/κ)(κT)⁻² and
/// 1−√F₂ = (κ_ex/κ)[C⁻¹ + (8π²/3)(κ/g)²(gT)⁻²].
pub fn analytic_pulse_fidelities(params: &CavityParams, duration: f64) -> PulseFidelities {
    let kappa = params.kappa();
    let ki_frac = params.kappa_i / kappa;
    let disp = 8.0 * PI * PI / 3.0;
    let err1 = 2.0 * ki_frac + disp * (1.0 - ki_frac) / (kappa * duration).powi(2);
    let err2 = (params.kappa_ex / kappa)
        * (1.0 / params.cooperativity()
            + disp * (kappa / params.g).powi(2) / (params.g * duration).powi(2));
    let sqrt_f1 = (1.0 - err1).max(0.0);
    let sqrt_f2 = (1.0 - err2).max(0.0);
    PulseFidelities { f1: sqrt_f1 * sqrt_f1, f2: sqrt_f2 * sqrt_f2, err1, err2 }
}

/// Spectral weights |h̃(ω)|² of a mode on the standard analysis grid
/// (2¹⁶ bins spanning ±64π/T), normalized to Σw = 1.
fn spectral_weights(mode: &ModeShape) -> (Vec<f64>, Vec<f64>) {
    let n = 1 << 16;
    let duration = mode.duration();
    let dt = duration / 64.0;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    // The mode occupies the first 65 samples of the 1024·T window.
    for (k, v) in buf.iter_mut().enumerate().take(65) {
        *v = C64::new(mode.h(k as f64 * dt), 0.0);
    }
    fft::forward(&mut buf).expect("power-of-two length");
    let mut omegas = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut total = 0.0;
    for (k, v) in buf.iter().enumerate() {
        omegas.push(fft::bin_frequency(k, n, dt));
        let w = v.norm_sqr();
        weights.push(w);
        total += w;
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    (omegas, weights)
}

/// Fidelity of the atom-photon entangled state prepared by the
/// controlled-phase interaction on |+⟩_a|+⟩_p, with the h polarization
/// filtered by the cavity and the v polarization passing ideally:
/// F_en = |(2 + o_g − o_s)/4|² with o_g (o_s) the amplitude overlap of the
/// filtered h photon with its input mode for the coupled (uncoupled) atom.
pub fn entangling_fidelity(params: &CavityParams, mode: &ModeShape) -> f64 {
    let (omegas, weights) = spectral_weights(mode);
    let mut o_g = C64::new(0.0, 0.0);
    let mut o_s = C64::new(0.0, 0.0);
    for (w, &weight) in omegas.iter().zip(&weights) {
        o_g += weight * transmission(params, *w, *w, true);
        o_s += weight * transmission(params, *w, *w, false);
    }
    ((2.0 + o_g - o_s) / 4.0).norm_sqr()
}

/// Probability that the controlled-phase detection circuit (atom prepared
/// in |0⟩, Hadamard, conditional cavity filter, Hadamard, Z measurement)
/// reports |1⟩ given one incident photon in `mode`:
/// η_d = ¼·∫|ψ_g(t) − ψ_s(t)|²dt over the filtered waveforms. A vacuum
/// input leaves the atom in |0⟩ with certainty by construction.
pub fn detection_efficiency(params: &CavityParams, mode: &ModeShape) -> f64 {
    let (omegas, weights) = spectral_weights(mode);
    let mut acc = 0.0;
    for (w, &weight) in omegas.iter().zip(&weights) {
        let t_g = transmission(params, *w, *w, true);
        let t_s = transmission(params, *w, *w, false);
        acc += weight * (t_g - t_s).norm_sqr();
    }
    acc / 4.0
}

/// Steady-state outputs of the non-chiral cavity driven through both
/// circulating modes, with coupling phase φ (g = |g|e^{iφ}).
///
/// For zero backscattering the closed form
/// c_{g,a} = −(√(2κ_ex)/κ)·[(1+C)a_in − C·e^{−2iφ}b_in]/(1+2C) (and its
/// mirror image for c_{g,b}) applies; with backscattering h ≠ 0 the full
/// three-mode linear system is solved instead.
pub fn nonchiral_outputs(
    params: &CavityParams,
    phi: f64,
    a_in: C64,
    b_in: C64,
) -> (C64, C64) {
    let drive = (2.0 * params.kappa_ex).sqrt();
    if params.backscatter_h == 0.0 {
        let c = params.cooperativity();
        let kappa = params.kappa();
        let denom = 1.0 + 2.0 * c;
        let phase = C64::from_polar(1.0, -2.0 * phi);
        let c_ga = -(drive / kappa) * ((1.0 + c) * a_in - c * phase * b_in) / denom;
        let c_gb = -(drive / kappa) * ((1.0 + c) * b_in - c * phase.conj() * a_in) / denom;
        (a_in + drive * c_ga, b_in + drive * c_gb)
    } else {
        let (c_ga, c_gb) = nonchiral_steady_state(params, phi, a_in, b_in);
        (a_in + drive * c_ga, b_in + drive * c_gb)
    }
}

/// Resonant steady state of the two circulating modes plus atom:
/// 0 = −κ·c_{g,a} − ih·c_{g,b} − ige^{−iφ}·c_e − √(2κ_ex)a_in,
/// 0 = −κ·c_{g,b} − ih·c_{g,a} − ige^{iφ}·c_e − √(2κ_ex)b_in,
/// 0 = −γ·c_e − ige^{iφ}·c_{g,a} − ige^{−iφ}·c_{g,b}.
fn nonchiral_steady_state(
    params: &CavityParams,
    phi: f64,
    a_in: C64,
    b_in: C64,
) -> (C64, C64) {
    let kappa = C64::new(params.kappa(), 0.0);
    let ih = C64::new(0.0, params.backscatter_h);
    let ig_p = C64::new(0.0, params.g) * C64::from_polar(1.0, phi);
    let ig_m = C64::new(0.0, params.g) * C64::from_polar(1.0, -phi);
    let drive = (2.0 * params.kappa_ex).sqrt();
    // Eliminate c_e = −(ig_p·c_ga + ig_m·c_gb)/γ.
    let gamma = C64::new(params.gamma, 0.0);
    let maa = kappa - ig_m * ig_p / gamma;
    let mab = ih - ig_m * ig_m / gamma;
    let mba = ih - ig_p * ig_p / gamma;
    let mbb = kappa - ig_p * ig_m / gamma;
    let det = maa * mbb - mab * mba;
    let rhs_a = -drive * a_in;
    let rhs_b = -drive * b_in;
    let c_ga = (rhs_a * mbb - mab * rhs_b) / det;
    let c_gb = (maa * rhs_b - rhs_a * mba) / det;
    (c_ga, c_gb)
}

/// Fidelity-style overlap |∫a_out·a_in* dt|² of a filtered pulse with its
/// input, the quantity the analytic F₁/F₂ expressions approximate.
pub fn overlap_fidelity(a_in: &[C64], a_out: &[C64], dt: f64) -> f64 {
    let re: Vec<f64> = a_in.iter().zip(a_out).map(|(i, o)| (o * i.conj()).re).collect();
    let im: Vec<f64> = a_in.iter().zip(a_out).map(|(i, o)| (o * i.conj()).im).collect();
    let re = trapz(&re, dt);
    let im = trapz(&im, dt);
    re * re + im * im
}
