//! Adaptive Dormand-Prince 5(4) integration for small complex systems.
//!
//! The driven three-level amplitude equations are stiff only through the
//! cavity linewidth κ, which stays within a few hundred rad/ns for every
//! parameter set of interest, so an explicit embedded pair with PI-free step
//! control is adequate. Dense output uses the standard 5th-order
//! interpolant, so trajectories can be sampled on an arbitrary grid without
//! constraining the step sequence.

use crate::error::{Error, Result};
use crate::C64;
use alloc::format;
use alloc::vec::Vec;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// 5th-order solution weights (row 7 of `A`; the pair is FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Error weights b₅ − b₄.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrator tolerances and limits.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-9, atol: 1e-12, max_steps: 2_000_000 }
    }
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1` and return the dense
/// solution at `sample_times` (ascending, within [t0, t1]).
pub fn integrate<const N: usize>(
    rhs: impl Fn(f64, &[C64; N]) -> [C64; N],
    y0: [C64; N],
    t0: f64,
    t1: f64,
    sample_times: &[f64],
    tol: Tolerances,
) -> Result<Vec<[C64; N]>> {
    if !(t1 - t0).is_finite() || t1 <= t0 {
        return Err(Error::Integrator(format!("bad time span [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
        out.push(y0);
        next_sample += 1;
    }

    let zero = [C64::new(0.0, 0.0); N];
    let mut t = t0;
    let mut y = y0;
    let mut k: [[C64; N]; 7] = [zero; 7];
    k[0] = rhs(t, &y);
    let mut h = initial_step(span, &y, &k[0], tol);
    let mut n_steps = 0usize;

    while t < t1 {
        if n_steps >= tol.max_steps {
            return Err(Error::Integrator(format!(
                "exceeded {} steps at t = {t} (h = {h:e})",
                tol.max_steps
            )));
        }
        n_steps += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        if h <= f64::EPSILON * span {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }

        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[stage] = rhs(t + C[stage] * h, &ys);
        }
        // Stage 7 above evaluated at (t+h, y_new) because row 7 of A equals B.
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate() {
            if B[j] != 0.0 {
                for i in 0..N {
                    y_new[i] += h * B[j] * kj[i];
                }
            }
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            let r = h * e.norm() / sc;
            err_sq += r * r;
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // Accepted: emit dense output for samples inside (t, t+h].
            while next_sample < sample_times.len() && sample_times[next_sample] <= t + h {
                let ts = sample_times[next_sample];
                if ts >= t {
                    out.push(dense_eval(&y, &y_new, &k, h, (ts - t) / h));
                }
                next_sample += 1;
            }
            t += h;
            y = y_new;
            k[0] = k[6]; // FSAL
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 10.0);
            h *= fac;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }
    // Samples at exactly t1 that were not covered by the last window.
    while next_sample < sample_times.len() && sample_times[next_sample] <= t1 + 1e-12 * span {
        out.push(y);
        next_sample += 1;
    }
    if next_sample < sample_times.len() {
        return Err(Error::Integrator(format!(
            "sample time {} outside integration span",
            sample_times[next_sample]
        )));
    }
    Ok(out)
}

fn initial_step<const N: usize>(span: f64, y0: &[C64; N], f0: &[C64; N], tol: Tolerances) -> f64 {
    let d0: f64 = y0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let d1: f64 = f0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let guess = if d1 > 1e-10 { 0.01 * (d0.max(tol.atol) / d1) } else { span * 1e-3 };
    guess.min(span * 0.1).max(span * 1e-9)
}

fn dense_eval<const N: usize>(
    y: &[C64; N],
    y_new: &[C64; N],
    k: &[[C64; N]; 7],
    h: f64,
    theta: f64,
) -> [C64; N] {
    let mut out = *y;
    for i in 0..N {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        let r4 = ydiff - h * k[6][i] - bspl;
        let mut r5 = C64::new(0.0, 0.0);
        for (j, kj) in k.iter().enumerate() {
            if D[j] != 0.0 {
                r5 += D[j] * kj[i];
            }
        }
        r5 *= h;
        out[i] = y[i] + theta * (ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn damped_rotation_matches_closed_form() {
        // dy/dt = (-γ + iω) y  →  y = exp((-γ+iω) t)
        let gamma = 0.7;
        let omega = 3.1;
        let samples: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let sol = integrate(
            |_, y: &[C64; 1]| [C64::new(-gamma, omega) * y[0]],
            [C64::new(1.0, 0.0)],
            0.0,
            10.0,
            &samples,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in samples.iter().zip(&sol) {
            let exact = (C64::new(-gamma, omega) * *t).exp();
            assert!((y[0] - exact).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn rabi_oscillation_conserves_norm() {
        // Two-level Rabi problem: i dc/dt = Ω σ_x c / 2, norm conserved.
        let omega = 2.0 * PI;
        let rhs = |_: f64, y: &[C64; 2]| {
            let half = C64::new(0.0, -0.5 * omega);
            [half * y[1], half * y[0]]
        };
        let samples = [5.0];
        let sol = integrate(
            rhs,
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            0.0,
            5.0,
            &samples,
            Tolerances::default(),
        )
        .unwrap();
        let norm = sol[0][0].norm_sqr() + sol[0][1].norm_sqr();
        assert!((norm - 1.0).abs() < 1e-8);
        // After Ωt = 10π the population has returned to the first level.
        assert!((sol[0][0].norm_sqr() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dense_output_matches_step_endpoints() {
        // Sample on a grid much finer than the accepted steps.
        let samples: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
        let sol = integrate(
            |t: f64, y: &[C64; 1]| [y[0] * C64::new(-1.0, 0.0) + C64::new(t.cos(), 0.0)],
            [C64::new(0.0, 0.0)],
            0.0,
            10.0,
            &samples,
            Tolerances::default(),
        )
        .unwrap();
        // Closed form: y = (cos t + sin t - e^{-t})/2
        for (t, y) in samples.iter().zip(&sol) {
            let exact = 0.5 * (t.cos() + t.sin() - (-t).exp());
            assert!((y[0].re - exact).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn tightening_tolerances_converges() {
        let rhs = |t: f64, y: &[C64; 1]| [C64::new(0.0, 4.0 * (2.0 * t).sin()) * y[0]];
        let run = |rtol: f64| {
            integrate(
                rhs,
                [C64::new(1.0, 0.0)],
                0.0,
                6.0,
                &[6.0],
                Tolerances { rtol, atol: rtol * 1e-3, max_steps: 1_000_000 },
            )
            .unwrap()[0][0]
        };
        let coarse = run(1e-9);
        let fine = run(5e-10);
        assert!((coarse - fine).norm() < 1e-8);
    }
}
