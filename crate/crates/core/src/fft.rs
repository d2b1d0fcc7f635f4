//! In-place radix-2 complex FFT.
//!
//! Forward transform: X_k = Σ_n x_n·e^{−2πi·kn/N}; [`inverse`] applies the
//! conjugate kernel and the 1/N factor. Power-of-two lengths only, which is
//! all the pulse-filtering code needs. Kept dependency-free so the core
//! stays `no_std`.

use crate::error::{Error, Result};
use crate::C64;
use alloc::format;
use core::f64::consts::PI;

fn check_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("FFT length must be a power of two >= 2, got {n}")));
    }
    Ok(())
}

fn transform(data: &mut [C64], sign: f64) {
    let n = data.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            data.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j &= !mask;
            mask >>= 1;
        }
        j |= mask;
    }
    let mut len = 2;
    while len <= n {
        let angle = sign * 2.0 * PI / len as f64;
        let wlen = C64::from_polar(1.0, angle);
        let mut start = 0;
        while start < n {
            let mut w = C64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[start + k];
                let v = data[start + k + len / 2] * w;
                data[start + k] = u + v;
                data[start + k + len / 2] = u - v;
                w *= wlen;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// Forward DFT, in place.
pub fn forward(data: &mut [C64]) -> Result<()> {
    check_len(data.len())?;
    transform(data, -1.0);
    Ok(())
}

/// Inverse DFT (with 1/N normalization), in place.
pub fn inverse(data: &mut [C64]) -> Result<()> {
    check_len(data.len())?;
    transform(data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

/// Angular frequency of DFT bin `k` for sample spacing `dt`, using the
/// signed (±Nyquist) layout: the time-domain component of bin k is
/// e^{+i·ω_k·t}.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let k_signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    // Inverse-transform kernel e^{+2πi·kn/N} ↔ e^{+iω t} with ω = 2πk/(N·dt).
    2.0 * PI * k_signed / (n as f64 * dt)
}

/// Next power of two ≥ `n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_matches_direct_dft() {
        let n = 16;
        let x: Vec<C64> = (0..n)
            .map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut fast = x.clone();
        forward(&mut fast).unwrap();
        for (k, bin) in fast.iter().enumerate() {
            let mut direct = C64::new(0.0, 0.0);
            for (m, xv) in x.iter().enumerate() {
                direct += xv * C64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / n as f64);
            }
            assert!((bin - direct).norm() < 1e-10, "bin {k}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 1024;
        let x: Vec<C64> = (0..n)
            .map(|k| C64::new((k as f64 * 0.013).cos(), (k as f64 * 0.029).sin()))
            .collect();
        let mut y = x.clone();
        forward(&mut y).unwrap();
        inverse(&mut y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_tone_lands_in_its_bin() {
        // x_n = e^{+iω_3 t_n} must put all weight in bin 3.
        let n = 64;
        let dt = 0.25;
        let w3 = bin_frequency(3, n, dt);
        let mut x: Vec<C64> =
            (0..n).map(|k| C64::from_polar(1.0, w3 * dt * k as f64)).collect();
        forward(&mut x).unwrap();
        for (k, v) in x.iter().enumerate() {
            if k == 3 {
                assert!((v.norm() - n as f64).abs() < 1e-9);
            } else {
                assert!(v.norm() < 1e-9, "leak in bin {k}");
            }
        }
    }

    #[test]
    fn non_power_of_two_is_rejected() {
        let mut x = alloc::vec![C64::new(0.0, 0.0); 12];
        assert!(forward(&mut x).is_err());
    }
}
