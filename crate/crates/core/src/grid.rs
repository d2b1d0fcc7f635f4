//! Uniform time grids and trapezoid quadrature.

use crate::error::{Error, Result};
use crate::C64;
use alloc::vec::Vec;

/// Default number of samples for synthesis and integration grids.
pub const DEFAULT_GRID: usize = 4096;

/// A uniform grid of `n` samples on [0, T], endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    duration: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(duration: f64, n: usize) -> Result<Self> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::Domain(alloc::format!(
                "grid duration must be positive and finite, got {duration}"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(alloc::format!("grid needs >= 2 samples, got {n}")));
        }
        Ok(TimeGrid { duration, n })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample spacing T/(n−1).
    pub fn dt(&self) -> f64 {
        self.duration / (self.n - 1) as f64
    }

    /// Time of sample `k`.
    pub fn t(&self, k: usize) -> f64 {
        self.dt() * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.t(k))
    }

    /// Sample a scalar function on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.times().map(f).collect()
    }
}

/// Trapezoid integral of uniformly sampled real data.
pub fn trapz(y: &[f64], dt: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let interior: f64 = y[1..y.len() - 1].iter().sum();
    dt * (0.5 * (y[0] + y[y.len() - 1]) + interior)
}

/// Trapezoid integral of uniformly sampled complex data.
pub fn trapz_c(y: &[C64], dt: f64) -> C64 {
    if y.len() < 2 {
        return C64::new(0.0, 0.0);
    }
    let interior: C64 = y[1..y.len() - 1].iter().sum();
    dt * (0.5 * (y[0] + y[y.len() - 1]) + interior)
}

/// Cumulative trapezoid integral: `out[k] = ∫₀^{t_k} y dt`, `out[0] = 0`.
pub fn cumtrapz(y: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in y.windows(2) {
        acc += 0.5 * dt * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}
