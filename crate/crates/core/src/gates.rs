//! Atom-photon gate matrices over labeled bases.
//!
//! Conventions: atomic qubit {|g⟩, |s⟩}; photonic degrees of freedom are
//! polarization {|v⟩, |h⟩} (v uncoupled) and, for the non-chiral cavity,
//! propagation direction {|R⟩, |L⟩}. Gates act by left multiplication;
//! sequences compose right-to-left.

use crate::params::CavityParams;
use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Atom ⊗ polarization basis, for [`ideal_z_ap`] and [`gate_w`].
pub const BASIS_POL: [&str; 4] = ["gv", "gh", "sv", "sh"];
/// Atom ⊗ direction basis, for [`gate_sequence_measured`].
pub const BASIS_DIR: [&str; 4] = ["sL", "sR", "gL", "gR"];
/// Atom ⊗ direction ⊗ polarization basis, for
/// [`gate_sequence_unmeasured`].
pub const BASIS_FULL: [&str; 8] =
    ["gRv", "gRh", "gLv", "gLh", "sRv", "sRh", "sLv", "sLh"];

/// A square complex matrix over an ordered, labeled basis (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    basis: Vec<&'static str>,
    entries: Vec<C64>,
}

impl GateMatrix {
    pub fn zeros(basis: &[&'static str]) -> Self {
        GateMatrix {
            basis: basis.to_vec(),
            entries: vec![C64::new(0.0, 0.0); basis.len() * basis.len()],
        }
    }

    pub fn identity(basis: &[&'static str]) -> Self {
        let mut m = Self::zeros(basis);
        for k in 0..basis.len() {
            *m.at_mut(k, k) = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[&'static str] {
        &self.basis
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    fn at_mut(&mut self, row: usize, col: usize) -> &mut C64 {
        let d = self.dim();
        &mut self.entries[row * d + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        *self.at_mut(row, col) = value;
    }

    pub fn mul(&self, rhs: &GateMatrix) -> GateMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        let d = self.dim();
        let mut out = GateMatrix::zeros(&self.basis);
        for r in 0..d {
            for c in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.at(r, k) * rhs.at(k, c);
                }
                *out.at_mut(r, c) = acc;
            }
        }
        out
    }

    pub fn dagger(&self) -> GateMatrix {
        let d = self.dim();
        let mut out = GateMatrix::zeros(&self.basis);
        for r in 0..d {
            for c in 0..d {
                *out.at_mut(r, c) = self.at(c, r).conj();
            }
        }
        out
    }

    pub fn scaled(&self, s: C64) -> GateMatrix {
        let mut out = self.clone();
        for v in out.entries.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Largest entrywise deviation from another matrix.
    pub fn max_diff(&self, rhs: &GateMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of M†M from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.dagger().mul(self).max_diff(&GateMatrix::identity(&self.basis))
    }

    /// Largest singular value, by power iteration on M†M.
    pub fn spectral_norm(&self) -> f64 {
        let gram = self.dagger().mul(self);
        let d = self.dim();
        let mut v = vec![C64::new(1.0, 0.0); d];
        let mut lambda = 0.0;
        for _ in 0..200 {
            let mut next = vec![C64::new(0.0, 0.0); d];
            for (r, slot) in next.iter_mut().enumerate() {
                for (c, amp) in v.iter().enumerate() {
                    *slot += gram.at(r, c) * amp;
                }
            }
            lambda = next.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if lambda == 0.0 {
                return 0.0;
            }
            for x in next.iter_mut() {
                *x /= lambda;
            }
            v = next;
        }
        lambda.sqrt()
    }

    /// Extract the sub-matrix over a subset of basis states (given by index,
    /// relabeled in order).
    pub fn block(&self, rows: &[usize], labels: &[&'static str]) -> GateMatrix {
        let mut out = GateMatrix::zeros(labels);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in rows.iter().enumerate() {
                *out.at_mut(ri, ci) = self.at(r, c);
            }
        }
        out
    }
}

/// Ideal chiral controlled-phase gate
/// Z_ap = |g⟩⟨g|⊗I + |s⟩⟨s|⊗(|v⟩⟨v| − |h⟩⟨h|) in [`BASIS_POL`].
pub fn ideal_z_ap() -> GateMatrix {
    let mut m = GateMatrix::identity(&BASIS_POL);
    *m.at_mut(3, 3) = C64::new(-1.0, 0.0);
    m
}

/// CZ in [`BASIS_DIR`] (−1 on |gR⟩), the target of the measured-phase
/// sequence up to an overall sign.
pub fn cz_dir_basis() -> GateMatrix {
    let mut m = GateMatrix::identity(&BASIS_DIR);
    *m.at_mut(3, 3) = C64::new(-1.0, 0.0);
    m
}

/// Non-chiral atom-photon interaction
/// Z̃_ap = |g⟩⟨g|⊗(e^{−2iφ}|R⟩⟨L| + e^{2iφ}|L⟩⟨R|) − |s⟩⟨s|⊗I
/// in [`BASIS_DIR`] ({sL, sR, gL, gR}).
pub fn z_ap_nonchiral(phi: f64) -> GateMatrix {
    let mut m = GateMatrix::zeros(&BASIS_DIR);
    let e = C64::from_polar(1.0, 2.0 * phi);
    *m.at_mut(0, 0) = C64::new(-1.0, 0.0); // sL
    *m.at_mut(1, 1) = C64::new(-1.0, 0.0); // sR
    *m.at_mut(3, 2) = e.conj(); // |gL⟩ → e^{−2iφ}|gR⟩
    *m.at_mut(2, 3) = e; // |gR⟩ → e^{+2iφ}|gL⟩
    m
}

fn photon_diag_dir(l: C64, r: C64) -> GateMatrix {
    let mut m = GateMatrix::zeros(&BASIS_DIR);
    *m.at_mut(0, 0) = l;
    *m.at_mut(1, 1) = r;
    *m.at_mut(2, 2) = l;
    *m.at_mut(3, 3) = r;
    m
}

fn hadamard_dir() -> GateMatrix {
    // H|R⟩ = (|R⟩+|L⟩)/√2, H|L⟩ = (|R⟩−|L⟩)/√2 on the photon direction.
    let s = 1.0 / 2f64.sqrt();
    let mut m = GateMatrix::zeros(&BASIS_DIR);
    for atom in 0..2 {
        let base = atom * 2;
        *m.at_mut(base, base) = C64::new(-s, 0.0); // ⟨L|H|L⟩
        *m.at_mut(base, base + 1) = C64::new(s, 0.0); // ⟨L|H|R⟩
        *m.at_mut(base + 1, base) = C64::new(s, 0.0); // ⟨R|H|L⟩
        *m.at_mut(base + 1, base + 1) = C64::new(s, 0.0); // ⟨R|H|R⟩
    }
    m
}

/// Phase-measured controlled-phase sequence H_p·V·Z̃_ap·V†·H_p with
/// V = e^{−2iφ}|L⟩⟨L| + |R⟩⟨R|. The result is −CZ in [`BASIS_DIR`],
/// independent of φ.
pub fn gate_sequence_measured(phi: f64) -> GateMatrix {
    let v = photon_diag_dir(C64::from_polar(1.0, -2.0 * phi), C64::new(1.0, 0.0));
    let h = hadamard_dir();
    h.mul(&v).mul(&z_ap_nonchiral(phi)).mul(&v.dagger()).mul(&h)
}

/// Non-chiral gate over the full atom ⊗ direction ⊗ polarization space
/// ([`BASIS_FULL`]): the h polarization sees [`z_ap_nonchiral`], the v
/// polarization passes free.
pub fn z_ap_nonchiral_full(phi: f64) -> GateMatrix {
    let mut m = GateMatrix::zeros(&BASIS_FULL);
    let e = C64::from_polar(1.0, 2.0 * phi);
    let idx = |atom: usize, dir: usize, pol: usize| atom * 4 + dir * 2 + pol;
    for atom in 0..2 {
        for dir in 0..2 {
            // v passes untouched.
            *m.at_mut(idx(atom, dir, 0), idx(atom, dir, 0)) = C64::new(1.0, 0.0);
        }
    }
    // g-block, h polarization: direction flip with the ±2φ phases.
    *m.at_mut(idx(0, 1, 1), idx(0, 0, 1)) = e; // |gRh⟩ → e^{2iφ}|gLh⟩
    *m.at_mut(idx(0, 0, 1), idx(0, 1, 1)) = e.conj(); // |gLh⟩ → e^{−2iφ}|gRh⟩
    // s-block, h polarization: resonant pass with a π phase.
    *m.at_mut(idx(1, 0, 1), idx(1, 0, 1)) = C64::new(-1.0, 0.0);
    *m.at_mut(idx(1, 1, 1), idx(1, 1, 1)) = C64::new(-1.0, 0.0);
    m
}

/// Direction-conditional sign flip
/// U_p = −|R⟩⟨R|_h + |L⟩⟨L|_h + |R⟩⟨R|_v + |L⟩⟨L|_v (photon only).
pub fn u_p() -> GateMatrix {
    let mut m = GateMatrix::identity(&BASIS_FULL);
    let idx = |atom: usize, dir: usize, pol: usize| atom * 4 + dir * 2 + pol;
    for atom in 0..2 {
        *m.at_mut(idx(atom, 0, 1), idx(atom, 0, 1)) = C64::new(-1.0, 0.0);
    }
    m
}

/// Measurement-free controlled-phase sequence Z̃′_ap·U_p·Z̃′_ap. The e^{±2iφ}
/// factors cancel; restricted to right-moving inputs {gRv, gRh, sRv, sRh}
/// the result is the atom-photon controlled-phase gate.
pub fn gate_sequence_unmeasured(phi: f64) -> GateMatrix {
    let z = z_ap_nonchiral_full(phi);
    z.mul(&u_p()).mul(&z)
}

/// Right-moving block of an 8-dimensional gate, in the order
/// {gRv, gRh, sRv, sRh}.
pub fn right_moving_block(gate: &GateMatrix) -> GateMatrix {
    gate.block(&[0, 1, 4, 5], &["gRv", "gRh", "sRv", "sRh"])
}

/// Shifted-operating-point gate W = Z_p·CP(φ_W) in [`BASIS_POL`] with
/// φ_W = 2π − 2·arctan(g/κ_ex); valid for κ_i ≪ κ_ex and g ≫ γ.
pub fn gate_w(params: &CavityParams) -> (GateMatrix, f64) {
    let phi_w = TAU - 2.0 * (params.g / params.kappa_ex).atan();
    let mut m = GateMatrix::zeros(&BASIS_POL);
    *m.at_mut(0, 0) = C64::new(1.0, 0.0);
    *m.at_mut(1, 1) = C64::new(-1.0, 0.0);
    *m.at_mut(2, 2) = C64::new(1.0, 0.0);
    *m.at_mut(3, 3) = -C64::from_polar(1.0, phi_w);
    (m, phi_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CavityParams;
    use crate::presets;
    use crate::scatter::transmission;
    use core::f64::consts::PI;

    #[test]
    fn measured_sequence_is_minus_cz_for_any_phi() {
        let expected = cz_dir_basis().scaled(C64::new(-1.0, 0.0));
        let at_zero = gate_sequence_measured(0.0);
        assert!(at_zero.max_diff(&expected) < 1e-12);
        for phi in [1.234, PI / 2.0, 5.9, -2.2] {
            let m = gate_sequence_measured(phi);
            assert!(m.max_diff(&expected) < 1e-12, "phi = {phi}");
            assert!(m.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn unmeasured_sequence_is_phi_free_and_cz_on_right_movers() {
        let base = gate_sequence_unmeasured(0.0);
        assert!(base.unitarity_defect() < 1e-12);
        for phi in [2.7, 0.1, -1.9] {
            assert!(gate_sequence_unmeasured(phi).max_diff(&base) < 1e-12);
        }
        let block = right_moving_block(&base);
        let mut expected = GateMatrix::identity(&["gRv", "gRh", "sRv", "sRh"]);
        expected.set(3, 3, C64::new(-1.0, 0.0));
        assert!(block.max_diff(&expected) < 1e-12);
        // Left-moving h photon with the atom in |g⟩ picks up −1.
        let glh = 3;
        for r in 0..8 {
            let want = if r == glh { C64::new(-1.0, 0.0) } else { C64::new(0.0, 0.0) };
            assert!((base.at(r, glh) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn z_ap_nonchiral_is_a_contraction_and_unitary_when_ideal() {
        let z = z_ap_nonchiral(0.77);
        assert!(z.unitarity_defect() < 1e-12);
        assert!(z.spectral_norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn w_gate_phase_limits() {
        let p = presets::builtin("cavity5").unwrap().params();
        let (w, phi_w) = gate_w(&p);
        assert!(w.unitarity_defect() < 1e-12);
        let expected = TAU - 2.0 * (16f64 / 9.0).atan();
        assert!((phi_w - expected).abs() < 1e-12);
        // g/κ_ex → ∞ ⇒ φ_W → π; g/κ_ex → 0 ⇒ φ_W → 2π.
        let strong = CavityParams::new(1e9, 1.0, 0.0, 1e-3).unwrap();
        assert!((gate_w(&strong).1 - PI).abs() < 1e-6);
        let weak = CavityParams::new(1e-9, 1.0, 0.0, 1e-3).unwrap();
        assert!((gate_w(&weak).1 - TAU).abs() < 1e-6);
    }

    #[test]
    fn w_gate_phase_matches_transmission_at_the_eigenstate() {
        // Case-2 photons sit at the dressed eigenfrequency, offset by ≈ g
        // from the bare cavity. There the coupled branch reflects with
        // phase π and the uncoupled branch with π − 2·arctan(g/κ_ex), so
        // the relative phase is the CP angle of W.
        let p = presets::builtin("cavity5").unwrap().params();
        let delta = p.g;
        let t_s = transmission(&p, delta, delta, false);
        let t_g = transmission(&p, delta, delta, true);
        let rel = (t_s / t_g).arg();
        let (_, phi_w) = gate_w(&p);
        // Map φ_W into (−π, π] for comparison.
        let principal = phi_w - TAU;
        assert!((rel - principal).abs() < 0.05, "rel = {rel}, φ_W = {principal}");
    }
}
