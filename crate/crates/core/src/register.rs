//! Dense state vectors over a labeled register of two-level systems, with
//! exhaustive measurement-branch enumeration instead of sampling.
//!
//! Register `r` owns bit `r` of the amplitude index (little-endian), so
//! amplitude `amps[i]` belongs to the computational state whose register-r
//! value is `(i >> r) & 1`. Z-basis outcomes are reported as ±1 with
//! +1 ↔ |0⟩.

use crate::error::{Error, Result};
use crate::C64;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Dense vectors get large fast; every circuit here needs far fewer.
pub const MAX_REGISTERS: usize = 20;

/// Probability below which a measurement branch is dropped as numerically
/// empty.
pub const BRANCH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    Z,
    /// Real rotation R(θ): |0⟩ → cos(θ/2)|0⟩ + sin(θ/2)|1⟩,
    /// |1⟩ → −sin(θ/2)|0⟩ + cos(θ/2)|1⟩.
    R(f64),
    /// Controlled phase flip (the ideal atom-photon Z gate).
    Cz,
    /// Controlled phase CP(φ) = diag(1, 1, 1, e^{iφ}).
    Cp(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<String>,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ over the given registers.
    pub fn new(labels: &[&str]) -> Result<Self> {
        if labels.is_empty() || labels.len() > MAX_REGISTERS {
            return Err(Error::Register(format!(
                "register count must be 1..={MAX_REGISTERS}, got {}",
                labels.len()
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << labels.len()];
        amps[0] = C64::new(1.0, 0.0);
        Ok(StateVector { labels: labels.iter().map(|s| String::from(*s)).collect(), amps })
    }

    pub fn num_registers(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn register(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Register(format!("no register named {label}")))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        let inner: C64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        inner.norm()
    }

    fn check_target(&self, reg: usize) -> Result<()> {
        if reg >= self.num_registers() {
            return Err(Error::Register(format!(
                "register {reg} out of range (have {})",
                self.num_registers()
            )));
        }
        Ok(())
    }

    /// Apply an arbitrary one-qubit unitary [[u00, u01], [u10, u11]].
    fn apply_one_qubit(&mut self, reg: usize, u: [[C64; 2]; 2]) {
        let mask = 1usize << reg;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[j] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Prepare an unentangled register currently in |0⟩ in the state
    /// α|0⟩ + β|1⟩ (normalized), by the unitary completion of that column.
    pub fn prepare(&mut self, reg: usize, alpha: C64, beta: C64) -> Result<()> {
        self.check_target(reg)?;
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < 1e-12 {
            return Err(Error::Register("cannot prepare the zero state".into()));
        }
        let mask = 1usize << reg;
        if self.amps.iter().enumerate().any(|(i, a)| i & mask != 0 && a.norm() > 1e-12) {
            return Err(Error::Register(format!(
                "register {reg} must be |0⟩ before prepare"
            )));
        }
        let (alpha, beta) = (alpha / norm, beta / norm);
        self.apply_one_qubit(reg, [[alpha, -beta.conj()], [beta, alpha.conj()]]);
        Ok(())
    }

    /// Apply a named gate in place. One target for H/X/Z/R, two distinct
    /// targets for CZ/CP.
    pub fn apply(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        for &t in targets {
            self.check_target(t)?;
        }
        match gate {
            Gate::H | Gate::X | Gate::Z | Gate::R(_) => {
                if targets.len() != 1 {
                    return Err(Error::Register(format!(
                        "{gate:?} takes one target, got {}",
                        targets.len()
                    )));
                }
                let s = 1.0 / 2f64.sqrt();
                let zero = C64::new(0.0, 0.0);
                let one = C64::new(1.0, 0.0);
                let u = match gate {
                    Gate::H => [[s * one, s * one], [s * one, -s * one]],
                    Gate::X => [[zero, one], [one, zero]],
                    Gate::Z => [[one, zero], [zero, -one]],
                    Gate::R(theta) => {
                        let (sin, cos) = (0.5 * theta).sin_cos();
                        [[cos * one, -sin * one], [sin * one, cos * one]]
                    }
                    _ => unreachable!(),
                };
                self.apply_one_qubit(targets[0], u);
            }
            Gate::Cz | Gate::Cp(_) => {
                if targets.len() != 2 || targets[0] == targets[1] {
                    return Err(Error::Register(
                        "two distinct targets required for controlled gates".into(),
                    ));
                }
                let phase = match gate {
                    Gate::Cz => C64::new(-1.0, 0.0),
                    Gate::Cp(phi) => C64::from_polar(1.0, phi),
                    _ => unreachable!(),
                };
                let mask = (1usize << targets[0]) | (1usize << targets[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a *= phase;
                    }
                }
            }
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() < 1e-9, "unitary drift");
        Ok(())
    }

    /// Probability that register `reg` reads |1⟩.
    pub fn prob_one(&self, reg: usize) -> f64 {
        let mask = 1usize << reg;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Drop a register that is deterministically in `bit`, returning the
    /// reduced state. Errors if more than 10⁻¹⁰ of the probability sits in
    /// the other branch.
    pub fn drop_register(&self, reg: usize, bit: u8) -> Result<StateVector> {
        self.check_target(reg)?;
        let p1 = self.prob_one(reg);
        let stray = if bit == 1 { 1.0 - p1 } else { p1 };
        if stray > 1e-10 {
            return Err(Error::Register(format!(
                "register {reg} is not deterministically |{bit}⟩ (stray {stray:e})"
            )));
        }
        let mask = 1usize << reg;
        let want = if bit == 1 { mask } else { 0 };
        let low = mask - 1;
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len() / 2];
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask == want {
                let reduced = (i & low) | ((i >> 1) & !low);
                amps[reduced] = *a;
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        let mut labels = self.labels.clone();
        labels.remove(reg);
        Ok(StateVector { labels, amps })
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: Gate, targets: &[usize]) -> Result<StateVector> {
    let mut next = state.clone();
    next.apply(gate, targets)?;
    Ok(next)
}

/// Photon-emission map P: |0⟩_a|0⟩_i → |0⟩_a|0⟩_i,
/// |1⟩_a|0⟩_i → |0⟩_a|1⟩_i. Any amplitude on |1⟩_a|1⟩_i means the slot was
/// not vacuum and is rejected.
pub fn apply_p(state: &StateVector, atom: usize, slot: usize) -> Result<StateVector> {
    let mut next = state.clone();
    move_excitation(&mut next, atom, slot)?;
    Ok(next)
}

/// Photon-storage map (inverse of [`apply_p`]): |0⟩_a|1⟩_i → |1⟩_a|0⟩_i,
/// with |1⟩_a|1⟩_i rejected.
pub fn apply_store(state: &StateVector, atom: usize, slot: usize) -> Result<StateVector> {
    let mut next = state.clone();
    move_excitation(&mut next, slot, atom)?;
    Ok(next)
}

fn move_excitation(state: &mut StateVector, from: usize, to: usize) -> Result<()> {
    state.check_target(from)?;
    state.check_target(to)?;
    if from == to {
        return Err(Error::Register("source and destination coincide".into()));
    }
    let fmask = 1usize << from;
    let tmask = 1usize << to;
    // Occupancy check: the destination must be empty wherever the source
    // is excited.
    for (i, a) in state.amps.iter().enumerate() {
        if i & fmask != 0 && i & tmask != 0 && a.norm() > 1e-12 {
            return Err(Error::OccupiedSlot { slot: to });
        }
    }
    for i in 0..state.amps.len() {
        if i & fmask != 0 && i & tmask == 0 {
            let j = (i & !fmask) | tmask;
            let moved = state.amps[i];
            state.amps[j] += moved;
            state.amps[i] = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// One branch of a Z-basis measurement.
#[derive(Debug, Clone)]
pub struct Branch {
    /// Measured register.
    pub register: usize,
    /// ±1 outcome (+1 ↔ |0⟩).
    pub outcome: i8,
    pub probability: f64,
    pub state: StateVector,
}

/// Enumerate the Z-measurement branches of one register: at most two, with
/// exact probabilities and normalized post-states, the +1 branch first.
/// Branches below [`BRANCH_EPS`] are omitted.
pub fn measure_enumerate(state: &StateVector, reg: usize) -> Result<Vec<Branch>> {
    if reg >= state.num_registers() {
        return Err(Error::Register(format!("register {reg} out of range")));
    }
    let mask = 1usize << reg;
    let mut branches = Vec::with_capacity(2);
    for (outcome, want) in [(1i8, 0usize), (-1i8, mask)] {
        let prob: f64 = state
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if prob < BRANCH_EPS {
            continue;
        }
        let scale = 1.0 / prob.sqrt();
        let amps: Vec<C64> = state
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == want { scale * a } else { C64::new(0.0, 0.0) })
            .collect();
        branches.push(Branch {
            register: reg,
            outcome,
            probability: prob,
            state: StateVector { labels: state.labels.clone(), amps },
        });
    }
    Ok(branches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Expectation value ⟨ψ|P|ψ⟩ of a Pauli string (identity on unlisted
/// registers).
pub fn expect_pauli(state: &StateVector, ops: &[(usize, Pauli)]) -> Result<C64> {
    let mut transformed = state.clone();
    for &(reg, pauli) in ops {
        transformed.check_target(reg)?;
        let mask = 1usize << reg;
        match pauli {
            Pauli::Z => {
                for (i, a) in transformed.amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::X | Pauli::Y => {
                let phase0 = match pauli {
                    Pauli::Y => C64::new(0.0, 1.0),  // |0⟩ → i|1⟩
                    _ => C64::new(1.0, 0.0),
                };
                let phase1 = match pauli {
                    Pauli::Y => C64::new(0.0, -1.0), // |1⟩ → −i|0⟩
                    _ => C64::new(1.0, 0.0),
                };
                let amps = transformed.amps.clone();
                for (i, a) in transformed.amps.iter_mut().enumerate() {
                    let j = i ^ mask;
                    *a = if i & mask == 0 { phase1 * amps[j] } else { phase0 * amps[j] };
                }
            }
        }
    }
    Ok(state
        .amps
        .iter()
        .zip(&transformed.amps)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn plus_state() -> StateVector {
        let mut s = StateVector::new(&["q"]).unwrap();
        s.apply(Gate::H, &[0]).unwrap();
        s
    }

    #[test]
    fn hadamard_squares_to_identity() {
        let mut s = StateVector::new(&["a", "b", "c"]).unwrap();
        s.prepare(0, C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        s.prepare(1, C64::new(1.0, 0.0), C64::new(1.0, 0.2)).unwrap();
        let original = s.clone();
        s.apply(Gate::H, &[1]).unwrap();
        s.apply(Gate::H, &[1]).unwrap();
        assert!((s.overlap(&original) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_pair_cancels() {
        let mut s = StateVector::new(&["a"]).unwrap();
        s.apply(Gate::R(FRAC_PI_2), &[0]).unwrap();
        s.apply(Gate::R(-FRAC_PI_2), &[0]).unwrap();
        assert!((s.amplitudes()[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn cz_flips_the_doubly_excited_amplitude() {
        let mut s = StateVector::new(&["a", "b"]).unwrap();
        s.apply(Gate::X, &[0]).unwrap();
        s.apply(Gate::X, &[1]).unwrap();
        s.apply(Gate::Cz, &[0, 1]).unwrap();
        assert!((s.amplitudes()[3] + 1.0).norm() < 1e-12);
        // CP(π) is the same gate.
        s.apply(Gate::Cp(PI), &[0, 1]).unwrap();
        assert!((s.amplitudes()[3] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn emission_map_examples() {
        // (|0⟩+|1⟩)_a|0⟩₁ → |0⟩_a(|0⟩+|1⟩)₁
        let mut s = StateVector::new(&["atom", "p1"]).unwrap();
        s.apply(Gate::H, &[0]).unwrap();
        let out = apply_p(&s, 0, 1).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((out.amplitudes()[0].re - r).abs() < 1e-12);
        assert!((out.amplitudes()[2].re - r).abs() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        // Vacuum stays vacuum.
        let vac = StateVector::new(&["atom", "p1"]).unwrap();
        let out = apply_p(&vac, 0, 1).unwrap();
        assert!((out.amplitudes()[0] - 1.0).norm() < 1e-12);
        // Occupied slot is rejected.
        let mut bad = StateVector::new(&["atom", "p1"]).unwrap();
        bad.apply(Gate::X, &[0]).unwrap();
        bad.apply(Gate::X, &[1]).unwrap();
        assert!(matches!(apply_p(&bad, 0, 1), Err(Error::OccupiedSlot { slot: 1 })));
    }

    #[test]
    fn store_inverts_emission() {
        let mut s = StateVector::new(&["atom", "p"]).unwrap();
        s.apply(Gate::H, &[0]).unwrap();
        s.apply(Gate::Z, &[0]).unwrap();
        let emitted = apply_p(&s, 0, 1).unwrap();
        let back = apply_store(&emitted, 0, 1).unwrap();
        assert!((back.overlap(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_branches_are_exhaustive_and_normalized() {
        let s = plus_state();
        let branches = measure_enumerate(&s, 0).unwrap();
        assert_eq!(branches.len(), 2);
        assert_eq!(branches[0].outcome, 1);
        assert_eq!(branches[1].outcome, -1);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for b in &branches {
            assert!((b.probability - 0.5).abs() < 1e-12);
            assert!((b.state.norm_sqr() - 1.0).abs() < 1e-12);
        }
        // Deterministic state → a single branch.
        let zero = StateVector::new(&["q"]).unwrap();
        let branches = measure_enumerate(&zero, 0).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].outcome, 1);
        assert!((branches[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_state_branches_are_perfectly_correlated() {
        let mut s = StateVector::new(&["a", "b"]).unwrap();
        s.apply(Gate::H, &[0]).unwrap();
        // CNOT via H-CZ-H on the target.
        s.apply(Gate::H, &[1]).unwrap();
        s.apply(Gate::Cz, &[0, 1]).unwrap();
        s.apply(Gate::H, &[1]).unwrap();
        let branches = measure_enumerate(&s, 0).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            let expect_bit = if b.outcome == 1 { 0.0 } else { 1.0 };
            assert!((b.state.prob_one(1) - expect_bit).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_expectations_on_known_states() {
        let s = plus_state();
        assert!((expect_pauli(&s, &[(0, Pauli::X)]).unwrap().re - 1.0).abs() < 1e-12);
        assert!(expect_pauli(&s, &[(0, Pauli::Z)]).unwrap().norm() < 1e-12);
        let mut y = StateVector::new(&["q"]).unwrap();
        y.prepare(0, C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap();
        assert!((expect_pauli(&y, &[(0, Pauli::Y)]).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drop_register_reduces_a_product_state() {
        let mut s = StateVector::new(&["atom", "p1", "p2"]).unwrap();
        s.apply(Gate::H, &[1]).unwrap();
        s.apply(Gate::Cz, &[1, 2]).unwrap();
        let reduced = s.drop_register(0, 0).unwrap();
        assert_eq!(reduced.num_registers(), 2);
        assert_eq!(reduced.labels()[0], "p1");
        // Entangled register cannot be dropped.
        let mut e = StateVector::new(&["a", "b"]).unwrap();
        e.apply(Gate::H, &[0]).unwrap();
        assert!(e.drop_register(0, 0).is_err());
    }

    #[test]
    fn bad_targets_are_rejected() {
        let mut s = StateVector::new(&["a", "b"]).unwrap();
        assert!(s.apply(Gate::H, &[5]).is_err());
        assert!(s.apply(Gate::Cz, &[0, 0]).is_err());
        assert!(s.apply(Gate::Cz, &[0]).is_err());
        assert!(StateVector::new(&[]).is_err());
    }
}
