//! Protocol circuits built on the state-vector engine: GHZ and cluster
//! state generation, the photon-photon controlled-phase gate, QND photon
//! detection, and the two key-distribution variants with their truth
//! tables.
//!
//! All measurements are branch-enumerated, byproduct corrections are
//! applied as classically controlled gates inside each branch, and every
//! reported probability is exact. Atom-position phases on emitted photons
//! are taken to vanish (wave-vector-matched fields).

use crate::error::{Error, Result};
use crate::register::{
    apply_p, apply_store, expect_pauli, measure_enumerate, Gate, Pauli, StateVector,
};
use crate::C64;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Wrap a phase into [0, 2π).
fn wrap_tau(phi: f64) -> f64 {
    let r = phi % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Photonic qubit encoding for the cluster builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterEncoding {
    /// Fock basis {|0⟩, |1⟩}; photons are emitted by the control-pulse map
    /// P and the atom ends in |0⟩ deterministically.
    SingleRail,
    /// Polarization basis {|v⟩, |h⟩}; the atom stays entangled until a
    /// final Z measurement whose −1 outcome is repaired by Z on the last
    /// photon.
    DualRail,
}

fn photon_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("p{k}")).collect()
}

fn new_register(n_photons: usize) -> Result<StateVector> {
    let mut labels: Vec<String> = vec![String::from("atom")];
    labels.extend(photon_labels(n_photons));
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    StateVector::new(&refs)
}

/// Edges of the 1D path graph over photons 1..n (0-indexed photon slots).
pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
}

/// Edges of the n-cycle.
pub fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

/// Largest deviation of the graph-state stabilizer generators
/// K_i = X_i·∏_{j∼i} Z_j from +1 on a state over exactly the graph qubits.
pub fn stabilizer_defect(state: &StateVector, edges: &[(usize, usize)]) -> Result<f64> {
    let n = state.num_registers();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut ops = vec![(i, Pauli::X)];
        for &(a, b) in edges {
            if a == i {
                ops.push((b, Pauli::Z));
            } else if b == i {
                ops.push((a, Pauli::Z));
            }
        }
        let val = expect_pauli(state, &ops)?;
        worst = worst.max((val - 1.0).norm());
    }
    Ok(worst)
}

/// Largest deviation of the GHZ stabilizer generators (X…X and the
/// nearest-neighbor ZZ pairs) from +1.
pub fn ghz_stabilizer_defect(state: &StateVector) -> Result<f64> {
    let n = state.num_registers();
    let all_x: Vec<(usize, Pauli)> = (0..n).map(|q| (q, Pauli::X)).collect();
    let mut worst = (expect_pauli(state, &all_x)? - 1.0).norm();
    for q in 0..n.saturating_sub(1) {
        let zz = expect_pauli(state, &[(q, Pauli::Z), (q + 1, Pauli::Z)])?;
        worst = worst.max((zz - 1.0).norm());
    }
    Ok(worst)
}

/// Reference graph state ∏_{edges} CZ |+…+⟩ over `n` qubits.
pub fn graph_state(n: usize, edges: &[(usize, usize)]) -> Result<StateVector> {
    let labels = photon_labels(n);
    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let mut state = StateVector::new(&refs)?;
    for q in 0..n {
        state.apply(Gate::H, &[q])?;
    }
    for &(a, b) in edges {
        state.apply(Gate::Cz, &[a, b])?;
    }
    Ok(state)
}

/// n-photon GHZ state in the single-rail encoding: emit, then repeatedly
/// copy the newest photon onto the atom with H·CZ·H and emit again. The
/// atom factors out in |0⟩ and is checked before being dropped.
pub fn build_ghz_single_rail(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Register(format!("GHZ needs n >= 2 photons, got {n}")));
    }
    let mut state = new_register(n)?;
    state.apply(Gate::H, &[0])?;
    state = apply_p(&state, 0, 1)?;
    for i in 2..=n {
        state.apply(Gate::H, &[0])?;
        state.apply(Gate::Cz, &[0, i - 1])?;
        state.apply(Gate::H, &[0])?;
        state = apply_p(&state, 0, i)?;
    }
    // The final emission leaves the atom in |0⟩ with certainty.
    state.drop_register(0, 0)
}

/// n-photon 1D path cluster state.
pub fn build_cluster_1d(n: usize, encoding: ClusterEncoding) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Register(format!("cluster needs n >= 2 photons, got {n}")));
    }
    match encoding {
        ClusterEncoding::SingleRail => build_cluster_single_rail(n, false),
        ClusterEncoding::DualRail => build_cluster_dual_rail(n),
    }
}

/// n-photon ring cluster (single-rail): same construction with the last
/// photon also linked back to the first.
pub fn build_cluster_ring(n: usize) -> Result<StateVector> {
    if n < 3 {
        return Err(Error::Register(format!("ring cluster needs n >= 3, got {n}")));
    }
    build_cluster_single_rail(n, true)
}

fn build_cluster_single_rail(n: usize, close_ring: bool) -> Result<StateVector> {
    let mut state = new_register(n)?;
    for i in 1..=n {
        state.apply(Gate::H, &[0])?;
        if i > 1 {
            state.apply(Gate::Cz, &[0, i - 1])?;
        }
        if close_ring && i == n {
            state.apply(Gate::Cz, &[0, 1])?;
        }
        state = apply_p(&state, 0, i)?;
    }
    state.drop_register(0, 0)
}

fn build_cluster_dual_rail(n: usize) -> Result<StateVector> {
    let mut state = new_register(n)?;
    state.apply(Gate::H, &[0])?;
    for i in 1..=n {
        // CNOT atom → photon i, realized as H·CZ·H on the photon.
        state.apply(Gate::H, &[i])?;
        state.apply(Gate::Cz, &[0, i])?;
        state.apply(Gate::H, &[i])?;
        state.apply(Gate::H, &[0])?;
    }
    let branches = measure_enumerate(&state, 0)?;
    let mut corrected: Vec<StateVector> = Vec::with_capacity(branches.len());
    for b in &branches {
        let mut post = b.state.clone();
        if b.outcome == -1 {
            // The measured end node hands a Z byproduct to its neighbor.
            post.apply(Gate::Z, &[n])?;
        }
        let bit = if b.outcome == 1 { 0 } else { 1 };
        corrected.push(post.drop_register(0, bit)?);
    }
    // Both branches must agree up to a global phase.
    if corrected.len() == 2 {
        let overlap = corrected[0].overlap(&corrected[1]);
        if (overlap - 1.0).abs() > 1e-10 {
            return Err(Error::Register(format!(
                "byproduct correction left branches apart (overlap {overlap})"
            )));
        }
    }
    corrected
        .into_iter()
        .next()
        .ok_or_else(|| Error::Register("measurement produced no branches".into()))
}

/// Outcome record of one verified branch of a protocol circuit.
#[derive(Debug, Clone)]
pub struct BranchCheck {
    pub outcomes: Vec<i8>,
    pub probability: f64,
    /// Largest amplitude deviation from the ideal target state.
    pub deviation: f64,
}

/// Report for a circuit verified over several inputs and branches.
#[derive(Debug, Clone)]
pub struct CircuitReport {
    pub cases: Vec<(String, Vec<BranchCheck>)>,
    pub max_deviation: f64,
}

fn max_amp_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Run the photon-photon controlled-phase circuit (atom ancilla, two CZ
/// interactions separated by R(±π/2), atom measurement, Z^k on photon 1
/// and Z on photon 2) over the four computational and four diagonal
/// two-photon inputs, checking every branch against the ideal CZ action.
pub fn photon_photon_cz() -> Result<CircuitReport> {
    #[derive(Clone, Copy)]
    enum Init {
        Zero,
        One,
        Plus,
        Minus,
    }
    use Init::{Minus, One, Plus, Zero};
    let basis_inputs: [(&str, [Init; 2]); 8] = [
        ("00", [Zero, Zero]),
        ("01", [Zero, One]),
        ("10", [One, Zero]),
        ("11", [One, One]),
        ("++", [Plus, Plus]),
        ("+-", [Plus, Minus]),
        ("-+", [Minus, Plus]),
        ("--", [Minus, Minus]),
    ];
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    for (label, spec) in basis_inputs {
        let mut state = new_register(2)?;
        for (k, choice) in spec.iter().enumerate() {
            let reg = k + 1;
            match choice {
                Zero => {}
                One => state.apply(Gate::X, &[reg])?,
                Plus => state.prepare(reg, C64::new(1.0, 0.0), C64::new(1.0, 0.0))?,
                Minus => state.prepare(reg, C64::new(1.0, 0.0), C64::new(-1.0, 0.0))?,
            }
        }
        // Ideal target: CZ applied directly to the two photons.
        let target = {
            let two = state.drop_register(0, 0)?;
            let mut t = two.clone();
            t.apply(Gate::Cz, &[0, 1])?;
            t
        };
        state.apply(Gate::H, &[0])?;
        state.apply(Gate::Cz, &[0, 1])?;
        state.apply(Gate::R(FRAC_PI_2), &[0])?;
        state.apply(Gate::Cz, &[0, 2])?;
        state.apply(Gate::R(-FRAC_PI_2), &[0])?;
        let mut checks = Vec::new();
        for b in measure_enumerate(&state, 0)? {
            let mut post = b.state.clone();
            if b.outcome == -1 {
                post.apply(Gate::Z, &[1])?;
            }
            post.apply(Gate::Z, &[2])?;
            let bit = if b.outcome == 1 { 0 } else { 1 };
            let photons = post.drop_register(0, bit)?;
            let deviation = max_amp_diff(&photons, &target);
            worst = worst.max(deviation);
            checks.push(BranchCheck {
                outcomes: vec![b.outcome],
                probability: b.probability,
                deviation,
            });
        }
        cases.push((String::from(label), checks));
    }
    Ok(CircuitReport { cases, max_deviation: worst })
}

/// Run the non-destructive photon detection circuit (H on the atom,
/// conditional phase, H again, Z measurement) for vacuum, one-photon, and
/// superposition inputs. The atom flips exactly when the photon is
/// present; the photon number is preserved in every branch.
pub fn qnd_detect() -> Result<CircuitReport> {
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    for (label, amp1) in [("vacuum", None), ("photon", Some(1.0)), ("plus", Some(0.5))] {
        let mut state = new_register(1)?;
        match amp1 {
            None => {}
            Some(1.0) => state.apply(Gate::X, &[1])?,
            Some(_) => state.apply(Gate::H, &[1])?,
        }
        state.apply(Gate::H, &[0])?;
        state.apply(Gate::Cz, &[0, 1])?;
        state.apply(Gate::H, &[0])?;
        let mut checks = Vec::new();
        for b in measure_enumerate(&state, 0)? {
            // The atomic outcome must equal the photon number of its branch,
            // and the photon must stay in that number state.
            let photon_one = b.state.prob_one(1);
            let expected_photon = if b.outcome == -1 { 1.0 } else { 0.0 };
            let deviation = (photon_one - expected_photon).abs();
            worst = worst.max(deviation);
            checks.push(BranchCheck {
                outcomes: vec![b.outcome],
                probability: b.probability,
                deviation,
            });
        }
        cases.push((String::from(label), checks));
    }
    Ok(CircuitReport { cases, max_deviation: worst })
}

/// Photonic qubit encodings used by the key-distribution protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdEncoding {
    Fock,
    Polarization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdBasis {
    X,
    Y,
}

/// The only information the protocol reveals: whether φ₁+φ₂ is 0 or π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiSum {
    Zero,
    Pi,
}

/// One enumerated branch of a key-distribution round.
#[derive(Debug, Clone)]
pub struct QkdRow {
    /// Measurement outcomes in protocol order (m₁, m₂[, m₃]).
    pub outcomes: Vec<i8>,
    pub probability: f64,
    /// The class of φ₁+φ₂ the round actually carried.
    pub phi_sum: PhiSum,
}

/// Outcome of one round: rejected for mismatched bases, otherwise all
/// measurement branches.
#[derive(Debug, Clone)]
pub enum QkdRun {
    Rejected,
    Rows(Vec<QkdRow>),
}

/// Basis of a phase choice: φ ∈ {0, ±π} is X, φ = ±π/2 is Y.
pub fn basis_of(phi: f64) -> Result<QkdBasis> {
    let tol = 1e-9;
    let canonical = wrap_tau(phi);
    if canonical.abs() < tol
        || (canonical - PI).abs() < tol
        || (canonical - TAU).abs() < tol
    {
        Ok(QkdBasis::X)
    } else if (canonical - FRAC_PI_2).abs() < tol || (canonical - 1.5 * PI).abs() < tol {
        Ok(QkdBasis::Y)
    } else {
        Err(Error::Domain(format!("phase {phi} is not an X- or Y-basis choice")))
    }
}

fn phi_sum_class(phi1: f64, phi2: f64) -> PhiSum {
    let s = wrap_tau(phi1 + phi2);
    if s.abs() < 1e-9 || (s - TAU).abs() < 1e-9 {
        PhiSum::Zero
    } else {
        PhiSum::Pi
    }
}

/// Run one key-distribution round with sender phases φ₁ and φ₂. Phases
/// must come from {0, ±π} (X) or {±π/2} (Y); rounds whose bases differ are
/// rejected, mirroring the classical sifting step.
pub fn qkd_run(encoding: QkdEncoding, phi1: f64, phi2: f64) -> Result<QkdRun> {
    let b1 = basis_of(phi1)?;
    let b2 = basis_of(phi2)?;
    if b1 != b2 {
        return Ok(QkdRun::Rejected);
    }
    let class = phi_sum_class(phi1, phi2);
    let rows = match encoding {
        QkdEncoding::Fock => qkd_fock(phi1, phi2, class)?,
        QkdEncoding::Polarization => qkd_polarization(phi1, phi2, class)?,
    };
    Ok(QkdRun::Rows(rows))
}

fn prepare_phase_qubit(state: &mut StateVector, reg: usize, phi: f64) -> Result<()> {
    let inv = 1.0 / 2f64.sqrt();
    state.prepare(reg, C64::new(inv, 0.0), C64::from_polar(inv, phi))
}

fn qkd_fock(phi1: f64, phi2: f64, class: PhiSum) -> Result<Vec<QkdRow>> {
    let mut state = new_register(2)?;
    prepare_phase_qubit(&mut state, 1, phi1)?;
    prepare_phase_qubit(&mut state, 2, phi2)?;
    // Store the first photon on the atom.
    state = apply_store(&state, 0, 1)?;
    // H_a · Z_{a2} · H_a, then measure the atom.
    state.apply(Gate::H, &[0])?;
    state.apply(Gate::Cz, &[0, 2])?;
    state.apply(Gate::H, &[0])?;
    let mut rows = Vec::new();
    for b1 in measure_enumerate(&state, 0)? {
        let mut post = b1.state.clone();
        if b1.outcome == -1 {
            post.apply(Gate::X, &[0])?;
        }
        // Store the second photon and read it out in the X basis.
        post = apply_store(&post, 0, 2)?;
        post.apply(Gate::H, &[0])?;
        for b2 in measure_enumerate(&post, 0)? {
            rows.push(QkdRow {
                outcomes: vec![b1.outcome, b2.outcome],
                probability: b1.probability * b2.probability,
                phi_sum: class,
            });
        }
    }
    Ok(rows)
}

fn qkd_polarization(phi1: f64, phi2: f64, class: PhiSum) -> Result<Vec<QkdRow>> {
    let mut state = new_register(2)?;
    state.apply(Gate::H, &[0])?;
    prepare_phase_qubit(&mut state, 1, phi1)?;
    prepare_phase_qubit(&mut state, 2, phi2)?;
    // Step 1: controlled phase with photon 1, Hadamards on atom and
    // photon, photon measured.
    state.apply(Gate::Cz, &[0, 1])?;
    state.apply(Gate::H, &[0])?;
    state.apply(Gate::H, &[1])?;
    let mut rows = Vec::new();
    for b1 in measure_enumerate(&state, 1)? {
        // Step 2: photon 2 sandwiched between Hadamards.
        let mut post = b1.state.clone();
        post.apply(Gate::H, &[2])?;
        post.apply(Gate::Cz, &[0, 2])?;
        post.apply(Gate::H, &[2])?;
        for b2 in measure_enumerate(&post, 2)? {
            let mut last = b2.state.clone();
            last.apply(Gate::H, &[0])?;
            for b3 in measure_enumerate(&last, 0)? {
                rows.push(QkdRow {
                    outcomes: vec![b1.outcome, b2.outcome, b3.outcome],
                    probability: b1.probability * b2.probability * b3.probability,
                    phi_sum: class,
                });
            }
        }
    }
    Ok(rows)
}

/// A published truth-table row: measurement outcomes and the φ-sum class
/// they reveal.
pub type TruthRow = (Vec<i8>, PhiSum);

/// The four truth tables connecting Charlie's broadcast outcomes with
/// φ₁ + φ₂.
pub fn reference_truth_table(encoding: QkdEncoding, basis: QkdBasis) -> Vec<TruthRow> {
    use PhiSum::{Pi, Zero};
    match (encoding, basis) {
        (QkdEncoding::Fock, QkdBasis::X) => vec![
            (vec![1, 1], Zero),
            (vec![1, -1], Pi),
            (vec![-1, 1], Zero),
            (vec![-1, -1], Pi),
        ],
        (QkdEncoding::Fock, QkdBasis::Y) => vec![
            (vec![1, 1], Zero),
            (vec![1, -1], Pi),
            (vec![-1, 1], Pi),
            (vec![-1, -1], Zero),
        ],
        (QkdEncoding::Polarization, QkdBasis::X) => vec![
            (vec![1, 1, 1], Zero),
            (vec![1, -1, 1], Zero),
            (vec![-1, 1, -1], Zero),
            (vec![-1, -1, -1], Zero),
            (vec![1, 1, -1], Pi),
            (vec![1, -1, -1], Pi),
            (vec![-1, 1, 1], Pi),
            (vec![-1, -1, 1], Pi),
        ],
        (QkdEncoding::Polarization, QkdBasis::Y) => vec![
            (vec![1, 1, 1], Zero),
            (vec![1, -1, -1], Zero),
            (vec![-1, 1, -1], Zero),
            (vec![-1, -1, 1], Zero),
            (vec![1, 1, -1], Pi),
            (vec![1, -1, 1], Pi),
            (vec![-1, 1, 1], Pi),
            (vec![-1, -1, -1], Pi),
        ],
    }
}

/// Phase choices of a basis, in (φ₁+φ₂ = 0 pair, = π pair) order.
pub fn basis_phases(basis: QkdBasis) -> [f64; 2] {
    match basis {
        QkdBasis::X => [0.0, PI],
        QkdBasis::Y => [FRAC_PI_2, -FRAC_PI_2],
    }
}

/// Derive the truth table for a basis by exhaustive enumeration of the
/// four input combinations, checking that every observed outcome pattern
/// maps to a single φ-sum class.
pub fn derive_truth_table(
    encoding: QkdEncoding,
    basis: QkdBasis,
) -> Result<Vec<TruthRow>> {
    let phases = basis_phases(basis);
    let mut mapping: Vec<TruthRow> = Vec::new();
    for &phi1 in &phases {
        for &phi2 in &phases {
            let rows = match qkd_run(encoding, phi1, phi2)? {
                QkdRun::Rows(rows) => rows,
                QkdRun::Rejected => {
                    return Err(Error::Domain("matched bases were rejected".into()))
                }
            };
            for row in rows {
                if row.probability < 1e-12 {
                    continue;
                }
                match mapping.iter().find(|(o, _)| *o == row.outcomes) {
                    Some((_, class)) if *class != row.phi_sum => {
                        return Err(Error::Domain(format!(
                            "outcome {:?} maps to both φ-sum classes",
                            row.outcomes
                        )));
                    }
                    Some(_) => {}
                    None => mapping.push((row.outcomes.clone(), row.phi_sum)),
                }
            }
        }
    }
    // Canonical order: class Zero first, then lexicographic with +1 < −1.
    mapping.sort_by_key(|(o, class)| {
        let class_key = matches!(class, PhiSum::Pi) as usize;
        let mut word = 0usize;
        for &m in o {
            word = (word << 1) | ((m == -1) as usize);
        }
        (class_key, word)
    });
    Ok(mapping)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_examples() {
        let two = build_ghz_single_rail(2).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((two.amplitudes()[0].re - r).abs() < 1e-12);
        assert!((two.amplitudes()[3].re - r).abs() < 1e-12);
        // Three-photon GHZ passes its stabilizer checks.
        let three = build_ghz_single_rail(3).unwrap();
        let xxx = expect_pauli(&three, &[(0, Pauli::X), (1, Pauli::X), (2, Pauli::X)])
            .unwrap();
        assert!((xxx - 1.0).norm() < 1e-10);
        for pair in [(0, 1), (1, 2)] {
            let zz =
                expect_pauli(&three, &[(pair.0, Pauli::Z), (pair.1, Pauli::Z)]).unwrap();
            assert!((zz - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn ghz_stabilizers_hold_up_to_six_photons() {
        for n in 2..=6 {
            let state = build_ghz_single_rail(n).unwrap();
            let defect = ghz_stabilizer_defect(&state).unwrap();
            assert!(defect < 1e-10, "n = {n}: defect {defect:e}");
        }
    }

    #[test]
    fn qkd_branches_conserve_probability() {
        for encoding in [QkdEncoding::Fock, QkdEncoding::Polarization] {
            for basis in [QkdBasis::X, QkdBasis::Y] {
                let [a, b] = basis_phases(basis);
                for phi1 in [a, b] {
                    for phi2 in [a, b] {
                        let rows = match qkd_run(encoding, phi1, phi2).unwrap() {
                            QkdRun::Rows(r) => r,
                            QkdRun::Rejected => panic!("bases match"),
                        };
                        let total: f64 = rows.iter().map(|r| r.probability).sum();
                        assert!(
                            (total - 1.0).abs() < 1e-10,
                            "{encoding:?}/{basis:?} ({phi1}, {phi2}): total {total}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cluster_states_satisfy_their_stabilizers() {
        for n in 2..=5 {
            for encoding in [ClusterEncoding::SingleRail, ClusterEncoding::DualRail] {
                let state = build_cluster_1d(n, encoding).unwrap();
                let defect = stabilizer_defect(&state, &path_edges(n)).unwrap();
                assert!(defect < 1e-10, "n = {n}, {encoding:?}: defect {defect:e}");
                // Negative control: a bare X on qubit 0 is not a stabilizer.
                let bare = expect_pauli(&state, &[(0, Pauli::X)]).unwrap();
                assert!((bare - 1.0).norm() > 0.5);
            }
        }
    }

    #[test]
    fn ghz_leaves_the_atom_deterministically_unexcited() {
        // Re-run the two-photon construction keeping the atom register and
        // measure it: a single branch with outcome +1.
        let mut state = super::new_register(2).unwrap();
        state.apply(Gate::H, &[0]).unwrap();
        state = crate::register::apply_p(&state, 0, 1).unwrap();
        state.apply(Gate::H, &[0]).unwrap();
        state.apply(Gate::Cz, &[0, 1]).unwrap();
        state.apply(Gate::H, &[0]).unwrap();
        state = crate::register::apply_p(&state, 0, 2).unwrap();
        let branches = crate::register::measure_enumerate(&state, 0).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].outcome, 1);
        assert!((branches[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_photon_cluster_matches_the_closed_form() {
        // Z₂₁|++⟩.
        let state = build_cluster_1d(2, ClusterEncoding::SingleRail).unwrap();
        let reference = graph_state(2, &path_edges(2)).unwrap();
        assert!((state.overlap(&reference) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ring_cluster_matches_the_ring_graph() {
        let state = build_cluster_ring(3).unwrap();
        let defect = stabilizer_defect(&state, &ring_edges(3)).unwrap();
        assert!(defect < 1e-10, "defect {defect:e}");
        let reference = graph_state(3, &ring_edges(3)).unwrap();
        assert!((state.overlap(&reference) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn photon_photon_gate_is_cz_on_every_branch() {
        let report = photon_photon_cz().unwrap();
        assert!(report.max_deviation < 1e-12, "max dev {:e}", report.max_deviation);
        // Superposition inputs branch half-and-half.
        let (_, checks) =
            report.cases.iter().find(|(label, _)| label == "++").unwrap();
        assert_eq!(checks.len(), 2);
        for c in checks {
            assert!((c.probability - 0.5).abs() < 1e-12);
        }
        // Probabilities over branches sum to one for every input.
        for (label, checks) in &report.cases {
            let total: f64 = checks.iter().map(|c| c.probability).sum();
            assert!((total - 1.0).abs() < 1e-10, "{label}");
        }
    }

    #[test]
    fn qnd_detection_flips_exactly_with_the_photon() {
        let report = qnd_detect().unwrap();
        assert!(report.max_deviation < 1e-12);
        let by_label = |l: &str| {
            report
                .cases
                .iter()
                .find(|(label, _)| label == l)
                .map(|(_, c)| c.clone())
                .unwrap()
        };
        let vacuum = by_label("vacuum");
        assert_eq!(vacuum.len(), 1);
        assert_eq!(vacuum[0].outcomes[0], 1);
        let photon = by_label("photon");
        assert_eq!(photon.len(), 1);
        assert_eq!(photon[0].outcomes[0], -1);
        let plus = by_label("plus");
        assert_eq!(plus.len(), 2);
        for c in &plus {
            assert!((c.probability - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn fock_truth_tables_match_the_published_rows() {
        for basis in [QkdBasis::X, QkdBasis::Y] {
            let derived = derive_truth_table(QkdEncoding::Fock, basis).unwrap();
            let expected = reference_truth_table(QkdEncoding::Fock, basis);
            let mut expected_sorted = expected.clone();
            expected_sorted.sort_by_key(|(o, class)| {
                let class_key = matches!(class, PhiSum::Pi) as usize;
                let mut word = 0usize;
                for &m in o {
                    word = (word << 1) | ((m == -1) as usize);
                }
                (class_key, word)
            });
            assert_eq!(derived, expected_sorted, "{basis:?}");
        }
    }

    #[test]
    fn polarization_truth_tables_match_the_published_rows() {
        for basis in [QkdBasis::X, QkdBasis::Y] {
            let derived = derive_truth_table(QkdEncoding::Polarization, basis).unwrap();
            assert_eq!(derived.len(), 8, "{basis:?}");
            let expected = reference_truth_table(QkdEncoding::Polarization, basis);
            for row in &expected {
                assert!(derived.contains(row), "{basis:?} missing {row:?}");
            }
        }
    }

    #[test]
    fn specific_rows_from_the_published_tables() {
        // Fock, x basis: m₁ = 1, m₂ = −1 ⇒ φ₁+φ₂ = π.
        let rows = match qkd_run(QkdEncoding::Fock, 0.0, PI).unwrap() {
            QkdRun::Rows(r) => r,
            _ => panic!("bases match"),
        };
        for row in &rows {
            assert_eq!(row.phi_sum, PhiSum::Pi);
            if row.outcomes[0] == 1 {
                assert_eq!(row.outcomes[1], -1);
            }
        }
        // Fock, y basis: (−1, −1) appears only for φ₁+φ₂ = 0.
        let rows = match qkd_run(QkdEncoding::Fock, FRAC_PI_2, -FRAC_PI_2).unwrap() {
            QkdRun::Rows(r) => r,
            _ => panic!("bases match"),
        };
        assert!(rows
            .iter()
            .any(|r| r.outcomes == vec![-1, -1] && r.phi_sum == PhiSum::Zero));
        // Polarization, x basis: (−1, 1, −1) ⇒ φ₁+φ₂ = 0.
        let rows = match qkd_run(QkdEncoding::Polarization, 0.0, 0.0).unwrap() {
            QkdRun::Rows(r) => r,
            _ => panic!("bases match"),
        };
        assert!(rows
            .iter()
            .any(|r| r.outcomes == vec![-1, 1, -1] && r.phi_sum == PhiSum::Zero));
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        assert!(matches!(
            qkd_run(QkdEncoding::Fock, 0.0, FRAC_PI_2).unwrap(),
            QkdRun::Rejected
        ));
        assert!(qkd_run(QkdEncoding::Fock, 0.3, 0.0).is_err());
    }

    #[test]
    fn outcome_distribution_depends_only_on_the_phase_sum() {
        // The two preimages of each φ-sum within a basis must give
        // identical outcome distributions.
        for encoding in [QkdEncoding::Fock, QkdEncoding::Polarization] {
            for basis in [QkdBasis::X, QkdBasis::Y] {
                let [a, b] = basis_phases(basis);
                let pairs_zero = [(a, negated(a)), (b, negated(b))];
                let pairs_pi = [(a, b), (b, a)];
                for pairs in [pairs_zero, pairs_pi] {
                    let d0 = distribution(encoding, pairs[0].0, pairs[0].1);
                    let d1 = distribution(encoding, pairs[1].0, pairs[1].1);
                    assert_eq!(d0.len(), d1.len());
                    for (o, p) in &d0 {
                        let q = d1
                            .iter()
                            .find(|(o2, _)| o2 == o)
                            .map(|(_, q)| *q)
                            .unwrap_or(0.0);
                        assert!((p - q).abs() < 1e-10, "{encoding:?} {basis:?} {o:?}");
                    }
                }
            }
        }
    }

    // Partner phase making the sum vanish (mod 2π) within the basis set.
    fn negated(phi: f64) -> f64 {
        if phi == 0.0 {
            0.0
        } else if (phi - PI).abs() < 1e-12 {
            PI
        } else {
            -phi
        }
    }

    fn distribution(encoding: QkdEncoding, phi1: f64, phi2: f64) -> Vec<(Vec<i8>, f64)> {
        let rows = match qkd_run(encoding, phi1, phi2).unwrap() {
            QkdRun::Rows(r) => r,
            _ => panic!("bases match"),
        };
        let mut dist: Vec<(Vec<i8>, f64)> = Vec::new();
        for r in rows {
            match dist.iter_mut().find(|(o, _)| *o == r.outcomes) {
                Some((_, p)) => *p += r.probability,
                None => dist.push((r.outcomes, r.probability)),
            }
        }
        dist
    }
}
