use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default upper bound on simulated qubits (2^16 amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 16;

const NORM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;

pub type Gate = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const HADAMARD: Gate = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
];

/// `diag(1, i)`.
pub const SQRT_Z: Gate = [[ONE, ZERO], [ZERO, Complex64::new(0.0, 1.0)]];

/// `σ_x σ_z`: |0⟩ → |1⟩, |1⟩ → −|0⟩. Squares to −I.
pub const VOTER_GATE: Gate = [[ZERO, Complex64::new(-1.0, 0.0)], [ONE, ZERO]];

/// Dense pure state of `n` qubits.
///
/// Qubit `q` is bit `n - 1 - q` of the amplitude index, so the outcome string
/// `(y_0, …, y_{n-1})` reads as the binary expansion of the index.
#[derive(Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl fmt::Debug for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PureState")
            .field("n_qubits", &self.n_qubits)
            .field("nonzero", &self.debug_records())
            .finish()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::precondition("a state needs at least one qubit"));
    }
    if n > cap {
        return Err(Error::QubitCap { requested: n, cap });
    }
    Ok(())
}

impl PureState {
    /// Wraps an amplitude vector, checking length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_cap(n_qubits, usize::BITS as usize - 1)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::LengthMismatch { expected: 1 << n_qubits, got: amps.len() });
        }
        let state = PureState { n_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm first.
    pub fn normalized(n_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < ORTHO_TOL {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(n_qubits, amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_cap(n_qubits, usize::BITS as usize - 1)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::precondition(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(PureState { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.same_width(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Pure-state trace distance `sqrt(1 - |⟨a|b⟩|²)`.
    pub fn trace_distance(&self, other: &PureState) -> Result<f64> {
        let ov = self.inner(other)?.norm_sqr();
        Ok((1.0 - ov).max(0.0).sqrt())
    }

    /// `|⟨self|GHZ⟩|²`. The trace distance to GHZ is `sqrt(1 - value)`.
    pub fn ghz_fidelity_sq(&self) -> f64 {
        let last = self.amps.len() - 1;
        ((self.amps[0] + self.amps[last]) * FRAC_1_SQRT_2).norm_sqr()
    }

    /// Applies a single-qubit gate in place.
    pub fn apply_gate(&mut self, qubit: usize, gate: &Gate) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::AgentOutOfRange { index: qubit, n: self.n_qubits });
        }
        let stride = 1usize << (self.n_qubits - 1 - qubit);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = gate[0][0] * a0 + gate[0][1] * a1;
                self.amps[i + stride] = gate[1][0] * a0 + gate[1][1] * a1;
            }
            base += 2 * stride;
        }
        Ok(())
    }

    /// Applies the same single-qubit gate to every qubit.
    pub fn apply_all(&mut self, gate: &Gate) {
        for q in 0..self.n_qubits {
            self.apply_gate(q, gate).expect("qubit index in range");
        }
    }

    /// `σ_x σ_z` on the agent's qubit.
    pub fn voter_transform(&self, agent: usize) -> Result<PureState> {
        let mut out = self.clone();
        out.apply_gate(agent, &VOTER_GATE)?;
        Ok(out)
    }

    /// Maps a GHZ-frame state into the frame where the ideal resource is `|Φ₀ⁿ⟩`:
    /// a Hadamard followed by `√Z` on every qubit.
    pub fn to_phi_frame(&self) -> PureState {
        let mut out = self.clone();
        out.apply_all(&HADAMARD);
        out.apply_all(&SQRT_Z);
        out
    }

    /// Inverse of [`to_phi_frame`](Self::to_phi_frame).
    pub fn from_phi_frame(&self) -> PureState {
        let sqrt_z_dag: Gate = [[ONE, ZERO], [ZERO, Complex64::new(0.0, -1.0)]];
        let mut out = self.clone();
        out.apply_all(&sqrt_z_dag);
        out.apply_all(&HADAMARD);
        out
    }

    /// Multiplies by a global phase so that the overlap with `reference` is real
    /// and nonnegative.
    pub fn phase_aligned_to(&self, reference: &PureState) -> Result<PureState> {
        let ov = reference.inner(self)?;
        if ov.norm() < ORTHO_TOL {
            return Ok(self.clone());
        }
        let phase = ov.conj() / ov.norm();
        Ok(PureState {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * phase).collect(),
        })
    }

    /// Nonzero amplitudes as `(index, re, im)` records.
    pub fn debug_records(&self) -> Vec<(usize, f64, f64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 1e-24)
            .map(|(i, a)| (i, a.re, a.im))
            .collect()
    }

    pub(crate) fn bit(&self, index: usize, qubit: usize) -> bool {
        (index >> (self.n_qubits - 1 - qubit)) & 1 == 1
    }

    fn same_width(&self, other: &PureState) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        Ok(())
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits, capped at [`DEFAULT_QUBIT_CAP`].
pub fn ghz_state(n: usize) -> Result<PureState> {
    ghz_state_capped(n, DEFAULT_QUBIT_CAP)
}

pub fn ghz_state_capped(n: usize, cap: usize) -> Result<PureState> {
    check_cap(n, cap)?;
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[dim - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState { n_qubits: n, amps })
}

/// `|Φ₀ⁿ⟩` (`which = 0`) or `|Φ₁ⁿ⟩` (`which = 1`).
///
/// `|Φ₀ⁿ⟩` is the GHZ state after a Hadamard and then `√Z` on each qubit:
/// even-weight strings with sign `−1` when the weight is 2 mod 4.
/// `|Φ₁ⁿ⟩` covers odd-weight strings with sign `−1` when the weight is 3 mod 4.
pub fn phi_basis_state(n: usize, which: u8) -> Result<PureState> {
    match which {
        0 => Ok(ghz_state(n)?.to_phi_frame()),
        1 => {
            check_cap(n, DEFAULT_QUBIT_CAP)?;
            let scale = (2f64.powi(n as i32 - 1)).sqrt().recip();
            let amps = (0..1usize << n)
                .map(|i| match i.count_ones() % 4 {
                    1 => Complex64::new(scale, 0.0),
                    3 => Complex64::new(-scale, 0.0),
                    _ => ZERO,
                })
                .collect();
            PureState::from_amplitudes(n, amps)
        }
        other => Err(Error::precondition(format!("phi basis label must be 0 or 1, got {other}"))),
    }
}

/// Unit vector along the `|Φ₁ⁿ⟩` amplitudes with the GHZ component removed.
/// This is the deviation direction used for the canonical ε-far family.
pub fn canonical_direction(n: usize) -> Result<PureState> {
    let ghz = ghz_state(n)?;
    let phi1 = phi_basis_state(n, 1)?;
    orthogonalize(&phi1, &ghz)
}

/// Gram–Schmidt step: `v − ⟨r|v⟩ r`, renormalized.
pub fn orthogonalize(v: &PureState, reference: &PureState) -> Result<PureState> {
    let ov = reference.inner(v)?;
    let amps = v.amps.iter().zip(&reference.amps).map(|(a, r)| a - ov * r).collect();
    PureState::normalized(v.n_qubits, amps)
}

/// `√(1−ε²)|GHZ⟩ + ε|direction⟩`: a pure state at trace distance exactly `eps`
/// from GHZ. The direction is first phase-fixed by the orthogonality check.
pub fn state_at_trace_distance(n: usize, eps: f64, direction: &PureState) -> Result<PureState> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::precondition(format!("trace distance {eps} outside [0, 1]")));
    }
    state_at_overlap_amp(n, (1.0 - eps * eps).sqrt(), direction)
}

/// `a|GHZ⟩ + √(1−a²)|direction⟩`, i.e. `⟨GHZ|ψ⟩ = a`.
pub fn state_at_overlap_amp(n: usize, a: f64, direction: &PureState) -> Result<PureState> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::precondition(format!("overlap amplitude {a} outside [0, 1]")));
    }
    let ghz = ghz_state(n)?;
    if direction.n_qubits != n {
        return Err(Error::LengthMismatch { expected: n, got: direction.n_qubits });
    }
    let ov = ghz.inner(direction)?;
    if ov.norm() > ORTHO_TOL {
        return Err(Error::precondition(format!(
            "direction overlaps GHZ with amplitude {:.3e}",
            ov.norm()
        )));
    }
    let b = (1.0 - a * a).max(0.0).sqrt();
    let amps = ghz.amps.iter().zip(&direction.amps).map(|(g, d)| g * a + d * b).collect();
    PureState::normalized(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn ghz_small_cases() {
        let s = FRAC_1_SQRT_2;
        let g1 = ghz_state(1).unwrap();
        assert!(close(g1.amps[0], s.into()) && close(g1.amps[1], s.into()));
        let g2 = ghz_state(2).unwrap();
        assert_eq!(g2.debug_records(), vec![(0, s, 0.0), (3, s, 0.0)]);
        let g4 = ghz_state(4).unwrap();
        assert_eq!(g4.debug_records(), vec![(0, s, 0.0), (15, s, 0.0)]);
    }

    #[test]
    fn ghz_cap_is_enforced() {
        match ghz_state(17) {
            Err(Error::QubitCap { requested: 17, cap: 16 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(ghz_state_capped(3, 2).is_err());
        assert!(ghz_state(0).is_err());
    }

    #[test]
    fn phi0_single_qubit_matches_explicit_matrices() {
        // H|+⟩ = |0⟩, then √Z|0⟩ = |0⟩.
        let phi = phi_basis_state(1, 0).unwrap();
        assert!(close(phi.amps[0], ONE));
        assert!(close(phi.amps[1], ZERO));
    }

    #[test]
    fn phi_states_are_orthogonal() {
        for n in 1..=6 {
            let a = phi_basis_state(n, 0).unwrap();
            let b = phi_basis_state(n, 1).unwrap();
            assert!(a.inner(&b).unwrap().norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn voter_gate_maps_phi0_to_phi1_and_back() {
        let phi0 = phi_basis_state(3, 0).unwrap();
        let phi1 = phi_basis_state(3, 1).unwrap();
        for agent in 0..3 {
            let t = phi0.voter_transform(agent).unwrap();
            assert!(t.inner(&phi1).unwrap().re > 1.0 - 1e-12);
            let back = phi1.voter_transform(agent).unwrap();
            assert!(back.inner(&phi0).unwrap().re < -1.0 + 1e-12);
        }
    }

    #[test]
    fn voter_gate_twice_negates() {
        let psi = canonical_direction(3).unwrap();
        let twice = psi.voter_transform(1).unwrap().voter_transform(1).unwrap();
        for (a, b) in twice.amps.iter().zip(&psi.amps) {
            assert!(close(*a, -b));
        }
        assert!(psi.voter_transform(3).is_err());
    }

    #[test]
    fn phi1_pulled_back_is_orthogonal_to_ghz() {
        let phi1 = phi_basis_state(4, 1).unwrap();
        assert!(phi1.from_phi_frame().ghz_fidelity_sq() < 1e-12);
    }

    #[test]
    fn trace_distance_family() {
        let dir = canonical_direction(4).unwrap();
        let ghz = ghz_state(4).unwrap();
        assert_eq!(state_at_trace_distance(4, 0.0, &dir).unwrap().amps, ghz.amps);
        let one = state_at_trace_distance(4, 1.0, &dir).unwrap();
        assert!(one.inner(&dir).unwrap().re > 1.0 - 1e-12);
        let psi = state_at_trace_distance(4, 0.3, &dir).unwrap();
        let ov = psi.inner(&ghz).unwrap().norm_sqr();
        assert!(((1.0 - ov).sqrt() - 0.3).abs() < 1e-10);
        let psi = state_at_trace_distance(4, 0.6, &dir).unwrap();
        assert!((psi.ghz_fidelity_sq() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn non_orthogonal_direction_is_rejected() {
        let ghz = ghz_state(3).unwrap();
        assert!(matches!(
            state_at_trace_distance(3, 0.2, &ghz),
            Err(Error::Precondition(_))
        ));
        // Raw Φ₁ amplitudes overlap GHZ at odd n; the canonical direction does not.
        assert!(state_at_trace_distance(3, 0.2, &phi_basis_state(3, 1).unwrap()).is_err());
        assert!(state_at_trace_distance(3, 0.2, &canonical_direction(3).unwrap()).is_ok());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(PureState::from_amplitudes(1, vec![ONE, ONE]).is_err());
        assert!(PureState::from_amplitudes(1, vec![ONE]).is_err());
        assert!(PureState::normalized(1, vec![ONE, ONE]).is_ok());
    }

    #[test]
    fn phi_frame_round_trip() {
        let psi = state_at_trace_distance(3, 0.4, &canonical_direction(3).unwrap()).unwrap();
        let back = psi.to_phi_frame().from_phi_frame();
        assert!(psi.inner(&back).unwrap().re > 1.0 - 1e-12);
    }
}
