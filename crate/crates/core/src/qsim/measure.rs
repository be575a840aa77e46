use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;

use super::state::{Gate, PureState};
use crate::error::{Error, Result};

/// Tolerance when reading `Σθ/π` back as an integer.
pub const PARITY_TOL: f64 = 1e-6;

/// Per-qubit angles `θ_j ∈ [0, π)` whose sum is a multiple of π.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementAngles {
    thetas: Vec<f64>,
    parity_target: bool,
}

impl MeasurementAngles {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = thetas.iter().find(|t| !(0.0..PI).contains(*t)) {
            return Err(Error::precondition(format!("angle {bad} outside [0, π)")));
        }
        let turns = thetas.iter().sum::<f64>() / PI;
        let rounded = turns.round();
        if (turns - rounded).abs() > PARITY_TOL {
            return Err(Error::precondition(format!(
                "angle sum is {turns} π, not an integer multiple of π"
            )));
        }
        Ok(MeasurementAngles { thetas, parity_target: (rounded as i64).rem_euclid(2) == 1 })
    }

    /// All-zero angles: the Hadamard (X) basis on every qubit.
    pub fn hadamard(n: usize) -> Self {
        MeasurementAngles { thetas: vec![0.0; n], parity_target: false }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn parity_target(&self) -> bool {
        self.parity_target
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// Unitary taking `|+_θ⟩ → |0⟩` and `|−_θ⟩ → |1⟩`, where
/// `|±_θ⟩ = (|0⟩ ± e^{iθ}|1⟩)/√2`.
fn rotated_basis_change(theta: f64) -> Gate {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let e = Complex64::from_polar(FRAC_1_SQRT_2, -theta);
    [[s, e], [s, -e]]
}

/// Exact Born distribution over all `2^n` outcome strings.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Probabilities indexed by outcome string read as a binary number
    /// (qubit 0 is the most significant bit).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, bits: &[bool]) -> f64 {
        self.probs[bits_to_index(bits)]
    }

    /// Total probability of outcome strings with odd XOR.
    pub fn odd_parity_mass(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| i.count_ones() % 2 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.probs.len() - 1;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                pick = i;
                break;
            }
        }
        // Fall-through only on round-off; keep the pick on a supported outcome.
        while self.probs[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        index_to_bits(pick, self.n_qubits)
    }
}

pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn index_to_bits(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| (index >> (n - 1 - q)) & 1 == 1).collect()
}

pub fn parity(bits: &[bool]) -> bool {
    bits.iter().fold(false, |acc, &b| acc ^ b)
}

impl PureState {
    /// Outcome law when qubit `j` is measured in the `|±_{θ_j}⟩` basis.
    pub fn outcome_distribution(&self, thetas: &[f64]) -> Result<OutcomeDistribution> {
        if thetas.len() != self.n_qubits() {
            return Err(Error::LengthMismatch { expected: self.n_qubits(), got: thetas.len() });
        }
        let mut rotated = self.clone();
        for (q, &theta) in thetas.iter().enumerate() {
            rotated.apply_gate(q, &rotated_basis_change(theta))?;
        }
        let probs = rotated.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        Ok(OutcomeDistribution { n_qubits: self.n_qubits(), probs })
    }

    /// One-shot measurement of every qubit in its rotated basis. Consumes the state.
    pub fn measure_all_rotated<R: Rng + ?Sized>(
        self,
        angles: &MeasurementAngles,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        Ok(self.outcome_distribution(angles.thetas())?.sample(rng))
    }

    /// One-shot X-basis measurement of every qubit. Consumes the state.
    pub fn measure_all_hadamard<R: Rng + ?Sized>(self, rng: &mut R) -> Vec<bool> {
        let n = self.n_qubits();
        self.measure_all_rotated(&MeasurementAngles::hadamard(n), rng)
            .expect("angle count matches qubit count")
    }
}

/// A distributed copy of the round's resource state. The first measurement
/// takes it; any later access is a one-shot violation.
#[derive(Debug)]
pub struct SharedState {
    inner: Option<PureState>,
}

impl SharedState {
    pub fn new(state: PureState) -> Self {
        SharedState { inner: Some(state) }
    }

    pub fn n_qubits(&self) -> Result<usize> {
        self.inner.as_ref().map(PureState::n_qubits).ok_or(Error::SpentState)
    }

    pub fn is_spent(&self) -> bool {
        self.inner.is_none()
    }

    pub fn take(&mut self) -> Result<PureState> {
        self.inner.take().ok_or(Error::SpentState)
    }
}

impl From<PureState> for SharedState {
    fn from(state: PureState) -> Self {
        SharedState::new(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{ghz_state, PureState};
    use crate::rng::stream_rng;

    #[test]
    fn angle_parity_is_read_from_the_sum() {
        assert!(!MeasurementAngles::new(vec![0.0, 0.0, 0.0]).unwrap().parity_target());
        let half = PI / 2.0;
        assert!(MeasurementAngles::new(vec![half, half, 0.0]).unwrap().parity_target());
        assert!(MeasurementAngles::new(vec![0.3, 0.3]).is_err());
        assert!(MeasurementAngles::new(vec![PI]).is_err());
    }

    #[test]
    fn ghz2_hadamard_distribution() {
        let d = ghz_state(2).unwrap().outcome_distribution(&[0.0, 0.0]).unwrap();
        let expect = [0.5, 0.0, 0.0, 0.5];
        for (p, e) in d.probs().iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_state_single_qubit_is_fair() {
        let d = PureState::basis(1, 0).unwrap().outcome_distribution(&[0.0]).unwrap();
        assert!((d.probs()[0] - 0.5).abs() < 1e-12 && (d.probs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ghz3_rotated_parity_follows_angle_sum() {
        let g = ghz_state(3).unwrap();
        assert!(g.outcome_distribution(&[0.0; 3]).unwrap().odd_parity_mass() < 1e-12);
        let half = PI / 2.0;
        let d = g.outcome_distribution(&[half, half, 0.0]).unwrap();
        assert!((d.odd_parity_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_gives_independent_fair_bits() {
        let d = PureState::basis(3, 0).unwrap().outcome_distribution(&[0.0; 3]).unwrap();
        assert!(d.probs().iter().all(|p| (p - 0.125).abs() < 1e-12));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = ghz_state(3).unwrap();
        assert!(matches!(
            g.outcome_distribution(&[0.0; 2]),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn shared_state_is_one_shot() {
        let mut shared = SharedState::new(ghz_state(2).unwrap());
        let s = shared.take().unwrap();
        let mut rng = stream_rng(1, 0);
        let bits = s.measure_all_hadamard(&mut rng);
        assert_eq!(bits.len(), 2);
        assert!(matches!(shared.take(), Err(Error::SpentState)));
    }

    #[test]
    fn index_bit_conversions_agree() {
        for i in 0..16 {
            assert_eq!(bits_to_index(&index_to_bits(i, 4)), i);
        }
        assert_eq!(index_to_bits(0b1000, 4), vec![true, false, false, false]);
    }
}
