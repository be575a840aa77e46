use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::state::PureState;
use crate::error::{Error, Result};

/// Density operator on a `dim`-dimensional space, stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let rho = DensityOperator { matrix };
        rho.validate(1e-10)?;
        Ok(rho)
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = DVector::from_column_slice(state.amplitudes());
        DensityOperator { matrix: &v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> =
            self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian, unit trace, positive semidefinite, all within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm_err = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > tol {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm_err:.3e})")));
        }
        if (self.trace() - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {} is not 1", self.trace())));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < -tol {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: other.dim() });
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * diff.symmetric_eigen().eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
    }
}

impl PureState {
    /// Reduced state on `keep` (in the order given), tracing out everything else.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let n = self.n_qubits();
        if keep.is_empty() {
            return Err(Error::precondition("partial trace needs at least one kept qubit"));
        }
        let mut seen = vec![false; n];
        for &q in keep {
            if q >= n {
                return Err(Error::AgentOutOfRange { index: q, n });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::precondition(format!("qubit {q} listed twice")));
            }
        }
        let traced: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let k = keep.len();
        let dk = 1usize << k;
        let dt = 1usize << traced.len();

        // Reshape ψ into a dk × dt matrix A, so that ρ_keep = A A†.
        let mut a = DMatrix::<Complex64>::zeros(dk, dt);
        for (index, amp) in self.amplitudes().iter().enumerate() {
            let row = keep.iter().fold(0, |acc, &q| (acc << 1) | self.bit(index, q) as usize);
            let col = traced.iter().fold(0, |acc, &q| (acc << 1) | self.bit(index, q) as usize);
            a[(row, col)] = *amp;
        }
        Ok(DensityOperator { matrix: &a * a.adjoint() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{canonical_direction, ghz_state, state_at_trace_distance};

    fn approx(z: Complex64, re: f64) -> bool {
        (z - Complex64::new(re, 0.0)).norm() < 1e-12
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = ghz_state(2).unwrap().partial_trace(&[0]).unwrap();
        assert!(approx(rho.entry(0, 0), 0.5) && approx(rho.entry(1, 1), 0.5));
        assert!(approx(rho.entry(0, 1), 0.0));
        rho.validate(1e-10).unwrap();
    }

    #[test]
    fn product_marginal_is_pure_projector() {
        let rho = PureState::basis(2, 0).unwrap().partial_trace(&[1]).unwrap();
        assert!(approx(rho.entry(0, 0), 1.0) && approx(rho.entry(1, 1), 0.0));
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz3_two_qubit_marginal() {
        let rho = ghz_state(3).unwrap().partial_trace(&[0, 1]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c && (r == 0 || r == 3) { 0.5 } else { 0.0 };
                assert!(approx(rho.entry(r, c), want), "({r},{c})");
            }
        }
    }

    #[test]
    fn ghz_strict_marginals_have_purity_half() {
        for n in 2..=5 {
            let g = ghz_state(n).unwrap();
            for mask in 1..(1usize << n) - 1 {
                let keep: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
                let rho = g.partial_trace(&keep).unwrap();
                assert!((rho.purity() - 0.5).abs() < 1e-12);
                let last = rho.dim() - 1;
                assert!(rho.entry(0, last).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn keep_everything_gives_the_pure_state() {
        let psi = state_at_trace_distance(3, 0.5, &canonical_direction(3).unwrap()).unwrap();
        let rho = psi.partial_trace(&[0, 1, 2]).unwrap();
        assert_eq!(rho, DensityOperator::from_pure(&psi));
        rho.validate(1e-10).unwrap();
    }

    #[test]
    fn bad_keep_sets_are_rejected() {
        let g = ghz_state(3).unwrap();
        assert!(g.partial_trace(&[]).is_err());
        assert!(g.partial_trace(&[3]).is_err());
        assert!(g.partial_trace(&[1, 1]).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = DensityOperator::from_pure(&PureState::basis(1, 0).unwrap());
        let b = DensityOperator::from_pure(&PureState::basis(1, 1).unwrap());
        assert!((a.trace_distance(&b).unwrap() - 1.0).abs() < 1e-12);
    }
}
