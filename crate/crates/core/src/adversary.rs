//! Dishonest behaviour: malicious state sources, lying verifiers, board
//! tampering and the coalition's identity-guessing attack.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{EventKind, Network, Transcript};
use crate::qsim::{
    canonical_direction, ghz_state, orthogonalize, parity, DensityOperator, PureState, SharedState,
    DEFAULT_QUBIT_CAP,
};
use crate::verify::{broadcast_outcomes, generate_angles, send_angles, VerificationOutcome};

// ---------------------------------------------------------------------------
// State sources

/// Emits the shared state of each repeat iteration. Sources only see the
/// public part of the transcript.
pub trait StateSource {
    fn emit(&mut self, n: usize, history: &Transcript) -> Result<PureState>;
}

/// Shape of the state a source sends.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceStrategy {
    Ideal,
    /// √(1−ε²)|GHZ⟩ + ε|direction⟩; `None` uses the canonical direction.
    FixedTraceDistance { eps: f64, direction: Option<PureState> },
    /// a|GHZ⟩ + √(1−a²)|canonical direction⟩.
    FixedOverlapAmp { a: f64 },
    /// Cycles through the listed strategies, one per emission.
    PerRoundSchedule(Vec<SourceStrategy>),
}

impl SourceStrategy {
    pub fn eps_far(eps: f64) -> Self {
        SourceStrategy::FixedTraceDistance { eps, direction: None }
    }

    /// Stateful source for `n` qubits.
    pub fn source(&self, n: usize) -> Result<ScheduledSource> {
        let states = match self {
            SourceStrategy::PerRoundSchedule(list) => {
                if list.is_empty() {
                    return Err(Error::config("empty source schedule"));
                }
                list.iter().map(|s| s.single_state(n)).collect::<Result<Vec<_>>>()?
            }
            other => vec![other.single_state(n)?],
        };
        Ok(ScheduledSource { states, next: 0 })
    }

    fn single_state(&self, n: usize) -> Result<PureState> {
        match self {
            SourceStrategy::Ideal => ghz_state(n),
            SourceStrategy::FixedTraceDistance { eps, direction } => {
                let dir = match direction {
                    Some(d) => orthogonalize(d, &ghz_state(n)?)?,
                    None => canonical_direction(n)?,
                };
                crate::qsim::state_at_trace_distance(n, *eps, &dir)
            }
            SourceStrategy::FixedOverlapAmp { a } => {
                crate::qsim::state_at_overlap_amp(n, *a, &canonical_direction(n)?)
            }
            SourceStrategy::PerRoundSchedule(_) => {
                Err(Error::config("source schedules cannot be nested"))
            }
        }
    }
}

impl fmt::Display for SourceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceStrategy::Ideal => f.write_str("ideal"),
            SourceStrategy::FixedTraceDistance { eps, direction: None } => write!(f, "eps_far:{eps}"),
            SourceStrategy::FixedTraceDistance { eps, direction: Some(_) } => {
                write!(f, "eps_far:{eps}(custom)")
            }
            SourceStrategy::FixedOverlapAmp { a } => write!(f, "overlap:{a}"),
            SourceStrategy::PerRoundSchedule(list) => {
                let parts: Vec<String> = list.iter().map(|s| s.to_string()).collect();
                write!(f, "schedule:{}", parts.join(","))
            }
        }
    }
}

fn parse_unit(s: &str, what: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| Error::config(format!("bad {what} {s:?}")))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::config(format!("{what} {x} outside [0, 1]")));
    }
    Ok(x)
}

impl FromStr for SourceStrategy {
    type Err = Error;

    /// `ideal`, `eps_far:0.6`, `overlap:0.9`, `schedule:ideal,eps_far:0.6`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(list) = s.strip_prefix("schedule:") {
            let parts = list
                .split(',')
                .map(|p| match p.trim() {
                    q if q.starts_with("schedule:") => Err(Error::config("nested schedule")),
                    q => q.parse(),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(SourceStrategy::PerRoundSchedule(parts));
        }
        if s == "ideal" {
            Ok(SourceStrategy::Ideal)
        } else if let Some(eps) = s.strip_prefix("eps_far:") {
            Ok(SourceStrategy::eps_far(parse_unit(eps, "trace distance")?))
        } else if let Some(a) = s.strip_prefix("overlap:") {
            Ok(SourceStrategy::FixedOverlapAmp { a: parse_unit(a, "overlap amplitude")? })
        } else {
            Err(Error::config(format!("unknown source model {s:?}")))
        }
    }
}

/// Precomputed states handed out in rotation.
#[derive(Clone, Debug)]
pub struct ScheduledSource {
    states: Vec<PureState>,
    next: usize,
}

impl StateSource for ScheduledSource {
    fn emit(&mut self, n: usize, _history: &Transcript) -> Result<PureState> {
        let state = self.states[self.next].clone();
        self.next = (self.next + 1) % self.states.len();
        if state.n_qubits() != n {
            return Err(Error::StrategyFault(format!(
                "source emitted {} qubits, expected {n}",
                state.n_qubits()
            )));
        }
        Ok(state)
    }
}

/// Adaptive source built from a closure over the public history.
pub struct AdaptiveSource<F>(pub F);

impl<F: FnMut(usize, &Transcript) -> Result<PureState>> StateSource for AdaptiveSource<F> {
    fn emit(&mut self, n: usize, history: &Transcript) -> Result<PureState> {
        let state = (self.0)(n, history)?;
        if state.n_qubits() != n || (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::StrategyFault("adaptive source emitted an invalid state".into()));
        }
        Ok(state)
    }
}

// ---------------------------------------------------------------------------
// Coalitions and the lying verifier

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalition {
    members: Vec<bool>,
}

impl Coalition {
    pub fn new(n: usize, ids: &[usize]) -> Result<Self> {
        let mut members = vec![false; n];
        for &i in ids {
            if i >= n {
                return Err(Error::AgentOutOfRange { index: i, n });
            }
            members[i] = true;
        }
        let size = members.iter().filter(|m| **m).count();
        if size == 0 || size == n {
            return Err(Error::config("a coalition must be nonempty and leave an honest agent"));
        }
        Ok(Coalition { members })
    }

    pub fn n_agents(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.members.get(agent).copied().unwrap_or(false)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }

    pub fn honest(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| !self.members[i]).collect()
    }

    /// `H`, the number of honest agents.
    pub fn h(&self) -> usize {
        self.members.iter().filter(|m| !**m).count()
    }
}

/// Verification run by a coalition member: honest agents report their real
/// outcomes, the verifier speaks last and picks its bit to fix the parity.
pub fn lying_verifier_round<R: Rng + ?Sized>(
    state: &mut SharedState,
    verifier: usize,
    coalition: &Coalition,
    net: &mut Network,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    if !coalition.contains(verifier) {
        return Err(Error::precondition(format!("verifier {verifier} is not in the coalition")));
    }
    let n = state.n_qubits()?;
    let angles = generate_angles(n, rng);
    send_angles(&angles, verifier, net);
    let mut outcomes = state.take()?.measure_all_rotated(&angles, rng)?;
    if parity(&outcomes) != angles.parity_target() {
        outcomes[verifier] ^= true;
    }
    broadcast_outcomes(&outcomes, net);
    let outcome = VerificationOutcome { verifier, angles, outcomes, accepted: true };
    net.note(EventKind::VerifyResult, || outcome.record());
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// Board tampering

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tamper {
    /// Append a row and a column, keeping row parities.
    AddRowCol,
    /// Flip `B[row][col]`.
    FlipRowBit { row: usize, col: usize },
}

impl fmt::Display for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tamper::AddRowCol => f.write_str("grow"),
            Tamper::FlipRowBit { row, col } => write!(f, "flip:{row},{col}"),
        }
    }
}

pub fn board_tamper(rows: &[Vec<bool>], attack: Tamper) -> Vec<Vec<bool>> {
    let mut out = rows.to_vec();
    match attack {
        Tamper::AddRowCol => {
            for row in out.iter_mut() {
                row.push(false);
            }
            let width = out.first().map_or(1, Vec::len);
            // The extra row carries a vote of 1 in its first entry.
            let mut extra = vec![false; width];
            extra[0] = true;
            out.push(extra);
        }
        Tamper::FlipRowBit { row, col } => {
            if let Some(bit) = out.get_mut(row).and_then(|r| r.get_mut(col)) {
                *bit ^= true;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum AdversaryModel {
    #[default]
    None,
    Coalition(Coalition),
    Tamper(Tamper),
}

impl AdversaryModel {
    /// `none`, `coalition:[0,2]`, `tamper:flip:ℓ,k`, `tamper:grow`.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        if s == "none" || s.is_empty() {
            return Ok(AdversaryModel::None);
        }
        if let Some(list) = s.strip_prefix("coalition:") {
            let list = list.trim().trim_start_matches('[').trim_end_matches(']');
            let ids = list
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| Error::config(format!("bad agent id {x:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok(AdversaryModel::Coalition(Coalition::new(n, &ids)?));
        }
        if s == "tamper:grow" {
            return Ok(AdversaryModel::Tamper(Tamper::AddRowCol));
        }
        if let Some(pos) = s.strip_prefix("tamper:flip:") {
            let (r, c) = pos.split_once(',').ok_or_else(|| Error::config("tamper:flip needs ℓ,k"))?;
            let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::config(format!("bad index {x:?}")));
            let (row, col) = (parse(r)?, parse(c)?);
            if row >= n || col >= n {
                return Err(Error::config(format!("flip position ({row},{col}) outside the board")));
            }
            return Ok(AdversaryModel::Tamper(Tamper::FlipRowBit { row, col }));
        }
        Err(Error::config(format!("unknown adversary model {s:?}")))
    }

    pub fn coalition(&self) -> Option<&Coalition> {
        match self {
            AdversaryModel::Coalition(c) => Some(c),
            _ => None,
        }
    }

    pub fn tamper(&self) -> Option<Tamper> {
        match self {
            AdversaryModel::Tamper(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for AdversaryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryModel::None => f.write_str("none"),
            AdversaryModel::Coalition(c) => {
                let ids: Vec<String> = c.members().iter().map(|i| i.to_string()).collect();
                write!(f, "coalition:[{}]", ids.join(","))
            }
            AdversaryModel::Tamper(t) => write!(f, "tamper:{t}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Identity guessing

/// `√(ε² + ε⁴)`, the anonymity slack in the identity-guessing bound.
pub fn eps_tilde(eps: f64) -> f64 {
    (eps * eps + eps.powi(4)).sqrt()
}

/// State family used against anonymity: overlap amplitude `(1−ε²)^{1/4}`
/// with GHZ along the canonical direction, expressed in the Φ frame so the
/// voter gate maps `Φ₀ → Φ₁`.
pub fn anonymity_family(n: usize, eps: f64) -> Result<PureState> {
    let a = (1.0 - eps * eps).sqrt().sqrt();
    Ok(crate::qsim::state_at_overlap_amp(n, a, &canonical_direction(n)?)?.to_phi_frame())
}

/// What the coalition measures when guessing the voter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoalitionView {
    /// Only the coalition's own qubits. The voter gate acts on an honest
    /// qubit, so these marginals never depend on who voted.
    OwnQubits,
    /// The whole post-transformation state, a strictly stronger attacker.
    FullState,
}

/// States the coalition must tell apart: one per honest agent `i`, the state
/// after `i` applied the voter gate.
pub fn coalition_states(psi: &PureState, coalition: &Coalition, view: CoalitionView) -> Result<Vec<DensityOperator>> {
    if psi.n_qubits() != coalition.n_agents() {
        return Err(Error::LengthMismatch { expected: coalition.n_agents(), got: psi.n_qubits() });
    }
    if psi.n_qubits() > DEFAULT_QUBIT_CAP / 2 {
        return Err(Error::QubitCap { requested: psi.n_qubits(), cap: DEFAULT_QUBIT_CAP / 2 });
    }
    coalition
        .honest()
        .into_iter()
        .map(|i| {
            let post = psi.voter_transform(i)?;
            match view {
                CoalitionView::OwnQubits => post.partial_trace(&coalition.members()),
                CoalitionView::FullState => Ok(DensityOperator::from_pure(&post)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GuessReport {
    /// `confusion[i][j]` = Pr[guess j | state i].
    pub confusion: Vec<Vec<f64>>,
    /// Per-guess frequencies under uniform priors.
    pub guess_frequencies: Vec<f64>,
    pub success: f64,
    /// Whether the average state was singular and its pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

impl GuessReport {
    pub fn h(&self) -> usize {
        self.confusion.len()
    }

    /// `1/H + ε̃`.
    pub fn bound(&self, eps: f64) -> f64 {
        1.0 / self.h() as f64 + eps_tilde(eps)
    }
}

const EIG_TOL: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix: eigenvalues and unitary.
fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Pretty-good measurement for the given states under uniform priors.
pub fn pgm_identity_guess(states: &[DensityOperator]) -> Result<GuessReport> {
    let h = states.len();
    if h == 0 {
        return Err(Error::precondition("no states to discriminate"));
    }
    let dim = states[0].dim();
    if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::LengthMismatch { expected: dim, got: bad.dim() });
    }
    let prior = 1.0 / h as f64;
    let mut avg = DMatrix::<Complex64>::zeros(dim, dim);
    for s in states {
        avg += s.matrix() * Complex64::new(prior, 0.0);
    }
    let (vals, vecs) = hermitian_eigen(&avg);
    let pseudo_inverse = vals.iter().any(|&v| v <= EIG_TOL);
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        vals.iter().map(|&v| Complex64::new(if v > EIG_TOL { 1.0 / v.sqrt() } else { 0.0 }, 0.0)),
    ));
    let root = &vecs * inv_sqrt * vecs.adjoint();
    let povm: Vec<DMatrix<Complex64>> =
        states.iter().map(|s| &root * (s.matrix() * Complex64::new(prior, 0.0)) * &root).collect();

    let confusion: Vec<Vec<f64>> = states
        .iter()
        .map(|rho| povm.iter().map(|e| (e * rho.matrix()).trace().re.max(0.0)).collect())
        .collect();
    let success = (0..h).map(|i| prior * confusion[i][i]).sum();
    let guess_frequencies = (0..h).map(|j| (0..h).map(|i| prior * confusion[i][j]).sum()).collect();
    Ok(GuessReport { confusion, guess_frequencies, success, pseudo_inverse })
}

/// Optimal success probability for two equiprobable states, `(1 + D)/2`.
pub fn helstrom_two(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    Ok(0.5 * (1.0 + a.trace_distance(b)?))
}

/// Samples the coalition's guess from the measurement's outcome law for the
/// true voter `truth`.
pub fn sample_guess<R: Rng + ?Sized>(report: &GuessReport, truth: usize, rng: &mut R) -> usize {
    let row = &report.confusion[truth];
    let total: f64 = row.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (j, &p) in row.iter().enumerate() {
        if u < p {
            return j;
        }
        u -= p;
    }
    row.len() - 1
}
