//! GHZ verification test: a verifier picks angles summing to a multiple of π,
//! every agent measures in the matching rotated basis and broadcasts the
//! outcome, and the state passes iff the outcome parity equals the number of
//! half-turns mod 2.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{bits_str, Endpoint, EventKind, Network};
use crate::qsim::{parity, MeasurementAngles, SharedState};

/// Draws `θ_1..θ_{n−1}` uniformly from `[0, π)` and sets the last angle so the
/// total is an integer multiple of π.
pub fn generate_angles<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MeasurementAngles {
    assert!(n >= 1, "need at least one angle");
    let mut thetas: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..PI)).collect();
    let partial: f64 = thetas.iter().sum();
    let mut last = (-partial).rem_euclid(PI);
    if last >= PI {
        last = 0.0;
    }
    thetas.push(last);
    MeasurementAngles::new(thetas).expect("constructed sum is a multiple of π")
}

/// Angle in fixed-point microradians, as carried in transcripts.
pub fn microradians(theta: f64) -> i64 {
    (theta * 1e6).round() as i64
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationOutcome {
    pub verifier: usize,
    pub angles: MeasurementAngles,
    pub outcomes: Vec<bool>,
    pub accepted: bool,
}

impl VerificationOutcome {
    /// `verifier;θ in µrad,...;outcomes;accepted`.
    pub fn record(&self) -> String {
        let thetas: Vec<String> = self.angles.thetas().iter().map(|&t| microradians(t).to_string()).collect();
        format!(
            "{};{};{};{}",
            self.verifier,
            thetas.join(","),
            bits_str(&self.outcomes),
            self.accepted as u8
        )
    }
}

/// One honest verification round on the shared state.
pub fn verification_round<R: Rng + ?Sized>(
    state: &mut SharedState,
    verifier: usize,
    net: &mut Network,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let n = state.n_qubits()?;
    if verifier >= n {
        return Err(Error::AgentOutOfRange { index: verifier, n });
    }
    let angles = generate_angles(n, rng);
    send_angles(&angles, verifier, net);
    let outcomes = state.take()?.measure_all_rotated(&angles, rng)?;
    broadcast_outcomes(&outcomes, net);
    let accepted = parity(&outcomes) == angles.parity_target();
    let outcome = VerificationOutcome { verifier, angles, outcomes, accepted };
    net.note(EventKind::VerifyResult, || outcome.record());
    Ok(outcome)
}

pub(crate) fn send_angles(angles: &MeasurementAngles, verifier: usize, net: &mut Network) {
    for (j, &theta) in angles.thetas().iter().enumerate() {
        net.log(EventKind::Angle, Endpoint::Agent(verifier), Endpoint::Agent(j), (0, 0), || {
            microradians(theta).to_string()
        });
    }
}

pub(crate) fn broadcast_outcomes(outcomes: &[bool], net: &mut Network) {
    for (j, &y) in outcomes.iter().enumerate() {
        net.log(EventKind::Outcome, Endpoint::Agent(j), Endpoint::All, (0, 0), || bits_str(&[y]));
    }
}

/// Per-agent trial and rejection counts for the current voting round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifierCounters {
    trials: Vec<u64>,
    rejections: Vec<u64>,
}

impl VerifierCounters {
    pub fn new(n: usize) -> Self {
        VerifierCounters { trials: vec![0; n], rejections: vec![0; n] }
    }

    pub fn record_trial(&mut self, verifier: usize, accepted: bool) {
        self.trials[verifier] += 1;
        if !accepted {
            self.rejections[verifier] += 1;
        }
    }

    pub fn trials(&self, agent: usize) -> u64 {
        self.trials[agent]
    }

    pub fn rejections(&self, agent: usize) -> u64 {
        self.rejections[agent]
    }

    pub fn total_trials(&self) -> u64 {
        self.trials.iter().sum()
    }

    pub fn total_rejections(&self) -> u64 {
        self.rejections.iter().sum()
    }

    /// `rejections / trials`, or 0 before the first trial.
    pub fn rejection_rate(&self, agent: usize) -> f64 {
        match self.trials[agent] {
            0 => 0.0,
            t => self.rejections[agent] as f64 / t as f64,
        }
    }

    /// First agent whose rejection rate strictly exceeds `delta`.
    pub fn exceeding(&self, delta: f64) -> Option<usize> {
        (0..self.trials.len()).find(|&j| self.rejection_rate(j) > delta)
    }

    pub fn threshold_abort(&self, delta: f64) -> bool {
        self.exceeding(delta).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Detail;
    use crate::qsim::ghz_state;
    use crate::rng::stream_rng;

    #[test]
    fn single_angle_is_zero() {
        let mut rng = stream_rng(1, 0);
        let a = generate_angles(1, &mut rng);
        assert_eq!(a.thetas(), &[0.0]);
        assert!(!a.parity_target());
    }

    #[test]
    fn angle_sums_are_multiples_of_pi() {
        let mut rng = stream_rng(2, 0);
        let mut seen = [false; 2];
        for _ in 0..10_000 {
            let a = generate_angles(4, &mut rng);
            let turns = a.thetas().iter().sum::<f64>() / PI;
            assert!((turns - turns.round()).abs() < 1e-9);
            assert!(a.thetas().iter().all(|t| (0.0..PI).contains(t)));
            seen[a.parity_target() as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn ideal_state_passes() {
        let mut rng = stream_rng(3, 0);
        let mut net = Network::new(4, Detail::Off);
        for verifier in 0..4 {
            for _ in 0..250 {
                let mut s = SharedState::new(ghz_state(4).unwrap());
                assert!(verification_round(&mut s, verifier, &mut net, &mut rng).unwrap().accepted);
                assert!(s.is_spent());
            }
        }
    }

    #[test]
    fn spent_state_is_an_error() {
        let mut rng = stream_rng(4, 0);
        let mut net = Network::new(3, Detail::Off);
        let mut s = SharedState::new(ghz_state(3).unwrap());
        verification_round(&mut s, 0, &mut net, &mut rng).unwrap();
        assert!(matches!(verification_round(&mut s, 0, &mut net, &mut rng), Err(Error::SpentState)));
    }

    #[test]
    fn counters() {
        let mut c = VerifierCounters::new(3);
        assert_eq!(c.rejection_rate(0), 0.0);
        c.record_trial(0, false);
        assert_eq!(c.rejection_rate(0), 1.0);
        c.record_trial(1, true);
        assert_eq!(c.rejection_rate(1), 0.0);
        let mut c = VerifierCounters::new(1);
        for i in 0..7 {
            c.record_trial(0, i >= 2);
        }
        assert_eq!(c.rejection_rate(0), 2.0 / 7.0);
    }

    #[test]
    fn threshold_is_strict() {
        let mut c = VerifierCounters::new(2);
        for _ in 0..20 {
            c.record_trial(0, true);
            c.record_trial(1, true);
        }
        assert!(!c.threshold_abort(0.0));
        c.record_trial(1, false); // 1/21 ≈ 0.048
        assert!(!c.threshold_abort(0.05));
        let mut c = VerifierCounters::new(1);
        for i in 0..10 {
            c.record_trial(0, i != 0);
        }
        assert!(c.threshold_abort(0.05)); // 0.10 > 0.05
        assert!(!c.threshold_abort(0.1)); // equality does not abort
    }

    #[test]
    fn record_is_fixed_point() {
        let o = VerificationOutcome {
            verifier: 2,
            angles: MeasurementAngles::new(vec![PI / 2.0, PI / 2.0]).unwrap(),
            outcomes: vec![true, false],
            accepted: true,
        };
        assert_eq!(o.record(), "2;1570796,1570796;10;1");
    }
}
