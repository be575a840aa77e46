//! Monte Carlo and exact experiments against the closed-form bounds. Every
//! trial draws from its own generator stream `(seed, trial + 1)`, so results
//! do not depend on the thread count.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::bounds::{security, sigma_d, sigma_h, abort_bound, zeta};
use super::report::{Check, Direction, ExperimentReport};
use super::stats::{bernoulli_se, binomial_se, chi_square_p};
use crate::adversary::{
    anonymity_family, coalition_states, eps_tilde, helstrom_two, pgm_identity_guess, sample_guess, Coalition,
    CoalitionView, SourceStrategy,
};
use crate::anoncast::{logical_or, OrParams, OrderingSchedule};
use crate::election::{coin_count, phase2_round, voting_round, CastParams};
use crate::error::{Error, Result};
use crate::net::{Detail, Network};
use crate::qsim::{ghz_state, parity, MeasurementAngles, PureState, SharedState};
use crate::rng::{stream_rng, SimRng};
use crate::verify::{generate_angles, verification_round};

/// Number of trials for which `f` returns true.
pub fn count_parallel<F>(trials: u64, seed: u64, f: F) -> Result<u64>
where
    F: Fn(&mut SimRng) -> Result<bool> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| f(&mut stream_rng(seed, i + 1)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn far_state(n: usize, eps: f64) -> Result<PureState> {
    let mut src = SourceStrategy::eps_far(eps).source(n)?;
    crate::adversary::StateSource::emit(&mut src, n, &Default::default())
}

fn timed(mut report: ExperimentReport, start: Instant) -> ExperimentReport {
    report.runtime = start.elapsed();
    report
}

// ---------------------------------------------------------------------------
// Verification and the abort bound

/// Rejection probability of `state` averaged over `draws` honest angle
/// choices, computed exactly per draw from the outcome law.
pub fn exact_rejection_probability<R: Rng + ?Sized>(state: &PureState, draws: usize, rng: &mut R) -> Result<f64> {
    let n = state.n_qubits();
    let mut total = 0.0;
    for _ in 0..draws {
        let angles = generate_angles(n, rng);
        let odd = state.outcome_distribution(angles.thetas())?.odd_parity_mass();
        total += if angles.parity_target() { 1.0 - odd } else { odd };
    }
    Ok(total / draws as f64)
}

/// Honest verification of the canonical ε-far state: rejection rate against
/// `ε²/4` and against the exact angle-averaged rejection probability.
pub fn experiment_verification(n: usize, eps: f64, trials: u64, oracle_draws: usize, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let state = far_state(n, eps)?;
    let rejected = count_parallel(trials, seed, |rng| {
        let verifier = rng.random_range(0..n);
        let mut net = Network::new(n, Detail::Off);
        let mut shared = SharedState::new(state.clone());
        Ok(!verification_round(&mut shared, verifier, &mut net, rng)?.accepted)
    })?;
    let rate = rejected as f64 / trials as f64;
    let se = bernoulli_se(rate, trials);
    let exact = exact_rejection_probability(&state, oracle_draws, &mut stream_rng(seed, 0))?;
    let mut r = ExperimentReport::new(format!("verify n={n} eps={eps}"), trials, seed);
    r.push(Check::new("rejection rate >= eps^2/4", rate, se, eps * eps / 4.0, Direction::AtLeast));
    r.push(Check::with_tolerance(
        "monte carlo vs exact rejection (abs 0.01)",
        rate,
        binomial_se(exact, trials),
        exact,
        Direction::Near,
        0.01,
    ));
    r.note(format!("exact angle-averaged rejection probability {exact:.5} over {oracle_draws} angle draws"));
    Ok(timed(r, start))
}

/// Single Phase-2 voting rounds fed by a constant ε-far source: how often
/// the round survives the δ check.
pub fn experiment_abort_bound(n: usize, eps: f64, delta: f64, m: u32, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    coin_count(n, eps, delta, 0.5)?;
    let survive = |strategy: SourceStrategy, trials: u64, seed: u64| {
        count_parallel(trials, seed, move |rng| {
            let mut net = Network::new(n, Detail::Off);
            let schedule = OrderingSchedule::random(n, rng)?;
            let mut source = strategy.source(n)?;
            let params = CastParams { coins: m, delta, schedule: &schedule, coalition: None };
            let voter = rng.random_range(0..n);
            let vote = rng.random();
            Ok(phase2_round(voter, vote, &params, &mut source, &mut net, rng)?.aborted_by.is_none())
        })
    };
    let kept = survive(SourceStrategy::eps_far(eps), trials, seed)?;
    let p = kept as f64 / trials as f64;
    let bound = abort_bound(n, eps, delta, m as f64);
    let mut r = ExperimentReport::new(format!("abort-bound n={n} eps={eps} delta={delta} M={m}"), trials, seed);
    r.push(Check::new("Pr[no abort with eps-far state]", p, bernoulli_se(p, trials), bound, Direction::AtMost));
    let control = (trials / 10).max(10);
    let ideal_aborts = control - survive(SourceStrategy::Ideal, control, seed ^ 0x5eed)?;
    r.push(Check::exact("ideal source abort rate", ideal_aborts as f64 / control as f64, 0.0, Direction::AtMost, 0.0));
    r.note(format!("{kept} of {trials} far-source rounds passed the threshold check"));
    Ok(timed(r, start))
}

// ---------------------------------------------------------------------------
// Vote flips

/// Probability that a Hadamard-basis voting round on `state` has odd
/// outcome parity, i.e. flips the recorded vote.
pub fn exact_parity_error(state: &PureState) -> Result<f64> {
    let n = state.n_qubits();
    Ok(state.outcome_distribution(MeasurementAngles::hadamard(n).thetas())?.odd_parity_mass())
}

pub fn experiment_vote_flip(n: usize, eps: f64, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let state = far_state(n, eps)?;
    let errors = count_parallel(trials, seed, |rng| {
        let voter = rng.random_range(0..n);
        let vote: bool = rng.random();
        let mut net = Network::new(n, Detail::Off);
        let row = voting_round(&mut SharedState::new(state.clone()), voter, vote, &mut net, rng)?;
        Ok(parity(&row) != vote)
    })?;
    let rate = errors as f64 / trials as f64;
    let exact = exact_parity_error(&state)?;
    let mut r = ExperimentReport::new(format!("vote-flip n={n} eps={eps}"), trials, seed);
    r.push(Check::new("row parity error rate <= eps", rate, bernoulli_se(rate, trials), eps, Direction::AtMost));
    r.push(Check::exact("exact parity error <= eps", exact, eps, Direction::AtMost, 1e-12));
    r.push(Check::new("monte carlo vs exact parity error", rate, binomial_se(exact, trials), exact, Direction::Near));
    Ok(timed(r, start))
}

// ---------------------------------------------------------------------------
// Identity guessing

/// Exact PGM sweep over system sizes, distances and coalition sizes.
pub fn experiment_identity_sweep(sizes: &[usize], epsilons: &[f64]) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut r = ExperimentReport::new("identity-guess sweep", 0, 0);
    for &n in sizes {
        for &eps in epsilons {
            let psi = anonymity_family(n, eps)?;
            for c in 1..=n.saturating_sub(2) {
                let ids: Vec<usize> = (0..c).collect();
                let coalition = Coalition::new(n, &ids)?;
                let h = coalition.h() as f64;
                let bound = 1.0 / h + eps_tilde(eps);
                for view in [CoalitionView::FullState, CoalitionView::OwnQubits] {
                    let states = coalition_states(&psi, &coalition, view)?;
                    let pgm = pgm_identity_guess(&states)?;
                    let tag = format!("n={n} eps={eps} c={c} {view:?}");
                    r.push(Check::exact(format!("{tag} pgm <= 1/H+eps~"), pgm.success, bound, Direction::AtMost, 1e-9));
                    if eps == 0.0 {
                        r.push(Check::exact(format!("{tag} pgm = 1/H"), pgm.success, 1.0 / h, Direction::Near, 1e-9));
                    }
                    if states.len() == 2 {
                        let opt = helstrom_two(&states[0], &states[1])?;
                        r.push(Check::exact(format!("{tag} pgm <= helstrom"), pgm.success, opt, Direction::AtMost, 1e-9));
                        r.push(Check::exact(format!("{tag} helstrom <= bound"), opt, bound, Direction::AtMost, 1e-9));
                    }
                }
            }
        }
    }
    r.note("FullState: coalition measures the whole post-transformation state; OwnQubits: only its own qubits");
    r.note("state family: overlap amplitude (1-eps^2)^(1/4) with GHZ, expressed in the Phi frame");
    Ok(timed(r, start))
}

/// Sampled identity guessing with the PGM, single round and Q-fold.
pub fn experiment_privacy(
    n: usize,
    eps: f64,
    coalition_size: usize,
    q: u32,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let ids: Vec<usize> = (0..coalition_size).collect();
    let coalition = Coalition::new(n, &ids)?;
    let h = coalition.h();
    let guess_rate = |eps: f64, rounds: u32, seed: u64| -> Result<(f64, f64)> {
        let states = coalition_states(&anonymity_family(n, eps)?, &coalition, CoalitionView::FullState)?;
        let report = pgm_identity_guess(&states)?;
        let hits = count_parallel(trials, seed, |rng| {
            Ok((0..rounds).all(|_| {
                let truth = rng.random_range(0..h);
                sample_guess(&report, truth, rng) == truth
            }))
        })?;
        Ok((hits as f64 / trials as f64, report.success))
    };
    let (single, exact) = guess_rate(eps, 1, seed)?;
    let (ideal, _) = guess_rate(0.0, 1, seed ^ 1)?;
    let bound = 1.0 / h as f64 + eps_tilde(eps);
    let se_single = bernoulli_se(single, trials);
    let mut r = ExperimentReport::new(format!("privacy n={n} eps={eps} coalition={coalition_size} Q={q}"), trials, seed);
    r.push(Check::new("identity guess rate <= 1/H + eps~", single, se_single, bound, Direction::AtMost));
    r.push(Check::new("ideal-state guess rate = 1/H", ideal, binomial_se(1.0 / h as f64, trials), 1.0 / h as f64, Direction::Near));
    if q > 1 {
        let (all, _) = guess_rate(eps, q, seed ^ 2)?;
        let target = single.powi(q as i32);
        // Delta-method error of single^Q plus the sampling error of the Q-fold rate.
        let se = bernoulli_se(all, trials) + q as f64 * single.powi(q as i32 - 1) * se_single;
        r.push(Check::new(format!("all {q} rounds guessed <= single^Q"), all, se, target, Direction::AtMost));
    }
    r.note(format!("exact PGM success {exact:.6}; H = {h}; coalition sees the full post-transformation state"));
    r.note(format!("privacy parameter zeta at eta=0.001: {:.6}", zeta(n, eps, 0.001)));
    Ok(timed(r, start))
}

// ---------------------------------------------------------------------------
// Correctness

/// Voting rounds on the ε-far source followed by the objection OR. Also
/// injects `⌈Nγ⌉` wrong rows to test the soundness direction.
pub fn experiment_correctness(
    n: usize,
    eps: f64,
    params: OrParams,
    gamma: f64,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = params.security();
    let accepted = |state: Option<PureState>, forced: usize, seed: u64| {
        count_parallel(trials, seed, move |rng| {
            let mut net = Network::new(n, Detail::Off);
            let schedule = OrderingSchedule::random(n, rng)?;
            let mut objections = vec![false; n];
            match &state {
                Some(psi) => {
                    for (voter, wrong) in objections.iter_mut().enumerate() {
                        let vote: bool = rng.random();
                        let row = voting_round(&mut SharedState::new(psi.clone()), voter, vote, &mut net, rng)?;
                        *wrong = parity(&row) != vote;
                    }
                }
                None => {
                    let mut who: Vec<usize> = (0..n).collect();
                    who.shuffle(rng);
                    for &k in &who[..forced] {
                        objections[k] = true;
                    }
                }
            }
            Ok(!logical_or(&objections, params, &schedule, &mut net, rng)?.y)
        })
    };
    let mut r = ExperimentReport::new(format!("correctness n={n} eps={eps} S={s:.5} gamma={gamma}"), trials, seed);
    let sh = sigma_h(n, eps, s);
    let p = accepted(Some(far_state(n, eps)?), 0, seed)? as f64 / trials as f64;
    r.push(Check::new("acceptance >= sigma_H", p, bernoulli_se(p, trials), sh, Direction::AtLeast));
    let ideal = accepted(Some(ghz_state(n)?), 0, seed ^ 1)? as f64 / trials as f64;
    r.push(Check::exact("ideal-state acceptance", ideal, 1.0, Direction::AtLeast, 0.0));
    let forced = ((n as f64 * gamma).ceil() as usize).min(n);
    if forced > 0 {
        let sd = sigma_d(n, gamma, s);
        let p = accepted(None, forced, seed ^ 2)? as f64 / trials as f64;
        r.push(Check::new(format!("acceptance with {forced} wrong rows <= sigma_D"), p, bernoulli_se(p, trials), sd, Direction::AtMost));
    }
    r.note(format!("sigma_H = {sh:.6}; one objection survives an OR with probability S^N = {:.6}", s.powi(n as i32)));
    Ok(timed(r, start))
}

// ---------------------------------------------------------------------------
// LogicalOr

/// `Pr[y = 0]` when `j` agents input 1: every one of the `NΣ` repetitions
/// must see an even number of masked ones.
pub fn or_zero_probability(n: usize, params: OrParams, j: usize) -> f64 {
    let q = (-(params.gamma() as f64)).exp2();
    let even = (1.0 + (1.0 - 2.0 * q).powi(j as i32)) / 2.0;
    even.powi((n * params.sigma() as usize) as i32)
}

pub fn experiment_logicalor(n: usize, params: OrParams, max_ones: usize, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    if max_ones > n {
        return Err(Error::config(format!("cannot set {max_ones} of {n} inputs")));
    }
    let s = params.security();
    let mut r = ExperimentReport::new(format!("logicalor n={n} gamma={} sigma={}", params.gamma(), params.sigma()), trials, seed);
    for j in 0..=max_ones {
        let inputs: Vec<bool> = (0..n).map(|k| k < j).collect();
        let zeros = count_parallel(trials, seed.wrapping_add(j as u64 * 0x9e37), |rng| {
            let schedule = OrderingSchedule::random(n, rng)?;
            let mut net = Network::new(n, Detail::Off);
            Ok(!logical_or(&inputs, params, &schedule, &mut net, rng)?.y)
        })?;
        let p = zeros as f64 / trials as f64;
        if j == 0 {
            r.push(Check::exact("all-zero inputs give 0", p, 1.0, Direction::AtLeast, 0.0));
            continue;
        }
        let exact = or_zero_probability(n, params, j);
        let pv = chi_square_p(&[zeros, trials - zeros], &[exact, 1.0 - exact]);
        r.push(Check::exact(format!("j={j} chi-square p-value vs exact law"), pv, 0.01, Direction::AtLeast, 0.0));
        r.push(Check::new(format!("j={j} Pr[y=0] <= S^j"), p, bernoulli_se(p, trials), s.powi(j as i32), Direction::AtMost));
        r.note(format!("j={j}: empirical {p:.5}, exact {exact:.5}"));
    }
    Ok(timed(r, start))
}

// ---------------------------------------------------------------------------
// The worked example

/// Rounds to `sig` significant figures.
pub fn round_sig(x: f64, sig: i32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(sig - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Numbers for N=4, ε=0.6, δ=0.05, η=0.001, Q=15.
pub fn experiment_example() -> Result<ExperimentReport> {
    let start = Instant::now();
    let (n, eps, delta, eta, q) = (4usize, 0.6, 0.05, 0.001, 15);
    let coins = coin_count(n, eps, delta, eta)?;
    let et = eps_tilde(eps);
    let z = zeta(n, eps, eta);
    let mut r = ExperimentReport::new("example n=4 eps=0.6 delta=0.05 eta=0.001", 0, 0);
    r.push(Check::exact("eps~ to 2 s.f. = 0.70", round_sig(et, 2), 0.70, Direction::Near, 1e-12));
    r.push(Check::exact("zeta to 1 s.f. = 0.7", round_sig(z, 1), 0.7, Direction::Near, 1e-12));
    let zt = 0.7f64.powi(q);
    r.push(Check::exact("0.7^15 to 2 s.f. = 0.0047", round_sig(zt, 2), 0.0047, Direction::Near, 1e-12));
    r.push(Check::exact("0.7^15 to 1 s.f. = 0.005", round_sig(zt, 1), 0.005, Direction::Near, 1e-12));
    r.push(Check::exact("raw M to 3 s.f. = 12.6", round_sig(coins.raw, 3), 12.6, Direction::Near, 1e-9));
    r.note(format!("eps~ = {et:.6}; zeta = {z:.6}; zeta^15 = {:.6}; 0.7^15 = {zt:.6}", z.powi(q)));
    r.note(format!(
        "M raw = {:.4}; ceiling {} gives bound {:.3e}; rounded down {} gives bound {:.4} (target eta {eta})",
        coins.raw,
        coins.m,
        abort_bound(n, eps, delta, coins.m as f64),
        coins.raw.floor(),
        abort_bound(n, eps, delta, coins.raw.floor())
    ));
    r.note(format!("verification rounds per vote: 2^12 = 4096, 2^13 = 8192; S(3,4) = {:.4}", security(3, 4)));
    Ok(timed(r, start))
}
