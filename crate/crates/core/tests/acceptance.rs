//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Oracles here are written against the raw
//! amplitudes and closed forms rather than through the library's own
//! shortcuts.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qvote::adversary::{
    anonymity_family, coalition_states, pgm_identity_guess, Coalition, CoalitionView, SourceStrategy, StateSource,
};
use qvote::anoncast::{logical_or, unique_index, OrParams, OrderingSchedule};
use qvote::election::{execute, voting_round, AbortReason, ElectionConfig, Status};
use qvote::harness::{self, count_parallel};
use qvote::net::{Detail, Network};
use qvote::qsim::{ghz_state, PureState, SharedState};
use qvote::rng::stream_rng;
use qvote::verify::verification_round;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

fn se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn bit(x: usize, qubit: usize, n: usize) -> usize {
    (x >> (n - 1 - qubit)) & 1
}

/// Outcome law of measuring every qubit in the `(|0> ± e^{iθ}|1>)/√2` basis,
/// outcome 1 for the minus vector, by direct contraction of the amplitudes.
fn rotated_law(psi: &PureState, thetas: &[f64]) -> Vec<f64> {
    let n = psi.n_qubits();
    let amps = psi.amplitudes();
    (0..1usize << n)
        .map(|b| {
            let mut total = Complex64::new(0.0, 0.0);
            for (x, &a) in amps.iter().enumerate() {
                let mut c = a;
                for (k, &t) in thetas.iter().enumerate() {
                    if bit(x, k, n) == 1 {
                        c *= Complex64::from_polar(1.0, -t);
                        if bit(b, k, n) == 1 {
                            c = -c;
                        }
                    }
                    c *= FRAC_1_SQRT_2;
                }
                total += c;
            }
            total.norm_sqr()
        })
        .collect()
}

fn odd_mass(law: &[f64]) -> f64 {
    law.iter().enumerate().filter(|(b, _)| b.count_ones() % 2 == 1).map(|(_, p)| p).sum()
}

fn far_state(n: usize, eps: f64) -> PureState {
    let mut src = SourceStrategy::eps_far(eps).source(n).unwrap();
    src.emit(n, &Default::default()).unwrap()
}

// ---------------------------------------------------------------------------

fn worked_example() -> Outcome {
    let start = Instant::now();
    let fig = harness::worked_example().unwrap();
    let elapsed = start.elapsed();
    let ok = fig.e == [false, true, true, true] && fig.tally.counts == [1, 3] && elapsed < Duration::from_secs(1);
    (ok, format!("E={:?} T={:?} in {elapsed:.2?}", fig.e, fig.tally.counts))
}

fn ghz_parity_law() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 2..=5 {
        let mut rng = stream_rng(200 + n as u64, 0);
        let mut counts = vec![0u64; 1 << n];
        let mut odd = 0;
        for _ in 0..10_000 {
            let bits = ghz_state(n).unwrap().measure_all_hadamard(&mut rng);
            let x = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            counts[x] += 1;
            odd += (x.count_ones() % 2) as u64;
        }
        let even: Vec<u64> = (0..1usize << n).filter(|x| x.count_ones() % 2 == 0).map(|x| counts[x]).collect();
        let p = chi_square_p(&even, &vec![1.0 / even.len() as f64; even.len()]);
        ok &= odd == 0 && p > 0.01;
        detail.push(format!("n={n} odd={odd} p={p:.3}"));
    }
    (ok, detail.join(", "))
}

fn verification_completeness() -> Outcome {
    let mut rng = stream_rng(300, 0);
    let mut net = Network::new(4, Detail::Off);
    let mut rejected = 0;
    for i in 0..10_000 {
        let mut s = SharedState::new(ghz_state(4).unwrap());
        rejected += !verification_round(&mut s, i % 4, &mut net, &mut rng).unwrap().accepted as u32;
    }
    (rejected == 0, format!("{rejected} rejections in 10000 rounds"))
}

fn verification_soundness() -> Outcome {
    let n = 4;
    let trials = 100_000u64;
    let mut ok = true;
    let mut detail = Vec::new();
    for eps in [0.3, 0.6] {
        let psi = far_state(n, eps);
        let overlap = psi.inner(&ghz_state(n).unwrap()).unwrap().norm_sqr();
        ok &= ((1.0 - overlap).sqrt() - eps).abs() < 1e-9;
        let rejected = count_parallel(trials, 400, |rng| {
            let mut net = Network::new(n, Detail::Off);
            let verifier = rng.random_range(0..n);
            Ok(!verification_round(&mut SharedState::new(psi.clone()), verifier, &mut net, rng)?.accepted)
        })
        .unwrap();
        let rate = rejected as f64 / trials as f64;
        let mut rng = stream_rng(401, 0);
        let draws = 10_000;
        let mut exact = 0.0;
        for _ in 0..draws {
            let mut thetas: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..PI)).collect();
            let rest = (-thetas.iter().sum::<f64>()).rem_euclid(PI);
            thetas.push(rest);
            let turns = (thetas.iter().sum::<f64>() / PI).round() as i64;
            let odd = odd_mass(&rotated_law(&psi, &thetas));
            exact += if turns % 2 == 1 { 1.0 - odd } else { odd };
        }
        exact /= draws as f64;
        let floor = eps * eps / 4.0 - 3.0 * se(rate, trials);
        ok &= rate >= floor && (rate - exact).abs() <= 0.01;
        detail.push(format!("eps={eps}: rate={rate:.5} floor={floor:.5} exact={exact:.5}"));
    }
    (ok, detail.join("; "))
}

fn abort_bound() -> Outcome {
    let (n, eps, delta, m, trials) = (4usize, 0.6f64, 0.05f64, 6u32, 1000u64);
    let start = Instant::now();
    let report = harness::experiment_abort_bound(n, eps, delta, m, trials, 500).unwrap();
    let elapsed = start.elapsed();
    let c = &report.checks[0];
    let gap = eps * eps - 4.0 * delta;
    let bound = (-(2f64.powi(m as i32)) * gap * gap / (16.0 * n as f64 * eps * eps)).exp();
    let ok = c.estimate <= bound + 3.0 * se(c.estimate, trials)
        && report.checks[1].estimate == 0.0
        && elapsed < Duration::from_secs(600);
    (ok, format!("Pr[no abort]={:.4} bound={bound:.4} in {elapsed:.2?}", c.estimate))
}

fn row_parity_error() -> Outcome {
    let n = 4;
    let trials = 100_000u64;
    let mut ok = true;
    let mut detail = Vec::new();
    for eps in [0.3, 0.6] {
        let psi = far_state(n, eps);
        let errors = count_parallel(trials, 600, |rng| {
            let vote: bool = rng.random();
            let voter = rng.random_range(0..n);
            let mut net = Network::new(n, Detail::Off);
            let row = voting_round(&mut SharedState::new(psi.clone()), voter, vote, &mut net, rng)?;
            Ok(row.iter().fold(false, |a, &b| a ^ b) != vote)
        })
        .unwrap();
        let rate = errors as f64 / trials as f64;
        let exact = odd_mass(&rotated_law(&psi, &vec![0.0; n]));
        ok &= rate <= eps + 3.0 * se(rate, trials) && exact <= eps;
        detail.push(format!("eps={eps}: rate={rate:.5} exact={exact:.5}"));
    }
    (ok, detail.join("; "))
}

fn identity_sweep() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for n in 3..=6 {
        for eps in [0.0, 0.3, 0.6] {
            let psi = anonymity_family(n, eps).unwrap();
            for c in 1..=n - 2 {
                let coalition = Coalition::new(n, &(0..c).collect::<Vec<_>>()).unwrap();
                let h = (n - c) as f64;
                let bound = 1.0 / h + (eps * eps + eps.powi(4)).sqrt();
                let states = coalition_states(&psi, &coalition, CoalitionView::FullState).unwrap();
                let success = pgm_identity_guess(&states).unwrap().success;
                ok &= success <= bound + 1e-9;
                if eps == 0.0 {
                    ok &= (success - 1.0 / h).abs() < 1e-9;
                }
                worst = worst.max(success - bound);
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    (ok, format!("{cases} cases, max(success - bound) = {worst:.4}, {elapsed:.2?}"))
}

fn round_sig(x: f64, sig: i32) -> f64 {
    let scale = 10f64.powi(sig - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

fn example_numbers() -> Outcome {
    let cfg = ElectionConfig { amplification_rounds: 15, ..Default::default() };
    let b = harness::compute_bounds(&cfg).unwrap();
    let eps_tilde = round_sig(b.eps_tilde, 2);
    let zeta_tilde = round_sig(0.7f64.powi(15), 1);
    let computed_zeta_tilde = round_sig(b.zeta_tilde.value, 1);
    let m_raw = round_sig(b.m_raw, 3);
    let ok = eps_tilde == 0.70 && zeta_tilde == 0.005 && computed_zeta_tilde == 0.005 && m_raw == 12.6;
    (
        ok,
        format!(
            "eps~={:.4} zeta~(0.7^15)={:.5} zeta~(computed)={:.5} M raw={:.3}",
            b.eps_tilde,
            0.7f64.powi(15),
            b.zeta_tilde.value,
            b.m_raw
        ),
    )
}

/// Brute force over the coin outcomes of the `j` agents holding a one: a
/// repetition reports 0 when an even number of them drew p = 1.
fn or_zero_oracle(n: usize, gamma: u32, sigma: u32, j: usize) -> f64 {
    let q = 0.5f64.powi(gamma as i32);
    let even: f64 = (0..1usize << j)
        .filter(|x| x.count_ones() % 2 == 0)
        .map(|x| {
            let ones = x.count_ones() as i32;
            q.powi(ones) * (1.0 - q).powi(j as i32 - ones)
        })
        .sum();
    even.powi((n * sigma as usize) as i32)
}

fn logical_or_laws() -> Outcome {
    let (n, gamma, sigma, trials) = (4usize, 3u32, 4u32, 100_000u64);
    let params = OrParams::new(gamma, sigma).unwrap();
    let s = (1.0 - 0.5f64.powi(gamma as i32)).powi(sigma as i32);
    let mut ok = true;
    let mut detail = Vec::new();
    for j in 0..=3 {
        let inputs: Vec<bool> = (0..n).map(|k| k < j).collect();
        let zeros = count_parallel(trials, 900 + j as u64, |rng| {
            let schedule = OrderingSchedule::random(n, rng)?;
            let mut net = Network::new(n, Detail::Off);
            Ok(!logical_or(&inputs, params, &schedule, &mut net, rng)?.y)
        })
        .unwrap();
        let p = zeros as f64 / trials as f64;
        if j == 0 {
            ok &= zeros == trials;
            detail.push(format!("j=0: {zeros}/{trials} zero"));
            continue;
        }
        let exact = or_zero_oracle(n, gamma, sigma, j);
        let pv = chi_square_p(&[zeros, trials - zeros], &[exact, 1.0 - exact]);
        let cap = s.powi(j as i32) + 3.0 * se(p, trials);
        ok &= pv > 0.01 && p <= cap;
        detail.push(format!("j={j}: {p:.5} vs {exact:.5} (p={pv:.3}, cap {cap:.4})"));
    }
    (ok, detail.join("; "))
}

fn unique_index_uniform() -> Outcome {
    let cfg = ElectionConfig::default();
    let params = cfg.index_params().unwrap();
    let runs = 10_000;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut bijective = true;
    let mut rng = stream_rng(1000, 0);
    for _ in 0..runs {
        let mut net = Network::new(4, Detail::Off);
        let omega = unique_index(4, params, &mut net, &mut rng, cfg.index_or_cap).unwrap();
        let mut sorted = omega.as_slice().to_vec();
        sorted.sort_unstable();
        bijective &= sorted == [0, 1, 2, 3];
        *counts.entry(omega.as_slice().to_vec()).or_default() += 1;
    }
    let observed: Vec<u64> = counts.values().copied().collect();
    let pv = if observed.len() == 24 { chi_square_p(&observed, &[1.0 / 24.0; 24]) } else { 0.0 };
    (bijective && pv > 0.01, format!("{} distinct permutations, p={pv:.3}", counts.len()))
}

fn tamper_defenses() -> Outcome {
    let mut rng = stream_rng(1100, 0);
    let (mut grown, mut flipped) = (0, 0);
    for seed in 0..100u64 {
        let n = rng.random_range(3..=5);
        let votes: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let base = ElectionConfig { n_agents: n, votes, coins: Some(2), seed, detail: Detail::Off, ..Default::default() };
        let cfg = ElectionConfig { adversary_model: "tamper:grow".into(), ..base.clone() };
        grown += (execute(&cfg).unwrap().outcome.status == Status::Aborted(AbortReason::MalformedBoard)) as u32;
        let (row, col) = (rng.random_range(0..n), rng.random_range(0..n));
        let cfg = ElectionConfig { gamma: 0, sigma: 1, adversary_model: format!("tamper:flip:{row},{col}"), ..base };
        flipped += (execute(&cfg).unwrap().outcome.status == Status::Aborted(AbortReason::Phase3Objection)) as u32;
    }
    (grown == 100 && flipped == 100, format!("grown rejected {grown}/100, flips aborted {flipped}/100"))
}

fn digit_table() -> Outcome {
    let mut expected = vec![
        vec![true, true],
        vec![true, true],
        vec![true, false],
        vec![false, true],
        vec![false, false],
        vec![false, false],
        vec![false, false],
    ];
    expected.sort();
    let mut hits = 0;
    for seed in 0..100 {
        let outcome = harness::digit_table(seed, 2).unwrap();
        let mut rows = outcome.table.clone();
        rows.sort();
        hits += (outcome.status == Status::Accepted && rows == expected) as u32;
    }
    (hits == 100, format!("{hits}/100 seeds reproduce the row multiset"))
}

fn random_config<R: Rng>(rng: &mut R) -> ElectionConfig {
    let n = rng.random_range(2..=5);
    let multi = n >= 3 && rng.random_bool(0.25);
    let candidates = if multi { 4 } else { 2 };
    let votes = (0..n).map(|_| rng.random_range(0..candidates)).collect();
    let source = ["ideal", "eps_far:0.05", "overlap:0.99", "schedule:ideal,eps_far:0.1"][rng.random_range(0..4)];
    let adversary = match rng.random_range(0..4) {
        0 => "none".to_string(),
        1 if n >= 3 => "coalition:[0]".to_string(),
        2 => "tamper:grow".to_string(),
        3 => format!("tamper:flip:{},{}", rng.random_range(0..n), rng.random_range(0..n)),
        _ => "none".to_string(),
    };
    ElectionConfig {
        n_agents: n,
        votes,
        candidates,
        amplification_rounds: if multi { 1 } else { rng.random_range(1..=2) },
        gamma: rng.random_range(0..=3),
        sigma: rng.random_range(1..=3),
        coins: Some(rng.random_range(1..=3)),
        seed: rng.random(),
        source_model: source.into(),
        adversary_model: adversary,
        detail: [Detail::Off, Detail::Decisions, Detail::Messages][rng.random_range(0..3)],
        ..Default::default()
    }
}

fn determinism() -> Outcome {
    let mut rng = stream_rng(1300, 0);
    let mut identical = 0;
    let mut first_bad = None;
    for i in 0..100 {
        let cfg = random_config(&mut rng);
        let (text, _) = harness::run_to_file(&cfg).unwrap();
        let report = harness::replay(&text).unwrap();
        if report.identical && report.original_outcome == report.replayed_outcome {
            identical += 1;
        } else if first_bad.is_none() {
            first_bad = Some(i);
        }
    }
    (identical == 100, format!("{identical}/100 identical, first mismatch {first_bad:?}"))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("four-voter worked example", worked_example),
        ("GHZ parity law", ghz_parity_law),
        ("verification completeness", verification_completeness),
        ("verification soundness", verification_soundness),
        ("abort bound at reduced scale", abort_bound),
        ("row-parity error", row_parity_error),
        ("PGM identity sweep", identity_sweep),
        ("example-section numbers", example_numbers),
        ("LogicalOr laws", logical_or_laws),
        ("UniqueIndex uniformity", unique_index_uniform),
        ("tamper defenses", tamper_defenses),
        ("multi-candidate table", digit_table),
        ("run/replay determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        failed += !ok as u32;
        println!(
            "criterion {:>2} {:<28} {}  ({detail}; {:.2?})",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() as u32 - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
