//! Voting, bulletin board and tally, and the full three-phase protocol with
//! its multi-candidate and privacy-amplified variants.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{board_tamper, lying_verifier_round, AdversaryModel, Coalition, SourceStrategy, StateSource};
use crate::anoncast::{
    logical_or, random_agent, send_bit_anonymously, unique_index, IndexAssignment, OrParams, OrderingSchedule,
    DEFAULT_INDEX_OR_CAP,
};
use crate::error::{Error, Result};
use crate::net::{bits_str, Detail, Endpoint, EventKind, Network, Phase, Transcript};
use crate::qsim::{parity, SharedState, DEFAULT_QUBIT_CAP};
use crate::rng::stream_rng;
use crate::verify::{verification_round, VerifierCounters};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "QVOTE_SEED";
pub const DEFAULT_SEED: u64 = 1;

fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// All protocol parameters. Keys match the election input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectionConfig {
    pub n_agents: usize,
    /// Candidate id per agent (0/1 for a binary election).
    pub votes: Vec<u32>,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub gamma: u32,
    pub sigma: u32,
    pub lambda: f64,
    pub candidates: u32,
    pub amplification_rounds: u32,
    pub seed: u64,
    pub source_model: String,
    pub adversary_model: String,
    /// Overrides the coin count derived from (N, ε, δ, η).
    pub coins: Option<u32>,
    pub qubit_cap: usize,
    pub detail: Detail,
    pub index_or_cap: usize,
}

impl Default for ElectionConfig {
    fn default() -> Self {
        ElectionConfig {
            n_agents: 4,
            votes: vec![0, 1, 1, 1],
            epsilon: 0.6,
            delta: 0.05,
            eta: 0.001,
            gamma: 3,
            sigma: 4,
            lambda: 0.1,
            candidates: 2,
            amplification_rounds: 1,
            seed: default_seed(),
            source_model: "ideal".into(),
            adversary_model: "none".into(),
            coins: None,
            qubit_cap: DEFAULT_QUBIT_CAP,
            detail: Detail::Decisions,
            index_or_cap: DEFAULT_INDEX_OR_CAP,
        }
    }
}

/// Coin count with its unrounded value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinCount {
    pub raw: f64,
    pub m: u32,
}

/// `M = ⌈log₂[16Nε²/(ε²−4δ)² · ln(1/η)]⌉`.
pub fn coin_count(n: usize, epsilon: f64, delta: f64, eta: f64) -> Result<CoinCount> {
    let gap = epsilon * epsilon - 4.0 * delta;
    if gap <= 0.0 {
        return Err(Error::config(format!(
            "need ε² > 4δ (α = 1 − 4δ/ε² must be positive); got ε={epsilon}, δ={delta}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::config(format!("η must lie in (0, 1), got {eta}")));
    }
    let raw = (16.0 * n as f64 * epsilon * epsilon / (gap * gap) * (1.0 / eta).ln()).log2();
    Ok(CoinCount { raw, m: raw.ceil().max(0.0) as u32 })
}

/// `⌈log₂ k⌉` for `k ≥ 1`.
pub fn ceil_log2(k: u32) -> u32 {
    u32::BITS - k.saturating_sub(1).leading_zeros()
}

impl ElectionConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ElectionConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_agents;
        if n < 2 {
            return Err(Error::config("need at least two agents"));
        }
        if n > self.qubit_cap {
            return Err(Error::QubitCap { requested: n, cap: self.qubit_cap });
        }
        if self.votes.len() != n {
            return Err(Error::config(format!("{} votes for {n} agents", self.votes.len())));
        }
        if self.candidates < 2 {
            return Err(Error::config("need at least two candidates"));
        }
        if let Some(v) = self.votes.iter().find(|&&v| v >= self.candidates) {
            return Err(Error::config(format!("vote {v} is not a candidate (K = {})", self.candidates)));
        }
        if self.amplification_rounds == 0 {
            return Err(Error::config("amplification_rounds must be at least 1"));
        }
        if self.candidates > 2 && self.amplification_rounds > 1 {
            return Err(Error::config("privacy amplification is only defined for two candidates"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(format!("ε must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::config(format!("δ must lie in [0, 1), got {}", self.delta)));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(Error::config("λ must be positive"));
        }
        OrParams::new(self.gamma, self.sigma)?;
        coin_count(n, self.epsilon, self.delta, self.eta)?;
        self.source()?;
        self.adversary()?;
        Ok(())
    }

    /// Parameters of the Phase-3 objection OR.
    pub fn or_params(&self) -> Result<OrParams> {
        OrParams::new(self.gamma, self.sigma)
    }

    /// UniqueIndex needs a proper OR: with Γ = 0 the claim round is a parity.
    pub fn index_params(&self) -> Result<OrParams> {
        OrParams::new(self.gamma.max(1), self.sigma)
    }

    pub fn coin_count(&self) -> Result<CoinCount> {
        coin_count(self.n_agents, self.epsilon, self.delta, self.eta)
    }

    /// Coins actually tossed per repeat iteration.
    pub fn m(&self) -> Result<u32> {
        match self.coins {
            Some(m) => Ok(m),
            None => Ok(self.coin_count()?.m),
        }
    }

    pub fn digits(&self) -> u32 {
        ceil_log2(self.candidates)
    }

    pub fn source(&self) -> Result<SourceStrategy> {
        self.source_model.parse()
    }

    pub fn adversary(&self) -> Result<AdversaryModel> {
        AdversaryModel::parse(&self.adversary_model, self.n_agents)
    }

    pub fn binary_votes(&self) -> Result<Vec<bool>> {
        self.votes
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                v => Err(Error::config(format!("binary election got vote {v}"))),
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Board and tally

/// Validated N×N board; row ℓ holds the bits broadcast in round ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BulletinBoard {
    rows: Vec<Vec<bool>>,
}

impl BulletinBoard {
    /// Rejects anything but exactly `n` rows of `n` bits.
    pub fn new(rows: Vec<Vec<bool>>, n: usize) -> Result<Self> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::MalformedBoard { rows: rows.len(), widths: rows.iter().map(Vec::len).collect(), n });
        }
        Ok(BulletinBoard { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    /// Row parities `E`.
    pub fn vote_vector(&self) -> Vec<bool> {
        self.rows.iter().map(|r| parity(r)).collect()
    }
}

impl fmt::Display for BulletinBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| bits_str(r)).collect();
        f.write_str(&rows.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub counts: Vec<usize>,
    /// Rows that decode to no candidate.
    pub invalid: usize,
}

impl Tally {
    pub fn from_values(values: impl IntoIterator<Item = usize>, candidates: usize) -> Self {
        let mut counts = vec![0; candidates];
        let mut invalid = 0;
        for v in values {
            match counts.get_mut(v) {
                Some(c) => *c += 1,
                None => invalid += 1,
            }
        }
        Tally { counts, invalid }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.invalid
    }

    pub fn is_tie(&self) -> bool {
        let max = self.counts.iter().max().copied().unwrap_or(0);
        self.counts.iter().filter(|&&c| c == max).count() > 1
    }

    /// Candidate with the most votes, `None` on a tie.
    pub fn winner(&self) -> Option<usize> {
        if self.is_tie() {
            return None;
        }
        self.counts.iter().enumerate().max_by_key(|(_, c)| **c).map(|(i, _)| i)
    }
}

impl fmt::Display for Tally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", c.join(","))?;
        if self.invalid > 0 {
            write!(f, "+{}", self.invalid)?;
        }
        Ok(())
    }
}

/// Board, vote vector and binary tally from the raw rows of an `n`-agent run.
pub fn assemble_and_tally(rows: &[Vec<bool>], n: usize) -> Result<(BulletinBoard, Vec<bool>, Tally)> {
    let board = BulletinBoard::new(rows.to_vec(), n)?;
    let e = board.vote_vector();
    let tally = Tally::from_values(e.iter().map(|&b| b as usize), 2);
    Ok((board, e, tally))
}

/// A voter's check that their vote was counted: `E[ω] = v`.
pub fn verify_own_vote(board: &BulletinBoard, round: usize, vote: bool) -> bool {
    board.vote_vector().get(round) == Some(&vote)
}

/// Bits broadcast in a voting round: everyone's outcome, the voter's XORed
/// with the vote.
pub fn cast_row(outcomes: &[bool], voter: usize, vote: bool) -> Vec<bool> {
    let mut row = outcomes.to_vec();
    row[voter] ^= vote;
    row
}

/// Everyone measures in the Hadamard basis and broadcasts; the voter
/// broadcasts `d ⊕ v`.
pub fn voting_round<R: Rng + ?Sized>(
    state: &mut SharedState,
    voter: usize,
    vote: bool,
    net: &mut Network,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let n = state.n_qubits()?;
    if voter >= n {
        return Err(Error::AgentOutOfRange { index: voter, n });
    }
    let d = state.take()?.measure_all_hadamard(rng);
    let row: Vec<bool> = cast_row(&d, voter, vote)
        .into_iter()
        .enumerate()
        .map(|(k, b)| net.broadcast_bit(k, b, EventKind::Outcome, (0, 0)).unwrap_or(false))
        .collect();
    net.note(EventKind::Row, || bits_str(&row));
    Ok(row)
}

/// Anonymous objection; `true` means the result stands.
pub fn phase3_objection<R: Rng + ?Sized>(
    objections: &[bool],
    params: OrParams,
    schedule: &OrderingSchedule,
    net: &mut Network,
    rng: &mut R,
) -> Result<bool> {
    for (k, &o) in objections.iter().enumerate() {
        net.log(EventKind::Objection, Endpoint::Agent(k), Endpoint::Agent(k), (0, 0), || bits_str(&[o]));
    }
    Ok(!logical_or(objections, params, schedule, net, rng)?.y)
}

// ---------------------------------------------------------------------------
// Phase 2

/// Fixed inputs of one voting round.
#[derive(Clone, Copy, Debug)]
pub struct CastParams<'a> {
    pub coins: u32,
    pub delta: f64,
    pub schedule: &'a OrderingSchedule,
    pub coalition: Option<&'a Coalition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    /// Broadcast row, absent when the round aborted.
    pub row: Option<Vec<bool>>,
    pub counters: VerifierCounters,
    /// Agent whose rejection rate crossed δ.
    pub aborted_by: Option<usize>,
}

/// One voting round: repeat {state, coins, announcement, maybe verification}
/// until the voter announces a vote, then the δ check, then voting.
pub fn phase2_round<R: Rng + ?Sized>(
    voter: usize,
    vote: bool,
    params: &CastParams<'_>,
    source: &mut dyn StateSource,
    net: &mut Network,
    rng: &mut R,
) -> Result<RoundReport> {
    let n = params.schedule.n_agents();
    let mut counters = VerifierCounters::new(n);
    let mut shared = loop {
        let state = source.emit(n, net.transcript()).inspect_err(|e| {
            let msg = e.to_string().replace(' ', "_");
            net.note(EventKind::SourceFault, || msg);
        })?;
        let mut shared = SharedState::new(state);
        let coins: Vec<bool> = (0..params.coins).map(|_| rng.random()).collect();
        net.log(EventKind::Coins, Endpoint::Agent(voter), Endpoint::Agent(voter), (0, 0), || bits_str(&coins));
        let all_heads = coins.iter().all(|&c| c);
        let verify = send_bit_anonymously(voter, !all_heads, OrParams::DETERMINISTIC, params.schedule, net, rng)?;
        net.note(EventKind::Announce, || if verify { "verify" } else { "vote" }.into());
        if !verify {
            break shared;
        }
        let verifier = random_agent(voter, OrParams::DETERMINISTIC, params.schedule, net, rng)?;
        net.note(EventKind::Verifier, || verifier.to_string());
        let outcome = match params.coalition {
            Some(c) if c.contains(verifier) => lying_verifier_round(&mut shared, verifier, c, net, rng)?,
            _ => verification_round(&mut shared, verifier, net, rng)?,
        };
        counters.record_trial(verifier, outcome.accepted);
    };
    if let Some(j) = counters.exceeding(params.delta) {
        net.note(EventKind::Threshold, || format!("abort:{j}"));
        return Ok(RoundReport { row: None, counters, aborted_by: Some(j) });
    }
    net.note(EventKind::Threshold, || "pass".into());
    let row = voting_round(&mut shared, voter, vote, net, rng)?;
    Ok(RoundReport { row: Some(row), counters, aborted_by: None })
}

// ---------------------------------------------------------------------------
// Full protocol

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbortReason {
    VerificationThreshold { sub_election: usize, round: usize, agent: usize },
    Phase3Objection,
    MalformedBoard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Accepted,
    Aborted(AbortReason),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElectionOutcome {
    pub status: Status,
    /// One board per sub-election that completed Phase 2.
    pub boards: Vec<BulletinBoard>,
    /// `table[ℓ][s]`: parity of row ℓ in sub-election s.
    pub table: Vec<Vec<bool>>,
    /// Decoded vote per round.
    pub decoded: Vec<usize>,
    pub tally: Option<Tally>,
    pub assignment: IndexAssignment,
    pub verifications: u64,
    pub rejections: u64,
}

impl ElectionOutcome {
    pub fn accepted(&self) -> bool {
        self.status == Status::Accepted
    }

    pub fn tie(&self) -> bool {
        self.tally.as_ref().is_some_and(Tally::is_tie)
    }

    /// Single-line summary used by `run` and `replay`.
    pub fn record(&self) -> String {
        let status = match &self.status {
            Status::Accepted => "accepted".to_string(),
            Status::Aborted(AbortReason::VerificationThreshold { sub_election, round, agent }) => {
                format!("aborted:verification-threshold:{sub_election}:{round}:{agent}")
            }
            Status::Aborted(AbortReason::Phase3Objection) => "aborted:phase3-objection".into(),
            Status::Aborted(AbortReason::MalformedBoard) => "aborted:malformed-board".into(),
        };
        let table: Vec<String> = self.table.iter().map(|r| bits_str(r)).collect();
        let boards: Vec<String> = self.boards.iter().map(|b| b.to_string()).collect();
        let omega: Vec<String> = self.assignment.as_slice().iter().map(|w| w.to_string()).collect();
        format!(
            "status={status} tally={} tie={} table={} boards={} omega={} verifications={} rejections={}",
            self.tally.as_ref().map_or("-".to_string(), |t| t.to_string()),
            self.tie() as u8,
            if table.is_empty() { "-".into() } else { table.join("/") },
            if boards.is_empty() { "-".into() } else { boards.join("|") },
            omega.join(","),
            self.verifications,
            self.rejections,
        )
    }
}

/// How each agent's vote is spread over sub-elections.
#[derive(Clone, Copy, Debug)]
enum Encoding<'v> {
    /// Candidate id in `digits` binary digits, most significant first.
    Digits { votes: &'v [u32], digits: usize, candidates: usize },
    /// Vote bit as the XOR of `q` shares, drawn at cast time.
    Xor { votes: &'v [bool], q: usize },
}

impl Encoding<'_> {
    fn subs(&self) -> usize {
        match self {
            Encoding::Digits { digits, .. } => *digits,
            Encoding::Xor { q, .. } => *q,
        }
    }

    fn candidates(&self) -> usize {
        match self {
            Encoding::Digits { candidates, .. } => *candidates,
            Encoding::Xor { .. } => 2,
        }
    }

    /// Bits cast in sub-election `s`, given the bits of earlier ones.
    fn bits<R: Rng + ?Sized>(&self, s: usize, earlier: &[Vec<bool>], rng: &mut R) -> Vec<bool> {
        match *self {
            Encoding::Digits { votes, digits, .. } => {
                votes.iter().map(|&v| (v >> (digits - 1 - s)) & 1 == 1).collect()
            }
            Encoding::Xor { votes, q } => (0..votes.len())
                .map(|k| {
                    if s + 1 < q {
                        rng.random()
                    } else {
                        earlier.iter().fold(votes[k], |acc, bits| acc ^ bits[k])
                    }
                })
                .collect(),
        }
    }

    fn decode(&self, row: &[bool]) -> usize {
        match self {
            Encoding::Digits { .. } => row.iter().fold(0, |acc, &b| (acc << 1) | b as usize),
            Encoding::Xor { .. } => parity(row) as usize,
        }
    }
}

fn run_protocol<R: Rng + ?Sized>(
    config: &ElectionConfig,
    encoding: Encoding<'_>,
    source: &mut dyn StateSource,
    adversary: &AdversaryModel,
    net: &mut Network,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    config.validate()?;
    let n = config.n_agents;
    if net.n_agents() != n {
        return Err(Error::LengthMismatch { expected: n, got: net.n_agents() });
    }
    let coalition = adversary.coalition();

    net.set_context(Phase::Index, 0);
    let assignment = unique_index(n, config.index_params()?, net, rng, config.index_or_cap)?;
    net.set_context(Phase::Setup, 0);
    let schedule = OrderingSchedule::random(n, rng)?;
    schedule.log(net);

    let params = CastParams { coins: config.m()?, delta: config.delta, schedule: &schedule, coalition };
    let mut cast: Vec<Vec<bool>> = Vec::new();
    let mut all_rows: Vec<Vec<Vec<bool>>> = Vec::new();
    let (mut verifications, mut rejections) = (0, 0);

    let outcome = |status, boards, table, decoded, tally, verifications, rejections| ElectionOutcome {
        status,
        boards,
        table,
        decoded,
        tally,
        assignment: assignment.clone(),
        verifications,
        rejections,
    };

    for s in 0..encoding.subs() {
        let bits = encoding.bits(s, &cast, rng);
        let mut rows = Vec::with_capacity(n);
        for round in 0..n {
            net.set_context(Phase::Cast, (s * n + round) as u32);
            let voter = assignment.voter_of_round(round);
            let report = phase2_round(voter, bits[voter], &params, source, net, rng)?;
            verifications += report.counters.total_trials();
            rejections += report.counters.total_rejections();
            match report.row {
                Some(row) => rows.push(row),
                None => {
                    let agent = report.aborted_by.expect("aborted round names an agent");
                    net.note(EventKind::Verdict, || "aborted:verification-threshold".into());
                    let reason = AbortReason::VerificationThreshold { sub_election: s, round, agent };
                    return Ok(outcome(Status::Aborted(reason), vec![], vec![], vec![], None, verifications, rejections));
                }
            }
        }
        cast.push(bits);
        all_rows.push(rows);
    }

    net.set_context(Phase::Tally, 0);
    if let Some(t) = adversary.tamper() {
        net.note(EventKind::Tamper, || t.to_string());
        for rows in all_rows.iter_mut() {
            *rows = board_tamper(rows, t);
        }
    }
    let mut boards = Vec::with_capacity(all_rows.len());
    for rows in all_rows {
        match BulletinBoard::new(rows, n) {
            Ok(b) => {
                net.note(EventKind::Board, || b.to_string());
                boards.push(b);
            }
            Err(Error::MalformedBoard { .. }) => {
                net.note(EventKind::Verdict, || "aborted:malformed-board".into());
                let status = Status::Aborted(AbortReason::MalformedBoard);
                return Ok(outcome(status, boards, vec![], vec![], None, verifications, rejections));
            }
            Err(e) => return Err(e),
        }
    }
    let vectors: Vec<Vec<bool>> = boards.iter().map(BulletinBoard::vote_vector).collect();
    let table: Vec<Vec<bool>> = (0..n).map(|l| vectors.iter().map(|e| e[l]).collect()).collect();
    let decoded: Vec<usize> = table.iter().map(|row| encoding.decode(row)).collect();

    net.set_context(Phase::Objection, 0);
    let objections: Vec<bool> = (0..n)
        .map(|k| {
            let round = assignment.round_of(k);
            !coalition.is_some_and(|c| c.contains(k)) && cast.iter().zip(&table[round]).any(|(bits, &e)| bits[k] != e)
        })
        .collect();
    let stands = phase3_objection(&objections, config.or_params()?, &schedule, net, rng)?;
    let (status, tally) = if stands {
        (Status::Accepted, Some(Tally::from_values(decoded.iter().copied(), encoding.candidates())))
    } else {
        (Status::Aborted(AbortReason::Phase3Objection), None)
    };
    let result = outcome(status, boards, table, decoded, tally, verifications, rejections);
    net.note(EventKind::Verdict, || result.record().split(' ').next().unwrap_or_default().to_string());
    Ok(result)
}

/// Binary election: one vote bit per agent.
pub fn run_election<R: Rng + ?Sized>(
    config: &ElectionConfig,
    votes: &[bool],
    source: &mut dyn StateSource,
    adversary: &AdversaryModel,
    net: &mut Network,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    let ids: Vec<u32> = votes.iter().map(|&v| v as u32).collect();
    check_votes(config, ids.len())?;
    let encoding = Encoding::Digits { votes: &ids, digits: 1, candidates: 2 };
    run_protocol(config, encoding, source, adversary, net, rng)
}

/// ⌈log₂K⌉ binary sub-elections sharing one index assignment, with a single
/// objection round at the end.
pub fn multi_candidate_election<R: Rng + ?Sized>(
    config: &ElectionConfig,
    votes: &[u32],
    source: &mut dyn StateSource,
    adversary: &AdversaryModel,
    net: &mut Network,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    check_votes(config, votes.len())?;
    if let Some(v) = votes.iter().find(|&&v| v >= config.candidates) {
        return Err(Error::config(format!("vote {v} is not a candidate")));
    }
    let encoding = Encoding::Digits {
        votes,
        digits: config.digits() as usize,
        candidates: config.candidates as usize,
    };
    run_protocol(config, encoding, source, adversary, net, rng)
}

/// Q sub-elections; each vote is the XOR of the agent's Q cast bits.
pub fn amplified_election<R: Rng + ?Sized>(
    config: &ElectionConfig,
    votes: &[bool],
    source: &mut dyn StateSource,
    adversary: &AdversaryModel,
    net: &mut Network,
    rng: &mut R,
) -> Result<ElectionOutcome> {
    check_votes(config, votes.len())?;
    let encoding = Encoding::Xor { votes, q: config.amplification_rounds as usize };
    run_protocol(config, encoding, source, adversary, net, rng)
}

fn check_votes(config: &ElectionConfig, got: usize) -> Result<()> {
    if got != config.n_agents {
        return Err(Error::LengthMismatch { expected: config.n_agents, got });
    }
    Ok(())
}

/// Outcome together with the transcript it produced.
#[derive(Clone, Debug)]
pub struct ElectionRecord {
    pub outcome: ElectionOutcome,
    pub transcript: Transcript,
}

/// Runs the election described by `config` from its seed: the variant is
/// picked from K and Q, the source and adversary from their model strings.
pub fn execute(config: &ElectionConfig) -> Result<ElectionRecord> {
    config.validate()?;
    let mut source = config.source()?.source(config.n_agents)?;
    let adversary = config.adversary()?;
    let mut net = Network::new(config.n_agents, config.detail);
    let mut rng = stream_rng(config.seed, 0);
    let outcome = if config.candidates > 2 {
        multi_candidate_election(config, &config.votes, &mut source, &adversary, &mut net, &mut rng)?
    } else if config.amplification_rounds > 1 {
        let votes = config.binary_votes()?;
        amplified_election(config, &votes, &mut source, &adversary, &mut net, &mut rng)?
    } else {
        let votes = config.binary_votes()?;
        run_election(config, &votes, &mut source, &adversary, &mut net, &mut rng)?
    };
    Ok(ElectionRecord { outcome, transcript: net.into_transcript() })
}
