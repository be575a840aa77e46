//! Classical anonymity subroutines built on XOR secret sharing: anonymous
//! OR, random bit, random agent and secret unique index assignment.
//!
//! Every repetition of [`logical_or`] runs the same three steps over the
//! [`Network`]: each agent deals an N-bit XOR sharing of its masked input,
//! each agent broadcasts the parity of what it received (in the order fixed by
//! the current ordering) and everyone folds the broadcasts into the
//! repetition parity.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{bits_str, Endpoint, EventKind, Network};

/// Coins per agent (`Γ`) and repetitions per ordering (`Σ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrParams {
    gamma: u32,
    sigma: u32,
}

impl OrParams {
    /// `Γ = 0, Σ = 1`: every agent's masked input equals its input, so one
    /// input of 1 makes every repetition odd.
    pub const DETERMINISTIC: OrParams = OrParams { gamma: 0, sigma: 1 };

    /// One coin per agent, so any number of 1 inputs yields an odd repetition
    /// with probability exactly 1/2. Misses with probability `2^{-8N}`.
    pub const PRESENCE_CHECK: OrParams = OrParams { gamma: 1, sigma: 8 };

    pub fn new(gamma: u32, sigma: u32) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::config("Σ (repetitions per ordering) must be at least 1"));
        }
        if gamma > 60 {
            return Err(Error::config(format!("Γ = {gamma} coins is beyond any useful security level")));
        }
        Ok(OrParams { gamma, sigma })
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    /// `S = (1 − 2^{−Γ})^Σ`.
    pub fn security(&self) -> f64 {
        (1.0 - 0.5f64.powi(self.gamma as i32)).powi(self.sigma as i32)
    }
}

/// N broadcast orders; agent `k` is last in exactly one of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingSchedule {
    orderings: Vec<Vec<usize>>,
}

impl OrderingSchedule {
    pub fn new(orderings: Vec<Vec<usize>>) -> Result<Self> {
        let n = orderings.len();
        if n < 2 {
            return Err(Error::precondition("an ordering schedule needs at least two agents"));
        }
        let mut last_seen = vec![false; n];
        for order in &orderings {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                return Err(Error::precondition(format!("{order:?} is not a permutation of 0..{n}")));
            }
            let last = order[n - 1];
            if std::mem::replace(&mut last_seen[last], true) {
                return Err(Error::precondition(format!("agent {last} is last in two orderings")));
            }
        }
        Ok(OrderingSchedule { orderings })
    }

    /// Public seeded draw: a random assignment of "last" slots, the rest shuffled.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::precondition("an ordering schedule needs at least two agents"));
        }
        let mut lasts: Vec<usize> = (0..n).collect();
        lasts.shuffle(rng);
        let orderings = lasts
            .into_iter()
            .map(|last| {
                let mut order: Vec<usize> = (0..n).filter(|&k| k != last).collect();
                order.shuffle(rng);
                order.push(last);
                order
            })
            .collect();
        Ok(OrderingSchedule { orderings })
    }

    pub fn n_agents(&self) -> usize {
        self.orderings.len()
    }

    pub fn orderings(&self) -> &[Vec<usize>] {
        &self.orderings
    }

    pub fn log(&self, net: &mut Network) {
        net.note(EventKind::Schedule, || {
            self.orderings
                .iter()
                .map(|o| o.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join("/")
        });
    }
}

/// Secret round index per agent. `omega[k]` is agent `k`'s 0-based round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexAssignment {
    omega: Vec<usize>,
}

impl IndexAssignment {
    pub fn new(omega: Vec<usize>) -> Result<Self> {
        let n = omega.len();
        let mut hit = vec![false; n];
        for &w in &omega {
            if w >= n || std::mem::replace(&mut hit[w], true) {
                return Err(Error::precondition(format!("{omega:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(IndexAssignment { omega })
    }

    pub fn n_agents(&self) -> usize {
        self.omega.len()
    }

    pub fn round_of(&self, agent: usize) -> usize {
        self.omega[agent]
    }

    pub fn voter_of_round(&self, round: usize) -> usize {
        self.omega.iter().position(|&w| w == round).expect("bijection")
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.omega
    }

    /// Relabels agents: agent `k` becomes `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> IndexAssignment {
        let mut omega = vec![0; self.omega.len()];
        for (k, &w) in self.omega.iter().enumerate() {
            omega[perm[k]] = w;
        }
        IndexAssignment { omega }
    }
}

/// Result of one anonymous OR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrOutcome {
    pub y: bool,
    /// Per agent: whether the parity of everyone else's masked inputs was odd
    /// in at least one repetition.
    pub others_odd: Vec<bool>,
    /// Set when a missing message forced the output to 1.
    pub forced: bool,
    /// Repetition parities in execution order.
    pub repetition_parities: Vec<bool>,
}

struct OrAgent {
    id: usize,
    input: bool,
    masked: bool,
    own_share: bool,
    others_odd: bool,
}

impl OrAgent {
    fn mask<R: Rng + ?Sized>(&mut self, gamma: u32, rng: &mut R) {
        self.masked = self.input && (0..gamma).fold(true, |all, _| rng.random::<bool>() & all);
    }

    fn deal<R: Rng + ?Sized>(&mut self, n: usize, net: &mut Network, slot: (u32, u32), rng: &mut R) {
        let mut shares: Vec<bool> = (0..n - 1).map(|_| rng.random()).collect();
        let fix = shares.iter().fold(self.masked, |acc, &b| acc ^ b);
        shares.push(fix);
        for (to, &bit) in shares.iter().enumerate() {
            if to == self.id {
                self.own_share = bit;
            } else {
                net.send_bit(self.id, to, bit, EventKind::Share, slot);
            }
        }
    }

    /// Folds the inbox into this agent's parity; `Err(culprit)` if a share is missing.
    fn collect(&self, n: usize, net: &mut Network) -> Result<bool, usize> {
        let inbox = net.drain_inbox(self.id);
        let mut got = vec![false; n];
        got[self.id] = true;
        let mut z = self.own_share;
        for (from, bit) in inbox {
            got[from] = true;
            z ^= bit;
        }
        match got.iter().position(|g| !g) {
            Some(culprit) => Err(culprit),
            None => Ok(z),
        }
    }
}

fn forced_one(net: &mut Network, agents: Vec<OrAgent>, parities: Vec<bool>, culprit: usize) -> OrOutcome {
    net.log(EventKind::ForcedOne, Endpoint::System, Endpoint::All, (0, 0), || culprit.to_string());
    net.note(EventKind::OrOutput, || "1".into());
    OrOutcome {
        y: true,
        others_odd: agents.iter().map(|a| a.others_odd).collect(),
        forced: true,
        repetition_parities: parities,
    }
}

/// Anonymous OR of one private bit per agent.
///
/// For each of the N orderings and each of the Σ repetitions, the masked input
/// is re-derived from the original input with fresh coins. A silent agent
/// forces the output to 1.
pub fn logical_or<R: Rng + ?Sized>(
    inputs: &[bool],
    params: OrParams,
    schedule: &OrderingSchedule,
    net: &mut Network,
    rng: &mut R,
) -> Result<OrOutcome> {
    let n = inputs.len();
    if n < 2 {
        return Err(Error::precondition("LogicalOr needs at least two agents"));
    }
    if schedule.n_agents() != n || net.n_agents() != n {
        return Err(Error::LengthMismatch { expected: n, got: schedule.n_agents().min(net.n_agents()) });
    }
    let mut agents: Vec<OrAgent> = inputs
        .iter()
        .enumerate()
        .map(|(id, &input)| OrAgent { id, input, masked: false, own_share: false, others_odd: false })
        .collect();
    let mut parities = Vec::with_capacity(n * params.sigma as usize);

    for (o, order) in schedule.orderings().iter().enumerate() {
        for rep in 0..params.sigma {
            let slot = (o as u32, rep);
            for agent in agents.iter_mut() {
                agent.mask(params.gamma, rng);
            }
            for agent in agents.iter_mut() {
                agent.deal(n, net, slot, rng);
            }
            let mut z = vec![false; n];
            for agent in &agents {
                match agent.collect(n, net) {
                    Ok(bit) => z[agent.id] = bit,
                    Err(culprit) => {
                        net.log(EventKind::Culprit, Endpoint::Agent(agent.id), Endpoint::All, slot, || {
                            culprit.to_string()
                        });
                        return Ok(forced_one(net, agents, parities, culprit));
                    }
                }
            }
            let mut y_rep = false;
            for &speaker in order {
                match net.broadcast_bit(speaker, z[speaker], EventKind::Parity, slot) {
                    Some(bit) => y_rep ^= bit,
                    None => return Ok(forced_one(net, agents, parities, speaker)),
                }
            }
            for agent in agents.iter_mut() {
                agent.others_odd |= y_rep ^ agent.masked;
            }
            parities.push(y_rep);
        }
    }

    let y = parities.iter().any(|&p| p);
    net.note(EventKind::OrOutput, || bits_str(&[y]));
    Ok(OrOutcome {
        y,
        others_odd: agents.iter().map(|a| a.others_odd).collect(),
        forced: false,
        repetition_parities: parities,
    })
}

/// The voting agent inputs a fresh uniform bit, everyone else inputs 0.
pub fn random_bit<R: Rng + ?Sized>(
    voting_agent: usize,
    params: OrParams,
    schedule: &OrderingSchedule,
    net: &mut Network,
    rng: &mut R,
) -> Result<bool> {
    let n = schedule.n_agents();
    if voting_agent >= n {
        return Err(Error::AgentOutOfRange { index: voting_agent, n });
    }
    let bit: bool = rng.random();
    send_bit_anonymously(voting_agent, bit, params, schedule, net, rng)
}

/// OR in which only `sender` may hold a 1.
pub fn send_bit_anonymously<R: Rng + ?Sized>(
    sender: usize,
    bit: bool,
    params: OrParams,
    schedule: &OrderingSchedule,
    net: &mut Network,
    rng: &mut R,
) -> Result<bool> {
    let mut inputs = vec![false; schedule.n_agents()];
    inputs[sender] = bit;
    Ok(logical_or(&inputs, params, schedule, net, rng)?.y)
}

/// Uniform agent index chosen anonymously by `voting_agent`: ⌈log₂N⌉ random
/// bits, redrawn whenever the value is out of range.
pub fn random_agent<R: Rng + ?Sized>(
    voting_agent: usize,
    params: OrParams,
    schedule: &OrderingSchedule,
    net: &mut Network,
    rng: &mut R,
) -> Result<usize> {
    let n = schedule.n_agents();
    let bits = usize::BITS - (n - 1).leading_zeros();
    loop {
        let mut value = 0usize;
        for _ in 0..bits {
            value = (value << 1) | random_bit(voting_agent, params, schedule, net, rng)? as usize;
        }
        if value < n {
            return Ok(value);
        }
    }
}

/// Default budget of LogicalOr invocations for [`unique_index`].
pub const DEFAULT_INDEX_OR_CAP: usize = 10_000;

/// Anonymous assignment of a secret random permutation of round indices.
///
/// Each index is claimed by a candidate that saw no collision in any
/// repetition and then announced through a deterministic notification OR. A
/// presence check after every claim ("is anyone still without an index?")
/// catches an undetected collision, in which case assignment restarts from
/// scratch. The process treats all agents symmetrically, so the resulting
/// permutation is uniform.
pub fn unique_index<R: Rng + ?Sized>(
    n: usize,
    params: OrParams,
    net: &mut Network,
    rng: &mut R,
    or_cap: usize,
) -> Result<IndexAssignment> {
    if n < 2 {
        return Err(Error::precondition("UniqueIndex needs at least two agents"));
    }
    let schedule = OrderingSchedule::random(n, rng)?;
    schedule.log(net);
    let mut calls = 0usize;
    let charge = |calls: &mut usize| -> Result<()> {
        *calls += 1;
        if *calls > or_cap {
            Err(Error::RoundCap { cap: or_cap })
        } else {
            Ok(())
        }
    };

    'restart: loop {
        let mut omega: Vec<Option<usize>> = vec![None; n];
        let mut round = 0usize;
        while round < n {
            let t = omega.iter().filter(|w| w.is_none()).count();
            let p = 1.0 / t.max(1) as f64;
            let inputs: Vec<bool> =
                omega.iter().map(|w| w.is_none() && rng.random_bool(p)).collect();
            charge(&mut calls)?;
            let claim = logical_or(&inputs, params, &schedule, net, rng)?;
            if !claim.y {
                continue;
            }
            let winners: Vec<bool> =
                inputs.iter().zip(&claim.others_odd).map(|(&x, &odd)| x && !odd).collect();
            charge(&mut calls)?;
            let notify = logical_or(&winners, OrParams::DETERMINISTIC, &schedule, net, rng)?;
            if !notify.y {
                continue;
            }
            for (k, _) in winners.iter().enumerate().filter(|(_, &w)| w) {
                omega[k] = Some(round);
                net.log(EventKind::IndexAssigned, Endpoint::System, Endpoint::Agent(k), (0, 0), || {
                    round.to_string()
                });
            }
            round += 1;

            let pending: Vec<bool> = omega.iter().map(Option::is_none).collect();
            charge(&mut calls)?;
            let someone_left = logical_or(&pending, OrParams::PRESENCE_CHECK, &schedule, net, rng)?.y;
            if someone_left != (round < n) {
                net.note(EventKind::IndexRestart, || round.to_string());
                continue 'restart;
            }
        }
        let omega = omega.into_iter().map(|w| w.expect("all assigned")).collect();
        return IndexAssignment::new(omega);
    }
}

/// Regenerates one agent's per-repetition view of an honest [`logical_or`]
/// from the public repetition parity alone; the agent's own masked input does
/// not shift the law of anything it sees. Each record is `(received shares, broadcast
/// parities)`, shares in sender order with the agent itself skipped.
pub fn simulate_or_view<R: Rng + ?Sized>(
    n: usize,
    agent: usize,
    repetition_parity: bool,
    rng: &mut R,
) -> (Vec<bool>, Vec<bool>) {
    // Own share and received shares are uniform; own parity follows from them.
    let own_share: bool = rng.random();
    let received: Vec<bool> = (0..n - 1).map(|_| rng.random()).collect();
    let own_z = received.iter().fold(own_share, |acc, &b| acc ^ b);
    let mut z: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    z[agent] = own_z;
    // Re-fix one other agent's parity so the total matches the public parity.
    let other = if agent == 0 { 1 } else { 0 };
    let rest = z.iter().enumerate().filter(|(i, _)| *i != other).fold(false, |acc, (_, &b)| acc ^ b);
    z[other] = rest ^ repetition_parity;
    (received, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Detail;
    use crate::rng::stream_rng;

    fn net(n: usize) -> Network {
        Network::new(n, Detail::Off)
    }

    #[test]
    fn security_parameter() {
        assert_eq!(OrParams::DETERMINISTIC.security(), 0.0);
        let p = OrParams::new(3, 4).unwrap();
        assert!((p.security() - (7.0f64 / 8.0).powi(4)).abs() < 1e-15);
        assert!(OrParams::new(1, 0).is_err());
    }

    #[test]
    fn random_schedule_puts_everyone_last_once() {
        let mut rng = stream_rng(3, 0);
        for n in 2..8 {
            let s = OrderingSchedule::random(n, &mut rng).unwrap();
            OrderingSchedule::new(s.orderings().to_vec()).unwrap();
        }
        assert!(OrderingSchedule::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(OrderingSchedule::new(vec![vec![0, 0], vec![1, 0]]).is_err());
    }

    #[test]
    fn all_zero_inputs_give_zero() {
        let mut rng = stream_rng(5, 0);
        let sched = OrderingSchedule::random(4, &mut rng).unwrap();
        for _ in 0..200 {
            let out = logical_or(&[false; 4], OrParams::new(3, 4).unwrap(), &sched, &mut net(4), &mut rng).unwrap();
            assert!(!out.y);
            assert!(out.others_odd.iter().all(|&b| !b));
        }
    }

    #[test]
    fn single_one_is_certain_without_coins() {
        let mut rng = stream_rng(6, 0);
        let sched = OrderingSchedule::random(5, &mut rng).unwrap();
        for k in 0..5 {
            let mut inputs = [false; 5];
            inputs[k] = true;
            let out = logical_or(&inputs, OrParams::DETERMINISTIC, &sched, &mut net(5), &mut rng).unwrap();
            assert!(out.y);
            // Only the holder sees an even "everyone else" parity.
            for (j, &odd) in out.others_odd.iter().enumerate() {
                assert_eq!(odd, j != k);
            }
        }
    }

    #[test]
    fn silent_agent_forces_one() {
        let mut rng = stream_rng(7, 0);
        let sched = OrderingSchedule::random(4, &mut rng).unwrap();
        for silent in 0..4 {
            let mut net = Network::new(4, Detail::Decisions);
            net.silence(silent);
            let out = logical_or(&[false; 4], OrParams::new(2, 2).unwrap(), &sched, &mut net, &mut rng).unwrap();
            assert!(out.y && out.forced);
            assert!(net.transcript().events().iter().any(|e| e.kind == EventKind::ForcedOne));
        }
    }

    #[test]
    fn random_bit_zero_coins_echoes_the_bit() {
        let mut rng = stream_rng(8, 0);
        let sched = OrderingSchedule::random(3, &mut rng).unwrap();
        assert!(!send_bit_anonymously(1, false, OrParams::new(3, 2).unwrap(), &sched, &mut net(3), &mut rng).unwrap());
        assert!(send_bit_anonymously(1, true, OrParams::DETERMINISTIC, &sched, &mut net(3), &mut rng).unwrap());
        assert!(random_bit(3, OrParams::DETERMINISTIC, &sched, &mut net(3), &mut rng).is_err());
    }

    #[test]
    fn random_agent_two_agents() {
        let mut rng = stream_rng(9, 0);
        let sched = OrderingSchedule::random(2, &mut rng).unwrap();
        for _ in 0..50 {
            let a = random_agent(0, OrParams::DETERMINISTIC, &sched, &mut net(2), &mut rng).unwrap();
            assert!(a < 2);
        }
    }

    #[test]
    fn unique_index_yields_bijections() {
        let mut rng = stream_rng(10, 0);
        for n in 2..=6 {
            for params in [OrParams::DETERMINISTIC, OrParams::new(2, 2).unwrap()] {
                let a = unique_index(n, params, &mut net(n), &mut rng, DEFAULT_INDEX_OR_CAP).unwrap();
                IndexAssignment::new(a.as_slice().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn unique_index_round_cap() {
        let mut rng = stream_rng(11, 0);
        assert!(matches!(
            unique_index(6, OrParams::DETERMINISTIC, &mut net(6), &mut rng, 3),
            Err(Error::RoundCap { cap: 3 })
        ));
    }

    #[test]
    fn own_index_is_private() {
        let mut rng = stream_rng(12, 0);
        let mut net = Network::new(4, Detail::Decisions);
        let a = unique_index(4, OrParams::DETERMINISTIC, &mut net, &mut rng, DEFAULT_INDEX_OR_CAP).unwrap();
        for k in 0..4 {
            let own: Vec<_> = net
                .transcript()
                .view_of(k)
                .filter(|e| e.kind == EventKind::IndexAssigned)
                .collect();
            assert_eq!(own.len(), 1);
            assert_eq!(own[0].payload, a.round_of(k).to_string());
        }
    }

    #[test]
    fn assignment_helpers() {
        let a = IndexAssignment::new(vec![2, 0, 1]).unwrap();
        assert_eq!(a.voter_of_round(0), 1);
        assert_eq!(a.relabeled(&[1, 2, 0]).as_slice(), &[1, 2, 0]);
        assert!(IndexAssignment::new(vec![0, 0, 1]).is_err());
    }
}
