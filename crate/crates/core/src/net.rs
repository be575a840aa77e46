//! Simulated network: authenticated broadcast, pairwise private channels and
//! the append-only transcript that records every message and decision.
//!
//! Transcript lines are `key=value` records in a fixed key order:
//!
//! ```text
//! seq=17 phase=cast round=2 kind=share from=a1 to=a3 ord=0 rep=1 data=1
//! ```
//!
//! `to=*` marks a broadcast, `sys` is the protocol driver itself.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Setup,
    Index,
    Cast,
    Tally,
    Objection,
}

impl Phase {
    fn as_str(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Index => "index",
            Phase::Cast => "cast",
            Phase::Tally => "tally",
            Phase::Objection => "objection",
        }
    }
}

impl FromStr for Phase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "setup" => Phase::Setup,
            "index" => Phase::Index,
            "cast" => Phase::Cast,
            "tally" => Phase::Tally,
            "objection" => Phase::Objection,
            other => return Err(format!("unknown phase {other:?}")),
        })
    }
}

macro_rules! event_kinds {
    ($($variant:ident => $name:literal, $message:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum EventKind { $($variant),* }

        impl EventKind {
            pub fn as_str(self) -> &'static str {
                match self { $(EventKind::$variant => $name),* }
            }

            /// Message-level events are only kept at [`Detail::Messages`].
            pub fn is_message(self) -> bool {
                match self { $(EventKind::$variant => $message),* }
            }
        }

        impl FromStr for EventKind {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(EventKind::$variant),)*
                    other => Err(format!("unknown event kind {other:?}")),
                }
            }
        }
    };
}

event_kinds! {
    Schedule => "schedule", false;
    Share => "share", true;
    Parity => "parity", true;
    OrOutput => "or_output", false;
    ForcedOne => "forced_one", false;
    Culprit => "culprit", false;
    IndexAssigned => "index_assigned", false;
    IndexRestart => "index_restart", false;
    Coins => "coins", true;
    Announce => "announce", false;
    Verifier => "verifier", false;
    Angle => "angle", true;
    Outcome => "outcome", true;
    VerifyResult => "verify_result", false;
    Threshold => "threshold", false;
    SourceFault => "source_fault", false;
    Row => "row", false;
    Board => "board", false;
    Tamper => "tamper", false;
    Objection => "objection", true;
    Verdict => "verdict", false;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Agent(usize),
    All,
    System,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Agent(i) => write!(f, "a{i}"),
            Endpoint::All => f.write_str("*"),
            Endpoint::System => f.write_str("sys"),
        }
    }
}

impl FromStr for Endpoint {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "*" => Ok(Endpoint::All),
            "sys" => Ok(Endpoint::System),
            _ => s
                .strip_prefix('a')
                .and_then(|n| n.parse().ok())
                .map(Endpoint::Agent)
                .ok_or_else(|| format!("bad endpoint {s:?}")),
        }
    }
}

/// How much of a run is written to the transcript.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detail {
    /// Nothing is recorded; used by large Monte Carlo sweeps.
    Off,
    /// Protocol decisions: OR outputs, verifier picks, verdicts, rows.
    #[default]
    Decisions,
    /// Every share, parity broadcast, angle and measurement outcome as well.
    Messages,
}

impl FromStr for Detail {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(Detail::Off),
            "decisions" => Ok(Detail::Decisions),
            "messages" => Ok(Detail::Messages),
            other => Err(format!("unknown detail level {other:?}")),
        }
    }
}

impl fmt::Display for Detail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detail::Off => "off",
            Detail::Decisions => "decisions",
            Detail::Messages => "messages",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEvent {
    pub seq: u64,
    pub phase: Phase,
    pub round: u32,
    pub kind: EventKind,
    pub sender: Endpoint,
    pub receiver: Endpoint,
    pub ordering: u32,
    pub repetition: u32,
    /// Space-free payload text (bit strings, integers, hex-encoded floats).
    pub payload: String,
}

impl fmt::Display for TranscriptEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seq={} phase={} round={} kind={} from={} to={} ord={} rep={} data={}",
            self.seq,
            self.phase.as_str(),
            self.round,
            self.kind.as_str(),
            self.sender,
            self.receiver,
            self.ordering,
            self.repetition,
            self.payload
        )
    }
}

impl TranscriptEvent {
    pub fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        const KEYS: [&str; 9] = ["seq", "phase", "round", "kind", "from", "to", "ord", "rep", "data"];
        let bad = |reason: String| Error::Transcript { line: line_no, reason };
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != KEYS.len() {
            return Err(bad(format!("expected {} fields, found {}", KEYS.len(), fields.len())));
        }
        let mut values = [""; 9];
        for (slot, (field, key)) in values.iter_mut().zip(fields.iter().zip(KEYS)) {
            *slot = field
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| bad(format!("expected key {key:?} in {field:?}")))?;
        }
        let num = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
        Ok(TranscriptEvent {
            seq: num(values[0])?,
            phase: values[1].parse().map_err(bad)?,
            round: num(values[2])? as u32,
            kind: values[3].parse().map_err(bad)?,
            sender: values[4].parse().map_err(bad)?,
            receiver: values[5].parse().map_err(bad)?,
            ordering: num(values[6])? as u32,
            repetition: num(values[7])? as u32,
            payload: values[8].to_string(),
        })
    }

    /// Whether `agent` sent or received this event (broadcasts reach everyone).
    pub fn visible_to(&self, agent: usize) -> bool {
        self.sender == Endpoint::Agent(agent)
            || self.receiver == Endpoint::Agent(agent)
            || self.receiver == Endpoint::All
    }
}

pub fn bits_str(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// IEEE-754 bit pattern of a float, for platform-exact serialization.
pub fn f64_hex(x: f64) -> String {
    format!("f:{:016x}", x.to_bits())
}

pub fn parse_f64_hex(s: &str) -> Option<f64> {
    let hex = s.strip_prefix("f:")?;
    u64::from_str_radix(hex, 16).ok().map(f64::from_bits)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn events(&self) -> &[TranscriptEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The events an agent sees.
    pub fn view_of(&self, agent: usize) -> impl Iterator<Item = &TranscriptEvent> {
        self.events.iter().filter(move |e| e.visible_to(agent))
    }

    /// Broadcast-only events (what an outside observer sees).
    pub fn public(&self) -> impl Iterator<Item = &TranscriptEvent> {
        self.events.iter().filter(|e| e.receiver == Endpoint::All)
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events.iter().map(|e| e.to_string())
    }
}

/// The shared medium plus the transcript sink.
///
/// Private messages queue in the receiver's inbox until drained. Agents marked
/// silent drop every outgoing message.
#[derive(Debug)]
pub struct Network {
    n: usize,
    detail: Detail,
    transcript: Transcript,
    phase: Phase,
    round: u32,
    inboxes: Vec<Vec<(usize, bool)>>,
    silent: Vec<bool>,
}

impl Network {
    pub fn new(n: usize, detail: Detail) -> Self {
        Network {
            n,
            detail,
            transcript: Transcript::default(),
            phase: Phase::Setup,
            round: 0,
            inboxes: vec![Vec::new(); n],
            silent: vec![false; n],
        }
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn detail(&self) -> Detail {
        self.detail
    }

    pub fn set_context(&mut self, phase: Phase, round: u32) {
        self.phase = phase;
        self.round = round;
    }

    pub fn context(&self) -> (Phase, u32) {
        (self.phase, self.round)
    }

    pub fn silence(&mut self, agent: usize) {
        self.silent[agent] = true;
    }

    pub fn is_silent(&self, agent: usize) -> bool {
        self.silent[agent]
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn records(&self, kind: EventKind) -> bool {
        match self.detail {
            Detail::Off => false,
            Detail::Decisions => !kind.is_message(),
            Detail::Messages => true,
        }
    }

    /// Appends an event; the payload closure only runs when the event is kept.
    pub fn log(
        &mut self,
        kind: EventKind,
        sender: Endpoint,
        receiver: Endpoint,
        slot: (u32, u32),
        payload: impl FnOnce() -> String,
    ) {
        if !self.records(kind) {
            return;
        }
        let seq = self.transcript.events.len() as u64;
        self.transcript.events.push(TranscriptEvent {
            seq,
            phase: self.phase,
            round: self.round,
            kind,
            sender,
            receiver,
            ordering: slot.0,
            repetition: slot.1,
            payload: payload(),
        });
    }

    /// Driver-level decision record.
    pub fn note(&mut self, kind: EventKind, payload: impl FnOnce() -> String) {
        self.log(kind, Endpoint::System, Endpoint::All, (0, 0), payload);
    }

    /// Private bit from `from` to `to`. Returns false if the sender is silent.
    pub fn send_bit(&mut self, from: usize, to: usize, bit: bool, kind: EventKind, slot: (u32, u32)) -> bool {
        if self.silent[from] {
            return false;
        }
        self.log(kind, Endpoint::Agent(from), Endpoint::Agent(to), slot, || bits_str(&[bit]));
        self.inboxes[to].push((from, bit));
        true
    }

    pub fn drain_inbox(&mut self, agent: usize) -> Vec<(usize, bool)> {
        std::mem::take(&mut self.inboxes[agent])
    }

    /// Public broadcast of a bit. `None` when the sender refuses to speak.
    pub fn broadcast_bit(&mut self, from: usize, bit: bool, kind: EventKind, slot: (u32, u32)) -> Option<bool> {
        if self.silent[from] {
            return None;
        }
        self.log(kind, Endpoint::Agent(from), Endpoint::All, slot, || bits_str(&[bit]));
        Some(bit)
    }
}
