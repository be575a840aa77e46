//! Transcript files: a `config` header, one event per line and a closing
//! `outcome` line carrying a hash of everything above it.
//!
//! ```text
//! config n_agents=4 votes=0,1,1,1 epsilon=f:3fe3333333333333 ...
//! seq=0 phase=index round=0 kind=schedule from=sys to=* ord=0 rep=0 data=...
//! outcome hash=5c1e0f2a9b7d3e11 status=accepted tally=1,3 ...
//! ```

use crate::election::{execute, ElectionConfig, ElectionRecord};
use crate::error::{Error, Result};
use crate::net::{f64_hex, parse_f64_hex, Detail, TranscriptEvent};

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Header line; floats are written as IEEE-754 bit patterns.
pub fn config_line(c: &ElectionConfig) -> String {
    let votes: Vec<String> = c.votes.iter().map(|v| v.to_string()).collect();
    format!(
        "config n_agents={} votes={} epsilon={} delta={} eta={} gamma={} sigma={} lambda={} candidates={} \
         amplification_rounds={} seed={} source_model={} adversary_model={} coins={} qubit_cap={} detail={} \
         index_or_cap={}",
        c.n_agents,
        votes.join(","),
        f64_hex(c.epsilon),
        f64_hex(c.delta),
        f64_hex(c.eta),
        c.gamma,
        c.sigma,
        f64_hex(c.lambda),
        c.candidates,
        c.amplification_rounds,
        c.seed,
        squash(&c.source_model),
        squash(&c.adversary_model),
        c.coins.map_or("-".to_string(), |m| m.to_string()),
        c.qubit_cap,
        c.detail,
        c.index_or_cap,
    )
}

pub fn parse_config_line(line: &str) -> Result<ElectionConfig> {
    let bad = |reason: String| Error::Transcript { line: 1, reason };
    let body = line.strip_prefix("config ").ok_or_else(|| bad("missing config header".into()))?;
    let mut c = ElectionConfig::default();
    let mut seen = 0usize;
    for field in body.split(' ') {
        let (key, value) = field.split_once('=').ok_or_else(|| bad(format!("malformed field {field:?}")))?;
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("bad integer for {key}: {v:?}")));
        let float = |v: &str| parse_f64_hex(v).ok_or_else(|| bad(format!("bad float for {key}: {v:?}")));
        match key {
            "n_agents" => c.n_agents = int(value)? as usize,
            "votes" => {
                c.votes = value.split(',').map(|v| int(v).map(|x| x as u32)).collect::<Result<_>>()?;
            }
            "epsilon" => c.epsilon = float(value)?,
            "delta" => c.delta = float(value)?,
            "eta" => c.eta = float(value)?,
            "gamma" => c.gamma = int(value)? as u32,
            "sigma" => c.sigma = int(value)? as u32,
            "lambda" => c.lambda = float(value)?,
            "candidates" => c.candidates = int(value)? as u32,
            "amplification_rounds" => c.amplification_rounds = int(value)? as u32,
            "seed" => c.seed = int(value)?,
            "source_model" => c.source_model = value.to_string(),
            "adversary_model" => c.adversary_model = value.to_string(),
            "coins" => c.coins = if value == "-" { None } else { Some(int(value)? as u32) },
            "qubit_cap" => c.qubit_cap = int(value)? as usize,
            "detail" => c.detail = value.parse::<Detail>().map_err(bad)?,
            "index_or_cap" => c.index_or_cap = int(value)? as usize,
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
        seen += 1;
    }
    if seen != 17 {
        return Err(bad(format!("expected 17 config fields, found {seen}")));
    }
    c.validate()?;
    Ok(c)
}

/// Full file text for a finished run.
pub fn render_run(config: &ElectionConfig, record: &ElectionRecord) -> String {
    let mut body = String::new();
    body.push_str(&config_line(config));
    body.push('\n');
    for line in record.transcript.lines() {
        body.push_str(&line);
        body.push('\n');
    }
    let hash = fnv1a(body.as_bytes());
    body.push_str(&format!("outcome hash={hash:016x} {}\n", record.outcome.record()));
    body
}

/// Runs `config` and renders its transcript file.
pub fn run_to_file(config: &ElectionConfig) -> Result<(String, ElectionRecord)> {
    let record = execute(config)?;
    Ok((render_run(config, &record), record))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub identical: bool,
    pub original_outcome: String,
    pub replayed_outcome: String,
    /// 1-based line of the first difference.
    pub first_difference: Option<usize>,
}

/// Re-executes the run described by a transcript file and compares the
/// regenerated file byte for byte.
pub fn replay(text: &str) -> Result<ReplayReport> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or(Error::Transcript { line: 1, reason: "empty transcript".into() })?;
    let config = parse_config_line(header)?;
    let last = lines.len();
    let outcome = lines[last - 1];
    if last < 2 || !outcome.starts_with("outcome ") {
        return Err(Error::Transcript { line: last, reason: "missing outcome line".into() });
    }
    let mut prev = None;
    for (i, line) in lines[1..last - 1].iter().enumerate() {
        let ev = TranscriptEvent::parse_line(line, i + 2)?;
        if prev.is_some_and(|p| ev.seq <= p) {
            return Err(Error::Transcript { line: i + 2, reason: "sequence numbers must increase".into() });
        }
        prev = Some(ev.seq);
    }
    let (again, _) = run_to_file(&config)?;
    let replayed: Vec<&str> = again.lines().collect();
    let first_difference = (0..lines.len().max(replayed.len()))
        .find(|&i| lines.get(i) != replayed.get(i))
        .map(|i| i + 1);
    Ok(ReplayReport {
        identical: again == text,
        original_outcome: outcome.to_string(),
        replayed_outcome: replayed.last().copied().unwrap_or_default().to_string(),
        first_difference,
    })
}
