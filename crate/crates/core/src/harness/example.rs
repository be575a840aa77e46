//! The small worked elections: the four-voter board and the seven-voter
//! multi-candidate table.

use std::fmt;

use crate::anoncast::IndexAssignment;
use crate::election::{assemble_and_tally, cast_row, execute, BulletinBoard, ElectionConfig, ElectionOutcome, Tally};
use crate::error::Result;
use crate::net::bits_str;

#[derive(Clone, Debug, PartialEq)]
pub struct WorkedExample {
    pub board: BulletinBoard,
    pub e: Vec<bool>,
    pub tally: Tally,
}

impl fmt::Display for WorkedExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "B =")?;
        for row in self.board.rows() {
            let cells: Vec<String> = row.iter().map(|&b| (b as u8).to_string()).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        writeln!(f, "E = ({})", bits_str(&self.e).chars().map(String::from).collect::<Vec<_>>().join(","))?;
        write!(f, "T = ({})", self.tally.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
    }
}

/// Four voters with fixed Hadamard outcomes `d_k` (one entry per round),
/// voting in the order (4,2,1,3). The votes (0,1,1,1) are listed in voting
/// order, so agent 4 is the one voting 0.
pub fn worked_example() -> Result<WorkedExample> {
    let d: [[u8; 4]; 4] = [[0, 1, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1], [1, 0, 0, 0]];
    let votes = [true, true, true, false];
    // Agent k votes in round omega[k]: agent 4 first, then 2, 1, 3.
    let assignment = IndexAssignment::new(vec![2, 1, 3, 0])?;
    let rows: Vec<Vec<bool>> = (0..4)
        .map(|round| {
            let outcomes: Vec<bool> = d.iter().map(|dk| dk[round] == 1).collect();
            let voter = assignment.voter_of_round(round);
            cast_row(&outcomes, voter, votes[voter])
        })
        .collect();
    let (board, e, tally) = assemble_and_tally(&rows, 4)?;
    Ok(WorkedExample { board, e, tally })
}

/// Seven voters, four candidate ids (0 = no preference), two digit
/// sub-elections sharing one index assignment, ideal source.
pub fn digit_table(seed: u64, coins: u32) -> Result<ElectionOutcome> {
    let config = ElectionConfig {
        n_agents: 7,
        votes: vec![3, 3, 1, 2, 0, 0, 0],
        candidates: 4,
        coins: Some(coins),
        seed,
        detail: crate::net::Detail::Off,
        ..Default::default()
    };
    Ok(execute(&config)?.outcome)
}
