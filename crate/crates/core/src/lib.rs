//! Simulator and analysis toolkit for authority-free quantum e-voting over a
//! shared GHZ resource.
//!
//! The crate is organised bottom-up:
//!
//! * [`qsim`]: exact statevector simulation of the shared state.
//! * [`net`]: simulated authenticated broadcast + private channels and the
//!   transcript every message lands in.
//! * [`anoncast`]: anonymous OR, random bit/agent and secret index assignment.
//! * [`verify`]: the rotated-basis GHZ test and per-agent rejection counters.
//! * [`election`]: voting rounds, bulletin board, tally and the full protocol.
//! * [`adversary`]: malicious sources, lying verifiers, identity-guessing
//!   coalitions and board tampering.
//! * [`harness`]: closed-form bounds, Monte Carlo experiments, config files
//!   and replay.

pub mod adversary;
pub mod anoncast;
pub mod election;
pub mod error;
pub mod harness;
pub mod net;
pub mod qsim;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
