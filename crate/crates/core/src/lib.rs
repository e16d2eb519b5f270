//! Discrete-event simulation of blockchain consensus on peer-to-peer graphs.
//!
//! Nodes create blocks at rates proportional to their hashing (or staking)
//! power and gossip their chain heads over the edges of a P2P graph. The
//! event loop is an exact Gillespie direct-method simulation; every block
//! ever created is kept in a global [`engine::Blocktree`] so that fork
//! statistics can be computed after the run.
//!
//! Modules:
//!
//! * [`topology`] - graph families, shortest paths, random-walk hitting
//!   times and the branching threshold `tau / <M>`.
//! * [`hashpower`] - power samplers, rate normalisation, Gini index.
//! * [`engine`] - the event loop, blocktree and run traces.
//! * [`metrics`] - orphan rate, branch rate, consensus fraction and friends.
//! * [`fitting`] - CCDF, maximum-likelihood fits and likelihood-ratio tests.
//! * [`harness`] - replicated sweeps, critical-delay estimation and
//!   finite-size extrapolation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod fitting;
pub mod harness;
pub mod hashpower;
pub mod metrics;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
