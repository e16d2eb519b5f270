//! Block creation and gossip diffusion as a continuous-time Markov chain.

mod blocktree;
mod sim;
mod trace;

pub use blocktree::{Block, BlockId, Blocktree, GENESIS};
pub use sim::{run, RunOutput, SimConfig, SimState, Simulation, StepOutcome};
pub use trace::{
    consensus_fraction, head_history, read_binary_trace, write_binary_trace, ConfigEcho, Event,
    EventKind, RunDocument, RunTrace, BINARY_RECORD_LEN,
};
