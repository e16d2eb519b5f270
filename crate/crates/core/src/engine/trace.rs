//! Run traces and their on-disk forms.
//!
//! Binary trace: a flat sequence of 21-byte little-endian records, no header:
//!
//! | offset | type | field                                        |
//! |--------|------|----------------------------------------------|
//! | 0      | f64  | event time                                   |
//! | 8      | u8   | kind: 0 = creation, 1 = diffusion            |
//! | 9      | u32  | actor: creator, or receiving node            |
//! | 13     | u64  | block id: created block, or receiver's new head |

use super::blocktree::{Block, BlockId, Blocktree};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const BINARY_RECORD_LEN: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Creation,
    Diffusion,
}

/// One state change. Replaying the log reproduces every node's head history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub actor: u32,
    pub block: BlockId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub t_sim: f64,
    pub end_time: f64,
    /// Total time during which every node held the same head (`T_c`).
    pub consensus_time: f64,
    pub final_heads: Vec<BlockId>,
    pub creations: u64,
    pub diffusions: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<Event>>,
}

/// `P = T_c / T_sim`.
pub fn consensus_fraction(trace: &RunTrace) -> f64 {
    (trace.consensus_time / trace.t_sim).clamp(0.0, 1.0)
}

/// Replays an event log into per-node head sequences, starting at genesis.
pub fn head_history(n: usize, events: &[Event]) -> Vec<Vec<(f64, BlockId)>> {
    let mut history = vec![vec![(0.0, super::GENESIS)]; n];
    for e in events {
        history[e.actor as usize].push((e.time, e.block));
    }
    history
}

pub fn write_binary_trace<W: Write>(events: &[Event], mut out: W) -> Result<()> {
    let mut buf = [0u8; BINARY_RECORD_LEN];
    for e in events {
        buf[0..8].copy_from_slice(&e.time.to_le_bytes());
        buf[8] = match e.kind {
            EventKind::Creation => 0,
            EventKind::Diffusion => 1,
        };
        buf[9..13].copy_from_slice(&e.actor.to_le_bytes());
        buf[13..21].copy_from_slice(&e.block.to_le_bytes());
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_binary_trace<R: Read>(mut input: R) -> Result<Vec<Event>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % BINARY_RECORD_LEN != 0 {
        return Err(Error::Parse {
            line: bytes.len() / BINARY_RECORD_LEN + 1,
            message: format!(
                "trailing {} bytes in binary trace",
                bytes.len() % BINARY_RECORD_LEN
            ),
        });
    }
    bytes
        .chunks_exact(BINARY_RECORD_LEN)
        .enumerate()
        .map(|(i, r)| {
            let kind = match r[8] {
                0 => EventKind::Creation,
                1 => EventKind::Diffusion,
                k => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("unknown event kind {k}"),
                    })
                }
            };
            Ok(Event {
                time: f64::from_le_bytes(r[0..8].try_into().unwrap()),
                kind,
                actor: u32::from_le_bytes(r[9..13].try_into().unwrap()),
                block: u64::from_le_bytes(r[13..21].try_into().unwrap()),
            })
        })
        .collect()
}

/// Parameters echoed into a run document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub nodes: usize,
    pub edges: usize,
    pub tau: f64,
    pub tau_nd: f64,
    pub t_sim: f64,
    pub powers: Vec<f64>,
}

/// JSON form of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub config: ConfigEcho,
    pub seed: u64,
    pub blocks: Vec<Block>,
    pub final_heads: Vec<BlockId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_history: Option<Vec<Event>>,
    pub consensus_time: f64,
    pub consensus_fraction: f64,
}

impl RunDocument {
    pub fn new(config: &super::SimConfig, output: &super::RunOutput) -> Self {
        RunDocument {
            config: ConfigEcho {
                nodes: config.graph.node_count(),
                edges: config.graph.edge_count(),
                tau: config.profile.tau(),
                tau_nd: config.tau_nd,
                t_sim: config.t_sim,
                powers: config.profile.powers().to_vec(),
            },
            seed: config.seed,
            blocks: output.tree.blocks().to_vec(),
            final_heads: output.trace.final_heads.clone(),
            head_history: output.trace.events.clone(),
            consensus_time: output.trace.consensus_time,
            consensus_fraction: consensus_fraction(&output.trace),
        }
    }

    pub fn blocktree(&self) -> Result<Blocktree> {
        Blocktree::from_blocks(self.blocks.clone())
    }
}
