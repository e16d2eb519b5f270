use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub type BlockId = u64;

pub const GENESIS: BlockId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    /// `None` only for genesis.
    pub parent: Option<BlockId>,
    pub height: u32,
    /// `None` only for genesis.
    pub miner: Option<u32>,
    pub discovery_time: f64,
}

/// Append-only store of every block created during a run.
///
/// Block ids are dense indices in creation order; genesis is id 0 at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocktree {
    blocks: Vec<Block>,
}

impl Default for Blocktree {
    fn default() -> Self {
        Self::new()
    }
}

impl Blocktree {
    pub fn new() -> Self {
        Blocktree {
            blocks: vec![Block {
                id: GENESIS,
                parent: None,
                height: 0,
                miner: None,
                discovery_time: 0.0,
            }],
        }
    }

    /// Rebuilds a tree from records, checking ids, parents, heights and times.
    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self> {
        let bad = |msg: String| Err(Error::Inconsistent(msg));
        match blocks.first() {
            Some(g) if g.id == GENESIS && g.parent.is_none() && g.height == 0 => {}
            _ => return bad("first block must be a height-0 genesis with id 0".into()),
        }
        for (idx, b) in blocks.iter().enumerate().skip(1) {
            if b.id != idx as BlockId {
                return bad(format!("block at index {idx} has id {}", b.id));
            }
            let Some(p) = b.parent else {
                return bad(format!("block {} has no parent", b.id));
            };
            if p >= b.id {
                return bad(format!("block {} references later parent {p}", b.id));
            }
            let parent = &blocks[p as usize];
            if b.height != parent.height + 1 {
                return bad(format!(
                    "block {} height {} under parent height {}",
                    b.id, b.height, parent.height
                ));
            }
            if b.discovery_time < blocks[idx - 1].discovery_time {
                return bad(format!("block {} discovered before its predecessor", b.id));
            }
        }
        Ok(Blocktree { blocks })
    }

    pub(crate) fn push_child(&mut self, parent: BlockId, miner: u32, time: f64) -> BlockId {
        let id = self.blocks.len() as BlockId;
        let height = self.blocks[parent as usize].height + 1;
        debug_assert!(time >= self.blocks[id as usize - 1].discovery_time);
        self.blocks.push(Block {
            id,
            parent: Some(parent),
            height,
            miner: Some(miner),
            discovery_time: time,
        });
        id
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Never true: genesis is always present.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn get(&self, id: BlockId) -> &Block {
        &self.blocks[id as usize]
    }

    pub fn height(&self, id: BlockId) -> u32 {
        self.blocks[id as usize].height
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Children lists indexed by block id, each in creation order.
    pub fn children(&self) -> Vec<Vec<BlockId>> {
        let mut children = vec![Vec::new(); self.blocks.len()];
        for b in &self.blocks[1..] {
            children[b.parent.unwrap() as usize].push(b.id);
        }
        children
    }

    /// `id`, its parent, ..., genesis.
    pub fn ancestry(&self, id: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        std::iter::successors(Some(id), move |&b| self.blocks[b as usize].parent)
    }

    pub fn max_height(&self) -> u32 {
        self.blocks.iter().map(|b| b.height).max().unwrap_or(0)
    }
}
