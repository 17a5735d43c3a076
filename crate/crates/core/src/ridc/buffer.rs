use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::imex::ensure_finite;
use crate::ivp::SplitIvp;

/// A level's solution at one grid node together with both right-hand-side
/// halves evaluated there. Immutable once published.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValue {
    pub index: usize,
    pub state: Vec<f64>,
    pub f_stiff: Vec<f64>,
    pub f_nonstiff: Vec<f64>,
    /// `f_stiff + f_nonstiff`.
    pub f_total: Vec<f64>,
}

impl NodeValue {
    pub fn evaluate(ivp: &SplitIvp, index: usize, t: f64, state: Vec<f64>) -> Result<Self> {
        ensure_finite(&state, t)?;
        let f_stiff = ivp.eval_stiff(t, &state)?;
        let f_nonstiff = ivp.eval_nonstiff(t, &state)?;
        ensure_finite(&f_stiff, t)?;
        ensure_finite(&f_nonstiff, t)?;
        let f_total = f_stiff
            .iter()
            .zip(&f_nonstiff)
            .map(|(s, n)| s + n)
            .collect();
        Ok(Self {
            index,
            state,
            f_stiff,
            f_nonstiff,
            f_total,
        })
    }
}

/// Bounded window of the most recent nodes of one level.
///
/// Single writer (the level itself), single reader (the level above). Slots
/// always hold consecutive indices ending at the watermark; publishing into
/// a full buffer evicts the oldest slot.
#[derive(Debug)]
pub struct LevelBuffer {
    level: usize,
    capacity: usize,
    slots: VecDeque<Arc<NodeValue>>,
    peak: usize,
}

impl LevelBuffer {
    /// Buffer for `level` seeded with the shared initial node (index 0).
    pub fn new(level: usize, capacity: usize, initial: Arc<NodeValue>) -> Self {
        assert!(capacity >= 1);
        assert_eq!(initial.index, 0);
        let mut slots = VecDeque::with_capacity(capacity);
        slots.push_back(initial);
        Self {
            level,
            capacity,
            slots,
            peak: 1,
        }
    }

    /// Default capacity: the `level + 2` nodes the next level's stencil spans.
    pub fn default_capacity(level: usize) -> usize {
        level + 2
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn watermark(&self) -> usize {
        self.latest().index
    }

    /// Oldest retained index.
    pub fn oldest(&self) -> usize {
        self.slots.front().expect("buffer is never empty").index
    }

    pub fn latest(&self) -> &Arc<NodeValue> {
        self.slots.back().expect("buffer is never empty")
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Largest number of slots ever held.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn publish(&mut self, node: Arc<NodeValue>) -> Result<()> {
        let expected = self.watermark() + 1;
        if node.index != expected {
            return Err(Error::Protocol(format!(
                "level {} published index {} but expected {expected}",
                self.level, node.index
            )));
        }
        if self.slots.len() == self.capacity {
            self.slots.pop_front();
        }
        self.slots.push_back(node);
        self.peak = self.peak.max(self.slots.len());
        Ok(())
    }

    /// Nodes `lo..=hi`, oldest first.
    pub fn window(&self, lo: usize, hi: usize) -> Result<Vec<Arc<NodeValue>>> {
        if hi > self.watermark() {
            return Err(Error::Protocol(format!(
                "level {} read index {hi} beyond watermark {}",
                self.level,
                self.watermark()
            )));
        }
        if lo < self.oldest() {
            return Err(Error::Protocol(format!(
                "level {} read index {lo} after it was evicted (oldest {})",
                self.level,
                self.oldest()
            )));
        }
        let start = lo - self.oldest();
        Ok(self
            .slots
            .range(start..=start + (hi - lo))
            .cloned()
            .collect())
    }
}
