//! Binary interval tree over bid values, and the cursor the contract walks
//! along it.
//!
//! The root covers `[1, m]`. A node `[x, y]` splits into a left child
//! `[x, floor((x+y)/2)]` and a right child `[floor((x+y)/2)+1, y]`; leaves
//! are single values. The contract only ever moves right on an explicit
//! call; left moves are implicit and get replayed lazily: at block offset
//! `t` from the path anchor, any missing moves up to `t-1` are taken as
//! lefts before the explicit right executes.

use serde::Serialize;
use thiserror::Error;

/// A closed interval of bid values, `1 <= lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("interval is a leaf")]
pub struct Leaf;

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        assert!(1 <= lo && lo <= hi, "bad interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn root(max_bid: u64) -> Self {
        Interval::new(1, max_bid)
    }

    pub fn is_leaf(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, value: u64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn size(&self) -> u64 {
        self.hi - self.lo + 1
    }

    /// Left and right children; `Err(Leaf)` on single-value intervals.
    pub fn children(&self) -> Result<(Interval, Interval), Leaf> {
        if self.is_leaf() {
            return Err(Leaf);
        }
        let mid = (self.lo + self.hi) / 2;
        Ok((Interval::new(self.lo, mid), Interval::new(mid + 1, self.hi)))
    }

    /// Edges from this node down to its deepest leaf: `ceil(log2(size))`.
    pub fn depth(&self) -> u64 {
        let mut d = 0;
        let mut size = self.size();
        while size > 1 {
            size = size.div_ceil(2);
            d += 1;
        }
        d
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Tree depth for a root `[1, m]`.
pub fn depth_for(max_bid: u64) -> u64 {
    Interval::root(max_bid).depth()
}

/// The contract's position in the tree: current interval plus the number of
/// moves taken so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BatCursor {
    pub interval: Interval,
    pub step: u64,
}

impl BatCursor {
    pub fn root(max_bid: u64) -> Self {
        BatCursor { interval: Interval::root(max_bid), step: 0 }
    }

    /// Replay implicit left moves for block offset `t`: while fewer than
    /// `t - 1` moves were taken and the cursor is not at a leaf, descend
    /// left.
    pub fn caught_up(mut self, t: u64) -> Self {
        while self.step + 1 < t && !self.interval.is_leaf() {
            let (left, _) = self.interval.children().unwrap();
            self.interval = left;
            self.step += 1;
        }
        self
    }

    /// One explicit right move after catch-up for offset `t`.
    pub fn stepped_right(self, t: u64) -> Result<Self, Leaf> {
        let mut cur = self.caught_up(t);
        let (_, right) = cur.interval.children()?;
        cur.interval = right;
        cur.step += 1;
        Ok(cur)
    }

    /// Take every remaining implicit left down to a leaf (used when the
    /// path window has closed and the leaf value is needed).
    pub fn to_leaf(mut self) -> Self {
        while !self.interval.is_leaf() {
            let (left, _) = self.interval.children().unwrap();
            self.interval = left;
            self.step += 1;
        }
        self
    }
}

/// The root-to-leaf directions toward `value` in the tree over `[1, m]`.
/// Test-side oracle for path checks; `true` entries are right moves.
pub fn path_to(max_bid: u64, value: u64) -> Vec<bool> {
    let mut node = Interval::root(max_bid);
    let mut dirs = Vec::new();
    while let Ok((left, right)) = node.children() {
        if right.contains(value) {
            dirs.push(true);
            node = right;
        } else {
            dirs.push(false);
            node = left;
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_match_worked_tree_for_fifteen() {
        let split = |lo, hi| Interval::new(lo, hi).children().unwrap();
        assert_eq!(split(1, 15), (Interval::new(1, 8), Interval::new(9, 15)));
        assert_eq!(split(9, 15), (Interval::new(9, 12), Interval::new(13, 15)));
        assert_eq!(split(11, 12), (Interval::new(11, 11), Interval::new(12, 12)));
        assert_eq!(Interval::new(7, 7).children(), Err(Leaf));
    }

    #[test]
    fn depth_is_ceil_log2() {
        assert_eq!(depth_for(1), 0);
        assert_eq!(depth_for(2), 1);
        assert_eq!(depth_for(15), 4);
        assert_eq!(depth_for(16), 4);
        assert_eq!(depth_for(17), 5);
        assert_eq!(depth_for(64), 6);
    }

    #[test]
    fn worked_path_for_max_twelve() {
        // right at t=1, silence at t=2, right at t=3, right at t=4
        let c = BatCursor::root(15);
        let c = c.stepped_right(1).unwrap();
        assert_eq!((c.interval, c.step), (Interval::new(9, 15), 1));
        let c = c.stepped_right(3).unwrap();
        assert_eq!((c.interval, c.step), (Interval::new(11, 12), 3));
        let c = c.stepped_right(4).unwrap();
        assert_eq!((c.interval, c.step), (Interval::new(12, 12), 4));
        assert!(c.interval.is_leaf());
    }

    #[test]
    fn full_silence_drifts_to_leftmost_leaf() {
        let c = BatCursor::root(15).to_leaf();
        assert_eq!(c.interval, Interval::new(1, 1));
        assert_eq!(c.step, 4);
    }

    #[test]
    fn stepping_right_at_a_leaf_fails() {
        let c = BatCursor::root(1);
        assert_eq!(c.stepped_right(1), Err(Leaf));
    }

    #[test]
    fn cursor_tracks_any_target_value() {
        // Walking right exactly when the target is in the right child lands
        // on the target leaf after depth moves, for every m and target.
        for m in 1..=64u64 {
            let k = depth_for(m);
            for target in 1..=m {
                let mut cur = BatCursor::root(m);
                for t in 1..=k {
                    let peek = cur.caught_up(t);
                    if let Ok((_, right)) = peek.interval.children() {
                        if right.contains(target) {
                            cur = cur.stepped_right(t).unwrap();
                        }
                    }
                }
                let done = cur.to_leaf();
                assert_eq!(done.interval, Interval::new(target, target), "m={m} target={target}");
                assert!(done.step <= k);
            }
        }
    }
}
