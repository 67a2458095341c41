//! Observation traces and the observational-determinism check.
//!
//! Every participant of the simulated network sees the same public log; what
//! differs per observer is which transactions are *theirs* (they know their
//! own keys, including pseudonyms) and nothing else. A projected trace keeps,
//! per event, the block, the function name, the validity bit, the sender
//! relabeled by first appearance, and the observer's own-transaction flag.
//! Arguments, identities and witness material are stripped, so comparing two
//! projected traces is a literal equality check.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::simchain::{BlockNote, Identity, Transaction};

/// One event as a given observer records it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectedEvent {
    pub block: u64,
    /// Sender relabeled by first appearance in the trace; `None` for
    /// contract-published notes.
    pub sender: Option<u32>,
    /// Function name, or `note:<label>` for block notes.
    pub kind: String,
    pub valid: bool,
    /// True when the observer controls the sending identity.
    pub mine: bool,
    /// Public payload of notes; calls carry no argument data.
    pub data: Option<String>,
}

/// The raw per-observer view: the full ordered public record. Witness
/// material never reaches this structure; argument summaries are dropped at
/// projection time.
#[derive(Debug, Clone, Serialize)]
pub struct ObservationTrace {
    pub observer: String,
    pub events: Vec<ProjectedEvent>,
}

/// Project the public record for an observer controlling `owned` identities.
/// Notes precede transactions within a block.
pub fn project(
    observer: &str,
    log: &[Transaction],
    notes: &[BlockNote],
    owned: &BTreeSet<Identity>,
) -> ObservationTrace {
    let mut canon: BTreeMap<Identity, u32> = BTreeMap::new();
    let mut events = Vec::new();
    let mut note_iter = notes.iter().peekable();
    let mut log_iter = log.iter().peekable();
    // Merge by block, notes first: the block hook runs before the block's
    // transactions.
    loop {
        let next_note_block = note_iter.peek().map(|n| n.block);
        let next_tx_block = log_iter.peek().map(|t| t.block);
        match (next_note_block, next_tx_block) {
            (None, None) => break,
            (Some(nb), tb) if tb.is_none() || nb <= tb.unwrap() => {
                let n = note_iter.next().unwrap();
                events.push(ProjectedEvent {
                    block: n.block,
                    sender: None,
                    kind: format!("note:{}", n.label),
                    valid: true,
                    mine: false,
                    data: Some(n.data.clone()),
                });
            }
            _ => {
                let t = log_iter.next().unwrap();
                let c = match canon.get(&t.sender) {
                    Some(&c) => c,
                    None => {
                        let c = canon.len() as u32;
                        canon.insert(t.sender, c);
                        c
                    }
                };
                events.push(ProjectedEvent {
                    block: t.block,
                    sender: Some(c),
                    kind: t.function.clone(),
                    valid: t.status.is_accepted(),
                    mine: owned.contains(&t.sender),
                    data: None,
                });
            }
        }
    }
    ObservationTrace { observer: observer.to_string(), events }
}

/// Result of comparing two projected traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TraceVerdict {
    Equal,
    Differs {
        index: usize,
        left: Option<ProjectedEvent>,
        right: Option<ProjectedEvent>,
    },
}

impl TraceVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, TraceVerdict::Equal)
    }
}

/// Compare two projected traces, reporting the first divergence.
pub fn compare(a: &ObservationTrace, b: &ObservationTrace) -> TraceVerdict {
    let len = a.events.len().max(b.events.len());
    for i in 0..len {
        let left = a.events.get(i);
        let right = b.events.get(i);
        if left != right {
            return TraceVerdict::Differs {
                index: i,
                left: left.cloned(),
                right: right.cloned(),
            };
        }
    }
    TraceVerdict::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simchain::TxStatus;

    fn tx(seq: u64, block: u64, sender: u64, function: &str, ok: bool) -> Transaction {
        Transaction {
            seq,
            block,
            sender: Identity(sender),
            function: function.into(),
            args: format!("secret-{seq}"),
            value: 0,
            status: if ok { TxStatus::Accepted } else { TxStatus::Rejected("x".into()) },
        }
    }

    #[test]
    fn projection_strips_arguments_and_relabels() {
        let log = vec![tx(0, 1, 42, "register", true), tx(1, 2, 7, "bid", false)];
        let trace = project("outside", &log, &[], &BTreeSet::new());
        assert_eq!(trace.events[0].sender, Some(0));
        assert_eq!(trace.events[1].sender, Some(1));
        assert!(trace.events.iter().all(|e| e.data.is_none()));
        assert!(!trace.events[1].valid);
    }

    #[test]
    fn relabeling_makes_identity_values_irrelevant() {
        let a = vec![tx(0, 1, 10, "register", true), tx(1, 1, 11, "register", true)];
        let b = vec![tx(0, 1, 99, "register", true), tx(1, 1, 3, "register", true)];
        let ta = project("o", &a, &[], &BTreeSet::new());
        let tb = project("o", &b, &[], &BTreeSet::new());
        assert!(compare(&ta, &tb).is_equal());
    }

    #[test]
    fn own_transactions_are_marked() {
        let log = vec![tx(0, 1, 10, "right", true), tx(1, 1, 11, "right", true)];
        let mine: BTreeSet<Identity> = [Identity(11)].into_iter().collect();
        let t_me = project("me", &log, &[], &mine);
        assert!(!t_me.events[0].mine);
        assert!(t_me.events[1].mine);
        let t_out = project("outside", &log, &[], &BTreeSet::new());
        assert_eq!(compare(&t_me, &t_out), TraceVerdict::Differs {
            index: 1,
            left: Some(t_me.events[1].clone()),
            right: Some(t_out.events[1].clone()),
        });
    }

    #[test]
    fn notes_precede_transactions_in_their_block() {
        let log = vec![tx(0, 2, 1, "right", true)];
        let notes = vec![BlockNote { block: 2, label: "fake_selection".into(), data: "[0, 2]".into() }];
        let t = project("o", &log, &notes, &BTreeSet::new());
        assert_eq!(t.events[0].kind, "note:fake_selection");
        assert_eq!(t.events[0].data.as_deref(), Some("[0, 2]"));
        assert_eq!(t.events[1].kind, "right");
    }
}
