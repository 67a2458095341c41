//! Deterministic simulated blockchain.
//!
//! One contract runs per chain. Transactions are queued with a global
//! sequence number, and `advance_block` executes everything queued since the
//! last block in sequence order, so execution is a pure function of
//! (prior state, ordered transactions). Attached value is escrowed at
//! submission, moves into the contract pot on acceptance, and returns to the
//! sender on rejection. Gas is an accounting overlay driven by a cost model
//! table; it never limits execution or touches balances.
//!
//! Each height gets a beacon value derived as `hash(seed, height)`, standing
//! in for an on-chain randomness service while keeping replays exact.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::Digest32;
use crate::proofs::ProofRegistry;

/// An on-chain account. Principals and pseudonyms look identical here;
/// who controls what is harness-side knowledge and never enters the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Identity(pub u64);

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "id{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TxStatus {
    Accepted,
    Rejected(String),
}

impl TxStatus {
    pub fn is_accepted(&self) -> bool {
        matches!(self, TxStatus::Accepted)
    }
}

/// One executed transaction as it appears in the log.
#[derive(Debug, Clone, Serialize)]
pub struct Transaction {
    pub seq: u64,
    pub block: u64,
    pub sender: Identity,
    pub function: String,
    pub args: String,
    pub value: u64,
    pub status: TxStatus,
}

/// A public, non-transaction record a contract attaches to a block
/// (e.g. the published decoy-bidder selection).
#[derive(Debug, Clone, Serialize)]
pub struct BlockNote {
    pub block: u64,
    pub label: String,
    pub data: String,
}

/// One metered charge, accumulated per executed call.
#[derive(Debug, Clone, Serialize)]
pub struct GasCharge {
    pub block: u64,
    pub seq: u64,
    pub function: String,
    pub payer: Identity,
    pub amount: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SubmitError {
    #[error("sender balance below attached value")]
    InsufficientBalance,
    #[error("unknown sender identity")]
    UnknownIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BeaconError {
    #[error("beacon requested for a future block")]
    FutureBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("no cost entry for function")]
    UnknownFunction,
}

/// How a charge is picked inside a `[min, max]` cost entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargePolicy {
    /// Lower bound of each entry. The default: totals then line up with the
    /// published per-function measurements the table was taken from.
    #[default]
    Min,
    Max,
    Midpoint,
    /// Seeded draw inside the range, distinct per call.
    Seeded,
}

/// Per-function gas table: function name to `[min, max]` gas units.
#[derive(Debug, Clone, Default)]
pub struct CostModel {
    entries: BTreeMap<String, (u64, u64)>,
}

impl CostModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, function: &str, min: u64, max: u64) {
        assert!(min <= max, "cost range inverted for {function}");
        self.entries.insert(function.to_string(), (min, max));
    }

    pub fn range(&self, function: &str) -> Result<(u64, u64), CostError> {
        self.entries.get(function).copied().ok_or(CostError::UnknownFunction)
    }

    pub fn contains(&self, function: &str) -> bool {
        self.entries.contains_key(function)
    }

    /// Pick the charge for one call under the given policy. `entropy`
    /// disambiguates seeded draws between calls.
    pub fn charge(
        &self,
        function: &str,
        policy: ChargePolicy,
        entropy: (u64, u64),
    ) -> Result<u64, CostError> {
        let (min, max) = self.range(function)?;
        Ok(match policy {
            ChargePolicy::Min => min,
            ChargePolicy::Max => max,
            ChargePolicy::Midpoint => min + (max - min) / 2,
            ChargePolicy::Seeded => {
                let d = crate::crypto::hash_parts(&[
                    b"gas",
                    &entropy.0.to_le_bytes(),
                    &entropy.1.to_le_bytes(),
                    function.as_bytes(),
                ]);
                let span = max - min + 1;
                min + (u64::from_le_bytes(d.0[..8].try_into().unwrap()) % span)
            }
        })
    }

    /// Parse a cost table from `key = [min, max]` (or `key = gas`) TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let value: toml::Value = text.parse().map_err(|e| format!("cost model parse: {e}"))?;
        let table = value.as_table().ok_or("cost model is not a table")?;
        let mut model = CostModel::new();
        for (k, v) in table {
            match v {
                toml::Value::Integer(g) if *g >= 0 => model.insert(k, *g as u64, *g as u64),
                toml::Value::Array(a) if a.len() == 2 => {
                    let min = a[0].as_integer().ok_or(format!("{k}: min not an integer"))?;
                    let max = a[1].as_integer().ok_or(format!("{k}: max not an integer"))?;
                    if min < 0 || max < min {
                        return Err(format!("{k}: bad range"));
                    }
                    model.insert(k, min as u64, max as u64);
                }
                _ => return Err(format!("{k}: expected gas or [min, max]")),
            }
        }
        Ok(model)
    }

    /// The measured per-function gas table for the voting contract.
    /// Entries with a single measurement carry it as both bounds.
    pub fn blind_vote_table() -> Self {
        let mut m = CostModel::new();
        m.insert("constructor", 6_967_000, 6_967_000);
        m.insert("approve", 71_000, 71_000);
        m.insert("register", 87_000, 123_000);
        m.insert("initiate", 358_000, 358_000);
        m.insert("delegate", 79_000, 79_000);
        m.insert("blind_sign", 80_000, 259_000);
        m.insert("commit", 294_000, 309_000);
        m.insert("commit_premature", 119_000, 210_000);
        m.insert("reveal", 94_000, 152_000);
        m.insert("admin_refund", 52_000, 52_000);
        m.insert("voter_refund", 83_000, 83_000);
        m.insert("step1_refund", 86_000, 86_000);
        m.insert("step4_refund", 62_000, 62_000);
        m.insert("step5_refund", 76_000, 76_000);
        m.insert("report_refused_signature", 85_000, 85_000);
        // Not part of the measured table; nominal figure for the on-chain
        // cheating report of the off-chain delegation channel.
        m.insert("report", 85_000, 85_000);
        m
    }

    /// Nominal per-function costs for the auction contract. These are model
    /// inputs for relative comparisons, not measurements.
    pub fn auction_table() -> Self {
        let mut m = CostModel::new();
        m.insert("constructor", 2_500_000, 2_500_000);
        m.insert("register", 90_000, 110_000);
        m.insert("bid", 60_000, 80_000);
        m.insert("right", 50_000, 60_000);
        m.insert("blame", 70_000, 70_000);
        m.insert("fakebid", 120_000, 150_000);
        m.insert("refund", 100_000, 130_000);
        m.insert("reclaim", 45_000, 45_000);
        m
    }
}

/// Disjoint, ordered closed step windows `[start_i, end_i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    windows: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("window start exceeds end")]
    Inverted,
    #[error("windows overlap or are out of order")]
    Overlap,
}

impl Schedule {
    pub fn new(windows: Vec<(u64, u64)>) -> Result<Self, ScheduleError> {
        for w in &windows {
            if w.0 > w.1 {
                return Err(ScheduleError::Inverted);
            }
        }
        for pair in windows.windows(2) {
            if pair[0].1 >= pair[1].0 {
                return Err(ScheduleError::Overlap);
            }
        }
        Ok(Schedule { windows })
    }

    pub fn window(&self, step: usize) -> Option<(u64, u64)> {
        self.windows.get(step).copied()
    }

    /// True iff `height` lies inside step `step`'s closed window.
    pub fn in_window(&self, height: u64, step: usize) -> bool {
        self.windows
            .get(step)
            .is_some_and(|&(lo, hi)| lo <= height && height <= hi)
    }

    /// The step active at `height`, if any.
    pub fn active_step(&self, height: u64) -> Option<usize> {
        self.windows
            .iter()
            .position(|&(lo, hi)| lo <= height && height <= hi)
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// What a contract call gets from the chain while executing.
pub struct CallEnv<'a> {
    pub height: u64,
    pub sender: Identity,
    pub value: u64,
    pub proofs: &'a ProofRegistry,
    beacons: &'a BTreeMap<u64, Digest32>,
    payments: Vec<(Identity, u64)>,
    notes: Vec<(String, String)>,
}

impl CallEnv<'_> {
    pub fn beacon(&self, height: u64) -> Result<Digest32, BeaconError> {
        self.beacons.get(&height).copied().ok_or(BeaconError::FutureBlock)
    }

    /// Queue a payment out of the contract pot. Applied when the call
    /// accepts; dropped when it rejects.
    pub fn pay(&mut self, to: Identity, amount: u64) {
        self.payments.push((to, amount));
    }

    /// Attach a public note to the current block.
    pub fn note(&mut self, label: &str, data: String) {
        self.notes.push((label.to_string(), data));
    }
}

/// Per-block hook environment (no sender, no value).
pub struct BlockEnv<'a> {
    pub height: u64,
    beacons: &'a BTreeMap<u64, Digest32>,
    notes: Vec<(String, String)>,
}

impl BlockEnv<'_> {
    pub fn beacon(&self, height: u64) -> Result<Digest32, BeaconError> {
        self.beacons.get(&height).copied().ok_or(BeaconError::FutureBlock)
    }

    pub fn note(&mut self, label: &str, data: String) {
        self.notes.push((label.to_string(), data));
    }
}

/// Name and printable arguments of a contract call, for the log.
pub trait CallInfo {
    fn function(&self) -> &'static str;
    fn args_summary(&self) -> String {
        String::new()
    }
}

/// A contract state machine driven by the chain.
///
/// State mutations made before returning an error persist (mirroring
/// contracts that record penalty flags while rejecting a call); attached
/// value and queued payments move only on `Ok`.
pub trait Contract {
    type Call: CallInfo;

    /// Runs at the start of every block, before that block's transactions.
    /// Window rollovers and other height-triggered transitions live here.
    fn on_block(&mut self, _env: &mut BlockEnv<'_>) {}

    fn execute(&mut self, env: &mut CallEnv<'_>, call: &Self::Call) -> Result<(), String>;
}

struct Pending<C> {
    seq: u64,
    sender: Identity,
    value: u64,
    call: C,
}

/// The chain: block counter, ledger, escrow, contract pot, log, beacons
/// and gas meter.
pub struct Chain<C> {
    seed: u64,
    height: u64,
    next_seq: u64,
    next_identity: u64,
    balances: BTreeMap<Identity, u64>,
    minted: u64,
    escrow: u64,
    pot: u64,
    mempool: VecDeque<Pending<C>>,
    log: Vec<Transaction>,
    notes: Vec<BlockNote>,
    charges: Vec<GasCharge>,
    beacons: BTreeMap<u64, Digest32>,
    cost_model: CostModel,
    charge_policy: ChargePolicy,
}

pub fn beacon_value(seed: u64, height: u64) -> Digest32 {
    crate::crypto::hash_parts(&[b"beacon", &seed.to_le_bytes(), &height.to_le_bytes()])
}

impl<C: CallInfo> Chain<C> {
    pub fn new(seed: u64, cost_model: CostModel, charge_policy: ChargePolicy) -> Self {
        let mut beacons = BTreeMap::new();
        beacons.insert(0, beacon_value(seed, 0));
        Chain {
            seed,
            height: 0,
            next_seq: 0,
            next_identity: 0,
            balances: BTreeMap::new(),
            minted: 0,
            escrow: 0,
            pot: 0,
            mempool: VecDeque::new(),
            log: Vec::new(),
            notes: Vec::new(),
            charges: Vec::new(),
            beacons,
            cost_model,
            charge_policy,
        }
    }

    pub fn new_identity(&mut self) -> Identity {
        let id = Identity(self.next_identity);
        self.next_identity += 1;
        self.balances.insert(id, 0);
        id
    }

    /// Explicit currency creation; the only operation that changes the total.
    pub fn mint(&mut self, to: Identity, amount: u64) {
        *self.balances.get_mut(&to).expect("mint to unknown identity") += amount;
        self.minted += amount;
    }

    pub fn balance(&self, id: Identity) -> u64 {
        self.balances.get(&id).copied().unwrap_or(0)
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn pot(&self) -> u64 {
        self.pot
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log(&self) -> &[Transaction] {
        &self.log
    }

    pub fn notes(&self) -> &[BlockNote] {
        &self.notes
    }

    pub fn charges(&self) -> &[GasCharge] {
        &self.charges
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    /// Deterministic beacon for a reached height.
    pub fn beacon(&self, height: u64) -> Result<Digest32, BeaconError> {
        if height > self.height {
            return Err(BeaconError::FutureBlock);
        }
        Ok(self.beacons[&height])
    }

    /// Queue a call for the next block. The attached value is escrowed until
    /// execution resolves it.
    pub fn submit(&mut self, sender: Identity, call: C, value: u64) -> Result<u64, SubmitError> {
        let balance = self
            .balances
            .get_mut(&sender)
            .ok_or(SubmitError::UnknownIdentity)?;
        if *balance < value {
            return Err(SubmitError::InsufficientBalance);
        }
        *balance -= value;
        self.escrow += value;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.mempool.push_back(Pending { seq, sender, value, call });
        Ok(seq)
    }

    pub fn mempool_len(&self) -> usize {
        self.mempool.len()
    }

    /// Advance one block: bump the height, derive its beacon, run the
    /// contract's block hook, then execute queued transactions in sequence
    /// order.
    pub fn advance_block(
        &mut self,
        contract: &mut impl Contract<Call = C>,
        proofs: &ProofRegistry,
    ) {
        self.height += 1;
        let height = self.height;
        self.beacons.insert(height, beacon_value(self.seed, height));

        let mut block_env = BlockEnv { height, beacons: &self.beacons, notes: Vec::new() };
        contract.on_block(&mut block_env);
        for (label, data) in block_env.notes {
            self.notes.push(BlockNote { block: height, label, data });
        }

        let pending: Vec<Pending<C>> = self.mempool.drain(..).collect();
        for tx in pending {
            let mut env = CallEnv {
                height,
                sender: tx.sender,
                value: tx.value,
                proofs,
                beacons: &self.beacons,
                payments: Vec::new(),
                notes: Vec::new(),
            };
            let result = contract.execute(&mut env, &tx.call);
            let payments = std::mem::take(&mut env.payments);
            let call_notes = std::mem::take(&mut env.notes);

            let function = tx.call.function().to_string();
            let amount = self
                .cost_model
                .charge(&function, self.charge_policy, (self.seed, tx.seq))
                .unwrap_or_else(|_| panic!("no cost entry for function {function}"));
            self.charges.push(GasCharge {
                block: height,
                seq: tx.seq,
                function: function.clone(),
                payer: tx.sender,
                amount,
            });

            let status = match result {
                Ok(()) => {
                    // Attached value lands in the pot, then queued payments
                    // draw from it.
                    self.escrow -= tx.value;
                    self.pot += tx.value;
                    let owed: u64 = payments.iter().map(|p| p.1).sum();
                    assert!(owed <= self.pot, "contract pot overdrawn by {function}");
                    for (to, amount) in payments {
                        self.pot -= amount;
                        *self.balances.entry(to).or_insert(0) += amount;
                    }
                    for (label, data) in call_notes {
                        self.notes.push(BlockNote { block: height, label, data });
                    }
                    TxStatus::Accepted
                }
                Err(reason) => {
                    self.escrow -= tx.value;
                    *self.balances.get_mut(&tx.sender).unwrap() += tx.value;
                    TxStatus::Rejected(reason)
                }
            };
            self.log.push(Transaction {
                seq: tx.seq,
                block: height,
                sender: tx.sender,
                function,
                args: tx.call.args_summary(),
                value: tx.value,
                status,
            });
        }
        debug_assert!(self.conservation_holds());
    }

    /// Currency conservation: balances + escrow + pot equal everything minted.
    pub fn conservation_holds(&self) -> bool {
        let total: u64 = self.balances.values().sum();
        total + self.escrow + self.pot == self.minted
    }

    /// Canonical digest of the full chain state, for replay comparison.
    pub fn state_digest(&self) -> Digest32 {
        let mut h = Sha256::new();
        h.update(self.height.to_le_bytes());
        h.update(self.pot.to_le_bytes());
        h.update(self.escrow.to_le_bytes());
        h.update(self.minted.to_le_bytes());
        for (id, bal) in &self.balances {
            h.update(id.0.to_le_bytes());
            h.update(bal.to_le_bytes());
        }
        for tx in &self.log {
            h.update(tx.seq.to_le_bytes());
            h.update(tx.block.to_le_bytes());
            h.update(tx.sender.0.to_le_bytes());
            h.update(tx.function.as_bytes());
            h.update(tx.args.as_bytes());
            h.update(tx.value.to_le_bytes());
            match &tx.status {
                TxStatus::Accepted => h.update([1u8]),
                TxStatus::Rejected(r) => {
                    h.update([0u8]);
                    h.update(r.as_bytes());
                }
            }
        }
        for note in &self.notes {
            h.update(note.block.to_le_bytes());
            h.update(note.label.as_bytes());
            h.update(note.data.as_bytes());
        }
        for (height, beacon) in &self.beacons {
            h.update(height.to_le_bytes());
            h.update(beacon.0);
        }
        Digest32(h.finalize().into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Toy contract: `store` keeps the attached value, `payout x` sends the
    /// pot back to the caller.
    enum ToyCall {
        Store,
        Payout(u64),
        Fail,
    }

    impl CallInfo for ToyCall {
        fn function(&self) -> &'static str {
            match self {
                ToyCall::Store => "store",
                ToyCall::Payout(_) => "payout",
                ToyCall::Fail => "fail",
            }
        }
    }

    struct Toy;

    impl Contract for Toy {
        type Call = ToyCall;
        fn execute(&mut self, env: &mut CallEnv<'_>, call: &ToyCall) -> Result<(), String> {
            match call {
                ToyCall::Store => Ok(()),
                ToyCall::Payout(x) => {
                    env.pay(env.sender, *x);
                    Ok(())
                }
                ToyCall::Fail => Err("nope".into()),
            }
        }
    }

    fn toy_costs() -> CostModel {
        let mut m = CostModel::new();
        m.insert("store", 10, 20);
        m.insert("payout", 5, 5);
        m.insert("fail", 1, 1);
        m
    }

    fn toy_chain(seed: u64) -> (Chain<ToyCall>, Identity) {
        let mut chain = Chain::new(seed, toy_costs(), ChargePolicy::Min);
        let id = chain.new_identity();
        chain.mint(id, 100);
        (chain, id)
    }

    #[test]
    fn empty_block_is_a_noop() {
        let (mut chain, _) = toy_chain(1);
        chain.advance_block(&mut Toy, &ProofRegistry::new());
        assert_eq!(chain.height(), 1);
        assert!(chain.log().is_empty());
    }

    #[test]
    fn submissions_execute_in_sequence_order() {
        let (mut chain, id) = toy_chain(1);
        let s1 = chain.submit(id, ToyCall::Store, 1).unwrap();
        let s2 = chain.submit(id, ToyCall::Store, 2).unwrap();
        let s3 = chain.submit(id, ToyCall::Store, 3).unwrap();
        assert_eq!((s1 + 1, s2 + 1), (s2, s3));
        chain.advance_block(&mut Toy, &ProofRegistry::new());
        let seqs: Vec<u64> = chain.log().iter().map(|t| t.seq).collect();
        assert_eq!(seqs, vec![s1, s2, s3]);
    }

    #[test]
    fn boundary_balance_is_accepted_and_escrowed() {
        let (mut chain, id) = toy_chain(1);
        chain.submit(id, ToyCall::Store, 100).unwrap();
        assert_eq!(chain.balance(id), 0);
        chain.advance_block(&mut Toy, &ProofRegistry::new());
        assert_eq!(chain.pot(), 100);
        assert!(chain.conservation_holds());
    }

    #[test]
    fn overdraft_is_rejected_at_submission() {
        let (mut chain, id) = toy_chain(1);
        chain.submit(id, ToyCall::Store, 60).unwrap();
        assert_eq!(
            chain.submit(id, ToyCall::Store, 60),
            Err(SubmitError::InsufficientBalance)
        );
    }

    #[test]
    fn rejection_refunds_attached_value() {
        let (mut chain, id) = toy_chain(1);
        chain.submit(id, ToyCall::Fail, 40).unwrap();
        chain.advance_block(&mut Toy, &ProofRegistry::new());
        assert_eq!(chain.balance(id), 100);
        assert_eq!(chain.pot(), 0);
        assert!(matches!(chain.log()[0].status, TxStatus::Rejected(_)));
    }

    #[test]
    fn replay_produces_identical_state_digests() {
        let run = |seed| {
            let (mut chain, id) = toy_chain(seed);
            chain.submit(id, ToyCall::Store, 30).unwrap();
            chain.advance_block(&mut Toy, &ProofRegistry::new());
            chain.submit(id, ToyCall::Payout(10), 0).unwrap();
            chain.advance_block(&mut Toy, &ProofRegistry::new());
            chain.state_digest()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn beacon_is_deterministic_and_height_gated() {
        let (mut chain, _) = toy_chain(9);
        chain.advance_block(&mut Toy, &ProofRegistry::new());
        assert_eq!(chain.beacon(1).unwrap(), beacon_value(9, 1));
        assert_eq!(chain.beacon(2), Err(BeaconError::FutureBlock));
    }

    #[test]
    fn beacons_do_not_collide_across_heights_or_seeds() {
        let mut seen = std::collections::BTreeSet::new();
        for height in 0..10_000u64 {
            assert!(seen.insert(beacon_value(1, height)));
        }
        assert_ne!(beacon_value(1, 5), beacon_value(2, 5));
    }

    #[test]
    fn charge_policies_stay_in_range() {
        let costs = toy_costs();
        for policy in [
            ChargePolicy::Min,
            ChargePolicy::Max,
            ChargePolicy::Midpoint,
            ChargePolicy::Seeded,
        ] {
            for seq in 0..50 {
                let g = costs.charge("store", policy, (7, seq)).unwrap();
                assert!((10..=20).contains(&g));
            }
        }
        assert_eq!(costs.charge("missing", ChargePolicy::Min, (0, 0)), Err(CostError::UnknownFunction));
    }

    #[test]
    fn blind_vote_table_matches_published_rows() {
        let t = CostModel::blind_vote_table();
        assert_eq!(t.range("commit").unwrap(), (294_000, 309_000));
        assert_eq!(t.range("reveal").unwrap(), (94_000, 152_000));
        assert_eq!(t.range("constructor").unwrap(), (6_967_000, 6_967_000));
    }

    #[test]
    fn cost_model_parses_toml() {
        let m = CostModel::from_toml_str("commit = [294000, 309000]\napprove = 71000\n").unwrap();
        assert_eq!(m.range("commit").unwrap(), (294_000, 309_000));
        assert_eq!(m.range("approve").unwrap(), (71_000, 71_000));
        assert!(CostModel::from_toml_str("bad = [2, 1]").is_err());
    }

    #[test]
    fn schedule_windows_are_closed_intervals() {
        let s = Schedule::new(vec![(1, 3), (4, 6), (9, 9)]).unwrap();
        assert!(s.in_window(1, 0));
        assert!(s.in_window(3, 0));
        assert!(!s.in_window(4, 0));
        assert!(s.in_window(4, 1));
        assert_eq!(s.active_step(7), None);
        assert_eq!(s.active_step(9), Some(2));
        assert_eq!(Schedule::new(vec![(3, 2)]), Err(ScheduleError::Inverted));
        assert_eq!(Schedule::new(vec![(1, 4), (4, 6)]), Err(ScheduleError::Overlap));
    }
}
