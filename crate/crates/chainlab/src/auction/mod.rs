//! The sealed-bid auction family as one variant-tagged contract.
//!
//! * `P0` — plain Dutch countdown: the price falls one unit per block and the
//!   first registered caller of `bid()` wins at the current price.
//! * `P1` — Dutch countdown over commitments: `register(h)` binds each bidder
//!   to `h = hash(b, n)` up front; `bid(n)` is only accepted when it opens
//!   the caller's commitment at the current price.
//! * `P2` — binary-tree path finding: the contract walks the interval tree
//!   over `[1, m]` toward the maximum bid. Right moves are explicit calls
//!   carrying a deposit; left moves are implicit on silence. The winner
//!   reveals at the leaf; a leaf nobody claims is rolled back by `blame()`.
//! * `P3` — `P2` plus beacon-selected decoy ("fake") bidders whose extra
//!   bids mask the real path information. A decoy leaf resets the auction
//!   with a lowered maximum.
//!
//! Losing bidders never reveal anything: refunds are gated on less-than
//! proof tokens, and decoy bids are verified against the beacon equation.

pub mod bat;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::crypto::{commit_open_value, hash_parts, Digest32};
use crate::proofs::{fake_bid_value, ProofToken, Statement};
use crate::simchain::{BlockEnv, CallEnv, CallInfo, Contract, Identity};

pub use bat::{depth_for, BatCursor, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    P0,
    P1,
    P2,
    P3,
}

impl Variant {
    pub fn uses_commitments(&self) -> bool {
        !matches!(self, Variant::P0)
    }

    pub fn uses_tree(&self) -> bool {
        matches!(self, Variant::P2 | Variant::P3)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuctionConfig {
    pub variant: Variant,
    /// Maximum allowed bid `m`; every bid lies in `[1, m]`.
    pub max_bid: u64,
    /// Deposit `d` paid at registration.
    pub bidder_deposit: u64,
    /// Deposit `d'` attached to every explicit right move.
    pub right_deposit: u64,
    /// Minimum pseudonymous right calls an honest mover issues per move.
    pub min_right_calls: u64,
    /// Number of decoy bidders selected per round (P3).
    pub fake_bidders: u64,
    /// Reward paid to each of the first `min_right_calls` right callers in a
    /// block, funded by the pool attached at deployment.
    pub reward_right: u64,
    pub registration_blocks: u64,
    pub reveal_blocks: u64,
    pub verify_blocks: u64,
    pub refund_blocks: u64,
    pub refund_winner: bool,
}

impl AuctionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_bid < 1 {
            return Err("max bid must be at least 1".into());
        }
        if self.min_right_calls < 1 {
            return Err("minimum right-call count must be at least 1".into());
        }
        if self.variant == Variant::P3 && self.fake_bidders <= 1 {
            return Err("decoy-bid variant needs more than one decoy bidder".into());
        }
        if self.registration_blocks < 1 || self.reveal_blocks < 1 {
            return Err("registration and reveal windows need at least one block".into());
        }
        if self.variant == Variant::P3 && self.verify_blocks < 1 {
            return Err("decoy verification window needs at least one block".into());
        }
        Ok(())
    }
}

/// Calls accepted by the auction contract.
#[derive(Debug, Clone)]
pub enum AuctionCall {
    Deploy(AuctionConfig),
    /// `commitment` is required for every variant except `P0`.
    Register { commitment: Option<Digest32> },
    /// Dutch bid (P0: no nonce; P1: opening nonce) or tree-leaf reveal
    /// (P2/P3: opening nonce).
    Bid { nonce: Option<[u8; 32]> },
    /// Explicit right move carrying the interval the caller believes current.
    Right { claimed: Interval },
    Blame,
    /// Decoy-bid claim (reveal window) or disclosure (verify window).
    FakeBid { value: u64, proof: ProofToken },
    /// Deposit refund; losers attach a less-than proof.
    Refund { proof: Option<ProofToken> },
    /// Return of right-move deposits and accrued caller rewards; the
    /// deployer reclaims the unspent reward pool the same way.
    Reclaim,
}

impl CallInfo for AuctionCall {
    fn function(&self) -> &'static str {
        match self {
            AuctionCall::Deploy(_) => "constructor",
            AuctionCall::Register { .. } => "register",
            AuctionCall::Bid { .. } => "bid",
            AuctionCall::Right { .. } => "right",
            AuctionCall::Blame => "blame",
            AuctionCall::FakeBid { .. } => "fakebid",
            AuctionCall::Refund { .. } => "refund",
            AuctionCall::Reclaim => "reclaim",
        }
    }

    fn args_summary(&self) -> String {
        match self {
            AuctionCall::Deploy(c) => format!("variant={:?} m={}", c.variant, c.max_bid),
            AuctionCall::Register { commitment } => match commitment {
                Some(c) => format!("h={}", c.to_hex()),
                None => String::new(),
            },
            AuctionCall::Bid { nonce } => match nonce {
                Some(n) => format!("n={}", hex::encode(n)),
                None => String::new(),
            },
            AuctionCall::Right { claimed } => format!("{claimed}"),
            AuctionCall::Blame => String::new(),
            AuctionCall::FakeBid { value, .. } => format!("b'={value} proof"),
            AuctionCall::Refund { proof } => {
                if proof.is_some() { "proof".into() } else { String::new() }
            }
            AuctionCall::Reclaim => String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BidderStatus {
    Active,
    Winner,
    Slashed,
}

#[derive(Debug, Clone, Serialize)]
pub struct BidderRecord {
    pub identity: Identity,
    pub commitment: Option<Digest32>,
    pub status: BidderStatus,
    pub deposit_refunded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RightMove {
    pub block: u64,
    pub caller: Identity,
    pub deposit: u64,
    pub effective: bool,
    /// The interval the caller claimed (post-catch-up, pre-move).
    pub claimed: Interval,
    /// Cursor snapshot after the move (only meaningful when effective).
    pub after: BatCursor,
    pub deposit_returned: bool,
    pub slashed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RewardSlot {
    pub block: u64,
    pub caller: Identity,
    pub paid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    InProgress,
    /// A real bid won: bidder index and winning value.
    Won { bidder: usize, value: u64 },
    /// The maximum shrank to zero (decoy leaf of value 1 unclaimed by any
    /// real bid); everyone is refunded without proofs.
    NoWinner,
}

/// One root-to-leaf traversal attempt. A decoy reset starts a new round with
/// a lowered maximum; a blame rewinds windows within the same round.
#[derive(Debug, Clone, Serialize)]
pub struct Round {
    pub index: u64,
    pub max_bid: u64,
    pub path_start: u64,
    pub path_end: u64,
    pub reveal_end: u64,
    pub verify_end: Option<u64>,
    /// Block offsets are measured as `height - anchor`.
    pub anchor: u64,
    pub cursor: BatCursor,
    pub selection_beacon: Digest32,
    /// Indices of the selected decoy bidders (sorted).
    pub selection: Vec<usize>,
    pub fake_claim: Option<(usize, u64)>,
    pub disclosures: BTreeMap<usize, u64>,
    pub blames: u64,
}

impl Round {
    pub fn in_path(&self, height: u64) -> bool {
        self.path_start <= height && height <= self.path_end
    }

    pub fn in_reveal(&self, height: u64) -> bool {
        self.path_end < height && height <= self.reveal_end
    }

    pub fn in_verify(&self, height: u64) -> bool {
        self.verify_end
            .is_some_and(|end| self.reveal_end < height && height <= end)
    }

    /// The interval a right move must claim at `height`, after catching up
    /// implicit lefts; `None` once the cursor is at a leaf.
    pub fn expected_interval(&self, height: u64) -> Option<Interval> {
        let t = height.checked_sub(self.anchor)?;
        let peek = self.cursor.caught_up(t);
        if peek.interval.is_leaf() { None } else { Some(peek.interval) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PenaltyEvent {
    pub block: u64,
    pub who: Identity,
    pub what: String,
    pub amount: u64,
}

/// The auction contract state.
pub struct AuctionContract {
    config: Option<AuctionConfig>,
    organizer: Option<Identity>,
    reg_start: u64,
    reg_end: u64,
    pending_first_round: Option<u64>,
    bidders: Vec<BidderRecord>,
    index_of: BTreeMap<Identity, usize>,
    rounds: Vec<Round>,
    rights: Vec<RightMove>,
    /// Snapshots after each live effective right move, for blame rewinds.
    path_stack: Vec<BatCursor>,
    reward_slots: Vec<RewardSlot>,
    reward_pool: u64,
    rewards_committed: u64,
    pool_reclaimed: bool,
    winner: Option<(usize, u64)>,
    outcome: Outcome,
    blameable: bool,
    refund_start: Option<u64>,
    concluded_at: Option<u64>,
    burned: u64,
    penalties: Vec<PenaltyEvent>,
}

impl Default for AuctionContract {
    fn default() -> Self {
        Self::new()
    }
}

impl AuctionContract {
    pub fn new() -> Self {
        AuctionContract {
            config: None,
            organizer: None,
            reg_start: 0,
            reg_end: 0,
            pending_first_round: None,
            bidders: Vec::new(),
            index_of: BTreeMap::new(),
            rounds: Vec::new(),
            rights: Vec::new(),
            path_stack: Vec::new(),
            reward_slots: Vec::new(),
            reward_pool: 0,
            rewards_committed: 0,
            pool_reclaimed: false,
            winner: None,
            outcome: Outcome::InProgress,
            blameable: false,
            refund_start: None,
            concluded_at: None,
            burned: 0,
            penalties: Vec::new(),
        }
    }

    pub fn config(&self) -> Option<&AuctionConfig> {
        self.config.as_ref()
    }

    pub fn bidders(&self) -> &[BidderRecord] {
        &self.bidders
    }

    pub fn bidder_index(&self, id: Identity) -> Option<usize> {
        self.index_of.get(&id).copied()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn current_round(&self) -> Option<&Round> {
        self.rounds.last()
    }

    pub fn rights(&self) -> &[RightMove] {
        &self.rights
    }

    pub fn reward_slots(&self) -> &[RewardSlot] {
        &self.reward_slots
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn winner(&self) -> Option<(usize, u64)> {
        self.winner
    }

    pub fn is_blameable(&self) -> bool {
        self.blameable
    }

    pub fn refund_window_start(&self) -> Option<u64> {
        self.refund_start
    }

    /// Block at which the winner was fixed (Dutch conclusion or reveal).
    pub fn concluded_at(&self) -> Option<u64> {
        self.concluded_at
    }

    pub fn registration_window(&self) -> (u64, u64) {
        (self.reg_start, self.reg_end)
    }

    pub fn penalties(&self) -> &[PenaltyEvent] {
        &self.penalties
    }

    pub fn burned(&self) -> u64 {
        self.burned
    }

    /// Deposits still held for the live (unslashed, unreturned) right moves.
    pub fn right_deposits_outstanding(&self) -> u64 {
        self.rights
            .iter()
            .filter(|r| !r.deposit_returned && !r.slashed)
            .map(|r| r.deposit)
            .sum()
    }

    fn cfg(&self) -> &AuctionConfig {
        self.config.as_ref().expect("contract not deployed")
    }

    fn is_dutch(&self) -> bool {
        matches!(self.cfg().variant, Variant::P0 | Variant::P1)
    }

    /// Dutch price at `height`: the countdown starts at `m` and falls one
    /// unit per block.
    pub fn dutch_price(&self, height: u64) -> Option<u64> {
        let round = self.current_round()?;
        if !round.in_path(height) {
            return None;
        }
        let offset = height - round.path_start + 1;
        Some(round.max_bid - offset + 1)
    }

    fn slash_bidder(&mut self, block: u64, idx: usize, what: &str) {
        let rec = &mut self.bidders[idx];
        if rec.status == BidderStatus::Slashed {
            return;
        }
        rec.status = BidderStatus::Slashed;
        self.burned += self.cfg().bidder_deposit;
        self.penalties.push(PenaltyEvent {
            block,
            who: rec.identity,
            what: what.to_string(),
            amount: self.cfg().bidder_deposit,
        });
    }

    fn start_round(&mut self, env: &mut BlockEnv<'_>, max_bid: u64, path_start: u64) {
        let cfg = self.cfg().clone();
        let depth = if cfg.variant.uses_tree() { depth_for(max_bid) } else { max_bid };
        let selection_beacon = env
            .beacon(path_start.saturating_sub(1))
            .expect("selection beacon for an already-produced block");
        let selection: Vec<usize> = if cfg.variant == Variant::P3 {
            match select_fake_bidders(&selection_beacon, cfg.fake_bidders, self.bidders.len() as u64)
            {
                Ok(v) => v.into_iter().map(|i| i as usize).collect(),
                Err(_) => {
                    // Fewer registrants than decoys: nothing meaningful to
                    // run, close out with full refunds.
                    self.finish(path_start, Outcome::NoWinner);
                    return;
                }
            }
        } else {
            Vec::new()
        };
        let round = Round {
            index: self.rounds.len() as u64,
            max_bid,
            path_start,
            path_end: path_start + depth - 1,
            reveal_end: path_start + depth - 1 + cfg.reveal_blocks,
            verify_end: None,
            anchor: path_start - 1,
            cursor: BatCursor::root(max_bid),
            selection_beacon,
            selection: selection.clone(),
            fake_claim: None,
            disclosures: BTreeMap::new(),
            blames: 0,
        };
        if cfg.variant == Variant::P3 {
            env.note(
                "fake_selection",
                format!(
                    "round={} m={} bidders={:?}",
                    round.index, max_bid, selection
                ),
            );
        }
        self.path_stack.clear();
        self.rounds.push(round);
    }

    fn finish(&mut self, height: u64, outcome: Outcome) {
        self.outcome = outcome;
        self.refund_start = Some(height);
    }

    /// Height-triggered transitions: round creation once the selection beacon
    /// exists, leaf catch-up when the path window closes, blame arming when a
    /// reveal window passes unresolved, decoy verification slashes, and the
    /// refund-or-reset decision.
    fn roll_windows(&mut self, env: &mut BlockEnv<'_>) {
        let height = env.height;
        if self.config.is_none() || !matches!(self.outcome, Outcome::InProgress) {
            return;
        }
        if self.pending_first_round == Some(height) {
            self.pending_first_round = None;
            let m = self.cfg().max_bid;
            self.start_round(env, m, height);
        }
        let Some(round) = self.rounds.last() else { return };
        let cfg = self.cfg().clone();
        let (path_end, reveal_end, verify_end) =
            (round.path_end, round.reveal_end, round.verify_end);

        if cfg.variant.uses_tree() && height == path_end + 1 {
            let r = self.rounds.last_mut().unwrap();
            r.cursor = r.cursor.to_leaf();
        }

        if self.is_dutch() && height == path_end + 1 {
            match self.winner {
                Some((bidder, value)) => self.finish(height, Outcome::Won { bidder, value }),
                None => self.finish(height, Outcome::NoWinner),
            }
            return;
        }

        if cfg.variant.uses_tree() && height == reveal_end + 1 {
            let round = self.rounds.last().unwrap();
            let resolved = self.winner.is_some() || round.fake_claim.is_some();
            if !resolved {
                self.blameable = true;
            } else if cfg.variant == Variant::P3 {
                self.rounds.last_mut().unwrap().verify_end =
                    Some(reveal_end + cfg.verify_blocks);
            } else {
                let (bidder, value) = self.winner.unwrap();
                self.finish(height, Outcome::Won { bidder, value });
            }
            return;
        }

        if let Some(end) = verify_end {
            if height == end + 1 {
                // Decoy bidders who never disclosed lose their deposits.
                let round = self.rounds.last().unwrap();
                let silent: Vec<usize> = round
                    .selection
                    .iter()
                    .copied()
                    .filter(|i| !round.disclosures.contains_key(i))
                    .collect();
                for idx in silent {
                    self.slash_bidder(height, idx, "fake bid not disclosed");
                }
                if let Some((bidder, value)) = self.winner {
                    self.finish(height, Outcome::Won { bidder, value });
                } else if let Some((_, claimed)) = self.rounds.last().unwrap().fake_claim {
                    let next_max = claimed - 1;
                    if next_max == 0 {
                        self.finish(height, Outcome::NoWinner);
                    } else {
                        self.start_round(env, next_max, height);
                    }
                }
            }
        }
    }

    fn check_registered(&self, sender: Identity) -> Result<usize, String> {
        self.bidder_index(sender).ok_or_else(|| "NotRegistered".to_string())
    }

    fn execute_register(
        &mut self,
        env: &mut CallEnv<'_>,
        commitment: &Option<Digest32>,
    ) -> Result<(), String> {
        let cfg = self.cfg();
        if env.height < self.reg_start || env.height > self.reg_end {
            return Err("WindowClosed".into());
        }
        if env.value != cfg.bidder_deposit {
            return Err("WrongDeposit".into());
        }
        if self.index_of.contains_key(&env.sender) {
            return Err("DuplicateIdentity".into());
        }
        if cfg.variant.uses_commitments() && commitment.is_none() {
            return Err("MissingCommitment".into());
        }
        let idx = self.bidders.len();
        self.bidders.push(BidderRecord {
            identity: env.sender,
            commitment: *commitment,
            status: BidderStatus::Active,
            deposit_refunded: false,
        });
        self.index_of.insert(env.sender, idx);
        Ok(())
    }

    fn execute_right(&mut self, env: &mut CallEnv<'_>, claimed: Interval) -> Result<(), String> {
        let cfg = self.cfg().clone();
        if !cfg.variant.uses_tree() {
            return Err("BadVariant".into());
        }
        let round = self.rounds.last().ok_or("WindowClosed")?;
        if !round.in_path(env.height) {
            return Err("WindowClosed".into());
        }
        if env.value != cfg.right_deposit {
            return Err("WrongDeposit".into());
        }
        let anchor = round.anchor;
        let t = env.height - anchor;

        let block_effective = self
            .rights
            .iter()
            .rev()
            .take_while(|r| r.block == env.height)
            .find(|r| r.effective)
            .map(|r| (r.claimed, r.after));

        if let Some((consumed, after)) = block_effective {
            // Repeated call in the same block: deposit straight back, no
            // cursor change, but the caller still competes for a reward slot.
            // It must race for the same move, i.e. claim the interval the
            // effective call consumed.
            if claimed != consumed {
                return Err("StaleInterval".into());
            }
            self.record_reward_slot(env.height, env.sender);
            self.rights.push(RightMove {
                block: env.height,
                caller: env.sender,
                deposit: env.value,
                effective: false,
                claimed,
                after,
                deposit_returned: true,
                slashed: false,
            });
            env.pay(env.sender, env.value);
            return Ok(());
        }

        let round = self.rounds.last_mut().unwrap();
        let peek = round.cursor.caught_up(t);
        if peek.interval.is_leaf() {
            return Err("AtLeaf".into());
        }
        if peek.interval != claimed {
            return Err("StaleInterval".into());
        }
        let moved = peek.stepped_right(t).expect("non-leaf interval has children");
        round.cursor = moved;
        self.path_stack.push(moved);
        self.record_reward_slot(env.height, env.sender);
        self.rights.push(RightMove {
            block: env.height,
            caller: env.sender,
            deposit: env.value,
            effective: true,
            claimed,
            after: moved,
            deposit_returned: false,
            slashed: false,
        });
        Ok(())
    }

    fn record_reward_slot(&mut self, block: u64, caller: Identity) {
        let cfg = self.cfg();
        if cfg.reward_right == 0 {
            return;
        }
        let in_block = self.reward_slots.iter().filter(|s| s.block == block).count() as u64;
        if in_block >= cfg.min_right_calls {
            return;
        }
        if self.rewards_committed + cfg.reward_right > self.reward_pool {
            return; // pool exhausted; stop promising rewards
        }
        self.rewards_committed += cfg.reward_right;
        self.reward_slots.push(RewardSlot { block, caller, paid: false });
    }

    fn execute_bid(&mut self, env: &mut CallEnv<'_>, nonce: &Option<[u8; 32]>) -> Result<(), String> {
        let cfg = self.cfg().clone();
        let idx = self.check_registered(env.sender)?;
        if self.bidders[idx].status == BidderStatus::Slashed {
            return Err("Slashed".into());
        }
        match cfg.variant {
            Variant::P0 | Variant::P1 => {
                let price = match self.dutch_price(env.height) {
                    Some(p) => p,
                    None => return Err("WindowClosed".into()),
                };
                if self.winner.is_some() {
                    return Err("Concluded".into());
                }
                if cfg.variant == Variant::P1 {
                    let n = nonce.ok_or("MissingNonce")?;
                    let h = self.bidders[idx].commitment.expect("commitment required at registration");
                    if !commit_open_value(&h, price, &n) {
                        self.slash_bidder(env.height, idx, "bid hash mismatch");
                        return Err("HashMismatch".into());
                    }
                }
                self.winner = Some((idx, price));
                self.concluded_at = Some(env.height);
                self.bidders[idx].status = BidderStatus::Winner;
                Ok(())
            }
            Variant::P2 | Variant::P3 => {
                let round = self.rounds.last().ok_or("WindowClosed")?;
                if round.in_path(env.height) {
                    return Err("NoLeafYet".into());
                }
                if !round.in_reveal(env.height) {
                    return Err("WindowClosed".into());
                }
                if self.winner.is_some() {
                    return Err("Concluded".into());
                }
                let leaf = round.cursor.interval;
                debug_assert!(leaf.is_leaf(), "cursor catches up when the path window closes");
                let value = leaf.lo;
                let n = nonce.ok_or("MissingNonce")?;
                let h = self.bidders[idx].commitment.expect("commitment required at registration");
                if !commit_open_value(&h, value, &n) {
                    return Err("HashMismatch".into());
                }
                self.winner = Some((idx, value));
                self.concluded_at = Some(env.height);
                self.bidders[idx].status = BidderStatus::Winner;
                Ok(())
            }
        }
    }

    fn execute_fakebid(
        &mut self,
        env: &mut CallEnv<'_>,
        value: u64,
        proof: &ProofToken,
    ) -> Result<(), String> {
        let cfg = self.cfg().clone();
        if cfg.variant != Variant::P3 {
            return Err("BadVariant".into());
        }
        let idx = self.check_registered(env.sender)?;
        let round = self.rounds.last().ok_or("WindowClosed")?;
        if !round.selection.contains(&idx) {
            return Err("NotFakeBidder".into());
        }
        let expected_statement = Statement::FakeBidCorrect {
            beacon: round.selection_beacon,
            max_bid: round.max_bid,
            claimed: value,
        };
        let proof_ok = proof.statement == expected_statement
            && env.proofs.verify(proof).unwrap_or(false);

        if round.in_reveal(env.height) {
            // Claiming the reached leaf as a decoy.
            if self.winner.is_some() {
                return Err("Concluded".into());
            }
            let leaf = round.cursor.interval.lo;
            if value != leaf {
                return Err("NotTheLeaf".into());
            }
            if round.fake_claim.is_some() {
                return Err("AlreadyClaimed".into());
            }
            if !proof_ok {
                return Err("BadProof".into());
            }
            let r = self.rounds.last_mut().unwrap();
            r.fake_claim = Some((idx, value));
            r.disclosures.insert(idx, value);
            Ok(())
        } else if round.in_verify(env.height) {
            // Mandatory disclosure of every decoy bid.
            if round.disclosures.contains_key(&idx) {
                return Err("AlreadyDisclosed".into());
            }
            if !proof_ok {
                self.slash_bidder(env.height, idx, "invalid fake-bid proof");
                return Err("BadProof".into());
            }
            let leaf = round.cursor.interval.lo;
            if value > leaf {
                // A decoy above the reached leaf means its owner withheld
                // the calls that would have guided the path there.
                self.slash_bidder(env.height, idx, "fake bid above reached leaf");
                return Err("OverLeafWithoutCalls".into());
            }
            self.rounds.last_mut().unwrap().disclosures.insert(idx, value);
            Ok(())
        } else {
            Err("WindowClosed".into())
        }
    }

    fn execute_blame(&mut self, env: &mut CallEnv<'_>) -> Result<(), String> {
        if !self.blameable {
            return Err("NothingToBlame".into());
        }
        let cfg = self.cfg().clone();
        // Confiscate the deposit of the last effective mover and drop the
        // move; the path restarts just after the previous one (or the root).
        let last_live = self
            .rights
            .iter()
            .rposition(|r| r.effective && !r.slashed)
            .ok_or("NothingToBlame")?;
        self.rights[last_live].slashed = true;
        let blamed = &self.rights[last_live];
        self.burned += blamed.deposit;
        self.penalties.push(PenaltyEvent {
            block: env.height,
            who: blamed.caller,
            what: "blamed right move".to_string(),
            amount: blamed.deposit,
        });
        self.path_stack.pop();
        let restored = self
            .path_stack
            .last()
            .copied()
            .unwrap_or_else(|| BatCursor::root(self.rounds.last().unwrap().max_bid));

        let depth = depth_for(self.rounds.last().unwrap().max_bid);
        let remaining = depth - restored.step;
        let round = self.rounds.last_mut().unwrap();
        round.cursor = restored;
        round.blames += 1;
        round.anchor = env.height - restored.step;
        round.path_start = env.height + 1;
        round.path_end = env.height + remaining;
        round.reveal_end = round.path_end + cfg.reveal_blocks;
        round.verify_end = None;
        if let Some((claimant, _)) = round.fake_claim.take() {
            round.disclosures.remove(&claimant);
        }
        self.blameable = false;
        Ok(())
    }

    fn execute_refund(
        &mut self,
        env: &mut CallEnv<'_>,
        proof: &Option<ProofToken>,
    ) -> Result<(), String> {
        let cfg = self.cfg().clone();
        let start = self.refund_start.ok_or("WindowClosed")?;
        if env.height < start {
            return Err("WindowClosed".into());
        }
        let idx = self.check_registered(env.sender)?;
        let rec = &self.bidders[idx];
        if rec.status == BidderStatus::Slashed {
            return Err("Slashed".into());
        }
        if rec.deposit_refunded {
            return Err("AlreadyRefunded".into());
        }
        match self.outcome {
            Outcome::InProgress => return Err("WindowClosed".into()),
            Outcome::NoWinner => {}
            Outcome::Won { bidder, value } => {
                if bidder == idx {
                    if !cfg.refund_winner {
                        return Err("NotEligible".into());
                    }
                } else if cfg.variant == Variant::P0 {
                    // Losing bids were never committed to; nothing to prove.
                } else {
                    let token = proof.as_ref().ok_or("MissingProof")?;
                    let expected = Statement::LessThan {
                        commitment: rec.commitment.expect("commitment required at registration"),
                        bound: value,
                    };
                    let ok = token.statement == expected
                        && env.proofs.verify(token).unwrap_or(false);
                    if !ok {
                        self.slash_bidder(env.height, idx, "invalid refund proof");
                        return Err("BadProof".into());
                    }
                }
            }
        }
        self.bidders[idx].deposit_refunded = true;
        env.pay(env.sender, cfg.bidder_deposit);
        Ok(())
    }

    fn execute_reclaim(&mut self, env: &mut CallEnv<'_>) -> Result<(), String> {
        let cfg = self.cfg().clone();
        let start = self.refund_start.ok_or("WindowClosed")?;
        if env.height < start {
            return Err("WindowClosed".into());
        }
        let mut due = 0u64;
        for mv in self.rights.iter_mut() {
            if mv.caller == env.sender && mv.effective && !mv.slashed && !mv.deposit_returned {
                mv.deposit_returned = true;
                due += mv.deposit;
            }
        }
        for slot in self.reward_slots.iter_mut() {
            if slot.caller == env.sender && !slot.paid {
                slot.paid = true;
                due += cfg.reward_right;
                self.reward_pool -= cfg.reward_right;
                self.rewards_committed -= cfg.reward_right;
            }
        }
        if Some(env.sender) == self.organizer && !self.pool_reclaimed {
            let leftover = self.reward_pool - self.rewards_committed;
            self.reward_pool -= leftover;
            self.pool_reclaimed = true;
            due += leftover;
        }
        if due == 0 {
            return Err("NothingToReclaim".into());
        }
        env.pay(env.sender, due);
        Ok(())
    }
}

impl Contract for AuctionContract {
    type Call = AuctionCall;

    fn on_block(&mut self, env: &mut BlockEnv<'_>) {
        self.roll_windows(env);
    }

    fn execute(&mut self, env: &mut CallEnv<'_>, call: &AuctionCall) -> Result<(), String> {
        if self.config.is_none() && !matches!(call, AuctionCall::Deploy(_)) {
            return Err("NotDeployed".into());
        }
        match call {
            AuctionCall::Deploy(config) => {
                if self.config.is_some() {
                    return Err("AlreadyDeployed".into());
                }
                config.validate().map_err(|e| format!("BadConfig: {e}"))?;
                self.config = Some(config.clone());
                self.organizer = Some(env.sender);
                self.reward_pool = env.value;
                self.reg_start = env.height;
                self.reg_end = env.height + config.registration_blocks - 1;
                // The countdown / path window opens right after registration.
                let path_start = self.reg_end + 1;
                // Rounds for tree variants begin with the decoy selection,
                // which wants the previous block's beacon; defer creation to
                // the block hook so the beacon exists.
                self.pending_first_round = Some(path_start);
                Ok(())
            }
            AuctionCall::Register { commitment } => self.execute_register(env, commitment),
            AuctionCall::Bid { nonce } => self.execute_bid(env, nonce),
            AuctionCall::Right { claimed } => self.execute_right(env, *claimed),
            AuctionCall::Blame => self.execute_blame(env),
            AuctionCall::FakeBid { value, proof } => self.execute_fakebid(env, *value, proof),
            AuctionCall::Refund { proof } => self.execute_refund(env, proof),
            AuctionCall::Reclaim => self.execute_reclaim(env),
        }
    }
}

/// Pick `count` distinct bidder indices from `[0, n)` by rejection sampling
/// over a hash counter seeded with the beacon. Deterministic in the beacon.
pub fn select_fake_bidders(
    beacon: &Digest32,
    count: u64,
    n: u64,
) -> Result<Vec<u64>, String> {
    if count > n {
        return Err("TooFewBidders".into());
    }
    let mut chosen = BTreeSet::new();
    let mut counter = 0u64;
    while (chosen.len() as u64) < count {
        let digest = hash_parts(&[b"fakesel", &beacon.0, &counter.to_le_bytes()]);
        let idx = (u64::from_le_bytes(digest.0[..8].try_into().unwrap()) as u128 * n as u128 >> 64)
            as u64;
        chosen.insert(idx);
        counter += 1;
    }
    Ok(chosen.into_iter().collect())
}

/// The decoy-bid equation over the beacon and the bidder's nonce.
pub fn compute_fake_bid(beacon: &Digest32, nonce: &[u8; 32], max_bid: u64) -> u64 {
    fake_bid_value(beacon, nonce, max_bid)
}

/// Full-knowledge oracle: the maximum bid and every index attaining it
/// (0-based).
pub fn brute_force_winner(bids: &[u64]) -> Option<(u64, BTreeSet<usize>)> {
    let max = *bids.iter().max()?;
    let argmax = bids
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == max)
        .map(|(i, _)| i)
        .collect();
    Some((max, argmax))
}

/// True iff two bid sequences agree on the maximum and on the set of
/// maximizers.
pub fn compatible(a: &[u64], b: &[u64]) -> bool {
    a.len() == b.len() && brute_force_winner(a) == brute_force_winner(b)
}
