//! The blind-signature voting contract.
//!
//! Six phase-gated steps driven by deadlines `t1 < t2 < ... < t6`:
//! approval and fee-paying registration (step 1), publication of the
//! administrator's RSA key (step 2), submission of blinded voter-key hashes
//! (step 3), administrator blind signatures (step 4), anonymous commitments
//! relayed by third parties for a reward (step 5), and reveals that update
//! the tally (step 6). Refund paths cover every outcome: unapproved
//! registrants, a cancelled vote after a refused signature, a cancelled vote
//! after surplus commitments, and the honest finish.
//!
//! Steps 3 and 4 can also run over an authenticated off-chain channel; the
//! only on-chain residue of that optimization is `report`, with which the
//! administrator proves a voter demanded a second signature on a different
//! value. A separate deployment flag switches the contract to premature
//! commitments, where the administrator signs the commitment itself and
//! `commit` shrinks to two arguments.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::crypto::{self, Digest32, RsaPublicKey};
use crate::simchain::{CallEnv, CallInfo, Contract, Identity, Schedule};

/// Deployment parameters. `fee` is escrowed by every registrant, the
/// `relay_reward` is paid per successful commit or reveal, and the
/// administrator's own `admin_deposit` backs the penalty paths.
#[derive(Debug, Clone, Serialize)]
pub struct VotingConfig {
    pub max_voters: u64,
    pub fee: u64,
    pub relay_reward: u64,
    pub admin_deposit: u64,
    /// Step deadlines `t1..t6` as block numbers.
    pub deadlines: [u64; 6],
    /// Premature-commitment variant: the admin signs commitments directly.
    pub premature: bool,
}

impl VotingConfig {
    pub fn validate(&self) -> Result<(), String> {
        for w in self.deadlines.windows(2) {
            if w[0] >= w[1] {
                return Err("deadlines must be strictly increasing".into());
            }
        }
        if self.fee < 2 * self.relay_reward {
            return Err("fee must cover both relay rewards".into());
        }
        if self.max_voters == 0 {
            return Err("at least one voter must be allowed".into());
        }
        Ok(())
    }

    /// Closed step windows: step 1 is `[0, t1]`, step j is `(t_{j-1}, t_j]`.
    pub fn schedule(&self) -> Schedule {
        let t = &self.deadlines;
        Schedule::new(vec![
            (0, t[0]),
            (t[0] + 1, t[1]),
            (t[1] + 1, t[2]),
            (t[2] + 1, t[3]),
            (t[3] + 1, t[4]),
            (t[4] + 1, t[5]),
        ])
        .expect("strictly increasing deadlines form disjoint windows")
    }
}

#[derive(Debug, Clone)]
pub enum VoteCall {
    Deploy(VotingConfig),
    Approve { voter: Identity },
    Register,
    Initiate { modulus: BigUint, exponent: BigUint },
    Delegate { blinded: BigUint },
    BlindSign { voter: Identity, signature: BigUint },
    /// Off-chain-channel cheating report: the admin shows the voter's
    /// authenticated first request, which differs from the voter's on-chain
    /// delegation.
    Report { voter: Identity, blinded: BigUint, auth_tag: Digest32 },
    Commit {
        modulus: BigUint,
        exponent: BigUint,
        admin_signature: BigUint,
        commitment: Digest32,
        self_signature: BigUint,
    },
    CommitPremature { admin_signature: BigUint, commitment: Digest32 },
    Reveal { commitment: Digest32, vote: Vec<u8>, nonce: [u8; 32] },
    Step1Refund,
    Step4Refund,
    Step5Refund,
    AdminRefund,
    VoterRefund,
    ReportRefusedSignature { voter: Identity },
}

impl CallInfo for VoteCall {
    fn function(&self) -> &'static str {
        match self {
            VoteCall::Deploy(_) => "constructor",
            VoteCall::Approve { .. } => "approve",
            VoteCall::Register => "register",
            VoteCall::Initiate { .. } => "initiate",
            VoteCall::Delegate { .. } => "delegate",
            VoteCall::BlindSign { .. } => "blind_sign",
            VoteCall::Report { .. } => "report",
            VoteCall::Commit { .. } => "commit",
            VoteCall::CommitPremature { .. } => "commit_premature",
            VoteCall::Reveal { .. } => "reveal",
            VoteCall::Step1Refund => "step1_refund",
            VoteCall::Step4Refund => "step4_refund",
            VoteCall::Step5Refund => "step5_refund",
            VoteCall::AdminRefund => "admin_refund",
            VoteCall::VoterRefund => "voter_refund",
            VoteCall::ReportRefusedSignature { .. } => "report_refused_signature",
        }
    }

    fn args_summary(&self) -> String {
        match self {
            VoteCall::Approve { voter } => format!("{voter}"),
            VoteCall::Initiate { modulus, .. } => format!("N={modulus}"),
            VoteCall::Delegate { blinded } => format!("h'={blinded}"),
            VoteCall::BlindSign { voter, .. } => format!("{voter}"),
            VoteCall::Report { voter, .. } => format!("{voter}"),
            VoteCall::Commit { commitment, .. } => format!("c={}", commitment.to_hex()),
            VoteCall::CommitPremature { commitment, .. } => format!("c={}", commitment.to_hex()),
            VoteCall::Reveal { commitment, .. } => format!("c={}", commitment.to_hex()),
            VoteCall::ReportRefusedSignature { voter } => format!("{voter}"),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CancelCause {
    RefusedSignature,
    SurplusCommitments,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VoterRecord {
    pub approved: bool,
    pub registered: bool,
    pub delegated: Option<String>,
    pub signature_issued: bool,
    /// Set when the admin proved a double demand; the deposit is forfeit
    /// and the missing signature is excused.
    pub reported: bool,
    pub refunded: bool,
}

impl VoterRecord {
    pub fn is_valid(&self) -> bool {
        self.approved && self.registered
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VotePenalty {
    pub block: u64,
    pub who: Identity,
    pub what: String,
    pub amount: u64,
}

/// Contract state. Commitments are keyed by digest; consumed admin
/// signatures are tracked as hashes of the `(N_i, e_i, s_i)` triple so a
/// signature can never authorize two commitments.
pub struct VotingContract {
    config: Option<VotingConfig>,
    admin: Option<Identity>,
    schedule: Option<Schedule>,
    voters: BTreeMap<Identity, VoterRecord>,
    admin_key: Option<RsaPublicKey>,
    delegations: BTreeMap<Identity, BigUint>,
    blind_signatures: BTreeMap<Identity, BigUint>,
    used_credentials: BTreeSet<Digest32>,
    commitments: BTreeMap<Digest32, bool>, // revealed?
    commit_order: Vec<Digest32>,
    tally: BTreeMap<Vec<u8>, u64>,
    revealed_votes: Vec<Vec<u8>>,
    cancelled: Option<CancelCause>,
    rewards_paid: u64,
    admin_refunded: bool,
    burned: u64,
    penalties: Vec<VotePenalty>,
    valid_count_cache: Option<u64>,
}

impl Default for VotingContract {
    fn default() -> Self {
        Self::new()
    }
}

impl VotingContract {
    pub fn new() -> Self {
        VotingContract {
            config: None,
            admin: None,
            schedule: None,
            voters: BTreeMap::new(),
            admin_key: None,
            delegations: BTreeMap::new(),
            blind_signatures: BTreeMap::new(),
            used_credentials: BTreeSet::new(),
            commitments: BTreeMap::new(),
            commit_order: Vec::new(),
            tally: BTreeMap::new(),
            revealed_votes: Vec::new(),
            cancelled: None,
            rewards_paid: 0,
            admin_refunded: false,
            burned: 0,
            penalties: Vec::new(),
            valid_count_cache: None,
        }
    }

    pub fn config(&self) -> Option<&VotingConfig> {
        self.config.as_ref()
    }

    pub fn admin(&self) -> Option<Identity> {
        self.admin
    }

    pub fn admin_key(&self) -> Option<&RsaPublicKey> {
        self.admin_key.as_ref()
    }

    pub fn voter(&self, id: Identity) -> Option<&VoterRecord> {
        self.voters.get(&id)
    }

    pub fn delegation(&self, id: Identity) -> Option<&BigUint> {
        self.delegations.get(&id)
    }

    pub fn blind_signature(&self, id: Identity) -> Option<&BigUint> {
        self.blind_signatures.get(&id)
    }

    pub fn cancelled(&self) -> Option<CancelCause> {
        self.cancelled
    }

    pub fn tally(&self) -> &BTreeMap<Vec<u8>, u64> {
        &self.tally
    }

    /// Revealed votes in reveal order, for tally reductions other than
    /// plain counting.
    pub fn revealed_votes(&self) -> &[Vec<u8>] {
        &self.revealed_votes
    }

    pub fn commitments(&self) -> &BTreeMap<Digest32, bool> {
        &self.commitments
    }

    pub fn penalties(&self) -> &[VotePenalty] {
        &self.penalties
    }

    pub fn burned(&self) -> u64 {
        self.burned
    }

    pub fn rewards_paid(&self) -> u64 {
        self.rewards_paid
    }

    /// Number of approved-and-registered voters (fixed once `t1` passes).
    pub fn valid_voter_count(&self) -> u64 {
        self.valid_count_cache
            .unwrap_or_else(|| self.voters.values().filter(|v| v.is_valid()).count() as u64)
    }

    fn cfg(&self) -> &VotingConfig {
        self.config.as_ref().expect("contract not deployed")
    }

    fn sched(&self) -> &Schedule {
        self.schedule.as_ref().expect("contract not deployed")
    }

    fn require_step(&self, height: u64, step: usize) -> Result<(), String> {
        if !self.sched().in_window(height, step - 1) {
            return Err("WindowClosed".into());
        }
        Ok(())
    }

    fn require_admin(&self, sender: Identity) -> Result<(), String> {
        if Some(sender) != self.admin {
            return Err("NotAdmin".into());
        }
        Ok(())
    }

    fn require_live(&self) -> Result<(), String> {
        if self.cancelled.is_some() {
            return Err("Cancelled".into());
        }
        Ok(())
    }

    fn freeze_valid_count(&mut self, height: u64) {
        if self.valid_count_cache.is_none() && height > self.cfg().deadlines[0] {
            self.valid_count_cache =
                Some(self.voters.values().filter(|v| v.is_valid()).count() as u64);
        }
    }

    fn cancel(&mut self, cause: CancelCause) {
        if self.cancelled.is_none() {
            self.cancelled = Some(cause);
        }
    }

    /// Remaining admin deposit after rewards already paid out.
    fn remaining_deposit(&self) -> u64 {
        self.cfg().admin_deposit.saturating_sub(self.rewards_paid)
    }

    /// The degenerate-input guard: quantities verified against an RSA
    /// signature must not reduce to 0 or 1, which any exponent would fix.
    fn nondegenerate(value: &BigUint, modulus: &BigUint) -> bool {
        let reduced = value % modulus;
        reduced > BigUint::one()
    }

    /// Shared credential checks for a commitment: the admin signature `s`
    /// must cover `payload` (mod the admin key) and must never have been
    /// consumed before.
    fn consume_credential(
        &mut self,
        payload: &BigUint,
        admin_signature: &BigUint,
        extra: &[&[u8]],
    ) -> Result<(), String> {
        let key = self.admin_key.clone().ok_or("NotInitiated")?;
        if !Self::nondegenerate(payload, &key.modulus) {
            return Err("BadAdminSig".into());
        }
        if !crypto::verify(payload, admin_signature, &key) {
            return Err("BadAdminSig".into());
        }
        let mut parts: Vec<&[u8]> = vec![b"credential"];
        let sig_bytes = admin_signature.to_bytes_be();
        parts.extend_from_slice(extra);
        parts.push(&sig_bytes);
        let fingerprint = crypto::hash_parts(&parts);
        if !self.used_credentials.insert(fingerprint) {
            return Err("Reuse".into());
        }
        Ok(())
    }

    /// Surplus-commitment guard: the n+1-th otherwise-valid commitment
    /// cancels the vote instead of landing.
    fn check_commit_capacity(&mut self) -> Result<(), String> {
        let n = self.valid_voter_count();
        if (self.commit_order.len() as u64) < n {
            return Ok(());
        }
        self.cancel(CancelCause::SurplusCommitments);
        Err("TooManyCommits".into())
    }

    fn store_commitment(&mut self, env: &mut CallEnv<'_>, commitment: Digest32) -> Result<(), String> {
        if self.commitments.contains_key(&commitment) {
            return Err("DuplicateCommitment".into());
        }
        self.commitments.insert(commitment, false);
        self.commit_order.push(commitment);
        let reward = self.cfg().relay_reward;
        self.rewards_paid += reward;
        env.pay(env.sender, reward);
        Ok(())
    }
}

/// Authentication tag for the simulated off-chain channel: stands in for a
/// signature by the voter's on-chain key over the payload.
pub fn auth_tag(signer: Identity, payload: &BigUint) -> Digest32 {
    crypto::hash_parts(&[b"offchain-auth", &signer.0.to_le_bytes(), &payload.to_bytes_be()])
}

pub fn auth_tag_valid(signer: Identity, payload: &BigUint, tag: &Digest32) -> bool {
    auth_tag(signer, payload) == *tag
}

impl Contract for VotingContract {
    type Call = VoteCall;

    fn execute(&mut self, env: &mut CallEnv<'_>, call: &VoteCall) -> Result<(), String> {
        if self.config.is_none() && !matches!(call, VoteCall::Deploy(_)) {
            return Err("NotDeployed".into());
        }
        if self.config.is_some() {
            self.freeze_valid_count(env.height);
        }
        match call {
            VoteCall::Deploy(config) => {
                if self.config.is_some() {
                    return Err("AlreadyDeployed".into());
                }
                config.validate().map_err(|e| format!("BadConfig: {e}"))?;
                if env.value != config.admin_deposit {
                    return Err("WrongDeposit".into());
                }
                self.schedule = Some(config.schedule());
                self.config = Some(config.clone());
                self.admin = Some(env.sender);
                Ok(())
            }

            VoteCall::Approve { voter } => {
                self.require_live()?;
                self.require_step(env.height, 1)?;
                self.require_admin(env.sender)?;
                let approved = self.voters.values().filter(|v| v.approved).count() as u64;
                if approved >= self.cfg().max_voters {
                    return Err("TooManyVoters".into());
                }
                let rec = self.voters.entry(*voter).or_default();
                if rec.approved {
                    return Err("AlreadyApproved".into());
                }
                rec.approved = true;
                Ok(())
            }

            VoteCall::Register => {
                self.require_live()?;
                self.require_step(env.height, 1)?;
                if env.value != self.cfg().fee {
                    return Err("WrongDeposit".into());
                }
                let rec = self.voters.entry(env.sender).or_default();
                if rec.registered {
                    return Err("AlreadyRegistered".into());
                }
                rec.registered = true;
                Ok(())
            }

            VoteCall::Initiate { modulus, exponent } => {
                self.require_live()?;
                self.require_step(env.height, 2)?;
                self.require_admin(env.sender)?;
                if self.admin_key.is_some() {
                    return Err("AlreadyInitiated".into());
                }
                self.admin_key = Some(RsaPublicKey {
                    modulus: modulus.clone(),
                    exponent: exponent.clone(),
                });
                Ok(())
            }

            VoteCall::Delegate { blinded } => {
                self.require_live()?;
                self.require_step(env.height, 3)?;
                let rec = self.voters.get(&env.sender).ok_or("NotVoter")?;
                if !rec.is_valid() {
                    return Err("NotVoter".into());
                }
                if self.delegations.contains_key(&env.sender) {
                    return Err("AlreadyDelegated".into());
                }
                self.delegations.insert(env.sender, blinded.clone());
                self.voters.get_mut(&env.sender).unwrap().delegated =
                    Some(blinded.to_string());
                Ok(())
            }

            VoteCall::BlindSign { voter, signature } => {
                self.require_live()?;
                self.require_step(env.height, 4)?;
                self.require_admin(env.sender)?;
                let key = self.admin_key.clone().ok_or("NotInitiated")?;
                let blinded = self.delegations.get(voter).ok_or("NoDelegation")?;
                if !crypto::verify(blinded, signature, &key) {
                    return Err("InvalidSignature".into());
                }
                self.blind_signatures.insert(*voter, signature.clone());
                self.voters.get_mut(voter).unwrap().signature_issued = true;
                Ok(())
            }

            VoteCall::Report { voter, blinded, auth_tag: tag } => {
                self.require_live()?;
                self.require_step(env.height, 4)?;
                self.require_admin(env.sender)?;
                if !auth_tag_valid(*voter, blinded, tag) {
                    return Err("BadAuthSignature".into());
                }
                let on_chain = self.delegations.get(voter).ok_or("NotEligible")?;
                if on_chain == blinded {
                    // The on-chain demand matches the signed off-chain one;
                    // nothing dishonest to show.
                    return Err("NotEligible".into());
                }
                let rec = self.voters.get_mut(voter).ok_or("NotEligible")?;
                if rec.reported {
                    return Err("AlreadyReported".into());
                }
                rec.reported = true;
                let fee = self.cfg().fee;
                self.burned += fee;
                self.penalties.push(VotePenalty {
                    block: env.height,
                    who: *voter,
                    what: "double signature demand".to_string(),
                    amount: fee,
                });
                Ok(())
            }

            VoteCall::Commit { modulus, exponent, admin_signature, commitment, self_signature } => {
                self.require_live()?;
                self.require_step(env.height, 5)?;
                if self.cfg().premature {
                    return Err("BadVariant".into());
                }
                self.check_commit_capacity()?;
                // Plausibility of the voter key: positive odd exponent >= 3
                // and a modulus large enough to carry it. A full validity
                // proof is not performed.
                if exponent < &BigUint::from(3u32)
                    || (exponent % 2u32) == BigUint::ZERO
                    || modulus <= exponent
                {
                    return Err("BadVoterKey".into());
                }
                let payload_digest = crypto::hash_pubkey(modulus, exponent);
                let admin_modulus =
                    self.admin_key.as_ref().ok_or("NotInitiated")?.modulus.clone();
                let payload = payload_digest.reduced(&admin_modulus);
                let key_bytes = payload_digest.0;
                self.consume_credential(&payload, admin_signature, &[&key_bytes])?;
                // The commitment must carry the voter key's own signature.
                let voter_key = RsaPublicKey {
                    modulus: modulus.clone(),
                    exponent: exponent.clone(),
                };
                let c_val = commitment.reduced(modulus);
                if c_val <= BigUint::one() || !crypto::verify(&c_val, self_signature, &voter_key) {
                    return Err("BadSelfSig".into());
                }
                self.store_commitment(env, *commitment)
            }

            VoteCall::CommitPremature { admin_signature, commitment } => {
                self.require_live()?;
                self.require_step(env.height, 5)?;
                if !self.cfg().premature {
                    return Err("BadVariant".into());
                }
                self.check_commit_capacity()?;
                let admin_modulus =
                    self.admin_key.as_ref().ok_or("NotInitiated")?.modulus.clone();
                let payload = commitment.reduced(&admin_modulus);
                let c_bytes = commitment.0;
                self.consume_credential(&payload, admin_signature, &[&c_bytes])?;
                self.store_commitment(env, *commitment)
            }

            VoteCall::Reveal { commitment, vote, nonce } => {
                self.require_live()?;
                self.require_step(env.height, 6)?;
                let revealed = self.commitments.get(commitment).ok_or("UnknownCommitment")?;
                if *revealed {
                    return Err("AlreadyRevealed".into());
                }
                if !crypto::commit_open(commitment, vote, nonce) {
                    return Err("BadOpening".into());
                }
                self.commitments.insert(*commitment, true);
                *self.tally.entry(vote.clone()).or_insert(0) += 1;
                self.revealed_votes.push(vote.clone());
                let reward = self.cfg().relay_reward;
                self.rewards_paid += reward;
                env.pay(env.sender, reward);
                Ok(())
            }

            VoteCall::Step1Refund => {
                if env.height <= self.cfg().deadlines[0] {
                    return Err("WindowClosed".into());
                }
                let rec = self.voters.get_mut(&env.sender).ok_or("NotEligible")?;
                if !rec.registered || rec.approved {
                    return Err("NotEligible".into());
                }
                if rec.refunded {
                    return Err("AlreadyRefunded".into());
                }
                rec.refunded = true;
                let fee = self.cfg().fee;
                env.pay(env.sender, fee);
                Ok(())
            }

            VoteCall::ReportRefusedSignature { voter } => {
                self.require_live()?;
                if env.height <= self.cfg().deadlines[3] {
                    return Err("WindowClosed".into());
                }
                let rec = self.voters.get(voter).ok_or("NotEligible")?;
                if !rec.is_valid() || rec.reported {
                    return Err("NotEligible".into());
                }
                if !self.delegations.contains_key(voter) {
                    return Err("NotEligible".into());
                }
                if self.blind_signatures.contains_key(voter) {
                    return Err("NotEligible".into());
                }
                self.cancel(CancelCause::RefusedSignature);
                let deposit = self.cfg().admin_deposit;
                self.penalties.push(VotePenalty {
                    block: env.height,
                    who: self.admin.unwrap(),
                    what: "refused blind signature".to_string(),
                    amount: deposit,
                });
                Ok(())
            }

            VoteCall::Step4Refund => {
                if self.cancelled != Some(CancelCause::RefusedSignature) {
                    return Err("NotCancelled".into());
                }
                let n = self.valid_voter_count();
                let rec = self.voters.get_mut(&env.sender).ok_or("NotEligible")?;
                if !rec.is_valid() || rec.reported {
                    return Err("NotEligible".into());
                }
                if rec.refunded {
                    return Err("AlreadyRefunded".into());
                }
                rec.refunded = true;
                let amount = self.cfg().fee + self.remaining_deposit() / n;
                env.pay(env.sender, amount);
                Ok(())
            }

            VoteCall::Step5Refund => {
                if self.cancelled != Some(CancelCause::SurplusCommitments) {
                    return Err("NotCancelled".into());
                }
                let n = self.valid_voter_count();
                let rec = self.voters.get_mut(&env.sender).ok_or("NotEligible")?;
                if !rec.is_valid() || rec.reported {
                    return Err("NotEligible".into());
                }
                if rec.refunded {
                    return Err("AlreadyRefunded".into());
                }
                rec.refunded = true;
                let amount = self.cfg().fee + self.remaining_deposit() / n;
                env.pay(env.sender, amount);
                Ok(())
            }

            VoteCall::AdminRefund => {
                self.require_admin(env.sender)?;
                if env.height <= self.cfg().deadlines[5] {
                    return Err("WindowClosed".into());
                }
                // A cancellation hands the deposit to the voters instead,
                // unless there are no valid voters to hand it to.
                if self.cancelled.is_some() && self.valid_voter_count() > 0 {
                    return Err("Cancelled".into());
                }
                if self.admin_refunded {
                    return Err("AlreadyRefunded".into());
                }
                self.admin_refunded = true;
                env.pay(env.sender, self.remaining_deposit());
                Ok(())
            }

            VoteCall::VoterRefund => {
                if self.cancelled.is_some() {
                    return Err("Cancelled".into());
                }
                if env.height <= self.cfg().deadlines[5] {
                    return Err("WindowClosed".into());
                }
                let rec = self.voters.get_mut(&env.sender).ok_or("NotEligible")?;
                if !rec.is_valid() {
                    return Err("NotEligible".into());
                }
                if rec.reported {
                    return Err("DepositConfiscated".into());
                }
                if rec.refunded {
                    return Err("AlreadyRefunded".into());
                }
                rec.refunded = true;
                let cfg = self.cfg();
                env.pay(env.sender, cfg.fee - 2 * cfg.relay_reward);
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::RsaKeyPair;
    use crate::proofs::ProofRegistry;
    use crate::rng::DetRng;
    use crate::simchain::{Chain, ChargePolicy, CostModel, TxStatus};

    fn config() -> VotingConfig {
        VotingConfig {
            max_voters: 3,
            fee: 100,
            relay_reward: 10,
            admin_deposit: 60,
            deadlines: [3, 4, 5, 6, 8, 10],
            premature: false,
        }
    }

    struct Fixture {
        chain: Chain<VoteCall>,
        contract: VotingContract,
        proofs: ProofRegistry,
        admin: Identity,
        voters: Vec<Identity>,
    }

    impl Fixture {
        fn new() -> Self {
            let mut chain = Chain::new(1, CostModel::blind_vote_table(), ChargePolicy::Min);
            let admin = chain.new_identity();
            chain.mint(admin, 1_000);
            let voters = (0..3)
                .map(|_| {
                    let v = chain.new_identity();
                    chain.mint(v, 500);
                    v
                })
                .collect();
            Fixture { chain, contract: VotingContract::new(), proofs: ProofRegistry::new(), admin, voters }
        }

        fn advance(&mut self) {
            self.chain.advance_block(&mut self.contract, &self.proofs);
        }

        fn advance_to(&mut self, height: u64) {
            while self.chain.height() < height {
                self.advance();
            }
        }

        fn last_status(&self) -> &TxStatus {
            &self.chain.log().last().unwrap().status
        }
    }

    #[test]
    fn deploy_validates_config_and_deposit() {
        let mut f = Fixture::new();
        let mut bad = config();
        bad.deadlines = [3, 4, 4, 6, 8, 10];
        f.chain.submit(f.admin, VoteCall::Deploy(bad), 60).unwrap();
        f.advance();
        assert!(matches!(f.last_status(), TxStatus::Rejected(r) if r.starts_with("BadConfig")));

        f.chain.submit(f.admin, VoteCall::Deploy(config()), 59).unwrap();
        f.advance();
        assert!(matches!(f.last_status(), TxStatus::Rejected(r) if r == "WrongDeposit"));

        f.chain.submit(f.admin, VoteCall::Deploy(config()), 60).unwrap();
        f.advance();
        assert!(f.last_status().is_accepted());
        assert_eq!(f.chain.pot(), 60);
    }

    #[test]
    fn registration_window_and_caps() {
        let mut f = Fixture::new();
        f.chain.submit(f.admin, VoteCall::Deploy(config()), 60).unwrap();
        f.advance();
        // approve/register for the three voters
        for &v in &f.voters.clone() {
            f.chain.submit(f.admin, VoteCall::Approve { voter: v }, 0).unwrap();
            f.chain.submit(v, VoteCall::Register, 100).unwrap();
        }
        f.advance();
        assert_eq!(f.contract.valid_voter_count(), 3);

        // a fourth approval exceeds max_voters
        let extra = f.chain.new_identity();
        f.chain.mint(extra, 500);
        f.chain.submit(f.admin, VoteCall::Approve { voter: extra }, 0).unwrap();
        f.advance();
        assert!(matches!(f.last_status(), TxStatus::Rejected(r) if r == "TooManyVoters"));

        // registration after t1 is shut
        f.advance_to(4);
        f.chain.submit(extra, VoteCall::Register, 100).unwrap();
        f.advance();
        assert!(matches!(f.last_status(), TxStatus::Rejected(r) if r == "WindowClosed"));
    }

    #[test]
    fn full_honest_pipeline_counts_votes() {
        let mut f = Fixture::new();
        let mut rng = DetRng::from_seed(5);
        let admin_key = RsaKeyPair::generate(32, &mut rng);
        f.chain.submit(f.admin, VoteCall::Deploy(config()), 60).unwrap();
        f.advance();
        for &v in &f.voters.clone() {
            f.chain.submit(f.admin, VoteCall::Approve { voter: v }, 0).unwrap();
            f.chain.submit(v, VoteCall::Register, 100).unwrap();
        }
        f.advance_to(3);
        f.chain
            .submit(
                f.admin,
                VoteCall::Initiate {
                    modulus: admin_key.public.modulus.clone(),
                    exponent: admin_key.public.exponent.clone(),
                },
                0,
            )
            .unwrap();
        f.advance(); // height 4

        // voters build keys, blind, delegate
        let mut voter_keys = Vec::new();
        let mut blinding = Vec::new();
        for (i, &v) in f.voters.clone().iter().enumerate() {
            let kp = RsaKeyPair::generate(32, &mut rng.fork_indexed("voter-key", i as u64));
            let h = crypto::hash_pubkey(&kp.public.modulus, &kp.public.exponent)
                .reduced(&admin_key.public.modulus);
            let r = crypto::random_unit(&admin_key.public.modulus, &mut rng);
            let blinded = crypto::blind(&h, &r, &admin_key.public).unwrap();
            f.chain.submit(v, VoteCall::Delegate { blinded: blinded.clone() }, 0).unwrap();
            voter_keys.push(kp);
            blinding.push((h, r, blinded));
        }
        f.advance(); // height 5

        for (i, &v) in f.voters.clone().iter().enumerate() {
            let s_blinded = admin_key.sign(&blinding[i].2).unwrap();
            f.chain
                .submit(f.admin, VoteCall::BlindSign { voter: v, signature: s_blinded }, 0)
                .unwrap();
        }
        f.advance(); // height 6

        // commits arrive in step 5 from an unrelated relay identity
        let relay = f.chain.new_identity();
        f.chain.mint(relay, 10);
        f.advance(); // height 7
        let votes: [&[u8]; 3] = [b"A", b"A", b"B"];
        let mut commitments = Vec::new();
        for (i, kp) in voter_keys.iter().enumerate() {
            let s_blinded = admin_key.sign(&blinding[i].2).unwrap();
            let s = crypto::unblind(&s_blinded, &blinding[i].1, &admin_key.public.modulus).unwrap();
            let nonce = rng.next_bytes();
            let c = crypto::commit_bytes(votes[i], &nonce);
            let sc = kp.sign(&c.reduced(&kp.public.modulus)).unwrap();
            f.chain
                .submit(
                    relay,
                    VoteCall::Commit {
                        modulus: kp.public.modulus.clone(),
                        exponent: kp.public.exponent.clone(),
                        admin_signature: s,
                        commitment: c,
                        self_signature: sc,
                    },
                    0,
                )
                .unwrap();
            commitments.push((c, votes[i].to_vec(), nonce));
        }
        f.advance(); // height 8
        assert!(f.chain.log().iter().filter(|t| t.function == "commit").all(|t| t.status.is_accepted()));
        assert_eq!(f.chain.balance(relay), 10 + 30);

        f.advance(); // height 9 (step 6)
        for (c, vote, nonce) in &commitments {
            f.chain
                .submit(relay, VoteCall::Reveal { commitment: *c, vote: vote.clone(), nonce: *nonce }, 0)
                .unwrap();
        }
        f.advance(); // height 10
        assert_eq!(f.contract.tally().get(&b"A"[..].to_vec()), Some(&2));
        assert_eq!(f.contract.tally().get(&b"B"[..].to_vec()), Some(&1));

        // refunds
        f.advance_to(10);
        for &v in &f.voters.clone() {
            f.chain.submit(v, VoteCall::VoterRefund, 0).unwrap();
        }
        f.chain.submit(f.admin, VoteCall::AdminRefund, 0).unwrap();
        f.advance();
        for &v in &f.voters {
            assert_eq!(f.chain.balance(v), 500 - 2 * 10);
        }
        assert_eq!(f.chain.balance(f.admin), 1_000);
        assert_eq!(f.chain.pot(), 0);
    }
}
