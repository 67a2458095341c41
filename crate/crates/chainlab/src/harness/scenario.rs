//! Scenario files: which protocol to run, with which parameters, and who
//! misbehaves how.
//!
//! Scenarios are TOML. Exactly one of `[vote]` / `[auction]` must be present.
//! Policies are per-principal strings; anything not listed defaults to
//! honest behavior.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub vote: Option<VoteScenario>,
    pub auction: Option<AuctionScenario>,
}

/// Administrator behavior in a voting run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdminPolicy {
    #[default]
    Honest,
    /// Withhold the blind signature for `refuse_target`.
    RefuseSign,
    /// Forge one extra credential and push a surplus commitment through a
    /// relay.
    OverSign,
}

/// Per-voter behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoterPolicy {
    #[default]
    Honest,
    /// Registers but is never approved; eligible for the step-1 refund.
    Unapproved,
    /// Registers and stops participating.
    Silent,
    /// Commits but never reveals.
    NoReveal,
    /// Off-chain variant only: obtains a signature off-chain, then demands a
    /// second one on-chain under a different blinded value.
    DoubleDemand,
    /// Hands the ballot to a separate key holder who commits and reveals.
    Delegating,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteScenario {
    pub voters: u64,
    /// Opaque vote values, one per voter (shorter lists repeat cyclically).
    pub votes: Vec<String>,
    #[serde(default)]
    pub max_voters: Option<u64>,
    pub fee: u64,
    pub relay_reward: u64,
    pub admin_deposit: u64,
    #[serde(default = "default_relays")]
    pub relays: u64,
    #[serde(default = "default_key_bits")]
    pub key_bits: u32,
    /// Run steps 3-4 over the authenticated off-chain channel.
    #[serde(default)]
    pub offchain_delegation: bool,
    /// Premature-commitment variant (admin signs commitments directly).
    #[serde(default)]
    pub premature: bool,
    #[serde(default)]
    pub deadlines: Option<[u64; 6]>,
    #[serde(default)]
    pub admin_policy: AdminPolicy,
    /// Voter index targeted by `refuse-sign`.
    #[serde(default)]
    pub refuse_target: u64,
    #[serde(default)]
    pub voter_policies: Vec<VoterPolicy>,
}

fn default_relays() -> u64 {
    2
}

fn default_key_bits() -> u32 {
    32
}

impl VoteScenario {
    pub fn policy(&self, voter: usize) -> VoterPolicy {
        self.voter_policies.get(voter).copied().unwrap_or_default()
    }

    pub fn vote_value(&self, voter: usize) -> Vec<u8> {
        let v = &self.votes[voter % self.votes.len()];
        v.as_bytes().to_vec()
    }

    /// Deadlines leave one block of slack per on-chain step and two for the
    /// relayed ones.
    pub fn effective_deadlines(&self) -> [u64; 6] {
        self.deadlines.unwrap_or([3, 4, 5, 6, 8, 10])
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.voters == 0 {
            return Err(ScenarioError::Invalid("at least one voter".into()));
        }
        if self.votes.is_empty() {
            return Err(ScenarioError::Invalid("no vote values given".into()));
        }
        if self.fee < 2 * self.relay_reward {
            return Err(ScenarioError::Invalid(
                "fee must cover two relay rewards".into(),
            ));
        }
        if self.relays == 0 {
            return Err(ScenarioError::Invalid("at least one relay".into()));
        }
        if self.key_bits < 16 || self.key_bits > 2048 {
            return Err(ScenarioError::Invalid("key bits outside 16..=2048".into()));
        }
        let d = self.effective_deadlines();
        for w in d.windows(2) {
            if w[0] >= w[1] {
                return Err(ScenarioError::Invalid("deadlines not increasing".into()));
            }
        }
        if self.voter_policies.len() > self.voters as usize {
            return Err(ScenarioError::Invalid("more policies than voters".into()));
        }
        let double_demands = (0..self.voters as usize)
            .filter(|&i| self.policy(i) == VoterPolicy::DoubleDemand)
            .count();
        if double_demands > 0 && !self.offchain_delegation {
            return Err(ScenarioError::Invalid(
                "double-demand requires the off-chain channel".into(),
            ));
        }
        if self.premature
            && (0..self.voters as usize).any(|i| self.policy(i) == VoterPolicy::Delegating)
        {
            return Err(ScenarioError::Invalid(
                "premature commitments preclude delegating votes".into(),
            ));
        }
        if self.admin_policy == AdminPolicy::RefuseSign && self.refuse_target >= self.voters {
            return Err(ScenarioError::Invalid("refuse target out of range".into()));
        }
        Ok(())
    }
}

/// Per-bidder behavior in an auction run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BidderPolicy {
    /// Guides the path only while holding the strongest claim, reveals and
    /// refunds honestly.
    #[default]
    Honest,
    /// Races ahead of the pack whenever its own bid sits in the right child.
    EagerRight,
    /// Registers, then never guides or reveals.
    Silent,
    /// Guides honestly but withholds the winning reveal until blamed once.
    NoReveal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionScenario {
    /// "p0" | "p1" | "p2" | "p3"
    pub variant: String,
    pub m: u64,
    pub bids: Vec<u64>,
    pub deposit: u64,
    pub right_deposit: u64,
    #[serde(default = "default_r")]
    pub min_right_calls: u64,
    #[serde(default)]
    pub fake_bidders: u64,
    #[serde(default)]
    pub reward_right: u64,
    #[serde(default)]
    pub reward_pool: u64,
    #[serde(default = "default_reg_blocks")]
    pub registration_blocks: u64,
    #[serde(default = "default_reveal_blocks")]
    pub reveal_blocks: u64,
    #[serde(default = "default_verify_blocks")]
    pub verify_blocks: u64,
    #[serde(default = "default_refund_blocks")]
    pub refund_blocks: u64,
    #[serde(default = "default_true")]
    pub refund_winner: bool,
    #[serde(default)]
    pub bidder_policies: Vec<BidderPolicy>,
    /// Path offsets (1-based block offsets from the round anchor) at which a
    /// scripted adversary fires a deposit-backed right move regardless of
    /// any bid. Each entry fires once.
    #[serde(default)]
    pub spurious_right: Vec<u64>,
}

fn default_r() -> u64 {
    2
}

fn default_reg_blocks() -> u64 {
    2
}

fn default_reveal_blocks() -> u64 {
    3
}

fn default_verify_blocks() -> u64 {
    2
}

fn default_refund_blocks() -> u64 {
    3
}

fn default_true() -> bool {
    true
}

impl AuctionScenario {
    pub fn variant(&self) -> Result<crate::auction::Variant, ScenarioError> {
        match self.variant.as_str() {
            "p0" => Ok(crate::auction::Variant::P0),
            "p1" => Ok(crate::auction::Variant::P1),
            "p2" => Ok(crate::auction::Variant::P2),
            "p3" => Ok(crate::auction::Variant::P3),
            other => Err(ScenarioError::Invalid(format!("unknown variant {other}"))),
        }
    }

    pub fn policy(&self, bidder: usize) -> BidderPolicy {
        self.bidder_policies.get(bidder).copied().unwrap_or_default()
    }

    pub fn config(&self) -> Result<crate::auction::AuctionConfig, ScenarioError> {
        Ok(crate::auction::AuctionConfig {
            variant: self.variant()?,
            max_bid: self.m,
            bidder_deposit: self.deposit,
            right_deposit: self.right_deposit,
            min_right_calls: self.min_right_calls,
            fake_bidders: self.fake_bidders,
            reward_right: self.reward_right,
            registration_blocks: self.registration_blocks,
            reveal_blocks: self.reveal_blocks,
            verify_blocks: self.verify_blocks,
            refund_blocks: self.refund_blocks,
            refund_winner: self.refund_winner,
        })
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let variant = self.variant()?;
        let config = self.config()?;
        config.validate().map_err(ScenarioError::Invalid)?;
        if self.bids.is_empty() {
            return Err(ScenarioError::Invalid("no bids given".into()));
        }
        for &b in &self.bids {
            if b < 1 || b > self.m {
                return Err(ScenarioError::Invalid(format!("bid {b} outside [1, m]")));
            }
        }
        if self.bidder_policies.len() > self.bids.len() {
            return Err(ScenarioError::Invalid("more policies than bidders".into()));
        }
        if variant == crate::auction::Variant::P3 {
            if self.fake_bidders as usize > self.bids.len() {
                return Err(ScenarioError::Invalid("more decoy bidders than bidders".into()));
            }
            if self.reveal_blocks < 2 {
                return Err(ScenarioError::Invalid(
                    "decoy claims need a reveal window of at least two blocks".into(),
                ));
            }
        }
        if self.reward_right > 0 && self.reward_pool == 0 {
            return Err(ScenarioError::Invalid(
                "right-call rewards need a reward pool".into(),
            ));
        }
        if !variant.uses_tree() && !self.spurious_right.is_empty() {
            return Err(ScenarioError::Invalid(
                "spurious right moves only apply to tree variants".into(),
            ));
        }
        Ok(())
    }
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match (&self.vote, &self.auction) {
            (Some(v), None) => v.validate(),
            (None, Some(a)) => a.validate(),
            (Some(_), Some(_)) => Err(ScenarioError::Invalid(
                "scenario declares both protocols".into(),
            )),
            (None, None) => Err(ScenarioError::Invalid(
                "scenario declares no protocol".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_vote_scenario() {
        let text = r#"
seed = 7
[vote]
voters = 3
votes = ["A", "A", "B"]
fee = 100
relay_reward = 10
admin_deposit = 60
"#;
        let f = ScenarioFile::from_toml_str(text).unwrap();
        let v = f.vote.unwrap();
        assert_eq!(v.voters, 3);
        assert_eq!(v.policy(2), VoterPolicy::Honest);
    }

    #[test]
    fn parses_an_auction_scenario() {
        let text = r#"
[auction]
variant = "p2"
m = 15
bids = [3, 12, 7]
deposit = 100
right_deposit = 50
"#;
        let f = ScenarioFile::from_toml_str(text).unwrap();
        let a = f.auction.unwrap();
        assert_eq!(a.variant().unwrap(), crate::auction::Variant::P2);
        assert_eq!(a.min_right_calls, 2);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(ScenarioFile::from_toml_str("seed = 1").is_err());
        let bid_out_of_range = r#"
[auction]
variant = "p1"
m = 10
bids = [11]
deposit = 5
right_deposit = 5
"#;
        assert!(ScenarioFile::from_toml_str(bid_out_of_range).is_err());
        let p3_too_few = r#"
[auction]
variant = "p3"
m = 10
bids = [3]
fake_bidders = 2
deposit = 5
right_deposit = 5
"#;
        assert!(ScenarioFile::from_toml_str(p3_too_few).is_err());
        let fee_too_low = r#"
[vote]
voters = 1
votes = ["A"]
fee = 10
relay_reward = 10
admin_deposit = 5
"#;
        assert!(ScenarioFile::from_toml_str(fee_too_low).is_err());
    }
}
