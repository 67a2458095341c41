//! A deterministic simulated-blockchain laboratory for two protocol families:
//! secret voting built on RSA blind signatures and hash commitments, and
//! private sealed-bid auctions built on Dutch countdowns and binary interval
//! trees with decoy bids.
//!
//! Everything is replayable: a run is a pure function of a scenario and a
//! 64-bit seed. The [`simchain`] module provides the block clock, balances
//! and gas metering; [`blindvote`] and [`auction`] are the two contract
//! state machines; [`proofs`] is a designated-verifier stand-in for the
//! range proofs the auctions rely on; [`harness`] drives scripted principals
//! block by block, records observation traces and emits reports.

pub mod auction;
pub mod blindvote;
pub mod crypto;
pub mod harness;
pub mod proofs;
pub mod rng;
pub mod simchain;
