//! RSA key material, blind-signature algebra, and hash commitments.
//!
//! The algebra is the textbook one: a signer with key `(N, e, d)` signs
//! `x` as `x^d mod N`; a requester hides a message hash `h` by submitting
//! `h * r^e mod N` for a secret unit `r`, and recovers the signature on `h`
//! by multiplying the blind signature with `r^-1`. Everything is total over
//! `[0, N)`; degenerate inputs like `h = 0` are accepted here and rejected
//! by the protocol layers, which only ever feed hash outputs through.
//!
//! Key sizes are configurable. Small keys (16-64 bit moduli) keep exhaustive
//! property tests cheap; nothing in the algebra depends on the size.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::DetRng;

/// A 32-byte SHA-256 digest. Used for commitments, beacon values and
/// simulated channel-authentication tags.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest32(pub [u8; 32]);

impl Digest32 {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Digest32(arr))
    }

    /// The digest as a big-endian integer.
    pub fn as_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    /// The digest as a big-endian integer reduced modulo `m`.
    pub fn reduced(&self, m: &BigUint) -> BigUint {
        self.as_biguint() % m
    }
}

impl std::fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl std::fmt::Display for Digest32 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl Serialize for Digest32 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest32 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Digest32::from_hex(&s).ok_or_else(|| serde::de::Error::custom("bad digest hex"))
    }
}

/// SHA-256 over a canonical length-prefixed encoding of the parts.
/// The prefixing removes concatenation ambiguity between fields.
pub fn hash_parts(parts: &[&[u8]]) -> Digest32 {
    let mut h = Sha256::new();
    h.update(b"chainlab.hash.v1");
    h.update((parts.len() as u64).to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    Digest32(h.finalize().into())
}

/// Commitment to an opaque message under a nonce: `hash(message, nonce)`.
pub fn commit_bytes(message: &[u8], nonce: &[u8]) -> Digest32 {
    hash_parts(&[b"commit", message, nonce])
}

/// Commitment to an integer value (canonical big-endian encoding).
pub fn commit_value(value: u64, nonce: &[u8]) -> Digest32 {
    commit_bytes(&value.to_be_bytes(), nonce)
}

/// True iff `hash(message, nonce)` recomputes to `c`.
pub fn commit_open(c: &Digest32, message: &[u8], nonce: &[u8]) -> bool {
    commit_bytes(message, nonce) == *c
}

/// True iff `c` commits to the integer `value` under `nonce`.
pub fn commit_open_value(c: &Digest32, value: u64, nonce: &[u8]) -> bool {
    commit_value(value, nonce) == *c
}

/// Hash of an RSA public key `(N, e)`, the quantity a signer certifies when
/// delegating. Encoded length-prefixed big-endian before hashing.
pub fn hash_pubkey(modulus: &BigUint, exponent: &BigUint) -> Digest32 {
    hash_parts(&[b"pubkey", &modulus.to_bytes_be(), &exponent.to_bytes_be()])
}

/// Keyed pseudo-random value: `hash(seed_digest, nonce)` as an integer.
/// This is the `rand` the decoy-bid equation is built on.
pub fn prf_value(seed: &Digest32, nonce: &[u8]) -> BigUint {
    hash_parts(&[b"prf", &seed.0, nonce]).as_biguint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CryptoError {
    /// The blinding factor shares a factor with the modulus.
    #[error("blinding factor is not a unit modulo N")]
    NotAUnit,
    /// Input outside `[0, N)`.
    #[error("value out of range for the modulus")]
    OutOfRange,
}

/// RSA public half: modulus `N` and verification exponent `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaPublicKey {
    pub modulus: BigUint,
    pub exponent: BigUint,
}

/// A full RSA key pair. Invariant: `e * d = 1 (mod lambda(N))`, so
/// `(x^e)^d = x (mod N)` for every `x`.
#[derive(Debug, Clone)]
pub struct RsaKeyPair {
    pub public: RsaPublicKey,
    pub private_exponent: BigUint,
}

impl RsaKeyPair {
    /// Generate a key pair with a modulus of roughly `bits` bits,
    /// deterministically from the given stream. `bits` must be at least 16.
    pub fn generate(bits: u32, rng: &mut DetRng) -> Self {
        assert!(bits >= 16, "modulus below 16 bits");
        let p_bits = bits / 2;
        let q_bits = bits - p_bits;
        loop {
            let p = gen_prime(p_bits, rng);
            let q = gen_prime(q_bits, rng);
            if p == q {
                continue;
            }
            if let Some(kp) = Self::from_parts(&p, &q) {
                return kp;
            }
        }
    }

    /// Build a key pair from explicit small primes, picking the smallest
    /// workable public exponent at least `e_min`. Returns `None` when the
    /// inputs are not distinct odd primes or no exponent fits.
    pub fn from_primes(p: u64, q: u64, e: u64) -> Option<Self> {
        let (p, q) = (BigUint::from(p), BigUint::from(q));
        if p == q || !is_probable_prime(&p) || !is_probable_prime(&q) {
            return None;
        }
        let lambda = carmichael(&p, &q);
        let e = BigUint::from(e);
        let d = modinv(&e, &lambda)?;
        Some(RsaKeyPair {
            public: RsaPublicKey { modulus: p * q, exponent: e },
            private_exponent: d,
        })
    }

    fn from_parts(p: &BigUint, q: &BigUint) -> Option<Self> {
        let lambda = carmichael(p, q);
        // Standard exponent first, smaller Fermat primes as fallback for
        // tiny moduli where 65537 may divide lambda.
        for e in [65537u64, 257, 17, 5, 3] {
            let e = BigUint::from(e);
            if let Some(d) = modinv(&e, &lambda) {
                return Some(RsaKeyPair {
                    public: RsaPublicKey { modulus: p * q, exponent: e },
                    private_exponent: d,
                });
            }
        }
        None
    }

    /// Sign `x` as `x^d mod N`. Errors when `x >= N`.
    pub fn sign(&self, x: &BigUint) -> Result<BigUint, CryptoError> {
        if x >= &self.public.modulus {
            return Err(CryptoError::OutOfRange);
        }
        Ok(x.modpow(&self.private_exponent, &self.public.modulus))
    }
}

/// Blind a hash for signing: `h * r^e mod N`.
pub fn blind(h: &BigUint, r: &BigUint, pk: &RsaPublicKey) -> Result<BigUint, CryptoError> {
    if r.gcd(&pk.modulus) != BigUint::one() {
        return Err(CryptoError::NotAUnit);
    }
    Ok(h * r.modpow(&pk.exponent, &pk.modulus) % &pk.modulus)
}

/// Strip the blinding factor from a blind signature: `s_blinded * r^-1 mod N`.
pub fn unblind(s_blinded: &BigUint, r: &BigUint, modulus: &BigUint) -> Result<BigUint, CryptoError> {
    let r_inv = modinv(r, modulus).ok_or(CryptoError::NotAUnit)?;
    Ok(s_blinded * r_inv % modulus)
}

/// True iff `s^e = h (mod N)`.
pub fn verify(h: &BigUint, s: &BigUint, pk: &RsaPublicKey) -> bool {
    s.modpow(&pk.exponent, &pk.modulus) == h % &pk.modulus
}

/// Draw a uniformly random unit modulo `modulus` (used as a blinding factor).
pub fn random_unit(modulus: &BigUint, rng: &mut DetRng) -> BigUint {
    loop {
        let r = rng.biguint_below(modulus);
        if !r.is_zero() && r.gcd(modulus) == BigUint::one() {
            return r;
        }
    }
}

/// Modular inverse via the extended Euclid algorithm, `None` when
/// `gcd(a, m) != 1`.
pub fn modinv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if ext.gcd != BigInt::one() {
        return None;
    }
    let inv = ((ext.x % &m_int) + &m_int) % &m_int;
    inv.to_biguint()
}

fn carmichael(p: &BigUint, q: &BigUint) -> BigUint {
    let p1 = p - 1u32;
    let q1 = q - 1u32;
    &p1 * &q1 / p1.gcd(&q1)
}

/// Deterministic Miller-Rabin with a fixed witness set. Exact for every
/// modulus size exercised in tests (< 3.3 * 10^24), and deterministic
/// regardless.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let sm = BigUint::from(small);
        if n == &sm {
            return true;
        }
        if (n % sm).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gen_prime(bits: u32, rng: &mut DetRng) -> BigUint {
    assert!(bits >= 8, "prime below 8 bits");
    loop {
        let mut candidate = rng.biguint_below(&(BigUint::one() << bits));
        // Force the top two bits so p*q has full length, and make it odd.
        candidate |= BigUint::one() << (bits - 1);
        candidate |= BigUint::one() << (bits - 2);
        candidate |= BigUint::one();
        if is_probable_prime(&candidate) {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook_pair() -> RsaKeyPair {
        RsaKeyPair::from_primes(61, 53, 17).unwrap()
    }

    #[test]
    fn textbook_key_matches_brute_force_inverse() {
        let kp = textbook_pair();
        assert_eq!(kp.public.modulus, BigUint::from(3233u32));
        // Independent oracle: search the exponent satisfying e*d = 1 mod lambda.
        let lambda = 780u64;
        let d_oracle = (1..lambda).find(|d| (17 * d) % lambda == 1).unwrap();
        assert_eq!(d_oracle, 413);
        assert_eq!(kp.private_exponent, BigUint::from(d_oracle));
    }

    #[test]
    fn keygen_roundtrips_random_values() {
        let mut rng = DetRng::from_seed(1);
        let kp = RsaKeyPair::generate(16, &mut rng);
        let mut draws = DetRng::from_seed(2);
        for _ in 0..100 {
            let x = draws.biguint_below(&kp.public.modulus);
            let c = x.modpow(&kp.public.exponent, &kp.public.modulus);
            let back = c.modpow(&kp.private_exponent, &kp.public.modulus);
            assert_eq!(back, x);
        }
    }

    #[test]
    fn keygen_is_deterministic() {
        let a = RsaKeyPair::generate(32, &mut DetRng::from_seed(9));
        let b = RsaKeyPair::generate(32, &mut DetRng::from_seed(9));
        assert_eq!(a.public, b.public);
        assert_eq!(a.private_exponent, b.private_exponent);
    }

    #[test]
    fn blind_with_unit_one_is_identity() {
        let kp = textbook_pair();
        let h = BigUint::from(5u32);
        assert_eq!(blind(&h, &BigUint::one(), &kp.public).unwrap(), h);
    }

    #[test]
    fn blind_matches_frozen_vector() {
        // 5 * 7^17 mod 3233, computed with an independent big-integer tool.
        let kp = textbook_pair();
        let got = blind(&BigUint::from(5u32), &BigUint::from(7u32), &kp.public).unwrap();
        assert_eq!(got, BigUint::from(2146u32));
    }

    #[test]
    fn blind_rejects_non_units() {
        let kp = textbook_pair();
        let err = blind(&BigUint::from(5u32), &BigUint::from(61u32), &kp.public);
        assert_eq!(err, Err(CryptoError::NotAUnit));
    }

    #[test]
    fn sign_edges() {
        let kp = textbook_pair();
        assert_eq!(kp.sign(&BigUint::zero()).unwrap(), BigUint::zero());
        assert_eq!(kp.sign(&BigUint::one()).unwrap(), BigUint::one());
        assert_eq!(kp.sign(&BigUint::from(3233u32)), Err(CryptoError::OutOfRange));
        let s = kp.sign(&BigUint::from(65u32)).unwrap();
        assert_eq!(s, BigUint::from(588u32));
        assert!(verify(&BigUint::from(65u32), &s, &kp.public));
        assert!(!verify(&BigUint::from(66u32), &s, &kp.public));
    }

    #[test]
    fn degenerate_zero_verifies() {
        let kp = textbook_pair();
        assert!(verify(&BigUint::zero(), &BigUint::zero(), &kp.public));
    }

    #[test]
    fn unblind_with_unit_one_is_identity() {
        let kp = textbook_pair();
        let s = BigUint::from(588u32);
        assert_eq!(unblind(&s, &BigUint::one(), &kp.public.modulus).unwrap(), s);
    }

    #[test]
    fn full_blind_sign_unblind_chain() {
        let mut rng = DetRng::from_seed(42);
        let kp = RsaKeyPair::generate(32, &mut rng);
        for _ in 0..100 {
            let h = rng.biguint_below(&kp.public.modulus);
            let r = random_unit(&kp.public.modulus, &mut rng);
            let blinded = blind(&h, &r, &kp.public).unwrap();
            let s_blinded = kp.sign(&blinded).unwrap();
            let s = unblind(&s_blinded, &r, &kp.public.modulus).unwrap();
            assert!(verify(&h, &s, &kp.public));
            // and it equals the direct signature on h
            assert_eq!(s, kp.sign(&h).unwrap());
        }
    }

    #[test]
    fn unblind_with_wrong_factor_fails_verification() {
        let mut rng = DetRng::from_seed(43);
        let kp = RsaKeyPair::generate(32, &mut rng);
        let h = rng.biguint_below(&kp.public.modulus);
        let r = random_unit(&kp.public.modulus, &mut rng);
        let wrong = loop {
            let w = random_unit(&kp.public.modulus, &mut rng);
            if w != r {
                break w;
            }
        };
        let s_blinded = kp.sign(&blind(&h, &r, &kp.public).unwrap()).unwrap();
        let s_bad = unblind(&s_blinded, &wrong, &kp.public.modulus).unwrap();
        assert!(!verify(&h, &s_bad, &kp.public));
    }

    #[test]
    fn blinding_map_is_a_bijection_on_units() {
        // For fixed h, r -> h * r^e is injective over the unit group.
        let kp = textbook_pair();
        let n = 3233u64;
        let h = BigUint::from(5u32);
        let mut seen = std::collections::BTreeSet::new();
        let mut units = 0u64;
        for r in 1..n {
            let r = BigUint::from(r);
            if r.gcd(&kp.public.modulus) != BigUint::one() {
                continue;
            }
            units += 1;
            seen.insert(blind(&h, &r, &kp.public).unwrap());
        }
        assert_eq!(seen.len() as u64, units);
    }

    #[test]
    fn signatures_on_units_are_unique() {
        // Over a small modulus: for each unit h there is exactly one s with
        // s^e = h, because x -> x^e is a bijection on the unit group.
        let kp = RsaKeyPair::from_primes(11, 13, 7).unwrap();
        let n = 143u64;
        let mut image_counts = std::collections::BTreeMap::new();
        for s in 1..n {
            let s = BigUint::from(s);
            if s.gcd(&kp.public.modulus) != BigUint::one() {
                continue;
            }
            let h = s.modpow(&kp.public.exponent, &kp.public.modulus);
            *image_counts.entry(h).or_insert(0u32) += 1;
        }
        assert!(image_counts.values().all(|&c| c == 1));
    }

    #[test]
    fn commitments_open_and_reject() {
        let c = commit_bytes(b"yes", b"nonce-1");
        assert!(commit_open(&c, b"yes", b"nonce-1"));
        assert!(!commit_open(&c, b"yes", b"nonce-2"));
        assert!(!commit_open(&c, b"no", b"nonce-1"));
    }

    #[test]
    fn commitments_have_no_collisions_at_scale() {
        let mut rng = DetRng::from_seed(77);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..100_000 {
            let v = rng.next_bytes();
            let x = rng.next_bytes();
            assert!(seen.insert(commit_bytes(&v, &x)), "collision found");
        }
    }

    #[test]
    fn pubkey_hash_separates_fields() {
        let a = hash_pubkey(&BigUint::from(0x0102u32), &BigUint::from(0x03u32));
        let b = hash_pubkey(&BigUint::from(0x01u32), &BigUint::from(0x0203u32));
        assert_ne!(a, b);
    }
}
