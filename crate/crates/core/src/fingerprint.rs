//! Seeded fingerprints over canonical node preimages.
//!
//! Every tree node is identified by a fingerprint: a seeded hash of an
//! unambiguous byte serialization of the node's content. Equal fingerprints
//! are treated as equal content everywhere else in the crate, which is sound
//! only because every fingerprint ever produced is registered here together
//! with its preimage; a second preimage arriving at an occupied slot is
//! reported as a collision and kills the epoch instead of corrupting answers.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::error::DdtError;

/// Seed for one fingerprinting epoch. Distinct seeds give unrelated hash
/// functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashSeed(u64);

impl HashSeed {
    pub fn new(value: u64) -> Self {
        HashSeed(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

/// 64-bit node identity under one seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(u64);

impl Fingerprint {
    pub fn from_raw(value: u64) -> Self {
        Fingerprint(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl std::fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "fp:{:016x}", self.0)
    }
}

/// Node content as hashed: a leaf symbol, a run of equal children, or a run
/// of strictly increasing children. Children appear only as fingerprints, so
/// a preimage pins down one tree level at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preimage {
    Leaf {
        symbol: u8,
    },
    Duplicate {
        level: u32,
        multiplicity: u64,
        child: Fingerprint,
    },
    Increasing {
        level: u32,
        children: Box<[Fingerprint]>,
    },
}

const TAG_LEAF: u8 = 0x4C;
const TAG_DUPLICATE: u8 = 0x44;
const TAG_INCREASING: u8 = 0x49;

/// Canonical byte layouts: a one-byte tag followed by fixed-width
/// little-endian fields. Prefix-free per tag, so distinct preimages always
/// serialize to distinct byte strings. These free functions exist so callers
/// holding the fields loose can serialize without building a `Preimage`.
pub fn serialize_leaf_into(out: &mut Vec<u8>, symbol: u8) {
    out.push(TAG_LEAF);
    out.push(symbol);
}

pub fn serialize_duplicate_into(
    out: &mut Vec<u8>,
    level: u32,
    multiplicity: u64,
    child: Fingerprint,
) {
    out.push(TAG_DUPLICATE);
    out.extend_from_slice(&u64::from(level).to_le_bytes());
    out.extend_from_slice(&multiplicity.to_le_bytes());
    out.extend_from_slice(&child.value().to_le_bytes());
}

pub fn serialize_increasing_into(out: &mut Vec<u8>, level: u32, children: &[Fingerprint]) {
    out.push(TAG_INCREASING);
    out.extend_from_slice(&u64::from(level).to_le_bytes());
    out.extend_from_slice(&(children.len() as u64).to_le_bytes());
    for child in children {
        out.extend_from_slice(&child.value().to_le_bytes());
    }
}

impl Preimage {
    pub fn serialize_into(&self, out: &mut Vec<u8>) {
        match self {
            Preimage::Leaf { symbol } => serialize_leaf_into(out, *symbol),
            Preimage::Duplicate {
                level,
                multiplicity,
                child,
            } => serialize_duplicate_into(out, *level, *multiplicity, *child),
            Preimage::Increasing { level, children } => {
                serialize_increasing_into(out, *level, children)
            }
        }
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        self.serialize_into(&mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// Seeded hash
// ---------------------------------------------------------------------------

/// Bijective 64-bit finalizer; breaks up any remaining input structure.
#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    x
}

const STATE_INIT: u64 = 0x9e37_79b9_7f4a_7c15;
const CHUNK_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// Full-width seeded hash of a byte string: absorb 8-byte chunks (last chunk
/// zero-padded), then the length, mixing after each absorption.
pub fn hash_bytes(seed: HashSeed, bytes: &[u8]) -> u64 {
    let mut state = mix(seed.0 ^ STATE_INIT);
    let mut chunks = bytes.chunks_exact(8);
    for chunk in &mut chunks {
        let word = u64::from_le_bytes(chunk.try_into().unwrap());
        state = mix(state ^ word).wrapping_add(CHUNK_SALT);
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        let mut buf = [0u8; 8];
        buf[..rest.len()].copy_from_slice(rest);
        state = mix(state ^ u64::from_le_bytes(buf)).wrapping_add(CHUNK_SALT);
    }
    mix(state ^ (bytes.len() as u64))
}

/// Hashes a preimage at full 64-bit width. Table users normally go through
/// [`FingerprintTable::fingerprint`], which also applies the width mask.
pub fn hash_preimage(seed: HashSeed, preimage: &Preimage) -> u64 {
    let mut buf = Vec::with_capacity(32);
    preimage.serialize_into(&mut buf);
    hash_bytes(seed, &buf)
}

// ---------------------------------------------------------------------------
// Fingerprint-keyed maps
// ---------------------------------------------------------------------------

/// Pass-through hasher for maps keyed by fingerprints, which are already
/// uniformly distributed.
#[derive(Default)]
pub struct FpHasher(u64);

impl Hasher for FpHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, _bytes: &[u8]) {
        unreachable!("fingerprint keys hash via write_u64");
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = i;
    }
}

pub type FpBuildHasher = BuildHasherDefault<FpHasher>;

/// `HashMap` keyed by fingerprints without rehashing.
pub type FpMap<V> = HashMap<Fingerprint, V, FpBuildHasher>;

// ---------------------------------------------------------------------------
// Fingerprint table
// ---------------------------------------------------------------------------

/// Grow-only map from fingerprint to the unique preimage it stands for.
///
/// The table never evicts: soundness of fingerprint equality depends on
/// seeing every preimage that was ever hashed in this epoch. Memory is
/// therefore bounded by total construction work, not by live trees.
pub struct FingerprintTable {
    seed: HashSeed,
    mask: u64,
    entries: FpMap<Preimage>,
}

impl FingerprintTable {
    /// Full 64-bit fingerprints.
    pub fn new(seed: HashSeed) -> Self {
        Self::with_fingerprint_bits(seed, 64)
    }

    /// Truncates fingerprints to the low `bits` bits. Narrow widths exist to
    /// make collisions cheap to provoke in tests; real use keeps 64.
    pub fn with_fingerprint_bits(seed: HashSeed, bits: u32) -> Self {
        assert!((1..=64).contains(&bits), "fingerprint width must be 1..=64");
        let mask = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        FingerprintTable {
            seed,
            mask,
            entries: FpMap::default(),
        }
    }

    pub fn seed(&self) -> HashSeed {
        self.seed
    }

    /// Seeded, width-masked fingerprint of a preimage.
    pub fn fingerprint(&self, preimage: &Preimage) -> Fingerprint {
        Fingerprint(hash_preimage(self.seed, preimage) & self.mask)
    }

    /// Width-masks an already computed full hash.
    pub fn mask_hash(&self, raw: u64) -> Fingerprint {
        Fingerprint(raw & self.mask)
    }

    /// Records `fingerprint -> preimage`. Returns whether a new entry was
    /// created: re-registering the same pair is a no-op reporting `false`; a
    /// different preimage under an occupied fingerprint reports a collision
    /// and leaves the table unchanged.
    pub fn register(
        &mut self,
        fingerprint: Fingerprint,
        preimage: Preimage,
    ) -> Result<bool, DdtError> {
        match self.entries.get(&fingerprint) {
            None => {
                self.entries.insert(fingerprint, preimage);
                Ok(true)
            }
            Some(existing) if *existing == preimage => Ok(false),
            Some(_) => Err(DdtError::CollisionDetected { fingerprint }),
        }
    }

    /// Allocation-free registration for the construction hot path: the
    /// preimage is only materialized when the slot is vacant; on a hit the
    /// stored preimage is compared field by field.
    pub fn register_leaf(
        &mut self,
        fingerprint: Fingerprint,
        symbol: u8,
    ) -> Result<bool, DdtError> {
        match self.entries.get(&fingerprint) {
            None => {
                self.entries.insert(fingerprint, Preimage::Leaf { symbol });
                Ok(true)
            }
            Some(Preimage::Leaf { symbol: s }) if *s == symbol => Ok(false),
            Some(_) => Err(DdtError::CollisionDetected { fingerprint }),
        }
    }

    pub fn register_duplicate(
        &mut self,
        fingerprint: Fingerprint,
        level: u32,
        multiplicity: u64,
        child: Fingerprint,
    ) -> Result<bool, DdtError> {
        match self.entries.get(&fingerprint) {
            None => {
                self.entries.insert(
                    fingerprint,
                    Preimage::Duplicate {
                        level,
                        multiplicity,
                        child,
                    },
                );
                Ok(true)
            }
            Some(Preimage::Duplicate {
                level: l,
                multiplicity: m,
                child: c,
            }) if *l == level && *m == multiplicity && *c == child => Ok(false),
            Some(_) => Err(DdtError::CollisionDetected { fingerprint }),
        }
    }

    pub fn register_increasing(
        &mut self,
        fingerprint: Fingerprint,
        level: u32,
        children: &[Fingerprint],
    ) -> Result<bool, DdtError> {
        match self.entries.get(&fingerprint) {
            None => {
                self.entries.insert(
                    fingerprint,
                    Preimage::Increasing {
                        level,
                        children: children.into(),
                    },
                );
                Ok(true)
            }
            Some(Preimage::Increasing {
                level: l,
                children: c,
            }) if *l == level && c.as_ref() == children => Ok(false),
            Some(_) => Err(DdtError::CollisionDetected { fingerprint }),
        }
    }

    pub fn lookup(&self, fingerprint: Fingerprint) -> Option<&Preimage> {
        self.entries.get(&fingerprint)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
