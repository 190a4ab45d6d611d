//! Reference implementations used to cross-check the main modules.
//!
//! Everything here favors obviousness over speed: plain vectors, quadratic
//! dynamic programming, exhaustive search. Differential tests drive the fast
//! structures and these oracles with identical operation streams and demand
//! identical answers, including errors.

use crate::error::DdtError;
use crate::modsum::Pred;

// ---------------------------------------------------------------------------
// Naive dynamic string
// ---------------------------------------------------------------------------

/// `Vec<u8>` mirror of the persistent string ops, with matching error cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveString(pub Vec<u8>);

impl NaiveString {
    pub fn new(symbol: u8) -> Self {
        NaiveString(vec![symbol])
    }

    pub fn from_symbols(symbols: &[u8]) -> Self {
        NaiveString(symbols.to_vec())
    }

    pub fn len(&self) -> u64 {
        self.0.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn equal(&self, other: &NaiveString) -> bool {
        self.0 == other.0
    }

    pub fn lcp(&self, other: &NaiveString) -> u64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count() as u64
    }

    pub fn get(&self, index: u64) -> Result<u8, DdtError> {
        self.0
            .get(index as usize)
            .copied()
            .ok_or(DdtError::IndexOutOfRange {
                index,
                len: self.len(),
            })
    }

    pub fn set(&self, index: u64, symbol: u8) -> Result<NaiveString, DdtError> {
        if index >= self.len() {
            return Err(DdtError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let mut next = self.0.clone();
        next[index as usize] = symbol;
        Ok(NaiveString(next))
    }

    pub fn split(&self, index: u64) -> Result<(NaiveString, NaiveString), DdtError> {
        if index == 0 || index == self.len() {
            return Err(DdtError::SplitAtBoundary {
                index,
                len: self.len(),
            });
        }
        if index > self.len() {
            return Err(DdtError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let (a, b) = self.0.split_at(index as usize);
        Ok((NaiveString(a.to_vec()), NaiveString(b.to_vec())))
    }

    pub fn concatenate(&self, other: &NaiveString) -> NaiveString {
        let mut joined = self.0.clone();
        joined.extend_from_slice(&other.0);
        NaiveString(joined)
    }

    /// Right rotation: the last `k` symbols move to the front.
    pub fn rotate(&self, k: u64) -> Result<NaiveString, DdtError> {
        if k >= self.len() {
            return Err(DdtError::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        let mut next = self.0.clone();
        next.rotate_right(k as usize);
        Ok(NaiveString(next))
    }

    pub fn to_symbols(&self) -> Vec<u8> {
        self.0.clone()
    }
}

// ---------------------------------------------------------------------------
// Subset-sum reachability oracle
// ---------------------------------------------------------------------------

/// Classic per-copy dynamic program over residues mod `m`.
///
/// `items` pairs each distinct value with its multiplicity; values are taken
/// mod `m`. Returns the reachable-residue table (position 0 reachable via the
/// empty subset) and a predecessor table suitable for witness extraction:
/// each newly reached residue records the value that first reached it.
pub fn dp_subset_sum(m: u64, items: &[(u64, u64)]) -> (Vec<bool>, Vec<Pred>) {
    assert!(m >= 1);
    let m_us = m as usize;
    let mut reachable = vec![false; m_us];
    let mut pred = vec![Pred::Unset; m_us];
    reachable[0] = true;
    pred[0] = Pred::Origin;

    for &(value, multiplicity) in items {
        let s = value % m;
        if s == 0 {
            continue;
        }
        // Copies beyond m can never reach anything new.
        for _ in 0..multiplicity.min(m) {
            let snapshot = reachable.clone();
            let mut grew = false;
            for t in 0..m_us {
                let from = (t + m_us - s as usize) % m_us;
                if snapshot[from] && !reachable[t] {
                    reachable[t] = true;
                    pred[t] = Pred::Value(s);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
    }
    (reachable, pred)
}

/// Witness extraction from a predecessor table; mirrors the chain-following
/// rule used by the fast solver. Returns `None` for unreachable targets.
pub fn dp_reconstruct(m: u64, reachable: &[bool], pred: &[Pred], target: u64) -> Option<Vec<u64>> {
    let t0 = (target % m) as usize;
    if !reachable[t0] {
        return None;
    }
    let mut witness = Vec::new();
    let mut t = t0;
    for _ in 0..m {
        match pred[t] {
            Pred::Origin => return Some(witness),
            Pred::Value(s) => {
                witness.push(s);
                t = (t + m as usize - s as usize) % m as usize;
            }
            Pred::Unset => return None,
        }
    }
    None
}

/// Checks a claimed witness against the instance: every claimed value must
/// stay within its multiplicity and the total must hit the target mod `m`.
pub fn verify_subset_sum_witness(
    m: u64,
    items: &[(u64, u64)],
    target: u64,
    witness: &[u64],
) -> bool {
    let mut used: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    for &value in witness {
        *used.entry(value % m).or_insert(0) += 1;
    }
    for (&value, &count) in used.iter() {
        let available = items
            .iter()
            .filter(|(v, _)| v % m == value)
            .map(|(_, mult)| *mult)
            .sum::<u64>();
        if count > available {
            return false;
        }
    }
    let sum: u64 = witness
        .iter()
        .map(|v| v % m)
        .fold(0, |acc, v| (acc + v) % m);
    sum == target % m
}

// ---------------------------------------------------------------------------
// Exhaustive zero-sum subset search
// ---------------------------------------------------------------------------

/// Lexicographically first size-`n` index subset of `elems` (length `2n-1`)
/// whose sum is divisible by `n`. Exhaustive; intended for `n <= 12`.
pub fn exhaustive_egz(n: usize, elems: &[u64]) -> Option<Vec<usize>> {
    assert_eq!(elems.len(), 2 * n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    loop {
        let sum: u64 = indices.iter().map(|&i| elems[i] % n as u64).sum();
        if sum.is_multiple_of(n as u64) {
            return Some(indices);
        }
        // Advance to the next combination in lexicographic order.
        let total = elems.len();
        let mut i = n;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if indices[i] != i + total - n {
                break;
            }
            if i == 0 {
                return None;
            }
        }
        indices[i] += 1;
        for j in i + 1..n {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

/// True when `chosen` is a valid zero-sum certificate for `elems` mod `n`:
/// exactly `n` distinct in-range indices with divisible sum.
pub fn check_egz_certificate(n: usize, elems: &[u64], chosen: &[usize]) -> bool {
    if chosen.len() != n {
        return false;
    }
    let mut seen = vec![false; elems.len()];
    for &i in chosen {
        if i >= elems.len() || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    let sum: u64 = chosen.iter().map(|&i| elems[i] % n as u64).sum();
    sum.is_multiple_of(n as u64)
}

// ---------------------------------------------------------------------------
// Contiguous zero-sum oracle
// ---------------------------------------------------------------------------

/// First contiguous range of `values` summing to 0 mod `modulus`, scanning
/// end positions left to right and preferring the earliest start. Returns
/// inclusive `(start, end)`.
pub fn exhaustive_zero_run(modulus: u64, values: &[u64]) -> Option<(usize, usize)> {
    assert!(modulus >= 1);
    for end in 0..values.len() {
        for start in 0..=end {
            let sum = values[start..=end]
                .iter()
                .fold(0u64, |acc, &v| (acc + v % modulus) % modulus);
            if sum == 0 {
                return Some((start, end));
            }
        }
    }
    None
}
