//! Zero-sum subsets: among any 2n-1 residues mod n, find exactly n whose sum
//! is divisible by n.
//!
//! For prime n the elements are sorted; either some value fills a whole
//! window of n equal entries (sum trivially divisible), or the n-1 nonzero
//! differences between sorted positions i+n and i+1 form a subset-sum
//! instance whose solution says which low elements to swap for high ones.
//! Composite n recurses: group elements by the largest prime factor u into
//! 2(n/u)-1 zero-sum-mod-u batches, then find a zero-sum selection of batch
//! sums mod n/u.
//!
//! Also includes the warm-up fact that any n residues mod n contain a
//! contiguous zero-sum run, found via hashed prefix sums.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::modsum::{self, Instance, SolveStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EgzError {
    #[error("n={n} needs exactly {expected} elements, got {got}")]
    InvalidInput { n: u64, expected: u64, got: u64 },
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
}

/// A multiset of exactly 2n-1 residues mod n. Out-of-range inputs are
/// reduced on ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgzInput {
    n: u64,
    elements: Vec<u64>,
}

impl EgzInput {
    pub fn new(n: u64, elements: Vec<u64>) -> Result<Self, EgzError> {
        assert!(n >= 1);
        let expected = 2 * n - 1;
        if elements.len() as u64 != expected {
            return Err(EgzError::InvalidInput {
                n,
                expected,
                got: elements.len() as u64,
            });
        }
        let elements = elements.into_iter().map(|v| v % n).collect();
        Ok(EgzInput { n, elements })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }
}

/// Exactly n distinct input positions whose values sum to 0 mod n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgzCertificate {
    /// Ascending input indices.
    pub indices: Vec<usize>,
}

pub fn egz(input: &EgzInput, seed: u64) -> Result<EgzCertificate, EgzError> {
    egz_with_stats(input, seed).map(|(cert, _)| cert)
}

/// Same as [`egz`], also reporting the aggregated subset-sum solver stats
/// from every internal round.
pub fn egz_with_stats(
    input: &EgzInput,
    seed: u64,
) -> Result<(EgzCertificate, SolveStats), EgzError> {
    let mut stats = SolveStats::default();
    let mut nonce = 0u64;
    let mut indices = egz_inner(input.n, &input.elements, seed, &mut nonce, &mut stats);
    indices.sort_unstable();
    Ok((EgzCertificate { indices }, stats))
}

/// Prime-only entry point, exposed for direct testing of the sorted-window
/// machinery. `elements` are taken mod p.
pub fn egz_prime(p: u64, elements: &[u64], seed: u64) -> Result<EgzCertificate, EgzError> {
    if !is_prime(p) {
        return Err(EgzError::NotPrime { p });
    }
    let expected = 2 * p - 1;
    if elements.len() as u64 != expected {
        return Err(EgzError::InvalidInput {
            n: p,
            expected,
            got: elements.len() as u64,
        });
    }
    let reduced: Vec<u64> = elements.iter().map(|&v| v % p).collect();
    let mut stats = SolveStats::default();
    let mut nonce = 0u64;
    let mut indices = egz_prime_inner(p, &reduced, seed, &mut nonce, &mut stats);
    indices.sort_unstable();
    Ok(EgzCertificate { indices })
}

fn egz_inner(
    n: u64,
    elements: &[u64],
    seed: u64,
    nonce: &mut u64,
    stats: &mut SolveStats,
) -> Vec<usize> {
    debug_assert_eq!(elements.len() as u64, 2 * n - 1);
    if n == 1 {
        return vec![0];
    }
    if is_prime(n) {
        return egz_prime_inner(n, elements, seed, nonce, stats);
    }

    let u = largest_prime_factor(n);
    let v = n / u;
    let rounds = 2 * v - 1;
    // Unused input positions in input order; each round consumes u of the
    // first 2u-1 and returns the rest to the front, so a round costs O(u).
    let mut pool: VecDeque<usize> = (0..elements.len()).collect();
    let mut round_members: Vec<Vec<usize>> = Vec::with_capacity(rounds as usize);
    let mut batch_sums: Vec<u64> = Vec::with_capacity(rounds as usize);
    let mut window = Vec::with_capacity((2 * u - 1) as usize);

    for _ in 0..rounds {
        // Window: the first 2u-1 still-unused elements in input order.
        window.clear();
        for _ in 0..2 * u - 1 {
            window.push(pool.pop_front().expect("pool holds at least n-1 spares"));
        }
        let window_values: Vec<u64> = window.iter().map(|&i| elements[i] % u).collect();
        let local = egz_prime_inner(u, &window_values, seed, nonce, stats);
        debug_assert_eq!(local.len() as u64, u);

        let mut in_local = vec![false; window.len()];
        for &j in &local {
            debug_assert!(!in_local[j], "selection repeats a window slot");
            in_local[j] = true;
        }
        for slot in (0..window.len()).rev() {
            if !in_local[slot] {
                pool.push_front(window[slot]);
            }
        }

        let members: Vec<usize> = local.iter().map(|&j| window[j]).collect();
        let sum: u64 = members.iter().map(|&i| elements[i]).sum();
        assert!(
            sum.is_multiple_of(u),
            "batch sum must be divisible by the prime"
        );
        batch_sums.push((sum / u) % v);
        round_members.push(members);
    }

    // Pick v of the 2v-1 batches whose scaled sums cancel mod v.
    let chosen_rounds = egz_inner(v, &batch_sums, seed, nonce, stats);
    debug_assert_eq!(chosen_rounds.len() as u64, v);

    let mut result = Vec::with_capacity(n as usize);
    for r in chosen_rounds {
        result.extend_from_slice(&round_members[r]);
    }
    debug_assert_eq!(result.len() as u64, n);
    result
}

fn egz_prime_inner(
    p: u64,
    values: &[u64],
    seed: u64,
    nonce: &mut u64,
    stats: &mut SolveStats,
) -> Vec<usize> {
    debug_assert_eq!(values.len() as u64, 2 * p - 1);
    debug_assert!(values.iter().all(|&v| v < p));
    if p == 1 {
        return vec![0];
    }
    let p_us = p as usize;

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]); // stable: ties keep input order
    let a = |j: usize| values[order[j]];

    // A window of p equal sorted values sums to a multiple of p directly.
    for start in 0..p_us {
        if a(start) == a(start + p_us - 1) {
            return order[start..start + p_us].to_vec();
        }
    }
    assert!(
        p > 2,
        "three residues from two classes must contain an equal pair"
    );

    // No p equal values: the p-1 differences below are all nonzero, and a
    // subset of them cancels the base-window sum mod p.
    let c = (0..p_us).map(a).sum::<u64>() % p;
    let b: Vec<u64> = (0..p_us - 1)
        .map(|j| {
            let diff = (a(j + p_us) + p - a(j + 1)) % p;
            assert!(diff != 0, "difference spans an equal window");
            diff
        })
        .collect();
    let inst = Instance::from_values(p, &b);
    let target = (p - c) % p;

    *nonce += 1;
    let res = modsum::solve_all(&inst, mix(seed, *nonce))
        .expect("subset-sum epochs cannot be exhausted at full width");
    accumulate(stats, &res.stats);
    let witness = modsum::reconstruct(&res, target)
        .expect("predecessor chain is acyclic")
        .expect("every residue is reachable from p-1 nonzero differences");

    // Assign witness counts to concrete difference positions, ascending.
    let mut swaps: Vec<usize> = Vec::with_capacity(witness.total_count() as usize);
    let mut taken = vec![false; b.len()];
    for &(value, count) in &witness.parts {
        let mut need = count;
        for (j, &bv) in b.iter().enumerate() {
            if need == 0 {
                break;
            }
            if !taken[j] && bv == value {
                taken[j] = true;
                swaps.push(j);
                need -= 1;
            }
        }
        assert_eq!(need, 0, "witness exceeds available difference positions");
    }

    // Start from the first p sorted values; each chosen difference j trades
    // sorted position j+1 for j+p, adding b[j] to the total.
    let mut in_set = vec![false; values.len()];
    for slot in in_set.iter_mut().take(p_us) {
        *slot = true;
    }
    for &j in &swaps {
        debug_assert!(in_set[j + 1] && !in_set[j + p_us]);
        in_set[j + 1] = false;
        in_set[j + p_us] = true;
    }

    let chosen: Vec<usize> = (0..values.len())
        .filter(|&j| in_set[j])
        .map(|j| order[j])
        .collect();
    debug_assert_eq!(chosen.len(), p_us);
    debug_assert_eq!(
        chosen.iter().map(|&i| values[i]).sum::<u64>() % p,
        0,
        "selected values must cancel mod p"
    );
    chosen
}

fn accumulate(total: &mut SolveStats, part: &SolveStats) {
    total.rotations += part.rotations;
    total.bit_fixes += part.bit_fixes;
    total.skipped_copies += part.skipped_copies;
    total.restarts += part.restarts;
    total.max_height = total.max_height.max(part.max_height);
    total.nodes_built += part.nodes_built;
    total.leaves_built += part.leaves_built;
}

fn mix(seed: u64, nonce: u64) -> u64 {
    let mut x = seed ^ nonce.wrapping_mul(0x2545_f491_4f6c_dd1d);
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// True iff exactly n distinct in-range indices whose values cancel mod n.
pub fn verify_egz(input: &EgzInput, cert: &EgzCertificate) -> bool {
    let n = input.n;
    if cert.indices.len() as u64 != n {
        return false;
    }
    let mut seen = vec![false; input.elements.len()];
    let mut sum = 0u64;
    for &i in &cert.indices {
        if i >= input.elements.len() || seen[i] {
            return false;
        }
        seen[i] = true;
        sum = (sum + input.elements[i]) % n;
    }
    sum == 0
}

// ===========================================================================
// Arithmetic helpers
// ===========================================================================

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Largest prime dividing n, by trial division.
pub fn largest_prime_factor(n: u64) -> u64 {
    assert!(n >= 2);
    let mut rest = n;
    let mut largest = 1;
    let mut d = 2u64;
    while d * d <= rest {
        while rest.is_multiple_of(d) {
            largest = d;
            rest /= d;
        }
        d += 1;
    }
    if rest > 1 {
        largest = rest;
    }
    largest
}

/// First contiguous run of `elements` (length exactly n) summing to 0 mod n,
/// as an inclusive index range. Exists for every input: the n+1 prefix sums
/// cannot all be distinct mod n.
pub fn contiguous_zero_sum(n: u64, elements: &[u64]) -> Result<(usize, usize), EgzError> {
    assert!(n >= 1);
    if elements.len() as u64 != n {
        return Err(EgzError::InvalidInput {
            n,
            expected: n,
            got: elements.len() as u64,
        });
    }
    let mut first_at: HashMap<u64, usize> = HashMap::new();
    first_at.insert(0, 0);
    let mut prefix = 0u64;
    for (i, &v) in elements.iter().enumerate() {
        prefix = (prefix + v % n) % n;
        match first_at.get(&prefix) {
            Some(&start) => return Ok((start, i)),
            None => {
                first_at.insert(prefix, i + 1);
            }
        }
    }
    unreachable!("n+1 prefix sums over n residues must repeat");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn input(n: u64, elems: &[u64]) -> EgzInput {
        EgzInput::new(n, elems.to_vec()).unwrap()
    }

    #[test]
    fn trivial_and_small_cases() {
        let one = input(1, &[5]);
        let cert = egz(&one, 0).unwrap();
        assert_eq!(cert.indices, vec![0]);
        assert!(verify_egz(&one, &cert));

        let two = input(2, &[0, 1, 1]);
        let cert = egz(&two, 0).unwrap();
        assert_eq!(cert.indices, vec![1, 2]);
        assert!(verify_egz(&two, &cert));

        let three = input(3, &[1, 1, 1, 2, 2]);
        let cert = egz(&three, 0).unwrap();
        assert_eq!(cert.indices, vec![0, 1, 2]);
        assert!(verify_egz(&three, &cert));
    }

    #[test]
    fn equal_run_branch() {
        let cert = egz_prime(3, &[0, 0, 0, 1, 2], 0).unwrap();
        assert_eq!(cert.indices, vec![0, 1, 2]);
    }

    #[test]
    fn composite_case() {
        let four = input(4, &[1, 1, 1, 0, 0, 0, 3]);
        let cert = egz(&four, 42).unwrap();
        assert!(verify_egz(&four, &cert));
        assert_eq!(cert.indices.len(), 4);
    }

    #[test]
    fn difference_machinery_without_equal_runs() {
        // Max run length 2 < 5 forces the subset-sum path.
        let elems = [0, 0, 1, 1, 2, 2, 3, 3, 4];
        let inp = input(5, &elems);
        let cert = egz(&inp, 7).unwrap();
        assert!(verify_egz(&inp, &cert));
    }

    #[test]
    fn wrong_length_rejected() {
        assert_eq!(
            EgzInput::new(3, vec![1, 2, 3]).unwrap_err(),
            EgzError::InvalidInput {
                n: 3,
                expected: 5,
                got: 3
            }
        );
        assert!(matches!(
            egz_prime(4, &[0; 7], 0),
            Err(EgzError::NotPrime { p: 4 })
        ));
    }

    #[test]
    fn random_primes_verify() {
        let mut state = 0xe62_14e7u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for p in [2u64, 3, 5, 7, 11, 13] {
            for round in 0..25 {
                let elems: Vec<u64> = (0..2 * p - 1).map(|_| next() % p).collect();
                let inp = input(p, &elems);
                let cert = egz(&inp, round).unwrap();
                assert!(verify_egz(&inp, &cert), "p={p} elems={elems:?}");
            }
        }
    }

    #[test]
    fn all_n_up_to_twelve_match_oracle_feasibility() {
        let mut state = 0xabcd_1234u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for n in 1u64..=12 {
            for round in 0..20 {
                let elems: Vec<u64> = (0..2 * n - 1).map(|_| next() % n).collect();
                let inp = input(n, &elems);
                let cert = egz(&inp, round).unwrap();
                assert!(verify_egz(&inp, &cert), "n={n} elems={elems:?}");
                assert!(
                    oracle::exhaustive_egz(n as usize, &elems).is_some(),
                    "oracle says infeasible, contradicting the theorem"
                );
            }
        }
    }

    #[test]
    fn factorization_helpers() {
        assert_eq!(largest_prime_factor(12), 3);
        assert_eq!(largest_prime_factor(97), 97);
        assert_eq!(largest_prime_factor(2), 2);
        assert_eq!(largest_prime_factor(1024), 2);
        // Against naive full factorization.
        for n in 2u64..=100_000 {
            let mut rest = n;
            let mut want = 1;
            let mut d = 2;
            while d * d <= rest {
                while rest % d == 0 {
                    want = d;
                    rest /= d;
                }
                d += 1;
            }
            if rest > 1 {
                want = rest;
            }
            assert_eq!(largest_prime_factor(n), want, "n={n}");
        }
    }

    #[test]
    fn zero_run_examples() {
        assert_eq!(contiguous_zero_sum(4, &[0, 1, 2, 3]).unwrap(), (0, 0));
        assert_eq!(contiguous_zero_sum(4, &[1, 2, 1, 3]).unwrap(), (0, 2));
        let err = contiguous_zero_sum(4, &[1, 2]).unwrap_err();
        assert!(matches!(err, EgzError::InvalidInput { .. }));
    }

    #[test]
    fn zero_run_matches_oracle() {
        let mut state = 0x77_1177u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..1000 {
            let n = next() % 24 + 1;
            let elems: Vec<u64> = (0..n).map(|_| next() % n).collect();
            let got = contiguous_zero_sum(n, &elems).unwrap();
            let want = oracle::exhaustive_zero_run(n, &elems).unwrap();
            // Same earliest end; the range must validate either way.
            assert_eq!(got.1, want.1, "n={n} elems={elems:?}");
            let sum: u64 = elems[got.0..=got.1].iter().sum();
            assert_eq!(sum % n, 0);
        }
    }

    #[test]
    fn verify_rejects_bad_certificates() {
        let inp = input(3, &[1, 1, 1, 2, 2]);
        assert!(!verify_egz(
            &inp,
            &EgzCertificate {
                indices: vec![0, 1]
            }
        ));
        assert!(!verify_egz(
            &inp,
            &EgzCertificate {
                indices: vec![0, 1, 3]
            }
        ));
        assert!(!verify_egz(
            &inp,
            &EgzCertificate {
                indices: vec![0, 0, 1]
            }
        ));
        assert!(!verify_egz(
            &inp,
            &EgzCertificate {
                indices: vec![0, 1, 9]
            }
        ));
    }
}
