//! Sequence coding: a recursive injection from finite sequences of naturals
//! into the naturals, its inverse, the trace function `e`, and the Cantor
//! pairing used to code product ground sets.
//!
//! Two codings are provided. `Coding::Cantor` is the default: the bijection
//! given by `encode(⟨⟩) = 0`, `encode(s⌢k) = pair(encode(s), k) + 1`. Its
//! codes double in bit length with every element, which is fine for desk-size
//! windows but useless for long traces. `Coding::Dense` is a second injection
//! with a fast lane for trace chains of a fixed family of finite-support
//! generators (codes grow quadratically along those chains) and a packed-bits
//! lane (linear bit growth) for everything else; its decoder is partial on
//! non-canonical codes.

use num::bigint::BigUint;
use num::{One, Zero};
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// Arbitrary-size natural number; function values and sequence codes use this.
pub type Nat = BigUint;

pub fn nat(v: u64) -> Nat {
    BigUint::from(v)
}

// ---------------------------------------------------------------------------
// Cantor pairing
// ---------------------------------------------------------------------------

/// Cantor pairing `(a+b)(a+b+1)/2 + b`, a bijection ω×ω → ω.
///
/// The first coordinate is the column when coding product ground sets.
pub fn pair(a: u64, b: u64) -> u64 {
    let s = (a as u128) + (b as u128);
    let v = s * (s + 1) / 2 + (b as u128);
    u64::try_from(v).expect("pair overflow")
}

/// [`pair`] that reports exhaustion of the u64 code space instead of
/// panicking; deeply nested product points can overflow it.
pub fn pair_checked(a: u64, b: u64) -> Option<u64> {
    let s = (a as u128) + (b as u128);
    let v = s * (s + 1) / 2 + (b as u128);
    u64::try_from(v).ok()
}

/// Inverse of [`pair`].
pub fn unpair(n: u64) -> (u64, u64) {
    let m = n as u128;
    let w = ((8 * m + 1).isqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let b = m - t;
    let a = w - b;
    (a as u64, b as u64)
}

pub fn pair_big(a: &Nat, b: &Nat) -> Nat {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

pub fn unpair_big(n: &Nat) -> (Nat, Nat) {
    let w = (&(n * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = n - &t;
    let a = &w - &b;
    (a, b)
}

// ---------------------------------------------------------------------------
// Function prefixes
// ---------------------------------------------------------------------------

/// A finite initial segment `f|N` of a function ω → ω.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FuncPrefix {
    values: Vec<Nat>,
}

impl FuncPrefix {
    pub fn new(values: Vec<Nat>) -> Self {
        FuncPrefix { values }
    }

    pub fn from_u64s(values: &[u64]) -> Self {
        FuncPrefix {
            values: values.iter().map(|&v| nat(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> &Nat {
        &self.values[i]
    }

    pub fn values(&self) -> &[Nat] {
        &self.values
    }

    pub fn push(&mut self, v: Nat) {
        self.values.push(v);
    }

    pub fn prefix(&self, n: usize) -> FuncPrefix {
        FuncPrefix {
            values: self.values[..n].to_vec(),
        }
    }

    /// True when `self` is an initial segment of `other`.
    pub fn is_prefix_of(&self, other: &FuncPrefix) -> bool {
        self.len() <= other.len() && self.values[..] == other.values[..self.len()]
    }

    /// Least index where the two prefixes disagree, within the common length.
    pub fn first_difference(&self, other: &FuncPrefix) -> Option<usize> {
        let n = self.len().min(other.len());
        (0..n).find(|&i| self.values[i] != other.values[i])
    }
}

// ---------------------------------------------------------------------------
// The coding function ♯
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, serde::Serialize, serde::Deserialize)]
pub enum Coding {
    /// Iterated Cantor pairing with +1 shift; a bijection, total decode.
    Cantor,
    /// Chain-lane/packed-bits injection; partial decode on non-canonical codes.
    Dense,
}

impl Default for Coding {
    fn default() -> Self {
        Coding::Cantor
    }
}

impl Coding {
    pub fn encode(&self, s: &[Nat]) -> Nat {
        match self {
            Coding::Cantor => cantor_encode(s),
            Coding::Dense => dense_encode(s),
        }
    }

    pub fn decode(&self, c: &Nat) -> Option<Vec<Nat>> {
        match self {
            Coding::Cantor => Some(cantor_decode(c)),
            Coding::Dense => dense_decode(c),
        }
    }

    /// Length of the decoded sequence, or `None` where decode is absent.
    pub fn decoded_len(&self, c: &Nat) -> Option<usize> {
        match self {
            Coding::Cantor => Some(cantor_decoded_len(c)),
            Coding::Dense => dense_decode(c).map(|s| s.len()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Coding::Cantor => "cantor",
            Coding::Dense => "dense",
        }
    }
}

/// `encode_seq` of the spec: the fixed Cantor recurrence.
pub fn encode_seq(s: &[Nat]) -> Nat {
    cantor_encode(s)
}

/// Left inverse of [`encode_seq`]; total for the Cantor recurrence.
pub fn decode_seq(c: &Nat) -> Option<Vec<Nat>> {
    Some(cantor_decode(c))
}

fn cantor_encode(s: &[Nat]) -> Nat {
    let mut c = Nat::zero();
    for k in s {
        c = pair_big(&c, k) + 1u32;
    }
    c
}

fn cantor_decode(c: &Nat) -> Vec<Nat> {
    let mut out = Vec::new();
    let mut c = c.clone();
    while !c.is_zero() {
        let (a, b) = unpair_big(&(c - 1u32));
        out.push(b);
        c = a;
    }
    out.reverse();
    out
}

fn cantor_decoded_len(c: &Nat) -> usize {
    let mut n = 0usize;
    let mut c = c.clone();
    while !c.is_zero() {
        let (a, _) = unpair_big(&(c - 1u32));
        n += 1;
        c = a;
    }
    n
}

/// The trace `e(f)`: the function `n ↦ ♯(f|n)`, truncated to `f`'s length.
///
/// Its range is the almost-disjointness set attached to `f`.
pub fn e_trace(f: &FuncPrefix, coding: Coding) -> FuncPrefix {
    let mut out = Vec::with_capacity(f.len());
    for n in 0..f.len() {
        out.push(coding.encode(&f.values()[..n]));
    }
    FuncPrefix::new(out)
}

// ---------------------------------------------------------------------------
// Dense coding internals
// ---------------------------------------------------------------------------

const FAM_POSITIONS: u64 = 8;
const FAM_VALUES: u64 = 8; // nonzero values 1..=8
const FAM_SINGLES: u64 = FAM_POSITIONS * FAM_VALUES;
const FAM_PAIRS: u64 = FAM_POSITIONS * (FAM_POSITIONS - 1) / 2;
/// Size of the chain-lane generator family: the zero function, all
/// single-support and all double-support functions with positions < 8 and
/// values 1..=8.
pub const FAMILY_SIZE: u64 = 1 + FAM_SINGLES + FAM_PAIRS * FAM_VALUES * FAM_VALUES;

/// Value of the `idx`-th chain-lane family generator at position `n`.
pub fn family_value(idx: u64, n: u64) -> u64 {
    assert!(idx < FAMILY_SIZE, "family index out of range");
    if idx == 0 {
        return 0;
    }
    if idx <= FAM_SINGLES {
        let k = idx - 1;
        let pos = k / FAM_VALUES;
        let val = k % FAM_VALUES + 1;
        return if n == pos { val } else { 0 };
    }
    let k = idx - 1 - FAM_SINGLES;
    let pair_idx = k / (FAM_VALUES * FAM_VALUES);
    let rest = k % (FAM_VALUES * FAM_VALUES);
    let v0 = rest / FAM_VALUES + 1;
    let v1 = rest % FAM_VALUES + 1;
    let (p0, p1) = pair_index_to_positions(pair_idx);
    if n == p0 {
        v0
    } else if n == p1 {
        v1
    } else {
        0
    }
}

fn pair_index_to_positions(mut k: u64) -> (u64, u64) {
    for p0 in 0..FAM_POSITIONS {
        let span = FAM_POSITIONS - 1 - p0;
        if k < span {
            return (p0, p0 + 1 + k);
        }
        k -= span;
    }
    unreachable!("pair index out of range")
}

/// Family index of the finite-support function with the given (sorted,
/// nonzero) support, if it lies in the family.
fn family_of_support(support: &[(u64, u64)]) -> Option<u64> {
    match support {
        [] => Some(0),
        [(p, v)] => {
            if *p < FAM_POSITIONS && (1..=FAM_VALUES).contains(v) {
                Some(1 + p * FAM_VALUES + (v - 1))
            } else {
                None
            }
        }
        [(p0, v0), (p1, v1)] => {
            if *p0 < *p1
                && *p1 < FAM_POSITIONS
                && (1..=FAM_VALUES).contains(v0)
                && (1..=FAM_VALUES).contains(v1)
            {
                let mut pair_idx = 0;
                for q in 0..*p0 {
                    pair_idx += FAM_POSITIONS - 1 - q;
                }
                pair_idx += p1 - p0 - 1;
                Some(1 + FAM_SINGLES + pair_idx * FAM_VALUES * FAM_VALUES + (v0 - 1) * FAM_VALUES + (v1 - 1))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn chain_cache() -> &'static Mutex<HashMap<u64, Vec<Nat>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<Nat>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `⟨♯(g|0), …, ♯(g|n−1)⟩` for the `idx`-th family generator, memoized.
pub fn family_chain(idx: u64, n: usize) -> Vec<Nat> {
    {
        let cache = chain_cache().lock().unwrap();
        if let Some(entries) = cache.get(&idx) {
            if entries.len() >= n {
                return entries[..n].to_vec();
            }
        }
    }
    let mut entries = {
        let cache = chain_cache().lock().unwrap();
        cache.get(&idx).cloned().unwrap_or_default()
    };
    let mut prefix: Vec<Nat> = (0..entries.len())
        .map(|k| nat(family_value(idx, k as u64)))
        .collect();
    while entries.len() < n {
        entries.push(dense_encode(&prefix));
        prefix.push(nat(family_value(idx, prefix.len() as u64)));
    }
    let mut cache = chain_cache().lock().unwrap();
    let slot = cache.entry(idx).or_default();
    if slot.len() < entries.len() {
        *slot = entries.clone();
    }
    entries[..n].to_vec()
}

/// Least family index whose trace chain of length `s.len()` equals `s`.
fn tier1_match(s: &[Nat]) -> Option<u64> {
    if s.is_empty() {
        return Some(0);
    }
    if !s[0].is_zero() {
        return None;
    }
    // Reconstruct the generator's values from the decoded entries. Entry k is
    // ♯(g|k), so each one pins one more value.
    let horizon = (s.len() - 1).min(FAM_POSITIONS as usize);
    let mut values: Vec<u64> = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let t = dense_decode(&s[k])?;
        if t.len() != k {
            return None;
        }
        for (i, v) in values.iter().enumerate() {
            if t[i] != nat(*v) {
                return None;
            }
        }
        let v = u64::try_from(&t[k - 1]).ok()?;
        if v > FAM_VALUES {
            return None;
        }
        values.push(v);
    }
    let support: Vec<(u64, u64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(p, &v)| (p as u64, v))
        .collect();
    let idx = family_of_support(&support)?;
    let chain = family_chain(idx, s.len());
    if chain[..] == s[..] {
        Some(idx)
    } else {
        None
    }
}

fn dense_encode(s: &[Nat]) -> Nat {
    if let Some(idx) = tier1_match(s) {
        return pair_big(&nat(idx), &nat(s.len() as u64)) * 2u32;
    }
    packed_encode(s) * 2u32 + 1u32
}

fn dense_decode(c: &Nat) -> Option<Vec<Nat>> {
    if (c % 2u32).is_zero() {
        let (idx, n) = unpair_big(&(c / 2u32));
        let idx = u64::try_from(&idx).ok()?;
        if idx >= FAMILY_SIZE {
            return None;
        }
        let n = usize::try_from(&n).ok()?;
        let s = family_chain(idx, n);
        // Only the least matching index is canonical.
        if tier1_match(&s) == Some(idx) {
            Some(s)
        } else {
            None
        }
    } else {
        let s = packed_decode(&((c - 1u32) / 2u32))?;
        if tier1_match(&s).is_some() {
            return None; // canonical form lives in the chain lane
        }
        Some(s)
    }
}

/// Self-delimiting bit packing: each entry `a` is written as the Elias gamma
/// code of `a+1`; the bit string `B` maps to the natural `(1·2^|B| + B) − 1`.
/// Assembled as a bit vector first — values get long and per-bit shifting of
/// the accumulator would be quadratic.
fn packed_encode(s: &[Nat]) -> Nat {
    let mut bits: Vec<bool> = vec![true]; // the sentinel bit
    for a in s {
        let x = a + 1u32;
        let n = x.bits();
        bits.extend(std::iter::repeat(false).take(n as usize - 1));
        for i in (0..n).rev() {
            bits.push(x.bit(i));
        }
    }
    let nbytes = bits.len().div_ceil(8);
    let mut bytes = vec![0u8; nbytes];
    let pad = nbytes * 8 - bits.len();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            let pos = i + pad; // big-endian, left padded
            bytes[pos / 8] |= 1 << (7 - pos % 8);
        }
    }
    Nat::from_bytes_be(&bytes) - 1u32
}

fn packed_decode(n: &Nat) -> Option<Vec<Nat>> {
    let m = n + 1u32;
    let total = m.bits();
    // Skip the sentinel bit (the most significant one).
    let mut pos = total - 1;
    let mut out = Vec::new();
    while pos > 0 {
        let mut zeros = 0u64;
        while pos > 0 && !m.bit(pos - 1) {
            zeros += 1;
            pos -= 1;
        }
        if pos < zeros + 1 {
            return None; // ran out of bits mid-code
        }
        let mut x = Nat::zero();
        for _ in 0..zeros + 1 {
            pos -= 1;
            x <<= 1;
            if m.bit(pos) {
                x |= Nat::one();
            }
        }
        out.push(x - 1u32);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(vs: &[u64]) -> FuncPrefix {
        FuncPrefix::from_u64s(vs)
    }

    #[test]
    fn pairing_round_trip() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(unpair(pair(3, 5)), (3, 5));
        for n in 0..2000 {
            let (a, b) = unpair(n);
            assert_eq!(pair(a, b), n);
        }
    }

    #[test]
    fn cantor_base_values() {
        assert_eq!(encode_seq(&[]), nat(0));
        assert_eq!(encode_seq(&[nat(0)]), nat(1));
        assert_eq!(encode_seq(&[nat(0), nat(0)]), nat(2));
        assert_eq!(encode_seq(&[nat(1)]), nat(3));
    }

    #[test]
    fn cantor_decode_examples() {
        assert_eq!(decode_seq(&nat(0)), Some(vec![]));
        assert_eq!(decode_seq(&nat(2)), Some(vec![nat(0), nat(0)]));
    }

    #[test]
    fn cantor_round_trip_small() {
        // all sequences with entries < 8, length < 5
        fn rec(prefix: &mut Vec<Nat>, depth: usize) {
            let c = encode_seq(prefix);
            assert_eq!(decode_seq(&c).unwrap(), *prefix);
            if depth == 0 {
                return;
            }
            for k in 0..8u64 {
                prefix.push(nat(k));
                rec(prefix, depth - 1);
                prefix.pop();
            }
        }
        rec(&mut Vec::new(), 4);
    }

    #[test]
    fn cantor_injective_exhaustive() {
        // entries < 16, length ≤ 4: no collisions
        let mut seen = std::collections::HashSet::new();
        fn rec(prefix: &mut Vec<Nat>, depth: usize, seen: &mut std::collections::HashSet<Nat>) {
            assert!(seen.insert(encode_seq(prefix)), "collision at {prefix:?}");
            if depth == 0 {
                return;
            }
            for k in 0..16u64 {
                prefix.push(nat(k));
                rec(prefix, depth - 1, seen);
                prefix.pop();
            }
        }
        rec(&mut Vec::new(), 4, &mut seen);
    }

    #[test]
    fn e_trace_examples() {
        let t = e_trace(&fp(&[0, 0, 0]), Coding::Cantor);
        assert_eq!(t, fp(&[0, 1, 2]));
        let t = e_trace(&fp(&[7, 3, 1, 4]), Coding::Cantor);
        assert_eq!(t.get(0), &nat(0));
    }

    #[test]
    fn e_trace_agreement_window() {
        // f, g first differing at k ⇒ traces agree exactly on [0, k+1)
        for a in 0..4u64 {
            for b in 0..4u64 {
                for c in 0..4u64 {
                    for d in 0..4u64 {
                        let f = fp(&[a, b]);
                        let g = fp(&[c, d]);
                        let tf = e_trace(&f, Coding::Cantor);
                        let tg = e_trace(&g, Coding::Cantor);
                        let k = f.first_difference(&g);
                        let agree: Vec<usize> =
                            (0..2).filter(|&i| tf.get(i) == tg.get(i)).collect();
                        match k {
                            None => assert_eq!(agree, vec![0, 1]),
                            Some(k) => assert_eq!(agree, (0..=k).collect::<Vec<_>>()),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trace_values_decode_to_chain() {
        for coding in [Coding::Cantor, Coding::Dense] {
            let f = fp(&[3, 1, 4, 1, 5]);
            let t = e_trace(&f, coding);
            let mut prev: Vec<Nat> = Vec::new();
            for n in 0..t.len() {
                let s = coding.decode(t.get(n)).expect("trace codes decode");
                assert_eq!(s.len(), n);
                assert!(prev.iter().zip(&s).all(|(a, b)| a == b));
                prev = s;
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let cases: Vec<Vec<Nat>> = vec![
            vec![],
            vec![nat(0)],
            vec![nat(5)],
            vec![nat(0), nat(0)],
            vec![nat(2), nat(7), nat(0), nat(9)],
            vec![nat(1000), nat(0)],
            (0..12).map(nat).collect(),
        ];
        for s in cases {
            let c = Coding::Dense.encode(&s);
            assert_eq!(Coding::Dense.decode(&c), Some(s.clone()), "case {s:?}");
        }
        // chain-lane sequences round-trip too
        for idx in [0u64, 1, 5, 70, 300] {
            let s = family_chain(idx, 6);
            let c = Coding::Dense.encode(&s);
            assert_eq!(Coding::Dense.decode(&c), Some(s));
        }
    }

    #[test]
    fn dense_injective_sample() {
        let mut seen = std::collections::HashMap::new();
        fn rec(
            prefix: &mut Vec<Nat>,
            depth: usize,
            seen: &mut std::collections::HashMap<Nat, Vec<Nat>>,
        ) {
            let c = Coding::Dense.encode(prefix);
            if let Some(prev) = seen.insert(c.clone(), prefix.clone()) {
                panic!("collision: {prev:?} vs {prefix:?} at {c}");
            }
            if depth == 0 {
                return;
            }
            for k in 0..6u64 {
                prefix.push(nat(k));
                rec(prefix, depth - 1, seen);
                prefix.pop();
            }
        }
        rec(&mut Vec::new(), 3, &mut seen);
    }

    #[test]
    fn dense_chain_codes_grow_quadratically() {
        // the whole point of the chain lane: e_trace(g) has small trace codes
        let g: Vec<Nat> = (0..22).map(|_| nat(0)).collect();
        let f = e_trace(&FuncPrefix::new(g), Coding::Dense);
        let t = e_trace(&f, Coding::Dense);
        let below: Vec<&Nat> = (0..t.len()).map(|n| t.get(n)).filter(|c| **c < nat(512)).collect();
        assert!(below.len() >= 16, "chain lane density: got {}", below.len());
    }

    #[test]
    fn dense_decode_rejects_noncanonical() {
        // an even code whose family index is not least for its chain
        let idx = 9; // single-support (1, v): prefix of length 1 is ⟨0⟩, least idx is 0
        let c = pair_big(&nat(idx), &nat(1)) * 2u32;
        assert_eq!(Coding::Dense.decode(&c), None);
    }
}
