//! Exact finite representations of eventually periodic subsets of ω.
//!
//! An [`EpSet`] stores explicit membership bits below a threshold and a
//! periodic tail pattern from the threshold on. Finite sets, arithmetic
//! progressions and all boolean combinations of them live here exactly, which
//! is what makes finiteness, emptiness, windows, densities and CRT-style
//! intersections decidable for the symbolic fragment.

/// Cap on tail periods; binary operations whose lcm exceeds it bail out with
/// `None` and callers fall back to an unsupported verdict.
pub const PERIOD_CAP: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EpSet {
    threshold: u64,
    head: Vec<bool>, // length == threshold
    period: u64,     // ≥ 1
    tail: Vec<bool>, // length == period; n ≥ threshold is in iff tail[(n - threshold) % period]
}

impl EpSet {
    fn normalize(mut self) -> EpSet {
        // shrink the period to its minimal divisor
        for p in 1..self.period {
            if self.period % p != 0 {
                continue;
            }
            let ok = (0..self.period).all(|i| self.tail[i as usize] == self.tail[(i % p) as usize]);
            if ok {
                self.tail.truncate(p as usize);
                self.period = p;
                break;
            }
        }
        // pull the threshold back over head bits that already follow the tail pattern
        while self.threshold > 0 {
            let i = self.threshold - 1;
            let pos = ((self.period - (self.threshold - i) % self.period) % self.period) as usize;
            if self.head[i as usize] == self.tail[pos] {
                self.head.pop();
                self.threshold -= 1;
                self.tail.rotate_right(1);
            } else {
                break;
            }
        }
        self
    }

    pub fn empty() -> EpSet {
        EpSet { threshold: 0, head: vec![], period: 1, tail: vec![false] }
    }

    pub fn full() -> EpSet {
        EpSet { threshold: 0, head: vec![], period: 1, tail: vec![true] }
    }

    pub fn from_finite(elems: &[u64]) -> EpSet {
        match elems.iter().max() {
            None => EpSet::empty(),
            Some(&m) => {
                let mut head = vec![false; (m + 1) as usize];
                for &e in elems {
                    head[e as usize] = true;
                }
                EpSet { threshold: m + 1, head, period: 1, tail: vec![false] }.normalize()
            }
        }
    }

    /// `{offset + k·stride : k ∈ ω}`; stride ≥ 1.
    pub fn from_ap(offset: u64, stride: u64) -> EpSet {
        assert!(stride >= 1, "stride must be positive");
        let mut tail = vec![false; stride as usize];
        tail[0] = true;
        EpSet { threshold: offset, head: vec![false; offset as usize], period: stride, tail }
            .normalize()
    }

    /// Build from an explicit window plus a tail pattern starting there.
    pub fn from_parts(head: Vec<bool>, tail: Vec<bool>) -> EpSet {
        assert!(!tail.is_empty());
        EpSet { threshold: head.len() as u64, head, period: tail.len() as u64, tail }.normalize()
    }

    pub fn member(&self, n: u64) -> bool {
        if n < self.threshold {
            self.head[n as usize]
        } else {
            self.tail[((n - self.threshold) % self.period) as usize]
        }
    }

    pub fn complement(&self) -> EpSet {
        EpSet {
            threshold: self.threshold,
            head: self.head.iter().map(|b| !b).collect(),
            period: self.period,
            tail: self.tail.iter().map(|b| !b).collect(),
        }
        .normalize()
    }

    fn binop(&self, other: &EpSet, f: impl Fn(bool, bool) -> bool) -> Option<EpSet> {
        let threshold = self.threshold.max(other.threshold);
        let period = num::integer::lcm(self.period, other.period);
        if period > PERIOD_CAP {
            return None;
        }
        let head = (0..threshold).map(|n| f(self.member(n), other.member(n))).collect();
        let tail = (0..period).map(|i| f(self.member(threshold + i), other.member(threshold + i))).collect();
        Some(EpSet { threshold, head, period, tail }.normalize())
    }

    pub fn union(&self, other: &EpSet) -> Option<EpSet> {
        self.binop(other, |a, b| a || b)
    }

    pub fn inter(&self, other: &EpSet) -> Option<EpSet> {
        self.binop(other, |a, b| a && b)
    }

    pub fn diff(&self, other: &EpSet) -> Option<EpSet> {
        self.binop(other, |a, b| a && !b)
    }

    pub fn is_empty(&self) -> bool {
        !self.head.iter().any(|&b| b) && !self.tail.iter().any(|&b| b)
    }

    pub fn is_finite(&self) -> bool {
        !self.tail.iter().any(|&b| b)
    }

    pub fn is_cofinite(&self) -> bool {
        self.tail.iter().all(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.head.iter().all(|&b| b) && self.tail.iter().all(|&b| b)
    }

    /// Exact cardinality when finite.
    pub fn card(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.head.iter().filter(|&&b| b).count() as u64)
        } else {
            None
        }
    }

    pub fn min(&self) -> Option<u64> {
        self.iter().next()
    }

    /// k-th element in increasing order, `None` past the end of a finite set.
    pub fn nth(&self, k: u64) -> Option<u64> {
        let head_count = self.head.iter().filter(|&&b| b).count() as u64;
        if k < head_count {
            let mut seen = 0;
            for (i, &b) in self.head.iter().enumerate() {
                if b {
                    if seen == k {
                        return Some(i as u64);
                    }
                    seen += 1;
                }
            }
            unreachable!()
        }
        let per: Vec<u64> = (0..self.period).filter(|&i| self.tail[i as usize]).collect();
        if per.is_empty() {
            return None;
        }
        let k = k - head_count;
        let (q, r) = (k / per.len() as u64, k % per.len() as u64);
        Some(self.threshold + q * self.period + per[r as usize])
    }

    /// Number of elements strictly below `n`.
    pub fn rank(&self, n: u64) -> u64 {
        let mut count = self.head.iter().take(n.min(self.threshold) as usize).filter(|&&b| b).count() as u64;
        if n > self.threshold {
            let span = n - self.threshold;
            let per_count = self.tail.iter().filter(|&&b| b).count() as u64;
            count += (span / self.period) * per_count;
            for i in 0..(span % self.period) {
                if self.tail[i as usize] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Intersection with `[n, ∞)`.
    pub fn tail_from(&self, n: u64) -> EpSet {
        self.inter(&EpSet::from_ap(n, 1)).expect("periods equal")
    }

    pub fn window(&self, n: u64) -> Vec<bool> {
        (0..n).map(|i| self.member(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..).map(move |k| self.nth(k)).take_while(|o| o.is_some()).map(|o| o.unwrap())
    }

    /// Fraction of the tail period that is in the set (numerator, period).
    pub fn tail_density(&self) -> (u64, u64) {
        (self.tail.iter().filter(|&&b| b).count() as u64, self.period)
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// Elements of a finite set, ascending.
    pub fn elements(&self) -> Option<Vec<u64>> {
        if self.is_finite() {
            Some(self.iter().collect())
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ap_crt_intersection() {
        let evens = EpSet::from_ap(0, 2);
        let threes = EpSet::from_ap(0, 3);
        let both = evens.inter(&threes).unwrap();
        assert!(both.member(6));
        assert!(!both.member(4));
        assert_eq!(both, EpSet::from_ap(0, 6));
        // incompatible residues
        let a = EpSet::from_ap(1, 2);
        let b = EpSet::from_ap(0, 2);
        assert!(a.inter(&b).unwrap().is_empty());
    }

    #[test]
    fn finiteness_and_rank() {
        let s = EpSet::from_finite(&[3, 1, 7]);
        assert!(s.is_finite());
        assert_eq!(s.card(), Some(3));
        assert_eq!(s.nth(1), Some(3));
        assert_eq!(s.nth(3), None);
        assert_eq!(s.rank(7), 2);
        let t = EpSet::from_ap(2, 3);
        assert!(!t.is_finite());
        assert_eq!(t.nth(3), Some(11));
        assert_eq!(t.rank(12), 4);
    }

    #[test]
    fn complement_of_finite_is_cofinite() {
        let s = EpSet::from_finite(&[0, 2]).complement();
        assert!(s.is_cofinite());
        assert!(!s.member(2));
        assert!(s.member(1));
        assert_eq!(s.min(), Some(1));
    }

    proptest! {
        #[test]
        fn ops_agree_pointwise(
            a_off in 0u64..6, a_str in 1u64..7,
            b in proptest::collection::vec(0u64..40, 0..6),
            n in 0u64..200,
        ) {
            let x = EpSet::from_ap(a_off, a_str);
            let y = EpSet::from_finite(&b);
            let u = x.union(&y).unwrap();
            let i = x.inter(&y).unwrap();
            let d = x.diff(&y).unwrap();
            let c = x.complement();
            prop_assert_eq!(u.member(n), x.member(n) || y.member(n));
            prop_assert_eq!(i.member(n), x.member(n) && y.member(n));
            prop_assert_eq!(d.member(n), x.member(n) && !y.member(n));
            prop_assert_eq!(c.member(n), !x.member(n));
        }

        #[test]
        fn nth_rank_consistency(off in 0u64..5, stride in 1u64..6, k in 0u64..50) {
            let s = EpSet::from_ap(off, stride);
            let e = s.nth(k).unwrap();
            prop_assert_eq!(s.rank(e), k);
            prop_assert!(s.member(e));
        }
    }
}
