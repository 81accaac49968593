use crate::setalg::EpSet;
use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A finite-set functional: monotone, subadditive, zero on ∅, finite on
/// singletons. On infinite sets φ is the supremum over windows (lower
/// semicontinuity is definitional).
#[derive(Clone)]
pub struct Submeasure {
    inner: Arc<SubmeasureInner>,
}

struct SubmeasureInner {
    name: String,
    kind: SubKind,
}

enum SubKind {
    /// φ(A) = |A|
    Counting,
    /// φ(A) = Σ_{n∈A} w(n)
    Weighted(WeightRule),
    /// arbitrary rule on finite sets; axioms checkable, not guaranteed
    Custom(Box<dyn Fn(&[u64]) -> BigRational + Send + Sync>),
}

#[derive(Clone, Debug)]
pub enum WeightRule {
    /// w(n) = c
    Const(BigRational),
    /// w(n) = r^n for a positive rational ratio
    Geom(BigRational),
    /// w(n) = 1/(n+1)
    Harmonic,
}

impl WeightRule {
    fn weight(&self, n: u64) -> BigRational {
        match self {
            WeightRule::Const(c) => c.clone(),
            WeightRule::Geom(r) => num::pow::pow(r.clone(), n as usize),
            WeightRule::Harmonic => BigRational::new(BigInt::one(), BigInt::from(n + 1)),
        }
    }

    /// Does Σ w(n) diverge over the progression {offset + k·stride}?
    fn ap_divergent(&self, _offset: u64, _stride: u64) -> bool {
        match self {
            WeightRule::Const(c) => c.is_positive(),
            WeightRule::Geom(r) => *r >= BigRational::one(),
            WeightRule::Harmonic => true, // Σ 1/(offset + k·stride + 1) diverges
        }
    }

    fn name(&self) -> String {
        match self {
            WeightRule::Const(c) => format!("const({c})"),
            WeightRule::Geom(r) => format!("geom({r})"),
            WeightRule::Harmonic => "harmonic".into(),
        }
    }
}

impl Submeasure {
    pub fn counting() -> Submeasure {
        Submeasure { inner: Arc::new(SubmeasureInner { name: "count".into(), kind: SubKind::Counting }) }
    }

    pub fn weighted(rule: WeightRule) -> Submeasure {
        Submeasure {
            inner: Arc::new(SubmeasureInner {
                name: format!("weights={}", rule.name()),
                kind: SubKind::Weighted(rule),
            }),
        }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(&[u64]) -> BigRational + Send + Sync + 'static) -> Submeasure {
        Submeasure {
            inner: Arc::new(SubmeasureInner { name: format!("custom:{}", name.into()), kind: SubKind::Custom(Box::new(f)) }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// φ on an explicit finite set (deduplicated by the caller or not; the
    /// built-ins deduplicate defensively since φ is a set functional).
    pub fn phi(&self, set: &[u64]) -> BigRational {
        match &self.inner.kind {
            SubKind::Counting => {
                let mut v: Vec<u64> = set.to_vec();
                v.sort_unstable();
                v.dedup();
                BigRational::from(BigInt::from(v.len()))
            }
            SubKind::Weighted(rule) => {
                let mut v: Vec<u64> = set.to_vec();
                v.sort_unstable();
                v.dedup();
                v.iter().map(|&n| rule.weight(n)).fold(BigRational::zero(), |a, b| a + b)
            }
            SubKind::Custom(f) => f(set),
        }
    }

    pub fn phi_exceeds(&self, set: &[u64], budget: u64) -> bool {
        self.phi(set) > BigRational::from(BigInt::from(budget))
    }

    /// Certified divergence of φ along an arithmetic progression, when the
    /// weight rule settles it; `None` for custom rules.
    pub fn ap_divergent(&self, offset: u64, stride: u64) -> Option<bool> {
        match &self.inner.kind {
            SubKind::Counting => Some(true),
            SubKind::Weighted(rule) => Some(rule.ap_divergent(offset, stride)),
            SubKind::Custom(_) => None,
        }
    }

    /// φ(ω) = ∞? (the ideal fin(φ) is proper and nontrivial)
    pub fn proper(&self) -> Option<bool> {
        self.ap_divergent(0, 1)
    }

    /// Whether φ is a sum of point weights (counting and weighted rules).
    pub fn is_additive(&self) -> bool {
        !matches!(self.inner.kind, SubKind::Custom(_))
    }

    pub fn is_counting(&self) -> bool {
        matches!(self.inner.kind, SubKind::Counting)
    }

    /// φ of an infinite eventually periodic set: `Some(true)` = ∞,
    /// `Some(false)` = finite, `None` = not settled by the weight rule.
    /// Finitely many tail progressions, so subadditivity plus monotonicity
    /// settle it whenever every component is certified.
    pub fn ep_divergent(&self, ep: &EpSet) -> Option<bool> {
        if ep.is_finite() {
            return Some(false);
        }
        let t = ep.threshold();
        let mut any_unknown = false;
        for i in 0..ep.period() {
            if ep.member(t + i) {
                match self.ap_divergent(t + i, ep.period()) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => any_unknown = true,
                }
            }
        }
        if any_unknown {
            None
        } else {
            Some(false)
        }
    }
}

impl fmt::Debug for Submeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sub({})", self.inner.name)
    }
}

// ---------------------------------------------------------------------------
// Axiom checking
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomReport {
    Pass,
    Violation { axiom: &'static str, a: Vec<u64>, b: Vec<u64> },
}

/// Exhaustively verify the submeasure axioms on all subsets of [0, N)
/// (N ≤ 12) and lower semicontinuity on sampled windows.
pub fn check_submeasure_axioms(phi: &Submeasure, n: u32) -> AxiomReport {
    assert!(n <= 12, "exhaustive check is capped at N = 12");
    let masks: u32 = 1 << n;
    let elems = |mask: u32| -> Vec<u64> {
        (0..n as u64).filter(|&i| mask & (1 << i) != 0).collect()
    };
    if !phi.phi(&[]).is_zero() {
        return AxiomReport::Violation { axiom: "phi(empty) = 0", a: vec![], b: vec![] };
    }
    let values: Vec<BigRational> = (0..masks).map(|m| phi.phi(&elems(m))).collect();
    for m in 0..masks {
        if values[m as usize] < BigRational::zero() {
            return AxiomReport::Violation { axiom: "phi >= 0", a: elems(m), b: vec![] };
        }
    }
    for a in 0..masks {
        for b in 0..masks {
            let u = (a | b) as usize;
            // φ(A) ≤ φ(A ∪ B) ≤ φ(A) + φ(B)
            if values[a as usize] > values[u] {
                return AxiomReport::Violation { axiom: "monotone", a: elems(a), b: elems(b) };
            }
            if values[u] > &values[a as usize] + &values[b as usize] {
                return AxiomReport::Violation { axiom: "subadditive", a: elems(a), b: elems(b) };
            }
        }
    }
    // lower semicontinuity on sampled window chains: φ(A ∩ [0,m)) must be
    // non-decreasing in m (the definitional reading for these rules)
    for stride in 1..=3u64 {
        let mut prev = BigRational::zero();
        for m in 0..(n as u64) {
            let window: Vec<u64> = (0..m).filter(|k| k % stride == 0).collect();
            let v = phi.phi(&window);
            if v < prev {
                return AxiomReport::Violation { axiom: "lower semicontinuous", a: window, b: vec![] };
            }
            prev = v;
        }
    }
    AxiomReport::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_passes_axioms() {
        assert_eq!(check_submeasure_axioms(&Submeasure::counting(), 8), AxiomReport::Pass);
    }

    #[test]
    fn weighted_sum_passes_axioms() {
        let phi = Submeasure::weighted(WeightRule::Geom(ratio(1, 2)));
        assert_eq!(check_submeasure_axioms(&phi, 8), AxiomReport::Pass);
        let phi = Submeasure::weighted(WeightRule::Harmonic);
        assert_eq!(check_submeasure_axioms(&phi, 8), AxiomReport::Pass);
    }

    #[test]
    fn squared_cardinality_fails_subadditivity() {
        let phi = Submeasure::custom("card_squared", |s| {
            let mut v: Vec<u64> = s.to_vec();
            v.sort_unstable();
            v.dedup();
            let c = BigInt::from(v.len());
            BigRational::from(&c * &c)
        });
        match check_submeasure_axioms(&phi, 4) {
            AxiomReport::Violation { axiom: "subadditive", a, b } => {
                assert_eq!(a.len(), 1);
                assert_eq!(b.len(), 1);
            }
            other => panic!("expected subadditivity violation, got {other:?}"),
        }
    }

    #[test]
    fn geometric_partial_sums() {
        let phi = Submeasure::weighted(WeightRule::Geom(ratio(1, 2)));
        assert_eq!(phi.phi(&[0, 1]), ratio(3, 2));
        assert!(phi.phi_exceeds(&[0, 1], 1));
        assert_eq!(phi.proper(), Some(false));
    }

    #[test]
    fn divergence_certificates() {
        assert_eq!(Submeasure::counting().proper(), Some(true));
        assert_eq!(Submeasure::weighted(WeightRule::Harmonic).proper(), Some(true));
        let ep = EpSet::from_ap(0, 2);
        assert_eq!(Submeasure::weighted(WeightRule::Geom(ratio(1, 2))).ep_divergent(&ep), Some(false));
        assert_eq!(Submeasure::weighted(WeightRule::Harmonic).ep_divergent(&ep), Some(true));
    }
}
