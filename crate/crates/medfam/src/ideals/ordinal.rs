use crate::setalg::{GroundSet, SumTag};
use std::fmt;
use std::sync::Arc;

/// Ordinal notations driving the iterated Fubini powers: `One`, successor,
/// or a limit given by a rule emitting its strictly increasing fundamental
/// sequence. ω ships built in with αₙ = n+1.
#[derive(Clone)]
pub enum OrdinalNotation {
    One,
    Succ(Arc<OrdinalNotation>),
    Lim(LimRule),
}

#[derive(Clone)]
pub struct LimRule {
    pub name: String,
    pub seq: Arc<dyn Fn(u64) -> OrdinalNotation + Send + Sync>,
}

impl OrdinalNotation {
    pub fn one() -> OrdinalNotation {
        OrdinalNotation::One
    }

    pub fn succ(self) -> OrdinalNotation {
        OrdinalNotation::Succ(Arc::new(self))
    }

    /// Finite notation `n ≥ 1` as an iterated successor.
    pub fn finite(n: u64) -> OrdinalNotation {
        assert!(n >= 1, "ordinal notations start at 1");
        let mut a = OrdinalNotation::One;
        for _ in 1..n {
            a = a.succ();
        }
        a
    }

    /// The built-in ω with fundamental sequence αₙ = n + 1.
    pub fn omega() -> OrdinalNotation {
        OrdinalNotation::Lim(LimRule {
            name: "omega".into(),
            seq: Arc::new(|n| OrdinalNotation::finite(n + 1)),
        })
    }

    /// Limit notation from a user-supplied fundamental sequence rule. The
    /// rule is property-tested, not validated against ordinal semantics.
    pub fn limit(name: impl Into<String>, seq: impl Fn(u64) -> OrdinalNotation + Send + Sync + 'static) -> OrdinalNotation {
        OrdinalNotation::Lim(LimRule { name: name.into(), seq: Arc::new(seq) })
    }

    /// Ground set of `fin^α`: ω for 1, ω × X^β for β+1, ⋃ₙ {n} × X^{αₙ} at
    /// limits.
    pub fn ground_set(&self) -> GroundSet {
        match self {
            OrdinalNotation::One => GroundSet::Omega,
            OrdinalNotation::Succ(b) => GroundSet::product_of(b.ground_set()),
            OrdinalNotation::Lim(rule) => {
                let seq = rule.seq.clone();
                GroundSet::Sum(SumTag {
                    name: format!("pow({})", rule.name),
                    slice: Arc::new(move |n| seq(n).ground_set()),
                })
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            OrdinalNotation::One => "1".into(),
            OrdinalNotation::Succ(b) => match b.finite_value() {
                Some(k) => format!("{}", k + 1),
                None => format!("succ({})", b.name()),
            },
            OrdinalNotation::Lim(rule) => rule.name.clone(),
        }
    }

    /// `Some(n)` when the notation is the finite ordinal `n`.
    pub fn finite_value(&self) -> Option<u64> {
        match self {
            OrdinalNotation::One => Some(1),
            OrdinalNotation::Succ(b) => b.finite_value().map(|k| k + 1),
            OrdinalNotation::Lim(_) => None,
        }
    }
}

impl fmt::Debug for OrdinalNotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_fundamental_sequence_increases() {
        let omega = OrdinalNotation::omega();
        if let OrdinalNotation::Lim(rule) = &omega {
            let vals: Vec<u64> = (0..5).map(|n| (rule.seq)(n).finite_value().unwrap()).collect();
            assert_eq!(vals, vec![1, 2, 3, 4, 5]);
        } else {
            panic!("omega is a limit");
        }
    }

    #[test]
    fn ground_sets_nest() {
        assert!(OrdinalNotation::finite(1).ground_set().is_omega());
        let g2 = OrdinalNotation::finite(2).ground_set();
        assert_eq!(g2.section_ground(0), Some(GroundSet::Omega));
        let gw = OrdinalNotation::omega().ground_set();
        // slice n of the limit is the ground set of fin^{n+1}
        assert_eq!(gw.section_ground(1), Some(OrdinalNotation::finite(2).ground_set()));
    }
}
