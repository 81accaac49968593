//! Structural ideal terms with exact decision on the symbolic fragment,
//! fuel-bounded semi-decision from enumerations, Fubini products and iterated
//! powers over ordinal notations, restriction, isomorphism transport, and the
//! fin-reductions (Rudin–Blass style finite-fiber maps).
//!
//! The decision procedure is partial by design: it answers `Small` or
//! `Positive` only when the structure certifies the verdict, and
//! `Unsupported` otherwise. Soundness over completeness.

mod bijection;
mod decide;
mod fibers;
mod ordinal;
mod submeasure;

pub use bijection::Bijection;
pub use fibers::{interval_fibers, maxlevel_fibers, singleton_fibers};
pub use ordinal::{LimRule, OrdinalNotation};
pub use submeasure::{check_submeasure_axioms, ratio, AxiomReport, Submeasure, WeightRule};

use crate::setalg::{FiberMap, GroundSet, LazySet, SetExpr};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IdealError {
    #[error("ground set mismatch: ideal on {ideal}, expression over {expr}")]
    GroundMismatch { ideal: String, expr: String },
    #[error("no finite-fiber fin-reduction for {0}")]
    UnsupportedReduction(String),
    #[error("submeasure is not proper: {0}")]
    ImproperSubmeasure(String),
}

/// Exact verdicts; `Unsupported` marks expressions outside the decidable
/// fragment and is never a wrong answer.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Small,
    Positive,
    Unsupported,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Small => write!(f, "small"),
            Verdict::Positive => write!(f, "positive"),
            Verdict::Unsupported => write!(f, "unsupported"),
        }
    }
}

/// Structural description of an ideal on a coded ground set. Every term
/// contains fin: finite sets always decide `Small`.
#[derive(Clone)]
pub enum IdealTerm {
    /// finite subsets of ω
    Fin,
    /// fin(φ) = {A : φ(A) < ∞} for a lower semicontinuous submeasure
    SubmeasureIdeal(Submeasure),
    /// A ∈ I ⊕ J ⇔ {x : (A)ₓ ∉ J} ∈ I, columns over ω
    Fubini(Box<IdealTerm>, Box<IdealTerm>),
    /// the α-fold iterated Fubini power of fin
    FinPow(OrdinalNotation),
    /// I restricted to A
    Restrict(Box<IdealTerm>, SetExpr),
    /// image of I under a bijection of ground sets
    Transport(Box<IdealTerm>, Bijection),
    /// fin ⊕ P(ω) on ω: evens carry the powerset part, odds the fin part
    FinOplusPowerset,
}

impl IdealTerm {
    pub fn fubini(i: IdealTerm, j: IdealTerm) -> IdealTerm {
        assert!(i.ground().is_omega(), "Fubini columns are indexed over omega");
        IdealTerm::Fubini(Box::new(i), Box::new(j))
    }

    pub fn finpow(n: u64) -> IdealTerm {
        IdealTerm::FinPow(OrdinalNotation::finite(n))
    }

    pub fn restrict(self, a: SetExpr) -> IdealTerm {
        assert!(
            self.ground() == *a.ground(),
            "restriction set must live over the ideal's ground set"
        );
        IdealTerm::Restrict(Box::new(self), a)
    }

    pub fn transport(self, map: Bijection) -> IdealTerm {
        IdealTerm::Transport(Box::new(self), map)
    }

    pub fn ground(&self) -> GroundSet {
        match self {
            IdealTerm::Fin | IdealTerm::SubmeasureIdeal(_) | IdealTerm::FinOplusPowerset => {
                GroundSet::Omega
            }
            IdealTerm::Fubini(_, j) => GroundSet::product_of(j.ground()),
            IdealTerm::FinPow(a) => a.ground_set(),
            IdealTerm::Restrict(i, _) => i.ground(),
            IdealTerm::Transport(_, map) => map.target().clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            IdealTerm::Fin => "fin".into(),
            IdealTerm::SubmeasureIdeal(phi) => format!("sub({})", phi.name()),
            IdealTerm::Fubini(i, j) => format!("fubini({},{})", i.name(), j.name()),
            IdealTerm::FinPow(a) => format!("finpow({})", a.name()),
            IdealTerm::Restrict(i, a) => format!("restrict({}, {})", i.name(), a),
            IdealTerm::Transport(i, map) => format!("transport({}, {})", i.name(), map.name()),
            IdealTerm::FinOplusPowerset => "finoplusfull".into(),
        }
    }
}

impl fmt::Debug for IdealTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Exact verdict on the supported fragment; `Unsupported` otherwise, never
/// wrong. Ground-set mismatches are errors.
pub fn decide(ideal: &IdealTerm, e: &SetExpr) -> Result<Verdict, IdealError> {
    if ideal.ground() != *e.ground() {
        return Err(IdealError::GroundMismatch {
            ideal: ideal.ground().name(),
            expr: e.ground().name(),
        });
    }
    Ok(decide::decide_verdict(ideal, e))
}

/// Outcome of the fuel-bounded positivity semi-decision for submeasure
/// ideals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PositivityWitness {
    /// a finite prefix F of the enumeration with φ(F) > budget
    Witness(Vec<u64>),
    /// no witness among the first `fuel` emitted elements — not a negative
    /// answer
    Inconclusive { fuel: u64 },
}

/// Lower semicontinuity makes `φ(A) > k` semi-decidable from any enumeration
/// of A: accumulate the stream until the budget is exceeded.
pub fn positive_fuel(
    phi: &Submeasure,
    stream: &mut LazySet,
    budget: u64,
    fuel: u64,
) -> PositivityWitness {
    let mut prefix = Vec::new();
    for _ in 0..fuel {
        let next = match stream.next_within(1 << 22) {
            Ok(Some(v)) => v,
            _ => return PositivityWitness::Inconclusive { fuel },
        };
        prefix.push(next);
        if phi.phi_exceeds(&prefix, budget) {
            return PositivityWitness::Witness(prefix);
        }
    }
    PositivityWitness::Inconclusive { fuel }
}

/// The fin-reduction of a supported ideal: a finite-fiber partition map r
/// with `A ∈ fin ⇔ r⁻¹(A) ∈ I`. Fin gets singleton fibers, proper submeasure
/// ideals get consecutive intervals with φ(Iₙ) > n+1, and the iterated powers
/// get the recursive max-composition.
pub fn fin_reduction(ideal: &IdealTerm) -> Result<FiberMap, IdealError> {
    match ideal {
        IdealTerm::Fin => Ok(singleton_fibers()),
        IdealTerm::SubmeasureIdeal(phi) => {
            if phi.proper() != Some(true) {
                return Err(IdealError::ImproperSubmeasure(phi.name().to_string()));
            }
            Ok(interval_fibers(phi))
        }
        IdealTerm::FinPow(alpha) => Ok(maxlevel_fibers(alpha)),
        other => Err(IdealError::UnsupportedReduction(other.name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::SetExpr;

    #[test]
    fn positive_fuel_examples() {
        // counting φ, evens, budget 3 → {0,2,4,6}
        let mut s = LazySet::from_expr(&SetExpr::ap(0, 2));
        match positive_fuel(&Submeasure::counting(), &mut s, 3, 100) {
            PositivityWitness::Witness(f) => assert_eq!(f, vec![0, 2, 4, 6]),
            other => panic!("{other:?}"),
        }
        // empty stream → inconclusive
        let mut s = LazySet::from_expr(&SetExpr::finite(&[]));
        assert_eq!(
            positive_fuel(&Submeasure::counting(), &mut s, 0, 100),
            PositivityWitness::Inconclusive { fuel: 100 }
        );
        // geometric weights on the full set, budget 1 → {0, 1}
        let phi = Submeasure::weighted(WeightRule::Geom(ratio(1, 2)));
        let mut s = LazySet::from_expr(&SetExpr::omega());
        match positive_fuel(&phi, &mut s, 1, 100) {
            PositivityWitness::Witness(f) => assert_eq!(f, vec![0, 1]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fin_reduction_rejects_finoplus() {
        assert!(matches!(
            fin_reduction(&IdealTerm::FinOplusPowerset),
            Err(IdealError::UnsupportedReduction(_))
        ));
        let geom = Submeasure::weighted(WeightRule::Geom(ratio(1, 2)));
        assert!(matches!(
            fin_reduction(&IdealTerm::SubmeasureIdeal(geom)),
            Err(IdealError::ImproperSubmeasure(_))
        ));
    }

    #[test]
    fn ground_mismatch_is_an_error() {
        let e = SetExpr::cylinder(SetExpr::finite(&[0]), SetExpr::omega());
        assert!(decide(&IdealTerm::Fin, &e).is_err());
    }
}
