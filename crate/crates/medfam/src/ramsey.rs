//! The uniformly-weak-Ramsey extractor: given a positive set and a
//! subadditive coloring, produce a positive H that is 0-homogeneous or
//! nowhere 0-homogeneous, as a deterministic function of the inputs.
//!
//! Stages pick the minimum of the current set as pivot and keep the color
//! class that is positive, preferring color 0. The run continues until the
//! coloring certifies that the current stage set is monochromatic on all its
//! pairs; the weak-P⁺ extractor then turns the stage chain into H. Colorings
//! that never stabilize within fuel give an explicit unsupported error, never
//! a guessed verdict.

use crate::colorings::{Color, Coloring, TreeRelation};
use crate::ideals::{decide, IdealError, IdealTerm, Verdict};
use crate::pplus::{extract, Chain, PPlusError, PPlusResult};
use crate::setalg::{LazySet, SetExpr};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RamseyError {
    #[error("input set is not certified positive")]
    NotPositive,
    #[error("color classes left the exact fragment at stage {stage}")]
    Unsupported { stage: u64 },
    #[error("no color class is positive at stage {stage}: soundness failure")]
    Contradiction { stage: u64 },
    #[error("coloring did not stabilize within {stages} stages")]
    NoStabilization { stages: u64 },
    #[error("stage pivot search exhausted fuel at stage {stage}")]
    PivotFuel { stage: u64 },
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    PPlus(#[from] PPlusError),
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub index: u64,
    /// aₙ = min Aₙ
    pub pivot: u64,
    /// iₙ: the color of every pair (aₙ, a) with a ∈ Aₙ₊₁
    pub color: Color,
    /// Aₙ₊₁
    pub next: SetExpr,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub enum RamseyVerdict {
    Homogeneous0,
    NowhereHomogeneous0,
}

#[derive(Debug)]
pub struct RamseyOutcome {
    pub verdict: RamseyVerdict,
    /// H ∩ [0, window)
    pub h_prefix: Vec<u64>,
    /// stage trace up to (and including) stabilization
    pub stages: Vec<StageRecord>,
    /// stage index from which all pairs of the stage set share `stable_color`
    pub stable_from: u64,
    pub stable_color: Color,
    pub window: u64,
    /// the pseudo-lower-bound the extractor produced
    pub pplus: PPlusResult,
}

const PIVOT_FUEL: u64 = 1 << 22;

/// The recursive stage construction. Emits `max_stages` records or stops
/// early when the machine cannot continue.
pub fn build_stages(
    a: &SetExpr,
    c: &Coloring,
    ideal: &IdealTerm,
    max_stages: u64,
) -> Result<Vec<StageRecord>, RamseyError> {
    let machine = StageMachine::new(a.clone(), c.clone(), ideal.clone());
    (0..max_stages).map(|n| machine.record(n)).collect()
}

/// Internal memoized stage chain. Past stabilization the sets only lose
/// their minima, which keeps the expressions flat.
struct StageMachine {
    coloring: Coloring,
    ideal: IdealTerm,
    state: Mutex<MachineState>,
}

struct MachineState {
    sets: Vec<SetExpr>,          // A₀, A₁, …
    records: Vec<StageRecord>,
    stable: Option<(u64, Color)>, // (first stable index, color)
    post_pivots: Vec<u64>,       // pivots consumed after stabilization
}

impl StageMachine {
    fn new(a: SetExpr, coloring: Coloring, ideal: IdealTerm) -> Arc<StageMachine> {
        Arc::new(StageMachine {
            coloring,
            ideal,
            state: Mutex::new(MachineState {
                sets: vec![a],
                records: Vec::new(),
                stable: None,
                post_pivots: Vec::new(),
            }),
        })
    }

    fn stage_set(&self, n: u64) -> Result<SetExpr, RamseyError> {
        loop {
            {
                let st = self.state.lock().unwrap();
                if let Some(e) = st.sets.get(n as usize) {
                    return Ok(e.clone());
                }
            }
            self.step()?;
        }
    }

    fn record(&self, n: u64) -> Result<StageRecord, RamseyError> {
        loop {
            {
                let st = self.state.lock().unwrap();
                if let Some(r) = st.records.get(n as usize) {
                    return Ok(r.clone());
                }
            }
            self.step()?;
        }
    }

    /// First stage whose set the coloring certifies monochromatic, with the
    /// color; stages are built on demand up to `fuel`.
    fn stabilization(&self, fuel: u64) -> Result<(u64, Color), RamseyError> {
        {
            let st = self.state.lock().unwrap();
            if let Some(s) = st.stable {
                return Ok(s);
            }
            if let Some(v) = self.coloring.constant_on(&st.sets[0]) {
                drop(st);
                let mut st = self.state.lock().unwrap();
                st.stable = Some((0, v));
                return Ok((0, v));
            }
        }
        for _ in 0..fuel {
            self.step()?;
            let st = self.state.lock().unwrap();
            if let Some(s) = st.stable {
                return Ok(s);
            }
        }
        Err(RamseyError::NoStabilization { stages: fuel })
    }

    fn step(&self) -> Result<(), RamseyError> {
        let mut st = self.state.lock().unwrap();
        let n = st.records.len();
        let current = st.sets[n].clone();
        let pivot = min_of(&current).ok_or(RamseyError::PivotFuel { stage: n as u64 })?;
        let rest = SetExpr::diff(current, SetExpr::finite_in(self.ideal.ground(), &[pivot]));
        let (color, next) = match st.stable {
            Some((_, v)) => {
                // all pairs share color v from here on; classes are trivial
                st.post_pivots.push(pivot);
                (v, rest)
            }
            None => {
                let (class0, class1) = self
                    .coloring
                    .classes(pivot, &rest)
                    .ok_or(RamseyError::Unsupported { stage: n as u64 })?;
                let v0 = decide(&self.ideal, &class0)?;
                let v1 = decide(&self.ideal, &class1)?;
                match (v0, v1) {
                    (Verdict::Positive, _) => (0, class0),
                    // a small class forces its complement positive inside a
                    // positive set
                    (Verdict::Small, Verdict::Positive | Verdict::Unsupported) => (1, class1),
                    (Verdict::Unsupported, Verdict::Small) => (0, class0),
                    (Verdict::Small, Verdict::Small) => {
                        return Err(RamseyError::Contradiction { stage: n as u64 })
                    }
                    (Verdict::Unsupported, _) => {
                        return Err(RamseyError::Unsupported { stage: n as u64 })
                    }
                }
            }
        };
        st.records.push(StageRecord { index: n as u64, pivot, color, next: next.clone() });
        if st.stable.is_none() {
            if let Some(v) = self.coloring.constant_on(&next) {
                st.stable = Some((n as u64 + 1, v));
            }
        }
        st.sets.push(next);
        Ok(())
    }
}

fn min_of(e: &SetExpr) -> Option<u64> {
    if let Some(ep) = e.ep() {
        return ep.min();
    }
    LazySet::from_expr(e).next_within(PIVOT_FUEL).ok().flatten()
}

/// The extractor Φ: stage construction, stabilization, pseudo-lower-bound,
/// and the verdict read off the stabilized color. Deterministic and
/// replayable.
pub fn phi_ramsey(
    a: &SetExpr,
    c: &Coloring,
    ideal: &IdealTerm,
    window: u64,
    stage_fuel: u64,
) -> Result<RamseyOutcome, RamseyError> {
    if decide(ideal, a)? != Verdict::Positive {
        return Err(RamseyError::NotPositive);
    }
    let machine = StageMachine::new(a.clone(), c.clone(), ideal.clone());
    let (stable_from, stable_color) = machine.stabilization(stage_fuel)?;
    let trace_len = stable_from + 1;
    let stages: Vec<StageRecord> = (0..trace_len)
        .map(|n| machine.record(n))
        .collect::<Result<_, _>>()?;
    // feed the stage chain to the weak-P⁺ extractor
    let m2 = machine.clone();
    let chain = Chain::rule(ideal.clone(), move |n| {
        m2.stage_set(n).expect("stage chain extended past a failed stage")
    });
    let levels = stable_from + 1;
    let pplus = extract(&chain, levels, window, 1 << 22)?;
    // H = Ā ∩ A_{stable_from}: drops only the certified-small early part
    let stable_set = machine.stage_set(stable_from)?;
    let h_prefix: Vec<u64> = pplus
        .abar_prefix
        .iter()
        .copied()
        .filter(|&p| stable_set.member(p))
        .collect();
    let verdict = if stable_color == 0 {
        RamseyVerdict::Homogeneous0
    } else {
        RamseyVerdict::NowhereHomogeneous0
    };
    Ok(RamseyOutcome { verdict, h_prefix, stages, stable_from, stable_color, window, pplus })
}

/// Exhaustive pair check used as the verification oracle for outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanResult {
    AllZero,
    MixedWitness(u64, u64),
}

pub fn homogeneity_scan(h_window: &[u64], c: &Coloring) -> ScanResult {
    for (i, &m) in h_window.iter().enumerate() {
        for &n in &h_window[i + 1..] {
            if c.eval(m, n) == 1 {
                return ScanResult::MixedWitness(m, n);
            }
        }
    }
    ScanResult::AllZero
}

/// The tree-relation interface: chains instead of 0-homogeneous sets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreeVerdict {
    /// H is linearly ordered by R
    LinearlyOrdered,
    /// no positive subset of H is linearly ordered by R
    NoPositiveChain,
}

pub fn phi_tree(
    r: &TreeRelation,
    a: &SetExpr,
    ideal: &IdealTerm,
    window: u64,
    stage_fuel: u64,
) -> Result<(TreeVerdict, RamseyOutcome), RamseyError> {
    let c = crate::colorings::relation_to_coloring(r);
    let outcome = phi_ramsey(a, &c, ideal, window, stage_fuel)?;
    let verdict = match outcome.verdict {
        RamseyVerdict::Homogeneous0 => TreeVerdict::LinearlyOrdered,
        RamseyVerdict::NowhereHomogeneous0 => TreeVerdict::NoPositiveChain,
    };
    Ok((verdict, outcome))
}
