//! The MED family pipeline: the almost-disjoint carrier C(f) through the
//! fin-reduction, T-membership via the weak-Ramsey extractor on (C(f), c_f),
//! member emission, pairwise agreement certificates, and majority-vote
//! recovery of the source function from an emitted member.

use crate::codes::{nat, Coding, FuncPrefix, Nat};
use crate::colorings::{Color, Coloring};
use crate::ideals::{decide, fin_reduction, IdealError, IdealTerm, Verdict};
use crate::ramsey::{phi_ramsey, RamseyError, RamseyOutcome, RamseyVerdict};
use crate::setalg::{EnumRule, EnumSet, SetExpr};
use num::Zero;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MedError {
    #[error("T-membership unresolved: {0}")]
    Unresolved(String),
    #[error("no chain covers a strict majority of the decodable positions")]
    NoMajority,
    #[error("prefix lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Ramsey(#[from] RamseyError),
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// A total rule ω → ω feeding the pipeline. The battery kinds carry enough
/// structure for the coloring hooks and the agreement certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// f = e_trace(g) for the chain-lane family generator of this index:
    /// always decodes, one coherent chain.
    TraceOfFamily { idx: u64 },
    /// f ≡ c: at most one position decodes to the right length.
    Constant { value: u64 },
    /// f(n) = ♯(g|n+1): wrong decode length everywhere.
    ShiftedTrace { idx: u64 },
    /// f(n) = ♯(⟨n, 0, …, 0⟩): valid everywhere, pairwise incoherent except
    /// through the empty root.
    Antichain,
    /// f(n) = a·n + b.
    Affine { a: u64, b: u64 },
    /// Chain union decoded from a homogeneous set (maximality witnesses);
    /// zero beyond the decoded horizon.
    ChainWitness { prefix: Arc<FuncPrefix> },
    /// Two interleaved trace chains (unit-test diversity, not battery).
    BranchingTrace { even_idx: u64, odd_idx: u64 },
}

impl Generator {
    pub fn eval(&self, n: u64, coding: Coding) -> Nat {
        match self {
            Generator::TraceOfFamily { idx } => family_trace_value(*idx, n, coding),
            Generator::Constant { value } => nat(*value),
            Generator::ShiftedTrace { idx } => family_trace_value(*idx, n + 1, coding),
            Generator::Antichain => coding.encode(&antichain_seq(n)),
            Generator::Affine { a, b } => nat(a * n + b),
            Generator::ChainWitness { prefix } => {
                if (n as usize) < prefix.len() {
                    prefix.get(n as usize).clone()
                } else {
                    Nat::zero()
                }
            }
            Generator::BranchingTrace { even_idx, odd_idx } => {
                let idx = if n % 2 == 0 { *even_idx } else { *odd_idx };
                family_trace_value(idx, n, coding)
            }
        }
    }

    pub fn prefix(&self, len: u64, coding: Coding) -> FuncPrefix {
        FuncPrefix::new((0..len).map(|n| self.eval(n, coding)).collect())
    }

    pub fn name(&self) -> String {
        match self {
            Generator::TraceOfFamily { idx } => format!("trace({idx})"),
            Generator::Constant { value } => format!("const({value})"),
            Generator::ShiftedTrace { idx } => format!("shifted({idx})"),
            Generator::Antichain => "antichain".into(),
            Generator::Affine { a, b } => format!("affine({a},{b})"),
            Generator::ChainWitness { prefix } => format!("witness(len={})", prefix.len()),
            Generator::BranchingTrace { even_idx, odd_idx } => {
                format!("branch({even_idx},{odd_idx})")
            }
        }
    }

    /// First index where the two generators differ; bounded scan.
    pub fn first_difference(&self, other: &Generator, coding: Coding, scan: u64) -> Option<u64> {
        (0..scan).find(|&n| self.eval(n, coding) != other.eval(n, coding))
    }
}

/// ♯(g|n) for the chain-lane family generator g.
fn family_trace_value(idx: u64, n: u64, coding: Coding) -> Nat {
    let prefix: Vec<Nat> = (0..n).map(|k| nat(crate::codes::family_value(idx, k))).collect();
    coding.encode(&prefix)
}

/// ⟨n, 0, …, 0⟩ of length n (h₀ = ⟨⟩).
fn antichain_seq(n: u64) -> Vec<Nat> {
    let mut s = vec![Nat::zero(); n as usize];
    if n > 0 {
        s[0] = nat(n);
    }
    s
}

// ---------------------------------------------------------------------------
// The trace range as an enumerated set
// ---------------------------------------------------------------------------

const TRACE_SAT_BASE: u64 = 1 << 62;

/// Range of e_trace(f) as a strictly increasing enumeration. Trace codes can
/// outgrow u64; values past the representable horizon saturate onto a
/// strictly increasing synthetic tail far above any window, which keeps
/// membership and meets exact below the horizon.
struct TraceRange {
    gen: Generator,
    coding: Coding,
    cache: Mutex<TraceCache>,
}

#[derive(Default)]
struct TraceCache {
    values: Vec<u64>,
    prefix: Vec<Nat>, // f's values so far, extended incrementally
    saturated: bool,  // codes are monotone: once past the horizon, always past
}

impl TraceRange {
    fn ensure(&self, k: u64) -> u64 {
        let mut cache = self.cache.lock().unwrap();
        while cache.values.len() as u64 <= k {
            let n = cache.values.len() as u64;
            let value = if cache.saturated {
                TRACE_SAT_BASE + n
            } else {
                let code = self.coding.encode(&cache.prefix);
                match u64::try_from(&code) {
                    Ok(v) if v < TRACE_SAT_BASE => v,
                    _ => {
                        cache.saturated = true;
                        TRACE_SAT_BASE + n
                    }
                }
            };
            if let Some(&last) = cache.values.last() {
                assert!(value > last, "trace codes must increase: {} at {}", self.gen.name(), n);
            }
            cache.values.push(value);
            if !cache.saturated {
                let v = self.gen.eval(n, self.coding);
                cache.prefix.push(v);
            }
        }
        cache.values[k as usize]
    }
}

impl EnumRule for TraceRange {
    fn name(&self) -> String {
        format!("etrace({},{})", self.gen.name(), self.coding.name())
    }

    fn nth(&self, k: u64) -> u64 {
        self.ensure(k)
    }

    fn meet_finite(&self, other: &EnumSet) -> Option<Vec<u64>> {
        // two trace ranges share exactly the codes of the common prefixes
        let other_name = other.rule.name();
        if !other_name.starts_with("etrace(") || other_name == EnumRule::name(self) {
            return None;
        }
        let mut meet = Vec::new();
        for k in 0..4096u64 {
            let mine = self.ensure(k);
            if other.contains(mine) {
                meet.push(mine);
            } else {
                return Some(meet); // codes are chained: the first miss ends the meet
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// C(f) and the coloring c_f
// ---------------------------------------------------------------------------

/// C(f) = r⁻¹(range of e_trace(f)): injective in f with pairwise almost
/// disjoint image, positions pulled through the ideal's fin-reduction.
pub fn build_c(ideal: &IdealTerm, gen: &Generator, coding: Coding) -> Result<SetExpr, IdealError> {
    let r = fin_reduction(ideal)?;
    let range = SetExpr::enum_set(
        crate::setalg::GroundSet::Omega,
        Arc::new(TraceRange { gen: gen.clone(), coding, cache: Mutex::new(TraceCache::default()) }),
    );
    Ok(SetExpr::preimage(r, range))
}

/// The coloring c_f of the generator, with symbolic class and stability
/// hooks derived from the generator's structure.
pub fn coloring_of(gen: &Generator, coding: Coding) -> Coloring {
    let g1 = gen.clone();
    let base = Coloring::from_rule(format!("cf({})", gen.name()), move |m, n| {
        eval_cf(&g1, coding, m, n)
    });
    let g2 = gen.clone();
    let g3 = gen.clone();
    base.with_hooks(
        move |pivot, ambient| cf_classes(&g2, coding, pivot, ambient),
        move |e| cf_constant_on(&g3, coding, e),
    )
}

fn eval_cf(gen: &Generator, coding: Coding, m: u64, n: u64) -> Color {
    let tm = coding.decode(&gen.eval(m, coding)).filter(|s| s.len() as u64 == m);
    let tn = coding.decode(&gen.eval(n, coding)).filter(|s| s.len() as u64 == n);
    match (tm, tn) {
        (Some(t), Some(s)) => u8::from(!t.iter().zip(&s).all(|(a, b)| a == b)),
        _ => 1,
    }
}

fn cf_classes(
    gen: &Generator,
    coding: Coding,
    pivot: u64,
    ambient: &SetExpr,
) -> Option<(SetExpr, SetExpr)> {
    let ground = ambient.ground().clone();
    let empty = SetExpr::empty(ground.clone());
    match gen {
        // one coherent chain: any valid pivot keeps everything
        Generator::TraceOfFamily { .. } => Some((ambient.clone(), empty)),
        // no pair ever gets color 0
        Generator::Constant { .. } | Generator::ShiftedTrace { .. } => {
            Some((empty, ambient.clone()))
        }
        // only the empty root coheres with anything
        Generator::Antichain => {
            if pivot == 0 {
                Some((ambient.clone(), empty))
            } else {
                Some((empty, ambient.clone()))
            }
        }
        Generator::Affine { .. } => {
            // finitely many valid positions; list the coherent ones
            let valid = affine_valid_positions(gen, coding);
            let tp = coding.decode(&gen.eval(pivot, coding)).filter(|s| s.len() as u64 == pivot);
            match tp {
                None => Some((empty, ambient.clone())),
                Some(t) => {
                    let mut coherent = Vec::new();
                    for &(a, ref s) in &valid {
                        if a > pivot && t.iter().zip(s).all(|(x, y)| x == y) {
                            coherent.push(a);
                        }
                    }
                    let zeros =
                        SetExpr::inter(ambient.clone(), SetExpr::finite_in(ground, &coherent));
                    Some((zeros.clone(), SetExpr::diff(ambient.clone(), zeros)))
                }
            }
        }
        Generator::BranchingTrace { .. } => {
            // coherent partners of a pivot share its parity, except through
            // the common prefix of the two chains
            let tp = coding.decode(&gen.eval(pivot, coding)).filter(|s| s.len() as u64 == pivot);
            match tp {
                None => Some((empty, ambient.clone())),
                Some(_) => {
                    let same_parity = SetExpr::ap_in(ground.clone(), pivot % 2, 2);
                    let class0 = SetExpr::inter(ambient.clone(), same_parity);
                    let class1 = SetExpr::diff(ambient.clone(), class0.clone());
                    // sound only beyond the chains' split point; the caller
                    // re-checks pairs on windows
                    if branch_split_point(gen, coding) <= pivot {
                        Some((class0, class1))
                    } else {
                        None
                    }
                }
            }
        }
        Generator::ChainWitness { .. } => None,
    }
}

fn cf_constant_on(gen: &Generator, coding: Coding, e: &SetExpr) -> Option<Color> {
    match gen {
        Generator::TraceOfFamily { .. } => Some(0),
        Generator::Constant { .. } | Generator::ShiftedTrace { .. } => Some(1),
        Generator::Antichain => {
            // pairs through the root 0 are colored 0, the rest 1
            if !e.member(0) {
                Some(1)
            } else {
                None
            }
        }
        Generator::Affine { .. } => {
            let valid = affine_valid_positions(gen, coding);
            let inside: Vec<u64> =
                valid.iter().map(|&(a, _)| a).filter(|&a| e.member(a)).collect();
            if inside.len() <= 1 {
                Some(1)
            } else {
                None
            }
        }
        Generator::BranchingTrace { even_idx, odd_idx } => {
            let split = branch_split_point(gen, coding);
            let _ = (even_idx, odd_idx);
            // inside one parity class beyond the split everything chains
            for parity in 0..2u64 {
                let off = SetExpr::diff(
                    e.clone(),
                    SetExpr::ap_in(e.ground().clone(), parity, 2),
                );
                let below = SetExpr::inter(
                    e.clone(),
                    SetExpr::finite_in(e.ground().clone(), &(0..split).collect::<Vec<_>>()),
                );
                let off_empty = off.ep().map(|p| p.is_empty()) == Some(true);
                let below_empty = below.ep().map(|p| p.is_empty()) == Some(true);
                if off_empty && below_empty {
                    return Some(0);
                }
            }
            None
        }
        Generator::ChainWitness { .. } => None,
    }
}

/// Positions where an affine generator decodes to the right length: bounded
/// by code growth (pair components grow quadratically, packed codes
/// exponentially), so a linear value can only be a length-n code for small n.
fn affine_valid_positions(gen: &Generator, coding: Coding) -> Vec<(u64, Vec<Nat>)> {
    let Generator::Affine { a, b } = gen else { unreachable!() };
    let max_value = a * 512 + b;
    let horizon = 64 + 2 * (64 - u64::leading_zeros(max_value.max(1) as u64) as u64);
    let mut out = Vec::new();
    for n in 0..=horizon.min(600) {
        let v = nat(a * n + b);
        if let Some(s) = coding.decode(&v) {
            if s.len() as u64 == n {
                out.push((n, s));
            }
        }
    }
    out
}

/// First index from which the two family chains of a branching generator
/// have split (their prefixes differ).
fn branch_split_point(gen: &Generator, coding: Coding) -> u64 {
    let Generator::BranchingTrace { even_idx, odd_idx } = gen else { unreachable!() };
    let _ = coding;
    for n in 0..16 {
        if crate::codes::family_value(*even_idx, n) != crate::codes::family_value(*odd_idx, n) {
            return n + 1;
        }
    }
    17
}

// ---------------------------------------------------------------------------
// T-membership
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum TVerdict {
    /// the Ramsey run on (C(f), c_f) is nowhere 0-homogeneous
    InT { outcome: RamseyOutcome },
    /// 0-homogeneous: the homogeneous chain unions into a witness g with
    /// S(C(f), f, e(g)) positive
    NotInT { witness: Generator, outcome: RamseyOutcome },
    /// verdicts left the exact fragment within the given fuel
    Unknown { reason: String },
}

impl TVerdict {
    pub fn is_in_t(&self) -> Option<bool> {
        match self {
            TVerdict::InT { .. } => Some(true),
            TVerdict::NotInT { .. } => Some(false),
            TVerdict::Unknown { .. } => None,
        }
    }
}

/// Fuel-bounded T-membership: runs the Ramsey extractor over the ideal
/// restricted to C(f). `Unknown` is a first-class outcome, not an error.
pub fn membership_t(
    ideal: &IdealTerm,
    gen: &Generator,
    coding: Coding,
    fuel: u64,
    window: u64,
) -> Result<TVerdict, MedError> {
    if fuel == 0 {
        return Ok(TVerdict::Unknown { reason: "no fuel".into() });
    }
    let c_set = build_c(ideal, gen, coding)?;
    let coloring = coloring_of(gen, coding);
    let outcome = match phi_ramsey(&c_set, &coloring, ideal, window, fuel) {
        Ok(o) => o,
        Err(RamseyError::Unsupported { stage }) => {
            return Ok(TVerdict::Unknown { reason: format!("unsupported at stage {stage}") })
        }
        Err(RamseyError::NoStabilization { stages }) => {
            return Ok(TVerdict::Unknown { reason: format!("no stabilization in {stages} stages") })
        }
        Err(e) => return Err(e.into()),
    };
    match outcome.verdict {
        RamseyVerdict::NowhereHomogeneous0 => Ok(TVerdict::InT { outcome }),
        RamseyVerdict::Homogeneous0 => {
            // decode the chain along H; its union is the witness
            let mut best: Option<Vec<Nat>> = None;
            for &a in outcome.h_prefix.iter().rev() {
                let code = gen.eval(a, coding);
                if let Some(s) = coding.decode(&code).filter(|s| s.len() as u64 == a) {
                    best = Some(s);
                    break;
                }
            }
            match best {
                Some(s) => Ok(TVerdict::NotInT {
                    witness: Generator::ChainWitness { prefix: Arc::new(FuncPrefix::new(s)) },
                    outcome,
                }),
                None => Ok(TVerdict::Unknown {
                    reason: "homogeneous set carries no decodable chain in the window".into(),
                }),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Member emission
// ---------------------------------------------------------------------------

/// A resolved, emitted family member.
#[derive(Clone, Debug)]
pub struct Member {
    pub gen: Generator,
    pub coding: Coding,
    pub in_t: bool,
    /// E(f)|len
    pub values: FuncPrefix,
}

/// E(f)(n) = f(n) when f ∈ T and n ∈ C(f), the trace code ♯(f|n) otherwise.
pub fn emit_member(
    ideal: &IdealTerm,
    gen: &Generator,
    coding: Coding,
    verdict: &TVerdict,
    len: u64,
) -> Result<Member, MedError> {
    let in_t = match verdict.is_in_t() {
        Some(b) => b,
        None => return Err(MedError::Unresolved(gen.name())),
    };
    let c_set = build_c(ideal, gen, coding)?;
    let mut values = Vec::with_capacity(len as usize);
    let mut running: Vec<Nat> = Vec::with_capacity(len as usize);
    for n in 0..len {
        if in_t && c_set.member(n) {
            values.push(gen.eval(n, coding));
        } else {
            values.push(coding.encode(&running));
        }
        running.push(gen.eval(n, coding));
    }
    Ok(Member { gen: gen.clone(), coding, in_t, values: FuncPrefix::new(values) })
}

// ---------------------------------------------------------------------------
// Agreement
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct AgreementReport {
    /// S(X, g0, g1) on the common window
    pub positions: Vec<u64>,
    /// a certified-small superset of the whole agreement set, when the
    /// pair's structure yields one
    pub over_approx: Option<SetExpr>,
    /// decide(I, over_approx)
    pub verdict: Option<Verdict>,
}

/// Exact pointwise agreement on the window, with a smallness verdict where
/// the over-approximation is expressible.
pub fn agreement(
    g0: &FuncPrefix,
    g1: &FuncPrefix,
    x: &SetExpr,
    ideal: Option<(&IdealTerm, &SetExpr)>,
) -> Result<AgreementReport, MedError> {
    if g0.len() != g1.len() {
        return Err(MedError::LengthMismatch(g0.len(), g1.len()));
    }
    let positions: Vec<u64> = (0..g0.len() as u64)
        .filter(|&n| x.member(n) && g0.get(n as usize) == g1.get(n as usize))
        .collect();
    let (over_approx, verdict) = match ideal {
        Some((i, over)) => (Some(over.clone()), Some(decide(i, over)?)),
        None => (None, None),
    };
    Ok(AgreementReport { positions, over_approx, verdict })
}

/// Certified-small over-approximation of the agreement set of two distinct
/// emitted members, assembled zone by zone: a shared-prefix bound off both
/// carriers, the carrier intersection through shared trace codes, and
/// kind-specific bounds where an in-T member shows its own values.
pub fn pair_certificate(
    ideal: &IdealTerm,
    m0: &Member,
    m1: &Member,
    scan: u64,
) -> Result<SetExpr, MedError> {
    let coding = m0.coding;
    let ground = ideal.ground();
    let mut parts: Vec<SetExpr> = Vec::new();
    // off both carriers the members are trace codes, which agree only while
    // the generators' prefixes coincide
    let d = m0
        .gen
        .first_difference(&m1.gen, coding, scan)
        .ok_or_else(|| MedError::Unresolved("generators do not differ within scan".into()))?;
    parts.push(SetExpr::finite_in(ground.clone(), &(0..=d).collect::<Vec<_>>()));
    // carrier intersection: only the shared trace codes' fibers
    if m0.in_t && m1.in_t {
        let r = fin_reduction(ideal)?;
        let shared: Vec<u64> = (0..=d)
            .filter_map(|n| {
                let code = coding.encode(m0.gen.prefix(n, coding).values());
                u64::try_from(&code).ok()
            })
            .collect();
        parts.push(SetExpr::preimage(r, SetExpr::finite(&shared)));
    }
    // an in-T member shows f's own values on its carrier; bound where the
    // other member's trace codes can hit them
    if m1.in_t {
        parts.push(on_carrier_bound(&m1.gen, &m0.gen, coding, &ground)?);
    }
    if m0.in_t {
        parts.push(on_carrier_bound(&m0.gen, &m1.gen, coding, &ground)?);
    }
    let mut acc = SetExpr::empty(ground);
    for p in parts {
        acc = SetExpr::union(acc, p);
    }
    Ok(acc)
}

/// Positions where the in-T generator's values can equal the other
/// generator's trace codes: injectivity of the coding turns each case into
/// an explicit finite set.
fn on_carrier_bound(
    in_t: &Generator,
    other: &Generator,
    coding: Coding,
    ground: &crate::setalg::GroundSet,
) -> Result<SetExpr, MedError> {
    let fin = |v: Vec<u64>| SetExpr::finite_in(ground.clone(), &v);
    match in_t {
        // ♯(other|n) = c at most once: at n = |decode(c)|
        Generator::Constant { value } => {
            let v = nat(*value);
            match coding.decode(&v) {
                Some(s) => {
                    let n = s.len() as u64;
                    let trace = coding.encode(other.prefix(n, coding).values());
                    Ok(fin(if trace == v { vec![n] } else { vec![] }))
                }
                None => Ok(fin(vec![])),
            }
        }
        // lengths n+1 vs n never match
        Generator::ShiftedTrace { .. } => Ok(fin(vec![])),
        // ♯(⟨n,0,…⟩) = ♯(other|n) forces other|n = ⟨n,0,…⟩; other's first
        // value pins n
        Generator::Antichain => {
            let mut hits = Vec::new();
            for n in 0..64u64 {
                if other.prefix(n, coding).values() == antichain_seq(n).as_slice() {
                    hits.push(n);
                }
            }
            Ok(fin(hits))
        }
        // a·n + b crosses the strictly increasing trace codes finitely often
        Generator::Affine { a, b } => {
            let mut hits = Vec::new();
            for n in 0..600u64 {
                let code = coding.encode(other.prefix(n, coding).values());
                if code == nat(a * n + b) {
                    hits.push(n);
                }
                if code > nat(a * 600 + b) {
                    break;
                }
            }
            Ok(fin(hits))
        }
        other_kind => Err(MedError::Unresolved(format!(
            "no carrier bound for generator kind {}",
            other_kind.name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Recovery
// ---------------------------------------------------------------------------

/// Majority-vote recovery: decode every value, keep the ones of the right
/// length, find the longest prefix-coherent chain; it must cover a strict
/// majority of the kept positions, and its union is the recovered prefix.
pub fn recover(g: &FuncPrefix, coding: Coding) -> Result<FuncPrefix, MedError> {
    let kept: Vec<(u64, Vec<Nat>)> = (0..g.len() as u64)
        .filter_map(|n| {
            coding
                .decode(g.get(n as usize))
                .filter(|s| s.len() as u64 == n)
                .map(|s| (n, s))
        })
        .collect();
    if kept.is_empty() {
        return Err(MedError::NoMajority);
    }
    // chain sizes by dynamic programming over the kept positions in order
    let mut size: Vec<u64> = vec![1; kept.len()];
    for i in 0..kept.len() {
        let (n_i, ref t_i) = kept[i];
        for j in (0..i).rev() {
            let (n_j, ref t_j) = kept[j];
            if t_i[..n_j as usize] == t_j[..] {
                size[i] = size[j] + 1;
                break; // kept prefixes of t_i are linearly ordered
            }
        }
        let _ = n_i;
    }
    let (best, &best_size) =
        size.iter().enumerate().max_by_key(|&(i, &s)| (s, kept[i].0)).unwrap();
    if 2 * best_size <= kept.len() as u64 {
        return Err(MedError::NoMajority);
    }
    Ok(FuncPrefix::new(kept[best].1.clone()))
}

// ---------------------------------------------------------------------------
// The acceptance battery
// ---------------------------------------------------------------------------

/// Twenty pipeline generators per ideal: six chain-lane traces (resolved
/// not-in-T, dense enough for the maximality checks) and fourteen in-T
/// kinds.
pub fn battery() -> Vec<Generator> {
    let mut out = Vec::new();
    for idx in 0..=5 {
        out.push(Generator::TraceOfFamily { idx });
    }
    for value in [2, 3, 5, 7, 11, 13, 17] {
        out.push(Generator::Constant { value });
    }
    out.push(Generator::Antichain);
    for idx in 0..=3 {
        out.push(Generator::ShiftedTrace { idx });
    }
    out.push(Generator::Affine { a: 2, b: 1 });
    out.push(Generator::Affine { a: 3, b: 2 });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::Submeasure;

    const W: u64 = 1024;

    #[test]
    fn c_of_f_examples() {
        // identity fibers, zero generator: C(f) ∩ [0,5) under the Cantor
        // coding is the first trace codes 0, 1, 2, 4
        let f = Generator::Constant { value: 0 };
        let c = build_c(&IdealTerm::Fin, &f, Coding::Cantor).unwrap();
        let w = c.window(5);
        let got: Vec<u64> = (0..5).filter(|&i| w[i as usize]).collect();
        assert_eq!(got, vec![0, 1, 2, 4]);
    }

    #[test]
    fn c_is_positive_and_sparse() {
        for ideal in [
            IdealTerm::Fin,
            IdealTerm::SubmeasureIdeal(Submeasure::counting()),
        ] {
            let gen = Generator::TraceOfFamily { idx: 0 };
            let c = build_c(&ideal, &gen, Coding::Dense).unwrap();
            assert_eq!(decide(&ideal, &c).unwrap(), Verdict::Positive);
            let w = c.window(512);
            let count = w.iter().filter(|&&b| b).count();
            assert!(count >= 16, "{}: {count}", ideal.name());
            assert!(count < 256, "{}: density discipline", ideal.name());
        }
    }

    #[test]
    fn c_intersections_decide_small() {
        let a = build_c(&IdealTerm::Fin, &Generator::TraceOfFamily { idx: 0 }, Coding::Dense)
            .unwrap();
        let b = build_c(&IdealTerm::Fin, &Generator::TraceOfFamily { idx: 3 }, Coding::Dense)
            .unwrap();
        let meet = SetExpr::inter(a, b);
        assert_eq!(decide(&IdealTerm::Fin, &meet).unwrap(), Verdict::Small);
    }

    #[test]
    fn membership_resolves_the_battery_over_fin() {
        for gen in battery() {
            let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, W).unwrap();
            let expect_in_t = !matches!(gen, Generator::TraceOfFamily { .. });
            assert_eq!(v.is_in_t(), Some(expect_in_t), "{}", gen.name());
        }
    }

    #[test]
    fn membership_fuel_zero_is_unknown() {
        let v = membership_t(&IdealTerm::Fin, &Generator::Antichain, Coding::Dense, 0, W).unwrap();
        assert!(matches!(v, TVerdict::Unknown { .. }));
    }

    #[test]
    fn witness_agrees_on_c() {
        let gen = Generator::TraceOfFamily { idx: 2 };
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, W).unwrap();
        let TVerdict::NotInT { witness, .. } = v else { panic!("trace generators are not in T") };
        // S(C(f), f, e(g)): on the carrier, f's values are the witness's
        // trace codes
        let c = build_c(&IdealTerm::Fin, &gen, Coding::Dense).unwrap();
        let mut hits = 0;
        for n in 0..512u64 {
            if c.member(n) {
                let fv = gen.eval(n, Coding::Dense);
                let wv = Coding::Dense.encode(witness.prefix(n, Coding::Dense).values());
                if fv == wv {
                    hits += 1;
                }
            }
        }
        assert!(hits >= 16, "{hits}");
    }

    #[test]
    fn emit_member_branches() {
        // not in T: the member is the trace everywhere
        let gen = Generator::TraceOfFamily { idx: 0 };
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, W).unwrap();
        let m = emit_member(&IdealTerm::Fin, &gen, Coding::Dense, &v, 32).unwrap();
        assert!(!m.in_t);
        for n in 0..32u64 {
            let trace = Coding::Dense.encode(gen.prefix(n, Coding::Dense).values());
            assert_eq!(m.values.get(n as usize), &trace);
        }
        // in T: f's own values on the carrier
        let gen = Generator::Constant { value: 5 };
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, W).unwrap();
        let m = emit_member(&IdealTerm::Fin, &gen, Coding::Dense, &v, 32).unwrap();
        assert!(m.in_t);
        let c = build_c(&IdealTerm::Fin, &gen, Coding::Dense).unwrap();
        let mut on_c = 0;
        for n in 0..32u64 {
            if c.member(n) {
                assert_eq!(m.values.get(n as usize), &nat(5));
                on_c += 1;
            } else {
                let trace = Coding::Dense.encode(gen.prefix(n, Coding::Dense).values());
                assert_eq!(m.values.get(n as usize), &trace);
            }
        }
        assert!(on_c >= 1);
    }

    #[test]
    fn emission_unresolved_is_an_error() {
        let gen = Generator::Antichain;
        let unknown = TVerdict::Unknown { reason: "test".into() };
        assert!(matches!(
            emit_member(&IdealTerm::Fin, &gen, Coding::Dense, &unknown, 8),
            Err(MedError::Unresolved(_))
        ));
    }

    #[test]
    fn pairwise_agreement_certified_small() {
        let ideal = IdealTerm::Fin;
        let gens = [
            Generator::TraceOfFamily { idx: 0 },
            Generator::TraceOfFamily { idx: 1 },
            Generator::Constant { value: 5 },
            Generator::Antichain,
            Generator::Affine { a: 2, b: 1 },
            Generator::ShiftedTrace { idx: 0 },
        ];
        let members: Vec<Member> = gens
            .iter()
            .map(|g| {
                let v = membership_t(&ideal, g, Coding::Dense, 64, W).unwrap();
                emit_member(&ideal, g, Coding::Dense, &v, 128).unwrap()
            })
            .collect();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let cert = pair_certificate(&ideal, &members[i], &members[j], 4096).unwrap();
                assert_eq!(decide(&ideal, &cert).unwrap(), Verdict::Small, "{i},{j}");
                let rep = agreement(
                    &members[i].values,
                    &members[j].values,
                    &SetExpr::omega(),
                    Some((&ideal, &cert)),
                )
                .unwrap();
                for &p in &rep.positions {
                    assert!(cert.member(p), "pair ({i},{j}) agreement at {p} not covered");
                }
            }
        }
    }

    #[test]
    fn recover_traces_and_members() {
        // e_trace(f) recovers f|(N−1)
        let f = FuncPrefix::from_u64s(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let g = crate::codes::e_trace(&f, Coding::Cantor);
        let rec = recover(&g, Coding::Cantor).unwrap();
        assert_eq!(rec, f.prefix(7));
        // members recover a prefix of their generator
        let gen = Generator::Constant { value: 5 };
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, W).unwrap();
        let m = emit_member(&IdealTerm::Fin, &gen, Coding::Dense, &v, 64).unwrap();
        let rec = recover(&m.values, Coding::Dense).unwrap();
        assert!(rec.len() >= 16);
        assert_eq!(rec, gen.prefix(rec.len() as u64, Coding::Dense));
        // constant junk has no majority chain
        let junk = FuncPrefix::from_u64s(&[5; 16]);
        assert!(matches!(recover(&junk, Coding::Cantor), Err(MedError::NoMajority)));
    }

    #[test]
    fn branching_trace_resolves_not_in_t() {
        let gen = Generator::BranchingTrace { even_idx: 1, odd_idx: 2 };
        let v = membership_t(&IdealTerm::Fin, &gen, Coding::Dense, 64, 4096).unwrap();
        match v {
            TVerdict::NotInT { witness, .. } => {
                // the witness follows one of the two chains
                let w0 = witness.eval(0, Coding::Dense);
                assert!(
                    w0 == nat(crate::codes::family_value(1, 0))
                        || w0 == nat(crate::codes::family_value(2, 0))
                );
            }
            other => panic!("{other:?}"),
        }
    }
}
