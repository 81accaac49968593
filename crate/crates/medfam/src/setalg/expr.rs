use super::ep::EpSet;
use crate::codes::{pair, unpair};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SetalgError {
    #[error("ground set mismatch: {0} vs {1}")]
    GroundMismatch(String, String),
    #[error("operation unsupported on this term: {0}")]
    Unsupported(String),
}

// ---------------------------------------------------------------------------
// Ground sets
// ---------------------------------------------------------------------------

/// Nominal descriptor of the coded ground set an expression lives over.
///
/// Every ground set is coded into ω (the pairing is a bijection), so the
/// descriptor only drives section structure and mixing checks; mixing
/// expressions over different ground sets is an error, not a coercion.
#[derive(Clone)]
pub enum GroundSet {
    /// the natural numbers
    Omega,
    /// ω × X, coded by `pair(column, point-of-X)`
    Product(Arc<GroundSet>),
    /// ⋃ₙ {n} × Xₙ with slice spaces resolved by a rule (limit powers)
    Sum(SumTag),
}

#[derive(Clone)]
pub struct SumTag {
    pub name: String,
    pub slice: Arc<dyn Fn(u64) -> GroundSet + Send + Sync>,
}

impl PartialEq for GroundSet {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GroundSet::Omega, GroundSet::Omega) => true,
            (GroundSet::Product(a), GroundSet::Product(b)) => a == b,
            (GroundSet::Sum(a), GroundSet::Sum(b)) => a.name == b.name,
            _ => false,
        }
    }
}
impl Eq for GroundSet {}

impl fmt::Debug for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl GroundSet {
    pub fn omega() -> GroundSet {
        GroundSet::Omega
    }

    pub fn product_of(section: GroundSet) -> GroundSet {
        GroundSet::Product(Arc::new(section))
    }

    /// Section/slice ground set at column `n`.
    pub fn section_ground(&self, n: u64) -> Option<GroundSet> {
        match self {
            GroundSet::Omega => None,
            GroundSet::Product(x) => Some((**x).clone()),
            GroundSet::Sum(tag) => Some((tag.slice)(n)),
        }
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, GroundSet::Omega)
    }

    pub fn is_product(&self) -> bool {
        !matches!(self, GroundSet::Omega)
    }

    pub fn name(&self) -> String {
        match self {
            GroundSet::Omega => "omega".into(),
            GroundSet::Product(x) => format!("omega*({})", x.name()),
            GroundSet::Sum(tag) => tag.name.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Fiber maps
// ---------------------------------------------------------------------------

/// A map whose fibers are finite, nonempty, and partition the ground set;
/// carries enough structure for the ideal decision procedures to reason about
/// preimages without materializing them.
#[derive(Clone)]
pub struct FiberMap {
    inner: Arc<FiberMapInner>,
}

struct FiberMapInner {
    name: String,
    ground: GroundSet,
    level_of: Box<dyn Fn(u64) -> u64 + Send + Sync>,
    // (level, size cap) → fiber, or None when materialization would exceed the cap
    fiber: Box<dyn Fn(u64, u64) -> Option<Vec<u64>> + Send + Sync>,
    structure: FiberStructure,
}

/// Structural tag the decision procedures dispatch on.
#[derive(Clone)]
pub enum FiberStructure {
    /// `fiber(n) = {n}` on ω
    Singleton,
    /// consecutive finite intervals of ω; the tag names the submeasure whose
    /// growth condition φ(Iₙ) > n+1 the construction enforces
    Intervals { growth_tag: String },
    /// max-composition levels on a product/sum ground set; sections at a
    /// column reduce to preimages under the inner map
    MaxLevel { inner: Box<FiberMap> },
    /// no structure exposed; only pointwise evaluation available
    Opaque,
}

impl FiberMap {
    pub fn new(
        name: String,
        ground: GroundSet,
        level_of: impl Fn(u64) -> u64 + Send + Sync + 'static,
        fiber: impl Fn(u64, u64) -> Option<Vec<u64>> + Send + Sync + 'static,
        structure: FiberStructure,
    ) -> FiberMap {
        FiberMap {
            inner: Arc::new(FiberMapInner {
                name,
                ground,
                level_of: Box::new(level_of),
                fiber: Box::new(fiber),
                structure,
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn ground(&self) -> &GroundSet {
        &self.inner.ground
    }

    /// Index of the fiber containing `point`.
    pub fn level_of(&self, point: u64) -> u64 {
        (self.inner.level_of)(point)
    }

    /// Materialize the (finite) fiber at `level` if it has at most `cap`
    /// points, ascending.
    pub fn try_fiber(&self, level: u64, cap: u64) -> Option<Vec<u64>> {
        let mut f = (self.inner.fiber)(level, cap)?;
        f.sort_unstable();
        Some(f)
    }

    /// Materialize the (finite) fiber at `level`, ascending.
    pub fn fiber(&self, level: u64) -> Vec<u64> {
        self.try_fiber(level, 1 << 20).expect("fiber materialization exceeded cap")
    }

    pub fn structure(&self) -> &FiberStructure {
        &self.inner.structure
    }

    pub fn same_map(&self, other: &FiberMap) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.name == other.inner.name
    }
}

impl fmt::Debug for FiberMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fibermap({})", self.inner.name)
    }
}

// ---------------------------------------------------------------------------
// Enumerated sets
// ---------------------------------------------------------------------------

/// A strictly increasing total enumeration of an infinite subset of ω with
/// decidable membership. Grammar extension carrying trace ranges and other
/// recursively enumerable sets the core grammar cannot express.
pub trait EnumRule: Send + Sync {
    fn name(&self) -> String;
    /// k-th element in increasing order; total.
    fn nth(&self, k: u64) -> u64;
    /// Exact finite intersection with another enumerated set, when this rule
    /// can certify it.
    fn meet_finite(&self, _other: &EnumSet) -> Option<Vec<u64>> {
        None
    }
}

#[derive(Clone)]
pub struct EnumSet {
    pub rule: Arc<dyn EnumRule>,
}

impl EnumSet {
    pub fn new(rule: Arc<dyn EnumRule>) -> EnumSet {
        EnumSet { rule }
    }

    pub fn contains(&self, n: u64) -> bool {
        // nth is strictly increasing, so nth(k) ≥ k; bisect on k.
        let (mut lo, mut hi) = (0u64, n + 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let v = self.rule.nth(mid);
            if v == n {
                return true;
            }
            if v < n {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        false
    }

    pub fn name(&self) -> String {
        self.rule.name()
    }
}

impl fmt::Debug for EnumSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "enum({})", self.name())
    }
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Node {
    Empty,
    Full,
    Finite(Vec<u64>), // sorted, deduplicated
    Ap { offset: u64, stride: u64 },
    Union(SetExpr, SetExpr),
    Inter(SetExpr, SetExpr),
    Diff(SetExpr, SetExpr),
    Complement(SetExpr),
    Cylinder { cols: SetExpr, sec: SetExpr },
    Preimage { map: FiberMap, of: SetExpr },
    Enum(EnumSet),
}

/// A symbolic subset of a coded ground set.
#[derive(Clone, Debug)]
pub struct SetExpr {
    ground: GroundSet,
    node: Arc<Node>,
}

fn check_same_ground(a: &SetExpr, b: &SetExpr) -> GroundSet {
    assert!(
        a.ground == b.ground,
        "ground set mismatch: {} vs {}",
        a.ground.name(),
        b.ground.name()
    );
    a.ground.clone()
}

impl SetExpr {
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn empty(ground: GroundSet) -> SetExpr {
        SetExpr { ground, node: Arc::new(Node::Empty) }
    }

    pub fn full(ground: GroundSet) -> SetExpr {
        SetExpr { ground, node: Arc::new(Node::Full) }
    }

    pub fn finite_in(ground: GroundSet, elems: &[u64]) -> SetExpr {
        let mut v: Vec<u64> = elems.to_vec();
        v.sort_unstable();
        v.dedup();
        SetExpr { ground, node: Arc::new(Node::Finite(v)) }
    }

    pub fn ap_in(ground: GroundSet, offset: u64, stride: u64) -> SetExpr {
        assert!(stride >= 1, "stride must be positive");
        SetExpr { ground, node: Arc::new(Node::Ap { offset, stride }) }
    }

    // ω-ground conveniences
    pub fn finite(elems: &[u64]) -> SetExpr {
        SetExpr::finite_in(GroundSet::Omega, elems)
    }

    pub fn ap(offset: u64, stride: u64) -> SetExpr {
        SetExpr::ap_in(GroundSet::Omega, offset, stride)
    }

    pub fn omega() -> SetExpr {
        SetExpr::full(GroundSet::Omega)
    }

    pub fn union(a: SetExpr, b: SetExpr) -> SetExpr {
        let ground = check_same_ground(&a, &b);
        SetExpr { ground, node: Arc::new(Node::Union(a, b)) }
    }

    pub fn inter(a: SetExpr, b: SetExpr) -> SetExpr {
        let ground = check_same_ground(&a, &b);
        SetExpr { ground, node: Arc::new(Node::Inter(a, b)) }
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> SetExpr {
        let ground = check_same_ground(&a, &b);
        SetExpr { ground, node: Arc::new(Node::Diff(a, b)) }
    }

    pub fn complement(a: SetExpr) -> SetExpr {
        let ground = a.ground.clone();
        SetExpr { ground, node: Arc::new(Node::Complement(a)) }
    }

    /// `{pair(x, y) : x ∈ cols, y ∈ sec}` over ω × (sec's ground).
    pub fn cylinder(cols: SetExpr, sec: SetExpr) -> SetExpr {
        assert!(cols.ground.is_omega(), "cylinder columns live over omega");
        let ground = GroundSet::product_of(sec.ground.clone());
        SetExpr { ground, node: Arc::new(Node::Cylinder { cols, sec }) }
    }

    /// Cylinder over an explicitly given product/sum ground set (sections of
    /// sum grounds take code-polymorphic section expressions).
    pub fn cylinder_in(ground: GroundSet, cols: SetExpr, sec: SetExpr) -> SetExpr {
        assert!(cols.ground.is_omega(), "cylinder columns live over omega");
        assert!(ground.is_product(), "cylinder needs a product ground set");
        SetExpr { ground, node: Arc::new(Node::Cylinder { cols, sec }) }
    }

    /// `r⁻¹(of)` for a fiber map `r` on `r.ground()`; `of` lives over ω.
    pub fn preimage(map: FiberMap, of: SetExpr) -> SetExpr {
        assert!(of.ground.is_omega(), "preimage argument lives over omega");
        let ground = map.ground().clone();
        SetExpr { ground, node: Arc::new(Node::Preimage { map, of }) }
    }

    pub fn enum_set(ground: GroundSet, rule: Arc<dyn EnumRule>) -> SetExpr {
        SetExpr { ground, node: Arc::new(Node::Enum(EnumSet::new(rule))) }
    }

    // -----------------------------------------------------------------------
    // Membership and windows
    // -----------------------------------------------------------------------

    /// Exact membership of the coded point `n`.
    pub fn member(&self, n: u64) -> bool {
        match &*self.node {
            Node::Empty => false,
            Node::Full => true,
            Node::Finite(v) => v.binary_search(&n).is_ok(),
            Node::Ap { offset, stride } => n >= *offset && (n - offset) % stride == 0,
            Node::Union(a, b) => a.member(n) || b.member(n),
            Node::Inter(a, b) => a.member(n) && b.member(n),
            Node::Diff(a, b) => a.member(n) && !b.member(n),
            Node::Complement(a) => !a.member(n),
            Node::Cylinder { cols, sec } => {
                let (x, y) = unpair(n);
                cols.member(x) && sec.member(y)
            }
            Node::Preimage { map, of } => of.member(map.level_of(n)),
            Node::Enum(e) => e.contains(n),
        }
    }

    /// Exact window: bit i set iff `member(i)`, for i < n. Computed
    /// structurally (combining child windows), not by pointwise membership.
    pub fn window(&self, n: u64) -> Vec<bool> {
        match &*self.node {
            Node::Empty => vec![false; n as usize],
            Node::Full => vec![true; n as usize],
            Node::Finite(v) => {
                let mut w = vec![false; n as usize];
                for &e in v.iter().take_while(|&&e| e < n) {
                    w[e as usize] = true;
                }
                w
            }
            Node::Ap { offset, stride } => {
                let mut w = vec![false; n as usize];
                let mut i = *offset;
                while i < n {
                    w[i as usize] = true;
                    i += stride;
                }
                w
            }
            Node::Union(a, b) => zip_with(a.window(n), b.window(n), |x, y| x || y),
            Node::Inter(a, b) => zip_with(a.window(n), b.window(n), |x, y| x && y),
            Node::Diff(a, b) => zip_with(a.window(n), b.window(n), |x, y| x && !y),
            Node::Complement(a) => a.window(n).into_iter().map(|x| !x).collect(),
            Node::Cylinder { cols, sec } => {
                let mut w = vec![false; n as usize];
                if n == 0 {
                    return w;
                }
                let colw = cols.window(n);
                let secw = sec.window(n);
                for x in 0..n {
                    if pair(x, 0) >= n {
                        break;
                    }
                    if !colw[x as usize] {
                        continue;
                    }
                    let mut y = 0;
                    loop {
                        let c = pair(x, y);
                        if c >= n {
                            break;
                        }
                        if secw[y as usize] {
                            w[c as usize] = true;
                        }
                        y += 1;
                    }
                }
                w
            }
            Node::Preimage { map, of } => {
                let levels: Vec<u64> = (0..n).map(|p| map.level_of(p)).collect();
                let max_level = levels.iter().copied().max().unwrap_or(0);
                let ofw = of.window(max_level + 1);
                levels.into_iter().map(|l| ofw[l as usize]).collect()
            }
            Node::Enum(e) => {
                let mut w = vec![false; n as usize];
                let mut k = 0;
                loop {
                    let v = e.rule.nth(k);
                    if v >= n {
                        break;
                    }
                    w[v as usize] = true;
                    k += 1;
                }
                w
            }
        }
    }

    // -----------------------------------------------------------------------
    // Sections
    // -----------------------------------------------------------------------

    /// Symbolic section `(A)_x = {y : pair(x, y) ∈ A}` of an expression over
    /// a product or sum ground set.
    pub fn section(&self, x: u64) -> Result<SetExpr, SetalgError> {
        let target = self.ground.section_ground(x).ok_or_else(|| {
            SetalgError::Unsupported(format!("section of an expression over {}", self.ground.name()))
        })?;
        self.section_into(x, target)
    }

    fn section_into(&self, x: u64, target: GroundSet) -> Result<SetExpr, SetalgError> {
        Ok(match &*self.node {
            Node::Empty => SetExpr::empty(target),
            Node::Full => SetExpr::full(target),
            Node::Finite(v) => {
                let elems: Vec<u64> = v
                    .iter()
                    .copied()
                    .map(unpair)
                    .filter(|&(c, _)| c == x)
                    .map(|(_, y)| y)
                    .collect();
                SetExpr::finite_in(target, &elems)
            }
            Node::Ap { offset, stride } => {
                let ep = ap_section_ep(*offset, *stride, x);
                expr_of_ep(&ep, target)
            }
            Node::Union(a, b) => SetExpr::union(
                a.section_into(x, target.clone())?,
                b.section_into(x, target)?,
            ),
            Node::Inter(a, b) => SetExpr::inter(
                a.section_into(x, target.clone())?,
                b.section_into(x, target)?,
            ),
            Node::Diff(a, b) => SetExpr::diff(
                a.section_into(x, target.clone())?,
                b.section_into(x, target)?,
            ),
            Node::Complement(a) => SetExpr::complement(a.section_into(x, target)?),
            Node::Cylinder { cols, sec } => {
                if cols.member(x) {
                    retag_codes(sec, target).unwrap_or_else(|| sec.clone())
                } else {
                    SetExpr::empty(target)
                }
            }
            Node::Preimage { map, of } => match map.structure() {
                FiberStructure::MaxLevel { inner } => {
                    // {y : max(x, level(y)) ∈ E} = inner⁻¹(([0,x] if x∈E) ∪ E∩(x,∞))
                    let tail = SetExpr::inter(of.clone(), SetExpr::ap(x + 1, 1));
                    let idx = if of.member(x) {
                        let low: Vec<u64> = (0..=x).collect();
                        SetExpr::union(SetExpr::finite(&low), tail)
                    } else {
                        tail
                    };
                    SetExpr::preimage((**inner).clone(), idx)
                }
                _ => {
                    return Err(SetalgError::Unsupported(format!(
                        "section of preimage under {}",
                        map.name()
                    )))
                }
            },
            Node::Enum(_) => {
                return Err(SetalgError::Unsupported(
                    "section of an enumerated set".into(),
                ))
            }
        })
    }

    // -----------------------------------------------------------------------
    // Exact eventually periodic analysis
    // -----------------------------------------------------------------------

    /// Exact eventually periodic representation of the code set, when the
    /// structure yields one.
    pub fn ep(&self) -> Option<EpSet> {
        match &*self.node {
            Node::Empty => Some(EpSet::empty()),
            Node::Full => Some(EpSet::full()),
            Node::Finite(v) => Some(EpSet::from_finite(v)),
            Node::Ap { offset, stride } => Some(EpSet::from_ap(*offset, *stride)),
            Node::Union(a, b) => a.ep()?.union(&b.ep()?),
            Node::Inter(a, b) => a.ep()?.inter(&b.ep()?),
            Node::Diff(a, b) => a.ep()?.diff(&b.ep()?),
            Node::Complement(a) => Some(a.ep()?.complement()),
            Node::Cylinder { cols, sec } => {
                // only small finite cylinders materialize
                let c = cols.ep()?;
                let s = sec.ep()?;
                if c.is_empty() || s.is_empty() {
                    return Some(EpSet::empty());
                }
                let (ce, se) = (c.elements()?, s.elements()?);
                if ce.len().checked_mul(se.len())? > 1 << 16 {
                    return None;
                }
                let mut codes = Vec::with_capacity(ce.len() * se.len());
                for &x in &ce {
                    for &y in &se {
                        codes.push(pair(x, y));
                    }
                }
                Some(EpSet::from_finite(&codes))
            }
            Node::Preimage { map, of } => {
                let e = of.ep()?;
                // per-fiber cap kept small: interval fibers can be
                // exponentially long and costly even to measure
                let cap: u64 = 1 << 12;
                let total: u64 = 1 << 16;
                if e.is_finite() {
                    let mut pts = Vec::new();
                    for l in e.iter() {
                        pts.extend(map.try_fiber(l, cap)?);
                        if pts.len() as u64 > total {
                            return None;
                        }
                    }
                    Some(EpSet::from_finite(&pts))
                } else if e.is_cofinite() {
                    // r⁻¹(E)ᶜ = r⁻¹(Eᶜ), a finite union of fibers
                    let mut pts = Vec::new();
                    for l in e.complement().iter() {
                        pts.extend(map.try_fiber(l, cap)?);
                        if pts.len() as u64 > total {
                            return None;
                        }
                    }
                    Some(EpSet::from_finite(&pts).complement())
                } else {
                    None
                }
            }
            Node::Enum(_) => None,
        }
    }

    /// Conservative exact cardinality information (sound tri-valued flags).
    pub fn card_info(&self) -> CardInfo {
        if let Some(ep) = self.ep() {
            return CardInfo {
                empty: Trilean::from(ep.is_empty()),
                finite: Trilean::from(ep.is_finite()),
                cofinite: Trilean::from(ep.is_cofinite()),
                full: Trilean::from(ep.is_full()),
            };
        }
        match &*self.node {
            Node::Union(a, b) => {
                let (x, y) = (a.card_info(), b.card_info());
                CardInfo {
                    empty: x.empty.and(y.empty),
                    finite: x.finite.and(y.finite),
                    cofinite: x.cofinite.or(y.cofinite),
                    full: x.full.or(y.full),
                }
            }
            Node::Inter(a, b) => {
                // an enumeration rule may certify a finite meet outright
                if let (Node::Enum(ea), Node::Enum(eb)) = (&*a.node, &*b.node) {
                    if let Some(meet) = ea.rule.meet_finite(eb) {
                        let ep = EpSet::from_finite(&meet);
                        return CardInfo {
                            empty: Trilean::from(ep.is_empty()),
                            finite: Trilean::True,
                            cofinite: Trilean::False,
                            full: Trilean::False,
                        };
                    }
                }
                let (x, y) = (a.card_info(), b.card_info());
                CardInfo {
                    empty: x.empty.or(y.empty),
                    finite: x.finite.or(y.finite),
                    cofinite: x.cofinite.and(y.cofinite),
                    full: x.full.and(y.full),
                }
            }
            Node::Diff(a, b) => {
                let (x, y) = (a.card_info(), b.card_info());
                CardInfo {
                    empty: x.empty.or(y.full),
                    finite: x.finite.or(y.cofinite),
                    cofinite: x.cofinite.and(y.empty),
                    full: x.full.and(y.empty),
                }
            }
            Node::Complement(a) => {
                let x = a.card_info();
                CardInfo { empty: x.full, finite: x.cofinite, cofinite: x.finite, full: x.empty }
            }
            Node::Cylinder { cols, sec } => {
                let (c, s) = (cols.card_info(), sec.card_info());
                let empty = c.empty.or(s.empty);
                CardInfo {
                    empty,
                    finite: empty.or(c.finite.and(s.finite)),
                    cofinite: c.full.and(s.full),
                    full: c.full.and(s.full),
                }
            }
            Node::Preimage { of, .. } => {
                // fibers are finite, nonempty and partition the ground set
                of.card_info()
            }
            Node::Enum(_) => CardInfo {
                empty: Trilean::False,
                finite: Trilean::False,
                cofinite: Trilean::Unknown,
                full: Trilean::Unknown,
            },
            _ => CardInfo::unknown(),
        }
    }

    /// Piecewise-cylinder profile of a product-ground expression: finitely
    /// many pairwise disjoint eventually periodic column classes covering ω,
    /// each with a constant section expression.
    pub fn column_profile(&self) -> Option<ColumnProfile> {
        let sample_ground = self.ground.section_ground(0)?;
        match &*self.node {
            Node::Empty => Some(ColumnProfile {
                parts: vec![(EpSet::full(), SetExpr::empty(sample_ground))],
            }),
            Node::Full => Some(ColumnProfile {
                parts: vec![(EpSet::full(), SetExpr::full(sample_ground))],
            }),
            Node::Finite(v) => {
                let mut by_col: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
                for &c in v {
                    let (x, y) = unpair(c);
                    by_col.entry(x).or_default().push(y);
                }
                let mut parts = Vec::new();
                let mut used: Vec<u64> = Vec::new();
                for (x, ys) in by_col {
                    parts.push((EpSet::from_finite(&[x]), SetExpr::finite_in(sample_ground.clone(), &ys)));
                    used.push(x);
                }
                parts.push((EpSet::from_finite(&used).complement(), SetExpr::empty(sample_ground)));
                Some(ColumnProfile { parts })
            }
            Node::Ap { offset, stride } => {
                let p = if stride % 2 == 1 { *stride } else { 2 * stride };
                let mut parts = Vec::new();
                for r in 0..p {
                    let ep = ap_section_ep(*offset, *stride, r);
                    parts.push((EpSet::from_ap(r, p), expr_of_ep(&ep, sample_ground.clone())));
                }
                Some(ColumnProfile { parts })
            }
            Node::Cylinder { cols, sec } => {
                let c = cols.ep()?;
                Some(ColumnProfile {
                    parts: vec![
                        (c.clone(), sec.clone()),
                        (c.complement(), SetExpr::empty(sec.ground.clone())),
                    ],
                })
            }
            Node::Union(a, b) => combine_profiles(a, b, SetExpr::union),
            Node::Inter(a, b) => combine_profiles(a, b, SetExpr::inter),
            Node::Diff(a, b) => combine_profiles(a, b, SetExpr::diff),
            Node::Complement(a) => {
                let p = a.column_profile()?;
                Some(ColumnProfile {
                    parts: p
                        .parts
                        .into_iter()
                        .map(|(c, s)| (c, SetExpr::complement(s)))
                        .collect(),
                })
            }
            Node::Preimage { .. } | Node::Enum(_) => None,
        }
    }
}

fn combine_profiles(
    a: &SetExpr,
    b: &SetExpr,
    op: impl Fn(SetExpr, SetExpr) -> SetExpr,
) -> Option<ColumnProfile> {
    let pa = a.column_profile()?;
    let pb = b.column_profile()?;
    let mut parts = Vec::new();
    for (ca, sa) in &pa.parts {
        for (cb, sb) in &pb.parts {
            let c = ca.inter(cb)?;
            if c.is_empty() {
                continue;
            }
            parts.push((c, op(sa.clone(), sb.clone())));
        }
    }
    if parts.len() > 512 {
        return None;
    }
    Some(ColumnProfile { parts })
}

/// Disjoint eventually periodic column classes covering ω, with one section
/// expression per class.
#[derive(Clone, Debug)]
pub struct ColumnProfile {
    pub parts: Vec<(EpSet, SetExpr)>,
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Section of an arithmetic progression of codes at column `x`: an eventually
/// periodic set. `pair(x,y) mod stride` is periodic in both arguments with
/// period `stride` (odd strides) or `2·stride` (even), and `pair(x,·)` is
/// strictly increasing, so the sub-offset part is a finite initial mask.
fn ap_section_ep(offset: u64, stride: u64, x: u64) -> EpSet {
    let p = if stride % 2 == 1 { stride } else { 2 * stride };
    let xr = x % p;
    let pattern: Vec<bool> =
        (0..p).map(|i| pair(xr, i) % stride == offset % stride).collect();
    let mut y0 = 0u64;
    while pair_u128(x, y0) < offset as u128 {
        y0 += 1;
    }
    let head = vec![false; y0 as usize];
    let tail: Vec<bool> = (0..p).map(|i| pattern[((y0 + i) % p) as usize]).collect();
    EpSet::from_parts(head, tail)
}

fn pair_u128(a: u64, b: u64) -> u128 {
    let s = (a as u128) + (b as u128);
    s * (s + 1) / 2 + (b as u128)
}

/// Canonical in-grammar expression for an eventually periodic set: the finite
/// head as a `Finite`, the tail residues as arithmetic progressions.
pub fn expr_of_ep(ep: &EpSet, ground: GroundSet) -> SetExpr {
    let t = ep.threshold();
    let head: Vec<u64> = (0..t).filter(|&n| ep.member(n)).collect();
    let mut acc: Option<SetExpr> = if head.is_empty() {
        None
    } else {
        Some(SetExpr::finite_in(ground.clone(), &head))
    };
    for i in 0..ep.period() {
        if ep.member(t + i) {
            let ap = SetExpr::ap_in(ground.clone(), t + i, ep.period());
            acc = Some(match acc {
                None => ap,
                Some(e) => SetExpr::union(e, ap),
            });
        }
    }
    acc.unwrap_or_else(|| SetExpr::empty(ground))
}

/// Re-tag a code-polymorphic expression (no cylinders, preimages or
/// enumerations) onto another ground set.
pub fn retag_codes(e: &SetExpr, ground: GroundSet) -> Option<SetExpr> {
    Some(match &*e.node {
        Node::Empty => SetExpr::empty(ground),
        Node::Full => SetExpr::full(ground),
        Node::Finite(v) => SetExpr::finite_in(ground, v),
        Node::Ap { offset, stride } => SetExpr::ap_in(ground, *offset, *stride),
        Node::Union(a, b) => SetExpr::union(retag_codes(a, ground.clone())?, retag_codes(b, ground)?),
        Node::Inter(a, b) => SetExpr::inter(retag_codes(a, ground.clone())?, retag_codes(b, ground)?),
        Node::Diff(a, b) => SetExpr::diff(retag_codes(a, ground.clone())?, retag_codes(b, ground)?),
        Node::Complement(a) => SetExpr::complement(retag_codes(a, ground)?),
        Node::Cylinder { .. } | Node::Preimage { .. } | Node::Enum(_) => return None,
    })
}

// ---------------------------------------------------------------------------
// Tri-valued logic
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Trilean {
    True,
    False,
    Unknown,
}

impl From<bool> for Trilean {
    fn from(b: bool) -> Self {
        if b {
            Trilean::True
        } else {
            Trilean::False
        }
    }
}

impl Trilean {
    pub fn and(self, other: Trilean) -> Trilean {
        match (self, other) {
            (Trilean::False, _) | (_, Trilean::False) => Trilean::False,
            (Trilean::True, Trilean::True) => Trilean::True,
            _ => Trilean::Unknown,
        }
    }

    pub fn or(self, other: Trilean) -> Trilean {
        match (self, other) {
            (Trilean::True, _) | (_, Trilean::True) => Trilean::True,
            (Trilean::False, Trilean::False) => Trilean::False,
            _ => Trilean::Unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Trilean::True
    }

    pub fn is_false(self) -> bool {
        self == Trilean::False
    }
}

/// Sound flags: `True`/`False` only when certain.
#[derive(Clone, Copy, Debug)]
pub struct CardInfo {
    pub empty: Trilean,
    pub finite: Trilean,
    pub cofinite: Trilean,
    pub full: Trilean,
}

impl CardInfo {
    pub fn unknown() -> CardInfo {
        CardInfo {
            empty: Trilean::Unknown,
            finite: Trilean::Unknown,
            cofinite: Trilean::Unknown,
            full: Trilean::Unknown,
        }
    }
}

// ---------------------------------------------------------------------------
// Display (the CLI expression grammar)
// ---------------------------------------------------------------------------

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Empty => write!(f, "empty"),
            Node::Full => write!(f, "full"),
            Node::Finite(v) => {
                write!(f, "fin{{")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            Node::Ap { offset, stride } => write!(f, "ap({offset},{stride})"),
            Node::Union(a, b) => write!(f, "union({a}, {b})"),
            Node::Inter(a, b) => write!(f, "inter({a}, {b})"),
            Node::Diff(a, b) => write!(f, "diff({a}, {b})"),
            Node::Complement(a) => write!(f, "comp({a})"),
            Node::Cylinder { cols, sec } => write!(f, "cyl({cols}, {sec})"),
            Node::Preimage { map, of } => write!(f, "pre({}, {of})", map.name()),
            Node::Enum(e) => write!(f, "enum({})", e.name()),
        }
    }
}

/// Hex dump of a window, bit n stored at byte n/8, bit n%8.
pub fn window_hex(window: &[bool]) -> String {
    let mut bytes = vec![0u8; window.len().div_ceil(8)];
    for (n, &b) in window.iter().enumerate() {
        if b {
            bytes[n / 8] |= 1 << (n % 8);
        }
    }
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
