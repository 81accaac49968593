//! Pair colorings `[ω]² → 2`, subadditivity, the prefix-order coloring built
//! from a coded function, set-membership colorings, and the bijection with
//! normal tree-like relations.
//!
//! Colorings are represented on unordered pairs through the m < n
//! normalization; querying a pair with m = n is a contract violation.

use crate::codes::{Coding, FuncPrefix, Nat};
use crate::setalg::SetExpr;
use std::fmt;
use std::sync::Arc;

pub type Color = u8;

#[derive(Clone)]
pub struct Coloring {
    inner: Arc<ColoringInner>,
}

struct ColoringInner {
    name: String,
    eval: Box<dyn Fn(u64, u64) -> Color + Send + Sync>,
    // {a ∈ ambient : c(pivot, a) = 0} and its complement in ambient, when the
    // coloring can produce them symbolically (all elements of ambient are
    // assumed to exceed the pivot)
    classes: Option<ClassesFn>,
    // certificate that every pair inside the expression gets color v
    constant_on: Option<ConstFn>,
}

type ClassesFn = Box<dyn Fn(u64, &SetExpr) -> Option<(SetExpr, SetExpr)> + Send + Sync>;
type ConstFn = Box<dyn Fn(&SetExpr) -> Option<Color> + Send + Sync>;

impl Coloring {
    /// Color of the unordered pair {m, n}; m ≠ n required.
    pub fn eval(&self, m: u64, n: u64) -> Color {
        assert!(m != n, "colorings live on unordered pairs of distinct points");
        let (m, n) = if m < n { (m, n) } else { (n, m) };
        (self.inner.eval)(m, n)
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn constant(v: Color) -> Coloring {
        Coloring {
            inner: Arc::new(ColoringInner {
                name: format!("const{v}"),
                eval: Box::new(move |_, _| v),
                classes: Some(Box::new(move |_, ambient: &SetExpr| {
                    let empty = SetExpr::empty(ambient.ground().clone());
                    Some(if v == 0 {
                        (ambient.clone(), empty)
                    } else {
                        (empty, ambient.clone())
                    })
                })),
                constant_on: Some(Box::new(move |_| Some(v))),
            }),
        }
    }

    /// `c_X`: pairs inside X get 0, everything else 1.
    pub fn from_set(x: SetExpr) -> Coloring {
        let name = format!("cx({x})");
        let x1 = x.clone();
        let x2 = x.clone();
        let x3 = x.clone();
        Coloring {
            inner: Arc::new(ColoringInner {
                name,
                eval: Box::new(move |m, n| u8::from(!(x1.member(m) && x1.member(n)))),
                classes: Some(Box::new(move |pivot, ambient: &SetExpr| {
                    let empty = SetExpr::empty(ambient.ground().clone());
                    Some(if x2.member(pivot) {
                        (
                            SetExpr::inter(ambient.clone(), x2.clone()),
                            SetExpr::diff(ambient.clone(), x2.clone()),
                        )
                    } else {
                        (empty, ambient.clone())
                    })
                })),
                constant_on: Some(Box::new(move |e: &SetExpr| {
                    let outside = SetExpr::diff(e.clone(), x3.clone());
                    if outside.ep().map(|p| p.is_empty()) == Some(true) {
                        return Some(0);
                    }
                    let inside = SetExpr::inter(e.clone(), x3.clone());
                    if inside.ep().map(|p| p.is_empty()) == Some(true) {
                        return Some(1);
                    }
                    None
                })),
            }),
        }
    }

    /// `c_f` for a finite prefix: 0 iff both values decode to sequences of
    /// the right lengths and the earlier one is an initial segment of the
    /// later one. Total on the prefix's window.
    pub fn from_prefix(f: &FuncPrefix, coding: Coding) -> Coloring {
        let decoded: Vec<Option<Vec<Nat>>> = (0..f.len())
            .map(|m| {
                coding
                    .decode(f.get(m))
                    .filter(|s| s.len() == m)
            })
            .collect();
        let len = f.len() as u64;
        Coloring {
            inner: Arc::new(ColoringInner {
                name: format!("cf(prefix,len={len})"),
                eval: Box::new(move |m, n| {
                    assert!(n < len, "c_f queried outside its window");
                    match (&decoded[m as usize], &decoded[n as usize]) {
                        (Some(t), Some(s)) => u8::from(!t.iter().zip(s).all(|(a, b)| a == b)),
                        _ => 1,
                    }
                }),
                classes: None,
                constant_on: None,
            }),
        }
    }

    /// Generic rule with optional symbolic hooks; the MED pipeline wires
    /// generator-specific class and stability certificates through here.
    pub fn from_rule(
        name: impl Into<String>,
        eval: impl Fn(u64, u64) -> Color + Send + Sync + 'static,
    ) -> Coloring {
        Coloring {
            inner: Arc::new(ColoringInner {
                name: name.into(),
                eval: Box::new(eval),
                classes: None,
                constant_on: None,
            }),
        }
    }

    pub fn with_hooks(
        self,
        classes: impl Fn(u64, &SetExpr) -> Option<(SetExpr, SetExpr)> + Send + Sync + 'static,
        constant_on: impl Fn(&SetExpr) -> Option<Color> + Send + Sync + 'static,
    ) -> Coloring {
        let inner = self.inner;
        Coloring {
            inner: Arc::new(ColoringInner {
                name: inner.name.clone(),
                eval: Box::new(move |m, n| (inner.eval)(m, n)),
                classes: Some(Box::new(classes)),
                constant_on: Some(Box::new(constant_on)),
            }),
        }
    }

    /// Table-backed coloring on [0, N), eventually constant beyond: pairs
    /// {m, n} with n ≥ N get `tail`.
    pub fn from_table(table: TriangularTable, tail: Color) -> Coloring {
        let n0 = table.size;
        let t1 = table.clone();
        let t2 = table.clone();
        Coloring {
            inner: Arc::new(ColoringInner {
                name: format!("table(n={n0},tail={tail})"),
                eval: Box::new(move |m, n| if n < n0 { t1.get(m, n) } else { tail }),
                classes: Some(Box::new(move |pivot, ambient: &SetExpr| {
                    let ground = ambient.ground().clone();
                    let mut zeros = Vec::new();
                    for a in pivot + 1..n0 {
                        if t2.get(pivot, a) == 0 {
                            zeros.push(a);
                        }
                    }
                    let head0 = SetExpr::inter(ambient.clone(), SetExpr::finite_in(ground.clone(), &zeros));
                    let tail_set = SetExpr::inter(ambient.clone(), SetExpr::ap_in(ground, n0.max(pivot + 1), 1));
                    let class0 = if tail == 0 {
                        SetExpr::union(head0, tail_set)
                    } else {
                        head0
                    };
                    Some((class0.clone(), SetExpr::diff(ambient.clone(), class0)))
                })),
                constant_on: Some(Box::new(move |e: &SetExpr| {
                    // beyond the table everything is the tail color
                    let head = SetExpr::inter(e.clone(), SetExpr::finite_in(e.ground().clone(), &(0..n0).collect::<Vec<_>>()));
                    if head.ep().map(|p| p.is_empty()) == Some(true) {
                        Some(tail)
                    } else {
                        None
                    }
                })),
            }),
        }
    }

    /// Swap the colors; Example-4.2-style colorings lose subadditivity.
    pub fn swapped(self) -> Coloring {
        let inner = self.inner;
        Coloring {
            inner: Arc::new(ColoringInner {
                name: format!("swap({})", inner.name.clone()),
                eval: Box::new(move |m, n| 1 - (inner.eval)(m, n)),
                classes: None,
                constant_on: None,
            }),
        }
    }

    /// Symbolic color classes `{a ∈ ambient : c(pivot, a) = i}` for i = 0, 1.
    pub fn classes(&self, pivot: u64, ambient: &SetExpr) -> Option<(SetExpr, SetExpr)> {
        self.inner.classes.as_ref().and_then(|f| f(pivot, ambient))
    }

    /// Certificate that all pairs inside `e` are colored `v`.
    pub fn constant_on(&self, e: &SetExpr) -> Option<Color> {
        self.inner.constant_on.as_ref().and_then(|f| f(e))
    }
}

impl fmt::Debug for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coloring({})", self.inner.name)
    }
}

/// Lower-triangular bit table for pairs m < n < size.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TriangularTable {
    size: u64,
    bits: Vec<bool>, // index n(n-1)/2 + m
}

impl TriangularTable {
    pub fn new(size: u64, bits: Vec<bool>) -> TriangularTable {
        assert_eq!(bits.len() as u64, size * size.saturating_sub(1) / 2);
        TriangularTable { size, bits }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    fn idx(m: u64, n: u64) -> usize {
        (n * (n - 1) / 2 + m) as usize
    }

    pub fn get(&self, m: u64, n: u64) -> Color {
        u8::from(self.bits[Self::idx(m, n)])
    }

    /// Triangular bitstring, pair (m,n) at position n(n−1)/2 + m.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Option<TriangularTable> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()?;
        // size from the triangular number
        let mut size = 0u64;
        while size * size.saturating_sub(1) / 2 < bits.len() as u64 {
            size += 1;
        }
        if size * size.saturating_sub(1) / 2 != bits.len() as u64 {
            return None;
        }
        Some(TriangularTable { size: size.max(1), bits })
    }
}

// ---------------------------------------------------------------------------
// Tree-like relations
// ---------------------------------------------------------------------------

/// A normal binary relation (R ⊆ <) given by a rule on pairs m < n. A
/// relation may carry the coloring it came from so the round trip through
/// the bijection keeps its symbolic hooks.
#[derive(Clone)]
pub struct TreeRelation {
    name: String,
    rule: Arc<dyn Fn(u64, u64) -> bool + Send + Sync>,
    hint: Option<Box<Coloring>>,
}

impl TreeRelation {
    pub fn new(name: impl Into<String>, rule: impl Fn(u64, u64) -> bool + Send + Sync + 'static) -> TreeRelation {
        TreeRelation { name: name.into(), rule: Arc::new(rule), hint: None }
    }

    pub fn empty() -> TreeRelation {
        let mut r = TreeRelation::new("empty", |_, _| false);
        r.hint = Some(Box::new(Coloring::constant(1)));
        r
    }

    /// The full normal relation {(m,n) : m < n}.
    pub fn below() -> TreeRelation {
        let mut r = TreeRelation::new("lt", |_, _| true);
        r.hint = Some(Box::new(Coloring::constant(0)));
        r
    }

    /// m R n (requires m < n; normality is enforced by representation).
    pub fn holds(&self, m: u64, n: u64) -> bool {
        assert!(m < n, "normal relations live below the diagonal");
        (self.rule)(m, n)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for TreeRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relation({})", self.name)
    }
}

/// `R_c = {(m,n) : m < n, c({m,n}) = 0}`.
pub fn coloring_to_relation(c: &Coloring) -> TreeRelation {
    let cc = c.clone();
    let mut r = TreeRelation::new(format!("rel({})", c.name()), move |m, n| cc.eval(m, n) == 0);
    r.hint = Some(Box::new(c.clone()));
    r
}

/// Inverse direction of the bijection. Values come from the relation's rule;
/// symbolic hooks are inherited from the originating coloring when known.
pub fn relation_to_coloring(r: &TreeRelation) -> Coloring {
    let r2 = r.clone();
    let base = Coloring::from_rule(format!("col({})", r.name()), move |m, n| u8::from(!r2.holds(m, n)));
    match &r.hint {
        Some(hinted) => {
            let h1 = (**hinted).clone();
            let h2 = (**hinted).clone();
            base.with_hooks(
                move |pivot, ambient| h1.classes(pivot, ambient),
                move |e| h2.constant_on(e),
            )
        }
        None => base,
    }
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// All triples m < n < k < N; a witness has c(m,n) = 1 while c(m,k) =
/// c(n,k) = 0.
pub fn is_subadditive(c: &Coloring, n: u64) -> Result<(), (u64, u64, u64)> {
    assert!(n >= 3, "subadditivity needs at least one triple");
    for k in 2..n {
        for m in 0..k {
            for mid in m + 1..k {
                if c.eval(m, mid) > c.eval(m, k) + c.eval(mid, k) {
                    return Err((m, mid, k));
                }
            }
        }
    }
    Ok(())
}

/// Predecessor linearity on [0, N): a witness (t0, t1, t) has t0 R t and
/// t1 R t with t0, t1 R-incomparable.
pub fn is_treelike(r: &TreeRelation, n: u64) -> Result<(), (u64, u64, u64)> {
    for t in 2..n {
        for t0 in 0..t {
            for t1 in t0 + 1..t {
                if r.holds(t0, t) && r.holds(t1, t) && !r.holds(t0, t1) {
                    return Err((t0, t1, t));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::nat;

    fn fp(vs: &[u64]) -> FuncPrefix {
        FuncPrefix::from_u64s(vs)
    }

    #[test]
    fn constant_coloring_is_subadditive() {
        assert_eq!(is_subadditive(&Coloring::constant(0), 16), Ok(()));
        assert_eq!(is_subadditive(&Coloring::constant(1), 16), Ok(()));
    }

    #[test]
    fn set_coloring_is_subadditive() {
        let c = Coloring::from_set(SetExpr::ap(0, 2));
        assert_eq!(is_subadditive(&c, 16), Ok(()));
    }

    #[test]
    fn prefix_coloring_examples() {
        // decode(2) = ⟨0,0⟩ (length 2), decode(4) = ⟨0,0,0⟩ (length 3)
        let f = fp(&[0, 1, 2, 4]);
        let c = Coloring::from_prefix(&f, Coding::Cantor);
        assert_eq!(c.eval(2, 3), 0);
        // a value decoding to the wrong length kills all its pairs
        let g = fp(&[0, 1, 0, 4]);
        let c = Coloring::from_prefix(&g, Coding::Cantor);
        assert_eq!(c.eval(2, 3), 1);
        assert_eq!(c.eval(0, 2), 1);
    }

    #[test]
    fn prefix_colorings_are_subadditive_and_swaps_break() {
        // a violation of the swapped coloring exists for some small f
        let mut found = false;
        for a in 0..4u64 {
            for b in 0..4u64 {
                for c0 in 0..4u64 {
                    let f = fp(&[a, b, c0]);
                    let cf = Coloring::from_prefix(&f, Coding::Cantor);
                    assert_eq!(is_subadditive(&cf, 3), Ok(()), "f = {a},{b},{c0}");
                    if is_subadditive(&cf.swapped(), 3).is_err() {
                        found = true;
                    }
                }
            }
        }
        assert!(found, "swapped prefix colorings must lose subadditivity somewhere");
    }

    #[test]
    fn bijection_round_trip_and_equivalence() {
        // exhaust all colorings of [0,4): 2^6 tables
        let n = 4u64;
        let pairs = (n * (n - 1) / 2) as u32;
        let mut subadditive = 0;
        let mut treelike = 0;
        for mask in 0u32..1 << pairs {
            let bits: Vec<bool> = (0..pairs).map(|i| mask & (1 << i) != 0).collect();
            let table = TriangularTable::new(n, bits);
            let c = Coloring::from_table(table.clone(), 1);
            let r = coloring_to_relation(&c);
            let c2 = relation_to_coloring(&r);
            for nn in 1..n {
                for m in 0..nn {
                    assert_eq!(c.eval(m, nn), c2.eval(m, nn));
                }
            }
            let sa = is_subadditive(&c, n).is_ok();
            let tl = is_treelike(&r, n).is_ok();
            assert_eq!(sa, tl, "mask {mask:b}");
            subadditive += u32::from(sa);
            treelike += u32::from(tl);
        }
        assert_eq!(subadditive, treelike);
    }

    #[test]
    fn exactly_seven_subadditive_colorings_on_three_points() {
        let mut count = 0;
        let mut violations = Vec::new();
        for mask in 0u32..8 {
            let bits: Vec<bool> = (0..3).map(|i| mask & (1 << i) != 0).collect();
            let c = Coloring::from_table(TriangularTable::new(3, bits), 1);
            match is_subadditive(&c, 3) {
                Ok(()) => count += 1,
                Err(w) => violations.push((mask, w)),
            }
        }
        assert_eq!(count, 7);
        // the unique violation: c(0,1) = 1, c(0,2) = c(1,2) = 0
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].0, 0b001);
    }

    #[test]
    fn treelike_witnesses() {
        assert_eq!(is_treelike(&TreeRelation::empty(), 8), Ok(()));
        assert_eq!(is_treelike(&TreeRelation::below(), 8), Ok(()));
        let r = TreeRelation::new("fork", |m, n| (m == 0 || m == 1) && n == 2);
        assert_eq!(is_treelike(&r, 4), Err((0, 1, 2)));
    }

    #[test]
    fn prefix_order_is_transitive_on_windows() {
        // chains of prefixes compose, so R_{c_f} is tree-like
        for seed in 0..20u64 {
            let f = fp(&[seed % 3, seed % 5, (seed * 7) % 4, seed % 2, 1]);
            let cf = Coloring::from_prefix(&f, Coding::Cantor);
            let r = coloring_to_relation(&cf);
            assert_eq!(is_treelike(&r, 5), Ok(()), "seed {seed}");
        }
    }

    #[test]
    fn cx_hooks() {
        let x = SetExpr::ap(0, 2);
        let c = Coloring::from_set(x.clone());
        let ambient = SetExpr::ap(4, 1);
        let (c0, c1) = c.classes(0, &ambient).unwrap();
        for a in 4..30 {
            assert_eq!(c0.member(a), a % 2 == 0);
            assert_eq!(c1.member(a), a % 2 == 1);
        }
        assert_eq!(c.constant_on(&SetExpr::ap(0, 4)), Some(0));
        assert_eq!(c.constant_on(&SetExpr::ap(1, 2)), Some(1));
        assert_eq!(c.constant_on(&SetExpr::omega()), None);
        let _ = nat(0);
    }
}
