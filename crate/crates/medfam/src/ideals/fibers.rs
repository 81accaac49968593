use super::ordinal::OrdinalNotation;
use super::submeasure::Submeasure;
use crate::codes::{pair_checked, unpair};
use crate::setalg::{FiberMap, FiberStructure, GroundSet};
use num::rational::BigRational;
use num::{BigInt, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// `fiber(n) = {n}` on ω: the reduction witnessing fin ≤ fin.
pub fn singleton_fibers() -> FiberMap {
    FiberMap::new(
        "id".into(),
        GroundSet::Omega,
        |p| p,
        |l, _| Some(vec![l]),
        FiberStructure::Singleton,
    )
}

/// Consecutive intervals `Iₙ` with `φ(Iₙ) > n+1`: an infinite union of
/// fibers has φ ≥ sup φ(Iₙ) = ∞ by monotonicity. The construction grows each
/// interval until the bound is certified, so every materialized fiber carries
/// its own growth witness.
pub fn interval_fibers(phi: &Submeasure) -> FiberMap {
    let cuts = Arc::new(IntervalCuts { phi: phi.clone(), cuts: Mutex::new(vec![0]) });
    let c1 = cuts.clone();
    let c2 = cuts.clone();
    FiberMap::new(
        format!("intervals[{}]", phi.name()),
        GroundSet::Omega,
        move |p| c1.level_of(p),
        move |l, cap| c2.fiber(l, cap),
        FiberStructure::Intervals { growth_tag: phi.name().to_string() },
    )
}

struct IntervalCuts {
    phi: Submeasure,
    cuts: Mutex<Vec<u64>>, // cuts[n] = start of interval n; cuts[0] = 0
}

const INTERVAL_CAP: u64 = 1 << 20;

impl IntervalCuts {
    /// Extend the cut table so interval `level` exists, each interval being
    /// the shortest [start, end) with φ > n+1. Construction aborts (without
    /// committing a partial cut) as soon as an interval under construction
    /// exceeds `len_cap` elements — harmonic-style weights make interval
    /// lengths grow exponentially with the level.
    fn ensure_capped(&self, level: u64, len_cap: u64) -> bool {
        let mut cuts = self.cuts.lock().unwrap();
        while (cuts.len() as u64) <= level + 1 {
            let n = cuts.len() as u64 - 1; // building interval n
            let start = *cuts.last().unwrap();
            let budget = BigRational::from(BigInt::from(n + 1));
            let end = if self.phi.is_additive() {
                let mut acc = BigRational::zero();
                let mut e = start;
                loop {
                    if e - start >= len_cap {
                        return false;
                    }
                    acc += self.phi.phi(&[e]);
                    e += 1;
                    if acc > budget {
                        break e;
                    }
                }
            } else {
                let mut e = start + 1;
                loop {
                    if e - start >= len_cap.min(1 << 12) {
                        return false;
                    }
                    let v: Vec<u64> = (start..e).collect();
                    if self.phi.phi(&v) > budget {
                        break e;
                    }
                    e += 1;
                }
            };
            cuts.push(end);
        }
        true
    }

    fn level_of(&self, p: u64) -> u64 {
        loop {
            {
                let cuts = self.cuts.lock().unwrap();
                if let Some(i) = cuts.windows(2).position(|w| w[0] <= p && p < w[1]) {
                    return i as u64;
                }
            }
            let next = { self.cuts.lock().unwrap().len() as u64 };
            assert!(
                self.ensure_capped(next, INTERVAL_CAP),
                "interval construction stalled locating {p}: submeasure not proper?"
            );
        }
    }

    fn fiber(&self, level: u64, cap: u64) -> Option<Vec<u64>> {
        if !self.ensure_capped(level, cap.min(INTERVAL_CAP)) {
            return None;
        }
        let cuts = self.cuts.lock().unwrap();
        let (s, e) = (cuts[level as usize], cuts[level as usize + 1]);
        if e - s > cap {
            return None;
        }
        Some((s..e).collect())
    }
}

/// Max-composition levels for the iterated Fubini powers:
/// `g₁(x) = x`, `g_{β+1}(n, x) = max(n, g_β(x))`, and at limits
/// `g_α(n, x) = max(n, g_{αₙ}(x))`. Fibers are finite and partition the
/// ground set; `A ∈ fin ⇔ g⁻¹(A) ∈ fin^α` is verified by property tests, not
/// assumed.
pub fn maxlevel_fibers(alpha: &OrdinalNotation) -> FiberMap {
    match alpha {
        OrdinalNotation::One => singleton_fibers(),
        OrdinalNotation::Succ(beta) => {
            let inner = maxlevel_fibers(beta);
            let ground = alpha.ground_set();
            let name = format!("maxlvl({})", alpha.name());
            let li = inner.clone();
            let fi = inner.clone();
            FiberMap::new(
                name,
                ground,
                move |p| {
                    let (n, x) = unpair(p);
                    n.max(li.level_of(x))
                },
                move |k, cap| maxlevel_fiber_at(&fi, k, cap),
                FiberStructure::MaxLevel { inner: Box::new(inner) },
            )
        }
        OrdinalNotation::Lim(rule) => {
            let ground = alpha.ground_set();
            let name = format!("maxlvl({})", rule.name);
            let slices: Arc<Mutex<HashMap<u64, FiberMap>>> = Arc::new(Mutex::new(HashMap::new()));
            let seq = rule.seq.clone();
            let slice_map = move |n: u64| -> FiberMap {
                let mut cache = slices.lock().unwrap();
                cache.entry(n).or_insert_with(|| maxlevel_fibers(&seq(n))).clone()
            };
            let sm1 = slice_map.clone();
            let sm2 = slice_map;
            FiberMap::new(
                name,
                ground,
                move |p| {
                    let (n, x) = unpair(p);
                    n.max(sm1(n).level_of(x))
                },
                move |k, cap| {
                    // {(n,x) : max(n, level_n(x)) = k}
                    let mut out = Vec::new();
                    for n in 0..=k {
                        let inner = sm2(n);
                        let want_eq = n < k;
                        let levels: Vec<u64> = if want_eq { vec![k] } else { (0..=k).collect() };
                        for l in levels {
                            for x in inner.try_fiber(l, cap)? {
                                out.push(pair_checked(n, x)?);
                                if out.len() as u64 > cap {
                                    return None;
                                }
                            }
                        }
                    }
                    Some(out)
                },
                FiberStructure::MaxLevel { inner: Box::new(singleton_fibers()) },
            )
        }
    }
}

fn maxlevel_fiber_at(inner: &FiberMap, k: u64, cap: u64) -> Option<Vec<u64>> {
    // {(k, x) : level(x) ≤ k} ∪ {(n, x) : n < k, level(x) = k}
    let mut out = Vec::new();
    for l in 0..=k {
        for x in inner.try_fiber(l, cap)? {
            out.push(pair_checked(k, x)?);
            if out.len() as u64 > cap {
                return None;
            }
        }
    }
    for x in inner.try_fiber(k, cap)? {
        for n in 0..k {
            out.push(pair_checked(n, x)?);
            if out.len() as u64 > cap {
                return None;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::submeasure::Submeasure;

    #[test]
    fn singleton_fibers_are_identity() {
        let r = singleton_fibers();
        assert_eq!(r.fiber(4), vec![4]);
        assert_eq!(r.level_of(9), 9);
    }

    #[test]
    fn counting_intervals_match_shortest_witnesses() {
        let r = interval_fibers(&Submeasure::counting());
        assert_eq!(r.fiber(0), vec![0, 1]);
        assert_eq!(r.fiber(1), vec![2, 3, 4]);
        assert_eq!(r.fiber(2), vec![5, 6, 7, 8]);
        assert_eq!(r.level_of(6), 2);
        assert_eq!(r.level_of(0), 0);
    }

    #[test]
    fn maxlevel_fiber_for_fin_squared() {
        let r = maxlevel_fibers(&OrdinalNotation::finite(2));
        // points with max(n, x) = 1: (1,0), (1,1), (0,1)
        let mut f = r.fiber(1);
        f.sort_unstable();
        let mut expect = vec![pair_checked(1, 0).unwrap(), pair_checked(1, 1).unwrap(), pair_checked(0, 1).unwrap()];
        expect.sort_unstable();
        assert_eq!(f, expect);
        assert_eq!(r.level_of(pair_checked(3, 2).unwrap()), 3);
    }

    #[test]
    fn fibers_partition_a_window() {
        for r in [
            singleton_fibers(),
            interval_fibers(&Submeasure::counting()),
            maxlevel_fibers(&OrdinalNotation::finite(2)),
            maxlevel_fibers(&OrdinalNotation::finite(3)),
            maxlevel_fibers(&OrdinalNotation::omega()),
        ] {
            for p in 0..200u64 {
                let l = r.level_of(p);
                // deep fibers can exceed the materialization cap; where they
                // fit, the point must sit in its own fiber and every windowed
                // fiber point must map back to the level
                if let Some(fib) = r.try_fiber(l, 1 << 12) {
                    assert!(fib.contains(&p), "{}: point {p} missing from its fiber", r.name());
                    for &q in fib.iter().filter(|&&q| q < 200) {
                        assert_eq!(r.level_of(q), l, "{}: {p} vs {q}", r.name());
                    }
                }
            }
        }
    }

    #[test]
    fn interval_growth_certificates() {
        // harmonic interval lengths grow like e^n; stay shallow there
        let cases = [
            (Submeasure::counting(), 6u64),
            (Submeasure::weighted(crate::ideals::submeasure::WeightRule::Harmonic), 3),
            (
                Submeasure::weighted(crate::ideals::submeasure::WeightRule::Const(
                    crate::ideals::submeasure::ratio(2, 1),
                )),
                6,
            ),
        ];
        for (phi, depth) in cases {
            let r = interval_fibers(&phi);
            for n in 0..depth {
                let f = r.fiber(n);
                assert!(phi.phi_exceeds(&f, n + 1), "{}: interval {n}", phi.name());
                // shortest: dropping the last element breaks the bound
                let shorter = &f[..f.len() - 1];
                assert!(!phi.phi_exceeds(shorter, n + 1));
            }
        }
    }
}
