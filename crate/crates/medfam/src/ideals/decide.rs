use super::ordinal::{LimRule, OrdinalNotation};
use super::submeasure::Submeasure;
use super::{IdealTerm, Verdict};
use crate::setalg::{
    expr_of_ep, retag_codes, EpSet, FiberStructure, GroundSet, Node, SetExpr, Trilean,
};

pub(super) fn decide_verdict(ideal: &IdealTerm, e: &SetExpr) -> Verdict {
    decide_norm(ideal, &normalize(e))
}

fn decide_norm(ideal: &IdealTerm, e: &SetExpr) -> Verdict {
    match ideal {
        IdealTerm::Fin => fin_verdict(e),
        IdealTerm::SubmeasureIdeal(phi) => submeasure_verdict(phi, e),
        IdealTerm::FinPow(OrdinalNotation::One) => fin_verdict(e),
        IdealTerm::FinPow(OrdinalNotation::Succ(beta)) => {
            product_verdict(&IdealTerm::Fin, &IdealTerm::FinPow((**beta).clone()), e)
        }
        IdealTerm::FinPow(OrdinalNotation::Lim(rule)) => limit_verdict(rule, e),
        IdealTerm::Fubini(i, j) => product_verdict(i, j, e),
        IdealTerm::Restrict(i, a) => {
            decide_norm(i, &normalize(&SetExpr::inter(e.clone(), a.clone())))
        }
        IdealTerm::Transport(i, map) => match map.preimage_expr(e) {
            Some(pe) => decide_norm(i, &normalize(&pe)),
            None => Verdict::Unsupported,
        },
        IdealTerm::FinOplusPowerset => {
            // evens carry P(ω), odds carry fin: small ⇔ the odd part is finite
            fin_verdict(&normalize(&SetExpr::inter(e.clone(), SetExpr::ap(1, 2))))
        }
    }
}

/// Push boolean operations into preimages under one and the same fiber map:
/// for a partition map, r⁻¹ commutes with all of them.
fn normalize(e: &SetExpr) -> SetExpr {
    match e.node() {
        Node::Union(a, b) => {
            rebuild_binop(e, &normalize(a), &normalize(b), SetExpr::union)
        }
        Node::Inter(a, b) => {
            rebuild_binop(e, &normalize(a), &normalize(b), SetExpr::inter)
        }
        Node::Diff(a, b) => {
            rebuild_binop(e, &normalize(a), &normalize(b), SetExpr::diff)
        }
        Node::Complement(a) => {
            let a = normalize(a);
            if let Node::Preimage { map, of } = a.node() {
                return SetExpr::preimage(map.clone(), SetExpr::complement(of.clone()));
            }
            SetExpr::complement(a)
        }
        _ => e.clone(),
    }
}

fn rebuild_binop(
    orig: &SetExpr,
    a: &SetExpr,
    b: &SetExpr,
    op: fn(SetExpr, SetExpr) -> SetExpr,
) -> SetExpr {
    if let (Node::Preimage { map: ra, of: ea }, Node::Preimage { map: rb, of: eb }) =
        (a.node(), b.node())
    {
        if ra.same_map(rb) {
            return SetExpr::preimage(ra.clone(), op(ea.clone(), eb.clone()));
        }
    }
    let _ = orig;
    op(a.clone(), b.clone())
}

fn verdict_from_finiteness(finite: Trilean) -> Verdict {
    match finite {
        Trilean::True => Verdict::Small,
        Trilean::False => Verdict::Positive,
        Trilean::Unknown => Verdict::Unsupported,
    }
}

fn fin_verdict(e: &SetExpr) -> Verdict {
    verdict_from_finiteness(e.card_info().finite)
}

fn submeasure_verdict(phi: &Submeasure, e: &SetExpr) -> Verdict {
    if phi.proper() == Some(false) {
        return Verdict::Small; // φ(ω) < ∞: the improper ideal is everything
    }
    if phi.is_counting() {
        let v = fin_verdict(e);
        if v != Verdict::Unsupported {
            return v;
        }
    }
    if let Some(ep) = e.ep() {
        return match phi.ep_divergent(&ep) {
            Some(true) => Verdict::Positive,
            Some(false) => Verdict::Small,
            None => Verdict::Unsupported,
        };
    }
    match e.node() {
        Node::Preimage { map, of } => {
            let fin = of.card_info().finite;
            if fin.is_true() {
                return Verdict::Small; // a finite union of finite fibers
            }
            if fin.is_false() {
                // infinitely many intervals with φ(Iₙ) > n+1 inside the
                // preimage force φ = ∞ by monotonicity
                if let FiberStructure::Intervals { growth_tag } = map.structure() {
                    if growth_tag == phi.name() {
                        return Verdict::Positive;
                    }
                }
            }
            Verdict::Unsupported
        }
        Node::Union(a, b) => match (submeasure_verdict(phi, a), submeasure_verdict(phi, b)) {
            (Verdict::Positive, _) | (_, Verdict::Positive) => Verdict::Positive,
            (Verdict::Small, Verdict::Small) => Verdict::Small,
            _ => Verdict::Unsupported,
        },
        Node::Inter(a, b) => {
            if submeasure_verdict(phi, a) == Verdict::Small
                || submeasure_verdict(phi, b) == Verdict::Small
            {
                Verdict::Small
            } else {
                Verdict::Unsupported
            }
        }
        Node::Diff(a, b) => {
            let va = submeasure_verdict(phi, a);
            if va == Verdict::Small {
                return Verdict::Small;
            }
            // φ(A) ≤ φ(A∖B) + φ(B): positive minus small stays positive
            if va == Verdict::Positive && submeasure_verdict(phi, b) == Verdict::Small {
                return Verdict::Positive;
            }
            Verdict::Unsupported
        }
        Node::Complement(a) => {
            if submeasure_verdict(phi, a) == Verdict::Small && phi.proper() == Some(true) {
                Verdict::Positive
            } else {
                Verdict::Unsupported
            }
        }
        _ => Verdict::Unsupported,
    }
}

fn is_fin_power(ideal: &IdealTerm) -> bool {
    match ideal {
        IdealTerm::Fin | IdealTerm::FinPow(_) => true,
        IdealTerm::Fubini(i, j) => is_fin_power(i) && is_fin_power(j),
        _ => false,
    }
}

fn product_verdict(col: &IdealTerm, sec: &IdealTerm, e: &SetExpr) -> Verdict {
    if let Node::Preimage { map, of } = e.node() {
        if matches!(map.structure(), FiberStructure::MaxLevel { .. }) && is_fin_power(sec) {
            // The section at column n is the inner-map preimage of
            // Tₙ = ([0,n] if n ∈ E) ∪ (E ∩ (n,∞)), so Tₙ is finite iff E is,
            // uniformly in n; grounding the recursion at fin (where the
            // preimage is the index set itself), the bad-column set is ∅ for
            // finite E and all of ω otherwise.
            return match of.card_info().finite {
                Trilean::True => Verdict::Small,
                Trilean::False => decide_norm(col, &SetExpr::omega()),
                Trilean::Unknown => Verdict::Unsupported,
            };
        }
        return Verdict::Unsupported;
    }
    profile_verdict(col, sec, e).unwrap_or(Verdict::Unsupported)
}

fn profile_verdict(col: &IdealTerm, sec: &IdealTerm, e: &SetExpr) -> Option<Verdict> {
    let profile = e.column_profile()?;
    let sec_ground = sec.ground();
    let mut bad = EpSet::empty();
    let mut unknown = EpSet::empty();
    for (cls, s) in &profile.parts {
        let s = if *s.ground() == sec_ground {
            s.clone()
        } else {
            match retag_codes(s, sec_ground.clone()) {
                Some(x) => x,
                None => {
                    unknown = unknown.union(cls)?;
                    continue;
                }
            }
        };
        match decide_norm(sec, &normalize(&s)) {
            Verdict::Positive => bad = bad.union(cls)?,
            Verdict::Small => {}
            Verdict::Unsupported => unknown = unknown.union(cls)?,
        }
    }
    Some(settle_columns(col, bad, unknown))
}

/// Verdict of "{columns whose section is positive} ∈ col-ideal" given the
/// certainly-bad class and the undecided class.
fn settle_columns(col: &IdealTerm, bad: EpSet, unknown: EpSet) -> Verdict {
    let bad_verdict = decide_norm(col, &normalize(&expr_of_ep(&bad, GroundSet::Omega)));
    if unknown.is_empty() {
        return bad_verdict;
    }
    if bad_verdict == Verdict::Positive {
        return Verdict::Positive; // more bad columns cannot lose positivity
    }
    let over = match bad.union(&unknown) {
        Some(x) => x,
        None => return Verdict::Unsupported,
    };
    if decide_norm(col, &normalize(&expr_of_ep(&over, GroundSet::Omega))) == Verdict::Small {
        return Verdict::Small; // the true bad set sits inside a small one
    }
    Verdict::Unsupported
}

fn limit_verdict(rule: &LimRule, e: &SetExpr) -> Verdict {
    if let Node::Preimage { map, of } = e.node() {
        if matches!(map.structure(), FiberStructure::MaxLevel { .. }) {
            // slice ideals are the powers fin^{αₙ}; same uniform T-argument
            // as in the successor case
            return match of.card_info().finite {
                Trilean::True => Verdict::Small,
                Trilean::False => Verdict::Positive,
                Trilean::Unknown => Verdict::Unsupported,
            };
        }
        return Verdict::Unsupported;
    }
    limit_profile_verdict(rule, e).unwrap_or(Verdict::Unsupported)
}

#[cfg(test)]
mod tests {
    use super::super::{decide, fin_reduction, ratio, Submeasure, WeightRule};
    use super::*;
    

    fn fin2() -> IdealTerm {
        IdealTerm::finpow(2)
    }

    #[test]
    fn fin_decides_the_ep_fragment() {
        assert_eq!(decide(&IdealTerm::Fin, &SetExpr::ap(0, 2)).unwrap(), Verdict::Positive);
        assert_eq!(decide(&IdealTerm::Fin, &SetExpr::finite(&[1, 2, 3])).unwrap(), Verdict::Small);
        let nearly_empty = SetExpr::diff(SetExpr::ap(0, 2), SetExpr::ap(0, 2));
        assert_eq!(decide(&IdealTerm::Fin, &nearly_empty).unwrap(), Verdict::Small);
    }

    #[test]
    fn fubini_on_cylinders() {
        let i = IdealTerm::fubini(IdealTerm::Fin, IdealTerm::Fin);
        let one_column = SetExpr::cylinder(SetExpr::finite(&[0]), SetExpr::omega());
        assert_eq!(decide(&i, &one_column).unwrap(), Verdict::Small);
        assert_eq!(decide(&i, &SetExpr::full(i.ground())).unwrap(), Verdict::Positive);
        let evens_cols = SetExpr::cylinder(SetExpr::ap(0, 2), SetExpr::omega());
        assert_eq!(decide(&fin2(), &evens_cols).unwrap(), Verdict::Positive);
        // finitely many infinite columns plus finite junk stays small
        let junk = SetExpr::union(one_column, SetExpr::finite_in(i.ground(), &[17, 40]));
        assert_eq!(decide(&i, &junk).unwrap(), Verdict::Small);
    }

    #[test]
    fn finpow_one_matches_fin() {
        for e in [
            SetExpr::ap(3, 7),
            SetExpr::finite(&[0, 9]),
            SetExpr::complement(SetExpr::finite(&[4])),
            SetExpr::inter(SetExpr::ap(0, 2), SetExpr::ap(0, 3)),
        ] {
            assert_eq!(
                decide(&IdealTerm::FinPow(OrdinalNotation::One), &e).unwrap(),
                decide(&IdealTerm::Fin, &e).unwrap()
            );
        }
    }

    #[test]
    fn finite_sets_are_small_everywhere() {
        let everyone: Vec<IdealTerm> = vec![
            IdealTerm::Fin,
            IdealTerm::SubmeasureIdeal(Submeasure::counting()),
            IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Harmonic)),
            IdealTerm::fubini(IdealTerm::Fin, IdealTerm::Fin),
            fin2(),
            IdealTerm::finpow(3),
            IdealTerm::FinPow(OrdinalNotation::omega()),
            IdealTerm::FinOplusPowerset,
        ];
        for ideal in everyone {
            let g = ideal.ground();
            let s = SetExpr::finite_in(g, &[0, 5, 17, 29]);
            assert_eq!(decide(&ideal, &s).unwrap(), Verdict::Small, "{}", ideal.name());
        }
    }

    #[test]
    fn restrict_examples() {
        let r = IdealTerm::Fin.restrict(SetExpr::ap(0, 2));
        assert_eq!(decide(&r, &SetExpr::ap(0, 4)).unwrap(), Verdict::Positive);
        assert_eq!(decide(&r, &SetExpr::finite(&[0, 2])).unwrap(), Verdict::Small);
        // odds restricted to evens vanish
        assert_eq!(decide(&r, &SetExpr::ap(1, 2)).unwrap(), Verdict::Small);
    }

    #[test]
    fn fin_oplus_powerset_convention() {
        let i = IdealTerm::FinOplusPowerset;
        assert_eq!(decide(&i, &SetExpr::ap(0, 2)).unwrap(), Verdict::Small);
        assert_eq!(decide(&i, &SetExpr::ap(1, 2)).unwrap(), Verdict::Positive);
        assert_eq!(decide(&i, &SetExpr::omega()).unwrap(), Verdict::Positive);
        assert_eq!(decide(&i, &SetExpr::finite(&[1, 3, 5])).unwrap(), Verdict::Small);
    }

    #[test]
    fn preimage_law_spot_checks() {
        let cases: Vec<IdealTerm> = vec![
            IdealTerm::Fin,
            IdealTerm::SubmeasureIdeal(Submeasure::counting()),
            IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Harmonic)),
            IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Const(ratio(2, 1)))),
            fin2(),
            IdealTerm::FinPow(OrdinalNotation::omega()),
        ];
        for ideal in cases {
            let r = fin_reduction(&ideal).unwrap();
            let small = SetExpr::preimage(r.clone(), SetExpr::finite(&[0, 3, 8]));
            assert_eq!(decide(&ideal, &small).unwrap(), Verdict::Small, "{}", ideal.name());
            let pos = SetExpr::preimage(r, SetExpr::ap(1, 3));
            assert_eq!(decide(&ideal, &pos).unwrap(), Verdict::Positive, "{}", ideal.name());
        }
    }

    #[test]
    fn preimage_boolean_combinations_normalize() {
        let r = fin_reduction(&IdealTerm::Fin).unwrap();
        let a = SetExpr::preimage(r.clone(), SetExpr::ap(0, 2));
        let b = SetExpr::preimage(r, SetExpr::ap(0, 3));
        let i = SetExpr::inter(a.clone(), b.clone());
        assert_eq!(decide(&IdealTerm::Fin, &i).unwrap(), Verdict::Positive);
        let d = SetExpr::diff(a.clone(), b);
        assert_eq!(decide(&IdealTerm::Fin, &d).unwrap(), Verdict::Positive);
        let almost_nothing = SetExpr::diff(a.clone(), a);
        assert_eq!(decide(&IdealTerm::Fin, &almost_nothing).unwrap(), Verdict::Small);
    }

    #[test]
    fn submeasure_weighted_tail_verdicts() {
        let harmonic = IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Harmonic));
        assert_eq!(decide(&harmonic, &SetExpr::ap(5, 9)).unwrap(), Verdict::Positive);
        let geom = IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Geom(ratio(1, 2))));
        // summable weights make the ideal improper: everything is small
        assert_eq!(decide(&geom, &SetExpr::omega()).unwrap(), Verdict::Small);
    }

    #[test]
    fn unsupported_is_a_value_not_a_lie() {
        // an enumeration with no divergence certificate for a weighted rule
        let harmonic = IdealTerm::SubmeasureIdeal(Submeasure::weighted(WeightRule::Harmonic));
        let r = fin_reduction(&IdealTerm::Fin).unwrap();
        let odd_pre = SetExpr::preimage(r, SetExpr::ap(1, 2));
        // preimage under a foreign map: no growth certificate for this φ
        assert_eq!(decide(&harmonic, &odd_pre).unwrap(), Verdict::Unsupported);
    }

    #[test]
    fn fubini_matches_brute_force_on_cylinder_combos() {
        use crate::codes::pair;
        let i = IdealTerm::fubini(IdealTerm::Fin, IdealTerm::Fin);
        let g = i.ground();
        let exprs = vec![
            SetExpr::cylinder(SetExpr::ap(0, 3), SetExpr::ap(1, 2)),
            SetExpr::union(
                SetExpr::cylinder(SetExpr::finite(&[1, 4]), SetExpr::omega()),
                SetExpr::cylinder(SetExpr::ap(0, 2), SetExpr::finite(&[3])),
            ),
            SetExpr::complement(SetExpr::cylinder(SetExpr::ap(0, 2), SetExpr::omega())),
            SetExpr::diff(
                SetExpr::full(g.clone()),
                SetExpr::cylinder(SetExpr::omega(), SetExpr::ap(0, 2)),
            ),
        ];
        for e in exprs {
            let verdict = decide(&i, &e).unwrap();
            assert_ne!(verdict, Verdict::Unsupported, "{e}");
            // brute force: with these atoms (thresholds 0, strides ≤ 3), a
            // section is infinite iff it meets a deep probe band, and the bad
            // column set is infinite iff it meets a tail band
            let col_is_bad = |x: u64| (64..64 + 24).any(|y| e.member(pair(x, y)));
            let expect = if (24..48).any(col_is_bad) { Verdict::Positive } else { Verdict::Small };
            assert_eq!(verdict, expect, "{e}");
        }
    }
}

fn limit_profile_verdict(rule: &LimRule, e: &SetExpr) -> Option<Verdict> {
    let profile = e.column_profile()?;
    let mut bad = EpSet::empty();
    let mut unknown = EpSet::empty();
    for (cls, s) in &profile.parts {
        let ci = s.card_info();
        if ci.finite.is_true() {
            continue; // fin ⊆ fin^α for every slice power
        }
        if ci.full.is_true() {
            // every iterated power is proper (induction through the display),
            // so a full slice is positive at every level
            bad = bad.union(cls)?;
            continue;
        }
        match cls.elements() {
            Some(cols) => {
                // finitely many slices: decide each against its own power
                for n in cols {
                    let slice_ideal = IdealTerm::FinPow((rule.seq)(n));
                    let slice_ground = slice_ideal.ground();
                    let s = match retag_codes(s, slice_ground) {
                        Some(x) => x,
                        None => {
                            unknown = unknown.union(&EpSet::from_finite(&[n]))?;
                            continue;
                        }
                    };
                    match decide_norm(&slice_ideal, &normalize(&s)) {
                        Verdict::Positive => bad = bad.union(&EpSet::from_finite(&[n]))?,
                        Verdict::Small => {}
                        Verdict::Unsupported => {
                            unknown = unknown.union(&EpSet::from_finite(&[n]))?
                        }
                    }
                }
            }
            None => unknown = unknown.union(cls)?, // unbounded slice family with varying powers
        }
    }
    Some(settle_columns(&IdealTerm::Fin, bad, unknown))
}
