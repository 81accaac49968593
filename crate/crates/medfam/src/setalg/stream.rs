use super::ep::EpSet;
use super::expr::{Node, SetExpr};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("stream stalled: no element found within {probes} probes")]
pub struct StreamStalled {
    pub probes: u64,
}

/// A strictly increasing enumerator of a subset of ω. `next` returns `None`
/// exactly when the set is finite and fully emitted. Single-consumer.
pub struct LazySet {
    imp: StreamImpl,
}

enum StreamImpl {
    Ep { ep: EpSet, k: u64 },
    Explicit { elems: Vec<u64>, i: usize },
    Scan { expr: SetExpr, probe: u64 },
    Nth { f: Arc<dyn Fn(u64) -> u64 + Send + Sync>, k: u64 },
}

const DEFAULT_STALL: u64 = 1 << 22;

impl LazySet {
    /// Enumerate an expression. Exhaustion is certified through the exact
    /// finiteness analysis; expressions whose finiteness is structurally
    /// unknown fall back to scanning and never report exhaustion.
    pub fn from_expr(e: &SetExpr) -> LazySet {
        if let Some(ep) = e.ep() {
            if let Some(elems) = ep.elements() {
                return LazySet { imp: StreamImpl::Explicit { elems, i: 0 } };
            }
            return LazySet { imp: StreamImpl::Ep { ep, k: 0 } };
        }
        if let Node::Enum(en) = e.node() {
            let rule = en.rule.clone();
            return LazySet { imp: StreamImpl::Nth { f: Arc::new(move |k| rule.nth(k)), k: 0 } };
        }
        LazySet { imp: StreamImpl::Scan { expr: e.clone(), probe: 0 } }
    }

    /// Finite stream from explicit elements (sorted, deduplicated here).
    pub fn from_vec(mut elems: Vec<u64>) -> LazySet {
        elems.sort_unstable();
        elems.dedup();
        LazySet { imp: StreamImpl::Explicit { elems, i: 0 } }
    }

    /// Infinite stream from a strictly increasing indexing rule.
    pub fn from_nth(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> LazySet {
        LazySet { imp: StreamImpl::Nth { f: Arc::new(f), k: 0 } }
    }

    pub fn from_ep(ep: EpSet) -> LazySet {
        if let Some(elems) = ep.elements() {
            LazySet { imp: StreamImpl::Explicit { elems, i: 0 } }
        } else {
            LazySet { imp: StreamImpl::Ep { ep, k: 0 } }
        }
    }

    /// Next element, spending at most `probes` membership probes; scanning
    /// streams surface fuel exhaustion instead of spinning.
    pub fn next_within(&mut self, probes: u64) -> Result<Option<u64>, StreamStalled> {
        match &mut self.imp {
            StreamImpl::Ep { ep, k } => {
                let v = ep.nth(*k);
                if v.is_some() {
                    *k += 1;
                }
                Ok(v)
            }
            StreamImpl::Explicit { elems, i } => {
                if *i < elems.len() {
                    *i += 1;
                    Ok(Some(elems[*i - 1]))
                } else {
                    Ok(None)
                }
            }
            StreamImpl::Scan { expr, probe } => {
                for _ in 0..probes {
                    let n = *probe;
                    *probe += 1;
                    if expr.member(n) {
                        return Ok(Some(n));
                    }
                }
                Err(StreamStalled { probes })
            }
            StreamImpl::Nth { f, k } => {
                let v = f(*k);
                *k += 1;
                Ok(Some(v))
            }
        }
    }

    /// Next element with the default probe budget; panics on a stalled scan,
    /// which signals an uncertified input.
    pub fn next(&mut self) -> Option<u64> {
        self.next_within(DEFAULT_STALL).expect("lazy set stalled")
    }

    /// Collect all elements strictly below `bound` (consumes them).
    pub fn take_below(&mut self, bound: u64) -> Vec<u64> {
        let mut out = Vec::new();
        loop {
            match &mut self.imp {
                StreamImpl::Scan { expr, probe } => {
                    while *probe < bound {
                        if expr.member(*probe) {
                            out.push(*probe);
                        }
                        *probe += 1;
                    }
                    return out;
                }
                _ => match self.peek_emit(bound) {
                    Some(v) => out.push(v),
                    None => return out,
                },
            }
        }
    }

    fn peek_emit(&mut self, bound: u64) -> Option<u64> {
        // emit the next element if it is below the bound, otherwise push back
        match &mut self.imp {
            StreamImpl::Ep { ep, k } => {
                let v = ep.nth(*k)?;
                if v < bound {
                    *k += 1;
                    Some(v)
                } else {
                    None
                }
            }
            StreamImpl::Explicit { elems, i } => {
                if *i < elems.len() && elems[*i] < bound {
                    *i += 1;
                    Some(elems[*i - 1])
                } else {
                    None
                }
            }
            StreamImpl::Nth { f, k } => {
                let v = f(*k);
                if v < bound {
                    *k += 1;
                    Some(v)
                } else {
                    None
                }
            }
            StreamImpl::Scan { .. } => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::expr::GroundSet;

    #[test]
    fn finite_stream_exhausts() {
        let mut s = LazySet::from_expr(&SetExpr::finite(&[3, 1]));
        assert_eq!(s.next(), Some(1));
        assert_eq!(s.next(), Some(3));
        assert_eq!(s.next(), None);
        assert_eq!(s.next(), None);
    }

    #[test]
    fn ap_stream_first_values() {
        let mut s = LazySet::from_expr(&SetExpr::ap(2, 3));
        let first: Vec<u64> = (0..4).map(|_| s.next().unwrap()).collect();
        assert_eq!(first, vec![2, 5, 8, 11]);
    }

    #[test]
    fn diff_stream() {
        let e = SetExpr::diff(SetExpr::ap(0, 1), SetExpr::finite(&[0]));
        let mut s = LazySet::from_expr(&e);
        let first: Vec<u64> = (0..3).map(|_| s.next().unwrap()).collect();
        assert_eq!(first, vec![1, 2, 3]);
    }

    #[test]
    fn empty_stream_is_exhausted() {
        let mut s = LazySet::from_expr(&SetExpr::empty(GroundSet::Omega));
        assert_eq!(s.next(), None);
    }

    #[test]
    fn take_below_collects_window() {
        let mut s = LazySet::from_expr(&SetExpr::ap(0, 2));
        assert_eq!(s.take_below(7), vec![0, 2, 4, 6]);
        assert_eq!(s.next(), Some(8));
    }
}
