use crate::setalg::{GroundSet, SetExpr};
use std::fmt;
use std::sync::Arc;

/// A bijection between a subset A of a source ground set and a whole target
/// ground set, with pointwise evaluation in both directions and optional
/// symbolic preimage/image transformers for exact transport of verdicts.
#[derive(Clone)]
pub struct Bijection {
    inner: Arc<BijectionInner>,
}

struct BijectionInner {
    name: String,
    source: GroundSet,
    target: GroundSet,
    // defined on A; None off the domain
    forward: Box<dyn Fn(u64) -> Option<u64> + Send + Sync>,
    backward: Box<dyn Fn(u64) -> u64 + Send + Sync>,
    // symbolic π⁻¹ : target-side expressions → source-side expressions
    preimage_expr: Box<dyn Fn(&SetExpr) -> Option<SetExpr> + Send + Sync>,
    // symbolic π : source-side expressions (⊆ A) → target-side expressions
    image_expr: Box<dyn Fn(&SetExpr) -> Option<SetExpr> + Send + Sync>,
}

impl Bijection {
    pub fn new(
        name: impl Into<String>,
        source: GroundSet,
        target: GroundSet,
        forward: impl Fn(u64) -> Option<u64> + Send + Sync + 'static,
        backward: impl Fn(u64) -> u64 + Send + Sync + 'static,
        preimage_expr: impl Fn(&SetExpr) -> Option<SetExpr> + Send + Sync + 'static,
        image_expr: impl Fn(&SetExpr) -> Option<SetExpr> + Send + Sync + 'static,
    ) -> Bijection {
        Bijection {
            inner: Arc::new(BijectionInner {
                name: name.into(),
                source,
                target,
                forward: Box::new(forward),
                backward: Box::new(backward),
                preimage_expr: Box::new(preimage_expr),
                image_expr: Box::new(image_expr),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn source(&self) -> &GroundSet {
        &self.inner.source
    }

    pub fn target(&self) -> &GroundSet {
        &self.inner.target
    }

    /// π(p), defined exactly on the domain A.
    pub fn forward(&self, p: u64) -> Option<u64> {
        (self.inner.forward)(p)
    }

    /// π⁻¹(q), total on the target.
    pub fn backward(&self, q: u64) -> u64 {
        (self.inner.backward)(q)
    }

    pub fn preimage_expr(&self, e: &SetExpr) -> Option<SetExpr> {
        (self.inner.preimage_expr)(e)
    }

    pub fn image_expr(&self, e: &SetExpr) -> Option<SetExpr> {
        (self.inner.image_expr)(e)
    }
}

impl fmt::Debug for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bijection({})", self.inner.name)
    }
}
