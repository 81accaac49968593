//! Symbolic set algebra over coded countable ground sets.
//!
//! A [`SetExpr`] denotes a subset of a coded ground set (ω, or an iterated
//! product/sum space coded through the Cantor pairing). Membership is
//! decidable for every term, windows materialize exactly, sections of product
//! expressions are computed symbolically, and a conservative exact analysis
//! settles emptiness/finiteness/cofiniteness wherever the structure allows.

pub mod ep;
mod expr;
mod stream;

pub use ep::EpSet;
pub use expr::{
    expr_of_ep, retag_codes, window_hex, CardInfo, ColumnProfile, EnumRule, EnumSet, FiberMap,
    FiberStructure, GroundSet, Node, SetExpr, SetalgError, SumTag, Trilean,
};
pub use stream::{LazySet, StreamStalled};
