//! Constructions around maximal eventually different families for ideals on
//! the naturals, at finitely checkable scale: symbolic set algebra over coded
//! ground sets, structural ideal terms with sound partial decision, pair
//! colorings and tree-like relations, weak-P⁺ and weak-Ramsey extractors, the
//! MED family pipeline, and the closed-family complexity-reduction transform.
//! Every finitely checkable property ships with an independent brute-force
//! oracle in [`harness`].

pub mod codes;
pub mod colorings;
pub mod ideals;
pub mod med;
pub mod pplus;
pub mod ramsey;
pub mod setalg;

pub use codes::{Coding, FuncPrefix, Nat};
