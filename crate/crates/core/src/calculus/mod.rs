//! Exact lattice-expression calculus and an inference engine for
//! `F(α, β)`-regularity, with replayable derivations.

pub mod bound;
pub mod engine;
pub mod expr;
pub mod poly;
pub mod scripts;

pub use bound::{interp_norm_bound, BoundExpr};
pub use engine::{Engine, Fact, RegularityFact, Rule, Step};
pub use expr::{normalize, term_indices, Attr, Context, Generator, LatticeExpr, Term};
pub use poly::{prove_positive, rat, Poly};
pub use scripts::{index_bounds_hold, replay, DerivationTrace, TraceStep, SCRIPTS};
