//! Sharply transitive subsets of `PGL₂(K)` over finite fields.
//!
//! A subset `S` of a group acting on a set `Ω` is *sharply transitive*
//! (or *regular*) if for every pair of points `x, y ∈ Ω` there is exactly
//! one `g ∈ S` with `gx = y`. This crate works with `G = PGL₂(K)` acting
//! on the projective line `P¹(K)` for a finite field `K` of order `q`,
//! where such subsets have size `q + 1` and correspond to
//! `(q+1) × (q+1)` Latin squares.
//!
//! The toolkit provides:
//!
//! - exact arithmetic in `GF(p^m)` ([`gf`]),
//! - canonical `PGL₂` elements, the action on `P¹`, and fixed-point
//!   analysis ([`projline`]),
//! - regularity verification, the product identity
//!   `b₁d₂a₃c₄ = c₁a₂d₃b₄` for zero-patterned quadruples, and a
//!   constructive closure trace showing `gh ∈ S` for regular sets
//!   containing the identity ([`regular`]),
//! - recognition and construction of the regular subgroups: `C_{q+1}`,
//!   the dihedral group of order `q + 1` for odd `q`, and the
//!   exceptional `A₄` (q = 11), `S₄` (q = 23), `A₅` (q = 59), plus
//!   conjugacy-class partitioning ([`classify`]),
//! - exhaustive backtracking enumeration of all regular sets for small
//!   `q` with bitset pruning, and the Latin-square correspondence
//!   ([`search`]).

pub mod classify;
pub mod gf;
pub mod projline;
pub mod regular;
pub mod search;

pub use classify::{ClassifyError, ConjugacyClass, ConjugacyClasses, SubgroupTag, SubgroupType};
pub use gf::{Field, FieldElem, FieldSpec, GfError};
pub use projline::{GroupElem, ProjPoint, ProjlineError};
pub use regular::{ClosureTrace, RegularError, RegularSet, SegreReport};
pub use search::{RegularSetStream, SearchConfig, SearchError, TheoremReport};
