//! Exact newform Dedekind sums attached to pairs of primitive Dirichlet
//! characters, the identities they satisfy, and the lattice they trace out on
//! Γ₁(q₁q₂).
//!
//! Module map:
//!
//! * [`cyclotomic`]: exact arithmetic in ℚ(ζ_m), the home of every value
//! * [`numtheory`]: sawtooth, floor sums, unit groups, class numbers
//! * [`characters`]: Dirichlet characters, Gauss sums, B_{1,χ}
//! * [`modgroup`]: SL₂(ℤ), Γ₀/Γ₁, coset tables, Schreier generators
//! * [`dedekind`]: the sums themselves and their identity checks
//! * [`lattice`]: Hermite normal form and image lattices
//! * [`suites`]: seeded randomized verification suites used by the CLI

pub mod characters;
pub mod cyclotomic;
pub mod dedekind;
pub mod lattice;
pub mod modgroup;
pub mod numtheory;
pub mod suites;

pub use characters::{CharacterPair, DirichletCharacter};
pub use cyclotomic::CyclotomicNumber;
pub use dedekind::{DedekindContext, DedekindError, Formula};
pub use lattice::{ImageReport, IntegerLattice};
pub use modgroup::SL2Matrix;
