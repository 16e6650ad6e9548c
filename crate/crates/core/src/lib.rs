//! Exact desk-scale computations around the locally analytic principal series
//! of `SL2(Qp)`.
//!
//! The crate provides, from the bottom up:
//!
//! * [`padic`] - capped relative-precision arithmetic in `Qp`, including the
//!   `log`/`exp` pair on their convergence domains;
//! * [`laf`] - locally analytic functions on compact opens of `Zp`, stored as
//!   disjoint disk covers carrying truncated power series with tracked error
//!   valuations;
//! * [`linalg`] - exact rank/kernel computations over `Qp` at capped precision,
//!   with valuation-pivoted elimination;
//! * [`characters`] - locally analytic characters of the diagonal torus, split
//!   into an algebraic exponent and a locally constant part, together with the
//!   reducibility classification;
//! * [`pseries`] - the two-chart model of the principal series, its group and
//!   Lie-algebra actions, the intertwining operator, and finite-slice checks
//!   of the associated exact sequence;
//! * [`smoothrep`] - the finite-level model of smooth induction on the
//!   projective line over `Z/p^n`;
//! * [`finite`] - conjugacy classes, character tables (modular eigenvalue
//!   method, lifted to exact cyclotomic integers), and multiplicity identities
//!   for small finite groups;
//! * [`suite`] - seeded, machine-readable verification suites used by the CLI
//!   and the acceptance tests.

pub mod characters;
pub mod error;
pub mod finite;
pub mod laf;
pub mod linalg;
pub mod padic;
pub mod pseries;
pub mod sample;
pub mod smoothrep;
pub mod suite;

pub use error::{Error, Result};
pub use padic::PadicScalar;
