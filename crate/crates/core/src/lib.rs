//! Symbolic jet calculus and the exact inverse problem of the calculus of
//! variations: Euler–Lagrange operators, variationality checks, Tonti
//! Lagrangians, first-order Lagrangian reconstruction and order reduction.

pub mod error;
pub mod expr;
pub mod helmholtz;
pub mod jet;
pub mod quadrature;
pub mod random;
pub mod reduction;
pub mod report;
pub mod solver;
pub mod tables;
pub mod tonti;
pub mod variational;
pub mod zero;

pub use error::{Error, Result};
pub use jet::JetContext;
pub use expr::{parse, simplify, Expr, Index, MultiIndex, Rational, VarRef};
pub use report::{ConditionEntry, ConditionSetReport};
pub use zero::{is_zero, Assignment, ZeroStatus, ZeroTestConfig};
