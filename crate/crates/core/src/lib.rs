//! Point symmetries of `i ψ_t + ψ_xx + |ψ|²ψ + V(t,x) ψ = 0`.
//!
//! * [`expr`]: exact expressions, canonical forms, zero testing
//! * [`liealg`]: the algebra of operators `D(ξ) + G(χ) + λM`
//! * [`symmetry`]: the classifying condition
//! * [`equiv`]: point equivalence transformations
//! * [`catalog`]: the classification tables and their verification
//! * [`classifier`]: reduction of a potential to its canonical case
//! * [`numcheck`]: finite-difference residuals and a split-step solver

pub mod catalog;
pub mod classifier;
pub mod equiv;
pub mod exec;
pub mod expr;
pub mod gen;
pub mod liealg;
pub mod linsolve;
pub mod numcheck;
pub mod symmetry;

pub use exec::Exec;
pub use expr::{ex, parse, Expr};
