//! Lauricella F_A evaluation, fundamental solutions and Green's functions of
//! the singular elliptic operator
//!
//! L_α u = Σ u_{xᵢxᵢ} + Σ_{j≤n} (2αⱼ/xⱼ) u_{xⱼ},
//!
//! and the explicit solution of the mixed Dirichlet / weighted-Neumann
//! problem on the quarter-ball {|x| < R, x₁..xₙ > 0}.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod fundsol;
pub mod geomquad;
pub mod hyperfun;
pub mod polynomial;
pub mod rules;
pub mod solver;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
