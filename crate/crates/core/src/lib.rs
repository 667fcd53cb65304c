//! Smallest-eigenvalue solvers for the Sturm-Liouville problem
//! `-u'' + q u = lambda u` on `[0,1]` with `u(0) = u(1) = 0`.
//!
//! Four algorithms with exact resource ledgers:
//!
//! * [`classical::solve_worst_case`]: bisection on the finite-difference
//!   matrix `M_q` with `n ~ eps^-1/2` function values.
//! * [`classical::solve_randomized`]: cubic-spline surrogate plus a Monte
//!   Carlo correction, `~ eps^-2/5` function values.
//! * [`qsolvers::solve_bit_query`]: the same surrogate with the correction
//!   computed by a simulated quantum summation, `~ eps^-1/3` bit queries.
//! * [`qsolvers::solve_power_query`]: phase estimation of `exp(i M_q / 2)` on a
//!   Jaksch-Papageorgiou initial state, `log2(1/eps)` power queries and
//!   `(3/2) log2(1/eps)` qubits, simulated exactly from the outcome
//!   distribution.
//!
//! ```
//! use sleig::classical::{solve_worst_case, Constants};
//! use sleig::potential::Potential;
//!
//! let q = Potential::parse("constant:0.5").unwrap();
//! let r = solve_worst_case(&q, 1e-4, &Constants::default()).unwrap();
//! assert!((r.estimate - (std::f64::consts::PI.powi(2) + 0.5)).abs() < 1e-4);
//! ```

pub mod approx;
pub mod bench;
pub mod classical;
pub mod error;
pub mod jpstate;
pub mod potential;
pub mod qkernel;
pub mod qsolvers;
pub mod rng;
pub mod tridiag;

pub use error::{Error, Result};
