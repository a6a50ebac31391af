//! Numerical workbench for the XXX spin-1/2 chain closed by a general 2×2
//! twist.
//!
//! The chain is represented on its full `2^N` state space. Bethe vectors are
//! built from the modified creation operators of the twist factorisation,
//! their spectrum is found from the inhomogeneous Bethe equations, and their
//! scalar products are compared with determinant formulas.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.
//!
//! ```
//! use twisted_xxx::{solver, ChainParams, RhoBranch, SpectralContext, TwistFactorization, TwistParams};
//! use twisted_xxx::scalar::cplx;
//!
//! let chain = ChainParams::homogeneous(1, cplx(1.0, 0.0)).unwrap();
//! let twist = TwistParams::new(cplx(2.0, 0.0), cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(1.0, 0.0));
//! let ctx = SpectralContext::new(chain, TwistFactorization::new(&twist, RhoBranch::Minus).unwrap());
//! let sols = solver::solve_newton(&ctx, &solver::SolverOptions::default());
//! assert_eq!(sols.len(), 2);
//! ```

pub mod bethe;
pub mod chain;
pub mod cli;
pub mod error;
pub mod overlaps;
pub mod poly;
pub mod scalar;
pub mod solver;
pub mod states;
pub mod tensor;
pub mod twist;

pub use error::{Error, Result};
pub use scalar::Real;
pub use twist::RhoBranch;

/// Complex scalar in double precision.
pub type C64 = num_complex::Complex<f64>;
pub type CMatrix = tensor::CMatrix<f64>;
pub type Poly = poly::Poly<f64>;
pub type ChainParams = chain::ChainParams<f64>;
pub type MonodromyFamily = chain::MonodromyFamily<f64>;
pub type TwistParams = twist::TwistParams<f64>;
pub type TwistFactorization = twist::TwistFactorization<f64>;
pub type VariableSet = bethe::VariableSet<f64>;
pub type SpectralContext = bethe::SpectralContext<f64>;
pub type BetheSolution = solver::BetheSolution<f64>;
pub type BetheVector = states::BetheVector<f64>;
pub type ChainOperators = states::ChainOperators<f64>;
pub type OverlapReport = overlaps::OverlapReport<f64>;
