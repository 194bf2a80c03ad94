//! Wronskians, Maurer–Cartan matrices and the ODE of a function system.
//!
//! Given functions `a_1, …, a_n` of `t`, this crate
//!
//! * differentiates them exactly with truncated Taylor jets ([`jet`]),
//! * builds the Wronskian matrix `W` and recovers the coefficients of
//!   `a^(n) = p_1 a^(n-1) + … + p_n a` ([`wronskian`]),
//! * forms `R = W'W⁻¹`, `L = W⁻¹W'` and the characteristic coefficients of
//!   `R` ([`cartan`], [`linalg`]),
//! * and sweeps a grid checking that those coefficients coincide with the
//!   `p_j`, together with Abel's identity `p_1 = w'/w` ([`verify`]).
//!
//! ```
//! use wronski::verify::{sweep_grid, Verdict};
//! use wronski::wronskian::FunctionSystem;
//!
//! let sys = FunctionSystem::parse(&["exp(t)", "exp(2*t)"]).unwrap();
//! let report = sweep_grid(&sys, 0.0, 1.0, 11, 42).unwrap();
//! assert_eq!(report.summary.verdict, Verdict::Pass);
//! assert!((report.samples[0].p[0] - 3.0).abs() < 1e-9);
//! ```

pub mod cartan;
pub mod cli;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod verify;
pub mod wronskian;

pub use cartan::{
    abel_probe, companion_split, compute_l, compute_r, extract_p_hat, AbelProbe, CartanData,
};
pub use expr::{parse_str, Expr, Func};
pub use jet::{evaluate_jet, Jet};
pub use linalg::{det, det_jet, faddeev_leverrier, lu_factor, solve, trace, CharPoly, Matrix};
pub use verify::{exponential_oracle, sweep_grid, verify_sample, Verdict, VerifyReport};
pub use wronskian::{
    build_wronskian, cramer_coefficients, solve_coefficients, FunctionSystem, WronskianData,
};
