//! Wronskian matrices and recovery of the ODE coefficients.
//!
//! For functions `a_1, …, a_n` the Wronskian matrix `W` has `a_k^(r-1)` in
//! row `r`, column `k` (1-indexed). If `W` is nonsingular the functions
//! satisfy
//!
//! ```text
//! a^(n) = p_1 a^(n-1) + p_2 a^(n-2) + … + p_n a
//! ```
//!
//! and the coefficients `p_j` are recovered pointwise, both by Cramer's rule
//! and by a direct linear solve.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse_str, Expr, ParseError};
use crate::jet::{evaluate_jet, EvalError, Jet};
use crate::linalg::{
    condition_estimate, det, det_jet, lu_factor, solve, LinalgError, Matrix, MAX_DIM,
};

/// `|w|` below this multiple of the Hadamard bound counts as a vanishing
/// Wronskian.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Relative factor of the Cramer/solve agreement bound, which is
/// `CROSS_CHECK_FACTOR · κ(W) · (1 + ‖p‖_∞)`.
pub const CROSS_CHECK_FACTOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WronskianError {
    #[error("a function system needs between 1 and {MAX_DIM} functions, got {0}")]
    InvalidDimension(usize),
    #[error("function {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("function {index}: {source}")]
    Domain {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("Wronskian vanishes at t = {0}")]
    DegenerateWronskian(f64),
    #[error("Cramer and direct solve disagree by {discrepancy:e} (tolerance {tolerance:e})")]
    CrossCheckViolation { discrepancy: f64, tolerance: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The functions `a_1, …, a_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSystem {
    functions: Vec<Expr>,
}

impl FunctionSystem {
    pub fn new(functions: Vec<Expr>) -> Result<FunctionSystem, WronskianError> {
        if functions.is_empty() || functions.len() > MAX_DIM {
            return Err(WronskianError::InvalidDimension(functions.len()));
        }
        Ok(FunctionSystem { functions })
    }

    /// Parses each source text as one function.
    pub fn parse<S: AsRef<str>>(sources: &[S]) -> Result<FunctionSystem, WronskianError> {
        let functions = sources
            .iter()
            .enumerate()
            .map(|(index, s)| {
                parse_str(s.as_ref()).map_err(|source| WronskianError::Parse { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        FunctionSystem::new(functions)
    }

    pub fn n(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[Expr] {
        &self.functions
    }

    /// Order-`n` jets of every function at `t`.
    pub fn jets(&self, t: f64) -> Result<Vec<Jet>, WronskianError> {
        let n = self.n();
        self.functions
            .iter()
            .enumerate()
            .map(|(index, e)| {
                evaluate_jet(e, t, n).map_err(|source| WronskianError::Domain { index, source })
            })
            .collect()
    }
}

/// Derivative data of a function system at one point.
#[derive(Debug, Clone, Serialize)]
pub struct WronskianData {
    pub t: f64,
    /// `w[(r, k)] = a_k^(r)(t)`, 0-indexed.
    pub w_matrix: Matrix,
    /// Elementwise derivative of `w_matrix`.
    pub w_prime: Matrix,
    /// `a_k^(n)(t)`, the last row of `w_prime`.
    pub nth_derivatives: Vec<f64>,
    /// `det W`.
    pub w: f64,
    /// `(det W)'`, exact through the jet determinant.
    pub wprime: f64,
    #[serde(skip)]
    pub jets: Vec<Jet>,
    pub kappa: f64,
    pub degenerate: bool,
}

impl WronskianData {
    pub fn n(&self) -> usize {
        self.w_matrix.rows()
    }
}

pub fn build_wronskian(sys: &FunctionSystem, t: f64) -> Result<WronskianData, WronskianError> {
    wronskian_from_jets(t, sys.jets(t)?)
}

/// Assembles [`WronskianData`] from `n` jets of order at least `n`.
pub fn wronskian_from_jets(t: f64, jets: Vec<Jet>) -> Result<WronskianData, WronskianError> {
    let n = jets.len();
    if n == 0 || n > MAX_DIM {
        return Err(WronskianError::InvalidDimension(n));
    }
    if let Some(short) = jets.iter().find(|j| j.order() < n) {
        return Err(LinalgError::Jet(crate::jet::JetError::OrderExceeded {
            requested: n,
            order: short.order(),
        })
        .into());
    }
    // derivs[k][r] = a_k^(r)(t), r = 0..=n
    let derivs: Vec<Vec<f64>> = jets.iter().map(|j| j.derivatives()).collect();
    let w_matrix = Matrix::from_fn(n, n, |r, k| derivs[k][r]);
    let w_prime = Matrix::from_fn(n, n, |r, k| derivs[k][r + 1]);
    let nth_derivatives: Vec<f64> = derivs.iter().map(|d| d[n]).collect();

    // jet of a_k^(r) truncated to order 1: (a_k^(r), a_k^(r+1))
    let jet_rows: Vec<Vec<Jet>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|k| Jet::from_coeffs(t, vec![derivs[k][r], derivs[k][r + 1]]))
                .collect()
        })
        .collect();
    let det_w = det_jet(&jet_rows)?;
    let wprime = det_w.coeffs()[1];

    let w = det(&w_matrix);
    let hadamard: f64 = (0..n)
        .map(|r| w_matrix.row(r).iter().map(|x| x * x).sum::<f64>().sqrt())
        .product();
    let degenerate = w == 0.0 || w.abs() < DEGENERACY_THRESHOLD * hadamard || !w.is_finite();
    let kappa = condition_estimate(&w_matrix);

    Ok(WronskianData {
        t,
        w_matrix,
        w_prime,
        nth_derivatives,
        w,
        wprime,
        jets,
        kappa,
        degenerate,
    })
}

fn ensure_regular(d: &WronskianData) -> Result<(), WronskianError> {
    if d.degenerate {
        Err(WronskianError::DegenerateWronskian(d.t))
    } else {
        Ok(())
    }
}

/// `p_i = w_i / w`, where `w_i` is `det W` with row `n+1-i` (1-indexed)
/// replaced by the n-th derivatives.
pub fn cramer_coefficients(d: &WronskianData) -> Result<Vec<f64>, WronskianError> {
    ensure_regular(d)?;
    let n = d.n();
    Ok((1..=n)
        .map(|i| {
            let mut wi = d.w_matrix.clone();
            wi.row_mut(n - i).copy_from_slice(&d.nth_derivatives);
            det(&wi) / d.w
        })
        .collect())
}

/// Solves `M p = rhs` with `M[k][j] = a_k^(n-j)` and `rhs[k] = a_k^(n)`.
pub fn solve_coefficients(d: &WronskianData) -> Result<Vec<f64>, WronskianError> {
    ensure_regular(d)?;
    let n = d.n();
    let m = Matrix::from_fn(n, n, |k, j| d.w_matrix[(n - 1 - j, k)]);
    let p = solve(&m, &Matrix::column(&d.nth_derivatives)).map_err(|e| match e {
        LinalgError::SingularMatrix => WronskianError::DegenerateWronskian(d.t),
        other => other.into(),
    })?;
    Ok(p.col(0))
}

/// Both coefficient routes and their agreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficients {
    /// From the direct solve (the production route).
    pub p: Vec<f64>,
    pub p_cramer: Vec<f64>,
    /// `‖p − p_cramer‖_∞`.
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl Coefficients {
    pub fn agree(&self) -> bool {
        self.discrepancy <= self.tolerance
    }

    pub fn check(&self) -> Result<(), WronskianError> {
        if self.agree() {
            Ok(())
        } else {
            Err(WronskianError::CrossCheckViolation {
                discrepancy: self.discrepancy,
                tolerance: self.tolerance,
            })
        }
    }
}

/// Runs both routes. A disagreement is recorded, not raised; call
/// [`Coefficients::check`] to turn it into an error.
pub fn recover_coefficients(d: &WronskianData) -> Result<Coefficients, WronskianError> {
    let p = solve_coefficients(d)?;
    let p_cramer = cramer_coefficients(d)?;
    let discrepancy = max_abs_diff(&p, &p_cramer);
    let tolerance = CROSS_CHECK_FACTOR * d.kappa * (1.0 + norm_inf(&p));
    Ok(Coefficients {
        p,
        p_cramer,
        discrepancy,
        tolerance,
    })
}

/// The system `A·T`: output `k` is `Σ_m T[m][k] · a_m`, so the Wronskian
/// matrix of the result is `W(A) T`.
pub fn apply_basis_change(jets: &[Jet], t: &Matrix) -> Result<Vec<Jet>, WronskianError> {
    let n = jets.len();
    if t.rows() != n || t.cols() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "basis change is {}x{}, system has {n} functions",
            t.rows(),
            t.cols()
        ))
        .into());
    }
    if lu_factor(t).is_singular() {
        return Err(LinalgError::SingularMatrix.into());
    }
    (0..n)
        .map(|k| {
            let mut acc = jets[0].scale(t[(0, k)]);
            for (m, jet) in jets.iter().enumerate().skip(1) {
                acc = acc
                    .add(&jet.scale(t[(m, k)]))
                    .map_err(|e| WronskianError::Linalg(e.into()))?;
            }
            Ok(acc)
        })
        .collect()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(funcs: &[&str]) -> FunctionSystem {
        FunctionSystem::parse(funcs).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && max_abs_diff(a, b) <= tol
    }

    #[test]
    fn euler_pair_at_one() {
        let d = build_wronskian(&system(&["t", "t^2"]), 1.0).unwrap();
        assert_eq!(d.w_matrix, Matrix::from_rows(&[[1.0, 1.0], [1.0, 2.0]]));
        assert_eq!(d.w_prime, Matrix::from_rows(&[[1.0, 2.0], [0.0, 2.0]]));
        assert_eq!(d.w, 1.0);
        assert_eq!(d.wprime, 2.0);
        assert!(!d.degenerate);
        assert_eq!(cramer_coefficients(&d).unwrap(), vec![2.0, -2.0]);
        assert!(close(&solve_coefficients(&d).unwrap(), &[2.0, -2.0], 1e-15));
    }

    #[test]
    fn shared_rows_between_w_and_w_prime() {
        let d = build_wronskian(&system(&["exp(t)", "sin(2*t)", "t^3"]), 0.7).unwrap();
        for r in 0..2 {
            assert_eq!(d.w_prime.row(r), d.w_matrix.row(r + 1));
        }
        assert_eq!(d.w_prime.row(2), &d.nth_derivatives[..]);
    }

    #[test]
    fn constant_and_linear() {
        for &t in &[-2.0, 0.0, 3.5] {
            let d = build_wronskian(&system(&["1", "t"]), t).unwrap();
            assert_eq!(d.w_matrix, Matrix::from_rows(&[[1.0, t], [0.0, 1.0]]));
            assert_eq!(d.w, 1.0);
            assert_eq!(d.wprime, 0.0);
            assert_eq!(cramer_coefficients(&d).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn harmonic_pair() {
        for &t in &[0.0, 0.4, 2.0] {
            let d = build_wronskian(&system(&["cos(t)", "sin(t)"]), t).unwrap();
            assert!((d.w - 1.0).abs() < 1e-15);
            assert!(d.wprime.abs() < 1e-15);
            assert!(close(
                &cramer_coefficients(&d).unwrap(),
                &[0.0, -1.0],
                1e-15
            ));
        }
    }

    #[test]
    fn exponential_pair_and_cubic_basis() {
        let d = build_wronskian(&system(&["exp(t)", "exp(2*t)"]), 0.0).unwrap();
        assert!(close(&solve_coefficients(&d).unwrap(), &[3.0, -2.0], 1e-14));
        let d = build_wronskian(&system(&["1", "t", "t^2"]), 0.3).unwrap();
        assert_eq!(solve_coefficients(&d).unwrap(), vec![0.0, 0.0, 0.0]);
        let c = recover_coefficients(&d).unwrap();
        assert!(c.agree());
        assert!(c.check().is_ok());
    }

    #[test]
    fn degenerate_systems() {
        let d = build_wronskian(&system(&["t", "2*t"]), 0.5).unwrap();
        assert!(d.degenerate);
        assert_eq!(
            cramer_coefficients(&d),
            Err(WronskianError::DegenerateWronskian(0.5))
        );
        assert_eq!(
            solve_coefficients(&d),
            Err(WronskianError::DegenerateWronskian(0.5))
        );
        // w = t^2 vanishes at the origin
        assert!(
            build_wronskian(&system(&["t", "t^2"]), 0.0)
                .unwrap()
                .degenerate
        );
        assert!(build_wronskian(&system(&["0"]), 0.0).unwrap().degenerate);
    }

    #[test]
    fn domain_errors_name_the_function() {
        let err = build_wronskian(&system(&["t", "ln(t)"]), -1.0).unwrap_err();
        assert!(matches!(err, WronskianError::Domain { index: 1, .. }));
    }

    #[test]
    fn cross_check_violation_is_reportable() {
        let c = Coefficients {
            p: vec![1.0],
            p_cramer: vec![2.0],
            discrepancy: 1.0,
            tolerance: 0.5,
        };
        assert!(matches!(
            c.check(),
            Err(WronskianError::CrossCheckViolation { .. })
        ));
    }

    #[test]
    fn basis_change_examples() {
        let sys = system(&["1", "t"]);
        let jets = sys.jets(0.8).unwrap();
        assert_eq!(
            apply_basis_change(&jets, &Matrix::identity(2)).unwrap(),
            jets
        );

        let t_mat = Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        let mixed = apply_basis_change(&jets, &t_mat).unwrap();
        let d = wronskian_from_jets(0.8, mixed).unwrap();
        assert_eq!(d.w_matrix, Matrix::from_rows(&[[1.0, 1.8], [0.0, 1.0]]));
        let original = wronskian_from_jets(0.8, jets.clone()).unwrap();
        assert_eq!(original.w_matrix.matmul(&t_mat), d.w_matrix);

        let inv = solve(&t_mat, &Matrix::identity(2)).unwrap();
        let back = apply_basis_change(&apply_basis_change(&jets, &t_mat).unwrap(), &inv).unwrap();
        for (a, b) in back.iter().zip(&jets) {
            assert!(close(a.coeffs(), b.coeffs(), 1e-12));
        }

        let singular = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(
            apply_basis_change(&jets, &singular),
            Err(WronskianError::Linalg(LinalgError::SingularMatrix))
        );
    }

    #[test]
    fn system_size_limits() {
        assert_eq!(
            FunctionSystem::new(vec![]),
            Err(WronskianError::InvalidDimension(0))
        );
        let nine: Vec<String> = (0..9).map(|k| format!("t^{k}")).collect();
        assert_eq!(
            FunctionSystem::parse(&nine),
            Err(WronskianError::InvalidDimension(9))
        );
        assert!(matches!(
            FunctionSystem::parse(&["t", "y"]),
            Err(WronskianError::Parse { index: 1, .. })
        ));
    }
}
