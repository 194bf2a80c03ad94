//! The Maurer–Cartan matrix `R = W'W⁻¹` of a Wronskian, its left
//! counterpart `L = W⁻¹W'`, their characteristic coefficients, and the
//! companion split `R = a + b`.
//!
//! `R` is a companion matrix: its first `n−1` rows are the shift `a`
//! (ones on the superdiagonal) and its last row holds `p_n, …, p_1`.

use serde::Serialize;

use crate::linalg::{det, faddeev_leverrier, lu_factor, trace, CharPoly, LinalgError, Matrix};
use crate::wronskian::{WronskianData, WronskianError};

/// Solves `R W = W'` through the transposed system `Wᵀ Rᵀ = W'ᵀ`.
pub fn compute_r(d: &WronskianData) -> Result<Matrix, WronskianError> {
    regular(d)?;
    right_form(&d.w_matrix, &d.w_prime).map_err(|e| singular_to_degenerate(e, d))
}

/// `W'W⁻¹` with no degeneracy gate; fails only on an exactly singular
/// pivot.
pub fn right_form(w: &Matrix, w_prime: &Matrix) -> Result<Matrix, LinalgError> {
    let rt = lu_factor(&w.transpose()).solve(&w_prime.transpose())?;
    Ok(rt.transpose())
}

/// Solves `W L = W'`.
pub fn compute_l(d: &WronskianData) -> Result<Matrix, WronskianError> {
    regular(d)?;
    lu_factor(&d.w_matrix)
        .solve(&d.w_prime)
        .map_err(|e| singular_to_degenerate(e, d))
}

fn regular(d: &WronskianData) -> Result<(), WronskianError> {
    if d.degenerate {
        return Err(WronskianError::DegenerateWronskian(d.t));
    }
    Ok(())
}

fn singular_to_degenerate(e: LinalgError, d: &WronskianData) -> WronskianError {
    match e {
        LinalgError::SingularMatrix => WronskianError::DegenerateWronskian(d.t),
        other => other.into(),
    }
}

/// The constant shift matrix: ones where `column − row = 1`.
pub fn shift_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompanionSplit {
    pub a: Matrix,
    pub b: Matrix,
    /// Largest `|b|` entry outside the last row.
    pub offcompanion_residual: f64,
}

pub fn companion_split(r: &Matrix) -> CompanionSplit {
    let n = r.rows();
    let a = shift_matrix(n);
    let b = r.sub(&a);
    let offcompanion_residual = (0..n.saturating_sub(1))
        .flat_map(|i| b.row(i).iter().copied())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    CompanionSplit {
        a,
        b,
        offcompanion_residual,
    }
}

/// `p̂_i = R[n][n+1−i]` (1-indexed): the last row read right to left.
pub fn extract_p_hat(r: &Matrix) -> Vec<f64> {
    let n = r.rows();
    if n == 0 {
        return Vec::new();
    }
    r.row(n - 1).iter().rev().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartanData {
    pub r: Matrix,
    pub l: Matrix,
    pub char_poly: CharPoly,
    pub char_poly_l: CharPoly,
    pub split: CompanionSplit,
    pub p_hat: Vec<f64>,
    /// `‖W' − (a + b) W‖_max`.
    pub reconstruction_residual: f64,
}

impl CartanData {
    pub fn q_desc(&self) -> &[f64] {
        &self.char_poly.q_desc
    }

    pub fn q_desc_l(&self) -> &[f64] {
        &self.char_poly_l.q_desc
    }
}

pub fn cartan(d: &WronskianData) -> Result<CartanData, WronskianError> {
    let r = compute_r(d)?;
    let l = compute_l(d)?;
    let char_poly = faddeev_leverrier(&r)?;
    let char_poly_l = faddeev_leverrier(&l)?;
    let split = companion_split(&r);
    let p_hat = extract_p_hat(&r);
    let reconstruction_residual = d
        .w_prime
        .sub(&split.a.add(&split.b).matmul(&d.w_matrix))
        .norm_max();
    Ok(CartanData {
        r,
        l,
        char_poly,
        char_poly_l,
        split,
        p_hat,
        reconstruction_residual,
    })
}

/// Quantities around Abel's identity, side by side: `trace R = p_1 = w'/w`
/// and `det R = (−1)^(n+1) p_n` hold, while `det W'` generally differs from
/// `(det W)'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbelProbe {
    pub det_wprime: f64,
    pub ddet_w: f64,
    pub w: f64,
    pub trace_r: f64,
    pub det_r: f64,
    pub p1: f64,
    pub pn: f64,
}

impl AbelProbe {
    /// `w'/w`.
    pub fn log_derivative(&self) -> f64 {
        self.ddet_w / self.w
    }

    /// `(−1)^(n+1) p_n`, the determinant of the companion matrix.
    pub fn signed_pn(&self, n: usize) -> f64 {
        if n % 2 == 1 {
            self.pn
        } else {
            -self.pn
        }
    }
}

pub fn abel_probe(d: &WronskianData, r: &Matrix, p: &[f64]) -> Result<AbelProbe, WronskianError> {
    regular(d)?;
    let n = d.n();
    if p.len() != n || r.rows() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "probe needs {n} coefficients and an {n}x{n} matrix"
        ))
        .into());
    }
    Ok(AbelProbe {
        det_wprime: det(&d.w_prime),
        ddet_w: d.wprime,
        w: d.w,
        trace_r: trace(r),
        det_r: det(r),
        p1: p[0],
        pn: p[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wronskian::{build_wronskian, solve_coefficients, FunctionSystem};

    fn data(funcs: &[&str], t: f64) -> WronskianData {
        build_wronskian(&FunctionSystem::parse(funcs).unwrap(), t).unwrap()
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows)
    }

    #[test]
    fn r_for_euler_pair() {
        let r = compute_r(&data(&["t", "t^2"], 1.0)).unwrap();
        assert!(r.sub(&m(&[&[0.0, 1.0], &[-2.0, 2.0]])).norm_max() <= 1e-12);
    }

    #[test]
    fn r_and_l_for_linear_pair() {
        for &t in &[-1.0, 0.0, 2.5] {
            let d = data(&["1", "t"], t);
            let expected = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
            assert_eq!(compute_r(&d).unwrap(), expected);
            assert_eq!(compute_l(&d).unwrap(), expected);
        }
    }

    #[test]
    fn scalar_case() {
        for &t in &[0.0, 0.3, -1.0] {
            let d = data(&["exp(3*t)"], t);
            let r = compute_r(&d).unwrap();
            let l = compute_l(&d).unwrap();
            assert!((r[(0, 0)] - 3.0).abs() < 1e-14);
            assert_eq!(r, l);
            let probe = abel_probe(&d, &r, &solve_coefficients(&d).unwrap()).unwrap();
            assert!((probe.trace_r - 3.0).abs() < 1e-14);
            assert!((probe.det_r - 3.0).abs() < 1e-14);
            assert!((probe.p1 - 3.0).abs() < 1e-14);
            assert!((probe.log_derivative() - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn traces_of_r_and_l_agree() {
        let d = data(&["exp(t)", "sin(t)", "t^2"], 0.9);
        let r = compute_r(&d).unwrap();
        let l = compute_l(&d).unwrap();
        assert!((trace(&r) - trace(&l)).abs() <= 1e-10);
    }

    #[test]
    fn split_examples() {
        let s = companion_split(&m(&[&[0.0, 1.0], &[-2.0, 2.0]]));
        assert_eq!(s.a, m(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(s.b, m(&[&[0.0, 0.0], &[-2.0, 2.0]]));
        assert_eq!(s.offcompanion_residual, 0.0);

        let s = companion_split(&m(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(s.b, Matrix::zeros(2, 2));
        assert_eq!(s.offcompanion_residual, 0.0);

        let s = companion_split(&Matrix::identity(2));
        assert_eq!(s.b, m(&[&[1.0, -1.0], &[0.0, 1.0]]));
        assert_eq!(s.offcompanion_residual, 1.0);
    }

    #[test]
    fn shift_is_nilpotent() {
        for n in 1..=8 {
            let a = shift_matrix(n);
            let mut power = Matrix::identity(n);
            for _ in 0..n {
                power = power.matmul(&a);
            }
            assert_eq!(power, Matrix::zeros(n, n));
        }
    }

    #[test]
    fn p_hat_reads_last_row_backwards() {
        assert_eq!(
            extract_p_hat(&m(&[&[0.0, 1.0], &[-2.0, 2.0]])),
            vec![2.0, -2.0]
        );
        assert_eq!(
            extract_p_hat(&m(&[&[0.0, 1.0], &[0.0, 0.0]])),
            vec![0.0, 0.0]
        );
        assert_eq!(extract_p_hat(&m(&[&[3.0]])), vec![3.0]);
    }

    #[test]
    fn probe_shows_det_w_prime_differs_from_derivative_of_det() {
        let d = data(&["exp(t)", "exp(2*t)"], 0.0);
        let r = compute_r(&d).unwrap();
        let probe = abel_probe(&d, &r, &solve_coefficients(&d).unwrap()).unwrap();
        assert!((probe.det_wprime - 2.0).abs() < 1e-12);
        assert!((probe.ddet_w - 3.0).abs() < 1e-12);
        assert!((probe.trace_r - 3.0).abs() < 1e-12);
        assert!((probe.det_r - 2.0).abs() < 1e-12);
        assert!((probe.p1 - 3.0).abs() < 1e-12);
        assert!((probe.pn + 2.0).abs() < 1e-12);
        assert!((probe.signed_pn(2) - probe.det_r).abs() < 1e-12);
    }

    #[test]
    fn probe_for_harmonic_pair() {
        let d = data(&["cos(t)", "sin(t)"], 1.3);
        let r = compute_r(&d).unwrap();
        let probe = abel_probe(&d, &r, &solve_coefficients(&d).unwrap()).unwrap();
        assert!(probe.ddet_w.abs() < 1e-15);
        assert!(probe.trace_r.abs() < 1e-14);
        assert!(probe.p1.abs() < 1e-14);
    }

    #[test]
    fn degenerate_input_is_rejected() {
        let d = data(&["t", "2*t"], 1.0);
        assert!(matches!(
            compute_r(&d),
            Err(WronskianError::DegenerateWronskian(_))
        ));
        assert!(matches!(
            compute_l(&d),
            Err(WronskianError::DegenerateWronskian(_))
        ));
        assert!(matches!(
            cartan(&d),
            Err(WronskianError::DegenerateWronskian(_))
        ));
    }

    #[test]
    fn cartan_bundle_for_euler_pair() {
        let c = cartan(&data(&["t", "t^2"], 1.0)).unwrap();
        assert!(c
            .q_desc()
            .iter()
            .zip([2.0, -2.0])
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(c
            .q_desc_l()
            .iter()
            .zip([2.0, -2.0])
            .all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(c.reconstruction_residual < 1e-12);
        assert!(c.split.offcompanion_residual < 1e-12);
    }
}
