//! Small dense matrices (n ≤ 8): LU with partial pivoting, determinants,
//! solves, Faddeev–LeVerrier characteristic polynomials, and a
//! division-free determinant over jet entries.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;
use thiserror::Error;

use crate::jet::{Jet, JetError};

/// Pivots below this fraction of the largest entry mark the matrix singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Largest dimension handled by [`det_jet`] and [`faddeev_leverrier`].
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// # Panics
    /// If the rows have different lengths.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn column(values: &[f64]) -> Matrix {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// # Panics
    /// On incompatible shapes.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| s * x).collect(),
        }
    }

    fn zip(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "elementwise shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `PA = LU`, stored compactly: unit-lower `L` below the diagonal, `U` on
/// and above it.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: Matrix,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn permutation_matrix(&self) -> Matrix {
        let n = self.perm.len();
        Matrix::from_fn(n, n, |i, j| if self.perm[i] == j { 1.0 } else { 0.0 })
    }

    pub fn lower(&self) -> Matrix {
        let n = self.perm.len();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.factors[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> Matrix {
        let n = self.perm.len();
        Matrix::from_fn(n, n, |i, j| if j >= i { self.factors[(i, j)] } else { 0.0 })
    }

    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        let sign = if self.swaps.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        (0..self.perm.len()).fold(sign, |acc, i| acc * self.factors[(i, i)])
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.perm.len();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows()
            )));
        }
        if self.singular {
            return Err(LinalgError::SingularMatrix);
        }
        let lu = &self.factors;
        let mut x = Matrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / lu[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Gaussian elimination with maximal-magnitude row pivoting.
///
/// # Panics
/// If `a` is not square.
pub fn lu_factor(a: &Matrix) -> Lu {
    assert!(a.is_square(), "lu_factor needs a square matrix");
    let n = a.rows();
    let threshold = SINGULAR_THRESHOLD * a.norm_max();
    let mut f = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut singular = false;
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, f[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot < threshold || pivot == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                f.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            swaps += 1;
        }
        let d = f[(k, k)];
        for i in k + 1..n {
            let l = f[(i, k)] / d;
            f[(i, k)] = l;
            for j in k + 1..n {
                f[(i, j)] -= l * f[(k, j)];
            }
        }
    }
    Lu {
        factors: f,
        perm,
        swaps,
        singular,
    }
}

pub fn det(a: &Matrix) -> f64 {
    lu_factor(a).det()
}

pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(
            "solve needs a square matrix".into(),
        ));
    }
    lu_factor(a).solve(b)
}

pub fn trace(a: &Matrix) -> f64 {
    (0..a.rows().min(a.cols())).map(|i| a[(i, i)]).sum()
}

/// Monic characteristic polynomial `det(λI − A) = λⁿ + c_1 λⁿ⁻¹ + … + c_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPoly {
    pub c: Vec<f64>,
    /// `q_desc[j] = −c[j]`, so that `Aⁿ = q_1 Aⁿ⁻¹ + … + q_n I`.
    pub q_desc: Vec<f64>,
    /// `M_n + c_n I`; zero in exact arithmetic.
    pub cayley_hamilton_residual: Matrix,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.c.len()
    }

    /// Evaluates `χ(λ)` by Horner's rule.
    pub fn eval(&self, lambda: f64) -> f64 {
        self.c.iter().fold(1.0, |acc, ck| acc * lambda + ck)
    }
}

/// Faddeev–LeVerrier recursion: `M_1 = A`, `c_1 = −tr M_1`,
/// `M_k = A (M_{k−1} + c_{k−1} I)`, `c_k = −tr(M_k) / k`.
pub fn faddeev_leverrier(a: &Matrix) -> Result<CharPoly, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(
            "characteristic polynomial needs a square matrix".into(),
        ));
    }
    let n = a.rows();
    if n > MAX_DIM {
        return Err(LinalgError::DimensionTooLarge(n));
    }
    let mut c = Vec::with_capacity(n);
    let mut m = a.clone();
    for k in 1..=n {
        if k > 1 {
            let mut shifted = m;
            for i in 0..n {
                shifted[(i, i)] += c[k - 2];
            }
            m = a.matmul(&shifted);
        }
        c.push(-trace(&m) / k as f64);
    }
    let mut residual = m;
    if let Some(cn) = c.last() {
        for i in 0..n {
            residual[(i, i)] += cn;
        }
    }
    Ok(CharPoly {
        q_desc: c.iter().map(|x| -x).collect(),
        c,
        cayley_hamilton_residual: residual,
    })
}

/// `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁`; `f64::INFINITY` when `A` is singular.
pub fn condition_estimate(a: &Matrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    match solve(a, &Matrix::identity(a.rows())) {
        Ok(inv) if inv.is_finite() => a.norm_1() * inv.norm_1(),
        _ => f64::INFINITY,
    }
}

/// Determinant of a square matrix of jets by Laplace expansion along the
/// first column. Uses only ring operations, so it is exact in the jet ring
/// up to rounding: coefficient 0 is the determinant and coefficient 1 its
/// first derivative.
pub fn det_jet(a: &[Vec<Jet>]) -> Result<Jet, LinalgError> {
    let n = a.len();
    if n == 0 {
        return Err(LinalgError::DimensionMismatch("empty jet matrix".into()));
    }
    if n > MAX_DIM {
        return Err(LinalgError::DimensionTooLarge(n));
    }
    if let Some(bad) = a.iter().find(|row| row.len() != n) {
        return Err(LinalgError::DimensionMismatch(format!(
            "jet matrix row of length {} in a {n}x{n} matrix",
            bad.len()
        )));
    }
    let first = &a[0][0];
    for entry in a.iter().flatten() {
        if entry.order() != first.order() {
            return Err(JetError::OrderMismatch(first.order(), entry.order()).into());
        }
        if entry.basepoint() != first.basepoint() {
            return Err(JetError::BasepointMismatch(first.basepoint(), entry.basepoint()).into());
        }
    }
    let rows: Vec<usize> = (0..n).collect();
    Ok(laplace(a, &rows, 0))
}

/// Determinant of the minor on `rows` × columns `col..`.
fn laplace(a: &[Vec<Jet>], rows: &[usize], col: usize) -> Jet {
    if rows.len() == 1 {
        return a[rows[0]][col].clone();
    }
    let mut acc: Option<Jet> = None;
    for (pos, &r) in rows.iter().enumerate() {
        let rest: Vec<usize> = rows.iter().copied().filter(|&x| x != r).collect();
        let minor = laplace(a, &rest, col + 1);
        let term = a[r][col].mul(&minor).expect("shapes checked");
        let term = if pos % 2 == 0 { term } else { term.neg() };
        acc = Some(match acc {
            None => term,
            Some(sum) => sum.add(&term).expect("shapes checked"),
        });
    }
    acc.expect("nonempty minor")
}
