//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] of order `m` at `t0` stores `u_k = f^(k)(t0) / k!` for
//! `k = 0..=m`. Every operation truncates at the common order, so the
//! coefficients of a composite expression are the exact Taylor
//! coefficients up to rounding.

use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Func};

/// `|g_0|` below this is treated as an exact zero in [`Jet::div`].
pub const DIVISION_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("jet basepoint mismatch: {0} vs {1}")]
    BasepointMismatch(f64, f64),
    #[error("jet division by zero (constant term {0:e})")]
    DivisionByZero(f64),
    #[error("{func} undefined at constant term {value}")]
    DomainError { func: &'static str, value: f64 },
    #[error("derivative order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
    t0: f64,
}

impl Jet {
    /// Builds a jet from Taylor-normalized coefficients; the order is
    /// `coeffs.len() - 1`.
    ///
    /// # Panics
    /// If `coeffs` is empty.
    pub fn from_coeffs(t0: f64, coeffs: Vec<f64>) -> Jet {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs, t0 }
    }

    pub fn constant(t0: f64, order: usize, value: f64) -> Jet {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { coeffs, t0 }
    }

    /// The identity function `t` expanded at `t0`.
    pub fn var(t0: f64, order: usize) -> Jet {
        let mut jet = Jet::constant(t0, order, t0);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn basepoint(&self) -> f64 {
        self.t0
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k! * u_k`, the k-th derivative at the basepoint.
    pub fn derivative(&self, k: usize) -> Result<f64, JetError> {
        let u = self.coeffs.get(k).ok_or(JetError::OrderExceeded {
            requested: k,
            order: self.order(),
        })?;
        Ok(u * factorial(k))
    }

    /// All derivatives `f(t0), f'(t0), …, f^(m)(t0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, u)| {
                if k > 0 {
                    fact *= k as f64;
                }
                u * fact
            })
            .collect()
    }

    /// Keeps coefficients `0..=order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let keep = (order + 1).min(self.coeffs.len());
        Jet {
            coeffs: self.coeffs[..keep].to_vec(),
            t0: self.t0,
        }
    }

    /// The jet of `f^(k)`: shifts the derivative sequence down by `k`,
    /// reducing the order by `k`.
    pub fn differentiate(&self, k: usize) -> Result<Jet, JetError> {
        if k > self.order() {
            return Err(JetError::OrderExceeded {
                requested: k,
                order: self.order(),
            });
        }
        let derivs = self.derivatives();
        let mut fact = 1.0;
        let coeffs = derivs[k..]
            .iter()
            .enumerate()
            .map(|(j, d)| {
                if j > 0 {
                    fact *= j as f64;
                }
                d / fact
            })
            .collect();
        Ok(Jet {
            coeffs,
            t0: self.t0,
        })
    }

    fn check(&self, other: &Jet) -> Result<(), JetError> {
        if self.order() != other.order() {
            return Err(JetError::OrderMismatch(self.order(), other.order()));
        }
        if self.t0 != other.t0 {
            return Err(JetError::BasepointMismatch(self.t0, other.t0));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            t0: self.t0,
        })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|u| s * u).collect(),
            t0: self.t0,
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let m = self.order();
        let coeffs = (0..=m)
            .map(|k| (0..=k).map(|i| self.coeffs[i] * other.coeffs[k - i]).sum())
            .collect();
        Ok(Jet {
            coeffs,
            t0: self.t0,
        })
    }

    /// Series division; `mul(&self.div(g)?, g)` reproduces `self`.
    pub fn div(&self, g: &Jet) -> Result<Jet, JetError> {
        self.check(g)?;
        let g0 = g.coeffs[0];
        if g0.abs() < DIVISION_THRESHOLD {
            return Err(JetError::DivisionByZero(g0));
        }
        let m = self.order();
        let mut out = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let acc: f64 = (1..=k).map(|i| g.coeffs[i] * out[k - i]).sum();
            out.push((self.coeffs[k] - acc) / g0);
        }
        Ok(Jet {
            coeffs: out,
            t0: self.t0,
        })
    }

    pub fn exp(&self) -> Jet {
        let f = &self.coeffs;
        let mut e = Vec::with_capacity(f.len());
        e.push(f[0].exp());
        for k in 1..f.len() {
            let acc: f64 = (1..=k).map(|i| i as f64 * f[i] * e[k - i]).sum();
            e.push(acc / k as f64);
        }
        Jet {
            coeffs: e,
            t0: self.t0,
        }
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let f = &self.coeffs;
        if f[0].is_nan() || f[0] <= 0.0 {
            return Err(JetError::DomainError {
                func: "ln",
                value: f[0],
            });
        }
        let mut l = Vec::with_capacity(f.len());
        l.push(f[0].ln());
        for k in 1..f.len() {
            let acc: f64 = (1..k).map(|i| i as f64 * l[i] * f[k - i]).sum();
            l.push((f[k] - acc / k as f64) / f[0]);
        }
        Ok(Jet {
            coeffs: l,
            t0: self.t0,
        })
    }

    /// `(sin f, cos f)` from the coupled recurrence.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let f = &self.coeffs;
        let mut s = Vec::with_capacity(f.len());
        let mut c = Vec::with_capacity(f.len());
        s.push(f[0].sin());
        c.push(f[0].cos());
        for k in 1..f.len() {
            let mut sk = 0.0;
            let mut ck = 0.0;
            for i in 1..=k {
                let w = i as f64 * f[i];
                sk += w * c[k - i];
                ck += w * s[k - i];
            }
            s.push(sk / k as f64);
            c.push(-ck / k as f64);
        }
        (
            Jet {
                coeffs: s,
                t0: self.t0,
            },
            Jet {
                coeffs: c,
                t0: self.t0,
            },
        )
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    /// `exp(ln(f) / 2)`.
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        if self.coeffs[0].is_nan() || self.coeffs[0] <= 0.0 {
            return Err(JetError::DomainError {
                func: "sqrt",
                value: self.coeffs[0],
            });
        }
        Ok(self.ln()?.scale(0.5).exp())
    }

    pub fn elementary(&self, func: Func) -> Result<Jet, JetError> {
        match func {
            Func::Exp => Ok(self.exp()),
            Func::Ln => self.ln(),
            Func::Sin => Ok(self.sin()),
            Func::Cos => Ok(self.cos()),
            Func::Sqrt => self.sqrt(),
        }
    }

    /// Integer powers by repeated squaring (negative ones through a final
    /// division); any other exponent as `exp(exponent * ln f)`.
    pub fn powf(&self, exponent: f64) -> Result<Jet, JetError> {
        if exponent.fract() == 0.0 && exponent.abs() <= u32::MAX as f64 {
            let magnitude = self.powi(exponent.abs() as u32);
            if exponent < 0.0 {
                let one = Jet::constant(self.t0, self.order(), 1.0);
                return one.div(&magnitude);
            }
            return Ok(magnitude);
        }
        if self.coeffs[0].is_nan() || self.coeffs[0] <= 0.0 {
            return Err(JetError::DomainError {
                func: "pow",
                value: self.coeffs[0],
            });
        }
        Ok(self.ln()?.scale(exponent).exp())
    }

    pub fn powi(&self, mut exponent: u32) -> Jet {
        let mut result = Jet::constant(self.t0, self.order(), 1.0);
        let mut base = self.clone();
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = result.mul(&base).expect("same shape");
            }
            exponent >>= 1;
            if exponent > 0 {
                base = base.mul(&base).expect("same shape");
            }
        }
        result
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, u) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, ") @ {}", self.t0)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// An evaluation failure located in the expression tree.
///
/// `path` lists child indices from the root (0 = left/only child,
/// 1 = right child).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} at t = {t0} (node /{})", path_string(.path))]
pub struct EvalError {
    pub path: Vec<u8>,
    pub t0: f64,
    #[source]
    pub source: JetError,
}

fn path_string(path: &[u8]) -> String {
    path.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

/// Taylor coefficients of the function denoted by `expr` at `t0`.
pub fn evaluate_jet(expr: &Expr, t0: f64, order: usize) -> Result<Jet, EvalError> {
    let mut path = Vec::new();
    eval_node(expr, t0, order, &mut path).map_err(|source| EvalError { path, t0, source })
}

/// On error, `path` is left pointing at the failing node.
fn eval_node(expr: &Expr, t0: f64, m: usize, path: &mut Vec<u8>) -> Result<Jet, JetError> {
    let child = |idx: u8, e: &Expr, path: &mut Vec<u8>| -> Result<Jet, JetError> {
        path.push(idx);
        let jet = eval_node(e, t0, m, path)?;
        path.pop();
        Ok(jet)
    };
    match expr {
        Expr::Constant(v) => Ok(Jet::constant(t0, m, *v)),
        Expr::Variable => Ok(Jet::var(t0, m)),
        Expr::Neg(a) => Ok(child(0, a, path)?.neg()),
        Expr::Add(a, b) => child(0, a, path)?.add(&child(1, b, path)?),
        Expr::Sub(a, b) => child(0, a, path)?.sub(&child(1, b, path)?),
        Expr::Mul(a, b) => child(0, a, path)?.mul(&child(1, b, path)?),
        Expr::Div(a, b) => child(0, a, path)?.div(&child(1, b, path)?),
        Expr::Pow(a, b) => {
            let base = child(0, a, path)?;
            if b.is_constant() {
                let exponent = child(1, b, path)?.value();
                base.powf(exponent)
            } else {
                // f^g = exp(g ln f)
                let exponent = child(1, b, path)?;
                Ok(base.ln()?.mul(&exponent)?.exp())
            }
        }
        Expr::Call(func, a) => child(0, a, path)?.elementary(*func),
    }
}
