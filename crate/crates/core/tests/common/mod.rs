#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wronski::linalg::{det, Matrix};
use wronski::wronskian::FunctionSystem;

pub fn system(funcs: &[&str]) -> FunctionSystem {
    FunctionSystem::parse(funcs).unwrap()
}

/// Distinct integer rates in [-4, 4].
pub fn random_rates(rng: &mut ChaCha8Rng, n: usize) -> Vec<i32> {
    let mut pool: Vec<i32> = (-4..=4).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

pub fn exponential_system(rates: &[i32]) -> FunctionSystem {
    let funcs: Vec<String> = rates.iter().map(|r| format!("exp({r}*t)")).collect();
    FunctionSystem::parse(&funcs).unwrap()
}

/// One member of the exponential-polynomial family; distinct members are
/// linearly independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Member {
    Monomial(u32),
    Exp(f64),
    TimesExp(f64),
    Sin(f64),
    Cos(f64),
}

impl Member {
    pub fn source(self) -> String {
        match self {
            Member::Monomial(0) => "1".into(),
            Member::Monomial(1) => "t".into(),
            Member::Monomial(k) => format!("t^{k}"),
            Member::Exp(r) => format!("exp({r}*t)"),
            Member::TimesExp(r) => format!("t*exp({r}*t)"),
            Member::Sin(w) => format!("sin({w}*t)"),
            Member::Cos(w) => format!("cos({w}*t)"),
        }
    }

    fn random(rng: &mut ChaCha8Rng) -> Member {
        const RATES: [f64; 8] = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
        const FREQS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];
        match rng.gen_range(0..5) {
            0 => Member::Monomial(rng.gen_range(0..5)),
            1 => Member::Exp(*RATES.choose(rng).unwrap()),
            2 => Member::TimesExp(*RATES.choose(rng).unwrap()),
            3 => Member::Sin(*FREQS.choose(rng).unwrap()),
            _ => Member::Cos(*FREQS.choose(rng).unwrap()),
        }
    }
}

/// `n` distinct members drawn from polynomial, exponential and
/// trigonometric families.
pub fn random_mixed_system(rng: &mut ChaCha8Rng, n: usize) -> (Vec<String>, FunctionSystem) {
    let mut members: Vec<Member> = Vec::new();
    while members.len() < n {
        let m = Member::random(rng);
        if !members.contains(&m) {
            members.push(m);
        }
    }
    let sources: Vec<String> = members.into_iter().map(Member::source).collect();
    let sys = FunctionSystem::parse(&sources).unwrap();
    (sources, sys)
}

/// Entries uniform in [-1, 1] with |det| >= 0.1.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let t = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        if det(&t).abs() >= 0.1 {
            return t;
        }
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Determinant by the Leibniz permutation expansion.
pub fn leibniz_det(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, &mut |p| {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * (0..n).map(|i| a[(i, p[i])]).product::<f64>();
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Characteristic coefficients `c_k = (-1)^k Σ (principal k×k minors)`.
pub fn brute_force_char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    (1..=n)
        .map(|k| {
            let mut sum = 0.0;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let minor = Matrix::from_fn(k, k, |i, j| a[(idx[i], idx[j])]);
                sum += leibniz_det(&minor);
            }
            if k % 2 == 0 {
                sum
            } else {
                -sum
            }
        })
        .collect()
}
