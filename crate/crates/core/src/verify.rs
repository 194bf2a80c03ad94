//! Grid sweeps that check, sample by sample, that the characteristic
//! coefficients of `R` reproduce the ODE coefficients, together with Abel's
//! identity, the companion split, Cayley–Hamilton and basis invariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cartan::{abel_probe, cartan, right_form, AbelProbe, CartanData};
use crate::linalg::{det, Matrix};
use crate::wronskian::{
    apply_basis_change, build_wronskian, max_abs_diff, norm_inf, recover_coefficients,
    wronskian_from_jets, Coefficients, FunctionSystem, WronskianData, WronskianError,
};

/// Base relative tolerance of every residual category.
pub const BASE_TOLERANCE: f64 = 1e-7;

/// Basis changes are redrawn until `|det T|` reaches this.
pub const MIN_BASIS_DET: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("rates must be pairwise distinct")]
    DuplicateRates,
}

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, samples: usize) -> Result<Grid, VerifyError> {
        if samples == 0 {
            return Err(VerifyError::InvalidGrid(
                "at least one sample is required".into(),
            ));
        }
        if !t0.is_finite() || !t1.is_finite() {
            return Err(VerifyError::InvalidGrid("endpoints must be finite".into()));
        }
        if samples > 1 && t0 >= t1 {
            return Err(VerifyError::InvalidGrid(format!(
                "t0 = {t0} must be below t1 = {t1}"
            )));
        }
        Ok(Grid { t0, t1, samples })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.t0];
        }
        let last = self.samples - 1;
        let step = (self.t1 - self.t0) / last as f64;
        (0..self.samples)
            .map(|i| {
                if i == last {
                    self.t1
                } else {
                    self.t0 + i as f64 * step
                }
            })
            .collect()
    }
}

/// Named residuals of one sample. `duality_reversed` compares the reversed
/// `q` against `p` and is reported without entering the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub duality_identity: f64,
    pub duality_reversed: f64,
    pub abel_trace: f64,
    pub abel_logderiv: f64,
    pub companion: f64,
    pub cayley_hamilton: f64,
    pub cramer_vs_solve: f64,
    pub det_sign: f64,
    pub basis_invariance: f64,
}

impl Residuals {
    pub const NAMES: [&'static str; 9] = [
        "duality_identity",
        "duality_reversed",
        "abel_trace",
        "abel_logderiv",
        "companion",
        "cayley_hamilton",
        "cramer_vs_solve",
        "det_sign",
        "basis_invariance",
    ];

    /// `(name, value, counts toward the verdict)`.
    pub fn entries(&self) -> [(&'static str, f64, bool); 9] {
        [
            ("duality_identity", self.duality_identity, true),
            ("duality_reversed", self.duality_reversed, false),
            ("abel_trace", self.abel_trace, true),
            ("abel_logderiv", self.abel_logderiv, true),
            ("companion", self.companion, true),
            ("cayley_hamilton", self.cayley_hamilton, true),
            ("cramer_vs_solve", self.cramer_vs_solve, true),
            ("det_sign", self.det_sign, true),
            ("basis_invariance", self.basis_invariance, true),
        ]
    }

    fn zip(&self, other: &Residuals, f: impl Fn(f64, f64) -> f64) -> Residuals {
        Residuals {
            duality_identity: f(self.duality_identity, other.duality_identity),
            duality_reversed: f(self.duality_reversed, other.duality_reversed),
            abel_trace: f(self.abel_trace, other.abel_trace),
            abel_logderiv: f(self.abel_logderiv, other.abel_logderiv),
            companion: f(self.companion, other.companion),
            cayley_hamilton: f(self.cayley_hamilton, other.cayley_hamilton),
            cramer_vs_solve: f(self.cramer_vs_solve, other.cramer_vs_solve),
            det_sign: f(self.det_sign, other.det_sign),
            basis_invariance: f(self.basis_invariance, other.basis_invariance),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Multiplies every tolerance.
    pub tol_multiplier: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol_multiplier: 1.0,
        }
    }
}

/// Everything computed at one regular sample point.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub data: WronskianData,
    pub coefficients: Coefficients,
    pub cartan: CartanData,
    pub probe: AbelProbe,
}

/// Outcome of analyzing one sample point.
#[derive(Debug, Clone)]
pub enum SampleOutcome {
    Regular(Box<Analysis>),
    Degenerate(Box<WronskianData>),
    Failed { t: f64, message: String },
}

pub fn analyze(sys: &FunctionSystem, t: f64) -> SampleOutcome {
    let data = match build_wronskian(sys, t) {
        Ok(d) => d,
        Err(e) => {
            return SampleOutcome::Failed {
                t,
                message: e.to_string(),
            }
        }
    };
    if data.degenerate {
        return SampleOutcome::Degenerate(Box::new(data));
    }
    let result = (|| {
        let coefficients = recover_coefficients(&data)?;
        let cartan = cartan(&data)?;
        let probe = abel_probe(&data, &cartan.r, &coefficients.p)?;
        Ok::<_, WronskianError>((coefficients, cartan, probe))
    })();
    match result {
        Ok((coefficients, cartan, probe)) => SampleOutcome::Regular(Box::new(Analysis {
            data,
            coefficients,
            cartan,
            probe,
        })),
        // a solve can still hit a singular pivot just above the degeneracy line
        Err(WronskianError::DegenerateWronskian(_)) => {
            let mut data = data;
            data.degenerate = true;
            SampleOutcome::Degenerate(Box::new(data))
        }
        Err(e) => SampleOutcome::Failed {
            t,
            message: e.to_string(),
        },
    }
}

/// Random `n×n` matrix with entries uniform in `[−1, 1]` and
/// `|det| ≥ MIN_BASIS_DET`, deterministic in `seed`.
pub fn random_basis_change(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let t = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        if det(&t).abs() >= MIN_BASIS_DET {
            return t;
        }
    }
}

/// `‖R(A·T) − R(A)‖_max`, or infinity when the transformed system cannot
/// be processed. The transformed Wronskian is not re-screened for
/// degeneracy: `w(A·T) = w(A)·det T` is nonzero once `w(A)` is.
pub fn basis_invariance_residual(a: &Analysis, t: &Matrix) -> f64 {
    let transformed = apply_basis_change(&a.data.jets, t)
        .and_then(|jets| wronskian_from_jets(a.data.t, jets))
        .and_then(|d| right_form(&d.w_matrix, &d.w_prime).map_err(Into::into));
    match transformed {
        Ok(r) => r.sub(&a.cartan.r).norm_max(),
        Err(_) => f64::INFINITY,
    }
}

fn residuals(a: &Analysis, basis: &Matrix) -> Residuals {
    let n = a.data.n();
    let p = &a.coefficients.p;
    let q = a.cartan.q_desc();
    let q_reversed: Vec<f64> = q.iter().rev().copied().collect();
    Residuals {
        duality_identity: max_abs_diff(q, p),
        duality_reversed: max_abs_diff(&q_reversed, p),
        abel_trace: (a.probe.trace_r - p[0]).abs(),
        abel_logderiv: (a.probe.log_derivative() - p[0]).abs(),
        companion: a
            .cartan
            .split
            .offcompanion_residual
            .max(a.cartan.reconstruction_residual),
        cayley_hamilton: a.cartan.char_poly.cayley_hamilton_residual.norm_max(),
        cramer_vs_solve: a.coefficients.discrepancy,
        det_sign: (a.probe.det_r - a.probe.signed_pn(n)).abs(),
        basis_invariance: basis_invariance_residual(a, basis),
    }
}

/// Per-category tolerances `BASE_TOLERANCE · multiplier · κ(W) · (1 + scale)`
/// with scale `‖p‖_∞` for the coefficient identities, `‖W'‖_max` for the
/// companion split, `‖R‖_maxⁿ` for Cayley–Hamilton and `‖R‖_max` for basis
/// invariance.
pub fn tolerances(a: &Analysis, opts: &VerifyOptions) -> Residuals {
    let n = a.data.n() as i32;
    let base = BASE_TOLERANCE * opts.tol_multiplier * a.data.kappa;
    let p_scale = base * (1.0 + norm_inf(&a.coefficients.p));
    let r_max = a.cartan.r.norm_max();
    Residuals {
        duality_identity: p_scale,
        duality_reversed: p_scale,
        abel_trace: p_scale,
        abel_logderiv: p_scale,
        companion: base * (1.0 + a.data.w_prime.norm_max()),
        cayley_hamilton: base * (1.0 + r_max.powi(n)),
        cramer_vs_solve: p_scale,
        det_sign: p_scale,
        basis_invariance: base * (1.0 + r_max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub t: f64,
    pub p: Vec<f64>,
    pub p_cramer: Vec<f64>,
    pub q_desc: Vec<f64>,
    pub q_desc_l: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub w: Option<f64>,
    pub wprime: Option<f64>,
    pub kappa: Option<f64>,
    pub degenerate: bool,
    pub domain_error: Option<String>,
    pub residuals: Option<Residuals>,
    pub tolerances: Option<Residuals>,
    /// Gated categories over tolerance.
    pub failed_checks: Vec<String>,
}

impl SampleResult {
    pub fn is_regular(&self) -> bool {
        !self.degenerate && self.domain_error.is_none()
    }

    pub fn passed(&self) -> bool {
        self.is_regular() && self.failed_checks.is_empty()
    }

    fn empty(t: f64) -> SampleResult {
        SampleResult {
            t,
            p: Vec::new(),
            p_cramer: Vec::new(),
            q_desc: Vec::new(),
            q_desc_l: Vec::new(),
            p_hat: Vec::new(),
            w: None,
            wprime: None,
            kappa: None,
            degenerate: false,
            domain_error: None,
            residuals: None,
            tolerances: None,
            failed_checks: Vec::new(),
        }
    }
}

pub fn verify_sample(sys: &FunctionSystem, t: f64, seed: u64) -> SampleResult {
    verify_sample_with(sys, t, seed, &VerifyOptions::default())
}

pub fn verify_sample_with(
    sys: &FunctionSystem,
    t: f64,
    seed: u64,
    opts: &VerifyOptions,
) -> SampleResult {
    match analyze(sys, t) {
        SampleOutcome::Failed { t, message } => SampleResult {
            domain_error: Some(message),
            ..SampleResult::empty(t)
        },
        SampleOutcome::Degenerate(d) => SampleResult {
            degenerate: true,
            w: Some(d.w),
            wprime: Some(d.wprime),
            kappa: Some(d.kappa),
            ..SampleResult::empty(t)
        },
        SampleOutcome::Regular(a) => {
            let basis = random_basis_change(sys.n(), seed);
            let res = residuals(&a, &basis);
            let tol = tolerances(&a, opts);
            let failed_checks = res
                .entries()
                .iter()
                .zip(tol.entries())
                .filter(|((_, value, gated), (_, limit, _))| {
                    *gated && (value.is_nan() || value > limit)
                })
                .map(|((name, _, _), _)| name.to_string())
                .collect();
            SampleResult {
                t,
                p: a.coefficients.p.clone(),
                p_cramer: a.coefficients.p_cramer.clone(),
                q_desc: a.cartan.q_desc().to_vec(),
                q_desc_l: a.cartan.q_desc_l().to_vec(),
                p_hat: a.cartan.p_hat.clone(),
                w: Some(a.data.w),
                wprime: Some(a.data.wprime),
                kappa: Some(a.data.kappa),
                degenerate: false,
                domain_error: None,
                residuals: Some(res),
                tolerances: Some(tol),
                failed_checks,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub verdict: Verdict,
    /// Worst residual per category over regular samples.
    pub worst: Option<Residuals>,
    /// Worst residual-to-tolerance ratio per category.
    pub worst_ratio: Option<Residuals>,
    pub regular: usize,
    pub degenerate: usize,
    pub domain_errors: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub grid: Grid,
    pub seed: u64,
    pub samples: Vec<SampleResult>,
    pub summary: Summary,
}

pub fn sweep_grid(
    sys: &FunctionSystem,
    t0: f64,
    t1: f64,
    samples: usize,
    seed: u64,
) -> Result<VerifyReport, VerifyError> {
    sweep(
        sys,
        Grid::new(t0, t1, samples)?,
        seed,
        &VerifyOptions::default(),
    )
}

/// Sample `i` uses seed `seed + i` for its basis change.
pub fn sweep(
    sys: &FunctionSystem,
    grid: Grid,
    seed: u64,
    opts: &VerifyOptions,
) -> Result<VerifyReport, VerifyError> {
    let grid = Grid::new(grid.t0, grid.t1, grid.samples)?;
    let results: Vec<SampleResult> = grid
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, t)| verify_sample_with(sys, t, seed.wrapping_add(i as u64), opts))
        .collect();
    let summary = summarize(&results);
    Ok(VerifyReport {
        n: sys.n(),
        grid,
        seed,
        samples: results,
        summary,
    })
}

pub fn summarize(results: &[SampleResult]) -> Summary {
    let mut worst: Option<Residuals> = None;
    let mut worst_ratio: Option<Residuals> = None;
    let mut regular = 0;
    let mut failed = 0;
    for s in results.iter().filter(|s| s.is_regular()) {
        regular += 1;
        if !s.failed_checks.is_empty() {
            failed += 1;
        }
        let (Some(res), Some(tol)) = (&s.residuals, &s.tolerances) else {
            continue;
        };
        let ratio = res.zip(tol, |r, t| r / t);
        worst = Some(worst.map_or(*res, |w| w.zip(res, f64::max)));
        worst_ratio = Some(worst_ratio.map_or(ratio, |w| w.zip(&ratio, f64::max)));
    }
    let verdict = if regular == 0 {
        Verdict::Degenerate
    } else if failed == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Summary {
        verdict,
        worst,
        worst_ratio,
        regular,
        degenerate: results.iter().filter(|s| s.degenerate).count(),
        domain_errors: results.iter().filter(|s| s.domain_error.is_some()).count(),
        failed,
    }
}

/// ODE coefficients of `{exp(λ_1 t), …, exp(λ_n t)}`: expanding
/// `Π(λ − λ_k) = λⁿ − p_1 λⁿ⁻¹ − … − p_n` gives `p_j = (−1)^(j+1) e_j`.
pub fn exponential_oracle(rates: &[f64]) -> Result<Vec<f64>, VerifyError> {
    for (i, a) in rates.iter().enumerate() {
        if rates[i + 1..].contains(a) {
            return Err(VerifyError::DuplicateRates);
        }
    }
    // e[j] = j-th elementary symmetric polynomial of the rates seen so far
    let mut e = vec![0.0; rates.len() + 1];
    e[0] = 1.0;
    for (k, &rate) in rates.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += rate * e[j - 1];
        }
    }
    Ok((1..=rates.len())
        .map(|j| if j % 2 == 1 { e[j] } else { -e[j] })
        .collect())
}
