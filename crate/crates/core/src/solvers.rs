//! Maximum-likelihood solvers behind one fitting interface.
//!
//! `fit_irls` is Newton's method with a per-iteration Cholesky solve of the
//! exact Hessian and step halving. The factorization has no pivoting or
//! regularization fallback, so an ill-conditioned Hessian surfaces as a
//! `HessianNotPd` failure or as a wild but accepted Newton step.
//!
//! `fit_lbfgs` is the standard two-loop recursion on the negative
//! log-likelihood with Armijo backtracking and inverse-Hessian scaling from
//! the most recent curvature pair.

use std::collections::VecDeque;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_decompose, dot};
use crate::model::{log_likelihood, model_stats, sup_norm, LogisticModel};
use crate::parallel::ExecMode;

const ARMIJO_C1: f64 = 1e-4;
const IRLS_MAX_HALVINGS: usize = 30;
const LBFGS_MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Irls,
    Lbfgs,
}

impl SolverMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMethod::Irls => "irls",
            SolverMethod::Lbfgs => "lbfgs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearch {
    BacktrackingArmijo,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Convergence threshold on the gradient sup-norm.
    pub tol: f64,
    /// Relative log-likelihood change treated as a stall.
    pub ll_tol: f64,
    pub max_iter: usize,
    /// History pairs kept by L-BFGS.
    pub lbfgs_memory: usize,
    pub line_search: LineSearch,
    pub has_intercept: bool,
    pub exec: ExecMode,
}

impl SolverConfig {
    pub fn irls() -> Self {
        SolverConfig {
            method: SolverMethod::Irls,
            tol: 1e-8,
            ll_tol: 1e-10,
            max_iter: 100,
            lbfgs_memory: 10,
            line_search: LineSearch::BacktrackingArmijo,
            has_intercept: true,
            exec: ExecMode::default(),
        }
    }

    pub fn lbfgs() -> Self {
        SolverConfig {
            method: SolverMethod::Lbfgs,
            max_iter: 500,
            ..SolverConfig::irls()
        }
    }

    pub fn for_method(method: SolverMethod) -> Self {
        match method {
            SolverMethod::Irls => SolverConfig::irls(),
            SolverMethod::Lbfgs => SolverConfig::lbfgs(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.lbfgs_memory == 0 {
            return Err(Error::InvalidConfig(
                "lbfgs_memory must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    HessianNotPd,
    MaxIterations,
    LineSearchFailure,
}

impl FailureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FailureKind::HessianNotPd => "hessian-not-positive-definite",
            FailureKind::MaxIterations => "max-iterations",
            FailureKind::LineSearchFailure => "line-search-failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub has_intercept: bool,
    pub method: SolverMethod,
    pub converged: bool,
    pub iterations: usize,
    pub final_log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub n: usize,
    pub k: usize,
    pub failure: Option<FailureKind>,
    /// Log-likelihood after each accepted iterate, starting at the initial
    /// point. Non-decreasing for IRLS by construction.
    pub ll_trace: Vec<f64>,
}

impl FitResult {
    pub fn model(&self) -> LogisticModel {
        LogisticModel::new(self.beta_hat.clone(), self.has_intercept)
    }
}

struct Prepared {
    n: usize,
    null_ll: f64,
}

fn prepare(data: &dyn Dataset, config: &SolverConfig) -> Result<Prepared> {
    config.validate()?;
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if data.n_features() + usize::from(config.has_intercept) == 0 {
        return Err(Error::InvalidConfig(
            "no coefficients: zero feature columns and no intercept".into(),
        ));
    }
    let mut ones = 0usize;
    for i in 0..data.n_chunks() {
        let chunk = data.chunk(i);
        ones += chunk.responses().iter().filter(|y| **y == 1.0).count();
    }
    if ones == 0 || ones == n {
        return Err(Error::DegenerateResponse {
            value: if ones == 0 { 0.0 } else { 1.0 },
        });
    }
    let ybar = ones as f64 / n as f64;
    let null_ll = n as f64 * (ybar * ybar.ln() + (1.0 - ybar) * (1.0 - ybar).ln());
    Ok(Prepared { n, null_ll })
}

/// Fits by the configured method.
pub fn fit(data: &dyn Dataset, config: &SolverConfig) -> Result<FitResult> {
    match config.method {
        SolverMethod::Irls => fit_irls(data, config),
        SolverMethod::Lbfgs => fit_lbfgs(data, config),
    }
}

/// Newton iteration with per-step Cholesky solve and step halving (the step
/// is halved up to 30 times while the log-likelihood does not increase; a
/// tie is accepted so terminal quadratic steps are not rejected).
pub fn fit_irls(data: &dyn Dataset, config: &SolverConfig) -> Result<FitResult> {
    let prep = prepare(data, config)?;
    let mut model = LogisticModel::zeros(data, config.has_intercept);
    let k = model.dim();

    let mut stats = model_stats(&model, data, config.exec, true)?;
    let mut trace = vec![stats.ll];
    let mut iterations = 0usize;
    let mut converged = false;
    let mut failure = None;

    for _ in 0..config.max_iter {
        if sup_norm(&stats.grad) <= config.tol {
            converged = true;
            break;
        }
        let hess = stats.hess.as_ref().expect("requested hessian").to_matrix();
        let step = match cholesky_decompose(&hess) {
            Ok(factor) => factor.solve(&stats.grad)?,
            Err(Error::NotPositiveDefinite { .. }) => {
                failure = Some(FailureKind::HessianNotPd);
                break;
            }
            Err(e) => return Err(e),
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=IRLS_MAX_HALVINGS {
            let mut cand = model.clone();
            for (b, d) in cand.beta.iter_mut().zip(&step) {
                *b += scale * d;
            }
            let cand_ll = log_likelihood(&cand, data, config.exec)?;
            if cand_ll >= stats.ll {
                accepted = Some((cand, cand_ll));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, cand_ll)) = accepted else {
            failure = Some(FailureKind::LineSearchFailure);
            break;
        };

        let prev_ll = stats.ll;
        model = cand;
        stats = model_stats(&model, data, config.exec, true)?;
        debug_assert_eq!(stats.ll, cand_ll);
        trace.push(stats.ll);
        iterations += 1;

        if (stats.ll - prev_ll).abs() <= config.ll_tol * (1.0 + stats.ll.abs())
            && sup_norm(&stats.grad) <= config.tol
        {
            converged = true;
            break;
        }
    }

    if !converged && failure.is_none() {
        if sup_norm(&stats.grad) <= config.tol {
            converged = true;
        } else {
            failure = Some(FailureKind::MaxIterations);
        }
    }

    Ok(FitResult {
        beta_hat: model.beta,
        has_intercept: config.has_intercept,
        method: SolverMethod::Irls,
        converged,
        iterations,
        final_log_likelihood: stats.ll,
        null_log_likelihood: prep.null_ll,
        n: prep.n,
        k,
        failure,
        ll_trace: trace,
    })
}

fn two_loop_direction(
    grad_f: &[f64],
    pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>,
) -> Vec<f64> {
    let mut q = grad_f.to_vec();
    let mut alphas = vec![0.0; pairs.len()];
    for (i, (s, y, rho)) in pairs.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[i] = a;
        for (qj, yj) in q.iter_mut().zip(y) {
            *qj -= a * yj;
        }
    }
    // Initial inverse-Hessian scaling from the most recent pair.
    let gamma = pairs
        .back()
        .map(|(s, y, _)| dot(s, y) / dot(y, y))
        .filter(|g| g.is_finite() && *g > 0.0)
        .unwrap_or(1.0);
    for qj in q.iter_mut() {
        *qj *= gamma;
    }
    for (i, (s, y, rho)) in pairs.iter().enumerate() {
        let b = rho * dot(y, &q);
        let corr = alphas[i] - b;
        for (qj, sj) in q.iter_mut().zip(s) {
            *qj += corr * sj;
        }
    }
    for v in q.iter_mut() {
        *v = -*v;
    }
    q
}

/// Two-loop-recursion L-BFGS on the negative log-likelihood with Armijo
/// backtracking.
pub fn fit_lbfgs(data: &dyn Dataset, config: &SolverConfig) -> Result<FitResult> {
    let prep = prepare(data, config)?;
    let mut model = LogisticModel::zeros(data, config.has_intercept);
    let k = model.dim();

    let mut stats = model_stats(&model, data, config.exec, false)?;
    let mut grad_f: Vec<f64> = stats.grad.iter().map(|g| -g).collect();
    let mut trace = vec![stats.ll];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut failure = None;

    for _ in 0..config.max_iter {
        if sup_norm(&stats.grad) <= config.tol {
            converged = true;
            break;
        }
        let mut dir = two_loop_direction(&grad_f, &pairs);
        let mut slope = dot(&grad_f, &dir);
        if !(slope < 0.0) {
            // Curvature information went stale; restart from steepest descent.
            pairs.clear();
            dir = grad_f.iter().map(|g| -g).collect();
            slope = -dot(&grad_f, &grad_f);
        }

        let dir_norm = dot(&dir, &dir).sqrt();
        let mut alpha = if pairs.is_empty() {
            (1.0 / dir_norm.max(f64::MIN_POSITIVE)).min(1.0)
        } else {
            1.0
        };

        let f0 = -stats.ll;
        let mut accepted = None;
        for _ in 0..=LBFGS_MAX_HALVINGS {
            let mut cand = model.clone();
            for (b, d) in cand.beta.iter_mut().zip(&dir) {
                *b += alpha * d;
            }
            let cand_ll = log_likelihood(&cand, data, config.exec)?;
            if -cand_ll <= f0 + ARMIJO_C1 * alpha * slope {
                accepted = Some((cand, cand_ll, alpha));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, _cand_ll, alpha)) = accepted else {
            failure = Some(FailureKind::LineSearchFailure);
            break;
        };

        let prev_ll = stats.ll;
        let new_stats = model_stats(&cand, data, config.exec, false)?;
        let new_grad_f: Vec<f64> = new_stats.grad.iter().map(|g| -g).collect();

        let s: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let yv: Vec<f64> = new_grad_f
            .iter()
            .zip(&grad_f)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &yv);
        let s_norm = dot(&s, &s).sqrt();
        let y_norm = dot(&yv, &yv).sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            pairs.push_back((s, yv, 1.0 / sy));
            if pairs.len() > config.lbfgs_memory {
                pairs.pop_front();
            }
        }

        model = cand;
        stats = new_stats;
        grad_f = new_grad_f;
        trace.push(stats.ll);
        iterations += 1;

        if (stats.ll - prev_ll).abs() <= config.ll_tol * (1.0 + stats.ll.abs())
            && sup_norm(&stats.grad) <= config.tol
        {
            converged = true;
            break;
        }
    }

    if !converged && failure.is_none() {
        if sup_norm(&stats.grad) <= config.tol {
            converged = true;
        } else {
            failure = Some(FailureKind::MaxIterations);
        }
    }

    Ok(FitResult {
        beta_hat: model.beta,
        has_intercept: config.has_intercept,
        method: SolverMethod::Lbfgs,
        converged,
        iterations,
        final_log_likelihood: stats.ll,
        null_log_likelihood: prep.null_ll,
        n: prep.n,
        k,
        failure,
        ll_trace: trace,
    })
}
