//! The logistic model: probabilities, log-likelihood, gradient, and Hessian,
//! all computed as chunk reductions so the same code serves in-memory and
//! generated-on-demand data.
//!
//! Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the
//! log-likelihood and the Hessian weights `d_i = p(1-p)`; the gradient uses
//! raw probabilities. Weights below that are kept as-is, so near-separation
//! legitimately degrades Hessian conditioning instead of being masked.

use crate::data::{Dataset, RowChunk};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix, SymmetricAccumulator};
use crate::parallel::{map_reduce_chunks, ExecMode};

/// Probability clamp applied in log-likelihood and weight computations.
pub const PROB_CLAMP: f64 = 1e-15;

/// Coefficients plus the intercept convention. With `has_intercept` set,
/// `beta[0]` multiplies an implicit constant column that is never stored in
/// the data.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub beta: Vec<f64>,
    pub has_intercept: bool,
}

impl LogisticModel {
    pub fn new(beta: Vec<f64>, has_intercept: bool) -> Self {
        assert!(!beta.is_empty(), "empty coefficient vector");
        LogisticModel {
            beta,
            has_intercept,
        }
    }

    /// Zero-initialized model sized for `data`.
    pub fn zeros(data: &dyn Dataset, has_intercept: bool) -> Self {
        let k = data.n_features() + usize::from(has_intercept);
        LogisticModel::new(vec![0.0; k], has_intercept)
    }

    /// Number of coefficients (including the intercept when present).
    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// Width of the raw feature rows this model applies to.
    pub fn feature_dim(&self) -> usize {
        self.beta.len() - usize::from(self.has_intercept)
    }

    #[inline]
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        if self.has_intercept {
            self.beta[0] + dot(&self.beta[1..], x)
        } else {
            dot(&self.beta, x)
        }
    }

    fn check_width(&self, data: &dyn Dataset) -> Result<()> {
        if self.feature_dim() != data.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} feature columns, data has {}",
                self.feature_dim(),
                data.n_features()
            )));
        }
        Ok(())
    }
}

/// Numerically stable sigmoid; no overflow at either tail.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Predicted probabilities in row order.
pub fn predict_proba(model: &LogisticModel, data: &dyn Dataset) -> Result<Vec<f64>> {
    model.check_width(data)?;
    let mut out = Vec::with_capacity(data.n_rows());
    for i in 0..data.n_chunks() {
        let chunk = data.chunk(i);
        for r in 0..chunk.n_rows() {
            out.push(sigmoid(model.linear_predictor(chunk.features_row(r))));
        }
    }
    Ok(out)
}

/// Per-pass partial: log-likelihood, score vector, and (optionally) the
/// weighted Gramian `sum d_i x_i x_i^T`, merged across chunks.
#[derive(Debug, Clone)]
pub struct ModelStats {
    pub ll: f64,
    pub grad: Vec<f64>,
    pub hess: Option<SymmetricAccumulator>,
    pub n_rows: u64,
}

impl ModelStats {
    fn merge(mut self, other: ModelStats) -> ModelStats {
        self.ll += other.ll;
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += *b;
        }
        self.hess = match (self.hess, other.hess) {
            (Some(a), Some(b)) => Some(a.merge(&b).expect("chunk partials share dimension")),
            _ => None,
        };
        self.n_rows += other.n_rows;
        self
    }
}

fn chunk_stats(model: &LogisticModel, chunk: &RowChunk, with_hessian: bool) -> ModelStats {
    let k = model.dim();
    let mut ll = 0.0;
    let mut grad = vec![0.0; k];
    let mut hess = with_hessian.then(|| SymmetricAccumulator::new(k));
    let mut xbuf = vec![0.0; k];
    if model.has_intercept {
        xbuf[0] = 1.0;
    }
    let off = usize::from(model.has_intercept);

    for r in 0..chunk.n_rows() {
        let x = chunk.features_row(r);
        let y = chunk.response(r);
        let p = sigmoid(model.linear_predictor(x));
        let pc = clamp_prob(p);

        ll += if y == 1.0 { pc.ln() } else { (1.0 - pc).ln() };

        let resid = y - p;
        if model.has_intercept {
            grad[0] += resid;
        }
        for (g, xi) in grad[off..].iter_mut().zip(x) {
            *g += resid * xi;
        }

        if let Some(acc) = hess.as_mut() {
            xbuf[off..].copy_from_slice(x);
            let d = pc * (1.0 - pc);
            acc.accumulate(&xbuf, d).expect("buffer sized to model");
        }
    }
    ModelStats {
        ll,
        grad,
        hess,
        n_rows: chunk.n_rows() as u64,
    }
}

/// Fused single pass over the data. Solvers use this to get likelihood,
/// gradient, and Hessian from one chunk reduction.
pub fn model_stats(
    model: &LogisticModel,
    data: &dyn Dataset,
    mode: ExecMode,
    with_hessian: bool,
) -> Result<ModelStats> {
    model.check_width(data)?;
    map_reduce_chunks(
        data,
        mode,
        |_, chunk| chunk_stats(model, chunk, with_hessian),
        ModelStats::merge,
    )
    .ok_or(Error::EmptyDataset)
}

/// `sum_i y_i ln p_i + (1 - y_i) ln(1 - p_i)` with clamped probabilities.
pub fn log_likelihood(model: &LogisticModel, data: &dyn Dataset, mode: ExecMode) -> Result<f64> {
    model.check_width(data)?;
    map_reduce_chunks(
        data,
        mode,
        |_, chunk: &RowChunk| {
            let mut ll = 0.0;
            for r in 0..chunk.n_rows() {
                let p = clamp_prob(sigmoid(model.linear_predictor(chunk.features_row(r))));
                ll += if chunk.response(r) == 1.0 {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                };
            }
            ll
        },
        |a, b| a + b,
    )
    .ok_or(Error::EmptyDataset)
}

/// Score vector `sum_i (y_i - p_i) x_i`.
pub fn gradient(model: &LogisticModel, data: &dyn Dataset, mode: ExecMode) -> Result<Vec<f64>> {
    Ok(model_stats(model, data, mode, false)?.grad)
}

/// Observed information `sum_i d_i x_i x_i^T`, `d_i = p_i (1 - p_i)`,
/// accumulated as a packed sum of outer products.
pub fn hessian(model: &LogisticModel, data: &dyn Dataset, mode: ExecMode) -> Result<DenseMatrix> {
    Ok(model_stats(model, data, mode, true)?
        .hess
        .expect("hessian requested")
        .to_matrix())
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
