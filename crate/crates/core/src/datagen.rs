//! Deterministic synthetic data: a PCG-XSH-RR-32 generator, Box-Muller
//! normals, and Bernoulli responses from a logistic model.
//!
//! Generation is partitioned by row block: block `b` draws from stream
//! `base_stream + b`, so blocks can be produced independently, in any order,
//! or regenerated on demand, and the bytes never change.

use std::borrow::Cow;

use crate::data::{default_feature_names, Dataset, InMemoryDataset, RowChunk, DEFAULT_CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_decompose, DenseMatrix};
use crate::model::sigmoid;

/// Stream offset reserved for drawing the coefficient vector, far above any
/// realistic block count.
const BETA_STREAM_OFFSET: u64 = 1 << 40;

const PCG_MULTIPLIER: u64 = 6364136223846793005;

/// PCG-XSH-RR-32: 64-bit LCG state with xorshift-high + random-rotate output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcg32 {
    state: u64,
    inc: u64,
}

impl Pcg32 {
    /// Standard two-step seeding: the increment is `(initseq << 1) | 1`, the
    /// state is advanced once around mixing in `initstate`.
    pub fn new(initstate: u64, initseq: u64) -> Self {
        let mut rng = Pcg32 {
            state: 0,
            inc: (initseq << 1) | 1,
        };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(initstate);
        rng.next_u32();
        rng
    }

    /// Advances the LCG and permutes the pre-advance state into 32 bits.
    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old.wrapping_mul(PCG_MULTIPLIER).wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    /// Uniform in [0, 1) with 32-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 * (1.0 / 4294967296.0)
    }

    /// Uniform in (0, 1]: `(output + 1) / 2^32`. Never zero, so it is safe
    /// under a logarithm.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        (self.next_u32() as f64 + 1.0) * (1.0 / 4294967296.0)
    }
}

/// Standard normal draws by Box-Muller; both values of each pair are used.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: Pcg32,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(rng: Pcg32) -> Self {
        GaussianSource { rng, spare: None }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.rng.next_f64_open();
        let u2 = self.rng.next_f64_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform in [0, 1) from the underlying stream; leaves the cached
    /// Box-Muller spare untouched.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.next_f64()
    }
}

/// How the true coefficient vector is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSpec {
    /// User-supplied coefficients (length k).
    Fixed(Vec<f64>),
    /// i.i.d. N(0, 1/k) entries drawn from a dedicated stream, which keeps
    /// `x^T beta` at unit scale for any k.
    SeedDerived,
}

#[derive(Debug, Clone)]
pub struct DataGenConfig {
    pub n: usize,
    pub k: usize,
    /// Pairwise correlation: exact two-column construction for k = 2,
    /// equicorrelation for larger k.
    pub correlation: Option<f64>,
    pub beta: BetaSpec,
    pub seed: u64,
    pub stream: u64,
    pub chunk_size: usize,
}

impl DataGenConfig {
    pub fn new(n: usize, k: usize, seed: u64, stream: u64) -> Self {
        DataGenConfig {
            n,
            k,
            correlation: None,
            beta: BetaSpec::SeedDerived,
            seed,
            stream,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if let Some(rho) = self.correlation {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidConfig(format!(
                    "correlation must lie in [0, 1), got {rho}"
                )));
            }
            if self.k < 2 {
                return Err(Error::InvalidConfig(
                    "correlation requires at least 2 columns".into(),
                ));
            }
        }
        if let BetaSpec::Fixed(b) = &self.beta {
            if b.len() != self.k {
                return Err(Error::InvalidConfig(format!(
                    "beta has {} entries for k = {}",
                    b.len(),
                    self.k
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig("beta entries must be finite".into()));
            }
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Correlate {
    None,
    /// x1 = z1, x2 = rho z1 + sqrt(1 - rho^2) z2. Closed form, valid for
    /// rho arbitrarily close to 1.
    Pair { rho: f64, s: f64 },
    /// Lower-triangular factor of the equicorrelation matrix.
    Factor(DenseMatrix),
}

impl Correlate {
    fn build(cfg: &DataGenConfig) -> Result<Self> {
        match cfg.correlation {
            None => Ok(Correlate::None),
            Some(rho) if cfg.k == 2 => Ok(Correlate::Pair {
                rho,
                s: (1.0 - rho * rho).sqrt(),
            }),
            Some(rho) => {
                let k = cfg.k;
                let mut m = DenseMatrix::identity(k);
                for i in 0..k {
                    for j in 0..k {
                        if i != j {
                            m[(i, j)] = rho;
                        }
                    }
                }
                let factor = cholesky_decompose(&m).map_err(|_| {
                    Error::InvalidConfig(format!(
                        "equicorrelation matrix with rho = {rho} is numerically singular"
                    ))
                })?;
                Ok(Correlate::Factor(factor.lower().clone()))
            }
        }
    }

    fn apply(&self, z: &mut [f64]) {
        match self {
            Correlate::None => {}
            Correlate::Pair { rho, s } => {
                z[1] = rho * z[0] + s * z[1];
            }
            Correlate::Factor(l) => {
                let k = z.len();
                for i in (0..k).rev() {
                    let mut v = 0.0;
                    for j in 0..=i {
                        v += l[(i, j)] * z[j];
                    }
                    z[i] = v;
                }
            }
        }
    }
}

/// A dataset whose chunks are regenerated from (seed, stream) on every
/// access; nothing is materialized. Block `b` uses stream `base + b`.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    cfg: DataGenConfig,
    beta: Vec<f64>,
    correlate: Correlate,
    feature_names: Vec<String>,
}

impl SyntheticDataset {
    pub fn new(cfg: DataGenConfig) -> Result<(Self, Vec<f64>)> {
        cfg.validate()?;
        let beta = match &cfg.beta {
            BetaSpec::Fixed(b) => b.clone(),
            BetaSpec::SeedDerived => {
                let mut gauss = GaussianSource::new(Pcg32::new(
                    cfg.seed,
                    cfg.stream.wrapping_add(BETA_STREAM_OFFSET),
                ));
                let scale = 1.0 / (cfg.k as f64).sqrt();
                (0..cfg.k).map(|_| gauss.next() * scale).collect()
            }
        };
        let correlate = Correlate::build(&cfg)?;
        let feature_names = default_feature_names(cfg.k);
        let ds = SyntheticDataset {
            cfg,
            beta: beta.clone(),
            correlate,
            feature_names,
        };
        Ok((ds, beta))
    }

    pub fn true_beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn config(&self) -> &DataGenConfig {
        &self.cfg
    }

    fn generate_block(&self, block: usize) -> RowChunk {
        let start = block * self.cfg.chunk_size;
        let rows = self.cfg.chunk_size.min(self.cfg.n - start);
        let k = self.cfg.k;
        let mut gauss = GaussianSource::new(Pcg32::new(
            self.cfg.seed,
            self.cfg.stream.wrapping_add(block as u64),
        ));
        let mut responses = Vec::with_capacity(rows);
        let mut features = Vec::with_capacity(rows * k);
        let mut z = vec![0.0; k];
        for _ in 0..rows {
            for zj in z.iter_mut() {
                *zj = gauss.next();
            }
            self.correlate.apply(&mut z);
            let t: f64 = z.iter().zip(&self.beta).map(|(x, b)| x * b).sum();
            let y = f64::from(gauss.next_uniform() < sigmoid(t));
            responses.push(y);
            features.extend_from_slice(&z);
        }
        RowChunk::new(responses, features, k)
    }
}

impl Dataset for SyntheticDataset {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn n_rows(&self) -> usize {
        self.cfg.n
    }

    fn n_chunks(&self) -> usize {
        self.cfg.n.div_ceil(self.cfg.chunk_size)
    }

    fn chunk(&self, index: usize) -> Cow<'_, RowChunk> {
        Cow::Owned(self.generate_block(index))
    }
}

/// Generates and materializes a dataset together with its true coefficients.
pub fn gen_dataset(cfg: DataGenConfig) -> Result<(InMemoryDataset, Vec<f64>)> {
    let (synth, beta) = SyntheticDataset::new(cfg)?;
    let chunks: Vec<RowChunk> = (0..synth.n_chunks())
        .map(|i| synth.chunk(i).into_owned())
        .collect();
    let ds = InMemoryDataset::new(synth.feature_names.clone(), chunks)?;
    Ok((ds, beta))
}
