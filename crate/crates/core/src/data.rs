//! Chunk-streamed datasets of (binary response, feature row) records.
//!
//! All heavy computation in this crate runs as reductions over [`RowChunk`]
//! blocks, so a dataset only needs to answer "how many chunks" and "give me
//! chunk i". Chunks can be borrowed from memory or materialized on demand
//! (see `SyntheticDataset` in the data generation module).

use std::borrow::Cow;

use crate::error::{Error, Result};

/// Default rows per chunk. Keeps per-chunk accumulators cache-friendly for
/// feature counts up to a few hundred.
pub const DEFAULT_CHUNK_SIZE: usize = 65_536;

/// A block of rows: responses in {0, 1} plus a dense row-major feature
/// slab of `n_rows x n_cols`. Feature columns do not include the intercept;
/// the model prepends an implicit constant column when configured to.
#[derive(Debug, Clone, PartialEq)]
pub struct RowChunk {
    responses: Vec<f64>,
    features: Vec<f64>,
    n_cols: usize,
}

impl RowChunk {
    /// `features` is row-major with `responses.len() * n_cols` entries.
    pub fn new(responses: Vec<f64>, features: Vec<f64>, n_cols: usize) -> Self {
        assert_eq!(
            responses.len() * n_cols,
            features.len(),
            "feature slab does not match {} rows x {} cols",
            responses.len(),
            n_cols
        );
        debug_assert!(responses.iter().all(|y| *y == 0.0 || *y == 1.0));
        debug_assert!(features.iter().all(|v| v.is_finite()));
        RowChunk {
            responses,
            features,
            n_cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.responses.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn response(&self, row: usize) -> f64 {
        self.responses[row]
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn features_row(&self, row: usize) -> &[f64] {
        &self.features[row * self.n_cols..(row + 1) * self.n_cols]
    }
}

/// Chunk-addressable dataset. `Sync` so chunk processing can fan out across
/// threads; implementations must return identical bytes for repeated calls
/// with the same index.
pub trait Dataset: Sync {
    fn feature_names(&self) -> &[String];

    fn n_features(&self) -> usize {
        self.feature_names().len()
    }

    fn n_rows(&self) -> usize;

    fn n_chunks(&self) -> usize;

    /// Materializes or borrows chunk `index` (0-based, file order).
    fn chunk(&self, index: usize) -> Cow<'_, RowChunk>;
}

/// Fully materialized dataset.
#[derive(Debug, Clone)]
pub struct InMemoryDataset {
    feature_names: Vec<String>,
    chunks: Vec<RowChunk>,
    n_rows: usize,
}

impl InMemoryDataset {
    pub fn new(feature_names: Vec<String>, chunks: Vec<RowChunk>) -> Result<Self> {
        let n_cols = feature_names.len();
        if chunks.iter().any(|c| c.n_cols() != n_cols) {
            return Err(Error::DimensionMismatch(format!(
                "chunk width differs from {} named columns",
                n_cols
            )));
        }
        let n_rows = chunks.iter().map(|c| c.n_rows()).sum();
        Ok(InMemoryDataset {
            feature_names,
            chunks,
            n_rows,
        })
    }

    /// Splits flat row-major data into chunks of `chunk_size` rows.
    pub fn from_rows(
        feature_names: Vec<String>,
        responses: &[f64],
        features: &[f64],
        chunk_size: usize,
    ) -> Result<Self> {
        let k = feature_names.len();
        if responses.len() * k != features.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} responses with {} feature values for {} columns",
                responses.len(),
                features.len(),
                k
            )));
        }
        let chunk_size = chunk_size.max(1);
        let chunks = responses
            .chunks(chunk_size)
            .zip(features.chunks(chunk_size * k.max(1)))
            .map(|(y, x)| {
                let x = if k == 0 { &[][..] } else { x };
                RowChunk::new(y.to_vec(), x.to_vec(), k)
            })
            .collect();
        InMemoryDataset::new(feature_names, chunks)
    }

    /// Flattens back to (responses, row-major features). Used by resampling.
    pub fn collect_rows(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.n_features();
        let mut y = Vec::with_capacity(self.n_rows);
        let mut x = Vec::with_capacity(self.n_rows * k);
        for c in &self.chunks {
            y.extend_from_slice(c.responses());
            for r in 0..c.n_rows() {
                x.extend_from_slice(c.features_row(r));
            }
        }
        (y, x)
    }
}

impl Dataset for InMemoryDataset {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_chunks(&self) -> usize {
        self.chunks.len()
    }

    fn chunk(&self, index: usize) -> Cow<'_, RowChunk> {
        Cow::Borrowed(&self.chunks[index])
    }
}

/// Standard feature names x1..xk.
pub fn default_feature_names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("x{j}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_chunking() {
        let ds = InMemoryDataset::from_rows(
            default_feature_names(2),
            &[0.0, 1.0, 1.0],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            2,
        )
        .unwrap();
        assert_eq!(ds.n_chunks(), 2);
        assert_eq!(ds.chunk(0).n_rows(), 2);
        assert_eq!(ds.chunk(1).n_rows(), 1);
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.chunk(1).features_row(0), &[5.0, 6.0]);
    }

    #[test]
    fn intercept_only_zero_columns() {
        let ds = InMemoryDataset::from_rows(vec![], &[0.0, 1.0, 1.0, 0.0], &[], 3).unwrap();
        assert_eq!(ds.n_features(), 0);
        assert_eq!(ds.n_rows(), 4);
        assert_eq!(ds.n_chunks(), 2);
        assert_eq!(ds.chunk(0).n_cols(), 0);
    }

    #[test]
    fn collect_rows_roundtrip() {
        let y = vec![1.0, 0.0, 1.0, 1.0, 0.0];
        let x: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let ds = InMemoryDataset::from_rows(default_feature_names(2), &y, &x, 2).unwrap();
        let (y2, x2) = ds.collect_rows();
        assert_eq!(y, y2);
        assert_eq!(x, x2);
    }
}
