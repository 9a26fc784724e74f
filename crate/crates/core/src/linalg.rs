//! Dense linear algebra kernels: Cholesky factorization, triangular solves,
//! symmetric-positive-definite inversion, and weighted Gramian accumulation
//! via sums of outer products.
//!
//! Everything here is plain `f64` with row-major storage. The Cholesky path
//! deliberately has no pivoting or regularization fallback: an
//! ill-conditioned matrix surfaces as [`Error::NotPositiveDefinite`] instead
//! of being silently repaired.

use crate::error::{Error, Result};

/// Relative pivot threshold for declaring a matrix not positive definite.
/// A pivot at or below `PIVOT_RTOL * max_diagonal` is treated as singular.
pub const PIVOT_RTOL: f64 = 1e-13;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the element count does
    /// not match the shape.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "shape/data length mismatch");
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: {}x{} matrix with vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Largest absolute asymmetry relative to the largest absolute entry.
    pub fn relative_asymmetry(&self) -> f64 {
        let mut max_abs = 0.0f64;
        let mut max_gap = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                max_abs = max_abs.max(self[(i, j)].abs());
                if j > i {
                    max_gap = max_gap.max((self[(i, j)] - self[(j, i)]).abs());
                }
            }
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_gap / max_abs
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor `L` with `L L^T = A`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: DenseMatrix,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `(L L^T) z = b` by forward then back substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "solve: factor of dimension {} with rhs of length {}",
                n,
                b.len()
            )));
        }
        let mut z = b.to_vec();
        // Forward: L y = b
        for i in 0..n {
            let li = self.l.row(i);
            let s = dot(&li[..i], &z[..i]);
            z[i] = (z[i] - s) / li[i];
        }
        // Back: L^T z = y
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        Ok(z)
    }

    /// Inverse of the factored matrix, solved column by column and
    /// symmetrized afterwards.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e)?;
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        Ok(inv)
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// A pivot at or below `PIVOT_RTOL * max(diag(A))`, or a non-finite pivot,
/// yields [`Error::NotPositiveDefinite`] carrying the pivot index.
pub fn cholesky_decompose(a: &DenseMatrix) -> Result<CholeskyFactor> {
    let n = a.rows();
    if n == 0 || a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky: expected square nonempty matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
    let threshold = PIVOT_RTOL * max_diag;

    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !s.is_finite() || s <= threshold {
                    return Err(Error::NotPositiveDefinite { pivot: i });
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor { l })
}

/// Solves the SPD system behind `factor` for `b`.
pub fn solve_spd(factor: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    factor.solve(b)
}

/// Inverts a symmetric positive-definite matrix via its Cholesky factor.
pub fn invert_spd(a: &DenseMatrix) -> Result<DenseMatrix> {
    cholesky_decompose(a)?.inverse()
}

/// Running sum of weighted outer products `sum_i w_i x_i x_i^T`, stored as
/// the packed upper triangle (k(k+1)/2 entries) plus a row count.
///
/// Accumulators built independently over disjoint row chunks merge into the
/// same value as a single pass over the concatenated rows, up to float
/// reordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricAccumulator {
    dim: usize,
    upper: Vec<f64>,
    count: u64,
}

impl SymmetricAccumulator {
    pub fn new(dim: usize) -> Self {
        SymmetricAccumulator {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    fn offset(&self, i: usize) -> usize {
        // Start of packed row i in the upper triangle.
        i * self.dim - i * (i + 1) / 2 + i
    }

    /// Adds `w * x x^T`.
    pub fn accumulate(&mut self, x: &[f64], w: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "accumulate: dimension {} with vector of length {}",
                self.dim,
                x.len()
            )));
        }
        for i in 0..self.dim {
            let wxi = w * x[i];
            let base = self.offset(i);
            let row = &mut self.upper[base - i..];
            for j in i..self.dim {
                row[j] += wxi * x[j];
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Entrywise sum of two accumulators; counts add.
    pub fn merge(mut self, other: &SymmetricAccumulator) -> Result<SymmetricAccumulator> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "merge: dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += *b;
        }
        self.count += other.count;
        Ok(self)
    }

    /// Expands the packed triangle into a full symmetric matrix.
    pub fn to_matrix(&self) -> DenseMatrix {
        let k = self.dim;
        let mut m = DenseMatrix::zeros(k, k);
        let mut idx = 0;
        for i in 0..k {
            for j in i..k {
                m[(i, j)] = self.upper[idx];
                m[(j, i)] = self.upper[idx];
                idx += 1;
            }
        }
        m
    }
}

/// Merges `b` into `a`.
pub fn merge_accumulators(
    a: SymmetricAccumulator,
    b: &SymmetricAccumulator,
) -> Result<SymmetricAccumulator> {
    a.merge(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::Pcg32;

    fn frobenius(m: &DenseMatrix) -> f64 {
        m.data().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn random_spd(n: usize, rng: &mut Pcg32) -> DenseMatrix {
        // M^T M + I is symmetric positive definite.
        let m: Vec<f64> = (0..n * n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let mut a = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    a[(i, j)] += m[k * n + i] * m[k * n + j];
                }
            }
        }
        a
    }

    #[test]
    fn cholesky_identity() {
        let a = DenseMatrix::identity(3);
        let f = cholesky_decompose(&a).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(3));
    }

    #[test]
    fn cholesky_hand_2x2() {
        let a = DenseMatrix::from_rows(2, 2, vec![4.0, 2.0, 2.0, 3.0]);
        let f = cholesky_decompose(&a).unwrap();
        let l = f.lower();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert!((l[(1, 1)] - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let mut rng = Pcg32::new(11, 1);
        for _ in 0..20 {
            let a = random_spd(6, &mut rng);
            let f = cholesky_decompose(&a).unwrap();
            let l = f.lower();
            let mut diff = a.clone();
            for i in 0..6 {
                for j in 0..6 {
                    let mut v = 0.0;
                    for k in 0..6 {
                        v += l[(i, k)] * l[(j, k)];
                    }
                    diff[(i, j)] -= v;
                }
            }
            assert!(frobenius(&diff) <= 1e-12 * frobenius(&a));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 1.0]);
        match cholesky_decompose(&a) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = DenseMatrix::from_rows(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            cholesky_decompose(&a),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let f = cholesky_decompose(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);

        let d = DenseMatrix::from_rows(2, 2, vec![4.0, 0.0, 0.0, 9.0]);
        let f = cholesky_decompose(&d).unwrap();
        assert_eq!(f.solve(&[8.0, 18.0]).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn solve_matches_explicit_inverse() {
        // Oracle: Gauss-Jordan inverse, independent of the Cholesky path.
        let mut rng = Pcg32::new(5, 9);
        let n = 8;
        let a = random_spd(n, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect();

        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = a.row(i).to_vec();
                row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for col in 0..n {
            let p = (col..n)
                .max_by(|&r, &s| aug[r][col].abs().total_cmp(&aug[s][col].abs()))
                .unwrap();
            aug.swap(col, p);
            let pivot = aug[col][col];
            for v in aug[col].iter_mut() {
                *v /= pivot;
            }
            for r in 0..n {
                if r != col {
                    let factor = aug[r][col];
                    for c in 0..2 * n {
                        aug[r][c] -= factor * aug[col][c];
                    }
                }
            }
        }
        let expected: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| aug[i][n + j] * b[j]).sum())
            .collect();

        let z = cholesky_decompose(&a).unwrap().solve(&b).unwrap();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (zi, ei) in z.iter().zip(&expected) {
            assert!((zi - ei).abs() <= 1e-9 * b_norm.max(1.0));
        }
    }

    #[test]
    fn solve_residual_bound() {
        let mut rng = Pcg32::new(2024, 3);
        for _ in 0..10 {
            let a = random_spd(5, &mut rng);
            let b: Vec<f64> = (0..5).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let z = cholesky_decompose(&a).unwrap().solve(&b).unwrap();
            let az = a.matvec(&z).unwrap();
            let res: f64 = az
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(res <= 1e-9 * b_norm.max(1e-12));
        }
    }

    #[test]
    fn invert_trivial_cases() {
        let inv = invert_spd(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(inv, DenseMatrix::identity(4));

        let d = DenseMatrix::from_rows(2, 2, vec![2.0, 0.0, 0.0, 4.0]);
        let inv = invert_spd(&d).unwrap();
        assert_eq!(inv[(0, 0)], 0.5);
        assert_eq!(inv[(1, 1)], 0.25);
        assert_eq!(inv[(0, 1)], 0.0);
    }

    #[test]
    fn invert_residual_and_symmetry() {
        let mut rng = Pcg32::new(77, 13);
        let a = random_spd(5, &mut rng);
        let inv = invert_spd(&a).unwrap();
        let mut max_res = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                let mut v = 0.0;
                for k in 0..5 {
                    v += a[(i, k)] * inv[(k, j)];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                max_res = max_res.max((v - target).abs());
            }
        }
        assert!(max_res < 1e-8, "residual {max_res}");
        assert_eq!(inv.relative_asymmetry(), 0.0);
    }

    #[test]
    fn accumulate_trivial() {
        let mut acc = SymmetricAccumulator::new(2);
        acc.accumulate(&[1.0, 0.0], 1.0).unwrap();
        let m = acc.to_matrix();
        assert_eq!(m.data(), &[1.0, 0.0, 0.0, 0.0]);

        acc.accumulate(&[0.0, 1.0], 2.0).unwrap();
        let m = acc.to_matrix();
        assert_eq!(m.data(), &[1.0, 0.0, 0.0, 2.0]);
        assert_eq!(acc.count(), 2);
    }

    #[test]
    fn accumulate_matches_dense_triple_product() {
        let mut rng = Pcg32::new(31, 7);
        let (n, k) = (1000, 4);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
            .collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();

        let mut acc = SymmetricAccumulator::new(k);
        for (x, &w) in rows.iter().zip(&weights) {
            acc.accumulate(x, w).unwrap();
        }
        let got = acc.to_matrix();

        // Oracle: dense X^T D X.
        let mut expect = DenseMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let mut v = 0.0;
                for (x, &w) in rows.iter().zip(&weights) {
                    v += x[i] * w * x[j];
                }
                expect[(i, j)] = v;
            }
        }
        let scale = frobenius(&expect);
        for i in 0..k {
            for j in 0..k {
                assert!((got[(i, j)] - expect[(i, j)]).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn unit_vectors_give_exact_counting_matrix() {
        let k = 4;
        let mut acc = SymmetricAccumulator::new(k);
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            for _ in 0..=j {
                acc.accumulate(&e, 1.0).unwrap();
            }
        }
        let m = acc.to_matrix();
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { (i + 1) as f64 } else { 0.0 };
                assert_eq!(m[(i, j)], expect);
            }
        }
    }

    #[test]
    fn merge_identity_and_commutativity() {
        let mut rng = Pcg32::new(8, 21);
        let mut a = SymmetricAccumulator::new(3);
        let mut b = SymmetricAccumulator::new(3);
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.next_f64()).collect();
            a.accumulate(&x, rng.next_f64()).unwrap();
            let y: Vec<f64> = (0..3).map(|_| rng.next_f64()).collect();
            b.accumulate(&y, rng.next_f64()).unwrap();
        }
        let zero = SymmetricAccumulator::new(3);
        assert_eq!(merge_accumulators(zero, &a).unwrap(), a);

        let ab = merge_accumulators(a.clone(), &b).unwrap();
        let ba = merge_accumulators(b, &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn merge_dimension_mismatch() {
        let a = SymmetricAccumulator::new(2);
        let b = SymmetricAccumulator::new(3);
        assert!(matches!(a.merge(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn chunked_merge_matches_single_pass() {
        let mut rng = Pcg32::new(91, 4);
        let (n, k) = (500, 3);
        let rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..k).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                (x, rng.next_f64())
            })
            .collect();

        let mut single = SymmetricAccumulator::new(k);
        for (x, w) in &rows {
            single.accumulate(x, *w).unwrap();
        }

        // Seven uneven chunks.
        let bounds = [0usize, 3, 80, 81, 200, 350, 499, 500];
        let mut merged = SymmetricAccumulator::new(k);
        for w in bounds.windows(2) {
            let mut acc = SymmetricAccumulator::new(k);
            for (x, wt) in &rows[w[0]..w[1]] {
                acc.accumulate(x, *wt).unwrap();
            }
            merged = merged.merge(&acc).unwrap();
        }

        assert_eq!(merged.count(), single.count());
        let scale = frobenius(&single.to_matrix());
        let (m, s) = (merged.to_matrix(), single.to_matrix());
        for idx in 0..m.data().len() {
            assert!((m.data()[idx] - s.data()[idx]).abs() <= 1e-9 * scale);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // Accumulator homomorphism: any partition of the rows merges to the
        // single-pass value within 1e-9 relative.
        #[test]
        fn accumulator_partition_homomorphism(
            rows in prop::collection::vec(
                (prop::collection::vec(-10.0f64..10.0, 4), 0.0f64..5.0), 1..120),
            cuts in prop::collection::vec(0usize..120, 0..6),
        ) {
            let k = 4;
            let mut single = SymmetricAccumulator::new(k);
            for (x, w) in &rows {
                single.accumulate(x, *w).unwrap();
            }

            let mut bounds: Vec<usize> = cuts.iter().map(|c| c % (rows.len() + 1)).collect();
            bounds.push(0);
            bounds.push(rows.len());
            bounds.sort_unstable();

            let mut merged = SymmetricAccumulator::new(k);
            for w in bounds.windows(2) {
                let mut acc = SymmetricAccumulator::new(k);
                for (x, wt) in &rows[w[0]..w[1]] {
                    acc.accumulate(x, *wt).unwrap();
                }
                merged = merged.merge(&acc).unwrap();
            }

            prop_assert_eq!(merged.count(), single.count());
            let scale = single
                .to_matrix()
                .data()
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(1e-12);
            let (m, s) = (merged.to_matrix(), single.to_matrix());
            for idx in 0..m.data().len() {
                prop_assert!((m.data()[idx] - s.data()[idx]).abs() <= 1e-9 * scale);
            }
        }
    }
}
