//! Small dense linear algebra, seedable random streams and the χ² quantile.
//!
//! Only what the MCD fit, Mahalanobis distances and Gaussian kernel sampling
//! need lives here. Matrices are row-major `f64`.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
    #[error("triangular matrix is singular (zero pivot at row {row})")]
    SingularMatrix { row: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("degrees of freedom must be positive")]
    InvalidDegreesOfFreedom,
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumError> {
        if data.len() != rows * cols {
            return Err(NumError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row slices. All rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, NumError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumError::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), NumError> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(NumError::DimensionMismatch {
                expected: self.cols,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NumError> {
        if self.cols != other.rows {
            return Err(NumError::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, NumError> {
        if v.len() != self.cols {
            return Err(NumError::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self
            .iter_rows()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.iter_rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in self.iter_rows() {
            writeln!(f, "  {r:?}")?;
        }
        write!(f, "]")
    }
}

/// Square symmetric matrix; scatter and covariance matrices are stored as this.
#[derive(Clone, PartialEq, Debug)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts `m` if it is square and symmetric to 1e-12 relative tolerance.
    /// The stored value is exactly symmetrized.
    pub fn new(m: Matrix) -> Result<Self, NumError> {
        if m.rows != m.cols {
            return Err(NumError::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        let scale = m
            .data
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut s = m;
        for i in 0..s.rows {
            for j in (i + 1)..s.cols {
                let (a, b) = (s[(i, j)], s[(j, i)]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(NumError::NotSymmetric);
                }
                let avg = 0.5 * (a + b);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(SymMatrix(s))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scaled(s))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// `D·self·D` for a diagonal `D` given by its entries.
    pub fn congruence_diag(&self, d: &[f64]) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.rows {
            for j in 0..m.cols {
                m[(i, j)] *= d[i] * d[j];
            }
        }
        SymMatrix(m)
    }

    /// `A·self·Aᵀ`.
    pub fn congruence(&self, a: &Matrix) -> Result<SymMatrix, NumError> {
        let m = a.matmul(&self.0)?.matmul(&a.transpose())?;
        // exact symmetry; products can differ in the last bit
        let mut s = m;
        for i in 0..s.rows {
            for j in (i + 1)..s.cols {
                let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = avg;
                s[(j, i)] = avg;
            }
        }
        Ok(SymMatrix(s))
    }

    /// Determinant via Cholesky; zero when the matrix is not positive definite.
    pub fn determinant(&self) -> f64 {
        match cholesky(self) {
            Ok(l) => l.determinant_of_product(),
            Err(_) => 0.0,
        }
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Lower-triangular factor, typically from [`cholesky`].
#[derive(Clone, PartialEq, Debug)]
pub struct LowerTriangular(Matrix);

impl LowerTriangular {
    /// Wraps `m`, zeroing anything above the diagonal.
    pub fn new(m: Matrix) -> Result<Self, NumError> {
        if m.rows != m.cols {
            return Err(NumError::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        let mut m = m;
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                m[(i, j)] = 0.0;
            }
        }
        Ok(LowerTriangular(m))
    }

    pub fn zeros(n: usize) -> Self {
        LowerTriangular(Matrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// `L·Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.0[(i, k)] * self.0[(j, k)]).sum();
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        m
    }

    /// det(L·Lᵀ) = Π lᵢᵢ².
    pub fn determinant_of_product(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)] * self.0[(i, i)]).product()
    }

    pub fn log_determinant_of_product(&self) -> f64 {
        (0..self.dim()).map(|i| 2.0 * self.0[(i, i)].ln()).sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, NumError> {
        let n = self.dim();
        if v.len() != n {
            return Err(NumError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        Ok((0..n).map(|i| (0..=i).map(|k| self.0[(i, k)] * v[k]).sum()).collect())
    }
}

/// Cholesky factorization `m = L·Lᵀ`.
///
/// A pivot at or below `dim · ε · max(diag)` is treated as a failure.
pub fn cholesky(m: &SymMatrix) -> Result<LowerTriangular, NumError> {
    let n = m.dim();
    let a = m.matrix();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
    let tol = n as f64 * f64::EPSILON * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(NumError::NotPositiveDefinite { column: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(LowerTriangular(l))
}

/// Forward substitution for `L·x = b`.
pub fn solve_lower(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>, NumError> {
    let n = l.dim();
    if b.len() != n {
        return Err(NumError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let m = l.matrix();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let piv = m[(i, i)];
        if piv == 0.0 {
            return Err(NumError::SingularMatrix { row: i });
        }
        let mut s = b[i];
        for k in 0..i {
            s -= m[(i, k)] * x[k];
        }
        x[i] = s / piv;
    }
    Ok(x)
}

/// Back substitution for `Lᵀ·x = b`.
pub fn solve_upper_transposed(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>, NumError> {
    let n = l.dim();
    if b.len() != n {
        return Err(NumError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let m = l.matrix();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let piv = m[(i, i)];
        if piv == 0.0 {
            return Err(NumError::SingularMatrix { row: i });
        }
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= m[(k, i)] * x[k];
        }
        x[i] = s / piv;
    }
    Ok(x)
}

/// Solves `(L·Lᵀ)·x = b`.
pub fn solve_cholesky(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>, NumError> {
    let y = solve_lower(l, b)?;
    solve_upper_transposed(l, &y)
}

/// `(x − center)ᵀ (L·Lᵀ)⁻¹ (x − center)`.
pub fn mahalanobis_sq_chol(x: &[f64], center: &[f64], l: &LowerTriangular) -> Result<f64, NumError> {
    if x.len() != center.len() {
        return Err(NumError::DimensionMismatch {
            expected: center.len(),
            got: x.len(),
        });
    }
    let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    let z = solve_lower(l, &diff)?;
    Ok(z.iter().map(|v| v * v).sum())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 divisor).
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Column means of the selected rows.
pub fn mean_of_rows(x: &Matrix, rows: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; x.cols()];
    for &i in rows {
        for (acc, v) in m.iter_mut().zip(x.row(i)) {
            *acc += v;
        }
    }
    let n = rows.len() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

/// Mean and sample covariance (n − 1 divisor) of the selected rows.
pub fn covariance_of_rows(x: &Matrix, rows: &[usize]) -> (Vec<f64>, SymMatrix) {
    let p = x.cols();
    let center = mean_of_rows(x, rows);
    let mut c = Matrix::zeros(p, p);
    let mut d = vec![0.0; p];
    for &i in rows {
        for (dk, (v, m)) in d.iter_mut().zip(x.row(i).iter().zip(&center)) {
            *dk = v - m;
        }
        for a in 0..p {
            for b in 0..=a {
                c[(a, b)] += d[a] * d[b];
            }
        }
    }
    let denom = (rows.len() as f64 - 1.0).max(1.0);
    for a in 0..p {
        for b in 0..=a {
            let v = c[(a, b)] / denom;
            c[(a, b)] = v;
            c[(b, a)] = v;
        }
    }
    (center, SymMatrix(c))
}

/// Mean and covariance of all rows.
pub fn covariance(x: &Matrix) -> (Vec<f64>, SymMatrix) {
    let all: Vec<usize> = (0..x.rows()).collect();
    covariance_of_rows(x, &all)
}

// ── Random streams ──────────────────────────────────────────────────────

/// Seedable random stream keyed by `(seed, stream)`.
///
/// Backed by ChaCha8 with the 64-bit stream id mapped to the cipher's stream
/// parameter, so raw output is identical on every platform. Normal variates
/// use the Box–Muller transform; both values of a pair are used in order.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Independent child stream tagged by `tag`. Does not advance `self`.
    pub fn fork(&self, tag: u64) -> RngStream {
        let child = splitmix64(splitmix64(self.stream ^ 0x5bd1_e995_u64.rotate_left(17)) ^ tag);
        RngStream::new(self.seed, child)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (rejection sampling, unbiased). `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// `k` distinct indices from `0..n`, in draw order (partial Fisher–Yates).
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws `center + L·u` with `u` standard normal from `rng`.
pub fn mvn_sample(center: &[f64], scatter_chol: &LowerTriangular, rng: &mut RngStream) -> Result<Vec<f64>, NumError> {
    if center.len() != scatter_chol.dim() {
        return Err(NumError::DimensionMismatch {
            expected: scatter_chol.dim(),
            got: center.len(),
        });
    }
    let u: Vec<f64> = (0..center.len()).map(|_| rng.standard_normal()).collect();
    let lu = scatter_chol.mul_vec(&u)?;
    Ok(center.iter().zip(lu).map(|(c, v)| c + v).collect())
}

// ── χ² distribution ─────────────────────────────────────────────────────

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (sum.ln() + log_prefix).exp().min(1.0)
    } else {
        // continued fraction for Q(a, x), modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        (1.0 - (log_prefix.exp() * h)).max(0.0)
    }
}

pub fn chi2_cdf(df: u32, x: f64) -> f64 {
    regularized_lower_gamma(df as f64 / 2.0, x / 2.0)
}

/// Quantile of χ²(df) at `prob`, by bracketing and bisection on the CDF.
pub fn chi2_quantile(df: u32, prob: f64) -> Result<f64, NumError> {
    if df == 0 {
        return Err(NumError::InvalidDegreesOfFreedom);
    }
    if !(prob > 0.0 && prob < 1.0) {
        return Err(NumError::InvalidProbability(prob));
    }
    let mut lo = 0.0;
    let mut hi = (df as f64).max(1.0);
    while chi2_cdf(df, hi) < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi2_cdf(df, mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
