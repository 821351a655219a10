//! Dense real-matrix kernels shared by the analysis modules: LU inversion with
//! partial pivoting, power iteration for the Perron root, Hadamard products,
//! stochasticity classification, and Neumann partial sums.

use thiserror::Error;

/// Default convergence tolerance for [`perron_root`].
pub const PERRON_TOL: f64 = 1e-12;
/// Default iteration cap for [`perron_root`].
pub const PERRON_MAX_ITER: usize = 10_000;
/// Default tolerance for [`classify_stochasticity`].
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Relative pivot threshold below which LU elimination reports singularity.
pub const PIVOT_REL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("entry ({row}, {col}) is not finite: {value}")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative entry ({row}, {col}) = {value} where a non-negative matrix is required")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("singular matrix: pivot {pivot:.3e} at column {col} below threshold {threshold:.3e}")]
    SingularMatrix {
        col: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error(
        "power iteration did not converge after {iterations} iterations \
         (last estimate {last_estimate}, residual {residual:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
    },
}

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Rejects empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (k, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: k / cols,
                    col: k % cols,
                    value: v,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        if rows.is_empty() {
            return Err(MatrixError::Empty);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(MatrixError::ShapeMismatch {
                    rows: rows.len(),
                    cols,
                    expected: rows.len() * cols,
                    got: rows.iter().map(Vec::len).sum(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
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

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product; panics on dimension mismatch (internal plumbing).
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product; panics on dimension mismatch.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.data[i * self.cols + j];
            }
        }
        sums
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute entry of `self - other`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Row- or column-sum axis for stochasticity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochKind {
    Stochastic,
    Substochastic,
    Neither,
}

/// Outcome of a stochasticity check along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticityClass {
    pub kind: StochKind,
    pub tolerance: f64,
}

impl StochasticityClass {
    /// Stochastic matrices satisfy the substochastic predicate by definition.
    pub fn is_substochastic(&self) -> bool {
        matches!(self.kind, StochKind::Stochastic | StochKind::Substochastic)
    }

    pub fn is_stochastic(&self) -> bool {
        self.kind == StochKind::Stochastic
    }
}

/// Result of a converged power iteration on a non-negative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronResult {
    /// Spectral radius estimate, clamped into the row-sum interval.
    pub root: f64,
    /// Non-negative eigenvector, normalized to unit 1-norm.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Max-norm of `m * vector - root * vector`.
    pub residual: f64,
}

/// Inverts a square matrix by LU decomposition with partial pivoting.
///
/// Reports `SingularMatrix` when a pivot falls below `PIVOT_REL_THRESHOLD`
/// times the largest initial magnitude of its column; for coefficient
/// matrices this signals a non-productive economy or degenerate input.
pub fn lu_invert(m: &Matrix) -> Result<Matrix, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let col_scale: Vec<f64> = (0..n)
        .map(|j| (0..n).fold(0.0f64, |acc, i| acc.max(m.get(i, j).abs())))
        .collect();

    // Factorize PA = LU in place; `perm` records the row order.
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_abs = lu.get(k, k).abs();
        for r in (k + 1)..n {
            let v = lu.get(r, k).abs();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        let threshold = PIVOT_REL_THRESHOLD * col_scale[k];
        if pivot_abs <= threshold {
            return Err(MatrixError::SingularMatrix {
                col: k,
                pivot: pivot_abs,
                threshold,
            });
        }
        if pivot_row != k {
            for j in 0..n {
                let a = lu.get(k, j);
                let b = lu.get(pivot_row, j);
                lu.set(k, j, b);
                lu.set(pivot_row, j, a);
            }
            perm.swap(k, pivot_row);
        }
        let pivot = lu.get(k, k);
        for r in (k + 1)..n {
            let factor = lu.get(r, k) / pivot;
            lu.set(r, k, factor);
            for j in (k + 1)..n {
                lu.set(r, j, lu.get(r, j) - factor * lu.get(k, j));
            }
        }
    }

    // Solve A x = e_c for each unit column.
    let mut inv = Matrix::zeros(n, n);
    let mut x = vec![0.0; n];
    for c in 0..n {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if perm[i] == c { 1.0 } else { 0.0 };
        }
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= lu.get(i, j) * x[j];
            }
            x[i] = s / lu.get(i, i);
        }
        for i in 0..n {
            inv.set(i, c, x[i]);
        }
    }
    Ok(inv)
}

/// Estimates the Perron root of a non-negative square matrix by power
/// iteration from a uniform start vector.
///
/// Vertices without remaining out-arcs are peeled off first: they lie on no
/// cycle and contribute only zero eigenvalues, so an acyclic matrix resolves
/// to root zero exactly instead of stalling the iteration on a defective
/// spectrum. The cyclic core is then iterated on the shifted block
/// `B + cI` with `c` half its largest row sum, which makes the root strictly
/// dominant in modulus. Converges when successive root estimates differ by
/// less than `tol` and the eigenpair residual is below
/// `tol * (1 + max row sum)`; otherwise reports `NoConvergence` carrying the
/// last estimate.
pub fn perron_root(m: &Matrix, tol: f64, max_iter: usize) -> Result<PerronResult, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    for i in 0..m.rows {
        for j in 0..m.cols {
            if m.get(i, j) < 0.0 {
                return Err(MatrixError::NegativeEntry {
                    row: i,
                    col: j,
                    value: m.get(i, j),
                });
            }
        }
    }
    let n = m.rows;
    let row_sums = m.row_sums();
    let min_row = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_row = row_sums.iter().cloned().fold(0.0f64, f64::max);

    // Peel sinks until every remaining vertex keeps an out-arc in the core.
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if alive[i] && (0..n).all(|j| !alive[j] || m.get(i, j) == 0.0) {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let core: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();

    if core.is_empty() {
        // Nilpotent matrix: any in-degree-zero vertex spans the kernel.
        let source = (0..n)
            .find(|&j| (0..n).all(|i| m.get(i, j) == 0.0))
            .expect("acyclic non-negative matrix has a zero column");
        let mut vector = vec![0.0; n];
        vector[source] = 1.0;
        return Ok(PerronResult {
            root: 0.0,
            vector,
            iterations: 0,
            residual: 0.0,
        });
    }

    let k = core.len();
    let mut block = Matrix::zeros(k, k);
    for (a, &i) in core.iter().enumerate() {
        for (b, &j) in core.iter().enumerate() {
            block.set(a, b, m.get(i, j));
        }
    }
    let block_max_row = block
        .row_sums()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let resid_tol = tol * (1.0 + block_max_row);
    let shift = 0.5 * block_max_row;

    let mut x = vec![1.0 / k as f64; k];
    let mut estimate = f64::NAN;
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut y = block.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let norm: f64 = y.iter().sum();
        let next = norm - shift; // ||Bx||_1 with x normalized to unit 1-norm
        residual = y
            .iter()
            .zip(&x)
            .fold(0.0f64, |acc, (yi, xi)| acc.max((yi - norm * xi).abs()));
        let converged = (next - estimate).abs() < tol && residual <= resid_tol;
        estimate = next;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if converged {
            // The true root provably lies in the full row-sum interval.
            let root = estimate.clamp(min_row, max_row);
            // Trimmed vertices have no arcs into the core, so zero-padding
            // keeps the eigenpair identity exact on the full matrix.
            let mut vector = vec![0.0; n];
            for (a, &i) in core.iter().enumerate() {
                vector[i] = x[a];
            }
            let res = m
                .mul_vec(&vector)
                .iter()
                .zip(&vector)
                .fold(0.0f64, |acc, (yi, xi)| acc.max((yi - root * xi).abs()));
            return Ok(PerronResult {
                root,
                vector,
                iterations: iter,
                residual: res,
            });
        }
    }
    Err(MatrixError::NoConvergence {
        iterations: max_iter,
        last_estimate: estimate,
        residual,
    })
}

/// Entrywise (Hadamard) product of two same-shaped matrices.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix, MatrixError> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(MatrixError::DimensionMismatch {
            op: "hadamard",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect();
    Ok(Matrix {
        rows: a.rows,
        cols: a.cols,
        data,
    })
}

/// Classifies a square matrix as stochastic, substochastic or neither along
/// the given axis. Entries within `-tol` of zero are treated as zero; larger
/// negatives make the matrix `Neither`.
pub fn classify_stochasticity(m: &Matrix, tol: f64, axis: Axis) -> StochasticityClass {
    let negative_entry = m.data.iter().any(|&v| v < -tol);
    // Sum with tiny negatives clamped so parse noise cannot flip the class.
    let clamped_sums: Vec<f64> = match axis {
        Axis::Rows => (0..m.rows)
            .map(|i| m.row(i).iter().map(|&v| v.max(0.0)).sum())
            .collect(),
        Axis::Cols => {
            let mut s = vec![0.0; m.cols];
            for i in 0..m.rows {
                for (j, sj) in s.iter_mut().enumerate() {
                    *sj += m.get(i, j).max(0.0);
                }
            }
            s
        }
    };
    let kind = if negative_entry {
        StochKind::Neither
    } else if clamped_sums.iter().all(|&s| (s - 1.0).abs() <= tol) {
        StochKind::Stochastic
    } else if clamped_sums.iter().all(|&s| s <= 1.0 + tol) {
        StochKind::Substochastic
    } else {
        StochKind::Neither
    };
    StochasticityClass {
        kind,
        tolerance: tol,
    }
}

/// Partial sum `I + m + m^2 + ... + m^k` of the Neumann series.
pub fn neumann_partial_sum(m: &Matrix, k: usize) -> Result<Matrix, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let mut acc = Matrix::identity(m.rows);
    let mut term = Matrix::identity(m.rows);
    for _ in 0..k {
        term = term.mul(m);
        acc = acc.add(&term);
    }
    Ok(acc)
}
