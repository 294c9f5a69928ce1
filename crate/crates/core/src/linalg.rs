//! Dense least squares via Householder QR.
//!
//! Regression designs here are tall and thin (tens of thousands of rows, at
//! most a few hundred columns), so a column-major matrix and an unblocked
//! Householder factorization are sufficient.

use crate::error::{Error, Result};

/// Relative threshold on `|R_kk| / |R_00|` below which a column counts as
/// numerically dependent on its predecessors.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("columns differ in length".into()));
        }
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    /// Appends a column.
    pub fn push_column(&mut self, column: &[f64]) -> Result<()> {
        if self.cols > 0 && column.len() != self.rows {
            return Err(Error::InvalidArgument("column length mismatch".into()));
        }
        if self.cols == 0 {
            self.rows = column.len();
        }
        self.data.extend_from_slice(column);
        self.cols += 1;
        Ok(())
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate().take(self.cols) {
            if xj != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(j)) {
                    *o += a * xj;
                }
            }
        }
        out
    }

    fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = self.data.split_at_mut(hi * self.rows);
        left[lo * self.rows..(lo + 1) * self.rows].swap_with_slice(&mut right[..self.rows]);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR factorization, optionally with column pivoting by
/// remaining column norm.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Householder vectors below the diagonal (implicit unit head), R above.
    packed: Matrix,
    tau: Vec<f64>,
    r_diag: Vec<f64>,
    /// `perm[k]` is the original index of the column at position `k`.
    perm: Vec<usize>,
}

impl Qr {
    pub fn new(a: &Matrix, pivot: bool) -> Self {
        let mut m = a.clone();
        let (rows, cols) = (m.rows, m.cols);
        let steps = rows.min(cols);
        let mut tau = vec![0.0; steps];
        let mut r_diag = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..cols).collect();

        for k in 0..steps {
            if pivot {
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..cols {
                    let c = &m.column(j)[k..];
                    let nrm = dot(c, c);
                    if nrm > best_norm {
                        best_norm = nrm;
                        best = j;
                    }
                }
                m.swap_columns(k, best);
                perm.swap(k, best);
            }

            let col = &mut m.column_mut(k)[k..];
            let alpha = col[0];
            let norm = dot(col, col).sqrt();
            if norm == 0.0 {
                tau[k] = 0.0;
                r_diag[k] = 0.0;
                continue;
            }
            let beta = if alpha >= 0.0 { -norm } else { norm };
            tau[k] = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            for v in col.iter_mut().skip(1) {
                *v *= scale;
            }
            col[0] = 1.0;
            r_diag[k] = beta;

            let (head, tail) = m.data.split_at_mut((k + 1) * rows);
            let v = &head[k * rows + k..(k + 1) * rows];
            for j in 0..cols - k - 1 {
                let target = &mut tail[j * rows + k..(j + 1) * rows];
                let s = tau[k] * dot(v, target);
                if s != 0.0 {
                    for (t, vi) in target.iter_mut().zip(v) {
                        *t -= s * vi;
                    }
                }
            }
            m.column_mut(k)[k] = beta;
        }

        Self {
            packed: m,
            tau,
            r_diag,
            perm,
        }
    }

    pub fn rows(&self) -> usize {
        self.packed.rows
    }

    pub fn cols(&self) -> usize {
        self.packed.cols
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Numerical rank: leading diagonal entries above the relative tolerance.
    /// Only meaningful for pivoted factorizations.
    pub fn rank(&self) -> usize {
        let lead = self.r_diag.first().map_or(0.0, |v| v.abs());
        if lead == 0.0 {
            return 0;
        }
        self.r_diag
            .iter()
            .take_while(|d| d.abs() > RANK_TOLERANCE * lead)
            .count()
    }

    /// Overwrites `b` with `Qᵀ b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let rows = self.packed.rows;
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let v = &self.packed.column(k)[k..];
            let target = &mut b[k..rows];
            let mut s = target[0];
            for (ti, vi) in target[1..].iter().zip(&v[1..]) {
                s += ti * vi;
            }
            s *= t;
            target[0] -= s;
            for (ti, vi) in target[1..].iter_mut().zip(&v[1..]) {
                *ti -= s * vi;
            }
        }
    }

    /// Solves `R[..r, ..r] z = c[..r]` and scatters `z` back through the
    /// permutation; columns past `r` get zero coefficients.
    fn back_substitute(&self, c: &[f64], r: usize) -> Vec<f64> {
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = c[i];
            for (j, zj) in z.iter().enumerate().skip(i + 1) {
                s -= self.packed.get(i, j) * zj;
            }
            z[i] = s / self.packed.get(i, i);
        }
        let mut x = vec![0.0; self.packed.cols];
        for (i, zi) in z.into_iter().enumerate() {
            x[self.perm[i]] = zi;
        }
        x
    }
}

/// Solution of a least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub rank: usize,
}

/// Rank-tolerant least squares: numerically dependent columns (after
/// norm-pivoting) receive zero coefficients.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    if a.rows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "design has {} rows but target has {}",
            a.rows(),
            b.len()
        )));
    }
    if a.cols() == 0 {
        return Ok(LeastSquares {
            coefficients: Vec::new(),
            residuals: b.to_vec(),
            rss: dot(b, b),
            rank: 0,
        });
    }
    let qr = Qr::new(a, true);
    let rank = qr.rank();
    let mut c = b.to_vec();
    qr.apply_qt(&mut c);
    let coefficients = qr.back_substitute(&c, rank);
    let fitted = a.mul_vec(&coefficients);
    let residuals: Vec<f64> = b.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let rss = dot(&residuals, &residuals);
    Ok(LeastSquares {
        coefficients,
        residuals,
        rss,
        rank,
    })
}

/// Full-rank least squares; fails with a singular-regression error when any
/// column is numerically dependent on the others.
pub fn lstsq_full_rank(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    let fit = lstsq(a, b)?;
    if fit.rank < a.cols() {
        return Err(Error::SingularRegression(format!(
            "design of {} columns has numerical rank {}",
            a.cols(),
            fit.rank
        )));
    }
    Ok(fit)
}

/// Residual sums of squares of the nested prefix models `a[:, ..k]` for
/// `k = 0..=cols`, from a single unpivoted factorization. Entry `k` is `None`
/// once a column up to `k` is numerically dependent on earlier ones.
pub fn nested_rss(a: &Matrix, b: &[f64]) -> Vec<Option<f64>> {
    let qr = Qr::new(a, false);
    let mut c = b.to_vec();
    qr.apply_qt(&mut c);
    // tail sums: rss_k = Σ_{i ≥ k} c_i²
    let mut tail = vec![0.0; c.len() + 1];
    for i in (0..c.len()).rev() {
        tail[i] = tail[i + 1] + c[i] * c[i];
    }
    let norms: Vec<f64> = (0..a.cols())
        .map(|j| dot(a.column(j), a.column(j)).sqrt())
        .collect();
    let mut out = Vec::with_capacity(a.cols() + 1);
    out.push(Some(tail[0]));
    let mut ok = true;
    for k in 0..a.cols() {
        let d = qr.r_diag().get(k).copied().unwrap_or(0.0).abs();
        if d <= RANK_TOLERANCE * norms[k].max(f64::MIN_POSITIVE) {
            ok = false;
        }
        out.push(if ok { Some(tail[k + 1]) } else { None });
    }
    out
}

/// OLS t-ratio of the last column's coefficient, together with the residual
/// sum of squares. Requires full column rank.
pub fn last_coefficient_t(a: &Matrix, b: &[f64]) -> Result<(f64, f64)> {
    let (n, p) = (a.rows(), a.cols());
    if p == 0 || n <= p {
        return Err(Error::SingularRegression(format!(
            "{n} observations cannot support {p} regressors"
        )));
    }
    let qr = Qr::new(a, false);
    let norms: Vec<f64> = (0..p)
        .map(|j| dot(a.column(j), a.column(j)).sqrt())
        .collect();
    for (k, d) in qr.r_diag().iter().enumerate() {
        if d.abs() <= RANK_TOLERANCE * norms[k].max(f64::MIN_POSITIVE) {
            return Err(Error::SingularRegression(format!(
                "regressor {k} is collinear with earlier regressors"
            )));
        }
    }
    let mut c = b.to_vec();
    qr.apply_qt(&mut c);
    let rss: f64 = c[p..].iter().map(|v| v * v).sum();
    let sigma = (rss / (n - p) as f64).sqrt();
    let r_last = qr.r_diag()[p - 1];
    if sigma == 0.0 {
        return Err(Error::SingularRegression(
            "perfect fit leaves no residual variance".into(),
        ));
    }
    Ok((c[p - 1] * r_last.signum() / sigma, rss))
}
