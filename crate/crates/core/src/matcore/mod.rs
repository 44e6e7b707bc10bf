//! Dense complex linear algebra every other module builds on: tensor
//! products, partial traces, a cyclic-Jacobi Hermitian eigensolver, matrix
//! functions on the support, propagators, and seeded random objects.

pub mod random;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::{QxError, Result, EPS_NUM, EPS_PSD, RANK_TOL};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(QxError::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self::from_fn(d, d, |i, j| {
            if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    /// Column vector from complex entries.
    pub fn column_vector(entries: &[Complex64]) -> Self {
        Self { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    /// Computational basis ket |i> of the given dimension.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v[(index, 0)] = Complex64::new(1.0, 0.0);
        v
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

    pub fn column(&self, j: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    pub fn conjugate_transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, z: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    pub fn scale_re(&self, r: f64) -> ComplexMatrix {
        self.scale(Complex64::new(r, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the anti-Hermitian part.
    pub fn hermiticity_residual(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self[(i, j)] - self[(j, i)].conj();
                s += d.norm_sqr();
            }
        }
        s.sqrt() / 2.0
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    /// ||M M^dag - I||_F.
    pub fn unitarity_residual(&self) -> f64 {
        debug_assert!(self.is_square());
        let prod = self * &self.conjugate_transpose();
        (&prod - &ComplexMatrix::identity(self.rows)).frobenius_norm()
    }

    /// (M + M^dag)/2.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Matrix product with a dimension check.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(QxError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// U M U^dag.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<ComplexMatrix> {
        u.matmul(self)?.matmul(&u.conjugate_transpose())
    }

    /// <v| M |w> for column vectors v, w.
    pub fn sandwich(&self, v: &ComplexMatrix, w: &ComplexMatrix) -> Complex64 {
        debug_assert_eq!(v.cols, 1);
        debug_assert_eq!(w.cols, 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                row += self[(i, j)] * w[(j, 0)];
            }
            acc += v[(i, 0)].conj() * row;
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimension mismatch")
    }
}

/// Kronecker product a (x) b.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Which subsystem a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of a (d_a * d_b)-dimensional square matrix.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let d = da * db;
    if !m.is_square() || m.rows() != d {
        return Err(QxError::Dimension(format!(
            "partial trace expects a {d}x{d} matrix for subsystem dims ({da},{db}), got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    match keep {
        Keep::A => Ok(ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        })),
        Keep::B => Ok(ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        })),
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; `vectors` holds the matching
/// orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> ComplexMatrix {
        self.vectors.column(k)
    }

    /// Sum_k f(lambda_k) |v_k><v_k|.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            let w = f(self.values[k]);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..d {
                let vi = self.vectors[(i, k)];
                for j in 0..d {
                    out[(i, j)] += w * vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| Complex64::new(x, 0.0))
    }
}

/// Full spectral decomposition of a Hermitian matrix via cyclic Jacobi
/// rotations.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(QxError::Dimension(format!(
            "eigendecomposition expects a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let scale = h.frobenius_norm().max(1.0);
    let residual = h.hermiticity_residual();
    if residual > EPS_NUM * scale * h.rows() as f64 {
        return Err(QxError::Hermiticity { residual });
    }

    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok(EigenSystem { values: vec![a[(0, 0)].re], vectors: v });
    }

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[(p, q)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let tol = 1e-15 * scale;
    for _sweep in 0..100 {
        if off_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = phase * (t * c);
                // Row rotation: rows p, q of a.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s.conj() + aqk * c;
                }
                // Column rotation: columns p, q of a and of v.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s.conj();
                    a[(k, q)] = akp * s + akq * c;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s.conj();
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenSystem { values, vectors })
}

/// Sum_k f(lambda_k) |v_k><v_k| for Hermitian h.
pub fn hermitian_fn(h: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(h)?.apply_fn(f))
}

/// Unitary e^{-i h t} via spectral decomposition.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    hermitian_fn(h, |lambda| (-Complex64::i() * lambda * t).exp())
}

/// ln(rho) restricted to the support, plus the support projector.
///
/// Eigenvalues below `rank_tol` relative to the largest one are treated as
/// exact zeros.
pub fn log_on_support(rho: &DensityMatrix, rank_tol: f64) -> (ComplexMatrix, ComplexMatrix) {
    let eig = rho.eig();
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let thr = rank_tol * lmax;
    let log = eig.apply_fn(|x| {
        if x > thr { Complex64::new(x.ln(), 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    let proj = eig.apply_fn(|x| {
        if x > thr { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    (log, proj)
}

/// Hermitian, positive-semidefinite, trace-one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity before wrapping.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(QxError::Dimension(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let d = mat.rows() as f64;
        let residual = mat.hermiticity_residual();
        if residual > EPS_NUM * d {
            return Err(QxError::Hermiticity { residual });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > EPS_NUM * d || tr.im.abs() > EPS_NUM * d {
            return Err(QxError::Parameter(format!("density matrix trace is {tr}, expected 1")));
        }
        let eig = eig_hermitian(&mat)?;
        if let Some(&min) = eig.values.last() {
            if min < -EPS_PSD * d {
                return Err(QxError::Parameter(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { mat })
    }

    /// Skips validation; for matrices already known valid by construction.
    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        debug_assert!(mat.is_square());
        Self { mat }
    }

    /// |psi><psi| from a (not necessarily normalized) nonzero ket.
    pub fn pure(ket: &ComplexMatrix) -> Result<Self> {
        if ket.cols() != 1 || ket.rows() == 0 {
            return Err(QxError::Dimension("pure state expects a nonempty column vector".into()));
        }
        let norm = ket.frobenius_norm();
        if norm <= f64::MIN_POSITIVE {
            return Err(QxError::Parameter("cannot normalize the zero vector".into()));
        }
        let d = ket.rows();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| {
            ket[(i, 0)] * ket[(j, 0)].conj() / (norm * norm)
        });
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64) }
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -EPS_PSD) || (sum - 1.0).abs() > EPS_NUM * probs.len() as f64 {
            return Err(QxError::Parameter(format!(
                "probabilities must be nonnegative and sum to 1, got sum {sum}"
            )));
        }
        Ok(Self { mat: ComplexMatrix::diag(probs) })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn eig(&self) -> EigenSystem {
        eig_hermitian(&self.mat).expect("density matrix is Hermitian by construction")
    }

    /// Eigenvalues above `RANK_TOL` relative to the largest one.
    pub fn numerical_rank(&self) -> usize {
        let eig = self.eig();
        let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        eig.values.iter().filter(|&&x| x > RANK_TOL * lmax).count()
    }
}
