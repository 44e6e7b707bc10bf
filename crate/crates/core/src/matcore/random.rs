//! Seeded random matrices and states for the randomized property suites.
//!
//! Every sampler is deterministic for a fixed seed.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::matcore::{ComplexMatrix, DensityMatrix};
use crate::{QxError, Result};

/// Standard complex Gaussian entry (variance 1).
fn gaussian(rng: &mut StdRng) -> Complex64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * phi.cos(), r * phi.sin()) / std::f64::consts::SQRT_2
}

/// Ginibre matrix of i.i.d. complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut StdRng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-random unitary via QR of a Ginibre matrix.
///
/// Modified Gram-Schmidt with re-orthogonalization; the R diagonal is
/// positive real, which fixes the phase convention needed for Haar
/// uniformity.
pub fn haar_unitary_rng(dim: usize, rng: &mut StdRng) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| (0..dim).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..dim).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..dim {
                    let sub = proj * cols[k][i];
                    cols[j][i] -= sub;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_rng(dim, &mut StdRng::seed_from_u64(seed))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian_rng(dim: usize, rng: &mut StdRng) -> ComplexMatrix {
    ginibre(dim, dim, rng).hermitian_part()
}

pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    random_hermitian_rng(dim, &mut StdRng::seed_from_u64(seed))
}

/// Normalized random ket.
pub fn random_pure_state_rng(dim: usize, rng: &mut StdRng) -> ComplexMatrix {
    let g = ginibre(dim, 1, rng);
    let norm = g.frobenius_norm();
    g.scale_re(1.0 / norm)
}

pub fn random_pure_state(dim: usize, seed: u64) -> ComplexMatrix {
    random_pure_state_rng(dim, &mut StdRng::seed_from_u64(seed))
}

/// Random rank-`rank` density matrix: U diag(p) U^dag with p drawn from
/// normalized exponentials.
pub fn random_density_rng(dim: usize, rank: usize, rng: &mut StdRng) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(QxError::Parameter(format!(
            "rank must satisfy 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let mut probs: Vec<f64> = (0..rank)
        .map(|_| -f64::ln(rng.gen_range(f64::MIN_POSITIVE..1.0)))
        .collect();
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    let u = haar_unitary_rng(dim, rng);
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for (k, &p) in probs.iter().enumerate() {
        for i in 0..dim {
            let vi = u[(i, k)];
            for j in 0..dim {
                mat[(i, j)] += vi * u[(j, k)].conj() * p;
            }
        }
    }
    Ok(DensityMatrix::new_unchecked(mat))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_rng(dim, rank, &mut StdRng::seed_from_u64(seed))
}

/// Kraus operators of a random CPTP channel via Stinespring dilation:
/// a Haar unitary on the system-environment space with the environment
/// prepared in |0> and traced out.
pub fn random_kraus_ops_rng(
    dim: usize,
    n_ops: usize,
    rng: &mut StdRng,
) -> Result<Vec<ComplexMatrix>> {
    if dim == 0 || n_ops == 0 {
        return Err(QxError::Parameter(format!(
            "dimension and Kraus count must be positive, got dim {dim}, n_ops {n_ops}"
        )));
    }
    let w = haar_unitary_rng(dim * n_ops, rng);
    // System-environment index (a, j) -> a * n_ops + j; environment starts in |0>.
    Ok((0..n_ops)
        .map(|j| ComplexMatrix::from_fn(dim, dim, |a, b| w[(a * n_ops + j, b * n_ops)]))
        .collect())
}

pub fn random_kraus_ops(dim: usize, n_ops: usize, seed: u64) -> Result<Vec<ComplexMatrix>> {
    random_kraus_ops_rng(dim, n_ops, &mut StdRng::seed_from_u64(seed))
}
