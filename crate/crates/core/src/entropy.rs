//! Entropy and information functionals: von Neumann entropy, quantum cross
//! entropy with support semantics, relative entropy, Holevo information,
//! standard and generalized fidelity, and the sandwiched min relative
//! entropy. All logarithms are natural (nats); 0 ln 0 = 0.

use num_complex::Complex64;

use crate::matcore::{eig_hermitian, ComplexMatrix, DensityMatrix, EigenSystem};
use crate::{QxError, Result, EPS_NUM, RANK_TOL, SUPPORT_TOL};

/// A possibly infinite entropy value in nats.
///
/// `finite == false` encodes +infinity (a support violation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub finite: bool,
}

impl EntropyValue {
    pub fn finite(value: f64) -> Self {
        Self { value, finite: true }
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, finite: false }
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 { x * x.ln() } else { 0.0 }
}

/// S(rho) = -Tr[rho ln rho].
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eig().values)
}

/// Shannon entropy of a (sub)spectrum, clamping small negatives to zero.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    -values.iter().map(|&x| xlnx(x.max(0.0))).sum::<f64>()
}

/// Cross entropy evaluated against a precomputed eigensystem of the second
/// argument. Mass on the null space below `SUPPORT_TOL` is discarded.
pub fn cross_entropy_with_eig(rho1: &ComplexMatrix, eig2: &EigenSystem) -> EntropyValue {
    let lmax = eig2.values.first().copied().unwrap_or(0.0).max(0.0);
    let thr = RANK_TOL * lmax;
    let mut value = 0.0;
    let mut leaked = 0.0;
    for (k, &lambda) in eig2.values.iter().enumerate() {
        let v = eig2.vector(k);
        let overlap = rho1.sandwich(&v, &v).re;
        if lambda > thr {
            value -= overlap * lambda.ln();
        } else {
            leaked += overlap.max(0.0);
        }
    }
    if leaked > SUPPORT_TOL {
        EntropyValue::infinite()
    } else {
        EntropyValue::finite(value)
    }
}

/// C(rho1, rho2) = -Tr[rho1 ln rho2]; +infinity when rho1 leaks outside the
/// support of rho2.
pub fn cross_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<EntropyValue> {
    if rho1.dim() != rho2.dim() {
        return Err(QxError::Dimension(format!(
            "cross entropy needs equal dimensions, got {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    Ok(cross_entropy_with_eig(rho1.matrix(), &rho2.eig()))
}

/// S(rho1 || rho2) = -S(rho1) + C(rho1, rho2).
pub fn relative_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<EntropyValue> {
    let cross = cross_entropy(rho1, rho2)?;
    if !cross.finite {
        return Ok(EntropyValue::infinite());
    }
    Ok(EntropyValue::finite(cross.value - von_neumann(rho1)))
}

/// Ensemble of density matrices with strictly positive weights.
#[derive(Clone, Debug)]
pub struct StateEnsemble {
    items: Vec<(f64, DensityMatrix)>,
}

impl StateEnsemble {
    pub fn new(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let dim = match items.first() {
            Some((_, rho)) => rho.dim(),
            None => return Err(QxError::Parameter("ensemble must be nonempty".into())),
        };
        if items.iter().any(|(_, rho)| rho.dim() != dim) {
            return Err(QxError::Dimension("ensemble members must share one dimension".into()));
        }
        if items.iter().any(|&(p, _)| p <= 0.0) {
            return Err(QxError::Parameter("ensemble weights must be positive".into()));
        }
        let total: f64 = items.iter().map(|&(p, _)| p).sum();
        if (total - 1.0).abs() > EPS_NUM * items.len() as f64 {
            return Err(QxError::Parameter(format!(
                "ensemble weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(f64, DensityMatrix)] {
        &self.items
    }

    pub fn average(&self) -> DensityMatrix {
        let d = self.items[0].1.dim();
        let mut avg = ComplexMatrix::zeros(d, d);
        for (p, rho) in &self.items {
            avg = &avg + &rho.matrix().scale_re(*p);
        }
        DensityMatrix::new_unchecked(avg)
    }
}

/// Holevo information chi = S(average) - average(S).
pub fn holevo(ensemble: &StateEnsemble) -> f64 {
    let avg = von_neumann(&ensemble.average());
    let members: f64 = ensemble.items().iter().map(|(p, rho)| p * von_neumann(rho)).sum();
    avg - members
}

fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(m)?.apply_fn(|x| Complex64::new(x.max(0.0).sqrt(), 0.0)))
}

fn fidelity_raw(m1: &ComplexMatrix, m2: &ComplexMatrix) -> Result<f64> {
    let s1 = psd_sqrt(m1)?;
    let inner = &(&s1 * m2) * &s1;
    let eig = eig_hermitian(&inner)?;
    let tr: f64 = eig.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}

/// Standard Uhlmann fidelity F = (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(QxError::Dimension("fidelity needs equal dimensions".into()));
    }
    fidelity_raw(rho1.matrix(), rho2.matrix())
}

/// Generalized fidelity of sub-normalized states:
/// (sqrt(F) + sqrt((1 - Tr s1)(1 - Tr s2)))^2.
pub fn generalized_fidelity(s1: &ComplexMatrix, s2: &ComplexMatrix) -> Result<f64> {
    for (name, s) in [("first", s1), ("second", s2)] {
        if !s.is_square() {
            return Err(QxError::Dimension(format!("{name} argument must be square")));
        }
        let tr = s.trace().re;
        if !(-EPS_NUM..=1.0 + EPS_NUM).contains(&tr) {
            return Err(QxError::Parameter(format!(
                "{name} argument must be sub-normalized, trace is {tr}"
            )));
        }
    }
    if s1.rows() != s2.rows() {
        return Err(QxError::Dimension("generalized fidelity needs equal dimensions".into()));
    }
    let f = fidelity_raw(s1, s2)?;
    let t1 = (1.0 - s1.trace().re).max(0.0);
    let t2 = (1.0 - s2.trace().re).max(0.0);
    let root = f.max(0.0).sqrt() + (t1 * t2).sqrt();
    Ok(root * root)
}

/// Sandwiched min relative entropy S_min(rho1 || rho2) = -ln F[rho1, rho2].
pub fn min_relative_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho1, rho2)?;
    Ok((-f.min(1.0).ln()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{Channel, KrausChannel};
    use crate::matcore::random::{
        haar_unitary, random_density, random_density_rng, random_pure_state,
    };
    use crate::matcore::DensityMatrix;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn von_neumann_basics() {
        let pure = DensityMatrix::pure(&random_pure_state(4, 1)).unwrap();
        assert!(von_neumann(&pure).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(5);
        assert!((von_neumann(&mixed) - 5f64.ln()).abs() < 1e-12);

        let rho = DensityMatrix::from_probabilities(&[0.75, 0.25]).unwrap();
        let expect = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((von_neumann(&rho) - expect).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_of_state_with_itself_is_entropy() {
        let rho = random_density(4, 3, 2).unwrap();
        let c = cross_entropy(&rho, &rho).unwrap();
        assert!(c.finite);
        assert!((c.value - von_neumann(&rho)).abs() < 1e-10);
    }

    #[test]
    fn cross_entropy_support_violation_is_infinite() {
        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let one = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 1)).unwrap();
        assert!(!cross_entropy(&zero, &one).unwrap().finite);
    }

    #[test]
    fn cross_entropy_diagonal_oracle() {
        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let diag = DensityMatrix::from_probabilities(&[0.75, 0.25]).unwrap();
        let c = cross_entropy(&zero, &diag).unwrap();
        assert!(c.finite);
        assert!((c.value + 0.75f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = random_density(3, 3, 4).unwrap();
        let s = relative_entropy(&rho, &rho).unwrap();
        assert!(s.finite && s.value.abs() < 1e-10);

        let half = DensityMatrix::maximally_mixed(2);
        let diag = DensityMatrix::from_probabilities(&[0.75, 0.25]).unwrap();
        let s = relative_entropy(&half, &diag).unwrap();
        let expect = -2f64.ln() - 0.5 * (0.75f64.ln() + 0.25f64.ln());
        assert!((s.value - expect).abs() < 1e-12);

        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let one = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 1)).unwrap();
        assert!(!relative_entropy(&zero, &one).unwrap().finite);
    }

    #[test]
    fn holevo_cases() {
        // Pure-state ensemble: chi = S(average).
        let kets = haar_unitary(3, 5);
        let items: Vec<(f64, DensityMatrix)> = (0..3)
            .map(|k| (1.0 / 3.0, DensityMatrix::pure(&kets.column(k)).unwrap()))
            .collect();
        let ens = StateEnsemble::new(items).unwrap();
        assert!((holevo(&ens) - von_neumann(&ens.average())).abs() < 1e-10);

        let rho = random_density(3, 2, 6).unwrap();
        let single = StateEnsemble::new(vec![(1.0, rho.clone())]).unwrap();
        assert!(holevo(&single).abs() < 1e-12);

        let twin = StateEnsemble::new(vec![
            (0.5, DensityMatrix::maximally_mixed(2)),
            (0.5, DensityMatrix::maximally_mixed(2)),
        ])
        .unwrap();
        assert!(holevo(&twin).abs() < 1e-12);
    }

    #[test]
    fn fidelity_cases() {
        let rho = random_density(3, 3, 7).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);

        // Pure-state reduction: F = |<0|psi>|^2.
        let psi = random_pure_state(2, 8);
        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let pure = DensityMatrix::pure(&psi).unwrap();
        let overlap = psi[(0, 0)].norm_sqr();
        assert!((fidelity(&zero, &pure).unwrap() - overlap).abs() < 1e-12);
    }

    #[test]
    fn generalized_fidelity_scalar_oracle() {
        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let s1 = zero.matrix().scale_re(0.6);
        let s2 = zero.matrix().scale_re(0.5);
        // sqrt(F) = sqrt(0.3); remainder term sqrt(0.4 * 0.5).
        let expect = (0.3f64.sqrt() + (0.4f64 * 0.5).sqrt()).powi(2);
        assert!((generalized_fidelity(&s1, &s2).unwrap() - expect).abs() < 1e-12);

        let over = zero.matrix().scale_re(1.5);
        assert!(matches!(
            generalized_fidelity(&over, &s2),
            Err(QxError::Parameter(_))
        ));
    }

    #[test]
    fn min_relative_entropy_cases() {
        let rho = random_density(3, 3, 9).unwrap();
        assert!(min_relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);

        let zero = DensityMatrix::pure(&ComplexMatrix::basis_ket(2, 0)).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!((min_relative_entropy(&zero, &half).unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn min_relative_entropy_below_relative_entropy() {
        // S_min <= S on seeded full-rank pairs.
        for seed in 0..50u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let r1 = random_density_rng(3, 3, &mut rng).unwrap();
            let r2 = random_density_rng(3, 3, &mut rng).unwrap();
            let smin = min_relative_entropy(&r1, &r2).unwrap();
            let s = relative_entropy(&r1, &r2).unwrap();
            assert!(s.finite);
            assert!(smin <= s.value + 1e-9, "seed {seed}: {smin} > {}", s.value);
        }
    }

    #[test]
    fn cross_entropy_linear_in_first_argument() {
        let r1 = random_density(3, 3, 10).unwrap();
        let r2 = random_density(3, 2, 11).unwrap();
        let tau = random_density(3, 3, 12).unwrap();
        let p = 0.3;
        let mix = DensityMatrix::new_unchecked(
            &r1.matrix().scale_re(p) + &r2.matrix().scale_re(1.0 - p),
        );
        let lhs = cross_entropy(&mix, &tau).unwrap().value;
        let rhs = p * cross_entropy(&r1, &tau).unwrap().value
            + (1.0 - p) * cross_entropy(&r2, &tau).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_overlap_bound_and_unitary_invariance() {
        for seed in 0..20u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let r1 = random_density_rng(4, 4, &mut rng).unwrap();
            let r2 = random_density_rng(4, 4, &mut rng).unwrap();
            let c = cross_entropy(&r1, &r2).unwrap();
            assert!(c.finite);
            let overlap = (r1.matrix() * r2.matrix()).trace().re;
            assert!(c.value >= -overlap.ln() - 1e-9);

            let u = crate::matcore::random::haar_unitary_rng(4, &mut rng);
            let r1u = DensityMatrix::new_unchecked(r1.matrix().conjugate_by(&u).unwrap());
            let r2u = DensityMatrix::new_unchecked(r2.matrix().conjugate_by(&u).unwrap());
            let cu = cross_entropy(&r1u, &r2u).unwrap();
            assert!((c.value - cu.value).abs() < 1e-9);
            assert!((von_neumann(&r1) - von_neumann(&r1u)).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_fidelity_chain_on_random_reduced_states() {
        // S(eta) <= ln(d * F[eta, I/d]) on random states.
        for seed in 0..20u64 {
            let eta = random_density(2, 2, 100 + seed).unwrap();
            let s = von_neumann(&eta);
            let f = fidelity(&eta, &DensityMatrix::maximally_mixed(2)).unwrap();
            assert!(s <= (2.0 * f).ln() + 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn support_tolerance_forgives_numerical_rank_loss() {
        // A channel output that is rank deficient only up to noise should
        // still give a finite cross entropy for states inside its support.
        let mut rng = StdRng::seed_from_u64(3);
        let ch = KrausChannel::random(4, 2, &mut rng).unwrap();
        let rho_in = random_density_rng(4, 2, &mut rng).unwrap();
        let out = ch.apply(&rho_in).unwrap();
        let member = ch
            .apply(&DensityMatrix::pure(&rho_in.eig().vector(0)).unwrap())
            .unwrap();
        let c = cross_entropy(&member, &out).unwrap();
        assert!(c.finite);
    }
}
