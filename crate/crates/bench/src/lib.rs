//! Shared fixtures for the benchmarks: seeded instances so runs are
//! comparable across machines and commits.

use num_complex::Complex64;
use qxent_core::channels::KrausChannel;
use qxent_core::matcore::random::{haar_unitary_rng, random_density_rng, random_hermitian_rng};
use qxent_core::matcore::ComplexMatrix;
use qxent_core::otm::MeasuredEnsemble;
use qxent_core::spinboson::{BathMode, SpinBosonParams};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = StdRng::seed_from_u64(seed);
    random_hermitian_rng(dim, &mut rng)
}

pub fn jarzynski_instance(dim: usize, seed: u64) -> (MeasuredEnsemble, KrausChannel) {
    let mut rng = StdRng::seed_from_u64(seed);
    let rho = random_density_rng(dim, dim, &mut rng).unwrap();
    let ens = MeasuredEnsemble::spectral(&rho);
    let phi = KrausChannel::random(dim, dim, &mut rng).unwrap();
    (ens, phi)
}

pub fn qae_ensemble(seed: u64) -> MeasuredEnsemble {
    let mut rng = StdRng::seed_from_u64(seed);
    let basis = haar_unitary_rng(4, &mut rng);
    MeasuredEnsemble::new(4, vec![(0.6, basis.column(0)), (0.4, basis.column(1))]).unwrap()
}

pub fn dephasing_params(cutoff: usize) -> SpinBosonParams {
    SpinBosonParams::new(
        1.0,
        vec![BathMode { omega: 1.0, g: Complex64::new(0.5, 0.0) }],
        1.0,
        std::f64::consts::PI,
        cutoff,
    )
    .unwrap()
}
