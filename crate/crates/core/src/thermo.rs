//! Thermodynamic bookkeeping for thermal operations: Gibbs states, free
//! energy differences, the guessed state and guessed heat, the
//! exponential identity they satisfy, the second-law-like inequality,
//! and the exergy bound.

use crate::channels::{Channel, ThermalOperation};
use crate::entropy::{cross_entropy_with_eig, relative_entropy, von_neumann};
use crate::matcore::{eig_hermitian, tensor, ComplexMatrix, DensityMatrix};
use crate::otm::MeasuredEnsemble;
use crate::{QxError, Result, EPS_NUM, RANK_TOL};

/// Gibbs state e^{-beta h}/Z with its partition function.
pub fn gibbs(h: &ComplexMatrix, beta: f64) -> Result<(DensityMatrix, f64)> {
    if !(beta > 0.0) {
        return Err(QxError::Parameter(format!("beta must be positive, got {beta}")));
    }
    let eig = eig_hermitian(h)?;
    // Weights shifted by the ground energy to avoid overflow; Z is
    // reported in the original gauge.
    let e0 = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let dim = h.rows();
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for (k, &w) in weights.iter().enumerate() {
        let v = eig.vector(k);
        let p = w / z_shifted;
        for i in 0..dim {
            for j in 0..dim {
                mat[(i, j)] += v[(i, 0)] * v[(j, 0)].conj() * p;
            }
        }
    }
    Ok((DensityMatrix::new_unchecked(mat), z_shifted * (-beta * e0).exp()))
}

/// Two-endpoint protocol: system Hamiltonians at the start and end, bath
/// Hamiltonian, the total unitary over the interval, and the inverse
/// temperature shared by system and bath Gibbs states.
#[derive(Clone, Debug)]
pub struct ThermoSetup {
    pub h_s0: ComplexMatrix,
    pub h_s_tau: ComplexMatrix,
    pub h_b: ComplexMatrix,
    pub u_tau: ComplexMatrix,
    pub beta: f64,
}

impl ThermoSetup {
    pub fn new(
        h_s0: ComplexMatrix,
        h_s_tau: ComplexMatrix,
        h_b: ComplexMatrix,
        u_tau: ComplexMatrix,
        beta: f64,
    ) -> Result<Self> {
        let d_s = h_s0.rows();
        let d_b = h_b.rows();
        let d = d_s * d_b;
        if h_s_tau.rows() != d_s || h_s_tau.cols() != d_s || !h_s0.is_square() || !h_b.is_square()
        {
            return Err(QxError::Dimension("system/bath Hamiltonian shape mismatch".into()));
        }
        if u_tau.rows() != d || u_tau.cols() != d {
            return Err(QxError::Dimension(format!(
                "total unitary must act on dimension {d}, got {}x{}",
                u_tau.rows(),
                u_tau.cols()
            )));
        }
        for h in [&h_s0, &h_s_tau, &h_b] {
            let residual = h.hermiticity_residual();
            if residual > EPS_NUM * (1.0 + h.frobenius_norm()) {
                return Err(QxError::Hermiticity { residual });
            }
        }
        let residual = u_tau.unitarity_residual();
        if residual > EPS_NUM * d as f64 {
            return Err(QxError::Unitarity { residual });
        }
        if !(beta > 0.0) {
            return Err(QxError::Parameter(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { h_s0, h_s_tau, h_b, u_tau, beta })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.h_s0.rows(), self.h_b.rows())
    }

    /// Reduced system channel rho -> Tr_b[U (rho (x) rho_b^eq) U^dag].
    pub fn channel(&self) -> Result<ThermalOperation> {
        let (rho_b, _) = gibbs(&self.h_b, self.beta)?;
        ThermalOperation::new(self.u_tau.clone(), rho_b, self.dims())
    }
}

/// Delta F = -beta^{-1} ln(Z_tau / Z_0) between the endpoint system
/// Gibbs states.
pub fn free_energy_difference(setup: &ThermoSetup) -> Result<f64> {
    let (_, z0) = gibbs(&setup.h_s0, setup.beta)?;
    let (_, z_tau) = gibbs(&setup.h_s_tau, setup.beta)?;
    Ok(-(z_tau / z0).ln() / setup.beta)
}

#[derive(Clone, Debug)]
pub struct SynthesizedHamiltonian {
    pub h: ComplexMatrix,
    /// True when the state's spectrum had to be floored at rank_tol.
    pub rank_deficient: bool,
}

/// Hamiltonian whose Gibbs state at `beta` reproduces `rho_out`:
/// H = -beta^{-1} ln rho_out on its support, with eigenvalues below the
/// rank tolerance floored (and flagged) so H stays finite.
pub fn synthesize_final_hamiltonian(
    rho_out: &DensityMatrix,
    beta: f64,
) -> Result<SynthesizedHamiltonian> {
    if !(beta > 0.0) {
        return Err(QxError::Parameter(format!("beta must be positive, got {beta}")));
    }
    let eig = rho_out.eig();
    let floor = RANK_TOL * eig.values[0].max(0.0);
    let rank_deficient = eig.values.iter().any(|&v| v <= floor);
    let h = eig.apply_fn(|v| num_complex::Complex64::new(-v.max(floor).ln() / beta, 0.0));
    Ok(SynthesizedHamiltonian { h, rank_deficient })
}

/// Guessed state on system (x) bath, its normalizer, and the guessed heat.
#[derive(Clone, Debug)]
pub struct GuessedObjects {
    pub theta_sb: DensityMatrix,
    /// <Q~>_b = Tr[H_b rho_b^eq] - Tr[H_b Theta_b].
    pub q_guess: f64,
    /// Z~ = Sum_i e^{-beta Tr[Phi(|E_i><E_i|) H_s(tau)]}.
    pub z_tilde: f64,
    /// Guessed final energies c_i = Tr[Phi(|E_i><E_i|) H_s(tau)] in the
    /// order of the initial eigenbasis.
    pub guessed_energies: Vec<f64>,
    /// Initial eigenenergies E_i in the same order.
    pub initial_energies: Vec<f64>,
}

pub fn guessed_objects(setup: &ThermoSetup, rho_b_eq: &DensityMatrix) -> Result<GuessedObjects> {
    let (d_s, d_b) = setup.dims();
    if rho_b_eq.dim() != d_b {
        return Err(QxError::Dimension(format!(
            "bath state must have dimension {d_b}, got {}",
            rho_b_eq.dim()
        )));
    }
    let channel = ThermalOperation::new(setup.u_tau.clone(), rho_b_eq.clone(), (d_s, d_b))?;
    let eig_s0 = eig_hermitian(&setup.h_s0)?;

    let mut weights = Vec::with_capacity(d_s);
    let mut joints = Vec::with_capacity(d_s);
    let mut guessed_energies = Vec::with_capacity(d_s);
    for i in 0..d_s {
        let proj = DensityMatrix::pure(&eig_s0.vector(i))?;
        let reduced = channel.apply_raw(proj.matrix())?;
        let c_i = (&reduced * &setup.h_s_tau).trace().re;
        guessed_energies.push(c_i);
        weights.push(c_i);
        joints.push(channel.joint_output(proj.matrix())?);
    }
    // Shift before exponentiating so large spectra do not overflow; the
    // reported normalizer keeps the original gauge.
    let cmin = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = weights.iter().map(|&c| (-setup.beta * (c - cmin)).exp()).collect();
    let z_shifted: f64 = shifted.iter().sum();
    let z_tilde = z_shifted * (-setup.beta * cmin).exp();

    let d = d_s * d_b;
    let mut theta = ComplexMatrix::zeros(d, d);
    for (w, joint) in shifted.iter().zip(&joints) {
        theta = &theta + &joint.scale_re(w / z_shifted);
    }
    let theta_sb = DensityMatrix::new_unchecked(theta);

    let h_b_total = tensor(&ComplexMatrix::identity(d_s), &setup.h_b);
    let q_guess = (rho_b_eq.matrix() * &setup.h_b).trace().re
        - (theta_sb.matrix() * &h_b_total).trace().re;

    Ok(GuessedObjects {
        theta_sb,
        q_guess,
        z_tilde,
        guessed_energies,
        initial_energies: eig_s0.values.clone(),
    })
}

/// Exponential guessed-heat identity and its companions.
#[derive(Clone, Debug)]
pub struct GuessedHeatReport {
    /// <e^{-beta dE~}> over the initial Gibbs weights.
    pub lhs: f64,
    /// e^{-beta dF} e^{-beta <Q~>_b} e^{-S(Theta || rho_s^eq(tau) (x) rho_b^eq)}.
    pub rhs_product: f64,
    pub identity_residual: f64,
    pub q_guess: f64,
    pub delta_f: f64,
    pub relative_entropy_term: f64,
    pub delta_s: f64,
    pub second_law_ok: bool,
    /// dE_s - beta^{-1} dS, the exergy change with no work reservoir.
    pub exergy: f64,
    /// dE_s + beta^{-1} ln Sum_i e^{-C(Phi(|E_i><E_i|), rho_out)}.
    pub exergy_ub: f64,
    pub exergy_ok: bool,
    /// Gibbs mismatch of rho_out against the final Hamiltonian.
    pub precondition_residual: f64,
}

/// Evaluates the identity in the regime it is claimed: the input is the
/// Gibbs state of `h_s0` and the channel output is the Gibbs state of
/// `h_s_tau` (residual above 1e-6 is refused rather than extrapolated).
pub fn guessed_heat_identity_report(setup: &ThermoSetup) -> Result<GuessedHeatReport> {
    let beta = setup.beta;
    let (rho_in, z0) = gibbs(&setup.h_s0, beta)?;
    let (rho_b_eq, _) = gibbs(&setup.h_b, beta)?;
    let channel = ThermalOperation::new(setup.u_tau.clone(), rho_b_eq.clone(), setup.dims())?;
    let rho_out = channel.apply(&rho_in)?;
    let (gibbs_tau, _) = gibbs(&setup.h_s_tau, beta)?;
    let precondition_residual = rho_out.matrix().max_abs_diff(gibbs_tau.matrix());
    if precondition_residual > 1e-6 {
        return Err(QxError::SpecialCase(format!(
            "channel output deviates from the final Gibbs state by {precondition_residual:.3e}; \
             the identity is not claimed in this regime"
        )));
    }

    let guessed = guessed_objects(setup, &rho_b_eq)?;
    let delta_f = free_energy_difference(setup)?;

    // lhs = Sum_i (e^{-beta E_i} / Z_0) e^{-beta (c_i - E_i)} = Z~ / Z_0.
    let mut lhs = 0.0;
    for &c_i in &guessed.guessed_energies {
        lhs += (-beta * c_i).exp() / z0;
    }

    let reference = DensityMatrix::new_unchecked(tensor(gibbs_tau.matrix(), rho_b_eq.matrix()));
    let rel = relative_entropy(&guessed.theta_sb, &reference)?;
    if !rel.finite {
        return Err(QxError::Invariant(
            "guessed state leaked outside the reference Gibbs support".into(),
        ));
    }
    let rhs_product =
        (-beta * delta_f).exp() * (-beta * guessed.q_guess).exp() * (-rel.value).exp();

    let delta_s = von_neumann(&rho_out) - von_neumann(&rho_in);
    let second_law_ok = delta_s - beta * guessed.q_guess >= -1e-9;

    let delta_e_s = (rho_out.matrix() * &setup.h_s_tau).trace().re
        - (rho_in.matrix() * &setup.h_s0).trace().re;
    let eig_out = rho_out.eig();
    let ens = MeasuredEnsemble::spectral(&rho_in);
    let mut exp_sum = 0.0;
    for (_, ket) in ens.items() {
        let member = channel.apply_raw(&(ket * &ket.conjugate_transpose()))?;
        let c = cross_entropy_with_eig(&member, &eig_out);
        if !c.finite {
            return Err(QxError::Invariant(
                "channel member leaked outside the output support".into(),
            ));
        }
        exp_sum += (-c.value).exp();
    }
    let exergy = delta_e_s - delta_s / beta;
    let exergy_ub = delta_e_s + exp_sum.ln() / beta;
    let exergy_ok = exergy <= exergy_ub + 1e-9;

    Ok(GuessedHeatReport {
        lhs,
        rhs_product,
        identity_residual: (lhs - rhs_product).abs(),
        q_guess: guessed.q_guess,
        delta_f,
        relative_entropy_term: rel.value,
        delta_s,
        second_law_ok,
        exergy,
        exergy_ub,
        exergy_ok,
        precondition_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random::{haar_unitary_rng, random_hermitian_rng};
    use crate::otm::sigma_distribution;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn gibbs_cases() {
        let (rho, z) = gibbs(&ComplexMatrix::zeros(3, 3), 1.0).unwrap();
        assert!(rho.matrix().max_abs_diff(DensityMatrix::maximally_mixed(3).matrix()) < 1e-14);
        assert!((z - 3.0).abs() < 1e-14);

        // Qubit diag(w/2, -w/2): populations e^{-+ beta w / 2} / Z.
        let (w, beta) = (1.3, 0.8);
        let (rho, z) = gibbs(&ComplexMatrix::diag(&[w / 2.0, -w / 2.0]), beta).unwrap();
        let z_expect = (-beta * w / 2.0).exp() + (beta * w / 2.0).exp();
        assert!((z - z_expect).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - (-beta * w / 2.0).exp() / z_expect).abs() < 1e-14);

        // Large beta on a nondegenerate spectrum: ground-state projector.
        let h = crate::matcore::random::random_hermitian(3, 5);
        let (rho, _) = gibbs(&h, 200.0).unwrap();
        let eig = eig_hermitian(&h).unwrap();
        let ground = eig.vector(2);
        let proj = &ground * &ground.conjugate_transpose();
        assert!(rho.matrix().max_abs_diff(&proj) < 1e-9);
    }

    #[test]
    fn free_energy_cases() {
        let h = ComplexMatrix::diag(&[0.5, -0.5]);
        let u = ComplexMatrix::identity(4);
        let h_b = ComplexMatrix::diag(&[0.0, 1.0]);
        let setup = ThermoSetup::new(h.clone(), h.clone(), h_b.clone(), u.clone(), 1.0).unwrap();
        assert!(free_energy_difference(&setup).unwrap().abs() < 1e-14);

        // Constant shift c moves Delta F by exactly c.
        let shifted = &h + &ComplexMatrix::identity(2).scale_re(0.7);
        let setup = ThermoSetup::new(h.clone(), shifted, h_b.clone(), u.clone(), 1.0).unwrap();
        assert!((free_energy_difference(&setup).unwrap() - 0.7).abs() < 1e-12);

        // Gap change 1 -> 2 at beta = 1 against the scalar partition sum.
        let h2 = ComplexMatrix::diag(&[1.0, -1.0]);
        let setup = ThermoSetup::new(h, h2, h_b, u, 1.0).unwrap();
        let z1 = (0.5f64).exp() + (-0.5f64).exp();
        let z2 = 1f64.exp() + (-1f64).exp();
        assert!((free_energy_difference(&setup).unwrap() + (z2 / z1).ln()).abs() < 1e-12);
    }

    #[test]
    fn synthesize_round_trips() {
        let rho = DensityMatrix::maximally_mixed(3);
        let syn = synthesize_final_hamiltonian(&rho, 2.0).unwrap();
        assert!(!syn.rank_deficient);
        let (back, _) = gibbs(&syn.h, 2.0).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);

        let rho = DensityMatrix::from_probabilities(&[0.7, 0.3]).unwrap();
        let syn = synthesize_final_hamiltonian(&rho, 1.0).unwrap();
        assert!((syn.h[(0, 0)].re - (-(0.7f64).ln())).abs() < 1e-12);
        assert!((syn.h[(1, 1)].re - (-(0.3f64).ln())).abs() < 1e-12);

        let rho = crate::matcore::random::random_density(4, 4, 9).unwrap();
        let syn = synthesize_final_hamiltonian(&rho, 1.7).unwrap();
        let (back, _) = gibbs(&syn.h, 1.7).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-9);

        let rank_def = crate::matcore::random::random_density(4, 2, 10).unwrap();
        assert!(synthesize_final_hamiltonian(&rank_def, 1.0).unwrap().rank_deficient);
    }

    fn random_setup(seed: u64, synthesize: bool) -> ThermoSetup {
        let mut rng = StdRng::seed_from_u64(seed);
        let h_s0 = random_hermitian_rng(2, &mut rng);
        let h_b = random_hermitian_rng(2, &mut rng);
        let u = haar_unitary_rng(4, &mut rng);
        let beta = 1.0;
        let h_s_tau = if synthesize {
            let (rho_b, _) = gibbs(&h_b, beta).unwrap();
            let channel = ThermalOperation::new(u.clone(), rho_b, (2, 2)).unwrap();
            let (rho_in, _) = gibbs(&h_s0, beta).unwrap();
            let rho_out = channel.apply(&rho_in).unwrap();
            synthesize_final_hamiltonian(&rho_out, beta).unwrap().h
        } else {
            h_s0.clone()
        };
        ThermoSetup::new(h_s0, h_s_tau, h_b, u, beta).unwrap()
    }

    #[test]
    fn guessed_objects_factorized_cases() {
        // Decoupled evolution U_s (x) I with H_s(tau) = U_s H_s0 U_s^dag:
        // Theta = rho_s^eq(tau) (x) rho_b^eq and zero guessed heat.
        let mut rng = StdRng::seed_from_u64(11);
        let h_s0 = random_hermitian_rng(2, &mut rng);
        let h_b = random_hermitian_rng(2, &mut rng);
        let u_s = haar_unitary_rng(2, &mut rng);
        let h_s_tau = h_s0.conjugate_by(&u_s).unwrap();
        let u = tensor(&u_s, &ComplexMatrix::identity(2));
        let setup = ThermoSetup::new(h_s0, h_s_tau.clone(), h_b.clone(), u, 1.0).unwrap();
        let (rho_b, _) = gibbs(&h_b, 1.0).unwrap();
        let guessed = guessed_objects(&setup, &rho_b).unwrap();
        let (rho_tau, _) = gibbs(&h_s_tau, 1.0).unwrap();
        let expect = tensor(rho_tau.matrix(), rho_b.matrix());
        assert!(guessed.theta_sb.matrix().max_abs_diff(&expect) < 1e-10);
        assert!(guessed.q_guess.abs() < 1e-10);

        // Identity evolution with unchanged Hamiltonian.
        let setup = random_setup(12, false);
        let id_setup = ThermoSetup::new(
            setup.h_s0.clone(),
            setup.h_s0.clone(),
            setup.h_b.clone(),
            ComplexMatrix::identity(4),
            1.0,
        )
        .unwrap();
        let (rho_b, _) = gibbs(&id_setup.h_b, 1.0).unwrap();
        let guessed = guessed_objects(&id_setup, &rho_b).unwrap();
        let (rho_0, _) = gibbs(&id_setup.h_s0, 1.0).unwrap();
        let expect = tensor(rho_0.matrix(), rho_b.matrix());
        assert!(guessed.theta_sb.matrix().max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn guessed_state_is_valid_under_random_coupling() {
        for seed in 0..10u64 {
            let setup = random_setup(seed, true);
            let (rho_b, _) = gibbs(&setup.h_b, setup.beta).unwrap();
            let guessed = guessed_objects(&setup, &rho_b).unwrap();
            assert!(DensityMatrix::new(guessed.theta_sb.matrix().clone()).is_ok());
            assert!(guessed.z_tilde > 0.0);
        }
    }

    #[test]
    fn identity_trivial_factorized_case() {
        let setup = random_setup(21, false);
        let id_setup = ThermoSetup::new(
            setup.h_s0.clone(),
            setup.h_s0.clone(),
            setup.h_b.clone(),
            ComplexMatrix::identity(4),
            1.0,
        )
        .unwrap();
        let rep = guessed_heat_identity_report(&id_setup).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12);
        assert!((rep.rhs_product - 1.0).abs() < 1e-10);
        assert!(rep.q_guess.abs() < 1e-12);
        assert!(rep.relative_entropy_term.abs() < 1e-10);
        assert!(rep.second_law_ok && rep.exergy_ok);
    }

    #[test]
    fn identity_holds_on_random_instances() {
        for seed in 0..20u64 {
            let setup = random_setup(seed + 100, true);
            let rep = guessed_heat_identity_report(&setup).unwrap();
            assert!(
                rep.identity_residual <= 1e-8,
                "seed {seed}: residual {}",
                rep.identity_residual
            );
            assert!(rep.second_law_ok, "seed {seed}: dS {} q {}", rep.delta_s, rep.q_guess);
            assert!(rep.exergy_ok, "seed {seed}");
        }
    }

    #[test]
    fn precondition_violation_is_refused() {
        // Coupled unitary with the final Hamiltonian equal to the initial
        // one: the output is generically not Gibbs of h_s_tau.
        let setup = random_setup(33, false);
        match guessed_heat_identity_report(&setup) {
            Err(QxError::SpecialCase(_)) => {}
            other => panic!("expected SpecialCase refusal, got {other:?}"),
        }
    }

    #[test]
    fn sigma_atoms_match_energy_statistics() {
        // When both endpoints are Gibbs states, each sigma atom equals
        // beta (c_i - E_i - dF) in the initial eigenbasis.
        for seed in 0..5u64 {
            let setup = random_setup(seed + 300, true);
            let beta = setup.beta;
            let (rho_b, _) = gibbs(&setup.h_b, beta).unwrap();
            let channel =
                ThermalOperation::new(setup.u_tau.clone(), rho_b.clone(), (2, 2)).unwrap();
            let (rho_in, _) = gibbs(&setup.h_s0, beta).unwrap();
            let eig0 = eig_hermitian(&setup.h_s0).unwrap();
            let ens = crate::otm::prepare_input(&rho_in, &eig0).unwrap();
            let sigma = sigma_distribution(&ens, &channel).unwrap();
            let delta_f = free_energy_difference(&setup).unwrap();

            for (k, (_, ket)) in ens.items().iter().enumerate() {
                let reduced = channel
                    .apply_raw(&(ket * &ket.conjugate_transpose()))
                    .unwrap();
                let c_i = (&reduced * &setup.h_s_tau).trace().re;
                let e_i = setup.h_s0.sandwich(ket, ket).re;
                let expect = beta * (c_i - e_i - delta_f);
                let got = sigma.atoms[k].1;
                assert!(
                    (got - expect).abs() < 1e-9,
                    "seed {seed} atom {k}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn setup_validation() {
        let h = ComplexMatrix::diag(&[1.0, -1.0]);
        let h_b = ComplexMatrix::diag(&[0.0, 1.0]);
        let not_unitary = ComplexMatrix::identity(4).scale_re(2.0);
        assert!(ThermoSetup::new(h.clone(), h.clone(), h_b.clone(), not_unitary, 1.0).is_err());
        let mut non_herm = ComplexMatrix::zeros(2, 2);
        non_herm[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(ThermoSetup::new(
            non_herm,
            h.clone(),
            h_b,
            ComplexMatrix::identity(4),
            1.0
        )
        .is_err());
        assert!(gibbs(&h, 0.0).is_err());
    }
}
