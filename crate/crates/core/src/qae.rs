//! Quantum autoencoder: compressed states, the specialized lower bound,
//! entropic-disturbance bounds, the global cost function with its bound
//! chain, and a derivative-free variational trainer.

use num_complex::Complex64;

use crate::channels::{Channel, QaeSpec};
use crate::entropy::{cross_entropy_with_eig, fidelity, von_neumann};
use crate::matcore::{partial_trace, tensor, ComplexMatrix, DensityMatrix, Keep};
use crate::otm::MeasuredEnsemble;
use crate::{QxError, Result};

/// Layered hardware-style circuit on a qubit register: per-qubit Y and Z
/// rotations followed by a fixed cyclic CNOT entangler, repeated
/// `layers` times. Latent (A) and fresh (B) dimensions must be powers of
/// two so the register splits on a qubit boundary.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub d_a: usize,
    pub d_b: usize,
    pub layers: usize,
    n_qubits: usize,
}

fn qubit_count(dim: usize) -> Option<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return None;
    }
    Some(dim.trailing_zeros() as usize)
}

impl Ansatz {
    pub fn new(d_a: usize, d_b: usize, layers: usize) -> Result<Self> {
        let (na, nb) = match (qubit_count(d_a), qubit_count(d_b)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(QxError::Parameter(format!(
                    "register dimensions must be powers of two >= 2, got ({d_a},{d_b})"
                )))
            }
        };
        if layers == 0 {
            return Err(QxError::Parameter("ansatz needs at least one layer".into()));
        }
        Ok(Self { d_a, d_b, layers, n_qubits: na + nb })
    }

    pub fn total_dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn param_count(&self) -> usize {
        self.layers * self.n_qubits * 2
    }

    /// Assembles the circuit unitary for the given angles.
    pub fn build(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        if theta.len() != self.param_count() {
            return Err(QxError::Parameter(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                theta.len()
            )));
        }
        let n = self.n_qubits;
        let mut u = ComplexMatrix::identity(self.total_dim());
        let mut idx = 0;
        for _layer in 0..self.layers {
            for q in 0..n {
                u = &embed_single_qubit(&rotation_y(theta[idx]), q, n) * &u;
                u = &embed_single_qubit(&rotation_z(theta[idx + 1]), q, n) * &u;
                idx += 2;
            }
            if n > 1 {
                for q in 0..n {
                    u = &cnot(q, (q + 1) % n, n) * &u;
                }
            }
        }
        Ok(u)
    }
}

fn rotation_y(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
    .unwrap()
}

fn rotation_z(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            (-Complex64::i() * (theta / 2.0)).exp(),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            (Complex64::i() * (theta / 2.0)).exp(),
        ],
    )
    .unwrap()
}

/// Gate on qubit `q` of `n`, qubit 0 most significant.
fn embed_single_qubit(gate: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    let left = ComplexMatrix::identity(1 << q);
    let right = ComplexMatrix::identity(1 << (n - q - 1));
    tensor(&tensor(&left, gate), &right)
}

fn cnot(control: usize, target: usize, n: usize) -> ComplexMatrix {
    let dim = 1 << n;
    let cbit = n - 1 - control;
    let tbit = n - 1 - target;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = if (col >> cbit) & 1 == 1 { col ^ (1 << tbit) } else { col };
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// rho_A = Tr_B[U rho_in U^dag] and the per-outcome compressed states
/// rho_A^(i) = Tr_B[U |p_i><p_i| U^dag].
pub fn compressed_states(
    u: &ComplexMatrix,
    ens: &MeasuredEnsemble,
    dims: (usize, usize),
) -> Result<(DensityMatrix, Vec<DensityMatrix>)> {
    let (d_a, d_b) = dims;
    let d = d_a * d_b;
    if ens.dim() != d || u.rows() != d || u.cols() != d {
        return Err(QxError::Dimension(format!(
            "compressed states need dimension {d}, got ensemble {} and unitary {}x{}",
            ens.dim(),
            u.rows(),
            u.cols()
        )));
    }
    let rho_a = DensityMatrix::new_unchecked(partial_trace(
        &ens.input_state().matrix().conjugate_by(u)?,
        dims,
        Keep::A,
    )?);
    let mut members = Vec::with_capacity(ens.rank());
    for (_, ket) in ens.items() {
        let pure = DensityMatrix::pure(ket)?;
        members.push(DensityMatrix::new_unchecked(partial_trace(
            &pure.matrix().conjugate_by(u)?,
            dims,
            Keep::A,
        )?));
    }
    Ok((rho_a, members))
}

/// Specialized lower bound: S(rho_B) - ln(Sum_i e^{-C(rho_A^(i), rho_A)}).
#[derive(Clone, Copy, Debug)]
pub struct QaeLotm {
    pub l_otm: f64,
    pub fresh_entropy: f64,
    /// -ln(Sum_i e^{-C(rho_A^(i), rho_A)}).
    pub latent_term: f64,
}

pub fn qae_l_otm(spec: &QaeSpec, ens: &MeasuredEnsemble) -> Result<QaeLotm> {
    let (rho_a, members) = compressed_states(&spec.u, ens, (spec.d_a, spec.d_b))?;
    let eig_a = rho_a.eig();
    let mut sum = 0.0;
    for m in &members {
        let c = cross_entropy_with_eig(m.matrix(), &eig_a);
        if !c.finite {
            return Err(QxError::Invariant(
                "compressed member state leaked outside the support of rho_A".into(),
            ));
        }
        sum += (-c.value).exp();
    }
    let latent_term = -sum.ln();
    let fresh_entropy = von_neumann(&spec.rho_b);
    Ok(QaeLotm { l_otm: fresh_entropy + latent_term, fresh_entropy, latent_term })
}

/// Global cost 1 - <psi| Tr_A[U rho_in U^dag] |psi> for a pure fresh
/// reference |psi> on the B register.
pub fn global_cost(
    u: &ComplexMatrix,
    psi: &ComplexMatrix,
    rho_in: &DensityMatrix,
    dims: (usize, usize),
) -> Result<f64> {
    let (d_a, d_b) = dims;
    let d = d_a * d_b;
    if rho_in.dim() != d || u.rows() != d || psi.rows() != d_b || psi.cols() != 1 {
        return Err(QxError::Dimension("global cost dimension mismatch".into()));
    }
    let eta_b = partial_trace(&rho_in.matrix().conjugate_by(u)?, dims, Keep::B)?;
    Ok(1.0 - eta_b.sandwich(psi, psi).re)
}

/// The full inequality chain between the lower bound, the entropy change,
/// the fresh-register entropy, and the cost-function bound.
#[derive(Clone, Debug)]
pub struct BoundChainReport {
    pub l_otm: f64,
    pub delta_s: f64,
    pub cost: f64,
    /// 2 ln(sqrt(1 - cost) + sqrt((d_B - 1) cost)).
    pub ub_cost: f64,
    pub s_eta: f64,
    /// ln(d_B F[eta_B, I/d_B]).
    pub ln_db_fidelity: f64,
    pub chain_ok: bool,
    /// min slack over the four links of the chain.
    pub min_slack: f64,
}

pub fn cost_upper_bound(cost: f64, d_b: usize) -> f64 {
    let c = cost.clamp(0.0, 1.0);
    2.0 * ((1.0 - c).sqrt() + ((d_b as f64 - 1.0) * c).sqrt()).ln()
}

pub fn bound_chain(
    u: &ComplexMatrix,
    psi: &ComplexMatrix,
    ens: &MeasuredEnsemble,
    dims: (usize, usize),
) -> Result<BoundChainReport> {
    let (d_a, d_b) = dims;
    let rho_b = DensityMatrix::pure(psi)?;
    let spec = QaeSpec::new(d_a, d_b, u.clone(), rho_b)?;
    let lotm = qae_l_otm(&spec, ens)?;

    let rho_in = ens.input_state();
    let rotated = DensityMatrix::new_unchecked(rho_in.matrix().conjugate_by(u)?);
    let rho_out = spec.channel().apply(&rho_in)?;
    let delta_s = von_neumann(&rho_out) - ens.input_entropy();

    let eta_b =
        DensityMatrix::new_unchecked(partial_trace(rotated.matrix(), dims, Keep::B)?);
    let cost = 1.0 - eta_b.matrix().sandwich(psi, psi).re;
    let ub_cost = cost_upper_bound(cost, d_b);
    let s_eta = von_neumann(&eta_b);
    let f = fidelity(&eta_b, &DensityMatrix::maximally_mixed(d_b))?;
    let ln_db_fidelity = (d_b as f64 * f).ln();

    let slacks = [
        delta_s - lotm.l_otm,
        s_eta - delta_s,
        ln_db_fidelity - s_eta,
        ub_cost - ln_db_fidelity,
    ];
    let min_slack = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BoundChainReport {
        l_otm: lotm.l_otm,
        delta_s,
        cost,
        ub_cost,
        s_eta,
        ln_db_fidelity,
        chain_ok: min_slack >= -1e-9,
        min_slack,
    })
}

/// Loss of Holevo information through a channel, with its cross-entropy
/// upper bound; ensemble members must be pure.
#[derive(Clone, Debug)]
pub struct DisturbanceReport {
    pub delta_chi: f64,
    pub ub_general: f64,
    /// Bound specialized to compressed states (autoencoder channels only).
    pub ub_qae: Option<f64>,
    /// Closed form S(rho_in) - S(rho_A) + Sum p_i S(rho_A^(i)).
    pub closed_form: Option<f64>,
    /// |delta_chi(rho_B) - delta_chi(rho_B')| for a second fresh state.
    pub independence_residual: Option<f64>,
}

pub fn entropic_disturbance(
    ens: &MeasuredEnsemble,
    phi: &dyn Channel,
) -> Result<DisturbanceReport> {
    let rho_out = phi.apply(&ens.input_state())?;
    let eig_out = rho_out.eig();
    let mut exp_sum = 0.0;
    let mut member_entropy = 0.0;
    for (p, ket) in ens.items() {
        let member = phi.apply(&DensityMatrix::pure(ket)?)?;
        let c = cross_entropy_with_eig(member.matrix(), &eig_out);
        if !c.finite {
            return Err(QxError::Invariant(
                "channel member state leaked outside the support of the output state".into(),
            ));
        }
        exp_sum += (-c.value).exp();
        member_entropy += p * von_neumann(&member);
    }
    // chi(input) = S(rho_in) for pure members; chi(output) = S(rho_out) - avg S.
    let delta_chi = ens.input_entropy() - (von_neumann(&rho_out) - member_entropy);
    let ub_general = exp_sum.ln() + member_entropy;
    Ok(DisturbanceReport {
        delta_chi,
        ub_general,
        ub_qae: None,
        closed_form: None,
        independence_residual: None,
    })
}

/// Disturbance report for an autoencoder channel, including the
/// compressed-state bound, the closed form, and the fresh-state
/// independence residual (evaluated against the maximally mixed fresh
/// state, or a fresh state of the caller's choice).
pub fn qae_disturbance(
    spec: &QaeSpec,
    ens: &MeasuredEnsemble,
    alternative_fresh: Option<&DensityMatrix>,
) -> Result<DisturbanceReport> {
    let mut report = entropic_disturbance(ens, &spec.channel())?;

    let (rho_a, members) = compressed_states(&spec.u, ens, (spec.d_a, spec.d_b))?;
    let eig_a = rho_a.eig();
    let mut exp_sum = 0.0;
    let mut member_entropy = 0.0;
    for ((p, _), m) in ens.items().iter().zip(&members) {
        let c = cross_entropy_with_eig(m.matrix(), &eig_a);
        if !c.finite {
            return Err(QxError::Invariant("compressed member leaked outside rho_A".into()));
        }
        exp_sum += (-c.value).exp();
        member_entropy += p * von_neumann(m);
    }
    report.ub_qae = Some(member_entropy + exp_sum.ln());
    // S(Phi(psi_i)) splits as S(rho_A^(i)) + S(rho_B), so the fresh-state
    // entropies cancel between the two Holevo terms.
    report.closed_form =
        Some(ens.input_entropy() - von_neumann(&rho_a) + member_entropy);

    let default_fresh = DensityMatrix::maximally_mixed(spec.d_b);
    let fresh2 = alternative_fresh.unwrap_or(&default_fresh);
    let spec2 = QaeSpec::new(spec.d_a, spec.d_b, spec.u.clone(), fresh2.clone())?;
    let other = entropic_disturbance(ens, &spec2.channel())?;
    report.independence_residual = Some((report.delta_chi - other.delta_chi).abs());
    Ok(report)
}

/// Optimizer selection for [`train`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptMethod {
    /// Cyclic coordinate descent with closed-form sinusoidal updates and
    /// random restarts on stalled sweeps.
    Coordinate,
    /// Finite-difference gradient descent (step 1e-4).
    FdGrad,
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub max_evals: usize,
    pub tol: f64,
    pub seed: u64,
    pub method: OptMethod,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { max_evals: 5000, tol: 1e-10, seed: 0, method: OptMethod::Coordinate }
    }
}

/// Training outcome: best parameters, best-so-far cost trace (one entry
/// per cost evaluation), and the evaluation count.
#[derive(Clone, Debug)]
pub struct TrainResult {
    pub theta: Vec<f64>,
    pub cost: f64,
    pub trace: Vec<f64>,
    pub evals: usize,
}

struct CostTracker<'a> {
    ansatz: &'a Ansatz,
    psi: &'a ComplexMatrix,
    rho_in: &'a DensityMatrix,
    best: f64,
    trace: Vec<f64>,
    evals: usize,
    budget: usize,
}

impl<'a> CostTracker<'a> {
    fn eval(&mut self, theta: &[f64]) -> Result<f64> {
        let u = self.ansatz.build(theta)?;
        let c = global_cost(&u, self.psi, self.rho_in, (self.ansatz.d_a, self.ansatz.d_b))?;
        if !c.is_finite() {
            return Err(QxError::Numerical("cost evaluated to a non-finite value".into()));
        }
        self.evals += 1;
        if c < self.best {
            self.best = c;
        }
        self.trace.push(self.best);
        Ok(c)
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    /// True when `n` more evaluations would overrun the budget.
    fn lacks(&self, n: usize) -> bool {
        self.evals + n > self.budget
    }
}

/// Variational training of the ansatz against the global cost function.
///
/// The fresh reference defaults to the all-zeros basis state of the B
/// register when `psi` is `None`. Ties on a plateau keep the earliest
/// parameters achieving the best cost.
pub fn train(
    ens: &MeasuredEnsemble,
    ansatz: &Ansatz,
    psi: Option<&ComplexMatrix>,
    opts: &TrainOptions,
) -> Result<TrainResult> {
    use rand::Rng;
    use rand::SeedableRng;

    let default_psi = ComplexMatrix::basis_ket(ansatz.d_b, 0);
    let psi = psi.unwrap_or(&default_psi);
    let rho_in = ens.input_state();
    let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed);
    let mut theta: Vec<f64> = (0..ansatz.param_count())
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();

    let mut tracker = CostTracker {
        ansatz,
        psi,
        rho_in: &rho_in,
        best: f64::INFINITY,
        trace: Vec::new(),
        evals: 0,
        budget: opts.max_evals,
    };
    let mut current = tracker.eval(&theta)?;
    let mut best_theta = theta.clone();
    let mut best = current;

    match opts.method {
        OptMethod::Coordinate => {
            // Each angle enters through one rotation gate, so the cost as
            // a function of a single coordinate is exactly
            // a + b cos(theta) + c sin(theta); three evaluations pin the
            // coordinate-wise minimum in closed form.
            'outer: while !tracker.exhausted() {
                let sweep_start = current;
                for i in 0..theta.len() {
                    if tracker.lacks(3) {
                        break 'outer;
                    }
                    let center = theta[i];
                    let half = std::f64::consts::FRAC_PI_2;
                    theta[i] = center + half;
                    let fp = tracker.eval(&theta)?;
                    theta[i] = center - half;
                    let fm = tracker.eval(&theta)?;
                    let shift = (2.0 * current - fp - fm).atan2(fp - fm);
                    let mut cand = center - half - shift;
                    cand = cand.rem_euclid(2.0 * std::f64::consts::PI);
                    if cand > std::f64::consts::PI {
                        cand -= 2.0 * std::f64::consts::PI;
                    }
                    theta[i] = cand;
                    let f = tracker.eval(&theta)?;
                    let (x, fbest) = [(cand, f), (center + half, fp), (center - half, fm)]
                        .into_iter()
                        .fold((center, current), |acc, it| if it.1 < acc.1 { it } else { acc });
                    theta[i] = x;
                    current = fbest;
                    if current < best {
                        best = current;
                        best_theta = theta.clone();
                    }
                }
                // A stalled sweep means a coordinate-wise minimum; restart
                // from a fresh random point while budget remains.
                if sweep_start - current < opts.tol {
                    if tracker.lacks(1) {
                        break 'outer;
                    }
                    for t in theta.iter_mut() {
                        *t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    }
                    current = tracker.eval(&theta)?;
                    if current < best {
                        best = current;
                        best_theta = theta.clone();
                    }
                }
            }
        }
        OptMethod::FdGrad => {
            const STEP: f64 = 1e-4;
            let mut lr = 0.2;
            while !tracker.lacks(2 * theta.len() + 1) {
                let mut grad = vec![0.0; theta.len()];
                for i in 0..theta.len() {
                    let saved = theta[i];
                    theta[i] = saved + STEP;
                    let fp = tracker.eval(&theta)?;
                    theta[i] = saved - STEP;
                    let fm = tracker.eval(&theta)?;
                    theta[i] = saved;
                    grad[i] = (fp - fm) / (2.0 * STEP);
                }
                let proposal: Vec<f64> =
                    theta.iter().zip(&grad).map(|(t, g)| t - lr * g).collect();
                let f = tracker.eval(&proposal)?;
                if f < current {
                    theta = proposal;
                    current = f;
                    lr *= 1.2;
                    if current < best {
                        best = current;
                        best_theta = theta.clone();
                    }
                } else {
                    lr *= 0.5;
                    if lr < 1e-12 {
                        break;
                    }
                }
                let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if gnorm < opts.tol {
                    break;
                }
            }
        }
    }

    Ok(TrainResult { theta: best_theta, cost: best, trace: tracker.trace, evals: tracker.evals })
}
