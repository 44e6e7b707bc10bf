//! Quantum channel representations: generic Kraus channels, the
//! autoencoder compress-refresh-decode map, and thermal operations.
//!
//! Formula-backed maps (autoencoder, thermal operation) are kept in
//! function form behind the [`Channel`] trait; a Kraus extraction via the
//! Choi matrix is available for validation.

use rand::rngs::StdRng;

use crate::matcore::random::random_kraus_ops_rng;
use crate::matcore::{eig_hermitian, partial_trace, tensor, ComplexMatrix, DensityMatrix, Keep};
use crate::{QxError, Result, EPS_NUM, RANK_TOL};

/// A CPTP map evaluated on density matrices.
///
/// `apply_raw` is the underlying linear action on arbitrary matrices; it is
/// what unitality checks and Choi constructions use.
pub trait Channel {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix>;

    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim() {
            return Err(QxError::Dimension(format!(
                "channel expects input dimension {}, got {}",
                self.input_dim(),
                rho.dim()
            )));
        }
        let out = self.apply_raw(rho.matrix())?;
        DensityMatrix::new(out)
    }

    /// ||Phi(I/d) - I/d||_F; zero for unital maps.
    fn unitality_residual(&self) -> Result<f64> {
        let d = self.input_dim();
        if d != self.output_dim() {
            return Err(QxError::Dimension(
                "unitality is only defined for equal input/output dimensions".into(),
            ));
        }
        let img = self.apply_raw(&ComplexMatrix::identity(d).scale_re(1.0 / d as f64))?;
        Ok((&img - &ComplexMatrix::identity(d).scale_re(1.0 / d as f64)).frobenius_norm())
    }
}

/// Channel given by an explicit Kraus decomposition.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checks shapes and the trace-preserving condition Sum K^dag K = I.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| {
            QxError::Parameter("a Kraus channel needs at least one operator".into())
        })?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if ops.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(QxError::Dimension("Kraus operators must share one shape".into()));
        }
        let ch = Self { d_in, d_out, ops };
        let residual = ch.trace_preserving_residual();
        if residual > EPS_NUM * d_in as f64 {
            return Err(QxError::Parameter(format!(
                "Kraus operators are not trace preserving (residual {residual:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let residual = u.unitarity_residual();
        if residual > EPS_NUM * u.rows() as f64 {
            return Err(QxError::Unitarity { residual });
        }
        Self::new(vec![u])
    }

    /// Random CPTP channel with `n_ops` Kraus operators (Stinespring).
    pub fn random(dim: usize, n_ops: usize, rng: &mut StdRng) -> Result<Self> {
        Self::new(random_kraus_ops_rng(dim, n_ops, rng)?)
    }

    /// Random unital channel: a probabilistic mixture of Haar unitaries.
    pub fn random_unitary_mixture(dim: usize, n_ops: usize, rng: &mut StdRng) -> Result<Self> {
        use crate::matcore::random::haar_unitary_rng;
        use rand::Rng;
        let mut weights: Vec<f64> = (0..n_ops)
            .map(|_| -f64::ln(rng.gen_range(f64::MIN_POSITIVE..1.0)))
            .collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let ops = weights
            .iter()
            .map(|&w| haar_unitary_rng(dim, rng).scale_re(w.sqrt()))
            .collect();
        Self::new(ops)
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// ||Sum K^dag K - I||_F.
    pub fn trace_preserving_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d_in, self.d_in);
        for k in &self.ops {
            sum = &sum + &(&k.conjugate_transpose() * k);
        }
        (&sum - &ComplexMatrix::identity(self.d_in)).frobenius_norm()
    }

    /// ||Sum K K^dag - I||_F.
    pub fn unital_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.ops {
            sum = &sum + &(k * &k.conjugate_transpose());
        }
        (&sum - &ComplexMatrix::identity(self.d_out)).frobenius_norm()
    }

    pub fn validate(&self) -> ChannelReport {
        let tp = self.trace_preserving_residual();
        let un = self.unital_residual();
        let scale = self.d_in as f64;
        ChannelReport {
            trace_preserving: tp <= EPS_NUM * scale,
            unital: un <= EPS_NUM * scale,
            tp_residual: tp,
            unital_residual: un,
        }
    }
}

impl Channel for KrausChannel {
    fn input_dim(&self) -> usize {
        self.d_in
    }

    fn output_dim(&self) -> usize {
        self.d_out
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.d_in || m.cols() != self.d_in {
            return Err(QxError::Dimension(format!(
                "Kraus channel expects a {0}x{0} matrix, got {1}x{2}",
                self.d_in,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.ops {
            out = &out + &(&(k * m) * &k.conjugate_transpose());
        }
        Ok(out)
    }
}

/// Structural validation report for a Kraus channel.
#[derive(Clone, Copy, Debug)]
pub struct ChannelReport {
    pub trace_preserving: bool,
    pub unital: bool,
    pub tp_residual: f64,
    pub unital_residual: f64,
}

/// Replaces every input by a fixed state (e.g. the completely depolarizing
/// channel when the target is maximally mixed).
#[derive(Clone, Debug)]
pub struct ReplaceChannel {
    d_in: usize,
    target: DensityMatrix,
}

impl ReplaceChannel {
    pub fn new(d_in: usize, target: DensityMatrix) -> Self {
        Self { d_in, target }
    }

    pub fn depolarizing(dim: usize) -> Self {
        Self::new(dim, DensityMatrix::maximally_mixed(dim))
    }
}

impl Channel for ReplaceChannel {
    fn input_dim(&self) -> usize {
        self.d_in
    }

    fn output_dim(&self) -> usize {
        self.target.dim()
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.d_in || m.cols() != self.d_in {
            return Err(QxError::Dimension("replace channel dimension mismatch".into()));
        }
        Ok(self.target.matrix().scale(m.trace()))
    }
}

/// Ingredients of the autoencoder channel: a joint unitary on the
/// latent (A) and fresh (B) registers plus the fresh state.
#[derive(Clone, Debug)]
pub struct QaeSpec {
    pub d_a: usize,
    pub d_b: usize,
    pub u: ComplexMatrix,
    pub rho_b: DensityMatrix,
}

impl QaeSpec {
    pub fn new(d_a: usize, d_b: usize, u: ComplexMatrix, rho_b: DensityMatrix) -> Result<Self> {
        let d = d_a * d_b;
        if u.rows() != d || u.cols() != d {
            return Err(QxError::Dimension(format!(
                "unitary must act on dimension {d}, got {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        if rho_b.dim() != d_b {
            return Err(QxError::Dimension(format!(
                "fresh state must have dimension {d_b}, got {}",
                rho_b.dim()
            )));
        }
        let residual = u.unitarity_residual();
        if residual > EPS_NUM * d as f64 {
            return Err(QxError::Unitarity { residual });
        }
        Ok(Self { d_a, d_b, u, rho_b })
    }

    pub fn total_dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn channel(&self) -> QaeChannel {
        QaeChannel { spec: self.clone() }
    }
}

/// rho -> U^dag (Tr_B[U rho U^dag] (x) rho_B) U.
#[derive(Clone, Debug)]
pub struct QaeChannel {
    spec: QaeSpec,
}

impl QaeChannel {
    pub fn spec(&self) -> &QaeSpec {
        &self.spec
    }
}

impl Channel for QaeChannel {
    fn input_dim(&self) -> usize {
        self.spec.total_dim()
    }

    fn output_dim(&self) -> usize {
        self.spec.total_dim()
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.spec.total_dim();
        if m.rows() != d || m.cols() != d {
            return Err(QxError::Dimension("autoencoder channel dimension mismatch".into()));
        }
        let rotated = m.conjugate_by(&self.spec.u)?;
        let latent = partial_trace(&rotated, (self.spec.d_a, self.spec.d_b), Keep::A)?;
        tensor(&latent, self.spec.rho_b.matrix()).conjugate_by(&self.spec.u.conjugate_transpose())
    }
}

/// rho -> Tr_b[U (rho (x) rho_bath) U^dag].
#[derive(Clone, Debug)]
pub struct ThermalOperation {
    d_s: usize,
    d_b: usize,
    u_total: ComplexMatrix,
    rho_bath: DensityMatrix,
}

impl ThermalOperation {
    pub fn new(
        u_total: ComplexMatrix,
        rho_bath: DensityMatrix,
        dims: (usize, usize),
    ) -> Result<Self> {
        let (d_s, d_b) = dims;
        let d = d_s * d_b;
        if u_total.rows() != d || u_total.cols() != d {
            return Err(QxError::Dimension(format!(
                "total unitary must act on dimension {d}, got {}x{}",
                u_total.rows(),
                u_total.cols()
            )));
        }
        if rho_bath.dim() != d_b {
            return Err(QxError::Dimension(format!(
                "bath state must have dimension {d_b}, got {}",
                rho_bath.dim()
            )));
        }
        let residual = u_total.unitarity_residual();
        if residual > EPS_NUM * d as f64 {
            return Err(QxError::Unitarity { residual });
        }
        Ok(Self { d_s, d_b, u_total, rho_bath })
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.u_total
    }

    pub fn bath_state(&self) -> &DensityMatrix {
        &self.rho_bath
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_s, self.d_b)
    }

    /// U (rho (x) rho_bath) U^dag before the bath is traced out.
    pub fn joint_output(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        tensor(rho, self.rho_bath.matrix()).conjugate_by(&self.u_total)
    }
}

impl Channel for ThermalOperation {
    fn input_dim(&self) -> usize {
        self.d_s
    }

    fn output_dim(&self) -> usize {
        self.d_s
    }

    fn apply_raw(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.d_s || m.cols() != self.d_s {
            return Err(QxError::Dimension("thermal operation dimension mismatch".into()));
        }
        partial_trace(&self.joint_output(m)?, (self.d_s, self.d_b), Keep::A)
    }
}

/// Extracts a Kraus decomposition from any channel through the spectral
/// decomposition of its Choi matrix. Intended for validation only.
pub fn kraus_from_channel(ch: &dyn Channel) -> Result<KrausChannel> {
    let d_in = ch.input_dim();
    let d_out = ch.output_dim();
    // Choi = Sum_{ij} |i><j| (x) Phi(|i><j|).
    let mut choi = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut e = ComplexMatrix::zeros(d_in, d_in);
            e[(i, j)] = num_complex::Complex64::new(1.0, 0.0);
            let img = ch.apply_raw(&e)?;
            for a in 0..d_out {
                for b in 0..d_out {
                    choi[(i * d_out + a, j * d_out + b)] = img[(a, b)];
                }
            }
        }
    }
    let eig = eig_hermitian(&choi)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut ops = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= RANK_TOL * lmax {
            continue;
        }
        let w = lambda.sqrt();
        ops.push(ComplexMatrix::from_fn(d_out, d_in, |a, b| {
            eig.vectors[(b * d_out + a, k)] * w
        }));
    }
    KrausChannel::new(ops)
}
