//! Experiment configuration schema. Unknown keys are rejected so typos
//! fail loudly instead of silently running defaults.

use serde::Deserialize;

use crate::json::Json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyJarzynski,
    Qae,
    SpinBoson,
    GuessedHeat,
    RandomSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::VerifyJarzynski,
        Experiment::Qae,
        Experiment::SpinBoson,
        Experiment::GuessedHeat,
        Experiment::RandomSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::VerifyJarzynski => "verify-jarzynski",
            Experiment::Qae => "qae",
            Experiment::SpinBoson => "spin-boson",
            Experiment::GuessedHeat => "guessed-heat",
            Experiment::RandomSuite => "random-suite",
        }
    }

    pub fn from_name(name: &str) -> Option<Experiment> {
        Experiment::ALL.iter().copied().find(|e| e.name() == name)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Identity and consistency residuals.
    #[serde(default = "d_identity")]
    pub identity: f64,
    /// Slack allowed below an inequality bound.
    #[serde(default = "d_identity")]
    pub bound: f64,
    /// Truncated-model energy agreement.
    #[serde(default = "d_energy")]
    pub energy: f64,
    /// Guessed-heat identity residual.
    #[serde(default = "d_guessed")]
    pub guessed_identity: f64,
    /// Trained cost threshold.
    #[serde(default = "d_cost")]
    pub cost: f64,
}

fn d_identity() -> f64 {
    1e-9
}
fn d_energy() -> f64 {
    1e-6
}
fn d_guessed() -> f64 {
    1e-8
}
fn d_cost() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: d_identity(),
            bound: d_identity(),
            energy: d_energy(),
            guessed_identity: d_guessed(),
            cost: d_cost(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaeSection {
    #[serde(default = "d_layers")]
    pub layers: usize,
    #[serde(default = "d_evals")]
    pub max_evals: usize,
    /// Number of pure members in the input ensemble (<= 4).
    #[serde(default = "d_rank")]
    pub rank: usize,
}

fn d_layers() -> usize {
    4
}
fn d_evals() -> usize {
    5000
}
fn d_rank() -> usize {
    2
}

impl Default for QaeSection {
    fn default() -> Self {
        Self { layers: d_layers(), max_evals: d_evals(), rank: d_rank() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinBosonSection {
    #[serde(default = "d_one")]
    pub omega0: f64,
    #[serde(default = "d_one")]
    pub omega: f64,
    #[serde(default = "d_half")]
    pub g: f64,
    #[serde(default = "d_one")]
    pub beta: f64,
    #[serde(default = "d_tau_max")]
    pub tau_max: f64,
    #[serde(default = "d_tau_points")]
    pub tau_points: usize,
    #[serde(default = "d_cutoff")]
    pub fock_cutoff: usize,
}

fn d_one() -> f64 {
    1.0
}
fn d_half() -> f64 {
    0.5
}
fn d_tau_max() -> f64 {
    2.0 * std::f64::consts::PI
}
fn d_tau_points() -> usize {
    20
}
fn d_cutoff() -> usize {
    24
}

impl Default for SpinBosonSection {
    fn default() -> Self {
        Self {
            omega0: d_one(),
            omega: d_one(),
            g: d_half(),
            beta: d_one(),
            tau_max: d_tau_max(),
            tau_points: d_tau_points(),
            fock_cutoff: d_cutoff(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuessedHeatSection {
    #[serde(default = "d_one")]
    pub beta: f64,
    /// Dephasing reference instance: coupling strength and bath cutoff.
    #[serde(default = "d_gh_coupling")]
    pub coupling: f64,
    #[serde(default = "d_gh_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "d_gh_tau")]
    pub tau: f64,
}

fn d_gh_coupling() -> f64 {
    0.2
}
fn d_gh_cutoff() -> usize {
    12
}
fn d_gh_tau() -> f64 {
    1.3
}

impl Default for GuessedHeatSection {
    fn default() -> Self {
        Self {
            beta: d_one(),
            coupling: d_gh_coupling(),
            fock_cutoff: d_gh_cutoff(),
            tau: d_gh_tau(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seeds: Vec<u64>,
    pub output_dir: String,
    #[serde(default = "d_workers")]
    pub workers: usize,
    /// Random-instance dimension ceiling for the generic suites.
    #[serde(default = "d_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub qae: QaeSection,
    #[serde(default)]
    pub spin_boson: SpinBosonSection,
    #[serde(default)]
    pub guessed_heat: GuessedHeatSection,
}

fn d_workers() -> usize {
    1
}
fn d_max_dim() -> usize {
    8
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        if self.max_dim < 2 {
            return Err("max_dim must be at least 2".into());
        }
        if !(2..=8).contains(&self.max_dim) {
            return Err("max_dim must lie in 2..=8".into());
        }
        if self.qae.rank == 0 || self.qae.rank > 4 {
            return Err("qae.rank must lie in 1..=4".into());
        }
        if self.qae.layers == 0 {
            return Err("qae.layers must be at least 1".into());
        }
        if self.spin_boson.tau_points < 2 {
            return Err("spin_boson.tau_points must be at least 2".into());
        }
        if self.experiment != Experiment::SpinBoson && self.seeds.is_empty() {
            return Err("seeds must not be empty".into());
        }
        Ok(())
    }

    /// Deterministic echo of the effective configuration.
    pub fn echo(&self) -> Json {
        let mut obj = Json::obj();
        obj.push("experiment", Json::Str(self.experiment.name().into()));
        obj.push(
            "seeds",
            Json::Arr(self.seeds.iter().map(|&s| Json::Int(s as i64)).collect()),
        );
        obj.push("output_dir", Json::Str(self.output_dir.clone()));
        obj.push("workers", Json::Int(self.workers as i64));
        obj.push("max_dim", Json::Int(self.max_dim as i64));

        let mut tol = Json::obj();
        tol.push("identity", Json::Num(self.tolerances.identity));
        tol.push("bound", Json::Num(self.tolerances.bound));
        tol.push("energy", Json::Num(self.tolerances.energy));
        tol.push("guessed_identity", Json::Num(self.tolerances.guessed_identity));
        tol.push("cost", Json::Num(self.tolerances.cost));
        obj.push("tolerances", tol);

        match self.experiment {
            Experiment::Qae => {
                let mut q = Json::obj();
                q.push("layers", Json::Int(self.qae.layers as i64));
                q.push("max_evals", Json::Int(self.qae.max_evals as i64));
                q.push("rank", Json::Int(self.qae.rank as i64));
                obj.push("qae", q);
            }
            Experiment::SpinBoson => {
                let sb = &self.spin_boson;
                let mut s = Json::obj();
                s.push("omega0", Json::Num(sb.omega0));
                s.push("omega", Json::Num(sb.omega));
                s.push("g", Json::Num(sb.g));
                s.push("beta", Json::Num(sb.beta));
                s.push("tau_max", Json::Num(sb.tau_max));
                s.push("tau_points", Json::Int(sb.tau_points as i64));
                s.push("fock_cutoff", Json::Int(sb.fock_cutoff as i64));
                obj.push("spin_boson", s);
            }
            Experiment::GuessedHeat => {
                let gh = &self.guessed_heat;
                let mut g = Json::obj();
                g.push("beta", Json::Num(gh.beta));
                g.push("coupling", Json::Num(gh.coupling));
                g.push("fock_cutoff", Json::Int(gh.fock_cutoff as i64));
                g.push("tau", Json::Num(gh.tau));
                obj.push("guessed_heat", g);
            }
            Experiment::VerifyJarzynski | Experiment::RandomSuite => {}
        }
        obj
    }
}
