//! Reproducible experiment runners: ensemble-mean probabilities over random
//! eigenbases, the Fourier law comparison, and the scaling of the leakage
//! into suppressed events under imperfect unitaries or partial
//! distinguishability.
//!
//! Every run is a pure function of its config. Parallel work is split by
//! task index, each task drawing from its own stream of the run seed, and
//! results are reduced in task order.

mod fourier;
mod mean;
mod robustness;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeOccupation, ParticleType};
use crate::permutations::{is_invariant, Permutation};
use crate::scattering::{DeviationDistribution, PARTIAL_LIMIT};
use crate::unitaries::{build_unitary, fourier_constructed, one_based_option, ConstructedUnitary, UnitarySpec};

pub use fourier::{run_fourier_comparison, FourierComparison, FourierCounts, FourierRow};
pub use mean::{run_mean_probabilities, MeanTable};
pub use robustness::{
    distinguishability_sample, fit_power_law, run_distinguishability_robustness, run_unitary_robustness,
    PowerLawFit, RobustnessFit, RobustnessPoint, FIT_FLOOR,
};

/// Default number of random eigenbases for ensemble averages.
pub const DEFAULT_BASES: usize = 100;
/// Default number of random draws per robustness grid point.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Default bound on the gauge phases `η` of the distinguishability matrix.
pub const DEFAULT_ETA_MAX: f64 = std::f64::consts::PI / 20.0;

/// Bound for probabilities of law-suppressed events (squared-amplitude scale).
pub const SUPPRESSION_BOUND: f64 = 1e-20;
/// Allowed deviation of a probability table's total from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn default_bases() -> usize {
    DEFAULT_BASES
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_types() -> Vec<ParticleType> {
    vec![ParticleType::Boson]
}

fn default_eta_max() -> f64 {
    DEFAULT_ETA_MAX
}

/// One run, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    MeanProbabilities(MeanConfig),
    FourierComparison(FourierConfig),
    UnitaryRobustness(RobustnessConfig),
    DistinguishabilityRobustness(RobustnessConfig),
}

/// Ensemble averages over random eigenbases of one permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanConfig {
    pub permutation: Permutation,
    pub input: ModeOccupation,
    #[serde(default = "default_bases")]
    pub bases: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_types")]
    pub types: Vec<ParticleType>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "one_based_option")]
    pub column_order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    pub n: usize,
    pub m: usize,
    pub input: ModeOccupation,
}

/// Where the ideal unitary of a robustness run comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySource {
    /// `Θ A Σ` with `Θ = Σ = 1`; with `rotate`, every sample draws a fresh
    /// random basis of the degenerate eigenspaces.
    Eigenbasis {
        permutation: Permutation,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "one_based_option")]
        column_order: Option<Vec<usize>>,
        #[serde(default)]
        rotate: bool,
    },
    Fourier { n: usize, m: usize },
}

impl UnitarySource {
    pub fn modes(&self) -> usize {
        match self {
            UnitarySource::Eigenbasis { permutation, .. } => permutation.len(),
            UnitarySource::Fourier { n, .. } => *n,
        }
    }

    /// Whether different samples see different unitaries.
    pub fn is_random(&self) -> bool {
        matches!(self, UnitarySource::Eigenbasis { rotate: true, .. })
    }

    pub fn permutation(&self) -> Result<Permutation> {
        match self {
            UnitarySource::Eigenbasis { permutation, .. } => Ok(permutation.clone()),
            UnitarySource::Fourier { n, m } => Ok(crate::unitaries::fourier_symmetry(*n, *m)?.0),
        }
    }

    /// The unitary for one sample; `rotation_seed` is ignored unless the source rotates.
    pub fn instance(&self, rotation_seed: u64) -> Result<ConstructedUnitary> {
        match self {
            UnitarySource::Eigenbasis {
                permutation,
                column_order,
                rotate,
            } => {
                let mut spec = UnitarySpec::new(permutation.clone());
                spec.column_order = column_order.clone();
                if *rotate {
                    spec.rotation_seed = Some(rotation_seed);
                }
                build_unitary(&spec)
            }
            UnitarySource::Fourier { n, m } => fourier_constructed(*n, *m),
        }
    }

    fn problems(&self) -> Vec<String> {
        match self {
            UnitarySource::Eigenbasis {
                permutation,
                column_order,
                ..
            } => {
                let mut spec = UnitarySpec::new(permutation.clone());
                spec.column_order = column_order.clone();
                spec.problems()
            }
            UnitarySource::Fourier { n, m } => fourier_problems(*n, *m),
        }
    }
}

fn fourier_problems(n: usize, m: usize) -> Vec<String> {
    if m < 2 || n == 0 || n % m != 0 {
        vec![format!("m = {m} must be at least 2 and divide n = {n}")]
    } else {
        Vec::new()
    }
}

/// How the pairwise distinguishabilities `ε_jk` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonModel {
    /// Every pair has `ε_jk = <ε>`; always a valid Gram matrix.
    #[default]
    Uniform,
    /// Independent `ε_jk` uniform on `[0, 2<ε>]`, repaired to the nearest
    /// valid matrix when positivity fails.
    Random,
}

/// Leakage into one suppressed event as a function of a deviation strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    pub unitary: UnitarySource,
    pub input: ModeOccupation,
    pub output: ModeOccupation,
    #[serde(rename = "type")]
    pub particle: ParticleType,
    /// `<|Δ|>` or `<ε>` values, ascending.
    pub grid: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub deviation: DeviationDistribution,
    #[serde(default)]
    pub epsilon_model: EpsilonModel,
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
}

fn state_problems(name: &str, state: &ModeOccupation, p: &Permutation, fermionic: bool) -> Vec<String> {
    let mut out = Vec::new();
    if state.modes() != p.len() {
        out.push(format!("{name} has {} modes, the permutation acts on {}", state.modes(), p.len()));
        return out;
    }
    if state.particles() == 0 {
        out.push(format!("{name} holds no particles"));
    }
    if !is_invariant(p, state).unwrap_or(false) {
        if let Err(e) = crate::permutations::check_invariant(p, state) {
            out.push(format!("{name}: {e}"));
        }
    }
    if fermionic {
        if let Err(e) = state.require_fermionic() {
            out.push(format!("{name}: {e} (fermions)"));
        }
    }
    out
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::MeanProbabilities(_) => "mean_probabilities",
            ExperimentConfig::FourierComparison(_) => "fourier_comparison",
            ExperimentConfig::UnitaryRobustness(_) => "unitary_robustness",
            ExperimentConfig::DistinguishabilityRobustness(_) => "distinguishability_robustness",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentConfig::MeanProbabilities(c) => Some(c.seed),
            ExperimentConfig::FourierComparison(_) => None,
            ExperimentConfig::UnitaryRobustness(c) | ExperimentConfig::DistinguishabilityRobustness(c) => Some(c.seed),
        }
    }

    /// Every problem with the config; empty when it is valid.
    pub fn problems(&self) -> Vec<String> {
        match self {
            ExperimentConfig::MeanProbabilities(c) => {
                let mut out = UnitarySpec {
                    column_order: c.column_order.clone(),
                    ..UnitarySpec::new(c.permutation.clone())
                }
                .problems();
                let fermions = c.types.contains(&ParticleType::Fermion);
                out.extend(state_problems("input", &c.input, &c.permutation, fermions));
                if c.bases == 0 {
                    out.push("bases must be at least 1".into());
                }
                if c.types.is_empty() {
                    out.push("types must name at least one particle type".into());
                }
                out
            }
            ExperimentConfig::FourierComparison(c) => {
                let mut out = fourier_problems(c.n, c.m);
                if out.is_empty() {
                    let p = Permutation::shift(c.n, c.n / c.m);
                    out.extend(state_problems("input", &c.input, &p, false));
                }
                out
            }
            ExperimentConfig::UnitaryRobustness(c) => c.problems(false),
            ExperimentConfig::DistinguishabilityRobustness(c) => c.problems(true),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }
}

impl RobustnessConfig {
    fn problems(&self, partial: bool) -> Vec<String> {
        let mut out = self.unitary.problems();
        if !out.is_empty() {
            return out;
        }
        let p = match self.unitary.permutation() {
            Ok(p) => p,
            Err(e) => return vec![e.to_string()],
        };
        let fermions = self.particle == ParticleType::Fermion;
        out.extend(state_problems("input", &self.input, &p, fermions));
        if self.output.modes() != p.len() {
            out.push(format!("output has {} modes, expected {}", self.output.modes(), p.len()));
        } else if fermions {
            if let Err(e) = self.output.require_fermionic() {
                out.push(format!("output: {e} (fermions)"));
            }
        }
        if self.output.particles() != self.input.particles() {
            out.push(format!(
                "output holds {} particles, input {}",
                self.output.particles(),
                self.input.particles()
            ));
        }
        if self.particle == ParticleType::Distinguishable {
            out.push("type must be boson or fermion".into());
        }
        if self.grid.is_empty() {
            out.push("grid is empty".into());
        }
        if self.grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
            out.push("grid values must be finite and non-negative".into());
        }
        if self.grid.windows(2).any(|w| w[1] < w[0]) {
            out.push("grid must be ascending".into());
        }
        if self.samples == 0 {
            out.push("samples must be at least 1".into());
        }
        if partial {
            if self.input.particles() > PARTIAL_LIMIT {
                out.push(format!("partial distinguishability supports at most {PARTIAL_LIMIT} particles"));
            }
            if self.grid.iter().any(|&x| x > 0.5) {
                out.push("epsilon grid values must not exceed 0.5".into());
            }
            if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.eta_max) {
                out.push("eta_max must lie in [0, π/2)".into());
            }
        }
        out
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Mean(Vec<MeanTable>),
    Fourier(FourierComparison),
    Robustness(RobustnessFit),
}

impl ExperimentOutput {
    /// CSV files as `(file name, contents)`.
    pub fn csv_files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        match self {
            ExperimentOutput::Mean(tables) => tables
                .iter()
                .map(|t| Ok((format!("mean_{}.csv", t.particle.label()), t.to_csv()?)))
                .collect(),
            ExperimentOutput::Fourier(c) => Ok(vec![("fourier_comparison.csv".into(), c.to_csv()?)]),
            ExperimentOutput::Robustness(f) => Ok(vec![("robustness.csv".into(), f.to_csv()?)]),
        }
    }

    /// Checks that must hold for every correct run; non-empty means the run found a violation.
    pub fn invariant_failures(&self) -> Vec<String> {
        match self {
            ExperimentOutput::Mean(tables) => tables.iter().flat_map(|t| t.invariant_failures()).collect(),
            ExperimentOutput::Fourier(c) => c.invariant_failures(),
            ExperimentOutput::Robustness(_) => Vec::new(),
        }
    }

    pub fn summary(&self) -> Vec<String> {
        match self {
            ExperimentOutput::Mean(tables) => tables.iter().map(|t| t.summary()).collect(),
            ExperimentOutput::Fourier(c) => vec![c.summary()],
            ExperimentOutput::Robustness(f) => vec![f.summary()],
        }
    }
}

/// Config echo, seed, library version, wall time and notes for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    pub version: String,
    pub timing_ms: u64,
    pub notes: Vec<String>,
}

/// Validates and dispatches a config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentOutput, RunMetadata)> {
    cfg.validate()?;
    let start = Instant::now();
    let output = match cfg {
        ExperimentConfig::MeanProbabilities(c) => ExperimentOutput::Mean(run_mean_probabilities(c)?),
        ExperimentConfig::FourierComparison(c) => ExperimentOutput::Fourier(run_fourier_comparison(c.n, c.m, &c.input)?),
        ExperimentConfig::UnitaryRobustness(c) => ExperimentOutput::Robustness(run_unitary_robustness(c)?),
        ExperimentConfig::DistinguishabilityRobustness(c) => {
            ExperimentOutput::Robustness(run_distinguishability_robustness(c)?)
        }
    };
    let mut notes = output.summary();
    notes.extend(output.invariant_failures().into_iter().map(|f| format!("FAILED: {f}")));
    if let ExperimentConfig::UnitaryRobustness(c) = cfg {
        notes.push(format!("deviation distribution: {:?}", c.deviation));
    }
    if let ExperimentConfig::DistinguishabilityRobustness(c) = cfg {
        notes.push(format!("epsilon model: {:?}, eta_max = {}", c.epsilon_model, c.eta_max));
    }
    let meta = RunMetadata {
        config: cfg.clone(),
        seed: cfg.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timing_ms: start.elapsed().as_millis() as u64,
        notes,
    };
    Ok((output, meta))
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::InvalidArgument(format!("CSV: {other:?}")),
    }
}

#[cfg(test)]
mod tests;
