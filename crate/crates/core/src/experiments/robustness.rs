use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_error, EpsilonModel, RobustnessConfig};
use crate::error::{Error, Result};
use crate::fock::ParticleType;
use crate::numerics::{seeded_rng, CompensatedSum, ComplexMatrix};
use crate::scattering::{
    prob_distinguishable, prob_partial, probability, perturb_unitary_with, DistinguishabilityMatrix, PerturbationModel,
};
use crate::suppression::{boson_suppressed, fermion_suppressed, CLASS_TOL};

/// Points with a mean leakage below this are left out of fits.
pub const FIT_FLOOR: f64 = 1e-18;
/// Grid points needed for a fit.
const MIN_FIT_POINTS: usize = 4;

/// Mean leakage at one grid value, with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPoint {
    pub x: f64,
    pub delta_p: f64,
    pub stderr: f64,
}

/// Least-squares line through `(log x, log δP)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// `exp` of the intercept, i.e. `C` in `δP = C x^exponent`.
    pub fitted_prefactor: f64,
    /// Geometric mean of `δP / x^expected` over the fitted points.
    pub measured_prefactor: f64,
    pub points_used: usize,
}

/// Fits `δP ≈ C x^k` on the points with `x > 0` and `δP ≥ FIT_FLOOR`.
pub fn fit_power_law(points: &[RobustnessPoint], expected_exponent: f64) -> Option<PowerLawFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.x > 0.0 && p.delta_p >= FIT_FLOOR)
        .map(|p| (p.x.ln(), p.delta_p.ln()))
        .collect();
    if used.len() < MIN_FIT_POINTS {
        return None;
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let exponent = sxy / sxx;
    let log_measured = used.iter().map(|p| p.1 - expected_exponent * p.0).sum::<f64>() / n;
    Some(PowerLawFit {
        exponent,
        fitted_prefactor: (my - exponent * mx).exp(),
        measured_prefactor: log_measured.exp(),
        points_used: used.len(),
    })
}

/// Leakage into a suppressed event against the deviation strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessFit {
    pub points: Vec<RobustnessPoint>,
    pub expected_exponent: f64,
    pub fit: Option<PowerLawFit>,
    /// First-order prediction for `δP / x^expected`.
    pub predicted_prefactor: f64,
    /// `P_D` of the target, averaged over the unitaries sampled.
    pub mean_p_dist: f64,
    pub particles: usize,
    pub samples: usize,
    /// Distinguishability matrices that needed repair.
    pub repairs: usize,
}

impl RobustnessFit {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// Measured over predicted prefactor.
    pub fn prefactor_ratio(&self) -> Option<f64> {
        self.fit.map(|f| f.measured_prefactor / self.predicted_prefactor)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(Vec::new());
        for p in &self.points {
            w.serialize(p).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn points_from_csv(input: &[u8]) -> Result<Vec<RobustnessPoint>> {
        csv::ReaderBuilder::new()
            .delimiter(b';')
            .from_reader(input)
            .deserialize()
            .map(|p| p.map_err(csv_error))
            .collect()
    }

    pub fn summary(&self) -> String {
        match self.fit {
            Some(f) => format!(
                "exponent {:.4} (expected {}), prefactor measured {:.6e} predicted {:.6e} (ratio {:.4}), {} points, {} samples, {} repairs",
                f.exponent,
                self.expected_exponent,
                f.measured_prefactor,
                self.predicted_prefactor,
                f.measured_prefactor / self.predicted_prefactor,
                f.points_used,
                self.samples,
                self.repairs
            ),
            None => format!(
                "no fit (fewer than {MIN_FIT_POINTS} points above {FIT_FLOOR:e}); predicted prefactor {:.6e}",
                self.predicted_prefactor
            ),
        }
    }
}

struct SampleResult {
    p_dist: f64,
    delta: Vec<f64>,
    repairs: usize,
}

fn check_target(cfg: &RobustnessConfig) -> Result<()> {
    let p = cfg.unitary.permutation()?;
    let d = cfg.unitary.instance(0)?.eigenvalues;
    let suppressed = match cfg.particle {
        ParticleType::Boson => boson_suppressed(&d, &cfg.output)?,
        ParticleType::Fermion => fermion_suppressed(&p, &cfg.input, &d, &cfg.output)?,
        ParticleType::Distinguishable => false,
    };
    if !suppressed {
        return Err(Error::InvalidArgument(format!(
            "target {} is not suppressed for {}",
            cfg.output, cfg.particle
        )));
    }
    Ok(())
}

fn reduce(cfg: &RobustnessConfig, results: Vec<SampleResult>, expected_exponent: f64, per_unit: f64) -> Result<RobustnessFit> {
    let samples = results.len() as f64;
    let mean_p_dist = results.iter().map(|r| r.p_dist).collect::<CompensatedSum>().value() / samples;
    if mean_p_dist <= CLASS_TOL {
        return Err(Error::InvalidArgument(format!(
            "target {} has P_D = {mean_p_dist:e}; the first-order prediction vanishes",
            cfg.output
        )));
    }
    let points = cfg
        .grid
        .iter()
        .enumerate()
        .map(|(g, &x)| {
            let mean = results.iter().map(|r| r.delta[g]).collect::<CompensatedSum>().value() / samples;
            let var = results.iter().map(|r| (r.delta[g] - mean).powi(2)).collect::<CompensatedSum>().value()
                / (samples - 1.0).max(1.0);
            RobustnessPoint {
                x,
                delta_p: mean,
                stderr: (var / samples).sqrt(),
            }
        })
        .collect::<Vec<_>>();
    Ok(RobustnessFit {
        fit: fit_power_law(&points, expected_exponent),
        points,
        expected_exponent,
        predicted_prefactor: per_unit * mean_p_dist,
        mean_p_dist,
        particles: cfg.input.particles(),
        samples: results.len(),
        repairs: results.iter().map(|r| r.repairs).sum(),
    })
}

/// Scaling of `δP` with `<|Δ|>` for `U_jk (1 + Δ_jk)`.
///
/// Sample `i` uses stream `i` of the seed for its eigenbasis and its `Δ`,
/// and the same draws are reused at every grid value, so the curve of each
/// sample is smooth in `<|Δ|>`. `δP` is measured against the ideal
/// probability of the same unitary.
pub fn run_unitary_robustness(cfg: &RobustnessConfig) -> Result<RobustnessFit> {
    check_target(cfg)?;
    let (r, s, t) = (&cfg.input, &cfg.output, cfg.particle);
    let results = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(cfg.seed, i as u64);
            let u = cfg.unitary.instance(rng.random())?;
            let ideal = probability(t, &u.matrix, r, s)?;
            let delta = cfg
                .grid
                .iter()
                .map(|&x| {
                    let model = PerturbationModel::new(x, cfg.seed).with_distribution(cfg.deviation);
                    let perturbed = perturb_unitary_with(&u.matrix, &model, &mut rng.clone());
                    Ok(probability(t, &perturbed, r, s)? - ideal)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SampleResult {
                p_dist: prob_distinguishable(&u.matrix, r, s)?,
                delta,
                repairs: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_unit = r.particles() as f64 * s.factorial_product() / r.factorial_product();
    reduce(cfg, results, 2.0, per_unit)
}

/// Raw draws behind one random distinguishability matrix, reusable at any `<ε>`.
struct DistinguishabilityDraw {
    phi: Vec<f64>,
    pair: Vec<f64>,
}

impl DistinguishabilityDraw {
    fn new<R: Rng + ?Sized>(n: usize, eta_max: f64, rng: &mut R) -> Self {
        let phi = (0..n).map(|_| (rng.random::<f64>() - 0.5) * eta_max).collect();
        let pair = (0..n * (n.saturating_sub(1)) / 2).map(|_| rng.random::<f64>()).collect();
        Self { phi, pair }
    }

    fn matrix(&self, mean_eps: f64, model: EpsilonModel) -> Result<(DistinguishabilityMatrix, bool)> {
        let n = self.phi.len();
        let mut eps = ComplexMatrix::zeros(n, n);
        let mut idx = 0;
        for j in 0..n {
            for k in j + 1..n {
                let e = match model {
                    EpsilonModel::Uniform => mean_eps,
                    EpsilonModel::Random => 2.0 * mean_eps * self.pair[idx],
                };
                eps[(j, k)] = Complex64::new(e, 0.0);
                eps[(k, j)] = Complex64::new(e, 0.0);
                idx += 1;
            }
        }
        let s = ComplexMatrix::from_fn(n, n, |j, k| {
            if j == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0 - eps[(j, k)].re, self.phi[j] - self.phi[k])
            }
        });
        match DistinguishabilityMatrix::new(s.clone()) {
            Ok(valid) => Ok((valid, false)),
            Err(e) if model == EpsilonModel::Uniform => Err(e),
            Err(_) => DistinguishabilityMatrix::repair(&s),
        }
    }
}

/// One random `S_jk = (1 - ε_jk) exp(i η_jk)` with `η_jk = φ_j - φ_k`,
/// `|η_jk| ≤ eta_max`. The flag reports whether the matrix had to be repaired.
pub fn distinguishability_sample<R: Rng + ?Sized>(
    n: usize,
    mean_eps: f64,
    model: EpsilonModel,
    eta_max: f64,
    rng: &mut R,
) -> Result<(DistinguishabilityMatrix, bool)> {
    DistinguishabilityDraw::new(n, eta_max, rng).matrix(mean_eps, model)
}

/// Scaling of `δP` with `<ε>` for partially distinguishable particles.
pub fn run_distinguishability_robustness(cfg: &RobustnessConfig) -> Result<RobustnessFit> {
    check_target(cfg)?;
    let (r, s, t) = (&cfg.input, &cfg.output, cfg.particle);
    let n = r.modes();
    let results = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(cfg.seed, i as u64);
            let u = cfg.unitary.instance(rng.random())?;
            let draw = DistinguishabilityDraw::new(n, cfg.eta_max, &mut rng);
            // Same formula at ε = 0, so rounding in the double sum cancels.
            let ideal = prob_partial(&u.matrix, r, s, &draw.matrix(0.0, cfg.epsilon_model)?.0, t)?;
            let mut repairs = 0;
            let delta = cfg
                .grid
                .iter()
                .map(|&x| {
                    let (dist, repaired) = draw.matrix(x, cfg.epsilon_model)?;
                    repairs += repaired as usize;
                    Ok(prob_partial(&u.matrix, r, s, &dist, t)? - ideal)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SampleResult {
                p_dist: prob_distinguishable(&u.matrix, r, s)?,
                delta,
                repairs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reduce(cfg, results, 1.0, r.particles() as f64)
}
