//! Transition probabilities for bosons, fermions, distinguishable and
//! partially distinguishable particles.
//!
//! With `M[α][β] = U[d_α(r)][d_β(s)]`:
//!
//! * bosons: `|perm M|² / (∏ r_j! ∏ s_k!)`
//! * fermions: `|det M|²`
//! * distinguishable: `perm(|M|²) / ∏ s_k!`
//!
//! The normalizations make each distribution sum to one over the output set.

use itertools::Itertools;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeOccupation, ParticleType};
use crate::numerics::{
    complex_gaussian, determinant, permanent, permutation_is_odd, seeded_rng, ComplexMatrix, STRUCTURAL_TOL,
};

/// Largest particle number accepted by [`prob_partial`].
pub const PARTIAL_LIMIT: usize = 6;

const NEGATIVE_TOL: f64 = 1e-12;

fn check_pair(u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<()> {
    let n = u.require_square()?;
    if r.modes() != n || s.modes() != n {
        return Err(Error::DimensionMismatch(format!(
            "U acts on {n} modes, r has {}, s has {}",
            r.modes(),
            s.modes()
        )));
    }
    if r.particles() != s.particles() {
        return Err(Error::ParticleNumber {
            input: r.particles(),
            output: s.particles(),
        });
    }
    Ok(())
}

/// Rows of `U` for occupied input modes, columns for occupied output modes,
/// each repeated according to its occupation.
pub fn scattering_matrix(u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<ComplexMatrix> {
    check_pair(u, r, s)?;
    Ok(u.select(r.to_assignment().as_slice(), s.to_assignment().as_slice()))
}

fn clamp_probability(p: f64) -> Result<f64> {
    if p < -NEGATIVE_TOL {
        return Err(Error::InvariantViolation(format!("negative probability {p:e}")));
    }
    Ok(p.max(0.0))
}

pub fn prob_boson(u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<f64> {
    let m = scattering_matrix(u, r, s)?;
    Ok(permanent(&m)?.norm_sqr() / (r.factorial_product() * s.factorial_product()))
}

pub fn prob_fermion(u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<f64> {
    r.require_fermionic()?;
    s.require_fermionic()?;
    let m = scattering_matrix(u, r, s)?;
    Ok(determinant(&m)?.norm_sqr())
}

pub fn prob_distinguishable(u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<f64> {
    let m = scattering_matrix(u, r, s)?;
    let p = permanent(&m.abs_squared())?.re / s.factorial_product();
    clamp_probability(p)
}

/// Probability for the given particle type; fermionic inputs must be singly occupied.
pub fn probability(t: ParticleType, u: &ComplexMatrix, r: &ModeOccupation, s: &ModeOccupation) -> Result<f64> {
    match t {
        ParticleType::Boson => prob_boson(u, r, s),
        ParticleType::Fermion => prob_fermion(u, r, s),
        ParticleType::Distinguishable => prob_distinguishable(u, r, s),
    }
}

/// Gram matrix `S[j][k] = <Φ_j|Φ_k>` of the internal states of particles in
/// each mode. All-ones means indistinguishable, identity means fully
/// distinguishable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DistinguishabilityMatrix(ComplexMatrix);

impl DistinguishabilityMatrix {
    /// Validates Hermiticity, unit diagonal, `|S_jk| ≤ 1` and positive semidefiniteness.
    pub fn new(s: ComplexMatrix) -> Result<Self> {
        let n = s.require_square()?;
        let bad = |msg: String| Err(Error::InvalidDistinguishability(msg));
        for j in 0..n {
            if (s[(j, j)] - Complex64::new(1.0, 0.0)).norm() > STRUCTURAL_TOL {
                return bad(format!("diagonal entry {} is {}", j + 1, s[(j, j)]));
            }
            for k in 0..n {
                if (s[(j, k)] - s[(k, j)].conj()).norm() > STRUCTURAL_TOL {
                    return bad(format!("not Hermitian at ({}, {})", j + 1, k + 1));
                }
                if s[(j, k)].norm() > 1.0 + STRUCTURAL_TOL {
                    return bad(format!("|S| > 1 at ({}, {})", j + 1, k + 1));
                }
            }
        }
        let min = min_hermitian_eigenvalue(&s);
        if min < -1e-10 {
            return bad(format!("not positive semidefinite (smallest eigenvalue {min:e})"));
        }
        Ok(Self(s))
    }

    pub fn indistinguishable(n: usize) -> Self {
        Self(ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0)))
    }

    pub fn distinguishable(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    /// Nearest valid matrix to a Hermitian candidate with unit diagonal:
    /// negative eigenvalues are clipped to zero and the diagonal is
    /// renormalized. The flag reports whether clipping was needed.
    pub fn repair(s: &ComplexMatrix) -> Result<(Self, bool)> {
        let n = s.require_square()?;
        let herm = ComplexMatrix::from_fn(n, n, |j, k| (s[(j, k)] + s[(k, j)].conj()) * 0.5);
        if min_hermitian_eigenvalue(&herm) >= -1e-10 {
            if let Ok(valid) = Self::new(herm.clone()) {
                return Ok((valid, false));
            }
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(herm.to_nalgebra());
        let clipped = eig.eigenvalues.map(|l| l.max(0.0));
        let v = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
        let vl = v.scale_columns(&clipped.iter().map(|&l| Complex64::new(l, 0.0)).collect::<Vec<_>>());
        let psd = &vl * &v.adjoint();
        let diag: Vec<f64> = (0..n).map(|j| psd[(j, j)].re).collect();
        if diag.iter().any(|&d| d <= 1e-14) {
            return Err(Error::InvalidDistinguishability(
                "projection onto the positive semidefinite cone lost a mode".into(),
            ));
        }
        let repaired = ComplexMatrix::from_fn(n, n, |j, k| {
            if j == k {
                Complex64::new(1.0, 0.0)
            } else {
                let z = psd[(j, k)] / (diag[j] * diag[k]).sqrt();
                if z.norm() > 1.0 { z / z.norm() } else { z }
            }
        });
        Self::new(repaired).map(|m| (m, true))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.rows()
    }
}

impl<'de> Deserialize<'de> for DistinguishabilityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(deserializer)?;
        Self::new(m).map_err(serde::de::Error::custom)
    }
}

fn min_hermitian_eigenvalue(s: &ComplexMatrix) -> f64 {
    if s.rows() == 0 {
        return 0.0;
    }
    nalgebra::linalg::SymmetricEigen::new(s.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Transition probability for partially distinguishable bosons or fermions,
///
/// `P = Σ_{σ,ρ} χ(σ)χ(ρ) ∏_α S[d_σ(α)(r), d_ρ(α)(r)] conj(U[d_σ(α)(r), d_α(s)]) U[d_ρ(α)(r), d_α(s)]`
///
/// divided by `∏ r_j! ∏ s_k!`, where `χ` is the sign for fermions and 1 for
/// bosons. Particles sharing an input mode are indistinguishable. Costs
/// `O(N!² N)`, so `N` is capped at [`PARTIAL_LIMIT`].
pub fn prob_partial(
    u: &ComplexMatrix,
    r: &ModeOccupation,
    s: &ModeOccupation,
    dist: &DistinguishabilityMatrix,
    t: ParticleType,
) -> Result<f64> {
    check_pair(u, r, s)?;
    if dist.modes() != u.rows() {
        return Err(Error::DimensionMismatch(format!(
            "distinguishability matrix is {}x{}, U acts on {} modes",
            dist.modes(),
            dist.modes(),
            u.rows()
        )));
    }
    let signed = match t {
        ParticleType::Boson => false,
        ParticleType::Fermion => {
            r.require_fermionic()?;
            s.require_fermionic()?;
            true
        }
        ParticleType::Distinguishable => {
            return Err(Error::InvalidArgument(
                "partial distinguishability applies to bosons or fermions".into(),
            ))
        }
    };
    let particles = r.particles();
    if particles > PARTIAL_LIMIT {
        return Err(Error::TooLarge {
            method: "prob_partial",
            size: particles,
            limit: PARTIAL_LIMIT,
        });
    }
    let dr = r.to_assignment();
    let ds = s.to_assignment();
    let (dr, ds) = (dr.as_slice(), ds.as_slice());
    let sm = dist.matrix();

    // Per relabeling σ: its sign and the amplitude factors U[d_σ(α)(r), d_α(s)].
    let paths: Vec<(Vec<usize>, f64, Vec<Complex64>)> = (0..particles)
        .permutations(particles)
        .map(|sigma| {
            let sign = if signed && permutation_is_odd(&sigma) { -1.0 } else { 1.0 };
            let amps = sigma.iter().enumerate().map(|(a, &b)| u[(dr[b], ds[a])]).collect();
            (sigma, sign, amps)
        })
        .collect();

    let mut total = Complex64::new(0.0, 0.0);
    for (sigma, sign_s, amp_s) in &paths {
        for (rho, sign_r, amp_r) in &paths {
            let mut term = Complex64::new(sign_s * sign_r, 0.0);
            for a in 0..particles {
                term *= sm[(dr[sigma[a]], dr[rho[a]])] * amp_s[a].conj() * amp_r[a];
            }
            total += term;
        }
    }
    let norm = r.factorial_product() * s.factorial_product();
    let p = total / norm;
    if p.im.abs() > 1e-10 {
        return Err(Error::InvariantViolation(format!(
            "partial-distinguishability probability has imaginary part {:e}",
            p.im
        )));
    }
    clamp_probability(p.re)
}

/// Shape of the random relative deviations `Δ` in `U_jk (1 + Δ_jk)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeviationDistribution {
    /// `|Δ|` fixed at the mean, phase uniform on `[0, 2π)`.
    #[default]
    RandomPhase,
    /// Circular complex Gaussian scaled so that `E|Δ|` equals the mean.
    Gaussian,
}

/// Zero-mean random deviations with prescribed mean modulus `<|Δ|>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationModel {
    pub mean_abs: f64,
    pub seed: u64,
    #[serde(default)]
    pub distribution: DeviationDistribution,
}

impl PerturbationModel {
    pub fn new(mean_abs: f64, seed: u64) -> Self {
        Self {
            mean_abs,
            seed,
            distribution: DeviationDistribution::default(),
        }
    }

    pub fn with_distribution(mut self, distribution: DeviationDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.distribution {
            DeviationDistribution::RandomPhase => {
                let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(self.mean_abs, phase)
            }
            DeviationDistribution::Gaussian => {
                // |z| of a standard complex Gaussian has mean √π / 2.
                let scale = self.mean_abs * 2.0 / std::f64::consts::PI.sqrt();
                complex_gaussian(rng) * scale
            }
        }
    }
}

/// `U_jk (1 + Δ_jk)` with `Δ` drawn from the model's own seed.
pub fn perturb_unitary(u: &ComplexMatrix, model: &PerturbationModel) -> ComplexMatrix {
    perturb_unitary_with(u, model, &mut seeded_rng(model.seed, 0))
}

/// `U_jk (1 + Δ_jk)` with fresh `Δ` from `rng`. The result is generally not unitary.
pub fn perturb_unitary_with<R: Rng + ?Sized>(u: &ComplexMatrix, model: &PerturbationModel, rng: &mut R) -> ComplexMatrix {
    if model.mean_abs == 0.0 {
        return u.clone();
    }
    ComplexMatrix::from_fn(u.rows(), u.cols(), |j, k| u[(j, k)] * (Complex64::new(1.0, 0.0) + model.sample(rng)))
}

#[cfg(test)]
mod tests;
