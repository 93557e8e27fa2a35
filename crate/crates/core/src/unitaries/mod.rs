//! Unitaries `U = Θ A Σ` built from an eigenbasis `A` of a permutation
//! operator, and the discrete Fourier transform as a special case.
//!
//! Every such `U` satisfies `P U = Z U D` with `Z = P Θ P† Θ†`, which is what
//! the suppression laws rest on. The freedom in `A` is exercised two ways:
//! each degenerate eigenspace (eigenvalues compared exactly) can be rotated
//! by a Haar-random unitary, and columns can be reordered, with `D`
//! following the columns.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{haar_random_unitary, is_unitary, seeded_rng, ComplexMatrix, STRUCTURAL_TOL};
use crate::permutations::{eigenstructure, symmetry_residual, Permutation, RootOfUnity};

/// Everything needed to reproduce one member of the unitary class of a permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySpec {
    pub permutation: Permutation,
    /// Phases of the diagonal `Θ` (input modes); empty means `Θ = 1`.
    #[serde(default, rename = "theta", skip_serializing_if = "Vec::is_empty")]
    pub theta_phases: Vec<f64>,
    /// Phases of the diagonal `Σ` (output modes); empty means `Σ = 1`.
    #[serde(default, rename = "sigma", skip_serializing_if = "Vec::is_empty")]
    pub sigma_phases: Vec<f64>,
    /// Seed for the Haar rotations of degenerate eigenspaces; none keeps the canonical basis.
    #[serde(default, rename = "seed", skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
    /// Column `j` of `A` is canonical column `column_order[j]` (1-based in JSON).
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "one_based_option"
    )]
    pub column_order: Option<Vec<usize>>,
}

pub(crate) mod one_based_option {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<usize>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(cols) => s.collect_seq(cols.iter().map(|c| c + 1)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<usize>>, D::Error> {
        let v: Option<Vec<usize>> = Option::deserialize(d)?;
        v.map(|cols| {
            cols.into_iter()
                .map(|c| c.checked_sub(1).ok_or_else(|| serde::de::Error::custom("column indices start at 1")))
                .collect()
        })
        .transpose()
    }
}

impl UnitarySpec {
    /// `Θ = Σ = 1`, canonical basis, canonical column order.
    pub fn new(permutation: Permutation) -> Self {
        Self {
            permutation,
            theta_phases: Vec::new(),
            sigma_phases: Vec::new(),
            rotation_seed: None,
            column_order: None,
        }
    }

    pub fn with_rotation_seed(mut self, seed: u64) -> Self {
        self.rotation_seed = Some(seed);
        self
    }

    /// 0-based column order.
    pub fn with_column_order(mut self, order: Vec<usize>) -> Self {
        self.column_order = Some(order);
        self
    }

    pub fn with_phases(mut self, theta: Vec<f64>, sigma: Vec<f64>) -> Self {
        self.theta_phases = theta;
        self.sigma_phases = sigma;
        self
    }

    pub fn modes(&self) -> usize {
        self.permutation.len()
    }

    /// Lists every problem with the spec.
    pub fn problems(&self) -> Vec<String> {
        let n = self.modes();
        let mut out = Vec::new();
        for (name, phases) in [("theta", &self.theta_phases), ("sigma", &self.sigma_phases)] {
            if !phases.is_empty() && phases.len() != n {
                out.push(format!("{name} has {} phases, expected {n}", phases.len()));
            }
            if phases.iter().any(|p| !p.is_finite()) {
                out.push(format!("{name} has a non-finite phase"));
            }
        }
        if let Some(order) = &self.column_order {
            if Permutation::new(order.clone()).is_err() || order.len() != n {
                out.push(format!("column_order must be a permutation of 1..={n}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().first() {
            Some(p) => Err(Error::InvalidArgument(p.clone())),
            None => Ok(()),
        }
    }

    /// The diagonal of `Θ`.
    pub fn theta(&self) -> Vec<Complex64> {
        phases_or_ones(&self.theta_phases, self.modes())
    }

    pub fn sigma(&self) -> Vec<Complex64> {
        phases_or_ones(&self.sigma_phases, self.modes())
    }
}

fn phases_or_ones(phases: &[f64], n: usize) -> Vec<Complex64> {
    if phases.is_empty() {
        vec![Complex64::new(1.0, 0.0); n]
    } else {
        phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
    }
}

/// A unitary of the class together with the eigenvalue attached to each column.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedUnitary {
    pub matrix: ComplexMatrix,
    /// `λ_k` for column `k` (after any reordering).
    pub eigenvalues: Vec<RootOfUnity>,
    pub spec: UnitarySpec,
}

impl ConstructedUnitary {
    pub fn permutation(&self) -> &Permutation {
        &self.spec.permutation
    }

    pub fn theta(&self) -> Vec<Complex64> {
        self.spec.theta()
    }

    /// `max |P U - Z U D|`.
    pub fn symmetry_residual(&self) -> f64 {
        symmetry_residual(self.permutation(), &self.matrix, &self.theta(), &self.eigenvalues)
            .expect("dimensions fixed at construction")
    }
}

/// Builds `U = Θ A Σ`: canonical eigenbasis, Haar rotation inside every
/// eigenspace of dimension at least two (if seeded), column reordering, then
/// the diagonal phases.
pub fn build_unitary(spec: &UnitarySpec) -> Result<ConstructedUnitary> {
    spec.validate()?;
    let n = spec.modes();
    let es = eigenstructure(&spec.permutation);
    let mut a = es.eigenvectors;
    let mut d = es.eigenvalues;

    if let Some(seed) = spec.rotation_seed {
        let mut rng = seeded_rng(seed, 0);
        let mut distinct: Vec<RootOfUnity> = d.clone();
        distinct.sort();
        distinct.dedup();
        for lambda in distinct {
            let cols: Vec<usize> = (0..n).filter(|&k| d[k] == lambda).collect();
            if cols.len() < 2 {
                continue;
            }
            let rotation = haar_random_unitary(cols.len(), &mut rng)?;
            let block = a.select(&(0..n).collect::<Vec<_>>(), &cols);
            let rotated = &block * &rotation;
            for (b, &k) in cols.iter().enumerate() {
                for j in 0..n {
                    a[(j, k)] = rotated[(j, b)];
                }
            }
        }
    }

    if let Some(order) = &spec.column_order {
        a = a.permute_columns(order);
        d = order.iter().map(|&k| d[k]).collect();
    }

    let matrix = a.scale_rows(&spec.theta()).scale_columns(&spec.sigma());
    let built = ConstructedUnitary {
        matrix,
        eigenvalues: d,
        spec: spec.clone(),
    };
    if !is_unitary(&built.matrix, STRUCTURAL_TOL) {
        return Err(Error::InvariantViolation("constructed matrix is not unitary".into()));
    }
    let residual = built.symmetry_residual();
    if residual > STRUCTURAL_TOL {
        return Err(Error::InvariantViolation(format!("symmetry residual {residual:e}")));
    }
    Ok(built)
}

/// `U_jk = exp(i 2π (j-1)(k-1) / n) / √n`.
pub fn fourier_unitary(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("Fourier unitary needs n ≥ 1".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |j, k| {
        RootOfUnity::new(((j * k) % n) as i64, n as u64).to_complex() * norm
    }))
}

/// The cyclic shift `π(j) = j + n/m (mod n)` of order `m` and the eigenvalue
/// `λ_k = exp(i 2π (k-1)/m)` of Fourier column `k`, checked entrywise against
/// `U_{π(j),k} = U_{j,k} λ_k`.
pub fn fourier_symmetry(n: usize, m: usize) -> Result<(Permutation, Vec<RootOfUnity>)> {
    if m < 2 || n == 0 || n % m != 0 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 2 and divide n = {n}")));
    }
    let p = Permutation::shift(n, n / m);
    let d: Vec<RootOfUnity> = (0..n).map(|k| RootOfUnity::new((k % m) as i64, m as u64)).collect();
    let u = fourier_unitary(n)?;
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let residual = symmetry_residual(&p, &u, &ones, &d)?;
    if residual > STRUCTURAL_TOL {
        return Err(Error::InvariantViolation(format!("Fourier symmetry residual {residual:e}")));
    }
    Ok((p, d))
}

/// The Fourier unitary packaged with its shift symmetry of order `m`.
pub fn fourier_constructed(n: usize, m: usize) -> Result<ConstructedUnitary> {
    let (p, d) = fourier_symmetry(n, m)?;
    Ok(ConstructedUnitary {
        matrix: fourier_unitary(n)?,
        eigenvalues: d,
        spec: UnitarySpec::new(p),
    })
}
