//! Mode permutations, their operator matrices and exact eigenstructure.
//!
//! Indices are 0-based internally and 1-based in every textual form: cycle
//! notation `"(1 2 3)(4 5 6)(7 8)"` or a one-line array `"[2,3,1,5,6,4,8,7]"`.
//!
//! The permutation operator is `P[j][k] = δ(π(j), k)`, so `(P v)_j = v_{π(j)}`.
//! For a cycle `(c_0 … c_{l-1})` with `π(c_j) = c_{j+1}` the vector with
//! entries `λ^j / √l` on the cycle satisfies `P v = λ v` for every `l`-th root
//! of unity `λ`. These vectors form the canonical eigenbasis.

mod parse;
mod root;

pub use root::RootOfUnity;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::ModeOccupation;
use crate::numerics::ComplexMatrix;

/// A bijection on modes `0..n`, in one-line form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    /// From a 0-based image list.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for (j, &k) in image.iter().enumerate() {
            if k >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image of {} is {}, outside 1..={n}",
                    j + 1,
                    k + 1
                )));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidPermutation(format!("{} appears twice in the image", k + 1)));
            }
        }
        Ok(Self { image })
    }

    /// From a 1-based one-line list, e.g. `[2, 3, 1]` for the 3-cycle `(1 2 3)`.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        let image = one_based
            .iter()
            .map(|&k| {
                k.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("mode indices start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }

    /// From 1-based cycles on `n` modes; unlisted modes are fixed points.
    pub fn from_cycles(cycles: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut image: Vec<Option<usize>> = vec![None; n];
        for cycle in cycles {
            for (pos, &m) in cycle.iter().enumerate() {
                let next = cycle[(pos + 1) % cycle.len()];
                for &x in [m, next].iter() {
                    if x == 0 || x > n {
                        return Err(Error::InvalidPermutation(format!("mode {x} outside 1..={n}")));
                    }
                }
                if image[m - 1].replace(next - 1).is_some() {
                    return Err(Error::InvalidPermutation(format!("mode {m} appears in more than one place")));
                }
            }
        }
        Self::new(image.iter().enumerate().map(|(j, k)| k.unwrap_or(j)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    /// Cyclic shift `j ↦ j + shift (mod n)`.
    pub fn shift(n: usize, shift: usize) -> Self {
        Self {
            image: (0..n).map(|j| (j + shift) % n.max(1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    /// `π(j)` for a 0-based mode `j`.
    pub fn apply(&self, j: usize) -> usize {
        self.image[j]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.image.iter().map(|k| k + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (j, &k) in self.image.iter().enumerate() {
            inv[k] = j;
        }
        Self { image: inv }
    }

    /// `(self ∘ other)(j) = self(other(j))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch("permutations act on different mode counts".into()));
        }
        Ok(Self {
            image: other.image.iter().map(|&k| self.image[k]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(j, &k)| j == k)
    }

    pub fn cycles(&self) -> CycleDecomposition {
        cycle_decompose(self)
    }

    /// Smallest `m ≥ 1` with `π^m = id`.
    pub fn order(&self) -> u64 {
        self.cycles().order()
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation including fixed points, so the mode count survives a round trip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.cycles(), f)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_permutation(s, None)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            OneLine(Vec<usize>),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s.parse(),
            Repr::OneLine(v) => Permutation::from_one_line(&v),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Parses cycle notation on exactly `n` modes (modes not mentioned are fixed).
pub fn parse_permutation_with_len(s: &str, n: usize) -> Result<Permutation> {
    parse::parse_permutation(s, Some(n))
}

/// Disjoint cycles of a permutation, 0-based, each starting at its smallest
/// element and sorted by that element. Fixed points are 1-cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<usize>>,
}

impl CycleDecomposition {
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles.iter().fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }

    /// Index of the cycle containing mode `j`.
    pub fn cycle_of(&self, j: usize) -> Option<usize> {
        self.cycles.iter().position(|c| c.contains(&j))
    }

    /// Cycles in 1-based numbering.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.cycles.iter().map(|c| c.iter().map(|j| j + 1).collect()).collect()
    }
}

impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in &self.cycles {
            write!(f, "(")?;
            for (i, j) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", j + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

pub fn cycle_decompose(p: &Permutation) -> CycleDecomposition {
    let n = p.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            cycle.push(j);
            j = p.apply(j);
        }
        cycles.push(cycle);
    }
    CycleDecomposition { cycles }
}

/// The 0/1 matrix `P[j][k] = δ(π(j), k)`.
pub fn operator_matrix(p: &Permutation) -> ComplexMatrix {
    ComplexMatrix::from_fn(p.len(), p.len(), |j, k| {
        if p.apply(j) == k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Whether `P r = r`, i.e. `r_{π(j)} = r_j` for every mode.
pub fn is_invariant(p: &Permutation, r: &ModeOccupation) -> Result<bool> {
    if p.len() != r.modes() {
        return Err(Error::DimensionMismatch(format!(
            "permutation acts on {} modes, occupation has {}",
            p.len(),
            r.modes()
        )));
    }
    Ok((0..p.len()).all(|j| r[p.apply(j)] == r[j]))
}

/// Like [`is_invariant`] but reports the first offending cycle.
pub fn check_invariant(p: &Permutation, r: &ModeOccupation) -> Result<()> {
    if is_invariant(p, r)? {
        return Ok(());
    }
    let cycles = p.cycles();
    let bad = cycles
        .cycles()
        .iter()
        .find(|c| c.iter().any(|&j| r[j] != r[c[0]]))
        .expect("a non-invariant occupation has a non-constant cycle");
    Err(Error::NotInvariant {
        state: r.to_string(),
        cycle: CycleDecomposition { cycles: vec![bad.clone()] }.to_string(),
    })
}

/// Which cycle and which root `k` (eigenvalue `exp(i2πk/l)`) an eigenvector column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnOrigin {
    pub cycle: usize,
    pub root: usize,
}

/// Eigendecomposition `P = A D A†` with exact eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure {
    /// Diagonal of `D`; entry `k` belongs to column `k` of `eigenvectors`.
    pub eigenvalues: Vec<RootOfUnity>,
    /// The unitary `A`, one eigenvector per column.
    pub eigenvectors: ComplexMatrix,
    pub column_origin: Vec<ColumnOrigin>,
}

impl EigenStructure {
    /// `D` as a complex diagonal.
    pub fn eigenvalue_phases(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|l| l.to_complex()).collect()
    }

    /// `A D A†`, which should reproduce the permutation operator.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let ad = self.eigenvectors.scale_columns(&self.eigenvalue_phases());
        &ad * &self.eigenvectors.adjoint()
    }
}

/// Canonical analytic eigenbasis: for cycle `c` of length `l` and `k ∈ 0..l`,
/// the column with entries `exp(i2πkj/l)/√l` at mode `c_j` and eigenvalue
/// `exp(i2πk/l)`. Columns are ordered by cycle, then `k`.
pub fn eigenstructure(p: &Permutation) -> EigenStructure {
    let n = p.len();
    let cycles = p.cycles();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut column_origin = Vec::with_capacity(n);
    let mut col = 0;
    for (ci, cycle) in cycles.cycles().iter().enumerate() {
        let l = cycle.len();
        let norm = 1.0 / (l as f64).sqrt();
        for k in 0..l {
            let lambda = RootOfUnity::new(k as i64, l as u64);
            for (j, &mode) in cycle.iter().enumerate() {
                eigenvectors[(mode, col)] = lambda.pow(j as u64).to_complex() * norm;
            }
            eigenvalues.push(lambda);
            column_origin.push(ColumnOrigin { cycle: ci, root: k });
            col += 1;
        }
    }
    EigenStructure {
        eigenvalues,
        eigenvectors,
        column_origin,
    }
}

/// `Z = P Θ P† Θ†` for a diagonal `Θ`, returned as its diagonal `θ_{π(j)} / θ_j`.
pub fn local_phase_matrix(p: &Permutation, theta: &[Complex64]) -> Vec<Complex64> {
    (0..p.len()).map(|j| theta[p.apply(j)] * theta[j].conj()).collect()
}

/// `max |P U - Z U D|` with `Z = P Θ P† Θ†`; zero when `U` has the symmetry.
pub fn symmetry_residual(
    p: &Permutation,
    u: &ComplexMatrix,
    theta: &[Complex64],
    d: &[RootOfUnity],
) -> Result<f64> {
    let n = p.len();
    if u.rows() != n || u.cols() != n || theta.len() != n || d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation on {n} modes, U is {}x{}, Θ has {}, D has {}",
            u.rows(),
            u.cols(),
            theta.len(),
            d.len()
        )));
    }
    let z = local_phase_matrix(p, theta);
    let lambdas: Vec<Complex64> = d.iter().map(|l| l.to_complex()).collect();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let lhs = u[(p.apply(j), k)];
            let rhs = z[j] * u[(j, k)] * lambdas[k];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}
