//! Fock-state combinatorics: occupation lists, assignment lists and output
//! enumeration.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particle counts per mode, `r` or `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeOccupation(Vec<usize>);

impl ModeOccupation {
    pub fn new(occupations: Vec<usize>) -> Self {
        Self(occupations)
    }

    /// Number of modes `n`.
    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Number of particles `N`.
    pub fn particles(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// At most one particle per mode.
    pub fn is_fermionic(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    /// Errors with the first multiply-occupied mode.
    pub fn require_fermionic(&self) -> Result<()> {
        match self.0.iter().position(|&c| c > 1) {
            Some(j) => Err(Error::MultipleOccupation {
                mode: j + 1,
                count: self.0[j],
            }),
            None => Ok(()),
        }
    }

    pub fn to_assignment(&self) -> ModeAssignment {
        occupation_to_assignment(self)
    }

    /// `∏_j r_j!`
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&c| crate::numerics::factorial(c)).product()
    }
}

impl Index<usize> for ModeOccupation {
    type Output = usize;

    fn index(&self, j: usize) -> &usize {
        &self.0[j]
    }
}

impl fmt::Display for ModeOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for ModeOccupation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s.trim()).map_err(|e| Error::Parse {
            position: e.column().saturating_sub(1),
            message: format!("expected an integer array like [1,1,0]: {e}"),
        })
    }
}

/// Sorted list of the mode occupied by each particle, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeAssignment(Vec<usize>);

impl ModeAssignment {
    /// From 0-based mode labels in any order.
    pub fn new(mut modes: Vec<usize>) -> Self {
        modes.sort_unstable();
        Self(modes)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|m| m + 1).collect()
    }
}

/// `d(r)`: mode `j` repeated `r_j` times.
pub fn occupation_to_assignment(r: &ModeOccupation) -> ModeAssignment {
    ModeAssignment(
        r.0.iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c))
            .collect(),
    )
}

/// Counts how often each mode occurs in `d`.
pub fn assignment_to_occupation(d: &ModeAssignment, n: usize) -> Result<ModeOccupation> {
    let mut occ = vec![0; n];
    for &m in &d.0 {
        *occ.get_mut(m).ok_or(Error::ModeOutOfRange { mode: m + 1, n })? += 1;
    }
    Ok(ModeOccupation(occ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleType {
    Boson,
    Fermion,
    #[serde(rename = "dist", alias = "distinguishable")]
    Distinguishable,
}

impl ParticleType {
    pub fn label(self) -> &'static str {
        match self {
            ParticleType::Boson => "boson",
            ParticleType::Fermion => "fermion",
            ParticleType::Distinguishable => "dist",
        }
    }
}

impl fmt::Display for ParticleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ParticleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "b" => Ok(ParticleType::Boson),
            "fermion" | "f" => Ok(ParticleType::Fermion),
            "dist" | "distinguishable" | "d" => Ok(ParticleType::Distinguishable),
            other => Err(Error::InvalidArgument(format!("unknown particle type {other:?}"))),
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of output configurations: `C(n+N-1, N)` for bosons and
/// distinguishable particles, `C(n, N)` for fermions.
pub fn output_count(n: usize, particles: usize, t: ParticleType) -> u128 {
    match t {
        ParticleType::Fermion => binomial(n as u64, particles as u64),
        _ => binomial((n + particles) as u64 - 1, particles as u64),
    }
}

/// Streams every output configuration of `N` particles in `n` modes, in
/// lexicographic order of the mode assignment lists.
pub fn enumerate_outputs(n: usize, particles: usize, t: ParticleType) -> Result<Outputs> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    let fermionic = t == ParticleType::Fermion;
    if fermionic && particles > n {
        return Err(Error::InvalidArgument(format!(
            "{particles} fermions do not fit into {n} modes"
        )));
    }
    let first = if fermionic {
        (0..particles).collect()
    } else {
        vec![0; particles]
    };
    Ok(Outputs {
        n,
        fermionic,
        next: Some(first),
        remaining: output_count(n, particles, t),
    })
}

#[derive(Debug, Clone)]
pub struct Outputs {
    n: usize,
    fermionic: bool,
    next: Option<Vec<usize>>,
    remaining: u128,
}

impl Outputs {
    fn advance(&self, d: &[usize]) -> Option<Vec<usize>> {
        let len = d.len();
        let mut d = d.to_vec();
        for i in (0..len).rev() {
            let limit = if self.fermionic { self.n - (len - i) } else { self.n - 1 };
            if d[i] < limit {
                d[i] += 1;
                for j in i + 1..len {
                    d[j] = if self.fermionic { d[j - 1] + 1 } else { d[i] };
                }
                return Some(d);
            }
        }
        None
    }
}

impl Iterator for Outputs {
    type Item = ModeOccupation;

    fn next(&mut self) -> Option<ModeOccupation> {
        let d = self.next.take()?;
        self.next = self.advance(&d);
        self.remaining -= 1;
        Some(assignment_to_occupation(&ModeAssignment(d), self.n).expect("modes in range"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}
