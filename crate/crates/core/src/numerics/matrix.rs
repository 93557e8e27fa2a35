use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix stored row-major.
///
/// Holds every single-particle and many-particle matrix in the crate: the
/// unitary `U`, scattering matrices, eigenbases and distinguishability
/// matrices. Entries are always finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |j, k| if j == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for k in 0..cols {
                data.push(f(j, k));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real entries given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |j, k| if j == k { entries[j] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.rows).map(|j| self[(j, k)]).collect()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)])
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Elementwise modulus squared, `|M|^2`.
    pub fn abs_squared(&self) -> Self {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    /// Selects rows and columns by index; repeated indices repeat rows/columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |a, b| self[(rows[a], cols[b])])
    }

    /// Reorders columns: column `j` of the result is column `order[j]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, order)
    }

    pub fn scale_rows(&self, factors: &[Complex64]) -> Self {
        Self::from_fn(self.rows, self.cols, |j, k| factors[j] * self[(j, k)])
    }

    pub fn scale_columns(&self, factors: &[Complex64]) -> Self {
        Self::from_fn(self.rows, self.cols, |j, k| self[(j, k)] * factors[k])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(j, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..rhs.cols {
                    out.data[j * rhs.cols + k] += a * rhs[(l, k)];
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |j, k| self[(j, k)])
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |j, k| m[(j, k)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (j, k): (usize, usize)) -> &Complex64 {
        debug_assert!(j < self.rows && k < self.cols);
        &self.data[j * self.cols + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut Complex64 {
        debug_assert!(j < self.rows && k < self.cols);
        &mut self.data[j * self.cols + k]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on incompatible shapes; use [`ComplexMatrix::try_mul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("incompatible matrix shapes")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for j in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(j) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let data = repr.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(repr.rows, repr.cols, data).map_err(de::Error::custom)
    }
}
