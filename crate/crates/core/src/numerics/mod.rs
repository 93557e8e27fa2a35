//! Dense complex linear algebra: permanents, determinants, unitarity checks
//! and Haar-random unitaries.
//!
//! Random numbers come from ChaCha8 ([`rand_chacha::ChaCha8Rng`]). A run seed
//! plus a task index selects an independent stream, so parallel work is
//! reproducible regardless of thread count.

mod matrix;
mod permanent;

pub use matrix::ComplexMatrix;
pub use permanent::{
    determinant, determinant_naive, permanent, permanent_naive, permanent_ryser, NAIVE_LIMIT,
    RYSER_LIMIT,
};
pub(crate) use permanent::permutation_is_odd;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for structural checks (unitarity, symmetry relations).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for comparing probabilities.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// The generator used for every random draw in the crate.
pub type Rng64 = ChaCha8Rng;

/// Generator for task `stream` of a run seeded with `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> Rng64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for task `index`, drawn from stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seeded_rng(seed, index).random()
}

/// True iff `M` is square and `max |M†M - 1| ≤ tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    unitarity_residual(m) <= tol
}

/// `max |M†M - 1|`; infinite for non-square input.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let gram = &m.adjoint() * m;
    gram.max_abs_diff(&ComplexMatrix::identity(m.rows()))
}

/// Standard complex Gaussian sample: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed `q×q` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if q == 0 {
        return Err(Error::InvalidArgument("Haar unitary dimension must be at least 1".into()));
    }
    let z = complex_gaussian_matrix(q, q, rng).to_nalgebra();
    let qr = z.qr();
    let (q_mat, r_mat) = (qr.q(), qr.r());
    let phases: Vec<Complex64> = (0..q)
        .map(|j| {
            let d = r_mat[(j, j)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    Ok(ComplexMatrix::from_nalgebra(&q_mat).scale_columns(&phases))
}

/// [`haar_random_unitary`] drawn from a fresh generator for `seed`.
pub fn haar_random_unitary_seeded(q: usize, seed: u64) -> Result<ComplexMatrix> {
    haar_random_unitary(q, &mut seeded_rng(seed, 0))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitarity_checks() {
        assert!(is_unitary(&ComplexMatrix::identity(4), 1e-12));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        assert!(is_unitary(&bs, 1e-12));
        let scaled = bs.scale_rows(&[Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(!is_unitary(&scaled, 1e-12));
        assert!(!is_unitary(&ComplexMatrix::zeros(2, 3), 1e-12));
    }

    #[test]
    fn haar_shapes() {
        let u = haar_random_unitary_seeded(1, 9).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        for q in 2..=8 {
            let u = haar_random_unitary_seeded(q, 42).unwrap();
            assert!(is_unitary(&u, 1e-12), "q={q}");
        }
        assert!(haar_random_unitary_seeded(0, 1).is_err());
    }

    #[test]
    fn haar_is_reproducible() {
        let a = haar_random_unitary_seeded(5, 1234).unwrap();
        let b = haar_random_unitary_seeded(5, 1234).unwrap();
        let bits = |m: &ComplexMatrix| m.data().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, haar_random_unitary_seeded(5, 1235).unwrap());
    }

    #[test]
    fn haar_first_moment_vanishes() {
        // E[U] = 0 for Haar measure; Monte Carlo over 10 000 draws.
        let mut rng = seeded_rng(2024, 0);
        let mut mean = ComplexMatrix::zeros(2, 2);
        let draws = 10_000;
        for _ in 0..draws {
            let u = haar_random_unitary(2, &mut rng).unwrap();
            for j in 0..2 {
                for k in 0..2 {
                    mean[(j, k)] += u[(j, k)] / draws as f64;
                }
            }
        }
        assert!(mean.max_norm() < 0.05, "{mean:?}");
    }

    #[test]
    fn haar_second_moment() {
        // E|U_jk|^2 = 1/q.
        let mut rng = seeded_rng(7, 3);
        let q = 3;
        let mut acc = 0.0;
        let draws = 4000;
        for _ in 0..draws {
            let u = haar_random_unitary(q, &mut rng).unwrap();
            acc += u[(0, 2)].norm_sqr();
        }
        assert!((acc / draws as f64 - 1.0 / q as f64).abs() < 0.02);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = seeded_rng(5, 0).random();
        let b: u64 = seeded_rng(5, 1).random();
        assert_ne!(a, b);
        assert_eq!(derive_seed(5, 1), derive_seed(5, 1));
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
