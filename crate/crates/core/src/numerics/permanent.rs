use itertools::Itertools;
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Largest size accepted by the factorial-time oracles.
pub const NAIVE_LIMIT: usize = 10;
/// Largest size accepted by [`permanent_ryser`].
pub const RYSER_LIMIT: usize = 30;

fn check_size(m: &ComplexMatrix, method: &'static str, limit: usize) -> Result<usize> {
    let n = m.require_square()?;
    if n > limit {
        return Err(Error::TooLarge { method, size: n, limit });
    }
    Ok(n)
}

/// Sum over all permutations `σ` of `χ(σ) ∏_α M[α, σ(α)]`, by explicit enumeration.
fn leibniz_sum(m: &ComplexMatrix, n: usize, signed: bool) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in (0..n).permutations(n) {
        let mut term = Complex64::new(1.0, 0.0);
        for (alpha, &beta) in sigma.iter().enumerate() {
            term *= m[(alpha, beta)];
        }
        if signed && permutation_is_odd(&sigma) {
            total -= term;
        } else {
            total += term;
        }
    }
    total
}

/// Parity of a permutation given in one-line (0-based) form.
pub(crate) fn permutation_is_odd(sigma: &[usize]) -> bool {
    let mut seen = vec![false; sigma.len()];
    let mut transpositions = 0usize;
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut j = start;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = sigma[j];
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 1
}

/// Permanent by enumeration of all `N!` permutations. Oracle for small `N`.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let n = check_size(m, "permanent_naive", NAIVE_LIMIT)?;
    Ok(leibniz_sum(m, n, false))
}

/// Determinant by the Leibniz formula (signed permutation sum). Oracle for
/// [`determinant`].
pub fn determinant_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let n = check_size(m, "determinant_naive", NAIVE_LIMIT)?;
    Ok(leibniz_sum(m, n, true))
}

/// Permanent by Ryser's inclusion-exclusion formula,
///
/// `perm(M) = (-1)^N Σ_{S ⊆ cols} (-1)^{|S|} ∏_α Σ_{β ∈ S} M[α, β]`,
///
/// visiting subsets in Gray-code order so each step adds or removes a single
/// column from the running row sums. `O(2^N · N)` operations.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let n = check_size(m, "permanent_ryser", RYSER_LIMIT)?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_subset = vec![false; n];
    let mut subset_size = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        if in_subset[col] {
            for (alpha, sum) in row_sums.iter_mut().enumerate() {
                *sum -= m[(alpha, col)];
            }
            subset_size -= 1;
        } else {
            for (alpha, sum) in row_sums.iter_mut().enumerate() {
                *sum += m[(alpha, col)];
            }
            subset_size += 1;
        }
        in_subset[col] = !in_subset[col];
        let product = row_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &z| acc * z);
        if (n - subset_size) % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    Ok(total)
}

/// Permanent with the kernel used throughout the crate.
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    permanent_ryser(m)
}

/// Determinant by LU elimination with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> Result<Complex64> {
    let n = m.require_square()?;
    let mut a: Vec<Complex64> = m.data().to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .expect("non-empty pivot range");
        if a[pivot * n + col].norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col + 1..n {
                let upper = a[col * n + k];
                a[row * n + k] -= factor * upper;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{complex_gaussian_matrix, seeded_rng};

    fn ones(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(1.0, 0.0))
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn naive_small_cases() {
        assert_eq!(permanent_naive(&ComplexMatrix::identity(2)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(permanent_naive(&ones(2)).unwrap(), Complex64::new(2.0, 0.0));
        for n in 0..=6 {
            assert_eq!(permanent_naive(&ones(n)).unwrap().re, factorial(n));
        }
    }

    #[test]
    fn ryser_small_cases() {
        assert_eq!(permanent_ryser(&ComplexMatrix::identity(3)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(permanent_ryser(&ones(3)).unwrap(), Complex64::new(6.0, 0.0));
        assert_eq!(permanent_ryser(&ComplexMatrix::zeros(0, 0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn ryser_matches_naive_on_gaussian_5x5() {
        let mut rng = seeded_rng(11, 0);
        for _ in 0..100 {
            let m = complex_gaussian_matrix(5, 5, &mut rng);
            let a = permanent_ryser(&m).unwrap();
            let b = permanent_naive(&m).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn size_limits_and_shape() {
        assert!(matches!(
            permanent_naive(&ComplexMatrix::identity(11)),
            Err(Error::TooLarge { limit: 10, .. })
        ));
        assert!(matches!(
            permanent_ryser(&ComplexMatrix::identity(31)),
            Err(Error::TooLarge { limit: 30, .. })
        ));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(permanent_naive(&rect), Err(Error::NotSquare { .. })));
        assert!(matches!(permanent_ryser(&rect), Err(Error::NotSquare { .. })));
        assert!(matches!(determinant(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn zero_row_gives_zero_permanent() {
        let mut rng = seeded_rng(3, 0);
        let mut m = complex_gaussian_matrix(6, 6, &mut rng);
        for k in 0..6 {
            m[(2, k)] = Complex64::new(0.0, 0.0);
        }
        assert_eq!(permanent_naive(&m).unwrap(), Complex64::new(0.0, 0.0));
        assert!(permanent_ryser(&m).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn determinant_closed_forms() {
        for n in 0..6 {
            assert_eq!(determinant(&ComplexMatrix::identity(n)).unwrap(), Complex64::new(1.0, 0.0));
        }
        let (a, b, c, d) = (
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.3),
            Complex64::new(2.0, -1.0),
            Complex64::new(0.7, 0.1),
        );
        let m = ComplexMatrix::new(2, 2, vec![a, b, c, d]).unwrap();
        assert!((determinant(&m).unwrap() - (a * d - b * c)).norm() < 1e-14);

        let mut rng = seeded_rng(5, 0);
        let mut s = complex_gaussian_matrix(4, 4, &mut rng);
        for k in 0..4 {
            s[(3, k)] = s[(1, k)];
        }
        assert!(determinant(&s).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn determinant_matches_signed_permanent() {
        let mut rng = seeded_rng(17, 0);
        for n in 1..=6 {
            for _ in 0..10 {
                let m = complex_gaussian_matrix(n, n, &mut rng);
                let lu = determinant(&m).unwrap();
                let leibniz = determinant_naive(&m).unwrap();
                assert!((lu - leibniz).norm() <= 1e-10 * leibniz.norm().max(1.0));
            }
        }
    }

    #[test]
    fn parity() {
        assert!(!permutation_is_odd(&[0, 1, 2]));
        assert!(permutation_is_odd(&[1, 0, 2]));
        assert!(!permutation_is_odd(&[1, 2, 0]));
    }
}
