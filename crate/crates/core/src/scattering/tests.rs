use super::*;
use crate::fock::enumerate_outputs;
use crate::numerics::{complex_gaussian_matrix, haar_random_unitary, is_unitary, seeded_rng, unitarity_residual};

fn occ(v: &[usize]) -> ModeOccupation {
    ModeOccupation::new(v.to_vec())
}

fn beam_splitter() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
}

#[test]
fn scattering_matrix_examples() {
    let mut rng = seeded_rng(1, 0);
    let u = haar_random_unitary(4, &mut rng).unwrap();
    let all = occ(&[1, 1, 1, 1]);
    assert_eq!(scattering_matrix(&u, &all, &all).unwrap(), u);

    let u2 = haar_random_unitary(2, &mut rng).unwrap();
    let m = scattering_matrix(&u2, &occ(&[2, 0]), &occ(&[1, 1])).unwrap();
    let expected = ComplexMatrix::new(2, 2, vec![u2[(0, 0)], u2[(0, 1)], u2[(0, 0)], u2[(0, 1)]]).unwrap();
    assert_eq!(m, expected);

    let u8 = haar_random_unitary(8, &mut rng).unwrap();
    let m = scattering_matrix(&u8, &occ(&[1, 1, 1, 0, 0, 0, 1, 1]), &occ(&[0, 2, 0, 1, 1, 1, 0, 0])).unwrap();
    assert_eq!((m.rows(), m.cols()), (5, 5));
    assert_eq!(m.column(0), m.column(1));
    assert_eq!(m[(3, 2)], u8[(6, 3)]);

    assert_eq!(
        scattering_matrix(&u2, &occ(&[1, 1]), &occ(&[1, 0])),
        Err(Error::ParticleNumber { input: 2, output: 1 })
    );
}

#[test]
fn hong_ou_mandel() {
    let u = beam_splitter();
    let r = occ(&[1, 1]);
    assert!(prob_boson(&u, &r, &occ(&[1, 1])).unwrap() <= 1e-20);
    assert!((prob_boson(&u, &r, &occ(&[2, 0])).unwrap() - 0.5).abs() < 1e-12);
    assert!((prob_boson(&u, &r, &occ(&[0, 2])).unwrap() - 0.5).abs() < 1e-12);

    assert!((prob_fermion(&u, &r, &r).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(
        prob_fermion(&u, &r, &occ(&[2, 0])),
        Err(Error::MultipleOccupation { mode: 1, count: 2 })
    );

    assert!((prob_distinguishable(&u, &r, &occ(&[1, 1])).unwrap() - 0.5).abs() < 1e-12);
    assert!((prob_distinguishable(&u, &r, &occ(&[2, 0])).unwrap() - 0.25).abs() < 1e-12);
    assert!((prob_distinguishable(&u, &r, &occ(&[0, 2])).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn identity_routes_classically() {
    let u = ComplexMatrix::identity(4);
    let r = occ(&[2, 1, 0, 1]);
    for s in enumerate_outputs(4, 4, ParticleType::Boson).unwrap() {
        let expected = if s == r { 1.0 } else { 0.0 };
        assert_eq!(prob_boson(&u, &r, &s).unwrap(), expected);
        assert_eq!(prob_distinguishable(&u, &r, &s).unwrap(), expected);
    }
    let rf = occ(&[1, 0, 1, 1]);
    assert_eq!(prob_fermion(&u, &rf, &rf).unwrap(), 1.0);
}

#[test]
fn fermions_through_full_unitary() {
    let mut rng = seeded_rng(4, 0);
    let u = haar_random_unitary(4, &mut rng).unwrap();
    let all = occ(&[1, 1, 1, 1]);
    assert!((prob_fermion(&u, &all, &all).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn normalization_over_haar_unitaries() {
    let mut rng = seeded_rng(50, 0);
    for trial in 0..50 {
        let n = 2 + trial % 5;
        let particles = 1 + trial % 4;
        let u = haar_random_unitary(n, &mut rng).unwrap();
        let mut r = vec![0; n];
        for a in 0..particles {
            r[(a * 2) % n] += 1;
        }
        let r = ModeOccupation::new(r);
        for t in [ParticleType::Boson, ParticleType::Distinguishable] {
            let total: f64 = enumerate_outputs(n, particles, t)
                .unwrap()
                .map(|s| probability(t, &u, &r, &s).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "{t} n={n} N={particles}: {total}");
        }
        if particles <= n {
            let rf = ModeOccupation::new((0..n).map(|j| usize::from(j < particles)).collect());
            let total: f64 = enumerate_outputs(n, particles, ParticleType::Fermion)
                .unwrap()
                .map(|s| prob_fermion(&u, &rf, &s).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn permutation_matrix_gives_indicator() {
    let p: crate::permutations::Permutation = "(1 3 2)(4 5)".parse().unwrap();
    let u = crate::permutations::operator_matrix(&p);
    let r = occ(&[1, 1, 0, 1, 0]);
    for s in enumerate_outputs(5, 3, ParticleType::Boson).unwrap() {
        let p_b = prob_boson(&u, &r, &s).unwrap();
        assert!(p_b == 0.0 || p_b == 1.0);
    }
    let hits = enumerate_outputs(5, 3, ParticleType::Boson)
        .unwrap()
        .filter(|s| prob_boson(&u, &r, s).unwrap() == 1.0)
        .count();
    assert_eq!(hits, 1);
}

#[test]
fn local_phases_do_not_matter() {
    let mut rng = seeded_rng(8, 0);
    let u = haar_random_unitary(4, &mut rng).unwrap();
    let left: Vec<Complex64> = (0..4).map(|j| Complex64::from_polar(1.0, 0.7 * j as f64 + 0.1)).collect();
    let right: Vec<Complex64> = (0..4).map(|j| Complex64::from_polar(1.0, -1.3 * j as f64)).collect();
    let v = u.scale_rows(&left).scale_columns(&right);
    let r = occ(&[1, 0, 1, 1]);
    for s in enumerate_outputs(4, 3, ParticleType::Boson).unwrap() {
        assert!((prob_boson(&u, &r, &s).unwrap() - prob_boson(&v, &r, &s).unwrap()).abs() < 1e-12);
        assert!((prob_distinguishable(&u, &r, &s).unwrap() - prob_distinguishable(&v, &r, &s).unwrap()).abs() < 1e-12);
        if s.is_fermionic() {
            assert!((prob_fermion(&u, &r, &s).unwrap() - prob_fermion(&v, &r, &s).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn relabeling_modes_is_a_symmetry() {
    let mut rng = seeded_rng(9, 0);
    let u = haar_random_unitary(4, &mut rng).unwrap();
    let relabel = [2usize, 0, 3, 1];
    let v = ComplexMatrix::from_fn(4, 4, |j, k| u[(relabel[j], relabel[k])]);
    let permute = |x: &ModeOccupation| ModeOccupation::new((0..4).map(|j| x[relabel[j]]).collect());
    let r = occ(&[2, 0, 1, 0]);
    for s in enumerate_outputs(4, 3, ParticleType::Boson).unwrap() {
        let a = prob_boson(&u, &r, &s).unwrap();
        let b = prob_boson(&v, &permute(&r), &permute(&s)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn partial_limits_on_random_instances() {
    let mut rng = seeded_rng(10, 0);
    for trial in 0..20 {
        let n = 3 + trial % 3;
        let u = haar_random_unitary(n, &mut rng).unwrap();
        let particles = 2 + trial % 2;
        let r = ModeOccupation::new((0..n).map(|j| usize::from(j < particles)).collect());
        let ones = DistinguishabilityMatrix::indistinguishable(n);
        let eye = DistinguishabilityMatrix::distinguishable(n);
        for s in enumerate_outputs(n, particles, ParticleType::Boson).unwrap() {
            let pb = prob_partial(&u, &r, &s, &ones, ParticleType::Boson).unwrap();
            assert!((pb - prob_boson(&u, &r, &s).unwrap()).abs() < 1e-10);
            let pd = prob_partial(&u, &r, &s, &eye, ParticleType::Boson).unwrap();
            assert!((pd - prob_distinguishable(&u, &r, &s).unwrap()).abs() < 1e-10);
            if s.is_fermionic() {
                let pf = prob_partial(&u, &r, &s, &ones, ParticleType::Fermion).unwrap();
                assert!((pf - prob_fermion(&u, &r, &s).unwrap()).abs() < 1e-10);
                let pfd = prob_partial(&u, &r, &s, &eye, ParticleType::Fermion).unwrap();
                assert!((pfd - prob_distinguishable(&u, &r, &s).unwrap()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn partial_with_shared_input_mode() {
    // Particles sharing a mode stay indistinguishable even for S = 1.
    let mut rng = seeded_rng(12, 0);
    let u = haar_random_unitary(3, &mut rng).unwrap();
    let r = occ(&[2, 0, 0]);
    let eye = DistinguishabilityMatrix::distinguishable(3);
    for s in enumerate_outputs(3, 2, ParticleType::Boson).unwrap() {
        let p = prob_partial(&u, &r, &s, &eye, ParticleType::Boson).unwrap();
        assert!((p - prob_boson(&u, &r, &s).unwrap()).abs() < 1e-12);
    }
}

fn hom_overlap(x: Complex64) -> DistinguishabilityMatrix {
    DistinguishabilityMatrix::new(
        ComplexMatrix::new(2, 2, vec![Complex64::new(1.0, 0.0), x, x.conj(), Complex64::new(1.0, 0.0)]).unwrap(),
    )
    .unwrap()
}

#[test]
fn hom_partial_closed_form() {
    // Two-path algebra: P(1,1) = (1 - |S12|^2) / 2.
    let u = beam_splitter();
    let r = occ(&[1, 1]);
    let mut last = -1.0;
    for i in 0..=20 {
        let overlap = 1.0 - i as f64 / 20.0;
        let s12 = Complex64::from_polar(overlap, 0.4);
        let p = prob_partial(&u, &r, &r, &hom_overlap(s12), ParticleType::Boson).unwrap();
        assert!((p - (1.0 - overlap * overlap) / 2.0).abs() < 1e-12);
        assert!(p >= last);
        last = p;
    }
    assert!(last - 0.5 < 1e-12);
    // small-ε slope: P ≈ ε
    for eps in [1e-4, 1e-3] {
        let p = prob_partial(&u, &r, &r, &hom_overlap(Complex64::new(1.0 - eps, 0.0)), ParticleType::Boson).unwrap();
        assert!((p / eps - 1.0).abs() < 1e-3);
    }
}

#[test]
fn partial_rejects_bad_inputs() {
    let u = beam_splitter();
    let ones = DistinguishabilityMatrix::indistinguishable(2);
    assert!(matches!(
        prob_partial(&u, &occ(&[2, 0]), &occ(&[1, 1]), &ones, ParticleType::Fermion),
        Err(Error::MultipleOccupation { .. })
    ));
    assert!(prob_partial(&u, &occ(&[1, 1]), &occ(&[1, 1]), &ones, ParticleType::Distinguishable).is_err());
    let big = ComplexMatrix::identity(7);
    let all = occ(&[1; 7]);
    assert!(matches!(
        prob_partial(&big, &all, &all, &DistinguishabilityMatrix::indistinguishable(7), ParticleType::Boson),
        Err(Error::TooLarge { .. })
    ));
    assert!(prob_partial(&u, &occ(&[1, 1]), &occ(&[1, 1]), &DistinguishabilityMatrix::indistinguishable(3), ParticleType::Boson).is_err());
}

#[test]
fn distinguishability_validation() {
    let one = Complex64::new(1.0, 0.0);
    let mk = |v: Vec<Complex64>| ComplexMatrix::new(2, 2, v).unwrap();
    assert!(DistinguishabilityMatrix::new(mk(vec![one, Complex64::new(0.5, 0.1), Complex64::new(0.5, -0.1), one])).is_ok());
    // not Hermitian
    assert!(DistinguishabilityMatrix::new(mk(vec![one, Complex64::new(0.5, 0.1), Complex64::new(0.5, 0.1), one])).is_err());
    // diagonal
    assert!(DistinguishabilityMatrix::new(mk(vec![one * 0.9, Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0), one])).is_err());
    // modulus
    assert!(DistinguishabilityMatrix::new(mk(vec![one, one * 1.1, one * 1.1, one])).is_err());
    // not PSD: Φ1 ∥ Φ2 and Φ1 ∥ Φ3 but Φ2 ⟂ Φ3
    let bad = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]]).unwrap();
    assert!(DistinguishabilityMatrix::new(bad.clone()).is_err());
    let (fixed, repaired) = DistinguishabilityMatrix::repair(&bad).unwrap();
    assert!(repaired);
    assert!(DistinguishabilityMatrix::new(fixed.matrix().clone()).is_ok());
    let (same, repaired) = DistinguishabilityMatrix::repair(DistinguishabilityMatrix::indistinguishable(3).matrix()).unwrap();
    assert!(!repaired);
    assert_eq!(same, DistinguishabilityMatrix::indistinguishable(3));
}

#[test]
fn perturbation_statistics() {
    let mut rng = seeded_rng(13, 0);
    let u = haar_random_unitary(4, &mut rng).unwrap();
    assert_eq!(perturb_unitary(&u, &PerturbationModel::new(0.0, 1)), u);

    for dist in [DeviationDistribution::RandomPhase, DeviationDistribution::Gaussian] {
        let model = PerturbationModel::new(1e-3, 5).with_distribution(dist);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let draws = 20_000;
        for _ in 0..draws {
            let d = model.sample(&mut rng);
            sum += d;
            abs_sum += d.norm();
        }
        let mean_abs = abs_sum / draws as f64;
        assert!((mean_abs / 1e-3 - 1.0).abs() < 0.05, "{dist:?}: {mean_abs}");
        assert!(sum.norm() / (draws as f64) < 5e-5);
    }

    let model = PerturbationModel::new(1e-3, 21);
    let v = perturb_unitary(&u, &model);
    let worst = (0..4)
        .flat_map(|j| (0..4).map(move |k| (j, k)))
        .map(|(j, k)| ((v[(j, k)] - u[(j, k)]) / u[(j, k)]).norm())
        .fold(0.0, f64::max);
    assert!((worst - 1e-3).abs() < 1e-12);
    let res = unitarity_residual(&v);
    assert!(res > 1e-5 && res < 1e-2, "{res}");
    assert!(!is_unitary(&v, 1e-12));
    assert_eq!(perturb_unitary(&u, &model), v);
}

#[test]
fn unitarity_residual_scales_linearly() {
    let mut rng = seeded_rng(14, 0);
    let u = haar_random_unitary(5, &mut rng).unwrap();
    let residual = |a: f64| {
        (0..200)
            .map(|seed| unitarity_residual(&perturb_unitary(&u, &PerturbationModel::new(a, seed))))
            .sum::<f64>()
    };
    let ratio = residual(2e-4) / residual(1e-4);
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
}

#[test]
fn probabilities_of_general_matrices_are_nonnegative() {
    let mut rng = seeded_rng(15, 0);
    let m = complex_gaussian_matrix(3, 3, &mut rng);
    let r = occ(&[1, 1, 1]);
    for s in enumerate_outputs(3, 3, ParticleType::Boson).unwrap() {
        assert!(prob_distinguishable(&m, &r, &s).unwrap() >= 0.0);
    }
}
