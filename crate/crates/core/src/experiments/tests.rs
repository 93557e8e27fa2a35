use super::*;
use crate::suppression::EventClass;

fn occ(v: &[usize]) -> ModeOccupation {
    ModeOccupation::new(v.to_vec())
}

fn fig2_config(bases: usize, types: Vec<ParticleType>) -> MeanConfig {
    MeanConfig {
        permutation: "(1 2 3)(4 5 6)(7 8)".parse().unwrap(),
        input: occ(&[1, 1, 1, 0, 0, 0, 1, 1]),
        bases,
        seed: 2024,
        types,
        column_order: Some(vec![0, 3, 6, 1, 4, 2, 5, 7]),
    }
}

fn hom_source() -> UnitarySource {
    UnitarySource::Eigenbasis {
        permutation: "(1 2)".parse().unwrap(),
        column_order: None,
        rotate: false,
    }
}

fn robustness(unitary: UnitarySource, r: &[usize], s: &[usize], grid: Vec<f64>, samples: usize) -> RobustnessConfig {
    RobustnessConfig {
        unitary,
        input: occ(r),
        output: occ(s),
        particle: ParticleType::Boson,
        grid,
        samples,
        seed: 7,
        deviation: DeviationDistribution::default(),
        epsilon_model: EpsilonModel::default(),
        eta_max: DEFAULT_ETA_MAX,
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64))
        .collect()
}

#[test]
fn config_json() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"experiment":"mean_probabilities","permutation":"(1 2 3)(4 5 6)(7 8)",
            "input":[1,1,1,0,0,0,1,1],"bases":10,"seed":3,"types":["boson","fermion"],
            "column_order":[1,4,7,2,5,3,6,8]}"#,
    )
    .unwrap();
    let ExperimentConfig::MeanProbabilities(mean) = &cfg else { panic!() };
    assert_eq!(mean.column_order.as_deref(), Some(&[0, 3, 6, 1, 4, 2, 5, 7][..]));
    assert!(cfg.problems().is_empty());
    let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);

    let cfg: ExperimentConfig =
        serde_json::from_str(r#"{"experiment":"fourier_comparison","n":6,"m":3,"input":[1,0,1,0,1,0]}"#).unwrap();
    assert!(cfg.problems().is_empty());

    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"experiment":"unitary_robustness","unitary":{"kind":"fourier","n":4,"m":2},
            "input":[1,0,1,0],"output":[1,1,0,0],"type":"boson","grid":[0.001,0.01]}"#,
    )
    .unwrap();
    let ExperimentConfig::UnitaryRobustness(rc) = &cfg else { panic!() };
    assert_eq!(rc.samples, DEFAULT_SAMPLES);
    assert!(cfg.problems().is_empty());

    assert!(serde_json::from_str::<ExperimentConfig>(
        r#"{"experiment":"fourier_comparison","n":6,"m":3,"input":[1,0,1,0,1,0],"extra":1}"#
    )
    .is_err());
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"nonsense"}"#).is_err());
}

#[test]
fn problems_are_listed_exhaustively() {
    let mut cfg = fig2_config(0, vec![]);
    cfg.input = occ(&[1, 1, 0, 0, 0, 0, 1, 1]);
    let problems = ExperimentConfig::MeanProbabilities(cfg).problems();
    assert_eq!(problems.len(), 3, "{problems:?}");
    assert!(problems[0].contains("(1 2 3)"));

    let mut rc = robustness(hom_source(), &[1, 1], &[1, 1, 0], vec![0.02, 0.01], 0);
    rc.particle = ParticleType::Distinguishable;
    let problems = ExperimentConfig::UnitaryRobustness(rc).problems();
    assert_eq!(problems.len(), 4, "{problems:?}");

    let cfg = ExperimentConfig::FourierComparison(FourierConfig { n: 6, m: 4, input: occ(&[1; 6]) });
    assert_eq!(cfg.problems().len(), 1);
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn fig2_reduced_bosons_and_fermions() {
    let tables = run_mean_probabilities(&fig2_config(100, vec![ParticleType::Boson, ParticleType::Fermion])).unwrap();
    let (b, f) = (&tables[0], &tables[1]);
    assert_eq!(b.rows.len(), 792);
    assert_eq!(f.rows.len(), 56);
    for t in &tables {
        assert!(t.max_suppressed <= SUPPRESSION_BOUND, "{}", t.summary());
        assert!((t.total - 1.0).abs() <= NORMALIZATION_TOL);
        assert!(t.unpredicted_zeros.is_empty());
        assert!(t.invariant_failures().is_empty());
        for v in &t.rows {
            let law = v.law_suppressed(t.particle);
            assert_eq!(law, matches!(v.event_class, EventClass::ClassII | EventClass::ClassIII));
        }
    }
    let pd: f64 = f.rows.iter().map(|v| v.p_dist.unwrap()).sum();
    assert!((pd - 1.0).abs() < 1e-9);
    assert!(b.law_suppressed() > 0 && f.law_suppressed() > 0);
}

#[test]
fn mean_tables_are_deterministic() {
    let cfg = ExperimentConfig::MeanProbabilities(fig2_config(20, vec![ParticleType::Boson]));
    let (a, _) = run_experiment(&cfg).unwrap();
    let (b, _) = run_experiment(&cfg).unwrap();
    assert_eq!(a.csv_files().unwrap(), b.csv_files().unwrap());
    let mut other = fig2_config(20, vec![ParticleType::Boson]);
    other.seed += 1;
    let (c, _) = run_experiment(&ExperimentConfig::MeanProbabilities(other)).unwrap();
    assert_ne!(a.csv_files().unwrap(), c.csv_files().unwrap());
}

#[test]
fn mean_csv_round_trips() {
    let tables = run_mean_probabilities(&fig2_config(5, vec![ParticleType::Fermion])).unwrap();
    let csv = tables[0].to_csv().unwrap();
    assert_eq!(crate::suppression::read_verdicts_csv(csv.as_slice()).unwrap(), tables[0].rows);
}

#[test]
fn identity_routing_table() {
    let cfg = MeanConfig {
        permutation: Permutation::identity(3),
        input: occ(&[1, 1, 0]),
        bases: 1,
        seed: 0,
        types: vec![ParticleType::Boson],
        column_order: None,
    };
    let t = &run_mean_probabilities(&cfg).unwrap()[0];
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.law_suppressed(), 0);
    assert!((t.total - 1.0).abs() < 1e-12);
}

#[test]
fn fourier_six_modes_order_three() {
    let c = run_fourier_comparison(6, 3, &occ(&[1, 0, 1, 0, 1, 0])).unwrap();
    assert_eq!(c.rows.len(), 56);
    assert_eq!(c.counts.fermion_outputs, 20);
    assert_eq!(c.w, Some(2));
    assert!(c.invariant_failures().is_empty(), "{:?}", c.invariant_failures());
    assert_eq!(c.counts.boson_unpredicted, 0);
    assert!(c.counts.fermion_old <= c.counts.fermion_new);
    // one populated cycle of length three leaves no room for extra fermionic zeros
    assert_eq!(c.counts.new_not_old, 0);
    let csv = c.to_csv().unwrap();
    assert_eq!(FourierComparison::rows_from_csv(&csv).unwrap(), c.rows);
}

#[test]
fn fourier_strict_extension_at_eight_modes() {
    let c = run_fourier_comparison(8, 2, &occ(&[1, 0, 1, 0, 1, 0, 1, 0])).unwrap();
    assert!(c.invariant_failures().is_empty());
    assert!(c.counts.new_not_old > 0);
    let witness = c.witnesses().next().unwrap();
    assert!(witness.p_fermion.unwrap() <= SUPPRESSION_BOUND);
}

#[test]
fn fourier_hom() {
    let c = run_fourier_comparison(2, 2, &occ(&[1, 1])).unwrap();
    let suppressed: Vec<_> = c.rows.iter().filter(|r| r.boson_suppressed).map(|r| r.s.clone()).collect();
    assert_eq!(suppressed, vec![occ(&[1, 1])]);
    assert_eq!(c.rows.iter().find(|r| r.s == occ(&[1, 1])).unwrap().fermion_suppressed, Some(false));
}

#[test]
fn power_law_fit_recovers_exact_curves() {
    let points: Vec<RobustnessPoint> = log_grid(1e-3, 1e-2, 5)
        .into_iter()
        .map(|x| RobustnessPoint { x, delta_p: 3.0 * x * x, stderr: 0.0 })
        .collect();
    let fit = fit_power_law(&points, 2.0).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-12);
    assert!((fit.fitted_prefactor - 3.0).abs() < 1e-9);
    assert!((fit.measured_prefactor - 3.0).abs() < 1e-9);
    assert!(fit_power_law(&points[..3], 2.0).is_none());
}

#[test]
fn hom_unitary_scaling() {
    let cfg = robustness(hom_source(), &[1, 1], &[1, 1], log_grid(1e-3, 1e-2, 5), 2000);
    let fit = run_unitary_robustness(&cfg).unwrap();
    let f = fit.fit.unwrap();
    assert!((f.exponent - 2.0).abs() < 0.1, "{}", fit.summary());
    assert!((fit.predicted_prefactor - 1.0).abs() < 1e-12);
    assert!((fit.prefactor_ratio().unwrap() - 1.0).abs() < 0.2, "{}", fit.summary());
}

#[test]
fn zero_grid_gives_no_leakage() {
    let cfg = robustness(hom_source(), &[1, 1], &[1, 1], vec![0.0; 4], 10);
    let fit = run_unitary_robustness(&cfg).unwrap();
    assert!(fit.points.iter().all(|p| p.delta_p == 0.0));
    assert!(fit.fit.is_none());
    let fit = run_distinguishability_robustness(&cfg).unwrap();
    assert!(fit.points.iter().all(|p| p.delta_p == 0.0));
}

#[test]
fn unsuppressed_target_is_rejected() {
    let cfg = robustness(hom_source(), &[1, 1], &[2, 0], vec![0.01; 4], 10);
    assert!(run_unitary_robustness(&cfg).is_err());
}

#[test]
fn hom_distinguishability_scaling() {
    let cfg = robustness(hom_source(), &[1, 1], &[1, 1], log_grid(1e-3, 1e-2, 5), 50);
    let fit = run_distinguishability_robustness(&cfg).unwrap();
    let f = fit.fit.unwrap();
    assert!((f.exponent - 1.0).abs() < 0.1, "{}", fit.summary());
    assert!((fit.prefactor_ratio().unwrap() - 1.0).abs() < 0.2, "{}", fit.summary());
    assert_eq!(fit.repairs, 0);
}

#[test]
fn fourier_distinguishability_scaling() {
    let cfg = robustness(UnitarySource::Fourier { n: 4, m: 2 }, &[1, 0, 1, 0], &[1, 1, 0, 0], log_grid(1e-3, 1e-2, 5), 50);
    let fit = run_distinguishability_robustness(&cfg).unwrap();
    assert!((fit.mean_p_dist - 0.125).abs() < 1e-12);
    assert!((fit.fit.unwrap().exponent - 1.0).abs() < 0.1, "{}", fit.summary());
    assert!((fit.prefactor_ratio().unwrap() - 1.0).abs() < 0.2, "{}", fit.summary());
}

#[test]
fn random_epsilon_model_runs() {
    let mut cfg = robustness(UnitarySource::Fourier { n: 4, m: 2 }, &[1, 0, 1, 0], &[1, 1, 0, 0], log_grid(1e-3, 1e-2, 5), 200);
    cfg.epsilon_model = EpsilonModel::Random;
    let fit = run_distinguishability_robustness(&cfg).unwrap();
    assert!((fit.fit.unwrap().exponent - 1.0).abs() < 0.1, "{}", fit.summary());
}

#[test]
fn uniform_distinguishability_sample_is_valid() {
    let mut rng = crate::numerics::seeded_rng(1, 0);
    let (s, repaired) = distinguishability_sample(5, 0.05, EpsilonModel::Uniform, DEFAULT_ETA_MAX, &mut rng).unwrap();
    assert!(!repaired);
    assert!((s.matrix()[(0, 1)].norm() - 0.95).abs() < 1e-12);
}

#[test]
fn robustness_csv_round_trips() {
    let cfg = robustness(hom_source(), &[1, 1], &[1, 1], log_grid(1e-3, 1e-2, 4), 20);
    let fit = run_unitary_robustness(&cfg).unwrap();
    let csv = fit.to_csv().unwrap();
    assert!(String::from_utf8(csv.clone()).unwrap().starts_with("x;delta_p;stderr\n"));
    assert_eq!(RobustnessFit::points_from_csv(&csv).unwrap(), fit.points);
}

#[test]
fn metadata_echoes_config() {
    let cfg = ExperimentConfig::FourierComparison(FourierConfig { n: 2, m: 2, input: occ(&[1, 1]) });
    let (_, meta) = run_experiment(&cfg).unwrap();
    assert_eq!(meta.config, cfg);
    assert_eq!(meta.version, env!("CARGO_PKG_VERSION"));
    let back: RunMetadata = serde_json::from_str(&serde_json::to_string(&meta).unwrap()).unwrap();
    assert_eq!(back, meta);
}
