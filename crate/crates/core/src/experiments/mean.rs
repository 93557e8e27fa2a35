use rayon::prelude::*;

use super::{MeanConfig, NORMALIZATION_TOL, SUPPRESSION_BOUND};
use crate::error::Result;
use crate::fock::{ModeOccupation, ParticleType};
use crate::numerics::{derive_seed, CompensatedSum};
use crate::suppression::{
    class_counts, classify_event, verdict_table, write_verdicts_csv, EventVerdict, CLASS_TOL,
};
use crate::unitaries::{build_unitary, UnitarySpec};

/// Bases handled per parallel batch; bounds memory for runs of 10 000 bases.
const BATCH: usize = 256;

/// Ensemble-mean verdict table for one particle type.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTable {
    pub particle: ParticleType,
    pub bases: usize,
    /// Law verdicts with ensemble-mean probabilities and the classes they imply.
    pub rows: Vec<EventVerdict>,
    /// Largest single-basis probability of any law-suppressed event.
    pub max_suppressed: f64,
    /// Sum of the mean probabilities.
    pub total: f64,
    /// Events not predicted by the law whose mean probability vanishes while `P_D` does not.
    pub unpredicted_zeros: Vec<ModeOccupation>,
}

impl MeanTable {
    pub fn class_counts(&self) -> [usize; 4] {
        class_counts(&self.rows)
    }

    pub fn law_suppressed(&self) -> usize {
        self.rows.iter().filter(|v| v.law_suppressed(self.particle)).count()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_verdicts_csv(&self.rows, &mut buf)?;
        Ok(buf)
    }

    pub fn invariant_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_suppressed > SUPPRESSION_BOUND {
            out.push(format!(
                "{}: a law-suppressed event reached probability {:e}",
                self.particle, self.max_suppressed
            ));
        }
        if (self.total - 1.0).abs() > NORMALIZATION_TOL {
            out.push(format!("{}: probabilities sum to {}", self.particle, self.total));
        }
        out
    }

    pub fn summary(&self) -> String {
        let [i, ii, iii, iv] = self.class_counts();
        format!(
            "{}: {} outputs over {} bases; classes I={i} II={ii} III={iii} IV={iv}; max suppressed P = {:e}; unpredicted zeros = {}",
            self.particle,
            self.rows.len(),
            self.bases,
            self.max_suppressed,
            self.unpredicted_zeros.len()
        )
    }
}

struct BasisResult {
    p: Vec<f64>,
    p_dist: Vec<f64>,
    max_suppressed: f64,
}

/// Averages `P` and `P_D` over `bases` random eigenbases (degenerate
/// eigenspaces rotated independently per basis), attaching law verdicts and
/// classes computed from the means. For fermions `P_D` is renormalized over
/// the singly occupied outputs of each basis.
pub fn run_mean_probabilities(cfg: &MeanConfig) -> Result<Vec<MeanTable>> {
    let spec = UnitarySpec {
        column_order: cfg.column_order.clone(),
        ..UnitarySpec::new(cfg.permutation.clone())
    };
    spec.validate()?;
    cfg.types
        .iter()
        .map(|&t| mean_table(&spec, &cfg.input, cfg.bases, cfg.seed, t))
        .collect()
}

fn one_basis(spec: &UnitarySpec, r: &ModeOccupation, seed: u64, b: usize, t: ParticleType) -> Result<BasisResult> {
    let mut spec = spec.clone();
    spec.rotation_seed = Some(derive_seed(seed, b as u64));
    let u = build_unitary(&spec)?;
    let rows = verdict_table(&u, r, t)?;
    let mut max_suppressed: f64 = 0.0;
    let mut p = Vec::with_capacity(rows.len());
    for v in &rows {
        let pv = v.probability(t).unwrap_or(0.0);
        if v.law_suppressed(t) {
            max_suppressed = max_suppressed.max(pv);
        }
        p.push(pv);
    }
    Ok(BasisResult {
        p,
        p_dist: rows.iter().map(|v| v.p_dist.unwrap_or(0.0)).collect(),
        max_suppressed,
    })
}

fn mean_table(spec: &UnitarySpec, r: &ModeOccupation, bases: usize, seed: u64, t: ParticleType) -> Result<MeanTable> {
    // Law verdicts and row order come from one basis; both are basis independent.
    let mut base = spec.clone();
    base.rotation_seed = None;
    let mut rows = verdict_table(&build_unitary(&base)?, r, t)?;

    let mut sum_p = vec![CompensatedSum::default(); rows.len()];
    let mut sum_d = vec![CompensatedSum::default(); rows.len()];
    let mut max_suppressed: f64 = 0.0;
    for start in (0..bases).step_by(BATCH) {
        let batch: Vec<BasisResult> = (start..(start + BATCH).min(bases))
            .into_par_iter()
            .map(|b| one_basis(spec, r, seed, b, t))
            .collect::<Result<_>>()?;
        for res in batch {
            for (k, (p, d)) in res.p.iter().zip(&res.p_dist).enumerate() {
                sum_p[k].add(*p);
                sum_d[k].add(*d);
            }
            max_suppressed = max_suppressed.max(res.max_suppressed);
        }
    }

    let mut unpredicted_zeros = Vec::new();
    let mut total = CompensatedSum::default();
    for (k, v) in rows.iter_mut().enumerate() {
        let p = sum_p[k].value() / bases as f64;
        let d = sum_d[k].value() / bases as f64;
        total.add(p);
        match t {
            ParticleType::Boson => v.p_boson = Some(p),
            ParticleType::Fermion => v.p_fermion = Some(p),
            ParticleType::Distinguishable => {}
        }
        v.p_dist = Some(d);
        let law = v.law_suppressed(t);
        v.event_class = classify_event(law, Some(p), Some(d))?;
        if !law && p <= CLASS_TOL && d > CLASS_TOL {
            unpredicted_zeros.push(v.s.clone());
        }
    }
    Ok(MeanTable {
        particle: t,
        bases,
        rows,
        max_suppressed,
        total: total.value(),
        unpredicted_zeros,
    })
}
