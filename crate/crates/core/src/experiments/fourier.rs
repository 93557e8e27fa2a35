use serde::{Deserialize, Serialize};

use super::{csv_error, SUPPRESSION_BOUND};
use crate::error::Result;
use crate::fock::{enumerate_outputs, ModeOccupation, ParticleType};
use crate::permutations::{check_invariant, Permutation};
use crate::scattering::{prob_boson, prob_fermion};
use crate::suppression::{
    boson_suppressed, fermion_suppressed, final_distribution, old_fourier_fermion_suppressed, transposition_count,
    EigenvalueDistribution,
};
use crate::unitaries::fourier_constructed;

/// One output of the Fourier comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRow {
    pub s: ModeOccupation,
    pub lambda: EigenvalueDistribution,
    pub boson_suppressed: bool,
    /// The mode-index-sum law for periodic inputs: `Σ_α (d_α(s) - 1) ≢ 0 (mod m)`.
    pub index_sum_law: bool,
    pub p_boson: f64,
    /// Fermionic fields are present only when `r` and `s` are both fermionic.
    pub fermion_suppressed: Option<bool>,
    pub old_law_suppressed: Option<bool>,
    pub p_fermion: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FourierCounts {
    pub outputs: usize,
    pub boson_law: usize,
    pub boson_zeros: usize,
    /// Zeros of `|perm M|²` that the law does not predict.
    pub boson_unpredicted: usize,
    /// Law-suppressed bosonic events with nonzero probability; must be zero.
    pub boson_violations: usize,
    /// Events where the law and the index-sum law disagree; must be zero.
    pub index_sum_mismatches: usize,
    pub fermion_outputs: usize,
    pub fermion_new: usize,
    pub fermion_old: usize,
    pub new_not_old: usize,
    /// Must be zero: the new law contains the old one.
    pub old_not_new: usize,
    pub fermion_zeros: usize,
    pub fermion_unpredicted: usize,
    pub fermion_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierComparison {
    pub n: usize,
    pub m: usize,
    pub r: ModeOccupation,
    pub permutation: Permutation,
    /// Transposition count entering the old fermionic law.
    pub w: Option<usize>,
    pub rows: Vec<FourierRow>,
    pub counts: FourierCounts,
}

impl FourierComparison {
    /// Fermionic events suppressed by the eigenvalue law but not by the old criterion.
    pub fn witnesses(&self) -> impl Iterator<Item = &FourierRow> {
        self.rows
            .iter()
            .filter(|row| row.fermion_suppressed == Some(true) && row.old_law_suppressed == Some(false))
    }

    pub fn invariant_failures(&self) -> Vec<String> {
        let c = &self.counts;
        let mut out = Vec::new();
        if c.boson_violations > 0 {
            out.push(format!("{} law-suppressed bosonic events are not zero", c.boson_violations));
        }
        if c.fermion_violations > 0 {
            out.push(format!("{} law-suppressed fermionic events are not zero", c.fermion_violations));
        }
        if c.index_sum_mismatches > 0 {
            out.push(format!("{} events disagree with the index-sum law", c.index_sum_mismatches));
        }
        if c.old_not_new > 0 {
            out.push(format!("{} events are suppressed by the old law only", c.old_not_new));
        }
        out
    }

    pub fn summary(&self) -> String {
        let c = &self.counts;
        format!(
            "n={} m={} r={}: bosons {} outputs, {} law, {} zeros ({} unpredicted); fermions {} outputs, new {} old {} new-not-old {}",
            self.n,
            self.m,
            self.r,
            c.outputs,
            c.boson_law,
            c.boson_zeros,
            c.boson_unpredicted,
            c.fermion_outputs,
            c.fermion_new,
            c.fermion_old,
            c.new_not_old
        )
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(FourierRecord::from(row)).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))
    }

    pub fn rows_from_csv(input: &[u8]) -> Result<Vec<FourierRow>> {
        let mut rdr = csv::ReaderBuilder::new().delimiter(b';').from_reader(input);
        rdr.deserialize::<FourierRecord>()
            .map(|rec| rec.map_err(csv_error)?.try_into())
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FourierRecord {
    s: String,
    lambda_phases: String,
    boson_suppressed: bool,
    index_sum_law: bool,
    p_boson: String,
    fermion_suppressed: Option<bool>,
    old_law_suppressed: Option<bool>,
    p_fermion: Option<String>,
}

impl From<&FourierRow> for FourierRecord {
    fn from(row: &FourierRow) -> Self {
        Self {
            s: row.s.to_string(),
            lambda_phases: row.lambda.phases(),
            boson_suppressed: row.boson_suppressed,
            index_sum_law: row.index_sum_law,
            p_boson: format!("{:.16e}", row.p_boson),
            fermion_suppressed: row.fermion_suppressed,
            old_law_suppressed: row.old_law_suppressed,
            p_fermion: row.p_fermion.map(|p| format!("{p:.16e}")),
        }
    }
}

impl TryFrom<FourierRecord> for FourierRow {
    type Error = crate::Error;

    fn try_from(rec: FourierRecord) -> Result<Self> {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| crate::Error::InvalidArgument(format!("{s:?}: {e}")))
        };
        Ok(Self {
            s: rec.s.parse()?,
            lambda: EigenvalueDistribution::parse_phases(&rec.lambda_phases)?,
            boson_suppressed: rec.boson_suppressed,
            index_sum_law: rec.index_sum_law,
            p_boson: num(&rec.p_boson)?,
            fermion_suppressed: rec.fermion_suppressed,
            old_law_suppressed: rec.old_law_suppressed,
            p_fermion: rec.p_fermion.as_deref().filter(|s| !s.is_empty()).map(num).transpose()?,
        })
    }
}

/// Compares, for the `n`-mode Fourier matrix and its shift symmetry of order
/// `m`, the eigenvalue laws against exact probabilities and, for fermions,
/// against the older `(-1)^w` criterion.
pub fn run_fourier_comparison(n: usize, m: usize, r: &ModeOccupation) -> Result<FourierComparison> {
    let ft = fourier_constructed(n, m)?;
    let p = ft.permutation().clone();
    check_invariant(&p, r)?;
    let fermionic = r.is_fermionic();
    let w = if fermionic { Some(transposition_count(&p, r)?) } else { None };
    let mut counts = FourierCounts::default();
    let mut rows = Vec::new();
    for s in enumerate_outputs(n, r.particles(), ParticleType::Boson)? {
        let b = boson_suppressed(&ft.eigenvalues, &s)?;
        let index_sum: usize = s.to_assignment().as_slice().iter().sum();
        let index_sum_law = index_sum % m != 0;
        let pb = prob_boson(&ft.matrix, r, &s)?;
        counts.outputs += 1;
        counts.boson_law += b as usize;
        let zero = pb <= SUPPRESSION_BOUND;
        counts.boson_zeros += zero as usize;
        counts.boson_unpredicted += (zero && !b) as usize;
        counts.boson_violations += (b && !zero) as usize;
        counts.index_sum_mismatches += (b != index_sum_law) as usize;

        let (fs, old, pf) = match w {
            Some(w) if s.is_fermionic() => {
                let new = fermion_suppressed(&p, r, &ft.eigenvalues, &s)?;
                let old = old_fourier_fermion_suppressed(&ft.eigenvalues, &s, w)?;
                let pf = prob_fermion(&ft.matrix, r, &s)?;
                let zero = pf <= SUPPRESSION_BOUND;
                counts.fermion_outputs += 1;
                counts.fermion_new += new as usize;
                counts.fermion_old += old as usize;
                counts.new_not_old += (new && !old) as usize;
                counts.old_not_new += (old && !new) as usize;
                counts.fermion_zeros += zero as usize;
                counts.fermion_unpredicted += (zero && !new) as usize;
                counts.fermion_violations += (new && !zero) as usize;
                (Some(new), Some(old), Some(pf))
            }
            _ => (None, None, None),
        };
        rows.push(FourierRow {
            lambda: final_distribution(&ft.eigenvalues, &s)?,
            s,
            boson_suppressed: b,
            index_sum_law,
            p_boson: pb,
            fermion_suppressed: fs,
            old_law_suppressed: old,
            p_fermion: pf,
        });
    }
    Ok(FourierComparison {
        n,
        m,
        r: r.clone(),
        permutation: p,
        w,
        rows,
        counts,
    })
}

