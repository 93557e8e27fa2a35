//! Suppression laws from the eigenvalue distributions of a permutation
//! symmetry, and classification of forbidden events.
//!
//! For `U` with `P U = Z U D` and an input `r` invariant under the
//! permutation, the bosonic event `s` is forbidden whenever the product of
//! `Λ(s)` differs from one, and the fermionic event whenever `Λ(s)` differs
//! from `Λ_ini` as a multiset. All verdicts are computed with exact
//! fractions and never look at `U`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_outputs, ModeOccupation, ParticleType};
use crate::numerics::{CompensatedSum, PROBABILITY_TOL};
use crate::permutations::{check_invariant, Permutation, RootOfUnity};
use crate::scattering::{prob_boson, prob_distinguishable, prob_fermion};
use crate::unitaries::ConstructedUnitary;

/// A multiset of eigenvalues, stored sorted by phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EigenvalueDistribution(Vec<RootOfUnity>);

impl EigenvalueDistribution {
    pub fn new(mut values: Vec<RootOfUnity>) -> Self {
        values.sort();
        Self(values)
    }

    pub fn values(&self) -> &[RootOfUnity] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> RootOfUnity {
        self.0.iter().product()
    }

    /// Space-separated `k/l` fractions, as in the verdict table.
    pub fn phases(&self) -> String {
        self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_phases(s: &str) -> Result<Self> {
        s.split_whitespace()
            .map(RootOfUnity::from_str)
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for EigenvalueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "))
    }
}

/// `Λ(s) = {λ_{d_1(s)}, ..., λ_{d_N(s)}}`.
pub fn final_distribution(d: &[RootOfUnity], s: &ModeOccupation) -> Result<EigenvalueDistribution> {
    if d.len() != s.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for {} modes",
            d.len(),
            s.modes()
        )));
    }
    Ok(EigenvalueDistribution::new(
        s.to_assignment().as_slice().iter().map(|&j| d[j]).collect(),
    ))
}

/// `Λ_ini`: every populated cycle of length `l` contributes all `l`-th roots of unity.
pub fn initial_distribution(p: &Permutation, r: &ModeOccupation) -> Result<EigenvalueDistribution> {
    r.require_fermionic()?;
    check_invariant(p, r)?;
    let mut values = Vec::with_capacity(r.particles());
    for cycle in p.cycles().cycles() {
        if r[cycle[0]] == 1 {
            let l = cycle.len() as u64;
            values.extend((0..l).map(|k| RootOfUnity::new(k as i64, l)));
        }
    }
    Ok(EigenvalueDistribution::new(values))
}

/// Bosonic law: suppressed when `∏ Λ(s) ≠ 1`.
pub fn boson_suppressed(d: &[RootOfUnity], s: &ModeOccupation) -> Result<bool> {
    Ok(!final_distribution(d, s)?.product().is_one())
}

/// Fermionic law: suppressed when `Λ(s) ≠ Λ_ini` as multisets.
pub fn fermion_suppressed(p: &Permutation, r: &ModeOccupation, d: &[RootOfUnity], s: &ModeOccupation) -> Result<bool> {
    s.require_fermionic()?;
    Ok(final_distribution(d, s)? != initial_distribution(p, r)?)
}

/// The older fermionic criterion for Fourier matrices: suppressed when `∏ Λ(s) ≠ (-1)^w`.
pub fn old_fourier_fermion_suppressed(d: &[RootOfUnity], s: &ModeOccupation, w: usize) -> Result<bool> {
    let sign = RootOfUnity::new((w % 2) as i64, 2);
    Ok(final_distribution(d, s)?.product() != sign)
}

/// Parity count `w` of the permutation induced on the occupied input modes:
/// `N` minus the number of its cycles.
pub fn transposition_count(p: &Permutation, r: &ModeOccupation) -> Result<usize> {
    check_invariant(p, r)?;
    let cycles = p
        .cycles()
        .cycles()
        .iter()
        .filter(|c| r[c[0]] > 0)
        .count();
    let occupied = r.as_slice().iter().filter(|&&c| c > 0).count();
    Ok(occupied - cycles)
}

/// Forbidden-event classes. I and II are zeros of single-particle origin
/// (`P_D = 0`), III are genuine interference zeros, IV are allowed events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventClass {
    #[serde(rename = "I")]
    ClassI,
    #[serde(rename = "II")]
    ClassII,
    #[serde(rename = "III")]
    ClassIII,
    #[serde(rename = "IV")]
    AllowedIV,
}

impl EventClass {
    pub fn label(self) -> &'static str {
        match self {
            EventClass::ClassI => "I",
            EventClass::ClassII => "II",
            EventClass::ClassIII => "III",
            EventClass::AllowedIV => "IV",
        }
    }

    pub const ALL: [EventClass; 4] = [EventClass::ClassI, EventClass::ClassII, EventClass::ClassIII, EventClass::AllowedIV];
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EventClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventClass::ALL
            .into_iter()
            .find(|c| c.label() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown event class {s:?}")))
    }
}

/// Tolerance below which a probability counts as zero for classification.
pub const CLASS_TOL: f64 = PROBABILITY_TOL;

/// Class of an event given the law verdict, its probability and the
/// distinguishable-particle probability.
pub fn classify_event(law_suppressed: bool, p: Option<f64>, p_dist: Option<f64>) -> Result<EventClass> {
    let p_dist = p_dist.ok_or_else(|| Error::InvalidArgument("classification needs p_dist".into()))?;
    if law_suppressed {
        return Ok(if p_dist > CLASS_TOL { EventClass::ClassIII } else { EventClass::ClassII });
    }
    let p = p.ok_or_else(|| Error::InvalidArgument("classification needs the event probability".into()))?;
    Ok(if p <= CLASS_TOL && p_dist <= CLASS_TOL {
        EventClass::ClassI
    } else {
        EventClass::AllowedIV
    })
}

/// One row of a verdict table.
#[derive(Debug, Clone, PartialEq)]
pub struct EventVerdict {
    pub s: ModeOccupation,
    pub lambda: EigenvalueDistribution,
    pub law_suppressed_boson: bool,
    /// `None` when `s` or `r` is not fermionic.
    pub law_suppressed_fermion: Option<bool>,
    pub p_boson: Option<f64>,
    pub p_fermion: Option<f64>,
    pub p_dist: Option<f64>,
    pub event_class: EventClass,
}

impl EventVerdict {
    /// Law verdict for the given particle type; distinguishable particles are never suppressed.
    pub fn law_suppressed(&self, t: ParticleType) -> bool {
        match t {
            ParticleType::Boson => self.law_suppressed_boson,
            ParticleType::Fermion => self.law_suppressed_fermion.unwrap_or(false),
            ParticleType::Distinguishable => false,
        }
    }

    pub fn probability(&self, t: ParticleType) -> Option<f64> {
        match t {
            ParticleType::Boson => self.p_boson,
            ParticleType::Fermion => self.p_fermion,
            ParticleType::Distinguishable => self.p_dist,
        }
    }

    /// Re-derives the class for particle type `t`.
    pub fn classify(&self, t: ParticleType) -> Result<EventClass> {
        classify_event(self.law_suppressed(t), self.probability(t), self.p_dist)
    }
}

/// Law verdicts without probabilities, for every output of the given type.
pub fn law_verdicts(
    p: &Permutation,
    r: &ModeOccupation,
    d: &[RootOfUnity],
    t: ParticleType,
) -> Result<Vec<(ModeOccupation, bool, Option<bool>)>> {
    check_invariant(p, r)?;
    let fermionic_input = r.is_fermionic();
    enumerate_outputs(r.modes(), r.particles(), t)?
        .map(|s| {
            let b = boson_suppressed(d, &s)?;
            let f = if fermionic_input && s.is_fermionic() {
                Some(fermion_suppressed(p, r, d, &s)?)
            } else {
                None
            };
            Ok((s, b, f))
        })
        .collect()
}

/// Full verdict table for one constructed unitary: law verdicts, exact
/// probabilities of type `t` and of distinguishable particles, and classes.
///
/// For fermions `p_dist` is renormalized over the singly occupied outputs.
pub fn verdict_table(u: &ConstructedUnitary, r: &ModeOccupation, t: ParticleType) -> Result<Vec<EventVerdict>> {
    let p = u.permutation();
    if t == ParticleType::Fermion {
        r.require_fermionic()?;
    }
    let laws = law_verdicts(p, r, &u.eigenvalues, t)?;
    let mut rows = Vec::with_capacity(laws.len());
    for (s, b, f) in laws {
        let p_dist = prob_distinguishable(&u.matrix, r, &s)?;
        let (p_boson, p_fermion) = match t {
            ParticleType::Boson => (Some(prob_boson(&u.matrix, r, &s)?), None),
            ParticleType::Fermion => (None, Some(prob_fermion(&u.matrix, r, &s)?)),
            ParticleType::Distinguishable => (None, None),
        };
        rows.push(EventVerdict {
            lambda: final_distribution(&u.eigenvalues, &s)?,
            s,
            law_suppressed_boson: b,
            law_suppressed_fermion: f,
            p_boson,
            p_fermion,
            p_dist: Some(p_dist),
            event_class: EventClass::AllowedIV,
        });
    }
    if t == ParticleType::Fermion {
        renormalize_dist(&mut rows);
    }
    for row in &mut rows {
        row.event_class = row.classify(t)?;
    }
    Ok(rows)
}

/// Rescales `p_dist` so that it sums to one over the rows present.
pub(crate) fn renormalize_dist(rows: &mut [EventVerdict]) {
    let total: CompensatedSum = rows.iter().filter_map(|v| v.p_dist).collect();
    let total = total.value();
    if total > 0.0 {
        for row in rows.iter_mut() {
            if let Some(pd) = row.p_dist.as_mut() {
                *pd /= total;
            }
        }
    }
}

/// Number of rows in each class, in the order I, II, III, IV.
pub fn class_counts(rows: &[EventVerdict]) -> [usize; 4] {
    let mut counts = [0; 4];
    for row in rows {
        counts[EventClass::ALL.iter().position(|c| *c == row.event_class).unwrap()] += 1;
    }
    counts
}

#[derive(Debug, Serialize, Deserialize)]
struct VerdictRecord {
    s: String,
    lambda_phases: String,
    boson_suppressed: bool,
    fermion_suppressed: Option<bool>,
    p_boson: Option<String>,
    p_fermion: Option<String>,
    p_dist: Option<String>,
    class: EventClass,
}

fn fmt_prob(p: Option<f64>) -> Option<String> {
    p.map(|x| format!("{x:.16e}"))
}

fn parse_prob(field: &str, value: Option<String>) -> Result<Option<f64>> {
    value
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("{field}: {e}")))
        })
        .transpose()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::InvalidArgument(format!("verdict CSV: {other:?}")),
    }
}

/// Writes the table as `;`-separated CSV with a header row.
pub fn write_verdicts_csv<W: Write>(rows: &[EventVerdict], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(out);
    for v in rows {
        w.serialize(VerdictRecord {
            s: v.s.to_string(),
            lambda_phases: v.lambda.phases(),
            boson_suppressed: v.law_suppressed_boson,
            fermion_suppressed: v.law_suppressed_fermion,
            p_boson: fmt_prob(v.p_boson),
            p_fermion: fmt_prob(v.p_fermion),
            p_dist: fmt_prob(v.p_dist),
            class: v.event_class,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_verdicts_csv<R: Read>(input: R) -> Result<Vec<EventVerdict>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(b';').from_reader(input);
    rdr.deserialize::<VerdictRecord>()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok(EventVerdict {
                s: rec.s.parse()?,
                lambda: EigenvalueDistribution::parse_phases(&rec.lambda_phases)?,
                law_suppressed_boson: rec.boson_suppressed,
                law_suppressed_fermion: rec.fermion_suppressed,
                p_boson: parse_prob("p_boson", rec.p_boson)?,
                p_fermion: parse_prob("p_fermion", rec.p_fermion)?,
                p_dist: parse_prob("p_dist", rec.p_dist)?,
                event_class: rec.class,
            })
        })
        .collect()
}
