//! Genotype and phenotype containers: allele-proportion responses, trait
//! vectors, missingness handling, and the MAF/missingness marker filters.

mod parse;

pub use parse::{
    parse_genotypes, parse_marker_map, parse_phenotypes, write_genotypes, write_phenotypes,
    MarkerMap, PhenotypeTable, ReferencePolicy,
};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Subject order shared by every per-subject container in an analysis.
#[derive(Debug, Clone)]
pub struct Cohort {
    subject_ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Cohort {
    pub fn new(subject_ids: Vec<String>) -> Result<Cohort> {
        let mut index = HashMap::with_capacity(subject_ids.len());
        for (i, id) in subject_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Cohort { subject_ids, index })
    }

    pub fn len(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subject_ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// One marker: ordered allele labels and the per-subject genotype as a pair
/// of indices into the allele list. `alleles[0]` is the reference allele; for
/// k > 2 alleles the last one is the omitted component.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerData {
    pub marker_id: String,
    alleles: Vec<String>,
    genotypes: Vec<Option<(u8, u8)>>,
}

impl MarkerData {
    pub fn new(
        marker_id: String,
        alleles: Vec<String>,
        genotypes: Vec<Option<(u8, u8)>>,
    ) -> MarkerData {
        debug_assert!(genotypes
            .iter()
            .flatten()
            .all(|&(a, b)| (a as usize) < alleles.len() && (b as usize) < alleles.len()));
        MarkerData { marker_id, alleles, genotypes }
    }

    /// Biallelic constructor from allele-1 dosages Y in {0, 1/2, 1}; allele
    /// labels "1" (reference) and "0".
    pub fn from_biallelic_dosage(marker_id: String, y: &[f64]) -> MarkerData {
        let genotypes = y
            .iter()
            .map(|&v| {
                Some(if v == 0.0 {
                    (1, 1)
                } else if v == 0.5 {
                    (0, 1)
                } else if v == 1.0 {
                    (0, 0)
                } else {
                    panic!("dosage {v} is not in {{0, 1/2, 1}}")
                })
            })
            .collect();
        MarkerData {
            marker_id,
            alleles: vec!["1".into(), "0".into()],
            genotypes,
        }
    }

    pub fn n_subjects(&self) -> usize {
        self.genotypes.len()
    }

    pub fn alleles(&self) -> &[String] {
        &self.alleles
    }

    pub fn k(&self) -> usize {
        self.alleles.len()
    }

    pub fn genotype(&self, i: usize) -> Option<(u8, u8)> {
        self.genotypes[i]
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.genotypes[i].is_none()
    }

    pub fn n_missing(&self) -> usize {
        self.genotypes.iter().filter(|g| g.is_none()).count()
    }

    pub fn missing_fraction(&self) -> f64 {
        if self.genotypes.is_empty() {
            0.0
        } else {
            self.n_missing() as f64 / self.genotypes.len() as f64
        }
    }

    /// Half the count of allele `a` in subject `i`.
    #[inline]
    pub fn dosage_of(&self, i: usize, a: u8) -> Option<f64> {
        self.genotypes[i]
            .map(|(x, y)| 0.5 * ((x == a) as u8 + (y == a) as u8) as f64)
    }

    /// Biallelic response Y_i: half the reference-allele count.
    pub fn y(&self, i: usize) -> Option<f64> {
        self.dosage_of(i, 0)
    }

    /// The (k-1)-component response for subject `i`, omitting the last allele.
    pub fn y_vector(&self, i: usize) -> Option<Vec<f64>> {
        self.genotypes[i].map(|_| {
            (0..self.k() - 1)
                .map(|a| self.dosage_of(i, a as u8).unwrap())
                .collect()
        })
    }

    /// Gathers the biallelic Y over `subset` (which must be non-missing).
    pub fn y_on(&self, subset: &[usize]) -> Vec<f64> {
        subset.iter().map(|&i| self.y(i).expect("missing subject in subset")).collect()
    }

    /// Component vectors Y_1..Y_{k-1} over `subset`.
    pub fn y_components_on(&self, subset: &[usize]) -> Vec<Vec<f64>> {
        (0..self.k() - 1)
            .map(|a| {
                subset
                    .iter()
                    .map(|&i| self.dosage_of(i, a as u8).expect("missing subject in subset"))
                    .collect()
            })
            .collect()
    }

    /// Overwrites one subject's genotype (used when merging duplicate
    /// subjects).
    pub fn set_genotype(&mut self, i: usize, g: Option<(u8, u8)>) {
        debug_assert!(g
            .map(|(a, b)| (a as usize) < self.alleles.len() && (b as usize) < self.alleles.len())
            .unwrap_or(true));
        self.genotypes[i] = g;
    }

    /// Restriction to a subject subset, preserving the given order.
    pub fn restrict(&self, idx: &[usize]) -> MarkerData {
        MarkerData {
            marker_id: self.marker_id.clone(),
            alleles: self.alleles.clone(),
            genotypes: idx.iter().map(|&i| self.genotypes[i]).collect(),
        }
    }

    /// Reorders the allele list so `reference` comes first.
    pub fn set_reference(&mut self, reference: &str) -> Result<()> {
        let r = self
            .alleles
            .iter()
            .position(|a| a == reference)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "allele '{reference}' not present at marker '{}'",
                    self.marker_id
                ))
            })? as u8;
        if r == 0 {
            return Ok(());
        }
        self.alleles.swap(0, r as usize);
        for g in self.genotypes.iter_mut().flatten() {
            let swap = |a: u8| {
                if a == 0 {
                    r
                } else if a == r {
                    0
                } else {
                    a
                }
            };
            *g = (swap(g.0), swap(g.1));
        }
        Ok(())
    }
}

/// Per-allele counting frequencies over non-missing subjects, in allele-list
/// order. Not kinship-adjusted.
pub fn allele_frequency(m: &MarkerData) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; m.k()];
    let mut total = 0usize;
    for g in m.genotypes.iter().flatten() {
        counts[g.0 as usize] += 1;
        counts[g.1 as usize] += 1;
        total += 2;
    }
    if total == 0 {
        return Err(Error::AllMissing(m.marker_id.clone()));
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Minor allele frequency: the smallest per-allele frequency.
pub fn minor_allele_frequency(m: &MarkerData) -> Result<f64> {
    let freqs = allele_frequency(m)?;
    Ok(freqs.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    Missingness,
    Maf,
    AllMissing,
}

impl std::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExclusionReason::Missingness => write!(f, "missingness"),
            ExclusionReason::Maf => write!(f, "maf"),
            ExclusionReason::AllMissing => write!(f, "all-missing"),
        }
    }
}

/// Drops markers with missingness above `max_missing_fraction` or MAF below
/// `min_maf`. Boundary values are retained.
pub fn filter_markers(
    markers: Vec<MarkerData>,
    max_missing_fraction: f64,
    min_maf: f64,
) -> (Vec<MarkerData>, Vec<(String, ExclusionReason)>) {
    let mut kept = Vec::with_capacity(markers.len());
    let mut excluded = Vec::new();
    for m in markers {
        if m.missing_fraction() > max_missing_fraction {
            excluded.push((m.marker_id.clone(), ExclusionReason::Missingness));
            continue;
        }
        match minor_allele_frequency(&m) {
            Err(_) => excluded.push((m.marker_id.clone(), ExclusionReason::AllMissing)),
            Ok(maf) if maf < min_maf => {
                excluded.push((m.marker_id.clone(), ExclusionReason::Maf))
            }
            Ok(_) => kept.push(m),
        }
    }
    (kept, excluded)
}

/// Trait kind; binary traits are coded 1 = affected, 0 = unaffected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraitKind {
    Binary,
    Quantitative,
}

#[derive(Debug, Clone)]
pub struct TraitVector {
    values: Vec<f64>,
    missing: Vec<bool>,
    pub kind: TraitKind,
}

impl TraitVector {
    pub fn new(values: Vec<Option<f64>>, kind: TraitKind) -> Result<TraitVector> {
        if kind == TraitKind::Binary {
            for v in values.iter().flatten() {
                if *v != 0.0 && *v != 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "binary trait value {v} is not 0 or 1"
                    )));
                }
            }
        }
        let missing = values.iter().map(|v| v.is_none()).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Ok(TraitVector { values, missing, kind })
    }

    /// Detects the kind from the data: {0,1}-valued traits are binary.
    pub fn with_detected_kind(values: Vec<Option<f64>>) -> Result<TraitVector> {
        let binary = values
            .iter()
            .flatten()
            .all(|&v| v == 0.0 || v == 1.0);
        let kind = if binary { TraitKind::Binary } else { TraitKind::Quantitative };
        TraitVector::new(values, kind)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.missing[i]
    }

    pub fn value(&self, i: usize) -> Option<f64> {
        if self.missing[i] {
            None
        } else {
            Some(self.values[i])
        }
    }

    pub fn values_on(&self, subset: &[usize]) -> Vec<f64> {
        subset.iter().map(|&i| self.values[i]).collect()
    }

    pub fn set_value(&mut self, i: usize, v: Option<f64>) {
        match v {
            Some(v) => {
                self.values[i] = v;
                self.missing[i] = false;
            }
            None => {
                self.values[i] = f64::NAN;
                self.missing[i] = true;
            }
        }
    }

    /// Restriction to a subject subset, preserving the given order.
    pub fn restrict(&self, idx: &[usize]) -> TraitVector {
        TraitVector {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            missing: idx.iter().map(|&i| self.missing[i]).collect(),
            kind: self.kind,
        }
    }
}

/// Subjects usable for one marker test: non-missing in both the marker and
/// the trait. Downstream statistics run on the R submatrix over this set.
pub fn effective_subset(m: &MarkerData, t: &TraitVector) -> Result<Vec<usize>> {
    debug_assert_eq!(m.n_subjects(), t.len());
    let subset: Vec<usize> = (0..m.n_subjects())
        .filter(|&i| !m.is_missing(i) && !t.is_missing(i))
        .collect();
    if subset.len() < 2 {
        return Err(Error::TooFewSubjects { needed: 2, got: subset.len() });
    }
    let first = t.values[subset[0]];
    if subset.iter().all(|&i| t.values[i] == first) {
        return Err(Error::TraitConstant);
    }
    Ok(subset)
}
