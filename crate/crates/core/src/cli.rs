//! Command implementations behind the `kinship`, `scan`, and `simulate`
//! subcommands. Exit-code convention: 0 success, 1 ran but every marker was
//! degenerate, 2 invalid input.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genodata::{
    effective_subset, filter_markers, parse_genotypes, parse_marker_map, parse_phenotypes,
    Cohort, ExclusionReason, MarkerData, ReferencePolicy, TraitVector,
};
use crate::pedigree::{
    compute_kinship, partition_families, FamilyBlock, KinshipTable, Pedigree, PlaceholderPolicy,
};
use crate::sim::{parse_experiment_spec, run_experiment, write_experiment_table};
use crate::stats::{
    fit_null_biallelic, fit_null_multiallelic, fit_null_multiallelic_families,
    fit_null_multifamily, w_all_stratified, w_g_biallelic, w_g_multiallelic,
    w_g_multiallelic_families, w_g_multifamily, AssocResult, Stratum, StratumDesign,
};
use crate::trend::trend_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Gqls,
    Trend,
    Both,
}

impl MethodChoice {
    fn wants_gqls(self) -> bool {
        self != MethodChoice::Trend
    }
    fn wants_trend(self) -> bool {
        self != MethodChoice::Gqls
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gqls" => Ok(MethodChoice::Gqls),
            "trend" => Ok(MethodChoice::Trend),
            "both" => Ok(MethodChoice::Both),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KinshipConfig {
    pub pedigree_path: PathBuf,
    /// Subjects to export; defaults to every member listed in the file.
    pub subjects: Option<Vec<String>>,
    pub out_pairs: PathBuf,
    /// Defaults to the pairs path with a `.self.tsv` extension.
    pub out_self: Option<PathBuf>,
    pub placeholder_policy: PlaceholderPolicy,
}

pub fn cmd_kinship(cfg: &KinshipConfig) -> Result<()> {
    let ped = Pedigree::parse(
        BufReader::new(File::open(&cfg.pedigree_path)?),
        cfg.placeholder_policy,
    )?;
    let n_placeholders = ped.placeholders().count();
    if n_placeholders > 0 {
        eprintln!("note: auto-created {n_placeholders} placeholder founder(s)");
    }
    let subjects: Vec<String> = match &cfg.subjects {
        Some(list) => list.clone(),
        None => ped
            .members()
            .iter()
            .filter(|m| !m.placeholder)
            .map(|m| m.id.clone())
            .collect(),
    };
    let kin = compute_kinship(&ped, &subjects)?;
    let mut pairs = BufWriter::new(File::create(&cfg.out_pairs)?);
    kin.write_pair_table(&mut pairs)?;
    pairs.flush()?;
    let self_path = cfg
        .out_self
        .clone()
        .unwrap_or_else(|| cfg.out_pairs.with_extension("self.tsv"));
    let mut selfs = BufWriter::new(File::create(self_path)?);
    kin.write_self_table(&mut selfs)?;
    selfs.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub pedigree_path: PathBuf,
    pub genotype_path: PathBuf,
    pub phenotype_path: PathBuf,
    pub map_path: Option<PathBuf>,
    pub min_maf: f64,
    pub max_missing: f64,
    pub method: MethodChoice,
    /// Phenotype column holding population labels for the stratified test.
    pub stratify_by: Option<String>,
    pub out: PathBuf,
    pub threads: usize,
    pub merge_duplicates: bool,
}

impl ScanConfig {
    pub fn new(pedigree: &Path, genotypes: &Path, phenotypes: &Path, out: &Path) -> ScanConfig {
        ScanConfig {
            pedigree_path: pedigree.to_path_buf(),
            genotype_path: genotypes.to_path_buf(),
            phenotype_path: phenotypes.to_path_buf(),
            map_path: None,
            min_maf: 0.05,
            max_missing: 0.20,
            method: MethodChoice::Gqls,
            stratify_by: None,
            out: out.to_path_buf(),
            threads: 0,
            merge_duplicates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanStatus {
    Ok,
    /// Markers survived the filters but every statistic was degenerate.
    AllDegenerate,
}

impl ScanStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            ScanStatus::Ok => 0,
            ScanStatus::AllDegenerate => 1,
        }
    }
}

/// One population's precomputed structure, shared across markers.
struct Population {
    label: String,
    /// Cohort indices belonging to this population.
    indices: Vec<usize>,
    kin: KinshipTable,
    blocks: Vec<FamilyBlock>,
}

struct OutRow {
    marker_id: String,
    method: String,
    df: Option<u32>,
    statistic: Option<f64>,
    p_value: Option<f64>,
    mu: Option<Vec<f64>>,
    n_used: Option<usize>,
    flags: Vec<String>,
    subrows: Vec<OutRow>,
}

fn flag_of(e: &Error) -> String {
    match e {
        Error::TraitConstant => "trait_constant".into(),
        Error::Monomorphic => "monomorphic".into(),
        Error::MonomorphicComponent(j) => format!("monomorphic_component:{j}"),
        Error::TooFewSubjects { .. } => "too_few_subjects".into(),
        Error::SingularF => "singular_f".into(),
        Error::NotPositiveDefinite { .. } => "non_positive_definite".into(),
        Error::Population { label, source } => format!("pop:{label}:{}", flag_of(source)),
        other => format!("error:{other}"),
    }
}

fn row_from_result(marker_id: &str, method: String, r: &AssocResult) -> OutRow {
    // there is no pooled allele-frequency estimate for a stratified test;
    // the per-population fits appear in the sub-rows
    let mu = if r.per_population.is_empty() {
        Some(r.null_fit.mu_hat.clone())
    } else {
        None
    };
    OutRow {
        marker_id: marker_id.to_string(),
        method,
        df: Some(r.df),
        statistic: Some(r.statistic),
        p_value: Some(r.p_value),
        mu,
        n_used: Some(r.n_used),
        flags: r.flags.iter().map(|f| f.to_string()).collect(),
        subrows: r
            .per_population
            .iter()
            .map(|(label, sub)| row_from_result(marker_id, format!("stratified:{label}"), sub))
            .collect(),
    }
}

fn degenerate_row(marker_id: &str, method: String, n_used: Option<usize>, e: &Error) -> OutRow {
    OutRow {
        marker_id: marker_id.to_string(),
        method,
        df: None,
        statistic: None,
        p_value: None,
        mu: None,
        n_used,
        flags: vec![flag_of(e)],
        subrows: Vec::new(),
    }
}

/// Runs the score test for one marker inside one population, restricting the
/// correlation structure to the marker's effective subset on demand.
fn gqls_in_population(
    marker: &MarkerData,
    trait_v: &TraitVector,
    pop: &Population,
) -> Result<AssocResult> {
    // effective subset, expressed as positions within the population
    let local: Vec<usize> = (0..pop.indices.len())
        .filter(|&w| {
            let c = pop.indices[w];
            !marker.is_missing(c) && !trait_v.is_missing(c)
        })
        .collect();
    if local.len() < 2 {
        return Err(Error::TooFewSubjects { needed: 2, got: local.len() });
    }
    let cohort_idx: Vec<usize> = local.iter().map(|&w| pop.indices[w]).collect();
    let x: Vec<f64> = cohort_idx
        .iter()
        .map(|&c| trait_v.value(c).expect("subset is non-missing"))
        .collect();

    let full = local.len() == pop.indices.len();
    let kin_eff;
    let blocks_eff;
    let blocks: &[FamilyBlock] = if full {
        &pop.blocks
    } else {
        kin_eff = pop.kin.restrict(&local);
        blocks_eff = partition_families(&kin_eff).build_blocks(&kin_eff)?;
        &blocks_eff
    };

    if marker.k() == 2 {
        let y = marker.y_on(&cohort_idx);
        if blocks.len() == 1 {
            let r = &blocks[0].r;
            let fit = fit_null_biallelic(&y, r)?;
            w_g_biallelic(&x, &y, r, &fit)
        } else {
            let fit = fit_null_multifamily(&y, blocks)?;
            w_g_multifamily(&x, &y, blocks, &fit)
        }
    } else {
        let ys = marker.y_components_on(&cohort_idx);
        if blocks.len() == 1 {
            let r = &blocks[0].r;
            let fit = fit_null_multiallelic(&ys, r)?;
            w_g_multiallelic(&x, &ys, r, &fit)
        } else {
            let fit = fit_null_multiallelic_families(&ys, blocks)?;
            w_g_multiallelic_families(&x, &ys, blocks, &fit)
        }
    }
}

/// (label, trait values, response components, family blocks) for one
/// population at one marker.
type PreparedStratum = (String, Vec<f64>, Vec<Vec<f64>>, Vec<FamilyBlock>);

fn stratified_for_marker(
    marker: &MarkerData,
    trait_v: &TraitVector,
    pops: &[Population],
) -> Result<AssocResult> {
    // per-population effective data; owned blocks must outlive the strata
    let mut prepared: Vec<PreparedStratum> = Vec::new();
    for pop in pops {
        let local: Vec<usize> = (0..pop.indices.len())
            .filter(|&w| {
                let c = pop.indices[w];
                !marker.is_missing(c) && !trait_v.is_missing(c)
            })
            .collect();
        if local.len() < 2 {
            return Err(Error::Population {
                label: pop.label.clone(),
                source: Box::new(Error::TooFewSubjects { needed: 2, got: local.len() }),
            });
        }
        let cohort_idx: Vec<usize> = local.iter().map(|&w| pop.indices[w]).collect();
        let x: Vec<f64> = cohort_idx.iter().map(|&c| trait_v.value(c).unwrap()).collect();
        let ys = if marker.k() == 2 {
            vec![marker.y_on(&cohort_idx)]
        } else {
            marker.y_components_on(&cohort_idx)
        };
        let blocks = if local.len() == pop.indices.len() {
            pop.blocks.clone()
        } else {
            let kin_eff = pop.kin.restrict(&local);
            partition_families(&kin_eff).build_blocks(&kin_eff)?
        };
        prepared.push((pop.label.clone(), x, ys, blocks));
    }
    let strata: Vec<Stratum> = prepared
        .iter()
        .map(|(label, x, ys, blocks)| Stratum {
            label: label.clone(),
            x: x.clone(),
            ys: ys.clone(),
            design: StratumDesign::Families(blocks),
        })
        .collect();
    w_all_stratified(&strata)
}

/// Kinship rows that are numerically identical mark duplicated genomes
/// (monozygotic twins or double-entered subjects). Returns (kept, dropped)
/// pairs, keeping the first occurrence.
#[allow(clippy::needless_range_loop)]
fn find_duplicate_rows(kin: &KinshipTable) -> Vec<(usize, usize)> {
    let n = kin.n();
    let mut dropped = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if dropped[i] {
            continue;
        }
        for j in (i + 1)..n {
            if dropped[j] {
                continue;
            }
            let same_profile = (0..n).all(|k| {
                if k == i || k == j {
                    return true;
                }
                (kin.phi_pair(i, k) - kin.phi_pair(j, k)).abs() <= 1e-12
            });
            let same_genome = (kin.phi_pair(i, j) - kin.phi_pair(i, i)).abs() <= 1e-12
                && (kin.phi_pair(i, i) - kin.phi_pair(j, j)).abs() <= 1e-12;
            if same_profile && same_genome {
                dropped[j] = true;
                out.push((i, j));
            }
        }
    }
    out
}

/// Collapses subjects with identical kinship rows onto the first occurrence,
/// filling its missing genotype/phenotype entries from the duplicate before
/// dropping it. Returns the (kept, dropped) id pairs.
fn merge_duplicate_subjects(
    cohort: &mut Cohort,
    markers: &mut Vec<MarkerData>,
    trait_v: &mut TraitVector,
    kin: &mut KinshipTable,
    labels: &mut Option<Vec<String>>,
) -> Result<Vec<(String, String)>> {
    let dups = find_duplicate_rows(kin);
    if dups.is_empty() {
        return Ok(Vec::new());
    }
    let ids = cohort.ids().to_vec();
    let mut keep: Vec<usize> = (0..cohort.len()).collect();
    let mut merged = Vec::with_capacity(dups.len());
    for &(first, dup) in &dups {
        for m in markers.iter_mut() {
            if m.genotype(first).is_none() {
                if let Some(g) = m.genotype(dup) {
                    m.set_genotype(first, Some(g));
                }
            }
        }
        if trait_v.is_missing(first) {
            if let Some(v) = trait_v.value(dup) {
                trait_v.set_value(first, Some(v));
            }
        }
        keep.retain(|&i| i != dup);
        merged.push((ids[first].clone(), ids[dup].clone()));
    }
    *cohort = Cohort::new(keep.iter().map(|&i| ids[i].clone()).collect())?;
    *trait_v = trait_v.restrict(&keep);
    *markers = markers.iter().map(|m| m.restrict(&keep)).collect();
    *kin = kin.restrict(&keep);
    if let Some(l) = labels.take() {
        *labels = Some(keep.iter().map(|&i| l[i].clone()).collect());
    }
    Ok(merged)
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "NA".into())
}

fn write_row<W: Write>(
    w: &mut W,
    row: &OutRow,
    map: Option<&crate::genodata::MarkerMap>,
) -> std::io::Result<()> {
    let mu = row
        .mu
        .as_ref()
        .map(|m| m.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","))
        .unwrap_or_else(|| ".".into());
    let flags = if row.flags.is_empty() { ".".to_string() } else { row.flags.join(";") };
    write!(
        w,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        row.marker_id,
        row.method,
        row.df.map(|d| d.to_string()).unwrap_or_else(|| "NA".into()),
        fmt_opt_f64(row.statistic),
        fmt_opt_f64(row.p_value),
        mu,
        row.n_used.map(|n| n.to_string()).unwrap_or_else(|| "NA".into()),
        flags
    )?;
    if let Some(map) = map {
        match map.get(&row.marker_id) {
            Some((chrom, pos)) => write!(w, "\t{chrom}\t{pos}")?,
            None => write!(w, "\t.\t.")?,
        }
    }
    writeln!(w)?;
    for sub in &row.subrows {
        write_row(w, sub, map)?;
    }
    Ok(())
}

pub fn cmd_scan(cfg: &ScanConfig) -> Result<ScanStatus> {
    if !(0.0..1.0).contains(&cfg.max_missing) {
        return Err(Error::InvalidConfig("max missing fraction must lie in [0, 1)".into()));
    }
    if !(0.0..0.5).contains(&cfg.min_maf) {
        return Err(Error::InvalidConfig("MAF threshold must lie in [0, 0.5)".into()));
    }
    let ped = Pedigree::parse(
        BufReader::new(File::open(&cfg.pedigree_path)?),
        PlaceholderPolicy::AutoCreate,
    )?;
    let pheno = parse_phenotypes(BufReader::new(File::open(&cfg.phenotype_path)?))?;
    for id in pheno.cohort.ids() {
        if ped.position(id).is_none() {
            return Err(Error::UnknownSubject(id.clone()));
        }
    }
    let mut trait_v = pheno.trait_vector()?;
    let mut markers = parse_genotypes(
        BufReader::new(File::open(&cfg.genotype_path)?),
        &pheno.cohort,
        &ReferencePolicy::LexSmallest,
    )?;
    let map = match &cfg.map_path {
        Some(p) => Some(parse_marker_map(BufReader::new(File::open(p)?))?),
        None => None,
    };

    let mut cohort = pheno.cohort.clone();
    let mut kin = compute_kinship(&ped, cohort.ids())?;
    let mut population_labels: Option<Vec<String>> = match &cfg.stratify_by {
        Some(col) => Some(
            pheno
                .column(col)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("phenotype file has no column '{col}'"))
                })?
                .to_vec(),
        ),
        None => None,
    };
    if cfg.stratify_by.is_some() && cfg.method.wants_trend() {
        return Err(Error::InvalidConfig(
            "the trend test has no stratified form; use --method gqls".into(),
        ));
    }

    if cfg.merge_duplicates {
        for (kept, dropped) in merge_duplicate_subjects(
            &mut cohort,
            &mut markers,
            &mut trait_v,
            &mut kin,
            &mut population_labels,
        )? {
            eprintln!("note: merged duplicate subject '{dropped}' into '{kept}'");
        }
    }

    let (kept, excluded) = filter_markers(markers, cfg.max_missing, cfg.min_maf);
    let n_missing_excl =
        excluded.iter().filter(|(_, r)| *r == ExclusionReason::Missingness).count();
    let n_maf_excl = excluded.iter().filter(|(_, r)| *r == ExclusionReason::Maf).count();

    // population structure (one pseudo-population when unstratified)
    let pops: Vec<Population> = match &population_labels {
        None => {
            let indices: Vec<usize> = (0..cohort.len()).collect();
            let blocks = partition_families(&kin).build_blocks(&kin)?;
            vec![Population { label: String::new(), indices, kin: kin.clone(), blocks }]
        }
        Some(labels) => {
            let mut distinct: Vec<String> = labels.to_vec();
            distinct.sort();
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::InvalidConfig(
                    "stratified scan needs at least 2 population labels".into(),
                ));
            }
            let mut pops = Vec::new();
            for label in distinct {
                let indices: Vec<usize> =
                    (0..cohort.len()).filter(|&i| labels[i] == label).collect();
                let kin_pop = kin.restrict(&indices);
                let blocks = partition_families(&kin_pop).build_blocks(&kin_pop)?;
                pops.push(Population { label, indices, kin: kin_pop, blocks });
            }
            pops
        }
    };
    let stratified = population_labels.is_some();

    let analyze = |marker: &MarkerData| -> Vec<OutRow> {
        let mut rows = Vec::new();
        if cfg.method.wants_gqls() {
            let outcome = if stratified {
                stratified_for_marker(marker, &trait_v, &pops)
            } else {
                gqls_in_population(marker, &trait_v, &pops[0])
            };
            rows.push(match outcome {
                Ok(res) => row_from_result(&marker.marker_id, res.method.to_string(), &res),
                Err(e) => degenerate_row(&marker.marker_id, "gqls".into(), None, &e),
            });
        }
        if cfg.method.wants_trend() {
            let row = if marker.k() != 2 {
                degenerate_row(
                    &marker.marker_id,
                    "trend".into(),
                    None,
                    &Error::InvalidConfig("trend test requires a biallelic marker".into()),
                )
            } else {
                match effective_subset(marker, &trait_v) {
                    Ok(subset) => {
                        let x = trait_v.values_on(&subset);
                        let y = marker.y_on(&subset);
                        match trend_test(&x, trait_v.kind, &y) {
                            Ok(t) => OutRow {
                                marker_id: marker.marker_id.clone(),
                                method: "trend".into(),
                                df: Some(t.df),
                                statistic: Some(t.statistic),
                                p_value: Some(t.p_value),
                                mu: None,
                                n_used: Some(t.n_used),
                                flags: Vec::new(),
                                subrows: Vec::new(),
                            },
                            Err(e) => degenerate_row(
                                &marker.marker_id,
                                "trend".into(),
                                Some(subset.len()),
                                &e,
                            ),
                        }
                    }
                    Err(e) => degenerate_row(&marker.marker_id, "trend".into(), None, &e),
                }
            };
            rows.push(row);
        }
        rows
    };

    let run_all = || -> Vec<Vec<OutRow>> { kept.par_iter().map(analyze).collect() };
    let mut rows: Vec<OutRow> = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run_all)
    } else {
        run_all()
    }
    .into_iter()
    .flatten()
    .collect();

    // p-value order, degenerate rows last, ties broken lexicographically
    rows.sort_by(|a, b| {
        let pa = a.p_value.unwrap_or(f64::INFINITY);
        let pb = b.p_value.unwrap_or(f64::INFINITY);
        pa.partial_cmp(&pb)
            .unwrap()
            .then_with(|| a.marker_id.cmp(&b.marker_id))
            .then_with(|| a.method.cmp(&b.method))
    });

    let mut out = BufWriter::new(File::create(&cfg.out)?);
    write!(out, "marker_id\tmethod\tdf\tstatistic\tp_value\tmu_hat\tn_used\tflags")?;
    if map.is_some() {
        write!(out, "\tchrom\tposition_cM")?;
    }
    writeln!(out)?;
    for row in &rows {
        write_row(&mut out, row, map.as_ref())?;
    }
    out.flush()?;

    let n_tested = kept.len();
    let bonferroni = if n_tested > 0 { 0.05 / n_tested as f64 } else { f64::NAN };
    println!(
        "scan: tested={} excluded_missingness={} excluded_maf={} bonferroni_5pct={:.3e}",
        n_tested, n_missing_excl, n_maf_excl, bonferroni
    );

    let any_valid = rows.iter().any(|r| r.p_value.is_some());
    if n_tested > 0 && !any_valid {
        Ok(ScanStatus::AllDegenerate)
    } else {
        Ok(ScanStatus::Ok)
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub spec_path: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<()> {
    let mut spec = parse_experiment_spec(BufReader::new(File::open(&cfg.spec_path)?))?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(threads) = cfg.threads {
        spec.threads = threads;
    }
    let outcome = run_experiment(&spec)?;
    let mut out = BufWriter::new(File::create(&cfg.out)?);
    write_experiment_table(&mut out, &outcome.rows)?;
    out.flush()?;
    for row in &outcome.rows {
        println!(
            "simulate: {} alpha={} rate={:.4} mc_se={:.4} ({} replicates)",
            row.method, row.alpha, row.rejection_rate, row.se, row.replicates_used
        );
    }
    if outcome.redraws > 0 {
        println!("simulate: redrew {} monomorphic marker draw(s)", outcome.redraws);
    }
    for (method, failures) in &outcome.failures {
        if *failures > 0 {
            println!("simulate: {method} skipped {failures} degenerate replicate(s)");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_rows_are_found_and_kept_first() {
        // subjects 0 and 2 are the same genome
        let ids = vec!["a".into(), "b".into(), "a2".into()];
        let dense = [
            0.5, 0.25, 0.5, //
            0.25, 0.5, 0.25, //
            0.5, 0.25, 0.5,
        ];
        let kin = KinshipTable::from_parts(ids, vec![0.0; 3], &dense).unwrap();
        let dups = find_duplicate_rows(&kin);
        assert_eq!(dups, vec![(0, 2)]);
    }

    #[test]
    fn distinct_subjects_are_not_merged() {
        // full siblings share a profile against others but not a genome
        let ids = vec!["a".into(), "b".into(), "c".into()];
        let dense = [
            0.5, 0.25, 0.25, //
            0.25, 0.5, 0.25, //
            0.25, 0.25, 0.5,
        ];
        let kin = KinshipTable::from_parts(ids, vec![0.0; 3], &dense).unwrap();
        assert!(find_duplicate_rows(&kin).is_empty());
    }

    #[test]
    fn merge_keeps_first_and_fills_gaps_from_the_duplicate() {
        // subject "t2" duplicates "t1"; t1 is missing marker m and the trait
        let mut cohort =
            Cohort::new(vec!["t1".into(), "u".into(), "t2".into()]).unwrap();
        let dense = [
            0.5, 0.25, 0.5, //
            0.25, 0.5, 0.25, //
            0.5, 0.25, 0.5,
        ];
        let mut kin =
            KinshipTable::from_parts(cohort.ids().to_vec(), vec![0.0; 3], &dense).unwrap();
        let mut markers = vec![MarkerData::new(
            "m".into(),
            vec!["0".into(), "1".into()],
            vec![None, Some((0, 1)), Some((1, 1))],
        )];
        let mut trait_v = TraitVector::with_detected_kind(vec![None, Some(0.0), Some(1.0)])
            .unwrap();
        let mut labels = Some(vec!["a".to_string(), "b".to_string(), "a".to_string()]);

        let merged = merge_duplicate_subjects(
            &mut cohort,
            &mut markers,
            &mut trait_v,
            &mut kin,
            &mut labels,
        )
        .unwrap();
        assert_eq!(merged, vec![("t1".to_string(), "t2".to_string())]);
        assert_eq!(cohort.ids(), &["t1", "u"]);
        assert_eq!(markers[0].genotype(0), Some((1, 1))); // filled from t2
        assert_eq!(trait_v.value(0), Some(1.0));
        assert_eq!(kin.n(), 2);
        assert_eq!(labels.unwrap(), vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn method_choice_parses() {
        assert_eq!("both".parse::<MethodChoice>().unwrap(), MethodChoice::Both);
        assert!("nope".parse::<MethodChoice>().is_err());
    }
}
