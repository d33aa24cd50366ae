//! Experiment runner: grows a design once, then per replicate gene-drops
//! markers, generates the trait, and tallies empirical rejection rates.
//!
//! Type-I experiments (null trait models) test a marker unlinked to the
//! causal one; power experiments test the causal marker itself. Replicates
//! own independent RNG streams derived from (seed, replicate index), so the
//! output is identical for any thread count.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genodata::{MarkerData, TraitVector};
use crate::pedigree::{compute_kinship, partition_families, FamilyBlock, Pedigree};
use crate::sim::genedrop::drop_one;
use crate::sim::grow::{grow_multifamily_sample, grow_pedigree, PedigreeGrowthConfig};
use crate::sim::traits::{generate_trait, TraitModel};
use crate::stats::{
    fit_null_biallelic, fit_null_multifamily, w_all_stratified, w_g_biallelic, w_g_multifamily,
    Stratum, StratumDesign,
};
use crate::trend::trend_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Gqls,
    Trend,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Gqls => write!(f, "gqls"),
            Method::Trend => write!(f, "trend"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s.trim() {
            "gqls" => Ok(Method::Gqls),
            "trend" => Ok(Method::Trend),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Design {
    SinglePedigree {
        /// Retained (observed) subject target; the growth window defaults to
        /// roughly +-5% around it.
        target_retained: usize,
        generations: u32,
        removed: u32,
        window: Option<(usize, usize)>,
        /// Optional window on the whole pedigree size (see
        /// [`PedigreeGrowthConfig::total_size_range`]).
        total_window: Option<(usize, usize)>,
    },
    MultiFamily {
        n: usize,
    },
    /// Independent multi-family subpopulations combined by the summed
    /// statistic; one size and one tested MAF per population.
    Stratified {
        sizes: Vec<usize>,
    },
}

impl Design {
    fn label(&self) -> &'static str {
        match self {
            Design::SinglePedigree { .. } => "single-pedigree",
            Design::MultiFamily { .. } => "multi-family",
            Design::Stratified { .. } => "stratified",
        }
    }

    fn n_populations(&self) -> usize {
        match self {
            Design::Stratified { sizes } => sizes.len(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub design: Design,
    /// Tested-marker minor allele frequency, one entry per population.
    pub maf: Vec<f64>,
    /// Frequency of the causal marker behind null traits.
    pub causal_maf: f64,
    pub model_tag: String,
    pub replicates: usize,
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// 0 means the global thread pool.
    pub threads: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..1.0).contains(a) || *a == 0.0)
        {
            return Err(Error::InvalidConfig("alpha levels must lie in (0, 1)".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("at least one method is required".into()));
        }
        if self.maf.len() != self.design.n_populations() {
            return Err(Error::InvalidConfig(format!(
                "need {} MAF value(s) for this design, got {}",
                self.design.n_populations(),
                self.maf.len()
            )));
        }
        if self.maf.iter().any(|m| !(0.0 < *m && *m < 1.0)) || !(0.0 < self.causal_maf && self.causal_maf < 1.0)
        {
            return Err(Error::InvalidConfig("allele frequencies must lie in (0, 1)".into()));
        }
        if let Design::Stratified { sizes } = &self.design {
            if sizes.len() < 2 {
                return Err(Error::InvalidConfig(
                    "stratified design needs at least 2 populations".into(),
                ));
            }
            if self.methods.contains(&Method::Trend) {
                return Err(Error::InvalidConfig(
                    "the trend test has no stratified form; use methods = gqls".into(),
                ));
            }
        }
        TraitModel::from_tag(&self.model_tag)?;
        Ok(())
    }
}

/// One grown population, reused across replicates.
struct PopData {
    ped: Pedigree,
    /// Pedigree indices of the observed subjects.
    sample: Vec<usize>,
    /// Factored family blocks over the sample order.
    blocks: Vec<FamilyBlock>,
}

fn build_population(design: &Design, pop: usize, rng: &mut ChaCha8Rng) -> Result<PopData> {
    let ped = match design {
        Design::SinglePedigree { target_retained, generations, removed, window, total_window } => {
            let cfg = PedigreeGrowthConfig {
                max_generations: *generations,
                generations_removed: *removed,
                target_size_range: window
                    .unwrap_or_else(|| PedigreeGrowthConfig::window_for(*target_retained)),
                total_size_range: *total_window,
                ..Default::default()
            };
            grow_pedigree(&cfg, rng)?
        }
        Design::MultiFamily { n } => grow_multifamily_sample(*n, rng)?,
        Design::Stratified { sizes } => grow_multifamily_sample(sizes[pop], rng)?,
    };
    let sample = match design {
        Design::SinglePedigree { removed, .. } => ped.members_from_generation(*removed),
        _ => (0..ped.len()).collect(),
    };
    let ids: Vec<String> = sample.iter().map(|&i| ped.member(i).id.clone()).collect();
    let kin = compute_kinship(&ped, &ids)?;
    let blocks = partition_families(&kin).build_blocks(&kin)?;
    Ok(PopData { ped, sample, blocks })
}

/// Redraws a marker until it is polymorphic on the sample (bounded; a stuck
/// draw is let through and surfaces as a counted degenerate replicate).
fn drop_polymorphic(
    ped: &Pedigree,
    maf: f64,
    sample: &[usize],
    id: &str,
    rng: &mut ChaCha8Rng,
    redraws: &mut usize,
) -> MarkerData {
    for _ in 0..10_000 {
        let m = MarkerData::new(id.into(), vec!["1".into(), "0".into()], drop_one(ped, maf, rng));
        let first = m.y(sample[0]).unwrap();
        if sample.iter().any(|&i| m.y(i).unwrap() != first) {
            return m;
        }
        *redraws += 1;
    }
    MarkerData::new(id.into(), vec!["1".into(), "0".into()], drop_one(ped, maf, rng))
}

struct RepOutcome {
    redraws: usize,
    /// One entry per spec method; `None` records a degenerate replicate.
    p_values: Vec<Option<f64>>,
}

fn gqls_p(x: &[f64], y: &[f64], blocks: &[FamilyBlock]) -> Result<f64> {
    if blocks.len() == 1 {
        let r = &blocks[0].r;
        let fit = fit_null_biallelic(y, r)?;
        Ok(w_g_biallelic(x, y, r, &fit)?.p_value)
    } else {
        let fit = fit_null_multifamily(y, blocks)?;
        Ok(w_g_multifamily(x, y, blocks, &fit)?.p_value)
    }
}

fn run_replicate(
    spec: &ExperimentSpec,
    model: &TraitModel,
    pops: &[PopData],
    rep: u64,
) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(rep + 1);
    let type_one = TraitModel::tag_is_null(&spec.model_tag);
    let mut redraws = 0usize;

    // per population: trait values and tested-marker dosages over the sample
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(pops.len());
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(pops.len());
    let mut kind = crate::genodata::TraitKind::Quantitative;
    for (p, pop) in pops.iter().enumerate() {
        let causal_freq = if type_one { spec.causal_maf } else { spec.maf[p] };
        let causal: Vec<MarkerData> = (0..model.n_causal())
            .map(|c| {
                drop_polymorphic(
                    &pop.ped,
                    causal_freq,
                    &pop.sample,
                    &format!("causal{c}"),
                    &mut rng,
                    &mut redraws,
                )
            })
            .collect();
        let causal_refs: Vec<&MarkerData> = causal.iter().collect();
        let t: TraitVector =
            generate_trait(model, &causal_refs, &pop.sample, &mut rng).expect("arity checked");
        kind = t.kind;
        let tested = if type_one {
            drop_polymorphic(&pop.ped, spec.maf[p], &pop.sample, "tested", &mut rng, &mut redraws)
        } else {
            causal.into_iter().next().expect("at least one causal marker")
        };
        xs.push((0..pop.sample.len()).map(|i| t.value(i).unwrap()).collect());
        ys.push(pop.sample.iter().map(|&i| tested.y(i).unwrap()).collect());
    }

    let p_values = spec
        .methods
        .iter()
        .map(|m| match m {
            Method::Gqls => {
                if pops.len() == 1 {
                    gqls_p(&xs[0], &ys[0], &pops[0].blocks).ok()
                } else {
                    let strata: Vec<Stratum> = pops
                        .iter()
                        .enumerate()
                        .map(|(p, pop)| Stratum {
                            label: format!("pop{}", p + 1),
                            x: xs[p].clone(),
                            ys: vec![ys[p].clone()],
                            design: StratumDesign::Families(&pop.blocks),
                        })
                        .collect();
                    w_all_stratified(&strata).map(|r| r.p_value).ok()
                }
            }
            Method::Trend => trend_test(&xs[0], kind, &ys[0]).map(|r| r.p_value).ok(),
        })
        .collect();
    RepOutcome { redraws, p_values }
}

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub design: String,
    pub n: String,
    pub maf: String,
    pub model: String,
    pub method: Method,
    pub alpha: f64,
    pub rejection_rate: f64,
    pub se: f64,
    pub replicates_used: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ExperimentRow>,
    /// Monomorphic tested/causal markers redrawn across all replicates.
    pub redraws: usize,
    /// Degenerate replicates per method (excluded from the denominators).
    pub failures: Vec<(Method, usize)>,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let model = TraitModel::from_tag(&spec.model_tag)?;

    // structure stream: the design is grown once and shared by replicates
    let mut structure_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    structure_rng.set_stream(0);
    let mut pops = Vec::with_capacity(spec.design.n_populations());
    for p in 0..spec.design.n_populations() {
        pops.push(build_population(&spec.design, p, &mut structure_rng)?);
    }

    let run_all = || -> Vec<RepOutcome> {
        (0..spec.replicates as u64)
            .into_par_iter()
            .map(|rep| run_replicate(spec, &model, &pops, rep))
            .collect()
    };
    let outcomes = if spec.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run_all)
    } else {
        run_all()
    };

    let mut redraws = 0usize;
    let mut used = vec![0usize; spec.methods.len()];
    let mut hits = vec![vec![0usize; spec.alphas.len()]; spec.methods.len()];
    for o in &outcomes {
        redraws += o.redraws;
        for (m, p) in o.p_values.iter().enumerate() {
            if let Some(p) = p {
                used[m] += 1;
                for (a, alpha) in spec.alphas.iter().enumerate() {
                    if *p <= *alpha {
                        hits[m][a] += 1;
                    }
                }
            }
        }
    }

    let n_label = match &spec.design {
        Design::Stratified { .. } => pops
            .iter()
            .map(|p| p.sample.len().to_string())
            .collect::<Vec<_>>()
            .join(","),
        _ => pops[0].sample.len().to_string(),
    };
    let maf_label = spec
        .maf
        .iter()
        .map(|m| format!("{m}"))
        .collect::<Vec<_>>()
        .join(",");

    let mut rows = Vec::new();
    for (m, method) in spec.methods.iter().enumerate() {
        for (a, alpha) in spec.alphas.iter().enumerate() {
            let denom = used[m].max(1);
            let rate = hits[m][a] as f64 / denom as f64;
            rows.push(ExperimentRow {
                design: spec.design.label().to_string(),
                n: n_label.clone(),
                maf: maf_label.clone(),
                model: spec.model_tag.clone(),
                method: *method,
                alpha: *alpha,
                rejection_rate: rate,
                se: (rate * (1.0 - rate) / denom as f64).sqrt(),
                replicates_used: used[m],
            });
        }
    }
    let failures = spec
        .methods
        .iter()
        .enumerate()
        .map(|(m, method)| (*method, spec.replicates - used[m]))
        .collect();
    Ok(ExperimentOutcome { rows, redraws, failures })
}

pub fn write_experiment_table<W: Write>(mut w: W, rows: &[ExperimentRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "design\tn\tmaf\ttrait_model\tmethod\talpha\trejection_rate\tse\treplicates"
    )?;
    for r in rows {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
            r.design, r.n, r.maf, r.model, r.method, r.alpha, r.rejection_rate, r.se,
            r.replicates_used
        )?;
    }
    Ok(())
}

/// Parses the key-value experiment spec format:
///
/// ```text
/// design = multi-family        # single-pedigree | multi-family | stratified
/// n = 200                      # population sizes, comma-separated if stratified
/// maf = 0.3                    # tested MAF per population
/// model = null_bt
/// replicates = 1000
/// alphas = 0.05, 0.01
/// methods = gqls, trend
/// seed = 42
/// ```
///
/// Optional keys: `causal_maf` (default 0.3), `generations` (6),
/// `generations_removed` (3), `size_window = lo,hi`, `threads`.
pub fn parse_experiment_spec<R: BufRead>(reader: R) -> Result<ExperimentSpec> {
    let mut kv = std::collections::HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or(Error::Parse {
            line: lineno + 1,
            message: "expected `key = value`".into(),
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| Error::InvalidConfig(format!("missing key '{k}'")))
    };
    let parse_list = |v: &str| -> Vec<String> {
        v.split(',').map(|s| s.trim().to_string()).collect()
    };
    let parse_usizes = |k: &str, v: &str| -> Result<Vec<usize>> {
        parse_list(v)
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad {k} value '{s}'")))
            })
            .collect()
    };
    let parse_f64s = |k: &str, v: &str| -> Result<Vec<f64>> {
        parse_list(v)
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad {k} value '{s}'")))
            })
            .collect()
    };

    let sizes = parse_usizes("n", get("n")?)?;
    let design = match get("design")?.as_str() {
        "single-pedigree" => {
            if sizes.len() != 1 {
                return Err(Error::InvalidConfig("single-pedigree takes one size".into()));
            }
            let generations: u32 = kv
                .get("generations")
                .map(|v| v.parse().map_err(|_| Error::InvalidConfig("bad generations".into())))
                .transpose()?
                .unwrap_or(6);
            let removed: u32 = kv
                .get("generations_removed")
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::InvalidConfig("bad generations_removed".into()))
                })
                .transpose()?
                .unwrap_or(3);
            let parse_window = |key: &str| -> Result<Option<(usize, usize)>> {
                match kv.get(key) {
                    Some(v) => {
                        let w = parse_usizes(key, v)?;
                        if w.len() != 2 {
                            return Err(Error::InvalidConfig(format!("{key} takes `lo,hi`")));
                        }
                        Ok(Some((w[0], w[1])))
                    }
                    None => Ok(None),
                }
            };
            Design::SinglePedigree {
                target_retained: sizes[0],
                generations,
                removed,
                window: parse_window("size_window")?,
                total_window: parse_window("total_window")?,
            }
        }
        "multi-family" => {
            if sizes.len() != 1 {
                return Err(Error::InvalidConfig("multi-family takes one size".into()));
            }
            Design::MultiFamily { n: sizes[0] }
        }
        "stratified" => Design::Stratified { sizes },
        other => {
            return Err(Error::InvalidConfig(format!("unknown design '{other}'")))
        }
    };
    let methods = parse_list(get("methods")?)
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<Method>>>()?;
    let spec = ExperimentSpec {
        design,
        maf: parse_f64s("maf", get("maf")?)?,
        causal_maf: kv
            .get("causal_maf")
            .map(|v| v.parse().map_err(|_| Error::InvalidConfig("bad causal_maf".into())))
            .transpose()?
            .unwrap_or(0.3),
        model_tag: get("model")?.clone(),
        replicates: get("replicates")?
            .parse()
            .map_err(|_| Error::InvalidConfig("bad replicates".into()))?,
        alphas: parse_f64s("alphas", get("alphas")?)?,
        methods,
        seed: get("seed")?
            .parse()
            .map_err(|_| Error::InvalidConfig("bad seed".into()))?,
        threads: kv
            .get("threads")
            .map(|v| v.parse().map_err(|_| Error::InvalidConfig("bad threads".into())))
            .transpose()?
            .unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}
