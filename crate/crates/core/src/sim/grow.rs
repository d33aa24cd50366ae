//! Random pedigree growth.
//!
//! Starting from one individual, every lineage member of a reproducing
//! generation takes a spouse (an unrelated new founder) with probability
//! `spouse_probability`; each couple bears a Poisson number of children.
//! Members of the final generation do not marry, so every founder who
//! married in has descendants.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::pedigree::{PedRecord, Pedigree, PlaceholderPolicy};

#[derive(Debug, Clone)]
pub struct PedigreeGrowthConfig {
    pub spouse_probability: f64,
    /// Poisson mean of the per-couple offspring count.
    pub offspring_mean: f64,
    pub max_generations: u32,
    /// Top generations whose genotype and phenotype are withheld; the
    /// genealogy keeps them for the correlation matrix.
    pub generations_removed: u32,
    /// Inclusive bounds on the retained (observed) subject count.
    pub target_size_range: (usize, usize),
    /// Optional inclusive bounds on the whole pedigree size. Constraining
    /// both reproduces the narrow-top shape of the reference designs, where
    /// the removed generations hold only a tenth of the members.
    pub total_size_range: Option<(usize, usize)>,
    /// Regrowth budget before giving up.
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for PedigreeGrowthConfig {
    fn default() -> Self {
        PedigreeGrowthConfig {
            spouse_probability: 0.8,
            offspring_mean: 3.0,
            max_generations: 6,
            generations_removed: 3,
            target_size_range: (118, 130),
            total_size_range: None,
            max_attempts: 20_000,
            seed: 0,
        }
    }
}

impl PedigreeGrowthConfig {
    /// Window of roughly +-5% (at least +-3) around a retained-size target.
    pub fn window_for(target: usize) -> (usize, usize) {
        let slack = (target / 20).max(3);
        (target.saturating_sub(slack), target + slack)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.spouse_probability) {
            return Err(Error::InvalidConfig("spouse probability must be in [0, 1]".into()));
        }
        if self.offspring_mean <= 0.0 {
            return Err(Error::InvalidConfig("offspring mean must be positive".into()));
        }
        if self.generations_removed >= self.max_generations {
            return Err(Error::InvalidConfig(
                "generations removed must be smaller than the generation count".into(),
            ));
        }
        if self.target_size_range.0 > self.target_size_range.1 {
            return Err(Error::InvalidConfig("empty target size range".into()));
        }
        Ok(())
    }
}

/// Grows one family tree of exactly `depth` generations (fewer if a
/// generation produces no children). Records carry generation tags and are
/// in creation order, parents before children. Returns the per-generation
/// member counts alongside; `None` if the member cap was exceeded.
#[allow(clippy::too_many_arguments)]
fn grow_one_family<R: Rng>(
    rng: &mut R,
    depth: u32,
    spouse_p: f64,
    offspring_mean: f64,
    family: usize,
    counter: &mut usize,
    records: &mut Vec<PedRecord>,
    cap: usize,
) -> Option<Vec<usize>> {
    let poisson = Poisson::new(offspring_mean).expect("validated offspring mean");
    let mut counts: Vec<usize> = Vec::with_capacity(depth as usize);
    let fresh_id = |counter: &mut usize, g: u32| {
        *counter += 1;
        format!("f{family}g{g}i{counter}")
    };

    let root = fresh_id(counter, 0);
    records.push((root.clone(), None, None, Some(0)));
    counts.push(1);
    let mut lineage: Vec<String> = vec![root];

    for g in 0..depth.saturating_sub(1) {
        let mut next: Vec<String> = Vec::new();
        for member in std::mem::take(&mut lineage) {
            if !rng.gen_bool(spouse_p) {
                continue;
            }
            let spouse = fresh_id(counter, g);
            records.push((spouse.clone(), None, None, Some(g)));
            counts[g as usize] += 1;
            let n_children = poisson.sample(rng) as usize;
            for _ in 0..n_children {
                let child = fresh_id(counter, g + 1);
                records.push((child.clone(), Some(member.clone()), Some(spouse.clone()), Some(g + 1)));
                next.push(child);
            }
            if records.len() > cap {
                return None;
            }
        }
        if next.is_empty() {
            return Some(counts);
        }
        counts.push(next.len());
        lineage = next;
    }
    Some(counts)
}

/// Grows a single pedigree until it completes `max_generations` generations
/// and its retained (bottom) size lands in the target window.
pub fn grow_pedigree<R: Rng>(cfg: &PedigreeGrowthConfig, rng: &mut R) -> Result<Pedigree> {
    cfg.validate()?;
    let (lo, hi) = cfg.target_size_range;
    let cap = 200 * (hi + 10);
    for _ in 0..cfg.max_attempts {
        let mut records = Vec::new();
        let mut counter = 0;
        let counts = match grow_one_family(
            rng,
            cfg.max_generations,
            cfg.spouse_probability,
            cfg.offspring_mean,
            0,
            &mut counter,
            &mut records,
            cap,
        ) {
            Some(c) => c,
            None => continue,
        };
        if counts.len() < cfg.max_generations as usize {
            continue; // died out early
        }
        let retained: usize = counts[cfg.generations_removed as usize..].iter().sum();
        if retained < lo || retained > hi {
            continue;
        }
        if let Some((tlo, thi)) = cfg.total_size_range {
            let total: usize = counts.iter().sum();
            if total < tlo || total > thi {
                continue;
            }
        }
        return Pedigree::from_records(records, PlaceholderPolicy::Reject);
    }
    Err(Error::GrowthBudget { attempts: cfg.max_attempts })
}

/// Grows independent families (depth drawn uniformly from 1..=3 generations)
/// until the subject count reaches `total_size`; the last family is truncated
/// by subject count. Singletons are unmarried founders.
pub fn grow_multifamily_sample<R: Rng>(total_size: usize, rng: &mut R) -> Result<Pedigree> {
    if total_size == 0 {
        return Err(Error::InvalidConfig("sample size must be positive".into()));
    }
    let mut records: Vec<PedRecord> = Vec::new();
    let mut family = 0;
    let mut counter = 0;
    while records.len() < total_size {
        let u: f64 = rng.gen();
        let depth = if u < 0.2 { 1u32 } else if u < 0.6 { 2 } else { 3 };
        grow_one_family(rng, depth, 0.8, 3.0, family, &mut counter, &mut records, 10_000)
            .expect("family growth within cap");
        family += 1;
    }
    records.truncate(total_size);
    Pedigree::from_records(records, PlaceholderPolicy::Reject)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn zero_spouse_probability_exhausts_budget() {
        let cfg = PedigreeGrowthConfig {
            spouse_probability: 0.0,
            max_attempts: 50,
            ..Default::default()
        };
        let mut rng = testkit::rng(1);
        match grow_pedigree(&cfg, &mut rng) {
            Err(Error::GrowthBudget { attempts }) => assert_eq!(attempts, 50),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn retained_size_lands_in_window() {
        let cfg = PedigreeGrowthConfig::default(); // window around 124
        let mut rng = testkit::rng(2);
        let ped = grow_pedigree(&cfg, &mut rng).unwrap();
        let retained = ped.members_from_generation(cfg.generations_removed).len();
        assert!((118..=130).contains(&retained), "retained {retained}");
        // six generations present
        let max_gen = ped
            .members()
            .iter()
            .filter_map(|m| m.generation)
            .max()
            .unwrap();
        assert_eq!(max_gen, 5);
    }

    #[test]
    fn growth_is_deterministic_for_a_seed() {
        let cfg = PedigreeGrowthConfig::default();
        let a = grow_pedigree(&cfg, &mut testkit::rng(3)).unwrap();
        let b = grow_pedigree(&cfg, &mut testkit::rng(3)).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.members().iter().zip(b.members()) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.sire, y.sire);
            assert_eq!(x.dam, y.dam);
        }
    }

    #[test]
    fn singleton_sample() {
        let ped = grow_multifamily_sample(1, &mut testkit::rng(4)).unwrap();
        assert_eq!(ped.len(), 1);
        assert!(ped.member(0).is_founder());
    }

    #[test]
    fn multifamily_hits_exact_size_and_stays_valid() {
        let ped = grow_multifamily_sample(500, &mut testkit::rng(5)).unwrap();
        assert_eq!(ped.len(), 500);
        for (i, m) in ped.members().iter().enumerate() {
            if let Some(s) = m.sire {
                assert!(s < i);
            }
            if let Some(d) = m.dam {
                assert!(d < i);
            }
        }
    }

    #[test]
    fn multifamily_mean_family_size_matches_growth_law() {
        // average sizes observed around 6.3 with a wide per-family range
        let mut total_members = 0usize;
        let mut total_families = 0usize;
        let mut max_size = 0usize;
        for seed in 0..30 {
            let ped = grow_multifamily_sample(600, &mut testkit::rng(seed)).unwrap();
            let mut sizes: std::collections::HashMap<String, usize> = Default::default();
            for m in ped.members() {
                let fam = m.id.split('g').next().unwrap().to_string();
                *sizes.entry(fam).or_insert(0) += 1;
            }
            total_members += ped.len();
            total_families += sizes.len();
            max_size = max_size.max(sizes.values().copied().max().unwrap());
        }
        let mean = total_members as f64 / total_families as f64;
        assert!((mean - 6.3).abs() <= 1.5, "mean family size {mean}");
        assert!(max_size >= 15, "max family size {max_size}");
    }

    #[test]
    fn multifamily_is_deterministic() {
        let a = grow_multifamily_sample(200, &mut testkit::rng(6)).unwrap();
        let b = grow_multifamily_sample(200, &mut testkit::rng(6)).unwrap();
        for (x, y) in a.members().iter().zip(b.members()) {
            assert_eq!(x.id, y.id);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = PedigreeGrowthConfig { offspring_mean: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PedigreeGrowthConfig {
            generations_removed: 6,
            max_generations: 6,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
