//! Test-support generators and independent oracles. Not part of the public
//! API surface; kept in the library so unit, integration, and acceptance
//! tests share one implementation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::SymMatrix;
use crate::pedigree::{PedRecord, Pedigree, PlaceholderPolicy};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid pedigree with `n` members. Non-founders take two distinct
/// earlier members as parents, so inbreeding loops arise naturally.
pub fn random_pedigree<R: Rng>(rng: &mut R, n: usize) -> Pedigree {
    assert!(n >= 2);
    let mut records: Vec<PedRecord> = Vec::with_capacity(n);
    for i in 0..n {
        let id = format!("I{i}");
        if i < 2 || rng.gen_bool(0.35) {
            records.push((id, None, None, None));
        } else {
            let s = rng.gen_range(0..i);
            let mut d = rng.gen_range(0..i - 1);
            if d >= s {
                d += 1;
            }
            records.push((id, Some(format!("I{s}")), Some(format!("I{d}")), None));
        }
    }
    Pedigree::from_records(records, PlaceholderPolicy::Reject).unwrap()
}

/// Monte-Carlo kinship estimate by dropping distinct founder allele labels
/// down the pedigree. Returns the estimated phi matrix over all members
/// (diagonal = self-kinship). Independent of the tabular recursion.
pub fn ibd_phi_estimate<R: Rng>(ped: &Pedigree, drops: usize, rng: &mut R) -> SymMatrix {
    let n = ped.len();
    let mut counts = vec![0.0_f64; n * (n + 1) / 2];
    let mut labels: Vec<(u32, u32)> = vec![(0, 0); n];
    for _ in 0..drops {
        let mut next_label = 0u32;
        for i in 0..n {
            let m = ped.member(i);
            labels[i] = match (m.sire, m.dam) {
                (Some(s), Some(d)) => {
                    let ls = labels[s];
                    let ld = labels[d];
                    (
                        if rng.gen_bool(0.5) { ls.0 } else { ls.1 },
                        if rng.gen_bool(0.5) { ld.0 } else { ld.1 },
                    )
                }
                _ => {
                    let l = (next_label, next_label + 1);
                    next_label += 2;
                    l
                }
            };
        }
        for i in 0..n {
            let (a0, a1) = labels[i];
            for j in 0..=i {
                let (b0, b1) = labels[j];
                let matches = (a0 == b0) as u32
                    + (a0 == b1) as u32
                    + (a1 == b0) as u32
                    + (a1 == b1) as u32;
                counts[i * (i + 1) / 2 + j] += matches as f64 / 4.0;
            }
        }
    }
    let mut est = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            est.set(i, j, counts[i * (i + 1) / 2 + j] / drops as f64);
        }
    }
    est
}

/// One biallelic marker dropped through the pedigree at the given founder
/// allele frequency; returns reference-allele dosages Y over all members.
pub fn drop_biallelic_y<R: Rng>(ped: &Pedigree, maf: f64, rng: &mut R) -> Vec<f64> {
    let n = ped.len();
    let mut geno: Vec<(bool, bool)> = vec![(false, false); n];
    for i in 0..n {
        let m = ped.member(i);
        geno[i] = match (m.sire, m.dam) {
            (Some(s), Some(d)) => {
                let gs = geno[s];
                let gd = geno[d];
                (
                    if rng.gen_bool(0.5) { gs.0 } else { gs.1 },
                    if rng.gen_bool(0.5) { gd.0 } else { gd.1 },
                )
            }
            _ => (rng.gen_bool(maf), rng.gen_bool(maf)),
        };
    }
    geno.iter()
        .map(|&(a, b)| 0.5 * (a as u8 + b as u8) as f64)
        .collect()
}

/// Redraws until the marker is polymorphic on the pedigree members.
pub fn drop_polymorphic_y<R: Rng>(ped: &Pedigree, maf: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let y = drop_biallelic_y(ped, maf, rng);
        if y.iter().any(|&v| v != y[0]) {
            return y;
        }
    }
}

/// Random non-constant trait: binary Bernoulli(0.4) or standard normal.
pub fn random_trait<R: Rng>(rng: &mut R, n: usize, binary: bool) -> Vec<f64> {
    loop {
        let x: Vec<f64> = if binary {
            (0..n).map(|_| rng.gen_bool(0.4) as u8 as f64).collect()
        } else {
            (0..n)
                .map(|_| {
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    (-2.0 * u1.ln()).sqrt() * u2.cos()
                })
                .collect()
        };
        if x.iter().any(|&v| v != x[0]) {
            return x;
        }
    }
}
