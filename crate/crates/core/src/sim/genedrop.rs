//! Mendelian gene dropping: founder genotypes drawn by random mating at a
//! given allele frequency, each child allele a uniform pick from one parent,
//! independently per marker (markers are unlinked).

use rand::Rng;

use crate::genodata::MarkerData;
use crate::pedigree::Pedigree;

/// Drops `n_markers` independent biallelic markers through `ped`. Allele "1"
/// (the reference) has founder frequency `founder_maf`.
pub fn gene_drop<R: Rng>(
    ped: &Pedigree,
    founder_maf: f64,
    n_markers: usize,
    rng: &mut R,
) -> Vec<MarkerData> {
    assert!((0.0..=1.0).contains(&founder_maf));
    (0..n_markers)
        .map(|j| {
            MarkerData::new(
                format!("m{j}"),
                vec!["1".into(), "0".into()],
                drop_one(ped, founder_maf, rng),
            )
        })
        .collect()
}

/// One marker; allele index 0 is "1". Returns per-member genotypes.
pub(crate) fn drop_one<R: Rng>(
    ped: &Pedigree,
    founder_maf: f64,
    rng: &mut R,
) -> Vec<Option<(u8, u8)>> {
    let n = ped.len();
    let mut geno: Vec<(u8, u8)> = Vec::with_capacity(n);
    for i in 0..n {
        let m = ped.member(i);
        let g = match (m.sire, m.dam) {
            (Some(s), Some(d)) => {
                let gs = geno[s];
                let gd = geno[d];
                (
                    if rng.gen_bool(0.5) { gs.0 } else { gs.1 },
                    if rng.gen_bool(0.5) { gd.0 } else { gd.1 },
                )
            }
            _ => (
                if rng.gen_bool(founder_maf) { 0 } else { 1 },
                if rng.gen_bool(founder_maf) { 0 } else { 1 },
            ),
        };
        geno.push(g);
    }
    geno.into_iter().map(Some).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pedigree::PlaceholderPolicy;
    use crate::testkit;
    use std::io::Cursor;

    #[test]
    fn fixed_founder_frequency_one_is_all_reference() {
        let ped = Pedigree::parse(
            Cursor::new("A . .\nB . .\nC A B\n"),
            PlaceholderPolicy::Reject,
        )
        .unwrap();
        let markers = gene_drop(&ped, 1.0, 3, &mut testkit::rng(1));
        for m in &markers {
            for i in 0..3 {
                assert_eq!(m.y(i), Some(1.0));
            }
        }
    }

    #[test]
    fn founder_frequency_is_binomial() {
        // 10,000 founders, one marker: allele-1 frequency within 3 SEs
        let text: String = (0..10_000).map(|i| format!("F{i} . .\n")).collect();
        let ped =
            Pedigree::parse(Cursor::new(text), PlaceholderPolicy::Reject).unwrap();
        let maf = 0.3;
        let markers = gene_drop(&ped, maf, 1, &mut testkit::rng(2));
        let mean: f64 =
            (0..10_000).map(|i| markers[0].y(i).unwrap()).sum::<f64>() / 10_000.0;
        let se = (maf * (1.0 - maf) / (2.0 * 10_000.0)).sqrt();
        assert!((mean - maf).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn opposite_homozygote_parents_give_heterozygous_children() {
        let ped = Pedigree::parse(
            Cursor::new("A . .\nB . .\nC A B\nD A B\n"),
            PlaceholderPolicy::Reject,
        )
        .unwrap();
        let mut rng = testkit::rng(3);
        // keep drops where the parents came out (1/1) x (0/0)
        let mut checked = 0;
        while checked < 50 {
            let g = drop_one(&ped, 0.5, &mut rng);
            let (a, b) = (g[0].unwrap(), g[1].unwrap());
            if a == (0, 0) && b == (1, 1) {
                assert_eq!(g[2].unwrap(), (0, 1));
                assert_eq!(g[3].unwrap(), (0, 1));
                checked += 1;
            }
        }
    }

    #[test]
    fn drops_are_deterministic_per_seed() {
        let ped = grow_like_forest();
        let a = gene_drop(&ped, 0.3, 2, &mut testkit::rng(4));
        let b = gene_drop(&ped, 0.3, 2, &mut testkit::rng(4));
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
    }

    fn grow_like_forest() -> Pedigree {
        crate::sim::grow_multifamily_sample(40, &mut testkit::rng(9)).unwrap()
    }

    #[test]
    fn dropped_ibd_sharing_matches_recursive_kinship() {
        // 20-member pedigree, 50,000 drops, every pair within 3 binomial SEs
        let ped = testkit::random_pedigree(&mut testkit::rng(10), 20);
        let ids: Vec<String> = ped.ids().map(String::from).collect();
        let kin = crate::pedigree::compute_kinship(&ped, &ids).unwrap();
        let drops = 50_000;
        let est = testkit::ibd_phi_estimate(&ped, drops, &mut testkit::rng(11));
        for i in 0..20 {
            for j in 0..=i {
                let phi_hat = est.get(i, j);
                let phi = kin.phi_pair(i, j);
                let se = (phi_hat * (1.0 - phi_hat) / drops as f64).sqrt();
                assert!(
                    (2.0 * phi_hat - 2.0 * phi).abs() <= 3.0 * 2.0 * se,
                    "pair ({i},{j}): est {phi_hat}, exact {phi}"
                );
            }
        }
    }
}
