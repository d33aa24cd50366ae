//! Correlation matrix of allele proportions and its family-block structure.
//!
//! R has diagonal `1 + phi_i` and off-diagonal `2 * phi_ij`. It is positive
//! definite once monozygotic duplicates are merged; the Cholesky factor is
//! cached so every downstream solve reuses it.

use crate::error::Result;
use crate::linalg::{Cholesky, SymMatrix};
use crate::pedigree::KinshipTable;

#[derive(Debug, Clone)]
pub struct RMatrix {
    subject_ids: Vec<String>,
    entries: SymMatrix,
    factor: Cholesky,
}

impl RMatrix {
    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn entries(&self) -> &SymMatrix {
        &self.entries
    }

    /// Solves R x = b through the cached factorization.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }
}

/// Assembles and factors R from a complete kinship table.
pub fn build_r_matrix(kin: &KinshipTable) -> Result<RMatrix> {
    let n = kin.n();
    let mut entries = SymMatrix::zeros(n);
    for i in 0..n {
        entries.set(i, i, 1.0 + kin.phi_self(i));
        for j in 0..i {
            entries.set(i, j, 2.0 * kin.phi_pair(i, j));
        }
    }
    let factor = entries.cholesky()?;
    Ok(RMatrix {
        subject_ids: kin.subject_ids().to_vec(),
        entries,
        factor,
    })
}

/// Connected components of the kinship graph (edges where phi > 0).
/// Subjects in different blocks are exactly uncorrelated.
#[derive(Debug, Clone)]
pub struct FamilyPartition {
    blocks: Vec<Vec<usize>>,
}

impl FamilyPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }
}

pub fn partition_families(kin: &KinshipTable) -> FamilyPartition {
    let n = kin.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if kin.phi_pair(i, j) > 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    FamilyPartition {
        blocks: by_root.into_values().collect(),
    }
}

/// One family block ready for block-diagonal solves: member positions in the
/// enclosing subject order plus the factored block correlation matrix.
#[derive(Debug, Clone)]
pub struct FamilyBlock {
    pub members: Vec<usize>,
    pub r: RMatrix,
}

impl FamilyPartition {
    /// Builds factored per-block R matrices from the same kinship table the
    /// partition came from.
    pub fn build_blocks(&self, kin: &KinshipTable) -> Result<Vec<FamilyBlock>> {
        self.blocks
            .iter()
            .map(|members| {
                let sub = kin.restrict(members);
                Ok(FamilyBlock {
                    members: members.clone(),
                    r: build_r_matrix(&sub)?,
                })
            })
            .collect()
    }
}
