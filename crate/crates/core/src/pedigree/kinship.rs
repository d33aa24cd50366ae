//! Kinship and inbreeding coefficients by the tabular recursion.
//!
//! For individuals a, b with b topologically later (so b cannot be an
//! ancestor of a):
//!
//!   phi(a, a) = (1 + F_a) / 2,   F_a = phi(sire_a, dam_a), founders F = 0
//!   phi(a, b) = (phi(a, sire_b) + phi(a, dam_b)) / 2
//!
//! with phi(a, founder) = 0 for unrelated founders. The table is computed
//! over the ancestor closure of the requested subjects — members outside the
//! closure cannot contribute to any requested coefficient — and returned
//! restricted to the requested subjects.

use std::io::Write;

use crate::error::{Error, Result};
use crate::pedigree::Pedigree;

/// Inbreeding and pairwise kinship coefficients for an ordered subject list.
/// The pair table stores self-kinship `(1 + F_i) / 2` on its diagonal.
#[derive(Debug, Clone)]
pub struct KinshipTable {
    subject_ids: Vec<String>,
    phi_self: Vec<f64>,
    /// Packed lower triangle: entry (i, j) with i >= j at i*(i+1)/2 + j.
    pair: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl KinshipTable {
    pub fn n(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    /// Inbreeding coefficient of subject `i`.
    pub fn phi_self(&self, i: usize) -> f64 {
        self.phi_self[i]
    }

    /// Kinship coefficient; the diagonal is self-kinship `(1 + F_i) / 2`.
    pub fn phi_pair(&self, i: usize, j: usize) -> f64 {
        self.pair[tri_index(i, j)]
    }

    /// Builds a table from raw coefficients (e.g. an external kinship tool).
    /// `pair` is row-major dense n*n; symmetry and coefficient bounds are
    /// checked.
    pub fn from_parts(subject_ids: Vec<String>, phi_self: Vec<f64>, pair: &[f64]) -> Result<Self> {
        let n = subject_ids.len();
        if phi_self.len() != n || pair.len() != n * n {
            return Err(Error::InvalidConfig(
                "kinship table dimensions do not match subject list".into(),
            ));
        }
        for (i, &f) in phi_self.iter().enumerate() {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "inbreeding coefficient out of range for '{}': {f}",
                    subject_ids[i]
                )));
            }
        }
        let mut packed = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let v = pair[i * n + j];
                if (v - pair[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(format!(
                        "kinship matrix is not symmetric at ({i}, {j})"
                    )));
                }
                let bound = (1.0 + phi_self[i].min(phi_self[j])) / 2.0;
                if !(0.0..=bound + 1e-12).contains(&v) {
                    return Err(Error::InvalidConfig(format!(
                        "kinship coefficient out of range at ({i}, {j}): {v}"
                    )));
                }
                packed[tri_index(i, j)] = v;
            }
        }
        Ok(KinshipTable { subject_ids, phi_self, pair: packed })
    }

    /// Restriction to a subset of subjects, preserving the given order.
    pub fn restrict(&self, idx: &[usize]) -> KinshipTable {
        let subject_ids = idx.iter().map(|&i| self.subject_ids[i].clone()).collect();
        let phi_self = idx.iter().map(|&i| self.phi_self[i]).collect();
        let mut pair = vec![0.0; idx.len() * (idx.len() + 1) / 2];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().take(a + 1) {
                pair[tri_index(a, b)] = self.phi_pair(i, j);
            }
        }
        KinshipTable { subject_ids, phi_self, pair }
    }

    /// Writes the pair table `id_i id_j phi` (diagonal included) at full
    /// precision.
    pub fn write_pair_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id_i\tid_j\tphi")?;
        for i in 0..self.n() {
            for j in 0..=i {
                writeln!(
                    w,
                    "{}\t{}\t{:.16e}",
                    self.subject_ids[i],
                    self.subject_ids[j],
                    self.phi_pair(i, j)
                )?;
            }
        }
        Ok(())
    }

    /// Writes the inbreeding table `id phi_self` at full precision.
    pub fn write_self_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id\tphi_self")?;
        for i in 0..self.n() {
            writeln!(w, "{}\t{:.16e}", self.subject_ids[i], self.phi_self[i])?;
        }
        Ok(())
    }
}

/// Computes inbreeding and pairwise kinship for `subjects`, which must all
/// be pedigree members.
pub fn compute_kinship<S: AsRef<str>>(ped: &Pedigree, subjects: &[S]) -> Result<KinshipTable> {
    let mut requested = Vec::with_capacity(subjects.len());
    for s in subjects {
        let id = s.as_ref();
        let i = ped
            .position(id)
            .ok_or_else(|| Error::UnknownSubject(id.to_string()))?;
        requested.push(i);
    }

    // Ancestor closure of the requested subjects.
    let mut in_closure = vec![false; ped.len()];
    let mut stack: Vec<usize> = requested.clone();
    while let Some(i) = stack.pop() {
        if in_closure[i] {
            continue;
        }
        in_closure[i] = true;
        let m = ped.member(i);
        for p in [m.sire, m.dam].into_iter().flatten() {
            stack.push(p);
        }
    }
    let closure: Vec<usize> = (0..ped.len()).filter(|&i| in_closure[i]).collect();
    let mut closure_pos = vec![usize::MAX; ped.len()];
    for (p, &i) in closure.iter().enumerate() {
        closure_pos[i] = p;
    }

    let c = closure.len();
    let mut tri = vec![0.0_f64; c * (c + 1) / 2];
    let mut inbreeding = vec![0.0_f64; c];
    for (p, &i) in closure.iter().enumerate() {
        let m = ped.member(i);
        match (m.sire, m.dam) {
            (Some(s), Some(d)) => {
                let ps = closure_pos[s];
                let pd = closure_pos[d];
                inbreeding[p] = tri[tri_index(ps, pd)];
                for j in 0..p {
                    tri[tri_index(p, j)] = 0.5 * (tri[tri_index(ps, j)] + tri[tri_index(pd, j)]);
                }
            }
            _ => {
                // founder: unrelated to everything before it
                inbreeding[p] = 0.0;
            }
        }
        tri[tri_index(p, p)] = 0.5 * (1.0 + inbreeding[p]);
    }

    // Restrict to the requested subjects in their given order.
    let n = requested.len();
    let mut pair = vec![0.0_f64; n * (n + 1) / 2];
    let mut phi_self = vec![0.0_f64; n];
    for (a, &i) in requested.iter().enumerate() {
        phi_self[a] = inbreeding[closure_pos[i]];
        for (b, &j) in requested.iter().enumerate().take(a + 1) {
            pair[tri_index(a, b)] = tri[tri_index(closure_pos[i], closure_pos[j])];
        }
    }
    Ok(KinshipTable {
        subject_ids: requested.iter().map(|&i| ped.member(i).id.clone()).collect(),
        phi_self,
        pair,
    })
}
