//! Pedigree parsing and validation.
//!
//! A pedigree is a directed acyclic genealogy. Members are stored in
//! topological order (parents before children), so downstream passes can
//! stream over members without lookups. File format: whitespace-separated
//! `id sire dam` rows, `.` or `0` for an unknown parent, `#` comments,
//! order-free.

mod kinship;
mod rmatrix;

pub use kinship::{compute_kinship, KinshipTable};
pub use rmatrix::{build_r_matrix, partition_families, FamilyBlock, FamilyPartition, RMatrix};

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// One pedigree member. Parents are indices into the owning pedigree's
/// member list, always smaller than the member's own index.
#[derive(Debug, Clone)]
pub struct Individual {
    pub id: String,
    pub sire: Option<usize>,
    pub dam: Option<usize>,
    /// Generation number, set by the simulator; `None` for parsed files.
    pub generation: Option<u32>,
    /// True for auto-created placeholder founders.
    pub placeholder: bool,
}

impl Individual {
    pub fn is_founder(&self) -> bool {
        self.sire.is_none() && self.dam.is_none()
    }
}

/// Whether parents that are referenced but never defined (and missing second
/// parents in single-parent rows) become auto-created placeholder founders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceholderPolicy {
    Reject,
    AutoCreate,
}

/// Raw member record before validation: (id, sire id, dam id, generation).
pub type PedRecord = (String, Option<String>, Option<String>, Option<u32>);

#[derive(Debug, Clone)]
pub struct Pedigree {
    members: Vec<Individual>,
    index: HashMap<String, usize>,
}

impl Pedigree {
    /// Builds a validated pedigree from raw records. Records may be in any
    /// order; members come out topologically sorted.
    pub fn from_records(records: Vec<PedRecord>, policy: PlaceholderPolicy) -> Result<Pedigree> {
        let mut ids: Vec<String> = Vec::with_capacity(records.len());
        let mut pos: HashMap<String, usize> = HashMap::with_capacity(records.len());
        for (id, _, _, _) in &records {
            if pos.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
            ids.push(id.clone());
        }

        // Resolve parent references; auto-create founders where the policy
        // allows. A single known parent gets a unique synthetic partner so
        // that every member has zero or two known parents.
        let mut parents: Vec<(Option<usize>, Option<usize>)> = Vec::with_capacity(records.len());
        let mut generations: Vec<Option<u32>> = records.iter().map(|r| r.3).collect();
        let mut placeholder = vec![false; records.len()];
        let mut n_synth = 0usize;

        let resolve = |name: &Option<String>,
                           child: &str,
                           ids: &mut Vec<String>,
                           pos: &mut HashMap<String, usize>,
                           placeholder: &mut Vec<bool>,
                           generations: &mut Vec<Option<u32>>|
         -> Result<Option<usize>> {
            match name {
                None => Ok(None),
                Some(p) => {
                    if let Some(&i) = pos.get(p) {
                        return Ok(Some(i));
                    }
                    if policy == PlaceholderPolicy::Reject {
                        return Err(Error::DanglingParent {
                            child: child.to_string(),
                            parent: p.clone(),
                        });
                    }
                    let i = ids.len();
                    ids.push(p.clone());
                    pos.insert(p.clone(), i);
                    placeholder.push(true);
                    generations.push(None);
                    Ok(Some(i))
                }
            }
        };

        for (id, sire, dam, _) in &records {
            let s = resolve(sire, id, &mut ids, &mut pos, &mut placeholder, &mut generations)?;
            let d = resolve(dam, id, &mut ids, &mut pos, &mut placeholder, &mut generations)?;
            let (s, d) = match (s, d) {
                (Some(s), None) | (None, Some(s)) if policy == PlaceholderPolicy::AutoCreate => {
                    n_synth += 1;
                    let synth_id = format!("__founder_{n_synth}");
                    if pos.contains_key(&synth_id) {
                        return Err(Error::DuplicateId(synth_id));
                    }
                    let i = ids.len();
                    ids.push(synth_id.clone());
                    pos.insert(synth_id, i);
                    placeholder.push(true);
                    generations.push(None);
                    (Some(s), Some(i))
                }
                (Some(_), None) => {
                    return Err(Error::DanglingParent {
                        child: id.clone(),
                        parent: ".".to_string(),
                    })
                }
                (None, Some(_)) => {
                    return Err(Error::DanglingParent {
                        child: id.clone(),
                        parent: ".".to_string(),
                    })
                }
                other => other,
            };
            if s == pos.get(id).copied() || d == pos.get(id).copied() {
                return Err(Error::Cycle(vec![id.clone()]));
            }
            parents.push((s, d));
        }
        // Auto-created members are founders.
        parents.resize(ids.len(), (None, None));

        // Kahn topological sort, stable in input order.
        let n = ids.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (c, &(s, d)) in parents.iter().enumerate() {
            for p in [s, d].into_iter().flatten() {
                children[p].push(c);
                indeg[c] += 1;
            }
        }
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&i| indeg[i] == 0)
            .map(std::cmp::Reverse)
            .collect();
        while let Some(std::cmp::Reverse(i)) = ready.pop() {
            order.push(i);
            for &c in &children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if order.len() != n {
            let cyc: Vec<String> = (0..n)
                .filter(|&i| indeg[i] > 0)
                .map(|i| ids[i].clone())
                .collect();
            return Err(Error::Cycle(cyc));
        }

        let mut new_pos = vec![0usize; n];
        for (new_i, &old_i) in order.iter().enumerate() {
            new_pos[old_i] = new_i;
        }
        let mut members = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        for &old_i in &order {
            let (s, d) = parents[old_i];
            let m = Individual {
                id: ids[old_i].clone(),
                sire: s.map(|p| new_pos[p]),
                dam: d.map(|p| new_pos[p]),
                generation: generations[old_i],
                placeholder: placeholder[old_i],
            };
            index.insert(m.id.clone(), members.len());
            members.push(m);
        }
        Ok(Pedigree { members, index })
    }

    /// Parses the `id sire dam` text format.
    pub fn parse<R: BufRead>(reader: R, policy: PlaceholderPolicy) -> Result<Pedigree> {
        let mut records = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let body = match line.split('#').next() {
                Some(b) => b.trim(),
                None => "",
            };
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected `id sire dam`, got {} fields", fields.len()),
                });
            }
            let parent = |f: &str| -> Option<String> {
                if f == "." || f == "0" {
                    None
                } else {
                    Some(f.to_string())
                }
            };
            records.push((fields[0].to_string(), parent(fields[1]), parent(fields[2]), None));
        }
        Pedigree::from_records(records, policy)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Individual {
        &self.members[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.id.as_str())
    }

    /// Ids of auto-created placeholder founders.
    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.members
            .iter()
            .filter(|m| m.placeholder)
            .map(|m| m.id.as_str())
    }

    /// Members of the given generation and later, in pedigree order.
    /// Members with no generation tag are excluded.
    pub fn members_from_generation(&self, g: u32) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.members[i].generation.is_some_and(|gi| gi >= g))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str, policy: PlaceholderPolicy) -> Result<Pedigree> {
        Pedigree::parse(Cursor::new(text), policy)
    }

    #[test]
    fn minimal_trio() {
        let ped = parse("A . .\nB . .\nC A B\n", PlaceholderPolicy::Reject).unwrap();
        assert_eq!(ped.len(), 3);
        let c = ped.position("C").unwrap();
        assert_eq!(ped.member(c).sire, ped.position("A"));
        assert_eq!(ped.member(c).dam, ped.position("B"));
        assert!(ped.member(ped.position("A").unwrap()).is_founder());
    }

    #[test]
    fn dangling_parent_rejected_without_placeholders() {
        let err = parse("C A B\n", PlaceholderPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::DanglingParent { .. }));
    }

    #[test]
    fn dangling_parent_auto_created() {
        let ped = parse("C A B\n", PlaceholderPolicy::AutoCreate).unwrap();
        assert_eq!(ped.len(), 3);
        let ph: Vec<&str> = ped.placeholders().collect();
        assert_eq!(ph.len(), 2);
    }

    #[test]
    fn single_known_parent_gets_unique_founder() {
        let ped = parse("A . .\nC A .\nD A .\n", PlaceholderPolicy::AutoCreate).unwrap();
        // two distinct synthetic founders; no spurious kinship between C and D
        assert_eq!(ped.len(), 5);
        assert_eq!(ped.placeholders().count(), 2);
        let c = ped.member(ped.position("C").unwrap());
        let d = ped.member(ped.position("D").unwrap());
        assert_ne!(c.dam, d.dam);
    }

    #[test]
    fn single_known_parent_rejected_without_placeholders() {
        let err = parse("A . .\nC A .\n", PlaceholderPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::DanglingParent { .. }));
    }

    #[test]
    fn two_member_cycle_detected() {
        let err = parse("X Y .\nY X .\n", PlaceholderPolicy::AutoCreate).unwrap_err();
        match err {
            Error::Cycle(ids) => {
                assert!(ids.contains(&"X".to_string()));
                assert!(ids.contains(&"Y".to_string()));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn self_parent_is_a_cycle() {
        let err = parse("X X .\n", PlaceholderPolicy::AutoCreate).unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = parse("A . .\nA . .\n", PlaceholderPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn order_free_and_comments() {
        let ped = parse(
            "# pedigree\nC A B\t# child first\nA . .\nB 0 0\n",
            PlaceholderPolicy::Reject,
        )
        .unwrap();
        // topological order puts parents before the child
        let c = ped.position("C").unwrap();
        assert!(ped.position("A").unwrap() < c);
        assert!(ped.position("B").unwrap() < c);
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("A . .\nB .\n", PlaceholderPolicy::Reject).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn extra_columns_ignored() {
        let ped = parse("A . . M extra\nB . . F\nC A B M\n", PlaceholderPolicy::Reject).unwrap();
        assert_eq!(ped.len(), 3);
    }

    #[test]
    fn parents_precede_children_in_member_order() {
        let ped = parse(
            "E C D\nC A B\nD A B\nA . .\nB . .\n",
            PlaceholderPolicy::Reject,
        )
        .unwrap();
        for (i, m) in ped.members().iter().enumerate() {
            if let Some(s) = m.sire {
                assert!(s < i);
            }
            if let Some(d) = m.dam {
                assert!(d < i);
            }
        }
    }
}
