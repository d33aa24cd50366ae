//! Readers and writers for the genotype, phenotype, and marker-map TSVs.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::genodata::{Cohort, MarkerData, TraitVector};

/// Rule choosing the reference allele (the one whose proportion is modeled)
/// per marker. The statistic itself is invariant to this choice.
#[derive(Debug, Clone, Default)]
pub enum ReferencePolicy {
    /// Lexicographically smallest allele label (deterministic default).
    #[default]
    LexSmallest,
    /// Explicit reference per marker id; unlisted markers fall back to
    /// the lexicographic rule.
    PerMarker(HashMap<String, String>),
}

const MISSING_TOKEN: &str = "./.";

/// Parses the genotype TSV: header `subject_id` then one column per marker,
/// tokens `a/b`, `./.` for missing. Every row's subject must belong to the
/// cohort; cohort subjects absent from the file are missing at all markers.
pub fn parse_genotypes<R: BufRead>(
    reader: R,
    cohort: &Cohort,
    policy: &ReferencePolicy,
) -> Result<Vec<MarkerData>> {
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                break line;
            }
            None => {
                return Err(Error::Parse { line: 1, message: "empty genotype file".into() })
            }
        }
    };
    let cols: Vec<&str> = header.split_whitespace().collect();
    if cols.first().map(|c| *c != "subject_id").unwrap_or(true) {
        return Err(Error::Parse {
            line: 1,
            message: "genotype header must start with `subject_id`".into(),
        });
    }
    let marker_ids: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
    let n_markers = marker_ids.len();

    // raw tokens per marker, cohort-aligned
    let mut raw: Vec<Vec<Option<(String, String)>>> = vec![vec![None; cohort.len()]; n_markers];
    let mut seen = vec![false; cohort.len()];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != n_markers + 1 {
            return Err(Error::Parse {
                line: lineno + 2,
                message: format!("expected {} fields, got {}", n_markers + 1, fields.len()),
            });
        }
        let subj = fields[0];
        let row = cohort
            .position(subj)
            .ok_or_else(|| Error::UnknownSubject(subj.to_string()))?;
        if seen[row] {
            return Err(Error::DuplicateId(subj.to_string()));
        }
        seen[row] = true;
        for (m, tok) in fields[1..].iter().enumerate() {
            if *tok == MISSING_TOKEN {
                continue;
            }
            let parts: Vec<&str> = tok.split('/').collect();
            if parts.len() != 2 {
                return Err(Error::InconsistentArity {
                    marker: marker_ids[m].clone(),
                    token: tok.to_string(),
                });
            }
            if parts[0].is_empty() || parts[1].is_empty() {
                return Err(Error::MalformedGenotype {
                    marker: marker_ids[m].clone(),
                    token: tok.to_string(),
                });
            }
            if parts[0] == "." || parts[1] == "." {
                if parts[0] == parts[1] {
                    continue; // treat ". /." variants as missing
                }
                return Err(Error::MalformedGenotype {
                    marker: marker_ids[m].clone(),
                    token: tok.to_string(),
                });
            }
            raw[m][row] = Some((parts[0].to_string(), parts[1].to_string()));
        }
    }

    let mut markers = Vec::with_capacity(n_markers);
    for (m, id) in marker_ids.into_iter().enumerate() {
        let mut alleles: Vec<String> = Vec::new();
        for pair in raw[m].iter().flatten() {
            for a in [&pair.0, &pair.1] {
                if !alleles.contains(a) {
                    alleles.push(a.clone());
                }
            }
        }
        alleles.sort();
        let lookup: HashMap<&str, u8> = alleles
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i as u8))
            .collect();
        let genotypes: Vec<Option<(u8, u8)>> = raw[m]
            .iter()
            .map(|g| g.as_ref().map(|(a, b)| (lookup[a.as_str()], lookup[b.as_str()])))
            .collect();
        let mut marker = MarkerData::new(id.clone(), alleles, genotypes);
        if let ReferencePolicy::PerMarker(map) = policy {
            if let Some(reference) = map.get(&id) {
                marker.set_reference(reference)?;
            }
        }
        markers.push(marker);
    }
    Ok(markers)
}

/// Writes markers back to the genotype TSV format, aligned to the cohort.
pub fn write_genotypes<W: Write>(
    mut w: W,
    cohort: &Cohort,
    markers: &[MarkerData],
) -> std::io::Result<()> {
    write!(w, "subject_id")?;
    for m in markers {
        write!(w, "\t{}", m.marker_id)?;
    }
    writeln!(w)?;
    for (i, id) in cohort.ids().iter().enumerate() {
        write!(w, "{id}")?;
        for m in markers {
            match m.genotype(i) {
                Some((a, b)) => {
                    write!(w, "\t{}/{}", m.alleles()[a as usize], m.alleles()[b as usize])?
                }
                None => write!(w, "\t{MISSING_TOKEN}")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parsed phenotype file: subject order defines the cohort; extra columns
/// (e.g. population labels) are kept as strings for stratification.
#[derive(Debug, Clone)]
pub struct PhenotypeTable {
    pub cohort: Cohort,
    pub trait_values: Vec<Option<f64>>,
    pub extra: Vec<(String, Vec<String>)>,
}

impl PhenotypeTable {
    pub fn trait_vector(&self) -> Result<TraitVector> {
        TraitVector::with_detected_kind(self.trait_values.clone())
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.extra
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Parses the phenotype TSV: header with `subject_id`, `trait`, and any
/// further columns; `.` for a missing trait.
pub fn parse_phenotypes<R: BufRead>(reader: R) -> Result<PhenotypeTable> {
    let mut lines = lines_with_numbers(reader);
    let (lineno, header) = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse { line: 1, message: "empty phenotype file".into() })?;
    let cols: Vec<&str> = header.split_whitespace().collect();
    let subj_col = cols.iter().position(|c| *c == "subject_id").ok_or(Error::Parse {
        line: lineno,
        message: "phenotype header must contain `subject_id`".into(),
    })?;
    let trait_col = cols.iter().position(|c| *c == "trait").ok_or(Error::Parse {
        line: lineno,
        message: "phenotype header must contain `trait`".into(),
    })?;
    let extra_cols: Vec<(usize, String)> = cols
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != subj_col && *i != trait_col)
        .map(|(i, c)| (i, c.to_string()))
        .collect();

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut extra: Vec<(String, Vec<String>)> =
        extra_cols.iter().map(|(_, c)| (c.clone(), Vec::new())).collect();
    for item in lines {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        ids.push(fields[subj_col].to_string());
        let tok = fields[trait_col];
        if tok == "." {
            values.push(None);
        } else {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad trait value '{tok}'"),
            })?;
            values.push(Some(v));
        }
        for (slot, (col, _)) in extra.iter_mut().zip(&extra_cols) {
            slot.1.push(fields[*col].to_string());
        }
    }
    Ok(PhenotypeTable {
        cohort: Cohort::new(ids)?,
        trait_values: values,
        extra,
    })
}

pub fn write_phenotypes<W: Write>(
    mut w: W,
    cohort: &Cohort,
    t: &TraitVector,
) -> std::io::Result<()> {
    writeln!(w, "subject_id\ttrait")?;
    for (i, id) in cohort.ids().iter().enumerate() {
        match t.value(i) {
            Some(v) => writeln!(w, "{id}\t{v}")?,
            None => writeln!(w, "{id}\t.")?,
        }
    }
    Ok(())
}

/// Optional marker map: `marker_id chrom position_cM`.
pub type MarkerMap = HashMap<String, (String, f64)>;

pub fn parse_marker_map<R: BufRead>(reader: R) -> Result<MarkerMap> {
    let mut map = MarkerMap::new();
    for item in lines_with_numbers(reader) {
        let (lineno, line) = item?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected `marker_id chrom position_cM`".into(),
            });
        }
        if fields[0] == "marker_id" {
            continue; // optional header
        }
        let pos: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad position '{}'", fields[2]),
        })?;
        map.insert(fields[0].to_string(), (fields[1].to_string(), pos));
    }
    Ok(map)
}

fn lines_with_numbers<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, l)))
                }
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn cohort(ids: &[&str]) -> Cohort {
        Cohort::new(ids.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn parse_biallelic_and_reference_rule() {
        let text = "subject_id\tm1\ns1\t1/1\ns2\t1/0\ns3\t0/0\n";
        let c = cohort(&["s1", "s2", "s3"]);
        let markers = parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::LexSmallest).unwrap();
        assert_eq!(markers.len(), 1);
        let m = &markers[0];
        // lexicographic reference is "0"
        assert_eq!(m.alleles(), &["0".to_string(), "1".to_string()]);
        assert_eq!(m.y(0), Some(0.0));
        assert_eq!(m.y(1), Some(0.5));
        assert_eq!(m.y(2), Some(1.0));

        let mut map = HashMap::new();
        map.insert("m1".to_string(), "1".to_string());
        let markers =
            parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::PerMarker(map)).unwrap();
        assert_eq!(markers[0].y(0), Some(1.0)); // 1/1 with reference 1
        assert_eq!(markers[0].y(1), Some(0.5)); // 1/0
    }

    #[test]
    fn parse_multiallelic() {
        let text = "subject_id\tm\ns1\t2/3\ns2\t1/1\n";
        let c = cohort(&["s1", "s2"]);
        let markers = parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::LexSmallest).unwrap();
        let m = &markers[0];
        assert_eq!(m.k(), 3);
        assert_eq!(m.y_vector(0), Some(vec![0.0, 0.5]));
        assert_eq!(m.y_vector(1), Some(vec![1.0, 0.0]));
    }

    #[test]
    fn missing_and_absent_subjects() {
        let text = "subject_id\tm\ns1\t./.\ns3\t0/1\n";
        let c = cohort(&["s1", "s2", "s3"]);
        let markers = parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::LexSmallest).unwrap();
        let m = &markers[0];
        assert!(m.is_missing(0));
        assert!(m.is_missing(1)); // s2 absent from the file
        assert!(!m.is_missing(2));
    }

    #[test]
    fn unknown_subject_rejected() {
        let text = "subject_id\tm\nzz\t0/1\n";
        let c = cohort(&["s1"]);
        assert!(matches!(
            parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::LexSmallest),
            Err(Error::UnknownSubject(_))
        ));
    }

    #[test]
    fn bad_tokens_rejected() {
        let c = cohort(&["s1"]);
        let triploid = "subject_id\tm\ns1\t1/2/3\n";
        assert!(matches!(
            parse_genotypes(Cursor::new(triploid), &c, &ReferencePolicy::LexSmallest),
            Err(Error::InconsistentArity { .. })
        ));
        let half = "subject_id\tm\ns1\t1/.\n";
        assert!(matches!(
            parse_genotypes(Cursor::new(half), &c, &ReferencePolicy::LexSmallest),
            Err(Error::MalformedGenotype { .. })
        ));
    }

    #[test]
    fn genotype_round_trip() {
        let text = "subject_id\tm1\tm2\ns1\t1/1\t2/3\ns2\t./.\t1/1\ns3\t0/1\t1/3\n";
        let c = cohort(&["s1", "s2", "s3"]);
        let markers = parse_genotypes(Cursor::new(text), &c, &ReferencePolicy::LexSmallest).unwrap();
        let mut out = Vec::new();
        write_genotypes(&mut out, &c, &markers).unwrap();
        let reparsed =
            parse_genotypes(Cursor::new(out), &c, &ReferencePolicy::LexSmallest).unwrap();
        assert_eq!(markers, reparsed);
    }

    #[test]
    fn phenotypes_with_population_column() {
        let text = "subject_id\ttrait\tpopulation\ns1\t1\tA\ns2\t0\tB\ns3\t.\tA\n";
        let t = parse_phenotypes(Cursor::new(text)).unwrap();
        assert_eq!(t.cohort.ids(), &["s1", "s2", "s3"]);
        assert_eq!(t.trait_values, vec![Some(1.0), Some(0.0), None]);
        assert_eq!(t.column("population").unwrap(), &["A", "B", "A"]);
        let tv = t.trait_vector().unwrap();
        assert_eq!(tv.kind, crate::genodata::TraitKind::Binary);
    }

    #[test]
    fn marker_map_parses() {
        let text = "marker_id\tchrom\tposition_cM\nm1\t5\t94.0\nm2\t14\t0.27\n";
        let map = parse_marker_map(Cursor::new(text)).unwrap();
        assert_eq!(map["m1"], ("5".to_string(), 94.0));
        assert_eq!(map["m2"].1, 0.27);
    }
}
