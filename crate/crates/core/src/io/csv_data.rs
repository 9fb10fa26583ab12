use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::selection::{Dataset, Record, SelectionError};

use super::IoError;

/// Reads an `id,smiles,target` CSV (extra columns ignored).
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, IoError> {
    let path = path.as_ref();
    let text = super::read_to_string(path)?;
    read_csv(text.as_bytes(), &path.display().to_string())
}

/// Like [`load_csv`] on an in-memory reader; `provenance` labels the dataset.
pub fn read_csv(reader: impl std::io::Read, provenance: &str) -> Result<Dataset, IoError> {
    let records = parse(reader, true)?
        .into_iter()
        .map(|m| Record {
            id: m.id,
            smiles: m.smiles,
            target: m.target.expect("target column required"),
        })
        .collect();
    Dataset::new(records, provenance).map_err(|e| match e {
        SelectionError::DuplicateId(id) => IoError::DuplicateId(id),
        other => IoError::Selection(other),
    })
}

/// A molecule to score; the target is known only for labeled files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub id: String,
    pub smiles: String,
    pub target: Option<f64>,
}

/// Reads `id,smiles[,target]`. Without a `target` column every target is
/// `None`; with one, every row must parse.
pub fn load_molecules(path: impl AsRef<Path>) -> Result<Vec<Molecule>, IoError> {
    let text = super::read_to_string(path.as_ref())?;
    let molecules = parse(text.as_bytes(), false)?;
    let mut seen = std::collections::HashSet::new();
    for m in &molecules {
        if !seen.insert(m.id.as_str()) {
            return Err(IoError::DuplicateId(m.id.clone()));
        }
    }
    Ok(molecules)
}

fn parse(reader: impl std::io::Read, require_target: bool) -> Result<Vec<Molecule>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| IoError::Csv(e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let missing = |name: &str| IoError::MissingColumn(name.to_string());
    let ci = column("id").ok_or_else(|| missing("id"))?;
    let cs = column("smiles").ok_or_else(|| missing("smiles"))?;
    let ct = column("target");
    if require_target && ct.is_none() {
        return Err(missing("target"));
    }
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| IoError::Csv(e.to_string()))?;
        // 1-based data row, header excluded
        let index = k + 1;
        let field = |c: usize| row.get(c).unwrap_or("").to_string();
        let target = match ct {
            None => None,
            Some(ct) => {
                let raw = field(ct);
                let value: f64 = raw
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or(IoError::UnparsableTarget { row: index, value: raw })?;
                Some(value)
            }
        };
        out.push(Molecule {
            id: field(ci),
            smiles: field(cs),
            target,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_three_rows() {
        let d = read_csv("id,name,smiles,target\nA,x,C,1.5\nB,y,CO,-2\nC,z,CC,0\n".as_bytes(), "t").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.records()[1].smiles, "CO");
        assert_eq!(d.records()[1].target, -2.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            read_csv("id,smiles\nA,C\n".as_bytes(), "t"),
            Err(IoError::MissingColumn("target".into()))
        );
        assert_eq!(
            read_csv("id,smiles,target\nA,C,1\nA,CC,2\n".as_bytes(), "t"),
            Err(IoError::DuplicateId("A".into()))
        );
        assert_eq!(
            read_csv("id,smiles,target\nA,C,1\nB,CC,abc\n".as_bytes(), "t"),
            Err(IoError::UnparsableTarget {
                row: 2,
                value: "abc".into()
            })
        );
    }
}
