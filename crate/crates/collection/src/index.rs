use serde::{Deserialize, Serialize};

use crate::{CollectionError, MatrixRef};

/// One row of the collection's `ssstats.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub group: String,
    pub name: String,
    pub nrows: usize,
    pub ncols: usize,
    /// Nonzeros counted over the full matrix (both triangles when symmetric).
    pub nnz: usize,
    pub kind: Option<String>,
}

impl IndexEntry {
    pub fn to_ref(&self) -> MatrixRef {
        MatrixRef {
            name: self.name.clone(),
            group: Some(self.group.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CollectionIndex {
    pub entries: Vec<IndexEntry>,
}

impl CollectionIndex {
    /// The file opens with a count line and a date line, then one row per
    /// matrix: `group,name,nrows,ncols,nnz,...,kind,...`. Lines that do not
    /// have numeric size columns are skipped.
    pub fn parse(text: &str) -> Result<Self, CollectionError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CollectionError::Index(e.to_string()))?;
            if record.len() < 5 {
                continue;
            }
            let num = |i: usize| record[i].trim().parse::<usize>().ok();
            let (Some(nrows), Some(ncols), Some(nnz)) = (num(2), num(3), num(4)) else {
                continue;
            };
            entries.push(IndexEntry {
                group: record[0].trim().to_string(),
                name: record[1].trim().to_string(),
                nrows,
                ncols,
                nnz,
                kind: record.get(11).map(|k| k.trim().to_string()),
            });
        }
        if entries.is_empty() {
            return Err(CollectionError::Index("no matrix rows".into()));
        }
        Ok(Self { entries })
    }

    /// Exact name match first, then case-insensitive.
    pub fn resolve(&self, name: &str) -> Result<&IndexEntry, CollectionError> {
        let exact: Vec<&IndexEntry> = self.entries.iter().filter(|e| e.name == name).collect();
        if let Some(r) = pick(name, exact) {
            return r;
        }
        let folded: Vec<&IndexEntry> = self
            .entries
            .iter()
            .filter(|e| e.name.eq_ignore_ascii_case(name))
            .collect();
        pick(name, folded).unwrap_or_else(|| Err(CollectionError::NotFound(name.to_string())))
    }
}

fn pick<'a>(
    name: &str,
    hits: Vec<&'a IndexEntry>,
) -> Option<Result<&'a IndexEntry, CollectionError>> {
    match hits.len() {
        0 => None,
        1 => Some(Ok(hits[0])),
        _ => Some(Err(CollectionError::Ambiguous {
            name: name.to_string(),
            candidates: hits.iter().map(|e| format!("{}/{}", e.group, e.name)).collect(),
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "3\n31-Oct-2023 18:12:37\n\
        HB,1138_bus,1138,1138,4054,1,0,1,1,1,1,power network problem,2596\n\
        Averous,epb3,84617,84617,463625,1,0,0,0,0.667,0,thermal problem,463625\n\
        Dup,same,2,2,2,1,0,0,0,1,1,x,2\n\
        Other,same,3,3,3,1,0,0,0,1,1,x,3\n";

    #[test]
    fn parses_rows_and_skips_preamble() {
        let idx = CollectionIndex::parse(SAMPLE).unwrap();
        assert_eq!(idx.entries.len(), 4);
        let e = idx.resolve("epb3").unwrap();
        assert_eq!((e.group.as_str(), e.nrows, e.nnz), ("Averous", 84617, 463625));
        assert_eq!(e.kind.as_deref(), Some("thermal problem"));
    }

    #[test]
    fn resolution_rules() {
        let idx = CollectionIndex::parse(SAMPLE).unwrap();
        assert_eq!(idx.resolve("EPB3").unwrap().name, "epb3");
        assert!(matches!(idx.resolve("no_such_matrix"), Err(CollectionError::NotFound(_))));
        match idx.resolve("same") {
            Err(CollectionError::Ambiguous { candidates, .. }) => assert_eq!(candidates.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_index_is_an_error() {
        assert!(CollectionIndex::parse("0\ndate\n").is_err());
    }
}
