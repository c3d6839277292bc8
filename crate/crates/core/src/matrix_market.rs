//! Matrix Market coordinate reader and writer.
//!
//! Supported: `matrix coordinate {real|integer} {general|symmetric}`, 1-based
//! indices, `%` comments. Symmetric files are expanded to full storage.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::{MatrixError, SparseMatrix};

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported Matrix Market variant: {0}")]
    Unsupported(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("entry ({row}, {col}) outside declared {nrows}x{ncols}")]
    OutOfBounds {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("duplicate entry at ({row}, {col}) (1-based)")]
    Duplicate { row: usize, col: usize },
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetadata {
    pub name: String,
    pub symmetry: Symmetry,
    /// Stored nonzeros after symmetric expansion.
    pub declared_nnz: usize,
    /// Entry count from the size line of the file.
    pub file_entries: usize,
    pub source: String,
}

pub fn parse_matrix_market<R: BufRead>(
    reader: R,
    name: &str,
    source: &str,
) -> Result<(SparseMatrix, MatrixMetadata), MarketError> {
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| MarketError::Header("empty input".into()))?;
    let header = header?;
    let symmetry = parse_banner(&header)?;

    let (nrows, ncols, declared) = loop {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| MarketError::Header("missing size line".into()))?;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(MarketError::Syntax {
                line: lineno + 1,
                message: format!("size line needs 3 integers, got `{trimmed}`"),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| MarketError::Syntax {
                line: lineno + 1,
                message: format!("bad integer `{s}` in size line"),
            })
        };
        break (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
    };
    if symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(MarketError::Header(format!(
            "symmetric matrix must be square, got {nrows}x{ncols}"
        )));
    }

    let capacity = match symmetry {
        Symmetry::General => declared,
        Symmetry::Symmetric => 2 * declared,
    };
    let mut triplets = Vec::with_capacity(capacity);
    let mut found = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let syntax = |message: String| MarketError::Syntax {
            line: lineno + 1,
            message,
        };
        let mut it = trimmed.split_whitespace();
        let (Some(r), Some(c), Some(v)) = (it.next(), it.next(), it.next()) else {
            return Err(syntax(format!("expected `row col value`, got `{trimmed}`")));
        };
        if it.next().is_some() {
            return Err(syntax(format!("trailing fields in `{trimmed}`")));
        }
        let row: usize = r.parse().map_err(|_| syntax(format!("bad row `{r}`")))?;
        let col: usize = c.parse().map_err(|_| syntax(format!("bad column `{c}`")))?;
        let value: f64 = v.parse().map_err(|_| syntax(format!("bad value `{v}`")))?;
        if row == 0 || col == 0 || row > nrows || col > ncols {
            return Err(MarketError::OutOfBounds {
                row,
                col,
                nrows,
                ncols,
            });
        }
        if !value.is_finite() {
            return Err(syntax(format!("non-finite value `{v}`")));
        }
        found += 1;
        triplets.push((row - 1, col - 1, value));
        if symmetry == Symmetry::Symmetric && row != col {
            triplets.push((col - 1, row - 1, value));
        }
    }
    if found != declared {
        return Err(MarketError::EntryCount {
            expected: declared,
            found,
        });
    }

    let matrix = SparseMatrix::from_triplets(nrows, ncols, &triplets).map_err(|e| match e {
        MatrixError::DuplicateEntry { row, col } => MarketError::Duplicate {
            row: row + 1,
            col: col + 1,
        },
        other => MarketError::Matrix(other),
    })?;
    let metadata = MatrixMetadata {
        name: name.to_string(),
        symmetry,
        declared_nnz: matrix.nnz(),
        file_entries: declared,
        source: source.to_string(),
    };
    Ok((matrix, metadata))
}

fn parse_banner(line: &str) -> Result<Symmetry, MarketError> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(MarketError::Header(format!(
            "first line must start with %%MatrixMarket, got `{line}`"
        )));
    }
    if tokens.len() != 5 {
        return Err(MarketError::Header(format!(
            "banner needs object, format, field and symmetry: `{line}`"
        )));
    }
    if tokens[1] != "matrix" {
        return Err(MarketError::Unsupported(format!("object `{}`", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(MarketError::Unsupported(format!("format `{}`", tokens[2])));
    }
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(MarketError::Unsupported(format!("field `{other}`"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(MarketError::Unsupported(format!("symmetry `{other}`"))),
    }
}

/// Reads a `.mtx` file, transparently gunzipping when the gzip magic is present.
pub fn read_matrix_market_path(
    path: impl AsRef<Path>,
) -> Result<(SparseMatrix, MatrixMetadata), MarketError> {
    let path = path.as_ref();
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let got = file.read(&mut magic)?;
    let head = io::Cursor::new(magic[..got].to_vec());
    let chained = head.chain(file);
    let name = matrix_name_from_path(path);
    let source = path.display().to_string();
    if got == 2 && magic == [0x1f, 0x8b] {
        parse_matrix_market(BufReader::new(GzDecoder::new(chained)), &name, &source)
    } else {
        parse_matrix_market(BufReader::new(chained), &name, &source)
    }
}

fn matrix_name_from_path(path: &Path) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    file.trim_end_matches(".gz")
        .trim_end_matches(".mtx")
        .to_string()
}

/// Writes the matrix as `coordinate real`. With `Symmetry::Symmetric` only the
/// lower triangle is emitted; the caller must pass a symmetric matrix.
pub fn write_matrix_market<W: Write>(
    mut out: W,
    matrix: &SparseMatrix,
    symmetry: Symmetry,
) -> Result<(), MarketError> {
    if symmetry == Symmetry::Symmetric && !matrix.is_symmetric() {
        return Err(MarketError::Unsupported(
            "cannot write a non-symmetric matrix as symmetric".into(),
        ));
    }
    let keep = |i: usize, j: usize| symmetry == Symmetry::General || i >= j;
    let count = matrix.iter().filter(|&(i, j, _)| keep(i, j)).count();
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    writeln!(out, "%%MatrixMarket matrix coordinate real {kind}")?;
    writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), count)?;
    for (i, j, v) in matrix.iter().filter(|&(i, j, _)| keep(i, j)) {
        // `{}` on f64 prints the shortest string that round-trips exactly.
        writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<(SparseMatrix, MatrixMetadata), MarketError> {
        parse_matrix_market(text.as_bytes(), "t", "inline")
    }

    #[test]
    fn identity_file() {
        let (a, meta) =
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n")
                .unwrap();
        assert_eq!(a.row_starts(), &[0, 1, 2]);
        assert_eq!(a.values(), &[1.0, 1.0]);
        assert_eq!(meta.symmetry, Symmetry::General);
        assert_eq!(meta.declared_nnz, 2);
    }

    #[test]
    fn symmetric_lower_triangle_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 2\n2 1 1\n2 2 3\n";
        let (a, meta) = parse(text).unwrap();
        // Dense expansion of the same entries by hand.
        let dense = [[2.0, 1.0], [1.0, 3.0]];
        assert_eq!(a.nnz(), 4);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a.get(i, j), dense[i][j]);
            }
        }
        assert_eq!(meta.declared_nnz, 4);
        assert_eq!(meta.file_entries, 3);
    }

    #[test]
    fn integer_field_accepted() {
        let (a, _) =
            parse("%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 7\n").unwrap();
        assert_eq!(a.get(0, 0), 7.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(parse("hello\n1 1 1\n"), Err(MarketError::Header(_))));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"),
            Err(MarketError::Unsupported(_))
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
            Err(MarketError::Unsupported(_))
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix array real general\n1 1\n1\n"),
            Err(MarketError::Unsupported(_))
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
            Err(MarketError::OutOfBounds { .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n"),
            Err(MarketError::OutOfBounds { .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n"),
            Err(MarketError::Duplicate { row: 1, col: 1 })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n"),
            Err(MarketError::EntryCount { expected: 3, found: 1 })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n"),
            Err(MarketError::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn symmetric_file_listing_both_triangles_is_a_duplicate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n";
        assert!(matches!(parse(text), Err(MarketError::Duplicate { .. })));
    }

    #[test]
    fn gzip_path_is_detected() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eye.mtx.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::fast());
        enc.write_all(b"%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n")
            .unwrap();
        enc.finish().unwrap();
        let (a, meta) = read_matrix_market_path(&path).unwrap();
        assert_eq!(a, SparseMatrix::identity(2));
        assert_eq!(meta.name, "eye");
    }

    fn sparse_entries() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..12, 1usize..12).prop_flat_map(|(m, n)| {
            let entry = (0..m, 0..n, -1e6f64..1e6);
            (Just(m), Just(n), proptest::collection::vec(entry, 0..40))
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity((m, n, mut entries) in sparse_entries()) {
            entries.sort_by_key(|e| (e.0, e.1));
            entries.dedup_by_key(|e| (e.0, e.1));
            let a = SparseMatrix::from_triplets(m, n, &entries).unwrap();
            let mut buf = Vec::new();
            write_matrix_market(&mut buf, &a, Symmetry::General).unwrap();
            let (b, _) = parse_matrix_market(buf.as_slice(), "p", "p").unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn symmetric_files_parse_to_symmetric_matrices(
            (n, _, mut entries) in sparse_entries()
        ) {
            let mut lower: Vec<_> = entries
                .drain(..)
                .filter(|&(i, j, _)| i < n && j < n)
                .map(|(i, j, v)| (i.max(j), i.min(j), v))
                .collect();
            lower.sort_by_key(|e| (e.0, e.1));
            lower.dedup_by_key(|e| (e.0, e.1));
            let mut text = format!(
                "%%MatrixMarket matrix coordinate real symmetric\n{n} {n} {}\n",
                lower.len()
            );
            for (i, j, v) in &lower {
                text.push_str(&format!("{} {} {}\n", i + 1, j + 1, v));
            }
            let (a, meta) = parse_matrix_market(text.as_bytes(), "s", "s").unwrap();
            prop_assert!(a.is_symmetric());
            prop_assert_eq!(a.transpose(), a.clone());
            prop_assert_eq!(meta.declared_nnz, a.nnz());
            let mut buf = Vec::new();
            write_matrix_market(&mut buf, &a, Symmetry::Symmetric).unwrap();
            let (b, _) = parse_matrix_market(buf.as_slice(), "s", "s").unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
