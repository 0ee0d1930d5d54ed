//! CSV encoding of masked and dense matrices.
//!
//! Matrices are written without a header, one matrix row per line. Missing
//! cells carry a token (`NA` by default). Floats use 17 significant digits so
//! that a write/read cycle is bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::MaskedMatrix;

pub const DEFAULT_MISSING_TOKEN: &str = "NA";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    format!("{:.16e}", v)
}

pub fn read_masked_csv(path: &Path, missing_token: &str) -> Result<MaskedMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_masked_csv(file, missing_token)
}

/// Parses a rectangular numeric CSV from any reader.
pub fn parse_masked_csv<R: Read>(reader: R, missing_token: &str) -> Result<MaskedMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows {
                row: r,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if cell == missing_token {
                values.push(f64::NAN);
                mask.push(false);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: r,
                    col: c,
                    text: cell.to_string(),
                })?;
                values.push(v);
                mask.push(true);
            }
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    MaskedMatrix::new(
        DMatrix::from_row_slice(rows, cols, &values),
        DMatrix::from_row_slice(rows, cols, &mask),
    )
}

pub fn write_masked_csv(path: &Path, mat: &MaskedMatrix, missing_token: &str) -> Result<()> {
    let mut out = String::new();
    for i in 0..mat.nrows() {
        let line: Vec<String> = (0..mat.ncols())
            .map(|j| match mat.get(i, j) {
                Ok(v) => fmt_f64(v),
                Err(_) => missing_token.to_string(),
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// Writes a dense matrix; NaN cells are written as `missing_token`.
pub fn write_dense_csv(path: &Path, mat: &DMatrix<f64>, missing_token: &str) -> Result<()> {
    write_text(path, &dense_csv_string(mat, missing_token))
}

pub fn dense_csv_string(mat: &DMatrix<f64>, missing_token: &str) -> String {
    let mut out = String::new();
    for row in mat.row_iter() {
        let line: Vec<String> = row
            .iter()
            .map(|&v| {
                if v.is_nan() {
                    missing_token.to_string()
                } else {
                    fmt_f64(v)
                }
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_bool_csv(path: &Path, mask: &DMatrix<bool>) -> Result<()> {
    let mut out = String::new();
    for row in mask.row_iter() {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_missing_token() {
        let m = parse_masked_csv("1,NA\n2,3\n".as_bytes(), "NA").unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert!(!m.is_observed(0, 1));
        assert_eq!(m.get(1, 1).unwrap(), 3.0);
    }

    #[test]
    fn custom_missing_token() {
        let m = parse_masked_csv("1,?\n".as_bytes(), "?").unwrap();
        assert!(!m.is_observed(0, 1));
    }

    #[test]
    fn ragged_rows_rejected() {
        let r = parse_masked_csv("1,2\n3\n".as_bytes(), "NA");
        assert!(matches!(r, Err(Error::RaggedRows { row: 1, expected: 2, found: 1 })));
    }

    #[test]
    fn bad_number_rejected() {
        let r = parse_masked_csv("1,x\n".as_bytes(), "NA");
        assert!(matches!(r, Err(Error::Parse { row: 0, col: 1, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn csv_round_trip_is_bit_exact(
            seed in any::<u64>(),
            rows in 1usize..12,
            cols in 1usize..12,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let values = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 1e3 - 500.0);
            let mask = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() >= 0.3);
            let m = MaskedMatrix::new(values, mask).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.csv");
            write_masked_csv(&path, &m, "NA").unwrap();
            let back = read_masked_csv(&path, "NA").unwrap();
            prop_assert_eq!(back.mask(), m.mask());
            for (i, j, v) in m.observed() {
                prop_assert_eq!(back.get(i, j).unwrap().to_bits(), v.to_bits());
            }
        }
    }
}
