//! File plumbing shared by the data modules: transparent gzip for `.gz` paths
//! and CSV readers/writers for real-valued tables.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Open a file for reading, decompressing on the fly when the name ends in `.gz`.
pub fn open_reader(path: &Path) -> Result<Box<dyn Read>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(f);
    Ok(if is_gz(path) { Box::new(MultiGzDecoder::new(r)) } else { Box::new(r) })
}

/// Create (truncate) a file for writing, gzip-compressing when the name ends in `.gz`.
pub fn create_writer(path: &Path) -> Result<Box<dyn Write>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let w = BufWriter::new(f);
    Ok(if is_gz(path) { Box::new(GzEncoder::new(w, Compression::default())) } else { Box::new(w) })
}

pub(crate) fn csv_reader(path: &Path, has_header: bool) -> Result<csv::Reader<Box<dyn Read>>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open_reader(path)?))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new().from_writer(create_writer(path)?))
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format { path: path.to_path_buf(), reason: format!("{other:?}") },
    }
}

/// Write `value` so that parsing it back yields the same bits.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:?}")
}

/// Read a rectangular table of reals. Row and column numbers in errors are 1-based.
pub fn read_real_matrix(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv_reader(path, has_header)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row_no = r + 1 + usize::from(has_header);
        if let Some(first) = rows.first() {
            if rec.len() != first.len() {
                return Err(Error::RaggedRow {
                    path: path.to_path_buf(),
                    row: row_no,
                    expected: first.len(),
                    found: rec.len(),
                });
            }
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::InvalidCell {
                    path: path.to_path_buf(),
                    row: row_no,
                    col: c + 1,
                    reason: format!("`{field}` is not a finite number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Read a single column of reals.
pub fn read_real_column(path: &Path, has_header: bool) -> Result<Vec<f64>> {
    let rows = read_real_matrix(path, has_header)?;
    if let Some(first) = rows.first() {
        if first.len() != 1 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("expected one column, found {}", first.len()),
            });
        }
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

pub fn write_real_column(path: &Path, header: Option<&str>, values: &[f64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    if let Some(h) = header {
        w.write_record([h]).map_err(|e| csv_err(path, e))?;
    }
    for v in values {
        w.write_record([fmt_f64(*v)]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_real_matrix<R: AsRef<[f64]>>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| fmt_f64(*v))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `key=value` lines in the given order.
pub fn write_key_values(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let mut w = create_writer(path)?;
    for (k, v) in pairs {
        writeln!(w, "{k}={v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parse `key=value` lines, skipping blanks and `#` comments.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    let mut text = String::new();
    open_reader(path)?.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            reason: format!("line {}: expected key=value", i + 1),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_matrix_round_trip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![0.1, -2.5e-300], vec![1.0 / 3.0, 7.0]];
        for name in ["m.csv", "m.csv.gz"] {
            let p = dir.path().join(name);
            write_real_matrix(&p, &rows).unwrap();
            assert_eq!(read_real_matrix(&p, false).unwrap(), rows);
        }
    }

    #[test]
    fn column_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.csv");
        write_real_column(&p, Some("y"), &[1.5, 2.5]).unwrap();
        assert_eq!(read_real_column(&p, true).unwrap(), vec![1.5, 2.5]);
        assert!(read_real_column(&p, false).is_err());
    }

    #[test]
    fn bad_cell_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "1,2\n3,x\n").unwrap();
        match read_real_matrix(&p, false) {
            Err(Error::InvalidCell { row: 2, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_real_matrix(&p, false), Err(Error::RaggedRow { row: 2, expected: 2, found: 1, .. })));
    }

    #[test]
    fn key_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("kv.txt");
        let pairs = vec![("a".to_string(), "1".to_string()), ("b".into(), "x y".into())];
        write_key_values(&p, &pairs).unwrap();
        assert_eq!(read_key_values(&p).unwrap(), pairs);
    }
}
