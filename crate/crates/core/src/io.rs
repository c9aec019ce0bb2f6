//! CSV input and output: data matrices (observations × features), pairwise
//! matrices, and cluster labels. Floats are written in the shortest exact
//! decimal form, so files round-trip losslessly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrices::{DataMatrix, MatrixKind, PairwiseMatrix};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, row: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        row,
        col,
        message: message.into(),
    }
}

fn read_rows(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(path, io),
            other => parse_err(path, 0, 0, format!("{other:?}")),
        })?;
    let header_offset = usize::from(header);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1 + header_offset;
        let record = record.map_err(|e| parse_err(path, line, 0, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue; // tolerate trailing blank lines
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, c + 1, format!("not a number: {field:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(path, line, c + 1, "non-finite value"));
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    line,
                    row.len(),
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, 1, "no data rows"));
    }
    Ok(rows)
}

/// Reads an observations × features CSV. With `header = true` the first line
/// is skipped.
pub fn read_data_csv(path: &Path, header: bool) -> Result<DataMatrix> {
    DataMatrix::from_rows(&read_rows(path, header)?)
}

/// Reads a precomputed square pairwise matrix and validates it under the
/// declared kind (symmetry, finiteness, nonnegativity, zero diagonal for
/// distances).
pub fn read_matrix_csv(path: &Path, kind: MatrixKind) -> Result<PairwiseMatrix> {
    let rows = read_rows(path, false)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(parse_err(
            path,
            1,
            1,
            format!("matrix must be square, got {n} rows × {} columns", rows[0].len()),
        ));
    }
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    PairwiseMatrix::from_raw(
        values,
        n,
        kind,
        &format!("csv:{}", path.display()),
    )
}

fn float_rows_string<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut buffer = ryu::Buffer::new();
    let mut out = String::new();
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(buffer.format(*v));
        }
        out.push('\n');
    }
    out
}

/// Renders a data matrix as headerless CSV text, one observation per row.
pub fn data_csv_string(data: &DataMatrix) -> String {
    float_rows_string((0..data.n()).map(|i| data.row(i)))
}

/// Renders a pairwise matrix as headerless square CSV text.
pub fn matrix_csv_string(m: &PairwiseMatrix) -> String {
    float_rows_string((0..m.n()).map(|i| m.row(i)))
}

/// Writes a data matrix as headerless CSV, one observation per row.
pub fn write_data_csv(path: &Path, data: &DataMatrix) -> Result<()> {
    std::fs::write(path, data_csv_string(data)).map_err(|e| io_err(path, e))
}

/// Writes a pairwise matrix as headerless square CSV.
pub fn write_matrix_csv(path: &Path, m: &PairwiseMatrix) -> Result<()> {
    std::fs::write(path, matrix_csv_string(m)).map_err(|e| io_err(path, e))
}

/// Reads cluster labels, one nonnegative integer per line.
pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue; // tolerate trailing blank lines
        }
        let label: usize = line
            .parse()
            .map_err(|_| parse_err(path, idx + 1, 1, format!("not a cluster label: {line:?}")))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(parse_err(path, 1, 1, "no labels"));
    }
    Ok(labels)
}

/// Writes cluster labels, one per line.
pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => parse_err(path, 0, 0, format!("{other:?}")),
    })?;
    for &label in labels {
        writer
            .write_record([label.to_string()])
            .map_err(|e| parse_err(path, 0, 0, e.to_string()))?;
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn reads_plain_data() {
        let f = temp_with("0.5,1.0\n-2.0,3.5\n");
        let data = read_data_csv(f.path(), false).unwrap();
        assert_eq!(data.n(), 2);
        assert_eq!(data.p(), 2);
        assert_eq!(data.row(1), &[-2.0, 3.5]);
    }

    #[test]
    fn header_flag_skips_first_line() {
        let f = temp_with("x,y\n1.0,2.0\n");
        let data = read_data_csv(f.path(), true).unwrap();
        assert_eq!(data.n(), 1);
        assert_eq!(data.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn parse_errors_carry_one_based_location() {
        let f = temp_with("1.0,2.0\n3.0,oops\n");
        let err = read_data_csv(f.path(), false).unwrap_err();
        match err {
            Error::Parse { row, col, .. } => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let f = temp_with("1.0,2.0\n3.0\n");
        assert!(matches!(
            read_data_csv(f.path(), false),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = read_data_csv(Path::new("/nonexistent/xyz.csv"), false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn matrix_round_trips_bitwise() {
        let values = vec![0.0, 1.25, 1.25, 0.0];
        let m = PairwiseMatrix::from_raw(values.clone(), 2, MatrixKind::Distance, "d").unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_matrix_csv(f.path(), &m).unwrap();
        let back = read_matrix_csv(f.path(), MatrixKind::Distance).unwrap();
        assert_eq!(back.values(), &values[..]);
        assert!(back.provenance().starts_with("csv:"));
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let f = temp_with("0.0,1.0\n2.0,0.0\n");
        assert!(read_matrix_csv(f.path(), MatrixKind::Distance).is_err());
    }

    #[test]
    fn non_square_matrix_is_rejected() {
        let f = temp_with("0.0,1.0,2.0\n1.0,0.0,3.0\n");
        assert!(matches!(
            read_matrix_csv(f.path(), MatrixKind::Distance),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn shortest_float_form_is_used() {
        let x: Vec<f64> = vec![0.01, 0.0001];
        let data = DataMatrix::from_rows(&[x]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_data_csv(f.path(), &data).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text.trim(), "0.01,0.0001");
    }

    #[test]
    fn labels_write_one_per_line() {
        let f = tempfile::NamedTempFile::new().unwrap();
        write_labels_csv(f.path(), &[0, 2, 1]).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "0\n2\n1\n");
    }

    #[test]
    fn labels_round_trip() {
        let f = tempfile::NamedTempFile::new().unwrap();
        write_labels_csv(f.path(), &[3, 0, 0, 1]).unwrap();
        assert_eq!(read_labels_csv(f.path()).unwrap(), vec![3, 0, 0, 1]);
        let bad = temp_with("0\nx\n");
        assert!(matches!(
            read_labels_csv(bad.path()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn csv_string_matches_file_output() {
        let data = DataMatrix::from_rows(&[vec![0.5, 1.0], vec![-2.0, 3.5]]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_data_csv(f.path(), &data).unwrap();
        assert_eq!(
            std::fs::read_to_string(f.path()).unwrap(),
            data_csv_string(&data)
        );
        assert_eq!(data_csv_string(&data), "0.5,1.0\n-2.0,3.5\n");
    }
}
