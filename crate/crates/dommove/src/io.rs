//! CSV point-set files: one point per row, comma-separated decimal fields,
//! optional comment/header lines starting with `#`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{DomError, Result};
use crate::point::PointSet;

/// Renders a float so that parsing the text recovers the identical bits.
/// The standard formatter emits the shortest round-trip-exact decimal.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DomError::Csv {
        path: path.display().to_string(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    parse_point_set(BufReader::new(file), &path.display().to_string())
}

pub fn parse_point_set(reader: impl Read, path: &str) -> Result<PointSet> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        // column = 1-based character offset of the field start
        let mut column = 1;
        for field in line.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| DomError::Csv {
                path: path.to_string(),
                line: lineno + 1,
                column,
                message: format!("expected a decimal number, found {:?}", field.trim()),
            })?;
            if !value.is_finite() {
                return Err(DomError::Csv {
                    path: path.to_string(),
                    line: lineno + 1,
                    column,
                    message: "non-finite value".into(),
                });
            }
            row.push(value);
            column += field.chars().count() + 1;
        }
        if let Some(first) = points.first() {
            if row.len() != first.len() {
                return Err(DomError::Csv {
                    path: path.to_string(),
                    line: lineno + 1,
                    column: 1,
                    message: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(DomError::Csv {
            path: path.to_string(),
            line: 0,
            column: 0,
            message: "no data rows".into(),
        });
    }
    PointSet::new(points)
}

pub fn write_point_set(mut writer: impl Write, set: &PointSet) -> Result<()> {
    let mut buf = String::new();
    for pt in set.points() {
        buf.clear();
        for (k, v) in pt.iter().enumerate() {
            if k > 0 {
                buf.push(',');
            }
            let _ = write!(buf, "{}", fmt_f64(*v));
        }
        buf.push('\n');
        writer.write_all(buf.as_bytes())?;
    }
    Ok(())
}

pub fn save_point_set(path: impl AsRef<Path>, set: &PointSet) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_point_set(std::io::BufWriter::new(file), set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_blanks() {
        let text = "# f1,f2\n2.0,2.5\n\n3.0,1.9\n";
        let s = parse_point_set(text.as_bytes(), "mem").unwrap();
        assert_eq!(s.points(), &[vec![2.0, 2.5], vec![3.0, 1.9]]);
    }

    #[test]
    fn error_names_file_line_and_column() {
        let text = "1.0,2.0\n3.0,x\n";
        let err = parse_point_set(text.as_bytes(), "bad.csv").unwrap_err();
        match err {
            DomError::Csv { path, line, column, .. } => {
                assert_eq!(path, "bad.csv");
                assert_eq!(line, 2);
                assert_eq!(column, 5);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = "1.0,2.0\n3.0\n";
        assert!(parse_point_set(text.as_bytes(), "mem").is_err());
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let pts = vec![
            vec![0.1, 1.0 / 3.0, -2.5e-7],
            vec![11.139, 0.312, 1e15],
            vec![f64::MIN_POSITIVE, -0.0, 9.999999999999998],
        ];
        let s = PointSet::new(pts).unwrap();
        let mut buf = Vec::new();
        write_point_set(&mut buf, &s).unwrap();
        let back = parse_point_set(buf.as_slice(), "mem").unwrap();
        for (a, b) in s.points().iter().zip(back.points()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
