//! Matrix Market reader for real `coordinate` and `array` files.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

/// Symmetric storage is expanded; duplicate coordinate entries are summed.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<DMatrix<f64>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner = banner?;
    let (layout, symmetry) = parse_banner(&banner)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut m = DMatrix::zeros(0, 0);
    let mut seen = 0usize;
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let Some((rows, cols, count)) = size else {
            let dims = match (layout, fields.as_slice()) {
                (Layout::Coordinate, [r, c, nnz]) => (int(r, no)?, int(c, no)?, int(nnz, no)?),
                (Layout::Array, [r, c]) => {
                    let (r, c) = (int(r, no)?, int(c, no)?);
                    let count = match symmetry {
                        Symmetry::General => r * c,
                        Symmetry::Symmetric => {
                            if r != c {
                                return Err(parse_err(no, "symmetric matrix must be square"));
                            }
                            r * (r + 1) / 2
                        }
                    };
                    (r, c, count)
                }
                _ => return Err(parse_err(no, format!("malformed size line `{t}`"))),
            };
            if symmetry == Symmetry::Symmetric && dims.0 != dims.1 {
                return Err(parse_err(no, "symmetric matrix must be square"));
            }
            size = Some(dims);
            m = DMatrix::zeros(dims.0, dims.1);
            continue;
        };
        if seen == count {
            return Err(parse_err(no, format!("more than the declared {count} entries")));
        }
        match layout {
            Layout::Coordinate => {
                let [i, j, v] = fields.as_slice() else {
                    return Err(parse_err(no, format!("expected `row col value`, got `{t}`")));
                };
                let (i, j, v) = (int(i, no)?, int(j, no)?, real(v, no)?);
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(no, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                m[(i - 1, j - 1)] += v;
                if symmetry == Symmetry::Symmetric && i != j {
                    m[(j - 1, i - 1)] += v;
                }
            }
            Layout::Array => {
                let [v] = fields.as_slice() else {
                    return Err(parse_err(no, format!("expected a single value, got `{t}`")));
                };
                let v = real(v, no)?;
                let (i, j) = match symmetry {
                    Symmetry::General => (seen % rows, seen / rows),
                    Symmetry::Symmetric => lower_triangle_position(seen, rows),
                };
                m[(i, j)] = v;
                if symmetry == Symmetry::Symmetric {
                    m[(j, i)] = v;
                }
            }
        }
        seen += 1;
    }
    let Some((_, _, count)) = size else {
        return Err(parse_err(1, "missing size line"));
    };
    if seen != count {
        return Err(parse_err(0, format!("declared {count} entries, found {seen}")));
    }
    Ok(m)
}

fn parse_banner(banner: &str) -> Result<(Layout, Symmetry)> {
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, "missing %%MatrixMarket banner"));
    }
    let [_, object, format, field, symmetry] = words.as_slice() else {
        return Err(parse_err(1, "banner must have five fields"));
    };
    if object != "matrix" {
        return Err(parse_err(1, format!("unsupported object `{object}`")));
    }
    let layout = match format.as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported format `{other}`"))),
    };
    if field != "real" && field != "double" {
        return Err(parse_err(1, format!("unsupported field `{field}`; only real matrices are read")));
    }
    let symmetry = match symmetry.as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };
    Ok((layout, symmetry))
}

// Column-major walk of the lower triangle.
fn lower_triangle_position(mut idx: usize, n: usize) -> (usize, usize) {
    for j in 0..n {
        let len = n - j;
        if idx < len {
            return (j + idx, j);
        }
        idx -= len;
    }
    unreachable!("entry count is checked against the triangle size")
}

fn int(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, format!("expected an integer, got `{s}`")))
}

fn real(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| parse_err(line, format!("expected a real number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value `{s}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<DMatrix<f64>> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn coordinate_general() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n% note\n2 2 2\n1 1 3.0\n2 2 1.5\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.5]));
    }

    #[test]
    fn coordinate_symmetric_mirrors() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 0.5\n").unwrap();
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(1, 0)], 0.5);
    }

    #[test]
    fn array_layouts() {
        let m = parse("%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]));
        let s = parse("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(s, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }

    #[test]
    fn exact_decimal_parse() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 0.1\n").unwrap();
        assert_eq!(m[(0, 0)].to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse("%%Matrix matrix coordinate real general\n1 1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate complex general\n1 1 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse("%%MatrixMarket matrix coordinate pattern general\n1 1 0\n").is_err());
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(parse("").is_err());
    }
}
