//! Plain-text complex matrix dump: `# key: value` header lines, a `rows cols`
//! line, then one row per line as whitespace-separated `re im` pairs.

use std::io::{BufRead, Write};

use crate::qcore::{c, CMatrix};
use crate::{Error, Result};

pub fn write_matrix<W: Write>(mut w: W, m: &CMatrix, header: &[(&str, String)]) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|col| format!("{:.17e} {:.17e}", m[(r, col)].re, m[(r, col)].im))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Header entries and matrix.
pub fn read_matrix<R: BufRead>(r: R) -> Result<(Vec<(String, String)>, CMatrix)> {
    let mut header = Vec::new();
    let mut shape = None;
    let mut data = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(h) = t.strip_prefix('#') {
            if let Some((k, v)) = h.split_once(':') {
                header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let nums: Vec<f64> = t
            .split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|e| Error::Format(format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?;
        match shape {
            None => {
                if nums.len() != 2 {
                    return Err(Error::Format(format!("line {}: expected `rows cols`", i + 1)));
                }
                shape = Some((nums[0] as usize, nums[1] as usize));
            }
            Some((_, cols)) => {
                if nums.len() != 2 * cols {
                    return Err(Error::Format(format!("line {}: expected {} numbers", i + 1, 2 * cols)));
                }
                data.push(nums);
            }
        }
    }
    let (rows, cols) = shape.ok_or_else(|| Error::Format("missing shape line".into()))?;
    if data.len() != rows {
        return Err(Error::Format(format!("expected {rows} rows, found {}", data.len())));
    }
    let m = CMatrix::from_fn(rows, cols, |r, col| c(data[r][2 * col], data[r][2 * col + 1]));
    Ok((header, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = CMatrix::from_fn(3, 2, |r, col| c(r as f64 / 3.0, -(col as f64) * 1e-17 + 0.1));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m, &[("vectorization", "column".into())]).unwrap();
        let (h, back) = read_matrix(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(h, vec![("vectorization".to_string(), "column".to_string())]);
    }
}
