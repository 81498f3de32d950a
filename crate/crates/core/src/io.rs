//! CSV input for matrices/vectors and CSV output for reports.
//!
//! Input files start with a header line `# rows m cols n` followed by `m`
//! comma-separated rows of `n` numbers. Floats are written with 17
//! significant digits (`{:.16e}`), `inf`/`-inf` for infinities.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::extreal::ExtendedReal;
use crate::trace::EntropyTrace;

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn format_extended(x: ExtendedReal) -> String {
    format_float(x.to_f64())
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let tokens: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
    match tokens.as_slice() {
        ["rows", m, "cols", n] => {
            let m = m.parse().map_err(|_| Error::Parse(format!("bad row count `{m}`")))?;
            let n = n.parse().map_err(|_| Error::Parse(format!("bad column count `{n}`")))?;
            Ok((m, n))
        }
        _ => Err(Error::Parse(format!("expected header `# rows m cols n`, got `{line}`"))),
    }
}

/// Parses a dense matrix from CSV text with a `# rows m cols n` header.
pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().skip_while(|l| l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    if !header.trim_start().starts_with('#') {
        return Err(Error::Parse("missing `# rows m cols n` header".into()));
    }
    let (m, n) = parse_header(header)?;
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut data = Vec::with_capacity(m * n);
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() != n {
            return Err(Error::Parse(format!("row {rows} has {} entries, expected {n}", record.len())));
        }
        for field in record.iter() {
            data.push(field.parse::<f64>().map_err(|_| Error::Parse(format!("`{field}` is not a number")))?);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::Parse(format!("found {rows} rows, header says {m}")));
    }
    Ok(DMatrix::from_row_slice(m, n, &data))
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_csv(&text)
}

/// Reads a vector stored as a `1 × n` or `n × 1` matrix.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(Error::Parse(format!(
            "{}: expected a row or column vector, got {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = format!("# rows {} cols {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes a header and string rows as CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// `k,entropy,mass,step_margin` (discrete semigroup).
pub fn write_power_trace(path: &Path, trace: &EntropyTrace) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                format_extended(r.entropy),
                format_float(r.mass),
                format_opt(r.margin),
            ]
        })
        .collect();
    write_csv(path, &["k", "entropy", "mass", "step_margin"], &rows)
}

/// `k,t,entropy,weighted_mass,csiszar_margin` (growth-fragmentation).
pub fn write_growth_trace(path: &Path, trace: &EntropyTrace) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                format_float(r.time),
                format_extended(r.entropy),
                format_float(r.mass),
                format_opt(r.margin),
            ]
        })
        .collect();
    write_csv(path, &["k", "t", "entropy", "weighted_mass", "csiszar_margin"], &rows)
}

/// `k,t,mass_f,mass_g,entropy,lr_min_margin` (transport slab).
pub fn write_transport_trace(path: &Path, trace: &EntropyTrace) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                format_float(r.time),
                format_float(r.mass),
                format_opt(r.reference_mass),
                format_extended(r.entropy),
                format_opt(r.margin),
            ]
        })
        .collect();
    write_csv(path, &["k", "t", "mass_f", "mass_g", "entropy", "lr_min_margin"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(f64::INFINITY), "inf");
        let x = 0.123_456_789_012_345_68_f64;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn matrix_parse() {
        let m = parse_matrix_csv("# rows 2 cols 3\n1,2,3\n4, 5 ,6\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        assert_eq!(parse_matrix_csv(&matrix_to_csv(&m)).unwrap(), m);
        assert!(parse_matrix_csv("1,2\n").is_err());
        assert!(parse_matrix_csv("# rows 2 cols 2\n1,2\n").is_err());
        assert!(parse_matrix_csv("# rows 1 cols 2\n1,x\n").is_err());
        assert!(parse_matrix_csv("# rows 1 cols 2\n1,2,3\n").is_err());
    }
}
