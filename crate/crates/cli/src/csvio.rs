//! Design and data CSV files.
//!
//! A design file has a header of factor names and one row per run. Values
//! are written in the shortest form that parses back to the same `f64`, so
//! a write/read cycle is bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use ldod_core::{Design, DesignRegion};

use crate::{CliError, Result};

/// Header and rows of a numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

fn field_error(origin: &str, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{origin}, line {line}: {msg}"))
}

/// Reads a table whose fields are numbers or empty. `origin` names the
/// source in error messages.
pub fn read_table<R: Read>(reader: R, origin: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| field_error(origin, 1, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(String::is_empty) {
        return Err(field_error(origin, 1, "header has an empty column name"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            field_error(origin, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(field_error(origin, line, format!("{} fields, expected {}", rec.len(), header.len())));
        }
        let row = rec
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| field_error(origin, line, format!("`{f}` is not a finite number")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| CliError::validation(format!("{origin}: {e}")))?;
    read_table(file, &origin)
}

/// Rows of a design table; no field may be empty.
pub fn design_rows(table: &Table, origin: &str) -> Result<Vec<Vec<f64>>> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .map(|v| v.ok_or_else(|| field_error(origin, i as u64 + 2, "empty field in a design")))
                .collect()
        })
        .collect()
}

/// Reads a design whose columns must be exactly the region's factors in
/// order.
pub fn read_design<R: Read>(reader: R, origin: &str, region: &DesignRegion) -> Result<Design> {
    let table = read_table(reader, origin)?;
    let names: Vec<&str> = region.names().collect();
    if table.header != names {
        return Err(field_error(
            origin,
            1,
            format!("columns {:?} do not match the model factors {:?}", table.header, names),
        ));
    }
    let rows = design_rows(&table, origin)?;
    Design::new(rows, region.clone()).map_err(|e| match e {
        ldod_core::DesignError::OutOfRegion { run, .. } | ldod_core::DesignError::RowWidth { run, .. } => {
            field_error(origin, run as u64 + 2, e)
        }
        e => CliError::validation(format!("{origin}: {e}")),
    })
}

pub fn read_design_file(path: &Path, region: &DesignRegion) -> Result<Design> {
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| CliError::validation(format!("{origin}: {e}")))?;
    read_design(file, &origin, region)
}

pub fn write_design<W: Write>(writer: W, design: &Design) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(design.region().names())?;
    for row in design.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()
}

pub fn write_design_file(path: &Path, design: &Design) -> Result<()> {
    let file =
        std::fs::File::create(path).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    write_design(std::io::BufWriter::new(file), design).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

pub fn design_to_string(design: &Design) -> String {
    let mut buf = Vec::new();
    write_design(&mut buf, design).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Observations for model fitting: factor columns plus one response.
/// Rows with an empty response are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub points: Vec<(Vec<f64>, f64)>,
    pub dropped: usize,
    pub response: String,
}

/// Picks the factor columns by name and the response column, which is
/// `response` if given, else the only column that is not a factor.
pub fn read_data<R: Read>(reader: R, origin: &str, factors: &[String], response: Option<&str>) -> Result<DataSet> {
    let table = read_table(reader, origin)?;
    let col = |name: &str| table.header.iter().position(|h| h == name);
    let idx: Vec<usize> = factors
        .iter()
        .map(|f| col(f).ok_or_else(|| field_error(origin, 1, format!("missing factor column `{f}`"))))
        .collect::<Result<_>>()?;
    let resp = match response {
        Some(r) => col(r).ok_or_else(|| field_error(origin, 1, format!("missing response column `{r}`")))?,
        None => {
            let others: Vec<usize> = (0..table.header.len()).filter(|i| !idx.contains(i)).collect();
            match others[..] {
                [r] => r,
                _ => {
                    return Err(field_error(
                        origin,
                        1,
                        format!("expected exactly one response column besides {factors:?}; name it with --response"),
                    ))
                }
            }
        }
    };
    let mut points = Vec::new();
    let mut dropped = 0;
    for (i, row) in table.rows.iter().enumerate() {
        let Some(y) = row[resp] else {
            dropped += 1;
            continue;
        };
        let x = idx
            .iter()
            .map(|&j| row[j].ok_or_else(|| field_error(origin, i as u64 + 2, format!("empty `{}`", table.header[j]))))
            .collect::<Result<Vec<f64>>>()?;
        points.push((x, y));
    }
    Ok(DataSet { points, dropped, response: table.header[resp].clone() })
}

pub fn read_data_file(path: &Path, factors: &[String], response: Option<&str>) -> Result<DataSet> {
    let origin = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| CliError::validation(format!("{origin}: {e}")))?;
    read_data(file, &origin, factors, response)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ldod_core::Factor;

    fn region() -> DesignRegion {
        DesignRegion::new(vec![Factor::new("x", 0.0, 1.0), Factor::new("y", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn reads_and_reports_lines() {
        let d = read_design("x,y\n0.5,0.25\n1,-1\n".as_bytes(), "t.csv", &region()).unwrap();
        assert_eq!(d.rows(), [vec![0.5, 0.25], vec![1.0, -1.0]]);
        let e = read_design("x,y\n0.5,0.25\n1,abc\n".as_bytes(), "t.csv", &region()).unwrap_err();
        assert!(e.to_string().contains("t.csv, line 3"), "{e}");
        let e = read_design("x,y\n0.5,2\n".as_bytes(), "t.csv", &region()).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = read_design("y,x\n0.5,0.5\n".as_bytes(), "t.csv", &region()).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn data_drops_missing_responses() {
        let factors = vec!["x".to_string()];
        let d = read_data("x,y\n1,2\n2,\n3,4\n".as_bytes(), "d.csv", &factors, None).unwrap();
        assert_eq!(d.points, vec![(vec![1.0], 2.0), (vec![3.0], 4.0)]);
        assert_eq!(d.dropped, 1);
        assert!(read_data("x,y\n,2\n".as_bytes(), "d.csv", &factors, None).is_err());
    }
}
