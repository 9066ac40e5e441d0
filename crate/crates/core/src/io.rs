//! CSV ingestion and artifact serialization.
//!
//! Input is plain CSV: one point (or one matrix row) per line, numeric
//! fields, configurable delimiter, optional single header line.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::cohomology::PersistencePair;
use crate::coords::AngleAssignment;
use crate::filtration::RipsFiltration;
use crate::lift::IntegerCochain;
use crate::metric::{DistanceMatrix, DistanceSource, PointCloud};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
        }
    }
}

/// Reads a rectangular numeric table. Errors name the 1-based line number.
pub fn read_numeric_rows(path: &Path, opts: CsvOptions) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("cannot open {}: {e}", path.display())))?;
    read_numeric_rows_from(BufReader::new(file), &path.display().to_string(), opts)
}

pub fn read_numeric_rows_from<R: Read>(reader: R, name: &str, opts: CsvOptions) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let format_err = |line: usize, message: String| Error::Format {
        path: name.to_string(),
        line,
        message,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            format_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(rows.len() + 1);
        let row = record
            .iter()
            .enumerate()
            .map(|(k, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format_err(line, format!("field {} ({field:?}) is not a finite number", k + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(format_err(line, format!("expected {w} fields, found {}", row.len())));
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(format_err(1, "file contains no data rows".into()));
    }
    Ok(rows)
}

pub fn load_point_cloud(path: &Path, opts: CsvOptions) -> Result<DistanceSource> {
    let rows = read_numeric_rows(path, opts)?;
    Ok(DistanceSource::Cloud(PointCloud::from_rows(rows)?))
}

pub fn load_distance_matrix(path: &Path, opts: CsvOptions) -> Result<DistanceSource> {
    let rows = read_numeric_rows(path, opts)?;
    Ok(DistanceSource::Matrix(DistanceMatrix::from_rows(rows)?))
}

fn join_row<W: Write + ?Sized>(out: &mut W, values: impl IntoIterator<Item = String>, delimiter: char) -> Result<()> {
    let line = values.into_iter().collect::<Vec<_>>().join(&delimiter.to_string());
    writeln!(out, "{line}")?;
    Ok(())
}

pub fn write_point_cloud<W: Write + ?Sized>(out: &mut W, cloud: &PointCloud) -> Result<()> {
    for p in cloud.points() {
        join_row(out, p.iter().map(|v| v.to_string()), ',')?;
    }
    Ok(())
}

pub fn write_distance_matrix<W: Write + ?Sized>(out: &mut W, m: &DistanceMatrix) -> Result<()> {
    for i in 0..m.len() {
        join_row(out, m.row(i).iter().map(|v| v.to_string()), ',')?;
    }
    Ok(())
}

/// Writes `point_id,angle[,angle_2,...]`; uncovered points get an empty field.
///
/// With `turns` set, angles are written as fractions of a turn in `[0, 1)`
/// instead of radians in `(-π, π]`.
pub fn write_coordinates<W: Write + ?Sized>(
    out: &mut W,
    point_ids: &[usize],
    columns: &[AngleAssignment],
    turns: bool,
) -> Result<()> {
    if columns.iter().any(|c| c.len() != point_ids.len()) {
        return Err(Error::arg("every angle column must have one entry per point"));
    }
    let mut header = vec!["point_id".to_string()];
    for k in 0..columns.len() {
        header.push(if k == 0 { "angle".into() } else { format!("angle_{}", k + 1) });
    }
    join_row(out, header, ',')?;
    for (row, id) in point_ids.iter().enumerate() {
        let fields = std::iter::once(id.to_string()).chain(columns.iter().map(|c| match c[row] {
            Some(a) if turns => crate::coords::angle_to_turns(a).to_string(),
            Some(a) => a.to_string(),
            None => String::new(),
        }));
        join_row(out, fields, ',')?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagramEntry {
    dim: u8,
    birth: f64,
    death: Option<f64>,
    persistence: Option<f64>,
}

/// JSON array of `{dim, birth, death, persistence}`; infinite deaths are `null`.
pub fn write_diagram<W: Write + ?Sized>(out: &mut W, pairs: &[PersistencePair]) -> Result<()> {
    let entries: Vec<DiagramEntry> = pairs
        .iter()
        .map(|p| DiagramEntry {
            dim: p.dim,
            birth: p.birth,
            death: p.death,
            persistence: p.persistence(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut *out, &entries).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Debug dump: `dim,i,j,k,diameter` with unused vertex slots left empty.
pub fn write_filtration<W: Write + ?Sized>(out: &mut W, filt: &RipsFiltration) -> Result<()> {
    writeln!(out, "dim,i,j,k,diameter")?;
    for v in 0..filt.vertex_count() {
        writeln!(out, "0,{v},,,0")?;
    }
    for e in filt.edges() {
        writeln!(out, "1,{},{},,{}", e.i, e.j, e.diameter)?;
    }
    for t in filt.triangles() {
        writeln!(out, "2,{},{},{},{}", t.i, t.j, t.k, t.diameter)?;
    }
    Ok(())
}

/// Debug dump of an integer cochain as `i,j,value` over landmark positions.
pub fn write_cocycle<W: Write + ?Sized>(out: &mut W, eta: &IntegerCochain) -> Result<()> {
    writeln!(out, "i,j,value")?;
    for (&(i, j), &v) in eta.values() {
        writeln!(out, "{i},{j},{v}")?;
    }
    Ok(())
}
