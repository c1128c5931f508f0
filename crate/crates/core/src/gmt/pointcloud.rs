use std::io::{Read, Write};
use std::path::Path;

use super::measure::AtomicMeasure;
use super::GmtError;

/// Parses a weighted point cloud: one atom per row, `n` coordinate columns
/// followed by a weight column. A non-numeric first row is taken as a header;
/// rows starting with `#` are skipped.
pub fn parse_point_cloud<R: Read>(reader: R) -> Result<AtomicMeasure, GmtError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let mut points = vec![];
    let mut weights = vec![];
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| GmtError::Parse { line, message: e.to_string() })?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 && points.is_empty() => continue,
            Err(e) => return Err(GmtError::Parse { line, message: e.to_string() }),
        };
        if row.len() < 2 {
            return Err(GmtError::Parse { line, message: "need at least one coordinate and a weight".into() });
        }
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(GmtError::Parse { line, message: format!("expected {} columns, got {}", width.unwrap(), row.len()) });
        }
        let (coords, w) = row.split_at(row.len() - 1);
        points.push(coords.to_vec());
        weights.push(w[0]);
    }
    if points.is_empty() {
        return Err(GmtError::EmptyPoints);
    }
    AtomicMeasure::new(points, weights)
}

pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<AtomicMeasure, GmtError> {
    parse_point_cloud(std::fs::File::open(path)?)
}

/// Writes `x1,…,xn,weight` with a header row.
pub fn write_point_cloud<W: Write>(mu: &AtomicMeasure, writer: W) -> Result<(), GmtError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=mu.dim()).map(|d| format!("x{d}")).collect();
    header.push("weight".into());
    w.write_record(&header).map_err(csv_io)?;
    for (y, wt) in mu.points().iter().zip(mu.weights()) {
        let row: Vec<String> = y.iter().chain(std::iter::once(wt)).map(|v| format!("{v:e}")).collect();
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> GmtError {
    GmtError::Io(std::io::Error::other(e))
}
