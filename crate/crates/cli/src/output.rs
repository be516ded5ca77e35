//! File formats. Floats are written with 17 significant digits so that every
//! value reads back to the same double.

use std::io::Write;
use std::path::{Path, PathBuf};

use bvpmmo::analysis::SweepRow;
use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

/// Version of the trajectory, event and sweep column layouts.
pub const FORMAT_VERSION: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["t", "x", "y", "p", "z"];
pub const EVENT_COLUMNS: [&str; 7] = ["t", "kind", "direction", "x", "y", "p", "z"];
pub const SWEEP_COLUMNS: [&str; 12] = [
    "parameter",
    "value",
    "mu",
    "signature",
    "regime",
    "large_count",
    "small_count",
    "max_large_run",
    "period",
    "torus",
    "bursting",
    "error",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One sample in original coordinates.
pub type Row = [f64; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub t: f64,
    pub kind: &'static str,
    pub direction: i8,
    pub state: [f64; 4],
}

fn header(w: &mut impl Write, columns: &[&str]) -> std::io::Result<()> {
    writeln!(w, "# version: {FORMAT_VERSION}")?;
    writeln!(w, "# columns: {}", columns.join(","))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_trajectory_csv(w: impl Write, rows: &[Row]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(w);
    header(&mut w, &TRAJECTORY_COLUMNS)?;
    let mut c = csv_writer(w);
    for r in rows {
        c.write_record(r.iter().map(|&v| fmt_f64(v)))?;
    }
    c.flush()?;
    Ok(())
}

pub fn write_events_csv(w: impl Write, events: &[EventRow]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(w);
    header(&mut w, &EVENT_COLUMNS)?;
    let mut c = csv_writer(w);
    for e in events {
        let mut rec = vec![fmt_f64(e.t), e.kind.to_string(), e.direction.to_string()];
        rec.extend(e.state.iter().map(|&v| fmt_f64(v)));
        c.write_record(&rec)?;
    }
    c.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTable<'a, R: Serialize> {
    version: u32,
    columns: &'a [&'a str],
    rows: &'a [R],
}

pub fn write_trajectory_json(w: impl Write, rows: &[Row]) -> Result<(), CliError> {
    write_json(
        w,
        &JsonTable {
            version: FORMAT_VERSION,
            columns: &TRAJECTORY_COLUMNS,
            rows,
        },
    )
}

pub fn write_events_json(w: impl Write, events: &[EventRow]) -> Result<(), CliError> {
    let rows: Vec<serde_json::Value> = events
        .iter()
        .map(|e| {
            serde_json::json!([
                e.t,
                e.kind,
                e.direction,
                e.state[0],
                e.state[1],
                e.state[2],
                e.state[3]
            ])
        })
        .collect();
    write_json(
        w,
        &JsonTable {
            version: FORMAT_VERSION,
            columns: &EVENT_COLUMNS,
            rows: &rows,
        },
    )
}

pub fn write_json(w: impl Write, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv(w: impl Write, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(w);
    header(&mut w, &SWEEP_COLUMNS)?;
    let mut c = csv_writer(w);
    for r in rows {
        let mut rec = vec![r.parameter.clone(), fmt_f64(r.value), fmt_f64(r.mu)];
        match &r.summary {
            Some(s) => rec.extend([
                s.signature.clone(),
                s.regime.to_string(),
                s.large_count.to_string(),
                s.small_count.to_string(),
                s.max_large_run.to_string(),
                s.period.map(fmt_f64).unwrap_or_default(),
                s.torus.to_string(),
                s.bursting.to_string(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 8)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        c.write_record(&rec)?;
    }
    c.flush()?;
    Ok(())
}

pub fn write_sweep(w: impl Write, rows: &[SweepRow], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => write_sweep_csv(w, rows),
        Format::Json => write_json(
            w,
            &serde_json::json!({ "version": FORMAT_VERSION, "rows": rows }),
        ),
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

pub fn create_file(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))
}

pub fn output_path(dir: &Path, stem: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    dir.join(format!("{stem}.{ext}"))
}
