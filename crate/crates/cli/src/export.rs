//! CSV logs: `trajectory.csv` (one row per agent per step) and the
//! `cargos.csv` sidecar (one row per cargo per step).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use swarmcage_core::world::CargoSnapshot;
use swarmcage_core::{CargoPhase, Point2, RunLog, StepRecord};
use thiserror::Error;

pub const TRAJECTORY_HEADER: [&str; 8] = ["step", "t", "agent_id", "px", "py", "ux", "uy", "detected_cargo"];
pub const CARGO_HEADER: [&str; 10] = ["step", "t", "cargo_id", "cx", "cy", "radius", "phase", "dir_x", "dir_y", "team"];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("log is empty")]
    EmptyLog,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{path}, row {row}: {message}")]
    Malformed { path: String, row: usize, message: String },
}

/// Shortest `%g`-style rendering with 9 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, ExportError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_trajectory<W: Write>(log: &RunLog, w: W) -> Result<(), ExportError> {
    if log.records.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    let mut out = csv_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for rec in &log.records {
        for (i, (p, u)) in rec.positions.iter().zip(&rec.controls).enumerate() {
            out.write_record([
                rec.step.to_string(),
                format_float(rec.t),
                i.to_string(),
                format_float(p.x),
                format_float(p.y),
                format_float(u.x),
                format_float(u.y),
                rec.detected[i].map_or(String::new(), |c| c.to_string()),
            ])?;
        }
    }
    out.flush().map_err(|e| ExportError::Csv(e.into()))?;
    Ok(())
}

pub fn write_cargos<W: Write>(log: &RunLog, w: W) -> Result<(), ExportError> {
    if log.records.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    let mut out = csv_writer(w);
    out.write_record(CARGO_HEADER)?;
    for rec in &log.records {
        for c in &rec.cargos {
            let (dx, dy) =
                c.transport_dir.map_or((String::new(), String::new()), |d| (format_float(d.x), format_float(d.y)));
            let team: Vec<String> = c.team.iter().map(|a| a.to_string()).collect();
            out.write_record([
                rec.step.to_string(),
                format_float(rec.t),
                c.id.to_string(),
                format_float(c.center.x),
                format_float(c.center.y),
                format_float(c.radius),
                c.phase.as_str().to_string(),
                dx,
                dy,
                team.join(";"),
            ])?;
        }
    }
    out.flush().map_err(|e| ExportError::Csv(e.into()))?;
    Ok(())
}

/// Writes `trajectory.csv`; an empty log is an error and creates no file.
pub fn export_trajectory(log: &RunLog, path: &Path) -> Result<(), ExportError> {
    if log.records.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    write_trajectory(log, create(path)?)
}

pub fn export_cargos(log: &RunLog, path: &Path) -> Result<(), ExportError> {
    if log.records.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    write_cargos(log, create(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub agent_id: usize,
    pub position: Point2,
    pub control: Point2,
    pub detected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CargoRow {
    pub step: usize,
    pub t: f64,
    pub snapshot: CargoSnapshot,
}

fn malformed(path: &Path, row: usize, message: impl Into<String>) -> ExportError {
    ExportError::Malformed { path: path.display().to_string(), row, message: message.into() }
}

fn field<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    rec: &csv::StringRecord,
    i: usize,
    header: &[&str],
) -> Result<T, ExportError> {
    let raw = rec.get(i).ok_or_else(|| malformed(path, row, format!("missing `{}`", header[i])))?;
    raw.parse().map_err(|_| malformed(path, row, format!("bad `{}` value `{raw}`", header[i])))
}

fn optional<T: std::str::FromStr>(
    path: &Path,
    row: usize,
    rec: &csv::StringRecord,
    i: usize,
    header: &[&str],
) -> Result<Option<T>, ExportError> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => field(path, row, rec, i, header).map(Some),
    }
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>, ExportError> {
    let file = File::open(path).map_err(|source| ExportError::Io { path: path.display().to_string(), source })?;
    let mut rdr = csv::Reader::from_reader(file);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(malformed(path, 0, format!("unexpected header {found:?}")));
    }
    Ok(rdr)
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>, ExportError> {
    let h = &TRAJECTORY_HEADER;
    let mut rows = Vec::new();
    for (n, rec) in reader(path, h)?.records().enumerate() {
        let rec = rec?;
        let row = n + 1;
        rows.push(TrajectoryRow {
            step: field(path, row, &rec, 0, h)?,
            t: field(path, row, &rec, 1, h)?,
            agent_id: field(path, row, &rec, 2, h)?,
            position: Point2::new(field(path, row, &rec, 3, h)?, field(path, row, &rec, 4, h)?),
            control: Point2::new(field(path, row, &rec, 5, h)?, field(path, row, &rec, 6, h)?),
            detected: optional(path, row, &rec, 7, h)?,
        });
    }
    Ok(rows)
}

pub fn read_cargos(path: &Path) -> Result<Vec<CargoRow>, ExportError> {
    let h = &CARGO_HEADER;
    let mut rows = Vec::new();
    for (n, rec) in reader(path, h)?.records().enumerate() {
        let rec = rec?;
        let row = n + 1;
        let phase: CargoPhase = rec.get(6).unwrap_or("").parse().map_err(|e: String| malformed(path, row, e))?;
        let dir = match (optional::<f64>(path, row, &rec, 7, h)?, optional::<f64>(path, row, &rec, 8, h)?) {
            (Some(x), Some(y)) => Some(Point2::new(x, y)),
            _ => None,
        };
        let team = rec
            .get(9)
            .unwrap_or("")
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| malformed(path, row, format!("bad team id `{s}`"))))
            .collect::<Result<Vec<usize>, _>>()?;
        rows.push(CargoRow {
            step: field(path, row, &rec, 0, h)?,
            t: field(path, row, &rec, 1, h)?,
            snapshot: CargoSnapshot {
                id: field(path, row, &rec, 2, h)?,
                center: Point2::new(field(path, row, &rec, 3, h)?, field(path, row, &rec, 4, h)?),
                radius: field(path, row, &rec, 5, h)?,
                phase,
                transport_dir: dir,
                team,
                displacement: Point2::ZERO,
            },
        });
    }
    Ok(rows)
}

/// Rebuilds the parts of a [`StepRecord`] a snapshot needs from parsed
/// log rows. Returns `None` if `step` is absent from the trajectory.
pub fn record_at(step: usize, agents: &[TrajectoryRow], cargos: &[CargoRow], d_min: f64) -> Option<StepRecord> {
    let mut rows: Vec<&TrajectoryRow> = agents.iter().filter(|r| r.step == step).collect();
    if rows.is_empty() {
        return None;
    }
    rows.sort_by_key(|r| r.agent_id);
    let positions: Vec<Point2> = rows.iter().map(|r| r.position).collect();
    Some(StepRecord {
        step,
        t: rows[0].t,
        min_h: swarmcage_core::safety::min_barrier(&positions, d_min),
        controls: rows.iter().map(|r| r.control).collect(),
        detected: rows.iter().map(|r| r.detected).collect(),
        positions,
        locational_cost: f64::NAN,
        cargos: cargos.iter().filter(|c| c.step == step).map(|c| c.snapshot.clone()).collect(),
        active_components: rows.iter().filter(|r| r.detected.is_some()).count(),
        constraint_count: 0,
        active_constraints: 0,
    })
}
