//! Trajectory and polyline file formats.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use elastica_core::{Trajectory, Vec2};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

/// One line of a JSONL trajectory file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub l: f64,
    pub points: Vec<[f64; 2]>,
    #[serde(rename = "E")]
    pub energy: f64,
    pub length: f64,
    pub gap: f64,
}

/// 17 significant digits; enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a trajectory in `format` into `dir`: `trajectory.jsonl`, or
/// `points.csv` plus `scalars.csv`. Returns the files written.
pub fn write_trajectory(
    traj: &Trajectory,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    match format {
        Format::Jsonl => {
            let path = dir.join("trajectory.jsonl");
            write_jsonl(traj, &path)?;
            Ok(vec![path])
        }
        Format::Csv => {
            let points = dir.join("points.csv");
            let scalars = dir.join("scalars.csv");
            write_csv(traj, &points, &scalars)?;
            Ok(vec![points, scalars])
        }
    }
}

pub fn write_jsonl(traj: &Trajectory, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for snap in &traj.snapshots {
        let rec = &traj.records[snap.step];
        let mut line = String::new();
        write!(
            line,
            "{{\"t\":{},\"l\":{},\"points\":[",
            num(snap.time),
            num(snap.curve.edge_len())
        )
        .unwrap();
        for (i, p) in snap.curve.points().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "[{},{}]", num(p.x), num(p.y)).unwrap();
        }
        write!(
            line,
            "],\"E\":{},\"length\":{},\"gap\":{}}}",
            num(rec.energy),
            num(rec.length),
            num(rec.gap)
        )
        .unwrap();
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SnapshotRecord>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            msg: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Long-format points (`step,i,x,y`) and one row of scalars per snapshot.
pub fn write_csv(traj: &Trajectory, points: &Path, scalars: &Path) -> Result<(), IoError> {
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IoError::Csv { path, source }
    };
    let mut w = csv::Writer::from_path(points).map_err(csv_err(points))?;
    w.write_record(["step", "i", "x", "y"])
        .map_err(csv_err(points))?;
    for snap in &traj.snapshots {
        let step = snap.step.to_string();
        for (i, p) in snap.curve.points().iter().enumerate() {
            w.write_record([step.as_str(), &i.to_string(), &num(p.x), &num(p.y)])
                .map_err(csv_err(points))?;
        }
    }
    w.flush().map_err(io_err(points))?;

    let mut w = csv::Writer::from_path(scalars).map_err(csv_err(scalars))?;
    w.write_record([
        "step",
        "t",
        "l",
        "E",
        "length",
        "gap",
        "bending",
        "dissipation_over_tau",
        "max_speed",
    ])
    .map_err(csv_err(scalars))?;
    for snap in &traj.snapshots {
        let r = &traj.records[snap.step];
        w.write_record([
            snap.step.to_string(),
            num(r.time),
            num(snap.curve.edge_len()),
            num(r.energy),
            num(r.length),
            num(r.gap),
            num(r.bending),
            num(r.dissipation_over_tau),
            num(r.max_speed),
        ])
        .map_err(csv_err(scalars))?;
    }
    w.flush().map_err(io_err(scalars))
}

/// Read a polyline from whitespace-separated `x y` lines. Blank lines and
/// lines starting with `#` are skipped.
pub fn read_polyline(path: &Path) -> Result<Vec<Vec2>, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_polyline(&text).map_err(|(line, msg)| IoError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    })
}

pub fn parse_polyline(text: &str) -> Result<Vec<Vec2>, (usize, String)> {
    let mut points = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [x, y] = fields[..] else {
            return Err((k + 1, format!("expected two numbers, got {:?}", line)));
        };
        let parse = |s: &str| s.parse::<f64>().map_err(|e| (k + 1, format!("{s:?}: {e}")));
        points.push(Vec2::new(parse(x)?, parse(y)?));
    }
    Ok(points)
}

pub fn format_polyline(points: &[Vec2]) -> String {
    let mut s = String::new();
    for p in points {
        writeln!(s, "{} {}", num(p.x), num(p.y)).unwrap();
    }
    s
}
