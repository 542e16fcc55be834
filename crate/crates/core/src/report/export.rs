use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CaseReport, CaseRun};
use crate::error::{Error, Result};
use crate::kinematics::Digit;
use crate::voxelize::{VoxelKey, VoxelSet};

const CSV_HEADER: [&str; 4] = ["kx", "ky", "kz", "count"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
    Ply,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Ply => "ply",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "ply" => Ok(Self::Ply),
            other => Err(Error::Input(format!("unknown format '{other}' (json, csv, ply)"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    kx: i64,
    ky: i64,
    kz: i64,
    count: u64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_json(report: &CaseReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let text = report.to_json()?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.write_all(b"\n"))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<CaseReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// One `kx,ky,kz,count` row per occupied voxel, in key order.
pub fn write_csv(set: &VoxelSet<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for (k, &count) in set.iter() {
        w.serialize(CsvRow { kx: k.x, ky: k.y, kz: k.z, count })
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a voxel list written by [`write_csv`]; `delta` must match the one it was computed with.
pub fn read_csv(path: impl AsRef<Path>, delta: f64) -> Result<VoxelSet<f64>> {
    let path = path.as_ref();
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_err(format!("{other:?}")),
    })?;
    let headers = r.headers().map_err(|e| parse_err(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(parse_err(format!("expected header kx,ky,kz,count, got {headers:?}")));
    }
    let mut set = VoxelSet::new(delta)?;
    for row in r.deserialize::<CsvRow>() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        set.add(VoxelKey::new(row.kx, row.ky, row.kz), row.count)?;
    }
    Ok(set)
}

/// ASCII point cloud of voxel centers.
pub fn write_ply(set: &VoxelSet<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let delta = set.delta();
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "ply")?;
        writeln!(out, "format ascii 1.0")?;
        writeln!(out, "element vertex {}", set.len())?;
        writeln!(out, "property float x")?;
        writeln!(out, "property float y")?;
        writeln!(out, "property float z")?;
        writeln!(out, "end_header")?;
        for k in set.keys() {
            let [x, y, z] = k.center(delta);
            writeln!(out, "{x:.6} {y:.6} {z:.6}")?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

fn write_set(set: &VoxelSet<f64>, path: &Path, format: ExportFormat) -> Result<()> {
    match format {
        ExportFormat::Csv => write_csv(set, path),
        ExportFormat::Ply => write_ply(set, path),
        ExportFormat::Json => Err(Error::Input("voxel sets export as csv or ply".into())),
    }
}

/// Writes a case run into `dir`: the JSON report, or one voxel file per digit
/// workspace and per overlap. Overlap files carry the finger-side counts;
/// `*_thumb` files the thumb-side counts. Returns the paths written.
pub fn write_run(run: &CaseRun, dir: impl AsRef<Path>, format: ExportFormat) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let id = run.report.case_id;
    let ext = format.extension();
    if format == ExportFormat::Json {
        let path = dir.join(format!("case{id}.json"));
        write_json(&run.report, &path)?;
        return Ok(vec![path]);
    }
    let mut written = Vec::new();
    for digit in Digit::ALL {
        let path = dir.join(format!("case{id}_{digit}.{ext}"));
        write_set(run.workspace(digit), &path, format)?;
        written.push(path);
    }
    for ov in &run.overlaps {
        let finger = ov.pair.1;
        let path = dir.join(format!("case{id}_overlap_{finger}.{ext}"));
        write_set(&ov.finger_set(), &path, format)?;
        written.push(path);
        let path = dir.join(format!("case{id}_overlap_{finger}_thumb.{ext}"));
        write_set(&ov.thumb_set(), &path, format)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VoxelSet<f64> {
        VoxelSet::from_counts(
            0.05,
            [(VoxelKey::new(2, -1, 1), 3), (VoxelKey::new(0, 0, 0), 1)],
        )
        .unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_csv(&sample(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "kx,ky,kz,count\n0,0,0,1\n2,-1,1,3\n");
        assert_eq!(read_csv(&path, 0.05).unwrap(), sample());
    }

    #[test]
    fn csv_header_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y,z,n\n1,2,3,4\n").unwrap();
        assert!(matches!(read_csv(&path, 0.05), Err(Error::Parse { .. })));
        assert!(matches!(read_csv(dir.path().join("none.csv"), 0.05), Err(Error::Io { .. })));
    }

    #[test]
    fn ply_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.ply");
        write_ply(&sample(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ply");
        assert_eq!(lines[2], "element vertex 2");
        assert_eq!(lines[6], "end_header");
        assert_eq!(lines[7], "0.025000 0.025000 0.025000");
        assert_eq!(lines[8], "0.125000 -0.025000 0.075000");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("PLY".parse::<ExportFormat>().unwrap(), ExportFormat::Ply);
        assert!("xml".parse::<ExportFormat>().is_err());
    }
}
