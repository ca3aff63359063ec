//! Result files.
//!
//! `scan.csv` columns, in order:
//! `label,e_triplet,e_singlet,gap,err_triplet,err_singlet,gap_oracle`
//! (Hartree; error columns are empty without an oracle).
//!
//! `points.csv` columns, in order:
//! `label,sector,e_sqd,e_sqd_orbopt,e_oracle,s2,dimension,valid_fraction,seconds`.
//!
//! Each point also gets `point_<sector>_<label>.json` with the recovery
//! history, orbital-optimization trajectory and κ.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AmplitudeRow, GapRow, PointResult, ScanResult};
use crate::error::Result;
use crate::orbopt::OrbitalRotation;

pub const SCAN_HEADER: &str = "label,e_triplet,e_singlet,gap,err_triplet,err_singlet,gap_oracle";
pub const POINTS_HEADER: &str = "label,sector,e_sqd,e_sqd_orbopt,e_oracle,s2,dimension,valid_fraction,seconds";

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.12}")).unwrap_or_default()
}

pub fn gaps_csv(rows: &[GapRow]) -> String {
    let mut s = format!("{SCAN_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.12},{:.12},{:.12},{},{},{}",
            r.label,
            r.e_triplet,
            r.e_singlet,
            r.gap,
            opt(r.err_triplet),
            opt(r.err_singlet),
            opt(r.gap_oracle)
        );
    }
    s
}

pub fn points_csv(points: &[PointResult]) -> String {
    let mut s = format!("{POINTS_HEADER}\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{:.12},{:.12},{},{:.6},{},{:.6},{:.3}",
            p.label,
            p.sector.name(),
            p.e_sqd,
            p.e_sqd_orbopt,
            opt(p.e_oracle),
            p.s2,
            p.dimension,
            p.valid_fraction,
            p.timing.total
        );
    }
    s
}

pub fn amplitudes_csv(rows: &[AmplitudeRow]) -> String {
    let mut s = String::from("rank,determinant,reference,test\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(s, "{},{},{:.12e},{:.12e}", i + 1, r.determinant, r.reference, r.test);
    }
    s
}

pub fn point_file_name(p: &PointResult) -> String {
    format!("point_{}_{}.json", p.sector.name(), p.label)
}

pub fn write_point(dir: &Path, p: &PointResult) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(point_file_name(p));
    std::fs::write(&path, serde_json::to_string_pretty(p).expect("point serializes"))?;
    Ok(path)
}

/// κ stored in a point-result file, for warm starts across runs.
pub fn read_kappa(path: &Path) -> Result<OrbitalRotation> {
    #[derive(serde::Deserialize)]
    struct Kappa {
        kappa: ndarray::Array2<f64>,
    }
    let text = std::fs::read_to_string(path)?;
    let k: Kappa = serde_json::from_str(&text)
        .map_err(|e| crate::SqdError::Config(format!("{}: {e}", path.display())))?;
    OrbitalRotation::new(k.kappa)
}

pub fn write_scan(dir: &Path, scan: &ScanResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("scan.csv"), gaps_csv(&scan.gaps))?;
    std::fs::write(dir.join("points.csv"), points_csv(&scan.points))?;
    for p in &scan.points {
        write_point(dir, p)?;
    }
    Ok(())
}
