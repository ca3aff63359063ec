//! Pipeline orchestration: single points, chained scans, gap series,
//! amplitude reports and result files.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::determinant::Determinant;
use crate::error::{Result, SqdError};
use crate::integrals::{parse_fcidump, MolecularHamiltonian};
use crate::model::{model_hamiltonian, ModelParameters};
use crate::oracle::{fci_spin_state, OracleResult};
use crate::orbopt::{optimize_orbitals, OrbOptStep, OrbitalRotation};
use crate::recovery::{run_recovery, BatchRecord, IterationRecord};
use crate::sampler::{
    build_lucj, load_amplitudes, mp2_amplitudes, orbital_energies, sample, simulate_lucj_state, SampleSet,
};
use crate::subspace::SubspaceState;

pub use config::{Chaining, PointConfig, ScanConfig, ScanSettings, Sector};

/// Penalty weight of the spin-targeted exact reference; large enough to lift
/// every competing spin state on the supported systems.
pub const ORACLE_LAMBDA: f64 = 1.0;

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub amplitudes: f64,
    pub simulate: f64,
    pub sample: f64,
    pub recovery: f64,
    pub orbopt: f64,
    pub oracle: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointResult {
    pub label: f64,
    pub sector: Sector,
    /// Recovery energy with the input orbitals.
    pub e_sqd: f64,
    /// Energy after orbital optimization (equal to `e_sqd` when disabled).
    pub e_sqd_orbopt: f64,
    pub e_oracle: Option<f64>,
    pub s2: f64,
    pub s2_oracle: Option<f64>,
    pub dimension: usize,
    pub valid_fraction: f64,
    pub distinct_samples: usize,
    pub recovery: Vec<IterationRecord>,
    pub batches: Vec<BatchRecord>,
    pub orbopt: Vec<OrbOptStep>,
    pub orbopt_converged: bool,
    /// Whether a warm-start κ was supplied and kept.
    pub warm_started: bool,
    /// Optimized orbital generator, row-major.
    pub kappa: Array2<f64>,
    pub timing: Timing,
    /// Final state and exact reference, kept for amplitude reports.
    #[serde(skip)]
    pub state: Option<SubspaceState>,
    #[serde(skip)]
    pub oracle_state: Option<SubspaceState>,
}

impl PointResult {
    /// E_oracle ≤ E_sqd_orbopt ≤ E_sqd within `slack`.
    pub fn variational_chain_holds(&self, slack: f64) -> bool {
        self.e_sqd_orbopt <= self.e_sqd + slack && self.e_oracle.is_none_or(|o| o <= self.e_sqd_orbopt + slack)
    }
}

/// Integrals for a point, restricted to its sector and active space.
pub fn load_hamiltonian(cfg: &PointConfig) -> Result<MolecularHamiltonian> {
    let ham = match (&cfg.integrals, cfg.model) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SqdError::Config(format!("cannot read {}: {e}", path.display())))?;
            let ham = parse_fcidump(&text)?;
            if ham.n_alpha + ham.n_beta != cfg.n_alpha + cfg.n_beta {
                return Err(SqdError::SectorMismatch(format!(
                    "{} holds {} electrons, point {} asks for {}",
                    path.display(),
                    ham.n_alpha + ham.n_beta,
                    cfg.label,
                    cfg.n_alpha + cfg.n_beta
                )));
            }
            ham
        }
        (None, Some(r)) => model_hamiltonian(&ModelParameters::default(), r, cfg.n_alpha, cfg.n_beta)?,
        (None, None) => return Err(SqdError::Config("point has no integral source".into())),
    };
    let n_frozen = cfg.n_frozen;
    let ham = ham.with_sector(cfg.n_alpha, cfg.n_beta)?.freeze_core(n_frozen)?;
    Ok(ham)
}

fn elapsed(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Simulated or ingested samples for a point.
pub fn point_samples(cfg: &PointConfig, ham: &MolecularHamiltonian, seed: u64, timing: &mut Timing) -> Result<SampleSet> {
    if let Some(path) = &cfg.samples {
        let t = Instant::now();
        let s = SampleSet::load(path).map_err(|e| e.at_stage("samples"))?;
        timing.sample = elapsed(t);
        if s.n_orb != ham.n_orb {
            return Err(SqdError::DimensionMismatch {
                expected: ham.n_orb,
                found: s.n_orb,
            }
            .at_stage("samples"));
        }
        return Ok(s);
    }
    let t = Instant::now();
    let amps = if cfg.amplitudes == "mp2" {
        let (ea, eb) = orbital_energies(ham, ham.n_alpha, ham.n_beta);
        mp2_amplitudes(ham, &ea, &eb)
    } else {
        load_amplitudes(Path::new(&cfg.amplitudes))
    }
    .map_err(|e| e.at_stage("amplitudes"))?;
    let params = build_lucj(&amps, cfg.layers, cfg.connectivity()?).map_err(|e| e.at_stage("lucj"))?;
    timing.amplitudes = elapsed(t);

    let t = Instant::now();
    let reference = Determinant::hartree_fock(ham.n_alpha, ham.n_beta);
    let state = simulate_lucj_state(&params, &reference).map_err(|e| e.at_stage("simulate"))?;
    timing.simulate = elapsed(t);

    let t = Instant::now();
    let mut noise = cfg.noise;
    noise.seed = seed;
    let s = sample(&state, cfg.shots, &noise).map_err(|e| e.at_stage("sample"))?;
    timing.sample = elapsed(t);
    Ok(s)
}

/// Spin-targeted exact reference for a point's sector.
pub fn point_oracle(ham: &MolecularHamiltonian, spin: f64) -> Result<OracleResult> {
    let r = fci_spin_state(ham, ham.n_alpha, ham.n_beta, spin, ORACLE_LAMBDA)?;
    let target = spin * (spin + 1.0);
    if (r.s2 - target).abs() > 1e-6 {
        return Err(SqdError::InvalidInput(format!(
            "exact reference has <S^2> = {} instead of {target}; penalty too weak",
            r.s2
        )));
    }
    Ok(r)
}

/// Run the full pipeline for one point.
pub fn run_point(cfg: &PointConfig, seed: u64, warm_start: Option<&OrbitalRotation>) -> Result<PointResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timing = Timing::default();
    let ham = load_hamiltonian(cfg).map_err(|e| e.at_stage("integrals"))?;
    let samples = point_samples(cfg, &ham, seed, &mut timing)?;

    let t = Instant::now();
    let mut rc = cfg.recovery.clone();
    rc.seed = seed;
    let rec = run_recovery(&ham, &samples, cfg.spin, &rc).map_err(|e| e.at_stage("recovery"))?;
    timing.recovery = elapsed(t);

    let t = Instant::now();
    let n = ham.n_orb;
    let mut state = rec.state.clone();
    let mut e_final = rec.energy;
    let mut kappa = Array2::zeros((n, n));
    let mut steps = Vec::new();
    let mut converged = false;
    let mut warm_started = false;
    if cfg.optimize_orbitals {
        let run = |init| {
            optimize_orbitals(&ham, &rec.state.basis, cfg.spin, &rc.solver, &cfg.orbopt, init)
                .map_err(|e| e.at_stage("orbopt"))
        };
        let mut out = run(warm_start)?;
        warm_started = warm_start.is_some();
        if warm_started && out.energy > rec.energy {
            log::info!("point {}: warm start worse than identity, restarting", cfg.label);
            out = run(None)?;
            warm_started = false;
        }
        if out.energy <= rec.energy {
            e_final = out.energy;
            state = out.state;
            kappa = out.rotation.kappa;
        }
        steps = out.trajectory;
        converged = out.converged;
    }
    timing.orbopt = elapsed(t);

    let t = Instant::now();
    let oracle = if cfg.oracle {
        Some(point_oracle(&ham, cfg.spin).map_err(|e| e.at_stage("oracle"))?)
    } else {
        None
    };
    timing.oracle = elapsed(t);
    timing.total = elapsed(start);

    Ok(PointResult {
        label: cfg.label,
        sector: cfg.sector(),
        e_sqd: rec.energy,
        e_sqd_orbopt: e_final,
        e_oracle: oracle.as_ref().map(|o| o.energy),
        s2: state.s2,
        s2_oracle: oracle.as_ref().map(|o| o.s2),
        dimension: state.basis.dim(),
        valid_fraction: samples.valid_fraction(ham.n_alpha, ham.n_beta),
        distinct_samples: samples.counts.len(),
        recovery: rec.iterations,
        batches: rec.batches,
        orbopt: steps,
        orbopt_converged: converged,
        warm_started,
        kappa,
        timing,
        state: Some(state),
        oracle_state: oracle.map(|o| o.state),
    })
}

/// Singlet–triplet gap at one label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapRow {
    pub label: f64,
    pub e_triplet: f64,
    pub e_singlet: f64,
    /// E_singlet − E_triplet.
    pub gap: f64,
    pub err_triplet: Option<f64>,
    pub err_singlet: Option<f64>,
    pub gap_oracle: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    /// Points grouped by sector, each group in ascending label order.
    pub points: Vec<PointResult>,
    pub gaps: Vec<GapRow>,
}

impl ScanResult {
    pub fn sector_series(&self, sector: &Sector) -> Vec<&PointResult> {
        self.points.iter().filter(|p| p.sector == *sector).collect()
    }
}

/// Warm-start source of every point (index into `points`), after applying
/// the chaining rule to points without an explicit source.
pub fn warm_start_sources(points: &[PointConfig], chaining: Chaining) -> Result<Vec<Option<usize>>> {
    let mut sources = vec![None; points.len()];
    for (i, p) in points.iter().enumerate() {
        let same: Vec<usize> = (0..points.len()).filter(|&j| points[j].sector() == p.sector()).collect();
        sources[i] = match p.warm_start {
            Some(label) => {
                if label == p.label {
                    return Err(SqdError::Config(format!("point {} warm-starts from itself", p.label)));
                }
                Some(same.iter().copied().find(|&j| points[j].label == label).ok_or_else(|| {
                    SqdError::Config(format!(
                        "point {} warm-starts from missing label {label} in sector {}",
                        p.label,
                        p.sector().name()
                    ))
                })?)
            }
            None if !p.optimize_orbitals => None,
            None => {
                let neighbour = |pred: &dyn Fn(f64) -> bool, closest: fn(f64, f64) -> bool| {
                    same.iter()
                        .copied()
                        .filter(|&j| pred(points[j].label) && points[j].optimize_orbitals)
                        .reduce(|a, b| if closest(points[b].label, points[a].label) { b } else { a })
                };
                match chaining {
                    Chaining::None => None,
                    Chaining::Ascending => neighbour(&|l| l < p.label, |a, b| a > b),
                    Chaining::Descending => neighbour(&|l| l > p.label, |a, b| a < b),
                }
            }
        };
    }
    // Reject cycles by walking each chain.
    for start in 0..points.len() {
        let mut seen = vec![false; points.len()];
        let mut at = Some(start);
        while let Some(i) = at {
            if seen[i] {
                return Err(SqdError::Config(format!(
                    "warm-start chain through point {} forms a cycle",
                    points[i].label
                )));
            }
            seen[i] = true;
            at = sources[i];
        }
    }
    Ok(sources)
}

/// Run every point, respecting warm-start dependencies; points whose
/// sources are finished run concurrently.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let points = &cfg.point;
    let sources = warm_start_sources(points, cfg.scan.chaining)?;
    let mut results: Vec<Option<PointResult>> = vec![None; points.len()];
    while results.iter().any(Option::is_none) {
        let ready: Vec<usize> = (0..points.len())
            .filter(|&i| results[i].is_none() && sources[i].is_none_or(|s| results[s].is_some()))
            .collect();
        let done: Vec<(usize, PointResult)> = ready
            .par_iter()
            .map(|&i| {
                let warm = sources[i]
                    .map(|s| OrbitalRotation::new(results[s].as_ref().expect("source finished").kappa.clone()))
                    .transpose()?;
                let r = run_point(&points[i], cfg.scan.seed, warm.as_ref())
                    .map_err(|e| e.at_stage(format!("point {} ({})", points[i].label, points[i].sector().name())))?;
                Ok((i, r))
            })
            .collect::<Result<_>>()?;
        for (i, r) in done {
            results[i] = Some(r);
        }
    }
    let mut points: Vec<PointResult> = results.into_iter().map(|r| r.expect("all points ran")).collect();
    points.sort_by(|a, b| {
        a.sector
            .partial_cmp(&b.sector)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.label.total_cmp(&b.label))
    });
    let gaps = gap_series(&points)?;
    Ok(ScanResult { points, gaps })
}

/// Pointwise E_singlet − E_triplet for labels present in both sectors.
pub fn gap_series(points: &[PointResult]) -> Result<Vec<GapRow>> {
    let mut by_label: BTreeMap<u64, (Option<&PointResult>, Option<&PointResult>)> = BTreeMap::new();
    let key = |l: f64| {
        // Order-preserving map of f64 onto u64.
        let b = l.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | 1 << 63
        }
    };
    for p in points {
        let slot = by_label.entry(key(p.label)).or_default();
        let target = if p.sector.spin.abs() < 1e-9 {
            &mut slot.0
        } else if (p.sector.spin - 1.0).abs() < 1e-9 {
            &mut slot.1
        } else {
            continue;
        };
        if target.is_some() {
            return Err(SqdError::SectorMismatch(format!(
                "two points with spin {} at label {}",
                p.sector.spin, p.label
            )));
        }
        *target = Some(p);
    }
    let mut rows = Vec::new();
    for (s, t) in by_label.into_values() {
        let (Some(s), Some(t)) = (s, t) else { continue };
        if s.sector.n_alpha + s.sector.n_beta != t.sector.n_alpha + t.sector.n_beta {
            return Err(SqdError::SectorMismatch(format!(
                "singlet and triplet at label {} hold different electron counts",
                s.label
            )));
        }
        rows.push(GapRow {
            label: s.label,
            e_triplet: t.e_sqd_orbopt,
            e_singlet: s.e_sqd_orbopt,
            gap: s.e_sqd_orbopt - t.e_sqd_orbopt,
            err_triplet: t.e_oracle.map(|o| t.e_sqd_orbopt - o),
            err_singlet: s.e_oracle.map(|o| s.e_sqd_orbopt - o),
            gap_oracle: s.e_oracle.zip(t.e_oracle).map(|(a, b)| a - b),
        });
    }
    Ok(rows)
}

/// One row of an amplitude comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub determinant: String,
    pub reference: f64,
    pub test: f64,
}

/// The `top_n` largest |ψ|² of `reference`, descending, next to the weight
/// of the same determinant in `state` (zero where absent).
pub fn amplitude_report(state: &SubspaceState, reference: &SubspaceState, top_n: usize) -> Vec<AmplitudeRow> {
    let n = reference.basis.n_orb();
    let norm = |s: &SubspaceState| s.vector.iter().map(|x| x * x).sum::<f64>();
    let (nr, nt) = (norm(reference), norm(state));
    reference
        .leading(top_n)
        .into_iter()
        .map(|(d, c)| AmplitudeRow {
            determinant: d.render(n),
            reference: c * c / nr,
            test: state.coefficient(&d).powi(2) / nt,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::write_fcidump;
    use crate::recovery::RecoveryConfig;
    use crate::subspace::SolverConfig;
    use crate::testing::random_hamiltonian;

    fn quick(mut p: PointConfig) -> PointConfig {
        p.shots = 20_000;
        p.recovery = RecoveryConfig {
            n_batches: 2,
            n_iterations: 2,
            solver: SolverConfig {
                tol: 1e-10,
                ..SolverConfig::default()
            },
            ..RecoveryConfig::default()
        };
        p.orbopt.max_steps = 10;
        p.oracle = true;
        p
    }

    #[test]
    fn two_electrons_two_orbitals_reach_the_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h2.fcidump");
        std::fs::write(&path, write_fcidump(&random_hamiltonian(2, 1, 1, 4))).unwrap();
        let mut p = quick(PointConfig::model_point(0.7, 1, 1, 0.0));
        p.model = None;
        p.integrals = Some(path);
        p.layers = 1;
        let r = run_point(&p, 1, None).unwrap();
        assert!((r.e_sqd - r.e_oracle.unwrap()).abs() < 1e-8);
        assert!(r.variational_chain_holds(1e-9));
    }

    #[test]
    fn flipped_sectors_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.fcidump");
        std::fs::write(&path, write_fcidump(&random_hamiltonian(4, 2, 1, 9))).unwrap();
        let energy = |na, nb| {
            let samples = dir.path().join(format!("s{na}{nb}.txt"));
            let basis = crate::subspace::SubspaceBasis::full(4, na, nb).unwrap();
            std::fs::write(&samples, SampleSet::exhaustive(&basis).to_text()).unwrap();
            let mut p = quick(PointConfig::model_point(1.0, na, nb, 0.5));
            p.model = None;
            p.integrals = Some(path.clone());
            p.samples = Some(samples);
            run_point(&p, 2, None).unwrap()
        };
        let a = energy(2, 1);
        let b = energy(1, 2);
        assert_eq!((a.dimension, b.dimension), (24, 24));
        assert!((a.e_sqd - b.e_sqd).abs() < 1e-10);
        assert!((a.e_sqd_orbopt - b.e_sqd_orbopt).abs() < 1e-10);
        assert!((a.e_sqd - a.e_oracle.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn warm_start_validation() {
        let mut pts = vec![
            PointConfig::model_point(1.0, 3, 3, 0.0),
            PointConfig::model_point(2.0, 3, 3, 0.0),
            PointConfig::model_point(1.5, 4, 2, 1.0),
            PointConfig::model_point(3.0, 3, 3, 0.0),
        ];
        assert_eq!(
            warm_start_sources(&pts, Chaining::Ascending).unwrap(),
            vec![None, Some(0), None, Some(1)]
        );
        assert_eq!(
            warm_start_sources(&pts, Chaining::Descending).unwrap(),
            vec![Some(1), Some(3), None, None]
        );
        pts[0].warm_start = Some(3.0);
        assert!(warm_start_sources(&pts, Chaining::Ascending).is_err());
        pts[0].warm_start = Some(1.5);
        assert!(warm_start_sources(&pts, Chaining::None).is_err());
        pts[0].warm_start = Some(1.0);
        assert!(warm_start_sources(&pts, Chaining::None).is_err());
    }

    #[test]
    fn gap_rows_pair_by_label() {
        let mk = |label: f64, na, nb, spin: f64, e: f64| {
            let mut p = run_point_stub(label, na, nb, spin);
            p.e_sqd_orbopt = e;
            p.e_oracle = Some(e - 0.001);
            p
        };
        let pts = vec![
            mk(1.0, 3, 3, 0.0, -1.0),
            mk(1.0, 4, 2, 1.0, -1.2),
            mk(2.0, 3, 3, 0.0, -0.9),
        ];
        let rows = gap_series(&pts).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].gap - 0.2).abs() < 1e-12);
        assert!((rows[0].gap_oracle.unwrap() - 0.2).abs() < 1e-12);
        let dup = vec![mk(1.0, 3, 3, 0.0, -1.0), mk(1.0, 3, 3, 0.0, -1.0)];
        assert!(gap_series(&dup).is_err());
        let odd = vec![mk(1.0, 3, 3, 0.0, -1.0), mk(1.0, 3, 2, 1.0, -1.0)];
        assert!(gap_series(&odd).is_err());
    }

    fn run_point_stub(label: f64, n_alpha: usize, n_beta: usize, spin: f64) -> PointResult {
        PointResult {
            label,
            sector: Sector { n_alpha, n_beta, spin },
            e_sqd: 0.0,
            e_sqd_orbopt: 0.0,
            e_oracle: None,
            s2: 0.0,
            s2_oracle: None,
            dimension: 0,
            valid_fraction: 1.0,
            distinct_samples: 0,
            recovery: vec![],
            batches: vec![],
            orbopt: vec![],
            orbopt_converged: false,
            warm_started: false,
            kappa: Array2::zeros((0, 0)),
            timing: Timing::default(),
            state: None,
            oracle_state: None,
        }
    }

    #[test]
    fn amplitude_report_properties() {
        let p = quick(PointConfig::model_point(2.6, 3, 3, 0.0));
        let r = run_point(&p, 3, None).unwrap();
        let oracle = r.oracle_state.as_ref().unwrap();
        let same = amplitude_report(oracle, oracle, 10);
        assert!(same.iter().all(|row| row.reference == row.test));
        assert_eq!(same[0].determinant, Determinant::hartree_fock(3, 3).render(6));
        assert!(same.windows(2).all(|w| w[0].reference >= w[1].reference));
        let rows = amplitude_report(r.state.as_ref().unwrap(), oracle, 400);
        assert!(rows.iter().map(|x| x.reference).sum::<f64>() <= 1.0 + 1e-9);
        assert!(rows.iter().map(|x| x.test).sum::<f64>() <= 1.0 + 1e-9);
    }
}
