use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqd_core::driver::output::{amplitudes_csv, gaps_csv, points_csv, read_kappa, write_point, write_scan};
use sqd_core::driver::{amplitude_report, load_hamiltonian, point_oracle, run_point, run_scan, PointConfig, ScanConfig};
use sqd_core::integrals::write_fcidump;
use sqd_core::model::{model_hamiltonian, ModelParameters};
use sqd_core::{Result, SqdError};

#[derive(Parser)]
#[command(name = "sqd", version, about = "Sample-based quantum diagonalization scans")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scan configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the scan seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip orbital optimization.
    #[arg(long)]
    no_orbopt: bool,
    /// Also compute the exact reference for every point.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct PointSelect {
    /// Label of the point to run (required if the config has several).
    #[arg(long)]
    label: Option<f64>,
    /// Sector of the point, e.g. "triplet_4a2b".
    #[arg(long)]
    sector: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one point of a configuration.
    RunPoint {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        select: PointSelect,
        /// Measured samples replacing the simulator.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Point-result file whose κ seeds orbital optimization.
        #[arg(long)]
        warm_start: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        output: PathBuf,
    },
    /// Run every point of a configuration and write the gap series.
    RunScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "results")]
        output: PathBuf,
    },
    /// Exact energies for every point of a configuration.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Leading determinant weights of one point against the exact state.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        select: PointSelect,
        #[arg(long, default_value_t = 20)]
        top: usize,
        /// Write the table here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the built-in model at one bond length as an FCIDUMP file.
    WriteModel {
        /// C–H bond length in Å.
        #[arg(long)]
        length: f64,
        /// Sector whose SCF orbitals define the basis.
        #[arg(long, default_value_t = 3)]
        n_alpha: usize,
        #[arg(long, default_value_t = 3)]
        n_beta: usize,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load(common: &Common) -> Result<ScanConfig> {
    let mut cfg = ScanConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.scan.seed = seed;
    }
    for p in &mut cfg.point {
        p.optimize_orbitals &= !common.no_orbopt;
        p.oracle |= common.oracle;
    }
    Ok(cfg)
}

fn select(cfg: &ScanConfig, sel: &PointSelect) -> Result<PointConfig> {
    let hits: Vec<&PointConfig> = cfg
        .point
        .iter()
        .filter(|p| sel.label.is_none_or(|l| p.label == l))
        .filter(|p| sel.sector.as_ref().is_none_or(|s| p.sector().name() == *s))
        .collect();
    match hits.as_slice() {
        [p] => Ok((*p).clone()),
        [] => Err(SqdError::Config("no point matches --label/--sector".into())),
        _ => Err(SqdError::Config(format!(
            "{} points match; narrow the choice with --label/--sector",
            hits.len()
        ))),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SqdError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::RunPoint {
            common,
            select: sel,
            samples,
            warm_start,
            output,
        } => {
            let cfg = load(&common)?;
            let mut point = select(&cfg, &sel)?;
            if samples.is_some() {
                point.samples = samples;
            }
            let kappa = warm_start.as_deref().map(read_kappa).transpose()?;
            let result = run_point(&point, cfg.scan.seed, kappa.as_ref())?;
            let path = write_point(&output, &result)?;
            print!("{}", points_csv(std::slice::from_ref(&result)));
            log::info!("wrote {}", path.display());
        }
        Command::RunScan { common, output } => {
            let cfg = load(&common)?;
            let scan = run_scan(&cfg)?;
            write_scan(&output, &scan)?;
            print!("{}", gaps_csv(&scan.gaps));
            log::info!("wrote results to {}", output.display());
        }
        Command::Oracle { config } => {
            let cfg = ScanConfig::load(&config)?;
            println!("label,sector,e_oracle,s2");
            for p in &cfg.point {
                let ham = load_hamiltonian(p)?;
                let r = point_oracle(&ham, p.spin)?;
                println!("{},{},{:.12},{:.6}", p.label, p.sector().name(), r.energy, r.s2);
            }
        }
        Command::Report {
            common,
            select: sel,
            top,
            output,
        } => {
            let cfg = load(&common)?;
            let mut point = select(&cfg, &sel)?;
            point.oracle = true;
            let result = run_point(&point, cfg.scan.seed, None)?;
            let (Some(state), Some(reference)) = (&result.state, &result.oracle_state) else {
                return Err(SqdError::InvalidInput("point produced no state".into()));
            };
            let text = amplitudes_csv(&amplitude_report(state, reference, top));
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::WriteModel {
            length,
            n_alpha,
            n_beta,
            output,
        } => {
            let ham = model_hamiltonian(&ModelParameters::default(), length, n_alpha, n_beta)?;
            write(&output, &write_fcidump(&ham))?;
        }
    }
    Ok(())
}

fn exit_code(err: &SqdError) -> u8 {
    match err.root() {
        SqdError::NotConverged { .. } => 3,
        SqdError::ResourceGuard { .. } => 4,
        SqdError::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
