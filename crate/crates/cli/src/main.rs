//! `qnd` — command-line front end for the simulation library: config
//! ingestion, scenario dispatch, worker-pool sizing, and file emission.
//!
//! Every scenario subcommand writes `<scenario>.csv` and
//! `<scenario>.meta.json` into the output directory; the meta file fed back
//! through `--config` reproduces the run exactly. Exit codes: 0 success,
//! 1 config or module error (with a diagnostic line), 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnd_sim::protocols::{
    load_config, run_scenario, Scenario, ScenarioConfig, SweepGrid, SweepResult,
};
use qnd_sim::units::to_mhz;

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Coherence-preserving leakage detection and cooling simulations for nuclear-spin qudits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario config file (TOML, or the meta.json of a previous run)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for <scenario>.csv and <scenario>.meta.json
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweep points (capped by QND_MAX_WORKERS)
    #[arg(long, value_name = "N", default_value_t = 1)]
    workers: usize,
    /// Override a registry constant, e.g. --set sr87.1P1.Q_MHz=39 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Atomic species id from the registry or the species file
    #[arg(long, value_name = "ID")]
    species: Option<String>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Sweep lower bound
    #[arg(long)]
    grid_min: Option<f64>,
    /// Sweep upper bound
    #[arg(long)]
    grid_max: Option<f64>,
    /// Sweep point count
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the resolved level structure of a species
    Species {
        /// Species id (Sr87, Yb171, or one defined by a species file)
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Far-off-resonance leakage detection infidelity vs probe detuning
    LeakageSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Probe Rabi frequency Ω_ga (/2π MHz)
        #[arg(long)]
        probe_rabi_mhz: Option<f64>,
        /// Photon exposures, e.g. --photons 10 --photons 100
        #[arg(long)]
        photons: Vec<u64>,
        /// Drop the canceller's own spontaneous emission from the model
        #[arg(long)]
        no_triplet_scattering: bool,
    },
    /// Dressed M_J=0 spectrum, perturbation theory, and overlaps
    DressingSpectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Dressing Rabi frequency Ω_ab (/2π MHz)
        #[arg(long)]
        rabi_ab_mhz: Option<f64>,
    },
    /// Two-level coherence transfer: simulated vs analytic infidelity
    TwoLevel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Decay rate Γ (/2π MHz)
        #[arg(long)]
        gamma_mhz: Option<f64>,
        /// Evaluate one Δ/Γ point instead of a grid
        #[arg(long)]
        delta_over_gamma: Option<f64>,
    },
    /// Tune the ¹D₂ dressing against the residual quadrupolar shift
    CancelQuadrupole {
        #[command(flatten)]
        common: Common,
        /// Dressing Rabi frequency Ω_ab (/2π MHz)
        #[arg(long)]
        rabi_ab_mhz: Option<f64>,
        /// |Δ_ad| at which the optimum is realized (/2π MHz)
        #[arg(long)]
        quad_detuning_mhz: Option<f64>,
    },
    /// Quench the dressed ¹P₁ M_J=0 manifold to the ground state
    QuenchDecay {
        #[command(flatten)]
        common: Common,
    },
    /// Classical bookkeeper for the three-step sideband cooling cycle
    CoolingCycle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n0: Option<u32>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        cycles: Option<u32>,
    },
    /// Dressing-requirement comparison for the I = 1/2 species
    Yb {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn base_config(
    common: &Common,
    scenario: Scenario,
    default_species: &str,
) -> Result<ScenarioConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => ScenarioConfig::new(default_species, scenario),
    };
    cfg.scenario = scenario;
    if let Some(sp) = &common.species {
        cfg.species = sp.clone();
    }
    for kv in &common.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set {kv:?}: expected KEY=VALUE"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| format!("--set {kv:?}: value is not a number"))?;
        cfg.overrides.insert(key.to_string(), value);
    }
    Ok(cfg)
}

fn apply_grid(cfg: &mut ScenarioConfig, grid: &GridArgs, parameter: &str, log: bool) {
    if grid.grid_min.is_none() && grid.grid_max.is_none() && grid.grid_points.is_none() {
        return;
    }
    let current = cfg.grid.clone().unwrap_or_else(|| {
        if log {
            SweepGrid::log(parameter, 1.0, 10.0, 2)
        } else {
            SweepGrid::linear(parameter, 0.0, 1.0, 2)
        }
    });
    cfg.grid = Some(SweepGrid {
        parameter: parameter.into(),
        min: grid.grid_min.unwrap_or(current.min),
        max: grid.grid_max.unwrap_or(current.max),
        points: grid.grid_points.unwrap_or(current.points),
        scale: current.scale,
    });
}

fn workers_from(common: &Common) -> usize {
    let mut n = common.workers.max(1);
    if let Ok(cap) = std::env::var("QND_MAX_WORKERS") {
        if let Ok(cap) = cap.parse::<usize>() {
            n = n.min(cap.max(1));
        }
    }
    n
}

fn emit(result: &SweepResult, out: &PathBuf) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let slug = result.scenario.slug();
    let csv_path = out.join(format!("{slug}.csv"));
    let meta_path = out.join(format!("{slug}.meta.json"));
    std::fs::write(&csv_path, result.csv_body())
        .map_err(|e| format!("{}: {e}", csv_path.display()))?;
    std::fs::write(&meta_path, result.meta_json())
        .map_err(|e| format!("{}: {e}", meta_path.display()))?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", meta_path.display());
    Ok(())
}

fn run_and_emit(cfg: &ScenarioConfig, common: &Common) -> Result<(), String> {
    let result = run_scenario(cfg, workers_from(common)).map_err(|e| e.to_string())?;
    emit(&result, &common.out)
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Species { id, common } => {
            let mut cfg = base_config(&common, Scenario::DressingSpectrum, &id)?;
            cfg.species = id;
            let species = cfg.resolve_species().map_err(|e| e.to_string())?;
            println!(
                "{:<12} {:<6} {:>5} {:>5} {:>12} {:>12} {:>12}",
                "label", "key", "J", "I", "A_MHz", "Q_MHz", "Gamma_MHz"
            );
            let mut csv = String::from("label,key,J,I,A_MHz,Q_MHz,Gamma_MHz\n");
            for m in &species.manifolds {
                println!(
                    "{:<12} {:<6} {:>5} {:>5} {:>12} {:>12} {:>12}",
                    m.label,
                    m.key,
                    m.j.to_string(),
                    m.i.to_string(),
                    to_mhz(m.a_hf),
                    to_mhz(m.q_hf),
                    to_mhz(m.gamma)
                );
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    m.label,
                    m.key,
                    m.j,
                    m.i,
                    to_mhz(m.a_hf),
                    to_mhz(m.q_hf),
                    to_mhz(m.gamma)
                ));
            }
            std::fs::create_dir_all(&common.out)
                .map_err(|e| format!("{}: {e}", common.out.display()))?;
            let csv_path = common.out.join("species.csv");
            std::fs::write(&csv_path, csv).map_err(|e| format!("{}: {e}", csv_path.display()))?;
            let meta_path = common.out.join("species.meta.json");
            let meta = serde_json::json!({
                "scenario": "species",
                "species": species.id,
                "code_version": env!("CARGO_PKG_VERSION"),
                "config": cfg,
            });
            std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).unwrap())
                .map_err(|e| format!("{}: {e}", meta_path.display()))?;
            Ok(())
        }
        Command::LeakageSweep {
            common,
            grid,
            probe_rabi_mhz,
            photons,
            no_triplet_scattering,
        } => {
            let mut cfg = base_config(&common, Scenario::LeakageSweep, "Sr87")?;
            apply_grid(&mut cfg, &grid, "detuning_mhz", true);
            if let Some(r) = probe_rabi_mhz {
                cfg.lasers.probe_rabi_mhz = r;
            }
            if !photons.is_empty() {
                cfg.photons = photons;
            }
            if no_triplet_scattering {
                cfg.lasers.include_triplet_scattering = false;
            }
            run_and_emit(&cfg, &common)
        }
        Command::DressingSpectrum {
            common,
            grid,
            rabi_ab_mhz,
        } => {
            let mut cfg = base_config(&common, Scenario::DressingSpectrum, "Sr87")?;
            apply_grid(&mut cfg, &grid, "rabi_ab_mhz", true);
            if let Some(r) = rabi_ab_mhz {
                cfg.lasers.dressing_rabi_mhz = r;
            }
            run_and_emit(&cfg, &common)
        }
        Command::TwoLevel {
            common,
            grid,
            gamma_mhz,
            delta_over_gamma,
        } => {
            let mut cfg = base_config(&common, Scenario::TwoLevelCoherence, "Sr87")?;
            apply_grid(&mut cfg, &grid, "delta_over_gamma", false);
            if let Some(g) = gamma_mhz {
                cfg.two_level.gamma_mhz = g;
            }
            if delta_over_gamma.is_some() {
                cfg.two_level.delta_over_gamma = delta_over_gamma;
            }
            run_and_emit(&cfg, &common)
        }
        Command::CancelQuadrupole {
            common,
            rabi_ab_mhz,
            quad_detuning_mhz,
        } => {
            let mut cfg = base_config(&common, Scenario::QuadrupoleCancellation, "Sr87")?;
            if let Some(r) = rabi_ab_mhz {
                cfg.lasers.dressing_rabi_mhz = r;
            }
            if let Some(d) = quad_detuning_mhz {
                cfg.lasers.quad_detuning_mhz = d;
            }
            run_and_emit(&cfg, &common)
        }
        Command::QuenchDecay { common } => {
            let cfg = base_config(&common, Scenario::QuenchDecay, "Sr87")?;
            run_and_emit(&cfg, &common)
        }
        Command::CoolingCycle {
            common,
            n0,
            eta,
            cycles,
        } => {
            let mut cfg = base_config(&common, Scenario::CoolingCycle, "Sr87")?;
            if let Some(n0) = n0 {
                cfg.cooling.n0 = n0;
            }
            if let Some(eta) = eta {
                cfg.cooling.eta = eta;
            }
            if let Some(cycles) = cycles {
                cfg.cooling.cycles = cycles;
            }
            run_and_emit(&cfg, &common)
        }
        Command::Yb { common, grid } => {
            let mut cfg = base_config(&common, Scenario::YbVariants, "Yb171")?;
            apply_grid(&mut cfg, &grid, "rabi_ab_mhz", true);
            run_and_emit(&cfg, &common)
        }
    }
}
