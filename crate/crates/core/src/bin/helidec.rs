use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use helidec::diagnostics::{flux_closure, lipschitz_probe, spectra_and_fluxes};
use helidec::{checkpoint, parse_config, series, verify, Error, SimConfig};

#[derive(Parser)]
#[command(name = "helidec", version, about = "Helically decimated Navier-Stokes solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration; writes series.csv and final.dnsh to out_dir.
    Run { config: PathBuf },
    /// Run the invariant suite and print PASS/FAIL per property.
    Verify { config: PathBuf },
    /// Shell spectra and fluxes of a checkpoint.
    Spectra {
        checkpoint: PathBuf,
        /// Output CSV (default: spectra.csv next to the checkpoint).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sensitivity of the trajectory to initial perturbations of size eps.
    Probe {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
}

fn load_config(path: &Path) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    Ok(parse_config(&text)?)
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })
}

fn cmd_run(path: &Path) -> Result<bool, Error> {
    let cfg = load_config(path)?;
    ensure_dir(&cfg.out_dir)?;
    match helidec::run(&cfg) {
        Ok(tr) => {
            series::write_series(&tr.records, cfg.out_dir.join("series.csv"))?;
            checkpoint::write_checkpoint(&tr.final_state, cfg.nu, cfg.out_dir.join("final.dnsh"))?;
            let last = tr.records.last().expect("at least the initial sample");
            println!("t={} E={:.6e} H={:.6e} samples={}", last.t, last.energy, last.helicity, tr.records.len());
            Ok(true)
        }
        Err(Error::NonFinite { step, time, last_finite }) => {
            let p = cfg.out_dir.join("last_finite.dnsh");
            checkpoint::write_checkpoint(&last_finite, cfg.nu, &p)?;
            Err(Error::NonFinite { step, time, last_finite })
        }
        Err(e) => Err(e),
    }
}

fn cmd_verify(path: &Path) -> Result<bool, Error> {
    let cfg = load_config(path)?;
    let outcomes = verify::run_suite(&cfg)?;
    let mut all = true;
    for o in &outcomes {
        println!("{} {} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        all &= o.passed;
    }
    Ok(all)
}

fn cmd_spectra(path: &Path, output: Option<PathBuf>) -> Result<bool, Error> {
    let ck = checkpoint::read_checkpoint(path)?;
    let spectra = spectra_and_fluxes(&ck.state);
    let out = output.unwrap_or_else(|| path.with_file_name("spectra.csv"));
    series::write_spectra(&spectra, &out)?;
    let (ce, ch) = flux_closure(&spectra);
    println!("flux_closure Pi_E={ce:.3e} Pi_H={ch:.3e} shells={} -> {}", spectra.len(), out.display());
    Ok(true)
}

fn cmd_probe(path: &Path, eps: &[f64]) -> Result<bool, Error> {
    let cfg = load_config(path)?;
    let rows = lipschitz_probe(&cfg, eps)?;
    let mut csv = String::from("eps,sup_ratio,final_ratio\n");
    for r in &rows {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.epsilon, r.sup_ratio, r.final_ratio));
    }
    print!("{csv}");
    ensure_dir(&cfg.out_dir)?;
    let p = cfg.out_dir.join("probe.csv");
    std::fs::write(&p, csv).map_err(|source| Error::Io { path: p, source })?;
    Ok(true)
}

fn init_threads() {
    let n = std::env::var("HELIDEC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Verify { config } => cmd_verify(&config),
        Command::Spectra { checkpoint, output } => cmd_spectra(&checkpoint, output),
        Command::Probe { config, eps } => cmd_probe(&config, &eps),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error kind={}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
