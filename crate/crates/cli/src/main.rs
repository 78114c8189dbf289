mod scenario;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xtalk_core::export::{write_map_csv, write_map_json, write_map_svg, SvgOptions};
use xtalk_core::matrices::{assemble_k_ap_ue, assemble_k_enb_ap};
use xtalk_core::montecarlo::crop_guards;
use xtalk_core::verify::{run_checks, Fault, VerifyOptions};
use xtalk_core::{resolve_ap_layout, resolve_ue_layout, run_campaign, Direction, OfdmNumerology};

use scenario::ScenarioFile;

#[derive(Parser)]
#[command(
    name = "xtalk",
    version,
    about = "Crosstalk maps between LAA and Wi-Fi OFDM links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo campaign and export the interference map.
    Run {
        /// Scenario file, a manifest.json from an earlier run, or a built-in name (fig4a, fig4b).
        #[arg(long, default_value = "fig4a")]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Verify {
        #[arg(long)]
        fast: bool,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Print the resolved timing layout for one offset.
    Inspect {
        /// Offset in seconds (tau1 for ap-ue, tau for enb-ap).
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long)]
        direction: Direction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CutPoint,
    DftScale,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn core_failure(e: xtalk_core::Error) -> Failure {
    use xtalk_core::Error::*;
    match e {
        Config(_) | Domain(_) | InvalidModel(_) => usage(e),
        _ => runtime(e),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    seed: u64,
    config_sha256: String,
    outputs: Vec<String>,
    /// The scenario exactly as run, in scenario file syntax.
    config: String,
}

fn load_scenario(arg: &str) -> Result<ScenarioFile, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        return scenario::builtin(arg).ok_or_else(|| {
            usage(anyhow::anyhow!(
                "scenario '{arg}' is neither a file nor a built-in ({})",
                scenario::BUILTIN.join(", ")
            ))
        });
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let text = if path.extension().is_some_and(|e| e == "json") {
        let m: Manifest = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a run manifest", path.display()))
            .map_err(usage)?;
        m.config
    } else {
        text
    };
    ScenarioFile::parse(&text).map_err(|e| usage(anyhow::anyhow!("{}: {e}", path.display())))
}

fn cmd_run(
    scenario: &str,
    out: &Path,
    seed: Option<u64>,
    draws: Option<usize>,
) -> Result<(), Failure> {
    let mut sc = load_scenario(scenario)?;
    if let Some(s) = seed {
        sc.campaign.seed = s;
    }
    if let Some(n) = draws {
        sc.campaign.n_draws = n;
    }
    let (laa, wifi) = sc.numerologies().map_err(core_failure)?;
    let cfg = sc.campaign_config(&laa, &wifi);
    cfg.validate(&laa, &wifi).map_err(core_failure)?;
    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(usage)?;

    let map = run_campaign(&cfg, &laa, &wifi).map_err(core_failure)?;
    let map = if sc.scenario.crop_guards {
        crop_guards(&map, &laa.guard_mask, &wifi.guard_mask).map_err(core_failure)?
    } else {
        map
    };

    let name = &sc.scenario.name;
    let mut outputs = Vec::new();
    let mut create = |file: String| -> Result<BufWriter<fs::File>, Failure> {
        let path = out.join(&file);
        outputs.push(file);
        fs::File::create(&path)
            .map(BufWriter::new)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(runtime)
    };
    write_map_csv(&map, create(format!("{name}.csv"))?).map_err(core_failure)?;
    if sc.scenario.svg {
        let opts = SvgOptions {
            floor_db: sc.scenario.svg_floor_db,
            ..SvgOptions::default()
        };
        write_map_svg(&map, opts, create(format!("{name}.svg"))?).map_err(core_failure)?;
    }
    if sc.scenario.json {
        write_map_json(&map, create(format!("{name}.json"))?).map_err(core_failure)?;
    }

    let config = sc.to_text();
    let manifest = Manifest {
        tool: "xtalk".into(),
        version: xtalk_core::VERSION.into(),
        seed: sc.campaign.seed,
        config_sha256: hex::encode(Sha256::digest(config.as_bytes())),
        outputs,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
    fs::write(out.join("manifest.json"), text + "\n").map_err(runtime)?;
    println!(
        "{} draws of {} written to {}",
        cfg.n_draws,
        cfg.direction,
        out.display()
    );
    Ok(())
}

fn cmd_verify(fast: bool, fault: Option<FaultArg>) -> Result<(), Failure> {
    let fault = fault.map(|f| match f {
        FaultArg::CutPoint => Fault::CutPointOffByOne,
        FaultArg::DftScale => Fault::DftScale(1.01),
    });
    let results = run_checks(VerifyOptions { fast, fault });
    for r in &results {
        println!(
            "{:<24} {} {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(runtime(anyhow::anyhow!(
            "{failed} of {} checks failed",
            results.len()
        )))
    }
}

fn cmd_inspect(tau: f64, direction: Direction) -> Result<(), Failure> {
    let laa = OfdmNumerology::laa_default();
    let wifi = OfdmNumerology::wifi_default();
    let k = match direction {
        Direction::ApToUe => {
            let layout = resolve_ue_layout(&laa, &wifi, tau).map_err(core_failure)?;
            print!("{layout}");
            assemble_k_ap_ue(&layout, &wifi, &laa).map_err(core_failure)?
        }
        Direction::EnbToAp => {
            let layout = resolve_ap_layout(&laa, &wifi, tau).map_err(core_failure)?;
            print!("{layout}");
            if let Some(last) = layout.split_index() {
                println!(
                    "split at sample {} (last sample of symbol -1: {last})",
                    last + 1
                );
            }
            assemble_k_enb_ap(&layout, &laa, &wifi).map_err(core_failure)?
        }
    };
    let victim_fft = match direction {
        Direction::ApToUe => laa.n_fft,
        Direction::EnbToAp => wifi.n_fft,
    };
    let offsets: Vec<String> = k
        .block_map
        .iter()
        .map(|g| format!("{:+}", g.offset))
        .collect();
    println!(
        "K {}x{} column groups [{}]",
        k.rows(),
        k.cols(),
        offsets.join(" ")
    );
    println!("H {}x{}", victim_fft, k.cols());
    Ok(())
}

fn threads_from_env() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("XTALK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(anyhow::anyhow!(
            "XTALK_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(runtime)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|()| match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            draws,
        } => cmd_run(&scenario, &out, seed, draws),
        Command::Verify { fast, inject_fault } => cmd_verify(fast, inject_fault),
        Command::Inspect { tau, direction } => cmd_inspect(tau, direction),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
