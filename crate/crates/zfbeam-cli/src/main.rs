//! Command-line front end: config parsing, subcommands, CSV emission.
//! All numerics live in the library; this is formatting and wiring.

mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use zfbeam::asymptotics::{self, EtaDistribution};
use zfbeam::montecarlo;
use zfbeam::scheme;

const USAGE: &str = "zfbeam — multi-antenna broadcast channel simulator

USAGE:
    zfbeam <SUBCOMMAND> [ARGS] [FLAGS]

SUBCOMMANDS:
    simulate <config|preset>      Monte Carlo sweep over (rho, s); writes CSV + manifest
    select <config|preset>        analytic on/off selection table and chosen s*
    asymptotics <distribution>    spatial-efficiency curve and optimal s-bar
    verify <suite>                oracle suites: powers | gap | concentration | projection | limits | unimodal | all

FLAGS:
    --seed <N>        RNG seed (default 1)
    --out <PATH>      output file (default sweep.csv / efficiency.csv)
    --n-blocks <N>    override the number of fading blocks
    --grid <N>        curve points for asymptotics (default 101)
    --raw             print floats at full precision in CSV output
    -h, --help        this text

Bundled presets: fig1_r6, fig1_r12 (L = m = 4, rho from -10 to 30 dB).
Exit codes: 0 ok, 2 usage/config error, 3 numeric failure.";

struct Cli {
    subcommand: String,
    positional: Vec<String>,
    seed: u64,
    out: Option<PathBuf>,
    n_blocks: Option<usize>,
    grid: usize,
    raw: bool,
}

fn parse_args(args: &[String]) -> Result<Cli, String> {
    let mut cli = Cli {
        subcommand: String::new(),
        positional: Vec::new(),
        seed: 1,
        out: None,
        n_blocks: None,
        grid: 101,
        raw: false,
    };
    let mut it = args.iter().peekable();
    let take_value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>,
                      flag: &str|
     -> Result<String, String> {
        it.next()
            .cloned()
            .ok_or_else(|| format!("{flag} needs a value"))
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "-h" | "--help" => return Err(String::new()),
            "--seed" => {
                cli.seed = take_value(&mut it, "--seed")?
                    .parse()
                    .map_err(|e| format!("--seed: {e}"))?
            }
            "--out" => cli.out = Some(PathBuf::from(take_value(&mut it, "--out")?)),
            "--n-blocks" => {
                cli.n_blocks = Some(
                    take_value(&mut it, "--n-blocks")?
                        .parse()
                        .map_err(|e| format!("--n-blocks: {e}"))?,
                )
            }
            "--grid" => {
                cli.grid = take_value(&mut it, "--grid")?
                    .parse()
                    .map_err(|e| format!("--grid: {e}"))?
            }
            "--raw" => cli.raw = true,
            flag if flag.starts_with('-') => return Err(format!("unknown flag '{flag}'")),
            positional => {
                if cli.subcommand.is_empty() {
                    cli.subcommand = positional.to_string();
                } else {
                    cli.positional.push(positional.to_string());
                }
            }
        }
    }
    if cli.subcommand.is_empty() {
        return Err("missing subcommand".into());
    }
    Ok(cli)
}

fn format_float(v: f64, raw: bool) -> String {
    if raw {
        v.to_string()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.5e}")
    }
}

fn cmd_simulate(cli: &Cli) -> Result<(), (u8, String)> {
    let source = cli
        .positional
        .first()
        .ok_or((2u8, "simulate needs a config file or preset name".to_string()))?;
    let run = config::load(source).map_err(|e| (2, e.to_string()))?;
    let sim = run
        .simulation(cli.seed, cli.n_blocks)
        .map_err(|e| (2, e.to_string()))?;
    let records = montecarlo::sweep(&sim).map_err(|e| (3, e.to_string()))?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    std::fs::write(&out, montecarlo::to_csv(&records, cli.raw)).map_err(|e| (3, e.to_string()))?;
    let manifest = config::write_manifest(
        &out,
        "simulate",
        cli.seed,
        &[
            ("config_source".into(), run.source.clone()),
            ("n_blocks_effective".into(), sim.n_blocks.to_string()),
            ("raw".into(), cli.raw.to_string()),
        ],
        run.manifest_lines(),
    )
    .map_err(|e| (3, e.to_string()))?;
    println!(
        "wrote {} records to {} (manifest {})",
        records.len(),
        out.display(),
        manifest.display()
    );
    Ok(())
}

fn cmd_select(cli: &Cli) -> Result<(), (u8, String)> {
    let source = cli
        .positional
        .first()
        .ok_or((2u8, "select needs a config file or preset name".to_string()))?;
    let run = config::load(source).map_err(|e| (2, e.to_string()))?;
    let system = run.system(run.rho_db).map_err(|e| (2, e.to_string()))?;
    let d_per_user: Vec<f64> = system
        .users
        .iter()
        .map(|u| zfbeam::codebook::distortion_estimate(system.antennas, u.rate_bits))
        .collect::<Result<_, _>>()
        .map_err(|e| (3, e.to_string()))?;

    let mut table = String::from("s,i_main_total_bits,on_users\n");
    println!("on/off selection at rho = {} dB:", run.rho_db);
    println!("{:>3}  {:>14}  on-users", "s", "I_main(s) bits");
    for s in 1..=system.max_on_users() {
        let mut rng = zfbeam::derive_rng(cli.seed, 100, s as u64);
        let chosen = scheme::on_users_for_s(&system, &d_per_user, s, &mut rng)
            .map_err(|e| (3, e.to_string()))?;
        let total: f64 = chosen.iter().map(|&(_, im)| im).sum();
        let ids: Vec<String> = chosen.iter().map(|&(i, _)| i.to_string()).collect();
        println!("{s:>3}  {total:>14.4}  [{}]", ids.join(" "));
        table.push_str(&format!("{s},{},{}\n", format_float(total, cli.raw), ids.join(" ")));
    }
    let mut rng = zfbeam::derive_rng(cli.seed, 101, 0);
    let sel = scheme::select(&system, &d_per_user, &mut rng).map_err(|e| (3, e.to_string()))?;
    println!(
        "chosen s* = {}, A_on = {:?}, total I_main = {:.4} bits",
        sel.s_star, sel.on_users, sel.i_main_total
    );
    if sel.i_main_total == 0.0 {
        println!("warning: every user has zero predicted throughput (all gamma = 0?)");
    }
    if let Some(out) = &cli.out {
        std::fs::write(out, table).map_err(|e| (3, e.to_string()))?;
        config::write_manifest(
            out,
            "select",
            cli.seed,
            &[("config_source".into(), run.source.clone())],
            run.manifest_lines(),
        )
        .map_err(|e| (3, e.to_string()))?;
        println!("wrote table to {}", out.display());
    }
    Ok(())
}

fn cmd_asymptotics(cli: &Cli) -> Result<(), (u8, String)> {
    let source = cli
        .positional
        .first()
        .ok_or((2u8, "asymptotics needs a distribution file".to_string()))?;
    let dist = EtaDistribution::from_file(std::path::Path::new(source))
        .map_err(|e| (2, e.to_string()))?;
    if cli.grid < 2 {
        return Err((2, "--grid must be at least 2".into()));
    }

    let mut csv = String::from("sbar,spatial_efficiency_bits_per_antenna\n");
    for k in 0..cli.grid {
        let sbar = k as f64 / (cli.grid - 1) as f64;
        let v = asymptotics::spatial_efficiency(&dist, sbar);
        csv.push_str(&format!("{},{}\n", format_float(sbar, cli.raw), format_float(v, cli.raw)));
    }
    let (s_star, best) = asymptotics::optimal_sbar(&dist, asymptotics::DEFAULT_SBAR_TOL)
        .map_err(|e| (3, e.to_string()))?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("efficiency.csv"));
    std::fs::write(&out, csv).map_err(|e| (3, e.to_string()))?;
    let manifest = config::write_manifest(
        &out,
        "asymptotics",
        cli.seed,
        &[
            ("distribution".into(), source.clone()),
            ("grid".into(), cli.grid.to_string()),
            ("mbar".into(), dist.mbar().to_string()),
            ("atoms".into(), format!("{:?}", dist.atoms())),
        ],
        &[],
    )
    .map_err(|e| (3, e.to_string()))?;
    println!(
        "s-bar* = {s_star:.6}, efficiency {best:.6} bits/antenna; curve in {} (manifest {})",
        out.display(),
        manifest.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(cli) => cli,
        Err(msg) => {
            if msg.is_empty() {
                println!("{USAGE}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {msg}\n\n{USAGE}");
            return ExitCode::from(2);
        }
    };

    let result = match cli.subcommand.as_str() {
        "simulate" => cmd_simulate(&cli),
        "select" => cmd_select(&cli),
        "asymptotics" => cmd_asymptotics(&cli),
        "verify" => verify::run(&cli.positional, cli.seed, cli.n_blocks),
        other => Err((2, format!("unknown subcommand '{other}'"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
