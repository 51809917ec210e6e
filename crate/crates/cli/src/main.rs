use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use quasix_cli::{run, CliError, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "quasix", version, about = "Excitation experiments on gapped spin chains")]
struct Args {
    command: Command,

    /// TOML config file, or a metadata .json from an earlier run; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// e.g. g=2.0
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    momentum_index: Option<usize>,
    /// comma-separated momenta: pi, 0.4pi, -pi/3, 1.2
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    p: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<usize>,
    /// sz, sz0*sx1, random2, ...
    #[arg(long)]
    op: Option<String>,
    #[arg(long)]
    op_b: Option<String>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ells: Option<Vec<usize>>,
    #[arg(long)]
    pgrid: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    delta_e: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    omega_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    dist: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    lowest: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl Args {
    fn flags(&self) -> RunConfig {
        RunConfig {
            command: Some(self.command),
            model: self.model.clone(),
            params: self.params.clone(),
            sites: self.sites,
            momentum_index: self.momentum_index,
            p: self.p.clone(),
            alpha: self.alpha,
            op: self.op.clone(),
            op_b: self.op_b.clone(),
            lmax: self.lmax,
            ells: self.ells.clone(),
            pgrid: self.pgrid,
            levels: self.levels,
            mu: self.mu,
            c: self.c,
            delta_e: self.delta_e,
            eps: self.eps,
            omega_points: self.omega_points,
            dist: self.dist.clone(),
            times: self.times.clone(),
            lowest: self.lowest,
            seed: self.seed,
            out: self.out.clone(),
            meta: self.meta.clone(),
        }
    }
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let base = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = args.flags();
    if base.command.is_some_and(|c| c != args.command) {
        return Err(CliError::Config(format!("config file is for `{}`, command line asks for `{}`", base.command.unwrap(), args.command)));
    }
    let cfg = base.merged(&flags);
    let out = run(&cfg)?;
    if cfg.out.is_none() {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(out.csv[0].1.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quasix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
