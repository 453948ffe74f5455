//! `stlink`: run link and delay-estimation experiments from TOML files.
//!
//! Exit status is 0 on success, 1 for configuration problems (bad flags,
//! unreadable or invalid config) and 2 for failures while running
//! (I/O, identifiability, numerical breakdown).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stlink::output::{
    psd_samples, tde_rows, tde_summary_rows, to_csv_bytes, write_atomic, CsvRecord,
};
use stlink::sim::{
    ber_sweep_with, constellation_capture, tde_sweep, tde_trial, ExperimentConfig, TrialSeed,
};
use stlink::Error;

#[derive(Debug, Parser)]
#[command(
    name = "stlink",
    version,
    about = "Coded space-time link simulation and multipath delay estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV. Without it, CSV goes to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replaces `sweep.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Only errors on standard error; no tables or progress.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER versus Eb/N0 for the configured link.
    BerSweep,
    /// One delay estimate at the first configured SNR.
    TdeRun,
    /// Delay-error statistics over the configured SNR list.
    TdeSweep,
    /// Post-combining scatter for the configured link.
    Constellation,
    /// Samples of the configured Doppler power spectral density.
    PsdDump,
    /// Parse and check a config without running it.
    ValidateConfig {
        /// Echo the config with defaults filled in and names canonicalized.
        #[arg(long)]
        print_normalized: bool,
    },
}

struct Ctx {
    cfg: ExperimentConfig,
    out: Option<PathBuf>,
    seed: u64,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn progress(&self, line: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", line.as_ref());
        }
    }

    /// Writes the CSV to `--out`, or to standard output when no path was
    /// given.
    fn emit<R: CsvRecord>(&self, records: &[R]) -> Result<(), Error> {
        let bytes = to_csv_bytes(records)?;
        match &self.out {
            Some(p) => write_atomic(p, &bytes),
            None => {
                std::io::stdout().write_all(&bytes)?;
                Ok(())
            }
        }
    }

    /// Tables go to standard output only when the CSV does not.
    fn table(&self, line: impl AsRef<str>) {
        if self.out.is_some() {
            self.say(line);
        }
    }
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, Error> {
    let path = path.ok_or_else(|| Error::InvalidConfig {
        field: "--config".into(),
        reason: "a config file is required".into(),
    })?;
    ExperimentConfig::from_path(path)
}

fn ber_sweep_cmd(ctx: &Ctx) -> Result<(), Error> {
    let link = ctx.cfg.link_config()?;
    let stop = ctx.cfg.stop_rule()?;
    ctx.cfg.validate()?;
    let list = &ctx.cfg.sweep.ebn0_db;
    let mut done = 0;
    let points = ber_sweep_with(&link, list, &stop, ctx.seed, |p| {
        done += 1;
        ctx.progress(format!(
            "[{done}/{}] Eb/N0 {} dB: {} errors in {} bits",
            list.len(),
            p.ebn0_db,
            p.errors,
            p.bits
        ));
    })?;
    ctx.emit(&points)?;
    ctx.table(format!(
        "{:>9} {:>12} {:>9} {:>12} {:>10}",
        "Eb/N0", "bits", "errors", "BER", "censored"
    ));
    for p in &points {
        ctx.table(format!(
            "{:>9.2} {:>12} {:>9} {:>12.4e} {:>10}",
            p.ebn0_db, p.bits, p.errors, p.ber, p.censored
        ));
    }
    Ok(())
}

fn tde_run_cmd(ctx: &Ctx) -> Result<(), Error> {
    let exp = ctx.cfg.tde_experiment()?;
    let snr = exp.snr_db[0];
    let trial = tde_trial(&exp, snr, TrialSeed::new(ctx.seed, 0, 0))?;
    let ts = exp.scenario.sample_interval;
    let est = trial
        .outcome
        .as_ref()
        .map_err(|m| Error::Identifiability(m.clone()))?;
    ctx.emit(&tde_rows(&stlink::sim::TdeSweep {
        summaries: Vec::new(),
        trials: vec![trial.clone()],
    }))?;
    ctx.table(format!("SNR {snr} dB, residual E_r = {:e}", est.residual));
    ctx.table(format!(
        "{:>5} {:>14} {:>14} {:>12} {:>22}",
        "path", "tau_true [s]", "tau_hat [s]", "err [T_s]", "amplitude"
    ));
    for (k, (&t, &h)) in trial.tau_true.iter().zip(&est.delays).enumerate() {
        let a = est.amplitudes[k];
        ctx.table(format!(
            "{k:>5} {t:>14.6e} {h:>14.6e} {:>12.6} {:>10.6}{:+.6}j",
            (h - t) / ts,
            a.re,
            a.im
        ));
    }
    Ok(())
}

fn tde_sweep_cmd(ctx: &Ctx) -> Result<(), Error> {
    let exp = ctx.cfg.tde_experiment()?;
    let sweep = tde_sweep(&exp, ctx.seed)?;
    ctx.emit(&tde_rows(&sweep))?;
    let ts = exp.scenario.sample_interval;
    ctx.table(format!(
        "{:>8} {:>5} {:>9} {:>14} {:>16}",
        "SNR", "path", "failures", "RMSE [T_s]", "median [T_s]"
    ));
    for r in tde_summary_rows(&sweep.summaries) {
        ctx.table(format!(
            "{:>8} {:>5} {:>9} {:>14.6} {:>16.6}",
            r.snr_db,
            r.path,
            r.failures,
            r.rmse / ts,
            r.median_abs_error / ts
        ));
    }
    Ok(())
}

fn constellation_cmd(ctx: &Ctx) -> Result<(), Error> {
    let link = ctx.cfg.link_config()?;
    let cap = &ctx.cfg.capture;
    let recs = constellation_capture(
        &link,
        cap.ebn0_db,
        cap.symbols,
        TrialSeed::new(ctx.seed, 0, 0),
    )?;
    ctx.emit(&recs)?;
    let c = stlink::Constellation64::new(link.order)?;
    let wrong = recs
        .iter()
        .filter(|r| c.nearest_label(stlink::C64::new(r.rx_re, r.rx_im)) != r.tx_label)
        .count();
    ctx.table(format!(
        "{} symbols at Eb/N0 {} dB, {} outside their decision region",
        recs.len(),
        cap.ebn0_db,
        wrong
    ));
    Ok(())
}

fn psd_cmd(ctx: &Ctx) -> Result<(), Error> {
    let p = ctx.cfg.doppler()?;
    let (lo, hi, n) = ctx.cfg.psd_range()?;
    let samples = psd_samples(&p, lo, hi, n);
    ctx.emit(&samples)?;
    ctx.table(format!("{n} PSD samples over [{lo}, {hi}] Hz"));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidConfig {
                field: "--threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let cfg = load(cli.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.seed.unwrap_or(cfg.sweep.seed),
        cfg,
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::BerSweep => ber_sweep_cmd(&ctx),
        Command::TdeRun => tde_run_cmd(&ctx),
        Command::TdeSweep => tde_sweep_cmd(&ctx),
        Command::Constellation => constellation_cmd(&ctx),
        Command::PsdDump => psd_cmd(&ctx),
        Command::ValidateConfig { print_normalized } => {
            let norm = ctx.cfg.normalized()?;
            if print_normalized {
                print!("{}", norm.to_toml_string()?);
            } else {
                ctx.progress("config OK");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
