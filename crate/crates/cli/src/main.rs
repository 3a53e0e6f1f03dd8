use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fsorelay_cli::{build_spec, parse_settings, run_experiment, write_csv, write_csv_atomic, ConfigError, Setting};

/// Outage and DBPSK BER sweeps for multi-user hybrid FSO/RF relay links.
///
/// Settings are taken from the preset, then the config file, then flags.
/// Exit status: 0 on success, 1 for configuration errors, 2 when any
/// requested method failed at some point (see the `error` column).
#[derive(Debug, Parser)]
#[command(name = "fsorelay", version)]
struct Cli {
    /// fig1, fig2, fig3 or custom.
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// outage or ber.
    #[arg(long)]
    metric: Option<String>,
    /// known-csi (adaptive gain), unknown-csi (fixed gain) or both.
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated user counts N.
    #[arg(long)]
    users: Option<String>,
    /// Comma-separated relay counts M.
    #[arg(long)]
    relays: Option<String>,
    #[arg(long)]
    xi: Option<String>,
    /// Comma-separated turbulence rates λ.
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated turbulence variances 1/λ² (alternative to --lambda).
    #[arg(long)]
    variance: Option<String>,
    #[arg(long = "gamma-th-db")]
    gamma_th_db: Option<String>,
    /// start:step:stop in dB, or a single value.
    #[arg(long = "gamma-avg-db")]
    gamma_avg_db: Option<String>,
    /// Comma-separated subset of closed-form, quadrature, monte-carlo.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<String>,
    /// min-snr or cascade-xor.
    #[arg(long = "ber-model")]
    ber_model: Option<String>,
    /// snr or signal.
    #[arg(long)]
    level: Option<String>,
    /// Adaptive-gain first segment in simulation: exact or min.
    #[arg(long)]
    combiner: Option<String>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> Vec<Setting> {
        let pairs = [
            ("preset", &self.preset),
            ("metric", &self.metric),
            ("mode", &self.mode),
            ("users", &self.users),
            ("relays", &self.relays),
            ("xi", &self.xi),
            ("lambda", &self.lambda),
            ("variance", &self.variance),
            ("gamma_th_db", &self.gamma_th_db),
            ("gamma_avg_db", &self.gamma_avg_db),
            ("methods", &self.methods),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("ber_model", &self.ber_model),
            ("level", &self.level),
            ("combiner", &self.combiner),
        ];
        let mut out: Vec<Setting> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| Setting::flag(k, v.clone())))
            .collect();
        if let Some(p) = &self.out {
            out.push(Setting::flag("out", p.display().to_string()));
        }
        out
    }
}

fn load(cli: &Cli) -> Result<fsorelay_cli::ExperimentSpec, ConfigError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            parse_settings(&text)?
        }
        None => Vec::new(),
    };
    build_spec(&file, &cli.overrides())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let spec = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match run_experiment(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &spec.out {
        Some(path) => write_csv_atomic(&rows, path).map(|_| eprintln!("wrote {} rows to {}", rows.len(), path.display())),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock).and_then(|_| {
                lock.flush().map_err(|source| fsorelay_cli::RunError::Io {
                    path: "<stdout>".into(),
                    source,
                })
            })
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows have method errors", rows.len());
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
