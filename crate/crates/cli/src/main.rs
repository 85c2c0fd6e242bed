use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hebundle_cli::{load_config, run, CliError, ConfigFile};

/// Reproducible runs of the continued-fraction, stability, torus and Coulomb checks.
///
/// Exit status: 0 when every verdict passes, 2 on a numerical failure, 1 on a usage error.
#[derive(Parser, Debug)]
#[command(name = "hebundle", version, allow_negative_numbers = true)]
struct Args {
    /// lagrange | convergents | farey | stability | sequence | torus-he | chern-weil | donaldson | coulomb | density
    subcommand: String,
    /// `key = value` file with optional `[subcommand]` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Journal (JSON lines) to append the record to.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV dump of the final grid field.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// rational:p/q | periodic:a0,pre…|per… | decimal:x@depth | surd:a,b,D,c
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    parity: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    genus: Option<String>,
    #[arg(long)]
    rank: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    /// `re,im` or `a+bi`
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    digit: Option<String>,
    #[arg(long = "burn-in")]
    burn_in: Option<String>,
    #[arg(long)]
    count: Option<String>,
    #[arg(long)]
    qmax: Option<String>,
    /// a/b,c/d,e/f
    #[arg(long)]
    triangle: Option<String>,
    /// deg,rk of S
    #[arg(long, allow_hyphen_values = true)]
    sub: Option<String>,
    /// deg,rk of S₀
    #[arg(long, allow_hyphen_values = true)]
    sub0: Option<String>,
    /// fd4 | spectral
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    floor: Option<String>,
    #[arg(long)]
    modes: Option<String>,
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    step: Option<String>,
    /// Preconditioner shift c, or `none`.
    #[arg(long)]
    precond: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    gauge: Option<String>,
}

impl Args {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("theta", &self.theta),
            ("parity", &self.parity),
            ("depth", &self.depth),
            ("L", &self.l),
            ("genus", &self.genus),
            ("rank", &self.rank),
            ("degree", &self.degree),
            ("N", &self.n),
            ("tau", &self.tau),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("digit", &self.digit),
            ("burn_in", &self.burn_in),
            ("count", &self.count),
            ("qmax", &self.qmax),
            ("triangle", &self.triangle),
            ("sub", &self.sub),
            ("sub0", &self.sub0),
            ("scheme", &self.scheme),
            ("floor", &self.floor),
            ("modes", &self.modes),
            ("bound", &self.bound),
            ("step", &self.step),
            ("precond", &self.precond),
            ("max_iter", &self.max_iter),
            ("eps", &self.eps),
            ("gauge", &self.gauge),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }
}

fn go(args: &Args) -> Result<i32, CliError> {
    let file = args.config.as_deref().map(ConfigFile::read).transpose()?;
    let mut cfg = load_config(&args.subcommand, file.as_ref(), &args.flags())?;
    cfg.out = args.out.clone();
    cfg.csv = args.csv.clone();
    let rec = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&rec).expect("record serializes"));
    Ok(rec.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match go(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
