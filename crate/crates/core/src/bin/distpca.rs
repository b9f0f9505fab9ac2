use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use distpca::cluster::serve_forever;
use distpca::datagen::io::save_dataset;
use distpca::datagen::{
    make_covariance, make_pcr_instance, make_sim_instance, sample_gaussian, sample_skewed, CovarianceSpec, Dataset,
    Link,
};
use distpca::experiment::{self, to_csv, ConfigError, ExperimentError, ExperimentSpec, TransportChoice, PRESETS};

#[derive(Parser)]
#[command(name = "distpca", version, about = "Distributed PCA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset file (plus `.y` / `.truth` sidecars)
    Gen(GenArgs),
    /// Run an experiment and write its CSV
    Run(RunArgs),
    /// List the built-in experiment presets
    Presets {
        /// Print the configuration of one preset
        #[arg(long)]
        show: Option<String>,
    },
    /// Serve one worker over TCP until killed
    Worker {
        /// Address to bind, e.g. 127.0.0.1:7000 (port 0 picks a free port)
        #[arg(long)]
        listen: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// `N(0, Σ)` with the stepped spectrum
    Gaussian,
    /// Independent skewed beta coordinates with the stepped spectrum
    Skewed,
    /// Regression instance whose coefficient lies in the top-3 space
    Pcr,
    /// Gaussian single-index model
    Sim,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    kind: GenKind,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 4.0)]
    skewness: f64,
    #[arg(long, default_value_t = 0.2)]
    noise_var: f64,
    #[arg(long, default_value = "square")]
    link: Link,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Memory,
    Tcp,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Start from a built-in preset (see `distpca presets`)
    #[arg(long)]
    preset: Option<String>,
    /// key = value configuration file, applied on top of the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    transport: Option<TransportArg>,
    /// Monte-Carlo repetitions
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` overrides, applied last
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Fill the wall_ms column
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec, ConfigError> {
    let mut spec = match &args.preset {
        Some(name) => experiment::preset(name)?,
        None => ExperimentSpec::default(),
    };
    match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            if spec.apply_text(&text, &path.display().to_string())? == 0 && args.preset.is_none() {
                return Err(ConfigError::Empty);
            }
        }
        None if args.preset.is_none() && args.set.is_empty() => {
            return Err(ConfigError::Invalid("give --preset, --config or --set".into()));
        }
        None => {}
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        spec.set(k.trim(), v)?;
    }
    if let Some(mc) = args.mc {
        spec.monte_carlo = mc;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(t) = args.transport {
        spec.transport = match t {
            TransportArg::Memory => TransportChoice::Memory,
            TransportArg::Tcp => TransportChoice::Tcp,
        };
    }
    if let Some(out) = &args.out {
        spec.out = Some(out.clone());
    }
    if args.timing {
        spec.record_timing = true;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let spec = build_spec(args)?;
    info!(
        "running {} with {} cells x {} repetitions",
        spec.kind,
        spec.cells().len(),
        spec.monte_carlo
    );
    let records = experiment::run_and_write(&spec)?;
    for r in records.iter().filter(|r| r.rep.is_none()) {
        info!(
            "K={} delta={} L={} T={} T'={} {} {}: {:.4e}",
            r.k,
            r.delta,
            r.l,
            r.t,
            r.t_inner,
            r.method.name(),
            r.metric.name(),
            r.error
        );
    }
    if spec.out.is_none() {
        std::io::stdout()
            .write_all(to_csv(&records).as_bytes())
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn generate(args: &GenArgs) -> Result<Dataset, String> {
    let cov_spec = CovarianceSpec::new(args.d, args.delta, args.seed);
    let data_seed = args.seed.wrapping_add(1);
    let ds = match args.kind {
        GenKind::Gaussian => {
            let cov = make_covariance(&cov_spec).map_err(|e| e.to_string())?;
            let mut ds = sample_gaussian(args.n, &cov.sigma, data_seed).map_err(|e| e.to_string())?;
            ds.truth = Some(cov.truth());
            ds
        }
        GenKind::Skewed => sample_skewed(args.n, &cov_spec.eigenvalues(), args.skewness, data_seed)
            .map_err(|e| e.to_string())?,
        GenKind::Pcr => {
            let cov = make_covariance(&cov_spec).map_err(|e| e.to_string())?;
            make_pcr_instance(&cov, 3, args.n, args.noise_var, args.seed, data_seed).map_err(|e| e.to_string())?
        }
        GenKind::Sim => make_sim_instance(args.d, args.n, args.link, args.noise_var, args.seed, data_seed)
            .map_err(|e| e.to_string())?,
    };
    Ok(ds)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(&args),
        Command::Gen(args) => generate(&args)
            .map_err(Failure::Config)
            .and_then(|ds| save_dataset(&args.out, &ds).map_err(|e| Failure::Runtime(e.to_string())))
            .map(|()| info!("wrote {}", args.out.display())),
        Command::Presets { show } => match show {
            Some(name) => match PRESETS.iter().find(|p| p.name == name) {
                Some(p) => {
                    print!("{}", p.text);
                    Ok(())
                }
                None => Err(Failure::Config(ConfigError::UnknownPreset(name).to_string())),
            },
            None => {
                for p in PRESETS {
                    println!("{:<12} {}", p.name, p.description);
                }
                Ok(())
            }
        },
        Command::Worker { listen } => TcpListener::bind(&listen)
            .map_err(|e| Failure::Runtime(format!("cannot bind {listen}: {e}")))
            .and_then(|l| {
                let addr = l.local_addr().map_err(|e| Failure::Runtime(e.to_string()))?;
                println!("{addr}");
                let _ = std::io::stdout().flush();
                serve_forever(l).map_err(|e| Failure::Runtime(e.to_string()))
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
