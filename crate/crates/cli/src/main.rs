mod data;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dp_ecdf::power::{builtin_scenarios, run_power_study, write_power_csv};
use dp_ecdf::{
    calibrate_null, run_private_test, Adjacency, Baseline, BaselineKind, Dataset, Error, ExperimentConfig,
    LocationScaleFamily, MetricKind, NoiseKind, NullDistributionTable, PrivacyBudget, Procedure, TestKind,
    TestResult, TestSpec,
};

/// Exit-code classes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Calibration(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Calibration(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Calibration(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            Error::Data(_) | Error::Estimation(_) | Error::Io(_) => Failure::Data(e.to_string()),
            Error::Calibration(_) => Failure::Calibration(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "dp-ecdf", version, about = "Differentially private ecdf-based hypothesis tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a private test on data files.
    Test(TestArgs),
    /// Simulate a null distribution table and write it to a file.
    Calibrate(CalibrateArgs),
    /// Run a power study from a config file.
    Power(PowerArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DesignArg {
    Gof,
    TwoSample,
    Paired,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct SpecArgs {
    /// ks, kuiper, cvm, wasserstein, sign, wilcoxon, mann-whitney, kruskal-wallis or median.
    #[arg(long)]
    method: String,
    /// Fully specified null cdf for gof tests, e.g. normal:0,1.
    #[arg(long, conflicts_with = "family")]
    null: Option<String>,
    /// Location-scale family for gof tests with unknown parameters.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    epsilon: f64,
    /// Defaults to tulap for ks/kuiper and laplace for cvm/wasserstein.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value = "fixed-groups")]
    adjacency: String,
    /// Seed for calibration and privacy noise (default: $DP_ECDF_SEED, else random).
    #[arg(long, env = "DP_ECDF_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(value_enum)]
    design: DesignArg,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    data: PathBuf,
    /// Second sample for two-sample tests.
    #[arg(long)]
    data2: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    /// Reuse a null table written by `calibrate`.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    out: OutFormat,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(value_enum)]
    design: DesignArg,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    n: usize,
    /// Second sample size for two-sample tests.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    mc_samples: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long, required_unless_present = "list_scenarios")]
    config: Option<PathBuf>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the builtin scenarios and exit.
    #[arg(long)]
    list_scenarios: bool,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        use std::collections::hash_map::RandomState;
        use std::hash::BuildHasher;
        let s = RandomState::new().hash_one(std::time::SystemTime::now());
        eprintln!("seed: {s} (pass --seed {s} to replay)");
        s
    })
}

fn build_procedure(design: DesignArg, spec: &SpecArgs) -> Result<Box<dyn Procedure>, Failure> {
    let epsilon = PrivacyBudget::new(spec.epsilon)?;
    let design_name = match design {
        DesignArg::Gof => "gof",
        DesignArg::TwoSample => "two-sample",
        DesignArg::Paired => "paired",
    };
    if design != DesignArg::Gof && (spec.null.is_some() || spec.family.is_some()) {
        return Err(Failure::Usage("--null and --family apply to gof tests only".into()));
    }

    if let Ok(metric) = spec.method.parse::<MetricKind>() {
        let kind = match design {
            DesignArg::Gof => match (&spec.null, &spec.family) {
                (Some(null), None) => TestKind::GofKnown(dp_ecdf::parse_model(null)?),
                (None, Some(fam)) => TestKind::GofFamily(fam.parse::<LocationScaleFamily>()?),
                _ => return Err(Failure::Usage("gof tests need exactly one of --null or --family".into())),
            },
            DesignArg::TwoSample => TestKind::TwoSample(spec.adjacency.parse::<Adjacency>()?),
            DesignArg::Paired => TestKind::Paired,
        };
        let noise = match &spec.noise {
            Some(n) => n.parse::<NoiseKind>()?,
            None => dp_ecdf::power::default_noise(metric),
        };
        return Ok(Box::new(TestSpec::new(kind, metric, epsilon, noise)?));
    }

    let baseline: BaselineKind = spec.method.parse().map_err(|_| {
        Failure::Usage(format!(
            "unknown method '{}' (expected ks, kuiper, cvm, wasserstein, sign, wilcoxon, mann-whitney, kruskal-wallis or median)",
            spec.method
        ))
    })?;
    if baseline.design() != design_name {
        return Err(Failure::Usage(format!(
            "{baseline} is a {} test and cannot run as {design_name}",
            baseline.design()
        )));
    }
    if spec.noise.as_deref().is_some_and(|n| n != baseline.noise().name()) {
        return Err(Failure::Usage(format!("{baseline} always uses {} noise", baseline.noise())));
    }
    Ok(Box::new(Baseline::new(baseline, epsilon, None)?))
}

fn load_data(args: &TestArgs) -> Result<Dataset, Failure> {
    let dataset = match args.design {
        DesignArg::Gof => Dataset::one(data::read_column(&args.data)?),
        DesignArg::TwoSample => {
            let path2 = args
                .data2
                .as_ref()
                .ok_or_else(|| Failure::Usage("two-sample tests need --data2".into()))?;
            Dataset::two(data::read_column(&args.data)?, data::read_column(path2)?)
        }
        DesignArg::Paired => {
            let (x, y) = data::read_pairs(&args.data)?;
            Dataset::paired(x, y)
        }
    };
    Ok(dataset?)
}

#[derive(Serialize)]
struct Record {
    method: String,
    raw_statistic: f64,
    privatized_statistic: f64,
    sensitivity: f64,
    p_value: f64,
    alpha: f64,
    reject: bool,
    epsilon: f64,
    n: usize,
    m: Option<usize>,
    mc_samples: usize,
    seed: u64,
}

impl Record {
    fn new(r: &TestResult, alpha: f64, epsilon: f64, sizes: (usize, Option<usize>)) -> Self {
        Record {
            method: r.method.clone(),
            raw_statistic: r.raw_statistic,
            privatized_statistic: r.privatized_statistic,
            sensitivity: r.sensitivity,
            p_value: r.p_value,
            alpha,
            reject: r.rejects(alpha),
            epsilon,
            n: sizes.0,
            m: sizes.1,
            mc_samples: r.mc_samples,
            seed: r.seed,
        }
    }

    fn write(&self, format: OutFormat, out: &mut impl Write) -> Result<(), Failure> {
        let io = |e: io::Error| Failure::Data(e.to_string());
        match format {
            OutFormat::Json => {
                let text = serde_json::to_string(self).expect("record serializes");
                writeln!(out, "{text}").map_err(io)
            }
            OutFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.serialize(self).map_err(|e| Failure::Data(e.to_string()))?;
                w.flush().map_err(io)
            }
            OutFormat::Text => {
                let m = self.m.map_or("-".to_string(), |m| m.to_string());
                let decision = if self.reject { "reject" } else { "fail to reject" };
                writeln!(
                    out,
                    "method               {}\n\
                     raw statistic        {}\n\
                     private statistic    {}\n\
                     sensitivity          {}\n\
                     p-value              {}\n\
                     decision at {:<8} {}\n\
                     epsilon              {}\n\
                     n, m                 {}, {}\n\
                     mc samples           {}\n\
                     seed                 {}",
                    self.method,
                    self.raw_statistic,
                    self.privatized_statistic,
                    self.sensitivity,
                    self.p_value,
                    self.alpha,
                    decision,
                    self.epsilon,
                    self.n,
                    m,
                    self.mc_samples,
                    self.seed
                )
                .map_err(io)
            }
        }
    }
}

fn composition_warning(epsilon: f64) {
    eprintln!(
        "warning: this release spends epsilon = {epsilon}; repeated tests on the same data add up their budgets"
    );
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let procedure = build_procedure(args.design, &args.spec)?;
    let dataset = load_data(&args)?;
    let (n, m) = dataset.sizes();
    let seed = resolve_seed(args.spec.seed);
    let table = match &args.table {
        Some(path) => NullDistributionTable::read(path).map_err(|e| match e {
            Error::Io(io) => Failure::Data(format!("{}: {io}", path.display())),
            other => other.into(),
        })?,
        None => calibrate_null(procedure.as_ref(), n, m, args.mc_samples, seed)?,
    };
    let result = run_private_test(procedure.as_ref(), &dataset, &table, seed)?;
    composition_warning(args.spec.epsilon);
    Record::new(&result, args.alpha, args.spec.epsilon, (n, m)).write(args.out, &mut io::stdout().lock())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), Failure> {
    let procedure = build_procedure(args.design, &args.spec)?;
    let m = match (args.design, args.m) {
        (DesignArg::TwoSample, None) => return Err(Failure::Usage("two-sample calibration needs --m".into())),
        (DesignArg::TwoSample, m) => m,
        (_, Some(_)) => return Err(Failure::Usage("--m applies to two-sample tests only".into())),
        (_, None) => None,
    };
    let seed = resolve_seed(args.spec.seed);
    let table = calibrate_null(procedure.as_ref(), args.n, m, args.mc_samples, seed)?;
    fs::write(&args.out, table.to_text()).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    eprintln!("wrote {} null values to {}", table.mc_samples(), args.out.display());
    Ok(())
}

fn cmd_power(args: PowerArgs) -> Result<(), Failure> {
    if args.list_scenarios {
        let mut out = io::stdout().lock();
        for s in builtin_scenarios() {
            writeln!(out, "{:<20} {:<11} {:<40} {}", s.name, s.design, s.caption, s.tests.join(","))
                .map_err(|e| Failure::Data(e.to_string()))?;
        }
        return Ok(());
    }
    let path = args.config.expect("clap enforces --config");
    let config = ExperimentConfig::from_file(&path).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
        other => other.into(),
    })?;
    let rows = match args.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(k) => dp_ecdf::power::run_power_study_with_threads(&config, k)?,
        None => run_power_study(&config)?,
    };
    match &args.out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            write_power_csv(&rows, io::BufWriter::new(file))?;
        }
        None => write_power_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Power(a) => cmd_power(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
