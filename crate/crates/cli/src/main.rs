use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ore_learn::harness::{self, ExperimentConfig, OutputFormat};
use ore_learn::Error;

#[derive(Parser)]
#[command(
    name = "ore-learn",
    version,
    about = "Seeded ORE, learning and tracing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Keep per-trial game transcripts, with parameters and ciphertexts.
    #[arg(long, global = true)]
    transcripts: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Decryption, weak or strong comparison correctness.
    Correctness(Overrides),
    /// The comparator learner over the example distribution families.
    Pac(Overrides),
    /// Tracing completeness or soundness.
    Trace(Overrides),
    /// Security games and the learner-based adversary.
    Games(Overrides),
    /// Hybrid schedules between challenge sequences.
    Hybrid(Overrides),
    /// The statistical-query learner.
    Sq(Overrides),
    /// Signature concepts: learning, tracing and forgery.
    Validsig(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    lambda: Option<u32>,
    #[arg(long)]
    ell: Option<u16>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// opf | escrow | signature
    #[arg(long)]
    scheme: Option<String>,
    /// uniform | malformed | wrongparams | pointmass
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long)]
    dropped: Option<usize>,
    /// Cap on per-bucket samples while tracing.
    #[arg(long)]
    k_cap: Option<u64>,
    /// Estimate every bucket even after an accusation.
    #[arg(long)]
    eager: bool,
    #[arg(long)]
    error_samples: Option<usize>,
    /// oracle | tiny
    #[arg(long)]
    keyspace: Option<String>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    domain: Option<u64>,
    #[arg(long)]
    synthetic_p: Option<f64>,
    #[arg(long)]
    synthetic_q: Option<f64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Overrides) {
        match self {
            Command::Correctness(o) => ("correctness", o),
            Command::Pac(o) => ("pac", o),
            Command::Trace(o) => ("trace", o),
            Command::Games(o) => ("games", o),
            Command::Hybrid(o) => ("hybrid", o),
            Command::Sq(o) => ("sq", o),
            Command::Validsig(o) => ("validsig", o),
        }
    }
}

fn scheme_value(name: &str) -> Value {
    match name {
        "opf" => json!("opf"),
        "escrow" | "signature" => json!({ "strengthened": name }),
        other => json!(other),
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let (experiment, o) = cli.command.parts();
    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => {
                    return Err(Error::Config {
                        path: ".".into(),
                        message: "config must be a JSON object".into(),
                    })
                }
                Err(e) => {
                    return Err(Error::Config {
                        path: ".".into(),
                        message: e.to_string(),
                    })
                }
            }
        }
        None => Map::new(),
    };
    if let Some(v) = map.get("experiment") {
        if v != experiment {
            return Err(Error::Config {
                path: "experiment".into(),
                message: format!("config is for {v}, subcommand is {experiment}"),
            });
        }
    }
    map.insert("experiment".into(), json!(experiment));
    let mut set = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            map.insert(k.into(), v);
        }
    };
    set("seed", cli.seed.map(|v| json!(v)));
    set("transcripts", cli.transcripts.then_some(json!(true)));
    set("mode", o.mode.as_ref().map(|v| json!(v)));
    set("lambda", o.lambda.map(|v| json!(v)));
    set("ell", o.ell.map(|v| json!(v)));
    set("n", o.n.map(|v| json!(v)));
    set("alpha", o.alpha.map(|v| json!(v)));
    set("beta", o.beta.map(|v| json!(v)));
    set("gamma", o.gamma.map(|v| json!(v)));
    set("xi", o.xi.map(|v| json!(v)));
    set("epsilon", o.epsilon.map(|v| json!(v)));
    set("trials", o.trials.map(|v| json!(v)));
    set("scheme", o.scheme.as_deref().map(scheme_value));
    set("distribution", o.distribution.as_ref().map(|v| json!(v)));
    set("dropped", o.dropped.map(|v| json!(v)));
    set("k_cap", o.k_cap.map(|v| json!(v)));
    set("lazy", o.eager.then_some(json!(false)));
    set("error_samples", o.error_samples.map(|v| json!(v)));
    set("keyspace", o.keyspace.as_ref().map(|v| json!(v)));
    set("q", o.q.map(|v| json!(v)));
    set("domain", o.domain.map(|v| json!(v)));
    set("synthetic_p", o.synthetic_p.map(|v| json!(v)));
    set("synthetic_q", o.synthetic_q.map(|v| json!(v)));
    ExperimentConfig::from_json(&Value::Object(map).to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match harness::run(&cfg) {
        Ok(r) => r,
        Err(e @ (Error::Config { .. } | Error::Usage(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let format = match cli.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
        Format::Both => OutputFormat::Both,
    };
    let written = match report.write(&cli.out, format) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let verdict = match report.gate {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "n/a",
    };
    println!(
        "{} {} config={} {:.1}s {}: {}",
        report.experiment,
        report.mode,
        &report.config_hash[..12],
        report.wall_clock_secs,
        verdict,
        report.gate_detail
    );
    for p in written {
        println!("  wrote {}", p.display());
    }
    if report.gate == Some(false) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}
