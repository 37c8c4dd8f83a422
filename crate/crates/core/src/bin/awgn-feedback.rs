use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use awgn_feedback::exponents::{self, ExponentParams, ExponentReport};
use awgn_feedback::harness::{compare_arms, read_csv, run_trials, sweep_to_files, write_csv, RunConfig, SweepSpec};
use awgn_feedback::Error;

#[derive(Parser)]
#[command(name = "awgn-feedback", version, about = "One-switch feedback coding: simulation and exponent checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// Run the cartesian product of a grid file.
    Sweep(SweepArgs),
    /// Closed-form coefficients plus numeric infima, as CSV.
    Verify(VerifyArgs),
    /// Print the closed-form exponent table for one parameter point.
    Exponents(ExponentArgs),
    /// Compare two result files.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(short = 'M', long = "messages")]
    m: Option<usize>,
    #[arg(short = 'A', long = "power")]
    a: Option<f64>,
    #[arg(long, conflicts_with = "sigma2")]
    sigma: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    tau3: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Posterior decoder samples per decode.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    oracle_points: Option<usize>,
    /// Results CSV.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with "base" (flat config) and "grid" (key -> list of values).
    grid: PathBuf,
    /// Results CSV; the manifest goes next to it with a .json extension.
    #[arg(long, default_value = "sweep.csv")]
    output: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated values; the table covers their cartesian product.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    beta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.15")]
    tau2: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    tau3: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.25,0.5,1")]
    sigma2: Vec<f64>,
    #[arg(short = 'A', long = "power", default_value_t = 1.0)]
    a: f64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExponentArgs {
    #[arg(short = 'A', long = "power", default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 0.15)]
    tau2: f64,
    #[arg(long, default_value_t = 0.05)]
    tau3: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma2: f64,
    /// Block length, enables the finite-length diagnostics.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    /// Row of each file to compare.
    #[arg(long, default_value_t = 0)]
    row: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Exponents(a) => exponents_table(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let mut flat: Map<String, Value> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))? {
                Value::Object(m) => m,
                _ => return Err(Error::Config("config file must hold a JSON object".into())),
            }
        }
        None => Map::new(),
    };
    let mut set = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            if k == "sigma" {
                flat.remove("sigma2");
            } else if k == "sigma2" {
                flat.remove("sigma");
            }
            flat.insert(k.to_string(), v);
        }
    };
    set("scheme", args.scheme.map(Value::from));
    set("n", args.n.map(Value::from));
    set("M", args.m.map(Value::from));
    set("A", args.a.map(Value::from));
    set("sigma", args.sigma.map(Value::from));
    set("sigma2", args.sigma2.map(Value::from));
    set("beta", args.beta.map(Value::from));
    set("tau2", args.tau2.map(Value::from));
    set("tau3", args.tau3.map(Value::from));
    set("trials", args.trials.map(Value::from));
    set("seed", args.seed.map(Value::from));
    set("decoder.samples", args.samples.map(Value::from));
    set("decoder.oracle_points", args.oracle_points.map(Value::from));
    set("output", args.output.map(|p| Value::from(p.display().to_string())));

    let config = RunConfig::from_json_value(Value::Object(flat))?;
    let stats = run_trials(&config)?;
    if let Some(path) = &config.output {
        write_csv(path, std::slice::from_ref(&stats.row))?;
    }
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let spec = SweepSpec::load(&args.grid)?;
    let manifest_path = args.manifest.unwrap_or_else(|| args.output.with_extension("json"));
    let manifest = sweep_to_files(&spec, &args.output, &manifest_path)?;
    eprintln!(
        "{} cells, {} failed; rows in {}, manifest in {}",
        manifest.cells.len(),
        manifest.failures(),
        args.output.display(),
        manifest_path.display()
    );
    Ok(())
}

const VERIFY_COLUMNS: &[&str] = &[
    "beta", "tau2", "tau3", "sigma2", "A", "e_k2", "e_k0", "e_s2", "e_s3", "e_s4", "e_k3", "e_k3_floor", "e_k4",
    "overall", "case_minimum", "overall_per_n", "s2_numeric", "s2_reduced", "s2_closed", "s2_simplified", "s2_gap",
    "s3_numeric", "s3_reduced", "s3_closed", "s3_simplified", "s3_gap", "k4_numeric", "k4_cross_check",
    "k4_equality_forced", "k4_bound", "k4_gap", "k4_reference_minimum", "k4_small_noise_closed_form", "window_tau2",
    "window_tau3", "window_sigma2", "window_beta", "s2_dominates", "s3_dominates", "k4_dominates",
];

fn verify_record(r: &ExponentReport) -> Vec<String> {
    let n = r.numeric.expect("verify fills numeric checks");
    let f = |v: f64| v.to_string();
    let o = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let p = &r.params;
    vec![
        f(p.beta),
        f(p.tau2),
        f(p.tau3),
        f(p.sigma2),
        f(p.a),
        f(r.e_k2),
        f(r.e_k0),
        f(r.e_s2),
        f(r.e_s3),
        f(r.e_s4),
        f(r.e_k3),
        f(r.e_k3_floor),
        f(r.e_k4),
        f(r.overall),
        f(r.case_minimum),
        f(r.overall_per_n),
        f(n.s2.numeric),
        f(n.s2.reduced_numeric),
        o(n.s2.closed_form),
        f(n.s2.simplified),
        o(n.s2.gap()),
        f(n.s3.numeric),
        f(n.s3.reduced_numeric),
        o(n.s3.closed_form),
        f(n.s3.simplified),
        o(n.s3.gap()),
        f(n.k4.solution.value),
        f(n.k4.solution.cross_check),
        f(n.k4.solution.equality_forced),
        f(n.k4.bound),
        f(n.k4.solution.value - n.k4.bound),
        f(n.k4.reference_minimum),
        f(n.k4.small_noise_closed_form),
        r.windows.tau2.to_string(),
        r.windows.tau3.to_string(),
        r.windows.sigma2.to_string(),
        r.windows.beta.to_string(),
        n.s2.dominates(0.0).to_string(),
        n.s3.dominates(0.0).to_string(),
        n.k4.dominates(0.0).to_string(),
    ]
}

/// User-supplied parameters that fail validation are a configuration error.
fn checked(params: ExponentParams) -> Result<ExponentParams, Error> {
    params.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(params)
}

fn verify(args: VerifyArgs) -> Result<(), Error> {
    let sink: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(VERIFY_COLUMNS)?;
    for &beta in &args.beta {
        for &tau2 in &args.tau2 {
            for &tau3 in &args.tau3 {
                for &sigma2 in &args.sigma2 {
                    let params = checked(ExponentParams { beta, tau2, tau3, sigma2, a: args.a })?;
                    w.write_record(verify_record(&exponents::verify(&params)?))?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn exponents_table(args: ExponentArgs) -> Result<(), Error> {
    let params =
        checked(ExponentParams { beta: args.beta, tau2: args.tau2, tau3: args.tau3, sigma2: args.sigma2, a: args.a })?;
    let mut report = exponents::overall(&params)?;
    if let Some(n) = args.n {
        report.corrections = Some(exponents::finite_corrections(n as f64 * args.a / (1.0 + args.beta), args.beta));
    }
    if args.json {
        let out = json!({
            "report": report,
            "no_feedback": exponents::exponent_no_feedback(args.a),
            "noiseless_feedback": exponents::exponent_noiseless_feedback(args.a),
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    let rows: Vec<(&str, String)> = vec![
        ("no_feedback E(A)", exponents::exponent_no_feedback(args.a).to_string()),
        ("noiseless_feedback F(A,0)", exponents::exponent_noiseless_feedback(args.a).to_string()),
        ("guaranteed A(1-s2)/3", report.theorem.value.to_string()),
        ("guarantee vacuous", report.theorem.vacuous.to_string()),
        ("e_k2", report.e_k2.to_string()),
        ("e_k0", report.e_k0.to_string()),
        ("e_s2", report.e_s2.to_string()),
        ("e_s3", report.e_s3.to_string()),
        ("e_s4", report.e_s4.to_string()),
        ("e_k3", report.e_k3.to_string()),
        ("e_k3_floor", report.e_k3_floor.to_string()),
        ("e_k4", report.e_k4.to_string()),
        ("overall (A1 units)", report.overall.to_string()),
        ("case minimum (A1 units)", report.case_minimum.to_string()),
        ("overall per channel use", report.overall_per_n.to_string()),
        ("window tau2", report.windows.tau2.to_string()),
        ("window tau3", report.windows.tau3.to_string()),
        ("window sigma2", report.windows.sigma2.to_string()),
        ("window beta", report.windows.beta.to_string()),
    ];
    for (k, v) in rows {
        println!("{k:<28}{v}");
    }
    if let Some(c) = report.corrections {
        println!("{:<28}{}", "k2 finite tail bound", c.k2_tail);
        println!("{:<28}{}", "k2 sqrt(3) form", c.k2_prefactor_form);
    }
    Ok(())
}

fn load_row(path: &Path, row: usize) -> Result<awgn_feedback::harness::ResultRow, Error> {
    let rows = read_csv(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    rows.into_iter()
        .nth(row)
        .ok_or_else(|| Error::Config(format!("{} has no row {row}", path.display())))
}

fn compare(args: CompareArgs) -> Result<(), Error> {
    let a = load_row(&args.first, args.row)?;
    let b = load_row(&args.second, args.row)?;
    let c = compare_arms(&a, &b)?;
    println!("{}", serde_json::to_string_pretty(&c)?);
    Ok(())
}
