use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use bkising::closed_form::{z_closed_h0, z_closed_ipi2};
use bkising::lattice::{
    brute_force_partition_with_cap, transfer_matrix_partition, DEFAULT_ENUMERATION_CAP,
};
use bkising::mccoy_wu::{z_h0_via_dual, z_ipi2_mccoy_wu};
use bkising::thermo::{
    cauchy_differences, finite_size_sequence, free_energy_ipi2, free_energy_ipi2_swapped,
    DEFAULT_RESOLUTION,
};
use bkising::verify::{run_all, VerifyConfig};
use bkising::zeros::{
    to_csv, zeros_h0_anisotropic_in_x1, zeros_h0_isotropic, zeros_ipi2_isotropic, ZeroRecord,
};
use bkising::{BkError, Couplings, FieldMode, LatticeSpec, ScaledValue};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "bkising",
    version,
    about = "Exact Ising cylinder with Brascamp-Kunz boundary rows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition function at zero field or H/kT = i*pi/2.
    Z(ZArgs),
    /// Run the seeded oracle, duality and staggered-chain suites.
    Verify(VerifyArgs),
    /// Partition-function zeros of the isotropic (or fixed-x2) model.
    Zeros(ZerosArgs),
    /// Infinite-lattice free energy at H/kT = i*pi/2.
    FreeEnergy(FreeEnergyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Field {
    Zero,
    Ipi2,
}

impl From<Field> for FieldMode {
    fn from(f: Field) -> Self {
        match f {
            Field::Zero => FieldMode::ZeroField,
            Field::Ipi2 => FieldMode::IPiOverTwo,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Closed,
    Brute,
    Transfer,
    Mccoywu,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug, Serialize)]
struct ZArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    k1: f64,
    #[arg(long, allow_negative_numbers = true)]
    k2: f64,
    #[arg(long, value_enum, default_value = "zero")]
    field: Field,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// Largest lattice handed to exhaustive enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    max_spins: usize,
}

#[derive(clap::Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    max_spins: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(clap::Args, Debug, Serialize)]
struct ZerosArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, value_enum, default_value = "zero")]
    field: Field,
    /// Fixed complex x2 written as "re+imi"; zeros are then taken in x1.
    #[arg(long, allow_hyphen_values = true)]
    x2: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args, Debug, Serialize)]
struct FreeEnergyArgs {
    #[arg(long, allow_negative_numbers = true)]
    k1: f64,
    #[arg(long, allow_negative_numbers = true)]
    k2: f64,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
}

enum Failure {
    Precondition(String),
    Verification(Value),
    Io(String),
}

impl From<BkError> for Failure {
    fn from(e: BkError) -> Self {
        Failure::Precondition(e.to_string())
    }
}

fn envelope(command: &str, config: &impl Serialize, started: Instant, result: Value) -> Value {
    json!({
        "tool": "bkising",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "result": result,
    })
}

fn describe(z: &ScaledValue) -> Value {
    let c = z.to_complex();
    let real = c.im.abs() <= 1e-12 * c.norm();
    // sign is only meaningful for zero or real values
    let sign = if z.is_zero() {
        json!(0)
    } else if real {
        json!(if c.re > 0.0 { 1 } else { -1 })
    } else {
        Value::Null
    };
    json!({
        "log_abs": if z.is_zero() { Value::Null } else { json!(z.ln_abs()) },
        "phase": if z.is_zero() { Value::Null } else { json!(z.arg()) },
        "sign": sign,
        "significand": [z.significand().re, z.significand().im],
        "exponent2": z.exponent2(),
    })
}

fn cmd_z(a: &ZArgs) -> Result<Value, Failure> {
    let started = Instant::now();
    let spec = LatticeSpec::new(a.m, a.n)?;
    let c = Couplings::real(a.k1, a.k2);
    let field = FieldMode::from(a.field);
    let z = match (a.method, field) {
        (Method::Closed, FieldMode::ZeroField) => z_closed_h0(&spec, &c)?,
        (Method::Closed, FieldMode::IPiOverTwo) => z_closed_ipi2(&spec, &c)?,
        (Method::Brute, f) => brute_force_partition_with_cap(&spec, &c, f, a.max_spins)?,
        (Method::Transfer, f) => transfer_matrix_partition(&spec, &c, f)?,
        (Method::Mccoywu, FieldMode::ZeroField) => z_h0_via_dual(&spec, &c)?,
        (Method::Mccoywu, FieldMode::IPiOverTwo) => z_ipi2_mccoy_wu(&spec, &c)?,
    };
    Ok(envelope("z", a, started, describe(&z)))
}

fn cmd_verify(a: &VerifyArgs) -> Result<Value, Failure> {
    let started = Instant::now();
    let cfg = VerifyConfig {
        max_spins: a.max_spins,
        trials: a.trials,
        seed: a.seed,
    };
    let report = run_all(&cfg)?;
    let passed = report.passed();
    let mut suites = serde_json::Map::new();
    for name in ["oracle-h0", "oracle-ipi2", "lemma", "staggered"] {
        let count = report.cases.iter().filter(|c| c.suite == name).count();
        suites.insert(
            name.into(),
            json!({ "cases": count, "worst_residual": report.worst(name) }),
        );
    }
    let body = envelope(
        "verify",
        a,
        started,
        json!({ "passed": passed, "suites": suites, "cases": report.cases }),
    );
    if passed {
        Ok(body)
    } else {
        Err(Failure::Verification(body))
    }
}

#[derive(Serialize)]
struct ZeroRow<'a> {
    j: usize,
    k: usize,
    re: f64,
    im: f64,
    locus: &'a str,
    residual: f64,
}

fn rows(records: &[ZeroRecord]) -> Vec<ZeroRow<'_>> {
    records
        .iter()
        .map(|r| ZeroRow {
            j: r.j,
            k: r.k,
            re: r.location.re,
            im: r.location.im,
            locus: r.locus.as_str(),
            residual: r.residual,
        })
        .collect()
}

fn cmd_zeros(a: &ZerosArgs) -> Result<Option<Value>, Failure> {
    let started = Instant::now();
    let spec = LatticeSpec::new(a.m, a.n)?;
    let (variable, records, linear) = match (a.field, &a.x2) {
        (Field::Zero, None) => ("x", zeros_h0_isotropic(&spec), Vec::new()),
        (Field::Ipi2, None) => ("u", zeros_ipi2_isotropic(&spec)?, Vec::new()),
        (Field::Zero, Some(s)) => {
            let x2 = Complex64::from_str(s.trim())
                .map_err(|_| Failure::Precondition(format!("cannot parse x2 = {s:?}")))?;
            let z = zeros_h0_anisotropic_in_x1(&spec, x2);
            ("x1", z.records, z.linear_factors)
        }
        (Field::Ipi2, Some(_)) => {
            return Err(Failure::Precondition(
                "--x2 is only available with --field zero".into(),
            ))
        }
    };
    let text = match a.format {
        Format::Csv => to_csv(&records),
        Format::Json => {
            let body = envelope(
                "zeros",
                a,
                started,
                json!({
                    "variable": variable,
                    "count": records.len(),
                    "linear_factors": linear,
                    "zeros": rows(&records),
                }),
            );
            let mut s = serde_json::to_string_pretty(&body).expect("serializable");
            s.push('\n');
            s
        }
    };
    match &a.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(Some(envelope(
                "zeros",
                a,
                started,
                json!({ "variable": variable, "count": records.len(), "out": path }),
            )))
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(e.to_string()))?;
            Ok(None)
        }
    }
}

fn cmd_free_energy(a: &FreeEnergyArgs) -> Result<Value, Failure> {
    let started = Instant::now();
    let c = Couplings::real(a.k1, a.k2);
    let r = free_energy_ipi2(&c, a.resolution)?;
    let swapped = free_energy_ipi2_swapped(&c, a.resolution)?;
    let sizes = [8, 16, 32, 64];
    let seq = finite_size_sequence(&sizes, &c, FieldMode::IPiOverTwo)?;
    Ok(envelope(
        "free-energy",
        a,
        started,
        json!({
            "value": r.value,
            "resolution": r.resolution,
            "estimated_error": r.estimated_error,
            "axis_swap_residual": (r.value - swapped).abs(),
            "integral_part": r.value - a.k1 - a.k2,
            "finite_size": {
                "sizes": sizes,
                "values": seq,
                "cauchy_differences": cauchy_differences(&seq),
                "gaps": seq.iter().map(|f| (f - r.value).abs()).collect::<Vec<_>>(),
            },
        }),
    ))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BKISING_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Precondition(format!(
            "BKISING_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    // a second build only fails when a pool already exists, which is harmless
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::Z(a) => cmd_z(a).map(Some),
        Command::Verify(a) => cmd_verify(a).map(Some),
        Command::Zeros(a) => cmd_zeros(a),
        Command::FreeEnergy(a) => cmd_free_energy(a).map(Some),
    });
    match outcome {
        Ok(v) => {
            if let Some(v) = v {
                print(&v);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Precondition(msg)) => {
            print(&json!({ "error": "precondition", "message": msg }));
            ExitCode::from(EXIT_PRECONDITION)
        }
        Err(Failure::Verification(body)) => {
            print(&body);
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(Failure::Io(msg)) => {
            print(&json!({ "error": "io", "message": msg }));
            ExitCode::from(EXIT_IO)
        }
    }
}
