//! `cartanq`: coframe geometry from the command line.
//!
//! Every subcommand produces one report, printed as deterministic text;
//! `--json PATH` writes the same report in its stable JSON envelope.  Exit
//! codes: 0 when every check passes, 2 when a check or golden comparison
//! fails, 1 on any error.

mod commands;
mod definition;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cartanq_core::cases;
use cartanq_core::report::Record;
use clap::{Args, Parser, Subcommand};

use commands::Input;

#[derive(Parser)]
#[command(
    name = "cartanq",
    version,
    about = "Spin connections, curvature, gauge patches, and integer \
             quantization conditions for four-dimensional coframes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Built-in case (einstein-rosen, monopole, reissner-nordstrom,
    /// kerr-newman).
    #[arg(long, value_name = "NAME")]
    case: Option<String>,
    /// Spacetime definition file.
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
}

impl Target {
    fn input(&self) -> Input<'_> {
        match (&self.case, &self.file) {
            (Some(name), _) => Input::Case(name),
            (_, Some(path)) => Input::File(path),
            _ => unreachable!("clap enforces exactly one target"),
        }
    }
}

#[derive(Args)]
struct Output {
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Prefix the output with run metadata (seed, wall-clock time).
    #[arg(long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the first structure equation for the spin connection.
    Connection {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: Output,
    },
    /// Curvature two-forms, with the Bianchi identity checked.
    Curvature {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: Output,
    },
    /// Scalar curvature, Kretschmann, field invariants, singular loci.
    Invariants {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        out: Output,
    },
    /// Check the field equations for the declared matter content.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Definition files only: demand a vanishing Einstein tensor at
        /// first order in perturbation-tagged parameters.
        #[arg(long)]
        linear: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Rotate or boost the frame in a coordinate plane.
    Gauge {
        #[command(flatten)]
        target: Target,
        /// Frame legs spanning the plane, e.g. --plane 1 3.
        #[arg(long, num_args = 2, required = true, value_names = ["A", "B"],
              value_parser = clap::value_parser!(u8).range(0..=3))]
        plane: Vec<u8>,
        /// Rotation angle (rapidity for boosts), parsed in the scene's
        /// context.
        #[arg(long, value_name = "EXPR")]
        angle: String,
        #[command(flatten)]
        out: Output,
    },
    /// Gauge patches, transition phases, and the cocycle identity.
    Atlas {
        /// Built-in case name.
        #[arg(long = "case", value_name = "NAME")]
        case: String,
        #[command(flatten)]
        out: Output,
    },
    /// Integer conditions and Chern data for a built-in case.
    Quantize {
        /// Built-in case name.
        #[arg(long = "case", value_name = "NAME")]
        case: String,
        #[command(flatten)]
        out: Output,
    },
    /// Run a full built-in pipeline; exits 2 when any check fails.
    Case {
        /// Case name; omit with --all.
        #[arg(value_name = "NAME", required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        /// Run every built-in case, concurrently, reported in order.
        #[arg(long)]
        all: bool,
        /// Compare the JSON report byte for byte against the stored golden.
        #[arg(long)]
        check_golden: bool,
        #[command(flatten)]
        out: Output,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}

/// Numeric probe seed, from `CQ_SEED` (default 0).
fn seed() -> u64 {
    std::env::var("CQ_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn tag(op: &'static str) -> impl Fn(cartanq_core::Error) -> String {
    move |e| format!("{}: {}", op, e)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let seed = seed();
    match cli.cmd {
        Cmd::Connection { target, out } => {
            let sc = commands::scene(target.input(), false).map_err(tag("connection"))?;
            emit(
                &commands::connection(&sc, seed).map_err(tag("connection"))?,
                &out,
                seed,
            )
        }
        Cmd::Curvature { target, out } => {
            let sc = commands::scene(target.input(), false).map_err(tag("curvature"))?;
            emit(
                &commands::curvature(&sc).map_err(tag("curvature"))?,
                &out,
                seed,
            )
        }
        Cmd::Invariants { target, out } => {
            let sc = commands::scene(target.input(), false).map_err(tag("invariants"))?;
            emit(
                &commands::invariants(&sc).map_err(tag("invariants"))?,
                &out,
                seed,
            )
        }
        Cmd::Verify {
            target,
            linear,
            out,
        } => {
            let sc = commands::scene(target.input(), linear).map_err(tag("verify"))?;
            emit(&commands::verify(&sc).map_err(tag("verify"))?, &out, seed)
        }
        Cmd::Gauge {
            target,
            plane,
            angle,
            out,
        } => {
            let sc = commands::scene(target.input(), false).map_err(tag("gauge"))?;
            let rec = commands::gauge_transform(&sc, plane[0] as usize, plane[1] as usize, &angle)
                .map_err(tag("gauge"))?;
            emit(&rec, &out, seed)
        }
        Cmd::Atlas { case, out } => {
            emit(&commands::atlas(&case).map_err(tag("atlas"))?, &out, seed)
        }
        Cmd::Quantize { case, out } => emit(
            &commands::quantize(&case).map_err(tag("quantize"))?,
            &out,
            seed,
        ),
        Cmd::Case {
            name,
            all,
            check_golden,
            out,
        } => run_cases(name, all, check_golden, &out, seed),
    }
}

fn banner(out: &Output, seed: u64) {
    if out.verbose {
        println!("# seed {}", seed);
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        println!("# unix time {}", now);
    }
}

fn write_report(rec: &Record, out: &Output) -> Result<(), String> {
    print!("{}", rec.to_text());
    if let Some(path) = &out.json {
        std::fs::write(path, rec.to_json())
            .map_err(|e| format!("write {}: {}", path.display(), e))?;
    }
    Ok(())
}

fn emit(rec: &Record, out: &Output, seed: u64) -> Result<ExitCode, String> {
    banner(out, seed);
    write_report(rec, out)?;
    Ok(if rec.all_checks_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn run_cases(
    name: Option<String>,
    all: bool,
    check_golden: bool,
    out: &Output,
    seed: u64,
) -> Result<ExitCode, String> {
    let code = |pass: bool| {
        if pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        }
    };
    banner(out, seed);
    if !all {
        let name = name.expect("clap requires a name without --all");
        let rec = cases::analyze(&name).map_err(tag("case"))?;
        return Ok(code(finish_case(&rec, &name, check_golden, out)?));
    }
    if out.json.is_some() {
        return Err("case --all prints several reports; --json takes a single case".into());
    }
    let names = cases::BUILT_IN;
    let results: Vec<cartanq_core::Result<Record>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| scope.spawn(move || cases::analyze(n)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("case worker panicked"))
            .collect()
    });
    let mut ok = true;
    for (i, (name, res)) in names.iter().zip(results).enumerate() {
        if i > 0 {
            println!();
        }
        let rec = res.map_err(tag("case"))?;
        ok &= finish_case(&rec, name, check_golden, out)?;
    }
    Ok(code(ok))
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("goldens")
        .join(format!("{}.json", name))
}

fn first_difference(golden: &str, current: &str) -> String {
    for (i, (g, c)) in golden.lines().zip(current.lines()).enumerate() {
        if g != c {
            return format!(
                "line {}: golden `{}` vs current `{}`",
                i + 1,
                g.trim(),
                c.trim()
            );
        }
    }
    format!(
        "line counts differ: golden {}, current {}",
        golden.lines().count(),
        current.lines().count()
    )
}

fn finish_case(
    rec: &Record,
    name: &str,
    check_golden: bool,
    out: &Output,
) -> Result<bool, String> {
    write_report(rec, out)?;
    let mut pass = rec.all_checks_pass();
    if check_golden {
        let path = golden_path(name);
        let golden = std::fs::read_to_string(&path).map_err(|e| {
            format!(
                "golden {}: {} (regenerate with `cartanq case {} --json {}`)",
                path.display(),
                e,
                name,
                path.display()
            )
        })?;
        let current = rec.to_json();
        if golden == current {
            println!("golden {}: match", name);
        } else {
            println!(
                "golden {}: MISMATCH ({})",
                name,
                first_difference(&golden, &current)
            );
            pass = false;
        }
    }
    Ok(pass)
}
