//! Command-line surface for the quaternionic frame toolkit.
//!
//! Exit codes: 0 on success or an affirmative verdict, 1 on a negative
//! verdict (inadmissible pair, verification failure, no path found),
//! 2 on usage or parse errors.

use clap::{Args, Parser, Subcommand};
use qframes::admissibility::{self, AdmissibilityCertificate};
use qframes::error::QError;
use qframes::frames::{Frame, NormSpec, SpectrumSpec};
use qframes::homotopy::{self, PathOptions};
use qframes::qmat::{embed_complex, QMatrix};
use qframes::spectral::eigh_q;
use qframes::synthesis::{self, SynthesisOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qframes", version, about = "Quaternionic finite-frame toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a spectrum / norm-profile pair admits a frame
    Admissible(AdmissibleArgs),
    /// Construct a frame with the given spectrum and squared norms
    Synth(SynthArgs),
    /// Sample a seeded random frame in the given stratum
    Random(SynthArgs),
    /// Check a frame file against a spectrum and norm profile
    Verify(VerifyArgs),
    /// Find a discretized path between two frames in a common stratum
    Path(PathArgs),
    /// Print the complex embedding of a frame's operator or Gram matrix
    Embed(EmbedArgs),
}

#[derive(Args)]
struct SpectrumFlags {
    /// Frame spectrum, comma-separated (any order)
    #[arg(long, value_delimiter = ',', value_parser = parse_num, allow_hyphen_values = true)]
    lambda: Vec<f64>,
    /// Squared norms, comma-separated (any order)
    #[arg(long, value_delimiter = ',', value_parser = parse_num, allow_hyphen_values = true)]
    r: Vec<f64>,
}

#[derive(Args)]
struct AdmissibleArgs {
    #[command(flatten)]
    spec: SpectrumFlags,
    /// Relative tolerance for the trace and prefix-sum tests
    #[arg(long, default_value_t = admissibility::DEFAULT_TOL)]
    tol: f64,
    /// Emit the certificate as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    spec: SpectrumFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the frame JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Frame JSON file to check
    #[arg(long)]
    frame: PathBuf,
    #[command(flatten)]
    spec: SpectrumFlags,
    /// Relative tolerance on the frame spectrum
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Relative tolerance on the squared norms
    #[arg(long, default_value_t = 1e-10)]
    norm_tol: f64,
    /// Emit the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PathArgs {
    /// Frame JSON file for the starting endpoint
    #[arg(long)]
    from: PathBuf,
    /// Frame JSON file for the final endpoint
    #[arg(long)]
    to: PathBuf,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 20)]
    max_restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the path JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Frame JSON file
    #[arg(long)]
    frame: PathBuf,
    /// Which square matrix to embed: the d x d frame operator or the
    /// N x N Gram matrix
    #[arg(long, default_value = "operator", value_parser = ["operator", "gram"])]
    what: String,
    /// Emit the matrix as JSON
    #[arg(long)]
    json: bool,
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Admissible(args) => cmd_admissible(args),
        Command::Synth(args) => cmd_synth(args, false),
        Command::Random(args) => cmd_synth(args, true),
        Command::Verify(args) => cmd_verify(args),
        Command::Path(args) => cmd_path(args),
        Command::Embed(args) => cmd_embed(args),
    }
}

fn parse_specs(flags: &SpectrumFlags) -> Result<(SpectrumSpec, NormSpec), String> {
    let lambda = SpectrumSpec::new(flags.lambda.clone()).map_err(|e| e.to_string())?;
    let r = NormSpec::new(flags.r.clone()).map_err(|e| e.to_string())?;
    Ok((lambda, r))
}

fn print_certificate(cert: &AdmissibilityCertificate, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(cert).expect("serializable"));
    } else if cert.admissible {
        println!("admissible");
    } else {
        println!("not admissible");
        println!("  trace gap (sum r - sum lambda): {:.6e}", cert.trace_gap);
        match cert.first_violated_k {
            Some(k) => println!("  first violated prefix: k = {k}"),
            None => println!("  trace condition violated"),
        }
    }
}

fn cmd_admissible(args: AdmissibleArgs) -> Result<ExitCode, String> {
    let (lambda, r) = parse_specs(&args.spec)?;
    let cert = admissibility::is_admissible(&lambda, &r, args.tol);
    print_certificate(&cert, args.json);
    Ok(ExitCode::from(if cert.admissible { 0 } else { 1 }))
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_synth(args: SynthArgs, random: bool) -> Result<ExitCode, String> {
    let (lambda, r) = parse_specs(&args.spec)?;
    let result = if random {
        synthesis::random_frame_in_stratum(&lambda, &r, args.seed)
    } else {
        synthesis::synthesize_frame(&lambda, &r, &SynthesisOptions::seeded(args.seed))
    };
    match result {
        Ok(frame) => {
            let text =
                serde_json::to_string_pretty(&frame.to_json()).expect("serializable");
            emit(text, &args.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(QError::NotAdmissible(msg)) => {
            eprintln!("not admissible: {msg}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn load_frame(path: &PathBuf) -> Result<Frame, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Frame::from_json(&value).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let (lambda, r) = parse_specs(&args.spec)?;
    let frame = load_frame(&args.frame)?;

    let shape_ok = frame.d() == lambda.d() && frame.n() == r.n();
    let mut spectrum_dev = f64::INFINITY;
    if shape_ok {
        if let Ok(eig) = eigh_q(&frame.frame_operator()) {
            spectrum_dev = eig
                .eigenvalues
                .iter()
                .zip(lambda.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
    }
    let norm_dev = if shape_ok {
        frame
            .squared_norms()
            .iter()
            .zip(r.original())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let spectrum_bound = args.tol * (1.0 + lambda.values()[0]);
    let norm_bound = args.norm_tol * (1.0 + r.sorted()[0]);
    let passed = shape_ok && spectrum_dev <= spectrum_bound && norm_dev <= norm_bound;

    if args.json {
        let report = serde_json::json!({
            "passed": passed,
            "spectrum_dev": spectrum_dev,
            "norm_dev": norm_dev,
            "spectrum_bound": spectrum_bound,
            "norm_bound": norm_bound,
        });
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else if passed {
        println!("verified (spectrum dev {spectrum_dev:.3e}, norm dev {norm_dev:.3e})");
    } else {
        println!("verification FAILED (spectrum dev {spectrum_dev:.3e} vs {spectrum_bound:.3e}, norm dev {norm_dev:.3e} vs {norm_bound:.3e})");
    }
    Ok(ExitCode::from(if passed { 0 } else { 1 }))
}

fn cmd_path(args: PathArgs) -> Result<ExitCode, String> {
    let f0 = load_frame(&args.from)?;
    let f1 = load_frame(&args.to)?;
    let opts = PathOptions {
        steps: args.steps,
        tol: args.tol,
        max_restarts: args.max_restarts,
        seed: args.seed,
    };
    match homotopy::find_path(&f0, &f1, &opts) {
        Ok(path) => {
            let text = serde_json::to_string_pretty(&homotopy::path_to_json(&path, args.tol))
                .expect("serializable");
            emit(text, &args.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ (QError::PathNotFound { .. } | QError::SpectrumMismatch(_))) => {
            eprintln!("no path: {e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn embedding_json(m: &QMatrix) -> Result<serde_json::Value, String> {
    let c = embed_complex(m).map_err(|e| e.to_string())?;
    let entries: Vec<Vec<f64>> = c.iter_rows_owned();
    Ok(serde_json::json!({
        "rows": c.nrows(),
        "cols": c.ncols(),
        "entries": entries,
    }))
}

// nalgebra's DMatrix iterates column-major; flatten row-major as [re, im]
trait IterRowsOwned {
    fn iter_rows_owned(&self) -> Vec<Vec<f64>>;
}

impl IterRowsOwned for nalgebra::DMatrix<num_complex::Complex64> {
    fn iter_rows_owned(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(vec![self[(i, j)].re, self[(i, j)].im]);
            }
        }
        out
    }
}

fn cmd_embed(args: EmbedArgs) -> Result<ExitCode, String> {
    let frame = load_frame(&args.frame)?;
    let square = match args.what.as_str() {
        "gram" => frame.gram().into_mat(),
        _ => frame.frame_operator().into_mat(),
    };
    let value = embedding_json(&square)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        let c = embed_complex(&square).map_err(|e| e.to_string())?;
        println!("complex embedding, {} x {}:", c.nrows(), c.ncols());
        for i in 0..c.nrows() {
            let row: Vec<String> = (0..c.ncols())
                .map(|j| format!("{:+.6}{:+.6}i", c[(i, j)].re, c[(i, j)].im))
                .collect();
            println!("  [{}]", row.join(", "));
        }
    }
    Ok(ExitCode::SUCCESS)
}
