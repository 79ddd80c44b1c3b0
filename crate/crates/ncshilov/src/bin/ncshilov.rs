//! Thin command-line front end: JSON problem files in, JSON reports out.
//!
//! Either give a problem file, or name a gallery fixture with `--task`:
//!
//! ```text
//! ncshilov problem.json --out report.json
//! ncshilov --task envelope --gallery weighted_row3 --human
//! ```

use std::io::Read;
use std::process::ExitCode;

use clap::Parser;

use ncshilov::cli::{self, ProblemFile, Task};

#[derive(Parser, Debug)]
#[command(name = "ncshilov", version, about = "Shilov boundaries, triple envelopes and multiplier algebras of concrete operator spaces")]
struct Args {
    /// JSON problem file ('-' for stdin); omit when using --gallery.
    input: Option<String>,

    /// Task to run, overriding the problem file's task.
    #[arg(long)]
    task: Option<String>,

    /// Run on a named gallery fixture instead of a problem file.
    #[arg(long)]
    gallery: Option<String>,

    /// RNG seed; falls back to NCSHILOV_SEED, then the file, then 42.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the norm-comparison tolerance.
    #[arg(long)]
    tol_norm: Option<f64>,

    /// Override the rank-decision tolerance.
    #[arg(long)]
    tol_rank: Option<f64>,

    /// Cap on matrix levels in complete-isometry and cc searches.
    #[arg(long)]
    level_cap: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,

    /// Print a plain-text table instead of JSON on stdout.
    #[arg(long)]
    human: bool,
}

fn effective_seed(args: &Args) -> Option<u64> {
    if args.seed.is_some() {
        return args.seed;
    }
    std::env::var("NCSHILOV_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
}

fn apply_tol_flags(args: &Args, problem: &mut ProblemFile) {
    if args.tol_norm.is_none() && args.tol_rank.is_none() {
        return;
    }
    let mut overrides = problem.tolerances.take().unwrap_or_default();
    if args.tol_norm.is_some() {
        overrides.norm_eps = args.tol_norm;
    }
    if args.tol_rank.is_some() {
        overrides.rank_eps = args.tol_rank;
    }
    problem.tolerances = Some(overrides);
}

fn load_problem(args: &Args, seed: u64) -> Result<ProblemFile, ncshilov::Error> {
    if let Some(name) = &args.gallery {
        let task = Task::parse(args.task.as_deref().unwrap_or("envelope"))?;
        let mut problem = cli::gallery_problem(task, name, seed)?;
        apply_tol_flags(args, &mut problem);
        return Ok(problem);
    }
    let Some(input) = &args.input else {
        return Err(ncshilov::Error::InvalidInput(
            "give a problem file (or '-' for stdin), or use --gallery NAME".into(),
        ));
    };
    let text = if input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| ncshilov::Error::InvalidInput(format!("stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(input)
            .map_err(|e| ncshilov::Error::InvalidInput(format!("{input}: {e}")))?
    };
    let mut problem = ProblemFile::from_json(&text)?;
    if let Some(task) = &args.task {
        problem.task = Task::parse(task)?;
    }
    apply_tol_flags(args, &mut problem);
    Ok(problem)
}

fn fail(e: &ncshilov::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(cli::exit_code(e) as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let seed_override = effective_seed(&args);
    let problem = match load_problem(&args, seed_override.unwrap_or(42)) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let report = match cli::run_with(&problem, seed_override, args.level_cap) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let json = report.to_json();
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, json.as_bytes()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
        if args.human {
            print!("{}", report.to_human());
        }
    } else if args.human {
        print!("{}", report.to_human());
    } else {
        println!("{json}");
    }
    ExitCode::SUCCESS
}
