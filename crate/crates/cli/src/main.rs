use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use escape_rate::io::{self as eio, ProblemFile, Verdict};
use escape_rate::{Error, Execution};

/// Certified escape rates of non-expansive maps.
#[derive(Parser)]
#[command(name = "escrate", version)]
struct Cli {
    /// Worker threads for the data-parallel kernels (0 = one per core).
    #[arg(long, global = true, env = "ESCRATE_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified interval for the escape rate.
    Rate(Common),
    /// Verify the certificates given in the problem file.
    Certify(Common),
    /// Sample triangle, non-expansiveness, geodesic and star-shaped checks.
    CheckSpace(Common),
    /// Rates and ω certificates of a stochastic game.
    Game(Common),
    /// Boundary samples of the horoballs of a dual certificate.
    Horoballs {
        #[command(flatten)]
        common: Common,
        /// Also write the samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Problem file; `-` reads standard input.
    problem: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Run every kernel on the calling thread.
    #[arg(long)]
    sequential: bool,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ProblemFile, Error> {
        let text = if self.problem.as_os_str() == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        } else {
            fs::read_to_string(&self.problem)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", self.problem.display())))?
        };
        let mut p = eio::parse_problem(&text)?;
        if let Some(seed) = self.seed {
            p.seed = seed;
        }
        if let Some(tol) = self.tol {
            p.tol = tol;
        }
        if let Some(h) = self.horizon {
            p.horizon = h;
        }
        if self.sequential {
            p.execution = Execution::Sequential;
        }
        p.validate()?;
        Ok(p)
    }

    fn emit(&self, json: &str) -> Result<(), Error> {
        match &self.output {
            Some(path) => fs::write(path, json)?,
            None => io::stdout().lock().write_all(json.as_bytes())?,
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<Verdict, Error> {
    match &cli.command {
        Command::Rate(c) => {
            let r = eio::run_rate(&c.load()?)?;
            c.emit(&eio::to_json(&r)?)?;
            Ok(r.verdict)
        }
        Command::Certify(c) => {
            let r = eio::certify(&c.load()?)?;
            c.emit(&eio::to_json(&r)?)?;
            Ok(r.verdict)
        }
        Command::CheckSpace(c) => {
            let r = eio::check_space(&c.load()?)?;
            c.emit(&eio::to_json(&r)?)?;
            Ok(r.verdict)
        }
        Command::Game(c) => {
            let r = eio::game(&c.load()?)?;
            c.emit(&eio::to_json(&r)?)?;
            Ok(r.verdict)
        }
        Command::Horoballs { common, csv } => {
            let r = eio::horoball_sections(&common.load()?)?;
            if let Some(path) = csv {
                eio::write_horoball_csv(&r, io::BufWriter::new(fs::File::create(path)?))?;
            }
            common.emit(&eio::to_json(&r)?)?;
            Ok(r.verdict)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("escrate: cannot size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("escrate: {e}");
            ExitCode::from(1)
        }
    }
}
