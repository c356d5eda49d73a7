use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use spectree::commands;
use spectree::document::Scenario;
use spectree::verify::{self, VerifyOptions};
use spectree::{Error, Result};

/// Composition operators on weighted Lp spaces of rooted trees.
#[derive(Parser)]
#[command(name = "spectree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norms, isometry, compactness tails and tail defects across the depth ladder.
    Analyze {
        spec: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Singular values, Hilbert-Schmidt norm, Schatten sums and trace (p = 2).
    Spectrum {
        spec: PathBuf,
        /// Spectrum CSV at the deepest ladder entry.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Nonzero (row, col, value) triplets of the dense matrix.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded property suites; exits 1 on any violation.
    Verify {
        /// One of: lpspace, norm, sandwich, isometry, tail, schatten, oracle,
        /// trace, adversary, compactness. All when omitted.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturb the weights the isometry suite expects to be isometric.
        #[arg(long)]
        inject_fault: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maps driving beta up for unbounded or vanishing weights.
    Adversary {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| Error::Io { path, source }
    };
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(io_err(path))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { spec, out } => {
            let report = commands::analyze(&Scenario::load(&spec)?)?;
            emit(&report, out.as_deref())?;
            if out.is_some() {
                for d in &report.depths {
                    println!(
                        "depth {:>4}: beta {} at vertex {}, norm {}, isometry {}, compactness {:?}",
                        d.truncation_depth,
                        spectree::report::sig15(d.boundedness.beta.value),
                        d.boundedness.beta.at.map_or("-".to_owned(), |v| v.index().to_string()),
                        spectree::report::sig15(d.boundedness.norm_exact.value),
                        d.isometry.is_isometry,
                        d.compactness.verdict,
                    );
                }
                println!("boundedness trend: {:?}", report.boundedness_trend);
            }
        }
        Command::Spectrum { spec, csv, matrix, out } => {
            let report = commands::spectrum(&Scenario::load(&spec)?)?;
            if let Some(path) = &csv {
                report.write_csv(create(path)?)?;
            }
            if let Some(path) = &matrix {
                match &report.matrix {
                    Some(m) => m.write_triplets_csv(create(path)?)?,
                    None => eprintln!("no matrix written: oracle disabled or over the dense cap"),
                }
            }
            emit(&report, out.as_deref())?;
            if out.is_some() {
                for d in &report.depths {
                    println!(
                        "depth {:>4}: hs_norm {}, oracle {}",
                        d.truncation_depth,
                        spectree::report::sig15(d.hs_norm),
                        match (&d.oracle, &d.oracle_notice) {
                            (Some(o), _) => if o.agrees { "agrees" } else { "DISAGREES" }.to_owned(),
                            (None, Some(n)) => n.clone(),
                            (None, None) => "disabled".to_owned(),
                        }
                    );
                }
                println!("{}", report.trace_line);
            }
        }
        Command::Verify {
            suite,
            seed,
            inject_fault,
            out,
        } => {
            let report = verify::verify(suite.as_deref(), VerifyOptions { seed, inject_fault })?;
            emit(&report, out.as_deref())?;
            for s in &report.suites {
                eprintln!(
                    "{:<12} {} ({} checks, {} failed)",
                    s.name,
                    if s.passed { "pass" } else { "FAIL" },
                    s.checks,
                    s.failed
                );
            }
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Adversary { spec, out } => {
            let report = commands::adversary(&Scenario::load(&spec)?)?;
            emit(&report, out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
