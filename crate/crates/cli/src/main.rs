use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cuta_bpmn::frontend::{load, SourceFormat};
use cuta_bpmn::stats::{block_census, expected_totals, graph_census};
use cuta_bpmn::{
    compile, generate_random_workflow, print_dsl, to_json, transform_workflow, verify_with,
    CompileError, CompileOptions, CutaWorkflow, Diagnostic, VerifyOptions, DEFAULT_STATE_CAP,
};

#[derive(Parser)]
#[command(
    name = "cuta2bpmn",
    version,
    about = "Compile CUTA4BPM workflows to BPMN 2.0"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dsl,
    Json,
}

#[derive(clap::Args)]
struct Input {
    /// `.cuta` DSL or `.cuta.json` source
    input: PathBuf,
    /// Override the format guessed from the file name
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Give up after this many distinct markings
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Enumerate every interleaving instead of the reduced search
    #[arg(long)]
    full: bool,
}

impl VerifyArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            state_cap: self.state_cap,
            reduce: !self.full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate, printing diagnostics
    Check {
        #[command(flatten)]
        input: Input,
    },
    /// Run the whole pipeline and write BPMN XML
    Compile {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the workflow as JSON interchange
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        #[arg(long)]
        no_verify: bool,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Compile in memory and print the soundness report
    Verify {
        #[command(flatten)]
        input: Input,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Print graph size and the expected size of every block
    Stats {
        #[command(flatten)]
        input: Input,
    },
    /// Pretty-print a workflow as canonical DSL
    Fmt {
        #[command(flatten)]
        input: Input,
    },
    /// Emit a random valid workflow
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 4)]
        fanout: u32,
        /// Emit JSON interchange instead of DSL
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    /// Diagnostics or an unsound graph, already printed.
    Rejected,
    /// I/O or usage problem.
    Fatal(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Fatal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match command {
        Command::Check { input } => {
            let w = read(&input)?;
            writeln!(
                out,
                "ok: {} ({} activities)",
                w.name,
                w.root.activities().len()
            )?;
        }
        Command::Compile {
            input,
            output,
            json,
            no_verify,
            verify,
        } => {
            let w = read(&input)?;
            let opts = CompileOptions {
                verify: (!no_verify).then(|| verify.options()),
            };
            let compiled = compile(&w, opts).map_err(compile_failure)?;
            write_file(&output, &compiled.xml)?;
            if let Some(path) = json {
                write_file(&path, &to_json(&w))?;
            }
            if let Some(report) = compiled.report {
                if !report.sound {
                    eprint!("{report}");
                    return Err(Failure::Rejected);
                }
                write!(out, "{report}")?;
            }
        }
        Command::Verify {
            input,
            json,
            verify,
        } => {
            let w = read(&input)?;
            let d = transform_workflow(&w).map_err(|e| Failure::Fatal(e.to_string()))?;
            let report =
                verify_with(&d, &verify.options()).map_err(|e| Failure::Fatal(e.to_string()))?;
            if json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                write!(out, "{report}")?;
            }
            if !report.sound {
                return Err(Failure::Rejected);
            }
        }
        Command::Stats { input } => {
            let w = read(&input)?;
            let d = transform_workflow(&w).map_err(|e| Failure::Fatal(e.to_string()))?;
            let census = graph_census(&d);
            writeln!(out, "{census}")?;
            let expected = expected_totals(&w.root);
            writeln!(
                out,
                "expected: nodes={} flows={}",
                expected.nodes, expected.flows
            )?;
            writeln!(out, "blocks:")?;
            for b in block_census(&w.root) {
                writeln!(
                    out,
                    "  {:<24} {:<12} nodes={} flows={}",
                    b.path.to_string(),
                    b.kind.as_str(),
                    b.counts.nodes,
                    b.counts.flows
                )?;
            }
            if (census.nodes, census.flows) != (expected.nodes, expected.flows) {
                eprintln!(
                    "error: graph has nodes={} flows={}, counting laws give nodes={} flows={}",
                    census.nodes, census.flows, expected.nodes, expected.flows
                );
                return Err(Failure::Rejected);
            }
        }
        Command::Fmt { input } => {
            let w = read(&input)?;
            write!(out, "{}", print_dsl(&w))?;
        }
        Command::Gen {
            seed,
            depth,
            fanout,
            json,
        } => {
            let w = generate_random_workflow(seed, depth, fanout)
                .map_err(|e| Failure::Fatal(e.to_string()))?;
            if json {
                write!(out, "{}", to_json(&w))?;
            } else {
                write!(out, "{}", print_dsl(&w))?;
            }
        }
    }
    Ok(())
}

fn read(input: &Input) -> Result<CutaWorkflow, Failure> {
    let text = fs::read_to_string(&input.input)
        .map_err(|e| Failure::Fatal(format!("{}: {e}", input.input.display())))?;
    let format = match input.format {
        Some(Format::Dsl) => SourceFormat::Dsl,
        Some(Format::Json) => SourceFormat::Json,
        None => SourceFormat::sniff(&input.input),
    };
    let name = input.input.display().to_string();
    load(&text, &name, format).map_err(|diags| report(&diags))
}

fn report(diags: &[Diagnostic]) -> Failure {
    for d in diags {
        eprintln!("{d}");
    }
    Failure::Rejected
}

fn compile_failure(e: CompileError) -> Failure {
    match e {
        CompileError::Invalid(diags) => report(&diags),
        CompileError::Verify(e) => {
            eprintln!("error: {e}");
            Failure::Rejected
        }
        other => Failure::Fatal(other.to_string()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Fatal(format!("{}: {e}", path.display())))
}
