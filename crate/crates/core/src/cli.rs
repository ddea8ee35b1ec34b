//! Command-line front end. Tensors are raw files of unsigned bytes.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::WidthRule;
use crate::codetable::{CodeTable, Histogram};
use crate::container::{self, compress_tensor, decompress_tensor, DEFAULT_CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::gen::{generate, Distribution};
use crate::report::{build_report, RatioReport, ReportOptions};
use crate::tablegen::{build_table, SearchConfig, TableMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "apack",
    version,
    about = "Lossless compression for 8-bit quantized tensors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Weights,
    Activations,
}

impl From<ModeArg> for TableMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Weights => TableMode::Weights,
            ModeArg::Activations => TableMode::Activations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WidthArg {
    Signed,
    Unsigned,
}

impl From<WidthArg> for WidthRule {
    fn from(w: WidthArg) -> Self {
        match w {
            WidthArg::Signed => WidthRule::SignExtended,
            WidthArg::Unsigned => WidthRule::Unsigned,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a code table from one or more sample tensors.
    Profile {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "weights")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compress a tensor into a container file.
    Compress {
        input: PathBuf,
        /// Table file, or `auto` to profile the input itself in weights mode.
        #[arg(long, default_value = "auto")]
        table: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE, value_parser = clap::value_parser!(u32).range(1..))]
        chunk_size: u32,
    },
    /// Restore the original tensor from a container file.
    Decompress {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a container decompresses to the given tensor.
    Verify {
        original: PathBuf,
        container: PathBuf,
    },
    /// Compare footprints of all methods over a set of tensors.
    Report(ReportArgs),
    /// Write a synthetic tensor.
    Gen {
        /// uniform | constant(V) | two-cluster(P_LOW,SPREAD) | sparse(ZERO_FRACTION) | custom(PATH)
        distribution: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Tensor files or directories of tensor files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "weights")]
    pub mode: ModeArg,
    /// Inputs profiled together per table (activations mode).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub samples_per_table: u32,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE, value_parser = clap::value_parser!(u32).range(1..))]
    pub chunk_size: u32,
    /// Width rule for the group bit-width baseline.
    #[arg(long, value_enum, default_value = "signed")]
    pub ss_width: WidthArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format { .. } | Error::CorruptStream { .. } => EXIT_IO,
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn read_tensor(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Expands directories (one level, regular files only) and sorts by path.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            for entry in fs::read_dir(p)? {
                let path = entry?.path();
                if path.is_file() {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    Ok(files)
}

pub fn cmd_profile(inputs: &[PathBuf], mode: TableMode, out: &Path) -> Result<CodeTable> {
    let mut h = Histogram::default();
    for p in expand_inputs(inputs)? {
        h.add_values(&read_tensor(&p)?);
    }
    let table = build_table(&h, mode, &SearchConfig::default())?;
    write_file(out, &container::serialize_table(&table))?;
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressSummary {
    pub original_bytes: u64,
    pub compressed_bytes: u64,
    pub ratio: f64,
}

pub fn load_table(spec: &str, values: &[u8]) -> Result<CodeTable> {
    if spec == "auto" {
        build_table(
            &Histogram::from_values(values),
            TableMode::Weights,
            &SearchConfig::default(),
        )
    } else {
        container::parse_table(&read_tensor(Path::new(spec))?)
    }
}

pub fn cmd_compress(
    input: &Path,
    table: &str,
    out: &Path,
    chunk_size: u32,
) -> Result<CompressSummary> {
    let values = read_tensor(input)?;
    let table = load_table(table, &values)?;
    let ct = compress_tensor(&values, &table, chunk_size)?;
    let bytes = container::serialize(&ct);
    write_file(out, &bytes)?;
    Ok(CompressSummary {
        original_bytes: values.len() as u64,
        compressed_bytes: bytes.len() as u64,
        ratio: values.len() as f64 / bytes.len() as f64,
    })
}

pub fn cmd_decompress(input: &Path, out: &Path) -> Result<u64> {
    let ct = container::parse(&read_tensor(input)?)?;
    let values = decompress_tensor(&ct)?;
    write_file(out, &values)?;
    Ok(values.len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// First byte offset at which the outputs differ (or where one ends).
    Mismatch {
        offset: u64,
    },
}

pub fn cmd_verify(original: &Path, container_path: &Path) -> Result<Verdict> {
    let expected = read_tensor(original)?;
    let ct = container::parse(&read_tensor(container_path)?)?;
    let got = decompress_tensor(&ct)?;
    if got == expected {
        return Ok(Verdict::Match);
    }
    let offset = expected
        .iter()
        .zip(&got)
        .position(|(a, b)| a != b)
        .unwrap_or(expected.len().min(got.len()));
    Ok(Verdict::Mismatch {
        offset: offset as u64,
    })
}

pub fn cmd_report(args: &ReportArgs) -> Result<RatioReport> {
    let files = expand_inputs(&args.inputs)?;
    let inputs = files
        .iter()
        .map(|p| Ok((p.display().to_string(), read_tensor(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let opts = ReportOptions {
        mode: args.mode.into(),
        samples_per_table: args.samples_per_table as usize,
        chunk_size: args.chunk_size,
        width_rule: args.ss_width.into(),
        search: SearchConfig::default(),
    };
    let report = build_report(&inputs, &opts)?;
    if let Some(csv) = &args.csv {
        write_file(csv, report.to_csv().as_bytes())?;
    }
    Ok(report)
}

pub fn cmd_gen(distribution: &str, count: usize, seed: u64, out: &Path) -> Result<Vec<u8>> {
    let dist: Distribution = distribution.parse()?;
    let values = generate(&dist, count, seed);
    write_file(out, &values)?;
    Ok(values)
}

/// Runs a parsed command, printing results to stdout. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Profile { inputs, mode, out } => {
            cmd_profile(&inputs, mode.into(), &out).map(|t| {
                println!("row  v_min  v_max  OL  c_lo   c_hi   p");
                for row in 0..t.entries().len() {
                    println!(
                        "{row:>3}  {:#04x}   {:#04x}   {}   {:#05x}  {:#05x}  {:.4}",
                        t.v_min(row),
                        t.v_max(row),
                        t.offset_length(row),
                        t.c_lo(row),
                        t.c_hi(row),
                        t.probability_of_row(row)
                    );
                }
                EXIT_OK
            })
        }
        Command::Compress {
            input,
            table,
            out,
            chunk_size,
        } => cmd_compress(&input, &table, &out, chunk_size).map(|s| {
            println!(
                "original_bytes={} compressed_bytes={} ratio={:.4}",
                s.original_bytes, s.compressed_bytes, s.ratio
            );
            EXIT_OK
        }),
        Command::Decompress { input, out } => cmd_decompress(&input, &out).map(|n| {
            println!("wrote {n} values to {}", out.display());
            EXIT_OK
        }),
        Command::Verify {
            original,
            container,
        } => cmd_verify(&original, &container).map(|v| match v {
            Verdict::Match => {
                println!("pass");
                EXIT_OK
            }
            Verdict::Mismatch { offset } => {
                println!("fail: first difference at byte {offset}");
                EXIT_FAILURE
            }
        }),
        Command::Report(args) => cmd_report(&args).map(|r| {
            print!("{}", r.to_text());
            EXIT_OK
        }),
        Command::Gen {
            distribution,
            count,
            seed,
            out,
        } => cmd_gen(&distribution, count, seed, &out).map(|_| EXIT_OK),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
