use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gqls::cli::{
    cmd_kinship, cmd_scan, cmd_simulate, KinshipConfig, MethodChoice, ScanConfig, SimulateConfig,
};
use gqls::pedigree::PlaceholderPolicy;

/// Association tests for samples of related, possibly inbred individuals.
#[derive(Parser)]
#[command(name = "gqls", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute inbreeding and pairwise kinship coefficients from a pedigree.
    Kinship(KinshipArgs),
    /// Run association tests over a genotype/phenotype table.
    Scan(ScanArgs),
    /// Run a simulation experiment from a spec file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct KinshipArgs {
    /// Pedigree file (`id sire dam`, `.` or `0` for unknown).
    #[arg(long)]
    pedigree: PathBuf,
    /// Pair-table output path; the inbreeding table lands next to it.
    #[arg(long)]
    out: PathBuf,
    /// Inbreeding-table output path (default: `<out>.self.tsv`).
    #[arg(long)]
    out_self: Option<PathBuf>,
    /// Comma-separated subject ids to export (default: all).
    #[arg(long, value_delimiter = ',')]
    subjects: Option<Vec<String>>,
    /// File with one subject id per line, appended to --subjects.
    #[arg(long)]
    subjects_file: Option<PathBuf>,
    /// Reject rows whose parents are not defined instead of auto-creating
    /// placeholder founders.
    #[arg(long)]
    no_placeholders: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    pedigree: PathBuf,
    #[arg(long)]
    genotypes: PathBuf,
    #[arg(long)]
    phenotypes: PathBuf,
    /// Optional marker map (`marker_id chrom position_cM`).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Exclude markers with minor allele frequency below this bound.
    #[arg(long, default_value_t = 0.05)]
    min_maf: f64,
    /// Exclude markers missing in more than this fraction of subjects.
    #[arg(long, default_value_t = 0.20)]
    max_missing: f64,
    /// gqls | trend | both
    #[arg(long, default_value = "gqls")]
    method: String,
    /// Phenotype column with population labels; sums per-population
    /// statistics.
    #[arg(long)]
    stratify_by: Option<String>,
    /// Merge subjects whose kinship rows are identical (monozygotic twins /
    /// double entries), keeping the first occurrence.
    #[arg(long)]
    merge_duplicates: bool,
    /// Worker threads (default: GQLS_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment spec file (key = value lines).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec's thread count.
    #[arg(long)]
    threads: Option<usize>,
}

fn env_threads() -> Option<usize> {
    std::env::var("GQLS_THREADS").ok().and_then(|v| v.parse().ok())
}

fn run() -> gqls::Result<i32> {
    match Cli::parse().command {
        Command::Kinship(args) => {
            let mut subjects = args.subjects;
            if let Some(path) = args.subjects_file {
                let text = std::fs::read_to_string(path)?;
                let from_file = text.split_whitespace().map(String::from);
                match subjects.as_mut() {
                    Some(list) => list.extend(from_file),
                    None => subjects = Some(from_file.collect()),
                }
            }
            cmd_kinship(&KinshipConfig {
                pedigree_path: args.pedigree,
                subjects,
                out_pairs: args.out,
                out_self: args.out_self,
                placeholder_policy: if args.no_placeholders {
                    PlaceholderPolicy::Reject
                } else {
                    PlaceholderPolicy::AutoCreate
                },
            })?;
            Ok(0)
        }
        Command::Scan(args) => {
            let method: MethodChoice = args.method.parse()?;
            let status = cmd_scan(&ScanConfig {
                pedigree_path: args.pedigree,
                genotype_path: args.genotypes,
                phenotype_path: args.phenotypes,
                map_path: args.map,
                min_maf: args.min_maf,
                max_missing: args.max_missing,
                method,
                stratify_by: args.stratify_by,
                out: args.out,
                threads: args.threads.or_else(env_threads).unwrap_or(0),
                merge_duplicates: args.merge_duplicates,
            })?;
            Ok(status.exit_code())
        }
        Command::Simulate(args) => {
            cmd_simulate(&SimulateConfig {
                spec_path: args.spec,
                out: args.out,
                seed: args.seed,
                threads: args.threads.or_else(env_threads),
            })?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
