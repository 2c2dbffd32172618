use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multiplace::Dimension;
use multiplace_cli::{
    cmd_bench, cmd_generate, cmd_instantiate, cmd_sweep, cmd_validate, CliError, GenerateArgs,
    InstantiateArgs, RunConfig, SizesArg, SweepArgs,
};

/// Generate and query multi-placement structures.
#[derive(Parser)]
#[command(name = "multiplace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML or JSON run configuration; defaults to $MULTIPLACE_CONFIG, then built-in values.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SizesInput {
    /// Sizes as `w0xh0,w1xh1,...`, one pair per block.
    sizes: Option<String>,
    /// JSON file with `[[w, h], ...]` or a `"w0xh0,..."` string.
    #[arg(long)]
    sizes_file: Option<PathBuf>,
}

impl SizesInput {
    fn into_arg(self) -> SizesArg {
        match (self.sizes, self.sizes_file) {
            (Some(s), _) => SizesArg::Inline(s),
            (None, Some(p)) => SizesArg::File(p),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a structure for a netlist.
    Generate {
        netlist: PathBuf,
        /// Structure file to write.
        #[arg(long, short = 'o')]
        out: PathBuf,
        /// Overrides the configured explorer seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Select the placement for one size vector.
    Instantiate {
        structure: PathBuf,
        #[command(flatten)]
        sizes: SizesInput,
        /// Render the instantiated floorplan as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Vary one block dimension and cost every stored placement along the way.
    Sweep {
        structure: PathBuf,
        /// Block index or name.
        #[arg(long)]
        block: String,
        /// `w`/`width` or `h`/`height`.
        #[arg(long)]
        dim: Dimension,
        /// Defaults to the block's designer minimum.
        #[arg(long)]
        from: Option<i64>,
        /// Defaults to the block's designer maximum.
        #[arg(long)]
        to: Option<i64>,
        #[arg(long, default_value_t = 1)]
        step: i64,
        /// Sizes of all blocks as `w0xh0,...`; defaults to each designer range's midpoint.
        #[arg(long)]
        fixed: Option<String>,
        /// CSV file to write.
        #[arg(long, short = 'o')]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Time instantiation on random in-bounds size vectors.
    Bench {
        structure: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a structure file's invariants and sample for multiple hits.
    Validate {
        structure: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    match cli.command {
        Command::Generate {
            netlist,
            out: path,
            seed,
            config,
        } => cmd_generate(
            GenerateArgs {
                netlist: &netlist,
                out: &path,
                config: RunConfig::load(config.config.as_deref())?,
                seed,
            },
            &mut out,
            &mut err,
        ),
        Command::Instantiate {
            structure,
            sizes,
            svg,
            config,
        } => cmd_instantiate(
            InstantiateArgs {
                structure: &structure,
                sizes: sizes.into_arg(),
                svg: svg.as_deref(),
                config: RunConfig::load(config.config.as_deref())?,
            },
            &mut out,
        ),
        Command::Sweep {
            structure,
            block,
            dim,
            from,
            to,
            step,
            fixed,
            out: path,
            config,
        } => cmd_sweep(
            SweepArgs {
                structure: &structure,
                block: &block,
                dimension: dim,
                from,
                to,
                step,
                fixed: fixed.map(SizesArg::Inline),
                out: &path,
                config: RunConfig::load(config.config.as_deref())?,
            },
            &mut out,
        ),
        Command::Bench {
            structure,
            trials,
            seed,
        } => cmd_bench(&structure, trials, seed, &mut out),
        Command::Validate {
            structure,
            samples,
            seed,
        } => cmd_validate(&structure, samples, seed, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
