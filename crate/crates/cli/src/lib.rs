//! Command implementations behind the `multiplace` binary.
//!
//! Every command writes its report to `out`, warnings to `err`, and returns
//! a [`CliError`] whose [`CliError::exit_code`] is the process status.

pub mod config;
pub mod error;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use multiplace::cost::layout_cost;
use multiplace::experiments::{bench_instantiation, run_sweep, sample_uniqueness, SweepSpec};
use multiplace::explorer::{generate, StopReason};
use multiplace::{Dimension, MultiPlacementStructure, Netlist, SizeVector, StructureError};

pub use config::RunConfig;
pub use error::CliError;

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::io("<stdout>", e))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        emit($out, format_args!($($arg)*))
    };
}

pub fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| {
        if e.classify() == serde_json::error::Category::Data {
            CliError::Domain(format!("{}: invalid netlist: {e}", path.display()))
        } else {
            CliError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        }
    })
}

pub fn load_structure(path: &Path) -> Result<MultiPlacementStructure, CliError> {
    let text = read_file(path)?;
    MultiPlacementStructure::from_json(&text).map_err(|e| match e {
        StructureError::Parse { .. } => CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => CliError::Domain(format!("{}: {other}", path.display())),
    })
}

/// Size vector given inline (`w0xh0,w1xh1,...`) or as a JSON file holding
/// either that string or a list of `[w, h]` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizesArg {
    Inline(String),
    File(PathBuf),
}

impl SizesArg {
    pub fn resolve(&self, netlist: &Netlist) -> Result<SizeVector, CliError> {
        let sizes = match self {
            SizesArg::Inline(text) => text
                .parse::<SizeVector>()
                .map_err(|e| CliError::Usage(e.to_string()))?,
            SizesArg::File(path) => {
                let text = read_file(path)?;
                let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                match value {
                    serde_json::Value::String(s) => s
                        .parse::<SizeVector>()
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
                    other => serde_json::from_value(other).map_err(|e| CliError::Parse {
                        path: path.clone(),
                        message: e.to_string(),
                    })?,
                }
            }
        };
        netlist
            .check_sizes(&sizes)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(sizes)
    }
}

fn format_cost(cost: Option<f64>) -> String {
    cost.map_or_else(|| "infeasible".to_string(), |c| c.to_string())
}

pub struct GenerateArgs<'a> {
    pub netlist: &'a Path,
    pub out: &'a Path,
    pub config: RunConfig,
    pub seed: Option<u64>,
}

pub fn cmd_generate(
    args: GenerateArgs<'_>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let netlist = load_netlist(args.netlist)?;
    let mut cfg = args.config.explorer_config();
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    let start = Instant::now();
    let gen = generate(&netlist, &cfg)?;
    let elapsed = start.elapsed();
    write_file(args.out, &gen.structure.to_json())?;

    let status = match gen.stop {
        StopReason::CoverageReached => "coverage_reached",
        StopReason::IterationLimit => "iteration_limit",
    };
    let name = args
        .netlist
        .file_stem()
        .map_or_else(|| "-".into(), |s| s.to_string_lossy().into_owned());
    say!(
        out,
        "{:<20} {:>6} {:>5} {:>9} {:>10} {:>10} {:>10} {:<16} {:>12}\n",
        "netlist",
        "blocks",
        "nets",
        "terminals",
        "placements",
        "coverage",
        "iterations",
        "status",
        "generation_s"
    )?;
    say!(
        out,
        "{:<20} {:>6} {:>5} {:>9} {:>10} {:>10.4} {:>10} {:<16} {:>12.3}\n",
        name,
        netlist.block_count(),
        netlist.nets().len(),
        netlist.terminal_count(),
        gen.structure.len(),
        gen.structure.coverage(),
        gen.iterations,
        status,
        elapsed.as_secs_f64()
    )?;
    if gen.stop == StopReason::IterationLimit {
        let _ = writeln!(
            err,
            "warning: iteration limit {} reached at coverage {:.4} (target {})",
            cfg.max_outer_iterations,
            gen.structure.coverage(),
            cfg.coverage_target
        );
    }
    if gen.failed_perturbations > 0 {
        let _ = writeln!(
            err,
            "warning: {} perturbation(s) found no overlap-free layout",
            gen.failed_perturbations
        );
    }
    Ok(())
}

pub struct InstantiateArgs<'a> {
    pub structure: &'a Path,
    pub sizes: SizesArg,
    pub svg: Option<&'a Path>,
    pub config: RunConfig,
}

pub fn cmd_instantiate(args: InstantiateArgs<'_>, out: &mut dyn Write) -> Result<(), CliError> {
    let structure = load_structure(args.structure)?;
    let netlist = structure.netlist();
    let sizes = args.sizes.resolve(netlist)?;
    let start = Instant::now();
    let inst = structure.instantiate(&sizes)?;
    let latency = start.elapsed();
    let p = inst.placement;
    let cost = layout_cost(netlist, &p.coords, &sizes, &args.config.cost).ok();

    let marker = if inst.is_fallback { " (fallback)" } else { "" };
    say!(out, "placement {}{marker}\n", p.id)?;
    say!(out, "cost {}\n", format_cost(cost))?;
    say!(out, "latency_ns {}\n", latency.as_nanos())?;
    say!(
        out,
        "{:<5} {:<16} {:>6} {:>6} {:>6} {:>6}\n",
        "block",
        "name",
        "x",
        "y",
        "w",
        "h"
    )?;
    for (i, b) in netlist.blocks().iter().enumerate() {
        say!(
            out,
            "{:<5} {:<16} {:>6} {:>6} {:>6} {:>6}\n",
            i,
            b.name,
            p.coords[i].x,
            p.coords[i].y,
            sizes[i].w,
            sizes[i].h
        )?;
    }
    if let Some(path) = args.svg {
        let title = format!("placement {}{marker} at {sizes}", p.id);
        write_file(path, &svg::render(netlist, &p.coords, &sizes, &title))?;
    }
    Ok(())
}

pub struct SweepArgs<'a> {
    pub structure: &'a Path,
    /// Block index or name.
    pub block: &'a str,
    pub dimension: Dimension,
    /// Defaults to the block's designer bounds.
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub step: i64,
    /// Defaults to the midpoint of every designer range.
    pub fixed: Option<SizesArg>,
    pub out: &'a Path,
    pub config: RunConfig,
}

fn block_index(netlist: &Netlist, key: &str) -> Result<usize, CliError> {
    if let Ok(i) = key.parse::<usize>() {
        if i < netlist.block_count() {
            return Ok(i);
        }
        return Err(CliError::Usage(format!(
            "block {i} out of range; netlist has {} blocks",
            netlist.block_count()
        )));
    }
    netlist
        .blocks()
        .iter()
        .position(|b| b.name == key)
        .ok_or_else(|| CliError::Usage(format!("no block named `{key}`")))
}

/// Midpoint of every designer range, rounded down.
pub fn midpoint_sizes(netlist: &Netlist) -> SizeVector {
    netlist
        .blocks()
        .iter()
        .map(|b| multiplace::Size::new((b.min_width + b.max_width) / 2, (b.min_height + b.max_height) / 2))
        .collect()
}

pub fn cmd_sweep(args: SweepArgs<'_>, out: &mut dyn Write) -> Result<(), CliError> {
    let structure = load_structure(args.structure)?;
    let netlist = structure.netlist();
    let block = block_index(netlist, args.block)?;
    let bounds = match args.dimension {
        Dimension::Width => netlist.blocks()[block].width_bounds(),
        Dimension::Height => netlist.blocks()[block].height_bounds(),
    };
    let fixed = match &args.fixed {
        Some(s) => s.resolve(netlist)?,
        None => midpoint_sizes(netlist),
    };
    let spec = SweepSpec {
        block,
        dimension: args.dimension,
        from: args.from.unwrap_or(bounds.start),
        to: args.to.unwrap_or(bounds.end),
        step: args.step,
        fixed,
    };
    let sweep = run_sweep(&structure, &spec, &args.config.cost).map_err(|e| match e {
        multiplace::experiments::ExperimentError::Structure(s) => CliError::from(s),
        other => CliError::Usage(other.to_string()),
    })?;
    write_file(args.out, &sweep.to_csv())?;
    let fallback_rows = sweep.rows.iter().filter(|r| r.selected_is_fallback).count();
    say!(
        out,
        "rows {}\nplacements {}\nlowest_cost_selected {:.4}\nfallback_rows {}\n",
        sweep.rows.len(),
        sweep.placement_ids.len(),
        sweep.cheapest_fraction(),
        fallback_rows
    )?;
    Ok(())
}

pub fn cmd_bench(structure: &Path, trials: usize, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let structure = load_structure(structure)?;
    let stats = bench_instantiation(&structure, trials, seed).map_err(|e| CliError::Domain(e.to_string()))?;
    say!(out, "blocks {}\n", structure.netlist().block_count())?;
    say!(out, "placements {}\n", structure.len())?;
    say!(out, "trials {trials}\n")?;
    say!(out, "fallback_hits {}\n", stats.fallback_hits)?;
    say!(out, "min_ns {}\n", stats.min.as_nanos())?;
    say!(out, "median_ns {}\n", stats.median.as_nanos())?;
    say!(out, "p99_ns {}\n", stats.p99.as_nanos())?;
    Ok(())
}

pub fn cmd_validate(
    structure_path: &Path,
    samples: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let structure = load_structure(structure_path)?;
    let mut problems = structure.check_invariants();
    let report = sample_uniqueness(&structure, samples, seed);
    if report.multi_hits > 0 {
        problems.push(format!(
            "{} of {} sampled size vectors hit more than one placement",
            report.multi_hits, samples
        ));
    }
    say!(out, "placements {}\n", structure.len())?;
    say!(out, "coverage {:.6}\n", structure.coverage())?;
    say!(
        out,
        "samples {} single {} uncovered {} multiple {}\n",
        report.samples,
        report.single_hits,
        report.misses,
        report.multi_hits
    )?;
    if problems.is_empty() {
        say!(out, "ok\n")?;
        Ok(())
    } else {
        for p in &problems {
            say!(out, "violation: {p}\n")?;
        }
        Err(CliError::Domain(format!(
            "{}: {} invariant violation(s)",
            structure_path.display(),
            problems.len()
        )))
    }
}
