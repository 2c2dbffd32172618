//! Benchmark fixtures.
//!
//! Synthetic netlists reproducing the block, net and terminal counts of the
//! published test circuits. Only the counts are known for those circuits, so
//! the geometry is synthesized: every block spans `[4, 40]` grid units in
//! both dimensions on a 200x200 floorplan, and pins sit on a quarter-unit
//! grid of block-relative offsets.
//!
//! Also holds the small hand-built instances the test suites share.

use thiserror::Error;

use crate::cost::CostWeights;
use crate::model::{Block, Interval, ModelError, Net, Netlist, Pin, Placement, Point, Size, SizeVector};
use crate::structure::{MultiPlacementStructure, StructureError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("fixture {name}: {source}")]
    Parse { name: String, source: serde_json::Error },
    #[error("fixture {name}: expected {expected} {what}, found {found}")]
    CountMismatch {
        name: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unknown benchmark `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCircuit {
    pub name: &'static str,
    pub netlist: Netlist,
    pub declared_blocks: usize,
    pub declared_nets: usize,
    pub declared_terminals: usize,
}

struct Fixture {
    name: &'static str,
    blocks: usize,
    nets: usize,
    terminals: usize,
    json: &'static str,
}

macro_rules! fixture {
    ($name:literal, $b:expr, $n:expr, $t:expr) => {
        Fixture {
            name: $name,
            blocks: $b,
            nets: $n,
            terminals: $t,
            json: include_str!(concat!("../benchmarks/v1/", $name, ".json")),
        }
    };
}

const FIXTURES: &[Fixture] = &[
    fixture!("circ01", 4, 4, 12),
    fixture!("circ02", 6, 4, 18),
    fixture!("circ06", 6, 4, 18),
    fixture!("two_stage_opamp", 5, 9, 22),
    fixture!("single_ended_opamp", 9, 14, 32),
    fixture!("mixer", 8, 6, 15),
    fixture!("circ08", 8, 8, 24),
    fixture!("tso_cascode", 21, 36, 46),
    fixture!("benchmark24", 24, 48, 48),
];

fn load(f: &Fixture) -> Result<BenchmarkCircuit, BenchError> {
    let netlist: Netlist = serde_json::from_str(f.json).map_err(|source| BenchError::Parse {
        name: f.name.into(),
        source,
    })?;
    let counts = [
        ("blocks", f.blocks, netlist.block_count()),
        ("nets", f.nets, netlist.nets().len()),
        ("terminals", f.terminals, netlist.terminal_count()),
    ];
    for (what, expected, found) in counts {
        if expected != found {
            return Err(BenchError::CountMismatch {
                name: f.name.into(),
                what,
                expected,
                found,
            });
        }
    }
    Ok(BenchmarkCircuit {
        name: f.name,
        netlist,
        declared_blocks: f.blocks,
        declared_nets: f.nets,
        declared_terminals: f.terminals,
    })
}

/// All fixtures, in table order.
pub fn load_benchmarks() -> Result<Vec<BenchmarkCircuit>, BenchError> {
    FIXTURES.iter().map(load).collect()
}

pub fn benchmark(name: &str) -> Result<BenchmarkCircuit, BenchError> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| BenchError::Unknown(name.into()))
        .and_then(load)
}

pub fn benchmark_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|f| f.name)
}

/// Two blocks joined by one net, at fixed anchors, with full designer ranges.
///
/// Small enough (11·9·7·8 size vectors) to enumerate exhaustively. The
/// wirelength term pulls the left block wide, so the optimum is not the
/// minimum-size corner.
pub fn two_block_instance() -> Result<(Netlist, Placement<f64>, CostWeights<f64>), ModelError> {
    let blocks = vec![
        Block::new("left", 2, 12, 3, 11)?,
        Block::new("right", 4, 10, 2, 9)?,
    ];
    let nets = vec![Net::new(vec![Pin::at(0, 1.0, 0.2), Pin::at(1, 0.0, 0.9)])];
    let netlist = Netlist::new(blocks, nets, 40, 40)?;
    let mut p = Placement::at_minimum(0, &netlist, vec![Point::new(0, 10), Point::new(14, 4)]);
    for (i, b) in netlist.blocks().iter().enumerate() {
        p.width_ranges[i] = b.width_bounds();
        p.height_ranges[i] = b.height_bounds();
    }
    let weights = CostWeights::new(3.0, 0.05).expect("valid weights");
    Ok((netlist, p, weights))
}

/// Two-placement structure over two blocks for the width sweep of block 0.
///
/// Block 0 is swept; block 1 is fixed at 10x10 and block 0's height at 10.
/// Placement 1 stacks block 1 on top of block 0 (area `20 * w0`); placement
/// 0 puts block 1 to the right with a one-unit gap (area 410). Under area
/// weight only, stacking is strictly cheaper for widths `[10, 20]` and the
/// side-by-side layout for `[21, 30]`, and the stored ranges are split there.
/// Both layouts are feasible across the whole sweep.
pub fn sweep_fixture() -> Result<MultiPlacementStructure<f64>, StructureError> {
    let blocks = vec![
        Block::new("swept", 10, 30, 10, 10)?,
        Block::new("partner", 10, 10, 10, 10)?,
    ];
    let nets = vec![Net::new(vec![Pin::centered(0), Pin::centered(1)])];
    let netlist = Netlist::new(blocks, nets, 60, 60)?;
    let mut s = MultiPlacementStructure::new(netlist);
    let fixed = |w0| SizeVector::new(vec![Size::new(w0, 10), Size::new(10, 10)]);
    s.store_placement(Placement {
        id: 0,
        coords: vec![Point::new(0, 0), Point::new(31, 0)],
        width_ranges: vec![Interval::new(21, 30), Interval::singleton(10)],
        height_ranges: vec![Interval::singleton(10), Interval::singleton(10)],
        best_cost: 410.0,
        average_cost: 410.0,
        best_sizes: fixed(21),
    })?;
    s.store_placement(Placement {
        id: 1,
        coords: vec![Point::new(0, 0), Point::new(0, 10)],
        width_ranges: vec![Interval::new(10, 20), Interval::singleton(10)],
        height_ranges: vec![Interval::singleton(10), Interval::singleton(10)],
        best_cost: 200.0,
        average_cost: 300.0,
        best_sizes: fixed(10),
    })?;
    Ok(s)
}

/// Weights the sweep fixture's ownership split is built for.
pub fn sweep_fixture_weights() -> CostWeights<f64> {
    CostWeights::new(0.0, 1.0).expect("valid weights")
}
