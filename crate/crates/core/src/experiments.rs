//! Experiment drivers: one-dimensional sweeps, instantiation latency and
//! uniqueness sampling over a structure.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cost::{layout_cost, CostWeights};
use crate::model::{ModelError, Netlist, Size, SizeVector};
use crate::scalar::{Length, Scalar};
use crate::structure::{Dimension, MultiPlacementStructure, StructureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Uniform random size vector within the designer bounds.
pub fn random_sizes<R: Rng + ?Sized>(netlist: &Netlist, rng: &mut R) -> SizeVector {
    netlist
        .blocks()
        .iter()
        .map(|b| {
            Size::new(
                rng.gen_range(b.min_width..=b.max_width),
                rng.gen_range(b.min_height..=b.max_height),
            )
        })
        .collect()
}

/// Varies one dimension of one block with every other dimension fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub block: usize,
    pub dimension: Dimension,
    pub from: Length,
    pub to: Length,
    pub step: Length,
    /// Sizes of every block; the swept entry is overwritten.
    pub fixed: SizeVector,
}

impl SweepSpec {
    pub fn validate(&self, netlist: &Netlist) -> Result<(), ExperimentError> {
        if self.block >= netlist.block_count() {
            return Err(ExperimentError::InvalidSweep(format!(
                "block {} out of range",
                self.block
            )));
        }
        if self.from > self.to || self.step <= 0 {
            return Err(ExperimentError::InvalidSweep(format!(
                "need from <= to and step > 0, got {}..{} step {}",
                self.from, self.to, self.step
            )));
        }
        let b = &netlist.blocks()[self.block];
        let bounds = match self.dimension {
            Dimension::Width => b.width_bounds(),
            Dimension::Height => b.height_bounds(),
        };
        if !bounds.contains(self.from) || !bounds.contains(self.to) {
            return Err(ExperimentError::InvalidSweep(format!(
                "sweep {}..{} leaves block {} {} bounds {bounds}",
                self.from, self.to, self.block, self.dimension
            )));
        }
        netlist.check_sizes(&self.fixed)?;
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = Length> + '_ {
        (self.from..=self.to).step_by(self.step as usize)
    }

    pub fn sizes_at(&self, value: Length) -> SizeVector {
        let mut v = self.fixed.clone();
        match self.dimension {
            Dimension::Width => v[self.block].w = value,
            Dimension::Height => v[self.block].h = value,
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<F> {
    pub value: Length,
    /// Cost of every stored placement at this size vector, in id order;
    /// `None` where the layout is infeasible.
    pub costs: Vec<Option<F>>,
    pub selected_id: usize,
    pub selected_is_fallback: bool,
    pub selected_cost: Option<F>,
}

impl<F: Scalar> SweepRow<F> {
    /// Whether the selection is feasible and no costlier than any feasible
    /// stored alternative (up to a relative tolerance of 1e-9).
    pub fn selected_is_cheapest(&self) -> bool {
        let Some(sel) = self.selected_cost else {
            return false;
        };
        let tol = F::from_f64_lossy(1e-9) * sel.abs().max(F::one());
        self.costs.iter().flatten().all(|&c| sel <= c + tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<F> {
    pub placement_ids: Vec<usize>,
    pub rows: Vec<SweepRow<F>>,
}

impl<F: Scalar> Sweep<F> {
    /// `sweep_value,cost_p<id>...,selected_id,selected_cost`; infeasible cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep_value");
        for id in &self.placement_ids {
            write!(out, ",cost_p{id}").unwrap();
        }
        out.push_str(",selected_id,selected_cost\n");
        let cell = |c: &Option<F>| c.map(|v| v.to_string()).unwrap_or_default();
        for row in &self.rows {
            write!(out, "{}", row.value).unwrap();
            for c in &row.costs {
                write!(out, ",{}", cell(c)).unwrap();
            }
            writeln!(out, ",{},{}", row.selected_id, cell(&row.selected_cost)).unwrap();
        }
        out
    }

    /// Share of rows whose selection is the cheapest feasible option.
    pub fn cheapest_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let good = self.rows.iter().filter(|r| r.selected_is_cheapest()).count();
        good as f64 / self.rows.len() as f64
    }
}

/// Costs every stored placement along the sweep and records which one the
/// structure selects.
pub fn run_sweep<F: Scalar>(
    structure: &MultiPlacementStructure<F>,
    spec: &SweepSpec,
    weights: &CostWeights<F>,
) -> Result<Sweep<F>, ExperimentError> {
    let netlist = structure.netlist();
    spec.validate(netlist)?;
    let placement_ids: Vec<usize> = structure.placements().map(|p| p.id).collect();
    let mut rows = Vec::new();
    for value in spec.values() {
        let v = spec.sizes_at(value);
        let costs = structure
            .placements()
            .map(|p| layout_cost(netlist, &p.coords, &v, weights).ok())
            .collect();
        let inst = structure.instantiate(&v)?;
        let selected_cost = layout_cost(netlist, &inst.placement.coords, &v, weights).ok();
        rows.push(SweepRow {
            value,
            costs,
            selected_id: inst.placement.id,
            selected_is_fallback: inst.is_fallback,
            selected_cost,
        });
    }
    Ok(Sweep { placement_ids, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub samples: Vec<Duration>,
    pub min: Duration,
    pub median: Duration,
    pub p99: Duration,
    pub fallback_hits: usize,
}

/// Times `trials` instantiations of uniformly random in-bounds size vectors.
pub fn bench_instantiation<F: Scalar>(
    structure: &MultiPlacementStructure<F>,
    trials: usize,
    seed: u64,
) -> Result<LatencyStats, ExperimentError> {
    assert!(trials >= 1, "at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<SizeVector> = (0..trials)
        .map(|_| random_sizes(structure.netlist(), &mut rng))
        .collect();
    let mut samples = Vec::with_capacity(trials);
    let mut fallback_hits = 0;
    for v in &inputs {
        let t = Instant::now();
        let inst = structure.instantiate(v)?;
        let dt = t.elapsed();
        std::hint::black_box(inst.placement.id);
        fallback_hits += inst.is_fallback as usize;
        samples.push(dt);
    }
    let mut sorted = samples.clone();
    sorted.sort_unstable();
    let pick = |q: f64| sorted[((q * (trials - 1) as f64).round() as usize).min(trials - 1)];
    Ok(LatencyStats {
        min: sorted[0],
        median: pick(0.5),
        p99: pick(0.99),
        samples,
        fallback_hits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniquenessReport {
    pub samples: usize,
    pub single_hits: usize,
    pub misses: usize,
    pub multi_hits: usize,
}

/// Counts pre-fallback hits for `samples` uniformly random size vectors.
pub fn sample_uniqueness<F: Scalar>(
    structure: &MultiPlacementStructure<F>,
    samples: usize,
    seed: u64,
) -> UniquenessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = UniquenessReport {
        samples,
        single_hits: 0,
        misses: 0,
        multi_hits: 0,
    };
    for _ in 0..samples {
        let v = random_sizes(structure.netlist(), &mut rng);
        match structure.lookup(&v).len() {
            0 => report.misses += 1,
            1 => report.single_hits += 1,
            _ => report.multi_hits += 1,
        }
    }
    report
}
