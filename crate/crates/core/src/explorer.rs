//! Placement explorer: the outer annealing loop that populates a structure.
//!
//! Each iteration takes a placement (random at first, then a perturbation of
//! the last accepted one), expands its size ranges as far as the floorplan
//! allows, hands it to the dimensions-interval optimizer, resolves overlaps
//! and stores it. Storage does not depend on acceptance; acceptance only
//! picks the base for the next perturbation. The loop stops when the stored
//! placements cover `coverage_target` of the size space or the iteration
//! bound is hit.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::anneal::accept_new;
use crate::bdio::{bdio_optimize, AnnealSchedule, BdioError, CostReport};
use crate::cost::{CostError, CostWeights};
use crate::model::{rectangles_overlap, ModelError, Netlist, Placement, Point, Rect};
use crate::scalar::{Length, Scalar};
use crate::structure::{MultiPlacementStructure, StoreOutcome, StructureError};

const BLOCK_ATTEMPTS: usize = 256;
const LAYOUT_ATTEMPTS: usize = 64;
const NUDGE_ATTEMPTS: usize = 64;
const PERTURB_ATTEMPTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplorerError {
    #[error("blocks cannot be placed at minimum size: {0}")]
    SizingInfeasible(String),
    #[error("perturbation found no overlap-free layout")]
    PerturbFailed,
    #[error("invalid explorer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Bdio(#[from] BdioError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Cooling for the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct OuterSchedule<F> {
    /// `None` starts at the first placement's average cost.
    pub initial_temperature: Option<F>,
    pub cooling_factor: F,
}

impl<F: Scalar> Default for OuterSchedule<F> {
    fn default() -> Self {
        Self {
            initial_temperature: None,
            cooling_factor: F::from_f64_lossy(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct ExplorerConfig<F> {
    pub coverage_target: f64,
    pub max_outer_iterations: usize,
    pub outer: OuterSchedule<F>,
    pub inner: AnnealSchedule<F>,
    pub perturb_block_fraction: f64,
    pub expansion_step: Length,
    pub weights: CostWeights<F>,
    pub rng_seed: u64,
}

impl<F: Scalar> Default for ExplorerConfig<F> {
    fn default() -> Self {
        Self {
            coverage_target: 0.6,
            max_outer_iterations: 500,
            outer: OuterSchedule::default(),
            inner: AnnealSchedule::default(),
            perturb_block_fraction: 0.25,
            expansion_step: 1,
            weights: CostWeights::default(),
            rng_seed: 0,
        }
    }
}

impl<F: Scalar> ExplorerConfig<F> {
    pub fn validate(&self) -> Result<(), ExplorerError> {
        let bad = |m: String| Err(ExplorerError::InvalidConfig(m));
        if !(self.coverage_target > 0.0 && self.coverage_target < 1.0) {
            return bad(format!(
                "coverage target must lie in (0, 1), got {}",
                self.coverage_target
            ));
        }
        if self.max_outer_iterations == 0 {
            return bad("max_outer_iterations must be positive".into());
        }
        if let Some(t) = self.outer.initial_temperature {
            if !t.is_finite() || t <= F::zero() {
                return bad(format!("outer initial temperature must be positive, got {t}"));
            }
        }
        let c = self.outer.cooling_factor;
        if !(c > F::zero() && c < F::one()) {
            return bad(format!("outer cooling factor must lie in (0, 1), got {c}"));
        }
        if !(self.perturb_block_fraction > 0.0 && self.perturb_block_fraction <= 1.0) {
            return bad(format!(
                "perturb_block_fraction must lie in (0, 1], got {}",
                self.perturb_block_fraction
            ));
        }
        if self.expansion_step <= 0 {
            return bad("expansion_step must be positive".into());
        }
        self.inner.validate()?;
        self.weights.validate()?;
        Ok(())
    }
}

fn min_rect(netlist: &Netlist, i: usize, at: Point) -> Rect {
    let b = &netlist.blocks()[i];
    Rect::new(at.x, at.y, b.min_width, b.min_height)
}

/// Random overlap-free anchors for every block at minimum size, with ranges
/// set to the minimum sizes.
pub fn select_initial_placement<F: Scalar, R: Rng + ?Sized>(
    netlist: &Netlist,
    rng: &mut R,
) -> Result<Placement<F>, ExplorerError> {
    let (fw, fh) = (netlist.floorplan_width(), netlist.floorplan_height());
    let min_area: i128 = netlist
        .blocks()
        .iter()
        .map(|b| b.min_width as i128 * b.min_height as i128)
        .sum();
    if min_area > fw as i128 * fh as i128 {
        return Err(ExplorerError::SizingInfeasible(format!(
            "minimum block area {min_area} exceeds floorplan area {}",
            fw as i128 * fh as i128
        )));
    }
    'layout: for _ in 0..LAYOUT_ATTEMPTS {
        let mut rects: Vec<Rect> = Vec::with_capacity(netlist.block_count());
        for b in netlist.blocks() {
            let mut placed = None;
            for _ in 0..BLOCK_ATTEMPTS {
                let x = rng.gen_range(0..=fw - b.min_width);
                let y = rng.gen_range(0..=fh - b.min_height);
                let r = Rect::new(x, y, b.min_width, b.min_height);
                if rects.iter().all(|o| !rectangles_overlap(o, &r)) {
                    placed = Some(r);
                    break;
                }
            }
            match placed {
                Some(r) => rects.push(r),
                None => continue 'layout,
            }
        }
        let coords = rects.iter().map(|r| Point::new(r.x, r.y)).collect();
        return Ok(Placement::at_minimum(0, netlist, coords));
    }
    Err(ExplorerError::SizingInfeasible(format!(
        "no overlap-free layout found after {LAYOUT_ATTEMPTS} attempts"
    )))
}

/// Grows range ends round-robin, one `step` at a time, until no block can
/// grow without overlapping another block's maximal rectangle or leaving the
/// floorplan. A step that would pass the designer maximum is clamped to it.
pub fn expand_placement<F: Scalar>(
    netlist: &Netlist,
    placement: &Placement<F>,
    step: Length,
) -> Placement<F> {
    assert!(step > 0, "expansion step must be positive");
    let mut p = placement.clone();
    let n = netlist.block_count();
    let (fw, fh) = (netlist.floorplan_width(), netlist.floorplan_height());
    let mut active = vec![[true; 2]; n];
    let mut rects: Vec<Rect> = (0..n)
        .map(|i| {
            Rect::new(
                p.coords[i].x,
                p.coords[i].y,
                p.width_ranges[i].end,
                p.height_ranges[i].end,
            )
        })
        .collect();
    let mut any = true;
    while any {
        any = false;
        for i in 0..n {
            let b = &netlist.blocks()[i];
            for (axis, limit) in [(0, b.max_width), (1, b.max_height)] {
                if !active[i][axis] {
                    continue;
                }
                let end = if axis == 0 {
                    p.width_ranges[i].end
                } else {
                    p.height_ranges[i].end
                };
                let grown = (end + step).min(limit);
                let mut r = rects[i];
                if axis == 0 {
                    r.w = grown;
                } else {
                    r.h = grown;
                }
                let fits = grown > end
                    && r.within(fw, fh)
                    && (0..n).all(|j| j == i || !rectangles_overlap(&r, &rects[j]));
                if fits {
                    rects[i] = r;
                    if axis == 0 {
                        p.width_ranges[i].end = grown;
                    } else {
                        p.height_ranges[i].end = grown;
                    }
                    any = true;
                } else {
                    active[i][axis] = false;
                }
            }
        }
    }
    p
}

/// `value + offset` wrapped onto `0..domain`.
pub fn wrap_coordinate(value: Length, offset: Length, domain: Length) -> Length {
    (value + offset).rem_euclid(domain)
}

fn random_offset<R: Rng + ?Sized>(rng: &mut R, domain: Length) -> Length {
    if domain <= 1 {
        return 0;
    }
    let magnitude = rng.gen_range(1..domain);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Moves `ceil(fraction * N)` distinct blocks by random non-zero offsets.
///
/// Anchors wrap around the floorplan: a block pushed past one edge re-enters
/// from the opposite one. A moved block that lands on another block at
/// minimum size draws new offsets; the whole perturbation is redrawn if that
/// keeps failing. The result has all ranges reset to the minimum sizes.
pub fn perturb_placement<F: Scalar, R: Rng + ?Sized>(
    netlist: &Netlist,
    placement: &Placement<F>,
    fraction: f64,
    rng: &mut R,
) -> Result<Placement<F>, ExplorerError> {
    let n = netlist.block_count();
    let moves = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let (fw, fh) = (netlist.floorplan_width(), netlist.floorplan_height());
    for _ in 0..PERTURB_ATTEMPTS {
        let mut coords = placement.coords.clone();
        let chosen = sample(rng, n, moves).into_vec();
        let mut ok = true;
        for &i in &chosen {
            let b = &netlist.blocks()[i];
            let (dx_dom, dy_dom) = (fw - b.min_width + 1, fh - b.min_height + 1);
            let origin = Point::new(coords[i].x.min(dx_dom - 1), coords[i].y.min(dy_dom - 1));
            let mut placed = false;
            for _ in 0..NUDGE_ATTEMPTS {
                let at = Point::new(
                    wrap_coordinate(origin.x, random_offset(rng, dx_dom), dx_dom),
                    wrap_coordinate(origin.y, random_offset(rng, dy_dom), dy_dom),
                );
                let r = min_rect(netlist, i, at);
                let clear = (0..n)
                    .filter(|&j| j != i)
                    .all(|j| !rectangles_overlap(&r, &min_rect(netlist, j, coords[j])));
                if clear {
                    coords[i] = at;
                    placed = true;
                    break;
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Placement::at_minimum(placement.id, netlist, coords));
        }
    }
    Err(ExplorerError::PerturbFailed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CoverageReached,
    IterationLimit,
}

/// Trace of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord<F> {
    pub iteration: usize,
    /// Id given to the candidate before overlap resolution.
    pub candidate_id: usize,
    pub coords: Vec<Point>,
    pub report: CostReport<F>,
    pub store: StoreOutcome,
    pub accepted: bool,
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct Generation<F> {
    pub structure: MultiPlacementStructure<F>,
    pub iterations: usize,
    pub stop: StopReason,
    /// Iterations whose perturbation failed and were skipped.
    pub failed_perturbations: usize,
    pub history: Vec<IterationRecord<F>>,
}

/// Builds a multi-placement structure for `netlist`.
pub fn generate<F: Scalar>(
    netlist: &Netlist,
    cfg: &ExplorerConfig<F>,
) -> Result<Generation<F>, ExplorerError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut structure = MultiPlacementStructure::new(netlist.clone());
    let mut accepted: Option<Placement<F>> = None;
    let mut temperature: Option<F> = cfg.outer.initial_temperature;
    let mut history = Vec::new();
    let mut failed_perturbations = 0;
    let mut stop = StopReason::IterationLimit;
    let mut iterations = 0;

    for iteration in 0..cfg.max_outer_iterations {
        iterations = iteration + 1;
        let base = match &accepted {
            None => select_initial_placement::<F, _>(netlist, &mut rng)?,
            Some(a) => match perturb_placement(netlist, a, cfg.perturb_block_fraction, &mut rng) {
                Ok(p) => p,
                Err(ExplorerError::PerturbFailed) => {
                    failed_perturbations += 1;
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        let expanded = expand_placement(netlist, &base, cfg.expansion_step);
        let inner_seed = rng.gen::<u64>();
        let out = bdio_optimize(netlist, &expanded, &cfg.weights, &cfg.inner, inner_seed)?;
        let candidate_id = structure.allocate_id();
        let candidate = Placement {
            id: candidate_id,
            coords: expanded.coords,
            width_ranges: out.width_ranges,
            height_ranges: out.height_ranges,
            best_cost: out.report.best_cost,
            average_cost: out.report.average_cost,
            best_sizes: out.report.best_sizes.clone(),
        };
        let store = structure.resolve_and_store(candidate.clone())?;

        let t = *temperature.get_or_insert_with(|| {
            let t0 = candidate.average_cost;
            if t0 > F::zero() && t0.is_finite() {
                t0
            } else {
                F::one()
            }
        });
        let take = match &accepted {
            None => true,
            Some(a) => accept_new(a.average_cost, candidate.average_cost, t, &mut rng),
        };
        let coords = candidate.coords.clone();
        if take {
            accepted = Some(candidate);
        }
        temperature = Some(t * cfg.outer.cooling_factor);

        let coverage = structure.coverage();
        history.push(IterationRecord {
            iteration,
            candidate_id,
            coords,
            report: out.report,
            store,
            accepted: take,
            coverage,
        });
        if coverage >= cfg.coverage_target {
            stop = StopReason::CoverageReached;
            break;
        }
    }

    let mut fallback = match accepted {
        Some(a) => a,
        // every perturbation failed before anything was evaluated; cannot happen
        // on the first iteration, which never perturbs
        None => select_initial_placement(netlist, &mut rng)?,
    };
    fallback.id = structure.allocate_id();
    for (i, b) in netlist.blocks().iter().enumerate() {
        fallback.width_ranges[i] = b.width_bounds();
        fallback.height_ranges[i] = b.height_bounds();
    }
    structure.set_fallback(fallback)?;

    Ok(Generation {
        structure,
        iterations,
        stop,
        failed_perturbations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{layout_feasible, Block, Interval, SizeVector};

    fn blocks(n: usize, lo: Length, hi: Length) -> Vec<Block> {
        (0..n)
            .map(|i| Block::new(format!("b{i}"), lo, hi, lo, hi).unwrap())
            .collect()
    }

    #[test]
    fn initial_placement_single_block() {
        let n = Netlist::new(blocks(1, 4, 40), vec![], 100, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: Placement<f64> = select_initial_placement(&n, &mut rng).unwrap();
        assert!(p.coords[0].x <= 96 && p.coords[0].y <= 96);
        assert_eq!(p.width_ranges, vec![Interval::singleton(4)]);
        assert_eq!(p.height_ranges, vec![Interval::singleton(4)]);
    }

    #[test]
    fn initial_placement_rejects_overfull_floorplan() {
        let n = Netlist::new(blocks(5, 10, 10), vec![], 20, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r: Result<Placement<f64>, _> = select_initial_placement(&n, &mut rng);
        assert!(matches!(r, Err(ExplorerError::SizingInfeasible(_))));
    }

    #[test]
    fn initial_placement_is_seeded() {
        let n = Netlist::new(blocks(6, 4, 40), vec![], 200, 200).unwrap();
        let a: Placement<f64> = select_initial_placement(&n, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b: Placement<f64> = select_initial_placement(&n, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(layout_feasible(&n, &a.coords, &n.min_sizes()));
    }

    #[test]
    fn expansion_reaches_designer_maxima_when_unobstructed() {
        let n = Netlist::new(blocks(1, 4, 40), vec![], 100, 100).unwrap();
        let p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(0, 0)]);
        for step in [1, 3, 7] {
            let e = expand_placement(&n, &p, step);
            assert_eq!(e.width_ranges[0], Interval::new(4, 40));
            assert_eq!(e.height_ranges[0], Interval::new(4, 40));
        }
    }

    #[test]
    fn abutted_blocks_grow_to_bounds() {
        let n = Netlist::new(blocks(2, 4, 40), vec![], 80, 40).unwrap();
        let p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(0, 0), Point::new(40, 0)]);
        let e = expand_placement(&n, &p, 1);
        for i in 0..2 {
            assert_eq!(e.width_ranges[i], Interval::new(4, 40));
            assert_eq!(e.height_ranges[i], Interval::new(4, 40));
        }
        assert!(layout_feasible(&n, &e.coords, &e.max_sizes()));
    }

    #[test]
    fn wall_caps_expansion() {
        let n = Netlist::new(blocks(1, 4, 40), vec![], 100, 100).unwrap();
        let p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(90, 0)]);
        let e = expand_placement(&n, &p, 1);
        assert_eq!(e.width_ranges[0], Interval::new(4, 10));
        assert_eq!(e.height_ranges[0], Interval::new(4, 40));
    }

    #[test]
    fn expansion_stops_at_neighbours() {
        let n = Netlist::new(blocks(2, 4, 40), vec![], 200, 200).unwrap();
        let p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(0, 0), Point::new(20, 10)]);
        let e = expand_placement(&n, &p, 1);
        assert!(layout_feasible(&n, &e.coords, &e.max_sizes()));
        // neither block can grow any further in any dimension
        for i in 0..2 {
            for axis in 0..2 {
                let mut q = e.clone();
                let r = if axis == 0 {
                    &mut q.width_ranges[i]
                } else {
                    &mut q.height_ranges[i]
                };
                if r.end < 40 {
                    r.end += 1;
                    assert!(!layout_feasible(&n, &q.coords, &q.max_sizes()));
                }
            }
        }
    }

    #[test]
    fn wrapping_is_toroidal() {
        assert_eq!(wrap_coordinate(90, 15, 97), 8);
        assert_eq!(wrap_coordinate(3, -5, 97), 95);
        assert_eq!(wrap_coordinate(3, 4, 97), 7);
    }

    #[test]
    fn full_perturbation_moves_every_block() {
        let n = Netlist::new(blocks(5, 4, 40), vec![], 200, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Placement<f64> = select_initial_placement(&n, &mut rng).unwrap();
        let q = perturb_placement(&n, &p, 1.0, &mut rng).unwrap();
        for i in 0..5 {
            assert_ne!(p.coords[i], q.coords[i]);
        }
        assert!(layout_feasible(&n, &q.coords, &n.min_sizes()));
        assert_eq!(q.width_ranges, p.width_ranges);
    }

    #[test]
    fn partial_perturbation_moves_requested_count() {
        let n = Netlist::new(blocks(8, 4, 40), vec![], 200, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p: Placement<f64> = select_initial_placement(&n, &mut rng).unwrap();
        let q = perturb_placement(&n, &p, 0.25, &mut rng).unwrap();
        let moved = (0..8).filter(|&i| p.coords[i] != q.coords[i]).count();
        assert_eq!(moved, 2);
        let again = perturb_placement(&n, &p, 0.25, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let again2 = perturb_placement(&n, &p, 0.25, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(again, again2);
    }

    #[test]
    fn single_block_generation_covers_everything() {
        let n = Netlist::new(blocks(1, 4, 40), vec![], 100, 100).unwrap();
        let cfg = ExplorerConfig::<f64> {
            coverage_target: 0.5,
            inner: AnnealSchedule {
                initial_temperature: Some(1e-9),
                ..Default::default()
            },
            weights: CostWeights::new(0.0, 1.0).unwrap(),
            ..Default::default()
        };
        let g = generate(&n, &cfg).unwrap();
        // the block is anywhere; only positions leaving 40 units free expand fully
        let full = g.history[0].coords[0].x <= 60 && g.history[0].coords[0].y <= 60;
        if full {
            assert_eq!(g.iterations, 1);
            assert_eq!(g.structure.len(), 1);
            assert_eq!(g.structure.coverage(), 1.0);
        }
        assert_eq!(g.stop, StopReason::CoverageReached);
        assert!(g.structure.check_invariants().is_empty());
        let fb = g.structure.fallback().unwrap();
        assert_eq!(fb.width_ranges[0], Interval::new(4, 40));
    }

    #[test]
    fn generation_is_seeded_and_sound() {
        let n = Netlist::new(blocks(3, 4, 30), vec![], 120, 120).unwrap();
        let cfg = ExplorerConfig::<f64> {
            max_outer_iterations: 30,
            inner: AnnealSchedule {
                iterations: 100,
                ..Default::default()
            },
            rng_seed: 77,
            ..Default::default()
        };
        let a = generate(&n, &cfg).unwrap();
        let b = generate(&n, &cfg).unwrap();
        assert_eq!(a.structure.to_json(), b.structure.to_json());
        assert!(a.structure.check_invariants().is_empty());
        match a.stop {
            StopReason::CoverageReached => assert!(a.structure.coverage() >= cfg.coverage_target),
            StopReason::IterationLimit => assert_eq!(a.iterations, 30),
        }
        // every stored placement traces back to an optimizer run on its coordinates
        for p in a.structure.placements() {
            assert!(a.history.iter().any(|r| r.coords == p.coords
                && r.report.best_cost == p.best_cost
                && r.report.average_cost == p.average_cost));
        }
        let v = SizeVector::new(n.min_sizes().0);
        assert!(a.structure.instantiate(&v).is_ok());
    }

    #[test]
    fn config_is_validated() {
        let bad = ExplorerConfig::<f64> {
            coverage_target: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExplorerConfig::<f64> {
            expansion_step: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(ExplorerConfig::<f32>::default().validate().is_ok());
    }
}
