//! Block dimensions-interval optimizer.
//!
//! Given a placement with fixed coordinates, anneals over block sizes inside
//! the placement's ranges, then tightens the ranges around the best sizes
//! found. The tighter the spread between average and best cost, the less the
//! ranges shrink.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anneal::accept_new;
use crate::cost::{layout_cost_unchecked, CostWeights};
use crate::model::{layout_feasible, Interval, Netlist, Placement, SizeVector};
use crate::scalar::{Length, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BdioError {
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(String),
    #[error("placement is infeasible even at its minimum sizes")]
    Infeasible,
    #[error("best cost {best} exceeds average cost {average}")]
    CostOrder { best: f64, average: f64 },
    #[error("best size of block {block} lies outside its range")]
    BestOutsideRange { block: usize },
    #[error("expected {expected} ranges, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct AnnealSchedule<F> {
    /// `None` starts at the cost of the initial state.
    pub initial_temperature: Option<F>,
    pub cooling_factor: F,
    pub iterations: usize,
    /// Share of the free dimensions perturbed per move, and the step bound as
    /// a share of each range's width.
    pub perturb_fraction: F,
}

impl<F: Scalar> Default for AnnealSchedule<F> {
    fn default() -> Self {
        Self {
            initial_temperature: None,
            cooling_factor: F::from_f64_lossy(0.95),
            iterations: 1000,
            perturb_fraction: F::from_f64_lossy(0.2),
        }
    }
}

impl<F: Scalar> AnnealSchedule<F> {
    pub fn validate(&self) -> Result<(), BdioError> {
        if let Some(t) = self.initial_temperature {
            if !t.is_finite() || t <= F::zero() {
                return Err(BdioError::InvalidSchedule(format!(
                    "initial temperature must be positive, got {t}"
                )));
            }
        }
        if !(self.cooling_factor > F::zero() && self.cooling_factor < F::one()) {
            return Err(BdioError::InvalidSchedule(format!(
                "cooling factor must lie in (0, 1), got {}",
                self.cooling_factor
            )));
        }
        if self.iterations == 0 {
            return Err(BdioError::InvalidSchedule("iterations must be positive".into()));
        }
        if !(self.perturb_fraction > F::zero() && self.perturb_fraction <= F::one()) {
            return Err(BdioError::InvalidSchedule(format!(
                "perturb fraction must lie in (0, 1], got {}",
                self.perturb_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport<F> {
    pub best_cost: F,
    pub average_cost: F,
    pub best_sizes: SizeVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BdioOutcome<F> {
    pub width_ranges: Vec<Interval>,
    pub height_ranges: Vec<Interval>,
    pub report: CostReport<F>,
    /// Proposals rejected for infeasibility.
    pub infeasible_proposals: usize,
}

fn shrink<F: Scalar>(range: Interval, best: Length, factor: F) -> Interval {
    let b = F::from_len(best);
    let lo = b - factor * F::from_len(best - range.start);
    let hi = b + factor * F::from_len(range.end - best);
    let lo = lo.ceil().to_i64().unwrap_or(range.start).max(range.start);
    let hi = hi.floor().to_i64().unwrap_or(range.end).min(range.end);
    Interval::new(lo.min(best), hi.max(best))
}

/// Shrinks every range around the best sizes by `best_cost / average_cost`.
///
/// Each side of a range keeps that fraction of its distance to the best
/// value, rounded inward, so the result is contained in the input and still
/// contains the best value. Equal costs leave the ranges unchanged.
pub fn optimize_ranges<F: Scalar>(
    width_ranges: &[Interval],
    height_ranges: &[Interval],
    best_sizes: &SizeVector,
    best_cost: F,
    average_cost: F,
) -> Result<(Vec<Interval>, Vec<Interval>), BdioError> {
    let n = best_sizes.len();
    for got in [width_ranges.len(), height_ranges.len()] {
        if got != n {
            return Err(BdioError::LengthMismatch { expected: n, got });
        }
    }
    if best_cost > average_cost {
        return Err(BdioError::CostOrder {
            best: best_cost.to_f64_lossy(),
            average: average_cost.to_f64_lossy(),
        });
    }
    for (i, s) in best_sizes.iter().enumerate() {
        if !width_ranges[i].contains(s.w) || !height_ranges[i].contains(s.h) {
            return Err(BdioError::BestOutsideRange { block: i });
        }
    }
    let factor = if average_cost > F::zero() {
        (best_cost / average_cost).max(F::zero()).min(F::one())
    } else {
        F::one()
    };
    let widths = width_ranges
        .iter()
        .zip(best_sizes.iter())
        .map(|(r, s)| shrink(*r, s.w, factor))
        .collect();
    let heights = height_ranges
        .iter()
        .zip(best_sizes.iter())
        .map(|(r, s)| shrink(*r, s.h, factor))
        .collect();
    Ok((widths, heights))
}

#[derive(Clone, Copy)]
enum Axis {
    W,
    H,
}

/// Anneals block sizes inside `placement`'s ranges and tightens the ranges.
///
/// Starts from the minimum of every range. Each move perturbs a random
/// subset of the non-degenerate dimensions by a uniform integer step clamped
/// into the range; infeasible proposals are rejected without being costed.
/// The average is taken over accepted states, including the initial one.
pub fn bdio_optimize<F: Scalar>(
    netlist: &Netlist,
    placement: &Placement<F>,
    weights: &CostWeights<F>,
    schedule: &AnnealSchedule<F>,
    seed: u64,
) -> Result<BdioOutcome<F>, BdioError> {
    schedule.validate()?;
    let n = netlist.block_count();
    if placement.block_count() != n {
        return Err(BdioError::LengthMismatch {
            expected: n,
            got: placement.block_count(),
        });
    }
    let coords = &placement.coords;
    let mut current = placement.min_sizes();
    if !layout_feasible(netlist, coords, &current) {
        return Err(BdioError::Infeasible);
    }
    let mut current_cost = layout_cost_unchecked(netlist, coords, &current, weights);
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut sum = current_cost;
    let mut accepted = 1usize;
    let mut infeasible = 0usize;

    let free: Vec<(usize, Axis, Interval)> = (0..n)
        .flat_map(|i| {
            [
                (i, Axis::W, placement.width_ranges[i]),
                (i, Axis::H, placement.height_ranges[i]),
            ]
        })
        .filter(|(_, _, r)| r.end > r.start)
        .collect();

    if !free.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frac = schedule.perturb_fraction;
        let picks = (frac * F::from_usize(free.len()).unwrap())
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .clamp(1, free.len());
        let mut temperature = schedule.initial_temperature.unwrap_or(current_cost);
        if !temperature.is_finite() || temperature <= F::zero() {
            temperature = F::one();
        }
        for _ in 0..schedule.iterations {
            let mut candidate = current.clone();
            for k in sample(&mut rng, free.len(), picks).into_iter() {
                let (i, axis, range) = free[k];
                let bound = (frac * F::from_len(range.end - range.start))
                    .ceil()
                    .to_i64()
                    .unwrap_or(1)
                    .max(1);
                let step = rng.gen_range(-bound..=bound);
                let slot = match axis {
                    Axis::W => &mut candidate[i].w,
                    Axis::H => &mut candidate[i].h,
                };
                *slot = (*slot + step).clamp(range.start, range.end);
            }
            if !layout_feasible(netlist, coords, &candidate) {
                infeasible += 1;
                temperature = temperature * schedule.cooling_factor;
                continue;
            }
            let cost = layout_cost_unchecked(netlist, coords, &candidate, weights);
            if cost < best_cost {
                best_cost = cost;
                best = candidate.clone();
            }
            if accept_new(current_cost, cost, temperature, &mut rng) {
                current = candidate;
                current_cost = cost;
                sum = sum + cost;
                accepted += 1;
            }
            temperature = temperature * schedule.cooling_factor;
        }
    }

    let average = (sum / F::from_usize(accepted).unwrap()).max(best_cost);
    let (width_ranges, height_ranges) = optimize_ranges(
        &placement.width_ranges,
        &placement.height_ranges,
        &best,
        best_cost,
        average,
    )?;
    Ok(BdioOutcome {
        width_ranges,
        height_ranges,
        report: CostReport {
            best_cost,
            average_cost: average,
            best_sizes: best,
        },
        infeasible_proposals: infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::layout_cost;
    use crate::model::{Block, Point, Size};
    use proptest::prelude::*;

    #[test]
    fn optimize_ranges_examples() {
        let iv = |a, b| Interval::new(a, b);
        let best = SizeVector::new(vec![Size::new(10, 10)]);
        // equal costs: unchanged
        let (w, h) = optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 7.0, 7.0).unwrap();
        assert_eq!((w[0], h[0]), (iv(5, 15), iv(3, 20)));
        // factor 0.5: ceil(10 - 2.5) = 8, floor(10 + 2.5) = 12
        let (w, _) = optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 100.0, 200.0).unwrap();
        assert_eq!(w[0], iv(8, 12));
        // f32 agrees
        let (w, _) = optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 100.0f32, 200.0f32).unwrap();
        assert_eq!(w[0], iv(8, 12));
        // vanishing factor collapses to the best value
        let (w, h) = optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 1e-12, 1e12).unwrap();
        assert_eq!((w[0], h[0]), (iv(10, 10), iv(10, 10)));
        // zero average keeps the ranges
        let (w, _) = optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 0.0, 0.0).unwrap();
        assert_eq!(w[0], iv(5, 15));
    }

    #[test]
    fn optimize_ranges_rejects_bad_inputs() {
        let iv = |a, b| Interval::new(a, b);
        let best = SizeVector::new(vec![Size::new(30, 10)]);
        assert_eq!(
            optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 1.0, 2.0),
            Err(BdioError::BestOutsideRange { block: 0 })
        );
        let best = SizeVector::new(vec![Size::new(10, 10)]);
        assert!(matches!(
            optimize_ranges(&[iv(5, 15)], &[iv(3, 20)], &best, 3.0, 2.0),
            Err(BdioError::CostOrder { .. })
        ));
    }

    proptest! {
        #[test]
        fn shrink_contains_best(
            start in 1i64..50, len in 0i64..60, at in 0.0f64..1.0,
            best_cost in 0.0f64..1e4, spread in 0.0f64..1e4,
        ) {
            let r = Interval::new(start, start + len);
            let b = start + (at * len as f64).round() as i64;
            let sizes = SizeVector::new(vec![Size::new(b, b)]);
            let (w, h) = optimize_ranges(&[r], &[r], &sizes, best_cost, best_cost + spread).unwrap();
            for out in [w[0], h[0]] {
                prop_assert!(r.contains_interval(&out));
                prop_assert!(out.contains(b));
            }
        }
    }

    fn one_block(fw: Length) -> Netlist {
        let blocks = vec![Block::new("a", 3, 20, 4, 20).unwrap()];
        Netlist::new(blocks, vec![], fw, fw).unwrap()
    }

    fn full_placement(n: &Netlist, coords: Vec<Point>) -> Placement<f64> {
        let mut p = Placement::at_minimum(0, n, coords);
        for (i, b) in n.blocks().iter().enumerate() {
            p.width_ranges[i] = b.width_bounds();
            p.height_ranges[i] = b.height_bounds();
        }
        p
    }

    #[test]
    fn area_only_single_block_finds_minimum() {
        let n = one_block(40);
        let p = full_placement(&n, vec![Point::new(0, 0)]);
        let w = CostWeights::new(0.0, 1.0).unwrap();
        let out = bdio_optimize(&n, &p, &w, &AnnealSchedule::default(), 7).unwrap();
        assert_eq!(out.report.best_sizes, SizeVector::new(vec![Size::new(3, 4)]));
        assert_eq!(out.report.best_cost, 12.0);
        assert!(out.report.best_cost <= out.report.average_cost);
        assert!(out.width_ranges[0].contains(3));
    }

    #[test]
    fn singleton_ranges_report_single_layout() {
        let n = one_block(40);
        let mut p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(2, 2)]);
        p.width_ranges[0] = Interval::singleton(9);
        p.height_ranges[0] = Interval::singleton(5);
        let out = bdio_optimize(&n, &p, &CostWeights::default(), &AnnealSchedule::default(), 1).unwrap();
        assert_eq!(out.report.best_cost, 45.0);
        assert_eq!(out.report.average_cost, 45.0);
        assert_eq!(out.width_ranges[0], Interval::singleton(9));
    }

    #[test]
    fn infeasible_minimum_is_an_error() {
        let n = one_block(40);
        let p = Placement::<f64>::at_minimum(0, &n, vec![Point::new(39, 0)]);
        assert_eq!(
            bdio_optimize(&n, &p, &CostWeights::default(), &AnnealSchedule::default(), 1),
            Err(BdioError::Infeasible)
        );
    }

    #[test]
    fn deterministic_for_seed() {
        let n = one_block(40);
        let p = full_placement(&n, vec![Point::new(0, 0)]);
        let s = AnnealSchedule::default();
        let a = bdio_optimize(&n, &p, &CostWeights::default(), &s, 42).unwrap();
        let b = bdio_optimize(&n, &p, &CostWeights::default(), &s, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report.average_cost.to_bits(), b.report.average_cost.to_bits());
    }

    #[test]
    fn infeasible_proposals_are_rejected() {
        // two blocks whose ranges collide at their maxima
        let blocks = vec![
            Block::new("a", 2, 10, 2, 10).unwrap(),
            Block::new("b", 2, 10, 2, 10).unwrap(),
        ];
        let n = Netlist::new(blocks, vec![], 30, 30).unwrap();
        let p = full_placement(&n, vec![Point::new(0, 0), Point::new(5, 0)]);
        let out = bdio_optimize(&n, &p, &CostWeights::default(), &AnnealSchedule::default(), 3).unwrap();
        assert!(out.infeasible_proposals > 0);
        assert!(layout_feasible(&n, &p.coords, &out.report.best_sizes));
    }

    #[test]
    fn schedule_is_validated() {
        let bad = AnnealSchedule::<f64> {
            cooling_factor: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealSchedule::<f64> {
            perturb_fraction: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealSchedule::<f64> {
            initial_temperature: Some(-1.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn two_block_best_is_near_exhaustive_optimum() {
        let (n, p, w) = crate::benchsuite::two_block_instance().unwrap();
        let mut optimum = f64::INFINITY;
        for w0 in 2..=12 {
            for h0 in 3..=11 {
                for w1 in 4..=10 {
                    for h1 in 2..=9 {
                        let v = SizeVector::new(vec![Size::new(w0, h0), Size::new(w1, h1)]);
                        if let Ok(c) = layout_cost(&n, &p.coords, &v, &w) {
                            optimum = optimum.min(c);
                        }
                    }
                }
            }
        }
        let schedule = AnnealSchedule {
            iterations: 2000,
            ..Default::default()
        };
        let out = bdio_optimize(&n, &p, &w, &schedule, 0).unwrap();
        assert!(
            out.report.best_cost <= optimum * 1.05,
            "{} vs {optimum}",
            out.report.best_cost
        );
    }
}
