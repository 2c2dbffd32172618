//! The multi-placement structure.
//!
//! Every block owns a width row and a height row ([`DimensionRow`]). A size
//! vector is mapped to a placement by looking up each of its `2N` values in
//! the matching row and intersecting the resulting placement sets. Stored
//! placements never jointly overlap, so the intersection holds at most one
//! placement; an empty intersection maps to the fallback placement.

mod file;
mod resolve;
mod row;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{ModelError, Netlist, Placement, SizeVector};
use crate::scalar::Scalar;

pub use file::FORMAT_VERSION;
pub use resolve::{jointly_overlap, resolve_overlap, Dimension, Resolution};
pub use row::{DimensionRow, IntervalEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("structure is corrupted: size vector maps to placements {ids:?}")]
    Corrupted { ids: Vec<usize> },
    #[error("no stored placement covers the size vector and there is no fallback")]
    NoPlacement,
    #[error("placement {id} jointly overlaps stored placements {with:?}")]
    JointOverlap { id: usize, with: Vec<usize> },
    #[error("placement id {0} is already stored")]
    DuplicateId(usize),
    #[error("placements {a} and {b} do not jointly overlap")]
    NotOverlapping { a: usize, b: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported structure format version {0}")]
    UnsupportedVersion(u32),
}

/// Result of [`MultiPlacementStructure::instantiate`].
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a, F> {
    pub placement: &'a Placement<F>,
    pub is_fallback: bool,
}

/// What [`MultiPlacementStructure::resolve_and_store`] did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreOutcome {
    /// Ids under which (pieces of) the candidate were stored.
    pub stored: Vec<usize>,
    /// Previously stored placements that were shrunk.
    pub shrunk: Vec<usize>,
    /// Previously stored placements that were shrunk away entirely.
    pub removed: Vec<usize>,
    /// New ids created by forking previously stored placements.
    pub forked: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MultiPlacementStructure<F> {
    netlist: Netlist,
    width_rows: Vec<DimensionRow>,
    height_rows: Vec<DimensionRow>,
    placements: BTreeMap<usize, Placement<F>>,
    fallback: Option<Placement<F>>,
    next_id: usize,
}

impl<F: PartialEq> PartialEq for MultiPlacementStructure<F> {
    // `next_id` is bookkeeping and not part of structural identity.
    fn eq(&self, other: &Self) -> bool {
        self.netlist == other.netlist
            && self.width_rows == other.width_rows
            && self.height_rows == other.height_rows
            && self.placements == other.placements
            && self.fallback == other.fallback
    }
}

impl<F: Scalar> MultiPlacementStructure<F> {
    pub fn new(netlist: Netlist) -> Self {
        let n = netlist.block_count();
        Self {
            netlist,
            width_rows: vec![DimensionRow::new(); n],
            height_rows: vec![DimensionRow::new(); n],
            placements: BTreeMap::new(),
            fallback: None,
            next_id: 0,
        }
    }

    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Stored placements in ascending id order.
    pub fn placements(&self) -> impl Iterator<Item = &Placement<F>> + '_ {
        self.placements.values()
    }

    pub fn placement(&self, id: usize) -> Option<&Placement<F>> {
        self.placements.get(&id)
    }

    pub fn fallback(&self) -> Option<&Placement<F>> {
        self.fallback.as_ref()
    }

    pub fn width_row(&self, block: usize) -> &DimensionRow {
        &self.width_rows[block]
    }

    pub fn height_row(&self, block: usize) -> &DimensionRow {
        &self.height_rows[block]
    }

    pub fn row(&self, block: usize, dim: Dimension) -> &DimensionRow {
        match dim {
            Dimension::Width => &self.width_rows[block],
            Dimension::Height => &self.height_rows[block],
        }
    }

    /// Reserves a fresh placement id.
    pub fn allocate_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Installs the placement returned for size vectors no stored placement covers.
    ///
    /// The fallback lives outside the rows; its ranges are not checked for
    /// feasibility or disjointness.
    pub fn set_fallback(&mut self, fallback: Placement<F>) -> Result<(), StructureError> {
        let n = self.netlist.block_count();
        if fallback.coords.len() != n || fallback.width_ranges.len() != n || fallback.height_ranges.len() != n
        {
            return Err(ModelError::LengthMismatch {
                expected: n,
                got: fallback.coords.len(),
            }
            .into());
        }
        self.next_id = self.next_id.max(fallback.id + 1);
        self.fallback = Some(fallback);
        Ok(())
    }

    /// Ids of the stored placements whose hyperrectangle contains `sizes`.
    ///
    /// This is the raw row intersection, before any fallback. For a well-formed
    /// structure it has at most one element.
    pub fn lookup(&self, sizes: &SizeVector) -> Vec<usize> {
        assert_eq!(sizes.len(), self.netlist.block_count(), "one size per block");
        let mut sets: Vec<&[usize]> = Vec::with_capacity(2 * sizes.len());
        for (i, s) in sizes.iter().enumerate() {
            let w = self.width_rows[i].lookup(s.w);
            let h = self.height_rows[i].lookup(s.h);
            if w.is_empty() || h.is_empty() {
                return Vec::new();
            }
            sets.push(w);
            sets.push(h);
        }
        let Some(k) = (0..sets.len()).min_by_key(|&k| sets[k].len()) else {
            return Vec::new();
        };
        let mut hits: Vec<usize> = sets[k].to_vec();
        for (j, set) in sets.iter().enumerate() {
            if j == k {
                continue;
            }
            hits.retain(|id| set.binary_search(id).is_ok());
            if hits.is_empty() {
                break;
            }
        }
        hits
    }

    /// Maps a size vector to its placement.
    ///
    /// A hit on more than one stored placement means the structure is
    /// corrupted and is reported as an error.
    pub fn instantiate(&self, sizes: &SizeVector) -> Result<Instance<'_, F>, StructureError> {
        self.netlist.check_sizes(sizes)?;
        let hits = self.lookup(sizes);
        match hits.as_slice() {
            [id] => Ok(Instance {
                placement: &self.placements[id],
                is_fallback: false,
            }),
            [] => self
                .fallback
                .as_ref()
                .map(|placement| Instance {
                    placement,
                    is_fallback: true,
                })
                .ok_or(StructureError::NoPlacement),
            _ => Err(StructureError::Corrupted { ids: hits }),
        }
    }

    /// Stored placements (other than `p` itself) that jointly overlap `p`.
    pub fn find_joint_overlaps(&self, p: &Placement<F>) -> Vec<usize> {
        let n = self.netlist.block_count();
        let mut candidates: Option<Vec<usize>> = None;
        for i in 0..n {
            for dim in [Dimension::Width, Dimension::Height] {
                let ids = self.row(i, dim).ids_intersecting(resolve::range_of(p, i, dim));
                let next = match candidates {
                    None => ids,
                    Some(mut c) => {
                        c.retain(|id| ids.binary_search(id).is_ok());
                        c
                    }
                };
                if next.is_empty() {
                    return next;
                }
                candidates = Some(next);
            }
        }
        let mut out = candidates.unwrap_or_default();
        out.retain(|&id| id != p.id);
        out
    }

    /// Adds `p` to the rows. `p` must be valid for the netlist and must not
    /// jointly overlap any stored placement.
    pub fn store_placement(&mut self, p: Placement<F>) -> Result<(), StructureError> {
        p.validate(&self.netlist)?;
        if self.placements.contains_key(&p.id) {
            return Err(StructureError::DuplicateId(p.id));
        }
        let with = self.find_joint_overlaps(&p);
        if !with.is_empty() {
            return Err(StructureError::JointOverlap { id: p.id, with });
        }
        for i in 0..p.block_count() {
            self.width_rows[i].insert(p.width_ranges[i], p.id);
            self.height_rows[i].insert(p.height_ranges[i], p.id);
        }
        self.next_id = self.next_id.max(p.id + 1);
        self.placements.insert(p.id, p);
        Ok(())
    }

    /// Removes a stored placement and its row entries.
    pub fn remove_placement(&mut self, id: usize) -> Option<Placement<F>> {
        let p = self.placements.remove(&id)?;
        for i in 0..p.block_count() {
            self.width_rows[i].remove(p.width_ranges[i], id);
            self.height_rows[i].remove(p.height_ranges[i], id);
        }
        Some(p)
    }

    /// Resolves every joint overlap between `candidate` and the stored
    /// placements, then stores whatever remains of the candidate.
    ///
    /// Overlaps are handled one at a time, lowest stored id first, with
    /// [`resolve_overlap`]. A stored placement that loses is shrunk (or forked)
    /// in place; a candidate that loses is shrunk and the remaining overlaps
    /// are re-queried. Candidate pieces shrunk to nothing are dropped.
    pub fn resolve_and_store(&mut self, mut candidate: Placement<F>) -> Result<StoreOutcome, StructureError> {
        candidate.validate(&self.netlist)?;
        if self.placements.contains_key(&candidate.id) {
            return Err(StructureError::DuplicateId(candidate.id));
        }
        self.next_id = self.next_id.max(candidate.id + 1);
        let mut outcome = StoreOutcome::default();
        let mut pending = Vec::new();
        loop {
            let overlaps = self.find_joint_overlaps(&candidate);
            let Some(&other_id) = overlaps.first() else {
                outcome.stored.push(candidate.id);
                self.store_placement(candidate)?;
                match pending.pop() {
                    Some(next) => {
                        candidate = next;
                        continue;
                    }
                    None => break,
                }
            };
            let other = &self.placements[&other_id];
            let resolution = resolve_overlap(&candidate, other)?;
            let mut pieces = resolution.pieces.into_iter();
            if resolution.loser == other_id {
                self.remove_placement(other_id);
                let mut kept = false;
                if let Some(first) = pieces.next() {
                    self.store_placement(first)?;
                    kept = true;
                }
                for mut fork in pieces {
                    fork.id = self.allocate_id();
                    outcome.forked.push(fork.id);
                    self.store_placement(fork)?;
                }
                if kept {
                    if !outcome.shrunk.contains(&other_id) {
                        outcome.shrunk.push(other_id);
                    }
                } else {
                    outcome.shrunk.retain(|&id| id != other_id);
                    outcome.removed.push(other_id);
                }
            } else {
                match pieces.next() {
                    Some(first) => {
                        for mut fork in pieces {
                            fork.id = self.allocate_id();
                            pending.push(fork);
                        }
                        candidate = first;
                    }
                    None => match pending.pop() {
                        Some(next) => candidate = next,
                        None => break,
                    },
                }
            }
        }
        Ok(outcome)
    }

    /// Fraction of the designer size space claimed by stored placements.
    ///
    /// Stored hyperrectangles are disjoint, so their volumes add up.
    pub fn coverage(&self) -> f64 {
        let blocks = self.netlist.blocks();
        self.placements
            .values()
            .map(|p| {
                blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let w = p.width_ranges[i].count() as f64 / b.width_bounds().count() as f64;
                        let h = p.height_ranges[i].count() as f64 / b.height_bounds().count() as f64;
                        w * h
                    })
                    .product::<f64>()
            })
            .sum::<f64>()
            .min(1.0)
    }

    /// Runs the full invariant suite and lists every violation found.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (i, (w, h)) in self.width_rows.iter().zip(&self.height_rows).enumerate() {
            if let Err(e) = w.check() {
                violations.push(format!("width row {i}: {e}"));
            }
            if let Err(e) = h.check() {
                violations.push(format!("height row {i}: {e}"));
            }
        }
        for (&id, p) in &self.placements {
            if id != p.id {
                violations.push(format!("placement keyed {id} carries id {}", p.id));
            }
            if let Err(e) = p.validate(&self.netlist) {
                violations.push(e.to_string());
            }
        }
        if self
            .placements
            .values()
            .all(|p| p.validate(&self.netlist).is_ok())
        {
            let mut rebuilt = Self::new(self.netlist.clone());
            for p in self.placements.values() {
                for i in 0..p.block_count() {
                    rebuilt.width_rows[i].insert(p.width_ranges[i], p.id);
                    rebuilt.height_rows[i].insert(p.height_ranges[i], p.id);
                }
            }
            if rebuilt.width_rows != self.width_rows || rebuilt.height_rows != self.height_rows {
                violations.push("rows disagree with stored placement ranges".into());
            }
        }
        let all: Vec<&Placement<F>> = self.placements.values().collect();
        for (k, a) in all.iter().enumerate() {
            for b in &all[k + 1..] {
                if jointly_overlap(a, b) {
                    violations.push(format!("placements {} and {} jointly overlap", a.id, b.id));
                }
            }
        }
        if let Some(fb) = &self.fallback {
            if self.placements.contains_key(&fb.id) {
                violations.push(format!("fallback id {} collides with a stored placement", fb.id));
            }
        }
        violations
    }
}
