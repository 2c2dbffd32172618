//! Pairwise overlap resolution between two placements.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Interval, Placement};
use crate::scalar::{Length, Scalar};

use super::StructureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Width,
    Height,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Width => "width",
            Dimension::Height => "height",
        })
    }
}

impl std::str::FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "w" | "width" => Ok(Dimension::Width),
            "h" | "height" => Ok(Dimension::Height),
            other => Err(format!("unknown dimension `{other}` (expected width|height)")),
        }
    }
}

pub(crate) fn range_of<F>(p: &Placement<F>, block: usize, dim: Dimension) -> Interval {
    match dim {
        Dimension::Width => p.width_ranges[block],
        Dimension::Height => p.height_ranges[block],
    }
}

fn range_of_mut<F>(p: &mut Placement<F>, block: usize, dim: Dimension) -> &mut Interval {
    match dim {
        Dimension::Width => &mut p.width_ranges[block],
        Dimension::Height => &mut p.height_ranges[block],
    }
}

/// True iff the size hyperrectangles of `a` and `b` intersect in every dimension.
pub fn jointly_overlap<F>(a: &Placement<F>, b: &Placement<F>) -> bool {
    a.width_ranges.len() == b.width_ranges.len()
        && a.width_ranges
            .iter()
            .zip(&b.width_ranges)
            .chain(a.height_ranges.iter().zip(&b.height_ranges))
            .all(|(x, y)| x.intersects(y))
}

/// Outcome of [`resolve_overlap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution<F> {
    pub winner: usize,
    pub loser: usize,
    pub block: usize,
    pub dimension: Dimension,
    /// Replacement(s) for the loser: none when it was shrunk away, two when
    /// it was forked around the winner. Every piece carries the loser's id.
    pub pieces: Vec<Placement<F>>,
}

/// Placement that keeps contested space: lower average cost, then lower id.
fn loser_is_first<F: Scalar>(p: &Placement<F>, q: &Placement<F>) -> bool {
    match p.average_cost.partial_cmp(&q.average_cost) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => p.id > q.id,
    }
}

/// Makes `p` and `q` jointly disjoint by shrinking the costlier one in the
/// dimension where the two overlap the least.
///
/// Ties on overlap extent go to the lowest block index, width before height.
/// When the loser's interval strictly contains the winner's on both sides it
/// is forked into the part below and the part above.
pub fn resolve_overlap<F: Scalar>(
    p: &Placement<F>,
    q: &Placement<F>,
) -> Result<Resolution<F>, StructureError> {
    if !jointly_overlap(p, q) {
        return Err(StructureError::NotOverlapping { a: p.id, b: q.id });
    }
    let mut best: Option<(Length, usize, Dimension)> = None;
    for block in 0..p.block_count() {
        for dim in [Dimension::Width, Dimension::Height] {
            let extent = range_of(p, block, dim)
                .intersection(&range_of(q, block, dim))
                .map(|i| i.count())
                .expect("joint overlap implies per-dimension overlap");
            if best.is_none_or(|(e, _, _)| extent < e) {
                best = Some((extent, block, dim));
            }
        }
    }
    let (_, block, dimension) = best.expect("placements have at least one block");
    let (loser, winner) = if loser_is_first(p, q) { (p, q) } else { (q, p) };
    let lose = range_of(loser, block, dimension);
    let win = range_of(winner, block, dimension);

    let mut sides = Vec::with_capacity(2);
    if lose.start < win.start {
        sides.push(Interval::new(lose.start, win.start - 1));
    }
    if lose.end > win.end {
        sides.push(Interval::new(win.end + 1, lose.end));
    }
    let pieces = sides
        .into_iter()
        .map(|iv| {
            let mut piece = loser.clone();
            *range_of_mut(&mut piece, block, dimension) = iv;
            piece
        })
        .collect();
    Ok(Resolution {
        winner: winner.id,
        loser: loser.id,
        block,
        dimension,
        pieces,
    })
}
