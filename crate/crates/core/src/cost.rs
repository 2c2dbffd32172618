//! Layout cost: weighted half-perimeter wirelength plus bounding-box area.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{layout_feasible, Net, Netlist, Point, SizeVector};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cost weights must be finite, non-negative and not both zero")]
    InvalidWeights,
    #[error("layout is infeasible (overlap or out of floorplan)")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar")]
pub struct CostWeights<F> {
    pub wirelength_weight: F,
    pub area_weight: F,
}

impl<F: Scalar> CostWeights<F> {
    pub fn new(wirelength_weight: F, area_weight: F) -> Result<Self, CostError> {
        let w = Self {
            wirelength_weight,
            area_weight,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let ok = |v: F| v.is_finite() && v >= F::zero();
        if !ok(self.wirelength_weight)
            || !ok(self.area_weight)
            || (self.wirelength_weight == F::zero() && self.area_weight == F::zero())
        {
            return Err(CostError::InvalidWeights);
        }
        Ok(())
    }
}

impl<F: Scalar> Default for CostWeights<F> {
    fn default() -> Self {
        Self {
            wirelength_weight: F::one(),
            area_weight: F::one(),
        }
    }
}

/// Half-perimeter of the bounding box of the net's absolute pin positions.
pub fn net_hpwl<F: Scalar>(net: &Net, coords: &[Point], sizes: &SizeVector) -> F {
    let mut pins = net.pins.iter().map(|pin| {
        let p = coords[pin.block];
        let s = sizes[pin.block];
        let x = F::from_len(p.x) + F::from_f64_lossy(pin.offset_x) * F::from_len(s.w);
        let y = F::from_len(p.y) + F::from_f64_lossy(pin.offset_y) * F::from_len(s.h);
        (x, y)
    });
    let Some((x0, y0)) = pins.next() else {
        return F::zero();
    };
    let (mut lx, mut hx, mut ly, mut hy) = (x0, x0, y0, y0);
    for (x, y) in pins {
        lx = lx.min(x);
        hx = hx.max(x);
        ly = ly.min(y);
        hy = hy.max(y);
    }
    (hx - lx) + (hy - ly)
}

/// Area of the bounding box enclosing every placed block.
pub fn bounding_area<F: Scalar>(coords: &[Point], sizes: &SizeVector) -> F {
    let mut it = coords.iter().zip(sizes.iter());
    let Some((p, s)) = it.next() else {
        return F::zero();
    };
    let (mut lx, mut ly, mut hx, mut hy) = (p.x, p.y, p.x + s.w, p.y + s.h);
    for (p, s) in it {
        lx = lx.min(p.x);
        ly = ly.min(p.y);
        hx = hx.max(p.x + s.w);
        hy = hy.max(p.y + s.h);
    }
    F::from_len(hx - lx) * F::from_len(hy - ly)
}

/// Cost of a layout without checking feasibility.
pub fn layout_cost_unchecked<F: Scalar>(
    netlist: &Netlist,
    coords: &[Point],
    sizes: &SizeVector,
    weights: &CostWeights<F>,
) -> F {
    let wirelength = netlist
        .nets()
        .iter()
        .fold(F::zero(), |acc, net| acc + net_hpwl::<F>(net, coords, sizes));
    weights.wirelength_weight * wirelength + weights.area_weight * bounding_area::<F>(coords, sizes)
}

/// Cost of a feasible layout; infeasible layouts are rejected.
pub fn layout_cost<F: Scalar>(
    netlist: &Netlist,
    coords: &[Point],
    sizes: &SizeVector,
    weights: &CostWeights<F>,
) -> Result<F, CostError> {
    if !layout_feasible(netlist, coords, sizes) {
        return Err(CostError::Infeasible);
    }
    Ok(layout_cost_unchecked(netlist, coords, sizes, weights))
}
