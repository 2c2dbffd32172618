//! Multi-placement structures for analog floorplanning.
//!
//! A structure stores many fixed-coordinate placements of the same netlist,
//! each owning a disjoint box of block size vectors. Given a size vector,
//! [`structure::MultiPlacementStructure::instantiate`] returns the single
//! placement that owns it (or the fallback) in time logarithmic in the row
//! lengths. [`explorer::generate`] builds a structure offline by annealing
//! block coordinates, with an inner annealing run over sizes ([`bdio`])
//! deciding how much of the size space each candidate claims.
//!
//! The core is generic over the cost scalar; the aliases at the crate root
//! fix it to `f64`.

pub mod anneal;
pub mod bdio;
pub mod benchsuite;
pub mod cost;
pub mod experiments;
pub mod explorer;
pub mod model;
pub mod scalar;
pub mod structure;

pub use model::{Block, Interval, Net, Netlist, Pin, Point, Size, SizeVector};
pub use scalar::{Length, Scalar};
pub use structure::{Dimension, StructureError, FORMAT_VERSION};

pub type Placement = model::Placement<f64>;
pub type MultiPlacementStructure = structure::MultiPlacementStructure<f64>;
pub type CostWeights = cost::CostWeights<f64>;
pub type AnnealSchedule = bdio::AnnealSchedule<f64>;
pub type CostReport = bdio::CostReport<f64>;
pub type ExplorerConfig = explorer::ExplorerConfig<f64>;
pub type Generation = explorer::Generation<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Placement = crate::model::Placement<f32>;
    pub type MultiPlacementStructure = crate::structure::MultiPlacementStructure<f32>;
    pub type CostWeights = crate::cost::CostWeights<f32>;
    pub type AnnealSchedule = crate::bdio::AnnealSchedule<f32>;
    pub type ExplorerConfig = crate::explorer::ExplorerConfig<f32>;
    pub type Generation = crate::explorer::Generation<f32>;
}
