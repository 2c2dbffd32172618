//! JSON persistence.
//!
//! The file holds the netlist, the stored placements and the fallback. Rows
//! are not written; they are rebuilt from the placements on load, which also
//! re-validates every placement and the pairwise disjointness guarantee.

use serde::{Deserialize, Serialize};

use super::{MultiPlacementStructure, StructureError};
use crate::model::{Netlist, Placement};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct FileRef<'a, F> {
    version: u32,
    netlist: &'a Netlist,
    placements: Vec<&'a Placement<F>>,
    fallback: Option<&'a Placement<F>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOwned<F> {
    version: u32,
    netlist: Netlist,
    placements: Vec<Placement<F>>,
    #[serde(default)]
    fallback: Option<Placement<F>>,
}

impl From<serde_json::Error> for StructureError {
    fn from(e: serde_json::Error) -> Self {
        StructureError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl<F: Scalar> MultiPlacementStructure<F> {
    /// Canonical pretty-printed JSON, newline terminated.
    pub fn to_json(&self) -> String {
        let file = FileRef {
            version: FORMAT_VERSION,
            netlist: &self.netlist,
            placements: self.placements.values().collect(),
            fallback: self.fallback.as_ref(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("structure serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let file: FileOwned<F> = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(StructureError::UnsupportedVersion(file.version));
        }
        let mut s = Self::new(file.netlist);
        for p in file.placements {
            s.store_placement(p)?;
        }
        if let Some(fb) = file.fallback {
            s.set_fallback(fb)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Interval, Point, Size, SizeVector};

    fn small() -> MultiPlacementStructure<f64> {
        let blocks = vec![Block::new("a", 2, 9, 2, 9).unwrap()];
        let nl = Netlist::new(blocks, vec![], 20, 20).unwrap();
        let mut s = MultiPlacementStructure::new(nl);
        s.store_placement(Placement {
            id: 0,
            coords: vec![Point::new(1, 1)],
            width_ranges: vec![Interval::new(2, 6)],
            height_ranges: vec![Interval::new(3, 9)],
            best_cost: 0.1 + 0.2,
            average_cost: 1.0 / 3.0,
            best_sizes: SizeVector::new(vec![Size::new(2, 3)]),
        })
        .unwrap();
        s
    }

    #[test]
    fn empty_structure_round_trips() {
        let blocks = vec![Block::new("a", 2, 9, 2, 9).unwrap()];
        let s = MultiPlacementStructure::<f64>::new(Netlist::new(blocks, vec![], 20, 20).unwrap());
        let back = MultiPlacementStructure::<f64>::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let s = small();
        let back = MultiPlacementStructure::<f64>::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), s.to_json());
    }

    #[test]
    fn truncated_input_reports_location() {
        let text = small().to_json();
        let cut = &text[..text.len() / 2];
        match MultiPlacementStructure::<f64>::from_json(cut) {
            Err(StructureError::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_is_checked() {
        let text = small().to_json().replacen("\"version\": 1", "\"version\": 7", 1);
        assert_eq!(
            MultiPlacementStructure::<f64>::from_json(&text).unwrap_err(),
            StructureError::UnsupportedVersion(7)
        );
    }

    #[test]
    fn overlapping_file_is_rejected() {
        let mut text = small().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut v2 = v.clone();
        let mut dup = v["placements"][0].clone();
        dup["id"] = 1.into();
        v2["placements"].as_array_mut().unwrap().push(dup);
        text = serde_json::to_string(&v2).unwrap();
        assert!(matches!(
            MultiPlacementStructure::<f64>::from_json(&text),
            Err(StructureError::JointOverlap { id: 1, .. })
        ));
    }

    #[test]
    fn f32_structures_serialize_too() {
        let blocks = vec![Block::new("a", 2, 9, 2, 9).unwrap()];
        let nl = Netlist::new(blocks, vec![], 20, 20).unwrap();
        let mut s = MultiPlacementStructure::<f32>::new(nl);
        s.store_placement(Placement {
            id: 3,
            coords: vec![Point::new(0, 0)],
            width_ranges: vec![Interval::new(2, 9)],
            height_ranges: vec![Interval::new(2, 9)],
            best_cost: 0.7,
            average_cost: 1.1,
            best_sizes: SizeVector::new(vec![Size::new(2, 2)]),
        })
        .unwrap();
        let back = MultiPlacementStructure::<f32>::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
