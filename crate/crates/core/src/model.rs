//! Circuit, floorplan and placement types.
//!
//! Blocks are axis-aligned rectangles anchored at their lower-left corner on
//! an integer grid. A [`Placement`] fixes the anchor of every block and
//! records, per block, the closed width and height intervals in which that
//! placement is valid.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Length, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("block `{name}`: {reason}")]
    InvalidBlock { name: String, reason: String },
    #[error("floorplan dimensions must be positive, got {width}x{height}")]
    InvalidFloorplan { width: Length, height: Length },
    #[error("netlist has no blocks")]
    EmptyNetlist,
    #[error("net {net} has {pins} pin(s), at least 2 required")]
    NetTooSmall { net: usize, pins: usize },
    #[error("net {net} references block {block}, netlist has {blocks} blocks")]
    PinBlockOutOfRange { net: usize, block: usize, blocks: usize },
    #[error("net {net} references unknown block `{name}`")]
    UnknownBlockName { net: usize, name: String },
    #[error("net {net} has a pin offset outside [0, 1]")]
    PinOffset { net: usize },
    #[error("block `{name}` does not fit the {width}x{height} floorplan at minimum size")]
    BlockExceedsFloorplan {
        name: String,
        width: Length,
        height: Length,
    },
    #[error("declared {declared} terminals but nets carry {actual}")]
    TerminalMismatch { declared: usize, actual: usize },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("size {w}x{h} for block {block} is outside its designer bounds")]
    SizeOutOfBounds { block: usize, w: Length, h: Length },
    #[error("size {w}x{h} for block {block} is outside the placement's valid ranges")]
    SizeOutsideRange { block: usize, w: Length, h: Length },
    #[error("placement {id}: {reason}")]
    InvalidPlacement { id: usize, reason: String },
    #[error("cannot parse size vector: {0}")]
    SizeSyntax(String),
}

/// Closed integer interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(Length, Length)", into = "(Length, Length)")]
pub struct Interval {
    pub start: Length,
    pub end: Length,
}

impl Interval {
    pub fn new(start: Length, end: Length) -> Self {
        debug_assert!(start <= end, "empty interval [{start}, {end}]");
        Self { start, end }
    }

    pub fn singleton(v: Length) -> Self {
        Self { start: v, end: v }
    }

    /// Number of integers in the interval.
    pub fn count(&self) -> Length {
        self.end - self.start + 1
    }

    pub fn contains(&self, v: Length) -> bool {
        self.start <= v && v <= self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(Interval { start, end })
    }
}

impl From<(Length, Length)> for Interval {
    fn from((start, end): (Length, Length)) -> Self {
        Self { start, end }
    }
}

impl From<Interval> for (Length, Length) {
    fn from(i: Interval) -> Self {
        (i.start, i.end)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "(Length, Length)", into = "(Length, Length)")]
pub struct Point {
    pub x: Length,
    pub y: Length,
}

impl Point {
    pub fn new(x: Length, y: Length) -> Self {
        Self { x, y }
    }
}

impl From<(Length, Length)> for Point {
    fn from((x, y): (Length, Length)) -> Self {
        Self { x, y }
    }
}

impl From<Point> for (Length, Length) {
    fn from(p: Point) -> Self {
        (p.x, p.y)
    }
}

/// Width and height of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "(Length, Length)", into = "(Length, Length)")]
pub struct Size {
    pub w: Length,
    pub h: Length,
}

impl Size {
    pub fn new(w: Length, h: Length) -> Self {
        Self { w, h }
    }
}

impl From<(Length, Length)> for Size {
    fn from((w, h): (Length, Length)) -> Self {
        Self { w, h }
    }
}

impl From<Size> for (Length, Length) {
    fn from(s: Size) -> Self {
        (s.w, s.h)
    }
}

/// One `(w, h)` pair per block, in block order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SizeVector(pub Vec<Size>);

impl SizeVector {
    pub fn new(entries: Vec<Size>) -> Self {
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Size> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for SizeVector {
    type Output = Size;

    fn index(&self, i: usize) -> &Size {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for SizeVector {
    fn index_mut(&mut self, i: usize) -> &mut Size {
        &mut self.0[i]
    }
}

impl FromIterator<Size> for SizeVector {
    fn from_iter<I: IntoIterator<Item = Size>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Parses `w0xh0,w1xh1,...`; whitespace around entries is ignored.
impl std::str::FromStr for SizeVector {
    type Err = ModelError;

    fn from_str(text: &str) -> Result<Self, ModelError> {
        let bad = |m: String| ModelError::SizeSyntax(m);
        if text.trim().is_empty() {
            return Err(bad("empty input".into()));
        }
        text.split(',')
            .map(|entry| {
                let entry = entry.trim();
                let (w, h) = entry
                    .split_once(['x', 'X'])
                    .ok_or_else(|| bad(format!("`{entry}` is not of the form WxH")))?;
                let num = |v: &str| {
                    v.trim()
                        .parse::<Length>()
                        .map_err(|_| bad(format!("`{entry}`: `{v}` is not an integer")))
                };
                Ok(Size::new(num(w)?, num(h)?))
            })
            .collect()
    }
}

impl fmt::Display for SizeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}x{}", s.w, s.h)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub min_width: Length,
    pub max_width: Length,
    pub min_height: Length,
    pub max_height: Length,
}

impl Block {
    pub fn new(
        name: impl Into<String>,
        min_width: Length,
        max_width: Length,
        min_height: Length,
        max_height: Length,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if min_width <= 0 || min_height <= 0 {
            return Err(ModelError::InvalidBlock {
                name,
                reason: "minimum dimensions must be positive".into(),
            });
        }
        if min_width > max_width || min_height > max_height {
            return Err(ModelError::InvalidBlock {
                name,
                reason: "minimum exceeds maximum".into(),
            });
        }
        Ok(Self {
            name,
            min_width,
            max_width,
            min_height,
            max_height,
        })
    }

    pub fn width_bounds(&self) -> Interval {
        Interval::new(self.min_width, self.max_width)
    }

    pub fn height_bounds(&self) -> Interval {
        Interval::new(self.min_height, self.max_height)
    }

    pub fn admits(&self, s: Size) -> bool {
        self.width_bounds().contains(s.w) && self.height_bounds().contains(s.h)
    }
}

/// A connection point on a block, as fractions of the block's width and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pin {
    pub block: usize,
    pub offset_x: f64,
    pub offset_y: f64,
    /// Counts toward the netlist's terminal total.
    pub terminal: bool,
}

impl Pin {
    /// Terminal pin at the block's center.
    pub fn centered(block: usize) -> Self {
        Self {
            block,
            offset_x: 0.5,
            offset_y: 0.5,
            terminal: true,
        }
    }

    pub fn at(block: usize, offset_x: f64, offset_y: f64) -> Self {
        Self {
            block,
            offset_x,
            offset_y,
            terminal: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub pins: Vec<Pin>,
}

impl Net {
    pub fn new(pins: Vec<Pin>) -> Self {
        Self { pins }
    }

    pub fn terminal_count(&self) -> usize {
        self.pins.iter().filter(|p| p.terminal).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetlistFile", into = "NetlistFile")]
pub struct Netlist {
    blocks: Vec<Block>,
    nets: Vec<Net>,
    floorplan_width: Length,
    floorplan_height: Length,
    declared_terminals: Option<usize>,
}

impl Netlist {
    pub fn new(
        blocks: Vec<Block>,
        nets: Vec<Net>,
        floorplan_width: Length,
        floorplan_height: Length,
    ) -> Result<Self, ModelError> {
        Self::with_declared_terminals(blocks, nets, floorplan_width, floorplan_height, None)
    }

    pub fn with_declared_terminals(
        blocks: Vec<Block>,
        nets: Vec<Net>,
        floorplan_width: Length,
        floorplan_height: Length,
        declared_terminals: Option<usize>,
    ) -> Result<Self, ModelError> {
        if floorplan_width <= 0 || floorplan_height <= 0 {
            return Err(ModelError::InvalidFloorplan {
                width: floorplan_width,
                height: floorplan_height,
            });
        }
        if blocks.is_empty() {
            return Err(ModelError::EmptyNetlist);
        }
        for b in &blocks {
            // Re-run the constructor checks; fields are public.
            Block::new(
                b.name.clone(),
                b.min_width,
                b.max_width,
                b.min_height,
                b.max_height,
            )?;
            if b.min_width > floorplan_width || b.min_height > floorplan_height {
                return Err(ModelError::BlockExceedsFloorplan {
                    name: b.name.clone(),
                    width: floorplan_width,
                    height: floorplan_height,
                });
            }
        }
        for (k, net) in nets.iter().enumerate() {
            if net.pins.len() < 2 {
                return Err(ModelError::NetTooSmall {
                    net: k,
                    pins: net.pins.len(),
                });
            }
            for pin in &net.pins {
                if pin.block >= blocks.len() {
                    return Err(ModelError::PinBlockOutOfRange {
                        net: k,
                        block: pin.block,
                        blocks: blocks.len(),
                    });
                }
                if !(0.0..=1.0).contains(&pin.offset_x) || !(0.0..=1.0).contains(&pin.offset_y) {
                    return Err(ModelError::PinOffset { net: k });
                }
            }
        }
        let netlist = Self {
            blocks,
            nets,
            floorplan_width,
            floorplan_height,
            declared_terminals,
        };
        if let Some(declared) = declared_terminals {
            let actual = netlist.terminal_count();
            if declared != actual {
                return Err(ModelError::TerminalMismatch { declared, actual });
            }
        }
        Ok(netlist)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn floorplan_width(&self) -> Length {
        self.floorplan_width
    }

    pub fn floorplan_height(&self) -> Length {
        self.floorplan_height
    }

    pub fn declared_terminals(&self) -> Option<usize> {
        self.declared_terminals
    }

    pub fn terminal_count(&self) -> usize {
        self.nets.iter().map(Net::terminal_count).sum()
    }

    pub fn min_sizes(&self) -> SizeVector {
        self.blocks
            .iter()
            .map(|b| Size::new(b.min_width, b.min_height))
            .collect()
    }

    pub fn max_sizes(&self) -> SizeVector {
        self.blocks
            .iter()
            .map(|b| Size::new(b.max_width, b.max_height))
            .collect()
    }

    /// Checks that `sizes` has one entry per block, each within designer bounds.
    pub fn check_sizes(&self, sizes: &SizeVector) -> Result<(), ModelError> {
        if sizes.len() != self.blocks.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.blocks.len(),
                got: sizes.len(),
            });
        }
        for (i, (b, s)) in self.blocks.iter().zip(sizes.iter()).enumerate() {
            if !b.admits(*s) {
                return Err(ModelError::SizeOutOfBounds {
                    block: i,
                    w: s.w,
                    h: s.h,
                });
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle with lower-left corner `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: Length,
    pub y: Length,
    pub w: Length,
    pub h: Length,
}

impl Rect {
    pub fn new(x: Length, y: Length, w: Length, h: Length) -> Self {
        Self { x, y, w, h }
    }

    pub fn at(p: Point, s: Size) -> Self {
        Self::new(p.x, p.y, s.w, s.h)
    }

    pub fn right(&self) -> Length {
        self.x + self.w
    }

    pub fn top(&self) -> Length {
        self.y + self.h
    }

    pub fn within(&self, width: Length, height: Length) -> bool {
        self.x >= 0 && self.y >= 0 && self.right() <= width && self.top() <= height
    }
}

/// True iff the interiors intersect. Abutting rectangles do not overlap.
pub fn rectangles_overlap(a: &Rect, b: &Rect) -> bool {
    a.w > 0
        && a.h > 0
        && b.w > 0
        && b.h > 0
        && a.x < b.right()
        && b.x < a.right()
        && a.y < b.top()
        && b.y < a.top()
}

/// True iff every block at `sizes` lies inside the floorplan and no two overlap.
///
/// Panics if `coords` or `sizes` do not have one entry per block.
pub fn layout_feasible(netlist: &Netlist, coords: &[Point], sizes: &SizeVector) -> bool {
    let n = netlist.block_count();
    assert_eq!(coords.len(), n, "one coordinate per block");
    assert_eq!(sizes.len(), n, "one size per block");
    let rects: Vec<Rect> = coords
        .iter()
        .zip(sizes.iter())
        .map(|(p, s)| Rect::at(*p, *s))
        .collect();
    let (fw, fh) = (netlist.floorplan_width(), netlist.floorplan_height());
    if rects.iter().any(|r| !r.within(fw, fh)) {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rectangles_overlap(&rects[i], &rects[j]) {
                return false;
            }
        }
    }
    true
}

/// Block anchors plus the per-block size intervals in which they are valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement<F> {
    pub id: usize,
    pub coords: Vec<Point>,
    pub width_ranges: Vec<Interval>,
    pub height_ranges: Vec<Interval>,
    pub best_cost: F,
    pub average_cost: F,
    pub best_sizes: SizeVector,
}

impl<F: Scalar> Placement<F> {
    /// A placement at `coords` whose ranges are the singleton minimum sizes.
    pub fn at_minimum(id: usize, netlist: &Netlist, coords: Vec<Point>) -> Self {
        let blocks = netlist.blocks();
        Self {
            id,
            coords,
            width_ranges: blocks.iter().map(|b| Interval::singleton(b.min_width)).collect(),
            height_ranges: blocks.iter().map(|b| Interval::singleton(b.min_height)).collect(),
            best_cost: F::zero(),
            average_cost: F::zero(),
            best_sizes: netlist.min_sizes(),
        }
    }

    pub fn block_count(&self) -> usize {
        self.coords.len()
    }

    /// Sizes at the upper end of every range.
    pub fn max_sizes(&self) -> SizeVector {
        self.width_ranges
            .iter()
            .zip(&self.height_ranges)
            .map(|(w, h)| Size::new(w.end, h.end))
            .collect()
    }

    pub fn min_sizes(&self) -> SizeVector {
        self.width_ranges
            .iter()
            .zip(&self.height_ranges)
            .map(|(w, h)| Size::new(w.start, h.start))
            .collect()
    }

    /// Whether `sizes` lies in this placement's hyperrectangle of valid sizes.
    pub fn contains_sizes(&self, sizes: &SizeVector) -> bool {
        sizes.len() == self.block_count()
            && sizes
                .iter()
                .zip(self.width_ranges.iter().zip(&self.height_ranges))
                .all(|(s, (w, h))| w.contains(s.w) && h.contains(s.h))
    }

    /// Feasibility at `sizes`, which must lie within this placement's ranges.
    pub fn is_feasible(&self, netlist: &Netlist, sizes: &SizeVector) -> Result<bool, ModelError> {
        if sizes.len() != self.block_count() {
            return Err(ModelError::LengthMismatch {
                expected: self.block_count(),
                got: sizes.len(),
            });
        }
        for (i, s) in sizes.iter().enumerate() {
            if !self.width_ranges[i].contains(s.w) || !self.height_ranges[i].contains(s.h) {
                return Err(ModelError::SizeOutsideRange {
                    block: i,
                    w: s.w,
                    h: s.h,
                });
            }
        }
        Ok(layout_feasible(netlist, &self.coords, sizes))
    }

    /// Validates every placement invariant against `netlist`.
    pub fn validate(&self, netlist: &Netlist) -> Result<(), ModelError> {
        let n = netlist.block_count();
        let bad = |reason: String| ModelError::InvalidPlacement { id: self.id, reason };
        if self.coords.len() != n
            || self.width_ranges.len() != n
            || self.height_ranges.len() != n
            || self.best_sizes.len() != n
        {
            return Err(bad(format!("expected {n} entries per block field")));
        }
        for (i, b) in netlist.blocks().iter().enumerate() {
            let (w, h) = (self.width_ranges[i], self.height_ranges[i]);
            if w.start > w.end || h.start > h.end {
                return Err(bad(format!("block {i} has an empty range")));
            }
            if !b.width_bounds().contains_interval(&w) || !b.height_bounds().contains_interval(&h) {
                return Err(bad(format!("block {i} range exceeds designer bounds")));
            }
        }
        if !layout_feasible(netlist, &self.coords, &self.max_sizes()) {
            return Err(bad("infeasible at maximal range sizes".into()));
        }
        if self.best_cost.is_nan()
            || self.average_cost.is_nan()
            || self.best_cost < F::zero()
            || self.best_cost > self.average_cost
        {
            return Err(bad(format!(
                "costs must satisfy 0 <= best ({}) <= average ({})",
                self.best_cost, self.average_cost
            )));
        }
        Ok(())
    }
}

// On-disk netlist layout.

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct FloorplanFile {
    width: Length,
    height: Length,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockFile {
    name: String,
    min_w: Length,
    max_w: Length,
    min_h: Length,
    max_h: Length,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BlockRef {
    Index(usize),
    Name(String),
}

fn default_offset() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PinFile {
    block: BlockRef,
    #[serde(default = "default_offset")]
    ox: f64,
    #[serde(default = "default_offset")]
    oy: f64,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    terminal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetlistFile {
    floorplan: FloorplanFile,
    blocks: Vec<BlockFile>,
    #[serde(default)]
    nets: Vec<Vec<PinFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminals: Option<usize>,
}

impl TryFrom<NetlistFile> for Netlist {
    type Error = ModelError;

    fn try_from(file: NetlistFile) -> Result<Self, ModelError> {
        let blocks = file
            .blocks
            .into_iter()
            .map(|b| Block::new(b.name, b.min_w, b.max_w, b.min_h, b.max_h))
            .collect::<Result<Vec<_>, _>>()?;
        let mut nets = Vec::with_capacity(file.nets.len());
        for (k, pins) in file.nets.into_iter().enumerate() {
            let pins = pins
                .into_iter()
                .map(|p| {
                    let block = match p.block {
                        BlockRef::Index(i) => i,
                        BlockRef::Name(name) => blocks
                            .iter()
                            .position(|b| b.name == name)
                            .ok_or(ModelError::UnknownBlockName { net: k, name })?,
                    };
                    Ok(Pin {
                        block,
                        offset_x: p.ox,
                        offset_y: p.oy,
                        terminal: p.terminal,
                    })
                })
                .collect::<Result<Vec<_>, ModelError>>()?;
            nets.push(Net::new(pins));
        }
        Netlist::with_declared_terminals(
            blocks,
            nets,
            file.floorplan.width,
            file.floorplan.height,
            file.terminals,
        )
    }
}

impl From<Netlist> for NetlistFile {
    fn from(n: Netlist) -> Self {
        NetlistFile {
            floorplan: FloorplanFile {
                width: n.floorplan_width,
                height: n.floorplan_height,
            },
            blocks: n
                .blocks
                .into_iter()
                .map(|b| BlockFile {
                    name: b.name,
                    min_w: b.min_width,
                    max_w: b.max_width,
                    min_h: b.min_height,
                    max_h: b.max_height,
                })
                .collect(),
            nets: n
                .nets
                .into_iter()
                .map(|net| {
                    net.pins
                        .into_iter()
                        .map(|p| PinFile {
                            block: BlockRef::Index(p.block),
                            ox: p.offset_x,
                            oy: p.offset_y,
                            terminal: p.terminal,
                        })
                        .collect()
                })
                .collect(),
            terminals: n.declared_terminals,
        }
    }
}
