//! Per-block, per-dimension row of disjoint intervals.

use crate::model::Interval;
use crate::scalar::Length;

/// One interval of a row together with the placements valid across all of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalEntry {
    pub start: Length,
    pub end: Length,
    /// Sorted, deduplicated placement ids.
    pub placements: Vec<usize>,
}

impl IntervalEntry {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start, self.end)
    }

    fn new(start: Length, end: Length, placements: Vec<usize>) -> Self {
        Self {
            start,
            end,
            placements,
        }
    }
}

/// Ascending, non-overlapping intervals, each mapping to a set of placements.
///
/// The row is kept canonical: adjacent entries with identical placement sets
/// are merged, so the representation is a function of the stored intervals
/// alone.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DimensionRow {
    entries: Vec<IntervalEntry>,
}

impl DimensionRow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[IntervalEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Placements valid at `value`; empty if no interval contains it.
    pub fn lookup(&self, value: Length) -> &[usize] {
        let k = self.entries.partition_point(|e| e.end < value);
        match self.entries.get(k) {
            Some(e) if e.start <= value => &e.placements,
            _ => &[],
        }
    }

    /// Index range of entries intersecting `iv`.
    fn span(&self, iv: Interval) -> std::ops::Range<usize> {
        let lo = self.entries.partition_point(|e| e.end < iv.start);
        let hi = self.entries.partition_point(|e| e.start <= iv.end);
        lo..hi.max(lo)
    }

    /// Union of the placement sets of every entry intersecting `iv`, sorted.
    pub fn ids_intersecting(&self, iv: Interval) -> Vec<usize> {
        let mut ids: Vec<usize> = self.entries[self.span(iv)]
            .iter()
            .flat_map(|e| e.placements.iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Marks `id` valid over `iv`, splitting entries at the interval bounds
    /// and creating entries for previously uncovered values.
    pub fn insert(&mut self, iv: Interval, id: usize) {
        let span = self.span(iv);
        let lo = span.start;
        let mut out = Vec::with_capacity(span.len() * 2 + 1);
        let mut cursor = iv.start;
        for e in &self.entries[span.clone()] {
            if e.start < iv.start {
                out.push(IntervalEntry::new(e.start, iv.start - 1, e.placements.clone()));
            }
            let from = e.start.max(iv.start);
            if cursor < from {
                out.push(IntervalEntry::new(cursor, from - 1, vec![id]));
            }
            let to = e.end.min(iv.end);
            let mut set = e.placements.clone();
            if let Err(pos) = set.binary_search(&id) {
                set.insert(pos, id);
            }
            out.push(IntervalEntry::new(from, to, set));
            if e.end > iv.end {
                out.push(IntervalEntry::new(iv.end + 1, e.end, e.placements.clone()));
            }
            cursor = to + 1;
        }
        if cursor <= iv.end {
            out.push(IntervalEntry::new(cursor, iv.end, vec![id]));
        }
        let added = out.len();
        self.entries.splice(span, out);
        self.merge_around(lo.saturating_sub(1), lo + added + 1);
    }

    /// Removes `id` from every entry intersecting `iv`, dropping entries left empty.
    pub fn remove(&mut self, iv: Interval, id: usize) {
        let span = self.span(iv);
        let lo = span.start;
        for e in &mut self.entries[span.clone()] {
            if let Ok(pos) = e.placements.binary_search(&id) {
                e.placements.remove(pos);
            }
        }
        let before = self.entries.len();
        let hi = span.end;
        let mut k = 0;
        self.entries.retain(|e| {
            let keep = !(k >= lo && k < hi && e.placements.is_empty());
            k += 1;
            keep
        });
        let removed = before - self.entries.len();
        self.merge_around(lo.saturating_sub(1), hi - removed + 1);
    }

    /// Merges adjacent equal-set entries within `[from, to)` (clamped).
    fn merge_around(&mut self, from: usize, to: usize) {
        let to = to.min(self.entries.len());
        if to <= from + 1 {
            return;
        }
        let tail = self.entries.split_off(to);
        let mid = self.entries.split_off(from);
        for e in mid {
            let can_merge = self.entries.len() > from;
            match self.entries.last_mut() {
                Some(last) if can_merge && last.end + 1 == e.start && last.placements == e.placements => {
                    last.end = e.end;
                }
                _ => self.entries.push(e),
            }
        }
        self.entries.extend(tail);
    }

    /// Checks the row invariants: ordering, disjointness, canonical merging.
    pub fn check(&self) -> Result<(), String> {
        for (k, e) in self.entries.iter().enumerate() {
            if e.start > e.end {
                return Err(format!("entry {k} is empty: [{}, {}]", e.start, e.end));
            }
            if e.placements.is_empty() {
                return Err(format!("entry {k} has no placements"));
            }
            if e.placements.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("entry {k} placement set not sorted/unique"));
            }
        }
        for (k, pair) in self.entries.windows(2).enumerate() {
            if pair[0].end >= pair[1].start {
                return Err(format!("entries {k} and {} overlap or are out of order", k + 1));
            }
            if pair[0].end + 1 == pair[1].start && pair[0].placements == pair[1].placements {
                return Err(format!("entries {k} and {} should be merged", k + 1));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn iv(a: Length, b: Length) -> Interval {
        Interval::new(a, b)
    }

    fn entries(row: &DimensionRow) -> Vec<(Length, Length, Vec<usize>)> {
        row.entries()
            .iter()
            .map(|e| (e.start, e.end, e.placements.clone()))
            .collect()
    }

    #[test]
    fn lookup_examples() {
        let mut row = DimensionRow::new();
        row.insert(iv(1, 5), 0);
        row.insert(iv(1, 5), 2);
        row.insert(iv(6, 10), 1);
        assert_eq!(row.lookup(3), &[0, 2]);
        assert_eq!(row.lookup(11), &[] as &[usize]);
        assert_eq!(row.lookup(0), &[] as &[usize]);
        assert_eq!(row.lookup(6), &[1]);
    }

    #[test]
    fn insert_into_empty_row() {
        let mut row = DimensionRow::new();
        row.insert(iv(3, 7), 0);
        assert_eq!(entries(&row), vec![(3, 7, vec![0])]);
        assert_eq!(row.lookup(3), &[0]);
        assert_eq!(row.lookup(7), &[0]);
    }

    #[test]
    fn insert_splits_containing_entry() {
        let mut row = DimensionRow::new();
        row.insert(iv(1, 10), 0);
        row.insert(iv(4, 6), 1);
        assert_eq!(
            entries(&row),
            vec![(1, 3, vec![0]), (4, 6, vec![0, 1]), (7, 10, vec![0])]
        );
        for v in 1..=10 {
            let want: Vec<usize> = if (4..=6).contains(&v) { vec![0, 1] } else { vec![0] };
            assert_eq!(row.lookup(v), want.as_slice(), "value {v}");
        }
    }

    #[test]
    fn insert_bridges_gaps() {
        let mut row = DimensionRow::new();
        row.insert(iv(2, 3), 0);
        row.insert(iv(8, 9), 1);
        row.insert(iv(1, 12), 2);
        assert_eq!(
            entries(&row),
            vec![
                (1, 1, vec![2]),
                (2, 3, vec![0, 2]),
                (4, 7, vec![2]),
                (8, 9, vec![1, 2]),
                (10, 12, vec![2])
            ]
        );
        row.check().unwrap();
    }

    #[test]
    fn remove_restores_canonical_form() {
        let mut row = DimensionRow::new();
        row.insert(iv(1, 10), 0);
        row.insert(iv(4, 6), 1);
        row.remove(iv(4, 6), 1);
        assert_eq!(entries(&row), vec![(1, 10, vec![0])]);
        row.remove(iv(1, 10), 0);
        assert!(row.is_empty());
    }

    #[test]
    fn adjacent_equal_sets_merge() {
        let mut row = DimensionRow::new();
        row.insert(iv(1, 5), 0);
        row.insert(iv(6, 10), 0);
        assert_eq!(entries(&row), vec![(1, 10, vec![0])]);
    }

    #[test]
    fn ids_intersecting_collects_union() {
        let mut row = DimensionRow::new();
        row.insert(iv(1, 5), 0);
        row.insert(iv(4, 9), 1);
        row.insert(iv(20, 30), 2);
        assert_eq!(row.ids_intersecting(iv(5, 5)), vec![0, 1]);
        assert_eq!(row.ids_intersecting(iv(10, 19)), Vec::<usize>::new());
        assert_eq!(row.ids_intersecting(iv(0, 100)), vec![0, 1, 2]);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Insert(Length, Length),
        Remove(usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            3 => (0i64..60, 0i64..15).prop_map(|(s, len)| Op::Insert(s, s + len)),
            1 => (0usize..64).prop_map(Op::Remove),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn random_edits_match_brute_force(ops in prop::collection::vec(op(), 1..40)) {
            let mut row = DimensionRow::new();
            let mut live: BTreeMap<usize, Interval> = BTreeMap::new();
            let mut next = 0;
            for op in ops {
                match op {
                    Op::Insert(s, e) => {
                        row.insert(iv(s, e), next);
                        live.insert(next, iv(s, e));
                        next += 1;
                    }
                    Op::Remove(k) => {
                        if let Some((&id, &i)) = live.iter().nth(k % live.len().max(1)) {
                            row.remove(i, id);
                            live.remove(&id);
                        }
                    }
                }
                prop_assert!(row.check().is_ok(), "{:?}", row.check());
            }
            for v in -1..80 {
                let want: Vec<usize> = live.iter().filter(|(_, i)| i.contains(v)).map(|(&id, _)| id).collect();
                prop_assert_eq!(row.lookup(v), want.as_slice());
            }
            // canonical form: rebuilding from the live intervals yields the same row
            let mut rebuilt = DimensionRow::new();
            for (&id, &i) in &live {
                rebuilt.insert(i, id);
            }
            prop_assert_eq!(rebuilt, row);
        }
    }
}
