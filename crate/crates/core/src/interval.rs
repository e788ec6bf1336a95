//! Half-open millisecond intervals and the set operations the timeline
//! compiler needs. Interval lists handled here are kept sorted and
//! non-overlapping; empty intervals are dropped.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Interval {
    pub const fn new(start_ms: u64, end_ms: u64) -> Self {
        Interval { start_ms, end_ms }
    }

    pub fn len(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }

    pub fn is_empty(&self) -> bool {
        self.end_ms <= self.start_ms
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.start_ms <= other.start_ms && other.end_ms <= self.end_ms
    }

    pub fn contains_point(&self, t: u64) -> bool {
        self.start_ms <= t && t < self.end_ms
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let iv = Interval::new(self.start_ms.max(other.start_ms), self.end_ms.min(other.end_ms));
        (!iv.is_empty()).then_some(iv)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.intersect(other).is_some()
    }
}

/// Sorts and merges intervals, joining ones that touch.
pub fn normalize(mut items: Vec<Interval>) -> Vec<Interval> {
    items.retain(|iv| !iv.is_empty());
    items.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(items.len());
    for iv in items {
        match out.last_mut() {
            Some(last) if iv.start_ms <= last.end_ms => last.end_ms = last.end_ms.max(iv.end_ms),
            _ => out.push(iv),
        }
    }
    out
}

pub fn union(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    normalize(a.iter().chain(b).copied().collect())
}

/// `a` minus `b`. Both inputs must be normalized.
pub fn subtract(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut j = 0;
    for iv in a {
        let mut cursor = iv.start_ms;
        while j < b.len() && b[j].end_ms <= cursor {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].start_ms < iv.end_ms {
            if b[k].start_ms > cursor {
                out.push(Interval::new(cursor, b[k].start_ms));
            }
            cursor = cursor.max(b[k].end_ms);
            k += 1;
        }
        if cursor < iv.end_ms {
            out.push(Interval::new(cursor, iv.end_ms));
        }
    }
    out
}

/// `a` intersected with `b`. Both inputs must be normalized.
pub fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        if let Some(iv) = a[i].intersect(&b[j]) {
            out.push(iv);
        }
        if a[i].end_ms < b[j].end_ms {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn total_len(items: &[Interval]) -> u64 {
    items.iter().map(Interval::len).sum()
}
