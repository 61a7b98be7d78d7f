//! Bottleneck (matching) distance between persistence diagrams.
//!
//! Finite points may be matched to each other or to the diagonal; essential
//! points are only matched to essential points. The finite part is solved
//! exactly by binary search over the sorted, deduplicated set of candidate
//! costs, testing each threshold with a maximum bipartite matching.

use serde::Serialize;

use crate::persistence::PersistenceDiagram;

/// One side of a matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatchEnd {
    Point { birth: f64, death: f64 },
    Essential { birth: f64 },
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub left: MatchEnd,
    pub right: MatchEnd,
    pub cost: f64,
}

/// An optimal matching; `cost` is the bottleneck distance. When the
/// essential counts differ the cost is `+∞` and essential points are left
/// unmatched.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    #[serde(serialize_with = "serialize_cost")]
    pub cost: f64,
}

fn serialize_cost<S: serde::Serializer>(cost: &f64, s: S) -> Result<S::Ok, S::Error> {
    if cost.is_finite() {
        s.serialize_f64(*cost)
    } else {
        s.serialize_str("inf")
    }
}

/// L∞ distance between two finite points.
#[inline]
pub fn point_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// L∞ distance from a finite point to the diagonal.
#[inline]
pub fn diagonal_cost(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    bottleneck(d1, d2).cost
}

/// Bottleneck distance with a witnessing matching.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Matching {
    let (finite_cost, mut pairs) = finite_bottleneck(d1.finite(), d2.finite());
    let e1 = d1.essential();
    let e2 = d2.essential();
    let essential_cost = if e1.len() != e2.len() {
        f64::INFINITY
    } else {
        // Both lists are sorted; sorted order is optimal for 1-D min-max.
        let mut worst: f64 = 0.0;
        for (&a, &b) in e1.iter().zip(e2) {
            let cost = (a - b).abs();
            worst = worst.max(cost);
            pairs.push(MatchedPair {
                left: MatchEnd::Essential { birth: a },
                right: MatchEnd::Essential { birth: b },
                cost,
            });
        }
        worst
    };
    Matching {
        pairs,
        cost: finite_cost.max(essential_cost),
    }
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> (f64, Vec<MatchedPair>) {
    if a.is_empty() && b.is_empty() {
        return (0.0, Vec::new());
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(0.0);
    for &p in a {
        candidates.push(diagonal_cost(p));
        candidates.extend(b.iter().map(|&q| point_cost(p, q)));
    }
    candidates.extend(b.iter().map(|&q| diagonal_cost(q)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let graph = ThresholdGraph { a, b };
    // The largest candidate is always feasible (everything to the diagonal).
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = graph
        .perfect_matching(candidates[hi])
        .expect("largest candidate is feasible");
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match graph.perfect_matching(candidates[mid]) {
            Some(m) => {
                hi = mid;
                best = m;
            }
            None => lo = mid + 1,
        }
    }
    (candidates[hi], graph.pairs(&best))
}

/// Bipartite graph for threshold `δ`. Left side: points of `a`, then one
/// diagonal slot per point of `b`. Right side: points of `b`, then one
/// diagonal slot per point of `a`.
struct ThresholdGraph<'a> {
    a: &'a [(f64, f64)],
    b: &'a [(f64, f64)],
}

impl ThresholdGraph<'_> {
    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    fn neighbours(&self, left: usize, delta: f64) -> Vec<usize> {
        let (na, nb) = (self.a.len(), self.b.len());
        if left < na {
            let p = self.a[left];
            let mut out: Vec<usize> = (0..nb)
                .filter(|&j| point_cost(p, self.b[j]) <= delta)
                .collect();
            if diagonal_cost(p) <= delta {
                out.push(nb + left);
            }
            out
        } else {
            let j = left - na;
            let mut out = Vec::with_capacity(na + 1);
            if diagonal_cost(self.b[j]) <= delta {
                out.push(j);
            }
            out.extend(nb..nb + na);
            out
        }
    }

    /// `match_of_right[r] = Some(left)` for a perfect matching, or `None`.
    fn perfect_matching(&self, delta: f64) -> Option<Vec<usize>> {
        let size = self.size();
        let adjacency: Vec<Vec<usize>> = (0..size).map(|l| self.neighbours(l, delta)).collect();
        let mut match_of_right: Vec<Option<usize>> = vec![None; size];
        let mut seen = vec![false; size];
        for left in 0..size {
            seen.iter_mut().for_each(|s| *s = false);
            if !augment(left, &adjacency, &mut match_of_right, &mut seen) {
                return None;
            }
        }
        Some(
            match_of_right
                .into_iter()
                .map(|m| m.expect("perfect"))
                .collect(),
        )
    }

    fn pairs(&self, match_of_right: &[usize]) -> Vec<MatchedPair> {
        let (na, nb) = (self.a.len(), self.b.len());
        let point = |(birth, death): (f64, f64)| MatchEnd::Point { birth, death };
        let mut out = Vec::new();
        for (right, &left) in match_of_right.iter().enumerate() {
            match (left < na, right < nb) {
                (true, true) => out.push(MatchedPair {
                    left: point(self.a[left]),
                    right: point(self.b[right]),
                    cost: point_cost(self.a[left], self.b[right]),
                }),
                (true, false) => out.push(MatchedPair {
                    left: point(self.a[left]),
                    right: MatchEnd::Diagonal,
                    cost: diagonal_cost(self.a[left]),
                }),
                (false, true) => out.push(MatchedPair {
                    left: MatchEnd::Diagonal,
                    right: point(self.b[right]),
                    cost: diagonal_cost(self.b[right]),
                }),
                (false, false) => {}
            }
        }
        out.sort_by(|x, y| {
            pair_key(x)
                .partial_cmp(&pair_key(y))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out
    }
}

fn pair_key(p: &MatchedPair) -> (u8, f64, f64) {
    match p.left {
        MatchEnd::Point { birth, death } => (0, birth, death),
        MatchEnd::Essential { birth } => (1, birth, 0.0),
        MatchEnd::Diagonal => match p.right {
            MatchEnd::Point { birth, death } => (2, birth, death),
            _ => (3, 0.0, 0.0),
        },
    }
}

/// Kuhn's augmenting-path step.
fn augment(
    left: usize,
    adjacency: &[Vec<usize>],
    match_of_right: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &right in &adjacency[left] {
        if seen[right] {
            continue;
        }
        seen[right] = true;
        let free = match match_of_right[right] {
            None => true,
            Some(other) => augment(other, adjacency, match_of_right, seen),
        };
        if free {
            match_of_right[right] = Some(left);
            return true;
        }
    }
    false
}
