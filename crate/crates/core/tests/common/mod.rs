//! Brute-force reference implementations shared by the integration tests.
//! None of them call into the library code they are compared against.
#![allow(dead_code)]

use proptest::prelude::*;

/// Index permutations of the rotation group on `n` points.
pub fn rotation_perms(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|s| (0..n).map(|i| (i + s) % n).collect())
        .collect()
}

/// Rotations followed by reflections `i ↦ s − i`.
pub fn dihedral_perms(n: usize) -> Vec<Vec<usize>> {
    let mut out = rotation_perms(n);
    out.extend((0..n).map(|s| (0..n).map(|i| (s + n - i) % n).collect()));
    out
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `min_g max_i |a(i) − b(g(i))|` over explicit permutations.
pub fn d_g_oracle(a: &[f64], b: &[f64], perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|p| {
            let moved: Vec<f64> = p.iter().map(|&j| b[j]).collect();
            sup(a, &moved)
        })
        .fold(f64::INFINITY, f64::min)
}

/// H₀ sublevel persistence on the cycle graph by sweeping thresholds and
/// recomputing connected components from scratch at every level.
///
/// Returns sorted finite pairs with positive persistence and the essential
/// births.
pub fn sweep_oracle(values: &[f64]) -> (Vec<(f64, f64)>, Vec<f64>) {
    let n = values.len();
    let mut levels: Vec<f64> = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    // label[i] = birth value of the component holding i at the previous level.
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut prev_birth: Vec<f64> = Vec::new();
    let mut pairs = Vec::new();
    for &t in &levels {
        let inside: Vec<bool> = values.iter().map(|&v| v <= t).collect();
        let mut comp: Vec<Option<usize>> = vec![None; n];
        let mut count = 0;
        for start in 0..n {
            if !inside[start] || comp[start].is_some() {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = Some(count);
            while let Some(v) = stack.pop() {
                for w in [(v + 1) % n, (v + n - 1) % n] {
                    if inside[w] && comp[w].is_none() {
                        comp[w] = Some(count);
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        let mut births = vec![f64::INFINITY; count];
        let mut absorbed: Vec<Vec<usize>> = vec![Vec::new(); count];
        for i in 0..n {
            if let (Some(c), Some(p)) = (comp[i], prev[i]) {
                if !absorbed[c].contains(&p) {
                    absorbed[c].push(p);
                }
            }
        }
        for c in 0..count {
            if absorbed[c].is_empty() {
                births[c] = t;
                continue;
            }
            let mut olds: Vec<f64> = absorbed[c].iter().map(|&p| prev_birth[p]).collect();
            olds.sort_by(f64::total_cmp);
            births[c] = olds[0];
            for &b in &olds[1..] {
                if b < t {
                    pairs.push((b, t));
                }
            }
        }
        prev = comp;
        prev_birth = births;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut essential = prev_birth;
    essential.sort_by(f64::total_cmp);
    (pairs, essential)
}

/// Bottleneck distance between finite diagrams by enumerating every partial
/// injection from `a` into `b`; unmatched points go to the diagonal.
pub fn bottleneck_oracle(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn diag(p: (f64, f64)) -> f64 {
        (p.1 - p.0) / 2.0
    }
    fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
        (p.0 - q.0).abs().max((p.1 - q.1).abs())
    }
    fn go(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        cost: f64,
        best: &mut f64,
    ) {
        if cost >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(q, _)| diag(*q))
                .fold(cost, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, cost.max(diag(a[i])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, cost.max(linf(a[i], b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Values on a coarse lattice so ties and plateaus are common.
pub fn plateau_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..6).prop_map(|k| k as f64 * 0.25), 3..=max_len)
}

pub fn smooth_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 3..=max_len)
}

/// Mixture of generic and plateau-heavy samples.
pub fn any_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![smooth_values(max_len), plateau_values(max_len)]
}

pub fn finite_points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        (-5.0f64..5.0, 0.0f64..5.0).prop_map(|(b, l)| (b, b + l)),
        0..=max,
    )
}
