//! Lower bounds for the natural pseudo-distance from finite GENEO families.
//!
//! For every GENEO `F`, `d_match(Dgm(F(φ1)), Dgm(F(φ2))) ≤ d_G(φ1, φ2)`, so
//! the maximum over any finite family is a certified lower bound. The
//! supremum over all GENEOs is never claimed; [`gap_report`] measures how far
//! growing random families get.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_space::{
    membership_check, natural_pseudo_distance, FunctionSpace, Group, SampledFunction,
};
use crate::matching::bottleneck_distance;
use crate::maybe_par_iter;
use crate::operator::Operator;
use crate::parallel::argmax;
use crate::persistence::{sublevel_diagram, PersistenceDiagram};
use crate::sampling::{rng, TreeConfig, TreeGenerator};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// Index into the family of the first operator attaining `value`.
    pub argmax: usize,
}

fn check_family(family: &[Operator]) -> Result<()> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("operator family is empty".into()));
    }
    if let Some(i) = family.iter().position(|op| !op.is_validated()) {
        return Err(Error::UncheckedOperator(i));
    }
    Ok(())
}

/// `max_F bottleneck(Dgm(F(φ1)), Dgm(F(φ2)))` over a validated family.
pub fn lower_bound(
    family: &[Operator],
    phi1: &SampledFunction,
    phi2: &SampledFunction,
) -> Result<LowerBound> {
    check_family(family)?;
    let scores: Vec<Result<f64>> = maybe_par_iter!(family)
        .map(|op| {
            let a = sublevel_diagram(&op.apply(phi1)?);
            let b = sublevel_diagram(&op.apply(phi2)?);
            Ok(bottleneck_distance(&a, &b))
        })
        .collect();
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let argmax = argmax(&scores).expect("non-empty family");
    Ok(LowerBound {
        value: scores[argmax],
        argmax,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapConfig {
    pub seed: u64,
    /// Family sizes to report; families are nested prefixes of one sequence.
    pub family_sizes: Vec<usize>,
    pub tree: TreeConfig,
    /// Operators placed at the front of the sequence before random ones.
    pub prefix: Vec<Operator>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRecord {
    pub family_size: usize,
    pub left: String,
    pub right: String,
    pub d_g: f64,
    pub bound: f64,
    pub witness: usize,
    pub witness_operator: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub family_size: usize,
    pub max_gap: f64,
    pub mean_gap: f64,
    pub best_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub seed: u64,
    pub grid: usize,
    pub group: crate::function_space::GroupKind,
    pub max_depth: usize,
    pub family: Vec<String>,
    pub records: Vec<GapRecord>,
    pub summary: Vec<SizeSummary>,
}

impl GapReport {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.records {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Builds the operator sequence used by [`gap_report`]: the prefix followed
/// by seeded random validated trees, `len` operators in total.
pub fn family_sequence(
    config: &GapConfig,
    group: &Group,
    space: &FunctionSpace,
    len: usize,
) -> Result<Vec<Operator>> {
    let generator = TreeGenerator::new(group, *space, config.tree);
    let mut rng = rng(config.seed);
    let mut family: Vec<Operator> = config.prefix.iter().take(len).cloned().collect();
    while family.len() < len {
        family.push(generator.generate(&mut rng)?);
    }
    Ok(family)
}

/// For each family size `m`, the best lower bound from the first `m`
/// operators versus the exact `d_G`, for every unordered corpus pair.
pub fn gap_report(
    config: &GapConfig,
    corpus: &[(String, SampledFunction)],
    group: &Group,
    space: &FunctionSpace,
) -> Result<GapReport> {
    let mut sizes = config.family_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    sizes.retain(|&m| m > 0);
    let total = sizes.last().copied().unwrap_or(0);
    let family = family_sequence(config, group, space, total)?;
    if total > 0 {
        check_family(&family)?;
    }

    for (id, phi) in corpus {
        let violations = membership_check(space, phi);
        if let Some(v) = violations.first() {
            log::warn!("corpus function `{id}` is outside the function space: {v}");
        }
    }

    // diagrams[f][c] = Dgm(F_f(corpus_c))
    let diagrams: Vec<Result<Vec<PersistenceDiagram>>> = maybe_par_iter!(&family)
        .map(|op| {
            corpus
                .iter()
                .map(|(_, phi)| op.apply(phi).map(|out| sublevel_diagram(&out)))
                .collect()
        })
        .collect();
    let diagrams = diagrams.into_iter().collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| (i + 1..corpus.len()).map(move |j| (i, j)))
        .collect();
    let per_pair: Vec<Result<(f64, Vec<f64>)>> = maybe_par_iter!(&pairs)
        .map(|&(i, j)| {
            let d_g = natural_pseudo_distance(&corpus[i].1, &corpus[j].1, group)?;
            let scores = diagrams
                .iter()
                .map(|per_fn| bottleneck_distance(&per_fn[i], &per_fn[j]))
                .collect();
            Ok((d_g, scores))
        })
        .collect();
    let per_pair = per_pair.into_iter().collect::<Result<Vec<_>>>()?;

    let names: Vec<String> = family.iter().map(Operator::to_string).collect();
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for &m in &sizes {
        let mut gaps = Vec::with_capacity(pairs.len());
        let mut best_bound: f64 = 0.0;
        for (&(i, j), (d_g, scores)) in pairs.iter().zip(&per_pair) {
            let witness = argmax(&scores[..m]).expect("m > 0");
            let bound = scores[witness];
            let gap = d_g - bound;
            best_bound = best_bound.max(bound);
            gaps.push(gap);
            records.push(GapRecord {
                family_size: m,
                left: corpus[i].0.clone(),
                right: corpus[j].0.clone(),
                d_g: *d_g,
                bound,
                witness,
                witness_operator: names[witness].clone(),
                gap,
            });
        }
        let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean_gap = if gaps.is_empty() {
            0.0
        } else {
            gaps.iter().sum::<f64>() / gaps.len() as f64
        };
        summary.push(SizeSummary {
            family_size: m,
            max_gap: if gaps.is_empty() { 0.0 } else { max_gap },
            mean_gap,
            best_bound,
        });
    }

    Ok(GapReport {
        seed: config.seed,
        grid: group.grid().n(),
        group: group.kind(),
        max_depth: config.tree.max_depth,
        family: names,
        records,
        summary,
    })
}
