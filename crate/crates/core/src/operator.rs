//! GENEOs as executable combinator trees.
//!
//! Every safe constructor enforces the hypotheses under which the resulting
//! node is G-equivariant and non-expansive: precomposition only by elements
//! commuting with G, power means only for `p ≥ 1`, 1-Lipschitz maps for the
//! `L*` combinator, and series whose coefficients sum to at most one. The
//! `*_unchecked` constructors skip those checks and mark the node, so that
//! counterexamples can still be built and evaluated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::{
    membership_check, FunctionSpace, Group, GroupElement, SampledFunction,
};

/// Default sup-norm truncation error for series.
pub const DEFAULT_SERIES_EPSILON: f64 = 1e-9;

/// Hard cap on the number of series terms.
const MAX_SERIES_TERMS: usize = 100_000;

/// Anything that maps sampled functions to sampled functions. The validators
/// accept this so that non-GENEO maps can be probed as well.
pub trait FunctionMap: Sync {
    fn apply(&self, phi: &SampledFunction) -> Result<SampledFunction>;
}

/// A 1-Lipschitz map `ℝⁿ → ℝ` with respect to the max-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum LipschitzMap {
    Max {
        arity: usize,
    },
    Min {
        arity: usize,
    },
    /// Projection onto a 1-based coordinate.
    Projection {
        arity: usize,
        coordinate: usize,
    },
    /// `Σ wᵢ xᵢ` with `wᵢ ≥ 0` and `Σ wᵢ ≤ 1`.
    Convex {
        weights: Vec<f64>,
    },
}

impl LipschitzMap {
    pub fn max(arity: usize) -> Result<Self> {
        Self::check_arity(arity)?;
        Ok(LipschitzMap::Max { arity })
    }

    pub fn min(arity: usize) -> Result<Self> {
        Self::check_arity(arity)?;
        Ok(LipschitzMap::Min { arity })
    }

    pub fn projection(arity: usize, coordinate: usize) -> Result<Self> {
        Self::check_arity(arity)?;
        if coordinate == 0 || coordinate > arity {
            return Err(Error::InvalidParameter(format!(
                "projection coordinate {coordinate} outside 1..={arity}"
            )));
        }
        Ok(LipschitzMap::Projection { arity, coordinate })
    }

    pub fn convex(weights: Vec<f64>) -> Result<Self> {
        Self::check_arity(weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "convex weight {w} is not >= 0"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "convex weights sum to {total} > 1"
            )));
        }
        Ok(LipschitzMap::Convex { weights })
    }

    fn check_arity(arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::InvalidParameter(
                "Lipschitz map needs arity >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        match self {
            LipschitzMap::Max { arity }
            | LipschitzMap::Min { arity }
            | LipschitzMap::Projection { arity, .. } => *arity,
            LipschitzMap::Convex { weights } => weights.len(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity());
        match self {
            LipschitzMap::Max { .. } => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            LipschitzMap::Min { .. } => x.iter().copied().fold(f64::INFINITY, f64::min),
            LipschitzMap::Projection { coordinate, .. } => x[coordinate - 1],
            LipschitzMap::Convex { weights } => weights.iter().zip(x).map(|(w, v)| w * v).sum(),
        }
    }
}

/// `M_p(x) = ((1/n) Σ |xᵢ|^p)^{1/p}` for `p > 0`.
pub fn power_mean_values(p: f64, v: &[f64]) -> Result<f64> {
    if !(p > 0.0) || p.is_nan() {
        return Err(Error::NonPositiveExponent(p));
    }
    if v.is_empty() {
        return Err(Error::InvalidParameter(
            "power mean of an empty vector".into(),
        ));
    }
    Ok(power_mean_raw(p, v))
}

#[inline]
fn power_mean_raw(p: f64, v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if p == 1.0 {
        v.iter().map(|x| x.abs()).sum::<f64>() / n
    } else if p == 2.0 {
        (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt()
    } else {
        (v.iter().map(|x| x.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
    }
}

/// `‖x‖_p` for `p ≥ 1`; `p = ∞` gives `max |xᵢ|`.
pub fn norm_p(x: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::NormExponent(p));
    }
    if p == f64::INFINITY {
        return Ok(x.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(x.iter().map(|v| v.abs()).sum());
    }
    Ok(x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Closed-form positive, decreasing coefficient sequences with an exact tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientSequence {
    /// `a_k = c·r^{k−1}` for `k ≥ 1`, so that `Σ a_k = c/(1−r)`.
    Geometric { c: f64, r: f64 },
}

impl CoefficientSequence {
    pub fn geometric(c: f64, r: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "geometric scale must be > 0, got {c}"
            )));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric ratio must lie in (0, 1), got {r}"
            )));
        }
        let seq = CoefficientSequence::Geometric { c, r };
        let total = seq.total();
        if total > 1.0 + 1e-12 {
            return Err(Error::CoefficientSum(total));
        }
        Ok(seq)
    }

    /// `a_k`, 1-based.
    pub fn coefficient(&self, k: usize) -> f64 {
        assert!(k >= 1, "coefficients are 1-based");
        match *self {
            CoefficientSequence::Geometric { c, r } => c * r.powi(k as i32 - 1),
        }
    }

    pub fn total(&self) -> f64 {
        match *self {
            CoefficientSequence::Geometric { c, r } => c / (1.0 - r),
        }
    }

    /// `T(K) = Σ_{k>K} a_k`.
    pub fn tail(&self, terms: usize) -> f64 {
        match *self {
            CoefficientSequence::Geometric { c, r } => c * r.powi(terms as i32) / (1.0 - r),
        }
    }

    /// Smallest `K ≥ 1` with `T(K)·bound ≤ epsilon`.
    pub fn terms_for(&self, epsilon: f64, bound: f64) -> Result<usize> {
        (1..=MAX_SERIES_TERMS)
            .find(|&k| self.tail(k) * bound <= epsilon)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no truncation within {MAX_SERIES_TERMS} terms reaches epsilon {epsilon}"
                ))
            })
    }
}

/// Rule producing the k-th operator of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OperatorSequence {
    /// `F_k = F` for every `k`.
    Constant { operator: Box<Operator> },
    /// `F_k = precompose(rotation by step·k)`.
    Rotations {
        n: usize,
        step: usize,
        #[serde(default, skip_serializing_if = "is_false")]
        unchecked: bool,
    },
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl OperatorSequence {
    pub fn constant(operator: Operator) -> Self {
        OperatorSequence::Constant {
            operator: Box::new(operator),
        }
    }

    /// Rotation family; every member must commute with `group`.
    pub fn rotations(step: i64, group: &Group) -> Result<Self> {
        let n = group.grid().n();
        let generator = GroupElement::rotation(n, step);
        if !group.centralizes(&generator) {
            return Err(Error::NotCommuting(format!(
                "rotation family with {generator}"
            )));
        }
        Ok(OperatorSequence::Rotations {
            n,
            step: generator.shift(),
            unchecked: false,
        })
    }

    pub fn rotations_unchecked(n: usize, step: i64) -> Self {
        OperatorSequence::Rotations {
            n,
            step: step.rem_euclid(n as i64) as usize,
            unchecked: true,
        }
    }

    /// The k-th operator (1-based).
    pub fn operator(&self, k: usize) -> Operator {
        match self {
            OperatorSequence::Constant { operator } => (**operator).clone(),
            OperatorSequence::Rotations { n, step, unchecked } => Operator::Precompose {
                element: GroupElement::rotation(*n, (*step * k % *n) as i64),
                unchecked: *unchecked,
            },
        }
    }

    fn is_validated(&self) -> bool {
        match self {
            OperatorSequence::Constant { operator } => operator.is_validated(),
            OperatorSequence::Rotations { unchecked, .. } => !unchecked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub epsilon: f64,
}

impl TruncationPolicy {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        Ok(TruncationPolicy { epsilon })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            epsilon: DEFAULT_SERIES_EPSILON,
        }
    }
}

/// `Σ_{k=1}^{K} a_k F_k(φ)` with `K` picked so the dropped tail is at most
/// `epsilon` in sup-norm for every φ whose images `F_k(φ)` are bounded by
/// `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub coefficients: CoefficientSequence,
    pub family: OperatorSequence,
    pub truncation: TruncationPolicy,
    pub bound: f64,
    pub terms: usize,
}

impl Series {
    pub fn new(
        coefficients: CoefficientSequence,
        family: OperatorSequence,
        truncation: TruncationPolicy,
        bound: f64,
    ) -> Result<Self> {
        let total = coefficients.total();
        if total > 1.0 + 1e-12 {
            return Err(Error::CoefficientSum(total));
        }
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "series bound must be >= 0, got {bound}"
            )));
        }
        let terms = coefficients.terms_for(truncation.epsilon, bound)?;
        Ok(Series {
            coefficients,
            family,
            truncation,
            bound,
            terms,
        })
    }

    /// Same series cut after `terms` terms.
    pub fn truncated(&self, terms: usize) -> Series {
        Series {
            terms: terms.max(1),
            ..self.clone()
        }
    }

    /// Certified sup-norm distance to the infinite series: `T(K)·B`.
    pub fn tail_bound(&self) -> f64 {
        self.coefficients.tail(self.terms) * self.bound
    }

    fn evaluate(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let n = phi.len();
        let mut acc = vec![0.0; n];
        match &self.family {
            OperatorSequence::Constant { operator } => {
                let v = operator.eval(phi)?;
                for k in 1..=self.terms {
                    let a = self.coefficients.coefficient(k);
                    acc.iter_mut().zip(&v).for_each(|(s, x)| *s += a * x);
                }
            }
            OperatorSequence::Rotations { n: m, step, .. } => {
                if *m != n {
                    return Err(Error::IncompatibleGrids(n, *m));
                }
                for k in 1..=self.terms {
                    let a = self.coefficients.coefficient(k);
                    let shift = step * k % n;
                    for (i, s) in acc.iter_mut().enumerate() {
                        *s += a * phi[(shift + i) % n];
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// A GENEO as a finite combinator tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Identity,
    /// `φ ↦ φ∘g₀`.
    Precompose {
        element: GroupElement,
        #[serde(default, skip_serializing_if = "is_false")]
        unchecked: bool,
    },
    /// `L*(F_1, …, F_n)(φ)(x) = L(F_1(φ)(x), …, F_n(φ)(x))`.
    LipschitzCombine {
        map: LipschitzMap,
        children: Vec<Operator>,
    },
    /// Pointwise `M_p(F_1(φ)(x), …, F_n(φ)(x))`.
    PowerMean {
        p: f64,
        children: Vec<Operator>,
        #[serde(default, skip_serializing_if = "is_false")]
        unchecked: bool,
    },
    Series(Series),
    /// `outer ∘ inner`.
    Compose {
        outer: Box<Operator>,
        inner: Box<Operator>,
    },
}

impl Operator {
    pub fn identity() -> Self {
        Operator::Identity
    }

    /// Precomposition with `g0`, accepted only when `g0` commutes with all of `group`.
    pub fn precompose(g0: GroupElement, group: &Group) -> Result<Self> {
        if g0.n() != group.grid().n() {
            return Err(Error::IncompatibleGrids(group.grid().n(), g0.n()));
        }
        if !group.centralizes(&g0) {
            return Err(Error::NotCommuting(g0.to_string()));
        }
        Ok(Operator::Precompose {
            element: g0,
            unchecked: false,
        })
    }

    pub fn precompose_unchecked(g0: GroupElement) -> Self {
        Operator::Precompose {
            element: g0,
            unchecked: true,
        }
    }

    pub fn lipschitz_combine(map: LipschitzMap, children: Vec<Operator>) -> Result<Self> {
        if map.arity() != children.len() {
            return Err(Error::ArityMismatch {
                expected: map.arity(),
                found: children.len(),
            });
        }
        Ok(Operator::LipschitzCombine { map, children })
    }

    pub fn power_mean(p: f64, children: Vec<Operator>) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::ExponentBelowOne(p));
        }
        Self::power_mean_node(p, children, false)
    }

    /// Any `p > 0`; the node is flagged and never counts as a validated GENEO.
    pub fn power_mean_unchecked(p: f64, children: Vec<Operator>) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::NonPositiveExponent(p));
        }
        Self::power_mean_node(p, children, true)
    }

    fn power_mean_node(p: f64, children: Vec<Operator>, unchecked: bool) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidParameter(
                "power mean needs at least one operator".into(),
            ));
        }
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power mean exponent {p} is not finite"
            )));
        }
        Ok(Operator::PowerMean {
            p,
            children,
            unchecked,
        })
    }

    pub fn series(
        coefficients: CoefficientSequence,
        family: OperatorSequence,
        truncation: TruncationPolicy,
        bound: f64,
    ) -> Result<Self> {
        Series::new(coefficients, family, truncation, bound).map(Operator::Series)
    }

    pub fn compose(outer: Operator, inner: Operator) -> Result<Self> {
        if let (Some(a), Some(b)) = (outer.grid_size(), inner.grid_size()) {
            if a != b {
                return Err(Error::IncompatibleGrids(a, b));
            }
        }
        Ok(Operator::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    /// Grid size pinned by some group element in the tree, if any.
    pub fn grid_size(&self) -> Option<usize> {
        match self {
            Operator::Identity => None,
            Operator::Precompose { element, .. } => Some(element.n()),
            Operator::LipschitzCombine { children, .. } | Operator::PowerMean { children, .. } => {
                children.iter().find_map(Operator::grid_size)
            }
            Operator::Series(s) => match &s.family {
                OperatorSequence::Constant { operator } => operator.grid_size(),
                OperatorSequence::Rotations { n, .. } => Some(*n),
            },
            Operator::Compose { outer, inner } => outer.grid_size().or_else(|| inner.grid_size()),
        }
    }

    /// False when any node was built with an unchecked constructor.
    pub fn is_validated(&self) -> bool {
        match self {
            Operator::Identity => true,
            Operator::Precompose { unchecked, .. } => !unchecked,
            Operator::LipschitzCombine { children, .. } => {
                children.iter().all(Operator::is_validated)
            }
            Operator::PowerMean {
                children,
                unchecked,
                ..
            } => !unchecked && children.iter().all(Operator::is_validated),
            Operator::Series(s) => s.family.is_validated(),
            Operator::Compose { outer, inner } => outer.is_validated() && inner.is_validated(),
        }
    }

    /// Height of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Operator::Identity | Operator::Precompose { .. } => 1,
            Operator::LipschitzCombine { children, .. } | Operator::PowerMean { children, .. } => {
                1 + children.iter().map(Operator::depth).max().unwrap_or(0)
            }
            Operator::Series(s) => match &s.family {
                OperatorSequence::Constant { operator } => 1 + operator.depth(),
                OperatorSequence::Rotations { .. } => 2,
            },
            Operator::Compose { outer, inner } => 1 + outer.depth().max(inner.depth()),
        }
    }

    /// Rebuilds the tree through the checked constructors, e.g. after loading
    /// it from JSON. Unchecked nodes keep their flag.
    pub fn revalidate(&self, group: &Group, space: &FunctionSpace) -> Result<Operator> {
        match self {
            Operator::Identity => Ok(Operator::Identity),
            Operator::Precompose { element, unchecked } => {
                if *unchecked {
                    Ok(Operator::precompose_unchecked(*element))
                } else {
                    Operator::precompose(*element, group)
                }
            }
            Operator::LipschitzCombine { map, children } => {
                let map = match map {
                    LipschitzMap::Max { arity } => LipschitzMap::max(*arity)?,
                    LipschitzMap::Min { arity } => LipschitzMap::min(*arity)?,
                    LipschitzMap::Projection { arity, coordinate } => {
                        LipschitzMap::projection(*arity, *coordinate)?
                    }
                    LipschitzMap::Convex { weights } => LipschitzMap::convex(weights.clone())?,
                };
                let children = Self::revalidate_all(children, group, space)?;
                Operator::lipschitz_combine(map, children)
            }
            Operator::PowerMean {
                p,
                children,
                unchecked,
            } => {
                let children = Self::revalidate_all(children, group, space)?;
                if *unchecked {
                    Operator::power_mean_unchecked(*p, children)
                } else {
                    Operator::power_mean(*p, children)
                }
            }
            Operator::Series(s) => {
                let coefficients = match s.coefficients {
                    CoefficientSequence::Geometric { c, r } => {
                        CoefficientSequence::geometric(c, r)?
                    }
                };
                let family = match &s.family {
                    OperatorSequence::Constant { operator } => {
                        OperatorSequence::constant(operator.revalidate(group, space)?)
                    }
                    OperatorSequence::Rotations { n, step, unchecked } => {
                        if *unchecked {
                            OperatorSequence::rotations_unchecked(*n, *step as i64)
                        } else {
                            if *n != group.grid().n() {
                                return Err(Error::IncompatibleGrids(group.grid().n(), *n));
                            }
                            OperatorSequence::rotations(*step as i64, group)?
                        }
                    }
                };
                let truncation = TruncationPolicy::new(s.truncation.epsilon)?;
                Operator::series(coefficients, family, truncation, space.bound)
            }
            Operator::Compose { outer, inner } => Operator::compose(
                outer.revalidate(group, space)?,
                inner.revalidate(group, space)?,
            ),
        }
    }

    fn revalidate_all(
        ops: &[Operator],
        group: &Group,
        space: &FunctionSpace,
    ) -> Result<Vec<Operator>> {
        ops.iter().map(|op| op.revalidate(group, space)).collect()
    }

    /// Evaluates the tree on φ.
    pub fn apply(&self, phi: &SampledFunction) -> Result<SampledFunction> {
        let values = self.eval(phi.values())?;
        SampledFunction::new(phi.grid(), values)
    }

    fn eval(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let n = phi.len();
        match self {
            Operator::Identity => Ok(phi.to_vec()),
            Operator::Precompose { element, .. } => {
                if element.n() != n {
                    return Err(Error::IncompatibleGrids(n, element.n()));
                }
                Ok((0..n).map(|i| phi[element.map_index(i)]).collect())
            }
            Operator::LipschitzCombine { map, children } => {
                let outputs = Self::eval_all(children, phi)?;
                Ok(pointwise(&outputs, n, |x| map.evaluate(x)))
            }
            Operator::PowerMean { p, children, .. } => {
                let outputs = Self::eval_all(children, phi)?;
                Ok(pointwise(&outputs, n, |x| power_mean_raw(*p, x)))
            }
            Operator::Series(s) => s.evaluate(phi),
            Operator::Compose { outer, inner } => outer.eval(&inner.eval(phi)?),
        }
    }

    fn eval_all(children: &[Operator], phi: &[f64]) -> Result<Vec<Vec<f64>>> {
        children.iter().map(|c| c.eval(phi)).collect()
    }
}

fn pointwise(outputs: &[Vec<f64>], n: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut scratch = vec![0.0; outputs.len()];
    (0..n)
        .map(|i| {
            for (slot, out) in scratch.iter_mut().zip(outputs) {
                *slot = out[i];
            }
            f(&scratch)
        })
        .collect()
}

impl FunctionMap for Operator {
    fn apply(&self, phi: &SampledFunction) -> Result<SampledFunction> {
        Operator::apply(self, phi)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::opdsl::print_operator(self))
    }
}

pub fn apply(op: &Operator, phi: &SampledFunction) -> Result<SampledFunction> {
    op.apply(phi)
}

pub fn lipschitz_combine(map: LipschitzMap, ops: Vec<Operator>) -> Result<Operator> {
    Operator::lipschitz_combine(map, ops)
}

pub fn power_mean(p: f64, ops: Vec<Operator>) -> Result<Operator> {
    Operator::power_mean(p, ops)
}

pub fn series(
    coefficients: CoefficientSequence,
    family: OperatorSequence,
    truncation: TruncationPolicy,
    bound: f64,
) -> Result<Operator> {
    Operator::series(coefficients, family, truncation, bound)
}

pub fn compose(outer: Operator, inner: Operator) -> Result<Operator> {
    Operator::compose(outer, inner)
}

/// How [`apply_in_space`] reacts to outputs that leave Φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosureMode {
    /// Return an error.
    Strict,
    /// Log a warning and return the output anyway.
    #[default]
    Lax,
}

/// Applies `op` and checks the output against `space`, since closure
/// `F(Φ) ⊆ Φ` cannot be decided from the tree alone.
pub fn apply_in_space(
    op: &Operator,
    phi: &SampledFunction,
    space: &FunctionSpace,
    mode: ClosureMode,
) -> Result<SampledFunction> {
    let out = op.apply(phi)?;
    let violations = membership_check(space, &out);
    if let Some(first) = violations.first() {
        match mode {
            ClosureMode::Strict => return Err(Error::ClosureViolation(first.to_string())),
            ClosureMode::Lax => log::warn!(
                "{op}: output leaves the function space ({} violations, first: {first})",
                violations.len()
            ),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{act, sup_distance, Builtin, GridCircle};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn setup() -> (GridCircle, Group) {
        let grid = GridCircle::new(360).unwrap();
        (grid, Group::cyclic(grid))
    }

    fn quarter(group: &Group) -> Operator {
        Operator::precompose(GroupElement::rotation(360, 90), group).unwrap()
    }

    #[test]
    fn identity_and_quarter_turn() {
        let (grid, group) = setup();
        let psi = Builtin::SinSq.sample(grid).unwrap();
        assert_eq!(apply(&Operator::identity(), &psi).unwrap(), psi);

        let phi = Builtin::AbsSin.sample(grid).unwrap();
        let out = quarter(&group).apply(&phi).unwrap();
        let oracle = SampledFunction::from_fn(grid, |x| x.cos().abs()).unwrap();
        assert!(sup_distance(&out, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn mean_of_sin_sq_and_cos_sq_is_one_half() {
        let (grid, group) = setup();
        let psi = Builtin::SinSq.sample(grid).unwrap();
        let f = power_mean(1.0, vec![Operator::identity(), quarter(&group)]).unwrap();
        let out = f.apply(&psi).unwrap();
        assert!(out.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn mean_of_abs_sin_and_abs_cos() {
        let (grid, group) = setup();
        let phi = Builtin::AbsSin.sample(grid).unwrap();
        let f = power_mean(1.0, vec![Operator::identity(), quarter(&group)]).unwrap();
        let out = f.apply(&phi).unwrap();
        let oracle =
            SampledFunction::from_fn(grid, |x| (x.sin().abs() + x.cos().abs()) / 2.0).unwrap();
        assert!(sup_distance(&out, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn cubic_mean_flattens_sin_sq_root() {
        let (grid, group) = setup();
        let psi_hat = Builtin::SinSqRoot(3.0).sample(grid).unwrap();
        let f = power_mean(3.0, vec![Operator::identity(), quarter(&group)]).unwrap();
        let out = f.apply(&psi_hat).unwrap();
        let expected = 0.5f64.powf(1.0 / 3.0);
        assert!(out.values().iter().all(|v| (v - expected).abs() < 1e-12));
    }

    #[test]
    fn single_child_quadratic_mean_is_absolute_value() {
        let grid = GridCircle::new(8).unwrap();
        let phi =
            SampledFunction::new(grid, vec![-1.0, 2.0, -0.5, 0.0, 3.0, -3.0, 0.25, 1.0]).unwrap();
        let f = power_mean(2.0, vec![Operator::identity()]).unwrap();
        let out = f.apply(&phi).unwrap();
        for (o, v) in out.values().iter().zip(phi.values()) {
            assert!((o - v.abs()).abs() < 1e-15);
        }
        let nonneg = phi.map(f64::abs).unwrap();
        assert_eq!(f.apply(&nonneg).unwrap(), nonneg);
    }

    #[test]
    fn power_mean_rejects_small_exponents() {
        assert!(matches!(
            power_mean(0.5, vec![Operator::identity()]),
            Err(Error::ExponentBelowOne(_))
        ));
        let err = power_mean(0.5, vec![Operator::identity()]).unwrap_err();
        assert!(err.to_string().contains("not a 1-Lipschitz function"));
        assert!(power_mean(2.0, vec![]).is_err());
        let unchecked = Operator::power_mean_unchecked(0.5, vec![Operator::identity()]).unwrap();
        assert!(!unchecked.is_validated());
        assert!(Operator::power_mean_unchecked(0.0, vec![Operator::identity()]).is_err());
    }

    #[test]
    fn power_mean_value_examples() {
        for p in [0.3, 1.0, 2.0, 3.5] {
            let m = power_mean_values(p, &[-0.7, 0.7, 0.7]).unwrap();
            assert!((m - 0.7).abs() < 1e-15);
        }
        assert_eq!(power_mean_values(1.0, &[0.25, 0.75]).unwrap(), 0.5);
        for i in 0..50 {
            let x = i as f64 * 0.37;
            let m = power_mean_values(2.0, &[x.sin(), x.cos()]).unwrap();
            assert!((m - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!(power_mean_values(0.0, &[1.0]).is_err());
        assert!(power_mean_values(-1.0, &[1.0]).is_err());
        assert!(power_mean_values(1.0, &[]).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_p(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        for n in 1..6 {
            let ones = vec![1.0; n];
            for p in [1.0, 1.5, 2.0, 3.0] {
                let expected = (n as f64).powf(1.0 / p);
                assert!((norm_p(&ones, p).unwrap() - expected).abs() < 1e-12);
            }
            assert_eq!(norm_p(&ones, f64::INFINITY).unwrap(), 1.0);
        }
        assert!(matches!(norm_p(&[1.0], 0.5), Err(Error::NormExponent(_))));
        assert!(norm_p(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn lipschitz_combine_examples() {
        let (grid, group) = setup();
        let phi = Builtin::AbsSin.sample(grid).unwrap();
        let rot = quarter(&group);

        let proj = lipschitz_combine(
            LipschitzMap::projection(2, 1).unwrap(),
            vec![Operator::identity(), rot.clone()],
        )
        .unwrap();
        assert_eq!(proj.apply(&phi).unwrap(), phi);

        let max = lipschitz_combine(
            LipschitzMap::max(2).unwrap(),
            vec![Operator::identity(), rot.clone()],
        )
        .unwrap();
        let out = max.apply(&phi).unwrap();
        let oracle = SampledFunction::from_fn(grid, |x| x.sin().abs().max(x.cos().abs())).unwrap();
        assert!(sup_distance(&out, &oracle).unwrap() < 1e-12);
        let min_value = out.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min_value - FRAC_1_SQRT_2).abs() < 1e-12);
        // Minima sit at odd multiples of π/4, i.e. indices 45, 135, 225, 315.
        for i in [45, 135, 225, 315] {
            assert!((out[i] - FRAC_1_SQRT_2).abs() < 1e-12, "index {i}");
        }

        assert!(matches!(
            lipschitz_combine(LipschitzMap::max(3).unwrap(), vec![Operator::identity()]),
            Err(Error::ArityMismatch {
                expected: 3,
                found: 1
            })
        ));
    }

    #[test]
    fn lipschitz_map_constructors() {
        assert!(LipschitzMap::projection(2, 0).is_err());
        assert!(LipschitzMap::projection(2, 3).is_err());
        assert!(LipschitzMap::convex(vec![0.7, 0.4]).is_err());
        assert!(LipschitzMap::convex(vec![-0.1, 0.4]).is_err());
        assert!(LipschitzMap::max(0).is_err());
        let c = LipschitzMap::convex(vec![0.25, 0.5]).unwrap();
        assert_eq!(c.evaluate(&[4.0, 2.0]), 2.0);
    }

    #[test]
    fn precompose_requires_commutation() {
        let grid = GridCircle::new(12).unwrap();
        let reflection = GroupElement::reflection(12, 0);
        assert!(matches!(
            Operator::precompose(reflection, &Group::cyclic(grid)),
            Err(Error::NotCommuting(_))
        ));
        assert!(
            Operator::precompose(GroupElement::rotation(12, 6), &Group::dihedral(grid)).is_ok()
        );
        assert!(
            Operator::precompose(GroupElement::rotation(12, 3), &Group::dihedral(grid)).is_err()
        );
        assert!(Operator::precompose(reflection, &Group::trivial(grid)).is_ok());
        assert!(!Operator::precompose_unchecked(reflection).is_validated());
    }

    #[test]
    fn geometric_coefficients() {
        let seq = CoefficientSequence::geometric(0.5, 0.5).unwrap();
        assert_eq!(seq.coefficient(1), 0.5);
        assert_eq!(seq.coefficient(3), 0.125);
        assert_eq!(seq.total(), 1.0);
        // Tail oracle by direct summation.
        let direct: f64 = (11..200).map(|k| 0.5f64.powi(k)).sum();
        assert!((seq.tail(10) - direct).abs() < 1e-15);
        assert_eq!(seq.terms_for(1e-6, 1.0).unwrap(), 20);
        // 0.5^K <= 1e-9 first holds at K = 30.
        assert_eq!(seq.terms_for(1e-9, 1.0).unwrap(), 30);
        assert!(matches!(
            CoefficientSequence::geometric(0.6, 0.5),
            Err(Error::CoefficientSum(_))
        ));
        assert!(CoefficientSequence::geometric(0.5, 1.0).is_err());
        assert!(CoefficientSequence::geometric(0.0, 0.5).is_err());
    }

    #[test]
    fn series_of_identity_is_scaled_identity() {
        let grid = GridCircle::new(16).unwrap();
        let phi = SampledFunction::from_fn(grid, |x| x.sin()).unwrap();
        let f = series(
            CoefficientSequence::geometric(0.5, 0.5).unwrap(),
            OperatorSequence::constant(Operator::identity()),
            TruncationPolicy::new(1e-6).unwrap(),
            1.0,
        )
        .unwrap();
        let Operator::Series(s) = &f else {
            unreachable!()
        };
        assert_eq!(s.terms, 20);
        let out = f.apply(&phi).unwrap();
        let scale = 1.0 - 0.5f64.powi(20);
        for (o, v) in out.values().iter().zip(phi.values()) {
            assert!((o - scale * v).abs() < 1e-15);
        }
        assert!(sup_distance(&out, &phi).unwrap() <= 1e-6);
    }

    #[test]
    fn rotation_series_spot_value() {
        let (grid, group) = setup();
        let phi = Builtin::AbsSin.sample(grid).unwrap();
        let f = series(
            CoefficientSequence::geometric(0.5, 0.5).unwrap(),
            OperatorSequence::rotations(90, &group).unwrap(),
            TruncationPolicy::new(1e-6).unwrap(),
            1.0,
        )
        .unwrap();
        let out = f.apply(&phi).unwrap();
        // Direct summation of 2^{-k}|sin(kπ/2)| up to K = 20 and K = 40.
        let partial = |kmax: i32| {
            (1..=kmax)
                .map(|k| 0.5f64.powi(k) * (k as f64 * PI / 2.0).sin().abs())
                .sum::<f64>()
        };
        assert!((out[0] - partial(20)).abs() < 1e-12);
        assert!((out[0] - 0.666_666_030_883_789_1).abs() < 1e-12);
        assert!((out[0] - partial(40)).abs() <= 1e-6);
    }

    #[test]
    fn series_rejects_heavy_coefficients() {
        let grid = GridCircle::new(8).unwrap();
        let bad = CoefficientSequence::Geometric { c: 0.9, r: 0.5 };
        let err = series(
            bad,
            OperatorSequence::rotations(1, &Group::cyclic(grid)).unwrap(),
            TruncationPolicy::default(),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CoefficientSum(_)));
        assert!(OperatorSequence::rotations(1, &Group::dihedral(grid)).is_err());
    }

    #[test]
    fn compose_examples() {
        let grid = GridCircle::new(12).unwrap();
        let group = Group::cyclic(grid);
        let phi =
            SampledFunction::from_values((0..12).map(|i| ((i * 7) % 5) as f64).collect()).unwrap();
        let a = Operator::precompose(GroupElement::rotation(12, 5), &group).unwrap();
        let b = Operator::precompose(GroupElement::rotation(12, 9), &group).unwrap();
        let ab = compose(a.clone(), b.clone()).unwrap();
        let direct = Operator::precompose(GroupElement::rotation(12, 14), &group).unwrap();
        assert_eq!(ab.apply(&phi).unwrap(), direct.apply(&phi).unwrap());
        let id_a = compose(Operator::identity(), a.clone()).unwrap();
        assert_eq!(id_a.apply(&phi).unwrap(), a.apply(&phi).unwrap());
        let other = Operator::precompose_unchecked(GroupElement::rotation(10, 1));
        assert!(matches!(
            compose(a, other),
            Err(Error::IncompatibleGrids(12, 10))
        ));
    }

    #[test]
    fn apply_checks_grid() {
        let grid = GridCircle::new(10).unwrap();
        let phi = SampledFunction::constant(grid, 1.0).unwrap();
        let op = Operator::precompose_unchecked(GroupElement::rotation(12, 1));
        assert!(matches!(
            op.apply(&phi),
            Err(Error::IncompatibleGrids(10, 12))
        ));
    }

    #[test]
    fn closure_modes() {
        let grid = GridCircle::new(8).unwrap();
        let phi = SampledFunction::constant(grid, 1.0).unwrap();
        let double =
            lipschitz_combine(LipschitzMap::max(1).unwrap(), vec![Operator::identity()]).unwrap();
        let narrow = FunctionSpace::new(0.5).unwrap();
        assert!(matches!(
            apply_in_space(&double, &phi, &narrow, ClosureMode::Strict),
            Err(Error::ClosureViolation(_))
        ));
        assert!(apply_in_space(&double, &phi, &narrow, ClosureMode::Lax).is_ok());
    }

    #[test]
    fn equivariance_of_quarter_turn_is_exact() {
        let grid = GridCircle::new(24).unwrap();
        let group = Group::cyclic(grid);
        let f = Operator::precompose(GroupElement::rotation(24, 6), &group).unwrap();
        let phi = SampledFunction::from_values((0..24).map(|i| (i as f64 * 0.3).sin()).collect())
            .unwrap();
        for g in group.elements() {
            let lhs = f.apply(&act(&phi, g).unwrap()).unwrap();
            let rhs = act(&f.apply(&phi).unwrap(), g).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn json_round_trip_and_revalidate() {
        let (_, group) = setup();
        let space = FunctionSpace::unit_lipschitz();
        let f = power_mean(
            3.0,
            vec![
                Operator::identity(),
                series(
                    CoefficientSequence::geometric(0.3, 0.5).unwrap(),
                    OperatorSequence::rotations(45, &group).unwrap(),
                    TruncationPolicy::default(),
                    1.0,
                )
                .unwrap(),
            ],
        )
        .unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: Operator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.revalidate(&group, &space).unwrap(), f);

        let tampered = json.replace("\"p\":3.0", "\"p\":0.5");
        let bad: Operator = serde_json::from_str(&tampered).unwrap();
        assert!(bad.revalidate(&group, &space).is_err());
    }
}
