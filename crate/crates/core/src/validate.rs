//! Empirical checks of the two GENEO axioms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_space::{act, sup_distance_unchecked, Group, GroupElement, SampledFunction};
use crate::maybe_par_iter;
use crate::operator::FunctionMap;
use crate::parallel::argmax;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport {
    /// `max ‖F(φ∘g) − F(φ)∘g‖_∞` over probes and group elements.
    pub max_violation: f64,
    /// Probe index and group element attaining the maximum, if it is positive.
    pub witness: Option<(usize, GroupElement)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonexpansivityReport {
    /// `max(0, max ‖F(φ1) − F(φ2)‖_∞ − ‖φ1 − φ2‖_∞)` over the pairs.
    pub max_excess: f64,
    /// Pair index attaining the maximum, if it is positive.
    pub witness: Option<usize>,
    pub input_distance: f64,
    pub output_distance: f64,
}

/// Checks `F(φ∘g) = F(φ)∘g` for every probe and every `g ∈ G`.
pub fn verify_equivariance<F: FunctionMap + ?Sized>(
    op: &F,
    group: &Group,
    probes: &[SampledFunction],
) -> Result<EquivarianceReport> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("no probe functions".into()));
    }
    let per_probe: Vec<Result<(f64, GroupElement)>> = maybe_par_iter!(probes)
        .map(|phi| worst_element(op, group, phi))
        .collect();
    let per_probe = per_probe.into_iter().collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = per_probe.iter().map(|(v, _)| *v).collect();
    let best = argmax(&scores).expect("non-empty");
    let max_violation = scores[best];
    Ok(EquivarianceReport {
        max_violation,
        witness: (max_violation > 0.0).then(|| (best, per_probe[best].1)),
    })
}

fn worst_element<F: FunctionMap + ?Sized>(
    op: &F,
    group: &Group,
    phi: &SampledFunction,
) -> Result<(f64, GroupElement)> {
    let image = op.apply(phi)?;
    let mut worst = (0.0, GroupElement::identity(phi.len()));
    for g in group.elements() {
        let lhs = op.apply(&act(phi, g)?)?;
        let rhs = act(&image, g)?;
        let gap = sup_distance_unchecked(lhs.values(), rhs.values());
        if gap > worst.0 {
            worst = (gap, *g);
        }
    }
    Ok(worst)
}

/// Checks `‖F(φ1) − F(φ2)‖_∞ ≤ ‖φ1 − φ2‖_∞` on each pair.
pub fn verify_nonexpansivity<F: FunctionMap + ?Sized>(
    op: &F,
    pairs: &[(SampledFunction, SampledFunction)],
) -> Result<NonexpansivityReport> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("no probe pairs".into()));
    }
    let per_pair: Vec<Result<(f64, f64)>> = maybe_par_iter!(pairs)
        .map(|(a, b)| {
            let input = crate::function_space::sup_distance(a, b)?;
            let output = crate::function_space::sup_distance(&op.apply(a)?, &op.apply(b)?)?;
            Ok((input, output))
        })
        .collect();
    let per_pair = per_pair.into_iter().collect::<Result<Vec<_>>>()?;
    let excess: Vec<f64> = per_pair.iter().map(|(i, o)| o - i).collect();
    let best = argmax(&excess).expect("non-empty");
    let max_excess = excess[best].max(0.0);
    Ok(NonexpansivityReport {
        max_excess,
        witness: (max_excess > 0.0).then_some(best),
        input_distance: per_pair[best].0,
        output_distance: per_pair[best].1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::GridCircle;
    use crate::operator::Operator;
    use crate::sampling::{probe_pairs, probes};

    struct Square;

    impl FunctionMap for Square {
        fn apply(&self, phi: &SampledFunction) -> Result<SampledFunction> {
            phi.map(|v| v * v)
        }
    }

    fn setup() -> (GridCircle, Group) {
        let grid = GridCircle::new(36).unwrap();
        (grid, Group::cyclic(grid))
    }

    #[test]
    fn identity_is_clean() {
        let (grid, group) = setup();
        let id = Operator::identity();
        let eq = verify_equivariance(&id, &group, &probes(1, grid, 10)).unwrap();
        assert_eq!(eq.max_violation, 0.0);
        assert!(eq.witness.is_none());
        let ne = verify_nonexpansivity(&id, &probe_pairs(2, grid, 10)).unwrap();
        assert_eq!(ne.max_excess, 0.0);
    }

    #[test]
    fn rotation_commutes_with_rotations() {
        let (grid, group) = setup();
        let quarter = Operator::precompose(GroupElement::rotation(36, 9), &group).unwrap();
        let eq = verify_equivariance(&quarter, &group, &probes(3, grid, 20)).unwrap();
        assert_eq!(eq.max_violation, 0.0);
    }

    #[test]
    fn reflection_breaks_rotation_equivariance() {
        let (grid, group) = setup();
        let flip = Operator::precompose_unchecked(GroupElement::reflection(36, 0));
        let probes = probes(4, grid, 20);
        let eq = verify_equivariance(&flip, &group, &probes).unwrap();
        assert!(eq.max_violation > 0.1);
        let (i, g) = eq.witness.unwrap();
        // Replay the witness.
        let lhs = flip.apply(&act(&probes[i], &g).unwrap()).unwrap();
        let rhs = act(&flip.apply(&probes[i]).unwrap(), &g).unwrap();
        assert_eq!(
            sup_distance_unchecked(lhs.values(), rhs.values()),
            eq.max_violation
        );
    }

    #[test]
    fn squaring_is_expansive_on_large_values() {
        let (grid, _) = setup();
        let a = SampledFunction::constant(grid, 1.9).unwrap();
        let b = SampledFunction::constant(grid, 2.0).unwrap();
        let report = verify_nonexpansivity(&Square, &[(a, b)]).unwrap();
        // 4.0 − 3.61 = 0.39 against an input gap of 0.1.
        assert!((report.output_distance - 0.39).abs() < 1e-12);
        assert!((report.max_excess - 0.29).abs() < 1e-12);
        assert_eq!(report.witness, Some(0));
    }

    #[test]
    fn sub_unit_power_mean_is_expansive() {
        let (grid, group) = setup();
        let quarter = Operator::precompose(GroupElement::rotation(36, 9), &group).unwrap();
        let op = Operator::power_mean_unchecked(0.5, vec![Operator::identity(), quarter]).unwrap();
        let report = verify_nonexpansivity(&op, &probe_pairs(9, grid, 500)).unwrap();
        assert!(report.max_excess > 0.0);
        assert!(report.witness.is_some());
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let (_, group) = setup();
        assert!(verify_equivariance(&Operator::identity(), &group, &[]).is_err());
        assert!(verify_nonexpansivity(&Operator::identity(), &[]).is_err());
    }
}
