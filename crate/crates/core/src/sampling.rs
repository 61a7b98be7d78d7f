//! Seeded generators for probe functions and random validated operator trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::function_space::{
    Builtin, FunctionSpace, GridCircle, Group, GroupElement, SampledFunction,
};
use crate::operator::{
    CoefficientSequence, LipschitzMap, Operator, OperatorSequence, TruncationPolicy,
};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `lipschitz`-Lipschitz function into `[low, high]`.
///
/// Built from a closed random walk (increments recentred to sum to zero, so
/// the wrap-around edge obeys the same bound) then clamped, which cannot
/// increase any increment.
pub fn random_lipschitz<R: Rng + ?Sized>(
    rng: &mut R,
    grid: GridCircle,
    lipschitz: f64,
    (low, high): (f64, f64),
) -> SampledFunction {
    let n = grid.n();
    let max_step = lipschitz * grid.step();
    let mut steps: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(-0.5..=0.5) * max_step)
        .collect();
    let mean = steps.iter().sum::<f64>() / n as f64;
    steps.iter_mut().for_each(|s| *s -= mean);
    let mut value = rng.gen_range(low..=high);
    let mut values = Vec::with_capacity(n);
    for s in steps {
        values.push(value.clamp(low, high));
        value += s;
    }
    SampledFunction::from_raw(grid, values)
}

/// Random probe for the unit Lipschitz space `Φ` of 1-Lipschitz maps into `[0, 1]`.
pub fn random_probe<R: Rng + ?Sized>(rng: &mut R, grid: GridCircle) -> SampledFunction {
    random_lipschitz(rng, grid, 1.0, (0.0, 1.0))
}

/// Unconstrained values in `[low, high)`.
pub fn random_rough<R: Rng + ?Sized>(
    rng: &mut R,
    grid: GridCircle,
    (low, high): (f64, f64),
) -> SampledFunction {
    let values = (0..grid.n()).map(|_| rng.gen_range(low..high)).collect();
    SampledFunction::from_raw(grid, values)
}

/// `|sin|` and `sin²` followed by random 1-Lipschitz probes, `count` in total.
/// (`(sin²)^(1/p)` is left out: its slope is unbounded at the zeros.)
pub fn probes(seed: u64, grid: GridCircle, count: usize) -> Vec<SampledFunction> {
    let mut rng = rng(seed);
    let mut out: Vec<SampledFunction> = [Builtin::AbsSin, Builtin::SinSq]
        .iter()
        .filter_map(|b| b.sample(grid).ok())
        .take(count)
        .collect();
    while out.len() < count {
        out.push(random_probe(&mut rng, grid));
    }
    out
}

/// Pairs for non-expansivity checks: alternately two independent probes, and
/// a probe with a clamped upward perturbation of size up to 0.25.
pub fn probe_pairs(
    seed: u64,
    grid: GridCircle,
    count: usize,
) -> Vec<(SampledFunction, SampledFunction)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let a = random_probe(&mut rng, grid);
            let b = if i % 2 == 0 {
                random_probe(&mut rng, grid)
            } else {
                let delta = rng.gen_range(0.0..0.25);
                let values = a.values().iter().map(|v| (v + delta).min(1.0)).collect();
                SampledFunction::from_raw(grid, values)
            };
            (a, b)
        })
        .collect()
}

/// Shape of randomly generated operator trees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub max_children: usize,
    pub epsilon: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 4,
            max_children: 3,
            epsilon: 1e-9,
        }
    }
}

/// Random validated combinator trees over identity, commuting rotations,
/// power means with `p ∈ {1, 2, 3}`, max/min/projection/convex combinations,
/// geometric series and composition.
pub struct TreeGenerator<'a> {
    group: &'a Group,
    space: FunctionSpace,
    config: TreeConfig,
    rotations: Vec<GroupElement>,
}

impl<'a> TreeGenerator<'a> {
    pub fn new(group: &'a Group, space: FunctionSpace, config: TreeConfig) -> Self {
        let n = group.grid().n();
        let rotations = (0..n as i64)
            .map(|s| GroupElement::rotation(n, s))
            .filter(|g| group.centralizes(g))
            .collect();
        TreeGenerator {
            group,
            space,
            config,
            rotations,
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Operator> {
        let depth = rng.gen_range(1..=self.config.max_depth.max(1));
        self.tree(rng, depth)
    }

    fn leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Operator> {
        if rng.gen_bool(0.3) {
            return Ok(Operator::identity());
        }
        let g = *self
            .rotations
            .choose(rng)
            .expect("identity always commutes");
        Operator::precompose(g, self.group)
    }

    fn children<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize) -> Result<Vec<Operator>> {
        let count = rng.gen_range(1..=self.config.max_children.max(1));
        (0..count).map(|_| self.tree(rng, depth)).collect()
    }

    fn tree<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize) -> Result<Operator> {
        if depth <= 1 {
            return self.leaf(rng);
        }
        let sub = depth - 1;
        match rng.gen_range(0..5) {
            0 => {
                let p = [1.0, 2.0, 3.0][rng.gen_range(0..3)];
                Operator::power_mean(p, self.children(rng, sub)?)
            }
            1 => {
                let children = self.children(rng, sub)?;
                let k = children.len();
                let map = match rng.gen_range(0..4) {
                    0 => LipschitzMap::max(k)?,
                    1 => LipschitzMap::min(k)?,
                    2 => LipschitzMap::projection(k, rng.gen_range(1..=k))?,
                    _ => {
                        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
                        let total: f64 = raw.iter().sum::<f64>().max(1e-12);
                        let scale = rng.gen_range(0.5..=1.0) / total;
                        LipschitzMap::convex(
                            raw.iter().map(|w| w * scale * (1.0 - 1e-12)).collect(),
                        )?
                    }
                };
                Operator::lipschitz_combine(map, children)
            }
            2 => {
                let r = rng.gen_range(0.2..0.7);
                let c = (1.0 - r) * rng.gen_range(0.5..=1.0);
                let coefficients = CoefficientSequence::geometric(c, r)?;
                let family = if rng.gen_bool(0.5) {
                    let step = *self
                        .rotations
                        .choose(rng)
                        .expect("identity always commutes");
                    OperatorSequence::rotations(step.shift() as i64, self.group)?
                } else {
                    OperatorSequence::constant(self.tree(rng, sub)?)
                };
                Operator::series(
                    coefficients,
                    family,
                    TruncationPolicy::new(self.config.epsilon)?,
                    self.space.bound,
                )
            }
            3 => Operator::compose(self.tree(rng, sub)?, self.tree(rng, sub)?),
            _ => self.leaf(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::membership_check;

    #[test]
    fn probes_live_in_the_unit_lipschitz_space() {
        let grid = GridCircle::new(64).unwrap();
        let space = FunctionSpace::unit_lipschitz();
        for phi in probes(7, grid, 200) {
            assert!(membership_check(&space, &phi).is_empty());
        }
        for (a, b) in probe_pairs(8, grid, 50) {
            assert!(membership_check(&space, &a).is_empty());
            assert!(membership_check(&space, &b).is_empty());
        }
    }

    #[test]
    fn probes_are_reproducible() {
        let grid = GridCircle::new(16).unwrap();
        assert_eq!(probes(3, grid, 10), probes(3, grid, 10));
        assert_ne!(probes(3, grid, 10), probes(4, grid, 10));
    }

    #[test]
    fn trees_are_validated_and_bounded() {
        let grid = GridCircle::new(24).unwrap();
        let group = Group::cyclic(grid);
        let generator = TreeGenerator::new(
            &group,
            FunctionSpace::unit_lipschitz(),
            TreeConfig::default(),
        );
        let mut rng = rng(11);
        for _ in 0..200 {
            let op = generator.generate(&mut rng).unwrap();
            assert!(op.is_validated());
            assert!(op.depth() <= 4, "{op}");
        }
    }

    #[test]
    fn dihedral_trees_only_use_central_rotations() {
        let grid = GridCircle::new(12).unwrap();
        let group = Group::dihedral(grid);
        let generator = TreeGenerator::new(
            &group,
            FunctionSpace::unit_lipschitz(),
            TreeConfig::default(),
        );
        assert_eq!(generator.rotations.len(), 2);
        let mut rng = rng(5);
        for _ in 0..50 {
            generator.generate(&mut rng).unwrap();
        }
    }
}
