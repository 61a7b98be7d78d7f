use super::{parse_expr, Angle, Expr, ExprKind, FamilySpec, MapSpec, ParseError};
use crate::error::{Error, Result};
use crate::function_space::{FunctionSpace, GridCircle, Group, GroupElement};
use crate::operator::{
    CoefficientSequence, LipschitzMap, Operator, OperatorSequence, TruncationPolicy,
};

fn shift_of(angle: &Angle, grid: GridCircle, at: usize) -> std::result::Result<i64, ParseError> {
    angle.grid_shift(grid).ok_or_else(|| {
        ParseError::elaboration(
            at,
            format!(
                "angle {angle} is not a multiple of 2pi/{} on this grid",
                grid.n()
            ),
        )
    })
}

/// Grid-level checks that need no group: angles land on grid points and
/// power-mean exponents are admissible.
pub(crate) fn resolve(
    expr: &Expr,
    grid: GridCircle,
    unchecked: bool,
) -> std::result::Result<(), ParseError> {
    let at = expr.span.start;
    match &expr.kind {
        ExprKind::Identity => Ok(()),
        ExprKind::Rot(a) | ExprKind::Refl(a) => shift_of(a, grid, at).map(|_| ()),
        ExprKind::PowerMean { p, args } => {
            if !(*p > 0.0) {
                return Err(ParseError::elaboration(
                    at,
                    format!("power mean exponent must be > 0, got {p}"),
                ));
            }
            if *p < 1.0 && !unchecked {
                return Err(ParseError::elaboration(
                    at,
                    format!(
                        "power mean exponent {p} < 1 is not non-expansive; wrap it in `unchecked`"
                    ),
                ));
            }
            args.iter().try_for_each(|e| resolve(e, grid, unchecked))
        }
        ExprKind::Lipschitz { args, .. } => {
            args.iter().try_for_each(|e| resolve(e, grid, unchecked))
        }
        ExprKind::Series { family, .. } => match family {
            FamilySpec::Rotations(a) => shift_of(a, grid, at).map(|_| ()),
            FamilySpec::Constant(e) => resolve(e, grid, unchecked),
        },
        ExprKind::Compose(a, b) => {
            resolve(a, grid, unchecked)?;
            resolve(b, grid, unchecked)
        }
        ExprKind::Unchecked(e) => resolve(e, grid, true),
    }
}

/// Builds the operator through the library constructors. Outside `unchecked`
/// every constructor check applies; inside it, a node that fails its GENEO
/// check is built unchecked instead.
pub fn elaborate(expr: &Expr, group: &Group, space: &FunctionSpace) -> Result<Operator> {
    resolve(expr, group.grid(), false)?;
    build(expr, group, space, false)
}

/// [`parse_expr`] followed by [`elaborate`].
pub fn parse_operator(text: &str, group: &Group, space: &FunctionSpace) -> Result<Operator> {
    elaborate(&parse_expr(text)?, group, space)
}

fn located(at: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse(p) => Error::Parse(p),
        other => Error::Parse(ParseError::elaboration(at, other.to_string())),
    }
}

fn build(expr: &Expr, group: &Group, space: &FunctionSpace, unchecked: bool) -> Result<Operator> {
    let grid = group.grid();
    let n = grid.n();
    let at = expr.span.start;
    let children = |args: &[Expr]| -> Result<Vec<Operator>> {
        args.iter()
            .map(|e| build(e, group, space, unchecked))
            .collect()
    };
    match &expr.kind {
        ExprKind::Identity => Ok(Operator::identity()),
        ExprKind::Rot(a) | ExprKind::Refl(a) => {
            let shift = shift_of(a, grid, at)?;
            let g = if matches!(expr.kind, ExprKind::Rot(_)) {
                GroupElement::rotation(n, shift)
            } else {
                GroupElement::reflection(n, shift)
            };
            match Operator::precompose(g, group) {
                Err(_) if unchecked => Ok(Operator::precompose_unchecked(g)),
                other => other.map_err(located(at)),
            }
        }
        ExprKind::PowerMean { p, args } => {
            let kids = children(args)?;
            if unchecked && *p < 1.0 {
                Operator::power_mean_unchecked(*p, kids).map_err(located(at))
            } else {
                Operator::power_mean(*p, kids).map_err(located(at))
            }
        }
        ExprKind::Lipschitz { map, args } => {
            let kids = children(args)?;
            let arity = kids.len();
            let map = match map {
                MapSpec::Max => LipschitzMap::max(arity),
                MapSpec::Min => LipschitzMap::min(arity),
                MapSpec::Proj(k) => LipschitzMap::projection(arity, *k),
                MapSpec::Convex(w) => LipschitzMap::convex(w.clone()),
            }
            .map_err(located(at))?;
            Operator::lipschitz_combine(map, kids).map_err(located(at))
        }
        ExprKind::Series { c, r, family, eps } => {
            let coefficients = CoefficientSequence::geometric(*c, *r).map_err(located(at))?;
            let family = match family {
                FamilySpec::Rotations(a) => {
                    let step = shift_of(a, grid, at)?;
                    match OperatorSequence::rotations(step, group) {
                        Err(_) if unchecked => Ok(OperatorSequence::rotations_unchecked(n, step)),
                        other => other.map_err(located(at)),
                    }?
                }
                FamilySpec::Constant(e) => {
                    OperatorSequence::constant(build(e, group, space, unchecked)?)
                }
            };
            let policy = TruncationPolicy::new(*eps).map_err(located(at))?;
            Operator::series(coefficients, family, policy, space.bound).map_err(located(at))
        }
        ExprKind::Compose(a, b) => {
            let outer = build(a, group, space, unchecked)?;
            let inner = build(b, group, space, unchecked)?;
            Operator::compose(outer, inner).map_err(located(at))
        }
        ExprKind::Unchecked(e) => build(e, group, space, true),
    }
}
