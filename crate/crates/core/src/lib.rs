//! Group equivariant non-expansive operators (GENEOs) on sampled functions
//! over the circle.
//!
//! Functions live on an `n`-point grid of S¹ and groups act on it by index
//! permutations. Operators are finite combinator trees built only through
//! constructors that keep both axioms (equivariance, non-expansivity) intact;
//! `*_unchecked` constructors exist for counterexamples and are tracked by
//! [`Operator::is_validated`].
//!
//! ```
//! use geneo::{
//!     bottleneck_distance, natural_pseudo_distance, parse_operator, sublevel_diagram, Builtin,
//!     FunctionSpace, GridCircle, Group,
//! };
//!
//! let grid = GridCircle::new(360)?;
//! let group = Group::cyclic(grid);
//! let phi = Builtin::AbsSin.sample(grid)?;
//! let psi = Builtin::SinSq.sample(grid)?;
//!
//! let op = parse_operator("Mp(1; id, rot(pi/2))", &group, &FunctionSpace::unit_lipschitz())?;
//! let bound = bottleneck_distance(
//!     &sublevel_diagram(&op.apply(&phi)?),
//!     &sublevel_diagram(&op.apply(&psi)?),
//! );
//! assert!(bound <= natural_pseudo_distance(&phi, &psi, &group)? + 1e-9);
//! # Ok::<(), geneo::Error>(())
//! ```

// `!(x >= 0.0)` style checks are deliberate: they reject NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximation;
pub mod error;
pub mod function_space;
pub mod matching;
pub mod opdsl;
pub mod operator;
mod parallel;
pub mod persistence;
pub mod sampling;
pub mod validate;

pub use approximation::{
    gap_report, lower_bound, GapConfig, GapRecord, GapReport, LowerBound, SizeSummary,
};
pub use error::{Error, Result};
pub use function_space::{
    act, builtin_function, membership_check, natural_pseudo_distance,
    natural_pseudo_distance_with_witness, read_function_csv, sup_distance, write_function_csv,
    Builtin, FunctionSpace, GridCircle, Group, GroupElement, GroupKind, SampledFunction, Violation,
};
pub use matching::{bottleneck, bottleneck_distance, Matching};
pub use opdsl::{parse_operator, print_operator, ParseError};
pub use operator::{
    apply_in_space, norm_p, power_mean_values, ClosureMode, CoefficientSequence, FunctionMap,
    LipschitzMap, Operator, OperatorSequence, Series, TruncationPolicy,
};
pub use persistence::{diagram_equal, sublevel_diagram, DiagramJson, PersistenceDiagram};
pub use validate::{
    verify_equivariance, verify_nonexpansivity, EquivarianceReport, NonexpansivityReport,
};
