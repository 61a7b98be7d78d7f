//! Text form of operator trees.
//!
//! ```text
//! expr   := 'unchecked' expr
//!         | 'id'
//!         | 'rot' '(' angle ')' | 'refl' '(' angle ')'
//!         | 'Mp' '(' number ';' expr (',' expr)* ')'
//!         | 'L' '(' map ';' expr (',' expr)* ')'
//!         | 'series' '(' 'geom' '(' number ',' number ')' ',' family [';' 'eps' '=' number] ')'
//!         | 'compose' '(' expr ',' expr ')'
//! map    := 'max' | 'min' | 'proj' ':' int | 'convex' ':' number (',' number)*
//! family := 'rot-family' '(' angle ')' | 'const-family' '(' expr ')'
//! angle  := ['-'] '0' | ['-'] [int ['*']] 'pi' ['/' int]
//! ```
//!
//! Angles stay symbolic until they are resolved against a grid, where they
//! must be multiples of `2π/n`. `unchecked` lets the nodes below it skip the
//! GENEO constructor checks (`p ≥ 1`, commutation with G).

mod elaborate;
mod lexer;
mod parser;

use std::fmt;

use crate::function_space::GridCircle;
use crate::operator::{CoefficientSequence, LipschitzMap, Operator, OperatorSequence};

pub use elaborate::{elaborate, parse_operator};

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax {
        expected: Vec<String>,
        found: String,
    },
    Elaboration(String),
}

/// A diagnostic anchored at a byte offset.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn syntax(offset: usize, expected: Vec<String>, found: String) -> Self {
        ParseError {
            offset,
            kind: ParseErrorKind::Syntax { expected, found },
        }
    }

    pub(crate) fn elaboration(offset: usize, message: impl Into<String>) -> Self {
        ParseError {
            offset,
            kind: ParseErrorKind::Elaboration(message.into()),
        }
    }

    pub fn expected(&self) -> &[String] {
        match &self.kind {
            ParseErrorKind::Syntax { expected, .. } => expected,
            ParseErrorKind::Elaboration(_) => &[],
        }
    }
}

impl std::error::Error for ParseError {}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => write!(
                f,
                "syntax error at byte {}: expected {}, found {found}",
                self.offset,
                expected.join(" or ")
            ),
            ParseErrorKind::Elaboration(msg) => write!(f, "error at byte {}: {msg}", self.offset),
        }
    }
}

/// `num·π/den`, kept as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Angle {
    pub num: i64,
    pub den: u64,
}

impl Angle {
    /// Grid shift `s` with `num·π/den = 2πs/n`, if it is an integer.
    pub fn grid_shift(&self, grid: GridCircle) -> Option<i64> {
        let top = self.num as i128 * grid.n() as i128;
        let bottom = 2 * self.den as i128;
        (top % bottom == 0).then(|| (top / bottom).rem_euclid(grid.n() as i128) as i64)
    }

    /// The reduced angle `2πs/n`.
    pub fn from_shift(shift: usize, n: usize) -> Self {
        let (num, den) = (2 * shift as u64, n as u64);
        let g = gcd(num, den).max(1);
        Angle {
            num: (num / g) as i64,
            den: den / g,
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            return f.write_str("0");
        }
        if self.num < 0 {
            f.write_str("-")?;
        }
        let magnitude = self.num.unsigned_abs();
        if magnitude != 1 {
            write!(f, "{magnitude}")?;
        }
        f.write_str("pi")?;
        if self.den != 1 {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Max,
    Min,
    /// 1-based coordinate.
    Proj(usize),
    Convex(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Rotations(Angle),
    Constant(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Identity,
    Rot(Angle),
    Refl(Angle),
    PowerMean {
        p: f64,
        args: Vec<Expr>,
    },
    Lipschitz {
        map: MapSpec,
        args: Vec<Expr>,
    },
    Series {
        c: f64,
        r: f64,
        family: FamilySpec,
        eps: f64,
    },
    Compose(Box<Expr>, Box<Expr>),
    Unchecked(Box<Expr>),
}

/// Operator expression; equality ignores source positions.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Syntax only; angles are not resolved.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parser::Parser::new(text)?.parse_all()
}

/// Parses and resolves against `grid`: every angle must be grid-representable
/// and power means need `p ≥ 1` unless under `unchecked`.
pub fn parse(text: &str, grid: GridCircle) -> Result<Expr, ParseError> {
    let expr = parse_expr(text)?;
    elaborate::resolve(&expr, grid, false)?;
    Ok(expr)
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    write!(f, "{v}")
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Expr]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Identity => f.write_str("id"),
            ExprKind::Rot(a) => write!(f, "rot({a})"),
            ExprKind::Refl(a) => write!(f, "refl({a})"),
            ExprKind::PowerMean { p, args } => {
                f.write_str("Mp(")?;
                write_number(f, *p)?;
                f.write_str("; ")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            ExprKind::Lipschitz { map, args } => {
                f.write_str("L(")?;
                match map {
                    MapSpec::Max => f.write_str("max")?,
                    MapSpec::Min => f.write_str("min")?,
                    MapSpec::Proj(k) => write!(f, "proj:{k}")?,
                    MapSpec::Convex(w) => {
                        f.write_str("convex:")?;
                        for (i, x) in w.iter().enumerate() {
                            if i > 0 {
                                f.write_str(",")?;
                            }
                            write_number(f, *x)?;
                        }
                    }
                }
                f.write_str("; ")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            ExprKind::Series { c, r, family, eps } => {
                f.write_str("series(geom(")?;
                write_number(f, *c)?;
                f.write_str(",")?;
                write_number(f, *r)?;
                f.write_str("), ")?;
                match family {
                    FamilySpec::Rotations(a) => write!(f, "rot-family({a})")?,
                    FamilySpec::Constant(e) => write!(f, "const-family({e})")?,
                }
                f.write_str("; eps=")?;
                write_number(f, *eps)?;
                f.write_str(")")
            }
            ExprKind::Compose(a, b) => write!(f, "compose({a}, {b})"),
            ExprKind::Unchecked(e) => write!(f, "unchecked {e}"),
        }
    }
}

/// Expression that elaborates back to `op` (modulo the series bound, which
/// comes from the function space).
pub fn operator_to_expr(op: &Operator) -> Expr {
    let kind = match op {
        Operator::Identity => ExprKind::Identity,
        Operator::Precompose { element, unchecked } => {
            let angle = Angle::from_shift(element.shift(), element.n());
            let inner = if element.reflect() {
                ExprKind::Refl(angle)
            } else {
                ExprKind::Rot(angle)
            };
            return wrap(inner, *unchecked);
        }
        Operator::LipschitzCombine { map, children } => ExprKind::Lipschitz {
            map: match map {
                LipschitzMap::Max { .. } => MapSpec::Max,
                LipschitzMap::Min { .. } => MapSpec::Min,
                LipschitzMap::Projection { coordinate, .. } => MapSpec::Proj(*coordinate),
                LipschitzMap::Convex { weights } => MapSpec::Convex(weights.clone()),
            },
            args: children.iter().map(operator_to_expr).collect(),
        },
        Operator::PowerMean {
            p,
            children,
            unchecked,
        } => {
            let inner = ExprKind::PowerMean {
                p: *p,
                args: children.iter().map(operator_to_expr).collect(),
            };
            return wrap(inner, *unchecked);
        }
        Operator::Series(s) => {
            let CoefficientSequence::Geometric { c, r } = s.coefficients;
            let (family, unchecked) = match &s.family {
                OperatorSequence::Constant { operator } => (
                    FamilySpec::Constant(Box::new(operator_to_expr(operator))),
                    false,
                ),
                OperatorSequence::Rotations { n, step, unchecked } => (
                    FamilySpec::Rotations(Angle::from_shift(*step, *n)),
                    *unchecked,
                ),
            };
            let inner = ExprKind::Series {
                c,
                r,
                family,
                eps: s.truncation.epsilon,
            };
            return wrap(inner, unchecked);
        }
        Operator::Compose { outer, inner } => ExprKind::Compose(
            Box::new(operator_to_expr(outer)),
            Box::new(operator_to_expr(inner)),
        ),
    };
    Expr {
        kind,
        span: Span::default(),
    }
}

fn wrap(kind: ExprKind, unchecked: bool) -> Expr {
    let e = Expr {
        kind,
        span: Span::default(),
    };
    if unchecked {
        Expr {
            kind: ExprKind::Unchecked(Box::new(e)),
            span: Span::default(),
        }
    } else {
        e
    }
}

pub fn print_operator(op: &Operator) -> String {
    operator_to_expr(op).to_string()
}
