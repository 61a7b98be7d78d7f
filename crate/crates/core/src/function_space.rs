//! Sampled functions on the circle, the grid-preserving symmetry groups acting
//! on them, and the exact natural pseudo-distance.
//!
//! The circle is replaced by `n` uniform samples at angles `2πi/n`. Group
//! elements are index permutations (rotations and reflections), so the right
//! action `φ ↦ φ∘g` involves no interpolation and equivariance can be checked
//! exactly.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maybe_par_iter;
use crate::parallel::argmin;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default comparison tolerance for floating-point checks.
pub const TOLERANCE: f64 = 1e-9;

/// `n` uniform samples on S¹ at angles `x_i = 2πi/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCircle {
    n: usize,
}

impl GridCircle {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::GridTooSmall(n));
        }
        Ok(GridCircle { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Angular spacing `2π/n`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn angle(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    /// `|sin x_i|`, reduced to `[0, π/2]` in integer arithmetic first so that
    /// symmetric grid points get identical values and `x_i ∈ {0, π}` gives 0.
    pub fn abs_sin(&self, i: usize) -> f64 {
        let n = self.n;
        let k = i % n;
        let k = k.min(n - k);
        let m = (2 * k).min(n - 2 * k);
        (m as f64 / n as f64 * PI).sin()
    }

    fn check_same(&self, other: &GridCircle) -> Result<()> {
        if self.n != other.n {
            return Err(Error::IncompatibleGrids(self.n, other.n));
        }
        Ok(())
    }
}

/// Real values on a [`GridCircle`]; all values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: GridCircle,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: GridCircle, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::IncompatibleGrids(grid.n(), values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(SampledFunction { grid, values })
    }

    /// Grid size inferred from the number of values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        SampledFunction::new(GridCircle::new(values.len())?, values)
    }

    /// Samples `f` at the grid angles.
    pub fn from_fn(grid: GridCircle, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|i| f(grid.angle(i))).collect();
        SampledFunction::new(grid, values)
    }

    pub fn constant(grid: GridCircle, c: f64) -> Result<Self> {
        SampledFunction::new(grid, vec![c; grid.n()])
    }

    pub fn grid(&self) -> GridCircle {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        SampledFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise sum `φ + c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        self.map(|v| v + c)
    }

    pub(crate) fn from_raw(grid: GridCircle, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.n(), values.len());
        SampledFunction { grid, values }
    }
}

impl std::ops::Index<usize> for SampledFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// A grid-preserving homeomorphism of the circle:
/// `i ↦ shift + i` or, when `reflect`, `i ↦ shift − i` (mod n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    n: usize,
    shift: usize,
    reflect: bool,
}

impl GroupElement {
    pub fn new(n: usize, shift: i64, reflect: bool) -> Self {
        assert!(n > 0, "group element on an empty grid");
        let shift = shift.rem_euclid(n as i64) as usize;
        GroupElement { n, shift, reflect }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement::new(n, 0, false)
    }

    pub fn rotation(n: usize, shift: i64) -> Self {
        GroupElement::new(n, shift, false)
    }

    pub fn reflection(n: usize, shift: i64) -> Self {
        GroupElement::new(n, shift, true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn reflect(&self) -> bool {
        self.reflect
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0 && !self.reflect
    }

    /// Image of grid index `i`.
    #[inline]
    pub fn map_index(&self, i: usize) -> usize {
        let i = i % self.n;
        if self.reflect {
            (self.shift + self.n - i) % self.n
        } else {
            (self.shift + i) % self.n
        }
    }

    /// The product `self·other`, acting on indices as `self ∘ other`.
    ///
    /// With this convention `act(φ, g·h) = act(act(φ, g), h)`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.n, other.n, "composing elements of different grids");
        let n = self.n as i64;
        let sign = if self.reflect { -1 } else { 1 };
        GroupElement::new(
            self.n,
            self.shift as i64 + sign * other.shift as i64 % n,
            self.reflect ^ other.reflect,
        )
    }

    pub fn inverse(&self) -> GroupElement {
        if self.reflect {
            *self
        } else {
            GroupElement::new(self.n, -(self.shift as i64), false)
        }
    }

    pub fn commutes_with(&self, other: &GroupElement) -> bool {
        self.compose(other) == other.compose(self)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reflect {
            write!(f, "reflection(shift {} of {})", self.shift, self.n)
        } else {
            write!(f, "rotation(shift {} of {})", self.shift, self.n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Trivial,
    Cyclic,
    Dihedral,
    Explicit,
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(GroupKind::Trivial),
            "cyclic" | "rotations" => Ok(GroupKind::Cyclic),
            "dihedral" => Ok(GroupKind::Dihedral),
            other => Err(Error::InvalidParameter(format!(
                "unknown group `{other}` (expected trivial, rotations, dihedral)"
            ))),
        }
    }
}

/// A finite group of grid-preserving maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    grid: GridCircle,
    kind: GroupKind,
    elements: Vec<GroupElement>,
}

impl Group {
    pub fn trivial(grid: GridCircle) -> Self {
        Group {
            grid,
            kind: GroupKind::Trivial,
            elements: vec![GroupElement::identity(grid.n())],
        }
    }

    /// All `n` rotations.
    pub fn cyclic(grid: GridCircle) -> Self {
        let n = grid.n();
        Group {
            grid,
            kind: GroupKind::Cyclic,
            elements: (0..n as i64)
                .map(|s| GroupElement::rotation(n, s))
                .collect(),
        }
    }

    /// All `n` rotations followed by all `n` reflections.
    pub fn dihedral(grid: GridCircle) -> Self {
        let n = grid.n();
        let rotations = (0..n as i64).map(|s| GroupElement::rotation(n, s));
        let reflections = (0..n as i64).map(|s| GroupElement::reflection(n, s));
        Group {
            grid,
            kind: GroupKind::Dihedral,
            elements: rotations.chain(reflections).collect(),
        }
    }

    pub fn of_kind(grid: GridCircle, kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::Trivial => Ok(Group::trivial(grid)),
            GroupKind::Cyclic => Ok(Group::cyclic(grid)),
            GroupKind::Dihedral => Ok(Group::dihedral(grid)),
            GroupKind::Explicit => Err(Error::InvalidParameter(
                "explicit groups need their element list".into(),
            )),
        }
    }

    /// Checks that `elements` contains the identity and is closed under
    /// composition and inverse. Duplicates are dropped.
    pub fn explicit(grid: GridCircle, elements: Vec<GroupElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let mut unique: Vec<GroupElement> = Vec::with_capacity(elements.len());
        for g in elements {
            if g.n() != grid.n() {
                return Err(Error::IncompatibleGrids(grid.n(), g.n()));
            }
            if !unique.contains(&g) {
                unique.push(g);
            }
        }
        if !unique.iter().any(GroupElement::is_identity) {
            return Err(Error::NotAGroup("identity missing".into()));
        }
        for g in &unique {
            if !unique.contains(&g.inverse()) {
                return Err(Error::NotAGroup(format!("inverse of {g} missing")));
            }
            for h in &unique {
                let gh = g.compose(h);
                if !unique.contains(&gh) {
                    return Err(Error::NotAGroup(format!("{g} · {h} = {gh} missing")));
                }
            }
        }
        Ok(Group {
            grid,
            kind: GroupKind::Explicit,
            elements: unique,
        })
    }

    pub fn grid(&self) -> GridCircle {
        self.grid
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.contains(g)
    }

    /// True when `g` commutes with every element of the group.
    pub fn centralizes(&self, g: &GroupElement) -> bool {
        self.elements.iter().all(|h| h.commutes_with(g))
    }
}

/// `max_i |φ1(i) − φ2(i)|`.
pub fn sup_distance(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    Ok(sup_distance_unchecked(&a.values, &b.values))
}

#[inline]
pub(crate) fn sup_distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// Right action by composition: `act(φ, g)(i) = φ(g(i))`.
pub fn act(phi: &SampledFunction, g: &GroupElement) -> Result<SampledFunction> {
    if g.n() != phi.len() {
        return Err(Error::IncompatibleGrids(phi.len(), g.n()));
    }
    let values = (0..phi.len()).map(|i| phi.values[g.map_index(i)]).collect();
    Ok(SampledFunction::from_raw(phi.grid, values))
}

/// `sup_i |φ1(i) − φ2(g(i))|` without materializing `φ2∘g`.
fn mismatch(phi1: &[f64], phi2: &[f64], g: &GroupElement) -> f64 {
    phi1.iter().enumerate().fold(0.0, |m: f64, (i, v)| {
        m.max((v - phi2[g.map_index(i)]).abs())
    })
}

/// Exact `d_G(φ1, φ2) = min_{g∈G} ‖φ1 − φ2∘g‖_∞` together with the first
/// minimizing element in the group's element order.
pub fn natural_pseudo_distance_with_witness(
    phi1: &SampledFunction,
    phi2: &SampledFunction,
    group: &Group,
) -> Result<(f64, GroupElement)> {
    phi1.grid.check_same(&phi2.grid)?;
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    phi1.grid.check_same(&group.grid)?;
    let scores: Vec<f64> = maybe_par_iter!(group.elements())
        .map(|g| mismatch(&phi1.values, &phi2.values, g))
        .collect();
    let best = argmin(&scores).expect("group is non-empty");
    Ok((scores[best], group.elements[best]))
}

pub fn natural_pseudo_distance(
    phi1: &SampledFunction,
    phi2: &SampledFunction,
    group: &Group,
) -> Result<f64> {
    natural_pseudo_distance_with_witness(phi1, phi2, group).map(|(d, _)| d)
}

/// Constraints defining an admissible function space Φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpace {
    pub bound: f64,
    pub lipschitz: Option<f64>,
    pub range: Option<(f64, f64)>,
}

impl FunctionSpace {
    pub fn new(bound: f64) -> Result<Self> {
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bound must be finite and >= 0, got {bound}"
            )));
        }
        Ok(FunctionSpace {
            bound,
            lipschitz: None,
            range: None,
        })
    }

    pub fn with_lipschitz(mut self, constant: f64) -> Result<Self> {
        if !(constant >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant must be >= 0, got {constant}"
            )));
        }
        self.lipschitz = Some(constant);
        Ok(self)
    }

    pub fn with_range(mut self, low: f64, high: f64) -> Result<Self> {
        if !(high - low >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "empty range [{low}, {high}]"
            )));
        }
        self.range = Some((low, high));
        Ok(self)
    }

    /// 1-Lipschitz functions from S¹ to `[0, 1]`.
    pub fn unit_lipschitz() -> Self {
        FunctionSpace {
            bound: 1.0,
            lipschitz: Some(1.0),
            range: Some((0.0, 1.0)),
        }
    }

    pub fn check(&self, phi: &SampledFunction) -> Vec<Violation> {
        membership_check(self, phi)
    }

    /// Constants `c` with `|c| ≤ bound` that fail membership. Since the
    /// constraints are intervals, testing `−B`, `0` and `B` suffices.
    pub fn missing_constants(&self, grid: GridCircle) -> Vec<(f64, Vec<Violation>)> {
        [-self.bound, 0.0, self.bound]
            .into_iter()
            .filter_map(|c| {
                let phi = SampledFunction::constant(grid, c).ok()?;
                let v = membership_check(self, &phi);
                (!v.is_empty()).then_some((c, v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Violation {
    Bound {
        index: usize,
        value: f64,
        bound: f64,
    },
    Range {
        index: usize,
        value: f64,
        low: f64,
        high: f64,
    },
    Lipschitz {
        index: usize,
        slope: f64,
        limit: f64,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Bound { .. } => "bound",
            Violation::Range { .. } => "range",
            Violation::Lipschitz { .. } => "lipschitz",
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            Violation::Bound { index, .. }
            | Violation::Range { index, .. }
            | Violation::Lipschitz { index, .. } => index,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound {
                index,
                value,
                bound,
            } => {
                write!(f, "bound: |{value}| > {bound} at index {index}")
            }
            Violation::Range {
                index,
                value,
                low,
                high,
            } => {
                write!(f, "range: {value} outside [{low}, {high}] at index {index}")
            }
            Violation::Lipschitz {
                index,
                slope,
                limit,
            } => {
                write!(
                    f,
                    "lipschitz: slope {slope} > {limit} between index {index} and its successor"
                )
            }
        }
    }
}

/// Reports every violated constraint with its witnessing index. The
/// Lipschitz check uses the discrete quotient `|φ(i+1) − φ(i)| / (2π/n)`,
/// including the wrap-around edge.
pub fn membership_check(space: &FunctionSpace, phi: &SampledFunction) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, &value) in phi.values.iter().enumerate() {
        if value.abs() > space.bound + TOLERANCE {
            out.push(Violation::Bound {
                index,
                value,
                bound: space.bound,
            });
        }
        if let Some((low, high)) = space.range {
            if value < low - TOLERANCE || value > high + TOLERANCE {
                out.push(Violation::Range {
                    index,
                    value,
                    low,
                    high,
                });
            }
        }
    }
    if let Some(limit) = space.lipschitz {
        let n = phi.len();
        let step = phi.grid.step();
        for index in 0..n {
            let slope = (phi.values[(index + 1) % n] - phi.values[index]).abs() / step;
            if slope > limit + TOLERANCE {
                out.push(Violation::Lipschitz {
                    index,
                    slope,
                    limit,
                });
            }
        }
    }
    out
}

/// Closed-form functions available by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `|sin x|`
    AbsSin,
    /// `sin² x`
    SinSq,
    /// `(sin² x)^{1/p}`
    SinSqRoot(f64),
    Constant(f64),
}

impl Builtin {
    pub fn sample(&self, grid: GridCircle) -> Result<SampledFunction> {
        match *self {
            Builtin::AbsSin => Self::from_abs_sin(grid, |s| s),
            Builtin::SinSq => Self::from_abs_sin(grid, |s| s * s),
            Builtin::SinSqRoot(p) => {
                if !(p > 0.0) {
                    return Err(Error::NonPositiveExponent(p));
                }
                Self::from_abs_sin(grid, |s| (s * s).powf(1.0 / p))
            }
            Builtin::Constant(c) => SampledFunction::constant(grid, c),
        }
    }
}

impl Builtin {
    fn from_abs_sin(grid: GridCircle, f: impl Fn(f64) -> f64) -> Result<SampledFunction> {
        SampledFunction::new(grid, (0..grid.n()).map(|i| f(grid.abs_sin(i))).collect())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `abs_sin`, `sin_sq`, `sin_sq_root:<p>` and `constant:<c>`
    /// (`(` `)` may replace the colon, as in `sin_sq_root(3)`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.find([':', '(']) {
            Some(pos) => {
                let arg = s[pos + 1..].trim_end_matches(')');
                (&s[..pos], Some(arg.trim()))
            }
            None => (s, None),
        };
        let number = |arg: Option<&str>| -> Result<f64> {
            let arg =
                arg.ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs a parameter")))?;
            arg.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{arg}` for `{name}`")))
        };
        match name {
            "abs_sin" if arg.is_none() => Ok(Builtin::AbsSin),
            "sin_sq" if arg.is_none() => Ok(Builtin::SinSq),
            "sin_sq_root" => {
                let p = number(arg)?;
                if !(p > 0.0) {
                    return Err(Error::NonPositiveExponent(p));
                }
                Ok(Builtin::SinSqRoot(p))
            }
            "constant" => Ok(Builtin::Constant(number(arg)?)),
            _ => Err(Error::UnknownBuiltin(s.to_string())),
        }
    }
}

/// Samples a named closed form on `grid`.
pub fn builtin_function(name: &str, grid: GridCircle) -> Result<SampledFunction> {
    name.parse::<Builtin>()?.sample(grid)
}

#[derive(Debug, Serialize, Deserialize)]
struct FunctionRow {
    index: usize,
    value: f64,
}

/// Reads the `index,value` CSV format. Rows may come in any order but must
/// cover `0..n` exactly once.
pub fn read_function_csv<R: Read>(reader: R) -> Result<SampledFunction> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "index" || &headers[1] != "value" {
        return Err(Error::Format(format!(
            "expected header `index,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<FunctionRow> = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row?);
    }
    let n = rows.len();
    let mut values = vec![None; n];
    for row in rows {
        let slot = values.get_mut(row.index).ok_or_else(|| {
            Error::Format(format!("index {} out of range for {n} rows", row.index))
        })?;
        if slot.replace(row.value).is_some() {
            return Err(Error::Format(format!("duplicate index {}", row.index)));
        }
    }
    let values = values
        .into_iter()
        .map(|v| v.expect("every index filled"))
        .collect();
    SampledFunction::from_values(values)
}

pub fn write_function_csv<W: Write>(writer: W, phi: &SampledFunction) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (index, &value) in phi.values.iter().enumerate() {
        wtr.serialize(FunctionRow { index, value })?;
    }
    wtr.flush()?;
    Ok(())
}
