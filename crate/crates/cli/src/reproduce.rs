//! The two power-mean examples: a pair of functions whose diagrams agree
//! under the identity and under a quarter rotation, but are told apart by
//! the power mean of the two.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use geneo::{
    bottleneck_distance, builtin_function, natural_pseudo_distance, parse_operator,
    sublevel_diagram, DiagramJson, FunctionSpace, GridCircle, Group, SampledFunction,
};
use serde::Serialize;

use crate::output::{self, finite_or_inf, number, Table};
use crate::CheckFailed;

/// Distances at or below this count as zero.
pub const ZERO_TOLERANCE: f64 = 1e-9;

const STAGES: [&str; 4] = ["raw", "F1", "F2", "Mp"];

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    expect: &'static str,
    pass: bool,
}

#[derive(Serialize)]
struct Case {
    name: String,
    phi1: String,
    phi2: String,
    p: f64,
    operators: BTreeMap<&'static str, String>,
    d_g: f64,
    #[serde(serialize_with = "finite_or_inf")]
    sup_distance: f64,
    distances: BTreeMap<&'static str, f64>,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    zero_tolerance: f64,
    cases: Vec<Case>,
    pass: bool,
}

pub fn run(out: &Path, p: f64, n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(4) {
        bail!("--n must be a positive multiple of 4 so that a quarter turn is a grid rotation, got {n}");
    }
    if !(p >= 1.0 && p.is_finite()) {
        bail!("--p must be a finite exponent >= 1, got {p}");
    }
    let grid = GridCircle::new(n)?;
    let group = Group::cyclic(grid);
    let space = FunctionSpace::unit_lipschitz();
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    let root = format!("sin_sq_root:{p}");
    let names = ["abs_sin", "sin_sq", root.as_str()];
    let samples = names
        .iter()
        .map(|name| builtin_function(name, grid))
        .collect::<geneo::Result<Vec<_>>>()?;
    let mut table = Table::new(&["index", "x", "abs_sin", "sin_sq", "sin_sq_root"]);
    for i in 0..n {
        let mut row = vec![i.to_string(), number(grid.angle(i))];
        row.extend(samples.iter().map(|phi| number(phi.values()[i])));
        table.row(&row);
    }
    table.write(&out.join("functions.csv"))?;

    let cases = [
        ("case1", &samples[0], &samples[1], names[1], 1.0),
        ("case2", &samples[0], &samples[2], names[2], p),
    ];
    let mut summary = Summary {
        n,
        zero_tolerance: ZERO_TOLERANCE,
        cases: Vec::new(),
        pass: true,
    };
    for (name, phi1, phi2, name2, exponent) in cases {
        let case = run_case(
            &out.join(name),
            name,
            (phi1, names[0]),
            (phi2, name2),
            exponent,
            &group,
            &space,
        )?;
        summary.pass &= case.checks.iter().all(|c| c.pass);
        summary.cases.push(case);
    }
    output::write_json(&out.join("summary.json"), &summary)?;
    output::print_json(&summary)?;
    let failed: Vec<String> = summary
        .cases
        .iter()
        .flat_map(|case| {
            case.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("{}: {}", case.name, c.name))
        })
        .collect();
    if !failed.is_empty() {
        return Err(CheckFailed(format!("comparison failed: {}", failed.join(", "))).into());
    }
    Ok(())
}

fn run_case(
    dir: &Path,
    name: &str,
    (phi1, name1): (&SampledFunction, &str),
    (phi2, name2): (&SampledFunction, &str),
    p: f64,
    group: &Group,
    space: &FunctionSpace,
) -> Result<Case> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let exprs = [
        ("F1", "id".to_string()),
        ("F2", "rot(pi/2)".to_string()),
        ("Mp", format!("Mp({p}; id, rot(pi/2))")),
    ];
    let mut images = vec![("raw", phi1.clone(), phi2.clone())];
    for (label, expr) in &exprs {
        let op = parse_operator(expr, group, space)?;
        images.push((label, op.apply(phi1)?, op.apply(phi2)?));
    }

    let mut header = vec!["index".to_string(), "x".to_string()];
    for (label, _, _) in &images {
        header.push(format!("{label}_phi1"));
        header.push(format!("{label}_phi2"));
    }
    let mut curves = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..phi1.len() {
        let mut row = vec![i.to_string(), number(phi1.grid().angle(i))];
        for (_, a, b) in &images {
            row.push(number(a.values()[i]));
            row.push(number(b.values()[i]));
        }
        curves.row(&row);
    }
    curves.write(&dir.join("curves.csv"))?;

    let mut diagrams: BTreeMap<&str, BTreeMap<&str, DiagramJson>> = BTreeMap::new();
    let mut points = Table::new(&["stage", "function", "birth", "death", "essential"]);
    let mut distances = BTreeMap::new();
    let mut checks = Vec::new();
    for (stage, (label, a, b)) in STAGES.iter().zip(&images) {
        debug_assert_eq!(stage, label);
        let (da, db) = (sublevel_diagram(a), sublevel_diagram(b));
        for (which, dgm) in [("phi1", &da), ("phi2", &db)] {
            for &(birth, death) in dgm.finite() {
                points.row(&[
                    stage.to_string(),
                    which.into(),
                    number(birth),
                    number(death),
                    "0".into(),
                ]);
            }
            for &birth in dgm.essential() {
                points.row(&[
                    stage.to_string(),
                    which.into(),
                    number(birth),
                    "inf".into(),
                    "1".into(),
                ]);
            }
        }
        let d = bottleneck_distance(&da, &db);
        let positive = *stage == "Mp";
        checks.push(Check {
            name: format!(
                "d_match({stage}(phi1), {stage}(phi2)) {}",
                if positive { "> 0" } else { "= 0" }
            ),
            value: d,
            expect: if positive { "positive" } else { "zero" },
            pass: if positive {
                d > ZERO_TOLERANCE
            } else {
                d <= ZERO_TOLERANCE
            },
        });
        distances.insert(*stage, d);
        diagrams
            .entry(stage)
            .or_default()
            .insert("phi1", da.to_json());
        diagrams
            .entry(stage)
            .or_default()
            .insert("phi2", db.to_json());
    }
    points.write(&dir.join("diagram_points.csv"))?;
    output::write_json(&dir.join("diagrams.json"), &diagrams)?;

    let d_g = natural_pseudo_distance(phi1, phi2, group)?;
    let case = Case {
        name: name.into(),
        phi1: name1.into(),
        phi2: name2.into(),
        p,
        operators: exprs.into_iter().collect(),
        d_g,
        sup_distance: geneo::sup_distance(phi1, phi2)?,
        distances,
        checks,
    };
    output::write_json(&dir.join("distances.json"), &case)?;
    Ok(case)
}
