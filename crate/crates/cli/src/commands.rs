use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geneo::sampling::{probe_pairs, probes, TreeConfig};
use geneo::{
    apply_in_space, bottleneck, builtin_function, gap_report, natural_pseudo_distance_with_witness,
    parse_operator, print_operator, read_function_csv, sublevel_diagram, sup_distance,
    verify_equivariance, verify_nonexpansivity, ClosureMode, Error, FunctionSpace, GapConfig,
    GridCircle, Group, GroupElement, GroupKind, Matching, Operator, PersistenceDiagram,
    SampledFunction,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, DEFAULT_PROBES, DEFAULT_TOLERANCE};
use crate::output::{self, finite_or_inf, number, round12, Table};
use crate::{io_error, CheckFailed, DiagramFormat, FunctionArgs, GroupArgs};

/// Named functions in command-line order: builtins, then files.
pub fn load_functions(
    config: &ExperimentConfig,
    args: &FunctionArgs,
) -> Result<Vec<(String, SampledFunction)>> {
    let mut out = Vec::new();
    if !args.builtins.is_empty() {
        let grid = GridCircle::new(config.n(args.n))?;
        for name in &args.builtins {
            let phi = builtin_function(name, grid).with_context(|| format!("builtin `{name}`"))?;
            out.push((name.clone(), phi));
        }
    }
    for path in &args.inputs {
        out.push((path.display().to_string(), read_function(path)?));
    }
    if let Some(n) = args.n {
        if let Some((id, phi)) = out.iter().find(|(_, phi)| phi.len() != n) {
            bail!("`{id}` has {} samples but --n is {n}", phi.len());
        }
    }
    Ok(out)
}

fn read_function(path: &Path) -> Result<SampledFunction> {
    let file = File::open(path).map_err(|e| io_error(e, path))?;
    read_function_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn exactly<const K: usize>(
    functions: Vec<(String, SampledFunction)>,
) -> Result<[(String, SampledFunction); K]> {
    let count = functions.len();
    functions.try_into().map_err(|_| {
        anyhow::anyhow!("expected {K} function(s) from --builtin/--input, got {count}")
    })
}

pub fn group_for(config: &ExperimentConfig, args: &GroupArgs, grid: GridCircle) -> Result<Group> {
    let kind: GroupKind = config.group(args.group.as_deref()).parse()?;
    Ok(Group::of_kind(grid, kind)?)
}

/// Parses and elaborates `expr`, pointing at the failing byte on error.
pub fn operator(expr: &str, group: &Group, space: &FunctionSpace) -> Result<Operator> {
    parse_operator(expr, group, space).map_err(|e| match e {
        Error::Parse(p) => {
            let caret = " ".repeat(expr[..p.offset.min(expr.len())].chars().count());
            anyhow::anyhow!("{p}\n  {expr}\n  {caret}^")
        }
        other => other.into(),
    })
}

pub fn diagram(
    config: &ExperimentConfig,
    function: &FunctionArgs,
    op: Option<&str>,
    group: &GroupArgs,
    format: DiagramFormat,
    plot_data: Option<&Path>,
) -> Result<()> {
    let [(_, phi)] = exactly::<1>(load_functions(config, function)?)?;
    let phi = match op {
        Some(expr) => {
            let group = group_for(config, group, phi.grid())?;
            let space = config.space.build()?;
            let op = operator(expr, &group, &space)?;
            apply_in_space(&op, &phi, &space, ClosureMode::Lax)?
        }
        None => phi,
    };
    let dgm = sublevel_diagram(&phi);
    match format {
        DiagramFormat::Json => output::print_json(&dgm.to_json())?,
        DiagramFormat::Csv => print!("{}", diagram_table(&dgm).into_string()),
    }
    if let Some(path) = plot_data {
        let top = phi
            .values()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut table = Table::new(&["birth", "death", "essential"]);
        for &(b, d) in dgm.finite() {
            table.row(&[number(b), number(d), "0".into()]);
        }
        for &b in dgm.essential() {
            table.row(&[number(b), number(top), "1".into()]);
        }
        table.write(path)?;
    }
    Ok(())
}

pub fn diagram_table(dgm: &PersistenceDiagram) -> Table {
    let mut table = Table::new(&["birth", "death"]);
    for &(b, d) in dgm.finite() {
        table.row(&[number(b), number(d)]);
    }
    for &b in dgm.essential() {
        table.row(&[number(b), "inf".into()]);
    }
    table
}

pub fn read_diagram(path: &Path) -> Result<PersistenceDiagram> {
    let file = File::open(path).map_err(|e| io_error(e, path))?;
    let is_csv = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let dgm = if is_csv {
        PersistenceDiagram::read_csv(file)
    } else {
        PersistenceDiagram::read_json(file)
    };
    dgm.with_context(|| format!("malformed diagram file {}", path.display()))
}

#[derive(Serialize)]
struct MatchOutput {
    #[serde(serialize_with = "finite_or_inf")]
    distance: f64,
    matching: Matching,
}

pub fn matching(left: &Path, right: &Path) -> Result<()> {
    let (a, b) = (read_diagram(left)?, read_diagram(right)?);
    let matching = bottleneck(&a, &b);
    output::print_json(&MatchOutput {
        distance: matching.cost,
        matching,
    })
}

#[derive(Serialize)]
pub struct Witness {
    pub shift: usize,
    pub reflect: bool,
    pub identity: bool,
    pub description: String,
}

impl From<GroupElement> for Witness {
    fn from(g: GroupElement) -> Self {
        Witness {
            shift: g.shift(),
            reflect: g.reflect(),
            identity: g.is_identity(),
            description: g.to_string(),
        }
    }
}

#[derive(Serialize)]
struct DgOutput {
    left: String,
    right: String,
    n: usize,
    group: GroupKind,
    d_g: f64,
    witness: Witness,
    sup_distance: f64,
}

pub fn dg(config: &ExperimentConfig, function: &FunctionArgs, group: &GroupArgs) -> Result<()> {
    let [(left, a), (right, b)] = exactly::<2>(load_functions(config, function)?)?;
    if a.len() != b.len() {
        bail!("incompatible grids: {} vs {} samples", a.len(), b.len());
    }
    let group = group_for(config, group, a.grid())?;
    let (d_g, g) = natural_pseudo_distance_with_witness(&a, &b, &group)?;
    output::print_json(&DgOutput {
        left,
        right,
        n: a.len(),
        group: group.kind(),
        d_g,
        witness: g.into(),
        sup_distance: sup_distance(&a, &b)?,
    })
}

#[derive(Serialize)]
struct ProbeWitness {
    probe: usize,
    element: Witness,
}

#[derive(Serialize)]
struct EquivarianceOut {
    max_violation: f64,
    witness: Option<ProbeWitness>,
}

#[derive(Serialize)]
struct NonexpansivityOut {
    max_excess: f64,
    witness_pair: Option<usize>,
    input_distance: f64,
    output_distance: f64,
}

#[derive(Serialize)]
struct ValidateOutput {
    expression: String,
    validated: bool,
    n: usize,
    group: GroupKind,
    seed: u64,
    probes: usize,
    tolerance: f64,
    equivariance: EquivarianceOut,
    nonexpansivity: NonexpansivityOut,
    pass: bool,
}

pub fn validate(
    config: &ExperimentConfig,
    expr: &str,
    group: &GroupArgs,
    n: Option<usize>,
    count: Option<usize>,
    seed: Option<u64>,
    tolerance: Option<f64>,
) -> Result<()> {
    let grid = GridCircle::new(config.n(n))?;
    let group = group_for(config, group, grid)?;
    let space = config.space.build()?;
    let op = operator(expr, &group, &space)?;
    let seed = config.seed(seed);
    let count = count.or(config.probes).unwrap_or(DEFAULT_PROBES);
    let tolerance = tolerance.or(config.tolerance).unwrap_or(DEFAULT_TOLERANCE);
    if count == 0 {
        bail!("--probes must be positive");
    }
    let eq = verify_equivariance(&op, &group, &probes(seed, grid, count))?;
    let ne = verify_nonexpansivity(&op, &probe_pairs(seed.wrapping_add(1), grid, count))?;
    let pass = eq.max_violation <= tolerance && ne.max_excess <= tolerance;
    output::print_json(&ValidateOutput {
        expression: print_operator(&op),
        validated: op.is_validated(),
        n: grid.n(),
        group: group.kind(),
        seed,
        probes: count,
        tolerance,
        equivariance: EquivarianceOut {
            max_violation: eq.max_violation,
            witness: eq.witness.map(|(probe, g)| ProbeWitness {
                probe,
                element: g.into(),
            }),
        },
        nonexpansivity: NonexpansivityOut {
            max_excess: ne.max_excess,
            witness_pair: ne.witness,
            input_distance: ne.input_distance,
            output_distance: ne.output_distance,
        },
        pass,
    })?;
    if !pass {
        return Err(CheckFailed(format!(
            "equivariance violation {} / non-expansivity excess {} exceed tolerance {}",
            number(eq.max_violation),
            number(ne.max_excess),
            number(tolerance)
        ))
        .into());
    }
    Ok(())
}

pub fn function_table(phi: &SampledFunction) -> Table {
    let mut table = Table::new(&["index", "value"]);
    for (i, v) in phi.values().iter().enumerate() {
        table.row(&[i.to_string(), number(*v)]);
    }
    table
}

pub fn apply(
    config: &ExperimentConfig,
    expr: &str,
    function: &FunctionArgs,
    group: &GroupArgs,
    strict: bool,
    out: Option<&Path>,
) -> Result<()> {
    let [(_, phi)] = exactly::<1>(load_functions(config, function)?)?;
    let group = group_for(config, group, phi.grid())?;
    let space = config.space.build()?;
    let op = operator(expr, &group, &space)?;
    let mode = if strict {
        ClosureMode::Strict
    } else {
        ClosureMode::Lax
    };
    let image = match apply_in_space(&op, &phi, &space, mode) {
        Err(Error::ClosureViolation(v)) => {
            return Err(CheckFailed(format!("output leaves the function space: {v}")).into())
        }
        other => other?,
    };
    let table = function_table(&image);
    match out {
        Some(path) => table.write(path),
        None => {
            print!("{}", table.into_string());
            Ok(())
        }
    }
}

pub struct GapArgs {
    pub function: FunctionArgs,
    pub group: GroupArgs,
    pub include: Vec<String>,
    pub sizes: Vec<usize>,
    pub max_depth: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GapOutput<'a> {
    family_sizes: &'a [usize],
    include: &'a [String],
    #[serde(flatten)]
    report: &'a geneo::GapReport,
}

pub fn gap(config: &ExperimentConfig, args: GapArgs) -> Result<()> {
    let mut corpus = load_functions(config, &args.function)?;
    for path in &config.corpus {
        corpus.push((path.display().to_string(), read_function(path)?));
    }
    if corpus.len() < 2 {
        bail!("gap needs at least two corpus functions");
    }
    let grid = corpus[0].1.grid();
    if let Some((id, _)) = corpus.iter().find(|(_, phi)| phi.grid() != grid) {
        bail!(
            "`{id}` is not on the {}-point grid of `{}`",
            grid.n(),
            corpus[0].0
        );
    }
    let group = group_for(config, &args.group, grid)?;
    let space = config.space.build()?;
    let include = if args.include.is_empty() {
        config.operators.clone()
    } else {
        args.include
    };
    let prefix = include
        .iter()
        .map(|e| operator(e, &group, &space))
        .collect::<Result<Vec<_>>>()?;
    let sizes = if !args.sizes.is_empty() {
        args.sizes
    } else {
        config
            .family_sizes
            .clone()
            .unwrap_or_else(|| vec![1, 4, 16, 64])
    };
    let tree = TreeConfig {
        max_depth: args
            .max_depth
            .or(config.max_depth)
            .unwrap_or(TreeConfig::default().max_depth),
        ..TreeConfig::default()
    };
    let gap_config = GapConfig {
        seed: config.seed(args.seed),
        family_sizes: sizes.clone(),
        tree,
        prefix,
    };
    let mut report = gap_report(&gap_config, &corpus, &group, &space)?;
    for r in &mut report.records {
        r.d_g = round12(r.d_g);
        r.bound = round12(r.bound);
        r.gap = round12(r.gap);
    }
    let body = GapOutput {
        family_sizes: &sizes,
        include: &include,
        report: &report,
    };
    match args.out.or_else(|| config.out.clone()) {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            output::write_json(&dir.join("gap_report.json"), &body)?;
            let csv_path = dir.join("gap_report.csv");
            let file = File::create(&csv_path).map_err(|e| io_error(e, &csv_path))?;
            report.write_csv(file)?;
            Ok(())
        }
        None => output::print_json(&body),
    }
}
