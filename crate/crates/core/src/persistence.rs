//! Degree-0 sublevel-set persistence of a sampled function on the cycle graph.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_space::SampledFunction;
use crate::matching::bottleneck_distance;

/// Finite `(birth, death)` pairs plus births of essential classes.
///
/// Zero-persistence pairs are never stored. Both lists are kept sorted, so
/// derived equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    finite: Vec<(f64, f64)>,
    essential: Vec<f64>,
}

impl PersistenceDiagram {
    pub fn new(finite: Vec<(f64, f64)>, essential: Vec<f64>) -> Result<Self> {
        for &(b, d) in &finite {
            if !b.is_finite() || !d.is_finite() {
                return Err(Error::Format(format!("non-finite finite pair ({b}, {d})")));
            }
            if b > d {
                return Err(Error::Format(format!("birth {b} after death {d}")));
            }
        }
        if let Some(b) = essential.iter().find(|b| !b.is_finite()) {
            return Err(Error::Format(format!("non-finite essential birth {b}")));
        }
        Ok(Self::from_parts(finite, essential))
    }

    fn from_parts(mut finite: Vec<(f64, f64)>, mut essential: Vec<f64>) -> Self {
        finite.retain(|(b, d)| b < d);
        finite.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        essential.sort_by(f64::total_cmp);
        PersistenceDiagram { finite, essential }
    }

    pub fn finite(&self) -> &[(f64, f64)] {
        &self.finite
    }

    pub fn essential(&self) -> &[f64] {
        &self.essential
    }

    /// Applies `f` to every coordinate; `f` must be increasing.
    pub fn map_coordinates(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(
            self.finite.iter().map(|&(b, d)| (f(b), f(d))).collect(),
            self.essential.iter().map(|&b| f(b)).collect(),
        )
    }

    pub fn to_json(&self) -> DiagramJson {
        DiagramJson {
            finite: self.finite.iter().map(|&(b, d)| [b, d]).collect(),
            essential: self.essential.clone(),
        }
    }

    pub fn from_json(json: DiagramJson) -> Result<Self> {
        Self::new(
            json.finite.into_iter().map(|[b, d]| (b, d)).collect(),
            json.essential,
        )
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Self::from_json(serde_json::from_reader(reader)?)
    }

    /// Reads the `birth,death` CSV form; essential classes carry `inf`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "birth" || &headers[1] != "death" {
            return Err(Error::Format("expected header `birth,death`".into()));
        }
        let mut finite = Vec::new();
        let mut essential = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let birth: f64 = parse_number(&record[0])?;
            if &record[1] == "inf" {
                essential.push(birth);
            } else {
                finite.push((birth, parse_number(&record[1])?));
            }
        }
        Self::new(finite, essential)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["birth", "death"])?;
        for &(b, d) in &self.finite {
            wtr.write_record([b.to_string(), d.to_string()])?;
        }
        for &b in &self.essential {
            wtr.write_record([b.to_string(), "inf".to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Format(format!("bad number `{s}`")))
}

/// `{ "finite": [[b, d], ...], "essential": [b, ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub finite: Vec<[f64; 2]>,
    pub essential: Vec<f64>,
}

/// H₀ persistence of the sublevel filtration of φ on the cycle graph.
///
/// Vertices enter in `(value, index)` order. A vertex with no processed
/// neighbour starts a component; a vertex joining two components kills the
/// younger one, where age is the `(value, index)` order of the component's
/// first vertex. The component of the global minimum never dies.
pub fn sublevel_diagram(phi: &SampledFunction) -> PersistenceDiagram {
    let values = phi.values();
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let mut forest = ElderForest::new(n);
    let mut finite = Vec::new();
    for &v in &order {
        forest.insert(v);
        for u in [(v + n - 1) % n, (v + 1) % n] {
            if !forest.contains(u) {
                continue;
            }
            let (ru, rv) = (forest.find(u), forest.find(v));
            if ru == rv {
                continue;
            }
            // Roots are component births; the later one in the order dies.
            let (elder, younger) = if rank[ru] < rank[rv] {
                (ru, rv)
            } else {
                (rv, ru)
            };
            if younger != v {
                finite.push((values[younger], values[v]));
            }
            forest.attach(younger, elder);
        }
    }
    let essential = if n == 0 {
        vec![]
    } else {
        vec![values[order[0]]]
    };
    PersistenceDiagram::from_parts(finite, essential)
}

/// Union-find whose root is always the component's oldest vertex.
struct ElderForest {
    parent: Vec<usize>,
    present: Vec<bool>,
}

impl ElderForest {
    fn new(n: usize) -> Self {
        ElderForest {
            parent: (0..n).collect(),
            present: vec![false; n],
        }
    }

    fn insert(&mut self, v: usize) {
        self.present[v] = true;
    }

    fn contains(&self, v: usize) -> bool {
        self.present[v]
    }

    fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[v] != root {
            let next = self.parent[v];
            self.parent[v] = root;
            v = next;
        }
        root
    }

    fn attach(&mut self, child_root: usize, new_root: usize) {
        self.parent[child_root] = new_root;
    }
}

/// True iff `bottleneck(d1, d2) ≤ tol`.
pub fn diagram_equal(d1: &PersistenceDiagram, d2: &PersistenceDiagram, tol: f64) -> bool {
    bottleneck_distance(d1, d2) <= tol
}
