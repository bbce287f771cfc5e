//! Map and query files.
//!
//! Both are JSON. Complex numbers are `[re, im]` pairs; a bare number is read
//! as a real entry. State indices are 1-based.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qhitting_core::linalg::{c, Complex64};
use qhitting_core::{
    ArrivalSubspace, ComplexMatrix, ComplexVector, DensityMatrix, RealMatrix, SuperOperator, Tolerance,
};

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => c(x, 0.0),
            Entry::Complex([x, y]) => c(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Column,
    Row,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticInput {
    #[serde(default)]
    pub orientation: Option<Orientation>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub dim: usize,
    #[serde(default)]
    pub kraus: Option<Vec<Vec<Vec<Entry>>>>,
    #[serde(default)]
    pub stochastic: Option<StochasticInput>,
    #[serde(default)]
    pub superoperator: Option<Vec<Vec<Entry>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Mhtf,
    Series,
    All,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SubspaceInput {
    Vectors(Vec<Vec<Entry>>),
    States(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum StateInput {
    Vector(Vec<Entry>),
    Density(Vec<Vec<Entry>>),
    Distribution(Vec<f64>),
    State(usize),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub subspace: SubspaceInput,
    pub initial: StateInput,
    #[serde(default)]
    pub arrival_state: Option<StateInput>,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub tol: Option<f64>,
}

/// How a user-supplied state was brought to unit trace.
#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    pub kind: &'static str,
    /// Norm of a vector, trace of a density, or sum of a distribution, before scaling.
    pub input_scale: f64,
}

pub struct LoadedMap {
    pub map: SuperOperator,
    /// Column-stochastic matrix, for stochastic inputs.
    pub chain: Option<RealMatrix>,
    pub kind: &'static str,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn deserialize<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        if field == "." {
            Failure::parse(format!("{}: {inner}", path.display()))
        } else {
            Failure::parse(format!("{}: field `{field}`: {inner}", path.display()))
        }
    })
}

fn complex_matrix(rows: &[Vec<Entry>], n: usize, field: &str) -> CliResult<ComplexMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let shape = rows.first().map_or(0, |r| r.len());
        return Err(Failure::parse(format!(
            "field `{field}`: expected a {n}x{n} matrix, got {} rows (first row has {shape} entries) or ragged rows",
            rows.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

fn complex_vector(entries: &[Entry], n: usize, field: &str) -> CliResult<ComplexVector> {
    if entries.len() != n {
        return Err(Failure::parse(format!("field `{field}`: expected {n} entries, got {}", entries.len())));
    }
    Ok(ComplexVector::from_iterator(n, entries.iter().map(|e| e.value())))
}

pub fn load_map(path: &Path, row_flag: bool, tol: &Tolerance) -> CliResult<LoadedMap> {
    let file: MapFile = deserialize(path, &read(path)?)?;
    build_map(file, row_flag, tol).map_err(|f| f.context(&path.display().to_string()))
}

fn build_map(file: MapFile, row_flag: bool, tol: &Tolerance) -> CliResult<LoadedMap> {
    let n = file.dim;
    if n == 0 {
        return Err(Failure::parse("field `dim`: must be at least 1"));
    }
    let present = [file.kraus.is_some(), file.stochastic.is_some(), file.superoperator.is_some()];
    if present.iter().filter(|p| **p).count() != 1 {
        return Err(Failure::parse("expected exactly one of `kraus`, `stochastic`, `superoperator`"));
    }
    if let Some(ops) = file.kraus {
        if ops.is_empty() {
            return Err(Failure::parse("field `kraus`: at least one operator is required"));
        }
        let ops = ops
            .iter()
            .enumerate()
            .map(|(i, m)| complex_matrix(m, n, &format!("kraus[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        let map = SuperOperator::from_kraus(ops).map_err(|e| Failure::parse(e.to_string()))?;
        return Ok(LoadedMap { map, chain: None, kind: "kraus" });
    }
    if let Some(raw) = file.superoperator {
        let rep = complex_matrix(&raw, n * n, "superoperator")?;
        let map = SuperOperator::from_raw(rep).map_err(|e| Failure::parse(e.to_string()))?;
        return Ok(LoadedMap { map, chain: None, kind: "superoperator" });
    }
    let st = file.stochastic.expect("one representation present");
    let orientation = match (st.orientation, row_flag) {
        (Some(Orientation::Column), true) => {
            return Err(Failure::parse("field `stochastic.orientation` is \"column\" but --row-stochastic was given"))
        }
        (Some(o), _) => o,
        (None, true) => Orientation::Row,
        (None, false) => Orientation::Column,
    };
    if st.matrix.len() != n || st.matrix.iter().any(|r| r.len() != n) {
        return Err(Failure::parse(format!("field `stochastic.matrix`: expected a {n}x{n} matrix")));
    }
    let mut p = RealMatrix::from_fn(n, n, |i, j| st.matrix[i][j]);
    if orientation == Orientation::Row {
        p.transpose_mut();
    }
    let map = SuperOperator::from_stochastic(&p, tol)?;
    Ok(LoadedMap { map, chain: Some(p), kind: "stochastic" })
}

/// The queries in a file, and whether the file held a list.
pub fn load_queries(path: &Path) -> CliResult<(Vec<Query>, bool)> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        let list: Vec<Query> = deserialize(path, &text)?;
        if list.is_empty() {
            return Err(Failure::parse(format!("{}: query list is empty", path.display())));
        }
        Ok((list, true))
    } else {
        Ok((vec![deserialize(path, &text)?], false))
    }
}

pub fn subspace(input: &SubspaceInput, n: usize, tol: &Tolerance) -> CliResult<ArrivalSubspace> {
    match input {
        SubspaceInput::Vectors(vs) => {
            let vs = vs
                .iter()
                .enumerate()
                .map(|(i, v)| complex_vector(v, n, &format!("subspace.vectors[{i}]")))
                .collect::<CliResult<Vec<_>>>()
                .map_err(|f| Failure::precondition(f.message))?;
            Ok(ArrivalSubspace::from_vectors(&vs, tol)?)
        }
        SubspaceInput::States(states) => {
            let zero_based = one_based(states, n, "subspace.states")?;
            Ok(ArrivalSubspace::from_basis_states(n, &zero_based)?)
        }
    }
}

pub fn one_based(states: &[usize], n: usize, field: &str) -> CliResult<Vec<usize>> {
    states
        .iter()
        .map(|&s| {
            if s == 0 || s > n {
                Err(Failure::precondition(format!("field `{field}`: state {s} is outside 1..={n}")))
            } else {
                Ok(s - 1)
            }
        })
        .collect()
}

pub fn state(input: &StateInput, n: usize, field: &str, tol: &Tolerance) -> CliResult<(DensityMatrix, Normalization)> {
    let fail = |f: Failure| Failure::precondition(f.message);
    match input {
        StateInput::Vector(v) => {
            let v = complex_vector(v, n, &format!("{field}.vector")).map_err(fail)?;
            let norm = v.norm();
            let rho = DensityMatrix::pure(&v).map_err(|e| Failure::precondition(format!("field `{field}`: {e}")))?;
            Ok((rho, Normalization { kind: "vector", input_scale: norm }))
        }
        StateInput::Density(rows) => {
            let m = complex_matrix(rows, n, &format!("{field}.density")).map_err(fail)?;
            let tr = qhitting_core::linalg::trace(&m).re;
            let rho = DensityMatrix::normalized(&m, tol)
                .map_err(|e| Failure::precondition(format!("field `{field}`: {e}")))?;
            Ok((rho, Normalization { kind: "density", input_scale: tr }))
        }
        StateInput::Distribution(x) => {
            let (x, sum) = normalize_distribution(x, n, &format!("{field}.distribution"))?;
            let rho = DensityMatrix::diagonal(&x, tol)?;
            Ok((rho, Normalization { kind: "distribution", input_scale: sum }))
        }
        StateInput::State(i) => {
            let i = one_based(&[*i], n, &format!("{field}.state"))?[0];
            Ok((DensityMatrix::basis(n, i)?, Normalization { kind: "state", input_scale: 1.0 }))
        }
    }
}

/// Scales a non-negative vector to unit sum.
pub fn normalize_distribution(x: &[f64], n: usize, field: &str) -> CliResult<(Vec<f64>, f64)> {
    if x.len() != n {
        return Err(Failure::precondition(format!("field `{field}`: expected {n} entries, got {}", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !(*v >= 0.0)) {
        return Err(Failure::precondition(format!("field `{field}`: entry {} is negative", i + 1)));
    }
    let sum: f64 = x.iter().sum();
    if !(sum > 0.0) {
        return Err(Failure::precondition(format!("field `{field}`: entries sum to zero")));
    }
    Ok((x.iter().map(|v| v / sum).collect(), sum))
}

/// `[[re, im], ...]` rows for output.
pub fn matrix_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}
