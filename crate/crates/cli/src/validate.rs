use std::path::Path;

use serde::Serialize;

use qhitting_core::maps::{PositivityVerdict, DEFAULT_POSITIVITY_SAMPLES};
use qhitting_core::{IrreducibilityCertificate, SuperOperator, Tolerance, Verdict};

use crate::args::Global;
use crate::failure::{CliResult, Failure, MAP_INVALID};
use crate::input::{load_map, matrix_pairs, LoadedMap};
use crate::report::{self, number, Table};

#[derive(Debug, Serialize)]
pub struct Positivity {
    pub verdict: &'static str,
    pub min_choi_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<Sampled>,
}

#[derive(Debug, Serialize)]
pub struct Sampled {
    pub samples: usize,
    pub violations: usize,
    pub worst_min_eigenvalue: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Irreducibility {
    pub evaluated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_space_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue_of_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ValidateRecord {
    pub kind: &'static str,
    pub dim: usize,
    pub trace_preserving: bool,
    pub trace_residual: f64,
    pub positivity: Positivity,
    pub irreducibility: Irreducibility,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_state: Option<Vec<Vec<[f64; 2]>>>,
    pub valid: bool,
}

pub fn positivity_verdict(v: PositivityVerdict) -> &'static str {
    match v {
        PositivityVerdict::CompletelyPositive => "completely_positive",
        PositivityVerdict::PositiveBySampling => "positive_by_sampling",
        PositivityVerdict::NotPositive => "not_positive",
    }
}

fn irreducibility_verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::CertifiedIrreducible => "certified_irreducible",
        Verdict::NotIrreducible => "not_irreducible",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn positivity(map: &SuperOperator, seed: u64, tol: &Tolerance) -> Positivity {
    let report = map.certify_positivity(DEFAULT_POSITIVITY_SAMPLES, seed, tol);
    Positivity {
        verdict: positivity_verdict(report.verdict),
        min_choi_eigenvalue: report.cp.min_choi_eigenvalue,
        sampled: report.sampled.map(|s| Sampled {
            samples: s.samples,
            violations: s.violations,
            worst_min_eigenvalue: s.worst_min_eigenvalue,
            seed: s.seed,
        }),
    }
}

fn irreducibility(cert: &IrreducibilityCertificate) -> Irreducibility {
    Irreducibility {
        evaluated: true,
        verdict: Some(irreducibility_verdict(cert.verdict)),
        fixed_space_dim: Some(cert.fixed_space_dim),
        min_eigenvalue_of_pi: cert.invariant_state.as_ref().map(|_| cert.min_eigenvalue_of_pi),
        fixed_point_residual: cert.invariant_state.as_ref().map(|_| cert.fixed_point_residual),
    }
}

pub fn record(loaded: &LoadedMap, seed: u64, tol: &Tolerance) -> CliResult<ValidateRecord> {
    let map = &loaded.map;
    let tp = map.check_trace_preserving(tol);
    let positivity = positivity(map, seed, tol);
    let (irreducibility, invariant_state, certified) = if tp.preserving {
        let cert = map.invariant_state(tol)?;
        let pi = cert.invariant_state.as_ref().filter(|_| cert.is_certified()).map(|pi| matrix_pairs(pi.matrix()));
        (irreducibility(&cert), pi, cert.is_certified())
    } else {
        let skipped = Irreducibility {
            evaluated: false,
            verdict: None,
            fixed_space_dim: None,
            min_eigenvalue_of_pi: None,
            fixed_point_residual: None,
        };
        (skipped, None, false)
    };
    let valid = tp.preserving && certified && positivity.verdict != "not_positive";
    Ok(ValidateRecord {
        kind: loaded.kind,
        dim: map.dim(),
        trace_preserving: tp.preserving,
        trace_residual: tp.residual,
        positivity,
        irreducibility,
        invariant_state,
        valid,
    })
}

/// Loads a map and rejects it unless it is trace preserving, not shown to be
/// non-positive, and certified irreducible.
pub fn validated_map(path: &Path, g: &Global, tol: &Tolerance) -> CliResult<LoadedMap> {
    let loaded = load_map(path, g.row_stochastic, tol)?;
    let r = record(&loaded, g.seed, tol)?;
    if r.valid {
        return Ok(loaded);
    }
    let reason = if !r.trace_preserving {
        format!("map is not trace preserving (residual {:e})", r.trace_residual)
    } else if r.positivity.verdict == "not_positive" {
        "map is not positive".to_string()
    } else {
        format!("map is not certified irreducible ({})", r.irreducibility.verdict.unwrap_or("not evaluated"))
    };
    Err(Failure::invalid_map(format!("{}: {reason}", path.display())))
}

pub fn run(file: &Path, g: &Global) -> CliResult<u8> {
    let tol = g.tolerance(None)?;
    let loaded = load_map(file, g.row_stochastic, &tol)?;
    let r = record(&loaded, g.seed, &tol)?;
    if g.json {
        print!("{}", report::json(&r));
    } else {
        print!("{}", table(&r, g.digits()));
    }
    Ok(if r.valid { 0 } else { MAP_INVALID })
}

fn table(r: &ValidateRecord, digits: usize) -> String {
    let num = |x: f64| number(x, digits);
    let mut t = Table::default();
    t.row("kind", r.kind).row("dim", r.dim.to_string());
    t.row("trace preserving", format!("{} (residual {})", yes_no(r.trace_preserving), num(r.trace_residual)));
    t.row("positivity", r.positivity.verdict);
    t.row("min Choi eigenvalue", num(r.positivity.min_choi_eigenvalue));
    if let Some(s) = &r.positivity.sampled {
        t.row(
            "sampled states",
            format!(
                "{} (violations {}, worst {}, seed {})",
                s.samples,
                s.violations,
                num(s.worst_min_eigenvalue),
                s.seed
            ),
        );
    }
    let irr = &r.irreducibility;
    t.row("irreducibility", irr.verdict.unwrap_or("not evaluated"));
    if let Some(d) = irr.fixed_space_dim {
        t.row("fixed space dim", d.to_string());
    }
    if let Some(x) = irr.min_eigenvalue_of_pi {
        t.row("min eigenvalue of pi", num(x));
    }
    if let Some(x) = irr.fixed_point_residual {
        t.row("fixed point residual", num(x));
    }
    if let Some(pi) = &r.invariant_state {
        for (i, row) in report::matrix_rows(pi, digits).into_iter().enumerate() {
            t.row(if i == 0 { "pi" } else { "" }, row);
        }
    }
    t.row("valid", yes_no(r.valid));
    t.render()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
