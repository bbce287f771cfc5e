use std::path::Path;

use serde::Serialize;

use qhitting_core::hitting::ORTHOGONALITY_TOL;
use qhitting_core::{tau_series, DensityMatrix, FirstStep, HittingSolution, SuperOperator};

use crate::args::Global;
use crate::failure::CliResult;
use crate::input::{self, load_queries, Method, Normalization, Query};
use crate::report::{self, number, Table};
use crate::validate::validated_map;

#[derive(Debug, Serialize)]
pub struct MhtfRoute {
    pub value: f64,
    /// `orthogonal` for starts supported off the subspace, otherwise `general`.
    pub formula: &'static str,
    pub return_term: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survival_weight: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SeriesRoute {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Default, Serialize)]
pub struct Routes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mhtf: Option<MhtfRoute>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesRoute>,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub spectral_radius_qphi: f64,
    /// Of `I − Φ + Ω`.
    pub condition_estimate: f64,
    /// Of `I − ℚΦ`.
    pub survival_condition_estimate: f64,
}

#[derive(Debug, Serialize)]
pub struct HitRecord {
    pub query: usize,
    pub method: Method,
    pub tau: f64,
    pub hitting_probability: f64,
    pub hitting_probability_residual: f64,
    pub routes: Routes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_route_deviation: Option<f64>,
    pub initial: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arrival_state: Option<Normalization>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub query: usize,
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: u8,
    pub message: String,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Hit(HitRecord),
    Error(ErrorRecord),
}

pub fn evaluate(
    map: &SuperOperator,
    q: &Query,
    index: usize,
    g: &Global,
    method_flag: Option<Method>,
    force_orthogonal: bool,
) -> CliResult<HitRecord> {
    let tol = g.tolerance(q.tol)?;
    let method = method_flag.or(q.method).unwrap_or(Method::All);
    let n = map.dim();
    let v = input::subspace(&q.subspace, n, &tol)?;
    let (rho, initial) = input::state(&q.initial, n, "initial", &tol)?;
    let (rho_psi, arrival_state) = match &q.arrival_state {
        Some(s) => {
            let (r, norm) = input::state(s, n, "arrival_state", &tol)?;
            (r, Some(norm))
        }
        None => (v.uniform_state(), None),
    };
    let sol = HittingSolution::new(map.clone(), v, &tol)?;

    let wants = |m: Method| method == m || method == Method::All;
    let mut routes = Routes::default();
    if wants(Method::Direct) {
        routes.direct = Some(sol.mean_hitting_time_direct(&rho)?);
    }
    if wants(Method::Mhtf) {
        routes.mhtf = Some(mhtf_route(&sol, &rho, &rho_psi, force_orthogonal)?);
    }
    if wants(Method::Series) {
        let s = tau_series(sol.map(), sol.projectors(), &rho, &tol)?;
        routes.series = Some(SeriesRoute { value: s.tau, terms: s.terms, tail_bound: s.tail_bound });
    }
    let values: Vec<f64> =
        [routes.direct, routes.mhtf.as_ref().map(|m| m.value), routes.series.as_ref().map(|s| s.value)]
            .into_iter()
            .flatten()
            .collect();
    let tau = values[0];
    let max_route_deviation = (method == Method::All).then(|| {
        let mut worst = 0.0f64;
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    });
    let hitting_probability = sol.hitting_probability(&rho)?;
    let maps = sol.hitting_maps();
    Ok(HitRecord {
        query: index,
        method,
        tau,
        hitting_probability,
        hitting_probability_residual: (hitting_probability - 1.0).abs(),
        routes,
        max_route_deviation,
        initial,
        arrival_state,
        diagnostics: Diagnostics {
            spectral_radius_qphi: maps.survival_spectral_radius,
            condition_estimate: sol.fundamental().condition_estimate,
            survival_condition_estimate: maps.condition_estimate,
        },
    })
}

fn mhtf_route(
    sol: &HittingSolution,
    rho: &DensityMatrix,
    rho_psi: &DensityMatrix,
    force_orthogonal: bool,
) -> CliResult<MhtfRoute> {
    if force_orthogonal || sol.subspace().complement_residual(rho) <= ORTHOGONALITY_TOL {
        let m = sol.mhtf_orthogonal(rho, rho_psi)?;
        return Ok(MhtfRoute {
            value: m.tau,
            formula: "orthogonal",
            return_term: m.return_term,
            cross_term: Some(m.cross_term),
            survival_weight: None,
        });
    }
    let weight = match sol.first_step(rho)? {
        FirstStep::Absorbed => 0.0,
        FirstStep::Continue { weight, .. } => weight,
    };
    Ok(MhtfRoute {
        value: sol.mhtf_general(rho, Some(rho_psi))?,
        formula: "general",
        return_term: sol.return_term(rho_psi)?,
        cross_term: None,
        survival_weight: Some(weight),
    })
}

pub fn run(map_path: &Path, query_path: &Path, g: &Global, method: Option<Method>, orthogonal: bool) -> CliResult<u8> {
    let tol = g.tolerance(None)?;
    let loaded = validated_map(map_path, g, &tol)?;
    let (queries, batch) = load_queries(query_path)?;
    let mut code = 0;
    let mut outcomes = Vec::with_capacity(queries.len());
    for (i, q) in queries.iter().enumerate() {
        match evaluate(&loaded.map, q, i + 1, g, method, orthogonal) {
            Ok(r) => outcomes.push(Outcome::Hit(r)),
            Err(f) if batch => {
                if code == 0 {
                    code = f.code;
                }
                outcomes.push(Outcome::Error(ErrorRecord {
                    query: i + 1,
                    error: ErrorBody { code: f.code, message: f.message },
                }));
            }
            Err(f) => return Err(f),
        }
    }
    if g.json {
        if batch {
            print!("{}", report::json(&outcomes));
        } else {
            print!("{}", report::json(&outcomes[0]));
        }
    } else {
        let tables: Vec<String> = outcomes.iter().map(|o| table(o, g.digits())).collect();
        print!("{}", tables.join("\n"));
    }
    for o in &outcomes {
        if let Outcome::Error(e) = o {
            eprintln!("error: query {}: {}", e.query, e.error.message);
        }
    }
    Ok(code)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Direct => "direct",
        Method::Mhtf => "mhtf",
        Method::Series => "series",
        Method::All => "all",
    }
}

fn table(o: &Outcome, digits: usize) -> String {
    let num = |x: f64| number(x, digits);
    let mut t = Table::default();
    let r = match o {
        Outcome::Error(e) => {
            t.row("query", e.query.to_string()).row("error", format!("{} (exit {})", e.error.message, e.error.code));
            return t.render();
        }
        Outcome::Hit(r) => r,
    };
    t.row("query", r.query.to_string()).row("method", method_name(r.method)).row("tau", num(r.tau));
    t.row(
        "hitting probability",
        format!("{} (residual {})", num(r.hitting_probability), num(r.hitting_probability_residual)),
    );
    if let Some(d) = r.routes.direct {
        t.row("direct", num(d));
    }
    if let Some(m) = &r.routes.mhtf {
        let detail = match (m.cross_term, m.survival_weight) {
            (Some(cross), _) => format!("return {}, cross {}", num(m.return_term), num(cross)),
            (_, Some(w)) => format!("return {}, survival weight {}", num(m.return_term), num(w)),
            _ => String::new(),
        };
        t.row("mhtf", format!("{} ({}: {detail})", num(m.value), m.formula));
    }
    if let Some(s) = &r.routes.series {
        t.row("series", format!("{} ({} terms, tail {})", num(s.value), s.terms, num(s.tail_bound)));
    }
    if let Some(d) = r.max_route_deviation {
        t.row("max route deviation", num(d));
    }
    t.row("initial", format!("{} (input scale {})", r.initial.kind, num(r.initial.input_scale)));
    if let Some(a) = &r.arrival_state {
        t.row("arrival state", format!("{} (input scale {})", a.kind, num(a.input_scale)));
    }
    t.row("spectral radius of QPhi", num(r.diagnostics.spectral_radius_qphi));
    t.row("condition of I-Phi+Omega", num(r.diagnostics.condition_estimate));
    t.row("condition of I-QPhi", num(r.diagnostics.survival_condition_estimate));
    t.render()
}
