use std::path::Path;

use serde::Serialize;

use qhitting_core::oracle::RNG_ALGORITHM;
use qhitting_core::{classical_monte_carlo, DensityMatrix, MarkovChain, Start, Tolerance};

use crate::args::{ClassicalQuery, Global};
use crate::failure::{CliResult, Failure};
use crate::input::{load_map, normalize_distribution, one_based};
use crate::report::{self, number, Table};

#[derive(Debug, Serialize)]
pub struct ReturnTime {
    pub state: usize,
    pub tau: f64,
}

#[derive(Debug, Serialize)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub rng: &'static str,
    /// `(mean − tau)/std_error`; absent when every trajectory had the same length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClassicalRecord {
    pub query: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution_input_sum: Option<f64>,
    pub tau: f64,
    /// Same quantity from the chain viewed as a map on diagonal matrices.
    pub embedded: f64,
    pub embedded_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_times: Option<Vec<ReturnTime>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarlo>,
}

fn embedded(chain: &MarkovChain, start: &DensityMatrix, target: &[usize], tol: &Tolerance) -> CliResult<f64> {
    Ok(chain.embedded_solution(target, tol)?.mean_hitting_time_direct(start)?)
}

pub fn evaluate(
    chain: &MarkovChain,
    q: &ClassicalQuery,
    trials: Option<u64>,
    seed: u64,
    tol: &Tolerance,
) -> CliResult<ClassicalRecord> {
    let n = chain.n();
    let mut rec = ClassicalRecord {
        query: "",
        from: None,
        to: None,
        set: None,
        distribution: None,
        distribution_input_sum: None,
        tau: 0.0,
        embedded: 0.0,
        embedded_deviation: 0.0,
        return_times: None,
        j_spread: None,
        monte_carlo: None,
    };
    let (start, target) = match q {
        ClassicalQuery::Mhtf { from, to } => {
            let [i, j] = one_based(&[*from, *to], n, "state")?[..] else { unreachable!() };
            rec.query = "mhtf";
            rec.from = Some(*from);
            rec.to = Some(*to);
            rec.tau = chain.mhtf(i, j)?;
            rec.embedded = embedded(chain, &DensityMatrix::basis(n, i)?, &[j], tol)?;
            (Start::State(i), vec![j])
        }
        ClassicalQuery::Kac { state } => {
            let j = one_based(&[*state], n, "state")?[0];
            rec.query = "kac";
            rec.to = Some(*state);
            rec.tau = chain.kac_return_time(j)?;
            rec.embedded = embedded(chain, &DensityMatrix::basis(n, j)?, &[j], tol)?;
            (Start::State(j), vec![j])
        }
        ClassicalQuery::Dist { distribution, to } => {
            let j = one_based(&[*to], n, "to")?[0];
            let (x, sum) = normalize_distribution(distribution, n, "distribution")?;
            rec.query = "dist";
            rec.to = Some(*to);
            rec.tau = chain.mhtf_distribution(&x, j)?;
            rec.embedded = embedded(chain, &DensityMatrix::diagonal(&x, tol)?, &[j], tol)?;
            rec.distribution = Some(x.clone());
            rec.distribution_input_sum = Some(sum);
            (Start::Distribution(x), vec![j])
        }
        ClassicalQuery::Subset { from, set } => {
            let i = one_based(&[*from], n, "from")?[0];
            let mut s = one_based(set, n, "set")?;
            s.sort_unstable();
            s.dedup();
            let sub = chain.mhtf_subset(i, &s, tol)?;
            rec.query = "subset";
            rec.from = Some(*from);
            rec.set = Some(s.iter().map(|k| k + 1).collect());
            rec.tau = sub.tau;
            rec.embedded = embedded(chain, &DensityMatrix::basis(n, i)?, &s, tol)?;
            rec.return_times =
                Some(sub.return_times.iter().map(|&(k, tau)| ReturnTime { state: k + 1, tau }).collect());
            rec.j_spread = Some(sub.j_spread);
            (Start::State(i), s)
        }
    };
    rec.embedded_deviation = (rec.tau - rec.embedded).abs();
    if let Some(trials) = trials {
        let mc = classical_monte_carlo(chain.transition(), &start, &target, trials, seed)?;
        let z_score = (mc.std_error > 0.0).then(|| (mc.mean - rec.tau) / mc.std_error);
        rec.monte_carlo = Some(MonteCarlo {
            mean: mc.mean,
            std_error: mc.std_error,
            trials: mc.trials,
            seed: mc.seed,
            rng: RNG_ALGORITHM,
            z_score,
        });
    }
    Ok(rec)
}

pub fn run(file: &Path, q: &ClassicalQuery, trials: Option<u64>, g: &Global) -> CliResult<u8> {
    let tol = g.tolerance(None)?;
    let loaded = load_map(file, g.row_stochastic, &tol)?;
    let p = loaded
        .chain
        .ok_or_else(|| Failure::parse(format!("{}: classical queries need a `stochastic` map", file.display())))?;
    let chain = MarkovChain::new(p, &tol)?;
    let rec = evaluate(&chain, q, trials, g.seed, &tol)?;
    if g.json {
        print!("{}", report::json(&rec));
    } else {
        print!("{}", table(&rec, g.digits()));
    }
    Ok(0)
}

fn table(r: &ClassicalRecord, digits: usize) -> String {
    let num = |x: f64| number(x, digits);
    let mut t = Table::default();
    t.row("query", r.query);
    if let Some(i) = r.from {
        t.row("from", i.to_string());
    }
    if let Some(j) = r.to {
        t.row("to", j.to_string());
    }
    if let Some(s) = &r.set {
        t.row("set", s.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
    }
    if let Some(x) = &r.distribution {
        t.row("distribution", x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
    }
    if let Some(s) = r.distribution_input_sum {
        t.row("distribution input sum", num(s));
    }
    t.row("tau", num(r.tau));
    t.row("embedded", format!("{} (deviation {})", num(r.embedded), num(r.embedded_deviation)));
    if let Some(rt) = &r.return_times {
        for x in rt {
            t.row(format!("return time {}", x.state), num(x.tau));
        }
    }
    if let Some(s) = r.j_spread {
        t.row("j spread", num(s));
    }
    if let Some(mc) = &r.monte_carlo {
        t.row("monte carlo", format!("{} +- {}", num(mc.mean), num(mc.std_error)));
        t.row("trials", mc.trials.to_string());
        t.row("seed", format!("{} ({})", mc.seed, mc.rng));
        if let Some(z) = mc.z_score {
            t.row("z score", num(z));
        }
    }
    t.render()
}
