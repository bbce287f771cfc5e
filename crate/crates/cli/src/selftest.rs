//! Built-in reference suite: the qubit and four-level reference channels plus
//! seeded random instances.

use serde::Serialize;

use qhitting_core::linalg::{frobenius, identity, re};
use qhitting_core::{
    random, reference, tau_series, verify_fundamental_identities, ArrivalSubspace, ComplexMatrix, DensityMatrix,
    FirstStep, HittingSolution, Side, Tolerance,
};

use crate::args::Global;
use crate::failure::{CliResult, SELFTEST};
use crate::report::{self, number};

const RANDOM_SEED: u64 = 7_919;
const RANDOM_INSTANCES: usize = 10;

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub error: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub total: usize,
    pub failed: Vec<String>,
    pub checks: Vec<CheckResult>,
}

#[derive(Default)]
struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    fn bound(&mut self, name: impl Into<String>, error: f64, bound: f64) {
        // NaN fails
        let passed = error <= bound;
        self.checks.push(CheckResult { name: name.into(), error, bound, passed });
    }

    fn close(&mut self, name: impl Into<String>, got: f64, want: f64, bound: f64) {
        self.bound(name, (got - want).abs(), bound);
    }

    fn matrix(&mut self, name: &str, got: &ComplexMatrix, want: &ComplexMatrix) {
        let err = if got.shape() == want.shape() {
            (got - want).iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        self.bound(name, err, 1e-12);
    }

    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Self) -> qhitting_core::Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(CheckResult {
                name: format!("{name}: {e}"),
                error: f64::INFINITY,
                bound: 0.0,
                passed: false,
            });
        }
    }
}

fn real(n: usize, scale: f64, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(n, n, &entries.iter().map(|x| re(x * scale)).collect::<Vec<_>>())
}

fn qubit(s: &mut Suite, perturb: bool) -> qhitting_core::Result<()> {
    let tol = Tolerance::default();
    let v = ArrivalSubspace::from_vectors(&[reference::qubit_psi()], &tol)?;
    let sol = HittingSolution::new(reference::qubit_channel(), v, &tol)?;

    let phi_rep = real(4, 1.0 / 3.0, &[2., 1., 1., 1., -1., 2., 0., 1., -1., 0., 2., 1., 1., -1., -1., 2.]);
    let omega = real(4, 0.5, &[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.]);
    let mut z = real(4, 0.25, &[3., 2., 2., 1., -2., 8., -4., 2., -2., -4., 8., 2., 1., -2., -2., 3.]);
    if perturb {
        z[(0, 0)] += re(1e-6);
    }
    let pp = real(4, 0.25, &[1.; 16]);
    let qq = real(4, 0.25, &[1., -1., -1., 1., -1., 1., 1., -1., -1., 1., 1., -1., 1., -1., -1., 1.]);
    let k =
        real(4, 1.0 / 6.0, &[39., -12., -12., 9., -72., 32., 28., -12., -72., 28., 32., -12., 177., -72., -72., 39.]);
    let k12 = real(4, 1.5, &[-3., 3., 3., -3., 1., -1., -1., 1., 1., -1., -1., 1., 5., -5., -5., 5.]);
    s.matrix("qubit Phi", sol.map().rep(), &phi_rep);
    s.matrix("qubit Omega", &sol.fundamental().omega_rep, &omega);
    s.matrix("qubit Z", &sol.fundamental().z_rep, &z);
    s.matrix("qubit PP", &sol.projectors().pp, &pp);
    s.matrix("qubit QQ", &sol.projectors().qq, &qq);
    s.matrix("qubit K", sol.k_rep(), &k);
    s.matrix("qubit K12", &sol.block(sol.k_rep(), Side::Arrival, Side::Survival), &k12);
    s.matrix("qubit pi", sol.fundamental().pi.matrix(), &identity(2).scale(0.5));

    let phi = DensityMatrix::pure(&reference::qubit_phi())?;
    let psi = DensityMatrix::pure(&reference::qubit_psi())?;
    let chi = DensityMatrix::pure(&reference::qubit_chi())?;
    s.close("qubit tau(phi) direct", sol.mean_hitting_time_direct(&phi)?, 6.0, 1e-9);
    let m = sol.mhtf_orthogonal(&phi, &psi)?;
    s.close("qubit tau(phi) mhtf", m.tau, 6.0, 1e-9);
    s.close("qubit return term", m.return_term, 4.0, 1e-9);
    s.close("qubit cross term", m.cross_term, -2.0, 1e-9);
    s.close("qubit tau(phi) series", tau_series(sol.map(), sol.projectors(), &phi, &tol)?.tau, 6.0, 1e-8);
    s.close("qubit tau(chi) direct", sol.mean_hitting_time_direct(&chi)?, 2.0, 1e-9);
    s.close("qubit tau(chi) general", sol.mhtf_general(&chi, Some(&psi))?, 2.0, 1e-9);
    match sol.first_step(&chi)? {
        FirstStep::Continue { weight, next_state } => {
            s.close("qubit chi survival weight", weight, 1.0 / 6.0, 1e-12);
            s.bound("qubit chi conditioned state", frobenius(&(next_state.matrix() - phi.matrix())), 1e-12);
        }
        FirstStep::Absorbed => s.bound("qubit chi survival weight", f64::INFINITY, 0.0),
    }
    s.bound(
        "qubit fundamental identities",
        verify_fundamental_identities(sol.fundamental(), sol.map()).max_residual(),
        1e-10,
    );
    Ok(())
}

fn four_level(s: &mut Suite, a: f64) -> qhitting_core::Result<()> {
    let tol = Tolerance::default();
    let b = (1.0 - a * a).sqrt();
    let b2 = b * b;
    let v = ArrivalSubspace::from_vectors(&reference::four_level_arrival(), &tol)?;
    let sol = HittingSolution::new(reference::four_level_channel(a), v, &tol)?;
    let phi = DensityMatrix::pure(&reference::four_level_phi())?;
    let chi = DensityMatrix::pure(&reference::four_level_chi())?;
    let psi = DensityMatrix::basis(4, 2)?;

    let tau_phi = 1.0 + 1.0 / b2;
    let tau_chi = 2.0 * (1.0 + a / (2.0 * b) + 1.0 / (4.0 * b2));
    s.close(format!("a={a} tau(phi) direct"), sol.mean_hitting_time_direct(&phi)?, tau_phi, 1e-10);
    s.close(format!("a={a} tau(chi) direct"), sol.mean_hitting_time_direct(&chi)?, tau_chi, 1e-10);
    let m = sol.mhtf_orthogonal(&phi, &psi)?;
    s.close(format!("a={a} tau(phi) mhtf"), m.tau, tau_phi, 1e-9);
    s.close(format!("a={a} return term"), m.return_term, (1.0 + 6.0 * b2) / (4.0 * b2), 1e-10);
    s.close(format!("a={a} cross term"), m.cross_term, (2.0 * b2 - 3.0) / (4.0 * b2), 1e-10);
    s.close(format!("a={a} tau(chi) general"), sol.mhtf_general(&chi, None)?, tau_chi, 1e-9);
    s.bound(
        format!("a={a} fundamental identities"),
        verify_fundamental_identities(sol.fundamental(), sol.map()).max_residual(),
        1e-10,
    );
    Ok(())
}

fn random_instance(s: &mut Suite, rng: &mut random::Rand, i: usize) -> qhitting_core::Result<()> {
    let tol = Tolerance::default();
    let n = 2 + i % 3;
    let map = random::irreducible_cptp_map(rng, n, &tol);
    let v = random::subspace(rng, n, 1 + i % (n - 1), &tol);
    let rho_psi = random::density_in(rng, v.projector());
    let rho_phi = random::density_in(rng, v.complement());
    let rho = random::density(rng, n);
    let sol = HittingSolution::new(map, v, &tol)?;

    let direct_phi = sol.mean_hitting_time_direct(&rho_phi)?;
    let direct = sol.mean_hitting_time_direct(&rho)?;
    s.close(format!("random {i} mhtf orthogonal"), sol.mhtf_orthogonal(&rho_phi, &rho_psi)?.tau, direct_phi, 1e-9);
    s.close(format!("random {i} mhtf general"), sol.mhtf_general(&rho, Some(&rho_psi))?, direct, 1e-9);
    s.close(format!("random {i} series"), tau_series(sol.map(), sol.projectors(), &rho, &tol)?.tau, direct, 1e-8);
    s.close(format!("random {i} hitting probability"), sol.hitting_probability(&rho)?, 1.0, 1e-10);
    s.bound(
        format!("random {i} fundamental identities"),
        verify_fundamental_identities(sol.fundamental(), sol.map()).max_residual(),
        1e-10,
    );
    Ok(())
}

pub fn report(perturb: bool) -> SelftestReport {
    let mut s = Suite::default();
    s.attempt("qubit", |s| qubit(s, perturb));
    for a in [0.6, 0.28, 0.96] {
        s.attempt(&format!("four-level a={a}"), |s| four_level(s, a));
    }
    let mut rng = random::rng(RANDOM_SEED);
    for i in 0..RANDOM_INSTANCES {
        s.attempt(&format!("random {i}"), |s| random_instance(s, &mut rng, i));
    }
    let failed: Vec<String> = s.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    SelftestReport { passed: failed.is_empty(), total: s.checks.len(), failed, checks: s.checks }
}

pub fn run(perturb: bool, g: &Global) -> CliResult<u8> {
    let r = report(perturb);
    if g.json {
        print!("{}", report::json(&r));
    } else {
        let digits = g.digits().min(3);
        let width = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &r.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!(
                "{mark}  {:width$}  error {} (bound {})",
                c.name,
                number(c.error, digits),
                number(c.bound, digits)
            );
        }
        println!("{} of {} checks passed", r.total - r.failed.len(), r.total);
    }
    if r.passed {
        Ok(0)
    } else {
        for name in &r.failed {
            eprintln!("failed: {name}");
        }
        Ok(SELFTEST)
    }
}
