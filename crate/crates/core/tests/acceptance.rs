//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs without the libtest harness so the report is always printed.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use qhitting_core::hitting::Side;
use qhitting_core::linalg::{frobenius, kron, re, unvec, vec};
use qhitting_core::oracle::{classical_monte_carlo, tau_series, Start};
use qhitting_core::{
    random, reference, verify_fundamental_identities, ArrivalSubspace, ComplexMatrix, DensityMatrix, FirstStep,
    HittingSolution, MarkovChain, RealMatrix, SuperOperator, Tolerance,
};

const SEED: u64 = 20_240_601;
const RANDOM_INSTANCES: usize = 50;
const CHAINS: usize = 20;
const MC_TRIALS: u64 = 100_000;

/// Collects comparisons; remembers the worst error and the first few failures.
#[derive(Default)]
struct Check {
    worst: f64,
    count: usize,
    failures: Vec<String>,
}

impl Check {
    fn close(&mut self, label: impl FnOnce() -> String, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.count += 1;
        if err.is_nan() || err > tol {
            if self.failures.len() < 5 {
                self.failures
                    .push(format!("{}: got {got:.15e}, want {want:.15e}, |err| {err:.2e} > {tol:.0e}", label()));
            }
        } else {
            self.worst = self.worst.max(err);
        }
    }

    fn small(&mut self, label: impl FnOnce() -> String, residual: f64, tol: f64) {
        self.close(label, residual, 0.0, tol);
    }

    fn matrix(&mut self, label: &str, got: &ComplexMatrix, want: &ComplexMatrix, tol: f64) {
        let err = (got - want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.small(|| format!("{label} (max entrywise)"), err, tol);
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.count += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(label.to_string());
        }
    }

    fn fail(&mut self, msg: String) {
        self.count += 1;
        if self.failures.len() < 5 {
            self.failures.push(msg);
        }
    }
}

fn real(n: usize, scale: f64, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(n, n, &entries.iter().map(|x| re(x * scale)).collect::<Vec<_>>())
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn pure(v: &qhitting_core::ComplexVector) -> DensityMatrix {
    DensityMatrix::pure(v).unwrap()
}

fn qubit_solution() -> HittingSolution {
    let v = ArrivalSubspace::from_vectors(&[reference::qubit_psi()], &tol()).unwrap();
    HittingSolution::new(reference::qubit_channel(), v, &tol()).unwrap()
}

fn four_level_solution(a: f64) -> HittingSolution {
    let v = ArrivalSubspace::from_vectors(&reference::four_level_arrival(), &tol()).unwrap();
    HittingSolution::new(reference::four_level_channel(a), v, &tol()).unwrap()
}

fn criterion_1(c: &mut Check) {
    let sol = qubit_solution();
    let phi_rep = real(4, 1.0 / 3.0, &[2., 1., 1., 1., -1., 2., 0., 1., -1., 0., 2., 1., 1., -1., -1., 2.]);
    let omega = real(4, 0.5, &[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.]);
    let z = real(4, 0.25, &[3., 2., 2., 1., -2., 8., -4., 2., -2., -4., 8., 2., 1., -2., -2., 3.]);
    let pp = real(4, 0.25, &[1.; 16]);
    let qq = real(4, 0.25, &[1., -1., -1., 1., -1., 1., 1., -1., -1., 1., 1., -1., 1., -1., -1., 1.]);
    let k =
        real(4, 1.0 / 6.0, &[39., -12., -12., 9., -72., 32., 28., -12., -72., 28., 32., -12., 177., -72., -72., 39.]);
    let k12 = real(4, 1.5, &[-3., 3., 3., -3., 1., -1., -1., 1., 1., -1., -1., 1., 5., -5., -5., 5.]);

    c.matrix("Phi", sol.map().rep(), &phi_rep, 1e-12);
    c.matrix("Omega", &sol.fundamental().omega_rep, &omega, 1e-12);
    c.matrix("Z", &sol.fundamental().z_rep, &z, 1e-12);
    c.matrix("PP", &sol.projectors().pp, &pp, 1e-12);
    c.matrix("QQ", &sol.projectors().qq, &qq, 1e-12);
    c.matrix("K", sol.k_rep(), &k, 1e-12);
    c.matrix("K12", &sol.block(sol.k_rep(), Side::Arrival, Side::Survival), &k12, 1e-12);
}

fn criterion_2(c: &mut Check) {
    let sol = qubit_solution();
    let phi = pure(&reference::qubit_phi());
    let psi = pure(&reference::qubit_psi());
    let chi = pure(&reference::qubit_chi());

    c.close(|| "direct tau(phi)".into(), sol.mean_hitting_time_direct(&phi).unwrap(), 6.0, 1e-9);
    let m = sol.mhtf_orthogonal(&phi, &psi).unwrap();
    c.close(|| "mhtf tau(phi)".into(), m.tau, 6.0, 1e-9);
    c.close(|| "return term".into(), m.return_term, 4.0, 1e-9);
    c.close(|| "cross term".into(), m.cross_term, -2.0, 1e-9);
    let series = tau_series(sol.map(), sol.projectors(), &phi, &tol()).unwrap();
    c.close(|| "series tau(phi)".into(), series.tau, 6.0, 1e-8);

    c.close(|| "direct tau(chi)".into(), sol.mean_hitting_time_direct(&chi).unwrap(), 2.0, 1e-9);
    c.close(|| "general mhtf tau(chi)".into(), sol.mhtf_general(&chi, Some(&psi)).unwrap(), 2.0, 1e-9);
    match sol.first_step(&chi).unwrap() {
        FirstStep::Continue { weight, next_state } => {
            c.close(|| "Tr(QQ Phi rho_chi)".into(), weight, 1.0 / 6.0, 1e-12);
            c.small(|| "conditioned state".into(), frobenius(&(next_state.matrix() - phi.matrix())), 1e-12);
        }
        FirstStep::Absorbed => c.fail("chi absorbed in one step".into()),
    }
}

fn criterion_3(c: &mut Check) {
    for a in [0.28f64, 0.6, 0.96] {
        let b = (1.0 - a * a).sqrt();
        let sol = four_level_solution(a);
        let phi = pure(&reference::four_level_phi());
        let chi = pure(&reference::four_level_chi());
        let psi = DensityMatrix::basis(4, 2).unwrap();

        let tau_phi = sol.mean_hitting_time_direct(&phi).unwrap();
        let tau_chi = sol.mean_hitting_time_direct(&chi).unwrap();
        c.close(|| format!("a={a} direct tau(phi)"), tau_phi, 1.0 + 1.0 / (b * b), 1e-10);
        c.close(|| format!("a={a} direct tau(chi)"), tau_chi, 2.0 * (1.0 + a / (2.0 * b) + 1.0 / (4.0 * b * b)), 1e-10);

        let m = sol.mhtf_orthogonal(&phi, &psi).unwrap();
        c.close(|| format!("a={a} mhtf tau(phi)"), m.tau, tau_phi, 1e-9);
        c.close(|| format!("a={a} general tau(chi)"), sol.mhtf_general(&chi, None).unwrap(), tau_chi, 1e-9);
        c.close(|| format!("a={a} general tau(phi)"), sol.mhtf_general(&phi, Some(&psi)).unwrap(), tau_phi, 1e-9);

        // Intermediate traces, recomputed in closed form.
        let b2 = b * b;
        c.close(|| format!("a={a} return term"), m.return_term, (1.0 + 6.0 * b2) / (4.0 * b2), 1e-10);
        c.close(|| format!("a={a} cross term"), m.cross_term, (2.0 * b2 - 3.0) / (4.0 * b2), 1e-10);
        match sol.first_step(&chi).unwrap() {
            FirstStep::Continue { weight, .. } => c.close(|| format!("a={a} chi weight"), weight, 1.0, 1e-12),
            FirstStep::Absorbed => c.fail(format!("a={a}: chi absorbed")),
        }
    }
}

struct Instance {
    sol: HittingSolution,
    rho_phi: DensityMatrix,
    rho_psi: DensityMatrix,
    rho_any: DensityMatrix,
}

fn random_instances() -> Vec<Instance> {
    let mut rng = random::rng(SEED);
    let t = tol();
    (0..RANDOM_INSTANCES)
        .map(|i| {
            let n = 2 + i % 3;
            let map = random::irreducible_cptp_map(&mut rng, n, &t);
            let d = 1 + (i / 3) % (n - 1);
            let v = random::subspace(&mut rng, n, d, &t);
            let rho_psi = random::density_in(&mut rng, v.projector());
            let rho_phi = random::density_in(&mut rng, v.complement());
            let rho_any = random::density(&mut rng, n);
            Instance { sol: HittingSolution::new(map, v, &t).unwrap(), rho_phi, rho_psi, rho_any }
        })
        .collect()
}

fn criterion_4(c: &mut Check, instances: &[Instance]) {
    let mut identity_suite = |label: &str, sol: &HittingSolution, psi: &DensityMatrix, phi: &DensityMatrix| {
        let report = verify_fundamental_identities(sol.fundamental(), sol.map());
        for r in &report.residuals {
            c.small(|| format!("{label}: {}", r.name), r.residual, 1e-10);
        }
        let blocks = sol.verify_block_identities(psi, phi).unwrap();
        c.small(|| format!("{label}: upper block identity"), blocks.upper, 1e-10);
        c.small(|| format!("{label}: lower block identity"), blocks.lower, 1e-10);
        c.small(|| format!("{label}: (I-Q)L = (I-Q)H"), blocks.first_row_l_h, 1e-10);
        c.small(|| format!("{label}: N diagonal blocks"), blocks.n_diagonal, 1e-10);
    };
    identity_suite("qubit", &qubit_solution(), &pure(&reference::qubit_psi()), &pure(&reference::qubit_phi()));
    for a in [0.28, 0.6, 0.96] {
        identity_suite(
            &format!("four-level a={a}"),
            &four_level_solution(a),
            &DensityMatrix::basis(4, 2).unwrap(),
            &pure(&reference::four_level_phi()),
        );
    }
    for (i, inst) in instances.iter().enumerate() {
        identity_suite(&format!("instance {i}"), &inst.sol, &inst.rho_psi, &inst.rho_phi);
    }
}

fn criterion_5(c: &mut Check, instances: &[Instance]) {
    for (i, inst) in instances.iter().enumerate() {
        let sol = &inst.sol;
        let direct = sol.mean_hitting_time_direct(&inst.rho_phi).unwrap();
        let m = sol.mhtf_orthogonal(&inst.rho_phi, &inst.rho_psi).unwrap();
        c.close(|| format!("instance {i}: direct vs mhtf"), m.tau, direct, 1e-9);
        match tau_series(sol.map(), sol.projectors(), &inst.rho_phi, &tol()) {
            Ok(s) => c.close(|| format!("instance {i}: direct vs series"), s.tau, direct, 1e-8),
            Err(e) => c.fail(format!("instance {i}: series failed: {e}")),
        }

        let direct_any = sol.mean_hitting_time_direct(&inst.rho_any).unwrap();
        let general = sol.mhtf_general(&inst.rho_any, Some(&inst.rho_psi)).unwrap();
        c.close(|| format!("instance {i}: direct vs general mhtf"), general, direct_any, 1e-9);
        match tau_series(sol.map(), sol.projectors(), &inst.rho_any, &tol()) {
            Ok(s) => c.close(|| format!("instance {i}: general series"), s.tau, direct_any, 1e-8),
            Err(e) => c.fail(format!("instance {i}: series failed: {e}")),
        }

        for rho in [&inst.rho_phi, &inst.rho_psi, &inst.rho_any] {
            c.close(|| format!("instance {i}: hitting probability"), sol.hitting_probability(rho).unwrap(), 1.0, 1e-10);
        }
    }
}

fn criterion_6(c: &mut Check, instances: &[Instance]) {
    let mut rng = random::rng(SEED ^ 6);
    for (i, inst) in instances.iter().enumerate() {
        let values: Vec<f64> = (0..20)
            .map(|_| {
                let rho = random::density_in(&mut rng, inst.sol.subspace().projector());
                inst.sol.return_term(&rho).unwrap()
            })
            .collect();
        let spread = spread(&values);
        c.small(|| format!("instance {i}: return term spread over rho_psi"), spread, 1e-10);
    }

    let mut rng = random::rng(SEED ^ 0x6_6);
    for k in 0..CHAINS {
        let n = 3 + k % 6;
        let mc = MarkovChain::new(random::irreducible_chain(&mut rng, n), &tol()).unwrap();
        let size = 1 + k % 3;
        let set: Vec<usize> = (0..size).map(|s| (k + 2 * s) % n).collect();
        let start = (0..n).find(|x| !set.contains(x)).unwrap();
        match mc.mhtf_subset(start, &set, &tol()) {
            Ok(sub) => c.small(|| format!("chain {k}: j-spread"), sub.j_spread, 1e-9),
            Err(e) => c.fail(format!("chain {k}: {e}")),
        }
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Mean first-passage times into `target` by solving `h = 1 + Σ_{k∉target} p_ki h_k`.
fn absorbing_solve(p: &RealMatrix, target: &[usize]) -> DVector<f64> {
    let n = p.nrows();
    let mut a = RealMatrix::identity(n, n);
    for i in 0..n {
        for k in 0..n {
            if !target.contains(&k) {
                a[(i, k)] -= p[(k, i)];
            }
        }
    }
    a.lu().solve(&DVector::from_element(n, 1.0)).unwrap()
}

fn criterion_7(c: &mut Check) {
    let mut rng = random::rng(SEED ^ 7);
    let t = tol();
    for k in 0..CHAINS {
        let n = 2 + k % 7;
        let p = random::irreducible_chain(&mut rng, n);
        let mc = MarkovChain::new(p.clone(), &t).unwrap();
        let seed = SEED + k as u64;

        for j in 0..n {
            let h = absorbing_solve(&p, &[j]);
            let embedded = mc.embedded_solution(&[j], &t).unwrap();
            for i in 0..n {
                let rho = DensityMatrix::basis(n, i).unwrap();
                let quantum = embedded.mean_hitting_time_direct(&rho).unwrap();
                if i == j {
                    let kac = mc.kac_return_time(j).unwrap();
                    c.close(|| format!("chain {k}: Kac {j} vs embedding"), quantum, kac, 1e-8);
                    c.close(|| format!("chain {k}: Kac {j} vs absorbing solve"), h[j], kac, 1e-8);
                } else {
                    let classical = mc.mhtf(i, j).unwrap();
                    c.close(|| format!("chain {k}: mhtf {i}->{j} vs embedding"), classical, quantum, 1e-8);
                    c.close(|| format!("chain {k}: mhtf {i}->{j} vs absorbing solve"), classical, h[i], 1e-8);
                }
            }
        }

        let (i, j) = (0, n - 1);
        let mc_check = |c: &mut Check, what: &str, start: Start, target: &[usize], exact: f64, seed: u64| {
            match classical_monte_carlo(&p, &start, target, MC_TRIALS, seed) {
                Ok(est) => {
                    let label = || format!("chain {k}: Monte Carlo {what} ({} vs {exact})", est.mean);
                    if est.std_error > 0.0 {
                        c.small(label, (est.mean - exact).abs() / est.std_error, 4.0);
                    } else {
                        // every trajectory had the same length
                        c.close(label, est.mean, exact, 1e-9 * exact.max(1.0));
                    }
                }
                Err(e) => c.fail(format!("chain {k}: Monte Carlo {what}: {e}")),
            }
        };
        mc_check(c, "mhtf", Start::State(i), &[j], mc.mhtf(i, j).unwrap(), seed);
        mc_check(c, "kac", Start::State(j), &[j], mc.kac_return_time(j).unwrap(), seed + 1000);

        let x = random::probability_vector(&mut rng, n);
        let dist = mc.mhtf_distribution(x.as_slice(), j).unwrap();
        let h = absorbing_solve(&p, &[j]);
        let classical_dist = 1.0 + (0..n).map(|s| (&p * &x)[s] * if s == j { 0.0 } else { h[s] }).sum::<f64>();
        c.close(|| format!("chain {k}: distribution start vs absorbing solve"), dist, classical_dist, 1e-8);
        mc_check(c, "dist", Start::Distribution(x.as_slice().to_vec()), &[j], dist, seed + 2000);

        if n >= 3 {
            let set = [n - 1, n - 2];
            let sub = mc.mhtf_subset(0, &set, &t).unwrap();
            c.close(|| format!("chain {k}: subset vs absorbing solve"), sub.tau, absorbing_solve(&p, &set)[0], 1e-8);
            mc_check(c, "subset", Start::State(0), &set, sub.tau, seed + 3000);
        }
    }
}

fn criterion_8(c: &mut Check) {
    let mut rng = random::rng(SEED ^ 8);
    for trial in 0..100 {
        let a = random::gaussian_matrix(&mut rng, 3, 3);
        let b = random::gaussian_matrix(&mut rng, 3, 3);
        let x = random::gaussian_matrix(&mut rng, 3, 3);
        let lhs = vec(&(&a * &x * b.transpose())).unwrap();
        let rhs = kron(&a, &b) * vec(&x).unwrap();
        c.small(|| format!("triple {trial}"), (lhs - rhs).camax(), 1e-12);
        // Kraus action through the representation
        let map = SuperOperator::from_kraus(vec![a.clone()]).unwrap();
        let direct = &a * &x * a.adjoint();
        c.small(|| format!("triple {trial} Kraus"), frobenius(&(map.apply(&x).unwrap() - direct)), 1e-12);
        c.holds("unvec inverts vec", unvec(&vec(&x).unwrap()).unwrap() == x);
    }
    c.holds("vec stacks rows", {
        let m = real(2, 1.0, &[1., 2., 3., 4.]);
        vec(&m).unwrap().iter().map(|z| z.re).collect::<Vec<_>>() == [1., 2., 3., 4.]
    });
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut report = String::new();
    let mut run = |id: u8, name: &str, budget: Option<Duration>, f: &mut dyn FnMut(&mut Check)| {
        let mut check = Check::default();
        let start = Instant::now();
        f(&mut check);
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < b);
        let ok = check.failures.is_empty() && in_time && check.count > 0;
        all_ok &= ok;
        let budget_note = budget.map(|b| format!(" / budget {:.1} s", b.as_secs_f64())).unwrap_or_default();
        let _ = writeln!(
            report,
            "criterion {id} {name:<28} {} ({} checks, worst {:.1e}, {:.3} s{budget_note})",
            if ok { "PASS" } else { "FAIL" },
            check.count,
            check.worst,
            elapsed.as_secs_f64(),
        );
        for f in &check.failures {
            let _ = writeln!(report, "    {f}");
        }
        if !in_time {
            let _ = writeln!(report, "    exceeded runtime budget");
        }
    };

    run(1, "golden matrices (qubit)", Some(Duration::from_millis(100)), &mut criterion_1);
    run(2, "golden scalars (qubit)", None, &mut criterion_2);
    run(3, "golden formulas (four-level)", Some(Duration::from_secs(1)), &mut criterion_3);

    let setup = Instant::now();
    let instances = random_instances();
    let setup_time = setup.elapsed();
    run(4, "identity suite", None, &mut |c| criterion_4(c, &instances));
    // Instance generation counts towards the route-equivalence budget.
    run(5, "route equivalence", Some(Duration::from_secs(30).saturating_sub(setup_time)), &mut |c| {
        criterion_5(c, &instances)
    });
    run(6, "psi- and j-independence", None, &mut |c| criterion_6(c, &instances));
    run(7, "classical agreement", Some(Duration::from_secs(60)), &mut criterion_7);
    run(8, "vec/kron convention", None, &mut criterion_8);

    print!("{report}");
    if all_ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
