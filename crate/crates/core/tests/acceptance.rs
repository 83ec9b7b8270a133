//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset by passing criterion numbers, e.g.
//! `cargo test --test acceptance -- 3 4`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use matern_circle::asymptotics::LimitCriterion;
use matern_circle::experiments::{default_box, run, ExperimentConfig, ExperimentKind, ExperimentReport, Threads};
use matern_circle::likelihood::{nll, profile_nll};
use matern_circle::prediction::expected_ise_exact;
use matern_circle::special::{gamma_sym, gamma_sym_dnu, h_ratio, integral_vartheta, psi_nu};
use matern_circle::stats::{covariance, ks_standard_normal, loglog_slope, mean, median, variance};
use matern_circle::{eigen_spectrum, log_det, quad_form, GridSample, MaternParams, PhiRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

mod common;
use common::{dense_covariance, dense_solve};

type Verdict = (bool, String);

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Verdict,
}

const MASTER_SEED: u64 = 20_240_611;

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn theta0() -> MaternParams {
    MaternParams::new(1.5, 1.0, 1.0).unwrap()
}

fn experiment(kind: ExperimentKind, n_list: Vec<usize>, replicates: usize, dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        theta0: Some(theta0()),
        nu0f: Some(1.0),
        n_list,
        replicates,
        master_seed: MASTER_SEED,
        param_box: default_box(1.0).unwrap(),
        output_dir: dir.to_path_buf(),
        threads: Threads::Auto,
    }
}

fn column(
    report: &ExperimentReport,
    n: usize,
    f: impl Fn(&matern_circle::experiments::ReplicateRow) -> Option<f64>,
) -> Vec<f64> {
    report.rows.iter().filter(|r| r.n == n).filter_map(f).collect()
}

fn c1_oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    for &n in &[3usize, 4, 8, 16, 33] {
        for _ in 0..20 {
            let (nu, alpha, phi) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
            let p = MaternParams::new(nu, phi, alpha).unwrap();
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let k = dense_solve(&dense_covariance(&p, n), &z);
            let r = dense_solve(&dense_covariance(&MaternParams::new(nu, 1.0, alpha).unwrap(), n), &z);
            let s = eigen_spectrum(nu, alpha, n, 1e-13).unwrap();
            let g = GridSample::new(z).unwrap();
            let nf = n as f64;
            let (value, phi_hat) = profile_nll(nu, alpha, &g, 1e-13).unwrap();
            for (a, b) in [
                (nll(&p, &g, 1e-13).unwrap(), (k.log_det + k.quad) / nf),
                (value, 1.0 + r.log_det / nf + (r.quad / nf).ln()),
                (phi_hat, r.quad / nf),
                (log_det(&s), r.log_det),
                (quad_form(&s, &g).unwrap(), r.quad),
            ] {
                worst = worst.max(rel(a, b));
            }
        }
    }
    (worst <= 1e-8, format!("max relative deviation {worst:.2e} over 100 configurations (tol 1e-8)"))
}

fn c2_special_functions() -> Verdict {
    let pi2 = std::f64::consts::PI.powi(2);
    let at_half = gamma_sym(2.0, 0.5, 1e-12).unwrap().value;
    let mut ok = (at_half - pi2).abs() <= 1e-9;
    let mut notes = vec![format!("gamma_sym(2,1/2)-pi^2 = {:.1e}", at_half - pi2)];

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sym_fail = 0;
    for _ in 0..1000 {
        let alpha = rng.random_range(1.1..10.0);
        // dyadic x so that 1 - x is exact
        let x = rng.random_range(1u32..(1 << 24)) as f64 / (1u64 << 24) as f64;
        let (a, b) = (gamma_sym(alpha, x, 1e-10).unwrap(), gamma_sym(alpha, 1.0 - x, 1e-10).unwrap());
        if (a.value - b.value).abs() > 2.0 * a.abs_error_bound.max(b.abs_error_bound) {
            sym_fail += 1;
        }
    }
    ok &= sym_fail == 0;
    notes.push(format!("symmetry failures {sym_fail}/1000"));

    let mut fd_fail = 0;
    let mut psi_worst = 0.0f64;
    for i in 0..40 {
        let nu = 0.3 + 0.07 * i as f64;
        let x = 0.013 + 0.024 * i as f64;
        let h = 1e-5;
        let f = |v: f64| gamma_sym(2.0 * v + 1.0, x, 1e-14).unwrap().value;
        let fd = (f(nu + h) - f(nu - h)) / (2.0 * h);
        let d = gamma_sym_dnu(nu, x, 1, 1e-14).unwrap();
        if (d - fd).abs() > (1e-6 * d.abs()).max(1e-10) {
            fd_fail += 1;
        }
        let psi = psi_nu(nu, x, 1e-12).unwrap();
        let identity = -0.5 * d / f(nu);
        psi_worst = psi_worst.max((psi - identity).abs() / identity.abs());
    }
    ok &= fd_fail == 0 && psi_worst <= 1e-9;
    notes.push(format!("derivative failures {fd_fail}/40, psi identity {psi_worst:.1e}"));

    let mut mono_fail = 0;
    for _ in 0..20 {
        let (nu, nu0) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
        let values: Vec<f64> = (1..=512).map(|k| h_ratio(nu, nu0, k as f64 / 1024.0).unwrap()).collect();
        let sorted =
            values
                .windows(2)
                .all(|w| if nu >= nu0 { w[1] >= w[0] * (1.0 - 1e-12) } else { w[1] <= w[0] * (1.0 + 1e-12) });
        mono_fail += usize::from(!sorted);
    }
    ok &= mono_fail == 0;
    notes.push(format!("monotonicity failures {mono_fail}/20"));
    (ok, notes.join(", "))
}

fn c3_deterministic_minimizer() -> Verdict {
    let c = LimitCriterion::deterministic(1.0, 3.0, 129, 1e-9).unwrap();
    let nu = c.argmin.0;
    let ok = (nu - 1.359).abs() <= 0.01 && nu > 1.0 && nu < 1.5;
    (ok, format!("argmin {nu:.5} ± {:.4} (target 1.359 ± 0.01)", c.uncertainty))
}

fn c4_jensen_minimum() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for &nu0 in &[0.75, 1.0, 1.5, 2.5] {
        let c = LimitCriterion::stochastic(nu0, nu0 - 0.42, nu0 + 1.5, 65, 1e-9).unwrap();
        ok &= (c.grid_argmin.0 - nu0).abs() < 1e-12;
        notes.push(format!("nu0={nu0}: grid argmin {:.4}", c.grid_argmin.0));
    }
    (ok, notes.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn c5_estimator_rates() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let ns = vec![512, 1024, 2048, 4096];
    let report = run(&experiment(ExperimentKind::Thm1Rates, ns.clone(), 100, dir.path())).unwrap();
    let nu_med: Vec<f64> =
        ns.iter().map(|&n| median(&column(&report, n, |r| r.nu_hat.map(|v| (v - 1.5).abs())))).collect();
    let phi_med: Vec<f64> = ns
        .iter()
        .map(|&n| median(&column(&report, n, |r| r.phi_hat.map(|v| (v - 1.0).abs() / (n as f64).ln()))))
        .collect();
    let shrink = |v: &[f64]| v[0] / v[v.len() - 1];
    let ok = report.failures.is_empty()
        && strictly_decreasing(&nu_med)
        && strictly_decreasing(&phi_med)
        && shrink(&nu_med) >= 2.0
        && shrink(&phi_med) >= 2.0;
    (
        ok,
        format!(
            "median |nu err| {nu_med:.4?} (x{:.2}), median |phi err|/ln n {phi_med:.4?} (x{:.2})",
            shrink(&nu_med),
            shrink(&phi_med)
        ),
    )
}

fn c6_joint_normality() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&experiment(ExperimentKind::Thm2Normality, vec![4096], 200, dir.path())).unwrap();
    let a = column(&report, 4096, |r| r.stat1);
    let b = column(&report, 4096, |r| r.stat2);
    let (ka, kb) = (ks_standard_normal(&a), ks_standard_normal(&b));
    let cov = [[variance(&a), covariance(&a, &b)], [covariance(&a, &b), variance(&b)]];
    let cov_ok = (cov[0][0] - 1.0).abs() <= 0.25 && (cov[1][1] - 1.0).abs() <= 0.25 && cov[0][1].abs() <= 0.25;
    let ok = report.failures.is_empty() && a.len() == 200 && ka.p_value >= 0.01 && kb.p_value >= 0.01 && cov_ok;
    (
        ok,
        format!(
            "stat1 mean {:.3} KS p {:.2e}, stat2 mean {:.3} KS p {:.3}, covariance [[{:.3}, {:.3}], [{:.3}, {:.3}]]",
            mean(&a),
            ka.p_value,
            mean(&b),
            kb.p_value,
            cov[0][0],
            cov[0][1],
            cov[1][0],
            cov[1][1]
        ),
    )
}

fn c7_ise_constants() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    let n = 2048usize;
    for &(nu0, nu) in &[(1.5, 1.5), (1.5, 2.0), (2.2, 2.2)] {
        let t = MaternParams::new(nu0, 1.0, 1.0).unwrap();
        let scaled = (n as f64).powf(2.0 * nu0) * expected_ise_exact(&t, nu, 1.0, n, 1e-12).unwrap().value;
        let limit = t.phi * integral_vartheta(nu, nu0, 1e-9).unwrap();
        let ratio = scaled / limit;
        ok &= (ratio - 1.0).abs() <= 0.1;
        notes.push(format!("({nu0},{nu}) ratio {ratio:.5}"));
    }
    let t = MaternParams::new(2.2, 1.0, 1.0).unwrap();
    let ns = [256usize, 512, 1024, 2048];
    let y: Vec<f64> = ns.iter().map(|&n| expected_ise_exact(&t, 0.4, 1.0, n, 1e-12).unwrap().value).collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&x, &y);
    ok &= (slope + 3.6).abs() <= 0.2;
    notes.push(format!("slope {slope:.3} (target -3.6 ± 0.2)"));
    (ok, notes.join(", "))
}

fn c8_ise_estimated() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let ns = vec![512, 1024];
    let report = run(&experiment(ExperimentKind::Thm4IseEstimated, ns.clone(), 300, dir.path())).unwrap();
    let mut ok = report.failures.is_empty();
    let mut notes = Vec::new();
    for &n in &ns {
        let ise = column(&report, n, |r| r.ise);
        let expected = expected_ise_exact(&theta0(), 1.5, 1.0, n, 1e-12).unwrap().value;
        let ratio = mean(&ise) / expected;
        ok &= ise.len() == 300 && (0.85..=1.25).contains(&ratio);
        notes.push(format!("n={n}: ratio {ratio:.4}"));
    }
    (ok, notes.join(", "))
}

fn c9_deterministic_lower_bound() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let ns = vec![512, 2048, 8192];
    let report = run(&experiment(ExperimentKind::Prop2Excursion, ns.clone(), 1, dir.path())).unwrap();
    let all = report.rows.iter().filter_map(|r| r.nu_hat).collect::<Vec<_>>();
    let lower_ok = all.len() == 9 && all.iter().all(|&v| v >= 0.9);
    let minima: Vec<f64> =
        ns.iter().map(|&n| column(&report, n, |r| r.nu_hat).into_iter().fold(f64::INFINITY, f64::min)).collect();
    let trend_ok = minima.windows(2).all(|w| w[1] >= w[0]);
    (
        lower_ok && trend_ok,
        format!(
            "lower bound {}, minimum over modes by n {minima:.4?} ({})",
            if lower_ok { "holds" } else { "violated" },
            if trend_ok { "non-decreasing" } else { "decreasing" }
        ),
    )
}

fn c10_fixed_vs_free_amplitude() -> Verdict {
    let fit_at = |phi_range: PhiRange| -> f64 {
        let dir = tempfile::tempdir().unwrap();
        let mut c = experiment(ExperimentKind::Prop3BoundedPhi, vec![8192], 1, dir.path());
        c.param_box.phi_range = phi_range;
        run(&c).unwrap().rows[0].nu_hat.unwrap()
    };
    let fixed = fit_at(PhiRange::Fixed { value: 1.0 });
    let free = fit_at(PhiRange::Unbounded);
    let argmin = LimitCriterion::deterministic(1.0, 3.0, 129, 1e-9).unwrap().argmin.0;
    let ok = (fixed - 1.5).abs() <= 0.15 && (free - argmin).abs() <= 0.1 && (free - 1.5).abs() > 0.05;
    (ok, format!("fixed phi nu_hat {fixed:.4}, free phi nu_hat {free:.4} (limit argmin {argmin:.4})"))
}

fn c11_reproducibility() -> Verdict {
    let runs: Vec<_> = [1usize, 2]
        .iter()
        .map(|&k| {
            let dir = tempfile::tempdir().unwrap();
            let mut c = experiment(ExperimentKind::Thm2Normality, vec![256, 1024], 24, dir.path());
            c.threads = Threads::Count(k);
            run(&c).unwrap();
            let files: Vec<Vec<u8>> = ["replicates.csv", "summary.json", "manifest.json"]
                .iter()
                .map(|f| fs::read(dir.path().join(f)).unwrap())
                .collect();
            files
        })
        .collect();
    let same = runs[0] == runs[1];
    (same, format!("outputs with 1 and 2 threads {}", if same { "byte-identical" } else { "differ" }))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "oracle equivalence", budget: Duration::from_secs(10), check: c1_oracle_equivalence },
        Criterion { id: 2, name: "special functions", budget: Duration::from_secs(10), check: c2_special_functions },
        Criterion {
            id: 3,
            name: "deterministic limit minimizer",
            budget: Duration::from_secs(30),
            check: c3_deterministic_minimizer,
        },
        Criterion { id: 4, name: "limit criterion minimum at nu0", budget: minutes(1), check: c4_jensen_minimum },
        Criterion { id: 5, name: "estimator rates", budget: minutes(15), check: c5_estimator_rates },
        Criterion { id: 6, name: "asymptotic normality", budget: minutes(10), check: c6_joint_normality },
        Criterion { id: 7, name: "ISE constants and decay", budget: minutes(5), check: c7_ise_constants },
        Criterion { id: 8, name: "ISE with estimated parameters", budget: minutes(20), check: c8_ise_estimated },
        Criterion { id: 9, name: "deterministic lower bound", budget: minutes(5), check: c9_deterministic_lower_bound },
        Criterion { id: 10, name: "fixed vs free amplitude", budget: minutes(5), check: c10_fixed_vs_free_amplitude },
        Criterion { id: 11, name: "reproducibility across threads", budget: minutes(10), check: c11_reproducibility },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let pass = pass && in_budget;
        println!(
            "{} criterion {:>2} ({}): {detail}; {:.1} s of {} s budget",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
