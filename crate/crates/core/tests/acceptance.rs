//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p amrtriad --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use amrtriad::analysis::{
    OutcomeKind, band_entry_time, classify_outcome, crossing_fraction, post_burn_in_mean,
    stationary_histogram,
};
use amrtriad::fde::{CaputoProblem, integrate_caputo, integrate_caputo_until, solve_scalar};
use amrtriad::model::persistence_level_closed_form;
use amrtriad::ode::integrate_euler;
use amrtriad::sde::{NoisePlan, simulate_path};
use amrtriad::{
    Execution, ModelParams, TimeGrid, compute_thresholds, equilibrium_deterministic,
    equilibrium_stochastic, integrate_ode, mittag_leffler, simulate_ensemble,
};

const N: f64 = 1e6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn thresholds() -> Verdict {
    let a = compute_thresholds(&ModelParams::table(0.0, 1e-7, 1.0)).unwrap();
    let b = compute_thresholds(&ModelParams::table(2.0, 1e-6, 1.0)).unwrap();
    let pass = rel(a.k0_d, 5.0) <= 1e-12
        && a.k0_f == a.k0_d
        && rel(a.k0_s, 4.95) <= 1e-12
        && (b.k0_d - 0.238_095).abs() < 5e-7
        && b.k0_s.abs() <= 1e-12;
    check(
        pass,
        format!(
            "K0d={} K0s={} K0f={}; gamma=2: K0d={:.6} K0s={:e}",
            a.k0_d, a.k0_s, a.k0_f, b.k0_d, b.k0_s
        ),
    )
}

fn equilibria() -> Verdict {
    let xi_d = equilibrium_deterministic(&ModelParams::table(0.0, 0.0, 1.0)).unwrap();
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let xi_s = equilibrium_stochastic(&p).unwrap();
    let closed = persistence_level_closed_form(&p).unwrap();
    let pass = (xi_d - 666_666.67).abs() <= 0.01
        && (xi_s - 666_111.0).abs() <= 1.0
        && rel(xi_s, closed) <= 1e-9;
    check(
        pass,
        format!(
            "xi_d={xi_d:.4} xi_s={xi_s:.4} (anchor 666111 +/- 1) closed-form rel diff {:.1e}",
            rel(xi_s, closed)
        ),
    )
}

fn deterministic_extinction() -> Verdict {
    let grid = TimeGrid::span(50.0, 0.01).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for gamma in [1.0, 1.25, 1.5, 1.75, 2.0] {
        let p = ModelParams::table(gamma, 0.0, 1.0);
        let start = Instant::now();
        let traj = integrate_ode(&p, N - 1.0, &grid).unwrap();
        let elapsed = start.elapsed();
        let rate = p.conjugation * N - p.removal_rate();
        let r0 = traj.values[0];
        let bound_ok = traj
            .points()
            .skip(1)
            .all(|(t, r)| r.ln() / t <= r0.ln() / t + rate);
        let kind = classify_outcome(&traj, &p).kind;
        let ok = kind == OutcomeKind::Extinct && bound_ok && elapsed < Duration::from_secs(1);
        pass &= ok;
        notes.push(format!(
            "g={gamma}: R(50)={:.2e} {:?} bound={} {:.0}ms",
            traj.terminal(),
            kind,
            bound_ok,
            elapsed.as_secs_f64() * 1e3
        ));
    }
    check(pass, notes.join("; "))
}

fn deterministic_persistence() -> Verdict {
    let grid = TimeGrid::span(200.0, 0.01).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for gamma in [0.0, 0.1, 0.2, 0.3, 0.4] {
        let p = ModelParams::table(gamma, 0.0, 1.0);
        let start = Instant::now();
        let traj = integrate_ode(&p, 1.0, &grid).unwrap();
        let elapsed = start.elapsed();
        let fast = elapsed < Duration::from_secs(1);
        match equilibrium_deterministic(&p) {
            Ok(xi) => {
                let e = rel(traj.terminal(), xi);
                pass &= e < 1e-3 && fast;
                notes.push(format!("g={gamma}: rel err {e:.1e}"));
            }
            Err(err) => {
                pass = false;
                notes.push(format!(
                    "g={gamma}: R(200)={:.4}, no equilibrium to compare with ({err})",
                    traj.terminal()
                ));
            }
        }
    }
    check(pass, notes.join("; "))
}

fn sde_extinction() -> Verdict {
    let start = Instant::now();
    let p = ModelParams::table(2.0, 5e-7, 1.0);
    let grid = TimeGrid::span(50.0, 1e-3).unwrap().with_stride(10).unwrap();
    let ens = simulate_ensemble(&p, N - 1.0, &grid, 500, 5000).unwrap();
    let elapsed = start.elapsed();
    let inside = ens
        .paths
        .iter()
        .all(|t| t.values.iter().all(|&r| r > 0.0 && r < N));
    let steps = (grid.n_steps * ens.n_paths) as f64;
    let clamp_share = ens.clamp_events() as f64 / steps;
    let extinct = ens
        .paths
        .iter()
        .filter(|t| t.values.iter().any(|&r| r < 1.0))
        .count() as f64
        / ens.n_paths as f64;
    let pass = inside && clamp_share < 1e-3 && extinct >= 0.99 && elapsed < Duration::from_secs(60);
    check(
        pass,
        format!(
            "inside={inside} clamps={:.2e} of steps, below 1 by t=50: {:.1}% ({:.1}s)",
            clamp_share,
            extinct * 100.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn sde_persistence() -> Verdict {
    let start = Instant::now();
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let xi = equilibrium_stochastic(&p).unwrap();
    let grid = TimeGrid::span(300.0, 0.01).unwrap().with_stride(10).unwrap();
    let ens = simulate_ensemble(&p, 1.0, &grid, 200, 6000).unwrap();
    let mean = post_burn_in_mean(&ens, 0.5).unwrap();
    let crossing = crossing_fraction(&ens, xi, 100.0, 300.0, 2);
    let elapsed = start.elapsed();
    let pass = rel(mean, xi) < 0.02 && crossing >= 0.95 && elapsed < Duration::from_secs(90);
    check(
        pass,
        format!(
            "mean={mean:.0} vs xi_s={xi:.0} (rel {:.2e}); crossing twice: {:.1}% ({:.1}s)",
            rel(mean, xi),
            crossing * 100.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn stationary_histograms() -> Verdict {
    let start = Instant::now();
    let grid = TimeGrid::span(300.0, 0.01).unwrap().with_stride(10).unwrap();
    let means: Vec<f64> = [0.0, 0.1, 0.2, 0.3, 0.4]
        .iter()
        .map(|&g| {
            let p = ModelParams::table(g, 1e-7, 1.0);
            let ens = simulate_ensemble(&p, N - 1.0, &grid, 200, 7000).unwrap();
            stationary_histogram(&ens, 0.5, 60).unwrap().mean()
        })
        .collect();
    let elapsed = start.elapsed();
    let decreasing = means.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing && elapsed < Duration::from_secs(180);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.0}")).collect();
    check(
        pass,
        format!("means [{}] ({:.1}s)", shown.join(", "), elapsed.as_secs_f64()),
    )
}

fn fractional_validation() -> Verdict {
    let start = Instant::now();
    let exact = mittag_leffler(0.7, -0.1).unwrap();
    let at = |h: f64| {
        let grid = TimeGrid::span(1.0, h).unwrap();
        *solve_scalar(|y| -0.1 * y, 1.0, 0.7, &grid).unwrap().last().unwrap()
    };
    let fine = rel(at(1e-3), exact);
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| (at(h) - exact).abs()).collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let e1 = mittag_leffler(1.0, -1.0).unwrap();
    let elapsed = start.elapsed();
    let pass = fine < 1e-3
        && orders.iter().all(|&o| o >= 1.0)
        && (e1 - 0.367_879_4).abs() <= 1e-7
        && elapsed < Duration::from_secs(30);
    check(
        pass,
        format!(
            "rel err {fine:.1e} at h=1e-3; orders {:.2} {:.2}; E1(-1)={e1:.9}",
            orders[0], orders[1]
        ),
    )
}

fn fractional_ordering() -> Verdict {
    let start = Instant::now();
    let orders = [0.5, 0.6, 0.7, 0.8];
    let grid = TimeGrid::span(10.0, 0.01).unwrap();
    let at_ten: Vec<f64> = Execution::default()
        .try_map(orders.len(), |i| {
            let p = ModelParams::table(1.5, 0.0, orders[i]);
            integrate_caputo(&CaputoProblem::new(p, N - 1.0, grid)).map(|t| t.terminal())
        })
        .unwrap();

    // Band entry around xi_f = 2.5e5; the slowest order needs ~1e5 days,
    // so h = 1 and each run stops at entry.
    let xi = equilibrium_deterministic(&ModelParams::table(0.2, 0.0, 1.0)).unwrap();
    let long = TimeGrid::span(400_000.0, 1.0).unwrap();
    let entries: Vec<Option<f64>> = Execution::default()
        .try_map(orders.len(), |i| {
            let p = ModelParams::table(0.2, 0.0, orders[i]);
            integrate_caputo_until(&CaputoProblem::new(p, 1.0, long), |_, r| {
                (r - xi).abs() <= 0.01 * xi
            })
            .map(|t| band_entry_time(&t, xi, 0.01))
        })
        .unwrap();
    let elapsed = start.elapsed();
    let falling = at_ten.windows(2).all(|w| w[1] < w[0]);
    let earlier = entries.iter().all(Option::is_some)
        && entries.windows(2).all(|w| w[1] < w[0]);
    let pass = falling && earlier && elapsed < Duration::from_secs(60);
    let shown: Vec<String> = entries
        .iter()
        .map(|e| e.map_or("never".into(), |t| format!("{t:.0}")))
        .collect();
    check(
        pass,
        format!(
            "R(10) [{:.0}, {:.0}, {:.0}, {:.0}]; band entry days [{}] ({:.1}s)",
            at_ten[0],
            at_ten[1],
            at_ten[2],
            at_ten[3],
            shown.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn cross_engine() -> Verdict {
    let start = Instant::now();
    let p = ModelParams::table(0.0, 0.0, 1.0);
    let grid = TimeGrid::span(100.0, 1e-3).unwrap();
    let ode = integrate_ode(&p, 1.0, &grid).unwrap();
    let fde = integrate_caputo(&CaputoProblem::new(p, 1.0, grid)).unwrap();
    let worst_fde = ode
        .values
        .iter()
        .zip(&fde.values)
        .map(|(a, b)| rel(*b, *a))
        .fold(0.0, f64::max);

    let grid = TimeGrid::span(100.0, 0.01).unwrap();
    let euler = integrate_euler(&p, 1.0, &grid).unwrap();
    let em = simulate_path(&p, 1.0, &grid, &NoisePlan::new(3)).unwrap();
    let worst_em = euler
        .values
        .iter()
        .zip(&em.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = worst_fde <= 1e-4 && worst_em <= 1e-12 * N && elapsed < Duration::from_secs(10);
    check(
        pass,
        format!(
            "alpha=1 vs RK4 max rel {worst_fde:.1e}; sigma=0 EM vs Euler max abs {worst_em:.1e} ({:.1}s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("thresholds", thresholds),
        ("equilibria", equilibria),
        ("deterministic extinction", deterministic_extinction),
        ("deterministic persistence", deterministic_persistence),
        ("sde invariance and extinction", sde_extinction),
        ("sde persistence and crossings", sde_persistence),
        ("stationary histograms", stationary_histograms),
        ("fractional validation", fractional_validation),
        ("fractional order ordering", fractional_ordering),
        ("cross-engine consistency", cross_engine),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "criterion {:>2} {:<30} {}  {}",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
