//! Quick oracle checks of the library, each against something computed
//! independently of the code under test.

use amrtriad::fde::solve_scalar;
use amrtriad::ode::integrate_euler;
use amrtriad::sde::NoisePlan;
use amrtriad::{
    CaputoProblem, ModelParams, TimeGrid, compute_thresholds, equilibrium_deterministic,
    equilibrium_stochastic, integrate_caputo, integrate_ode, mittag_leffler, simulate_path,
};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn thresholds() -> Check {
    let r = compute_thresholds(&ModelParams::table(0.0, 1e-7, 0.7)).unwrap();
    let g2 = compute_thresholds(&ModelParams::table(2.0, 1e-7, 0.7)).unwrap();
    // beta N / (gamma + mu) and the noise correction sigma^2 N^2 / (2(gamma + mu))
    let pass = rel(r.k0_d, 5.0) < 1e-15
        && rel(r.k0_s, 4.95) < 1e-14
        && r.k0_f == r.k0_d
        && rel(g2.k0_d, 0.5 / 2.1) < 1e-15;
    Check {
        name: "thresholds",
        pass,
        detail: format!("K0d={} K0s={} gamma=2 K0d={}", r.k0_d, r.k0_s, g2.k0_d),
    }
}

fn equilibria() -> Check {
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let xi_d = equilibrium_deterministic(&p).unwrap();
    let root_d = bisect(|r| p.drift(r), 1.0, p.population - 1.0);
    let xi_s = equilibrium_stochastic(&p).unwrap();
    let root_s = bisect(|r| p.lyapunov_sv(r).unwrap(), 1.0, p.population - 1.0);
    let (ed, es) = (rel(xi_d, root_d), rel(xi_s, root_s));
    Check {
        name: "equilibria",
        pass: ed < 1e-10 && es < 1e-10,
        detail: format!("xi_d={xi_d:.4} (bisection {ed:.1e}) xi_s={xi_s:.4} (bisection {es:.1e})"),
    }
}

fn logistic_limit() -> Check {
    // without saturation the drift is logistic and has a closed-form solution
    let mut p = ModelParams::table(0.2, 0.0, 1.0);
    p.saturation = 0.0;
    let r = p.conjugation * p.population - p.removal_rate();
    let k = r / p.conjugation;
    let r0 = 10.0;
    let grid = TimeGrid::span(60.0, 0.01).unwrap();
    let traj = integrate_ode(&p, r0, &grid).unwrap();
    let worst = traj
        .points()
        .map(|(t, y)| rel(y, k / (1.0 + (k / r0 - 1.0) * (-r * t).exp())))
        .fold(0.0, f64::max);
    Check {
        name: "rk4 vs logistic solution",
        pass: worst < 1e-8,
        detail: format!("max rel err {worst:.1e}"),
    }
}

fn mittag_leffler_values() -> Check {
    let cases = [
        (0.7, -0.1, 0.897_561_126_931_387),
        (0.7, -5.0, 0.077_569_357_764_769_8),
        (0.7, -30.0, 0.011_444_251_527_527),
        // e^{x^2} erfc(x)
        (0.5, -2.0, 0.255_395_676_310_506),
        (0.5, -10.0, 0.056_140_992_743_822_6),
        (1.0, -1.0, 0.367_879_441_171_442),
    ];
    let worst = cases
        .iter()
        .map(|&(a, z, want)| (mittag_leffler(a, z).unwrap() - want).abs())
        .fold(0.0, f64::max);
    Check {
        name: "mittag-leffler reference values",
        pass: worst < 1e-12,
        detail: format!("max abs err {worst:.1e}"),
    }
}

fn caputo_linear() -> Check {
    // D^a y = -y, y(0) = 1 has solution E_a(-t^a)
    let alpha = 0.7;
    let grid = TimeGrid::span(2.0, 1e-3).unwrap();
    let y = solve_scalar(|y| -y, 1.0, alpha, &grid).unwrap();
    let want = mittag_leffler(alpha, -(2.0f64).powf(alpha)).unwrap();
    let err = rel(*y.last().unwrap(), want);
    Check {
        name: "caputo linear problem",
        pass: err < 1e-3,
        detail: format!("y(2)={:.8} vs {want:.8}", y.last().unwrap()),
    }
}

fn order_one_reductions() -> Check {
    let p = ModelParams::table(0.2, 0.0, 1.0);
    let grid = TimeGrid::span(20.0, 0.01).unwrap();
    let rk4 = integrate_ode(&p, 1000.0, &grid).unwrap();
    let fde = integrate_caputo(&CaputoProblem::new(p, 1000.0, grid)).unwrap();
    let worst = rk4
        .values
        .iter()
        .zip(&fde.values)
        .map(|(a, b)| rel(*b, *a))
        .fold(0.0, f64::max);
    let euler = integrate_euler(&p, 1000.0, &grid).unwrap();
    let em = simulate_path(&p, 1000.0, &grid, &NoisePlan::new(7)).unwrap();
    let same = euler.values == em.values;
    Check {
        name: "alpha=1 and sigma=0 reductions",
        pass: worst < 1e-3 && same,
        detail: format!("fde vs rk4 max rel {worst:.1e}; em == euler {same}"),
    }
}

fn seeded_paths() -> Check {
    let p = ModelParams::table(0.0, 1e-7, 1.0);
    let grid = TimeGrid::span(5.0, 0.01).unwrap();
    let a = simulate_path(&p, 1.0, &grid, &NoisePlan::new(3)).unwrap();
    let b = simulate_path(&p, 1.0, &grid, &NoisePlan::new(3)).unwrap();
    let c = simulate_path(&p, 1.0, &grid, &NoisePlan::new(4)).unwrap();
    let pass = a.values == b.values && a.values != c.values;
    Check {
        name: "seeded reproducibility",
        pass,
        detail: format!("same seed equal, next seed differs: {pass}"),
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        thresholds(),
        equilibria(),
        logistic_limit(),
        mittag_leffler_values(),
        caputo_linear(),
        order_one_reductions(),
        seeded_paths(),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
