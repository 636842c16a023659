//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria listed in `KNOWN_GAPS` are reported but do not fail the run; any
//! other failure exits non-zero.

use std::io::Write;
use std::process::ExitCode;

use lwrnet::node_riemann::{solve_node, NodeSpec, Orientation};
use lwrnet::sim::harness::*;
use lwrnet::sim::{run_simulation, write_snapshots, SimConfig, Simulation};
use lwrnet::{FluxFunction, Particle, ParticleField};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const KNOWN_GAPS: &[u32] = &[1, 7];

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- oracles

fn f(v: f64, um: f64, u: f64) -> f64 {
    v * u * (1.0 - u / um)
}

fn df(v: f64, um: f64, u: f64) -> f64 {
    v * (1.0 - 2.0 * u / um)
}

fn demand(v: f64, um: f64, u: f64) -> f64 {
    f(v, um, u.min(0.5 * um))
}

fn supply(v: f64, um: f64, u: f64) -> f64 {
    f(v, um, u.max(0.5 * um))
}

fn bisect(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (g(m) > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Godunov scheme for a concave flux with transmissive ends.
fn godunov(v: f64, um: f64, u0: impl Fn(f64) -> f64, x0: f64, x1: f64, cells: usize, t: f64) -> Vec<f64> {
    let dx = (x1 - x0) / cells as f64;
    let mut u: Vec<f64> = (0..cells).map(|i| u0(x0 + (i as f64 + 0.5) * dx)).collect();
    let dt_max = 0.4 * dx / v;
    let mut time = 0.0;
    while time < t {
        let dt = dt_max.min(t - time);
        let flux: Vec<f64> = (0..=cells)
            .map(|i| {
                let ul = u[i.saturating_sub(1)];
                let ur = u[i.min(cells - 1)];
                demand(v, um, ul).min(supply(v, um, ur))
            })
            .collect();
        for i in 0..cells {
            u[i] -= dt / dx * (flux[i + 1] - flux[i]);
        }
        time += dt;
    }
    u
}

/// Whether the wave between `inner` and `node` moves away from the node.
fn fan_leaves_node(v: f64, um: f64, inner: f64, node: f64, o: Orientation) -> bool {
    if (inner - node).abs() < 1e-12 {
        return true;
    }
    let (ul, ur) = match o {
        Orientation::Ingoing => (inner, node),
        Orientation::Outgoing => (node, inner),
    };
    let tol = 1e-9;
    let (slow, fast) = if ul < ur {
        let s = (f(v, um, ur) - f(v, um, ul)) / (ur - ul);
        (s, s)
    } else {
        (df(v, um, ul), df(v, um, ur))
    };
    match o {
        Orientation::Ingoing => fast.max(slow) <= tol,
        Orientation::Outgoing => fast.min(slow) >= -tol,
    }
}

// ---------------------------------------------------------------- criteria

fn convergence() -> Outcome {
    let ks: Vec<u32> = (4..=12).collect();
    let study = convergence_study(8e-4, 2e-4, &ks, 16, true).expect("convergence study");
    let slope = study.order_l2.unwrap_or(f64::NAN);
    outcome(
        (1.7..=2.3).contains(&slope),
        format!(
            "L2 slope {slope:.3}, Linf slope {:.3}",
            study.order_linf.unwrap_or(f64::NAN)
        ),
    )
}

fn conservation() -> Outcome {
    let mut sim = Simulation::new(ring_network(0.02, 0.005).unwrap(), false).unwrap();
    let a0 = sim.total_area();
    for _ in 0..250 {
        sim.step(0.01).unwrap();
    }
    let ring = ((sim.total_area() - a0) / a0).abs();

    let mut sim = Simulation::new(bottleneck_network(8e-3, 2e-3).unwrap(), false).unwrap();
    let cfg = SimConfig {
        dt: Some(0.05),
        t_final: BOTTLENECK_T_FINAL,
        snapshot_every: None,
        parallel: false,
    };
    sim.run(&cfg, |_| {}).unwrap();
    let audit = (sim.audit_residual() / sim.initial_area()).abs();
    outcome(
        ring < 1e-10 && audit < 1e-10,
        format!("ring drift {ring:.2e} over 250 steps, bottleneck audit {audit:.2e}"),
    )
}

fn single_edge() -> Outcome {
    let flux = FluxFunction::new(1.0, 1.0).unwrap();
    let u0 = |x: f64| 0.2 + 0.3 * (std::f64::consts::FRAC_PI_2 * x).sin().powi(2);
    // characteristics x + (1 - 2 u0(x)) t first cross at 1 / max(2 u0')
    let max_slope = (0..=10_000)
        .map(|i| {
            let x = i as f64 / 10_000.0;
            0.3 * std::f64::consts::FRAC_PI_2 * (std::f64::consts::PI * x).sin()
        })
        .fold(0.0, f64::max);
    let tau = 0.9 / (2.0 * max_slope);
    let exact = |x: f64| {
        let foot = bisect(-1.0, 2.0, |xi| xi + df(1.0, 1.0, u0(xi.clamp(0.0, 1.0))) * tau - x);
        u0(foot)
    };
    let mut image_err = 0.0f64;
    let mut linf = Vec::new();
    let hs = [0.04, 0.02, 0.01, 0.005];
    for &h in &hs {
        let start = ParticleField::sample_initial(u0, 1.0, h, flux, h / 4.0).unwrap();
        let mut field = start.clone();
        field.advance(tau).unwrap();
        assert_eq!(field.len(), start.len());
        for (p, q) in start.particles().iter().zip(field.particles()) {
            let x = p.x + df(1.0, 1.0, p.u) * tau;
            image_err = image_err.max((x - q.x).abs()).max((p.u - q.u).abs());
        }
        let (a, b) = (field.particles()[0].x, field.particles()[field.len() - 1].x);
        let err = (0..=4000)
            .map(|i| {
                let x = a + (b - a) * i as f64 / 4000.0;
                (field.interpolant_value(x).unwrap() - exact(x)).abs()
            })
            .fold(0.0, f64::max);
        linf.push(err);
    }
    let order = fitted_order(&hs, &linf).unwrap();
    outcome(
        image_err < 1e-12 && order >= 1.9,
        format!("particle image error {image_err:.1e}, interpolation Linf order {order:.3}"),
    )
}

fn shock() -> Outcome {
    let flux = FluxFunction::new(1.0, 1.0).unwrap();
    let d = 1e-3;
    let h = 0.01;
    let mut ps = Vec::new();
    for i in 0..=100 {
        ps.push(Particle::new(i as f64 * h, 0.2));
    }
    for i in 0..=100 {
        ps.push(Particle::new(1.0 + i as f64 * h, 0.8));
    }
    let mut field = ParticleField::new(ps, flux, 2.0, d).unwrap();
    field.advance(1.0).unwrap();
    let shocks = extract_shocks(&field, 2.0 * d * (1.0 + 1e-9), 0.3);
    // equal flow on both sides: the exact shock stays at x = 1
    let pos_err = shocks.first().map_or(f64::INFINITY, |s| (s.x - 1.0).abs());

    let (x0, x1, cells) = (0.0, 2.0, 4000);
    let reference = godunov(1.0, 1.0, |x| if x < 1.0 { 0.2 } else { 0.8 }, x0, x1, cells, 1.0);
    let dx = (x1 - x0) / cells as f64;
    // compare where neither solution feels the ends of the domain
    let (a, b) = (0.7, 1.3);
    let l1: f64 = (0..cells)
        .map(|i| x0 + (i as f64 + 0.5) * dx)
        .zip(&reference)
        .filter(|(x, _)| *x > a && *x < b)
        .map(|(x, r)| (field.interpolant_value(x).unwrap() - r).abs() * dx)
        .sum();
    outcome(
        pos_err <= 2.0 * d + 0.01 && l1 <= 5e-2,
        format!("shock position error {pos_err:.2e}, L1 vs Godunov {l1:.2e}"),
    )
}

fn node_solver() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let step = 1e-3;
    let mut worst = 0.0f64;
    let mut balance = 0.0f64;
    let mut bad_fans = 0usize;
    for (n, m) in [(1usize, 1usize), (1, 2), (2, 1)] {
        for _ in 0..1000 {
            let vs: Vec<f64> = (0..n + m).map(|_| rng.gen_range(0.5..1.5)).collect();
            let ums: Vec<f64> = (0..n + m).map(|_| rng.gen_range(0.5..1.5)).collect();
            let us: Vec<f64> = ums.iter().map(|&um| rng.gen_range(0.0..=um)).collect();
            let a = if m == 2 {
                let p = rng.gen_range(0.05..0.95);
                Some(vec![vec![p], vec![1.0 - p]])
            } else {
                None
            };
            let c = (n == 2).then(|| vec![rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)]);
            let spec = NodeSpec::new(1, (0..n).collect(), (n..n + m).collect(), a, c).unwrap();
            let fl: Vec<FluxFunction> = vs
                .iter()
                .zip(&ums)
                .map(|(&v, &um)| FluxFunction::new(v, um).unwrap())
                .collect();
            let sol = solve_node(&spec, &fl[..n], &us[..n], &fl[n..], &us[n..]).unwrap();

            let dem: Vec<f64> = (0..n).map(|i| demand(vs[i], ums[i], us[i])).collect();
            let sup: Vec<f64> = (n..n + m).map(|j| supply(vs[j], ums[j], us[j])).collect();
            let expected: Vec<f64> = match (n, m) {
                (1, _) => {
                    let fits = |g: f64| spec.a.iter().zip(&sup).all(|(row, &s)| row[0] * g <= s);
                    let mut best = 0.0;
                    let mut g = 0.0;
                    while g <= dem[0] {
                        if fits(g) {
                            best = g;
                        }
                        g += step;
                    }
                    vec![best]
                }
                _ => {
                    let mut cand: Vec<(f64, f64)> = Vec::new();
                    let mut g1 = 0.0;
                    while g1 <= dem[0] {
                        let mut g2 = 0.0;
                        while g2 <= dem[1] {
                            if g1 + g2 <= sup[0] {
                                cand.push((g1, g2));
                            }
                            g2 += step;
                        }
                        g1 += step;
                    }
                    let top = cand.iter().map(|p| p.0 + p.1).fold(0.0, f64::max);
                    let (c1, c2) = (spec.c[0], spec.c[1]);
                    let norm = c1.hypot(c2);
                    // among maximisers, the point nearest the priority ray
                    cand.iter()
                        .filter(|p| p.0 + p.1 >= top - 1e-12)
                        .map(|&(a, b)| (a, b, (a * c2 - b * c1).abs() / norm))
                        .min_by(|x, y| x.2.total_cmp(&y.2))
                        .map(|(a, b, _)| vec![a, b])
                        .unwrap()
                }
            };
            for (g, e) in sol.gamma_in.iter().zip(&expected) {
                worst = worst.max((g - e).abs());
            }
            for (row, go) in spec.a.iter().zip(&sol.gamma_out) {
                let lhs: f64 = row.iter().zip(&sol.gamma_in).map(|(a, g)| a * g).sum();
                balance = balance.max((lhs - go).abs());
            }
            for i in 0..n + m {
                let o = if i < n {
                    Orientation::Ingoing
                } else {
                    Orientation::Outgoing
                };
                if !fan_leaves_node(vs[i], ums[i], us[i], sol.new_states[i], o) {
                    bad_fans += 1;
                }
            }
        }
    }
    outcome(
        worst <= 2e-3 && balance <= 1e-12 && bad_fans == 0,
        format!(
            "max deviation from grid search {worst:.2e}, A*gamma residual {balance:.1e}, fans into node {bad_fans}"
        ),
    )
}

fn chord_average() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut worst_quad = 0.0f64;
    for _ in 0..10_000 {
        let v = rng.gen_range(0.1..3.0);
        let um = rng.gen_range(0.1..3.0);
        let flux = FluxFunction::new(v, um).unwrap();
        let (a, b) = (rng.gen_range(0.0..=um), rng.gen_range(0.0..=um));
        let got = flux.chord_average(a, b).unwrap();
        worst = worst.max((got - 0.5 * (a + b)).abs());
        // similarity interpolant: f'(U(s)) varies linearly in s on [0, 1]
        let (sa, sb) = (df(v, um, a), df(v, um, b));
        let quad = if (sb - sa).abs() < 1e-14 {
            a
        } else {
            let n = 64;
            let mut acc = 0.0;
            for i in 0..=n {
                let s = i as f64 / n as f64;
                let speed = sa + s * (sb - sa);
                let u = um * (1.0 - speed / v) / 2.0;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * u;
            }
            acc / (3.0 * n as f64)
        };
        // closed form through the characteristic flux u f'(u) - f(u)
        let g = |u: f64| u * df(v, um, u) - f(v, um, u);
        let closed = if (sb - sa).abs() < 1e-14 {
            a
        } else {
            (g(b) - g(a)) / (sb - sa)
        };
        worst_quad = worst_quad
            .max((got - quad).abs())
            .max((got - closed).abs() / um.max(1.0));
    }
    outcome(
        worst < 1e-12 && worst_quad < 1e-9,
        format!("max |chord - mean| {worst:.1e}, max deviation from quadrature {worst_quad:.1e}"),
    )
}

fn diamond() -> Outcome {
    let runs: Vec<DiamondRun> = [1.0, 5.0, 20.0]
        .iter()
        .map(|&s| diamond_run(s, true).unwrap())
        .collect();
    let failsafe: Vec<usize> = runs.iter().map(|r| r.stats.failsafe).collect();
    let mismatch = shock_mismatch(&runs[0].shocks, &runs[1].shocks);
    let shocks: usize = runs[0].shocks.iter().map(Vec::len).sum();
    outcome(
        failsafe.iter().all(|&n| n == 0) && shocks > 0 && mismatch.is_some_and(|m| m <= 0.05),
        format!(
            "fail-safe activations at s=1,5,20: {failsafe:?}; {shocks} shocks at s=1, s=1 vs s=5 mismatch {}",
            mismatch.map_or("unmatched".into(), |m| format!("{m:.4}"))
        ),
    )
}

fn csv_bytes(net: lwrnet::network::Network, dt: f64, t_final: f64, every: f64, parallel: bool) -> Vec<u8> {
    let cfg = SimConfig {
        dt: Some(dt),
        t_final,
        snapshot_every: Some(every),
        parallel,
    };
    let (snaps, _) = run_simulation(net, &cfg).unwrap();
    let mut file = tempfile::tempfile().unwrap();
    write_snapshots(&snaps, &mut file).unwrap();
    use std::io::{Read, Seek};
    file.rewind().unwrap();
    let mut out = Vec::new();
    file.read_to_end(&mut out).unwrap();
    out
}

fn determinism() -> Outcome {
    let mut cases = vec![(
        "bottleneck k=12".to_string(),
        bottleneck_network(8e-4, 2e-4).unwrap(),
        convergence_dt(12),
        BOTTLENECK_T_FINAL,
        0.5,
    )];
    for s in [1.0, 5.0, 20.0] {
        cases.push((
            format!("diamond s={s}"),
            diamond_network(s).unwrap(),
            diamond_dt(s),
            DIAMOND_T_FINAL,
            0.5,
        ));
    }
    let mut differing = Vec::new();
    for (name, net, dt, t, every) in cases {
        let serial = csv_bytes(net.clone(), dt, t, every, false);
        let parallel = csv_bytes(net.clone(), dt, t, every, true);
        let again = csv_bytes(net, dt, t, every, false);
        if serial != parallel || serial != again {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "serial, parallel and repeated runs byte-identical".into()
        } else {
            format!("output differs for {differing:?}")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "convergence order in dt", convergence),
        (2, "exact conservation", conservation),
        (3, "single-edge characteristics oracle", single_edge),
        (4, "shock oracle", shock),
        (5, "node solver vs grid search", node_solver),
        (6, "chord-average identity", chord_average),
        (7, "diamond robustness", diamond),
        (8, "determinism and schedule independence", determinism),
    ];
    let mut unexpected = 0;
    let stdout = std::io::stdout();
    for (id, name, check) in criteria {
        let r = check();
        let mut line = format!(
            "{} criterion {id}: {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        if !r.pass {
            if KNOWN_GAPS.contains(&id) {
                line += " (known gap)";
            } else {
                unexpected += 1;
            }
        }
        writeln!(stdout.lock(), "{line}").unwrap();
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
