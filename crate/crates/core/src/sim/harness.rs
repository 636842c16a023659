//! Canned test problems and studies built on [`Simulation`].

use crate::edge_field::ParticleField;
use crate::error::Result;
use crate::network::{parse_network, Network};
use crate::sim::{error_norms, SimConfig, Simulation};

/// Two edges with different flux functions meeting at a one-to-one node.
pub fn bottleneck_text(h: f64, d: f64) -> String {
    format!(
        "edge e1 L=1 vmax=1 umax=2 h={h} d={d} init=linear(1,-1)\n\
         edge e2 L=1 vmax=1.5 umax=1 h={h} d={d} init=linear(0,0.8)\n\
         node in=e1 out=e2 A=1\n\
         boundary edge=e1 end=left u=1\n\
         boundary edge=e2 end=right u=0.8\n"
    )
}

pub fn bottleneck_network(h: f64, d: f64) -> Result<Network> {
    parse_network(&bottleneck_text(h, d))
}

pub const BOTTLENECK_T_FINAL: f64 = 3.0;

/// Seven unit edges through two bifurcations and two confluences; `scale`
/// multiplies the particle spacing and shock distance.
pub fn diamond_text(scale: f64) -> String {
    let (h, d) = (0.02 * scale, 0.005 * scale);
    let mut s = String::new();
    for i in 1..=7 {
        s += &format!("edge e{i} L=1 vmax=1 umax=1 h={h} d={d} init=cosine(0.4,0.4,3)\n");
    }
    s += "node in=e1 out=e2,e3 A=0.5;0.5\n\
          node in=e2 out=e4,e5 A=0.5;0.5\n\
          node in=e3,e4 out=e6 A=1,1 c=1,1\n\
          node in=e5,e6 out=e7 A=1,1 c=1,1\n\
          boundary edge=e1 end=left u=0.8\n\
          boundary edge=e7 end=right absorbing\n";
    s
}

pub fn diamond_network(scale: f64) -> Result<Network> {
    parse_network(&diamond_text(scale))
}

/// Synchronisation interval used with [`diamond_network`].
pub fn diamond_dt(scale: f64) -> f64 {
    0.01 * scale
}

pub const DIAMOND_T_FINAL: f64 = 2.0;

/// Two edges joined head to tail by two nodes: a closed loop.
pub fn ring_text(h: f64, d: f64) -> String {
    format!(
        "edge a L=1 vmax=1 umax=1 h={h} d={d} init=cosine(0.4,0.4,3)\n\
         edge b L=1 vmax=1 umax=1 h={h} d={d} init=cosine(0.5,0.3,2)\n\
         node in=a out=b A=1\n\
         node in=b out=a A=1\n"
    )
}

pub fn ring_network(h: f64, d: f64) -> Result<Network> {
    parse_network(&ring_text(h, d))
}

/// Run a network to `t_final` and return the final fields.
pub fn final_fields(
    net: Network,
    dt: f64,
    t_final: f64,
    parallel: bool,
) -> Result<(Vec<ParticleField>, crate::sim::RunStats)> {
    let mut sim = Simulation::new(net, parallel)?;
    let cfg = SimConfig {
        dt: Some(dt),
        t_final,
        snapshot_every: None,
        parallel,
    };
    sim.run(&cfg, |_| {})?;
    Ok((sim.fields().to_vec(), sim.stats().clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub k: u32,
    pub dt: f64,
    pub linf: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub order_linf: Option<f64>,
    pub order_l2: Option<f64>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_dt(k: u32) -> f64 {
    2f64.powf(-(k as f64) / 2.0)
}

/// Bottleneck runs at `dt = 2^(-k/2)` compared with a run at `k_ref` on the
/// outgoing edge over `[0, 0.3]`.
pub fn convergence_study(h: f64, d: f64, ks: &[u32], k_ref: u32, parallel: bool) -> Result<ConvergenceStudy> {
    let net = bottleneck_network(h, d)?;
    let run = |k: u32| -> Result<ParticleField> {
        let (fields, _) = final_fields(net.clone(), convergence_dt(k), BOTTLENECK_T_FINAL, parallel)?;
        Ok(fields[1].clone())
    };
    let reference = run(k_ref)?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let f = run(k)?;
        let (linf, l2) = error_norms(&f, &reference, 0.0, 0.3)?;
        rows.push(ConvergenceRow {
            k,
            dt: convergence_dt(k),
            linf,
            l2,
        });
    }
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r.linf).collect();
    let l2: Vec<f64> = rows.iter().map(|r| r.l2).collect();
    Ok(ConvergenceStudy {
        order_linf: fitted_order(&dts, &linf),
        order_l2: fitted_order(&dts, &l2),
        rows,
    })
}

/// A shock found in a particle field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shock {
    pub x: f64,
    /// Density rise across the shock.
    pub jump: f64,
}

/// Locate shocks as runs of adjacent segments that rise in density over a
/// width of at most `max_width` each, keeping runs whose total rise is at
/// least `min_jump`. The position is the rise-weighted centre of the run.
pub fn extract_shocks(field: &ParticleField, max_width: f64, min_jump: f64) -> Vec<Shock> {
    let ps = field.particles();
    let mut out = Vec::new();
    let mut run: Option<(f64, f64)> = None; // (sum of jump * centre, sum of jump)
    let mut flush = |run: &mut Option<(f64, f64)>| {
        if let Some((m, j)) = run.take() {
            if j >= min_jump {
                out.push(Shock { x: m / j, jump: j });
            }
        }
    };
    for w in ps.windows(2) {
        let (dx, du) = (w[1].x - w[0].x, w[1].u - w[0].u);
        if du > 0.0 && dx <= max_width {
            let c = 0.5 * (w[0].x + w[1].x);
            let r = run.get_or_insert((0.0, 0.0));
            r.0 += du * c;
            r.1 += du;
        } else {
            flush(&mut run);
        }
    }
    flush(&mut run);
    out
}

/// One diamond run with the shocks found on each edge at the final time.
#[derive(Debug, Clone)]
pub struct DiamondRun {
    pub scale: f64,
    pub stats: crate::sim::RunStats,
    pub fields: Vec<ParticleField>,
    pub shocks: Vec<Vec<Shock>>,
}

/// Shocks narrower than twice the shock distance with a rise of at least 0.1.
pub fn diamond_shocks(fields: &[ParticleField]) -> Vec<Vec<Shock>> {
    fields
        .iter()
        .map(|f| extract_shocks(f, 2.0 * f.shock_distance() * (1.0 + 1e-9), 0.1))
        .collect()
}

pub fn diamond_run(scale: f64, parallel: bool) -> Result<DiamondRun> {
    let (fields, stats) = final_fields(diamond_network(scale)?, diamond_dt(scale), DIAMOND_T_FINAL, parallel)?;
    Ok(DiamondRun {
        scale,
        shocks: diamond_shocks(&fields),
        stats,
        fields,
    })
}

/// Largest distance from a shock in one set to the nearest shock on the same
/// edge in the other set, in both directions. `None` when some shock has no
/// partner at all.
pub fn shock_mismatch(a: &[Vec<Shock>], b: &[Vec<Shock>]) -> Option<f64> {
    fn one_way(a: &[Vec<Shock>], b: &[Vec<Shock>]) -> Option<f64> {
        let mut worst = 0.0f64;
        for (sa, sb) in a.iter().zip(b) {
            for s in sa {
                let d = sb.iter().map(|t| (t.x - s.x).abs()).fold(f64::INFINITY, f64::min);
                if !d.is_finite() {
                    return None;
                }
                worst = worst.max(d);
            }
        }
        Some(worst)
    }
    if a.len() != b.len() {
        return None;
    }
    Some(one_way(a, b)?.max(one_way(b, a)?))
}
