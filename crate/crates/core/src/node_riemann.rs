//! Junction Riemann solver.
//!
//! Given the demands of the ingoing edges and the supplies of the outgoing
//! edges, pick the flow rates that maximise total throughput subject to the
//! destination matrix, then translate those rates back into boundary states.

use crate::error::{Error, Result, ValidationError};
use crate::flux::{Branch, FluxFunction};

/// Tolerance for the column sums of the destination matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    OneToOne,
    OneToTwo,
    TwoToOne,
}

/// Which way an edge is attached to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// The node sits at the edge's downstream end.
    Ingoing,
    /// The node sits at the edge's upstream end.
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Information travels from the edge into the node.
    Influencing,
    /// A wave leaves the node into the edge.
    Affected,
    /// The wave at the node is stationary.
    Neutral,
}

/// A junction: incident edges (as indices into the network's edge list),
/// the destination matrix `a` (`m` rows, `n` columns) and the merging vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: usize,
    pub in_edges: Vec<usize>,
    pub out_edges: Vec<usize>,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl NodeSpec {
    pub fn new(
        id: usize,
        in_edges: Vec<usize>,
        out_edges: Vec<usize>,
        a: Option<Vec<Vec<f64>>>,
        c: Option<Vec<f64>>,
    ) -> Result<Self, ValidationError> {
        let (n, m) = (in_edges.len(), out_edges.len());
        let shape_ok = matches!((n, m), (1, 1) | (1, 2) | (2, 1));
        if !shape_ok {
            return Err(ValidationError::UnsupportedShape {
                node: id,
                n_in: n,
                n_out: m,
            });
        }
        let a = match a {
            Some(a) => a,
            None if m == 1 => vec![vec![1.0; n]],
            None => {
                return Err(ValidationError::BadNode {
                    node: id,
                    message: "a bifurcation needs a destination matrix".into(),
                })
            }
        };
        if a.len() != m || a.iter().any(|row| row.len() != n) {
            return Err(ValidationError::BadNode {
                node: id,
                message: format!("destination matrix must be {m}x{n}"),
            });
        }
        for row in &a {
            for &x in row {
                if !(0.0..=1.0).contains(&x) {
                    return Err(ValidationError::BadNode {
                        node: id,
                        message: format!("destination fraction {x} outside [0, 1]"),
                    });
                }
            }
        }
        for col in 0..n {
            let sum: f64 = a.iter().map(|row| row[col]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(ValidationError::NonStochasticColumn {
                    node: id,
                    column: col,
                    sum,
                });
            }
        }
        let c = c.unwrap_or_else(|| vec![1.0; n]);
        if c.len() != n || c.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(ValidationError::BadNode {
                node: id,
                message: format!("merging vector must have {n} positive entries"),
            });
        }
        Ok(Self {
            id,
            in_edges,
            out_edges,
            a,
            c,
        })
    }

    pub fn shape(&self) -> Shape {
        match (self.in_edges.len(), self.out_edges.len()) {
            (1, 1) => Shape::OneToOne,
            (1, 2) => Shape::OneToTwo,
            _ => Shape::TwoToOne,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeFluxSolution {
    pub gamma_in: Vec<f64>,
    pub gamma_out: Vec<f64>,
    /// New boundary states, ingoing edges first.
    pub new_states: Vec<f64>,
    /// Classification, ingoing edges first.
    pub classification: Vec<Classification>,
}

fn check_nonneg(what: &'static str, xs: &[f64]) -> Result<()> {
    for &x in xs {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::Domain {
                what,
                value: x,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
    }
    Ok(())
}

/// Throughput-maximising flow rates through a node.
pub fn solve_node_fluxes(spec: &NodeSpec, demands: &[f64], supplies: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if demands.len() != spec.in_edges.len() || supplies.len() != spec.out_edges.len() {
        return Err(Error::Internal(format!(
            "node {}: got {} demands and {} supplies for a {}-to-{} node",
            spec.id,
            demands.len(),
            supplies.len(),
            spec.in_edges.len(),
            spec.out_edges.len()
        )));
    }
    check_nonneg("demand", demands)?;
    check_nonneg("supply", supplies)?;

    match spec.shape() {
        Shape::OneToOne => {
            let g = demands[0].min(supplies[0]);
            Ok((vec![g], vec![g]))
        }
        Shape::OneToTwo => {
            let mut g = demands[0];
            for (row, &s) in spec.a.iter().zip(supplies) {
                if row[0] > 0.0 {
                    g = g.min(s / row[0]);
                }
            }
            let out = spec.a.iter().map(|row| row[0] * g).collect();
            Ok((vec![g], out))
        }
        Shape::TwoToOne => {
            let (d1, d2, s) = (demands[0], demands[1], supplies[0]);
            let gin = if d1 + d2 <= s {
                vec![d1, d2]
            } else {
                let (c1, c2) = (spec.c[0], spec.c[1]);
                let beta = s / (c1 + c2);
                let (g1, g2) = (beta * c1, beta * c2);
                if g1 > d1 {
                    vec![d1, s - d1]
                } else if g2 > d2 {
                    vec![s - d2, d2]
                } else {
                    vec![g1, s - g1]
                }
            };
            let gout = vec![gin[0] + gin[1]];
            Ok((gin, gout))
        }
    }
}

fn flux_equal(flux: &FluxFunction, gamma: f64, u: f64) -> bool {
    (gamma - flux.f(u)).abs() <= 1e-12 * flux.max_flow()
}

/// Boundary states realising the flow rates `gamma`.
pub fn riemann_new_states(
    fluxes: &[FluxFunction],
    u_old: &[f64],
    gamma: &[f64],
    orientation: &[Orientation],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(fluxes.len());
    for (((flux, &u), &g), &o) in fluxes.iter().zip(u_old).zip(gamma).zip(orientation) {
        let u = flux.check_density(u)?;
        if g > flux.max_flow() * (1.0 + 1e-12) {
            return Err(Error::Internal(format!(
                "flow rate {g} exceeds the maximum flow {}",
                flux.max_flow()
            )));
        }
        if flux_equal(flux, g, u) {
            out.push(u);
            continue;
        }
        let branch = match o {
            Orientation::Ingoing => Branch::Congested,
            Orientation::Outgoing => Branch::Free,
        };
        out.push(flux.inverse_flow(g, branch)?);
    }
    Ok(out)
}

/// Speed of the wave that separates `u_old` (inside the edge) from `u_hat`
/// (at the node), taken on the side nearest the node.
fn wave_speed_at_node(flux: &FluxFunction, u_old: f64, u_hat: f64, o: Orientation) -> f64 {
    if u_hat == u_old {
        return flux.df(u_old);
    }
    // the interior state lies on the left for ingoing edges
    let (ul, ur) = match o {
        Orientation::Ingoing => (u_old, u_hat),
        Orientation::Outgoing => (u_hat, u_old),
    };
    if ul < ur {
        // shock (concave flux)
        (flux.f(ur) - flux.f(ul)) / (ur - ul)
    } else {
        // rarefaction fan; the node-side edge of the fan moves with df(u_hat)
        flux.df(u_hat)
    }
}

pub fn classify_edges(
    fluxes: &[FluxFunction],
    u_old: &[f64],
    u_hat: &[f64],
    orientation: &[Orientation],
) -> Vec<Classification> {
    fluxes
        .iter()
        .zip(u_old)
        .zip(u_hat)
        .zip(orientation)
        .map(|(((flux, &u), &uh), &o)| {
            let s = wave_speed_at_node(flux, u, uh, o);
            if s.abs() <= 1e-12 * flux.v_max() {
                return Classification::Neutral;
            }
            let into_node = match o {
                Orientation::Ingoing => s > 0.0,
                Orientation::Outgoing => s < 0.0,
            };
            if uh == u && into_node {
                Classification::Influencing
            } else {
                Classification::Affected
            }
        })
        .collect()
}

/// Full node solve: demands and supplies from the boundary values, optimal
/// flow rates, new states and classification.
pub fn solve_node(
    spec: &NodeSpec,
    flux_in: &[FluxFunction],
    u_in: &[f64],
    flux_out: &[FluxFunction],
    u_out: &[f64],
) -> Result<NodeFluxSolution> {
    let demands = flux_in
        .iter()
        .zip(u_in)
        .map(|(f, &u)| f.demand(u))
        .collect::<Result<Vec<_>>>()?;
    let supplies = flux_out
        .iter()
        .zip(u_out)
        .map(|(f, &u)| f.supply(u))
        .collect::<Result<Vec<_>>>()?;
    let (gamma_in, gamma_out) = solve_node_fluxes(spec, &demands, &supplies)?;

    let fluxes: Vec<FluxFunction> = flux_in.iter().chain(flux_out).copied().collect();
    let u_old: Vec<f64> = u_in.iter().chain(u_out).copied().collect();
    let gamma: Vec<f64> = gamma_in.iter().chain(&gamma_out).copied().collect();
    let orientation: Vec<Orientation> = std::iter::repeat_n(Orientation::Ingoing, u_in.len())
        .chain(std::iter::repeat_n(Orientation::Outgoing, u_out.len()))
        .collect();
    let new_states = riemann_new_states(&fluxes, &u_old, &gamma, &orientation)?;
    let classification = classify_edges(&fluxes, &u_old, &new_states, &orientation);
    Ok(NodeFluxSolution {
        gamma_in,
        gamma_out,
        new_states,
        classification,
    })
}
