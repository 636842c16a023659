//! Synchronisation of the particle fields meeting at a node.
//!
//! Between synchronisations every edge evolves on its own. At a
//! synchronisation the fields are cut back to the node, the junction Riemann
//! problem is solved on the new boundary values, and the area that crossed
//! the node during the step is distributed so that the network total is
//! conserved. Edges whose node-side characteristic points into the node know
//! how much area left them; the others receive it through the junction
//! balance and have their near-node particles rebuilt by [`reconstruct_area`].
//!
//! Area bookkeeping at an edge end uses the orientation sign `sigma`: `+1`
//! at the upstream end (`x = 0`, edge leaves the node) and `-1` at the
//! downstream end (`x = L`, edge enters the node). `phi` is the area that
//! crossed the end during the step, counted in the direction of travel.

pub mod reconstruct;

pub use reconstruct::{reconstruct_area, Reconstruction, Step};

use crate::edge_field::{ParticleField, Side, Trim};
use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::node_riemann::{classify_edges, solve_node, Classification, NodeSpec, Orientation, Shape};

/// Rate at which `I_b - coeff * I_a` changes for two flux-linked edge ends
/// whose boundary flow terms cancel.
pub fn area_drift_rate(flux_a: &FluxFunction, u_a: f64, flux_b: &FluxFunction, u_b: f64, coeff: f64) -> f64 {
    u_b * flux_b.df(u_b) - coeff * u_a * flux_a.df(u_a)
}

pub fn side_of(o: Orientation) -> Side {
    match o {
        Orientation::Ingoing => Side::Right,
        Orientation::Outgoing => Side::Left,
    }
}

fn sigma(o: Orientation) -> f64 {
    match o {
        Orientation::Ingoing => -1.0,
        Orientation::Outgoing => 1.0,
    }
}

/// Area accounting for one edge end over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaLedger {
    pub orientation: Orientation,
    pub flux: FluxFunction,
    /// Node-side value installed at the previous synchronisation.
    pub u_ext: f64,
    /// Credit booked by the advance since then.
    pub credit: f64,
    pub trim: Trim,
    pub class: Classification,
}

impl AreaLedger {
    fn sigma(&self) -> f64 {
        sigma(self.orientation)
    }

    /// Area that left the edge side of the cut, signed towards the edge.
    fn cut(&self) -> f64 {
        -self.sigma() * self.trim.outside_area()
    }

    /// Area flux through the end implied by the particles themselves; exact
    /// when the end is not affected.
    pub fn measured_flux(&self, dt: f64) -> f64 {
        self.cut() - self.flux.characteristic_flux(self.u_ext) * dt + self.sigma() * self.credit
    }

    /// First-order estimate from the node state of the previous step.
    pub fn fallback_flux(&self, dt: f64) -> f64 {
        self.flux.f(self.u_ext) * dt
    }

    /// Area the near-node particles must gain so that the edge carries
    /// `phi` through this end.
    pub fn area_change(&self, phi: f64, dt: f64) -> f64 {
        let s = self.sigma();
        s * (phi + self.flux.characteristic_flux(self.u_ext) * dt - s * self.credit - self.cut())
    }

    pub fn known(&self) -> bool {
        self.class != Classification::Affected
    }
}

/// Area flux through every end of a node (ingoing ends first), balanced so
/// that what enters equals what leaves.
///
/// `known[i]` holds the measured flux of unaffected ends, `fallback[i]` a
/// first-order estimate used when the junction leaves an end undetermined.
pub fn propagate_virtual_areas(
    shape: Shape,
    a: &[Vec<f64>],
    c: &[f64],
    class: &[Classification],
    known: &[Option<f64>],
    fallback: &[f64],
) -> Vec<f64> {
    let pick = |ids: &[usize]| -> Option<usize> {
        ids.iter()
            .copied()
            .find(|&i| class[i] == Classification::Influencing && known[i].is_some())
            .or_else(|| ids.iter().copied().find(|&i| known[i].is_some()))
    };
    match shape {
        Shape::OneToOne => {
            let phi = pick(&[0, 1]).and_then(|i| known[i]).unwrap_or(fallback[0]);
            vec![phi, phi]
        }
        Shape::OneToTwo => {
            let mut phi1 = None;
            if class[0] == Classification::Influencing {
                phi1 = known[0];
            }
            if phi1.is_none() {
                for j in [1, 2] {
                    if class[j] == Classification::Influencing && a[j - 1][0] > 0.0 {
                        phi1 = known[j].map(|p| p / a[j - 1][0]);
                        break;
                    }
                }
            }
            if phi1.is_none() {
                phi1 = known[0];
            }
            if phi1.is_none() {
                for j in [1, 2] {
                    if a[j - 1][0] > 0.0 && known[j].is_some() {
                        phi1 = known[j].map(|p| p / a[j - 1][0]);
                        break;
                    }
                }
            }
            let phi1 = phi1.unwrap_or(fallback[0]);
            let phi2 = a[0][0] * phi1;
            vec![phi1, phi2, phi1 - phi2]
        }
        Shape::TwoToOne => match (known[0], known[1]) {
            (Some(p1), Some(p2)) => vec![p1, p2, p1 + p2],
            (Some(p), None) | (None, Some(p)) => {
                let i = if known[0].is_some() { 0 } else { 1 };
                let other = match known[2] {
                    Some(p3) => p3 - p,
                    None => fallback[1 - i],
                };
                let mut out = vec![0.0; 3];
                out[i] = p;
                out[1 - i] = other;
                out[2] = p + other;
                out
            }
            (None, None) => {
                let p3 = known[2].unwrap_or(fallback[0] + fallback[1]);
                let (w1, w2) = if fallback[0] + fallback[1] > 0.0 {
                    (fallback[0], fallback[1])
                } else {
                    (c[0], c[1])
                };
                let p1 = p3 * (w1 / (w1 + w2));
                vec![p1, p3 - p1, p3]
            }
        },
    }
}

/// What a synchronisation did at one edge end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndReport {
    pub edge: usize,
    pub orientation: Orientation,
    pub phi: f64,
    pub area_change: f64,
    pub class: Classification,
    pub reconstruction: Reconstruction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub node: usize,
    pub gamma_in: Vec<f64>,
    pub gamma_out: Vec<f64>,
    pub ends: Vec<EndReport>,
}

fn open_end(field: &mut ParticleField, o: Orientation) -> (f64, f64, Trim) {
    let side = side_of(o);
    let u_ext = field.extremal(side).u;
    let credit = field.take_credit(side);
    let trim = field.boundary_trim(side);
    (u_ext, credit, trim)
}

fn ledger(field: &mut ParticleField, o: Orientation) -> AreaLedger {
    let flux = *field.flux();
    let (u_ext, credit, trim) = open_end(field, o);
    let class = classify_edges(&[flux], &[u_ext], &[u_ext], &[o])[0];
    AreaLedger {
        orientation: o,
        flux,
        u_ext,
        credit,
        trim,
        class,
    }
}

fn close_end(
    field: &mut ParticleField,
    ledger: &AreaLedger,
    u_hat: f64,
    phi: f64,
    master: bool,
    dt: f64,
) -> Result<(f64, Reconstruction)> {
    let side = side_of(ledger.orientation);
    field.insert_boundary_state(u_hat, side)?;
    let delta = if master { 0.0 } else { ledger.area_change(phi, dt) };
    let radius = dt * field.flux().v_max();
    let rec = reconstruct_area(field, side, delta, radius);
    Ok((delta, rec))
}

/// Synchronise the fields incident to `spec`. `fields` holds the ingoing
/// edges' fields followed by the outgoing ones, in the node's order; each
/// must have been advanced by `dt` since the previous synchronisation.
pub fn synchronize_node(spec: &NodeSpec, fields: &mut [&mut ParticleField], dt: f64) -> Result<SyncReport> {
    let n_in = spec.in_edges.len();
    if fields.len() != n_in + spec.out_edges.len() {
        return Err(Error::Internal(format!(
            "node {}: expected {} fields, got {}",
            spec.id,
            n_in + spec.out_edges.len(),
            fields.len()
        )));
    }
    let orient = |i: usize| {
        if i < n_in {
            Orientation::Ingoing
        } else {
            Orientation::Outgoing
        }
    };
    let ledgers: Vec<AreaLedger> = fields
        .iter_mut()
        .enumerate()
        .map(|(i, f)| ledger(f, orient(i)))
        .collect();

    let class: Vec<Classification> = ledgers.iter().map(|l| l.class).collect();
    let known: Vec<Option<f64>> = ledgers.iter().map(|l| l.known().then(|| l.measured_flux(dt))).collect();
    let fallback: Vec<f64> = ledgers.iter().map(|l| l.fallback_flux(dt)).collect();
    let phi = propagate_virtual_areas(spec.shape(), &spec.a, &spec.c, &class, &known, &fallback);

    let flux_in: Vec<FluxFunction> = ledgers[..n_in].iter().map(|l| l.flux).collect();
    let flux_out: Vec<FluxFunction> = ledgers[n_in..].iter().map(|l| l.flux).collect();
    let u_in: Vec<f64> = ledgers[..n_in].iter().map(|l| l.trim.value).collect();
    let u_out: Vec<f64> = ledgers[n_in..].iter().map(|l| l.trim.value).collect();
    let sol = solve_node(spec, &flux_in, &u_in, &flux_out, &u_out)?;

    let edges: Vec<usize> = spec.in_edges.iter().chain(&spec.out_edges).copied().collect();
    let mut ends = Vec::with_capacity(fields.len());
    for (i, field) in fields.iter_mut().enumerate() {
        let l = &ledgers[i];
        let master = known[i] == Some(phi[i]);
        let (delta, rec) = close_end(field, l, sol.new_states[i], phi[i], master, dt)?;
        ends.push(EndReport {
            edge: edges[i],
            orientation: l.orientation,
            phi: phi[i],
            area_change: delta,
            class: l.class,
            reconstruction: rec,
        });
    }
    Ok(SyncReport {
        node: spec.id,
        gamma_in: sol.gamma_in,
        gamma_out: sol.gamma_out,
        ends,
    })
}

/// Condition at an edge end that is not attached to a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExternalCondition {
    /// A constant density held beyond the end, coupled through a one-to-one
    /// node. `state` is the node-side value the virtual edge received at the
    /// previous synchronisation.
    Prescribed { u_bc: f64, state: f64 },
    /// Waves leave freely; the edge keeps whatever its particles carry.
    Absorbing,
}

impl ExternalCondition {
    pub fn prescribed(u_bc: f64) -> Self {
        ExternalCondition::Prescribed { u_bc, state: u_bc }
    }
}

/// Synchronise an edge end that sits on the network boundary. Returns the
/// area that crossed the end in the direction of travel.
pub fn synchronize_external(
    field: &mut ParticleField,
    side: Side,
    cond: &mut ExternalCondition,
    dt: f64,
) -> Result<EndReport> {
    let o = match side {
        Side::Left => Orientation::Outgoing,
        Side::Right => Orientation::Ingoing,
    };
    let l = ledger(field, o);
    match cond {
        ExternalCondition::Absorbing => {
            let phi = l.measured_flux(dt);
            let (delta, rec) = close_end(field, &l, l.trim.value, phi, true, dt)?;
            Ok(EndReport {
                edge: usize::MAX,
                orientation: o,
                phi,
                area_change: delta,
                class: l.class,
                reconstruction: rec,
            })
        }
        ExternalCondition::Prescribed { u_bc, state } => {
            let flux = l.flux;
            let u_bc = flux.check_density(*u_bc)?;
            let ghost_o = match o {
                Orientation::Outgoing => Orientation::Ingoing,
                Orientation::Ingoing => Orientation::Outgoing,
            };
            let ghost_class = classify_edges(&[flux], &[*state], &[*state], &[ghost_o])[0];
            let ghost_value = u_bc;
            let ghost_known = (ghost_class != Classification::Affected).then(|| flux.f(*state) * dt);
            let spec = NodeSpec {
                id: usize::MAX,
                in_edges: vec![0],
                out_edges: vec![1],
                a: vec![vec![1.0]],
                c: vec![1.0],
            };
            let edge_known = l.known().then(|| l.measured_flux(dt));
            let (class, known, values) = match o {
                Orientation::Outgoing => (
                    [ghost_class, l.class],
                    [ghost_known, edge_known],
                    [ghost_value, l.trim.value],
                ),
                Orientation::Ingoing => (
                    [l.class, ghost_class],
                    [edge_known, ghost_known],
                    [l.trim.value, ghost_value],
                ),
            };
            let fallback = [l.fallback_flux(dt), l.fallback_flux(dt)];
            let phi = propagate_virtual_areas(Shape::OneToOne, &spec.a, &spec.c, &class, &known, &fallback)[0];
            let sol = solve_node(&spec, &[flux], &[values[0]], &[flux], &[values[1]])?;
            let (u_hat, ghost_hat) = match o {
                Orientation::Outgoing => (sol.new_states[1], sol.new_states[0]),
                Orientation::Ingoing => (sol.new_states[0], sol.new_states[1]),
            };
            *state = ghost_hat;
            let master = edge_known == Some(phi);
            let (delta, rec) = close_end(field, &l, u_hat, phi, master, dt)?;
            Ok(EndReport {
                edge: usize::MAX,
                orientation: o,
                phi,
                area_change: delta,
                class: l.class,
                reconstruction: rec,
            })
        }
    }
}
