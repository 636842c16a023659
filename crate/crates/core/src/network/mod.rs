//! Network description: edges, junctions, external boundaries.

mod parse;

pub use parse::{parse_network, serialize_network};

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::area_sync::{synchronize_external, EndReport, ExternalCondition};
use crate::edge_field::{ParticleField, Side};
use crate::error::{Result, ValidationError};
use crate::flux::FluxFunction;
use crate::node_riemann::NodeSpec;

/// Initial density along an edge, as a function of `x` in `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `a + b x`
    Linear(f64, f64),
    /// `a + b cos(k pi x)`
    Cosine(f64, f64, f64),
    /// Values at equally spaced points from `0` to `L`, joined linearly.
    Samples(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match self {
            Profile::Constant(a) => *a,
            Profile::Linear(a, b) => a + b * x,
            Profile::Cosine(a, b, k) => a + b * (k * PI * x).cos(),
            Profile::Samples(v) => {
                if v.len() == 1 {
                    return v[0];
                }
                let t = (x / length).clamp(0.0, 1.0) * (v.len() - 1) as f64;
                let i = (t.floor() as usize).min(v.len() - 2);
                let s = t - i as f64;
                v[i] + s * (v[i + 1] - v[i])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub length: f64,
    pub flux: FluxFunction,
    pub init: Profile,
    pub h: f64,
    pub d: f64,
}

impl EdgeSpec {
    pub fn field(&self) -> Result<ParticleField> {
        ParticleField::sample_initial(
            |x| self.init.eval(x, self.length),
            self.length,
            self.h,
            self.flux,
            self.d,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Prescribed(f64),
    Absorbing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    /// Index into [`Network::edges`].
    pub edge: usize,
    pub side: Side,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub edges: Vec<EdgeSpec>,
    pub nodes: Vec<NodeSpec>,
    pub boundaries: Vec<BoundarySpec>,
}

impl Network {
    /// Check the whole network; the fields are public so hand-built networks
    /// should pass through here.
    pub fn validate(self) -> Result<Self, ValidationError> {
        let mut seen = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if seen.insert(e.id.as_str(), i).is_some() {
                return Err(ValidationError::DuplicateEdge(e.id.clone()));
            }
            let bad = |message: String| ValidationError::BadEdge {
                edge: e.id.clone(),
                message,
            };
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(bad(format!("length {} must be positive", e.length)));
            }
            if !(e.d > 0.0 && e.d <= e.h && e.h < e.length) {
                return Err(bad(format!(
                    "need 0 < d <= h < L, got d={} h={} L={}",
                    e.d, e.h, e.length
                )));
            }
            let n = (e.length / e.h).ceil() as usize;
            for i in 0..=n {
                let x = (i as f64 * e.h).min(e.length);
                let u = e.init.eval(x, e.length);
                if e.flux.check_density(u).is_err() {
                    return Err(bad(format!(
                        "initial density {u} at x={x} outside [0, {}]",
                        e.flux.u_max()
                    )));
                }
            }
        }
        let mut starts = vec![0usize; self.edges.len()];
        let mut ends = vec![0usize; self.edges.len()];
        for node in &self.nodes {
            if let Some(i) = node.in_edges.iter().find(|i| node.out_edges.contains(i)) {
                return Err(ValidationError::BadNode {
                    node: node.id,
                    message: format!(
                        "edge `{}` enters and leaves the same node",
                        self.edges.get(*i).map_or("?", |e| e.id.as_str())
                    ),
                });
            }
            for &i in &node.in_edges {
                *ends
                    .get_mut(i)
                    .ok_or_else(|| ValidationError::UnknownEdge(format!("#{i}")))? += 1;
            }
            for &i in &node.out_edges {
                *starts
                    .get_mut(i)
                    .ok_or_else(|| ValidationError::UnknownEdge(format!("#{i}")))? += 1;
            }
        }
        for b in &self.boundaries {
            let e = self
                .edges
                .get(b.edge)
                .ok_or_else(|| ValidationError::UnknownEdge(format!("#{}", b.edge)))?;
            if let BoundaryKind::Prescribed(u) = b.kind {
                if e.flux.check_density(u).is_err() {
                    return Err(ValidationError::BadEdge {
                        edge: e.id.clone(),
                        message: format!("boundary density {u} outside [0, {}]", e.flux.u_max()),
                    });
                }
            }
            match b.side {
                Side::Left => starts[b.edge] += 1,
                Side::Right => ends[b.edge] += 1,
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            for (count, end) in [(starts[i], "left"), (ends[i], "right")] {
                if count != 1 {
                    return Err(ValidationError::Attachment {
                        edge: e.id.clone(),
                        end,
                        count,
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Longest synchronisation interval for which no characteristic crosses
    /// the middle of any edge.
    pub fn max_sync_dt(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| 0.5 * e.length / e.flux.v_max())
            .fold(f64::INFINITY, f64::min)
    }

    /// Set every edge's particle spacing and shock distance.
    pub fn with_resolution(mut self, h: Option<f64>, d: Option<f64>) -> Result<Self, ValidationError> {
        for e in &mut self.edges {
            if let Some(h) = h {
                e.h = h;
            }
            if let Some(d) = d {
                e.d = d;
            }
        }
        self.validate()
    }

    pub fn initial_fields(&self) -> Result<Vec<ParticleField>> {
        self.edges.iter().map(EdgeSpec::field).collect()
    }
}

/// Synchronise an edge end on the network boundary after the field was
/// advanced by `dt`.
pub fn apply_external_boundary(
    field: &mut ParticleField,
    side: Side,
    cond: &mut ExternalCondition,
    dt: f64,
) -> Result<EndReport> {
    synchronize_external(field, side, cond, dt)
}

impl BoundarySpec {
    pub fn condition(&self) -> ExternalCondition {
        match self.kind {
            BoundaryKind::Prescribed(u) => ExternalCondition::prescribed(u),
            BoundaryKind::Absorbing => ExternalCondition::Absorbing,
        }
    }
}
