//! Time loop over a whole network.

pub mod harness;
mod norms;
mod output;

pub use norms::error_norms;
pub use output::{read_snapshot_csv, write_rows, write_snapshot, write_snapshots, CsvRow, CSV_HEADER};

use rayon::prelude::*;

use crate::area_sync::{synchronize_node, EndReport, ExternalCondition, Step};
use crate::edge_field::{Particle, ParticleField};
use crate::error::{Result, ValidationError};
use crate::network::{apply_external_boundary, Network};
use crate::node_riemann::Orientation;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Synchronisation interval; defaults to `0.8 * max_sync_dt`.
    pub dt: Option<f64>,
    pub t_final: f64,
    /// Snapshot spacing in time; only the initial and final states when `None`.
    pub snapshot_every: Option<f64>,
    /// Advance edges on the rayon pool.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_final: 1.0,
            snapshot_every: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSnapshot {
    pub id: String,
    pub particles: Vec<Particle>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub edges: Vec<EdgeSnapshot>,
    pub inflow: f64,
    pub outflow: f64,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub merges: usize,
    pub kink: usize,
    pub plateau: usize,
    pub failsafe: usize,
    pub degenerate: usize,
    /// Fail-safe values that left `[0, u_max]`.
    pub out_of_range: usize,
    /// Area that entered through external boundaries.
    pub inflow: f64,
    /// Area that left through external boundaries.
    pub outflow: f64,
}

impl RunStats {
    fn record(&mut self, r: &EndReport) {
        match r.reconstruction.step {
            Step::Unchanged => {}
            Step::Kink { .. } => self.kink += 1,
            Step::Plateau { .. } => self.plateau += 1,
            Step::FailSafe { .. } => self.failsafe += 1,
            Step::Degenerate => self.degenerate += 1,
        }
        if r.reconstruction.out_of_range.is_some() {
            self.out_of_range += 1;
        }
    }
}

pub struct Simulation {
    net: Network,
    fields: Vec<ParticleField>,
    external: Vec<ExternalCondition>,
    t: f64,
    initial_area: f64,
    parallel: bool,
    stats: RunStats,
}

fn pick_mut<'a>(fields: &'a mut [ParticleField], idx: &[usize]) -> Vec<&'a mut ParticleField> {
    let mut slots: Vec<Option<&'a mut ParticleField>> = fields.iter_mut().map(Some).collect();
    idx.iter()
        .map(|&i| slots[i].take().expect("edge listed twice at one node"))
        .collect()
}

impl Simulation {
    /// Sample the initial data and run the initial synchronisation.
    pub fn new(net: Network, parallel: bool) -> Result<Self> {
        let fields = net.initial_fields()?;
        let external = net.boundaries.iter().map(|b| b.condition()).collect();
        let mut sim = Self {
            net,
            fields,
            external,
            t: 0.0,
            initial_area: 0.0,
            parallel,
            stats: RunStats::default(),
        };
        sim.synchronize(0.0)?;
        sim.initial_area = sim.total_area();
        sim.stats = RunStats::default();
        Ok(sim)
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn fields(&self) -> &[ParticleField] {
        &self.fields
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn total_area(&self) -> f64 {
        self.fields.iter().map(ParticleField::total_area).sum()
    }

    /// Change in total area not explained by boundary inflow and outflow.
    pub fn audit_residual(&self) -> f64 {
        self.total_area() - self.initial_area - (self.stats.inflow - self.stats.outflow)
    }

    pub fn initial_area(&self) -> f64 {
        self.initial_area
    }

    fn synchronize(&mut self, dt: f64) -> Result<()> {
        for node in &self.net.nodes {
            let idx: Vec<usize> = node.in_edges.iter().chain(&node.out_edges).copied().collect();
            let mut fs = pick_mut(&mut self.fields, &idx);
            let report = synchronize_node(node, &mut fs, dt)?;
            for e in &report.ends {
                self.stats.record(e);
            }
        }
        for (b, cond) in self.net.boundaries.iter().zip(&mut self.external) {
            let r = apply_external_boundary(&mut self.fields[b.edge], b.side, cond, dt)?;
            self.stats.record(&r);
            match r.orientation {
                Orientation::Outgoing => self.stats.inflow += r.phi,
                Orientation::Ingoing => self.stats.outflow += r.phi,
            }
        }
        Ok(())
    }

    /// Advance every edge by `dt` and synchronise.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt <= self.net.max_sync_dt() * (1.0 + 1e-12)) {
            return Err(ValidationError::BadParameter(format!(
                "time step {dt} outside (0, {}]",
                self.net.max_sync_dt()
            ))
            .into());
        }
        let merges: usize = if self.parallel {
            self.fields
                .par_iter_mut()
                .map(|f| f.advance(dt).map(|s| s.merges))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum()
        } else {
            self.fields
                .iter_mut()
                .map(|f| f.advance(dt).map(|s| s.merges))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum()
        };
        self.stats.merges += merges;
        self.synchronize(dt)?;
        self.stats.steps += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            edges: self
                .net
                .edges
                .iter()
                .zip(&self.fields)
                .map(|(e, f)| EdgeSnapshot {
                    id: e.id.clone(),
                    particles: f.particles().to_vec(),
                    area: f.total_area(),
                })
                .collect(),
            inflow: self.stats.inflow,
            outflow: self.stats.outflow,
        }
    }

    /// Step to `t_final`, shortening steps to land on snapshot times and on
    /// `t_final`. `on_snapshot` sees the initial state, each snapshot time,
    /// and the final state.
    pub fn run(&mut self, cfg: &SimConfig, mut on_snapshot: impl FnMut(&Snapshot)) -> Result<()> {
        let dt = cfg.dt.unwrap_or(0.8 * self.net.max_sync_dt());
        if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
            return Err(ValidationError::BadParameter(format!("final time {} must be >= 0", cfg.t_final)).into());
        }
        if let Some(every) = cfg.snapshot_every {
            if every.is_nan() || every <= 0.0 {
                return Err(ValidationError::BadParameter(format!("snapshot interval {every} must be > 0")).into());
            }
        }
        if !(dt > 0.0 && dt <= self.net.max_sync_dt() * (1.0 + 1e-12)) {
            return Err(ValidationError::BadParameter(format!(
                "time step {dt} outside (0, {}]",
                self.net.max_sync_dt()
            ))
            .into());
        }
        on_snapshot(&self.snapshot());
        let t0 = self.t;
        let mut k = 1usize;
        while self.t < cfg.t_final {
            let stop = match cfg.snapshot_every {
                Some(every) => (t0 + k as f64 * every).min(cfg.t_final),
                None => cfg.t_final,
            };
            let remaining = stop - self.t;
            let snapped = remaining <= dt * (1.0 + 1e-9);
            let h = if snapped { remaining } else { dt };
            self.step(h)?;
            self.t = if snapped { stop } else { self.t + dt };
            if snapped {
                on_snapshot(&self.snapshot());
                k += 1;
            }
        }
        Ok(())
    }
}

/// Run `net` to `cfg.t_final`, collecting every snapshot.
pub fn run_simulation(net: Network, cfg: &SimConfig) -> Result<(Vec<Snapshot>, RunStats)> {
    let mut sim = Simulation::new(net, cfg.parallel)?;
    let mut snaps = Vec::new();
    sim.run(cfg, |s| snaps.push(s.clone()))?;
    Ok((snaps, sim.stats().clone()))
}
