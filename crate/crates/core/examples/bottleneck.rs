//! Two lanes merging into one faster lane: congestion builds upstream.
//!
//! cargo run --release --example bottleneck -- [out.csv]

use std::fs::File;
use std::io::BufWriter;

use lwrnet::sim::harness::{bottleneck_network, BOTTLENECK_T_FINAL};
use lwrnet::sim::{run_simulation, write_snapshots, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig {
        dt: Some(0.05),
        t_final: BOTTLENECK_T_FINAL,
        snapshot_every: Some(1.0),
        parallel: true,
    };
    let (snaps, stats) = run_simulation(bottleneck_network(8e-2, 2e-2)?, &cfg)?;
    for s in &snaps {
        println!("t={:.2}", s.t);
        for e in &s.edges {
            let values: Vec<String> = e.particles.iter().map(|p| format!("{:.2}", p.u)).collect();
            println!("  {} area={:.5} u=[{}]", e.id, e.area, values.join(" "));
        }
    }
    println!(
        "inflow {:.6} outflow {:.6} fail-safe {}",
        stats.inflow, stats.outflow, stats.failsafe
    );
    if let Some(path) = std::env::args().nth(1) {
        write_snapshots(&snaps, &mut BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
