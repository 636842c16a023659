//! A closed loop of two edges keeps its vehicle count to rounding error.

use lwrnet::sim::harness::ring_network;
use lwrnet::sim::Simulation;

fn main() -> lwrnet::Result<()> {
    let mut sim = Simulation::new(ring_network(0.02, 0.005)?, true)?;
    let start = sim.total_area();
    println!("{:>6} {:>18} {:>12}", "step", "vehicles", "rel. drift");
    for step in 1..=400 {
        sim.step(0.01)?;
        if step % 50 == 0 {
            let a = sim.total_area();
            println!("{step:>6} {a:>18.15} {:>12.2e}", (a - start) / start);
        }
    }
    let s = sim.stats();
    println!(
        "merges {}, kink {}, plateau {}, fail-safe {}",
        s.merges, s.kink, s.plateau, s.failsafe
    );
    Ok(())
}
