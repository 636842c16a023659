//! Flux, wave speed, demand and supply for one road type.

use lwrnet::{Branch, FluxFunction};

fn main() -> lwrnet::Result<()> {
    let road = FluxFunction::new(1.5, 1.0)?;
    println!(
        "v_max={} u_max={} critical density={} capacity={}",
        road.v_max(),
        road.u_max(),
        road.critical_density(),
        road.max_flow()
    );
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "u", "flow", "speed", "demand", "supply"
    );
    for i in 0..=10 {
        let u = i as f64 / 10.0;
        println!(
            "{u:>6.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            road.flow(u)?,
            road.wave_speed(u)?,
            road.demand(u)?,
            road.supply(u)?
        );
    }
    let q = 0.3;
    println!(
        "flow {q}: free-flow density {:.6}, congested density {:.6}",
        road.inverse_flow(q, Branch::Free)?,
        road.inverse_flow(q, Branch::Congested)?
    );
    println!("chord average of 0.2 and 0.8: {}", road.chord_average(0.2, 0.8)?);
    Ok(())
}
