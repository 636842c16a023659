//! Particles on one edge: a rarefaction, a compression that turns into a
//! shock, and the merges that keep the area exact.

use lwrnet::sim::harness::extract_shocks;
use lwrnet::{FluxFunction, Particle, ParticleField};

fn show(label: &str, field: &ParticleField) {
    println!("{label}: {} particles, area {:.12}", field.len(), field.total_area());
    for p in field.particles() {
        println!("  x={:+.5} u={:.5}", p.x, p.u);
    }
}

fn main() -> lwrnet::Result<()> {
    let flux = FluxFunction::new(1.0, 1.0)?;

    let mut fan = ParticleField::new(vec![Particle::new(0.0, 0.8), Particle::new(0.0, 0.2)], flux, 1.0, 0.05)?;
    fan.advance(1.0)?;
    show("rarefaction after t=1", &fan);
    println!("  u(0.3) = {:.5}", fan.interpolant_value(0.3)?);

    let ramp = |x: f64| 0.2 + 0.6 * ((x - 0.4) / 0.2).clamp(0.0, 1.0);
    let mut wave = ParticleField::sample_initial(ramp, 1.0, 0.05, flux, 0.01)?;
    let before = wave.total_area();
    let (u_first, u_last) = (wave.particles()[0].u, wave.particles()[wave.len() - 1].u);
    println!("first collision at t={:?}", wave.first_collision_time());
    let tau = 0.3;
    let stats = wave.advance(tau)?;
    show("compression after t=0.3", &wave);
    let credits = stats.credit_left + stats.credit_right;
    // the hull ends drift, exchanging area at the characteristic flux
    let drift = tau * (flux.characteristic_flux(u_last) - flux.characteristic_flux(u_first));
    println!(
        "merges {}, area balance residual {:.2e}",
        stats.merges,
        wave.total_area() - credits - drift - before
    );
    for s in extract_shocks(&wave, 0.04, 0.1) {
        println!("shock near x={:.4} with jump {:.4}", s.x, s.jump);
    }
    Ok(())
}
