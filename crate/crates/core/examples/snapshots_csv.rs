//! Write snapshots as CSV and read them back.

use lwrnet::network::parse_network;
use lwrnet::sim::{read_snapshot_csv, run_simulation, write_snapshots, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = parse_network(
        "edge a L=1 vmax=1 umax=1 h=0.25 d=0.05 init=linear(0.2,0.5)\n\
         boundary edge=a end=left u=0.2\n\
         boundary edge=a end=right absorbing\n",
    )?;
    let cfg = SimConfig {
        dt: Some(0.1),
        t_final: 0.5,
        snapshot_every: Some(0.25),
        parallel: false,
    };
    let (snaps, _) = run_simulation(net, &cfg)?;
    let mut buf = Vec::new();
    write_snapshots(&snaps, &mut buf)?;
    let text = String::from_utf8(buf)?;
    print!("{text}");
    let rows = read_snapshot_csv(&text)?;
    let written: usize = snaps
        .iter()
        .map(|s| s.edges.iter().map(|e| e.particles.len()).sum::<usize>())
        .sum();
    println!("{} rows read back, {written} particles written", rows.len());
    Ok(())
}
