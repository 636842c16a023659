//! Order of accuracy in the synchronisation interval on the bottleneck problem.
//!
//! cargo run --release --example convergence_study -- [h] [d] [kmax] [kref]

use lwrnet::sim::harness::convergence_study;

fn main() -> lwrnet::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let h = args.first().copied().unwrap_or(8e-4);
    let d = args.get(1).copied().unwrap_or(2e-4);
    let kmax = args.get(2).copied().unwrap_or(12.0) as u32;
    let kref = args.get(3).copied().unwrap_or(16.0) as u32;
    let ks: Vec<u32> = (4..=kmax).collect();
    let study = convergence_study(h, d, &ks, kref, true)?;
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "dt", "Linf", "L2");
    for r in &study.rows {
        println!("{:>3} {:>12.4e} {:>12.4e} {:>12.4e}", r.k, r.dt, r.linf, r.l2);
    }
    if let (Some(a), Some(b)) = (study.order_linf, study.order_l2) {
        println!("fitted order: Linf {a:.3}, L2 {b:.3}");
    }
    Ok(())
}
