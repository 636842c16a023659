//! Seven-edge diamond network at three resolutions; shocks stay put.

use lwrnet::sim::harness::{diamond_run, shock_mismatch};

fn main() -> lwrnet::Result<()> {
    let mut runs = Vec::new();
    for s in [1.0, 5.0, 20.0] {
        let run = diamond_run(s, true)?;
        let particles: usize = run.fields.iter().map(|f| f.len()).sum();
        println!(
            "s={s:>4}: {particles} particles, {} steps, fail-safe {}",
            run.stats.steps, run.stats.failsafe
        );
        for (i, shocks) in run.shocks.iter().enumerate() {
            for sh in shocks {
                println!("   e{} shock at {:.4} (jump {:.3})", i + 1, sh.x, sh.jump);
            }
        }
        runs.push(run);
    }
    match shock_mismatch(&runs[0].shocks, &runs[1].shocks) {
        Some(m) => println!("largest shock offset between s=1 and s=5: {m:.4}"),
        None => println!("s=1 and s=5 disagree on which edges carry shocks"),
    }
    Ok(())
}
