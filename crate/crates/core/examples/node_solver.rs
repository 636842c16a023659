//! Flow rates and new boundary states at the three junction shapes.

use lwrnet::node_riemann::{solve_node, NodeSpec};
use lwrnet::FluxFunction;

fn report(title: &str, spec: &NodeSpec, u_in: &[f64], u_out: &[f64]) -> lwrnet::Result<()> {
    let road = FluxFunction::new(1.0, 1.0)?;
    let fin = vec![road; u_in.len()];
    let fout = vec![road; u_out.len()];
    let sol = solve_node(spec, &fin, u_in, &fout, u_out)?;
    println!("{title}");
    println!("  in  {u_in:?} -> flows {:?}", sol.gamma_in);
    println!("  out {u_out:?} -> flows {:?}", sol.gamma_out);
    println!("  new states {:?}", sol.new_states);
    println!("  classes {:?}", sol.classification);
    Ok(())
}

fn main() -> lwrnet::Result<()> {
    let straight = NodeSpec::new(1, vec![0], vec![1], None, None)?;
    report("one-to-one, congested downstream", &straight, &[0.3], &[0.9])?;

    let split = NodeSpec::new(2, vec![0], vec![1, 2], Some(vec![vec![0.7], vec![0.3]]), None)?;
    report("bifurcation 70/30, one exit jammed", &split, &[0.5], &[0.2, 0.95])?;

    let merge = NodeSpec::new(3, vec![0, 1], vec![2], None, Some(vec![2.0, 1.0]))?;
    report("confluence with priority 2:1", &merge, &[0.45, 0.5], &[0.6])?;
    Ok(())
}
