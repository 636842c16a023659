//! Read a network document, inspect it, and write it back in canonical form.

use lwrnet::network::{parse_network, serialize_network};

const DOC: &str = "\
# a bifurcation feeding two exits
edge main L=2 vmax=1 umax=1 h=0.05 d=0.01 init=constant(0.3)
edge left L=1 vmax=1 umax=1 h=0.05 d=0.01 init=linear(0.1,0.2)
edge right L=1 vmax=0.8 umax=1.2 h=0.05 d=0.01 init=cosine(0.4,0.1,2)
node in=main out=left,right A=0.25;0.75
boundary edge=main end=left u=0.3
boundary edge=left end=right absorbing
boundary edge=right end=right u=0.9
";

fn main() -> lwrnet::Result<()> {
    let net = parse_network(DOC)?;
    for e in &net.edges {
        println!("{}: L={} v={} u_max={}", e.id, e.length, e.flux.v_max(), e.flux.u_max());
    }
    println!("largest synchronisation interval {}", net.max_sync_dt());
    let text = serialize_network(&net);
    print!("{text}");
    assert_eq!(parse_network(&text)?, net);

    let broken = DOC.replace("A=0.25;0.75", "A=0.25;0.70");
    match parse_network(&broken) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
