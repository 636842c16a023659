use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lwrnet::network::parse_network;
use lwrnet::sim::harness::{convergence_study, diamond_run, shock_mismatch};
use lwrnet::sim::{write_rows, write_snapshot, RunStats, SimConfig, Simulation, CSV_HEADER};
use lwrnet::Error;

#[derive(Parser)]
#[command(
    name = "lwrnet",
    version,
    about = "Particle simulation of traffic flow on road networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network file and write snapshots as CSV.
    Run(RunArgs),
    /// Time-step convergence study on the two-edge bottleneck.
    Converge(ConvergeArgs),
    /// Diamond network at several resolutions.
    Diamond(DiamondArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tfinal: f64,
    /// Particle spacing for every edge.
    #[arg(long)]
    h: Option<f64>,
    /// Shock distance for every edge.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    snapshot_every: Option<f64>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if the fail-safe reconstruction was used.
    #[arg(long)]
    strict_tvd: bool,
    /// Advance edges on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 8e-4)]
    h: f64,
    #[arg(long, default_value_t = 2e-4)]
    d: f64,
    #[arg(long, default_value_t = 4)]
    kmin: u32,
    #[arg(long, default_value_t = 12)]
    kmax: u32,
    #[arg(long, default_value_t = 16)]
    kref: u32,
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct DiamondArgs {
    /// Resolution factors applied to h, d and the time step.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 20.0])]
    scale: Vec<f64>,
    /// Directory for one final-state CSV per scale.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict_tvd: bool,
    #[arg(long)]
    serial: bool,
}

enum Failure {
    Error(Error),
    FailSafe(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(Error::Io(e.to_string()))
    }
}

fn summary(stats: &RunStats) -> String {
    format!(
        "steps={} merges={} kink={} plateau={} failsafe={} out_of_range={} inflow={:.6} outflow={:.6}",
        stats.steps,
        stats.merges,
        stats.kink,
        stats.plateau,
        stats.failsafe,
        stats.out_of_range,
        stats.inflow,
        stats.outflow
    )
}

fn strict(on: bool, failsafe: usize) -> Result<(), Failure> {
    if on && failsafe > 0 {
        Err(Failure::FailSafe(failsafe))
    } else {
        Ok(())
    }
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.network).map_err(|e| Error::Io(format!("{}: {e}", a.network.display())))?;
    let net = parse_network(&text)?.with_resolution(a.h, a.d).map_err(Error::from)?;
    let cfg = SimConfig {
        dt: a.dt,
        t_final: a.tfinal,
        snapshot_every: a.snapshot_every,
        parallel: !a.serial,
    };
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut sim = Simulation::new(net, cfg.parallel)?;
    writeln!(out, "{CSV_HEADER}")?;
    let mut written = Ok(());
    sim.run(&cfg, |snap| {
        if written.is_ok() {
            written = write_rows(snap, &mut out);
        }
    })?;
    written?;
    out.flush()?;
    eprintln!("{} audit_residual={:.3e}", summary(sim.stats()), sim.audit_residual());
    strict(a.strict_tvd, sim.stats().failsafe)
}

fn converge(a: ConvergeArgs) -> Result<(), Failure> {
    let ks: Vec<u32> = (a.kmin..=a.kmax).collect();
    let study = convergence_study(a.h, a.d, &ks, a.kref, !a.serial)?;
    println!("k,dt,linf,l2");
    for r in &study.rows {
        println!("{},{:.6e},{:.6e},{:.6e}", r.k, r.dt, r.linf, r.l2);
    }
    let fmt = |o: Option<f64>| o.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    eprintln!("order linf={} l2={}", fmt(study.order_linf), fmt(study.order_l2));
    Ok(())
}

fn diamond(a: DiamondArgs) -> Result<(), Failure> {
    let mut runs = Vec::new();
    let mut failsafe = 0;
    for &s in &a.scale {
        let run = diamond_run(s, !a.serial)?;
        println!("scale {s}: {}", summary(&run.stats));
        for (i, shocks) in run.shocks.iter().enumerate() {
            let xs: Vec<String> = shocks.iter().map(|s| format!("{:.4}(+{:.3})", s.x, s.jump)).collect();
            println!("  e{} shocks: {}", i + 1, xs.join(" "));
        }
        if let Some(dir) = &a.out {
            let snap = lwrnet::sim::Snapshot {
                t: lwrnet::sim::harness::DIAMOND_T_FINAL,
                edges: run
                    .fields
                    .iter()
                    .enumerate()
                    .map(|(i, f)| lwrnet::sim::EdgeSnapshot {
                        id: format!("e{}", i + 1),
                        particles: f.particles().to_vec(),
                        area: f.total_area(),
                    })
                    .collect(),
                inflow: run.stats.inflow,
                outflow: run.stats.outflow,
            };
            let mut w = BufWriter::new(File::create(dir.join(format!("diamond_s{s}.csv")))?);
            write_snapshot(&snap, &mut w)?;
            w.flush()?;
        }
        failsafe += run.stats.failsafe;
        runs.push(run);
    }
    for w in runs.windows(2) {
        match shock_mismatch(&w[0].shocks, &w[1].shocks) {
            Some(m) => println!("shock mismatch s={} vs s={}: {m:.4}", w[0].scale, w[1].scale),
            None => println!("shock mismatch s={} vs s={}: unmatched shocks", w[0].scale, w[1].scale),
        }
    }
    strict(a.strict_tvd, failsafe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Run(a) => run(a),
        Command::Converge(a) => converge(a),
        Command::Diamond(a) => diamond(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::FailSafe(n)) => {
            eprintln!("fail-safe reconstruction used {n} times");
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
