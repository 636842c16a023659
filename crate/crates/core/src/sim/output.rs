use std::io::{self, Write};

use super::Snapshot;

pub const CSV_HEADER: &str = "t,edge_id,x,u";

/// Write one snapshot with a header row.
pub fn write_snapshot(snap: &Snapshot, w: &mut impl Write) -> io::Result<()> {
    write_snapshots(std::slice::from_ref(snap), w)
}

/// Write snapshots under a single header row, in edge order then particle
/// order. Numbers carry 17 significant digits.
pub fn write_snapshots(snaps: &[Snapshot], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in snaps {
        write_rows(s, w)?;
    }
    Ok(())
}

/// Write the rows of one snapshot without a header.
pub fn write_rows(snap: &Snapshot, w: &mut impl Write) -> io::Result<()> {
    for e in &snap.edges {
        for p in &e.particles {
            writeln!(w, "{:.16e},{},{:.16e},{:.16e}", snap.t, e.id, p.x, p.u)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub edge: String,
    pub x: f64,
    pub u: f64,
}

/// Parse the output of [`write_snapshots`].
pub fn read_snapshot_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => return Err(format!("bad header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let parts: Vec<&str> = l.split(',').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2));
            match parts.as_slice() {
                [t, id, x, u] => Ok(CsvRow {
                    t: num(t)?,
                    edge: id.to_string(),
                    x: num(x)?,
                    u: num(u)?,
                }),
                _ => Err(format!("line {}: expected 4 fields", i + 2)),
            }
        })
        .collect()
}
