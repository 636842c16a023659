use crate::edge_field::ParticleField;
use crate::error::{Error, Result};

/// `(L_inf, L_2)` norms of the difference of two interpolants on `[x0, x1]`.
///
/// Both interpolants are piecewise linear, so the difference is linear
/// between consecutive breakpoints of either field and the integrals are
/// evaluated exactly. Jumps are handled with one-sided limits.
pub fn error_norms(a: &ParticleField, b: &ParticleField, x0: f64, x1: f64) -> Result<(f64, f64)> {
    for f in [a, b] {
        let (lo, hi) = (f.particles()[0].x, f.particles()[f.len() - 1].x);
        if !(x0 >= lo && x1 <= hi && x0 <= x1) {
            return Err(Error::Domain {
                what: "norm interval",
                value: if x0 < lo { x0 } else { x1 },
                lo,
                hi,
            });
        }
    }
    let mut xs: Vec<f64> = a
        .particles()
        .iter()
        .chain(b.particles())
        .map(|p| p.x)
        .filter(|&x| x > x0 && x < x1)
        .collect();
    xs.push(x0);
    xs.push(x1);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let diff = |x: f64, from_right: bool| -> Result<f64> {
        Ok(a.interpolant_limit(x, from_right)? - b.interpolant_limit(x, from_right)?)
    };
    let (mut linf, mut l2sq) = (0.0f64, 0.0);
    for w in xs.windows(2) {
        let (p, q) = (w[0], w[1]);
        let (ea, eb) = (diff(p, true)?, diff(q, false)?);
        linf = linf.max(ea.abs()).max(eb.abs());
        l2sq += (q - p) * (ea * ea + ea * eb + eb * eb) / 3.0;
    }
    if xs.len() == 1 {
        linf = diff(x0, true)?.abs().max(diff(x0, false)?.abs());
    }
    Ok((linf, l2sq.max(0.0).sqrt()))
}
