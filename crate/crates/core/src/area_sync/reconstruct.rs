//! Rebuild the particles next to a node so that they carry a prescribed
//! change of area, leaving the node-side particle untouched.

use crate::edge_field::{slice_area, with_mirror, Particle, ParticleField, Side};
use crate::flux::FluxFunction;

/// Which stage of the reconstruction produced the new profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// Nothing to do.
    Unchanged,
    /// Continuous profile: constant and linear pieces between particle 1
    /// and particle `k`.
    Kink { k: usize },
    /// Constant value within the local range on the span to particle `k`.
    Plateau { k: usize },
    /// Constant value matching the area exactly, possibly outside the local
    /// range.
    FailSafe { k: usize },
    /// Every particle sits on the node, so no span can carry the area.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub step: Step,
    /// Set when a fail-safe value leaves `[0, u_max]`.
    pub out_of_range: Option<f64>,
}

/// Change the area of the particles next to `side` by `delta`, modifying
/// particles only within `radius` of the node (the first particle at or
/// beyond `radius` may serve as the anchor).
pub fn reconstruct_area(field: &mut ParticleField, side: Side, delta: f64, radius: f64) -> Reconstruction {
    if delta == 0.0 || field.len() < 2 {
        return Reconstruction {
            step: Step::Unchanged,
            out_of_range: None,
        };
    }
    let flux = *field.flux();
    let ps = field.particles_mut();
    match side {
        Side::Right => reconstruct_upper(&flux, ps, delta, radius),
        Side::Left => with_mirror(ps, |ps| {
            // mirroring flips the orientation but not the sign of areas
            reconstruct_upper(&flux, ps, delta, radius)
        }),
    }
}

fn reconstruct_upper(flux: &FluxFunction, ps: &mut Vec<Particle>, delta: f64, radius: f64) -> Reconstruction {
    let n = ps.len();
    let p1 = ps[n - 1];
    let mut old = 0.0;
    let (mut umin, mut umax) = (p1.u, p1.u);
    let scale = flux.u_max() * 1e-13;
    for k in 2..=n {
        let pk = ps[n - k];
        old += slice_area(flux, &ps[n - k..n - k + 2]);
        umin = umin.min(pk.u);
        umax = umax.max(pk.u);
        let w = p1.x - pk.x;
        let target = old + delta;
        let last = k == n || !(w < radius || w == 0.0);

        if w > 0.0 {
            if let Some(profile) = kink_profile(pk, p1, w, target, scale) {
                splice(ps, n - k, &profile);
                return Reconstruction {
                    step: Step::Kink { k },
                    out_of_range: None,
                };
            }
            let uc = target / w;
            if uc >= umin - scale && uc <= umax + scale {
                let uc = uc.clamp(umin, umax);
                splice(ps, n - k, &[Particle::new(pk.x, uc), Particle::new(p1.x, uc)]);
                return Reconstruction {
                    step: Step::Plateau { k },
                    out_of_range: None,
                };
            }
            if last {
                splice(ps, n - k, &[Particle::new(pk.x, uc), Particle::new(p1.x, uc)]);
                let bad = !(0.0..=flux.u_max()).contains(&uc);
                return Reconstruction {
                    step: Step::FailSafe { k },
                    out_of_range: bad.then_some(uc),
                };
            }
        } else if k == n {
            break;
        }
    }
    Reconstruction {
        step: Step::Degenerate,
        out_of_range: None,
    }
}

/// Interior points of a continuous profile from `pk` to `p1` made of one
/// constant and one linear piece with area `target`, if one exists.
fn kink_profile(pk: Particle, p1: Particle, w: f64, target: f64, tol: f64) -> Option<Vec<Particle>> {
    let (lo, hi) = (w * pk.u.min(p1.u), w * pk.u.max(p1.u));
    if target < lo - tol * w || target > hi + tol * w {
        return None;
    }
    let half = 0.5 * (p1.u - pk.u);
    if half == 0.0 {
        return Some(Vec::new());
    }
    let mid = w * (p1.u + pk.u) * 0.5;
    // distance from the node to the kink
    let (xi, u) = if between(target, w * pk.u, mid) {
        // linear next to the node, then constant pk.u
        ((target - w * pk.u) / half, pk.u)
    } else {
        // constant p1.u next to the node, then linear
        ((target - mid) / half, p1.u)
    };
    let xi = xi.clamp(0.0, w);
    Some(vec![Particle::new(p1.x - xi, u)])
}

fn between(x: f64, a: f64, b: f64) -> bool {
    x >= a.min(b) && x <= a.max(b)
}

/// Replace everything strictly between index `anchor` and the last particle
/// with `interior`, dropping points that duplicate a neighbour.
fn splice(ps: &mut Vec<Particle>, anchor: usize, interior: &[Particle]) {
    let last = ps[ps.len() - 1];
    ps.truncate(anchor + 1);
    for &p in interior {
        if ps.last() != Some(&p) {
            ps.push(p);
        }
    }
    if ps.last() != Some(&last) {
        ps.push(last);
    }
}
