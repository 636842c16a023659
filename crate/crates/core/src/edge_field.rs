//! Characteristic particles on a single edge.
//!
//! A [`ParticleField`] is an ordered list of `(x, u)` pairs. Between two
//! neighbours the solution is the similarity interpolant, which for the
//! parabolic flux is the straight line joining them. Particles move with
//! their characteristic speed; when two neighbours meet they are merged into
//! one particle so that the area under the interpolant is unchanged. Before a
//! merge, a particle is inserted at distance `d` on either side whose
//! neighbour is farther away than `d`. If the colliding pair sits at an end
//! of the field, the inserted particle copies the extremal value and the
//! area it adds is booked as a left or right area credit.

use crate::error::{Error, Result};
use crate::flux::FluxFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub u: f64,
}

impl Particle {
    pub fn new(x: f64, u: f64) -> Self {
        Self { x, u }
    }
}

/// An end of an edge: `Left` is `x = 0`, `Right` is `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Area under the interpolant between two neighbouring particles.
pub fn segment_area(flux: &FluxFunction, p: &Particle, q: &Particle) -> f64 {
    (q.x - p.x) * flux.mean(p.u, q.u)
}

pub(crate) fn slice_area(flux: &FluxFunction, ps: &[Particle]) -> f64 {
    ps.windows(2).map(|w| segment_area(flux, &w[0], &w[1])).sum()
}

/// Result of cutting a field back to (or extending it up to) an edge end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trim {
    /// Density now sitting at the edge end.
    pub value: f64,
    /// Area removed beyond the edge end.
    pub excess: f64,
    /// Distance between the old extremal particle and the edge end when the
    /// field stopped short of it; zero otherwise.
    pub gap: f64,
    /// Area added by constant extrapolation over the gap.
    pub added: f64,
}

impl Trim {
    /// Removed minus added area.
    pub fn outside_area(&self) -> f64 {
        self.excess - self.added
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdvanceStats {
    pub merges: usize,
    pub credit_left: f64,
    pub credit_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleField {
    particles: Vec<Particle>,
    flux: FluxFunction,
    length: f64,
    shock_distance: f64,
    credit_left: f64,
    credit_right: f64,
}

impl ParticleField {
    pub fn new(particles: Vec<Particle>, flux: FluxFunction, length: f64, shock_distance: f64) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Internal("a particle field needs at least one particle".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain {
                what: "edge length",
                value: length,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(shock_distance > 0.0 && shock_distance.is_finite()) {
            return Err(Error::Domain {
                what: "shock distance",
                value: shock_distance,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let mut particles = particles;
        for p in &mut particles {
            if !p.x.is_finite() {
                return Err(Error::Domain {
                    what: "particle position",
                    value: p.x,
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                });
            }
            p.u = flux.check_density(p.u)?;
        }
        if particles.windows(2).any(|w| w[1].x < w[0].x) {
            return Err(Error::Internal("particle positions must be nondecreasing".into()));
        }
        Ok(Self {
            particles,
            flux,
            length,
            shock_distance,
            credit_left: 0.0,
            credit_right: 0.0,
        })
    }

    /// Sample `profile` at `0, h, 2h, ...` and at `length`.
    pub fn sample_initial(
        profile: impl Fn(f64) -> f64,
        length: f64,
        h: f64,
        flux: FluxFunction,
        shock_distance: f64,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain {
                what: "particle spacing",
                value: h,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain {
                what: "edge length",
                value: length,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let tol = position_tol(length);
        let mut particles = Vec::with_capacity((length / h).ceil() as usize + 2);
        let mut i = 0usize;
        loop {
            let x = i as f64 * h;
            if x >= length - tol {
                break;
            }
            particles.push(Particle::new(x, flux.check_density(profile(x))?));
            i += 1;
        }
        particles.push(Particle::new(length, flux.check_density(profile(length))?));
        Self::new(particles, flux, length, shock_distance)
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub(crate) fn particles_mut(&mut self) -> &mut Vec<Particle> {
        &mut self.particles
    }

    pub fn flux(&self) -> &FluxFunction {
        &self.flux
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn shock_distance(&self) -> f64 {
        self.shock_distance
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Credit accumulated at `side` since it was last taken.
    pub fn credit(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.credit_left,
            Side::Right => self.credit_right,
        }
    }

    pub fn take_credit(&mut self, side: Side) -> f64 {
        match side {
            Side::Left => std::mem::take(&mut self.credit_left),
            Side::Right => std::mem::take(&mut self.credit_right),
        }
    }

    pub fn extremal(&self, side: Side) -> Particle {
        match side {
            Side::Left => self.particles[0],
            Side::Right => self.particles[self.particles.len() - 1],
        }
    }

    pub fn position_tol(&self) -> f64 {
        position_tol(self.length)
    }

    pub fn total_area(&self) -> f64 {
        slice_area(&self.flux, &self.particles)
    }

    /// Value of the similarity interpolant at `x`.
    pub fn interpolant_value(&self, x: f64) -> Result<f64> {
        let ps = &self.particles;
        let (lo, hi) = (ps[0].x, ps[ps.len() - 1].x);
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain {
                what: "interpolation point",
                value: x,
                lo,
                hi,
            });
        }
        let j = ps.partition_point(|p| p.x < x);
        if ps[j].x == x {
            return Ok(ps[j].u);
        }
        Ok(lerp(&ps[j - 1], &ps[j], x))
    }

    /// One-sided limit of the interpolant at `x`, from the right when
    /// `from_right`, else from the left. Differs from
    /// [`interpolant_value`](Self::interpolant_value) only at jumps.
    pub(crate) fn interpolant_limit(&self, x: f64, from_right: bool) -> Result<f64> {
        let ps = &self.particles;
        let (lo, hi) = (ps[0].x, ps[ps.len() - 1].x);
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain {
                what: "interpolation point",
                value: x,
                lo,
                hi,
            });
        }
        if from_right {
            // last particle with p.x <= x, then the segment to its right
            let j = ps.partition_point(|p| p.x <= x);
            if j == ps.len() {
                return Ok(ps[j - 1].u);
            }
            Ok(lerp(&ps[j - 1], &ps[j], x))
        } else {
            let j = ps.partition_point(|p| p.x < x);
            if j == 0 {
                return Ok(ps[0].u);
            }
            Ok(lerp(&ps[j - 1], &ps[j], x))
        }
    }

    /// Earliest time at which two neighbouring particles with converging
    /// characteristics meet. A coincident converging pair yields `Some(0.0)`.
    pub fn first_collision_time(&self) -> Option<f64> {
        self.next_collision().map(|(t, _)| t)
    }

    fn next_collision(&self) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        let mut s_prev = self.flux.df(self.particles[0].u);
        for i in 0..self.particles.len() - 1 {
            let s_next = self.flux.df(self.particles[i + 1].u);
            if s_prev > s_next {
                let gap = self.particles[i + 1].x - self.particles[i].x;
                let t = (gap / (s_prev - s_next)).max(0.0);
                if best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, i));
                }
            }
            s_prev = s_next;
        }
        best
    }

    fn is_colliding(&self, i: usize) -> bool {
        let (p, q) = (self.particles[i], self.particles[i + 1]);
        q.x - p.x <= self.position_tol() && self.flux.df(p.u) > self.flux.df(q.u)
    }

    /// Merge the coincident converging pair `(i, i + 1)` into one particle,
    /// inserting shock-distance particles first. Returns the index of the
    /// merged particle.
    pub fn merge_at(&mut self, i: usize) -> Result<usize> {
        if i + 1 >= self.particles.len() || !self.is_colliding(i) {
            return Err(Error::Internal(format!(
                "merge_at({i}) called on a pair that is not colliding"
            )));
        }
        let d = self.shock_distance;
        let mut i = i;

        let p = self.particles[i];
        if i == 0 {
            let q = Particle::new(p.x - d, p.u);
            self.credit_left += segment_area(&self.flux, &q, &p);
            self.particles.insert(0, q);
            i += 1;
        } else if p.x - self.particles[i - 1].x > d {
            let x = p.x - d;
            let q = Particle::new(x, lerp(&self.particles[i - 1], &p, x));
            self.particles.insert(i, q);
            i += 1;
        }

        let p = self.particles[i + 1];
        if i + 2 == self.particles.len() {
            let q = Particle::new(p.x + d, p.u);
            self.credit_right += segment_area(&self.flux, &p, &q);
            self.particles.push(q);
        } else if self.particles[i + 2].x - p.x > d {
            let x = p.x + d;
            let q = Particle::new(x, lerp(&p, &self.particles[i + 2], x));
            self.particles.insert(i + 2, q);
        }

        let (l, a, b, r) = (
            self.particles[i - 1],
            self.particles[i],
            self.particles[i + 1],
            self.particles[i + 2],
        );
        let area =
            segment_area(&self.flux, &l, &a) + segment_area(&self.flux, &a, &b) + segment_area(&self.flux, &b, &r);
        let tol = self.position_tol();
        let (x, u) = if r.x - l.x > tol && l.x <= a.x && a.x <= r.x {
            let (wl, wr) = (a.x - l.x, r.x - a.x);
            (a.x, (2.0 * area - wl * l.u - wr * r.u) / (wl + wr))
        } else {
            // whole neighbourhood within roundoff of one point
            let (wl, wr) = ((a.x - l.x).max(0.0), (r.x - b.x).max(0.0));
            let u = if wl + wr > 0.0 {
                (wl * a.u + wr * b.u) / (wl + wr)
            } else {
                self.flux.mean(a.u, b.u)
            };
            (a.x.clamp(l.x.min(r.x), r.x.max(l.x)), u)
        };
        self.particles[i] = Particle::new(x, u);
        self.particles.remove(i + 1);
        Ok(i)
    }

    /// Merge every coincident converging pair, sweeping left to right and
    /// re-checking the left neighbour after each merge.
    fn resolve_collisions(&mut self) -> Result<usize> {
        let mut merges = 0;
        let mut i = 0;
        while i + 1 < self.particles.len() {
            if self.is_colliding(i) {
                let m = self.merge_at(i)?;
                merges += 1;
                i = m.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        // roundoff-level crossings left behind by degenerate merges
        let tol = self.position_tol();
        for i in 1..self.particles.len() {
            let prev = self.particles[i - 1].x;
            if self.particles[i].x < prev && prev - self.particles[i].x <= tol {
                self.particles[i].x = prev;
            }
        }
        Ok(merges)
    }

    fn translate(&mut self, dt: f64) {
        let flux = self.flux;
        for p in &mut self.particles {
            p.x += flux.df(p.u) * dt;
        }
    }

    /// Move every particle along its characteristic for time `tau`, merging
    /// particles as they collide.
    pub fn advance(&mut self, tau: f64) -> Result<AdvanceStats> {
        if tau.is_nan() || tau < 0.0 {
            return Err(Error::Domain {
                what: "advance duration",
                value: tau,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let (cl, cr) = (self.credit_left, self.credit_right);
        let mut merges = 0;
        let mut remaining = tau;
        loop {
            merges += self.resolve_collisions()?;
            match self.next_collision() {
                Some((t, _)) if t < remaining => {
                    self.translate(t);
                    remaining -= t;
                }
                _ => {
                    self.translate(remaining);
                    merges += self.resolve_collisions()?;
                    break;
                }
            }
        }
        Ok(AdvanceStats {
            merges,
            credit_left: self.credit_left - cl,
            credit_right: self.credit_right - cr,
        })
    }

    /// Cut the field back to the edge end at `side`, or extend it there with
    /// the extremal value, leaving a particle exactly on the end.
    pub fn boundary_trim(&mut self, side: Side) -> Trim {
        let tol = self.position_tol();
        let flux = self.flux;
        match side {
            Side::Right => trim_upper(&flux, &mut self.particles, self.length, tol),
            Side::Left => with_mirror(&mut self.particles, |ps| trim_upper(&flux, ps, 0.0, tol)),
        }
    }

    /// Install a node state `u_hat` as the new outermost particle at `side`.
    /// Returns whether a particle was added.
    pub fn insert_boundary_state(&mut self, u_hat: f64, side: Side) -> Result<bool> {
        let u_hat = self.flux.check_density(u_hat)?;
        let end = match side {
            Side::Left => 0.0,
            Side::Right => self.length,
        };
        let p = self.extremal(side);
        if p.x != end {
            return Err(Error::Internal(format!(
                "insert_boundary_state: extremal particle at {} is not on the {} end {}",
                p.x,
                side.name(),
                end
            )));
        }
        if (p.u - u_hat).abs() <= DENSITY_EQ_TOL * self.flux.u_max().max(1.0) {
            return Ok(false);
        }
        let q = Particle::new(end, u_hat);
        match side {
            Side::Left => self.particles.insert(0, q),
            Side::Right => self.particles.push(q),
        }
        Ok(true)
    }
}

/// Densities closer than this (relative to `u_max`) count as equal.
pub const DENSITY_EQ_TOL: f64 = 1e-12;

pub fn position_tol(length: f64) -> f64 {
    1e-12 * length.max(1.0)
}

#[inline]
fn lerp(p: &Particle, q: &Particle, x: f64) -> f64 {
    let w = q.x - p.x;
    if w <= 0.0 {
        return q.u;
    }
    p.u + (q.u - p.u) * ((x - p.x) / w)
}

/// Run `f` on the particles mirrored through `x = 0` (positions negated,
/// order reversed), so that left-end operations can reuse right-end code.
/// Negation is exact, so untouched particles come back bit for bit.
pub(crate) fn with_mirror<R>(ps: &mut Vec<Particle>, f: impl FnOnce(&mut Vec<Particle>) -> R) -> R {
    mirror(ps);
    let r = f(ps);
    mirror(ps);
    r
}

fn mirror(ps: &mut [Particle]) {
    ps.reverse();
    for p in ps.iter_mut() {
        p.x = 0.0 - p.x;
    }
}

/// Trim or extend so that the last particle sits at `end`.
fn trim_upper(flux: &FluxFunction, ps: &mut Vec<Particle>, end: f64, tol: f64) -> Trim {
    let n = ps.len();
    let near = ps.partition_point(|p| p.x < end - tol);
    let beyond = ps.partition_point(|p| p.x <= end + tol);
    let anchor = near.saturating_sub(1);
    let old_tail = slice_area(flux, &ps[anchor..]);

    let mut gap = 0.0;
    let value;
    if near < beyond {
        for p in &mut ps[near..beyond] {
            p.x = end;
        }
        value = ps[beyond - 1].u;
        ps.truncate(beyond);
    } else if near < n {
        value = if near == 0 {
            ps[0].u
        } else {
            lerp(&ps[near - 1], &ps[near], end)
        };
        ps.truncate(near);
        ps.push(Particle::new(end, value));
    } else {
        let last = ps[n - 1];
        value = last.u;
        gap = end - last.x;
        ps.push(Particle::new(end, value));
    }

    let outside = old_tail - slice_area(flux, &ps[anchor..]);
    if gap > 0.0 {
        Trim {
            value,
            excess: 0.0,
            gap,
            added: -outside,
        }
    } else {
        Trim {
            value,
            excess: outside,
            gap,
            added: 0.0,
        }
    }
}
