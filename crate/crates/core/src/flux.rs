//! Parabolic (Greenshields) flux and the flux algebra used by the particle
//! method and the junction solvers.
//!
//! `f(u) = v_max * u * (1 - u / u_max)` is concave with `f(0) = f(u_max) = 0`,
//! critical density `u_max / 2` and capacity `v_max * u_max / 4`. Its
//! derivative is affine in `u`, which is what makes the similarity
//! interpolant between two particles linear in `x`.

use crate::error::{Error, Result};

/// Tolerance for densities and flows that sit just outside their domain
/// after roundoff.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Which root of `f(u) = q` to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `u <= u*`
    Free,
    /// `u >= u*`
    Congested,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxFunction {
    v_max: f64,
    u_max: f64,
}

impl FluxFunction {
    pub fn new(v_max: f64, u_max: f64) -> Result<Self> {
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(Error::Domain {
                what: "v_max",
                value: v_max,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if !(u_max > 0.0 && u_max.is_finite()) {
            return Err(Error::Domain {
                what: "u_max",
                value: u_max,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { v_max, u_max })
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Critical density `u*` where the flow peaks.
    pub fn critical_density(&self) -> f64 {
        0.5 * self.u_max
    }

    /// Capacity `f* = f(u*)`.
    pub fn max_flow(&self) -> f64 {
        0.25 * self.v_max * self.u_max
    }

    /// Validate a density, clamping values within [`DOMAIN_TOL`] of the
    /// endpoints.
    pub fn check_density(&self, u: f64) -> Result<f64> {
        let tol = DOMAIN_TOL * self.u_max.max(1.0);
        if !(u >= -tol && u <= self.u_max + tol) {
            return Err(Error::Domain {
                what: "density",
                value: u,
                lo: 0.0,
                hi: self.u_max,
            });
        }
        Ok(u.clamp(0.0, self.u_max))
    }

    /// Unchecked flow rate.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.v_max * u * (1.0 - u / self.u_max)
    }

    /// Unchecked characteristic speed `f'(u)`.
    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        self.v_max * (1.0 - 2.0 * u / self.u_max)
    }

    /// `u f'(u) - f(u)`: rate at which the area between a fixed point and a
    /// point moving along the characteristic through density `u` changes,
    /// excluding the flux through the fixed point.
    #[inline]
    pub fn characteristic_flux(&self, u: f64) -> f64 {
        -self.v_max * u * u / self.u_max
    }

    pub fn flow(&self, u: f64) -> Result<f64> {
        Ok(self.f(self.check_density(u)?))
    }

    pub fn wave_speed(&self, u: f64) -> Result<f64> {
        Ok(self.df(self.check_density(u)?))
    }

    /// The unique density whose characteristic speed is `w`.
    pub fn inverse_wave_speed(&self, w: f64) -> Result<f64> {
        let tol = DOMAIN_TOL * self.v_max.max(1.0);
        if !(w >= -self.v_max - tol && w <= self.v_max + tol) {
            return Err(Error::Domain {
                what: "wave speed",
                value: w,
                lo: -self.v_max,
                hi: self.v_max,
            });
        }
        let w = w.clamp(-self.v_max, self.v_max);
        Ok(0.5 * self.u_max * (1.0 - w / self.v_max))
    }

    /// Demand: the largest flow an ingoing road can deliver, `f(min(u, u*))`.
    pub fn demand(&self, u: f64) -> Result<f64> {
        let u = self.check_density(u)?;
        Ok(self.f(u.min(self.critical_density())))
    }

    /// Supply: the largest flow an outgoing road can absorb, `f(max(u, u*))`.
    pub fn supply(&self, u: f64) -> Result<f64> {
        let u = self.check_density(u)?;
        Ok(self.f(u.max(self.critical_density())))
    }

    /// Root of `f(u) = q` on the requested branch.
    pub fn inverse_flow(&self, q: f64, branch: Branch) -> Result<f64> {
        let fmax = self.max_flow();
        let tol = DOMAIN_TOL * fmax.max(1.0);
        if !(q >= -tol && q <= fmax + tol) {
            return Err(Error::Domain {
                what: "flow",
                value: q,
                lo: 0.0,
                hi: fmax,
            });
        }
        let q = q.clamp(0.0, fmax);
        let disc = (1.0 - q / fmax).max(0.0).sqrt();
        let half = 0.5 * self.u_max;
        Ok(match branch {
            Branch::Free => {
                // u = half * (1 - disc), written to avoid cancellation near q = 0
                if disc < 0.5 {
                    half * (1.0 - disc)
                } else {
                    half * (q / fmax) / (1.0 + disc)
                }
            }
            Branch::Congested => half * (1.0 + disc),
        })
    }

    /// Nonlinear average `a(u, v)` such that the interpolant area over a
    /// segment of width `dx` is `dx * a(u, v)`. For the parabolic flux this
    /// is the arithmetic mean.
    pub fn chord_average(&self, u: f64, v: f64) -> Result<f64> {
        let u = self.check_density(u)?;
        let v = self.check_density(v)?;
        Ok(self.mean(u, v))
    }

    /// Unchecked [`chord_average`](Self::chord_average).
    #[inline]
    pub fn mean(&self, u: f64, v: f64) -> f64 {
        0.5 * (u + v)
    }

    /// Branch a density belongs to (`u* ` itself counts as free).
    pub fn branch_of(&self, u: f64) -> Branch {
        if u <= self.critical_density() {
            Branch::Free
        } else {
            Branch::Congested
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fx(v: f64, u: f64) -> FluxFunction {
        FluxFunction::new(v, u).unwrap()
    }

    #[test]
    fn flow_examples() {
        let f = fx(1.0, 2.0);
        assert_eq!(f.flow(0.0).unwrap(), 0.0);
        assert_eq!(f.flow(2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(f.flow(1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(f.critical_density(), 1.0);
        assert_eq!(f.max_flow(), 0.5);
    }

    #[test]
    fn wave_speed_examples() {
        assert_eq!(fx(1.0, 2.0).wave_speed(1.0).unwrap(), 0.0);
        assert_eq!(fx(1.0, 2.0).wave_speed(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(fx(1.5, 1.0).wave_speed(0.8).unwrap(), -0.9, epsilon = 1e-14);
    }

    #[test]
    fn inverse_wave_speed_examples() {
        let f = fx(1.0, 1.0);
        assert_eq!(f.inverse_wave_speed(0.0).unwrap(), 0.5);
        assert_eq!(f.inverse_wave_speed(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(f.inverse_wave_speed(0.6).unwrap(), 0.2, epsilon = 1e-15);
        assert!(f.inverse_wave_speed(1.1).is_err());
    }

    #[test]
    fn demand_supply_examples() {
        let f = fx(1.0, 1.0);
        assert_abs_diff_eq!(f.demand(0.3).unwrap(), 0.21, epsilon = 1e-15);
        assert_eq!(f.demand(0.5).unwrap(), 0.25);
        assert_eq!(f.demand(0.9).unwrap(), 0.25);
        assert_abs_diff_eq!(f.supply(0.8).unwrap(), 0.16, epsilon = 1e-15);
        assert_eq!(f.supply(0.5).unwrap(), 0.25);
        assert_eq!(f.supply(0.3).unwrap(), 0.25);
    }

    #[test]
    fn inverse_flow_examples() {
        let f = fx(1.5, 1.0);
        assert_eq!(f.inverse_flow(0.0, Branch::Free).unwrap(), 0.0);
        assert_eq!(f.inverse_flow(f.max_flow(), Branch::Free).unwrap(), 0.5);
        assert_eq!(f.inverse_flow(f.max_flow(), Branch::Congested).unwrap(), 0.5);
        assert_abs_diff_eq!(f.inverse_flow(0.24, Branch::Congested).unwrap(), 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(f.inverse_flow(0.24, Branch::Free).unwrap(), 0.2, epsilon = 1e-14);
        // just above capacity clamps to u*
        assert_eq!(f.inverse_flow(f.max_flow() + 1e-13, Branch::Congested).unwrap(), 0.5);
        assert!(f.inverse_flow(f.max_flow() + 1e-6, Branch::Free).is_err());
        assert!(f.inverse_flow(-1e-6, Branch::Free).is_err());
    }

    #[test]
    fn domain_errors_and_clamping() {
        let f = fx(1.0, 2.0);
        assert!(f.flow(-0.1).is_err());
        assert!(f.flow(2.1).is_err());
        assert!(f.flow(f64::NAN).is_err());
        assert_eq!(f.flow(2.0 + 1e-13).unwrap(), 0.0);
        assert_eq!(f.flow(-1e-13).unwrap(), 0.0);
        assert!(FluxFunction::new(0.0, 1.0).is_err());
        assert!(FluxFunction::new(1.0, -1.0).is_err());
    }

    #[test]
    fn chord_average_examples() {
        assert_eq!(fx(1.0, 1.0).chord_average(0.3, 0.3).unwrap(), 0.3);
        assert_abs_diff_eq!(fx(1.0, 1.0).chord_average(0.2, 0.8).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fx(1.0, 2.0).chord_average(0.4, 1.6).unwrap(), 1.0, epsilon = 1e-15);
    }

    /// The generic nonlinear average `[f'(w) w - f(w)] / [f'(w)]`,
    /// evaluated without using the parabolic simplification.
    fn generic_average(f: &FluxFunction, u: f64, v: f64) -> f64 {
        let g = |w: f64| f.df(w) * w - f.f(w);
        (g(v) - g(u)) / (f.df(v) - f.df(u))
    }

    /// Quadrature of the similarity interpolant over a unit segment, solving
    /// the implicit relation for each abscissa by bisection.
    fn interpolant_quadrature(f: &FluxFunction, u: f64, v: f64) -> f64 {
        let n = 2000;
        let mut acc = 0.0;
        for k in 0..n {
            // Gauss-Legendre 2-point per panel
            for &g in &[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8] {
                let s = (k as f64 + 0.5 + 0.5 * g) / n as f64;
                let target = f.df(u) + s * (f.df(v) - f.df(u));
                let (mut lo, mut hi) = (0.0, f.u_max());
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f.df(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                acc += 0.5 * (lo + hi) * 0.5 / n as f64;
            }
        }
        acc
    }

    #[test]
    fn chord_average_matches_quadrature() {
        for &(v, um, a, b) in &[(1.0, 1.0, 0.2, 0.8), (1.0, 2.0, 0.4, 1.6), (1.5, 1.0, 0.9, 0.1)] {
            let f = fx(v, um);
            let q = interpolant_quadrature(&f, a, b);
            assert_abs_diff_eq!(f.chord_average(a, b).unwrap(), q, epsilon = 1e-10);
            assert_abs_diff_eq!(generic_average(&f, a, b), q, epsilon = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn flow_nonnegative_and_zero_at_ends(v in 0.1f64..5.0, um in 0.1f64..5.0, s in 0.0f64..=1.0) {
            let f = fx(v, um);
            let u = s * um;
            prop_assert!(f.flow(u).unwrap() >= 0.0);
            prop_assert_eq!(f.flow(0.0).unwrap(), 0.0);
            prop_assert_eq!(f.flow(um).unwrap(), 0.0);
        }

        #[test]
        fn wave_speed_inverse_roundtrip(v in 0.1f64..5.0, um in 0.1f64..5.0, s in -1.0f64..=1.0) {
            let f = fx(v, um);
            let w = s * v;
            let u = f.inverse_wave_speed(w).unwrap();
            prop_assert!((f.wave_speed(u).unwrap() - w).abs() <= 1e-12 * v.max(1.0));
        }

        #[test]
        fn wave_speed_strictly_decreasing(v in 0.1f64..5.0, um in 0.1f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a < b);
            let f = fx(v, um);
            prop_assert!(f.wave_speed(a * um).unwrap() > f.wave_speed(b * um).unwrap());
        }

        #[test]
        fn inverse_flow_roundtrip(v in 0.1f64..5.0, um in 0.1f64..5.0, s in 0.0f64..=1.0) {
            let f = fx(v, um);
            let u = s * um;
            let back = f.inverse_flow(f.flow(u).unwrap(), f.branch_of(u)).unwrap();
            // the root is ill-conditioned near u*, where f is flat
            let cond = 1.0 / (1.0 - 2.0 * s).abs().max(1e-4);
            prop_assert!((back - u).abs() <= 1e-12 * um.max(1.0) * cond, "u={} back={}", u, back);
        }

        #[test]
        fn demand_supply_branches(v in 0.1f64..5.0, um in 0.1f64..5.0, s in 0.0f64..=1.0) {
            let f = fx(v, um);
            let u = s * um;
            if u <= f.critical_density() {
                prop_assert_eq!(f.demand(u).unwrap(), f.f(u));
                prop_assert_eq!(f.supply(u).unwrap(), f.max_flow());
            } else {
                prop_assert_eq!(f.supply(u).unwrap(), f.f(u));
                prop_assert_eq!(f.demand(u).unwrap(), f.max_flow());
            }
        }

        #[test]
        fn chord_average_is_mean_and_bounded(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let f = fx(1.3, 1.0);
            let m = f.chord_average(a, b).unwrap();
            prop_assert!(m >= a.min(b) && m <= a.max(b));
            prop_assert!((m - 0.5 * (a + b)).abs() < 1e-12);
        }
    }
}
