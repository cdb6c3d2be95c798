//! Correspondence between 2*pi-periodic functions and degree-1 positively
//! homogeneous functions on the plane: radial Hessian, convexity and antipodal
//! certificates, and the constructive planar supporting-form build.

use crate::error::{Error, Result};
use crate::trig::{
    certified_lower_bound, differentiate, BoundCertificate, DerivativeOrder, HarmonicSeries,
    DEFAULT_CERT_GRID,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grid-scale tolerance for the convexity and antipodal verdicts.
pub const GAP_TOL: f64 = 1e-9;

/// Degree-1 positively homogeneous function `rho(r e^{i theta}) = r u(theta)`,
/// determined by its restriction `u` to the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousLift {
    restriction: HarmonicSeries,
}

impl HomogeneousLift {
    pub fn new(restriction: HarmonicSeries) -> Self {
        HomogeneousLift { restriction }
    }

    pub fn restriction(&self) -> &HarmonicSeries {
        &self.restriction
    }

    /// `rho(x, y) = r u(theta)` in polar coordinates; zero at the origin.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        if r == 0.0 {
            0.0
        } else {
            r * self.restriction.eval(y.atan2(x))
        }
    }
}

/// Evaluate the lift of `u` at a point (convenience wrapper).
pub fn lift_eval(lift: &HomogeneousLift, x: f64, y: f64) -> f64 {
    lift.eval(x, y)
}

/// The only possibly nonzero Hessian entry of the lift in the rotated frame
/// `{e^{i theta}, i e^{i theta}}`: `(u''(theta) + u(theta)) / r`.
pub fn radial_hessian(lift: &HomogeneousLift, theta: f64, r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::NonPositiveRadius(r));
    }
    let u = lift.restriction();
    let upp = differentiate(u, DerivativeOrder::Second);
    Ok((upp.eval(theta) + u.eval(theta)) / r)
}

/// Series `u'' + u`, whose sign decides convexity of the lift.
pub fn curvature_series(u: &HarmonicSeries) -> HarmonicSeries {
    &differentiate(u, DerivativeOrder::Second) + u
}

/// Certified lower bound of `u'' + u`. The lift is convex exactly when this
/// quantity is nonnegative; the verdict is taken at grid scale (see
/// [`is_convex`]) while the certificate keeps the full Lipschitz slack.
pub fn convexity_gap(u: &HarmonicSeries) -> BoundCertificate {
    certified_lower_bound(&curvature_series(u), DEFAULT_CERT_GRID).expect("default grid is valid")
}

/// Convexity verdict at tolerance -1e-9, read from the grid minimum. A true
/// minimum of exactly zero (the generic convex boundary case) always leaves a
/// negative Lipschitz-corrected bound, so the certificate alone cannot decide.
pub fn is_convex(u: &HarmonicSeries) -> bool {
    convexity_gap(u).grid_min >= -GAP_TOL
}

/// Series `theta -> u(theta) + u(theta + pi)`: only even harmonics survive.
pub fn antipodal_series(u: &HarmonicSeries) -> HarmonicSeries {
    let harmonics = u
        .harmonics()
        .iter()
        .filter(|h| h.n % 2 == 0)
        .map(|h| (h.n, 2.0 * h.cos, 2.0 * h.sin));
    HarmonicSeries::new(2.0 * u.a0(), harmonics).expect("antipodal sum stays finite")
}

/// Certified lower bound of `u(theta) + u(theta + pi)`; a positive bound
/// certifies `rho(z) + rho(-z) > 0` away from the origin.
pub fn antipodal_gap(u: &HarmonicSeries) -> BoundCertificate {
    certified_lower_bound(&antipodal_series(u), DEFAULT_CERT_GRID).expect("default grid is valid")
}

/// A planar linear form `(x, y) -> a x + b y` and the certificate for its
/// margin `u(theta) - a cos(theta) - b sin(theta)` on the circle. It is
/// strictly supporting exactly when the certified lower bound is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportingForm {
    pub a: f64,
    pub b: f64,
    pub margin: BoundCertificate,
}

impl SupportingForm {
    /// The margin restriction `u - a cos - b sin` the certificate refers to.
    pub fn margin_series(&self, u: &HarmonicSeries) -> HarmonicSeries {
        let (a1, b1) = u.coeff(1);
        u.with_harmonic(1, a1 - self.a, b1 - self.b)
    }
}

/// Maximize a concave scalar function by bracket growth plus golden-section.
///
/// The bracket `[-z, z]` doubles from `z = initial` until the function is
/// decreasing toward both ends, which localizes the maximum of a concave
/// function; coercive inputs always terminate.
fn concave_max(f: impl Fn(f64) -> f64, initial: f64) -> Result<(f64, f64)> {
    let mut z = initial;
    for _ in 0..60 {
        if f(-z) < f(-z / 2.0) && f(z) < f(z / 2.0) {
            let (mut lo, mut hi) = (-z, z);
            let inv_phi = 0.618_033_988_749_894_9;
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let (mut f1, mut f2) = (f(x1), f(x2));
            let tol = 1e-10 * (1.0 + z);
            while hi - lo > tol {
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = f(x2);
                }
            }
            let mid = (lo + hi) / 2.0;
            return Ok((mid, f(mid)));
        }
        z *= 2.0;
    }
    Err(Error::BracketGrowth)
}

const INITIAL_BRACKET: f64 = 64.0;
const BRACKET_TOL: f64 = 1e-7;

/// Constructive planar supporting form.
///
/// The base step supports the restriction of the lift to the x-axis by the
/// midpoint `e0 = (u(0) - u(pi)) / 2` of the admissible interval
/// `(-u(pi), u(0))`. The extension step computes
/// `S1 = sup_z [e0 z - rho(z, -1)]` and `S2 = inf_z [rho(z, 1) - e0 z]`
/// (concave max and convex min of coercive functions), takes the midpoint
/// `alpha = (S1 + S2) / 2`, and returns the form `(a, b) = (e0, alpha)`
/// together with a certified positivity margin.
///
/// Preconditions are the two computable certificates: the convexity verdict
/// must hold and the antipodal gap must be positive at grid scale.
pub fn strict_supporting_form(u: &HarmonicSeries) -> Result<SupportingForm> {
    strict_supporting_form_with_grid(u, DEFAULT_CERT_GRID)
}

/// Same as [`strict_supporting_form`] with an explicit base certification
/// grid; the margin is re-certified once at four times the resolution before
/// giving up.
pub fn strict_supporting_form_with_grid(u: &HarmonicSeries, m: usize) -> Result<SupportingForm> {
    let conv = convexity_gap(u);
    if conv.grid_min < -GAP_TOL {
        return Err(Error::NotConvex(conv.grid_min));
    }
    let anti = antipodal_gap(u);
    if anti.grid_min <= GAP_TOL {
        return Err(Error::AntipodalGapTooSmall(anti.grid_min));
    }

    let e0 = (u.eval(0.0) - u.eval(PI)) / 2.0;
    let rho = |z: f64, lam: f64| (z * z + lam * lam).sqrt() * u.eval(lam.atan2(z));
    let (_, s1) = concave_max(|z| e0 * z - rho(z, -1.0), INITIAL_BRACKET)?;
    let (_, neg_s2) = concave_max(|z| e0 * z - rho(z, 1.0), INITIAL_BRACKET)?;
    let s2 = -neg_s2;
    if s1 >= s2 + BRACKET_TOL {
        return Err(Error::SupportBracketing { s1, s2 });
    }
    let alpha = (s1 + s2) / 2.0;

    let (a1, b1) = u.coeff(1);
    let margin_series = u.with_harmonic(1, a1 - e0, b1 - alpha);
    let mut grid = m;
    for attempt in 0..2 {
        let margin = certified_lower_bound(&margin_series, grid)?;
        if margin.certified_lower_bound > 0.0 {
            return Ok(SupportingForm { a: e0, b: alpha, margin });
        }
        if attempt == 1 {
            return Err(Error::CertificationFailed(margin.certified_lower_bound));
        }
        grid *= 4;
    }
    unreachable!("loop returns on the second attempt")
}
