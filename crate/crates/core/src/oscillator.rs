//! Periodic solutions of `u'' + omega^2 u = h(theta)`: resonance checks,
//! spectral particular solutions, kernel attachment, and an independent
//! variation-of-constants oracle for omega = 1.

use crate::error::{Error, Result};
use crate::trig::{grid_values, CircleGrid, HarmonicSeries};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const INTEGER_TOL: f64 = 1e-12;

/// Positive oscillator frequency, with integer detection at 1e-12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    omega: f64,
}

impl Frequency {
    pub fn new(omega: f64) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::BadFrequency(omega));
        }
        Ok(Frequency { omega })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_integer(&self) -> bool {
        self.as_integer().is_some()
    }

    pub fn as_integer(&self) -> Option<u32> {
        let r = self.omega.round();
        if r >= 1.0 && (self.omega - r).abs() <= INTEGER_TOL {
            Some(r as u32)
        } else {
            None
        }
    }
}

/// The two resonance integrals of a forcing at integer omega and the verdict
/// at a given tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    #[serde(rename = "cos")]
    pub cos_coeff: f64,
    #[serde(rename = "sin")]
    pub sin_coeff: f64,
    pub tolerance: f64,
    pub passes: bool,
}

impl ResonanceReport {
    pub fn validate(&self) -> Result<()> {
        let expect = self.cos_coeff.abs().max(self.sin_coeff.abs()) <= self.tolerance;
        if self.passes != expect {
            return Err(Error::Verification("resonance verdict inconsistent".into()));
        }
        Ok(())
    }
}

/// Coefficients of the resonant kernel element `alpha sin(omega theta) + beta cos(omega theta)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelCoeffs {
    pub alpha: f64,
    pub beta: f64,
}

impl KernelCoeffs {
    pub fn new(alpha: f64, beta: f64) -> Self {
        KernelCoeffs { alpha, beta }
    }
}

/// Default resonance tolerance, scaled by the size of the forcing.
pub fn default_resonance_tolerance(h: &HarmonicSeries) -> f64 {
    1e-9 * (1.0 + h.sup_bound())
}

/// Integrals of `h cos(omega theta)` and `h sin(omega theta)` over a period,
/// read off exactly from the series entry at n = omega. Noninteger frequencies
/// carry no kernel and pass trivially.
pub fn resonance_check(h: &HarmonicSeries, w: Frequency, tol: f64) -> ResonanceReport {
    let (cos_coeff, sin_coeff) = match w.as_integer() {
        Some(n) => {
            let (a, b) = h.coeff(n);
            (PI * a, PI * b)
        }
        None => (0.0, 0.0),
    };
    ResonanceReport {
        cos_coeff,
        sin_coeff,
        tolerance: tol,
        passes: cos_coeff.abs().max(sin_coeff.abs()) <= tol,
    }
}

/// Forcing solved by `u`: the termwise image `u'' + omega^2 u`.
pub fn forcing_for(u: &HarmonicSeries, w: Frequency) -> HarmonicSeries {
    let w2 = w.omega() * w.omega();
    let harmonics = u.harmonics().iter().map(|h| {
        let factor = w2 - (h.n as f64) * (h.n as f64);
        (h.n, factor * h.cos, factor * h.sin)
    });
    HarmonicSeries::new(w2 * u.a0(), harmonics).expect("operator image stays finite")
}

/// Canonical periodic particular solution: termwise division by
/// `omega^2 - n^2`, constant term `a0 / omega^2`, zero kernel component.
///
/// For integer omega the forcing must pass the resonance check at the default
/// tolerance; sub-tolerance coefficients at n = omega are stripped.
pub fn particular_solution(h: &HarmonicSeries, w: Frequency) -> Result<HarmonicSeries> {
    let w2 = w.omega() * w.omega();
    let resonant_n = w.as_integer();
    if let Some(n) = resonant_n {
        let report = resonance_check(h, w, default_resonance_tolerance(h));
        if !report.passes {
            return Err(Error::Resonant { omega: n as f64, report });
        }
    }
    let harmonics = h
        .harmonics()
        .iter()
        .filter(|hh| Some(hh.n) != resonant_n)
        .map(|hh| {
            let factor = w2 - (hh.n as f64) * (hh.n as f64);
            (hh.n, hh.cos / factor, hh.sin / factor)
        });
    HarmonicSeries::new(h.a0() / w2, harmonics)
}

/// Add the kernel element `alpha sin(omega theta) + beta cos(omega theta)`.
/// Only integer frequencies carry a kernel.
pub fn attach_kernel(u_p: &HarmonicSeries, w: Frequency, k: KernelCoeffs) -> Result<HarmonicSeries> {
    let n = w.as_integer().ok_or(Error::NonIntegerFrequency(w.omega()))?;
    let (a, b) = u_p.coeff(n);
    Ok(u_p.with_harmonic(n, a + k.beta, b + k.alpha))
}

/// Variation-of-constants solution for omega = 1, evaluated on a uniform grid
/// by cumulative quadrature:
/// `u(t) = (alpha + int_0^t h cos) sin t - (beta + int_0^t h sin) cos t`.
///
/// Each interval is integrated with a three-point Simpson rule using the
/// midpoint sample, so the grid values carry O(delta^4) quadrature error.
/// Nonresonant forcings yield a 2*pi-periodic grid; a resonant forcing shows
/// up as a wrap defect (in the value for a sin-resonance, in the slope for a
/// cos-resonance).
pub fn voc_oracle(h: impl Fn(f64) -> f64, k: KernelCoeffs, m: usize) -> Result<CircleGrid> {
    if m < 4 {
        return Err(Error::GridTooSmall(m));
    }
    let delta = 2.0 * PI / m as f64;
    let fc = |t: f64| h(t) * t.cos();
    let fs = |t: f64| h(t) * t.sin();
    let mut int_cos = 0.0;
    let mut int_sin = 0.0;
    let mut values = Vec::with_capacity(m);
    for k_idx in 0..m {
        let theta = k_idx as f64 * delta;
        values.push((k.alpha + int_cos) * theta.sin() - (k.beta + int_sin) * theta.cos());
        let mid = theta + delta / 2.0;
        let next = theta + delta;
        int_cos += delta / 6.0 * (fc(theta) + 4.0 * fc(mid) + fc(next));
        int_sin += delta / 6.0 * (fs(theta) + 4.0 * fs(mid) + fs(next));
    }
    CircleGrid::new(values)
}

/// Sup of the equation residual `|u'' + omega^2 u - h|` over a 4096-point grid
/// (denser if the residual itself needs more bandwidth).
pub fn residual_sup(u: &HarmonicSeries, h: &HarmonicSeries, w: Frequency) -> f64 {
    let residual = &forcing_for(u, w) - h;
    let m = 4096usize.max(2 * residual.degree() as usize + 2);
    grid_values(&residual, m)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::synthesize;

    fn series(a0: f64, h: &[(u32, f64, f64)]) -> HarmonicSeries {
        HarmonicSeries::new(a0, h.iter().copied()).unwrap()
    }

    fn w(x: f64) -> Frequency {
        Frequency::new(x).unwrap()
    }

    #[test]
    fn frequency_integer_detection() {
        assert_eq!(w(1.0).as_integer(), Some(1));
        assert_eq!(w(3.0 + 5e-13).as_integer(), Some(3));
        assert_eq!(w(2.5).as_integer(), None);
        assert_eq!(w(1e-13).as_integer(), None);
        assert!(Frequency::new(0.0).is_err());
        assert!(Frequency::new(-1.0).is_err());
        assert!(Frequency::new(f64::NAN).is_err());
    }

    #[test]
    fn resonance_no_first_harmonic() {
        let h = series(1.0, &[(2, 1.0, 0.0)]);
        let rep = resonance_check(&h, w(1.0), 1e-9);
        assert_eq!((rep.cos_coeff, rep.sin_coeff), (0.0, 0.0));
        assert!(rep.passes);
    }

    #[test]
    fn resonance_cos_theta_fails() {
        let h = series(0.0, &[(1, 1.0, 0.0)]);
        let rep = resonance_check(&h, w(1.0), 1e-9);
        assert!((rep.cos_coeff - PI).abs() < 1e-15);
        assert_eq!(rep.sin_coeff, 0.0);
        assert!(!rep.passes);
        rep.validate().unwrap();
    }

    #[test]
    fn particular_solution_textbook_cases() {
        // 1 + cos(2t) at omega 1 -> 1 - cos(2t)/3.
        let h = series(1.0, &[(2, 1.0, 0.0)]);
        let u = particular_solution(&h, w(1.0)).unwrap();
        assert!((u.a0() - 1.0).abs() < 1e-15);
        let (a2, b2) = u.coeff(2);
        assert!((a2 + 1.0 / 3.0).abs() < 1e-15 && b2 == 0.0);

        let u = particular_solution(&HarmonicSeries::constant(2.0), w(1.0)).unwrap();
        assert_eq!(u.a0(), 2.0);

        let u = particular_solution(&HarmonicSeries::constant(1.0), w(3.0)).unwrap();
        assert!((u.a0() - 1.0 / 9.0).abs() < 1e-15);

        // Resonant forcing is rejected with the offending report attached.
        let err = particular_solution(&series(0.0, &[(1, 1.0, 0.0)]), w(1.0)).unwrap_err();
        match err {
            Error::Resonant { report, .. } => assert!((report.cos_coeff - PI).abs() < 1e-12),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn particular_solution_solves_equation() {
        let h = series(0.5, &[(2, 1.0, -0.25), (5, 0.3, 0.4), (8, -0.7, 0.1)]);
        // integer frequencies avoid the populated harmonics 2, 5, 8
        for omega in [1.0, 2.5, 3.0, 4.0, 7.25] {
            let u = particular_solution(&h, w(omega)).unwrap();
            assert!(residual_sup(&u, &h, w(omega)) <= 1e-10, "omega={omega}");
        }
        // a populated resonant harmonic is rejected
        assert!(particular_solution(&h, w(2.0)).is_err());
    }

    #[test]
    fn attach_kernel_cases() {
        let one = HarmonicSeries::constant(1.0);
        let u = attach_kernel(&one, w(1.0), KernelCoeffs::new(0.0, 0.0)).unwrap();
        assert_eq!(u.coeff(1), (0.0, 0.0));
        assert_eq!(u.a0(), 1.0);

        let u = attach_kernel(&one, w(1.0), KernelCoeffs::new(0.0, -1.0)).unwrap();
        assert_eq!(u.coeff(1), (-1.0, 0.0));

        assert!(attach_kernel(&one, w(1.5), KernelCoeffs::default()).is_err());

        // The kernel is annihilated by the operator, so the residual is unchanged.
        let h = series(1.0, &[(2, 1.0, 0.0)]);
        let u_p = particular_solution(&h, w(1.0)).unwrap();
        let r0 = residual_sup(&u_p, &h, w(1.0));
        let shifted = attach_kernel(&u_p, w(1.0), KernelCoeffs::new(2.5, -7.0)).unwrap();
        let r1 = residual_sup(&shifted, &h, w(1.0));
        assert!((r0 - r1).abs() < 1e-12);
    }

    #[test]
    fn voc_constant_forcing() {
        let g = voc_oracle(|_| 1.0, KernelCoeffs::default(), 4096).unwrap();
        let mut worst = 0.0f64;
        for k in 0..g.m() {
            let expect = 1.0 - g.theta(k).cos();
            worst = worst.max((g.values()[k] - expect).abs());
        }
        assert!(worst < 1e-8, "max error {worst}");
    }

    #[test]
    fn voc_matches_spectral_solution_after_kernel_projection() {
        let h = series(1.0, &[(2, 1.0, 0.0)]);
        let u_p = particular_solution(&h, w(1.0)).unwrap();
        let m = 4096;
        let voc = voc_oracle(|t| h.eval(t), KernelCoeffs::default(), m).unwrap();
        let spectral = synthesize(&u_p, m).unwrap();
        let diff: Vec<f64> = voc
            .values()
            .iter()
            .zip(spectral.values())
            .map(|(a, b)| a - b)
            .collect();
        // Least-squares projection of the difference onto the kernel.
        let mut alpha = 0.0;
        let mut beta = 0.0;
        for (k, d) in diff.iter().enumerate() {
            let t = voc.theta(k);
            alpha += d * t.sin();
            beta += d * t.cos();
        }
        alpha *= 2.0 / m as f64;
        beta *= 2.0 / m as f64;
        let worst = diff
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let t = voc.theta(k);
                (d - alpha * t.sin() - beta * t.cos()).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn voc_resonant_forcing_breaks_periodicity() {
        // For h = cos(theta) the wrap defect of the value vanishes identically
        // (it equals minus the sin-resonance integral), so resonance is read
        // off the slope mismatch at the wrap point, which recovers the cos
        // integral pi.
        let m = 4096;
        let g = voc_oracle(|t| t.cos(), KernelCoeffs::default(), m).unwrap();
        let delta = g.spacing();
        let forward = (g.values()[1] - g.values()[0]) / delta;
        let wrap = (g.values()[0] - g.values()[m - 1]) / delta;
        assert!(
            (wrap - forward).abs() > 0.1,
            "slope defect {} should expose the resonance",
            wrap - forward
        );
        assert!(((wrap - forward) - PI).abs() < 0.01);

        // A sin-resonance shows up directly as a value jump at the wrap point:
        // u(2 pi) - u(0) = -pi, so the last sample sits about pi below the first.
        let g = voc_oracle(|t| t.sin(), KernelCoeffs::default(), m).unwrap();
        let jump = g.values()[0] - g.values()[m - 1];
        assert!(jump.abs() > 0.1);
        assert!((jump - PI).abs() < 0.01, "jump {jump}");
    }

    #[test]
    fn residual_sup_cases() {
        let u = series(1.0, &[(2, -1.0 / 3.0, 0.0)]);
        let h = series(1.0, &[(2, 1.0, 0.0)]);
        assert!(residual_sup(&u, &h, w(1.0)) <= 1e-12);

        let one = HarmonicSeries::constant(1.0);
        assert!(residual_sup(&one, &one, w(1.0)) <= 1e-12);

        let u = series(0.0, &[(2, 1.0, 0.0)]);
        let r = residual_sup(&u, &HarmonicSeries::zero(), w(1.0));
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linearity_of_particular_solution() {
        let h1 = series(0.4, &[(2, 1.0, 0.5), (6, -0.3, 0.0)]);
        let h2 = series(-0.1, &[(3, 0.7, -0.2), (6, 0.1, 0.9)]);
        let sum = &h1 + &h2;
        let u_sum = particular_solution(&sum, w(1.0)).unwrap();
        let u1 = particular_solution(&h1, w(1.0)).unwrap();
        let u2 = particular_solution(&h2, w(1.0)).unwrap();
        assert!(u_sum.coeff_distance(&(&u1 + &u2)) < 1e-12);
    }
}
