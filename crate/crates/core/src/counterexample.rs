//! Construction and full verification of forcings with positive sign but no
//! everywhere-positive periodic solution at integer omega >= 3, plus the
//! symmetry bookkeeping and the randomized omega = 2 exploration.

use crate::error::{Error, Result};
use crate::oscillator::{
    default_resonance_tolerance, forcing_for, particular_solution, resonance_check, Frequency,
    ResonanceReport,
};
use crate::positivity::{nonexistence_search, positivity_margin, NonexistenceCertificate};
use crate::trig::{
    analyze, certificate_grid, certified_lower_bound, circular_convolve, grid_values,
    BoundCertificate, CircleGrid, HarmonicSeries, MollifierSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Slack target for the whole-circle positivity certificate of the forcing.
const H_CERT_TARGET: f64 = 1e-3;
/// Coefficients below this threshold are dropped from the projected forcing.
const PRUNE_TOL: f64 = 1e-12;
/// Analysis bandwidth cap for the mollified construction.
const MAX_BANDWIDTH: u32 = 2048;

/// The base profile of the construction, extended by periodicity:
/// `1/2 - cos(omega theta)` on `|theta| <= pi/omega`, the plateau `3/2` up to
/// `2 pi/omega`, and `1/2 + cos(omega theta)` out to `pi`.
pub fn u_star_eval(omega: u32, theta: f64) -> f64 {
    let w = omega as f64;
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    let a = t.abs();
    if a <= PI / w {
        0.5 - (w * t).cos()
    } else if a <= 2.0 * PI / w {
        1.5
    } else {
        0.5 + (w * t).cos()
    }
}

/// Samples of the piecewise profile. Junction nodes take the common value of
/// the adjacent pieces (the profile is C^1).
pub fn u_star_piecewise(omega: u32, m: usize) -> Result<CircleGrid> {
    if omega < 3 {
        return Err(Error::OmegaBelowThree(omega));
    }
    if m < 1024 {
        return Err(Error::CoarseGrid(m));
    }
    CircleGrid::from_fn(m, |theta| u_star_eval(omega, theta))
}

/// The exact trigonometric variant for omega = 3: `1 - 2 cos(2 theta) - cos(4 theta)`.
pub fn u_star_trigpoly() -> HarmonicSeries {
    HarmonicSeries::new(1.0, [(2, -2.0, 0.0), (4, -1.0, 0.0)]).expect("fixed coefficients")
}

/// The profile underlying a counterexample: exact series for the omega = 3
/// trigonometric variant, mollified grid otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UStar {
    Series(HarmonicSeries),
    Grid(CircleGrid),
}

impl UStar {
    /// A series view of the profile for evaluation anywhere on the circle.
    pub fn as_series(&self) -> Result<HarmonicSeries> {
        match self {
            UStar::Series(s) => Ok(s.clone()),
            UStar::Grid(g) => {
                let n_max = (MAX_BANDWIDTH as usize).min(g.m() / 2 - 1) as u32;
                analyze(g, n_max)
            }
        }
    }
}

/// A forcing for integer omega >= 3 together with everything needed to check
/// it: positivity certificate, resonance report, and a nonexistence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleBundle {
    pub omega: u32,
    pub u_star: UStar,
    pub h: HarmonicSeries,
    pub h_positivity: BoundCertificate,
    pub resonance: ResonanceReport,
    pub nonexistence: NonexistenceCertificate,
    pub mollifier: Option<MollifierSpec>,
}

fn verify_forcing(
    omega: u32,
    h: &HarmonicSeries,
) -> Result<(BoundCertificate, ResonanceReport, NonexistenceCertificate)> {
    let w = Frequency::new(omega as f64)?;
    let m_cert = certificate_grid(h.lipschitz_bound(), H_CERT_TARGET, 8192);
    let h_positivity = certified_lower_bound(h, m_cert)?;
    if h_positivity.certified_lower_bound <= 0.0 {
        return Err(Error::Verification(format!(
            "forcing positivity not certified: bound {}",
            h_positivity.certified_lower_bound
        )));
    }
    let resonance = resonance_check(h, w, default_resonance_tolerance(h));
    if !resonance.passes {
        return Err(Error::Verification(format!(
            "resonance check failed: ({}, {})",
            resonance.cos_coeff, resonance.sin_coeff
        )));
    }
    let u_p = particular_solution(h, w)?;
    let nonexistence = nonexistence_search(&u_p, w)?.ok_or_else(|| {
        Error::Verification("no nonexistence pair found".into())
    })?;
    if nonexistence.sum >= -0.5 {
        return Err(Error::Verification(format!(
            "nonexistence sum {} is not below -1/2",
            nonexistence.sum
        )));
    }
    Ok((h_positivity, resonance, nonexistence))
}

/// Build a fully verified counterexample bundle.
///
/// With `epsilon = None` and omega = 3 the exact trigonometric variant is
/// used. Otherwise the piecewise profile is sampled on `m` nodes, mollified by
/// the bump of half-width `epsilon` (default `pi / (4 omega)`), projected to a
/// series, and pushed through the oscillator operator termwise; the half-width
/// must stay below `pi / (3 omega)` so the profile keeps its sign at the two
/// test points.
pub fn build_counterexample(
    omega: u32,
    epsilon: Option<f64>,
    m: usize,
) -> Result<CounterexampleBundle> {
    if omega < 3 {
        return Err(Error::OmegaBelowThree(omega));
    }
    let w = Frequency::new(omega as f64)?;

    if epsilon.is_none() && omega == 3 {
        let u = u_star_trigpoly();
        let h = forcing_for(&u, w);
        let (h_positivity, resonance, nonexistence) = verify_forcing(omega, &h)?;
        return Ok(CounterexampleBundle {
            omega,
            u_star: UStar::Series(u),
            h,
            h_positivity,
            resonance,
            nonexistence,
            mollifier: None,
        });
    }

    let eps_max = PI / (3.0 * omega as f64);
    let eps = epsilon.unwrap_or(PI / (4.0 * omega as f64));
    if !(eps > 0.0 && eps < eps_max) {
        return Err(Error::EpsilonOutOfRange { epsilon: eps, max: eps_max });
    }
    let grid = u_star_piecewise(omega, m)?;
    let phi = MollifierSpec::new(eps)?;
    let mollified = circular_convolve(&grid, &phi)?;
    let n_max = (MAX_BANDWIDTH as usize).min(m / 2 - 1) as u32;
    let u_series = analyze(&mollified, n_max)?;
    let h = forcing_for(&u_series, w).prune(PRUNE_TOL);

    // The discrete convolution is a convex combination of samples whose
    // minimum is exactly omega^2/2, so the projected forcing may not dip
    // below it on the construction grid beyond roundoff and truncation.
    let floor = omega as f64 * omega as f64 / 2.0;
    let h_grid_min = grid_values(&h, m).iter().copied().fold(f64::INFINITY, f64::min);
    if h_grid_min < floor - 1e-6 {
        return Err(Error::Verification(format!(
            "mollified forcing grid min {h_grid_min} below {floor} - 1e-6"
        )));
    }

    let (h_positivity, resonance, nonexistence) = verify_forcing(omega, &h)?;
    Ok(CounterexampleBundle {
        omega,
        u_star: UStar::Grid(mollified),
        h,
        h_positivity,
        resonance,
        nonexistence,
        mollifier: Some(phi),
    })
}

impl CounterexampleBundle {
    /// Recompute all three certificates from the stored forcing and check them
    /// against the stored copies. Bundles re-verify on load.
    pub fn verify(&self) -> Result<()> {
        let (h_positivity, resonance, nonexistence) = verify_forcing(self.omega, &self.h)?;
        self.h_positivity.validate()?;
        self.resonance.validate()?;
        let w = Frequency::new(self.omega as f64)?;
        self.nonexistence.validate(w)?;
        let consistent = (h_positivity.certified_lower_bound
            - self.h_positivity.certified_lower_bound)
            .abs()
            < 1e-9
            && (resonance.cos_coeff - self.resonance.cos_coeff).abs() < 1e-12
            && (resonance.sin_coeff - self.resonance.sin_coeff).abs() < 1e-12
            && (nonexistence.sum - self.nonexistence.sum).abs() < 1e-9;
        if !consistent {
            return Err(Error::Verification(
                "stored certificates disagree with recomputation".into(),
            ));
        }
        Ok(())
    }

    /// Two-column `theta,u_star` export over `[-pi, pi)`, centered like the
    /// usual plot of the profile.
    pub fn u_star_csv(&self) -> String {
        let mut out = String::from("theta,u_star\n");
        match &self.u_star {
            UStar::Grid(g) => {
                let m = g.m();
                for k in 0..m {
                    let idx = (k + m / 2) % m;
                    let theta = g.theta(idx) - if idx >= m / 2 { 2.0 * PI } else { 0.0 };
                    out.push_str(&format!("{:.12e},{:.12e}\n", theta, g.values()[idx]));
                }
            }
            UStar::Series(s) => {
                let m = 2048;
                for k in 0..m {
                    let theta = -PI + 2.0 * PI * k as f64 / m as f64;
                    out.push_str(&format!("{:.12e},{:.12e}\n", theta, s.eval(theta)));
                }
            }
        }
        out
    }
}

/// Symmetry defects of the profile and the first two harmonic integrals of the
/// forcing. The harmonic-1 integrals must vanish for the construction; the
/// harmonic-2 integrals are reported without any claim attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub omega: u32,
    /// max over the grid of |u(-theta) - u(theta)|
    pub evenness_defect: f64,
    /// max of |u(pi/2 + theta) - u(pi/2 - theta)|, reported for omega = 3 only
    pub half_turn_defect: Option<f64>,
    pub h_cos1_integral: f64,
    pub h_sin1_integral: f64,
    pub h_cos2_integral: f64,
    pub h_sin2_integral: f64,
}

pub fn symmetry_and_open_question_report(bundle: &CounterexampleBundle) -> Result<SymmetryReport> {
    let u = bundle.u_star.as_series()?;
    let m = 4096;
    let mut evenness_defect = 0.0f64;
    let mut half_turn = 0.0f64;
    for k in 0..m {
        let theta = 2.0 * PI * k as f64 / m as f64;
        evenness_defect = evenness_defect.max((u.eval(-theta) - u.eval(theta)).abs());
        half_turn = half_turn.max((u.eval(PI / 2.0 + theta) - u.eval(PI / 2.0 - theta)).abs());
    }
    let (a1, b1) = bundle.h.coeff(1);
    let (a2, b2) = bundle.h.coeff(2);
    Ok(SymmetryReport {
        omega: bundle.omega,
        evenness_defect,
        half_turn_defect: (bundle.omega == 3).then_some(half_turn),
        h_cos1_integral: PI * a1,
        h_sin1_integral: PI * b1,
        h_cos2_integral: PI * a2,
        h_sin2_integral: PI * b2,
    })
}

/// One accepted omega = 2 exploration candidate: an even cosine polynomial
/// (harmonic 2 excluded) whose forcing is certified positive, together with
/// the max-min margin of its canonical particular solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub trial: u32,
    pub candidate: HarmonicSeries,
    pub h_certified_min: f64,
    pub margin: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Evidence record of a randomized search at omega = 2. No verdict attached:
/// the margin distribution is reported as observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub seed: u64,
    pub trials: u32,
    pub degree: u32,
    pub grid_m: usize,
    pub accepted: Vec<CandidateRecord>,
    pub most_negative_margin: Option<f64>,
    pub most_negative_trial: Option<u32>,
}

/// Assess one omega = 2 candidate: certify positivity of `u'' + 4 u` and, when
/// it holds, report the margin of the canonical particular solution. The
/// candidate must avoid harmonic 2 so nonresonance is structural.
pub fn assess_omega2_candidate(
    u_cand: &HarmonicSeries,
    grid_m: usize,
) -> Result<Option<(f64, crate::positivity::MarginReport)>> {
    let w = Frequency::new(2.0)?;
    let h = forcing_for(u_cand, w);
    let cert = certified_lower_bound(&h, grid_m)?;
    if cert.certified_lower_bound <= 0.0 {
        return Ok(None);
    }
    let report = resonance_check(&h, w, default_resonance_tolerance(&h));
    debug_assert!(report.passes, "harmonic 2 must be structurally absent");
    let u_p = particular_solution(&h, w)?;
    let margin = positivity_margin(&u_p, w, grid_m)?;
    Ok(Some((cert.certified_lower_bound, margin)))
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    // splitmix-style per-trial stream so trials stay independent of ordering
    let mixed = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Randomized search for omega = 2 evidence: sample even cosine polynomials
/// with harmonic 2 excluded, keep those whose forcing is certified positive,
/// and record the kernel margin of each. Deterministic for a fixed seed.
pub fn explore_omega2(seed: u64, trials: u32, degree: u32) -> Result<ExplorationReport> {
    if degree > 16 {
        return Err(Error::DegreeTooLarge(degree));
    }
    let grid_m = 2048;
    let mut accepted = Vec::new();
    let mut most_negative: Option<(f64, u32)> = None;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let a0 = rng.gen_range(0.5..2.0);
        let harmonics: Vec<(u32, f64, f64)> = (1..=degree)
            .filter(|&n| n != 2)
            .map(|n| {
                let amp = a0 / (n as f64 * n as f64);
                (n, rng.gen_range(-amp..amp), 0.0)
            })
            .collect();
        let u_cand = HarmonicSeries::new(a0, harmonics)?;
        if let Some((h_min, margin)) = assess_omega2_candidate(&u_cand, grid_m)? {
            if most_negative.is_none_or(|(best, _)| margin.margin < best) {
                most_negative = Some((margin.margin, trial));
            }
            accepted.push(CandidateRecord {
                trial,
                candidate: u_cand,
                h_certified_min: h_min,
                margin: margin.margin,
                alpha: margin.optimizer.alpha,
                beta: margin.optimizer.beta,
            });
        }
    }
    Ok(ExplorationReport {
        seed,
        trials,
        degree,
        grid_m,
        accepted,
        most_negative_margin: most_negative.map(|(v, _)| v),
        most_negative_trial: most_negative.map(|(_, t)| t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::synthesize;

    #[test]
    fn u_star_fixed_values() {
        for omega in [3u32, 4, 5, 6] {
            let w = omega as f64;
            assert!((u_star_eval(omega, 0.0) + 0.5).abs() < 1e-15);
            assert!((u_star_eval(omega, PI / w) - 1.5).abs() < 1e-12);
            assert!((u_star_eval(omega, 3.0 * PI / w) + 0.5).abs() < 1e-12);
            // evenness and periodicity
            for theta in [0.3, 1.1, 2.9] {
                assert!((u_star_eval(omega, -theta) - u_star_eval(omega, theta)).abs() < 1e-12);
                assert!(
                    (u_star_eval(omega, theta + 2.0 * PI) - u_star_eval(omega, theta)).abs()
                        < 1e-12
                );
            }
        }
        assert!(u_star_piecewise(2, 4096).is_err());
        assert!(u_star_piecewise(3, 512).is_err());
    }

    #[test]
    fn u_star_trigpoly_conditions() {
        let u = u_star_trigpoly();
        assert!((u.eval(0.0) + 2.0).abs() < 1e-14);
        assert!((u.eval(PI) + 2.0).abs() < 1e-14);
        // condition (i): min of u'' + 9u is 3/14, via the quadratic in cos(2t)
        let w = Frequency::new(3.0).unwrap();
        let h = forcing_for(&u, w);
        let cert = certified_lower_bound(&h, 1 << 16).unwrap();
        assert!(cert.certified_lower_bound > 0.0);
        assert!((cert.grid_min - 3.0 / 14.0).abs() < 1e-6);
    }

    #[test]
    fn unmollified_pieces_satisfy_operator_identity() {
        // On each smooth piece the closed-form second derivative gives
        // u'' + omega^2 u equal to omega^2/2 on the arcs and 3 omega^2/2 on the
        // plateaus; check at grid nodes at least 2 delta away from junctions.
        for omega in [3u32, 5] {
            let w = omega as f64;
            let m = 4096;
            let delta = 2.0 * PI / m as f64;
            let junctions: Vec<f64> = (1..=(2 * omega))
                .flat_map(|i| {
                    let base = i as f64 * PI / w;
                    [base, -base]
                })
                .collect();
            for k in 0..m {
                let theta = (2.0 * PI * k as f64 / m as f64 + PI).rem_euclid(2.0 * PI) - PI;
                if junctions
                    .iter()
                    .any(|j| (theta - j).abs() < 2.0 * delta || (theta - j).abs() > 2.0 * PI - 2.0 * delta)
                {
                    continue;
                }
                let a = theta.abs();
                let (upp, expected) = if a < PI / w {
                    (w * w * (w * theta).cos(), w * w / 2.0)
                } else if a < 2.0 * PI / w {
                    (0.0, 3.0 * w * w / 2.0)
                } else {
                    (-w * w * (w * theta).cos(), w * w / 2.0)
                };
                let residual = upp + w * w * u_star_eval(omega, theta) - expected;
                assert!(residual.abs() < 1e-9, "omega={omega} theta={theta}: {residual}");
            }
        }
    }

    #[test]
    fn piecewise_grid_is_c1_at_junctions() {
        let omega = 4u32;
        let m = 8192;
        let g = u_star_piecewise(omega, m).unwrap();
        let delta = g.spacing();
        // slopes on adjacent intervals differ by O(delta) everywhere,
        // junctions included: no derivative jump
        let mut worst = 0.0f64;
        for k in 0..m {
            let s1 = (g.values()[(k + 1) % m] - g.values()[k]) / delta;
            let s2 = (g.values()[(k + 2) % m] - g.values()[(k + 1) % m]) / delta;
            worst = worst.max((s2 - s1).abs());
        }
        let curvature_scale = (omega * omega) as f64;
        assert!(worst < 3.0 * curvature_scale * delta, "worst slope jump {worst}");
    }

    #[test]
    fn build_trigpoly_omega3() {
        let bundle = build_counterexample(3, None, 8192).unwrap();
        assert!(matches!(bundle.u_star, UStar::Series(_)));
        assert!(bundle.mollifier.is_none());
        assert!((bundle.h_positivity.certified_lower_bound - 3.0 / 14.0).abs() < 1e-3);
        assert!(bundle.resonance.passes);
        assert!((bundle.nonexistence.sum + 4.0).abs() < 1e-9);
        bundle.verify().unwrap();
    }

    #[test]
    fn build_mollified_omega4() {
        let bundle = build_counterexample(4, Some(PI / 16.0), 8192).unwrap();
        assert!(bundle.h_positivity.certified_lower_bound >= 8.0 - 1e-3);
        let u = bundle.u_star.as_series().unwrap();
        assert!(u.eval(0.0) < -0.4, "mollified trough {}", u.eval(0.0));
        assert!(bundle.resonance.passes);
        assert!(bundle.nonexistence.sum < -0.6);
        assert!((bundle.nonexistence.sum + 1.0).abs() < 0.35);
    }

    #[test]
    fn build_rejects_bad_epsilon_and_omega() {
        assert!(matches!(
            build_counterexample(3, Some(PI / 8.0), 8192),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(matches!(build_counterexample(2, None, 8192), Err(Error::OmegaBelowThree(2))));
    }

    #[test]
    fn mollification_commutes_with_operator() {
        // Mollify-then-operate equals operate-then-mollify on the grid: both
        // routes are diagonal in the discrete Fourier basis.
        let omega = 4u32;
        let w = Frequency::new(omega as f64).unwrap();
        let m = 4096;
        let n_max = (m / 2 - 1) as u32;
        let grid = u_star_piecewise(omega, m).unwrap();
        let phi = MollifierSpec::new(PI / 16.0).unwrap();

        let route_a = {
            let u_m = circular_convolve(&grid, &phi).unwrap();
            synthesize(&forcing_for(&analyze(&u_m, n_max).unwrap(), w), m).unwrap()
        };
        let route_b = {
            let h_grid = synthesize(&forcing_for(&analyze(&grid, n_max).unwrap(), w), m).unwrap();
            circular_convolve(&h_grid, &phi).unwrap()
        };
        let worst = route_a
            .values()
            .iter()
            .zip(route_b.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-8, "routes differ by {worst}");
    }

    #[test]
    fn symmetry_report_trigpoly() {
        let bundle = build_counterexample(3, None, 8192).unwrap();
        let report = symmetry_and_open_question_report(&bundle).unwrap();
        assert!(report.evenness_defect < 1e-12);
        assert!(report.half_turn_defect.unwrap() < 1e-12);
        assert!(report.h_cos1_integral.abs() < 1e-10);
        assert!(report.h_sin1_integral.abs() < 1e-10);
        // h = 9 - 10 cos(2t) + 7 cos(4t): the cos(2t) integral is -10 pi.
        assert!((report.h_cos2_integral + 10.0 * PI).abs() < 1e-9);
        assert!(report.h_sin2_integral.abs() < 1e-10);
    }

    #[test]
    fn symmetry_report_mollified() {
        let bundle = build_counterexample(3, Some(PI / 12.0), 8192).unwrap();
        let report = symmetry_and_open_question_report(&bundle).unwrap();
        assert!(report.evenness_defect < 1e-9);
        assert!(report.h_cos1_integral.abs() < 1e-9);
        assert!(report.h_sin1_integral.abs() < 1e-9);
    }

    #[test]
    fn explore_rejects_known_negative_candidate() {
        // u = 1 - 2 cos(2t) - cos(4t) maps to u'' + 4u = 4 + 12 cos(4t): the
        // operator annihilates the resonant harmonic and the min is -8 < 0.
        let u = u_star_trigpoly();
        let w = Frequency::new(2.0).unwrap();
        let h = forcing_for(&u, w);
        assert_eq!(h.coeff(2), (0.0, 0.0));
        let cert = certified_lower_bound(&h, 4096).unwrap();
        assert!((cert.grid_min + 8.0).abs() < 1e-9);
        assert!(assess_omega2_candidate(&u, 4096).unwrap().is_none());
    }

    #[test]
    fn explore_is_deterministic() {
        let a = explore_omega2(42, 50, 8).unwrap();
        let b = explore_omega2(42, 50, 8).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(explore_omega2(1, 10, 17).is_err());
        let empty = explore_omega2(1, 0, 8).unwrap();
        assert!(empty.accepted.is_empty());
        assert!(empty.most_negative_margin.is_none());
    }

    #[test]
    fn explore_accepted_candidates_are_valid() {
        let report = explore_omega2(7, 40, 8).unwrap();
        assert!(!report.accepted.is_empty(), "generator should accept some candidates");
        let w = Frequency::new(2.0).unwrap();
        for rec in &report.accepted {
            let h = forcing_for(&rec.candidate, w);
            assert!(rec.h_certified_min > 0.0);
            assert!(resonance_check(&h, w, 1e-9).passes);
            assert_eq!(rec.candidate.coeff(2), (0.0, 0.0));
        }
    }
}
