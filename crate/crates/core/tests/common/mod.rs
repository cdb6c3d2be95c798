//! Shared oracles and generators for the integration suites. Everything here
//! is independent of the implementation paths it is used to check: finite
//! differences for Hessians, dense sampling plus golden-section for minima,
//! and least-squares projections for kernel comparisons.

#![allow(dead_code)]

use oscert::homogeneous::HomogeneousLift;
use oscert::trig::{analyze, synthesize, CircleGrid};
use oscert::HarmonicSeries;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn series(a0: f64, h: &[(u32, f64, f64)]) -> HarmonicSeries {
    HarmonicSeries::new(a0, h.iter().copied()).unwrap()
}

/// Random trig polynomial with coefficients of size about `amp / n`.
pub fn random_series(rng: &mut ChaCha8Rng, degree: u32, amp: f64) -> HarmonicSeries {
    let a0 = rng.gen_range(-amp..amp);
    let harmonics: Vec<(u32, f64, f64)> = (1..=degree)
        .map(|n| {
            let s = amp / n as f64;
            (n, rng.gen_range(-s..s), rng.gen_range(-s..s))
        })
        .collect();
    HarmonicSeries::new(a0, harmonics).unwrap()
}

/// Exact square of a trig polynomial, via an alias-free grid.
pub fn square_series(g: &HarmonicSeries) -> HarmonicSeries {
    let target_degree = 2 * g.degree();
    let m = (4 * (target_degree as usize).max(1)).next_power_of_two().max(64);
    let grid = synthesize(g, m).unwrap();
    let squared: Vec<f64> = grid.values().iter().map(|v| v * v).collect();
    analyze(&CircleGrid::new(squared).unwrap(), target_degree.max(1)).unwrap()
}

/// One valid instance for the omega = 1 pipeline: `h = g^2 + 1e-3` with the
/// first harmonic removed, accepted only when a dense independent sample
/// keeps `h` clearly nonnegative (removing the harmonic can break the sign).
pub fn positivity_pipeline_instance(rng: &mut ChaCha8Rng) -> Option<HarmonicSeries> {
    let g = random_series(rng, 4, 1.0);
    let squared = square_series(&g);
    let lifted = HarmonicSeries::new(squared.a0() + 1e-3, squared.harmonics().iter().map(|h| (h.n, h.cos, h.sin))).unwrap();
    let h = lifted.without_harmonic(1);
    let dense = synthesize(&h, 16384).unwrap();
    (dense.min() >= 1e-6).then_some(h)
}

/// Draw instances until `count` of them pass the independent filter.
pub fn positivity_pipeline_instances(seed: u64, count: usize) -> Vec<HarmonicSeries> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        assert!(draws < 100 * count, "instance generator starved");
        if let Some(h) = positivity_pipeline_instance(&mut rng) {
            out.push(h);
        }
    }
    out
}

/// Central finite-difference Hessian of the lift at `r e^{i theta}` in the
/// rotated orthonormal frame (radial, tangential).
pub fn fd_hessian_rotated(
    lift: &HomogeneousLift,
    theta: f64,
    r: f64,
    step: f64,
) -> [[f64; 2]; 2] {
    let (sin_t, cos_t) = theta.sin_cos();
    let e1 = (cos_t, sin_t);
    let e2 = (-sin_t, cos_t);
    let p = (r * cos_t, r * sin_t);
    let f = |s: f64, t: f64| lift.eval(p.0 + s * e1.0 + t * e2.0, p.1 + s * e1.1 + t * e2.1);
    let h = step;
    let d11 = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
    let d22 = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
    let d12 =
        (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    [[d11, d12], [d12, d22]]
}

/// Sup distance between two grids after removing the best-fitting element of
/// `span{sin, cos}` from their difference (discrete least squares).
pub fn kernel_projected_distance(a: &CircleGrid, b: &CircleGrid) -> f64 {
    assert_eq!(a.m(), b.m());
    let m = a.m();
    let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    let mut alpha = 0.0;
    let mut beta = 0.0;
    for (k, d) in diff.iter().enumerate() {
        let t = 2.0 * PI * k as f64 / m as f64;
        alpha += d * t.sin();
        beta += d * t.cos();
    }
    alpha *= 2.0 / m as f64;
    beta *= 2.0 / m as f64;
    diff.iter()
        .enumerate()
        .map(|(k, d)| {
            let t = 2.0 * PI * k as f64 / m as f64;
            (d - alpha * t.sin() - beta * t.cos()).abs()
        })
        .fold(0.0f64, f64::max)
}

/// Golden-section refinement of a local minimum inside `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 {
        if f1 <= f2 {
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
    (mid, f(mid))
}

/// Dense-grid argmin refined by golden section: an independent route to the
/// true minimum of a smooth series.
pub fn refined_min(f: &HarmonicSeries, m: usize) -> f64 {
    let grid = synthesize(f, m).unwrap();
    let (k_min, _) = grid
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let delta = grid.spacing();
    let center = grid.theta(k_min);
    let (_, value) = golden_min(|t| f.eval(t), center - delta, center + delta);
    value
}
