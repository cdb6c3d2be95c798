//! Spectral core: finite trigonometric series on the circle, uniform grids,
//! discrete analysis/synthesis, termwise differentiation, circular mollification,
//! and Lipschitz-certified lower bounds valid on the whole circle.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Default sample count for certificates. Callers may raise it.
pub const DEFAULT_CERT_GRID: usize = 4096;

/// One harmonic `a cos(n theta) + b sin(n theta)` with `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, f64, f64)", into = "(u32, f64, f64)")]
pub struct Harmonic {
    pub n: u32,
    pub cos: f64,
    pub sin: f64,
}

impl From<(u32, f64, f64)> for Harmonic {
    fn from((n, cos, sin): (u32, f64, f64)) -> Self {
        Harmonic { n, cos, sin }
    }
}

impl From<Harmonic> for (u32, f64, f64) {
    fn from(h: Harmonic) -> Self {
        (h.n, h.cos, h.sin)
    }
}

/// Finite trigonometric polynomial `a0 + sum_n (a_n cos(n theta) + b_n sin(n theta))`.
///
/// Harmonic indices are distinct, at least 1, and kept sorted. Evaluation is
/// 2*pi-periodic by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct HarmonicSeries {
    a0: f64,
    harmonics: Vec<Harmonic>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    a0: f64,
    harmonics: Vec<Harmonic>,
}

impl TryFrom<SeriesRepr> for HarmonicSeries {
    type Error = Error;
    fn try_from(raw: SeriesRepr) -> Result<Self> {
        HarmonicSeries::new(raw.a0, raw.harmonics.into_iter().map(Harmonic::into))
    }
}

impl From<HarmonicSeries> for SeriesRepr {
    fn from(s: HarmonicSeries) -> Self {
        SeriesRepr { a0: s.a0, harmonics: s.harmonics }
    }
}

impl HarmonicSeries {
    /// Build a series from its mean and a list of `(n, cos, sin)` triples.
    /// Indices must be distinct and at least 1; all coefficients finite.
    pub fn new(a0: f64, harmonics: impl IntoIterator<Item = (u32, f64, f64)>) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::NonFiniteCoefficient);
        }
        // adding +0.0 canonicalizes any -0.0 coefficient
        let mut sorted: Vec<Harmonic> = harmonics
            .into_iter()
            .map(|(n, cos, sin)| Harmonic { n, cos: cos + 0.0, sin: sin + 0.0 })
            .collect();
        sorted.sort_by_key(|h| h.n);
        for (i, h) in sorted.iter().enumerate() {
            if h.n == 0 || (i > 0 && sorted[i - 1].n == h.n) {
                return Err(Error::InvalidHarmonic(h.n));
            }
            if !h.cos.is_finite() || !h.sin.is_finite() {
                return Err(Error::NonFiniteCoefficient);
            }
        }
        Ok(HarmonicSeries { a0: a0 + 0.0, harmonics: sorted })
    }

    pub fn constant(c: f64) -> Self {
        HarmonicSeries::new(c, []).expect("constant is finite")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// Highest harmonic index present (0 for a constant).
    pub fn degree(&self) -> u32 {
        self.harmonics.last().map_or(0, |h| h.n)
    }

    /// Coefficient pair `(a_n, b_n)`, zero when the harmonic is absent.
    pub fn coeff(&self, n: u32) -> (f64, f64) {
        match self.harmonics.binary_search_by_key(&n, |h| h.n) {
            Ok(i) => (self.harmonics[i].cos, self.harmonics[i].sin),
            Err(_) => (0.0, 0.0),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.a0;
        for h in &self.harmonics {
            let (s, c) = (h.n as f64 * theta).sin_cos();
            acc += h.cos * c + h.sin * s;
        }
        acc
    }

    /// `self + w * other`, merging harmonics.
    pub fn combine(&self, other: &Self, w: f64) -> Self {
        let mut map: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
        for h in &self.harmonics {
            map.insert(h.n, (h.cos, h.sin));
        }
        for h in &other.harmonics {
            let e = map.entry(h.n).or_insert((0.0, 0.0));
            e.0 += w * h.cos;
            e.1 += w * h.sin;
        }
        HarmonicSeries {
            a0: self.a0 + w * other.a0,
            harmonics: map
                .into_iter()
                .map(|(n, (cos, sin))| Harmonic { n, cos, sin })
                .collect(),
        }
    }

    pub fn scale(&self, w: f64) -> Self {
        HarmonicSeries {
            a0: w * self.a0,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic { n: h.n, cos: w * h.cos, sin: w * h.sin })
                .collect(),
        }
    }

    /// Copy with the given harmonic removed.
    pub fn without_harmonic(&self, n: u32) -> Self {
        HarmonicSeries {
            a0: self.a0,
            harmonics: self.harmonics.iter().copied().filter(|h| h.n != n).collect(),
        }
    }

    /// Copy with one harmonic replaced (or inserted; exact zeros are dropped).
    pub fn with_harmonic(&self, n: u32, cos: f64, sin: f64) -> Self {
        let mut out = self.without_harmonic(n);
        if cos != 0.0 || sin != 0.0 {
            out.harmonics.push(Harmonic { n, cos: cos + 0.0, sin: sin + 0.0 });
            out.harmonics.sort_by_key(|h| h.n);
        }
        out
    }

    /// Drop harmonics whose coefficients are both at most `threshold` in magnitude.
    pub fn prune(&self, threshold: f64) -> Self {
        HarmonicSeries {
            a0: self.a0,
            harmonics: self
                .harmonics
                .iter()
                .copied()
                .filter(|h| h.cos.abs() > threshold || h.sin.abs() > threshold)
                .collect(),
        }
    }

    /// Upper bound on |f'|: sum of n * (|a_n| + |b_n|).
    pub fn lipschitz_bound(&self) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.n as f64 * (h.cos.abs() + h.sin.abs()))
            .sum()
    }

    /// Upper bound on |f|: |a0| + sum of (|a_n| + |b_n|).
    pub fn sup_bound(&self) -> f64 {
        self.a0.abs()
            + self
                .harmonics
                .iter()
                .map(|h| h.cos.abs() + h.sin.abs())
                .sum::<f64>()
    }

    /// Largest coefficient-wise distance to another series (test helper).
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let mut d = (self.a0 - other.a0).abs();
        let top = self.degree().max(other.degree());
        for n in 1..=top {
            let (a1, b1) = self.coeff(n);
            let (a2, b2) = other.coeff(n);
            d = d.max((a1 - a2).abs()).max((b1 - b2).abs());
        }
        d
    }
}

impl std::ops::Add for &HarmonicSeries {
    type Output = HarmonicSeries;
    fn add(self, rhs: &HarmonicSeries) -> HarmonicSeries {
        self.combine(rhs, 1.0)
    }
}

impl std::ops::Sub for &HarmonicSeries {
    type Output = HarmonicSeries;
    fn sub(self, rhs: &HarmonicSeries) -> HarmonicSeries {
        self.combine(rhs, -1.0)
    }
}

/// Uniform samples `values[k] = f(2 pi k / m)` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct CircleGrid {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    m: usize,
    values: Vec<f64>,
}

impl TryFrom<GridRepr> for CircleGrid {
    type Error = Error;
    fn try_from(raw: GridRepr) -> Result<Self> {
        if raw.m != raw.values.len() {
            return Err(Error::GridLengthMismatch { header: raw.m, actual: raw.values.len() });
        }
        CircleGrid::new(raw.values)
    }
}

impl From<CircleGrid> for GridRepr {
    fn from(g: CircleGrid) -> Self {
        GridRepr { m: g.values.len(), values: g.values }
    }
}

impl CircleGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::GridTooSmall(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient);
        }
        Ok(CircleGrid { values })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..m).map(|k| f(2.0 * PI * k as f64 / m as f64)).collect();
        CircleGrid::new(values)
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m() as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.m() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.m() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Two-column `theta,value` export over [0, 2 pi).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,value\n");
        for k in 0..self.m() {
            out.push_str(&format!("{:.12e},{:.12e}\n", self.theta(k), self.values[k]));
        }
        out
    }
}

/// Smooth even bump of unit mass supported in `[-epsilon, epsilon]`.
///
/// The profile is `t -> exp(-1 / (1 - (t/eps)^2))` on its support, normalized
/// numerically so its integral is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MollifierRepr", into = "MollifierRepr")]
pub struct MollifierSpec {
    epsilon: f64,
    norm: f64,
}

#[derive(Serialize, Deserialize)]
struct MollifierRepr {
    epsilon: f64,
}

impl TryFrom<MollifierRepr> for MollifierSpec {
    type Error = Error;
    fn try_from(raw: MollifierRepr) -> Result<Self> {
        MollifierSpec::new(raw.epsilon)
    }
}

impl From<MollifierSpec> for MollifierRepr {
    fn from(m: MollifierSpec) -> Self {
        MollifierRepr { epsilon: m.epsilon }
    }
}

fn raw_bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

impl MollifierSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < PI) || !epsilon.is_finite() {
            return Err(Error::MollifierWidth(epsilon));
        }
        // Trapezoid quadrature of the raw bump over [-1, 1]; all derivatives
        // vanish at the endpoints, so this converges far below 1e-10.
        let n = 8192;
        let h = 2.0 / n as f64;
        let mut mass = 0.0;
        for i in 0..=n {
            let s = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            mass += w * raw_bump(s);
        }
        mass *= h;
        Ok(MollifierSpec { epsilon, norm: 1.0 / (mass * epsilon) })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Normalized profile value at offset `t` from the center.
    pub fn profile(&self, t: f64) -> f64 {
        self.norm * raw_bump(t / self.epsilon)
    }
}

/// Certified lower bound on a periodic function over the whole circle:
/// `certified_lower_bound = grid_min - lipschitz * spacing / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub grid_min: f64,
    pub lipschitz: f64,
    pub spacing: f64,
    pub certified_lower_bound: f64,
}

impl BoundCertificate {
    pub fn validate(&self) -> Result<()> {
        let recomputed = self.grid_min - self.lipschitz * self.spacing / 2.0;
        let scale = 1.0 + self.grid_min.abs() + self.lipschitz;
        if self.lipschitz < 0.0
            || self.certified_lower_bound > self.grid_min
            || (self.certified_lower_bound - recomputed).abs() > 1e-12 * scale
        {
            return Err(Error::Verification("bound certificate inconsistent".into()));
        }
        Ok(())
    }
}

fn fft_forward(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn fft_spectrum_to_values(mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
    let m = spectrum.len();
    FftPlanner::new().plan_fft_inverse(m).process(&mut spectrum);
    spectrum.into_iter().map(|z| z.re).collect()
}

/// Exact sample values of `f` at the m uniform nodes, choosing between the
/// spectral route and direct evaluation depending on bandwidth.
pub(crate) fn grid_values(f: &HarmonicSeries, m: usize) -> Vec<f64> {
    let deg = f.degree() as usize;
    if m > 2 * deg {
        let mut spectrum = vec![Complex::new(0.0, 0.0); m];
        spectrum[0] = Complex::new(f.a0, 0.0);
        for h in f.harmonics() {
            let n = h.n as usize;
            spectrum[n] += Complex::new(h.cos / 2.0, -h.sin / 2.0);
            spectrum[m - n] += Complex::new(h.cos / 2.0, h.sin / 2.0);
        }
        fft_spectrum_to_values(spectrum)
    } else {
        (0..m).map(|k| f.eval(2.0 * PI * k as f64 / m as f64)).collect()
    }
}

/// Sample a series on a uniform grid of `m` points. Requires `m >= 2 * degree`
/// so that the samples still determine the cosine content at every harmonic.
pub fn synthesize(f: &HarmonicSeries, m: usize) -> Result<CircleGrid> {
    if m < 2 * f.degree() as usize {
        return Err(Error::Aliasing { m, degree: f.degree() });
    }
    if m < 4 {
        return Err(Error::GridTooSmall(m));
    }
    let deg = f.degree() as usize;
    if m == 2 * deg && deg > 0 {
        // Nyquist harmonic: sin(n theta_k) vanishes at every node; fold the
        // cosine half-weights onto the single self-conjugate bin.
        let mut spectrum = vec![Complex::new(0.0, 0.0); m];
        spectrum[0] = Complex::new(f.a0, 0.0);
        for h in f.harmonics() {
            let n = h.n as usize;
            if 2 * n == m {
                spectrum[n] += Complex::new(h.cos, 0.0);
            } else {
                spectrum[n] += Complex::new(h.cos / 2.0, -h.sin / 2.0);
                spectrum[m - n] += Complex::new(h.cos / 2.0, h.sin / 2.0);
            }
        }
        return CircleGrid::new(fft_spectrum_to_values(spectrum));
    }
    CircleGrid::new(grid_values(f, m))
}

/// Trigonometric interpolation coefficients of a grid up to degree `n_max`.
/// Inverse of [`synthesize`] on series of degree at most `n_max < m/2`.
pub fn analyze(g: &CircleGrid, n_max: u32) -> Result<HarmonicSeries> {
    let m = g.m();
    if 2 * n_max as usize >= m {
        return Err(Error::AnalysisBandwidth { n_max, m });
    }
    let spectrum = fft_forward(g.values());
    let scale = 1.0 / m as f64;
    let a0 = spectrum[0].re * scale;
    let harmonics = (1..=n_max as usize)
        .map(|n| (n as u32, 2.0 * spectrum[n].re * scale, -2.0 * spectrum[n].im * scale));
    HarmonicSeries::new(a0, harmonics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Termwise derivative: order one maps `(a, b) -> (n b, -n a)`, order two maps
/// `(a, b) -> (-n^2 a, -n^2 b)`; the mean always drops to zero.
pub fn differentiate(f: &HarmonicSeries, order: DerivativeOrder) -> HarmonicSeries {
    let harmonics = f.harmonics().iter().map(|h| {
        let n = h.n as f64;
        match order {
            DerivativeOrder::First => (h.n, n * h.sin, -n * h.cos),
            DerivativeOrder::Second => (h.n, -n * n * h.cos, -n * n * h.sin),
        }
    });
    HarmonicSeries::new(0.0, harmonics).expect("termwise derivative stays finite")
}

/// Discrete circular convolution with a mollifier:
/// `out[k] = sum_j g[k-j] phi(theta_j) delta`, with the weights renormalized so
/// that a constant grid maps to itself exactly.
pub fn circular_convolve(g: &CircleGrid, phi: &MollifierSpec) -> Result<CircleGrid> {
    let m = g.m();
    let delta = g.spacing();
    if phi.epsilon() < 2.0 * delta {
        return Err(Error::MollifierUnderResolved { epsilon: phi.epsilon(), spacing: delta });
    }
    let half = (phi.epsilon() / delta).ceil() as usize;
    let half = half.min(m / 2);
    let offsets: Vec<i64> = (-(half as i64)..=half as i64).collect();
    let mut weights: Vec<f64> = offsets.iter().map(|&j| phi.profile(j as f64 * delta)).collect();
    let mass: f64 = weights.iter().sum::<f64>() * delta;
    for w in &mut weights {
        *w /= mass;
    }
    let values = (0..m as i64)
        .map(|k| {
            offsets
                .iter()
                .zip(&weights)
                .map(|(&j, &w)| g.values()[(k - j).rem_euclid(m as i64) as usize] * w * delta)
                .sum()
        })
        .collect();
    CircleGrid::new(values)
}

/// Grid minimum plus Lipschitz correction: the returned bound is valid for
/// every `theta`, not just the sample points.
pub fn certified_lower_bound(f: &HarmonicSeries, m: usize) -> Result<BoundCertificate> {
    if m < 4 {
        return Err(Error::GridTooSmall(m));
    }
    let values = grid_values(f, m);
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let lipschitz = f.lipschitz_bound();
    let spacing = 2.0 * PI / m as f64;
    Ok(BoundCertificate {
        grid_min,
        lipschitz,
        spacing,
        certified_lower_bound: grid_min - lipschitz * spacing / 2.0,
    })
}

/// Smallest power-of-two grid whose Lipschitz slack `L * spacing / 2` is at
/// most `target / 2`, clamped to `[m_floor, 1 << 23]`.
pub(crate) fn certificate_grid(lipschitz: f64, target: f64, m_floor: usize) -> usize {
    let needed = (2.0 * PI * lipschitz / target).ceil().max(4.0);
    let mut m = m_floor.max(4).next_power_of_two();
    while (m as f64) < needed && m < (1 << 23) {
        m *= 2;
    }
    m
}
