//! Phasor vectors, random modular base vectors, fractional power encoding, similarity,
//! Hadamard binding, phase normalization and von Mises phase noise.
//!
//! A [`PhasorVector`] comes in two forms with identical semantics:
//!
//! * [`ExactPhasor`]: component `j` is `exp(2πi k_j / L)` stored as the integer `k_j`
//!   modulo a common period `L`. All integer algebra on this form is bit-exact.
//! * [`ComplexVector`]: planar `f64` real/imaginary parts, used for rational encodings,
//!   noisy vectors and resonator internals.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::lcm_checked;
use crate::seed;

/// Components with magnitude at or below this floor are treated as zero by
/// [`ComplexVector::normalize_phase`] and mapped to `1 + 0i`.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Tolerance on `|z_j|` for a dense vector to count as a phasor vector.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A complex vector in planar layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self { re: vec![0.0; dim], im: vec![0.0; dim] }
    }

    /// The all-ones vector, i.e. the binding identity.
    pub fn ones(dim: usize) -> Self {
        Self { re: vec![1.0; dim], im: vec![0.0; dim] }
    }

    pub fn from_parts(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { left: re.len(), right: im.len() });
        }
        Ok(Self { re, im })
    }

    /// `exp(i θ_j)` for each phase.
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        let (re, im) = phases.into_iter().map(unit_phasor).unzip();
        Self { re, im }
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        let (re, im) = values.iter().map(|z| (z.re, z.im)).unzip();
        Self { re, im }
    }

    /// Uniformly random phasor vector.
    pub fn random_phasor(dim: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        Self::from_phases((0..dim).map(|_| rng.random_range(-PI..PI)))
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn get(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j], self.im[j])
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    /// `Σ_j self_j · conj(other_j)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..self.re.len() {
            let (ar, ai, br, bi) = (self.re[j], self.im[j], other.re[j], other.im[j]);
            re += ar * br + ai * bi;
            im += ai * br - ar * bi;
        }
        Complex64::new(re, im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(r, i)| r * r + i * i).sum()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.iter().map(|v| -v).collect() }
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.hadamard_assign(other)?;
        Ok(out)
    }

    pub fn hadamard_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        self.mul_assign_unchecked(other, false);
        Ok(())
    }

    /// `self ⊙= conj(other)`.
    pub fn hadamard_conj_assign(&mut self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        self.mul_assign_unchecked(other, true);
        Ok(())
    }

    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self, conj: bool) {
        let s = if conj { -1.0 } else { 1.0 };
        for j in 0..self.re.len() {
            let (ar, ai, br, bi) = (self.re[j], self.im[j], other.re[j], s * other.im[j]);
            self.re[j] = ar * br - ai * bi;
            self.im[j] = ar * bi + ai * br;
        }
    }

    /// `self += c · x`.
    pub fn add_scaled(&mut self, c: Complex64, x: &Self) -> Result<()> {
        self.check_dim(x)?;
        self.add_scaled_unchecked(c, x);
        Ok(())
    }

    pub(crate) fn add_scaled_unchecked(&mut self, c: Complex64, x: &Self) {
        for j in 0..self.re.len() {
            let (xr, xi) = (x.re[j], x.im[j]);
            self.re[j] += c.re * xr - c.im * xi;
            self.im[j] += c.re * xi + c.im * xr;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.re.iter_mut().chain(self.im.iter_mut()).for_each(|v| *v *= s);
    }

    /// Divide every component by its magnitude; components at or below
    /// [`ZERO_FLOOR`] become `1 + 0i`.
    pub fn normalize_phase(&mut self) {
        for j in 0..self.re.len() {
            let mag = self.re[j].hypot(self.im[j]);
            if mag <= ZERO_FLOOR {
                self.re[j] = 1.0;
                self.im[j] = 0.0;
            } else {
                self.re[j] /= mag;
                self.im[j] /= mag;
            }
        }
    }

    /// Like [`normalize_phase`](Self::normalize_phase), but the floor is `rel` times
    /// the largest magnitude. Cancellations in superpositions leave rounding residue
    /// well above an absolute floor; this maps them to `1 + 0i` as well.
    pub(crate) fn normalize_phase_relative(&mut self, rel: f64) {
        let peak = self.re.iter().zip(&self.im).map(|(r, i)| r.hypot(*i)).fold(0.0, f64::max);
        let floor = (rel * peak).max(ZERO_FLOOR);
        for j in 0..self.re.len() {
            let mag = self.re[j].hypot(self.im[j]);
            if mag <= floor {
                self.re[j] = 1.0;
                self.im[j] = 0.0;
            } else {
                self.re[j] /= mag;
                self.im[j] /= mag;
            }
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.re, &mut self.im)
    }

    /// Whether every component has magnitude within `tol` of one.
    pub fn is_unit(&self, tol: f64) -> bool {
        self.re.iter().zip(&self.im).all(|(r, i)| (r.hypot(*i) - 1.0).abs() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }
}

/// Phasor vector with phases `2π k_j / period`, stored as integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactPhasor {
    period: u64,
    indices: Vec<u64>,
}

impl ExactPhasor {
    pub fn new(period: u64, indices: Vec<u64>) -> Result<Self> {
        if period == 0 {
            return Err(invalid("period must be positive"));
        }
        if let Some(k) = indices.iter().find(|&&k| k >= period) {
            return Err(invalid(format!("phase index {k} not below period {period}")));
        }
        Ok(Self { period, indices })
    }

    /// The identity (all phases zero) with period 1.
    pub fn identity(dim: usize) -> Self {
        Self { period: 1, indices: vec![0; dim] }
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn to_dense(&self) -> ComplexVector {
        let l = self.period as f64;
        ComplexVector::from_phases(self.indices.iter().map(|&k| TAU * (k as f64) / l))
    }

    /// Restate the vector with a period that is a multiple of the current one.
    pub fn with_period(&self, period: u64) -> Result<Self> {
        if !period.is_multiple_of(self.period) {
            return Err(Error::PeriodMismatch { left: self.period, right: period });
        }
        let f = period / self.period;
        Ok(Self { period, indices: self.indices.iter().map(|&k| k * f).collect() })
    }

    /// Componentwise integer power, `z ↦ z^e`.
    pub fn pow(&self, e: i64) -> Self {
        let l = self.period as i128;
        let e = (e as i128).rem_euclid(l);
        let indices = self.indices.iter().map(|&k| ((k as i128 * e) % l) as u64).collect();
        Self { period: self.period, indices }
    }

    pub fn conj(&self) -> Self {
        let l = self.period;
        Self { period: l, indices: self.indices.iter().map(|&k| (l - k) % l).collect() }
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let l = lcm_checked(self.period, other.period).ok_or_else(|| Error::Overflow(format!("lcm({}, {})", self.period, other.period)))?;
        let (fa, fb) = ((l / self.period) as u128, (l / other.period) as u128);
        let indices =
            self.indices.iter().zip(&other.indices).map(|(&a, &b)| ((a as u128 * fa + b as u128 * fb) % l as u128) as u64).collect();
        Ok(Self { period: l, indices })
    }

    fn similarity(&self, other: &Self) -> Option<f64> {
        let l = lcm_checked(self.period, other.period)?;
        let (fa, fb) = ((l / self.period) as u128, (l / other.period) as u128);
        let lf = l as f64;
        let sum: f64 = self
            .indices
            .iter()
            .zip(&other.indices)
            .map(|(&a, &b)| {
                let d = (a as u128 * fa + l as u128 - (b as u128 * fb) % l as u128) % l as u128;
                (TAU * d as f64 / lf).cos()
            })
            .sum();
        Some(sum / self.dim() as f64)
    }
}

/// `(cos θ, sin θ)`. Kept out of line so every caller gets the same bits: inlined,
/// the pair may or may not be fused into one `sincos` call, which can differ by an ulp.
#[inline(never)]
pub(crate) fn unit_phasor(theta: f64) -> (f64, f64) {
    (theta.cos(), theta.sin())
}

/// A unit-magnitude complex vector in exact or dense form.
#[derive(Clone, Debug, PartialEq)]
pub enum PhasorVector {
    Exact(ExactPhasor),
    Dense(ComplexVector),
}

impl PhasorVector {
    /// Wrap a dense vector, checking the unit-magnitude invariant.
    pub fn dense(v: ComplexVector) -> Result<Self> {
        if !v.is_unit(UNIT_TOLERANCE) {
            return Err(invalid("dense phasor vector has a component off the unit circle"));
        }
        Ok(Self::Dense(v))
    }

    pub fn identity(dim: usize) -> Self {
        Self::Exact(ExactPhasor::identity(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Exact(e) => e.dim(),
            Self::Dense(d) => d.dim(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactPhasor> {
        match self {
            Self::Exact(e) => Some(e),
            Self::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> ComplexVector {
        match self {
            Self::Exact(e) => e.to_dense(),
            Self::Dense(d) => d.clone(),
        }
    }

    pub fn into_dense(self) -> ComplexVector {
        match self {
            Self::Exact(e) => e.to_dense(),
            Self::Dense(d) => d,
        }
    }
}

impl From<ExactPhasor> for PhasorVector {
    fn from(e: ExactPhasor) -> Self {
        Self::Exact(e)
    }
}

/// Kernel similarity `(1/D) Re⟨a, conj(b)⟩`.
///
/// Exact inputs are compared through their integer phase differences, so congruent
/// encodings give exactly `1.0`.
pub fn similarity(a: &PhasorVector, b: &PhasorVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    if a.dim() == 0 {
        return Err(invalid("similarity of empty vectors"));
    }
    if let (PhasorVector::Exact(x), PhasorVector::Exact(y)) = (a, b) {
        if let Some(s) = x.similarity(y) {
            return Ok(s);
        }
    }
    let (x, y) = (a.to_dense(), b.to_dense());
    Ok(x.inner_unchecked(&y).re / a.dim() as f64)
}

/// Componentwise product. Exact × exact stays exact with period `lcm(L₁, L₂)`.
pub fn hadamard(a: &PhasorVector, b: &PhasorVector) -> Result<PhasorVector> {
    match (a, b) {
        (PhasorVector::Exact(x), PhasorVector::Exact(y)) => Ok(PhasorVector::Exact(x.hadamard(y)?)),
        _ => Ok(PhasorVector::Dense(a.to_dense().hadamard(&b.to_dense())?)),
    }
}

pub fn conjugate(v: &PhasorVector) -> PhasorVector {
    match v {
        PhasorVector::Exact(e) => PhasorVector::Exact(e.conj()),
        PhasorVector::Dense(d) => PhasorVector::Dense(d.conj()),
    }
}

/// Project every component onto the unit circle (zero components map to `1 + 0i`).
pub fn phase_normalize(v: &ComplexVector) -> PhasorVector {
    let mut out = v.clone();
    out.normalize_phase();
    PhasorVector::Dense(out)
}

/// Random base vector for one modulus: `D` phase indices `u_j ∈ Z_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusBase {
    modulus: u64,
    seed: u64,
    nonzero_only: bool,
    phase_indices: Vec<u64>,
}

const BASE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseFile {
    version: u32,
    modulus: u64,
    dim: usize,
    seed: u64,
    nonzero_only: bool,
    phase_indices: Vec<u64>,
}

impl ModulusBase {
    /// Draw `dim` i.i.d. phase indices uniformly from `Z_m` (or `Z_m \ {0}`).
    pub fn sample(modulus: u64, dim: usize, seed: u64, nonzero_only: bool) -> Result<Self> {
        if modulus < 2 {
            return Err(invalid(format!("modulus must be at least 2, got {modulus}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let mut rng = seed::rng(seed);
        let lo = u64::from(nonzero_only);
        let phase_indices = (0..dim).map(|_| rng.random_range(lo..modulus)).collect();
        Ok(Self { modulus, seed, nonzero_only, phase_indices })
    }

    /// Build a base from explicit indices (used by constrained samplers and loaders).
    pub fn from_indices(modulus: u64, seed: u64, nonzero_only: bool, phase_indices: Vec<u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(invalid(format!("modulus must be at least 2, got {modulus}")));
        }
        if phase_indices.is_empty() {
            return Err(invalid("dimension must be positive"));
        }
        if let Some(u) = phase_indices.iter().find(|&&u| u >= modulus) {
            return Err(invalid(format!("phase index {u} not below modulus {modulus}")));
        }
        if nonzero_only && phase_indices.contains(&0) {
            return Err(invalid("zero phase index in a nonzero-only base"));
        }
        Ok(Self { modulus, seed, nonzero_only, phase_indices })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.phase_indices.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nonzero_only(&self) -> bool {
        self.nonzero_only
    }

    pub fn phase_indices(&self) -> &[u64] {
        &self.phase_indices
    }

    /// `z_m(x)`: phase index `u_j · x mod m`. Periodic in `x` with period `m`.
    pub fn encode_integer(&self, x: i64) -> PhasorVector {
        PhasorVector::Exact(self.encode_exact(x))
    }

    pub fn encode_exact(&self, x: i64) -> ExactPhasor {
        let m = self.modulus as i128;
        let x = (x as i128).rem_euclid(m);
        let indices = self.phase_indices.iter().map(|&u| ((u as i128 * x) % m) as u64).collect();
        ExactPhasor { period: self.modulus, indices }
    }

    /// Centered phase index in `(-m/2, m/2]`; its phase lies in `(-π, π]`.
    pub fn centered_index(&self, j: usize) -> i64 {
        centered(self.phase_indices[j], self.modulus)
    }

    /// Fractional power encoding of a real value, `exp(i φ_j q)`.
    ///
    /// Phases are taken in `(-π, π]`, the support whose kernel is the sinc comb; for
    /// integer `q` this agrees with [`encode_integer`](Self::encode_integer).
    pub fn encode_rational(&self, q: f64) -> PhasorVector {
        PhasorVector::Dense(self.encode_rational_dense(q))
    }

    pub fn encode_rational_dense(&self, q: f64) -> ComplexVector {
        let m = self.modulus as f64;
        // Shifting q by a multiple of m changes every phase by a multiple of 2π.
        let q = q.rem_euclid(m);
        ComplexVector::from_phases((0..self.dim()).map(|j| TAU * self.centered_index(j) as f64 * q / m))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&BaseFile {
            version: BASE_FORMAT_VERSION,
            modulus: self.modulus,
            dim: self.dim(),
            seed: self.seed,
            nonzero_only: self.nonzero_only,
            phase_indices: self.phase_indices.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: BaseFile = serde_json::from_str(s)?;
        if f.version != BASE_FORMAT_VERSION {
            return Err(Error::Version { found: f.version, expected: BASE_FORMAT_VERSION });
        }
        if f.dim != f.phase_indices.len() {
            return Err(Error::DimensionMismatch { left: f.dim, right: f.phase_indices.len() });
        }
        Self::from_indices(f.modulus, f.seed, f.nonzero_only, f.phase_indices)
    }
}

pub(crate) fn centered(u: u64, m: u64) -> i64 {
    if 2 * u > m {
        u as i64 - m as i64
    } else {
        u as i64
    }
}

/// `sample_base(m, D, seed, nonzero_only)`.
pub fn sample_base(modulus: u64, dim: usize, seed: u64, nonzero_only: bool) -> Result<ModulusBase> {
    ModulusBase::sample(modulus, dim, seed, nonzero_only)
}

/// Von Mises phase noise with concentration `kappa`; `f64::INFINITY` means no noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kappa: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(kappa: f64, seed: u64) -> Result<Self> {
        if kappa.is_nan() || kappa < 0.0 {
            return Err(invalid(format!("kappa must be non-negative, got {kappa}")));
        }
        Ok(Self { kappa, seed })
    }

    pub fn noiseless() -> Self {
        Self { kappa: f64::INFINITY, seed: 0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.kappa == f64::INFINITY
    }

    /// Draw `n` phase perturbations.
    pub fn sample_phases(&self, n: usize) -> Result<Vec<f64>> {
        let sampler = VonMises::new(self.kappa)?;
        let mut rng = seed::rng(self.seed);
        Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
    }
}

/// Von Mises distribution on `(-π, π]` with mean 0 (Best–Fisher rejection sampler).
#[derive(Clone, Copy, Debug)]
pub struct VonMises {
    kappa: f64,
    r: f64,
}

impl VonMises {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_nan() || kappa < 0.0 {
            return Err(invalid(format!("kappa must be non-negative, got {kappa}")));
        }
        let r = if kappa > 1e-8 && kappa.is_finite() {
            let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
            let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        } else {
            0.0
        };
        Ok(Self { kappa, r })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.kappa == f64::INFINITY {
            return 0.0;
        }
        if self.kappa <= 1e-8 {
            return rng.random_range(-PI..PI);
        }
        loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let u3: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + self.r * z) / (self.r + z);
            let c = self.kappa * (self.r - f);
            if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                let theta = f.clamp(-1.0, 1.0).acos();
                return if u3 > 0.5 { theta } else { -theta };
            }
        }
    }
}

/// Expected `cos` of a von Mises(0, κ) sample, `I₁(κ)/I₀(κ)`.
///
/// Computed by backward recurrence on the Bessel ratio continued fraction.
pub fn mean_resultant_length(kappa: f64) -> f64 {
    if kappa == f64::INFINITY {
        return 1.0;
    }
    if kappa <= 0.0 {
        return 0.0;
    }
    let n = (2.0 * kappa) as usize + 60;
    (0..n).rev().fold(0.0, |ratio, nu| 1.0 / (2.0 * (nu as f64 + 1.0) / kappa + ratio))
}

/// Multiply every component by an independent von Mises phase perturbation.
pub fn add_phase_noise(v: &PhasorVector, noise: &NoiseModel) -> Result<PhasorVector> {
    let mut out = v.to_dense();
    if noise.is_noiseless() {
        NoiseModel::new(noise.kappa, noise.seed)?;
        return Ok(PhasorVector::Dense(out));
    }
    let rot = ComplexVector::from_phases(noise.sample_phases(v.dim())?);
    out.mul_assign_unchecked(&rot, false);
    Ok(PhasorVector::Dense(out))
}
