//! Locality-preserving reference encoders: thermometer, float and scatter codes.
//!
//! They exist to contrast their kernel shapes with the periodic kernels of phasor
//! codes. Thermometer and float codes have exact triangular kernels; scatter codes
//! decay as `(1 − 2p)^Δ` in expectation.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelPoint;
use crate::par::{self, Execution};
use crate::seed;

/// Bipolar code with the first `s` of `D` components `+1` and the rest `−1`.
pub fn thermometer_encode(s: usize, dim: usize) -> Result<Vec<i8>> {
    if s > dim {
        return Err(invalid(format!("thermometer level {s} exceeds dimension {dim}")));
    }
    Ok((0..dim).map(|i| if i < s { 1 } else { -1 }).collect())
}

/// Binary code with `w` consecutive ones starting at component `s`.
pub fn float_encode(s: usize, dim: usize, w: usize) -> Result<Vec<i8>> {
    if w == 0 || w > dim || s > dim - w {
        return Err(invalid(format!("float code needs 0 < w ≤ D and s ≤ D − w (s={s}, D={dim}, w={w})")));
    }
    Ok((0..dim).map(|i| i8::from(s <= i && i < s + w)).collect())
}

/// Number of distinct float-code levels.
pub fn float_levels(dim: usize, w: usize) -> usize {
    dim.saturating_sub(w) + 1
}

/// Levels `0..levels` of a scatter code: a random bipolar start, then each component
/// flips independently with probability `p` from one level to the next.
pub fn scatter_encode(levels: usize, dim: usize, p: f64, seed: u64) -> Result<Vec<Vec<i8>>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("flip probability must lie in [0, 1], got {p}")));
    }
    let mut rng = seed::rng(seed);
    let mut out: Vec<Vec<i8>> = Vec::with_capacity(levels);
    if levels == 0 {
        return Ok(out);
    }
    out.push((0..dim).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect());
    for _ in 1..levels {
        let next = out.last().expect("nonempty").iter().map(|&z| if rng.random::<f64>() < p { -z } else { z }).collect();
        out.push(next);
    }
    Ok(out)
}

fn dot(a: &[i8], b: &[i8]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

/// Cosine similarity of two bipolar codes.
pub fn bipolar_similarity(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    Ok(dot(a, b) as f64 / a.len() as f64)
}

/// Thermometer kernel `1 − 2|Δ|/D`.
pub fn thermometer_kernel(delta: i64, dim: usize) -> f64 {
    (dim as i64 - 2 * delta.abs()) as f64 / dim as f64
}

/// Float kernel `max(0, 1 − |Δ|/w)`, the inner product normalized by `w`.
pub fn float_kernel(delta: i64, w: usize) -> f64 {
    (w as i64 - delta.abs()).max(0) as f64 / w as f64
}

/// Expected scatter-code similarity `(1 − 2p)^Δ`.
pub fn scatter_kernel(delta: u32, p: f64) -> f64 {
    (1.0 - 2.0 * p).powi(delta as i32)
}

/// Thermometer similarities `sim(z(s), z(s + Δ))` for every valid `Δ` from level `s`.
pub fn thermometer_curve(s: usize, dim: usize) -> Result<Vec<KernelPoint>> {
    let base = thermometer_encode(s, dim)?;
    (0..=dim)
        .map(|t| {
            let delta = t as i64 - s as i64;
            let emp = bipolar_similarity(&base, &thermometer_encode(t, dim)?)?;
            Ok(KernelPoint::new(delta as f64, emp, thermometer_kernel(delta, dim)))
        })
        .collect()
}

/// Float-code similarities (normalized by `w`) from level `s` to every level.
pub fn float_curve(s: usize, dim: usize, w: usize) -> Result<Vec<KernelPoint>> {
    let base = float_encode(s, dim, w)?;
    (0..float_levels(dim, w))
        .map(|t| {
            let delta = t as i64 - s as i64;
            let emp = dot(&base, &float_encode(t, dim, w)?) as f64 / w as f64;
            Ok(KernelPoint::new(delta as f64, emp, float_kernel(delta, w)))
        })
        .collect()
}

/// Scatter-code decay averaged over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub delta: u32,
    pub mean: f64,
    /// Standard error of the mean across seeds.
    pub std_error: f64,
    pub expected: f64,
}

/// Mean of `sim(z(0), z(Δ))` for `Δ ∈ [0, max_delta]` over `seeds` independent codes.
pub fn scatter_curve(max_delta: u32, dim: usize, p: f64, seeds: usize, seed: u64, exec: Execution) -> Result<Vec<ScatterPoint>> {
    if seeds < 2 {
        return Err(invalid("a standard error needs at least two seeds"));
    }
    let runs: Vec<Result<Vec<f64>>> = par::map_indices(exec, seeds, |k| {
        let codes = scatter_encode(max_delta as usize + 1, dim, p, seed::derive(seed, &[k as u64]))?;
        codes.iter().map(|c| bipolar_similarity(&codes[0], c)).collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let n = seeds as f64;
    Ok((0..=max_delta)
        .map(|delta| {
            let xs = runs.iter().map(|r| r[delta as usize]);
            let mean = xs.clone().sum::<f64>() / n;
            let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            ScatterPoint { delta, mean, std_error: (var / n).sqrt(), expected: scatter_kernel(delta, p) }
        })
        .collect())
}

/// Candidate kernel shapes for a decay curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `max(0, 1 − γ|Δ|)^α`
    ExponentiatedTriangular,
    /// `exp(−Δ² / 2l²)`
    SquaredExponential,
    /// `(1 + Δ² / 2αl²)^(−α)`
    RationalQuadratic,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [Self::ExponentiatedTriangular, Self::SquaredExponential, Self::RationalQuadratic];

    fn arity(self) -> usize {
        match self {
            Self::SquaredExponential => 1,
            _ => 2,
        }
    }

    /// Evaluate with positive parameters (`[γ, α]`, `[l]` or `[α, l]`).
    pub fn eval(self, params: &[f64], delta: f64) -> f64 {
        match self {
            Self::ExponentiatedTriangular => (1.0 - params[0] * delta.abs()).max(0.0).powf(params[1]),
            Self::SquaredExponential => (-delta * delta / (2.0 * params[0] * params[0])).exp(),
            Self::RationalQuadratic => (1.0 + delta * delta / (2.0 * params[0] * params[1] * params[1])).powf(-params[0]),
        }
    }
}

/// Least-squares fit of one kernel family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    pub family: KernelFamily,
    pub params: Vec<f64>,
    pub mse: f64,
}

struct Mse<'a> {
    family: KernelFamily,
    data: &'a [(f64, f64)],
}

impl CostFunction for Mse<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    // Parameters are optimized in log space to keep them positive.
    fn cost(&self, log_params: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let params: Vec<f64> = log_params.iter().map(|v| v.exp()).collect();
        let sse: f64 = self.data.iter().map(|&(x, y)| (self.family.eval(&params, x) - y).powi(2)).sum();
        Ok(sse / self.data.len() as f64)
    }
}

/// Fit `family` to `(Δ, similarity)` pairs by minimizing the mean squared error.
pub fn fit_kernel(family: KernelFamily, data: &[(f64, f64)]) -> Result<KernelFit> {
    if data.is_empty() {
        return Err(invalid("cannot fit an empty curve"));
    }
    let span = data.iter().map(|(x, _)| x.abs()).fold(1.0, f64::max);
    let start: Vec<f64> = match family {
        KernelFamily::ExponentiatedTriangular => vec![(1.0 / (2.0 * span)).ln(), 0.0],
        KernelFamily::SquaredExponential => vec![(span / 3.0).ln()],
        KernelFamily::RationalQuadratic => vec![0.0, (span / 3.0).ln()],
    };
    let mut simplex = vec![start.clone()];
    for i in 0..family.arity() {
        let mut v = start.clone();
        v[i] += 0.5;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-12).map_err(|e| invalid(e.to_string()))?;
    let res = Executor::new(Mse { family, data }, solver)
        .configure(|s| s.max_iters(2000))
        .run()
        .map_err(|e| invalid(format!("kernel fit failed: {e}")))?;
    let best = res.state.best_param.ok_or_else(|| invalid("kernel fit produced no parameters"))?;
    Ok(KernelFit { family, params: best.iter().map(|v| v.exp()).collect(), mse: res.state.best_cost })
}
