//! Resonator networks: iterative factorization of a bound product of codebook entries.
//!
//! Each factor estimate is refined in turn by unbinding the other estimates from the
//! input, projecting onto the factor's codebook and back, and phase-normalizing:
//! `ẑ_j ← g(Z_j Z_j† (v ⊙ ∏_{i≠j} conj ẑ_i))`. A run has converged once two
//! successive sweeps produce states with normalized similarity at least `alpha`.
//! A converged state is accepted only if the decoded factors explain the input;
//! otherwise the network restarts from a fresh random state.
//!
//! Codebooks whose entries are the successive powers of one phasor (every residue
//! codebook) are projected with a DFT over phase buckets rather than `n` dot products.
//! The cost accounting is unaffected: one step on a factor counts that factor's
//! codebook size in evaluations.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phasor::{ComplexVector, ExactPhasor, ModulusBase, UNIT_TOLERANCE};
use crate::residue::{crt_reconstruct, ResidueSystem};
use crate::seed;

/// Relative magnitude below which a superposed component counts as cancelled.
const CANCEL_FLOOR: f64 = 1e-9;

#[derive(Clone)]
enum Layout {
    Dense { re: Vec<f64>, im: Vec<f64> },
    Powers { generator: ExactPhasor, forward: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

/// An ordered set of unit phasor vectors with unique labels; the rows of `Z_j`.
#[derive(Clone)]
pub struct Codebook {
    dim: usize,
    labels: Vec<u64>,
    layout: Layout,
}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.layout {
            Layout::Dense { .. } => "dense",
            Layout::Powers { .. } => "powers",
        };
        f.debug_struct("Codebook").field("kind", &kind).field("len", &self.len()).field("dim", &self.dim).finish()
    }
}

impl Codebook {
    /// Codebook with explicit entries.
    pub fn dense(entries: &[ComplexVector], labels: Vec<u64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("codebook needs at least one entry"));
        }
        if entries.len() != labels.len() {
            return Err(invalid(format!("{} entries but {} labels", entries.len(), labels.len())));
        }
        let dim = entries[0].dim();
        let mut seen = HashSet::new();
        if let Some(l) = labels.iter().find(|&&l| !seen.insert(l)) {
            return Err(invalid(format!("duplicate codebook label {l}")));
        }
        let (mut re, mut im) = (Vec::with_capacity(dim * entries.len()), Vec::with_capacity(dim * entries.len()));
        for e in entries {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: e.dim() });
            }
            if !e.is_unit(UNIT_TOLERANCE) {
                return Err(invalid("codebook entries must be unit phasor vectors"));
            }
            re.extend_from_slice(e.re());
            im.extend_from_slice(e.im());
        }
        Ok(Self { dim, labels, layout: Layout::Dense { re, im } })
    }

    /// Codebook `[g⁰, g¹, …, g^{L−1}]` for a generator of period `L`, labelled `0..L`.
    pub fn powers(generator: &ExactPhasor) -> Result<Self> {
        let period = generator.period();
        if period < 2 || period > u32::MAX as u64 {
            return Err(invalid(format!("generator period {period} out of range")));
        }
        let mut planner = FftPlanner::new();
        let n = period as usize;
        Ok(Self {
            dim: generator.dim(),
            labels: (0..period).collect(),
            layout: Layout::Powers {
                generator: generator.clone(),
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            },
        })
    }

    /// Residue codebook `[z_m(0), …, z_m(m−1)]` of one modulus base.
    pub fn from_base(base: &ModulusBase) -> Result<Self> {
        Self::powers(&base.encode_exact(1))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn entry(&self, r: usize) -> ComplexVector {
        match &self.layout {
            Layout::Dense { re, im } => {
                let span = r * self.dim..(r + 1) * self.dim;
                ComplexVector::from_parts(re[span.clone()].to_vec(), im[span].to_vec()).expect("equal halves")
            }
            Layout::Powers { generator, .. } => generator.pow(r as i64).to_dense(),
        }
    }

    /// `c_r = Σ_d conj(Z_{r,d}) x_d` for every entry.
    pub fn project(&self, x: &ComplexVector, out: &mut Vec<Complex64>) {
        out.clear();
        match &self.layout {
            Layout::Dense { re, im } => {
                let (xr, xi) = (x.re(), x.im());
                for (rr, ri) in re.chunks_exact(self.dim).zip(im.chunks_exact(self.dim)) {
                    let (mut sr, mut si) = (0.0, 0.0);
                    for d in 0..self.dim {
                        sr += rr[d] * xr[d] + ri[d] * xi[d];
                        si += rr[d] * xi[d] - ri[d] * xr[d];
                    }
                    out.push(Complex64::new(sr, si));
                }
            }
            Layout::Powers { generator, forward, .. } => {
                // Entry r has phase 2π r u_d / L, so c_r is the DFT of the bucket sums B(u).
                out.resize(self.len(), Complex64::new(0.0, 0.0));
                for ((&u, &xr), &xi) in generator.indices().iter().zip(x.re()).zip(x.im()) {
                    out[u as usize] += Complex64::new(xr, xi);
                }
                forward.process(out);
            }
        }
    }

    /// `out = Σ_r c_r Z_r`.
    pub fn synthesize(&self, coeffs: &[Complex64], out: &mut ComplexVector) {
        let dim = self.dim;
        let (or, oi) = out.parts_mut();
        match &self.layout {
            Layout::Dense { re, im } => {
                or.fill(0.0);
                oi.fill(0.0);
                for ((rr, ri), c) in re.chunks_exact(dim).zip(im.chunks_exact(dim)).zip(coeffs) {
                    for d in 0..dim {
                        or[d] += c.re * rr[d] - c.im * ri[d];
                        oi[d] += c.re * ri[d] + c.im * rr[d];
                    }
                }
            }
            Layout::Powers { generator, inverse, .. } => {
                let mut spectrum = coeffs.to_vec();
                inverse.process(&mut spectrum);
                for (d, &u) in generator.indices().iter().enumerate() {
                    or[d] = spectrum[u as usize].re;
                    oi[d] = spectrum[u as usize].im;
                }
            }
        }
    }

    /// `g(Σ_r Z_r)`.
    pub fn superposition(&self) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        self.synthesize(&vec![Complex64::new(1.0, 0.0); self.len()], &mut out);
        out.normalize_phase_relative(CANCEL_FLOOR);
        out
    }
}

/// Residue codebooks of a system, one per modulus, in modulus order.
pub fn build_residue_codebooks(sys: &ResidueSystem) -> Result<Vec<Codebook>> {
    sys.bases().iter().map(Codebook::from_base).collect()
}

/// Label of the entry with the largest real inner product with `v`; ties go to the
/// lowest label. Adds the codebook size to `evaluations`.
pub fn codebook_decode(v: &ComplexVector, codebook: &Codebook, evaluations: &mut u64) -> Result<u64> {
    if v.dim() != codebook.dim() {
        return Err(Error::DimensionMismatch { left: v.dim(), right: codebook.dim() });
    }
    let mut coeffs = Vec::new();
    codebook.project(v, &mut coeffs);
    *evaluations += codebook.len() as u64;
    let keys: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
    let r = argmax(codebook.labels(), &keys);
    Ok(codebook.labels()[r])
}

fn argmax(labels: &[u64], keys: &[f64]) -> usize {
    let mut best = 0;
    for r in 1..keys.len() {
        let (a, b) = (keys[r], keys[best]);
        if a > b || (a == b && labels[r] < labels[best]) {
            best = r;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `g(Σ_r Z_r)` for every factor. For a complete residue codebook the sum cancels
    /// everywhere except where the base phase is zero, so this starts at `z(0)`.
    Superposition,
    /// Independent uniformly random phasors.
    #[default]
    RandomPhase,
}

/// Resonator parameters. Factors are updated asynchronously in index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonatorConfig {
    /// Convergence threshold on the similarity of successive states.
    pub alpha: f64,
    /// Sweeps per attempt; one sweep updates every factor once.
    pub max_iters: usize,
    /// Extra attempts from random states after a failed one.
    pub max_restarts: usize,
    /// Initialization of the first attempt; restarts are always random.
    pub init: InitMode,
    pub seed: u64,
    /// Minimum similarity between the input and the decoded product.
    pub verify_threshold: f64,
}

impl Default for ResonatorConfig {
    fn default() -> Self {
        Self { alpha: 0.95, max_iters: 100, max_restarts: 0, init: InitMode::RandomPhase, seed: 0, verify_threshold: 0.5 }
    }
}

impl ResonatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        if !(-1.0..=1.0).contains(&self.verify_threshold) {
            return Err(invalid(format!("verify_threshold must lie in [-1, 1], got {}", self.verify_threshold)));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Factor estimates plus run bookkeeping.
#[derive(Clone, Debug)]
pub struct ResonatorState {
    pub estimates: Vec<ComplexVector>,
    /// Sweeps completed in the current attempt.
    pub iteration: usize,
    pub converged: bool,
    /// Codebook entries compared against, over all attempts.
    pub codebook_evaluations: u64,
    coefficients: Vec<Vec<Complex64>>,
}

impl ResonatorState {
    pub fn new(codebooks: &[Codebook], init: InitMode, seed: u64) -> Result<Self> {
        let dim = check_codebooks(codebooks)?;
        let mut state = Self {
            estimates: vec![ComplexVector::zeros(dim); codebooks.len()],
            iteration: 0,
            converged: false,
            codebook_evaluations: 0,
            coefficients: vec![Vec::new(); codebooks.len()],
        };
        state.reset(codebooks, init, seed);
        Ok(state)
    }

    fn reset(&mut self, codebooks: &[Codebook], init: InitMode, seed: u64) {
        for (j, cb) in codebooks.iter().enumerate() {
            self.estimates[j] = match init {
                InitMode::Superposition => cb.superposition(),
                InitMode::RandomPhase => ComplexVector::random_phasor(cb.dim(), seed::derive(seed, &[j as u64])),
            };
            self.coefficients[j].clear();
        }
        self.iteration = 0;
        self.converged = false;
    }

    fn coefficients<'s>(&'s self, j: usize, cb: &Codebook) -> Cow<'s, [Complex64]> {
        if self.coefficients[j].len() == cb.len() {
            Cow::Borrowed(&self.coefficients[j])
        } else {
            let mut fresh = Vec::new();
            cb.project(&self.estimates[j], &mut fresh);
            Cow::Owned(fresh)
        }
    }

    /// Per-factor entry index with the largest projection magnitude.
    ///
    /// Estimates of different factors can carry compensating global phases, so the
    /// readout ignores phase. It reuses each factor's latest projection when available.
    pub fn decoded_indices(&self, codebooks: &[Codebook]) -> Vec<usize> {
        self.top_two_indices(codebooks).into_iter().map(|[first, _]| first).collect()
    }

    /// The two largest-magnitude entries per factor (equal when the codebook has one entry).
    pub fn top_two_indices(&self, codebooks: &[Codebook]) -> Vec<[usize; 2]> {
        codebooks
            .iter()
            .enumerate()
            .map(|(j, cb)| {
                let mut keys: Vec<f64> = self.coefficients(j, cb).iter().map(|c| c.norm_sqr()).collect();
                let first = argmax(cb.labels(), &keys);
                if keys.len() == 1 {
                    return [first, first];
                }
                keys[first] = f64::NEG_INFINITY;
                [first, argmax(cb.labels(), &keys)]
            })
            .collect()
    }
}

fn check_codebooks(codebooks: &[Codebook]) -> Result<usize> {
    let first = codebooks.first().ok_or_else(|| invalid("at least one codebook is required"))?;
    for cb in codebooks {
        if cb.dim() != first.dim() {
            return Err(Error::DimensionMismatch { left: first.dim(), right: cb.dim() });
        }
    }
    Ok(first.dim())
}

/// Update estimate `j` in place.
pub fn resonator_step(v: &ComplexVector, state: &mut ResonatorState, codebooks: &[Codebook], j: usize) -> Result<()> {
    if j >= codebooks.len() || state.estimates.len() != codebooks.len() {
        return Err(invalid(format!("factor index {j} out of range for {} codebooks", codebooks.len())));
    }
    if v.dim() != codebooks[j].dim() {
        return Err(Error::DimensionMismatch { left: v.dim(), right: codebooks[j].dim() });
    }
    let mut residual = v.clone();
    for (i, est) in state.estimates.iter().enumerate() {
        if i != j {
            residual.mul_assign_unchecked(est, true);
        }
    }
    let mut coeffs = std::mem::take(&mut state.coefficients[j]);
    codebooks[j].project(&residual, &mut coeffs);
    codebooks[j].synthesize(&coeffs, &mut state.estimates[j]);
    state.estimates[j].normalize_phase_relative(CANCEL_FLOOR);
    state.coefficients[j] = coeffs;
    state.codebook_evaluations += codebooks[j].len() as u64;
    Ok(())
}

/// Normalized real similarity between two full states.
fn state_similarity(a: &[ComplexVector], b: &[ComplexVector]) -> f64 {
    let total: f64 = a.iter().zip(b).map(|(x, y)| x.inner_unchecked(y).re).sum();
    let dim = a.first().map_or(1, |x| x.dim());
    total / (a.len() * dim) as f64
}

/// Sweep until convergence or `max_iters`; returns whether the state converged.
fn run_attempt(v: &ComplexVector, state: &mut ResonatorState, codebooks: &[Codebook], config: &ResonatorConfig) -> Result<bool> {
    let mut previous = state.estimates.clone();
    for _ in 0..config.max_iters {
        for j in 0..codebooks.len() {
            resonator_step(v, state, codebooks, j)?;
        }
        state.iteration += 1;
        if state_similarity(&previous, &state.estimates) >= config.alpha {
            state.converged = true;
            return Ok(true);
        }
        previous.clone_from(&state.estimates);
    }
    Ok(false)
}

/// Result of a restarted resonator search. On failure, `value` and the state's
/// estimates come from the attempt whose candidate best matched the input.
#[derive(Clone, Debug)]
pub struct SearchOutcome<T> {
    pub value: T,
    /// Verification similarity of `value`.
    pub similarity: f64,
    pub success: bool,
    pub attempts: usize,
    pub state: ResonatorState,
}

/// Run the resonator with restarts. After each attempt, `verify` decodes the state
/// into a candidate and scores how well it explains the input; an attempt succeeds
/// when it converged and the score reaches `config.verify_threshold`.
pub fn resonator_search<T, F>(
    v: &ComplexVector,
    codebooks: &[Codebook],
    config: &ResonatorConfig,
    mut verify: F,
) -> Result<SearchOutcome<T>>
where
    F: FnMut(&mut ResonatorState) -> Result<(f64, T)>,
{
    config.validate()?;
    let dim = check_codebooks(codebooks)?;
    if v.dim() != dim {
        return Err(Error::DimensionMismatch { left: v.dim(), right: dim });
    }
    let mut state = ResonatorState::new(codebooks, config.init, seed::derive(config.seed, &[0]))?;
    let mut best: Option<(f64, T, ResonatorState)> = None;
    for attempt in 0..=config.max_restarts {
        if attempt > 0 {
            state.reset(codebooks, InitMode::RandomPhase, seed::derive(config.seed, &[attempt as u64]));
        }
        let converged = run_attempt(v, &mut state, codebooks, config)?;
        let (similarity, value) = verify(&mut state)?;
        if converged && similarity >= config.verify_threshold {
            return Ok(SearchOutcome { value, similarity, success: true, attempts: attempt + 1, state });
        }
        if best.as_ref().is_none_or(|b| similarity > b.0) {
            best = Some((similarity, value, state.clone()));
        }
    }
    let (similarity, value, mut best_state) = best.expect("at least one attempt");
    best_state.codebook_evaluations = state.codebook_evaluations;
    Ok(SearchOutcome { value, similarity, success: false, attempts: config.max_restarts + 1, state: best_state })
}

/// Factorization into one entry per codebook; `value` holds entry indices.
pub type Factorization = SearchOutcome<Vec<usize>>;

impl Factorization {
    pub fn labels(&self, codebooks: &[Codebook]) -> Vec<u64> {
        self.value.iter().zip(codebooks).map(|(&r, cb)| cb.labels()[r]).collect()
    }
}

/// Similarity between `v` and the product of the chosen entries.
pub fn product_similarity(v: &ComplexVector, codebooks: &[Codebook], indices: &[usize]) -> f64 {
    let mut product = ComplexVector::ones(v.dim());
    for (cb, &r) in codebooks.iter().zip(indices) {
        product.mul_assign_unchecked(&cb.entry(r), false);
    }
    v.inner_unchecked(&product).re / v.dim() as f64
}

/// Factorize `v`, verifying the decoded entries by their bound product.
pub fn resonator_factorize(v: &ComplexVector, codebooks: &[Codebook], config: &ResonatorConfig) -> Result<Factorization> {
    resonator_search(v, codebooks, config, |state| {
        let indices = state.decoded_indices(codebooks);
        Ok((product_similarity(v, codebooks, &indices), indices))
    })
}

/// Resonator decoding of residue-encoded numbers.
#[derive(Clone, Debug)]
pub struct ResidueDecoder<'a> {
    sys: &'a ResidueSystem,
    codebooks: Vec<Codebook>,
}

/// Integer decode; `value` is set only when the factorization was verified.
#[derive(Clone, Debug)]
pub struct ResidueDecode {
    pub value: Option<u64>,
    pub factorization: Factorization,
}

/// Fractional decode of `numerator / partitions`.
#[derive(Clone, Debug)]
pub struct SubIntegerDecode {
    pub numerator: Option<u64>,
    pub partitions: u64,
    pub outcome: SearchOutcome<u64>,
}

impl SubIntegerDecode {
    pub fn value(&self) -> Option<f64> {
        self.numerator.map(|n| n as f64 / self.partitions as f64)
    }
}

impl<'a> ResidueDecoder<'a> {
    pub fn new(sys: &'a ResidueSystem) -> Result<Self> {
        Ok(Self { sys, codebooks: build_residue_codebooks(sys)? })
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn decode(&self, v: &ComplexVector, config: &ResonatorConfig) -> Result<ResidueDecode> {
        let factorization = resonator_factorize(v, &self.codebooks, config)?;
        let value =
            if factorization.success { Some(crt_reconstruct(&factorization.labels(&self.codebooks), self.sys.moduli())?) } else { None };
        Ok(ResidueDecode { value, factorization })
    }

    /// Decode a value on the grid `k / partitions`.
    ///
    /// After the resonator settles, the two strongest residues per modulus give up to
    /// `2^K` integer anchors; every grid point within distance 1 of an anchor is then
    /// compared against `v` directly and the best one is returned.
    pub fn decode_sub_integer(&self, v: &ComplexVector, partitions: u64, config: &ResonatorConfig) -> Result<SubIntegerDecode> {
        if partitions == 0 {
            return Err(invalid("partitions must be at least 1"));
        }
        let k = self.codebooks.len();
        if k > 12 {
            return Err(Error::Unsupported(format!("sub-integer decoding with {k} moduli")));
        }
        let range = self.sys.range();
        let span = range.checked_mul(partitions).ok_or_else(|| Error::Overflow(format!("{range} × {partitions} grid points")))?;
        let moduli = self.sys.moduli();
        let outcome = resonator_search(v, &self.codebooks, config, |state| {
            let top = state.top_two_indices(&self.codebooks);
            let mut anchors = BTreeSet::new();
            for mask in 0..1u32 << k {
                let residues: Vec<u64> = (0..k).map(|j| top[j][((mask >> j) & 1) as usize] as u64).collect();
                anchors.insert(crt_reconstruct(&residues, moduli)?);
            }
            let mut candidates = BTreeSet::new();
            for a in anchors {
                let base = (a * partitions + span - partitions) % span;
                for step in 0..2 * partitions {
                    candidates.insert((base + step) % span);
                }
            }
            let mut best = (f64::NEG_INFINITY, 0);
            for n in candidates {
                let z = self.sys.encode_rational(n as f64 / partitions as f64);
                let s = v.inner_unchecked(&z).re / v.dim() as f64;
                state.codebook_evaluations += 1;
                if s > best.0 {
                    best = (s, n);
                }
            }
            Ok(best)
        })?;
        let numerator = outcome.success.then_some(outcome.value);
        Ok(SubIntegerDecode { numerator, partitions, outcome })
    }
}

/// Decode `v` to an integer in `[0, M)`.
pub fn decode_residue_number(sys: &ResidueSystem, v: &ComplexVector, config: &ResonatorConfig) -> Result<u64> {
    let out = ResidueDecoder::new(sys)?.decode(v, config)?;
    out.value.ok_or(Error::NotConverged { attempts: out.factorization.attempts, best_similarity: out.factorization.similarity })
}

/// Decode `v` to a multiple of `1 / partitions` in `[0, M)`.
pub fn sub_integer_decode(sys: &ResidueSystem, v: &ComplexVector, partitions: u64, config: &ResonatorConfig) -> Result<f64> {
    let out = ResidueDecoder::new(sys)?.decode_sub_integer(v, partitions, config)?;
    out.value().ok_or(Error::NotConverged { attempts: out.outcome.attempts, best_similarity: out.outcome.similarity })
}

/// Information per decoded vector, in bits, at accuracy `a` over `p` alternatives.
pub fn bits_per_vector(a: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("bits_per_vector needs a ∈ [0, 1] and P ≥ 2, got a={a}, P={p}")));
    }
    let hit = if a > 0.0 { a * (p * a).log2() } else { 0.0 };
    let miss = if a < 1.0 { (1.0 - a) * (p / (p - 1.0) * (1.0 - a)).log2() } else { 0.0 };
    Ok(hit + miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasor::{add_phase_noise, NoiseModel};

    fn sys(moduli: &[u64], dim: usize, seed: u64) -> ResidueSystem {
        ResidueSystem::new(moduli, dim, seed, false).unwrap()
    }

    #[test]
    fn residue_codebooks_have_modulus_sizes() {
        let s = sys(&[3, 5, 7], 64, 1);
        let cbs = build_residue_codebooks(&s).unwrap();
        assert_eq!(cbs.iter().map(Codebook::len).collect::<Vec<_>>(), vec![3, 5, 7]);
        assert_eq!(cbs.iter().map(Codebook::len).sum::<usize>(), 15);
        for (cb, base) in cbs.iter().zip(s.bases()) {
            assert_eq!(cb.labels(), (0..base.modulus()).collect::<Vec<_>>().as_slice());
            for r in 0..cb.len() {
                assert_eq!(cb.entry(r), base.encode_integer(r as i64).to_dense());
            }
        }
    }

    #[test]
    fn structured_projection_matches_dense() {
        let base = ModulusBase::sample(11, 200, 3, false).unwrap();
        let powers = Codebook::from_base(&base).unwrap();
        let entries: Vec<_> = (0..11).map(|r| powers.entry(r)).collect();
        let dense = Codebook::dense(&entries, (0..11).collect()).unwrap();
        let x = ComplexVector::random_phasor(200, 9);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        powers.project(&x, &mut a);
        dense.project(&x, &mut b);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-9);
        }
        let (mut ya, mut yb) = (ComplexVector::zeros(200), ComplexVector::zeros(200));
        powers.synthesize(&a, &mut ya);
        dense.synthesize(&a, &mut yb);
        for d in 0..200 {
            assert!((ya.get(d) - yb.get(d)).norm() < 1e-8);
        }
    }

    #[test]
    fn dense_codebook_validation() {
        let a = ComplexVector::ones(4);
        assert!(Codebook::dense(&[], vec![]).is_err());
        assert!(Codebook::dense(&[a.clone(), a.clone()], vec![1, 1]).is_err());
        assert!(Codebook::dense(std::slice::from_ref(&a), vec![1, 2]).is_err());
        assert!(Codebook::dense(&[ComplexVector::zeros(4)], vec![0]).is_err());
        assert!(Codebook::dense(&[a, ComplexVector::ones(5)], vec![0, 1]).is_err());
    }

    #[test]
    fn codebook_decode_picks_entry_and_counts() {
        let base = ModulusBase::sample(7, 256, 5, false).unwrap();
        let cb = Codebook::from_base(&base).unwrap();
        let mut evals = 0;
        assert_eq!(codebook_decode(&cb.entry(3), &cb, &mut evals).unwrap(), 3);
        assert_eq!(evals, 7);
    }

    #[test]
    fn codebook_decode_ties_go_to_lowest_label() {
        let a = ComplexVector::ones(4);
        let cb = Codebook::dense(&[a.clone(), a.clone(), a.clone()], vec![9, 2, 5]).unwrap();
        let mut evals = 0;
        assert_eq!(codebook_decode(&a, &cb, &mut evals).unwrap(), 2);
    }

    #[test]
    fn full_range_codebook_decodes_every_residue_number() {
        let s = sys(&[3, 5, 7], 512, 2);
        let entries: Vec<_> = (0..105).map(|x| s.encode(x).to_dense()).collect();
        let cb = Codebook::dense(&entries, (0..105).collect()).unwrap();
        let mut evals = 0;
        for x in 0..105 {
            assert_eq!(codebook_decode(&entries[x as usize], &cb, &mut evals).unwrap(), x);
        }
        assert_eq!(evals, 105 * 105);
    }

    #[test]
    fn step_snaps_when_other_factors_are_correct() {
        let s = sys(&[3, 5, 7], 1024, 4);
        let cbs = build_residue_codebooks(&s).unwrap();
        let x = 52;
        let v = s.encode(x).to_dense();
        let truth: Vec<_> = s.residues(x).iter().map(|&r| r as usize).collect();
        let mut state = ResonatorState::new(&cbs, InitMode::Superposition, 0).unwrap();
        for j in [0, 2] {
            state.estimates[j] = cbs[j].entry(truth[j]);
        }
        let before = state.estimates.clone();
        resonator_step(&v, &mut state, &cbs, 1).unwrap();
        let want = cbs[1].entry(truth[1]);
        for d in 0..1024 {
            assert!((state.estimates[1].get(d) - want.get(d)).norm() < 1e-9);
        }
        assert_eq!(state.estimates[0], before[0]);
        assert_eq!(state.estimates[2], before[2]);
        assert_eq!(state.codebook_evaluations, 5);

        let once = state.estimates[1].clone();
        resonator_step(&v, &mut state, &cbs, 1).unwrap();
        for d in 0..1024 {
            assert!((state.estimates[1].get(d) - once.get(d)).norm() < 1e-9);
        }
        assert_eq!(state.codebook_evaluations, 10);
    }

    #[test]
    fn single_factor_step_is_cleanup() {
        let base = ModulusBase::sample(13, 512, 8, false).unwrap();
        let cbs = vec![Codebook::from_base(&base).unwrap()];
        let noisy = add_phase_noise(&base.encode_integer(6), &NoiseModel::new(2.0, 1).unwrap()).unwrap().into_dense();
        let mut state = ResonatorState::new(&cbs, InitMode::Superposition, 0).unwrap();
        resonator_step(&noisy, &mut state, &cbs, 0).unwrap();
        let mut coeffs = Vec::new();
        cbs[0].project(&noisy, &mut coeffs);
        let mut want = ComplexVector::zeros(512);
        cbs[0].synthesize(&coeffs, &mut want);
        want.normalize_phase_relative(CANCEL_FLOOR);
        assert_eq!(state.estimates[0], want);
        assert_eq!(state.decoded_indices(&cbs), vec![6]);
    }

    #[test]
    fn step_rejects_bad_factor_or_dimension() {
        let s = sys(&[3, 5], 32, 0);
        let cbs = build_residue_codebooks(&s).unwrap();
        let mut state = ResonatorState::new(&cbs, InitMode::Superposition, 0).unwrap();
        assert!(resonator_step(&ComplexVector::ones(32), &mut state, &cbs, 2).is_err());
        assert!(resonator_step(&ComplexVector::ones(31), &mut state, &cbs, 0).is_err());
    }

    #[test]
    fn decodes_every_number_mod_105() {
        let s = sys(&[3, 5, 7], 1024, 11);
        let decoder = ResidueDecoder::new(&s).unwrap();
        let config = ResonatorConfig { max_restarts: 5, ..Default::default() };
        for x in 0..105 {
            let out = decoder.decode(&s.encode(x).to_dense(), &config.with_seed(x as u64)).unwrap();
            assert_eq!(out.value, Some(x as u64), "x = {x}");
        }
    }

    #[test]
    fn twenty_decodes_through_its_residues() {
        let s = sys(&[3, 5, 7], 1024, 12);
        let v = s.encode(20).to_dense();
        let decoder = ResidueDecoder::new(&s).unwrap();
        let out = decoder.decode(&v, &ResonatorConfig::default()).unwrap();
        assert_eq!(out.factorization.labels(decoder.codebooks()), vec![2, 0, 6]);
        assert_eq!(decode_residue_number(&s, &v, &ResonatorConfig::default()).unwrap(), 20);
    }

    #[test]
    fn random_input_fails_explicitly() {
        let s = sys(&[3, 5, 7], 1024, 13);
        let v = ComplexVector::random_phasor(1024, 77);
        let config = ResonatorConfig { max_iters: 20, max_restarts: 2, ..Default::default() };
        let out = ResidueDecoder::new(&s).unwrap().decode(&v, &config).unwrap();
        assert!(!out.factorization.success);
        assert!(out.factorization.similarity < config.verify_threshold);
        assert_eq!(out.value, None);
        assert!(matches!(decode_residue_number(&s, &v, &config), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn evaluations_count_stepped_codebook_sizes() {
        let s = sys(&[3, 5, 7], 512, 14);
        let v = s.encode(33).to_dense();
        let cbs = build_residue_codebooks(&s).unwrap();
        let out = resonator_factorize(&v, &cbs, &ResonatorConfig::default()).unwrap();
        assert!(out.success);
        assert_eq!(out.state.codebook_evaluations, 15 * out.state.iteration as u64);
    }

    #[test]
    fn sub_integer_examples() {
        let s = sys(&[3, 5, 7], 2048, 15);
        let decoder = ResidueDecoder::new(&s).unwrap();
        let config = ResonatorConfig { max_restarts: 5, ..Default::default() };
        let out = decoder.decode_sub_integer(&s.encode_rational(40.4), 5, &config).unwrap();
        assert_eq!(out.numerator, Some(202));
        assert!((out.value().unwrap() - 40.4).abs() < 1e-12);
        for r in [1, 3, 4] {
            let q = sub_integer_decode(&s, &s.encode(17).to_dense(), r, &config).unwrap();
            assert_eq!(q, 17.0);
        }
        assert!(decoder.decode_sub_integer(&s.encode(1).to_dense(), 0, &config).is_err());
    }

    #[test]
    fn bits_per_vector_limits() {
        assert!((bits_per_vector(1.0, 1024.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(bits_per_vector(0.01, 100.0).unwrap().abs() < 1e-12);
        assert!(bits_per_vector(0.5, 2.0).unwrap().abs() < 1e-12);
        assert!(bits_per_vector(1.2, 10.0).is_err());
        assert!(bits_per_vector(0.5, 1.0).is_err());
    }

    #[test]
    fn config_validation_and_serde_defaults() {
        assert!(ResonatorConfig { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(ResonatorConfig { max_iters: 0, ..Default::default() }.validate().is_err());
        let c: ResonatorConfig = serde_json::from_str(r#"{"max_restarts": 3, "init": "superposition"}"#).unwrap();
        assert_eq!(c.max_restarts, 3);
        assert_eq!(c.init, InitMode::Superposition);
        assert_eq!(c.alpha, 0.95);
        assert!(serde_json::from_str::<ResonatorConfig>(r#"{"alpha2": 1}"#).is_err());
    }
}
