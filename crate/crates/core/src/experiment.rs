//! Seeded decoding experiments: accuracy at a given range, capacity sweeps over
//! consecutive-prime moduli, phase-noise robustness and sub-integer decoding.
//!
//! Every random draw is derived from the experiment seed, the range `M` and the
//! trial index, so a record can be replayed alone and results do not depend on the
//! execution mode or thread count.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::primes_up_to;
use crate::par::{self, Execution};
use crate::phasor::{add_phase_noise, mean_resultant_length, ComplexVector, NoiseModel, PhasorVector};
use crate::residue::ResidueSystem;
use crate::resonator::{bits_per_vector, ResidueDecoder, ResonatorConfig};
use crate::seed;

const SYSTEM: u64 = 0;
const VALUE: u64 = 1;
const NOISE: u64 = 2;
const RESONATOR: u64 = 3;

/// All windows of `k` consecutive primes whose largest member is at most `max_prime`,
/// in increasing order of product.
pub fn consecutive_prime_windows(k: usize, max_prime: u64) -> Result<Vec<Vec<u64>>> {
    if k == 0 {
        return Err(invalid("window size must be positive"));
    }
    let primes = primes_up_to(max_prime);
    Ok(primes.windows(k).map(<[u64]>::to_vec).collect())
}

/// The window of `k` consecutive primes whose product is closest to `target` in
/// log scale.
pub fn moduli_near(k: usize, target: u64) -> Result<Vec<u64>> {
    if target < 2 {
        return Err(invalid("target range must be at least 2"));
    }
    let root = (target as f64).powf(1.0 / k as f64);
    let limit = (4.0 * root) as u64 + 64;
    let log_target = (target as f64).ln();
    consecutive_prime_windows(k, limit)?
        .into_iter()
        .min_by(|a, b| {
            let da = (a.iter().map(|&p| (p as f64).ln()).sum::<f64>() - log_target).abs();
            let db = (b.iter().map(|&p| (p as f64).ln()).sum::<f64>() - log_target).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(|| invalid(format!("no window of {k} primes")))
}

/// Verification threshold for inputs under phase noise: a correct product's expected
/// similarity shrinks by `I₁(κ)/I₀(κ)`, so the noiseless threshold is scaled by it.
pub fn noise_adjusted(config: &ResonatorConfig, kappa: Option<f64>) -> ResonatorConfig {
    match kappa {
        Some(k) => ResonatorConfig { verify_threshold: config.verify_threshold * mean_resultant_length(k), ..config.clone() },
        None => config.clone(),
    }
}

fn noisy(v: PhasorVector, kappa: Option<f64>, seed: u64) -> Result<ComplexVector> {
    match kappa {
        Some(k) => Ok(add_phase_noise(&v, &NoiseModel::new(k, seed)?)?.into_dense()),
        None => Ok(v.into_dense()),
    }
}

/// One accuracy measurement, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub moduli: Vec<u64>,
    #[serde(rename = "M")]
    pub range: u64,
    /// Von Mises concentration of the input noise; absent when noiseless.
    pub kappa: Option<f64>,
    pub trials: usize,
    pub accuracy: f64,
    /// Codebook evaluations per trial, restarts included.
    pub mean_evaluations: f64,
    /// `mean_evaluations / accuracy`; absent at zero accuracy.
    pub normalized_evaluations: Option<f64>,
    /// Whether the accuracy reached the capacity threshold.
    pub capacity_flag: bool,
    pub seed: u64,
}

/// Integer decoding trials at one set of moduli.
#[derive(Clone, Debug)]
pub struct DecodeExperiment {
    pub dim: usize,
    pub moduli: Vec<u64>,
    pub kappa: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub resonator: ResonatorConfig,
    pub exec: Execution,
}

/// Outcome of one decoding trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub correct: bool,
    pub evaluations: u64,
}

impl DecodeExperiment {
    pub fn system(&self) -> Result<ResidueSystem> {
        let range: u64 = self.moduli.iter().product();
        ResidueSystem::new(&self.moduli, self.dim, seed::derive(self.seed, &[SYSTEM, range]), false)
    }

    /// Run every trial; uniformly random `x ∈ [0, M)` per trial.
    pub fn run_trials(&self) -> Result<Vec<TrialOutcome>> {
        let sys = self.system()?;
        let decoder = ResidueDecoder::new(&sys)?;
        let config = noise_adjusted(&self.resonator, self.kappa);
        config.validate()?;
        let m = sys.range();
        par::map_indices(self.exec, self.trials, |t| {
            let t = t as u64;
            let x = seed::rng(seed::derive(self.seed, &[VALUE, m, t])).random_range(0..m);
            let v = noisy(sys.encode(x as i64), self.kappa, seed::derive(self.seed, &[NOISE, m, t]))?;
            let out = decoder.decode(&v, &config.with_seed(seed::derive(self.seed, &[RESONATOR, m, t])))?;
            Ok(TrialOutcome { correct: out.value == Some(x), evaluations: out.factorization.state.codebook_evaluations })
        })
        .into_iter()
        .collect()
    }

    /// Aggregate the trials into a record; `threshold` sets the capacity flag.
    pub fn run(&self, threshold: f64) -> Result<PointRecord> {
        if self.trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        let outcomes = self.run_trials()?;
        let n = outcomes.len() as f64;
        let accuracy = outcomes.iter().filter(|o| o.correct).count() as f64 / n;
        let mean_evaluations = outcomes.iter().map(|o| o.evaluations as f64).sum::<f64>() / n;
        Ok(PointRecord {
            dim: self.dim,
            k: self.moduli.len(),
            moduli: self.moduli.clone(),
            range: self.moduli.iter().product(),
            kappa: self.kappa,
            trials: self.trials,
            accuracy,
            mean_evaluations,
            normalized_evaluations: (accuracy > 0.0).then(|| mean_evaluations / accuracy),
            capacity_flag: accuracy >= threshold,
            seed: self.seed,
        })
    }
}

/// Sweep of increasing `M` over windows of `k` consecutive primes.
#[derive(Clone, Debug)]
pub struct CapacitySweep {
    pub dim: usize,
    pub k: usize,
    pub kappa: Option<f64>,
    /// Accuracy defining the capacity.
    pub threshold: f64,
    /// The sweep stops after the first point below this accuracy.
    pub stop_threshold: f64,
    /// Minimum ratio between successive tested ranges.
    pub growth: f64,
    pub min_range: u64,
    pub max_range: u64,
    pub trials: usize,
    pub seed: u64,
    pub resonator: ResonatorConfig,
    pub exec: Execution,
}

impl CapacitySweep {
    pub fn new(dim: usize, k: usize, trials: usize, seed: u64) -> Self {
        Self {
            dim,
            k,
            kappa: None,
            threshold: 0.95,
            stop_threshold: 0.95,
            growth: 1.25,
            min_range: 2,
            max_range: 1 << 40,
            trials,
            seed,
            resonator: ResonatorConfig::default(),
            exec: Execution::default(),
        }
    }

    /// Moduli sets to test, in increasing order of range.
    pub fn schedule(&self) -> Result<Vec<Vec<u64>>> {
        if !(self.growth >= 1.0) {
            return Err(invalid("growth must be at least 1"));
        }
        let limit = (self.max_range as f64).powf(1.0 / self.k as f64) as u64 + 2;
        let mut out: Vec<Vec<u64>> = Vec::new();
        let mut last = 0.0;
        for w in consecutive_prime_windows(self.k, limit.min(1 << 24))? {
            let m = w.iter().map(|&p| p as f64).product::<f64>();
            if m < self.min_range as f64 || m > self.max_range as f64 {
                continue;
            }
            if out.is_empty() || m >= last * self.growth {
                last = m;
                out.push(w);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Largest tested `M` such that it and every smaller tested range reached the
    /// threshold; absent when the first point already failed.
    pub capacity: Option<u64>,
    pub points: Vec<PointRecord>,
}

/// Run a capacity sweep.
pub fn capacity_experiment(sweep: &CapacitySweep) -> Result<CapacityReport> {
    if !(sweep.threshold > 0.0 && sweep.threshold <= 1.0) {
        return Err(invalid("accuracy threshold must lie in (0, 1]"));
    }
    let mut points = Vec::new();
    let mut capacity = None;
    let mut intact = true;
    for moduli in sweep.schedule()? {
        let exp = DecodeExperiment {
            dim: sweep.dim,
            moduli,
            kappa: sweep.kappa,
            trials: sweep.trials,
            seed: sweep.seed,
            resonator: sweep.resonator.clone(),
            exec: sweep.exec,
        };
        let point = exp.run(sweep.threshold)?;
        intact &= point.capacity_flag;
        if intact {
            capacity = Some(point.range);
        }
        let stop = point.accuracy < sweep.stop_threshold;
        points.push(point);
        if stop {
            break;
        }
    }
    Ok(CapacityReport { capacity, points })
}

/// Sub-integer decoding accuracy and information rate, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubIntegerRecord {
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub moduli: Vec<u64>,
    #[serde(rename = "M")]
    pub range: u64,
    pub kappa: Option<f64>,
    pub partitions: u64,
    pub trials: usize,
    pub accuracy: f64,
    /// Bits per vector over the `M · partitions` candidate values.
    pub bits_per_vector: f64,
    pub mean_evaluations: f64,
    pub seed: u64,
}

/// Decoding of values on the grid `k / partitions` in `[0, M)`.
#[derive(Clone, Debug)]
pub struct SubIntegerExperiment {
    pub dim: usize,
    pub moduli: Vec<u64>,
    pub kappa: Option<f64>,
    pub partitions: u64,
    pub trials: usize,
    pub seed: u64,
    pub resonator: ResonatorConfig,
    pub exec: Execution,
}

impl SubIntegerExperiment {
    pub fn run(&self) -> Result<SubIntegerRecord> {
        if self.trials == 0 || self.partitions == 0 {
            return Err(invalid("trials and partitions must be positive"));
        }
        let range: u64 = self.moduli.iter().product();
        let sys = ResidueSystem::new(&self.moduli, self.dim, seed::derive(self.seed, &[SYSTEM, range]), false)?;
        let decoder = ResidueDecoder::new(&sys)?;
        let config = noise_adjusted(&self.resonator, self.kappa);
        let span = range * self.partitions;
        let outcomes: Vec<Result<TrialOutcome>> = par::map_indices(self.exec, self.trials, |t| {
            let t = t as u64;
            let n = seed::rng(seed::derive(self.seed, &[VALUE, span, t])).random_range(0..span);
            let q = n as f64 / self.partitions as f64;
            let clean = PhasorVector::Dense(sys.encode_rational(q));
            let v = noisy(clean, self.kappa, seed::derive(self.seed, &[NOISE, span, t]))?;
            let out = decoder.decode_sub_integer(&v, self.partitions, &config.with_seed(seed::derive(self.seed, &[RESONATOR, span, t])))?;
            Ok(TrialOutcome { correct: out.numerator == Some(n), evaluations: out.outcome.state.codebook_evaluations })
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let n = outcomes.len() as f64;
        let accuracy = outcomes.iter().filter(|o| o.correct).count() as f64 / n;
        Ok(SubIntegerRecord {
            dim: self.dim,
            k: self.moduli.len(),
            moduli: self.moduli.clone(),
            range,
            kappa: self.kappa,
            partitions: self.partitions,
            trials: self.trials,
            accuracy,
            bits_per_vector: bits_per_vector(accuracy, span as f64)?,
            mean_evaluations: outcomes.iter().map(|o| o.evaluations as f64).sum::<f64>() / n,
            seed: self.seed,
        })
    }
}

/// Write one JSON object per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut writer: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Write records as CSV with a header row taken from the field names.
pub fn write_csv<W: Write, T: Serialize>(writer: W, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
