//! Subset sum with residue codes: every item is a binary factor `{z(0), z(S_k)}` and
//! the resonator factorizes `z(T)`. A reported subset always sums to `T` exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::gcd;
use crate::par::{self, Execution};
use crate::residue::ResidueSystem;
use crate::resonator::{product_similarity, resonator_search, Codebook, ResonatorConfig};
use crate::seed;

const INSTANCE: u64 = 0;
const SOLVER: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetSumInstance {
    pub items: Vec<u64>,
    pub target: u64,
    #[serde(default)]
    pub seed: u64,
    /// Indices of a subset summing to `target`, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<usize>>,
}

impl SubsetSumInstance {
    pub fn new(items: Vec<u64>, target: u64) -> Result<Self> {
        let inst = Self { items, target, seed: 0, ground_truth: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn total(&self) -> u64 {
        self.items.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.items.contains(&0) {
            return Err(invalid("items must be positive"));
        }
        if self.target > self.total() {
            return Err(invalid(format!("target {} exceeds the item total {}", self.target, self.total())));
        }
        if let Some(gt) = &self.ground_truth {
            if !is_solution(&self.items, self.target, gt) {
                return Err(invalid("ground truth does not sum to the target"));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// True when `subset` names distinct, in-range items summing to `target`.
pub fn is_solution(items: &[u64], target: u64, subset: &[usize]) -> bool {
    let mut seen = vec![false; items.len()];
    let mut sum = 0u64;
    for &i in subset {
        if i >= items.len() || seen[i] {
            return false;
        }
        seen[i] = true;
        sum += items[i];
    }
    sum == target
}

/// Smallest `m' ≥ m` with `{m'−1, m', m'+1}` pairwise co-prime.
pub fn default_moduli(m: u64) -> Result<Vec<u64>> {
    if m < 3 {
        return Err(invalid("moduli triple needs m ≥ 3"));
    }
    let mut c = m;
    while !(gcd(c - 1, c) == 1 && gcd(c, c + 1) == 1 && gcd(c - 1, c + 1) == 1) {
        c += 1;
    }
    Ok(vec![c - 1, c, c + 1])
}

/// `n` items drawn uniformly from `[1, ⌊M/(2n)⌋]`, each selected with probability 1/2;
/// the target is the selected sum.
pub fn generate_instance(n: usize, range: u64, seed: u64) -> Result<SubsetSumInstance> {
    if n == 0 {
        return Err(invalid("instance needs at least one item"));
    }
    let max_item = range / 2 / n as u64;
    if max_item == 0 {
        return Err(invalid(format!("range {range} is too small for {n} items")));
    }
    let mut rng = seed::rng(seed);
    let items: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max_item)).collect();
    let chosen: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    let target = chosen.iter().map(|&i| items[i]).sum();
    Ok(SubsetSumInstance { items, target, seed, ground_truth: Some(chosen) })
}

/// One codebook per item with entries `z(0)` (label 0, exclude) and `z(S_k)` (label 1).
pub fn build_factors(items: &[u64], sys: &ResidueSystem) -> Result<Vec<Codebook>> {
    let zero = sys.encode_exact(0).to_dense();
    items
        .iter()
        .map(|&s| {
            let s = i64::try_from(s).map_err(|_| Error::Overflow(format!("item {s}")))?;
            Codebook::dense(&[zero.clone(), sys.encode_exact(s).to_dense()], vec![0, 1])
        })
        .collect()
}

/// Result of a resonator solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSolution {
    /// Verified subset, absent on failure.
    pub subset: Option<Vec<usize>>,
    pub attempts: usize,
    pub evaluations: u64,
    /// Sweeps of the final attempt.
    pub iterations: usize,
    /// Similarity of `z(T)` with the best decoded product.
    pub similarity: f64,
}

/// Factorize `z(T)` over the item factors, restarting until a subset sums to `T`.
pub fn solve(inst: &SubsetSumInstance, sys: &ResidueSystem, config: &ResonatorConfig) -> Result<SubsetSolution> {
    inst.validate()?;
    if inst.total() >= sys.range() {
        return Err(invalid(format!("item total {} must be below the range {}", inst.total(), sys.range())));
    }
    let codebooks = build_factors(&inst.items, sys)?;
    let target = i64::try_from(inst.target).map_err(|_| Error::Overflow(format!("target {}", inst.target)))?;
    let v = sys.encode_exact(target).to_dense();
    let out = resonator_search(&v, &codebooks, config, |state| {
        let idx = state.decoded_indices(&codebooks);
        let subset: Vec<usize> = idx.iter().enumerate().filter(|(_, &r)| r == 1).map(|(k, _)| k).collect();
        let sim = product_similarity(&v, &codebooks, &idx);
        // An inexact subset scores below every threshold, ordered by similarity.
        let score = if is_solution(&inst.items, inst.target, &subset) { sim } else { sim - 1.0 };
        Ok((score, subset))
    })?;
    let exact = out.success && is_solution(&inst.items, inst.target, &out.value);
    let similarity = if exact { out.similarity } else { out.similarity + 1.0 };
    Ok(SubsetSolution {
        subset: exact.then_some(out.value),
        attempts: out.attempts,
        evaluations: out.state.codebook_evaluations,
        iterations: out.state.iteration,
        similarity,
    })
}

/// Exact solver by dynamic programming over reachable sums.
pub fn exact_baseline(items: &[u64], target: u64) -> Result<Option<Vec<usize>>> {
    const LIMIT: u64 = 1 << 28;
    if target > LIMIT {
        return Err(Error::Unsupported(format!("target {target} exceeds the dynamic-programming limit {LIMIT}")));
    }
    let t = target as usize;
    // parent[s]: item that first reached sum s; usize::MAX marks unreached.
    let mut parent = vec![usize::MAX; t + 1];
    let mut reached = vec![false; t + 1];
    reached[0] = true;
    for (i, &s) in items.iter().enumerate() {
        let s = s as usize;
        if s > t {
            continue;
        }
        for from in (0..=t - s).rev() {
            if reached[from] && !reached[from + s] {
                reached[from + s] = true;
                parent[from + s] = i;
            }
        }
    }
    if !reached[t] {
        return Ok(None);
    }
    let mut subset = Vec::new();
    let mut s = t;
    while s > 0 {
        let i = parent[s];
        subset.push(i);
        s -= items[i] as usize;
    }
    subset.sort_unstable();
    Ok(Some(subset))
}

/// Exhaustive search over all `2^n` subsets, lowest mask first.
pub fn brute_force(items: &[u64], target: u64) -> Result<Option<Vec<usize>>> {
    if items.len() > 25 {
        return Err(Error::Unsupported(format!("{} items is too many to enumerate", items.len())));
    }
    for mask in 0u32..(1 << items.len()) {
        let sum: u64 = (0..items.len()).filter(|&k| mask >> k & 1 == 1).map(|k| items[k]).sum();
        if sum == target {
            return Ok(Some((0..items.len()).filter(|&k| mask >> k & 1 == 1).collect()));
        }
    }
    Ok(None)
}

/// Accuracy and cost for one `(|S|, D)` setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub items: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub moduli: Vec<u64>,
    pub trials: usize,
    pub max_attempts: usize,
    /// Success rate of a single attempt.
    pub first_attempt_accuracy: f64,
    /// Success rate within `max_attempts`.
    pub accuracy: f64,
    pub mean_evaluations: f64,
    /// Mean evaluations divided by the single-attempt success rate.
    pub expected_evaluations: Option<f64>,
    pub expected_iterations: Option<f64>,
    /// `2^n` comparisons divided by the `2n` comparisons of one sweep.
    pub brute_force_iterations: f64,
    /// Fraction of trials solved within `t` attempts, `t = 1..=max_attempts`.
    pub restart_curve: Vec<f64>,
    /// Every reported subset summed to the target.
    pub all_verified: bool,
    pub seed: u64,
}

/// One solve on a fresh instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetTrial {
    pub instance: SubsetSumInstance,
    pub solution: SubsetSolution,
}

#[derive(Clone, Debug)]
pub struct SubsetBenchmark {
    pub items: usize,
    pub dim: usize,
    pub moduli: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    /// `max_restarts + 1` is the attempt budget.
    pub resonator: ResonatorConfig,
    pub exec: Execution,
}

impl SubsetBenchmark {
    pub fn system(&self) -> Result<ResidueSystem> {
        ResidueSystem::new(&self.moduli, self.dim, seed::derive(self.seed, &[self.dim as u64]), false)
    }

    pub fn run_trials(&self) -> Result<Vec<SubsetTrial>> {
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        let sys = self.system()?;
        par::map_indices(self.exec, self.trials, |t| {
            let instance = generate_instance(self.items, sys.range(), seed::derive(self.seed, &[INSTANCE, self.items as u64, t as u64]))?;
            let config = self.resonator.with_seed(seed::derive(self.seed, &[SOLVER, self.items as u64, self.dim as u64, t as u64]));
            let solution = solve(&instance, &sys, &config)?;
            Ok(SubsetTrial { instance, solution })
        })
        .into_iter()
        .collect()
    }

    pub fn run(&self) -> Result<SubsetRecord> {
        let trials = self.run_trials()?;
        Ok(self.record(&trials))
    }

    /// Aggregate trials produced by [`Self::run_trials`].
    pub fn record(&self, trials: &[SubsetTrial]) -> SubsetRecord {
        summarize(self, trials)
    }
}

fn summarize(b: &SubsetBenchmark, trials: &[SubsetTrial]) -> SubsetRecord {
    let n = trials.len() as f64;
    let max_attempts = b.resonator.max_restarts + 1;
    let restart_curve: Vec<f64> = (1..=max_attempts)
        .map(|t| trials.iter().filter(|tr| tr.solution.subset.is_some() && tr.solution.attempts <= t).count() as f64 / n)
        .collect();
    let first = restart_curve[0];
    let mean_evaluations = trials.iter().map(|t| t.solution.evaluations as f64).sum::<f64>() / n;
    let sweep = 2.0 * b.items as f64;
    let expected_evaluations = (first > 0.0).then(|| mean_evaluations / first);
    SubsetRecord {
        items: b.items,
        dim: b.dim,
        moduli: b.moduli.clone(),
        trials: trials.len(),
        max_attempts,
        first_attempt_accuracy: first,
        accuracy: *restart_curve.last().expect("at least one attempt"),
        mean_evaluations,
        expected_evaluations,
        expected_iterations: expected_evaluations.map(|e| e / sweep),
        brute_force_iterations: 2f64.powi(b.items as i32) / sweep,
        restart_curve,
        all_verified: trials
            .iter()
            .all(|t| t.solution.subset.as_ref().is_none_or(|s| is_solution(&t.instance.items, t.instance.target, s))),
        seed: b.seed,
    }
}

/// Success within `t` independent attempts at per-attempt rate `p`.
pub fn independent_restart_success(p: f64, t: usize) -> f64 {
    1.0 - (1.0 - p).powi(t as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_items() -> Vec<u64> {
        vec![18, 4, 5, 10, 2, 23]
    }

    #[test]
    fn moduli_triples_are_coprime() {
        assert_eq!(default_moduli(200).unwrap(), vec![199, 200, 201]);
        assert_eq!(default_moduli(5).unwrap(), vec![5, 6, 7]);
        assert_eq!(default_moduli(6).unwrap(), vec![5, 6, 7]);
        assert!(default_moduli(2).is_err());
    }

    #[test]
    fn generated_instances_respect_the_range() {
        let inst = generate_instance(6, 1000, 3).unwrap();
        assert!(inst.total() <= 500);
        assert!(is_solution(&inst.items, inst.target, inst.ground_truth.as_ref().unwrap()));
        assert_eq!(inst, generate_instance(6, 1000, 3).unwrap());
        assert!(generate_instance(6, 10, 0).is_err());
        let json = inst.to_json().unwrap();
        assert_eq!(SubsetSumInstance::from_json(&json).unwrap(), inst);
        assert!(SubsetSumInstance::from_json(r#"{"items":[1],"target":2}"#).is_err());
        assert!(SubsetSumInstance::from_json(r#"{"items":[1],"target":1,"extra":0}"#).is_err());
    }

    #[test]
    fn factors_compose_to_selected_sums() {
        let sys = ResidueSystem::new(&[5, 6, 7], 64, 1, false).unwrap();
        let cbs = build_factors(&fig_items(), &sys).unwrap();
        assert_eq!((cbs.len(), cbs.iter().map(Codebook::len).sum::<usize>()), (6, 12));
        let want = sys.encode_exact(21).to_dense();
        assert!((product_similarity(&want, &cbs, &[0, 1, 1, 1, 1, 0]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_solvers() {
        assert_eq!(brute_force(&fig_items(), 21).unwrap(), Some(vec![1, 2, 3, 4]));
        let dp = exact_baseline(&fig_items(), 21).unwrap().unwrap();
        assert!(is_solution(&fig_items(), 21, &dp));
        assert_eq!(exact_baseline(&[2, 4], 1).unwrap(), None);
        assert_eq!(brute_force(&[2, 4], 1).unwrap(), None);
        assert_eq!(exact_baseline(&[2, 4], 0).unwrap(), Some(vec![]));
    }

    #[test]
    fn solves_the_six_item_example() {
        let sys = ResidueSystem::new(&[5, 6, 7], 1024, 2, false).unwrap();
        let inst = SubsetSumInstance::new(fig_items(), 21).unwrap();
        let config = ResonatorConfig { max_restarts: 20, ..Default::default() };
        let sol = solve(&inst, &sys, &config).unwrap();
        assert_eq!(sol.subset, Some(vec![1, 2, 3, 4]));
        for target in [0, 62] {
            let sol = solve(&SubsetSumInstance::new(fig_items(), target).unwrap(), &sys, &config).unwrap();
            let want: Vec<usize> = if target == 0 { vec![] } else { (0..6).collect() };
            assert_eq!(sol.subset, Some(want));
        }
    }

    #[test]
    fn range_must_exceed_item_total() {
        let sys = ResidueSystem::new(&[3, 5], 64, 2, false).unwrap();
        assert!(solve(&SubsetSumInstance::new(fig_items(), 21).unwrap(), &sys, &ResonatorConfig::default()).is_err());
    }

    #[test]
    fn benchmark_is_deterministic_across_modes() {
        let b = SubsetBenchmark {
            items: 5,
            dim: 512,
            moduli: default_moduli(20).unwrap(),
            trials: 6,
            seed: 4,
            resonator: ResonatorConfig { max_restarts: 4, ..Default::default() },
            exec: Execution::Parallel,
        };
        let a = b.run().unwrap();
        let s = SubsetBenchmark { exec: Execution::Sequential, ..b }.run().unwrap();
        assert_eq!(a, s);
        assert!(a.all_verified);
        assert_eq!(a.restart_curve.len(), 5);
        assert!(a.restart_curve.windows(2).all(|w| w[0] <= w[1]));
    }
}
