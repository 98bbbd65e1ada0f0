//! Scene disentangling: sparse feature maps are encoded as a superposition of
//! position-bound feature vectors, and a resonator recovers object identity and
//! position, either with one codebook per axis or with one codebook per modulus.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};
use crate::phasor::{ComplexVector, ExactPhasor};
use crate::residue::{crt_reconstruct, ResidueSystem};
use crate::resonator::{product_similarity, resonator_search, Codebook, ResonatorConfig};
use crate::seed;

/// One feature channel: sparse `(x, y, value)` coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    pub id: usize,
    pub coeffs: Vec<(i64, i64, f64)>,
}

/// Sparse feature maps over an `H × W` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMaps {
    /// `[H, W]`.
    pub grid: [i64; 2],
    pub channels: Vec<Channel>,
}

impl FeatureMaps {
    pub fn empty(height: i64, width: i64) -> Self {
        Self { grid: [height, width], channels: Vec::new() }
    }

    /// Parse and validate; errors carry a line/column or a field path.
    pub fn from_json(s: &str) -> Result<Self> {
        let maps: Self = serde_json::from_str(s)
            .map_err(|e| Error::Parse { location: format!("line {}, column {}", e.line(), e.column()), message: e.to_string() })?;
        maps.validate()?;
        Ok(maps)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let [h, w] = self.grid;
        if h <= 0 || w <= 0 {
            return Err(Error::Parse { location: "grid".into(), message: format!("grid {h}×{w} must be positive") });
        }
        for (c, ch) in self.channels.iter().enumerate() {
            for (k, &(x, y, value)) in ch.coeffs.iter().enumerate() {
                let location = format!("channels[{c}].coeffs[{k}]");
                if !(0..w).contains(&x) || !(0..h).contains(&y) {
                    return Err(Error::Parse { location, message: format!("({x}, {y}) lies outside the {h}×{w} grid") });
                }
                if !value.is_finite() {
                    return Err(Error::Parse { location, message: "value is not finite".into() });
                }
            }
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.channels.iter().map(|c| c.coeffs.len()).sum()
    }

    /// Fraction of nonzero coefficients over all channel cells.
    pub fn sparsity(&self) -> f64 {
        let cells = (self.grid[0] * self.grid[1]) as f64 * self.channels.len().max(1) as f64;
        self.nnz() as f64 / cells
    }

    /// Shift every coefficient by `(dx, dy)`, wrapping at the grid edges.
    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        let [h, w] = self.grid;
        let channels = self
            .channels
            .iter()
            .map(|c| Channel {
                id: c.id,
                coeffs: c.coeffs.iter().map(|&(x, y, v)| ((x + dx).rem_euclid(w), (y + dy).rem_euclid(h), v)).collect(),
            })
            .collect();
        Self { grid: self.grid, channels }
    }

    /// Coefficient-wise union of two maps on the same grid.
    pub fn superpose(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(invalid("feature maps must share a grid"));
        }
        let mut channels = self.channels.clone();
        channels.extend(other.channels.iter().cloned());
        Ok(Self { grid: self.grid, channels })
    }
}

/// Parse a JSON array of feature maps, e.g. an object corpus.
pub fn parse_corpus(s: &str) -> Result<Vec<FeatureMaps>> {
    let maps: Vec<FeatureMaps> = serde_json::from_str(s)
        .map_err(|e| Error::Parse { location: format!("line {}, column {}", e.line(), e.column()), message: e.to_string() })?;
    for (i, m) in maps.iter().enumerate() {
        m.validate().map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse { location: format!("[{i}].{location}"), message },
            other => other,
        })?;
    }
    Ok(maps)
}

/// Position codes for both axes plus one random phasor per feature.
#[derive(Clone, Debug)]
pub struct SceneEncoder {
    horizontal: ResidueSystem,
    vertical: ResidueSystem,
    features: Vec<ComplexVector>,
}

impl SceneEncoder {
    pub fn new(moduli: &[u64], dim: usize, n_features: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            horizontal: ResidueSystem::new(moduli, dim, seed::derive(seed, &[0]), false)?,
            vertical: ResidueSystem::new(moduli, dim, seed::derive(seed, &[1]), false)?,
            features: (0..n_features).map(|j| ComplexVector::random_phasor(dim, seed::derive(seed, &[2, j as u64]))).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.horizontal.dim()
    }

    /// Positions per axis.
    pub fn range(&self) -> u64 {
        self.horizontal.range()
    }

    pub fn horizontal(&self) -> &ResidueSystem {
        &self.horizontal
    }

    pub fn vertical(&self) -> &ResidueSystem {
        &self.vertical
    }

    pub fn features(&self) -> &[ComplexVector] {
        &self.features
    }

    /// `h(x) ⊙ v(y)`.
    pub fn position(&self, x: i64, y: i64) -> ExactPhasor {
        self.horizontal.encode_exact(x).hadamard(&self.vertical.encode_exact(y)).expect("axes share moduli and dimension")
    }

    /// `s = Σ_{j,x,y} A_j(x,y) · h(x) ⊙ v(y) ⊙ d_j`.
    ///
    /// Channels are encoded in parallel and summed in input order.
    pub fn encode(&self, maps: &FeatureMaps, exec: Execution) -> Result<ComplexVector> {
        maps.validate()?;
        if let Some(c) = maps.channels.iter().find(|c| c.id >= self.features.len()) {
            return Err(invalid(format!("feature id {} exceeds the {} known features", c.id, self.features.len())));
        }
        let parts = par::map_slice(exec, &maps.channels, |ch| {
            let mut acc = ComplexVector::zeros(self.dim());
            for &(x, y, value) in &ch.coeffs {
                let mut term = self.position(x, y).to_dense();
                term.mul_assign_unchecked(&self.features[ch.id], false);
                acc.add_scaled_unchecked(value.into(), &term);
            }
            acc
        });
        let mut s = ComplexVector::zeros(self.dim());
        for p in &parts {
            s.add_scaled_unchecked(1.0.into(), p);
        }
        Ok(s)
    }
}

/// Random sparse objects in a canonical frame: each has `coeffs` coefficients with
/// features drawn from `n_features`, positions inside a `patch × patch` corner and
/// values in `[0.5, 1]`.
pub fn synthetic_objects(n_objects: usize, n_features: usize, coeffs: usize, patch: i64, grid: i64, seed: u64) -> Result<Vec<FeatureMaps>> {
    if n_objects == 0 || n_features == 0 || coeffs == 0 || patch <= 0 || patch > grid {
        return Err(invalid("synthetic objects need positive counts and a patch inside the grid"));
    }
    Ok((0..n_objects)
        .map(|i| {
            let mut rng = seed::rng(seed::derive(seed, &[i as u64]));
            let mut channels: Vec<Channel> = Vec::new();
            for _ in 0..coeffs {
                let id = rng.random_range(0..n_features);
                let c = (rng.random_range(0..patch), rng.random_range(0..patch), rng.random_range(0.5..=1.0));
                match channels.iter_mut().find(|ch| ch.id == id) {
                    Some(ch) => ch.coeffs.push(c),
                    None => channels.push(Channel { id, coeffs: vec![c] }),
                }
            }
            FeatureMaps { grid: [grid, grid], channels }
        })
        .collect())
}

/// Codebook of phase-normalized canonical-frame object vectors `O^(i)`.
pub fn build_object_codebook(objects: &[FeatureMaps], enc: &SceneEncoder, exec: Execution) -> Result<Codebook> {
    let entries = objects
        .iter()
        .map(|o| {
            let mut v = enc.encode(o, exec)?;
            v.normalize_phase();
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Codebook::dense(&entries, (0..objects.len() as u64).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorMode {
    /// One codebook per axis over the full range.
    Standard,
    /// One codebook per axis and modulus.
    #[default]
    Residue,
}

impl fmt::Display for FactorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Residue => "residue",
        })
    }
}

/// Factor codebooks for a mode: objects first, then horizontal, then vertical.
pub fn scene_codebooks(objects: &Codebook, enc: &SceneEncoder, mode: FactorMode) -> Result<Vec<Codebook>> {
    let mut out = vec![objects.clone()];
    for axis in [enc.horizontal(), enc.vertical()] {
        match mode {
            FactorMode::Standard => out.push(Codebook::powers(&axis.encode_exact(1))?),
            FactorMode::Residue => {
                for base in axis.bases() {
                    out.push(Codebook::from_base(base)?);
                }
            }
        }
    }
    Ok(out)
}

/// Total codebook vectors a mode stores.
pub fn codebook_vector_count(codebooks: &[Codebook]) -> usize {
    codebooks.iter().map(Codebook::len).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFactorization {
    pub object: u64,
    pub x: u64,
    pub y: u64,
    pub success: bool,
    pub attempts: usize,
    pub iterations: usize,
    pub evaluations: u64,
    pub similarity: f64,
}

/// Recover `(object, x, y)` from a scene vector. The input is phase-normalized first.
pub fn factorize_scene(
    s: &ComplexVector,
    codebooks: &[Codebook],
    enc: &SceneEncoder,
    mode: FactorMode,
    config: &ResonatorConfig,
) -> Result<SceneFactorization> {
    let mut v = s.clone();
    v.normalize_phase();
    let out = resonator_search(&v, codebooks, config, |state| {
        let idx = state.decoded_indices(codebooks);
        Ok((product_similarity(&v, codebooks, &idx), idx))
    })?;
    let labels: Vec<u64> = out.value.iter().zip(codebooks).map(|(&r, cb)| cb.labels()[r]).collect();
    let (x, y) = match mode {
        FactorMode::Standard => (labels[1], labels[2]),
        FactorMode::Residue => {
            let k = enc.horizontal().moduli().len();
            (crt_reconstruct(&labels[1..1 + k], enc.horizontal().moduli())?, crt_reconstruct(&labels[1 + k..], enc.vertical().moduli())?)
        }
    };
    Ok(SceneFactorization {
        object: labels[0],
        x,
        y,
        success: out.success,
        attempts: out.attempts,
        iterations: out.state.iteration,
        evaluations: out.state.codebook_evaluations,
        similarity: out.similarity,
    })
}

/// Evaluations an exhaustive search over all `(object, x, y)` needs.
pub fn brute_force_evaluations(n_objects: usize, range: u64) -> u64 {
    n_objects as u64 * range * range
}

/// Synthetic single-object scenes factorized in both modes.
#[derive(Clone, Debug)]
pub struct SceneExperiment {
    pub dim: usize,
    pub moduli: Vec<u64>,
    pub objects: usize,
    pub features: usize,
    pub coeffs_per_object: usize,
    pub patch: i64,
    pub scenes: usize,
    pub seed: u64,
    pub resonator: ResonatorConfig,
    pub exec: Execution,
    /// Canonical-frame objects to use instead of synthetic ones.
    pub corpus: Option<Vec<FeatureMaps>>,
}

impl SceneExperiment {
    pub fn new(dim: usize, scenes: usize, seed: u64) -> Self {
        Self {
            dim,
            moduli: vec![3, 5, 7],
            objects: 10,
            features: 16,
            coeffs_per_object: 12,
            patch: 12,
            scenes,
            seed,
            resonator: ResonatorConfig { max_restarts: 10, ..Default::default() },
            exec: Execution::Parallel,
            corpus: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneTrial {
    pub object: u64,
    pub x: u64,
    pub y: u64,
    pub mode: FactorMode,
    pub result: SceneFactorization,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub mode: FactorMode,
    #[serde(rename = "D")]
    pub dim: usize,
    pub scenes: usize,
    pub codebook_vectors: usize,
    pub accuracy: f64,
    pub mean_evaluations: f64,
    pub brute_force_evaluations: u64,
    pub seed: u64,
}

pub struct SceneReport {
    pub records: Vec<SceneRecord>,
    pub trials: Vec<SceneTrial>,
}

/// Run every scene through both modes.
pub fn scene_experiment(e: &SceneExperiment) -> Result<SceneReport> {
    if e.scenes == 0 {
        return Err(invalid("scenes must be positive"));
    }
    let enc = SceneEncoder::new(&e.moduli, e.dim, e.features, seed::derive(e.seed, &[0]))?;
    let range = enc.range();
    let grid = i64::try_from(range).map_err(|_| Error::Overflow(format!("range {range}")))?;
    let objects = match &e.corpus {
        Some(c) if c.is_empty() => return Err(invalid("object corpus is empty")),
        Some(c) => c.clone(),
        None => synthetic_objects(e.objects, e.features, e.coeffs_per_object, e.patch.min(grid), grid, seed::derive(e.seed, &[1]))?,
    };
    let codebook = build_object_codebook(&objects, &enc, e.exec)?;
    let mut records = Vec::new();
    let mut trials = Vec::new();
    for mode in [FactorMode::Standard, FactorMode::Residue] {
        let codebooks = scene_codebooks(&codebook, &enc, mode)?;
        let mode_trials = par::map_indices(e.exec, e.scenes, |t| {
            let mut rng = seed::rng(seed::derive(e.seed, &[2, t as u64]));
            let object = rng.random_range(0..objects.len());
            let (x, y) = (rng.random_range(0..range), rng.random_range(0..range));
            let maps = objects[object].translated(x as i64, y as i64);
            let s = enc.encode(&maps, Execution::Sequential)?;
            let config = e.resonator.with_seed(seed::derive(e.seed, &[3, t as u64]));
            let result = factorize_scene(&s, &codebooks, &enc, mode, &config)?;
            let correct = result.success && (result.object, result.x, result.y) == (object as u64, x, y);
            Ok(SceneTrial { object: object as u64, x, y, mode, result, correct })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let n = mode_trials.len() as f64;
        records.push(SceneRecord {
            mode,
            dim: e.dim,
            scenes: e.scenes,
            codebook_vectors: codebook_vector_count(&codebooks),
            accuracy: mode_trials.iter().filter(|t| t.correct).count() as f64 / n,
            mean_evaluations: mode_trials.iter().map(|t| t.result.evaluations as f64).sum::<f64>() / n,
            brute_force_evaluations: brute_force_evaluations(objects.len(), range),
            seed: e.seed,
        });
        trials.extend(mode_trials);
    }
    Ok(SceneReport { records, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encoder(dim: usize) -> SceneEncoder {
        SceneEncoder::new(&[3, 5, 7], dim, 8, 11).unwrap()
    }

    #[test]
    fn empty_maps_encode_to_zero() {
        let enc = encoder(64);
        let s = enc.encode(&FeatureMaps::empty(105, 105), Execution::Sequential).unwrap();
        assert_eq!(s, ComplexVector::zeros(64));
        assert_eq!(FeatureMaps::from_json(r#"{"grid":[105,105],"channels":[]}"#).unwrap().nnz(), 0);
    }

    #[test]
    fn single_coefficient_is_one_bound_term() {
        let enc = encoder(64);
        let maps = FeatureMaps { grid: [105, 105], channels: vec![Channel { id: 1, coeffs: vec![(2, 3, 1.0)] }] };
        let s = enc.encode(&maps, Execution::Sequential).unwrap();
        let mut want = enc.position(2, 3).to_dense();
        want.mul_assign_unchecked(&enc.features()[1], false);
        assert_eq!(s, want);
    }

    #[test]
    fn parse_errors_are_located() {
        let e = FeatureMaps::from_json("{\"grid\":[5,5],\n\"channels\":[{\"id\":0,\"coeffs\":[[1.5,2,1.0]]}]}").unwrap_err();
        assert!(matches!(&e, Error::Parse { location, .. } if location.starts_with("line 2")), "{e}");
        let e = FeatureMaps::from_json(r#"{"grid":[5,5],"channels":[{"id":0,"coeffs":[[1,2,1.0],[5,0,1.0]]}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Parse { location, .. } if location == "channels[0].coeffs[1]"), "{e}");
        assert!(FeatureMaps::from_json(r#"{"grid":[5,5],"channels":[],"x":1}"#).is_err());
    }

    #[test]
    fn translation_and_superposition() {
        let enc = encoder(128);
        let objs = synthetic_objects(2, 8, 6, 10, 105, 5).unwrap();
        let s = enc.encode(&objs[0], Execution::Sequential).unwrap();
        let moved = enc.encode(&objs[0].translated(100, 47), Execution::Parallel).unwrap();
        let mut want = s.clone();
        want.mul_assign_unchecked(&enc.position(100, 47).to_dense(), false);
        for d in 0..128 {
            assert!((moved.get(d) - want.get(d)).norm() < 1e-9);
        }
        let both = enc.encode(&objs[0].superpose(&objs[1]).unwrap(), Execution::Sequential).unwrap();
        let b = enc.encode(&objs[1], Execution::Sequential).unwrap();
        for d in 0..128 {
            assert!((both.get(d) - s.get(d) - b.get(d)).norm() < 1e-9);
        }
        let json = objs[0].to_json().unwrap();
        assert_eq!(FeatureMaps::from_json(&json).unwrap(), objs[0]);
    }

    #[test]
    fn codebook_counts() {
        let enc = encoder(64);
        let objs = synthetic_objects(10, 8, 6, 10, 105, 5).unwrap();
        let cb = build_object_codebook(&objs, &enc, Execution::Sequential).unwrap();
        assert_eq!(cb.len(), 10);
        assert_eq!(codebook_vector_count(&scene_codebooks(&cb, &enc, FactorMode::Standard).unwrap()), 220);
        assert_eq!(codebook_vector_count(&scene_codebooks(&cb, &enc, FactorMode::Residue).unwrap()), 40);
        assert_eq!(brute_force_evaluations(10, 105), 110_250);
    }

    #[test]
    fn factorizes_a_placed_object() {
        let enc = encoder(4096);
        let objs = synthetic_objects(10, 8, 12, 12, 105, 6).unwrap();
        let cb = build_object_codebook(&objs, &enc, Execution::Sequential).unwrap();
        let s = enc.encode(&objs[4].translated(61, 9), Execution::Sequential).unwrap();
        let config = ResonatorConfig { max_restarts: 20, ..Default::default() };
        for mode in [FactorMode::Standard, FactorMode::Residue] {
            let r = factorize_scene(&s, &scene_codebooks(&cb, &enc, mode).unwrap(), &enc, mode, &config).unwrap();
            assert!(r.success, "{mode}");
            assert_eq!((r.object, r.x, r.y), (4, 61, 9), "{mode}");
        }
    }
}
