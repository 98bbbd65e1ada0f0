//! Multi-dimensional residue codes: Cartesian products of per-axis systems and the
//! hexagonal coordinate system.
//!
//! A hexagonal code projects a 2-D point onto three directions at 120° with `Ψ` and
//! encodes the 3-D coordinate with a triplet of bases whose phase indices sum to zero
//! modulo `m` in every component. Then `z(y + t·(1,1,1)) = z(y)`, and every state has
//! a representative with non-negative coordinates.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::analytic_kernel;
use crate::phasor::{centered, ComplexVector, ExactPhasor, ModulusBase};
use crate::residue::{crt_reconstruct, ResidueSystem};
use crate::resonator::{resonator_factorize, Codebook, ResonatorConfig};
use crate::seed;

const S3_2: f64 = 0.866_025_403_784_438_6;

/// Rows are the three lattice directions.
pub const PSI: [[f64; 2]; 3] = [[-S3_2, -0.5], [S3_2, -0.5], [0.0, 1.0]];

/// `Ψ x`.
pub fn hex_project(x: [f64; 2]) -> [f64; 3] {
    PSI.map(|row| row[0] * x[0] + row[1] * x[1])
}

/// Nearest integer 3-D coordinate to `Ψ x`; exact halves round down.
pub fn nearest_hex_coordinate(x: [f64; 2]) -> [i64; 3] {
    hex_project(x).map(|v| (v - 0.5).ceil() as i64)
}

/// Bases for one modulus: per component, `(a, b, c)` uniform over the triples with
/// `a + b + c ≡ 0 (mod m)`.
pub fn sample_hex_base(m: u64, dim: usize, seed: u64) -> Result<[ModulusBase; 3]> {
    if m < 2 || dim == 0 {
        return Err(invalid(format!("hex base needs m ≥ 2 and D ≥ 1 (m={m}, D={dim})")));
    }
    let mut rng = seed::rng(seed);
    let (mut a, mut b, mut c) = (Vec::with_capacity(dim), Vec::with_capacity(dim), Vec::with_capacity(dim));
    for _ in 0..dim {
        let (x, y) = (rng.random_range(0..m), rng.random_range(0..m));
        a.push(x);
        b.push(y);
        c.push((2 * m - x - y) % m);
    }
    Ok([
        ModulusBase::from_indices(m, seed, false, a)?,
        ModulusBase::from_indices(m, seed, false, b)?,
        ModulusBase::from_indices(m, seed, false, c)?,
    ])
}

/// Hexagonal residue code over co-prime moduli; one constrained triplet per modulus.
#[derive(Clone, Debug)]
pub struct HexSystem {
    /// One residue system per direction, sharing moduli.
    directions: [ResidueSystem; 3],
}

impl HexSystem {
    pub fn new(moduli: &[u64], dim: usize, seed: u64) -> Result<Self> {
        let mut per_dir: [Vec<ModulusBase>; 3] = Default::default();
        for (k, &m) in moduli.iter().enumerate() {
            for (dir, base) in sample_hex_base(m, dim, seed::derive(seed, &[k as u64]))?.into_iter().enumerate() {
                per_dir[dir].push(base);
            }
        }
        let [a, b, c] = per_dir;
        Ok(Self { directions: [ResidueSystem::from_bases(a)?, ResidueSystem::from_bases(b)?, ResidueSystem::from_bases(c)?] })
    }

    pub fn moduli(&self) -> &[u64] {
        self.directions[0].moduli()
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    /// Period `M` of each coordinate.
    pub fn range(&self) -> u64 {
        self.directions[0].range()
    }

    pub fn directions(&self) -> &[ResidueSystem; 3] {
        &self.directions
    }

    /// Codebook vectors needed to decode: three directions per modulus.
    pub fn codebook_size(&self) -> u64 {
        3 * self.directions[0].codebook_budget()
    }

    /// `z(y) = z₁(y₁) ⊙ z₂(y₂) ⊙ z₃(y₃)`.
    pub fn encode(&self, y: [i64; 3]) -> ExactPhasor {
        let [a, b, c] = &self.directions;
        let ab = a.encode_exact(y[0]).hadamard(&b.encode_exact(y[1])).expect("equal dims and periods");
        ab.hadamard(&c.encode_exact(y[2])).expect("equal dims and periods")
    }

    /// Encode the lattice cell nearest to a 2-D point.
    pub fn encode_cell(&self, x: [f64; 2]) -> ExactPhasor {
        self.encode(nearest_hex_coordinate(x))
    }

    /// Continuous encoding of a real 3-D coordinate. The third direction's phase is
    /// taken as exactly minus the sum of the other two (centered) phases, so the
    /// `(1,1,1)` invariance also holds off the lattice.
    pub fn encode_real(&self, y: [f64; 3]) -> ComplexVector {
        let dim = self.dim();
        let mut total = vec![0.0; dim];
        for k in 0..self.moduli().len() {
            let m = self.moduli()[k];
            let (ua, ub) = (self.directions[0].bases()[k].phase_indices(), self.directions[1].bases()[k].phase_indices());
            for d in 0..dim {
                let (ta, tb) = (TAU * centered(ua[d], m) as f64 / m as f64, TAU * centered(ub[d], m) as f64 / m as f64);
                total[d] += ta * (y[0] - y[2]) + tb * (y[1] - y[2]);
            }
        }
        ComplexVector::from_phases(total)
    }

    /// Continuous encoding of a 2-D point, `z(Ψ x)`.
    pub fn encode_point(&self, x: [f64; 2]) -> ComplexVector {
        self.encode_real(hex_project(x))
    }

    /// Empirical kernel `similarity(z(0), z(Ψ x))`.
    pub fn kernel(&self, x: [f64; 2]) -> f64 {
        let v = self.encode_point(x);
        v.re().iter().sum::<f64>() / v.dim() as f64
    }

    /// Limiting kernel: `∏_m K_m(y₁ − y₃) · K_m(y₂ − y₃)` with `y = Ψ x`.
    pub fn analytic_kernel(&self, x: [f64; 2]) -> f64 {
        hex_analytic_kernel(self.moduli(), x)
    }

    /// Decode to the representative with `y₃ = 0`.
    ///
    /// The shift invariance makes a three-direction factorization degenerate, so the
    /// resonator factorizes over the first two directions only.
    pub fn decode(&self, v: &ComplexVector, config: &ResonatorConfig) -> Result<[i64; 3]> {
        let mut codebooks = Vec::new();
        for dir in &self.directions[..2] {
            for base in dir.bases() {
                codebooks.push(Codebook::from_base(base)?);
            }
        }
        let out = resonator_factorize(v, &codebooks, config)?;
        if !out.success {
            return Err(Error::NotConverged { attempts: out.attempts, best_similarity: out.similarity });
        }
        let labels = out.labels(&codebooks);
        let k = self.moduli().len();
        let u = crt_reconstruct(&labels[..k], self.moduli())?;
        let w = crt_reconstruct(&labels[k..], self.moduli())?;
        Ok([u as i64, w as i64, 0])
    }
}

/// Limiting hex kernel for a list of moduli at 2-D offset `x`.
pub fn hex_analytic_kernel(moduli: &[u64], x: [f64; 2]) -> f64 {
    let y = hex_project(x);
    moduli.iter().map(|&m| analytic_kernel(m, y[0] - y[2]) * analytic_kernel(m, y[1] - y[2])).product()
}

/// 2-D point whose projection is `y` up to a `(1,1,1)` shift.
pub fn lattice_point(y: [i64; 3]) -> [f64; 2] {
    let y = y.map(|v| v as f64);
    [0, 1].map(|c| 2.0 / 3.0 * (0..3).map(|i| PSI[i][c] * y[i]).sum::<f64>())
}

/// Shift a coordinate by a multiple of `(1,1,1)` so its smallest entry is zero.
pub fn canonical_hex(y: [i64; 3]) -> [i64; 3] {
    let min = y.iter().copied().min().expect("three entries");
    y.map(|v| v - min)
}

/// Lattice states with coordinates in `[0, m)`, counted up to `(1,1,1)` shifts.
pub fn hex_state_count(m: u64) -> u64 {
    if m == 0 {
        return 0;
    }
    3 * m * m - 3 * m + 1
}

pub fn square_state_count(m: u64) -> u64 {
    m * m
}

/// Brute-force orbit count behind [`hex_state_count`].
pub fn hex_state_count_brute_force(m: u64) -> u64 {
    let m = m as i64;
    let mut seen = HashSet::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                seen.insert(canonical_hex([a, b, c]));
            }
        }
    }
    seen.len() as u64
}

pub fn hex_codebook_size(m: u64) -> u64 {
    3 * m
}

pub fn square_codebook_size(m: u64) -> u64 {
    2 * m
}

/// Entropy in bits of a uniform code over `states` states.
pub fn code_entropy(states: u64) -> f64 {
    (states as f64).log2()
}

/// Per-axis residue systems; a point encodes as the product of its axis encodings.
#[derive(Clone, Debug)]
pub struct CartesianSystem {
    axes: Vec<ResidueSystem>,
}

impl CartesianSystem {
    /// `n` axes over the same moduli with independent bases.
    pub fn new(n: usize, moduli: &[u64], dim: usize, seed: u64, nonzero_only: bool) -> Result<Self> {
        if n == 0 {
            return Err(invalid("at least one axis is required"));
        }
        let axes = (0..n).map(|k| ResidueSystem::new(moduli, dim, seed::derive(seed, &[k as u64]), nonzero_only)).collect::<Result<_>>()?;
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[ResidueSystem] {
        &self.axes
    }

    fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.axes.len() {
            return Err(Error::DimensionMismatch { left: self.axes.len(), right: x.len() });
        }
        Ok(())
    }

    pub fn encode(&self, x: &[i64]) -> Result<ExactPhasor> {
        self.check(x)?;
        let mut out = ExactPhasor::identity(self.axes[0].dim());
        for (axis, &xi) in self.axes.iter().zip(x) {
            out = out.hadamard(&axis.encode_exact(xi))?;
        }
        Ok(out)
    }

    /// Per-axis, per-modulus factors of `z(x)`.
    pub fn encode_factors(&self, x: &[i64]) -> Result<Vec<Vec<ExactPhasor>>> {
        self.check(x)?;
        Ok(self.axes.iter().zip(x).map(|(axis, &xi)| axis.encode_factors(xi)).collect())
    }

    /// `z(x ⊙ x′)` from the factors of `z(x)` and `z(x′)`.
    pub fn multiply(&self, a: &[Vec<ExactPhasor>], b: &[Vec<ExactPhasor>]) -> Result<ExactPhasor> {
        if a.len() != self.axes.len() || b.len() != self.axes.len() {
            return Err(Error::DimensionMismatch { left: self.axes.len(), right: a.len().min(b.len()) });
        }
        let mut out = ExactPhasor::identity(self.axes[0].dim());
        for ((axis, fa), fb) in self.axes.iter().zip(a).zip(b) {
            out = out.hadamard(&axis.multiply_factors(fa, fb)?)?;
        }
        Ok(out)
    }
}

/// One heatmap sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapPoint {
    pub x: f64,
    pub y: f64,
    pub similarity: f64,
}

/// Empirical hex kernel over the square grid `[−extent, extent]²` with `steps` cells a side.
pub fn hex_heatmap(sys: &HexSystem, extent: f64, steps: usize, exec: crate::par::Execution) -> Result<Vec<HeatmapPoint>> {
    if steps < 2 || !(extent > 0.0) {
        return Err(invalid("heatmap needs at least two steps and a positive extent"));
    }
    let h = 2.0 * extent / (steps - 1) as f64;
    Ok(crate::par::map_indices(exec, steps * steps, |i| {
        let (x, y) = (-extent + (i % steps) as f64 * h, -extent + (i / steps) as f64 * h);
        HeatmapPoint { x, y, similarity: sys.kernel([x, y]) }
    }))
}

/// Write a heatmap as CSV with header `x,y,similarity`.
pub fn write_heatmap_csv<W: Write>(writer: W, points: &[HeatmapPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
