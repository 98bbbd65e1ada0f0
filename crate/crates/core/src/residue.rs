//! Residue number systems over phasor vectors.
//!
//! An integer `x` is encoded as the Hadamard product of per-modulus encodings
//! `z_{m_k}(x)` for pairwise co-prime moduli. Addition is the Hadamard product;
//! multiplication is the `⋆` binding built from the discrete phase product `f`
//! and per-modulus anti-base vectors (prime moduli only).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{gcd, is_prime, mod_inverse, mod_pow};
use crate::phasor::{conjugate, hadamard, ComplexVector, ExactPhasor, ModulusBase, PhasorVector};
use crate::seed;

fn check_coprime(moduli: &[u64]) -> Result<()> {
    for (i, &a) in moduli.iter().enumerate() {
        if a < 2 {
            return Err(invalid(format!("modulus must be at least 2, got {a}")));
        }
        for &b in &moduli[i + 1..] {
            let g = gcd(a, b);
            if g != 1 {
                return Err(Error::NotCoprime { a, b, gcd: g });
            }
        }
    }
    Ok(())
}

fn product(moduli: &[u64]) -> Result<u64> {
    moduli.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m).ok_or_else(|| Error::Overflow(format!("product of moduli {moduli:?}"))))
}

/// Pairwise co-prime moduli with one random base per modulus, all sharing `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueSystem {
    moduli: Vec<u64>,
    bases: Vec<ModulusBase>,
    range: u64,
    anti: Option<Vec<AntiBase>>,
}

const SYSTEM_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    version: u32,
    moduli: Vec<u64>,
    dim: usize,
    seeds: Vec<u64>,
    nonzero_only: bool,
}

impl ResidueSystem {
    /// Sample `K` independent bases; base `k` uses a seed derived from `(seed, k)`.
    pub fn new(moduli: &[u64], dim: usize, seed: u64, nonzero_only: bool) -> Result<Self> {
        let seeds: Vec<u64> = (0..moduli.len()).map(|k| seed::derive(seed, &[k as u64])).collect();
        Self::with_seeds(moduli, dim, &seeds, nonzero_only)
    }

    fn with_seeds(moduli: &[u64], dim: usize, seeds: &[u64], nonzero_only: bool) -> Result<Self> {
        if moduli.is_empty() {
            return Err(invalid("a residue system needs at least one modulus"));
        }
        if seeds.len() != moduli.len() {
            return Err(invalid("one seed per modulus is required"));
        }
        check_coprime(moduli)?;
        let bases = moduli.iter().zip(seeds).map(|(&m, &s)| ModulusBase::sample(m, dim, s, nonzero_only)).collect::<Result<Vec<_>>>()?;
        Self::from_bases(bases)
    }

    /// Assemble a system from existing bases.
    pub fn from_bases(bases: Vec<ModulusBase>) -> Result<Self> {
        if bases.is_empty() {
            return Err(invalid("a residue system needs at least one modulus"));
        }
        let dim = bases[0].dim();
        if let Some(b) = bases.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: b.dim() });
        }
        let moduli: Vec<u64> = bases.iter().map(ModulusBase::modulus).collect();
        check_coprime(&moduli)?;
        let range = product(&moduli)?;
        let anti = if bases.iter().all(|b| is_prime(b.modulus()) && !b.phase_indices().contains(&0)) {
            Some(bases.iter().map(anti_base).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(Self { moduli, bases, range, anti })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn bases(&self) -> &[ModulusBase] {
        &self.bases
    }

    pub fn dim(&self) -> usize {
        self.bases[0].dim()
    }

    /// Effective range `M = ∏ m_k`.
    pub fn range(&self) -> u64 {
        self.range
    }

    /// Codebook budget `b = Σ m_k`.
    pub fn codebook_budget(&self) -> u64 {
        self.moduli.iter().sum()
    }

    pub fn nonzero_only(&self) -> bool {
        self.bases.iter().all(ModulusBase::nonzero_only)
    }

    pub fn residues(&self, x: i64) -> Vec<u64> {
        self.moduli.iter().map(|&m| (x as i128).rem_euclid(m as i128) as u64).collect()
    }

    /// Per-modulus encodings `z_{m_k}(x)`.
    pub fn encode_factors(&self, x: i64) -> Vec<ExactPhasor> {
        self.bases.iter().map(|b| b.encode_exact(x)).collect()
    }

    /// `z(x) = ⊙_k z_{m_k}(x)`, exact with period `M`.
    pub fn encode(&self, x: i64) -> PhasorVector {
        PhasorVector::Exact(self.encode_exact(x))
    }

    pub fn encode_exact(&self, x: i64) -> ExactPhasor {
        self.compose(&self.encode_factors(x)).expect("factors of one system compose")
    }

    /// Rational encoding: product of per-modulus fractional power encodings.
    pub fn encode_rational(&self, q: f64) -> ComplexVector {
        let mut out = ComplexVector::ones(self.dim());
        for b in &self.bases {
            out.mul_assign_unchecked(&b.encode_rational_dense(q), false);
        }
        out
    }

    /// Hadamard product of per-modulus factors, restated with period `M`.
    pub fn compose(&self, factors: &[ExactPhasor]) -> Result<ExactPhasor> {
        self.check_factors(factors)?;
        let mut out = ExactPhasor::identity(self.dim());
        for f in factors {
            out = out.hadamard(f)?;
        }
        out.with_period(self.range)
    }

    fn check_factors(&self, factors: &[ExactPhasor]) -> Result<()> {
        if factors.len() != self.moduli.len() {
            return Err(invalid(format!("expected {} per-modulus factors, got {}", self.moduli.len(), factors.len())));
        }
        for (f, &m) in factors.iter().zip(&self.moduli) {
            if f.period() != m {
                return Err(Error::PeriodMismatch { left: f.period(), right: m });
            }
            if f.dim() != self.dim() {
                return Err(Error::DimensionMismatch { left: f.dim(), right: self.dim() });
            }
        }
        Ok(())
    }

    /// Split an exact composed vector into its per-modulus factors.
    ///
    /// Raising `z(x)` componentwise to the CRT idempotent `e_k` (`e_k ≡ 1 mod m_k`,
    /// `e_k ≡ 0` mod the other moduli) cancels every factor except `z_{m_k}(x)`.
    pub fn split_exact(&self, v: &ExactPhasor) -> Result<Vec<ExactPhasor>> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: v.dim(), right: self.dim() });
        }
        let v = v.with_period(self.range)?;
        self.moduli
            .iter()
            .map(|&m| {
                let cofactor = self.range / m;
                let inv = mod_inverse(cofactor % m, m).expect("co-prime moduli");
                // Index of v^{e_k}, restated with period m: k ≡ r·cofactor (mod m).
                let indices = v.indices().iter().map(|&k| ((k % m) as u128 * inv as u128 % m as u128) as u64).collect();
                ExactPhasor::new(m, indices)
            })
            .collect()
    }

    /// `z(x₁ + x₂)` from `z(x₁)` and `z(x₂)`.
    pub fn add(&self, a: &PhasorVector, b: &PhasorVector) -> Result<PhasorVector> {
        self.check_dim(a)?;
        hadamard(a, b)
    }

    /// `z(x₁ − x₂)` from `z(x₁)` and `z(x₂)`.
    pub fn subtract(&self, a: &PhasorVector, b: &PhasorVector) -> Result<PhasorVector> {
        self.check_dim(a)?;
        hadamard(a, &conjugate(b))
    }

    fn check_dim(&self, v: &PhasorVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: v.dim(), right: self.dim() });
        }
        Ok(())
    }

    /// Anti-base vectors, present when every modulus is prime and no base phase is zero.
    pub fn anti_bases(&self) -> Option<&[AntiBase]> {
        self.anti.as_deref()
    }

    fn require_anti(&self) -> Result<&[AntiBase]> {
        self.anti.as_deref().ok_or_else(|| Error::Unsupported("multiplicative binding needs prime moduli and nonzero base phases".into()))
    }

    /// `z(x₁) ⋆ z(x₂)` from per-modulus factors: `⊙_k f(f(a_k, b_k), y_k)`.
    pub fn multiply_factors(&self, a: &[ExactPhasor], b: &[ExactPhasor]) -> Result<ExactPhasor> {
        let anti = self.require_anti()?;
        self.check_factors(a)?;
        self.check_factors(b)?;
        let factors = a
            .iter()
            .zip(b)
            .zip(anti)
            .map(|((ak, bk), yk)| f_op(&f_op(ak, bk, yk.modulus)?, &yk.to_exact(), yk.modulus))
            .collect::<Result<Vec<_>>>()?;
        self.compose(&factors)
    }

    /// `⋆` on composed exact vectors, splitting them into factors first.
    pub fn multiply(&self, a: &ExactPhasor, b: &ExactPhasor) -> Result<ExactPhasor> {
        self.require_anti()?;
        self.multiply_factors(&self.split_exact(a)?, &self.split_exact(b)?)
    }

    /// `z(x · c⁻¹)` from the factors of `z(x)`, for `c` invertible modulo every prime modulus.
    pub fn multiply_by_constant_inverse(&self, factors: &[ExactPhasor], c: i64) -> Result<ExactPhasor> {
        self.require_anti()?;
        self.check_factors(factors)?;
        let powered = factors
            .iter()
            .zip(&self.moduli)
            .map(|(f, &m)| {
                let c = (c as i128).rem_euclid(m as i128) as u64;
                let inv = mod_inverse(c, m).ok_or_else(|| Error::Unsupported(format!("{c} is not invertible modulo {m}")))?;
                Ok(f.pow(inv as i64))
            })
            .collect::<Result<Vec<_>>>()?;
        self.compose(&powered)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SystemFile {
            version: SYSTEM_FORMAT_VERSION,
            moduli: self.moduli.clone(),
            dim: self.dim(),
            seeds: self.bases.iter().map(ModulusBase::seed).collect(),
            nonzero_only: self.nonzero_only(),
        })?)
    }

    /// Rebuild a system from its serialized description; bases are re-sampled from
    /// the recorded seeds and come back bit-identical.
    pub fn from_json(s: &str) -> Result<Self> {
        let f: SystemFile = serde_json::from_str(s)?;
        if f.version != SYSTEM_FORMAT_VERSION {
            return Err(Error::Version { found: f.version, expected: SYSTEM_FORMAT_VERSION });
        }
        Self::with_seeds(&f.moduli, f.dim, &f.seeds, f.nonzero_only)
    }
}

/// `make_residue_system(moduli, D, seed, nonzero_only)`.
pub fn make_residue_system(moduli: &[u64], dim: usize, seed: u64, nonzero_only: bool) -> Result<ResidueSystem> {
    ResidueSystem::new(moduli, dim, seed, nonzero_only)
}

/// Modular multiplicative inverses of a base's phase indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntiBase {
    pub modulus: u64,
    pub inverse_indices: Vec<u64>,
}

impl AntiBase {
    pub fn to_exact(&self) -> ExactPhasor {
        ExactPhasor::new(self.modulus, self.inverse_indices.clone()).expect("indices below modulus")
    }
}

/// Anti-base of a prime-modulus base with no zero phase index.
pub fn anti_base(base: &ModulusBase) -> Result<AntiBase> {
    let m = base.modulus();
    if !is_prime(m) {
        return Err(Error::Unsupported(format!("anti-base needs a prime modulus, got {m}")));
    }
    let inverse_indices = base
        .phase_indices()
        .iter()
        .map(|&u| if u == 0 { Err(invalid("zero phase index has no inverse")) } else { Ok(mod_pow(u, m - 2, m)) })
        .collect::<Result<Vec<_>>>()?;
    Ok(AntiBase { modulus: m, inverse_indices })
}

/// Discrete phase product `f(e^{2πi r/m}, e^{2πi s/m}) = e^{2πi rs/m}`, componentwise.
pub fn f_op(a: &ExactPhasor, b: &ExactPhasor, m: u64) -> Result<ExactPhasor> {
    for p in [a.period(), b.period()] {
        if p != m {
            return Err(Error::PeriodMismatch { left: p, right: m });
        }
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let indices = a.indices().iter().zip(b.indices()).map(|(&r, &s)| (r as u128 * s as u128 % m as u128) as u64).collect();
    ExactPhasor::new(m, indices)
}

/// Precomputed products and inverses modulo a small `m`.
#[derive(Clone, Debug)]
pub struct ModularTable {
    m: u64,
    products: Vec<u32>,
    inverses: Vec<Option<u32>>,
}

impl ModularTable {
    pub const MAX_MODULUS: u64 = 4096;

    pub fn new(m: u64) -> Result<Self> {
        if !(2..=Self::MAX_MODULUS).contains(&m) {
            return Err(invalid(format!("lookup tables support 2 ≤ m ≤ {}", Self::MAX_MODULUS)));
        }
        let products = (0..m * m).map(|i| ((i / m) * (i % m) % m) as u32).collect();
        let inverses = (0..m).map(|u| mod_inverse(u, m).map(|v| v as u32)).collect();
        Ok(Self { m, products, inverses })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn mul(&self, r: u64, s: u64) -> u64 {
        u64::from(self.products[(r * self.m + s) as usize])
    }

    pub fn inverse(&self, u: u64) -> Option<u64> {
        self.inverses[u as usize].map(u64::from)
    }

    /// Table-driven [`f_op`].
    pub fn f_op(&self, a: &ExactPhasor, b: &ExactPhasor) -> Result<ExactPhasor> {
        for p in [a.period(), b.period()] {
            if p != self.m {
                return Err(Error::PeriodMismatch { left: p, right: self.m });
            }
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
        }
        let indices = a.indices().iter().zip(b.indices()).map(|(&r, &s)| self.mul(r, s)).collect();
        ExactPhasor::new(self.m, indices)
    }

    /// Table-driven [`anti_base`].
    pub fn anti_base(&self, base: &ModulusBase) -> Result<AntiBase> {
        if base.modulus() != self.m || !is_prime(self.m) {
            return Err(Error::Unsupported("table modulus must match a prime base".into()));
        }
        let inverse_indices = base
            .phase_indices()
            .iter()
            .map(|&u| self.inverse(u).ok_or_else(|| invalid("zero phase index has no inverse")))
            .collect::<Result<Vec<_>>>()?;
        Ok(AntiBase { modulus: self.m, inverse_indices })
    }
}

/// The unique `x ∈ [0, M)` with `x ≡ r_k (mod m_k)`.
pub fn crt_reconstruct(residues: &[u64], moduli: &[u64]) -> Result<u64> {
    if residues.len() != moduli.len() || moduli.is_empty() {
        return Err(invalid("residues and moduli must be non-empty and of equal length"));
    }
    check_coprime(moduli)?;
    let big_m = product(moduli)?;
    let mut x: u128 = 0;
    for (&r, &m) in residues.iter().zip(moduli) {
        if r >= m {
            return Err(invalid(format!("residue {r} not below modulus {m}")));
        }
        let cofactor = big_m / m;
        let inv = mod_inverse(cofactor % m, m).expect("co-prime moduli");
        let term = (r as u128 * inv as u128 % m as u128) * cofactor as u128;
        x = (x + term) % big_m as u128;
    }
    Ok(x as u64)
}

/// Largest `b` accepted by [`landau_g`].
pub const LANDAU_MAX: u64 = 400;

/// Landau's function: the maximum lcm over integer partitions of `b`.
///
/// An optimal partition can always use distinct prime powers plus ones, so this is a
/// knapsack over prime powers with total weight at most `b`.
pub fn landau_g(b: u64) -> Result<u128> {
    if b == 0 {
        return Err(invalid("landau_g needs b ≥ 1"));
    }
    if b > LANDAU_MAX {
        return Err(invalid(format!("landau_g supports b ≤ {LANDAU_MAX}, got {b}")));
    }
    let n = b as usize;
    let mut best = vec![1u128; n + 1];
    for p in crate::numeric::primes_up_to(b) {
        for s in (0..=n).rev() {
            let mut q = p as usize;
            while q <= s {
                best[s] = best[s].max(best[s - q] * q as u128);
                q *= p as usize;
            }
        }
    }
    Ok(best[n])
}
