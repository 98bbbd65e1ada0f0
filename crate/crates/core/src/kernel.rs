//! Periodic kernels of fractional power encoding modulo `m`.
//!
//! With phases uniform on the `m`-th roots of unity (taken in `(-π, π]`), the
//! infinite-dimensional kernel is the sinc comb `Σ_s sinc(x − m s)`, which has the
//! closed forms `(1/m) sin(πx) cot(πx/m)` for even `m` and `(1/m) sin(πx) csc(πx/m)`
//! for odd `m`. Residue systems induce the product of their moduli's kernels.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::par::{self, Execution};
use crate::phasor::{ComplexVector, ModulusBase};
use crate::residue::ResidueSystem;

/// Normalized sinc, `sin(πt)/(πt)`.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Closed-form kernel of FPE modulo `m` at offset `dx`.
pub fn analytic_kernel(m: u64, dx: f64) -> f64 {
    assert!(m >= 2, "modulus must be at least 2");
    if dx.fract() == 0.0 {
        // Distinct residues are exactly orthogonal.
        return if (dx as i128).rem_euclid(m as i128) == 0 { 1.0 } else { 0.0 };
    }
    let mf = m as f64;
    let x = dx - mf * (dx / mf).round();
    let t = PI * x / mf;
    if t.sin().abs() < 1e-8 {
        // Removable singularity at x ≡ 0 (mod m); second-order expansion.
        let px = PI * x;
        let correction = if m.is_multiple_of(2) { px * px / 6.0 + t * t / 3.0 } else { px * px / 6.0 - t * t / 6.0 };
        return 1.0 - correction;
    }
    let s = (PI * x).sin() / mf;
    if m.is_multiple_of(2) {
        s * t.cos() / t.sin()
    } else {
        s / t.sin()
    }
}

/// Truncated sinc comb `Σ_{s=-n}^{n} sinc(dx − m s)`.
pub fn sinc_comb(m: u64, dx: f64, n_terms: usize) -> Result<f64> {
    if n_terms == 0 {
        return Err(invalid("sinc_comb needs at least one term"));
    }
    let mf = m as f64;
    let n = n_terms as i64;
    // Sum small terms first.
    let mut total = 0.0;
    for k in (0..=n).rev() {
        for s in if k == 0 { vec![0] } else { vec![k, -k] } {
            total += sinc(dx - mf * s as f64);
        }
    }
    Ok(total)
}

/// Product of the moduli's kernels.
pub fn product_kernel(moduli: &[u64], dx: f64) -> f64 {
    moduli.iter().map(|&m| analytic_kernel(m, dx)).product()
}

/// Anything that encodes real values and has a known limiting kernel.
pub trait KernelEncoder: Sync {
    fn dim(&self) -> usize;
    fn encode_real(&self, q: f64) -> ComplexVector;
    fn analytic(&self, dx: f64) -> f64;
}

impl KernelEncoder for ModulusBase {
    fn dim(&self) -> usize {
        ModulusBase::dim(self)
    }

    fn encode_real(&self, q: f64) -> ComplexVector {
        self.encode_rational_dense(q)
    }

    fn analytic(&self, dx: f64) -> f64 {
        analytic_kernel(self.modulus(), dx)
    }
}

impl KernelEncoder for ResidueSystem {
    fn dim(&self) -> usize {
        ResidueSystem::dim(self)
    }

    fn encode_real(&self, q: f64) -> ComplexVector {
        self.encode_rational(q)
    }

    fn analytic(&self, dx: f64) -> f64 {
        product_kernel(self.moduli(), dx)
    }
}

/// One row of an emitted kernel curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub dx: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub abs_error: f64,
}

impl KernelPoint {
    pub fn new(dx: f64, empirical: f64, analytic: f64) -> Self {
        Self { dx, empirical, analytic, abs_error: (empirical - analytic).abs() }
    }
}

/// Empirical kernel `similarity(z(0), z(dx))` over a grid, alongside the analytic value.
pub fn empirical_kernel<E: KernelEncoder>(encoder: &E, grid: &[f64], exec: Execution) -> Vec<KernelPoint> {
    let d = encoder.dim() as f64;
    par::map_slice(exec, grid, |&dx| {
        // z(0) is the all-ones vector, so the similarity is the mean real part.
        let empirical = encoder.encode_real(dx).re().iter().sum::<f64>() / d;
        KernelPoint::new(dx, empirical, encoder.analytic(dx))
    })
}

/// Inclusive grid `start, start + step, …, stop`, computed without accumulating error.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(invalid("grid needs finite start ≤ stop and a positive step"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Write rows as CSV with header `dx,empirical,analytic,abs_error`.
pub fn write_kernel_csv<W: Write>(writer: W, rows: &[KernelPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(analytic_kernel(5, 0.0), 1.0);
        assert_eq!(analytic_kernel(5, 1.0), 0.0);
        assert_eq!(analytic_kernel(5, 10.0), 1.0);
        assert!((analytic_kernel(5, 2.5) - 0.2).abs() < 1e-15);
        assert!((analytic_kernel(6, 1.5) + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn singularity_is_smooth() {
        for m in [5u64, 6] {
            for eps in [1e-9, 1e-7, 1e-5] {
                let near = analytic_kernel(m, eps);
                assert!((near - 1.0).abs() < 1e-8, "m={m} eps={eps} near={near}");
                let near = analytic_kernel(m, m as f64 - eps);
                assert!((near - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn comb_center_term() {
        assert!((sinc_comb(5, 5.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((sinc_comb(5, 5.0, 100).unwrap() - 1.0).abs() < 1e-15);
        assert!(sinc_comb(5, 0.3, 0).is_err());
    }

    #[test]
    fn product_kernel_examples() {
        assert_eq!(product_kernel(&[3, 5], 15.0), 1.0);
        assert_eq!(product_kernel(&[3, 5], 3.0), 0.0);
        assert_eq!(product_kernel(&[3, 5], 5.0), 0.0);
    }

    #[test]
    fn grid_is_inclusive() {
        let g = grid(-5.0, 5.0, 0.1).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], -5.0);
        assert!((g[100] - 5.0).abs() < 1e-12);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &[KernelPoint::new(0.5, 0.25, 0.2)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("dx,empirical,analytic,abs_error"));
        assert!(lines.next().unwrap().starts_with("0.5,0.25,0.2,0.0"));
    }

    #[test]
    fn empirical_at_zero_is_exactly_one() {
        let b = ModulusBase::sample(5, 1000, 0, false).unwrap();
        let rows = empirical_kernel(&b, &[0.0], Execution::Sequential);
        assert_eq!(rows[0].empirical, 1.0);
    }
}
