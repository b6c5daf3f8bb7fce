//! Seeded generators for the property sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{c, random_spd_from_spectrum, random_spd_with, CMatrix, HermitianMatrix, SpdMatrix, Unitary};
use crate::Complex64;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sampler for sample `index` of a sweep seeded with `seed`; each sample
    /// can be replayed on its own.
    pub fn for_sample(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn spd(&mut self, dim: usize, cond: f64) -> Result<SpdMatrix> {
        random_spd_with(&mut self.rng, dim, cond)
    }

    pub fn pair(&mut self, dim: usize, cond: f64) -> Result<(SpdMatrix, SpdMatrix)> {
        Ok((self.spd(dim, cond)?, self.spd(dim, cond)?))
    }

    /// `n` matrices sharing one Haar eigenbasis.
    pub fn commuting(&mut self, dim: usize, n: usize, cond: f64) -> Result<Vec<SpdMatrix>> {
        let q = Unitary::haar(dim, &mut self.rng);
        let half = 0.5 * cond.ln();
        (0..n)
            .map(|_| {
                let spec: Vec<f64> = (0..dim)
                    .map(|_| (half * (2.0 * self.rng.random::<f64>() - 1.0)).exp())
                    .collect();
                random_spd_from_spectrum(&q, &spec)
            })
            .collect()
    }

    pub fn unitary(&mut self, dim: usize) -> Unitary {
        Unitary::haar(dim, &mut self.rng)
    }

    /// Random positive definite matrix with unit trace.
    pub fn density(&mut self, dim: usize, cond: f64) -> Result<SpdMatrix> {
        let r = self.spd(dim, cond)?;
        r.scaled(1.0 / r.trace())
    }

    /// Hermitian direction with unit Frobenius norm.
    pub fn hermitian(&mut self, dim: usize) -> Result<HermitianMatrix> {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = c(self.rng.sample(StandardNormal));
            for j in i + 1..dim {
                let z = Complex64::new(self.rng.sample(StandardNormal), self.rng.sample(StandardNormal));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let h = HermitianMatrix::from_matrix(m)?;
        let n = h.frobenius_norm();
        Ok(h.scaled(1.0 / n))
    }

    /// Positive weights summing to one.
    pub fn weights(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| 0.1 + self.rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        // absorb rounding so the sum is 1 to the last bit where possible
        let rest: f64 = w[1..].iter().sum();
        w[0] = 1.0 - rest;
        w
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut self.rng);
        p
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Scale `b` by powers of `1/2` until `holds(b)`; `None` after 60 halvings.
pub fn shrink_until(b: &SpdMatrix, mut holds: impl FnMut(&SpdMatrix) -> Result<bool>) -> Result<Option<SpdMatrix>> {
    let mut cur = b.clone();
    for _ in 0..60 {
        if holds(&cur)? {
            return Ok(Some(cur));
        }
        cur = cur.scaled(0.5)?;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_replayable() {
        let a = Sampler::for_sample(7, 3).spd(3, 10.0).unwrap();
        let b = Sampler::for_sample(7, 3).spd(3, 10.0).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
        let c = Sampler::for_sample(7, 4).spd(3, 10.0).unwrap();
        assert_ne!(a.as_matrix(), c.as_matrix());
    }

    #[test]
    fn generated_objects_satisfy_contracts() {
        let mut s = Sampler::new(1);
        let ms = s.commuting(4, 3, 1e2).unwrap();
        let comm = ms[0].as_matrix() * ms[1].as_matrix() - ms[1].as_matrix() * ms[0].as_matrix();
        assert!(crate::linalg::frobenius(&comm) < 1e-12 * ms[0].frobenius_norm() * ms[1].frobenius_norm());
        assert!((s.density(3, 10.0).unwrap().trace() - 1.0).abs() < 1e-14);
        assert!((s.hermitian(4).unwrap().frobenius_norm() - 1.0).abs() < 1e-14);
        let w = s.weights(5);
        assert!(w.iter().all(|x| *x > 0.0) && (w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let mut p = s.permutation(6);
        p.sort();
        assert_eq!(p, (0..6).collect::<Vec<_>>());
    }
}
