use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use super::sym::SymTensor;
use crate::counting::factorial;
use crate::error::{Error, Result};

/// Law of the standardized entry `ξ` (mean 0, variance 1) before scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EntryDistribution {
    /// Gaussian with the orthogonally invariant variance profile.
    GaussianGote,
    /// Gaussian with the same variance `1/(p−1)!` on every entry.
    GaussianOffdiagOnly,
    Rademacher,
    Uniform,
    /// `±X` with `X` Pareto of tail index `alpha` (> 2), rescaled to unit variance.
    SymmetrizedPareto {
        alpha: f64,
    },
}

impl EntryDistribution {
    /// `E[ξ^m]`; `None` when only finitely many moments exist.
    pub fn standardized_moment(&self, m: u32) -> Option<f64> {
        if m % 2 == 1 {
            return Some(0.0);
        }
        let k = m / 2;
        match self {
            EntryDistribution::GaussianGote | EntryDistribution::GaussianOffdiagOnly => {
                Some((1..k).fold(1.0, |acc, j| acc * (2 * j + 1) as f64))
            }
            EntryDistribution::Rademacher => Some(1.0),
            EntryDistribution::Uniform => Some(3f64.powi(k as i32) / (2 * k + 1) as f64),
            EntryDistribution::SymmetrizedPareto { .. } => None,
        }
    }

    pub fn has_all_moments(&self) -> bool {
        !matches!(self, EntryDistribution::SymmetrizedPareto { .. })
    }

    pub fn profile(&self) -> VarianceProfile {
        match self {
            EntryDistribution::GaussianOffdiagOnly => VarianceProfile::Flat,
            _ => VarianceProfile::Gote,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EntryDistribution::SymmetrizedPareto { alpha } = self {
            if alpha.is_nan() || *alpha <= 2.0 {
                return Err(Error::Domain(format!(
                    "tail index {alpha} leaves the variance infinite"
                )));
            }
        }
        Ok(())
    }

    /// One draw of `ξ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryDistribution::GaussianGote | EntryDistribution::GaussianOffdiagOnly => {
                StandardNormal.sample(rng)
            }
            EntryDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            EntryDistribution::SymmetrizedPareto { alpha } => {
                let x: f64 = Pareto::new(1.0, alpha).expect("validated").sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * x / (alpha / (alpha - 2.0)).sqrt()
            }
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryDistribution::GaussianGote => write!(f, "gaussian-gote"),
            EntryDistribution::GaussianOffdiagOnly => write!(f, "gaussian-offdiag-only"),
            EntryDistribution::Rademacher => write!(f, "rademacher"),
            EntryDistribution::Uniform => write!(f, "uniform"),
            EntryDistribution::SymmetrizedPareto { alpha } => write!(f, "pareto:{alpha}"),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    /// `gaussian-gote | gaussian | gaussian-offdiag-only | rademacher |
    /// uniform | pareto:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let d = match s {
            "gaussian-gote" | "gaussian" | "gote" => EntryDistribution::GaussianGote,
            "gaussian-offdiag-only" => EntryDistribution::GaussianOffdiagOnly,
            "rademacher" => EntryDistribution::Rademacher,
            "uniform" => EntryDistribution::Uniform,
            _ => {
                let alpha = s
                    .strip_prefix("pareto:")
                    .or_else(|| s.strip_prefix("symmetrized-pareto:"))
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown distribution `{s}`")))?;
                EntryDistribution::SymmetrizedPareto { alpha }
            }
        };
        d.validate()?;
        Ok(d)
    }
}

/// How the entry variance depends on the index pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceProfile {
    /// `σ² = ∏_a c_a! / (p−1)!`, where `c_a` counts occurrences of `a`.
    Gote,
    /// `σ² = 1/(p−1)!` everywhere.
    Flat,
}

impl VarianceProfile {
    /// Variance from the occurrence counts `c_a` of a multi-index.
    pub fn variance_from_counts(&self, p: usize, counts: &[usize]) -> f64 {
        let base = 1.0 / factorial(p as u64 - 1).expect("small order") as f64;
        match self {
            VarianceProfile::Flat => base,
            VarianceProfile::Gote => {
                counts
                    .iter()
                    .map(|&c| factorial(c as u64).expect("small order") as f64)
                    .product::<f64>()
                    * base
            }
        }
    }

    pub fn variance(&self, index: &[usize]) -> f64 {
        let mut sorted = index.to_vec();
        sorted.sort_unstable();
        let mut counts = Vec::new();
        for (k, &i) in sorted.iter().enumerate() {
            if k > 0 && sorted[k - 1] == i {
                *counts.last_mut().unwrap() += 1;
            } else {
                counts.push(1);
            }
        }
        self.variance_from_counts(index.len(), &counts)
    }
}

/// Draws `W` with entries `sqrt(σ²/N^{p−1}) · ξ`, one per sorted multi-index.
pub fn sample_wigner_with<R: Rng + ?Sized>(
    p: usize,
    n: usize,
    dist: EntryDistribution,
    rng: &mut R,
) -> Result<SymTensor> {
    if p < 2 || n == 0 {
        return Err(Error::ContractViolation(format!(
            "sampling needs p >= 2 and N >= 1, got p = {p}, N = {n}"
        )));
    }
    dist.validate()?;
    let profile = dist.profile();
    let norm = (n as f64).powi(p as i32 - 1);
    Ok(SymTensor::from_fn(p, n, |idx| {
        (profile.variance(idx) / norm).sqrt() * dist.sample(rng)
    }))
}

pub fn sample_wigner(p: usize, n: usize, dist: EntryDistribution, seed: u64) -> Result<SymTensor> {
    sample_wigner_with(p, n, dist, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Gaussian orthogonal tensor ensemble, normalized by `N^{(p−1)/2}`.
pub fn sample_gote(p: usize, n: usize, seed: u64) -> Result<SymTensor> {
    sample_wigner(p, n, EntryDistribution::GaussianGote, seed)
}

/// The generator used for sample `s` at dimension `N` under a master seed.
pub fn substream(seed: u64, n: usize, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) ^ s);
    rng
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, with the signs of `R`'s diagonal fixed.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
