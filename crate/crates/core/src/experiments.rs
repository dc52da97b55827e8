//! Monte Carlo and exact-expectation experiments with CSV/JSON output.

use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::is_melonic_recursive;
use crate::limitlaw::{contracted_law, moment};
use crate::maps::{enumerate_rooted_connected, CombinatorialMap, MAX_MATCHING_HALFEDGES};
use crate::numerics::{pairwise_sum, CompensatedSum};
use crate::tensor::{
    as_matrix, contract, expected_trace_partition, melonic_weight, resolvent_series,
    sample_wigner_with, substream, BalancedInvariant, EntryDistribution, SymTensor,
};

fn default_samples() -> usize {
    200
}

/// Parameters shared by the experiment drivers; one JSON object on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: usize,
    pub n_max: usize,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dist")]
    pub dist: EntryDistribution,
    /// Contraction depth.
    #[serde(default)]
    pub k: usize,
    /// Contract against a random unit vector instead of `e⁽¹⁾`.
    #[serde(default)]
    pub random_unit: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_dist() -> EntryDistribution {
    EntryDistribution::GaussianGote
}

impl ExperimentConfig {
    pub fn new(p: usize, n_max: usize, n_grid: Vec<usize>, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            p,
            n_max,
            n_grid,
            samples,
            seed,
            dist: default_dist(),
            k: 0,
            random_unit: false,
            out: None,
            threads: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ContractViolation(msg));
        if self.p < 2 {
            return bad(format!("order p = {} must be at least 2", self.p));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("N_grid must hold positive dimensions".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("N_grid must be strictly ascending".into());
        }
        if self.samples < 2 {
            return bad("at least two samples are needed for a variance".into());
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive".into());
        }
        self.dist.validate()
    }

    /// Runs `f` inside a pool of the configured size.
    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map(|pool| pool.install(f))
                .map_err(|e| Error::Resource(e.to_string())),
        }
    }
}

/// Summary of `I_n/N` over the samples at one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
    pub target: f64,
    pub deviation: f64,
    pub median: f64,
    pub iqr: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl MomentEstimate {
    pub fn from_samples(dim: usize, n: usize, values: &[f64], target: f64) -> Self {
        let s = values.len() as f64;
        let mean = pairwise_sum(values) / s;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
        let variance = pairwise_sum(&sq) / (s - 1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        MomentEstimate {
            dim,
            n,
            mean,
            stderr: (variance / s).sqrt(),
            variance,
            target,
            deviation: mean - target,
            median: quantile(&sorted, 0.5),
            iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
        }
    }
}

fn invariants(p: usize, n_max: usize) -> Result<Vec<BalancedInvariant>> {
    if p * n_max > MAX_MATCHING_HALFEDGES {
        return Err(Error::Resource(format!(
            "I_n up to n = {n_max} needs maps with {} halfedges (limit {MAX_MATCHING_HALFEDGES})",
            p * n_max
        )));
    }
    (1..=n_max).map(|n| BalancedInvariant::new(p, n)).collect()
}

/// Evaluates `observe` on one tensor per sample for every `N` of the grid,
/// in parallel, returning per-`N` rows of per-sample observation vectors.
fn sample_grid<F>(cfg: &ExperimentConfig, observe: F) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    cfg.install(|| {
        cfg.n_grid
            .iter()
            .map(|&dim| {
                (0..cfg.samples as u64)
                    .into_par_iter()
                    .map(|s| observe(dim, &mut substream(cfg.seed, dim, s)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    })?
}

fn summarize(
    cfg: &ExperimentConfig,
    rows: Vec<Vec<Vec<f64>>>,
    target: impl Fn(usize) -> f64,
) -> Vec<MomentEstimate> {
    let mut out = Vec::new();
    for (&dim, per_sample) in cfg.n_grid.iter().zip(rows) {
        for n in 1..=cfg.n_max {
            let values: Vec<f64> = per_sample.iter().map(|v| v[n - 1]).collect();
            out.push(MomentEstimate::from_samples(dim, n, &values, target(n)));
        }
    }
    out
}

/// Monte Carlo estimates of `E[I_n/N]` for `n = 1..=n_max` at every `N`.
pub fn mc_moments(cfg: &ExperimentConfig) -> Result<Vec<MomentEstimate>> {
    cfg.validate()?;
    let inv = invariants(cfg.p, cfg.n_max)?;
    let rows = sample_grid(cfg, |dim, rng| {
        let t = sample_wigner_with(cfg.p, dim, cfg.dist, rng)?;
        inv.iter()
            .map(|i| Ok(i.evaluate(&t)? / dim as f64))
            .collect()
    })?;
    Ok(summarize(cfg, rows, |n| moment(cfg.p, n) as f64))
}

/// Sample variances of `I_n/N` with `n = cfg.n_max` and their log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceScaling {
    pub n: usize,
    pub rows: Vec<MomentEstimate>,
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::ContractViolation("a slope needs two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

pub fn variance_scaling(cfg: &ExperimentConfig) -> Result<VarianceScaling> {
    if cfg.n_grid.len() < 2 {
        return Err(Error::ContractViolation(
            "variance scaling needs at least two dimensions".into(),
        ));
    }
    if cfg.n_max == 0 {
        return Err(Error::ContractViolation("n_max must be positive".into()));
    }
    let n = cfg.n_max;
    let rows: Vec<MomentEstimate> = mc_moments(cfg)?.into_iter().filter(|e| e.n == n).collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|e| (e.dim as f64, e.variance)).collect();
    let slope = log_log_slope(&points)?;
    Ok(VarianceScaling { n, rows, slope })
}

/// One map of `𝓑_n` at one dimension: exact `E[Tr_b]/N` next to its limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapLimitRow {
    pub map: usize,
    pub tau: Vec<usize>,
    pub melonic: bool,
    #[serde(rename = "N")]
    pub dim: usize,
    pub expected: f64,
    pub alpha: f64,
    pub deviation: f64,
}

pub fn lemma_tree_table(
    p: usize,
    n: usize,
    n_grid: &[usize],
    dist: EntryDistribution,
) -> Result<Vec<MapLimitRow>> {
    let maps = enumerate_rooted_connected(p, n)?;
    let mut rows = Vec::new();
    for (i, b) in maps.iter().enumerate() {
        let melonic = is_melonic_recursive(b)?;
        let alpha = if melonic { melonic_weight(p, n) } else { 0.0 };
        for &dim in n_grid {
            let expected = expected_trace_partition(b, dim, &dist)? / dim as f64;
            rows.push(MapLimitRow {
                map: i,
                tau: b.tau().image().to_vec(),
                melonic,
                dim,
                expected,
                alpha,
                deviation: expected - alpha,
            });
        }
    }
    Ok(rows)
}

/// Exact `E[I_n/N]` as the sum of `E[Tr_b]/N` over `𝓑_n`.
pub fn exact_moment(p: usize, n: usize, dim: usize, dist: EntryDistribution) -> Result<f64> {
    let maps = enumerate_rooted_connected(p, n)?;
    let values = maps
        .iter()
        .map(|b| expected_trace_partition(b, dim, &dist))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&values) / dim as f64)
}

fn unit_vector(dim: usize, random: bool, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    if !random {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    }
    let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.into_iter().map(|x| x / norm).collect()
}

/// `N^{k/2} · W(u, …, u, ·)`, contracted `k` times.
pub fn contract_rescaled(t: &SymTensor, u: &[f64], k: usize) -> Result<SymTensor> {
    let c = contract(t, &vec![u.to_vec(); k])?;
    let scale = (t.dim() as f64).powf(k as f64 / 2.0);
    let entries = c.as_slice().iter().map(|x| x * scale).collect();
    SymTensor::from_vec(c.order(), c.dim(), entries)
}

/// Moments of the GOTE tensor contracted `cfg.k` times against `e⁽¹⁾` (or a
/// random unit vector) and rescaled by `N^{k/2}`.
pub fn contraction_experiment(cfg: &ExperimentConfig) -> Result<Vec<MomentEstimate>> {
    let (p, k) = (cfg.p, cfg.k);
    let law = contracted_law(p, k)?;
    if cfg.dist != EntryDistribution::GaussianGote {
        return Err(Error::Unsupported(
            "contraction is only run with GOTE entries".into(),
        ));
    }
    let inv = invariants(p - k, cfg.n_max)?;
    let rows = sample_grid(cfg, |dim, rng| {
        let t = sample_wigner_with(p, dim, cfg.dist, rng)?;
        let u = unit_vector(dim, cfg.random_unit, rng);
        let c = contract_rescaled(&t, &u, k)?;
        inv.iter()
            .map(|i| Ok(i.evaluate(&c)? / dim as f64))
            .collect()
    })?;
    Ok(summarize(cfg, rows, |n| law.moment(n)))
}

/// Same pipeline as [`mc_moments`]; medians and interquartile ranges are the
/// quantities to read when the entries are heavy tailed.
pub fn heavy_tail_experiment(cfg: &ExperimentConfig) -> Result<Vec<MomentEstimate>> {
    mc_moments(cfg)
}

/// Truncated series against the dense resolvent trace of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventCheck {
    pub series: Complex64,
    pub direct: Complex64,
    pub gap: f64,
    /// `(ρ/|z|)^{K+1}/(|z| − ρ)` with `ρ` the spectral radius.
    pub bound: f64,
    pub spectral_radius: f64,
}

/// Largest `ρ/|z|` accepted by the resolvent check.
pub const MAX_RADIUS_RATIO: f64 = 0.99;

pub fn resolvent_check_tensor(t: &SymTensor, z: Complex64, k: usize) -> Result<ResolventCheck> {
    let m = as_matrix(t)?;
    let dim = t.dim();
    let mat = DMatrix::from_fn(dim, dim, |i, j| m[(i, j)]);
    let eig = mat.symmetric_eigenvalues();
    let rho = eig.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    if rho >= MAX_RADIUS_RATIO * z.norm() {
        return Err(Error::Domain(format!(
            "|z| = {} is too close to the spectral radius {rho}",
            z.norm()
        )));
    }
    // 1/(z−λ) = 1/z + λ/(z(z−λ)); only the small correction is averaged
    let terms: Vec<Complex64> = eig.iter().map(|&l| l / (z * (z - l))).collect();
    let re: CompensatedSum = terms.iter().map(|t| t.re).collect();
    let im: CompensatedSum = terms.iter().map(|t| t.im).collect();
    let direct = 1.0 / z + Complex64::new(re.value(), im.value()) / dim as f64;
    let series = resolvent_series(t, z, k)?;
    Ok(ResolventCheck {
        series,
        direct,
        gap: (series - direct).norm(),
        bound: (rho / z.norm()).powi(k as i32 + 1) / (z.norm() - rho),
        spectral_radius: rho,
    })
}

/// Resolvent check for a GOE matrix `M/√N` of dimension `dim`.
pub fn matrix_resolvent_check(
    dim: usize,
    z: Complex64,
    k: usize,
    seed: u64,
) -> Result<ResolventCheck> {
    let t = crate::tensor::sample_gote(2, dim, seed)?;
    resolvent_check_tensor(&t, z, k)
}

/// Rows that can be written as CSV with fixed columns.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Floats with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl CsvRow for MomentEstimate {
    fn header() -> &'static [&'static str] {
        &[
            "N",
            "n",
            "mean",
            "stderr",
            "variance",
            "target",
            "deviation",
            "median",
            "iqr",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.dim.to_string(), self.n.to_string()];
        f.extend(
            [
                self.mean,
                self.stderr,
                self.variance,
                self.target,
                self.deviation,
                self.median,
                self.iqr,
            ]
            .map(fmt_float),
        );
        f
    }
}

impl CsvRow for MapLimitRow {
    fn header() -> &'static [&'static str] {
        &[
            "map",
            "tau",
            "melonic",
            "N",
            "expected",
            "alpha",
            "deviation",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let tau: Vec<String> = self.tau.iter().map(|x| x.to_string()).collect();
        vec![
            self.map.to_string(),
            tau.join(" "),
            self.melonic.to_string(),
            self.dim.to_string(),
            fmt_float(self.expected),
            fmt_float(self.alpha),
            fmt_float(self.deviation),
        ]
    }
}

/// Writes a header and preformatted rows as CSV.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<String>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], w: W) -> Result<()> {
    let fields: Vec<Vec<String>> = rows.iter().map(CsvRow::fields).collect();
    write_table(R::header(), &fields, w)
}

pub fn to_csv_string<R: CsvRow>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii output"))
}

/// Map list handy for reports: `(τ image, melonic)`.
pub fn classify(p: usize, n: usize) -> Result<Vec<(CombinatorialMap, bool)>> {
    enumerate_rooted_connected(p, n)?
        .into_iter()
        .map(|b| {
            let m = is_melonic_recursive(&b)?;
            Ok((b, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let e = MomentEstimate::from_samples(1, 1, &[4.0, 1.0, 3.0, 2.0, 5.0], 0.0);
        assert_eq!(e.median, 3.0);
        assert_eq!(e.iqr, 2.0);
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.variance, 2.5);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0]
            .iter()
            .map(|&x| (x, 3.0 / (x * x)))
            .collect();
        assert!((log_log_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
    }

    #[test]
    fn config_roundtrip() {
        let mut cfg = ExperimentConfig::new(3, 2, vec![8, 16], 10, 7);
        cfg.dist = EntryDistribution::Rademacher;
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"N_grid\""));
        assert_eq!(ExperimentConfig::from_json(&s).unwrap(), cfg);
        let bad = ExperimentConfig::new(3, 2, vec![16, 8], 10, 7);
        assert!(bad.validate().is_err());
    }
}
