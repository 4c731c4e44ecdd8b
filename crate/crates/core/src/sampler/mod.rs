//! Tropical sampling, Monte Carlo and cubature estimates of `∫ F/G Ω`, and
//! rejection sampling from the density `F/G`.
//!
//! Random streams are split into fixed blocks of [`BLOCK`] draws. Block `b`
//! uses a ChaCha8 generator seeded with `seed` on stream `b`, so results
//! depend only on the seed and never on the thread count.

mod alias;

pub use alias::AliasTable;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{format_rat, ln_rat};
use crate::tropical::SectorTable;

pub const BLOCK: usize = 1024;

/// Running sums of `exp(v)` and `exp(2v)` for log-values `v`, kept relative
/// to the running maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAccumulator {
    max: f64,
    s1: f64,
    s2: f64,
    n: u64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        LogAccumulator { max: f64::NEG_INFINITY, s1: 0.0, s2: 0.0, n: 0 }
    }
}

impl LogAccumulator {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            let r = (self.max - v).exp();
            self.s1 = self.s1 * r + 1.0;
            self.s2 = self.s2 * r * r + 1.0;
            self.max = v;
        } else {
            let e = (v - self.max).exp();
            self.s1 += e;
            self.s2 += e * e;
        }
    }

    pub fn merge(&mut self, o: &LogAccumulator) {
        self.n += o.n;
        if o.max == f64::NEG_INFINITY {
            return;
        }
        if o.max > self.max {
            let r = (self.max - o.max).exp();
            self.s1 = self.s1 * r + o.s1;
            self.s2 = self.s2 * r * r + o.s2;
            self.max = o.max;
        } else {
            let r = (o.max - self.max).exp();
            self.s1 += o.s1 * r;
            self.s2 += o.s2 * r * r;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// `ln Σ exp(v)`.
    pub fn log_sum(&self) -> f64 {
        self.max + self.s1.ln()
    }

    pub fn log_mean(&self) -> f64 {
        self.log_sum() - (self.n as f64).ln()
    }

    /// `ln` of the standard error of the mean, from the sample variance.
    pub fn log_stderr(&self) -> f64 {
        if self.n < 2 || self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let n = self.n as f64;
        let m = self.s1 / n;
        let var = ((self.s2 / n - m * m) * n / (n - 1.0)).max(0.0);
        self.max + 0.5 * (var / n).ln()
    }
}

fn finite(v: f64) -> Option<f64> {
    if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

/// Runs `work(rng, block_index, count)` over blocks covering `n` draws and
/// returns the block results in block order.
pub fn run_blocks<T, F>(n: usize, seed: u64, threads: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize, usize) -> T + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let count = BLOCK.min(n - b * BLOCK);
                work(&mut rng, b, count)
            })
            .collect()
    }))
}

/// One draw from the tropical density: a sector chosen with probability
/// `I^tr_σ / I^tr` and a uniform point of its cube. Returns the sector and
/// `ln t`.
pub fn draw_tropical<R: Rng + ?Sized>(table: &SectorTable, rng: &mut R) -> (usize, Vec<f64>) {
    let mut y = vec![0.0; table.integrand().dim()];
    let s = draw_into(table, rng, &mut y);
    (s, y)
}

fn draw_into<R: Rng + ?Sized>(table: &SectorTable, rng: &mut R, y: &mut [f64]) -> usize {
    let s = table.alias().sample(rng);
    let mut lq = [0f64; 16];
    let n = y.len();
    let mut heap = Vec::new();
    let lq: &mut [f64] = if n <= 16 {
        &mut lq[..n]
    } else {
        heap.resize(n, 0.0);
        &mut heap
    };
    for v in lq.iter_mut() {
        // 1 - U lies in (0, 1].
        *v = (-rng.random::<f64>()).ln_1p();
    }
    table.cube_map_torus_unchecked(s, lq, y);
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    #[serde(rename = "I_N")]
    pub value: Option<f64>,
    pub log_value: f64,
    pub stderr: Option<f64>,
    pub log_stderr: f64,
    pub bound: Option<f64>,
    pub log_bound: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub trop_total: String,
}

/// `I_N = (I^tr/N) Σ h(x_i)` over tropical draws.
pub fn mc_estimate(table: &SectorTable, n: usize, seed: u64, threads: usize) -> Result<McEstimate> {
    mc_estimate_with(table, n, seed, threads, |_, _, log_h| log_h)
}

/// Estimates `I^tr · E[exp ψ]` under the tropical density, where `ψ` gets
/// the sector, `ln t` and `ln h`.
pub fn mc_estimate_with<P>(table: &SectorTable, n: usize, seed: u64, threads: usize, psi: P) -> Result<McEstimate>
where
    P: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    if n < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs N >= 2".into()));
    }
    let integrand = table.integrand();
    let dim = integrand.dim();
    let parts = run_blocks(n, seed, threads, |rng, _, count| {
        let mut acc = LogAccumulator::default();
        let mut y = vec![0.0; dim];
        for _ in 0..count {
            let s = draw_into(table, rng, &mut y);
            acc.push(psi(s, &y, integrand.log_h(&y)));
        }
        acc
    })?;
    let mut acc = LogAccumulator::default();
    for p in &parts {
        acc.merge(p);
    }
    let log_trop = ln_rat(table.trop_total());
    let log_value = log_trop + acc.log_mean();
    let log_stderr = log_trop + acc.log_stderr();
    let log_bound = log_stddev_bound(table, n);
    Ok(McEstimate {
        value: finite(log_value.exp()),
        log_value,
        stderr: finite(log_stderr.exp()),
        log_stderr,
        bound: finite(log_bound.exp()),
        log_bound,
        n,
        seed,
        trop_total: format_rat(table.trop_total()),
    })
}

/// `ln(I^tr · sqrt((M2² - M1²)/N))`.
pub fn log_stddev_bound(table: &SectorTable, n: usize) -> f64 {
    let (m1, m2) = table.h_bounds();
    let (l1, l2) = (ln_rat(m1), ln_rat(m2));
    ln_rat(table.trop_total()) + l2 + 0.5 * (-(2.0 * (l1 - l2)).exp()).ln_1p() - 0.5 * (n as f64).ln()
}

/// `I^tr · sqrt((M2² - M1²)/N)`.
pub fn stddev_bound(table: &SectorTable, n: usize) -> f64 {
    log_stddev_bound(table, n).exp()
}

/// One rejection-sampling attempt.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub sector: usize,
    pub log_x: Vec<f64>,
    pub log_h: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub m1: String,
    pub m2: String,
    pub log_m1: f64,
    pub log_m2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub acceptance_lower_bound: f64,
    pub seed: u64,
    #[serde(rename = "M1")]
    pub m1: String,
    #[serde(rename = "M2")]
    pub m2: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn accepted(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.accepted)
    }

    pub fn num_accepted(&self) -> usize {
        self.accepted().count()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.num_accepted() as f64 / self.samples.len() as f64
        }
    }

    /// `M1/M2`, a lower bound on the expected acceptance rate.
    pub fn acceptance_lower_bound(&self) -> f64 {
        (self.log_m1 - self.log_m2).exp()
    }

    pub fn summary(&self) -> BatchSummary {
        let accepted = self.num_accepted();
        let warning = if !self.samples.is_empty() && accepted == 0 {
            Some("no samples accepted; acceptance rate too low".to_string())
        } else if !self.samples.is_empty() && self.acceptance_rate() < 1e-4 {
            Some(format!("acceptance rate {:.3e} is below 1e-4", self.acceptance_rate()))
        } else {
            None
        };
        BatchSummary {
            n: self.samples.len(),
            accepted,
            acceptance_rate: self.acceptance_rate(),
            acceptance_lower_bound: self.acceptance_lower_bound(),
            seed: self.seed,
            m1: self.m1.clone(),
            m2: self.m2.clone(),
            warning,
        }
    }
}

/// Rejection sampling from `F/G`: draw `x` tropically and accept when
/// `M2·U < h(x)`.
pub fn rejection_sample(table: &SectorTable, attempts: usize, seed: u64, threads: usize) -> Result<SampleBatch> {
    let integrand = table.integrand();
    let toric = integrand.toric();
    let (m1, m2) = table.h_bounds();
    let log_m2 = ln_rat(m2);
    let dim = integrand.dim();
    let parts = run_blocks(attempts, seed, threads, |rng, _, count| {
        let mut out = Vec::with_capacity(count);
        let mut y = vec![0.0; dim];
        for _ in 0..count {
            let sector = draw_into(table, rng, &mut y);
            let log_h = integrand.log_h(&y);
            let u: f64 = rng.random();
            out.push(Sample { sector, log_x: toric.log_cox(&y), log_h, accepted: log_m2 + u.ln() < log_h });
        }
        out
    })?;
    Ok(SampleBatch {
        seed,
        samples: parts.into_iter().flatten().collect(),
        m1: format_rat(m1),
        m2: format_rat(m2),
        log_m1: ln_rat(m1),
        log_m2,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CubatureEstimate {
    pub value: Option<f64>,
    pub log_value: f64,
    pub nodes: usize,
    pub trop_total: String,
}

/// `Σ_σ I^tr_σ ∫_{[0,1]^n} h(x^σ(q)) dq` by tensor Gauss–Legendre.
pub fn cubature_integral(table: &SectorTable, nodes: usize) -> Result<CubatureEstimate> {
    cubature_with(table, nodes, |_, _, log_h| log_h)
}

/// Tensor Gauss–Legendre estimate of `Σ_σ I^tr_σ ∫ exp ψ dq`.
///
/// Along generator `z` of a sector every monomial of `h` is a power
/// `q^{k/p}` with `p = <z, δ>`, so `h` is not smooth at `q = 0`. Each axis is
/// therefore integrated in `s` with `q = s^p`, which makes the integrand
/// analytic on `[0, 1]`.
pub fn cubature_with<P>(table: &SectorTable, nodes: usize, psi: P) -> Result<CubatureEstimate>
where
    P: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    cubature_capped(table, nodes, u64::MAX, psi)
}

/// As [`cubature_with`] with the substitution exponents capped at `cap`;
/// `cap = 1` integrates directly in `q`.
pub fn cubature_capped<P>(table: &SectorTable, nodes: usize, cap: u64, psi: P) -> Result<CubatureEstimate>
where
    P: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    if nodes < 2 {
        return Err(Error::InvalidArgument("cubature needs at least 2 nodes per axis".into()));
    }
    let rule = gauss_quad::legendre::GaussLegendre::new(nodes)
        .map_err(|e| Error::InvalidArgument(format!("Gauss-Legendre rule: {e}")))?;
    // Nodes on (0,1) as ln s, with weights.
    let pts: Vec<(f64, f64)> =
        rule.as_node_weight_pairs().iter().map(|&(x, w)| (((x + 1.0) / 2.0).ln(), w / 2.0)).collect();
    let integrand = table.integrand();
    let n = integrand.dim();
    let per_sector: Vec<f64> = (0..table.len())
        .into_par_iter()
        .map(|s| {
            let p: Vec<f64> = smoothing_exponents(table, s).iter().map(|e| (*e).min(cap.max(1)) as f64).collect();
            // per axis: ln q and ln(w p s^{p-1})
            let axes: Vec<Vec<(f64, f64)>> = p
                .iter()
                .map(|&pk| pts.iter().map(|&(ls, w)| (pk * ls, w.ln() + pk.ln() + (pk - 1.0) * ls)).collect())
                .collect();
            let mut acc = LogAccumulator::default();
            let mut idx = vec![0usize; n];
            let mut lq = vec![0.0; n];
            let mut y = vec![0.0; n];
            loop {
                let mut lw = 0.0;
                for (d, &i) in idx.iter().enumerate() {
                    lq[d] = axes[d][i].0;
                    lw += axes[d][i].1;
                }
                table.cube_map_torus_unchecked(s, &lq, &mut y);
                acc.push(lw + psi(s, &y, integrand.log_h(&y)));
                let mut d = 0;
                while d < n {
                    idx[d] += 1;
                    if idx[d] < nodes {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n {
                    break;
                }
            }
            ln_rat(table.sectors()[s].trop_integral()) + acc.log_sum()
        })
        .collect();
    let log_value = crate::poly::log_sum_exp(&per_sector);
    Ok(CubatureEstimate {
        value: finite(log_value.exp()),
        log_value,
        nodes,
        trop_total: format_rat(table.trop_total()),
    })
}

/// Smallest `p` per generator such that every monomial of `h` restricted to
/// that axis is an integer power of `s = q^{1/p}`.
pub fn smoothing_exponents(table: &SectorTable, sector: usize) -> Vec<u64> {
    let sec = &table.sectors()[sector];
    let integrand = table.integrand();
    sec.generators()
        .iter()
        .zip(sec.pairings())
        .map(|(z, &pair)| {
            let mut g = pair.unsigned_abs();
            for fac in integrand.numerator_factors().iter().chain(integrand.denominator_factors()) {
                if fac.multiplicity() == 0 {
                    continue;
                }
                let e0 = &fac.poly().terms()[0].1;
                for (_, e) in fac.poly().terms() {
                    let d: i64 = e.iter().zip(e0).zip(z).map(|((a, b), zi)| (a - b) * zi).sum();
                    g = num_integer::gcd(g, d.unsigned_abs());
                }
            }
            (pair.unsigned_abs() / g.max(1)).max(1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cubic_on_line, line_density, pentagon_pair};

    fn cubic_table() -> SectorTable {
        let (x, f, g) = cubic_on_line();
        SectorTable::from_polys(&x, &f, &g).unwrap()
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let vals = [-3.0, 0.5, -700.0, 2.0, f64::NEG_INFINITY, 1.0];
        let mut a = LogAccumulator::default();
        vals.iter().for_each(|&v| a.push(v));
        let mut b = LogAccumulator::default();
        let mut c = LogAccumulator::default();
        vals[..3].iter().for_each(|&v| b.push(v));
        vals[3..].iter().for_each(|&v| c.push(v));
        b.merge(&c);
        assert_eq!(a.count(), b.count());
        assert!((a.log_sum() - b.log_sum()).abs() < 1e-12);
        assert!((a.log_stderr() - b.log_stderr()).abs() < 1e-12);
    }

    #[test]
    fn cubature_of_cubic() {
        let t = cubic_table();
        let exact = (6.0 * 3f64.ln() - 5f64.ln()) / 56.0;
        let c = cubature_integral(&t, 64).unwrap();
        assert!((c.value.unwrap() - exact).abs() < 1e-12, "{:?}", c.value);
        let one = cubature_with(&t, 4, |_, _, _| 0.0).unwrap();
        assert!((one.value.unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn line_density_integrates_to_one() {
        let (x, f, g) = line_density();
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        let c = cubature_integral(&t, 32).unwrap();
        assert!((c.value.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mc_is_thread_independent() {
        let t = cubic_table();
        let a = mc_estimate(&t, 5000, 11, 1).unwrap();
        let b = mc_estimate(&t, 5000, 11, 4).unwrap();
        assert_eq!(a.log_value.to_bits(), b.log_value.to_bits());
        let c = mc_estimate(&t, 5000, 12, 1).unwrap();
        assert_ne!(a.log_value.to_bits(), c.log_value.to_bits());
    }

    #[test]
    fn pentagon_bound_and_cubature() {
        let (x, f, g) = pentagon_pair();
        let t = SectorTable::from_polys(&x, &f, &g).unwrap();
        // 37/4 · sqrt((10/7)² - (1/24)²) / 100
        let expect = 9.25 * ((100.0f64 / 49.0) - 1.0 / 576.0).sqrt() / 100.0;
        assert!((stddev_bound(&t, 10_000) - expect).abs() < 1e-12);
        let b1 = stddev_bound(&t, 100);
        let b4 = stddev_bound(&t, 400);
        assert!((b1 / b4 - 2.0).abs() < 1e-12);
        let c = cubature_integral(&t, 64).unwrap();
        assert!((c.value.unwrap() - 2.872660).abs() < 1e-5, "{:?}", c.value);
    }

    #[test]
    fn empty_rejection_batch() {
        let t = cubic_table();
        let b = rejection_sample(&t, 0, 0, 1).unwrap();
        assert!(b.is_empty());
        assert_eq!(b.acceptance_rate(), 0.0);
    }
}
