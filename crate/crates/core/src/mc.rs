//! Monte Carlo simulation of the alternating-velocity motion with m-Erlang
//! sojourn times: the independent empirical oracle for densities, atom mass
//! and cone window probabilities, valid for any m.
//!
//! Reproducibility contract: sampling is split into fixed-size chunks, each
//! driven by a ChaCha12 stream seeded deterministically from (seed, chunk
//! index). Merging sums counts, so the result is bit-identical no matter how
//! many workers ran the chunks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{ModelParams, Side};
use crate::error::{Error, Result};

/// Samples per deterministic chunk.
const CHUNK: u64 = 1 << 16;

/// Simulation request.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Time horizon.
    pub t: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Histogram resolution over [-vt, vt].
    pub n_bins: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
        }
        if self.n_bins < 1 {
            return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t must be > 0, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// Empirical summary of the simulated positions.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    /// n_bins + 1 edges over [-vt, vt].
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<u64>,
    /// count / (n * width) per bin.
    pub bin_density: Vec<f64>,
    /// Binomial standard error of each bin density.
    pub stderr_per_bin: Vec<f64>,
    /// Samples with no velocity alternation by t (the atom at x = vt).
    pub atom_count: u64,
    pub n_samples: u64,
    /// Echo of the config seed, for provenance.
    pub seed: u64,
}

impl Histogram {
    pub fn atom_fraction(&self) -> f64 {
        self.atom_count as f64 / self.n_samples as f64
    }

    pub fn atom_stderr(&self) -> f64 {
        let p = self.atom_fraction();
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Empirical cone window probability and its epsilon-rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowEstimate {
    pub side: Side,
    pub eps: f64,
    pub p_hat: f64,
    /// p_hat / eps, the finite-eps estimate of the cone limit.
    pub rate_hat: f64,
    /// Binomial standard error of rate_hat.
    pub stderr: f64,
}

/// Deterministic child stream for one chunk (SplitMix64-style mixing of the
/// master seed and the chunk index).
pub fn child_rng(seed: u64, chunk: u64) -> ChaCha12Rng {
    let mut z = seed ^ chunk.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    ChaCha12Rng::seed_from_u64(z)
}

fn sample_exp<R: Rng>(lambda: f64, rng: &mut R) -> f64 {
    // inverse CDF; 1 - u stays in (0, 1] so the log is finite
    let u: f64 = rng.random();
    -(1.0 - u).ln() / lambda
}

/// One m-Erlang draw: the sum of m independent exponential(lambda) draws.
pub fn sample_erlang<R: Rng>(m: u32, lambda: f64, rng: &mut R) -> f64 {
    (0..m).map(|_| sample_exp(lambda, rng)).sum()
}

/// A simulated endpoint position and whether any alternation occurred.
#[derive(Debug, Clone, Copy)]
pub struct PositionSample {
    pub x: f64,
    /// False exactly on the event theta_1 >= t (the atom at x = vt).
    pub alternated: bool,
}

/// Simulate the particle position at time t, starting at x = 0 with
/// velocity +v and flipping sign at each m-Erlang renewal epoch.
pub fn sample_position<R: Rng>(params: &ModelParams, t: f64, rng: &mut R) -> PositionSample {
    let mut elapsed = 0.0;
    let mut sign = 1.0;
    let mut x = 0.0;
    let mut alternated = false;
    loop {
        let sojourn = sample_erlang(params.m, params.lambda, rng);
        if elapsed + sojourn >= t {
            x += sign * (t - elapsed) * params.v;
            return PositionSample { x, alternated };
        }
        x += sign * sojourn * params.v;
        elapsed += sojourn;
        sign = -sign;
        alternated = true;
    }
}

struct ChunkCounts {
    bins: Vec<u64>,
    atom: u64,
}

fn run_counts<F>(config: &SimConfig, n_bins: usize, count: F) -> ChunkCounts
where
    F: Fn(&PositionSample, &mut ChunkCounts) + Sync,
{
    let n_chunks = config.n_samples.div_ceil(CHUNK);
    let params = config.params;
    let t = config.t;
    (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = child_rng(config.seed, chunk);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(config.n_samples);
            let mut counts = ChunkCounts {
                bins: vec![0; n_bins],
                atom: 0,
            };
            for _ in lo..hi {
                let s = sample_position(&params, t, &mut rng);
                count(&s, &mut counts);
            }
            counts
        })
        .reduce(
            || ChunkCounts {
                bins: vec![0; n_bins],
                atom: 0,
            },
            |mut a, b| {
                for (x, y) in a.bins.iter_mut().zip(&b.bins) {
                    *x += *y;
                }
                a.atom += b.atom;
                a
            },
        )
}

/// Histogram of simulated positions over [-vt, vt], with the atom counted by
/// the exact no-alternation event (never by positional rounding).
pub fn estimate_histogram(config: &SimConfig) -> Result<Histogram> {
    config.validate()?;
    let edge = config.params.v * config.t;
    let n_bins = config.n_bins;
    let width = 2.0 * edge / n_bins as f64;
    let counts = run_counts(config, n_bins, |s, c| {
        if !s.alternated {
            c.atom += 1;
        } else {
            let idx = (((s.x + edge) / width) as usize).min(n_bins - 1);
            c.bins[idx] += 1;
        }
    });
    let n = config.n_samples as f64;
    let bin_edges = (0..=n_bins).map(|i| -edge + i as f64 * width).collect();
    let bin_density = counts
        .bins
        .iter()
        .map(|&c| c as f64 / (n * width))
        .collect();
    let stderr_per_bin = counts
        .bins
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            (p * (1.0 - p) / n).sqrt() / width
        })
        .collect();
    Ok(Histogram {
        bin_edges,
        bin_counts: counts.bins,
        bin_density,
        stderr_per_bin,
        atom_count: counts.atom,
        n_samples: config.n_samples,
        seed: config.seed,
    })
}

/// Empirical cone window rate: upper side counts 0 < vt - x < eps*v among
/// alternated samples (the atom is excluded by the strict inequality via the
/// exact no-alternation event); lower side counts vt + x < eps*v.
pub fn estimate_window(
    params: &ModelParams,
    t: f64,
    side: Side,
    eps: f64,
    n_samples: u64,
    seed: u64,
) -> Result<WindowEstimate> {
    if !(eps > 0.0) || eps >= t {
        return Err(Error::InvalidParameter(format!(
            "eps must satisfy 0 < eps << t, got {eps}"
        )));
    }
    let config = SimConfig {
        params: *params,
        t,
        n_samples,
        seed,
        n_bins: 1,
    };
    config.validate()?;
    let edge = params.v * t;
    let band = eps * params.v;
    let counts = run_counts(&config, 1, |s, c| {
        let hit = match side {
            Side::Upper => s.alternated && edge - s.x > 0.0 && edge - s.x < band,
            Side::Lower => edge + s.x < band,
        };
        if hit {
            c.bins[0] += 1;
        }
    });
    let n = n_samples as f64;
    let p_hat = counts.bins[0] as f64 / n;
    Ok(WindowEstimate {
        side,
        eps,
        p_hat,
        rate_hat: p_hat / eps,
        stderr: (p_hat * (1.0 - p_hat) / n).sqrt() / eps,
    })
}

/// Histogram export: `bin_left,bin_right,density,stderr` rows and a final
/// `ATOM,vt,count/n,stderr` row.
pub fn histogram_to_csv(h: &Histogram, edge: f64, mut fmt: impl FnMut(f64) -> String) -> String {
    let mut out = String::from("bin_left,bin_right,density,stderr\n");
    for i in 0..h.bin_counts.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(h.bin_edges[i]),
            fmt(h.bin_edges[i + 1]),
            fmt(h.bin_density[i]),
            fmt(h.stderr_per_bin[i]),
        ));
    }
    out.push_str(&format!(
        "ATOM,{},{},{}\n",
        fmt(edge),
        fmt(h.atom_fraction()),
        fmt(h.atom_stderr()),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density;

    #[test]
    fn erlang_moments() {
        let mut rng = child_rng(7, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut tail = 0u64;
        for _ in 0..n {
            let d = sample_erlang(2, 1.0, &mut rng);
            sum += d;
            if d > 1.0 {
                tail += 1;
            }
        }
        let mean = sum / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
        // Erlang tail P(draw > 1) = 2/e = 0.735758882343 (matches the atom)
        let p = tail as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - 0.735758882343).abs() < 3.0 * sigma + 0.003, "p {p}");
    }

    #[test]
    fn m1_reduces_to_exponential_variance() {
        let mut rng = child_rng(11, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_erlang(1, 2.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 0.25).abs() < 0.01, "var {var}");
    }

    #[test]
    fn positions_respect_speed_bound() {
        let params = ModelParams::unit(2);
        let mut rng = child_rng(3, 0);
        for _ in 0..20_000 {
            let s = sample_position(&params, 1.5, &mut rng);
            assert!(s.x.abs() <= 1.5 + 1e-12);
            if !s.alternated {
                assert_eq!(s.x, 1.5);
            }
            assert!(s.x > -1.5, "lower cone has probability zero");
        }
    }

    #[test]
    fn histogram_deterministic_across_worker_counts() {
        let config = SimConfig {
            params: ModelParams::unit(2),
            t: 1.0,
            n_samples: 300_000,
            seed: 42,
            n_bins: 50,
        };
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_histogram(&config).unwrap());
        let parallel = estimate_histogram(&config).unwrap();
        assert_eq!(serial.bin_counts, parallel.bin_counts);
        assert_eq!(serial.atom_count, parallel.atom_count);
    }

    #[test]
    fn single_sample_reproducible() {
        let config = SimConfig {
            params: ModelParams::unit(1),
            t: 1.0,
            n_samples: 1,
            seed: 9,
            n_bins: 4,
        };
        let a = estimate_histogram(&config).unwrap();
        let b = estimate_histogram(&config).unwrap();
        assert_eq!(a.bin_counts, b.bin_counts);
        assert_eq!(a.atom_count, b.atom_count);
    }

    #[test]
    fn atom_frequency_matches_erlang_tail() {
        let params = ModelParams::unit(3);
        let config = SimConfig {
            params,
            t: 1.0,
            n_samples: 400_000,
            seed: 5,
            n_bins: 10,
        };
        let h = estimate_histogram(&config).unwrap();
        // e^-1 (1 + 1 + 1/2) = 0.919698602929
        let want = density::atom_mass(&params, 1.0);
        assert!((h.atom_fraction() - want).abs() < 3.0 * h.atom_stderr() + 1e-3);
        assert_eq!(
            h.bin_counts.iter().sum::<u64>() + h.atom_count,
            config.n_samples
        );
    }

    #[test]
    fn mean_position_matches_quadrature_oracle() {
        // E x(t) for m=1 at t=1: integral of x f_c plus vt * atom.
        // mpmath: 0.4323323584 (= (1 - e^-2)/2)
        let params = ModelParams::unit(1);
        let config = SimConfig {
            params,
            t: 1.0,
            n_samples: 1_000_000,
            seed: 123,
            n_bins: 1,
        };
        let n_chunks = config.n_samples.div_ceil(CHUNK);
        let mut sum = 0.0;
        for chunk in 0..n_chunks {
            let mut rng = child_rng(config.seed, chunk);
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(config.n_samples);
            for _ in lo..hi {
                sum += sample_position(&params, 1.0, &mut rng).x;
            }
        }
        let mean = sum / config.n_samples as f64;
        assert!((mean - 0.4323323584).abs() < 0.002, "mean {mean}");
    }
}
