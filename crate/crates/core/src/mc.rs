//! Monte Carlo oracle for Yor's process `A_h = ∫_0^h e^{2(B_w + nu w)} dw`.
//!
//! Log-space increments are exact, so the only discretization error is the
//! trapezoid rule in time. Paths are simulated in fixed-size blocks, each on
//! its own ChaCha stream, and block statistics are merged in block order:
//! results depend on the seed only, never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BLOCK: usize = 4096;
/// Fewer paths than this make the standard error itself unreliable.
pub const MIN_MEANINGFUL_PATHS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TrapezoidLogEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            steps: 2048,
            seed: 0x5eed_a51a,
            scheme: Scheme::TrapezoidLogEuler,
        }
    }
}

impl McConfig {
    pub fn new(paths: usize, steps: usize, seed: u64) -> Self {
        Self {
            paths,
            steps,
            seed,
            scheme: Scheme::TrapezoidLogEuler,
        }
    }

    /// Soft problems with the configuration. Never fatal.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.paths < MIN_MEANINGFUL_PATHS {
            w.push(format!(
                "{} paths is below {MIN_MEANINGFUL_PATHS}; the standard error is not meaningful",
                self.paths
            ));
        }
        w
    }

    fn blocks(&self) -> usize {
        self.paths.max(1).div_ceil(BLOCK)
    }

    fn block_len(&self, b: usize) -> usize {
        BLOCK.min(self.paths.max(1) - b * BLOCK)
    }

    fn steps(&self) -> usize {
        self.steps.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// One path of `A_h` by the trapezoid rule over exact GBM nodes.
fn one_path(nu: f64, h: f64, steps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let dt = h / steps as f64;
    let (drift, vol) = (2.0 * nu * dt, 2.0 * dt.sqrt());
    let mut level = 1.0;
    let mut sum = 0.5;
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(rng);
        level *= (drift + vol * z).exp();
        sum += level;
    }
    sum -= 0.5 * level;
    sum * dt
}

// the same path summed on the full grid and on every other node
fn path_pair(nu: f64, h: f64, coarse_steps: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let steps = 2 * coarse_steps;
    let dt = h / steps as f64;
    let (drift, vol) = (2.0 * nu * dt, 2.0 * dt.sqrt());
    let mut level = 1.0;
    let (mut fine, mut coarse) = (0.5, 0.5);
    for i in 1..=steps {
        let z: f64 = StandardNormal.sample(rng);
        level *= (drift + vol * z).exp();
        fine += level;
        if i % 2 == 0 {
            coarse += level;
        }
    }
    fine -= 0.5 * level;
    coarse -= 0.5 * level;
    (coarse * 2.0 * dt, fine * dt)
}

fn block_samples(nu: f64, h: f64, cfg: &McConfig, b: usize) -> Vec<f64> {
    let mut rng = block_rng(cfg.seed, b);
    (0..cfg.block_len(b))
        .map(|_| one_path(nu, h, cfg.steps(), &mut rng))
        .collect()
}

/// All simulated values of `A_h`, in path order. Deterministic given the seed.
#[allow(non_snake_case)]
pub fn simulate_A(nu: f64, h: f64, cfg: &McConfig) -> Vec<f64> {
    let blocks: Vec<Vec<f64>> = (0..cfg.blocks())
        .into_par_iter()
        .map(|b| block_samples(nu, h, cfg, b))
        .collect();
    blocks.concat()
}

// count, mean and centred sum of squares; merged pairwise in block order
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(xs: impl Iterator<Item = f64>) -> Self {
        let mut m = Moments::default();
        for x in xs {
            m.n += 1.0;
            let d = x - m.mean;
            m.mean += d / m.n;
            m.m2 += d * (x - m.mean);
        }
        m
    }

    fn merge(self, o: Moments) -> Self {
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn estimate(self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate {
            mean: self.mean,
            std_error: (var / self.n).sqrt(),
            paths: self.n as usize,
        }
    }
}

fn estimate(nu: f64, h: f64, cfg: &McConfig, payoff: impl Fn(f64) -> f64 + Sync) -> McEstimate {
    let parts: Vec<Moments> = (0..cfg.blocks())
        .into_par_iter()
        .map(|b| Moments::of(block_samples(nu, h, cfg, b).into_iter().map(&payoff)))
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge).estimate()
}

/// Sample mean of `A_h`, to compare with the closed-form first moment.
pub fn mc_moment(nu: f64, h: f64, cfg: &McConfig) -> McEstimate {
    estimate(nu, h, cfg, |a| a)
}

/// `E[(A_h - q)^+]` with its standard error.
pub fn mc_price(nu: f64, h: f64, q: f64, cfg: &McConfig) -> McEstimate {
    estimate(nu, h, cfg, |a| (a - q).max(0.0))
}

/// Effect of doubling `cfg.steps` on the price, measured on shared paths so
/// that only the discretization error remains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDoubling {
    pub coarse: McEstimate,
    pub fine: McEstimate,
    /// Mean of `fine - coarse` over paths, with its standard error.
    pub shift: McEstimate,
}

pub fn mc_step_doubling(nu: f64, h: f64, q: f64, cfg: &McConfig) -> StepDoubling {
    let parts: Vec<[Moments; 3]> = (0..cfg.blocks())
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(cfg.seed, b);
            let pairs: Vec<(f64, f64)> = (0..cfg.block_len(b))
                .map(|_| {
                    let (c, f) = path_pair(nu, h, cfg.steps(), &mut rng);
                    ((c - q).max(0.0), (f - q).max(0.0))
                })
                .collect();
            [
                Moments::of(pairs.iter().map(|p| p.0)),
                Moments::of(pairs.iter().map(|p| p.1)),
                Moments::of(pairs.iter().map(|p| p.1 - p.0)),
            ]
        })
        .collect();
    let merged = parts.into_iter().fold([Moments::default(); 3], |acc, p| {
        [acc[0].merge(p[0]), acc[1].merge(p[1]), acc[2].merge(p[2])]
    });
    StepDoubling {
        coarse: merged[0].estimate(),
        fine: merged[1].estimate(),
        shift: merged[2].estimate(),
    }
}
