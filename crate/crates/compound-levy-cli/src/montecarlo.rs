//! Seeded, block-parallel Monte Carlo oracle for the closed forms.
//!
//! Years are simulated in blocks; each block draws from its own counter
//! stream of a ChaCha generator derived from `(seed, block index)`, so the
//! output is bit-identical for a given seed regardless of worker count.
//! Blocks are also the unit of error estimation: the standard error of the
//! empirical CDF at a grid point is the dispersion of the per-block
//! estimates over the square root of the block count.

use std::time::Instant;

use compound_levy::CompoundModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Which severity generator drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeveritySampler {
    /// Quantile transform of a uniform deviate (fast path).
    #[default]
    InverseCdf,
    /// The composite exponential/uniform transform for general stable laws.
    Cms,
}

/// Simulation protocol: horizon, blocking, seed and evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Simulated years `T`.
    pub years: u64,
    /// Years per block; must divide `years`, at least two blocks.
    pub block_size: u64,
    pub seed: u64,
    /// Strictly increasing evaluation points.
    pub grid: Vec<f64>,
    pub severity_sampler: SeveritySampler,
}

impl SimulationConfig {
    pub const DEFAULT_BLOCK_SIZE: u64 = 50_000;

    pub fn new(years: u64, seed: u64, grid: Vec<f64>) -> Self {
        SimulationConfig {
            years,
            block_size: Self::DEFAULT_BLOCK_SIZE.min(years.max(1)),
            seed,
            grid,
            severity_sampler: SeveritySampler::InverseCdf,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.years == 0 || self.block_size == 0 || !self.years.is_multiple_of(self.block_size) {
            return Err(SimulationError::BlockMismatch {
                years: self.years,
                block_size: self.block_size,
            });
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(SimulationError::GridNotIncreasing);
        }
        Ok(())
    }

    fn blocks(&self) -> u64 {
        self.years / self.block_size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationError {
    /// Block size must divide the number of years.
    BlockMismatch { years: u64, block_size: u64 },
    /// Evaluation grid must be strictly increasing.
    GridNotIncreasing,
    /// Error estimation needs at least two blocks.
    TooFewBlocks { blocks: u64 },
}

impl std::fmt::Display for SimulationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimulationError::BlockMismatch { years, block_size } => {
                write!(f, "block size {block_size} does not divide {years} simulated years")
            }
            SimulationError::GridNotIncreasing => write!(f, "grid must be strictly increasing"),
            SimulationError::TooFewBlocks { blocks } => {
                write!(f, "{blocks} block(s); error estimation needs at least 2")
            }
        }
    }
}

impl std::error::Error for SimulationError {}

/// Empirical distribution estimate with per-point block standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
}

fn year_loss<R: rand::Rng + ?Sized>(
    model: &CompoundModel,
    sampler: SeveritySampler,
    rng: &mut R,
) -> f64 {
    let n = model.frequency().sample_count(rng);
    let severity = model.severity();
    match sampler {
        SeveritySampler::InverseCdf => (0..n).map(|_| severity.sample_inverse_cdf(rng)).sum(),
        SeveritySampler::Cms => {
            let stable = severity.as_stable();
            (0..n).map(|_| stable.sample_cms(rng)).sum()
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulate `cfg.years` annual losses of one cell. Deterministic in
/// `(model, cfg.seed)`; blocks run in parallel.
pub fn simulate_years(
    model: &CompoundModel,
    cfg: &SimulationConfig,
) -> Result<Vec<f64>, SimulationError> {
    cfg.validate()?;
    let block = cfg.block_size;
    let out = (0..cfg.blocks())
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = stream_rng(cfg.seed, b);
            let model = model.clone();
            let sampler = cfg.severity_sampler;
            (0..block).map(move |_| year_loss(&model, sampler, &mut rng))
        })
        .collect();
    Ok(out)
}

/// Simulate the summed annual losses of independent cells. Cell `j` of
/// block `b` draws from stream `j * blocks + b`.
pub fn simulate_aggregate_years(
    cells: &[CompoundModel],
    cfg: &SimulationConfig,
) -> Result<Vec<f64>, SimulationError> {
    cfg.validate()?;
    let blocks = cfg.blocks();
    let block = cfg.block_size;
    let out = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rngs: Vec<ChaCha8Rng> = (0..cells.len() as u64)
                .map(|j| stream_rng(cfg.seed, j * blocks + b))
                .collect();
            let cells = cells.to_vec();
            let sampler = cfg.severity_sampler;
            (0..block).map(move |_| {
                cells
                    .iter()
                    .zip(rngs.iter_mut())
                    .map(|(c, rng)| year_loss(c, sampler, rng))
                    .sum()
            })
        })
        .collect();
    Ok(out)
}

/// Pooled empirical CDF over `cfg.grid` with block standard errors.
pub fn empirical_cdf(
    losses: &[f64],
    cfg: &SimulationConfig,
) -> Result<EmpiricalCdf, SimulationError> {
    cfg.validate()?;
    if losses.len() as u64 != cfg.years {
        return Err(SimulationError::BlockMismatch {
            years: losses.len() as u64,
            block_size: cfg.block_size,
        });
    }
    let blocks = cfg.blocks();
    if blocks < 2 {
        return Err(SimulationError::TooFewBlocks { blocks });
    }
    // Per-block estimates at every grid point, via a sorted copy per block.
    let per_block: Vec<Vec<f64>> = losses
        .par_chunks_exact(cfg.block_size as usize)
        .map(|chunk| {
            let mut sorted = chunk.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cfg.grid
                .iter()
                .map(|&z| sorted.partition_point(|&x| x <= z) as f64 / sorted.len() as f64)
                .collect()
        })
        .collect();
    let b = blocks as f64;
    let mut estimate = Vec::with_capacity(cfg.grid.len());
    let mut std_error = Vec::with_capacity(cfg.grid.len());
    for i in 0..cfg.grid.len() {
        let mean = per_block.iter().map(|v| v[i]).sum::<f64>() / b;
        let var = per_block.iter().map(|v| (v[i] - mean) * (v[i] - mean)).sum::<f64>() / (b - 1.0);
        estimate.push(mean);
        std_error.push((var / b).sqrt());
    }
    Ok(EmpiricalCdf { grid: cfg.grid.clone(), estimate, std_error })
}

/// Mean squared difference, over the grid, between the CDF truncated at each
/// cap and the CDF truncated at 1000 terms.
pub fn truncation_study(model: &CompoundModel, caps: &[u64], grid: &[f64]) -> Vec<(u64, f64)> {
    let reference: Vec<f64> = grid.iter().map(|&z| model.cdf_with_cap(z, 1000)).collect();
    caps.iter()
        .map(|&cap| {
            let mse = grid
                .iter()
                .zip(&reference)
                .map(|(&z, &r)| {
                    let d = model.cdf_with_cap(z, cap) - r;
                    d * d
                })
                .sum::<f64>()
                / grid.len().max(1) as f64;
            (cap, mse)
        })
        .collect()
}

/// Wall-clock seconds of both evaluation paths on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingResult {
    pub closed_form_seconds: f64,
    pub monte_carlo_seconds: f64,
}

impl TimingResult {
    pub fn ratio(&self) -> f64 {
        self.closed_form_seconds / self.monte_carlo_seconds
    }
}

/// Time the closed form (a conservative 1000-term truncation) against the
/// Monte Carlo estimate of the same grid.
pub fn timing_study(
    model: &CompoundModel,
    cfg: &SimulationConfig,
) -> Result<TimingResult, SimulationError> {
    cfg.validate()?;
    if cfg.grid.is_empty() {
        return Ok(TimingResult { closed_form_seconds: 0.0, monte_carlo_seconds: 0.0 });
    }
    let t0 = Instant::now();
    let mut sink = 0.0;
    for &z in &cfg.grid {
        sink += model.cdf_with_cap(z, 1000);
    }
    let closed_form_seconds = t0.elapsed().as_secs_f64();
    std::hint::black_box(sink);

    let t1 = Instant::now();
    let losses = simulate_years(model, cfg)?;
    let cdf = empirical_cdf(&losses, cfg)?;
    let monte_carlo_seconds = t1.elapsed().as_secs_f64();
    std::hint::black_box(cdf.estimate.first().copied());
    Ok(TimingResult { closed_form_seconds, monte_carlo_seconds })
}
