//! Institution-wide aggregation of independent risk cells.
//!
//! The total loss `Z = Z^(1) + ... + Z^(J)` of independent cells with Levy
//! severities is again an explicit Levy mixture, indexed by count vectors
//! `(n_1, ..., n_J)`: the component weight is the product of the per-cell
//! count probabilities, the scale root is additive
//! (`gamma~^1/2 = sum n_j gamma_j^1/2`) and so is the support point
//! (`delta~ = sum n_j delta_j`). The enumeration is a Cartesian product over
//! each cell's retained count range `[0, n_upper_j]` minus the all-zero
//! vector, guarded by a component budget.

use alloc::vec::Vec;

use crate::compound::{CompoundModel, MixtureComponent, QuantileError};
use crate::fm;
use crate::roots::bisect_quantile;
use crate::special;

/// Errors from aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateError {
    /// No cells supplied.
    Empty,
    /// The count-vector product exceeds the component budget. Reduce the
    /// per-cell truncation (larger threshold magnitude is not the fix;
    /// coarser thresholds or fewer cells are).
    BudgetExceeded { required: u128, budget: u64 },
}

impl core::fmt::Display for AggregateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AggregateError::Empty => write!(f, "aggregate of zero cells"),
            AggregateError::BudgetExceeded { required, budget } => write!(
                f,
                "aggregate needs {required} components, budget is {budget}; \
                 reduce per-cell truncation windows"
            ),
        }
    }
}

impl core::error::Error for AggregateError {}

/// Total annual loss across independent risk cells.
#[derive(Debug, Clone)]
pub struct AggregateModel {
    cells: Vec<CompoundModel>,
    /// All retained components, sorted by support point.
    components: Vec<MixtureComponent>,
    atom: f64,
}

impl AggregateModel {
    /// Default cap on the number of enumerated components.
    pub const DEFAULT_BUDGET: u64 = 10_000_000;

    pub fn new(cells: Vec<CompoundModel>) -> Result<Self, AggregateError> {
        Self::with_budget(cells, Self::DEFAULT_BUDGET)
    }

    pub fn with_budget(cells: Vec<CompoundModel>, budget: u64) -> Result<Self, AggregateError> {
        if cells.is_empty() {
            return Err(AggregateError::Empty);
        }
        let mut required: u128 = 1;
        for c in &cells {
            let range = c.bounds().n_upper as u128 + 1;
            required = required.saturating_mul(range);
            if required > budget as u128 {
                return Err(AggregateError::BudgetExceeded { required, budget });
            }
        }

        // Per-cell weight tables over [0, n_upper]; the zero atom of the
        // aggregate is the all-zero product.
        let tables: Vec<Vec<f64>> = cells
            .iter()
            .map(|c| {
                (0..=c.bounds().n_upper)
                    .map(|n| c.component(n).weight)
                    .collect()
            })
            .collect();
        let sqrt_gammas: Vec<f64> = cells.iter().map(|c| fm::sqrt(c.severity().gamma)).collect();
        let deltas: Vec<f64> = cells.iter().map(|c| c.severity().delta).collect();
        let atom: f64 = tables.iter().map(|t| t[0]).product();

        let mut components = Vec::with_capacity(required as usize - 1);
        let mut counts = alloc::vec![0u64; cells.len()];
        'outer: loop {
            // Advance the count odometer.
            let mut axis = 0;
            loop {
                counts[axis] += 1;
                if counts[axis] <= cells[axis].bounds().n_upper {
                    break;
                }
                counts[axis] = 0;
                axis += 1;
                if axis == cells.len() {
                    break 'outer;
                }
            }

            let mut weight = 1.0;
            let mut root = 0.0;
            let mut delta = 0.0;
            let mut total = 0u64;
            for (j, &n) in counts.iter().enumerate() {
                weight *= tables[j][n as usize];
                let nf = n as f64;
                root += nf * sqrt_gammas[j];
                delta += nf * deltas[j];
                total += n;
            }
            if weight > 0.0 {
                components.push(MixtureComponent {
                    n: total,
                    weight,
                    gamma: root * root,
                    delta,
                });
            }
        }
        components.sort_by(|a, b| {
            (a.delta, a.gamma, a.n).partial_cmp(&(b.delta, b.gamma, b.n)).expect("finite keys")
        });
        Ok(AggregateModel { cells, components, atom })
    }

    pub fn cells(&self) -> &[CompoundModel] {
        &self.cells
    }

    /// Retained components, sorted by support point.
    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `P(all cells count zero)`: the atom of the aggregate at zero.
    pub fn atom(&self) -> f64 {
        self.atom
    }

    /// Atom plus all retained component weights; the shortfall from 1 is the
    /// mass lost to per-cell truncation.
    pub fn retained_weight(&self) -> f64 {
        self.atom + self.components.iter().map(|c| c.weight).sum::<f64>()
    }

    /// Distribution function of the total loss.
    pub fn cdf(&self, z: f64) -> f64 {
        if z < 0.0 || z.is_nan() {
            return 0.0;
        }
        let mut acc = self.atom;
        for c in &self.components {
            if c.delta >= z {
                break; // sorted by support point
            }
            let arg = fm::sqrt(c.gamma / (2.0 * (z - c.delta)));
            if arg < 8.0 {
                acc += c.weight * special::erfc(arg);
            }
        }
        acc
    }

    /// Density of the continuous part of the total loss.
    pub fn density(&self, z: f64) -> f64 {
        if z <= 0.0 || z.is_nan() {
            return 0.0;
        }
        let inv_two_pi = 1.0 / (2.0 * core::f64::consts::PI);
        let mut acc = 0.0;
        for c in &self.components {
            if c.delta >= z {
                break;
            }
            let den = z - c.delta;
            let e = -c.gamma / (2.0 * den);
            if e > -700.0 {
                acc += c.weight * fm::sqrt(c.gamma * inv_two_pi) * fm::powf(den, -1.5) * fm::exp(e);
            }
        }
        acc
    }

    /// The `q`-quantile of the total loss.
    pub fn value_at_risk(&self, q: f64) -> Result<f64, QuantileError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QuantileError::OutOfDomain(q));
        }
        if q <= self.atom {
            return Ok(0.0);
        }
        let attainable = self.retained_weight();
        if q >= attainable {
            return Err(QuantileError::Unresolvable { q, attainable });
        }
        let mut hi = self
            .cells
            .iter()
            .map(|c| c.severity().gamma)
            .fold(1.0f64, f64::max);
        let mut guard = 0;
        while self.cdf(hi) < q {
            hi *= 4.0;
            guard += 1;
            if guard > 600 {
                return Err(QuantileError::Unresolvable { q, attainable });
            }
        }
        Ok(bisect_quantile(|z| self.cdf(z), q, 0.0, hi, 1e-9))
    }
}
