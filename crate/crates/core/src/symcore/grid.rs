use serde::{Deserialize, Serialize};

use super::expr::Symbol;
use super::SymError;

/// One axis of a sampling grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub symbol: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(symbol: &str, lo: f64, hi: f64, count: usize) -> Self {
        Self {
            symbol: symbol.to_string(),
            lo,
            hi,
            count,
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * k as f64 / (self.count - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }
}

/// Tensor-product grid over coordinate intervals. Points are enumerated
/// in row-major order: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Axis>", into = "Vec<Axis>")]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl TryFrom<Vec<Axis>> for GridSpec {
    type Error = SymError;
    fn try_from(axes: Vec<Axis>) -> Result<Self, SymError> {
        GridSpec::new(axes)
    }
}

impl From<GridSpec> for Vec<Axis> {
    fn from(g: GridSpec) -> Self {
        g.axes
    }
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, SymError> {
        for a in &axes {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) || a.count < 2 {
                return Err(SymError::InvalidGrid(format!(
                    "axis '{}' needs finite lo < hi and count >= 2 (got [{}, {}] x {})",
                    a.symbol, a.lo, a.hi, a.count
                )));
            }
        }
        Ok(Self { axes })
    }

    /// Square box `[lo, hi]` on every listed symbol.
    pub fn square(symbols: &[&str], lo: f64, hi: f64, count: usize) -> Result<Self, SymError> {
        Self::new(
            symbols
                .iter()
                .map(|s| Axis::new(s, lo, hi, count))
                .collect(),
        )
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.axes.iter().map(|a| Symbol::new(&a.symbol)).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of the `k`-th point.
    pub fn index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (slot, a) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = k % a.count;
            k /= a.count;
        }
        idx
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }
}
