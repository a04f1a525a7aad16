//! Discrete operators on a grid: the maximal operator, the principal-value
//! Hilbert transform, weighted norms and nondegeneracy sweeps.

pub mod hilbert;
pub mod maximal;
pub mod nondeg;
pub mod norm;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub use hilbert::hilbert;
pub use maximal::maximal;
pub use nondeg::{nondegeneracy_constant, verify_shift_ap2, NondegReport, ShiftReport};
pub use norm::{maximal_norm_lp, op_norm_joint, op_norm_weighted, WeightedNormReport};

/// Odd convolution kernel `k(x - y)`, evaluated off the diagonal.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub kernel: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomKernel({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum OperatorKind {
    Identity,
    Hilbert,
    Maximal,
    Custom(CustomKernel),
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub grid: Grid,
}

impl DiscreteOperator {
    pub fn identity(grid: Grid) -> Self {
        Self { kind: OperatorKind::Identity, grid }
    }

    pub fn hilbert(grid: Grid) -> Self {
        Self { kind: OperatorKind::Hilbert, grid }
    }

    pub fn maximal(grid: Grid) -> Self {
        Self { kind: OperatorKind::Maximal, grid }
    }

    /// Convolution with an odd kernel; oddness is checked on the grid offsets.
    pub fn custom(
        grid: Grid,
        name: &str,
        kernel: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let h = grid.cell_width();
        for d in 1..grid.cells() {
            let t = d as f64 * h;
            let (a, b) = (kernel(t), kernel(-t));
            if !a.is_finite() || (a + b).abs() > 1e-12 * a.abs().max(1e-300) {
                return Err(Error::Invariant(format!(
                    "kernel {name} is not antisymmetric at offset {d}"
                )));
            }
        }
        Ok(Self {
            kind: OperatorKind::Custom(CustomKernel { name: name.into(), kernel: Arc::new(kernel) }),
            grid,
        })
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            OperatorKind::Identity => "identity",
            OperatorKind::Hilbert => "hilbert",
            OperatorKind::Maximal => "maximal",
            OperatorKind::Custom(k) => &k.name,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self.kind, OperatorKind::Maximal)
    }

    /// Applies the operator on the grid.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.grid.cells() {
            return Err(Error::Invariant(format!(
                "input has {} samples, grid has {} cells",
                f.len(),
                self.grid.cells()
            )));
        }
        self.apply_window(f)
    }

    /// Applies the operator to `f` read as consecutive cells of this grid's
    /// width; the length may differ from the grid size.
    pub(crate) fn apply_window(&self, f: &[f64]) -> Result<Vec<f64>> {
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("input sample {i} is not finite")));
        }
        Ok(match &self.kind {
            OperatorKind::Identity => f.to_vec(),
            OperatorKind::Hilbert => hilbert::hilbert_unchecked(f),
            OperatorKind::Maximal => {
                let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
                maximal::maximal_unchecked(&abs)
            }
            OperatorKind::Custom(k) => {
                let h = self.grid.cell_width();
                let taps: Vec<f64> = (0..f.len()).map(|d| (k.kernel)(d as f64 * h) * h).collect();
                hilbert::odd_toeplitz_apply(&taps, f)
            }
        })
    }

    /// Applies the transpose; only defined for linear operators.
    pub(crate) fn apply_transpose_window(&self, f: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            OperatorKind::Identity => Ok(f.to_vec()),
            OperatorKind::Maximal => {
                Err(Error::Precondition("the maximal operator has no transpose".into()))
            }
            // odd Toeplitz kernels: T^t = -T
            _ => Ok(self.apply_window(f)?.into_iter().map(|v| -v).collect()),
        }
    }
}
