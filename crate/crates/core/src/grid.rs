//! Uniform dyadic discretization of `[-L, L]`.
//!
//! Contiguous cell ranges stand in for balls: every "sup over balls" in the
//! crate is a max over [`Interval`]s of one [`Grid`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_RESOLUTION: u32 = 3;
pub const MAX_RESOLUTION: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    resolution: u32,
    cells: usize,
    cell_width: f64,
}

impl Grid {
    pub fn new(half_width: f64, resolution: u32) -> Result<Self> {
        if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
            return Err(Error::Config(format!(
                "resolution exponent {resolution} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("half width {half_width} must be positive")));
        }
        let cells = 1usize << resolution;
        Ok(Self {
            half_width,
            resolution,
            cells,
            cell_width: 2.0 * half_width / cells as f64,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of cells `N = 2^k`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.cell_width
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.midpoint(i)).collect()
    }

    /// Index of the cell containing `x`, clamped to the domain.
    pub fn cell_of(&self, x: f64) -> usize {
        let raw = ((x + self.half_width) / self.cell_width).floor();
        (raw.max(0.0) as usize).min(self.cells - 1)
    }

    pub fn whole(&self) -> Interval {
        Interval { start: 0, len: self.cells }
    }

    /// Checks that `iv` lies inside this grid.
    pub fn check(&self, iv: Interval) -> Result<()> {
        iv.check(self.cells)
    }
}

/// A run of `len` consecutive cells beginning at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub len: usize,
}

impl Interval {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= self.start && i < self.end()
    }

    pub fn check(&self, cells: usize) -> Result<()> {
        if self.len == 0 || self.end() > cells {
            return Err(Error::Bounds { start: self.start, len: self.len, cells });
        }
        Ok(())
    }

    /// Shift by a signed number of cells; `None` if the result leaves `[0, cells)`.
    pub fn shifted(&self, by: isize, cells: usize) -> Option<Interval> {
        let start = self.start as isize + by;
        if start < 0 || start as usize + self.len > cells {
            return None;
        }
        Some(Interval { start: start as usize, len: self.len })
    }

    /// The concentric interval of twice the length, intersected with `[0, cells)`.
    pub fn doubled(&self, cells: usize) -> Interval {
        let left = self.len / 2;
        let right = self.len - left;
        let lo = self.start.saturating_sub(left);
        let hi = (self.end() + right).min(cells);
        Interval { start: lo, len: hi - lo }
    }
}

/// Prefix sums of one sample vector; `sum(iv)` and `mean(iv)` are O(1).
#[derive(Debug, Clone)]
pub struct PrefixSums {
    acc: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: &[f64]) -> Self {
        let mut acc = Vec::with_capacity(values.len() + 1);
        acc.push(0.0);
        let mut s = 0.0;
        for &v in values {
            s += v;
            acc.push(s);
        }
        Self { acc }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Self {
        let mut acc = Vec::with_capacity(n + 1);
        acc.push(0.0);
        let mut s = 0.0;
        for i in 0..n {
            s += f(i);
            acc.push(s);
        }
        Self { acc }
    }

    pub fn len(&self) -> usize {
        self.acc.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn sum_range(&self, start: usize, end: usize) -> f64 {
        self.acc[end] - self.acc[start]
    }

    #[inline]
    pub fn mean_range(&self, start: usize, end: usize) -> f64 {
        (self.acc[end] - self.acc[start]) / (end - start) as f64
    }

    pub fn sum(&self, iv: Interval) -> f64 {
        self.sum_range(iv.start, iv.end())
    }

    pub fn mean(&self, iv: Interval) -> f64 {
        self.mean_range(iv.start, iv.end())
    }
}

/// Arithmetic mean of `f` over `iv`.
pub fn average(f: &[f64], iv: Interval) -> Result<f64> {
    iv.check(f.len())?;
    Ok(f[iv.start..iv.end()].iter().sum::<f64>() / iv.len as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let g = Grid::new(1.0, 3).unwrap();
        assert_eq!(g.cells(), 8);
        assert_eq!(g.cell_width(), 0.25);
        assert_eq!(Grid::new(1.0, 10).unwrap().cells(), 1024);
        assert_eq!(Grid::new(2.0, 4).unwrap().cell_width(), 0.25);
        for k in 3..=20 {
            let g = Grid::new(1.7, k).unwrap();
            let span = g.cell_width() * g.cells() as f64;
            assert!((span - 3.4).abs() <= f64::EPSILON * 4.0);
        }
    }

    #[test]
    fn grid_rejects_bad_config() {
        assert!(matches!(Grid::new(1.0, 2), Err(Error::Config(_))));
        assert!(matches!(Grid::new(1.0, 21), Err(Error::Config(_))));
        assert!(matches!(Grid::new(0.0, 5), Err(Error::Config(_))));
    }

    #[test]
    fn averages() {
        assert_eq!(average(&[1.0; 8], Interval::new(2, 3)).unwrap(), 1.0);
        let f = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(average(&f, Interval::new(0, 4)).unwrap(), 2.5);
        assert_eq!(average(&f, Interval::new(2, 2)).unwrap(), 3.5);
        assert!(matches!(average(&f, Interval::new(3, 2)), Err(Error::Bounds { .. })));
        assert!(average(&f, Interval::new(0, 0)).is_err());
        let ps = PrefixSums::new(&f);
        assert_eq!(ps.mean(Interval::new(2, 2)), 3.5);
    }

    #[test]
    fn doubling_geometry() {
        let iv = Interval::new(10, 4);
        assert_eq!(iv.doubled(64), Interval::new(8, 8));
        assert_eq!(Interval::new(0, 4).doubled(64), Interval::new(0, 6));
        assert_eq!(Interval::new(60, 4).doubled(64), Interval::new(58, 6));
        assert_eq!(Interval::new(0, 64).doubled(64), Interval::new(0, 64));
        assert_eq!(Interval::new(5, 1).doubled(64).len, 2);
    }
}
