//! Axis-aligned occupancy grids over the cube `[-R, R]^d`.
//!
//! An [`OccupancyField`] stores, for every grid cell, the fraction of the
//! cell covered by a bounded measurable set. Values live in `[0, 1]`;
//! boundary cells are fractional, interior/exterior cells are exactly 1/0.
//! Every operation downstream (volume, moments, symmetrization) is built on
//! this representation.

use crate::error::{Error, Result};

/// Description of a uniform grid on the cube `[-R, R]^d`.
///
/// Cell `i` along an axis spans `[-R + i*h, -R + (i+1)*h]` with center
/// `-R + (i + 1/2) * h`, where `h = 2R / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    resolution: usize,
    extent: f64,
    cell_size: f64,
}

impl GridSpec {
    /// Create a grid with `resolution` cells per axis on `[-extent, extent]^dim`.
    pub fn new(dim: usize, resolution: usize, extent: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::GridInvalid(format!("dim must be 2 or 3, got {dim}")));
        }
        if resolution < 8 {
            return Err(Error::GridInvalid(format!(
                "resolution must be at least 8, got {resolution}"
            )));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(Error::GridInvalid(format!(
                "extent must be positive, got {extent}"
            )));
        }
        Ok(Self {
            dim,
            resolution,
            extent,
            cell_size: 2.0 * extent / resolution as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Half-width `R` of the domain cube.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Cell edge length `h = 2R / N`.
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Total number of cells, `N^d`.
    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    /// Center coordinate of cell `i` along one axis.
    #[inline]
    pub fn axis_center(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.cell_size
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.cell_size.powi(self.dim as i32)
    }

    /// Sets with volume below this threshold are treated as empty
    /// (avoids division blow-up in barycenter and equivalent radius).
    pub fn empty_volume_threshold(&self) -> f64 {
        1e-12 * (2.0 * self.extent).powi(self.dim as i32)
    }
}

/// Fractional indicator of a bounded measurable set on a [`GridSpec`].
///
/// Storage is row-major with axis 0 slowest and the last axis fastest:
/// `d=2: idx = ix * N + iy`, `d=3: idx = (ix * N + iy) * N + iz`.
///
/// Invariants: every value lies in `[0, 1]`, and every cell with positive
/// value has its center strictly inside the inscribed ball `B(o, R)`. The
/// containment guarantees that symmetrals never leave the domain, since the
/// ball is a fixed point of every Steiner symmetrization and the operator is
/// monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl OccupancyField {
    /// All-zero field (the empty set).
    pub fn empty(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.cell_count()],
        }
    }

    /// Build a field from raw per-cell values, validating both invariants.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::GridInvalid(format!(
                "value array has {} entries, grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::GridInvalid(format!(
                    "occupancy value {v} outside [0, 1]"
                )));
            }
        }
        let field = Self { grid, values };
        field.check_support_contained()?;
        Ok(field)
    }

    /// Internal constructor for values produced by operators that guarantee
    /// the invariants by construction.
    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Flat index of the cell with per-axis indices `coords`.
    #[inline]
    pub fn linear_index(&self, coords: &[usize]) -> usize {
        let n = self.grid.resolution;
        match self.grid.dim {
            2 => coords[0] * n + coords[1],
            3 => (coords[0] * n + coords[1]) * n + coords[2],
            _ => unreachable!(),
        }
    }

    /// Center of the cell at flat index `idx`, padded to three components
    /// (the unused component of a 2-d grid is zero).
    #[inline]
    pub fn cell_center(&self, idx: usize) -> [f64; 3] {
        let n = self.grid.resolution;
        match self.grid.dim {
            2 => {
                let iy = idx % n;
                let ix = idx / n;
                [self.grid.axis_center(ix), self.grid.axis_center(iy), 0.0]
            }
            3 => {
                let iz = idx % n;
                let rest = idx / n;
                let iy = rest % n;
                let ix = rest / n;
                [
                    self.grid.axis_center(ix),
                    self.grid.axis_center(iy),
                    self.grid.axis_center(iz),
                ]
            }
            _ => unreachable!(),
        }
    }

    /// Multilinear interpolation of the occupancy at an arbitrary point.
    ///
    /// Values are anchored at cell centers; points beyond the outermost
    /// cell centers interpolate against zero (the field is extended by zero
    /// outside the domain).
    #[inline]
    pub fn sample(&self, p: &[f64; 3]) -> f64 {
        match self.grid.dim {
            2 => self.sample2(p[0], p[1]),
            3 => self.sample3(p[0], p[1], p[2]),
            _ => unreachable!(),
        }
    }

    #[inline]
    fn axis_base(&self, x: f64) -> (isize, f64) {
        // position in cell-center coordinates
        let s = (x + self.grid.extent) / self.grid.cell_size - 0.5;
        let i0 = s.floor();
        (i0 as isize, s - i0)
    }

    #[inline]
    fn value_or_zero2(&self, ix: isize, iy: isize) -> f64 {
        let n = self.grid.resolution as isize;
        if ix < 0 || iy < 0 || ix >= n || iy >= n {
            0.0
        } else {
            self.values[(ix * n + iy) as usize]
        }
    }

    #[inline]
    fn value_or_zero3(&self, ix: isize, iy: isize, iz: isize) -> f64 {
        let n = self.grid.resolution as isize;
        if ix < 0 || iy < 0 || iz < 0 || ix >= n || iy >= n || iz >= n {
            0.0
        } else {
            self.values[((ix * n + iy) * n + iz) as usize]
        }
    }

    #[inline]
    fn sample2(&self, x: f64, y: f64) -> f64 {
        let (ix, fx) = self.axis_base(x);
        let (iy, fy) = self.axis_base(y);
        let v00 = self.value_or_zero2(ix, iy);
        let v01 = self.value_or_zero2(ix, iy + 1);
        let v10 = self.value_or_zero2(ix + 1, iy);
        let v11 = self.value_or_zero2(ix + 1, iy + 1);
        let a = v00 * (1.0 - fy) + v01 * fy;
        let b = v10 * (1.0 - fy) + v11 * fy;
        a * (1.0 - fx) + b * fx
    }

    #[inline]
    fn sample3(&self, x: f64, y: f64, z: f64) -> f64 {
        let (ix, fx) = self.axis_base(x);
        let (iy, fy) = self.axis_base(y);
        let (iz, fz) = self.axis_base(z);
        let mut out = 0.0;
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
                let w = wx * wy;
                if w == 0.0 {
                    continue;
                }
                let v0 = self.value_or_zero3(ix + dx, iy + dy, iz);
                let v1 = self.value_or_zero3(ix + dx, iy + dy, iz + 1);
                out += w * (v0 * (1.0 - fz) + v1 * fz);
            }
        }
        out
    }

    /// Verify the inscribed-ball containment invariant.
    pub fn check_support_contained(&self) -> Result<()> {
        let r2 = self.grid.extent * self.grid.extent;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                let c = self.cell_center(idx);
                let n2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
                if n2 >= r2 {
                    return Err(Error::ShapeOutOfDomain(format!(
                        "cell center ({}, {}, {}) with occupancy {v} lies outside B(o, {})",
                        c[0], c[1], c[2], self.grid.extent
                    )));
                }
            }
        }
        Ok(())
    }
}
