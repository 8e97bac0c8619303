//! Initial-set library: parametric shapes, optional volume normalization,
//! and rasterization onto occupancy grids.
//!
//! Rasterization supersamples the shape indicator on a 4x4(x4) pattern per
//! cell, so interior and exterior cells come out exactly 1 and 0 while
//! boundary cells carry the sampled coverage fraction. Volume normalization
//! is a dilation about the origin with the factor computed from the shape's
//! closed-form volume.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::box_oracle::BoxUnion;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, OccupancyField};
use crate::measures::unit_ball_volume;
use crate::pgm::{read_mask_pgm, MaskImage};

/// Geometry of an initial set.
#[derive(Debug, Clone)]
pub enum ShapeKind {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Cuboid {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    BoxUnion {
        union: BoxUnion,
    },
    /// L-shaped polyomino `[-s, s] x [-s, 0]  u  [-s, 0] x [0, s]` (d=2).
    LShape {
        scale: f64,
    },
    /// Centered annulus (d=2) or spherical shell (d=3).
    Annulus {
        inner: f64,
        outer: f64,
    },
    TwoBalls {
        centers: [Vec<f64>; 2],
        radii: [f64; 2],
    },
    /// PGM mask with its own `#extent` scale (d=2).
    MaskFile {
        path: PathBuf,
    },
}

/// A shape plus an optional volume-normalization target.
#[derive(Debug, Clone)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    /// When set, the shape is dilated about the origin so its Lebesgue
    /// volume equals the target (typically `kappa_d`).
    pub normalize_volume_to: Option<f64>,
}

impl ShapeSpec {
    pub fn plain(kind: ShapeKind) -> Self {
        Self {
            kind,
            normalize_volume_to: None,
        }
    }

    pub fn normalized(kind: ShapeKind, target: f64) -> Self {
        Self {
            kind,
            normalize_volume_to: Some(target),
        }
    }
}

/// Shape with loaded resources and validated dimensions, ready to sample.
enum Resolved<'a> {
    Ball {
        center: [f64; 3],
        radius: f64,
    },
    Cuboid {
        lo: [f64; 3],
        hi: [f64; 3],
        dim: usize,
    },
    Union {
        union: &'a BoxUnion,
    },
    LShape {
        scale: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
    },
    TwoBalls {
        centers: [[f64; 3]; 2],
        radii: [f64; 2],
    },
    Mask {
        image: MaskImage,
    },
}

fn pad(v: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    p
}

impl<'a> Resolved<'a> {
    fn build(kind: &'a ShapeKind, dim: usize) -> Result<Self> {
        let wrong_dim = |what: &str, got: usize| {
            Error::ConfigInvalid(format!("{what} has dimension {got}, grid has {dim}"))
        };
        Ok(match kind {
            ShapeKind::Ball { center, radius } => {
                if center.len() != dim {
                    return Err(wrong_dim("ball center", center.len()));
                }
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::ConfigInvalid("ball radius must be positive".into()));
                }
                Resolved::Ball {
                    center: pad(center),
                    radius: *radius,
                }
            }
            ShapeKind::Cuboid { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(wrong_dim("box corner", lo.len()));
                }
                if lo.iter().zip(hi).any(|(a, b)| a >= b) {
                    return Err(Error::ConfigInvalid(
                        "box needs lo < hi componentwise".into(),
                    ));
                }
                Resolved::Cuboid {
                    lo: pad(lo),
                    hi: pad(hi),
                    dim,
                }
            }
            ShapeKind::BoxUnion { union } => {
                if union.dim() != dim {
                    return Err(wrong_dim("box union", union.dim()));
                }
                Resolved::Union { union }
            }
            ShapeKind::LShape { scale } => {
                if dim != 2 {
                    return Err(Error::ConfigInvalid(
                        "l-shape is only defined in d=2".into(),
                    ));
                }
                if !scale.is_finite() || *scale <= 0.0 {
                    return Err(Error::ConfigInvalid(
                        "l-shape scale must be positive".into(),
                    ));
                }
                Resolved::LShape { scale: *scale }
            }
            ShapeKind::Annulus { inner, outer } => {
                if !(inner.is_finite() && *inner >= 0.0 && outer > inner) {
                    return Err(Error::ConfigInvalid(
                        "annulus needs 0 <= inner < outer".into(),
                    ));
                }
                Resolved::Annulus {
                    inner: *inner,
                    outer: *outer,
                }
            }
            ShapeKind::TwoBalls { centers, radii } => {
                if centers[0].len() != dim || centers[1].len() != dim {
                    return Err(wrong_dim("ball center", centers[0].len()));
                }
                if !(radii[0] > 0.0 && radii[1] > 0.0)
                    || !radii[0].is_finite()
                    || !radii[1].is_finite()
                {
                    return Err(Error::ConfigInvalid("ball radii must be positive".into()));
                }
                Resolved::TwoBalls {
                    centers: [pad(&centers[0]), pad(&centers[1])],
                    radii: *radii,
                }
            }
            ShapeKind::MaskFile { path } => {
                if dim != 2 {
                    return Err(Error::ConfigInvalid(
                        "mask shapes are only defined in d=2".into(),
                    ));
                }
                Resolved::Mask {
                    image: read_mask_pgm(path)?,
                }
            }
        })
    }

    /// Closed-form Lebesgue volume (mask: pixel sum).
    fn analytic_volume(&self, dim: usize) -> f64 {
        match self {
            Resolved::Ball { radius, .. } => unit_ball_volume(dim) * radius.powi(dim as i32),
            Resolved::Cuboid { lo, hi, dim } => (0..*dim).map(|a| hi[a] - lo[a]).product(),
            Resolved::Union { union } => union.exact_volume(),
            Resolved::LShape { scale } => 3.0 * scale * scale,
            Resolved::Annulus { inner, outer } => {
                unit_ball_volume(dim) * (outer.powi(dim as i32) - inner.powi(dim as i32))
            }
            Resolved::TwoBalls { centers, radii } => {
                let dist = distance(&centers[0], &centers[1]);
                unit_ball_volume(dim) * (radii[0].powi(dim as i32) + radii[1].powi(dim as i32))
                    - ball_overlap_volume(dim, dist, radii[0], radii[1])
            }
            Resolved::Mask { image } => image.volume(),
        }
    }

    /// Radius of a ball around the origin containing the support.
    fn support_radius(&self) -> f64 {
        let corner_norm = |lo: &[f64; 3], hi: &[f64; 3]| -> f64 {
            (0..3)
                .map(|a| lo[a].abs().max(hi[a].abs()).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        match self {
            Resolved::Ball { center, radius } => norm(center) + radius,
            Resolved::Cuboid { lo, hi, .. } => corner_norm(lo, hi),
            Resolved::Union { union } => union
                .boxes()
                .iter()
                .map(|b| b.corner_max_norm())
                .fold(0.0, f64::max),
            Resolved::LShape { scale } => scale * std::f64::consts::SQRT_2,
            Resolved::Annulus { outer, .. } => *outer,
            Resolved::TwoBalls { centers, radii } => {
                (norm(&centers[0]) + radii[0]).max(norm(&centers[1]) + radii[1])
            }
            Resolved::Mask { image } => image.support_radius(),
        }
    }

    /// Pointwise coverage (a 0/1 indicator except for grayscale masks).
    #[inline]
    fn coverage(&self, p: &[f64; 3]) -> f64 {
        match self {
            Resolved::Ball { center, radius } => {
                let d2 = dist2(p, center);
                if d2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Resolved::Cuboid { lo, hi, dim } => {
                for a in 0..*dim {
                    if p[a] < lo[a] || p[a] > hi[a] {
                        return 0.0;
                    }
                }
                1.0
            }
            Resolved::Union { union } => {
                for b in union.boxes() {
                    let inside = (0..union.dim()).all(|a| p[a] >= b.lo()[a] && p[a] <= b.hi()[a]);
                    if inside {
                        return 1.0;
                    }
                }
                0.0
            }
            Resolved::LShape { scale } => {
                let s = *scale;
                let (x, y) = (p[0], p[1]);
                let lower = (-s..=s).contains(&x) && (-s..=0.0).contains(&y);
                let upper = (-s..=0.0).contains(&x) && (0.0..=s).contains(&y);
                if lower || upper {
                    1.0
                } else {
                    0.0
                }
            }
            Resolved::Annulus { inner, outer } => {
                let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                if r2 >= inner * inner && r2 <= outer * outer {
                    1.0
                } else {
                    0.0
                }
            }
            Resolved::TwoBalls { centers, radii } => {
                if dist2(p, &centers[0]) <= radii[0] * radii[0]
                    || dist2(p, &centers[1]) <= radii[1] * radii[1]
                {
                    1.0
                } else {
                    0.0
                }
            }
            Resolved::Mask { image } => image.sample(p[0], p[1]),
        }
    }
}

#[inline]
fn norm(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    dist2(a, b).sqrt()
}

/// Intersection volume of two balls, in closed form (2-d lens area /
/// 3-d lens volume); used so volume normalization stays exact for
/// overlapping two-ball shapes.
pub fn ball_overlap_volume(dim: usize, dist: f64, r1: f64, r2: f64) -> f64 {
    if dist >= r1 + r2 {
        return 0.0;
    }
    if dist <= (r1 - r2).abs() {
        return unit_ball_volume(dim) * r1.min(r2).powi(dim as i32);
    }
    match dim {
        2 => {
            let d = dist;
            let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
            let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
            let tri = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
            r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - 0.5 * tri.sqrt()
        }
        3 => {
            let d = dist;
            let num =
                (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2));
            std::f64::consts::PI * num / (12.0 * d)
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Boxes making up an axis-aligned shape, dilated about the origin.
fn axis_aligned_boxes(kind: &ShapeKind, scale: f64) -> Option<Vec<(Vec<f64>, Vec<f64>)>> {
    let scaled = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * scale).collect() };
    match kind {
        ShapeKind::Cuboid { lo, hi } => Some(vec![(scaled(lo), scaled(hi))]),
        ShapeKind::BoxUnion { union } => Some(
            union
                .boxes()
                .iter()
                .map(|b| (scaled(b.lo()), scaled(b.hi())))
                .collect(),
        ),
        ShapeKind::LShape { scale: s } => {
            let s = s * scale;
            Some(vec![
                (vec![-s, -s], vec![s, 0.0]),
                (vec![-s, 0.0], vec![0.0, s]),
            ])
        }
        _ => None,
    }
}

/// Rasterize a shape onto a grid.
///
/// Axis-aligned shapes (boxes, box unions, the L) get exact per-cell
/// coverage through the box oracle; point supersampling of a straight
/// axis-aligned edge would alias with a constant phase along the whole
/// edge. Curved and grayscale shapes are supersampled on a 4^d pattern per
/// cell, where the edge phases average out.
///
/// Fails with `ShapeOutOfDomain` when the (possibly dilated) support cannot
/// keep every covered cell center strictly inside the inscribed ball.
pub fn rasterize(shape: &ShapeSpec, grid: &GridSpec) -> Result<OccupancyField> {
    let dim = grid.dim();
    let resolved = Resolved::build(&shape.kind, dim)?;

    let scale = match shape.normalize_volume_to {
        Some(target) => {
            if !target.is_finite() || target <= 0.0 {
                return Err(Error::ConfigInvalid(format!(
                    "normalization target must be positive, got {target}"
                )));
            }
            let v0 = resolved.analytic_volume(dim);
            if v0 < grid.empty_volume_threshold() {
                return Err(Error::EmptySet);
            }
            (target / v0).powf(1.0 / dim as f64)
        }
        None => 1.0,
    };

    let r = grid.extent();
    let h = grid.cell_size();
    let margin = 0.5 * h * (dim as f64).sqrt();
    let support = scale * resolved.support_radius();
    if support > r - margin {
        return Err(Error::ShapeOutOfDomain(format!(
            "support radius {support:.6} exceeds {:.6} (inscribed ball radius {r} minus half cell diagonal)",
            r - margin
        )));
    }

    if let Some(boxes) = axis_aligned_boxes(&shape.kind, scale) {
        let union = BoxUnion::new(
            boxes
                .into_iter()
                .map(|(lo, hi)| crate::box_oracle::Aabb::new(lo, hi))
                .collect::<Result<Vec<_>>>()?,
        )?;
        return union.to_field(grid);
    }

    let n = grid.resolution();
    let inv_scale = 1.0 / scale;
    // 4 supersample offsets per axis
    let offsets: [f64; 4] = std::array::from_fn(|k| ((k as f64 + 0.5) / 4.0 - 0.5) * h);
    let cull = support + 0.5 * h * (dim as f64).sqrt();

    let mut values = vec![0.0f64; grid.cell_count()];
    let plane = grid.cell_count() / n;
    values
        .par_chunks_mut(plane)
        .enumerate()
        .for_each(|(ix, chunk)| {
            let x = grid.axis_center(ix);
            match dim {
                2 => {
                    for (iy, out) in chunk.iter_mut().enumerate() {
                        let y = grid.axis_center(iy);
                        if x * x + y * y > cull * cull {
                            continue;
                        }
                        let mut acc = 0.0;
                        for ox in offsets {
                            for oy in offsets {
                                let p = [(x + ox) * inv_scale, (y + oy) * inv_scale, 0.0];
                                acc += resolved.coverage(&p);
                            }
                        }
                        *out = acc / 16.0;
                    }
                }
                3 => {
                    for iy in 0..n {
                        let y = grid.axis_center(iy);
                        for iz in 0..n {
                            let z = grid.axis_center(iz);
                            if x * x + y * y + z * z > cull * cull {
                                continue;
                            }
                            let mut acc = 0.0;
                            for ox in offsets {
                                for oy in offsets {
                                    for oz in offsets {
                                        let p = [
                                            (x + ox) * inv_scale,
                                            (y + oy) * inv_scale,
                                            (z + oz) * inv_scale,
                                        ];
                                        acc += resolved.coverage(&p);
                                    }
                                }
                            }
                            chunk[iy * n + iz] = acc / 64.0;
                        }
                    }
                }
                _ => unreachable!(),
            }
        });

    Ok(OccupancyField::from_values_unchecked(*grid, values))
}

/// Rasterized centered ball; requires `radius <= R - h`.
pub fn ball_field(radius: f64, grid: &GridSpec) -> Result<OccupancyField> {
    if radius > grid.extent() - grid.cell_size() {
        return Err(Error::ShapeOutOfDomain(format!(
            "ball radius {radius} exceeds extent minus one cell ({})",
            grid.extent() - grid.cell_size()
        )));
    }
    rasterize(
        &ShapeSpec::plain(ShapeKind::Ball {
            center: vec![0.0; grid.dim()],
            radius,
        }),
        grid,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2() -> GridSpec {
        GridSpec::new(2, 256, 2.0).unwrap()
    }

    #[test]
    fn normalized_annulus_has_target_volume() {
        let f = rasterize(
            &ShapeSpec::normalized(
                ShapeKind::Annulus {
                    inner: 0.5,
                    outer: 1.0,
                },
                PI,
            ),
            &grid2(),
        )
        .unwrap();
        assert!((f.volume() - PI).abs() < 5e-3, "volume {}", f.volume());
        // closed-form rescale factor sqrt(kappa_2 / (pi * 0.75))
        let s = (PI / (PI * 0.75)).sqrt();
        let outer_cells = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(i, _)| {
                let c = f.cell_center(i);
                (c[0] * c[0] + c[1] * c[1]).sqrt()
            })
            .fold(0.0f64, f64::max);
        assert!(
            (outer_cells - s).abs() < 2.0 * grid2().cell_size(),
            "outer {outer_cells} vs {s}"
        );
    }

    #[test]
    fn l_shape_volume_and_barycenter() {
        let f = rasterize(
            &ShapeSpec::plain(ShapeKind::LShape { scale: 1.0 }),
            &grid2(),
        )
        .unwrap();
        assert!((f.volume() - 3.0).abs() < 2e-3, "volume {}", f.volume());
        let b = f.barycenter().unwrap();
        assert!(
            (b[0] + 1.0 / 6.0).abs() < 2e-3 && (b[1] + 1.0 / 6.0).abs() < 2e-3,
            "{b:?}"
        );
    }

    #[test]
    fn ball_out_of_domain_is_rejected() {
        let g = grid2();
        assert!(matches!(
            rasterize(
                &ShapeSpec::plain(ShapeKind::Ball {
                    center: vec![1.5, 0.0],
                    radius: 0.8
                }),
                &g
            ),
            Err(Error::ShapeOutOfDomain(_))
        ));
        assert!(matches!(
            ball_field(2.0, &g),
            Err(Error::ShapeOutOfDomain(_))
        ));
        assert!(ball_field(g.extent() - g.cell_size(), &g).is_ok());
    }

    #[test]
    fn lens_formula_matches_quadrature() {
        // independent oracle: midpoint quadrature of the pair indicator
        let quad = |dim: usize, c2: [f64; 3], r1: f64, r2: f64| -> f64 {
            let n = 400usize;
            let lo = -2.0;
            let step = 4.0 / n as f64;
            let mut acc = 0.0;
            let inside = |p: [f64; 3]| -> bool {
                let d1 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                let d2 = (p[0] - c2[0]).powi(2) + (p[1] - c2[1]).powi(2) + (p[2] - c2[2]).powi(2);
                d1 <= r1 * r1 && d2 <= r2 * r2
            };
            if dim == 2 {
                for i in 0..n {
                    for j in 0..n {
                        let p = [
                            lo + (i as f64 + 0.5) * step,
                            lo + (j as f64 + 0.5) * step,
                            0.0,
                        ];
                        if inside(p) {
                            acc += step * step;
                        }
                    }
                }
            } else {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let p = [
                                lo + (i as f64 + 0.5) * step,
                                lo + (j as f64 + 0.5) * step,
                                lo + (k as f64 + 0.5) * step,
                            ];
                            if inside(p) {
                                acc += step * step * step;
                            }
                        }
                    }
                }
            }
            acc
        };
        for (dim, dist, r1, r2) in [(2, 0.8, 1.0, 0.7), (2, 0.2, 0.9, 0.8), (3, 0.9, 1.0, 0.6)] {
            let closed = ball_overlap_volume(dim, dist, r1, r2);
            let numeric = quad(dim, [dist, 0.0, 0.0], r1, r2);
            let tol = if dim == 2 { 5e-3 } else { 2e-2 };
            assert!(
                (closed - numeric).abs() < tol,
                "dim {dim}: closed {closed} numeric {numeric}"
            );
        }
        // disjoint and nested limits
        assert_eq!(ball_overlap_volume(2, 3.0, 1.0, 1.0), 0.0);
        assert!((ball_overlap_volume(2, 0.05, 1.0, 0.3) - PI * 0.09).abs() < 1e-12);
    }

    #[test]
    fn overlapping_two_balls_normalize_correctly() {
        let kind = ShapeKind::TwoBalls {
            centers: [vec![0.35, 0.0], vec![-0.35, 0.0]],
            radii: [0.6, 0.6],
        };
        let f = rasterize(&ShapeSpec::normalized(kind, PI), &grid2()).unwrap();
        assert!((f.volume() - PI).abs() < 5e-3, "volume {}", f.volume());
    }

    #[test]
    fn mask_rasterization_resamples() {
        let g = GridSpec::new(2, 128, 2.0).unwrap();
        let ball = ball_field(1.0, &g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.pgm");
        crate::pgm::write_snapshot_pgm(&ball, &path).unwrap();

        // re-rasterize the mask on a finer grid
        let fine = GridSpec::new(2, 192, 2.0).unwrap();
        let f = rasterize(&ShapeSpec::plain(ShapeKind::MaskFile { path }), &fine).unwrap();
        assert!((f.volume() - PI).abs() < 2e-2, "volume {}", f.volume());
        let b = f.barycenter().unwrap();
        assert!(b[0].abs() < 0.01 && b[1].abs() < 0.01);
    }

    #[test]
    fn cuboid_supersampling_quarter_coverage() {
        // box corner at a cell center leaves exactly quarter-covered corner cells
        let g = grid2();
        let h = g.cell_size();
        let f = rasterize(
            &ShapeSpec::plain(ShapeKind::Cuboid {
                lo: vec![-0.5 - 0.5 * h, -0.5 - 0.5 * h],
                hi: vec![0.5 + 0.5 * h, 0.5 + 0.5 * h],
            }),
            &g,
        )
        .unwrap();
        let quarter = f
            .values()
            .iter()
            .filter(|&&v| (v - 0.25).abs() < 1e-12)
            .count();
        assert_eq!(quarter, 4);
    }
}
