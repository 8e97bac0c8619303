//! Randomized verification suites shared by the CLI check subcommands and
//! the acceptance tests: raster-vs-oracle equivalence on box unions,
//! contraction inequalities, and direction-sampler validation.

use crate::box_oracle::{exact_nikodym, Aabb, BoxUnion};
use crate::direction::{double_cap_probability, sample_uniform, Direction};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::measures::nikodym_distance;
use crate::rng::Rng;
use crate::stats::{chi_square_uniform, hemisphere_bin, CHI2_CRIT_P999_DF63, HEMISPHERE_BINS};
use crate::symmetrize::steiner_symmetrize;

/// Seed of the randomized oracle suite; fixed so reruns are identical.
pub const ORACLE_SEED: u64 = 0xB0C5;

/// Number of randomized unions in the equivalence suite.
pub const ORACLE_CASES: usize = 10;

/// Number of union pairs in the contraction suite.
pub const LIPSCHITZ_PAIRS: usize = 50;

/// Random union of at most `max_boxes` boxes kept well inside the inscribed
/// ball of the standard `R = 2` domain.
pub fn random_box_union(rng: &mut Rng, dim: usize, max_boxes: usize) -> BoxUnion {
    let count = 1 + (rng.next_u64() as usize) % max_boxes;
    let mut boxes = Vec::with_capacity(count);
    while boxes.len() < count {
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for _ in 0..dim {
            let c = rng.uniform() * 2.2 - 1.1;
            let w = 0.08 + 0.37 * rng.uniform();
            lo.push(c - w);
            hi.push(c + w);
        }
        let b = Aabb::new(lo, hi).expect("positive extents by construction");
        if b.corner_max_norm() <= 1.7 {
            boxes.push(b);
        }
    }
    BoxUnion::new(boxes).expect("non-empty")
}

/// One raster-vs-exact symmetral comparison.
#[derive(Debug, Clone)]
pub struct EquivalenceCase {
    pub case: usize,
    pub axis: usize,
    /// `d_N(raster symmetral, rasterized exact symmetral) / volume` at the
    /// fine resolution.
    pub deviation_ratio: f64,
    /// Coarse-to-fine error ratio (expected to grow past 1.7 as the error
    /// order is O(h)).
    pub shrink: f64,
}

/// Outcome of the box-oracle suite.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub cases: Vec<EquivalenceCase>,
    pub max_deviation_ratio: f64,
    pub mean_shrink: f64,
    /// Exact-side 1-Lipschitz violations (must be zero).
    pub exact_lipschitz_violations: usize,
    /// Worst raster-side excess over `d_N(A,B) + 0.02 max(volume)`
    /// (non-positive means the inequality held everywhere).
    pub raster_lipschitz_excess: f64,
    /// Exact-side moment increases under axis symmetrization (must be zero).
    pub moment_descent_violations: usize,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_deviation_ratio <= 0.05
            && self.mean_shrink >= 1.7
            && self.exact_lipschitz_violations == 0
            && self.raster_lipschitz_excess <= 0.0
            && self.moment_descent_violations == 0
    }
}

/// Run the oracle equivalence and contraction suites (d=2, axis
/// directions, N = 128 against N = 256).
pub fn run_oracle_check() -> Result<OracleReport> {
    let fine = GridSpec::new(2, 256, 2.0)?;
    let coarse = GridSpec::new(2, 128, 2.0)?;
    let mut rng = Rng::new(ORACLE_SEED);

    let mut cases = Vec::new();
    let mut moment_descent_violations = 0;
    for case in 0..ORACLE_CASES {
        let union = random_box_union(&mut rng, 2, 6);
        let volume = union.exact_volume();
        for axis in 0..2 {
            let symmetral = union.exact_symmetral_axis(axis);
            if symmetral.exact_moment() > union.exact_moment() {
                moment_descent_violations += 1;
            }
            let mut errs = [0.0f64; 2];
            for (k, grid) in [coarse, fine].iter().enumerate() {
                let field = union.to_field(grid)?;
                let raster = steiner_symmetrize(&field, &Direction::axis(2, axis), false);
                let exact = symmetral.to_field(grid)?;
                errs[k] = nikodym_distance(&raster, &exact)?;
            }
            cases.push(EquivalenceCase {
                case,
                axis,
                deviation_ratio: errs[1] / volume,
                shrink: errs[0] / errs[1],
            });
        }
    }

    let mut exact_lipschitz_violations = 0;
    let mut raster_lipschitz_excess = f64::NEG_INFINITY;
    for pair in 0..LIPSCHITZ_PAIRS {
        let a = random_box_union(&mut rng, 2, 6);
        let b = random_box_union(&mut rng, 2, 6);
        let before_exact = exact_nikodym(&a, &b)?;
        for axis in 0..2 {
            let after_exact =
                exact_nikodym(&a.exact_symmetral_axis(axis), &b.exact_symmetral_axis(axis))?;
            if after_exact > before_exact + 1e-12 {
                exact_lipschitz_violations += 1;
            }
        }
        // raster side: one axis per pair keeps the suite fast
        let axis = pair % 2;
        let fa = a.to_field(&fine)?;
        let fb = b.to_field(&fine)?;
        let before = nikodym_distance(&fa, &fb)?;
        let after = nikodym_distance(
            &steiner_symmetrize(&fa, &Direction::axis(2, axis), false),
            &steiner_symmetrize(&fb, &Direction::axis(2, axis), false),
        )?;
        let slack = 0.02 * fa.volume().max(fb.volume());
        raster_lipschitz_excess = raster_lipschitz_excess.max(after - before - slack);
    }

    let max_deviation_ratio = cases.iter().map(|c| c.deviation_ratio).fold(0.0, f64::max);
    let mean_shrink = cases.iter().map(|c| c.shrink).sum::<f64>() / cases.len() as f64;
    Ok(OracleReport {
        cases,
        max_deviation_ratio,
        mean_shrink,
        exact_lipschitz_violations,
        raster_lipschitz_excess,
        moment_descent_violations,
    })
}

/// Outcome of the direction-sampler validation.
#[derive(Debug, Clone)]
pub struct SamplerReport {
    pub dim: usize,
    pub samples: usize,
    pub empirical_double_cap: f64,
    pub analytic_double_cap: f64,
    /// Monte Carlo standard deviation of the empirical frequency.
    pub sigma: f64,
    pub chi_square: f64,
    pub chi_square_critical: f64,
}

impl SamplerReport {
    pub fn passed(&self) -> bool {
        (self.empirical_double_cap - self.analytic_double_cap).abs() <= 3.0 * self.sigma
            && self.chi_square <= self.chi_square_critical
    }
}

/// Draw `samples` uniform directions and compare the double-cap frequency
/// with the analytic value; bin the hemisphere into equal-area cells and
/// compute the chi-square uniformity statistic.
pub fn run_sampler_check(dim: usize, samples: usize, seed: u64) -> SamplerReport {
    let mut rng = Rng::new(seed);
    let w = Direction::axis(dim, 0);
    let mut cap = 0usize;
    let mut counts = vec![0usize; HEMISPHERE_BINS];
    for _ in 0..samples {
        let u = sample_uniform(dim, &mut rng);
        if u.dot(w.components()).abs() >= std::f64::consts::FRAC_1_SQRT_2 {
            cap += 1;
        }
        counts[hemisphere_bin(&u)] += 1;
    }
    let analytic = double_cap_probability(dim);
    SamplerReport {
        dim,
        samples,
        empirical_double_cap: cap as f64 / samples as f64,
        analytic_double_cap: analytic,
        sigma: (analytic * (1.0 - analytic) / samples as f64).sqrt(),
        chi_square: chi_square_uniform(&counts, samples),
        chi_square_critical: CHI2_CRIT_P999_DF63,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unions_stay_inside_the_domain() {
        let mut rng = Rng::new(1);
        for _ in 0..20 {
            let u = random_box_union(&mut rng, 2, 6);
            assert!(u.boxes().iter().all(|b| b.corner_max_norm() <= 1.7));
            assert!(u.exact_volume() > 0.0);
        }
    }

    #[test]
    fn sampler_check_passes_for_both_dimensions() {
        for dim in [2, 3] {
            let report = run_sampler_check(dim, 20_000, 7);
            assert!(
                report.passed(),
                "dim {dim}: {:?}",
                (report.empirical_double_cap, report.chi_square)
            );
        }
    }
}
