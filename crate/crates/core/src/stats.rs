//! Small statistical checks used to validate the direction samplers:
//! equal-area hemisphere binning, the chi-square goodness-of-fit statistic,
//! and one-dimensional star discrepancy.

use crate::direction::Direction;

/// Number of equal-area hemisphere bins used by the uniformity test.
pub const HEMISPHERE_BINS: usize = 64;

/// Upper 0.001 quantile of the chi-square distribution with 63 degrees of
/// freedom (64 bins), i.e. the critical value at significance 0.001.
/// Frozen from scipy.stats.chi2.ppf(0.999, 63).
pub const CHI2_CRIT_P999_DF63: f64 = 103.44237731987324;

/// Map a canonical direction to one of [`HEMISPHERE_BINS`] equal-area bins.
///
/// d=2: 64 equal arcs of the canonical half-circle, indexed by the angle
/// `atan2(u2, u1)` which lies in `(-pi/2, pi/2]` for class representatives.
/// d=3: 8 equal slabs of the leading component (whose marginal is uniform on
/// `[0, 1]` on the canonical hemisphere, by Archimedes' hat-box theorem)
/// crossed with 8 equal azimuth sectors.
pub fn hemisphere_bin(u: &Direction) -> usize {
    let c = u.components();
    match u.dim() {
        2 => {
            let alpha = c[1].atan2(c[0]); // in (-pi/2, pi/2] for canonical reps
            let t = (alpha + std::f64::consts::FRAC_PI_2) / std::f64::consts::PI;
            ((t * HEMISPHERE_BINS as f64) as usize).min(HEMISPHERE_BINS - 1)
        }
        3 => {
            let slab = ((c[0].abs() * 8.0) as usize).min(7);
            let az = c[2].atan2(c[1]); // in (-pi, pi]
            let t = (az + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
            let sector = ((t * 8.0) as usize).min(7);
            slab * 8 + sector
        }
        _ => unreachable!(),
    }
}

/// Pearson chi-square statistic for observed counts against a uniform
/// expectation.
pub fn chi_square_uniform(counts: &[usize], total: usize) -> f64 {
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum()
}

/// Exact star discrepancy of points in `[0, 1)` (sorts the input in place).
///
/// `D* = max_i max(x_(i) - (i-1)/n, i/n - x_(i))` for the sorted sample.
pub fn star_discrepancy_unit(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let i1 = i as f64;
        d = d.max(x - i1 / n).max((i1 + 1.0) / n - x);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::sample_uniform;
    use crate::rng::Rng;

    #[test]
    fn chi_square_of_perfectly_uniform_counts_is_zero() {
        let counts = vec![10usize; 8];
        assert_eq!(chi_square_uniform(&counts, 80), 0.0);
    }

    #[test]
    fn star_discrepancy_of_regular_lattice() {
        // {(i + 0.5)/n} has discrepancy 1/(2n) + 1/(2n) boundary effects
        let n = 100;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = star_discrepancy_unit(&mut xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-12, "d {d}");
    }

    #[test]
    fn hemisphere_bins_cover_all_indices() {
        for dim in [2usize, 3] {
            let mut rng = Rng::new(5);
            let mut seen = [false; HEMISPHERE_BINS];
            for _ in 0..20_000 {
                let b = hemisphere_bin(&sample_uniform(dim, &mut rng));
                assert!(b < HEMISPHERE_BINS);
                seen[b] = true;
            }
            assert!(seen.iter().all(|&s| s), "dim {dim}: some bin never hit");
        }
    }
}
