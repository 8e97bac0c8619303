//! Directions as points of the projective sphere `S^(d-1)/~` (u and -u
//! identified), the metric on the quotient, uniform sampling, and the
//! direction-sequence policies used by the experiments.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Components below this magnitude are treated as zero by the canonical
/// sign rule.
const SIGN_TOLERANCE: f64 = 1e-12;

/// Canonical unit-vector representative of a class `{u, -u}`.
///
/// The representative is chosen so that the first component whose magnitude
/// exceeds `1e-12` is positive. The rule is O(d) and stable except on the
/// measure-zero boundary set.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    comps: Vec<f64>,
}

impl Direction {
    /// Normalize a nonzero vector and pick the canonical class representative.
    pub fn canonicalize(v: &[f64]) -> Result<Self> {
        assert!(
            v.len() == 2 || v.len() == 3,
            "directions exist in dimension 2 or 3"
        );
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let mut comps: Vec<f64> = v.iter().map(|x| x / norm).collect();
        for &c in &comps {
            if c.abs() > SIGN_TOLERANCE {
                if c < 0.0 {
                    for x in &mut comps {
                        *x = -*x;
                    }
                }
                break;
            }
        }
        Ok(Self { comps })
    }

    /// The k-th coordinate axis as a direction.
    pub fn axis(dim: usize, k: usize) -> Self {
        let mut comps = vec![0.0; dim];
        comps[k] = 1.0;
        Self { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// Components padded to three entries (unused entries zero), convenient
    /// for fixed-size inner loops.
    pub fn padded(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        p[..self.comps.len()].copy_from_slice(&self.comps);
        p
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.comps.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

/// Metric on the projective sphere: `min(||u - v||, ||u + v||)`.
pub fn direction_distance(u: &Direction, v: &Direction) -> f64 {
    let mut minus = 0.0;
    let mut plus = 0.0;
    for (a, b) in u.comps.iter().zip(&v.comps) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    minus.sqrt().min(plus.sqrt())
}

/// Probability that a uniform direction u satisfies `|u . w| >= 1/sqrt(2)`
/// for any fixed unit vector w.
///
/// d=2: the double cap covers half of the circle. d=3: the coordinate
/// marginal on the sphere is uniform on [-1, 1], so the mass of
/// `|z| >= 1/sqrt(2)` is `1 - 1/sqrt(2)`.
pub fn double_cap_probability(dim: usize) -> f64 {
    match dim {
        2 => 0.5,
        3 => 1.0 - std::f64::consts::FRAC_1_SQRT_2,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Draw a uniform direction: a vector of independent standard normals,
/// normalized and canonicalized. The zero vector has measure zero; it is
/// handled by resampling.
pub fn sample_uniform(dim: usize, rng: &mut Rng) -> Direction {
    loop {
        let mut v = [0.0f64; 3];
        for c in v.iter_mut().take(dim) {
            *c = rng.normal();
        }
        let n2: f64 = v[..dim].iter().map(|x| x * x).sum();
        if n2 > 1e-24 {
            return Direction::canonicalize(&v[..dim]).expect("nonzero by construction");
        }
    }
}

/// Declarative description of a direction sequence; together with the
/// dimension this fully determines the stream.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSourceSpec {
    /// Independent uniform draws on the projective sphere.
    IidUniform { seed: u64 },
    /// Deterministic equidistributed sequence (golden-rotation angles in
    /// d=2, a Fibonacci-style spiral folded to one hemisphere in d=3).
    Equidistributed,
    /// Cycle through a fixed list of directions.
    Cyclic { directions: Vec<Direction> },
    /// Symmetric non-uniform law with density proportional to
    /// `|u . e_1|^exponent`, drawn by rejection; exponent 0 is uniform.
    AxisBiased { seed: u64, exponent: f64 },
}

enum Policy {
    IidUniform {
        rng: Rng,
    },
    Equidistributed {
        index: u64,
    },
    Cyclic {
        directions: Vec<Direction>,
        index: usize,
    },
    AxisBiased {
        rng: Rng,
        exponent: f64,
    },
}

/// Stateful producer of the direction sequence `u_1, u_2, ...`.
///
/// `next_direction` is a deterministic function of the policy description
/// and advances the state
/// by exactly one step per call. The source is single-owner mutable state;
/// share it across threads only behind external synchronization.
pub struct DirectionSource {
    dim: usize,
    policy: Policy,
}

impl DirectionSource {
    pub fn from_spec(dim: usize, spec: &DirectionSourceSpec) -> Result<Self> {
        assert!(dim == 2 || dim == 3);
        let policy = match spec {
            DirectionSourceSpec::IidUniform { seed } => Policy::IidUniform {
                rng: Rng::new(*seed),
            },
            DirectionSourceSpec::Equidistributed => Policy::Equidistributed { index: 0 },
            DirectionSourceSpec::Cyclic { directions } => {
                if directions.is_empty() {
                    return Err(Error::EmptyCycle);
                }
                for d in directions {
                    if d.dim() != dim {
                        return Err(Error::ConfigInvalid(format!(
                            "cyclic direction has dimension {}, expected {dim}",
                            d.dim()
                        )));
                    }
                }
                Policy::Cyclic {
                    directions: directions.clone(),
                    index: 0,
                }
            }
            DirectionSourceSpec::AxisBiased { seed, exponent } => {
                if *exponent < 0.0 || !exponent.is_finite() {
                    return Err(Error::ConfigInvalid(format!(
                        "axis-biased exponent must be finite and >= 0, got {exponent}"
                    )));
                }
                Policy::AxisBiased {
                    rng: Rng::new(*seed),
                    exponent: *exponent,
                }
            }
        };
        Ok(Self { dim, policy })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn next_direction(&mut self) -> Direction {
        match &mut self.policy {
            Policy::IidUniform { rng } => sample_uniform(self.dim, rng),
            Policy::Equidistributed { index } => {
                *index += 1;
                equidistributed_direction(self.dim, *index)
            }
            Policy::Cyclic { directions, index } => {
                let d = directions[*index % directions.len()].clone();
                *index += 1;
                d
            }
            Policy::AxisBiased { rng, exponent } => loop {
                let u = sample_uniform(self.dim, rng);
                let accept = u.components()[0].abs().powf(*exponent);
                if rng.uniform() < accept {
                    return u;
                }
            },
        }
    }
}

/// Fractional part of the golden ratio, the classic Kronecker rotation.
const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

/// Van der Corput radical inverse in base 2.
fn van_der_corput(mut n: u64) -> f64 {
    let mut inv = 0.0;
    let mut base = 0.5;
    while n > 0 {
        if n & 1 == 1 {
            inv += base;
        }
        base *= 0.5;
        n >>= 1;
    }
    inv
}

/// n-th point of the deterministic equidistributed sequence (n >= 1).
///
/// d=2: angle `theta_n = frac(n * phi) * pi` sweeps the half-circle with the
/// golden rotation, whose discrepancy is O(log n / n).
/// d=3: azimuth advances by the golden angle while the axial coordinate
/// follows the base-2 radical inverse, giving a spiral that equidistributes
/// on the sphere; canonicalization folds it onto the quotient.
fn equidistributed_direction(dim: usize, n: u64) -> Direction {
    match dim {
        2 => {
            let theta = (n as f64 * GOLDEN_FRAC).fract() * std::f64::consts::PI;
            Direction::canonicalize(&[theta.cos(), theta.sin()]).expect("unit vector")
        }
        3 => {
            let z = 1.0 - 2.0 * van_der_corput(n);
            let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let psi = n as f64 * golden_angle;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            Direction::canonicalize(&[rho * psi.cos(), rho * psi.sin(), z]).expect("unit vector")
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::stats::star_discrepancy_unit;
    use proptest::prelude::*;

    #[test]
    fn canonicalize_examples() {
        let d = Direction::canonicalize(&[-1.0, 0.0]).unwrap();
        assert_eq!(d.components(), &[1.0, 0.0]);
        let d = Direction::canonicalize(&[0.0, -2.0]).unwrap();
        assert_eq!(d.components(), &[0.0, 1.0]);
        let d = Direction::canonicalize(&[3.0, 4.0]).unwrap();
        assert!((d.components()[0] - 0.6).abs() < 1e-15);
        assert!((d.components()[1] - 0.8).abs() < 1e-15);
        assert!(matches!(
            Direction::canonicalize(&[0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn distance_examples() {
        let e1 = Direction::axis(2, 0);
        let e2 = Direction::axis(2, 1);
        assert_eq!(direction_distance(&e1, &e1), 0.0);
        assert!((direction_distance(&e1, &e2) - 2.0f64.sqrt()).abs() < 1e-15);
        // (-1, 0) canonicalizes into the class of (1, 0)
        let m = Direction::canonicalize(&[-1.0, 0.0]).unwrap();
        assert_eq!(direction_distance(&e1, &m), 0.0);
    }

    #[test]
    fn double_cap_values() {
        assert_eq!(double_cap_probability(2), 0.5);
        assert!((double_cap_probability(3) - 0.2928932188134524).abs() < 1e-15);
    }

    #[test]
    fn uniform_sampler_symmetry_and_double_cap() {
        for dim in [2usize, 3] {
            let mut rng = Rng::new(42);
            // The canonical sign rule fixes the sign of the leading
            // component, so test the mean against the last axis, whose
            // marginal stays symmetric on the quotient representatives.
            let w_mean = Direction::axis(dim, dim - 1);
            let w_cap = Direction::axis(dim, 0);
            let n = 100_000usize;
            let mut mean = 0.0;
            let mut cap = 0usize;
            for _ in 0..n {
                let u = sample_uniform(dim, &mut rng);
                mean += u.dot(w_mean.components());
                if u.dot(w_cap.components()).abs() >= std::f64::consts::FRAC_1_SQRT_2 {
                    cap += 1;
                }
            }
            mean /= n as f64;
            assert!(
                mean.abs() <= 3.0 / ((n * dim) as f64).sqrt(),
                "dim {dim}: mean {mean}"
            );
            let p = cap as f64 / n as f64;
            let expected = double_cap_probability(dim);
            let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!(
                (p - expected).abs() <= 3.0 * sigma,
                "dim {dim}: empirical {p} analytic {expected}"
            );
        }
    }

    #[test]
    fn cyclic_cycles_in_order() {
        let e1 = Direction::axis(2, 0);
        let e2 = Direction::axis(2, 1);
        let mut src = DirectionSource::from_spec(
            2,
            &DirectionSourceSpec::Cyclic {
                directions: vec![e1.clone(), e2.clone()],
            },
        )
        .unwrap();
        assert_eq!(src.next_direction(), e1);
        assert_eq!(src.next_direction(), e2);
        assert_eq!(src.next_direction(), e1);
        assert!(matches!(
            DirectionSource::from_spec(2, &DirectionSourceSpec::Cyclic { directions: vec![] }),
            Err(Error::EmptyCycle)
        ));
    }

    #[test]
    fn iid_uniform_is_reproducible() {
        let spec = DirectionSourceSpec::IidUniform { seed: 42 };
        let mut a = DirectionSource::from_spec(2, &spec).unwrap();
        let mut b = DirectionSource::from_spec(2, &spec).unwrap();
        let da = a.next_direction();
        let db = b.next_direction();
        assert_eq!(da.components()[0].to_bits(), db.components()[0].to_bits());
        assert_eq!(da.components()[1].to_bits(), db.components()[1].to_bits());
    }

    #[test]
    fn equidistributed_2d_low_discrepancy() {
        let mut src = DirectionSource::from_spec(2, &DirectionSourceSpec::Equidistributed).unwrap();
        let mut xs: Vec<f64> = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            let u = src.next_direction();
            // recover the half-circle angle in [0, pi) from the class rep
            let mut theta = u.components()[1].atan2(u.components()[0]);
            if theta < 0.0 {
                theta += std::f64::consts::PI;
            }
            xs.push(theta / std::f64::consts::PI);
        }
        let disc = star_discrepancy_unit(&mut xs);
        assert!(disc <= 0.01, "discrepancy {disc}");
    }

    #[test]
    fn equidistributed_3d_covers_hemisphere() {
        let mut src = DirectionSource::from_spec(3, &DirectionSourceSpec::Equidistributed).unwrap();
        let n = 20_000;
        let mut bins = [0usize; 16];
        for _ in 0..n {
            let u = src.next_direction();
            let c = u.components();
            // 4 slabs in |first nonzero-signed axis| x 4 azimuth sectors
            let slab = ((c[0].abs() * 4.0) as usize).min(3);
            let az = c[2].atan2(c[1]);
            let sector = (((az + std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * 4.0)
                as usize)
                .min(3);
            bins[slab * 4 + sector] += 1;
        }
        let expected = n as f64 / 16.0;
        for (k, &b) in bins.iter().enumerate() {
            assert!(
                (b as f64 - expected).abs() < 0.25 * expected,
                "bin {k}: {b} vs {expected}"
            );
        }
    }

    #[test]
    fn axis_biased_concentrates_and_k0_is_uniform() {
        // k = 8 concentrates mass near |u.e1| = 1
        let mut biased = DirectionSource::from_spec(
            2,
            &DirectionSourceSpec::AxisBiased {
                seed: 9,
                exponent: 8.0,
            },
        )
        .unwrap();
        let mut mean_abs = 0.0;
        for _ in 0..5_000 {
            mean_abs += biased.next_direction().components()[0].abs();
        }
        mean_abs /= 5_000.0;
        assert!(mean_abs > 0.85, "mean |u1| {mean_abs}");

        // k = 0 must look exactly uniform: same equal-area chi-square test
        // that gates the uniform sampler
        use crate::stats::{
            chi_square_uniform, hemisphere_bin, CHI2_CRIT_P999_DF63, HEMISPHERE_BINS,
        };
        let mut flat = DirectionSource::from_spec(
            2,
            &DirectionSourceSpec::AxisBiased {
                seed: 10,
                exponent: 0.0,
            },
        )
        .unwrap();
        let n = 100_000;
        let mut counts = vec![0usize; HEMISPHERE_BINS];
        for _ in 0..n {
            counts[hemisphere_bin(&flat.next_direction())] += 1;
        }
        let chi2 = chi_square_uniform(&counts, n);
        assert!(chi2 <= CHI2_CRIT_P999_DF63, "chi-square {chi2}");
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = Rng::new(2024);
        for _ in 0..1_000 {
            let (u, v, w) = (
                sample_uniform(3, &mut rng),
                sample_uniform(3, &mut rng),
                sample_uniform(3, &mut rng),
            );
            let duv = direction_distance(&u, &v);
            let dvu = direction_distance(&v, &u);
            assert_eq!(duv.to_bits(), dvu.to_bits());
            assert!(duv >= 0.0);
            let duw = direction_distance(&u, &w);
            let dwv = direction_distance(&w, &v);
            assert!(duv <= duw + dwv + 1e-12);
        }
    }

    proptest! {
        /// Canonicalization is idempotent and class-consistent.
        #[test]
        fn canonicalize_class_consistency(
            x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0
        ) {
            prop_assume!(x * x + y * y + z * z > 1e-6);
            let v = [x, y, z];
            let neg = [-x, -y, -z];
            let a = Direction::canonicalize(&v).unwrap();
            let b = Direction::canonicalize(&neg).unwrap();
            for (p, q) in a.components().iter().zip(b.components()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
            let again = Direction::canonicalize(a.components()).unwrap();
            for (p, q) in a.components().iter().zip(again.components()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
