//! Command-line interface: `run`, `oracle-check`, and `sampler-check`.
//!
//! Exit codes: 0 on success, 1 on a failed check or runtime error,
//! 2 on usage errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::box_oracle::{Aabb, BoxUnion};
use crate::checks::{run_oracle_check, run_sampler_check};
use crate::direction::{Direction, DirectionSourceSpec};
use crate::error::Error;
use crate::experiment::{run, RunConfig};
use crate::grid::GridSpec;
use crate::measures::unit_ball_volume;
use crate::shape::{ShapeKind, ShapeSpec};

#[derive(Parser)]
#[command(
    name = "steiner",
    version,
    about = "Random Steiner symmetrization experiments on occupancy grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a symmetrization experiment and record a diagnostics trace
    Run(RunArgs),
    /// Check the raster symmetrizer against the exact box-union oracle
    OracleCheck,
    /// Validate the uniform direction sampler against analytic values
    SamplerCheck(SamplerArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Spatial dimension (2 or 3)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Cells per axis
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Domain half-width R (the domain is the cube [-R, R]^d)
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
    /// Initial shape: ball | box | box-union | l-shape | annulus | two-balls | mask
    #[arg(long, default_value = "ball")]
    shape: String,
    /// Shape parameters as `key=value` pairs separated by `;`
    /// (see the README for the per-shape keys); `norm=<v|kappa>` rescales
    /// the volume
    #[arg(long)]
    shape_args: Option<String>,
    /// Number of symmetrization steps
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Seed for the randomized direction policies
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Direction policy: uniform | equidistributed | cyclic:<u1;u2;...> |
    /// axis-biased:<k>
    #[arg(long, default_value = "uniform")]
    directions: String,
    /// Rescale each symmetral back to the input volume
    #[arg(long)]
    renormalize: bool,
    /// Write the diagnostics trace CSV here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a PGM snapshot every N steps
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Directory for snapshots
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// Stop once d_N to the reference ball drops below epsilon * volume
    #[arg(long)]
    stop_epsilon: Option<f64>,
}

#[derive(Args)]
struct SamplerArgs {
    /// Number of direction samples
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Spatial dimension (2 or 3)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Sampler seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    match cli.command {
        Command::Run(args) => run_command(&args),
        Command::OracleCheck => oracle_check_command(),
        Command::SamplerCheck(args) => sampler_check_command(&args),
    }
}

fn run_command(args: &RunArgs) -> i32 {
    let config = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&config) {
        Ok(outcome) => {
            let first = &outcome.records[0];
            let last = outcome.records.last().unwrap();
            println!(
                "initial: volume {:.6}  d_N(ball) {:.6}  moment excess {:.6}",
                first.volume, first.nikodym_to_ball, first.moment_excess
            );
            println!(
                "final (step {}): volume {:.6}  d_N(ball) {:.6}  moment excess {:.6}  |barycenter| {:.6}",
                last.step, last.volume, last.nikodym_to_ball, last.moment_excess, last.barycenter_norm
            );
            if let Some(path) = &config.trace_path {
                println!("trace written to {}", path.display());
            }
            0
        }
        Err(e @ Error::ConfigInvalid(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn oracle_check_command() -> i32 {
    let report = match run_oracle_check() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    println!("raster vs exact axis symmetrals on random box unions (N=128 -> N=256):");
    for c in &report.cases {
        println!(
            "  case {:2} axis {}: d_N/volume {:.5}  coarse/fine error ratio {:.2}",
            c.case, c.axis, c.deviation_ratio, c.shrink
        );
    }
    println!(
        "max d_N/volume {:.5} (bound 0.05), mean error shrink {:.2} (bound 1.7)",
        report.max_deviation_ratio, report.mean_shrink
    );
    println!(
        "exact 1-Lipschitz violations: {}, raster excess over slack: {:.6}",
        report.exact_lipschitz_violations, report.raster_lipschitz_excess
    );
    println!(
        "exact moment increases under symmetrization: {}",
        report.moment_descent_violations
    );
    if report.passed() {
        println!("oracle-check: PASS");
        0
    } else {
        println!("oracle-check: FAIL");
        1
    }
}

fn sampler_check_command(args: &SamplerArgs) -> i32 {
    if args.dim != 2 && args.dim != 3 {
        eprintln!("error: --dim must be 2 or 3");
        return 2;
    }
    if args.samples == 0 {
        eprintln!("error: --samples must be positive");
        return 2;
    }
    let report = run_sampler_check(args.dim, args.samples, args.seed);
    println!(
        "double cap (|u.w| >= 1/sqrt(2), d={}): empirical {:.5}  analytic {:.5}  (3 sigma = {:.5})",
        report.dim,
        report.empirical_double_cap,
        report.analytic_double_cap,
        3.0 * report.sigma
    );
    println!(
        "hemisphere chi-square: {:.2} over {} equal-area bins (critical {:.2} at significance 0.001)",
        report.chi_square,
        crate::stats::HEMISPHERE_BINS,
        report.chi_square_critical
    );
    if report.passed() {
        println!("sampler-check: PASS");
        0
    } else {
        println!("sampler-check: FAIL");
        1
    }
}

fn build_config(args: &RunArgs) -> crate::error::Result<RunConfig> {
    let grid = GridSpec::new(args.dim, args.resolution, args.extent)?;
    let shape = parse_shape(&args.shape, args.shape_args.as_deref(), args.dim)?;
    let source = parse_directions(&args.directions, args.seed, args.dim)?;
    let mut config = RunConfig::new(grid, shape, args.steps, source);
    config.renormalize = args.renormalize;
    config.trace_path = args.trace.clone();
    config.snapshot_every = args.snapshot_every;
    config.snapshot_dir = args.snapshot_dir.clone();
    config.stop_epsilon = args.stop_epsilon;
    Ok(config)
}

fn parse_directions(
    text: &str,
    seed: u64,
    dim: usize,
) -> crate::error::Result<DirectionSourceSpec> {
    let invalid = |msg: String| Error::ConfigInvalid(msg);
    if text == "uniform" {
        return Ok(DirectionSourceSpec::IidUniform { seed });
    }
    if text == "equidistributed" {
        return Ok(DirectionSourceSpec::Equidistributed);
    }
    if let Some(list) = text.strip_prefix("cyclic:") {
        let mut directions = Vec::new();
        for part in list.split(';').filter(|p| !p.is_empty()) {
            let comps = parse_vector(part, dim)?;
            directions.push(Direction::canonicalize(&comps)?);
        }
        return crate::direction::DirectionSource::from_spec(
            dim,
            &DirectionSourceSpec::Cyclic {
                directions: directions.clone(),
            },
        )
        .map(|_| DirectionSourceSpec::Cyclic { directions });
    }
    if let Some(k) = text.strip_prefix("axis-biased:") {
        let exponent: f64 = k
            .parse()
            .map_err(|_| invalid(format!("bad axis-biased exponent '{k}'")))?;
        return Ok(DirectionSourceSpec::AxisBiased { seed, exponent });
    }
    Err(invalid(format!(
        "unknown direction policy '{text}' (expected uniform, equidistributed, cyclic:<u1;u2;...> or axis-biased:<k>)"
    )))
}

fn parse_vector(text: &str, dim: usize) -> crate::error::Result<Vec<f64>> {
    let comps: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::ConfigInvalid(format!("bad vector '{text}'")))?;
    if comps.len() != dim {
        return Err(Error::ConfigInvalid(format!(
            "vector '{text}' has {} components, expected {dim}",
            comps.len()
        )));
    }
    Ok(comps)
}

/// Built-in default shapes for the experiments. The non-ball shapes
/// normalize to the unit-ball volume `kappa_d` so traces are directly
/// comparable with the ball quantities.
pub fn builtin_shape(name: &str, dim: usize) -> crate::error::Result<ShapeSpec> {
    let kappa = unit_ball_volume(dim);
    Ok(match name {
        "ball" => ShapeSpec::plain(ShapeKind::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }),
        "box" => ShapeSpec::plain(ShapeKind::Cuboid {
            lo: vec![-0.5; dim],
            hi: vec![0.5; dim],
        }),
        "l-shape" => ShapeSpec::normalized(ShapeKind::LShape { scale: 1.0 }, kappa),
        "annulus" => ShapeSpec::normalized(ShapeKind::Annulus { inner: 0.5, outer: 1.0 }, kappa),
        "two-balls" => {
            // deliberately lopsided so the initial barycenter is off-center
            let (c1, c2) = match dim {
                2 => (vec![0.8, 0.5], vec![-0.55, -0.35]),
                _ => (vec![0.8, 0.5, 0.0], vec![-0.55, -0.35, 0.0]),
            };
            ShapeSpec::normalized(
                ShapeKind::TwoBalls {
                    centers: [c1, c2],
                    radii: [0.35, 0.75],
                },
                kappa,
            )
        }
        "box-union" => {
            let boxes = match dim {
                2 => vec![
                    Aabb::new(vec![-1.1, -0.3], vec![-0.1, 0.5])?,
                    Aabb::new(vec![-0.1, -0.1], vec![0.7, 0.3])?,
                    Aabb::new(vec![0.2, 0.3], vec![0.9, 1.0])?,
                ],
                _ => vec![
                    Aabb::new(vec![-1.2, -0.5, -0.6], vec![-0.1, 0.6, 0.5])?,
                    Aabb::new(vec![-0.1, -0.3, -0.5], vec![0.8, 0.4, 0.4])?,
                    Aabb::new(vec![0.1, 0.4, -0.4], vec![0.95, 1.05, 0.55])?,
                ],
            };
            ShapeSpec::normalized(
                ShapeKind::BoxUnion {
                    union: BoxUnion::new(boxes)?,
                },
                kappa,
            )
        }
        "mask" => {
            return Err(Error::ConfigInvalid(
                "shape 'mask' needs --shape-args path=<file.pgm>".into(),
            ))
        }
        other => {
            return Err(Error::ConfigInvalid(format!(
                "unknown shape '{other}' (expected ball, box, box-union, l-shape, annulus, two-balls or mask)"
            )))
        }
    })
}

fn parse_shape(
    name: &str,
    shape_args: Option<&str>,
    dim: usize,
) -> crate::error::Result<ShapeSpec> {
    let mut spec = builtin_shape(name, dim).or_else(|e| {
        // mask has no default but is valid with args
        if name == "mask" && shape_args.is_some() {
            Ok(ShapeSpec::plain(ShapeKind::MaskFile {
                path: PathBuf::new(),
            }))
        } else {
            Err(e)
        }
    })?;

    let Some(text) = shape_args else {
        return Ok(spec);
    };

    let invalid = |msg: String| Error::ConfigInvalid(msg);
    let kappa = unit_ball_volume(dim);

    let allowed: &[&str] = match name {
        "ball" | "two-balls" => &["center", "radius", "norm"],
        "box" => &["lo", "hi", "norm"],
        "box-union" => &["box", "norm"],
        "l-shape" => &["scale", "norm"],
        "annulus" => &["inner", "outer", "norm"],
        "mask" => &["path", "norm"],
        _ => unreachable!("shape name validated above"),
    };

    // collect key=value pairs; repeated keys accumulate in order
    let mut pairs: Vec<(String, String)> = Vec::new();
    for item in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| invalid(format!("shape argument '{item}' is not key=value")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(invalid(format!(
                "shape '{name}' does not take argument '{k}'"
            )));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }

    let mut norm: Option<f64> = spec.normalize_volume_to;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    let mut boxes: Vec<Aabb> = Vec::new();
    let mut lo: Option<Vec<f64>> = None;
    let mut hi: Option<Vec<f64>> = None;

    for (key, value) in &pairs {
        match key.as_str() {
            "norm" => {
                norm = match value.as_str() {
                    "none" => None,
                    "kappa" => Some(kappa),
                    v => Some(
                        v.parse()
                            .map_err(|_| invalid(format!("bad norm target '{value}'")))?,
                    ),
                };
            }
            "center" => centers.push(parse_vector(value, dim)?),
            "radius" => radii.push(
                value
                    .parse()
                    .map_err(|_| invalid(format!("bad radius '{value}'")))?,
            ),
            "lo" => lo = Some(parse_vector(value, dim)?),
            "hi" => hi = Some(parse_vector(value, dim)?),
            "box" => {
                let (l, h) = value
                    .split_once(':')
                    .ok_or_else(|| invalid(format!("box '{value}' is not lo:hi")))?;
                boxes.push(Aabb::new(parse_vector(l, dim)?, parse_vector(h, dim)?)?);
            }
            "scale" => {
                let s: f64 = value
                    .parse()
                    .map_err(|_| invalid(format!("bad scale '{value}'")))?;
                spec.kind = ShapeKind::LShape { scale: s };
            }
            "inner" | "outer" => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| invalid(format!("bad {key} '{value}'")))?;
                if let ShapeKind::Annulus { inner, outer } = &mut spec.kind {
                    if key == "inner" {
                        *inner = v;
                    } else {
                        *outer = v;
                    }
                } else {
                    return Err(invalid(format!(
                        "'{key}' only applies to the annulus shape"
                    )));
                }
            }
            "path" => {
                spec.kind = ShapeKind::MaskFile {
                    path: PathBuf::from(value),
                };
            }
            other => return Err(invalid(format!("unknown shape argument '{other}'"))),
        }
    }

    // apply collected geometry
    match name {
        "ball" => {
            if centers.len() > 1 || radii.len() > 1 {
                return Err(invalid("ball takes one center and one radius".into()));
            }
            if let ShapeKind::Ball { center, radius } = &mut spec.kind {
                if let Some(c) = centers.pop() {
                    *center = c;
                }
                if let Some(r) = radii.pop() {
                    *radius = r;
                }
            }
        }
        "box" => {
            if let ShapeKind::Cuboid { lo: l, hi: h } = &mut spec.kind {
                if let Some(v) = lo {
                    *l = v;
                }
                if let Some(v) = hi {
                    *h = v;
                }
            }
        }
        "two-balls" => {
            if !(centers.is_empty() && radii.is_empty()) {
                if centers.len() != 2 || radii.len() != 2 {
                    return Err(invalid(
                        "two-balls needs exactly two center= and two radius= arguments".into(),
                    ));
                }
                spec.kind = ShapeKind::TwoBalls {
                    centers: [centers[0].clone(), centers[1].clone()],
                    radii: [radii[0], radii[1]],
                };
            }
        }
        "box-union" => {
            if !boxes.is_empty() {
                spec.kind = ShapeKind::BoxUnion {
                    union: BoxUnion::new(boxes)?,
                };
            }
        }
        "mask" if !matches!(&spec.kind, ShapeKind::MaskFile { path } if !path.as_os_str().is_empty()) =>
        {
            return Err(invalid("mask needs path=<file.pgm>".into()));
        }
        _ => {}
    }

    spec.normalize_volume_to = norm;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_direction_policies() {
        assert!(matches!(
            parse_directions("uniform", 7, 2).unwrap(),
            DirectionSourceSpec::IidUniform { seed: 7 }
        ));
        assert!(matches!(
            parse_directions("equidistributed", 0, 2).unwrap(),
            DirectionSourceSpec::Equidistributed
        ));
        match parse_directions("cyclic:1,0;0,1", 0, 2).unwrap() {
            DirectionSourceSpec::Cyclic { directions } => assert_eq!(directions.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_directions("axis-biased:2.5", 3, 2).unwrap() {
            DirectionSourceSpec::AxisBiased { seed: 3, exponent } => assert_eq!(exponent, 2.5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_directions("spiral", 0, 2).is_err());
        assert!(parse_directions("cyclic:", 0, 2).is_err());
        assert!(parse_directions("cyclic:1,0,0", 0, 2).is_err());
    }

    #[test]
    fn parse_shape_defaults_and_overrides() {
        let s = parse_shape("ball", None, 2).unwrap();
        assert!(s.normalize_volume_to.is_none());
        assert!(matches!(s.kind, ShapeKind::Ball { .. }));

        let s = parse_shape("l-shape", None, 2).unwrap();
        assert_eq!(s.normalize_volume_to, Some(std::f64::consts::PI));

        let s = parse_shape("ball", Some("center=0.5,0;radius=0.75"), 2).unwrap();
        match s.kind {
            ShapeKind::Ball { center, radius } => {
                assert_eq!(center, vec![0.5, 0.0]);
                assert_eq!(radius, 0.75);
            }
            other => panic!("unexpected {other:?}"),
        }

        let s = parse_shape("annulus", Some("inner=0.3;outer=0.9;norm=kappa"), 2).unwrap();
        assert!(
            matches!(s.kind, ShapeKind::Annulus { inner, outer } if inner == 0.3 && outer == 0.9)
        );
        assert_eq!(s.normalize_volume_to, Some(std::f64::consts::PI));

        let s = parse_shape("box-union", Some("box=-1,-1:0,0;box=0,0:0.5,1;norm=1.5"), 2).unwrap();
        assert!(matches!(s.kind, ShapeKind::BoxUnion { .. }));
        assert_eq!(s.normalize_volume_to, Some(1.5));

        let s = parse_shape("l-shape", Some("norm=none"), 2).unwrap();
        assert_eq!(s.normalize_volume_to, None);

        assert!(parse_shape("pentagon", None, 2).is_err());
        assert!(parse_shape("mask", None, 2).is_err());
        assert!(parse_shape("ball", Some("radius"), 2).is_err());
        assert!(parse_shape("ball", Some("frobnicate=1"), 2).is_err());
        assert!(parse_shape("annulus", Some("lo=1,1"), 2).is_err());
        assert!(parse_shape("box", Some("scale=2"), 2).is_err());
    }

    #[test]
    fn default_shapes_rasterize_everywhere() {
        for dim in [2usize, 3] {
            let grid = GridSpec::new(dim, 32, 2.0).unwrap();
            for name in [
                "ball",
                "box",
                "l-shape",
                "annulus",
                "two-balls",
                "box-union",
            ] {
                if dim == 3 && name == "l-shape" {
                    continue;
                }
                let spec = parse_shape(name, None, dim).unwrap();
                let f = crate::shape::rasterize(&spec, &grid)
                    .unwrap_or_else(|e| panic!("{name} d={dim}: {e}"));
                assert!(f.volume() > 0.0);
            }
        }
    }

    #[test]
    fn usage_errors_exit_with_code_2() {
        let code = cli_main(["steiner", "run", "--shape", "pentagon"]);
        assert_eq!(code, 2);
        let code = cli_main(["steiner", "frobnicate"]);
        assert_eq!(code, 2);
    }
}
