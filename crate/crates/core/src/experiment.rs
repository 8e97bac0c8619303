//! Symmetrization runs: configuration, per-step diagnostics, CSV traces and
//! PGM snapshots.
//!
//! A run rasterizes an initial shape, applies the direction sequence one
//! step at a time, and records the diagnostics that the convergence theory
//! talks about: volume (and its drift), the Nikodym distance to the
//! equal-volume centered ball, the central moment of inertia and its excess
//! over the ball value, the barycenter norm, and the total-variation
//! perimeter estimate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::direction::{DirectionSource, DirectionSourceSpec};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, OccupancyField};
use crate::measures::{moment_unit_ball, nikodym_distance};
use crate::pgm::write_snapshot_pgm;
use crate::shape::{ball_field, rasterize, ShapeSpec};
use crate::symmetrize::steiner_symmetrize;

/// Configuration of one symmetrization run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub shape: ShapeSpec,
    pub steps: usize,
    pub source: DirectionSourceSpec,
    pub renormalize: bool,
    /// Write a PGM snapshot every this many steps (step 0 included).
    pub snapshot_every: Option<usize>,
    pub snapshot_dir: Option<PathBuf>,
    pub trace_path: Option<PathBuf>,
    /// Stop early once the Nikodym distance to the reference ball drops
    /// below `epsilon * initial volume`.
    pub stop_epsilon: Option<f64>,
}

impl RunConfig {
    pub fn new(
        grid: GridSpec,
        shape: ShapeSpec,
        steps: usize,
        source: DirectionSourceSpec,
    ) -> Self {
        Self {
            grid,
            shape,
            steps,
            source,
            renormalize: false,
            snapshot_every: None,
            snapshot_dir: None,
            trace_path: None,
            stop_epsilon: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(every) = self.snapshot_every {
            if every == 0 {
                return Err(Error::ConfigInvalid("snapshot-every must be >= 1".into()));
            }
            if self.snapshot_dir.is_none() {
                return Err(Error::ConfigInvalid(
                    "snapshot-every requires a snapshot directory".into(),
                ));
            }
        }
        if let Some(eps) = self.stop_epsilon {
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::ConfigInvalid("stop-epsilon must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Diagnostics of one step. Record 0 describes the initial rasterized set
/// (its direction entries are zero); record n describes the field after
/// applying the n-th direction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub direction: Vec<f64>,
    pub volume: f64,
    /// Relative volume change against step 0.
    pub volume_drift: f64,
    /// Nikodym distance to the rasterized ball `B(o, rho)` where `rho` is
    /// fixed once from the initial volume.
    pub nikodym_to_ball: f64,
    pub moment: f64,
    /// `moment - mu_d * rho^(d+2)`, the dilation-covariant excess over the
    /// equal-volume ball.
    pub moment_excess: f64,
    pub barycenter_norm: f64,
    pub perimeter_tv: f64,
    pub wall_time_ms: f64,
}

/// Result of a run: the per-step records and the final field.
pub struct RunOutcome {
    pub records: Vec<StepRecord>,
    pub final_field: OccupancyField,
}

/// Execute a run. Directions are consumed in source order (the composition
/// does not commute), one record is produced per step plus the initial one.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid;
    let dim = grid.dim();
    let mut source = DirectionSource::from_spec(dim, &config.source)?;

    let started = Instant::now();
    let mut field = rasterize(&config.shape, &grid)?;
    if field.is_effectively_empty() {
        return Err(Error::EmptySet);
    }
    let volume0 = field.volume();
    let rho = field.equivalent_ball_radius()?;
    let reference_ball = ball_field(rho, &grid)?;
    let moment_ref = moment_unit_ball(dim) * rho.powi(dim as i32 + 2);

    let measure = |step: usize,
                   direction: Vec<f64>,
                   field: &OccupancyField,
                   elapsed_ms: f64|
     -> Result<StepRecord> {
        let volume = field.volume();
        let b = field.barycenter()?;
        Ok(StepRecord {
            step,
            direction,
            volume,
            volume_drift: (volume - volume0) / volume0,
            nikodym_to_ball: nikodym_distance(field, &reference_ball)?,
            moment: field.moment_of_inertia(),
            moment_excess: field.moment_of_inertia() - moment_ref,
            barycenter_norm: b.iter().map(|x| x * x).sum::<f64>().sqrt(),
            perimeter_tv: field.perimeter_tv(),
            wall_time_ms: elapsed_ms,
        })
    };

    let snapshot = |step: usize, field: &OccupancyField| -> Result<()> {
        if let (Some(every), Some(dir)) = (config.snapshot_every, &config.snapshot_dir) {
            if step.is_multiple_of(every) {
                fs::create_dir_all(dir)?;
                write_snapshot_pgm(field, &dir.join(format!("step_{step:06}.pgm")))?;
            }
        }
        Ok(())
    };

    let mut records = Vec::with_capacity(config.steps + 1);
    records.push(measure(
        0,
        vec![0.0; dim],
        &field,
        started.elapsed().as_secs_f64() * 1e3,
    )?);
    snapshot(0, &field)?;

    for step in 1..=config.steps {
        let step_start = Instant::now();
        let u = source.next_direction();
        field = steiner_symmetrize(&field, &u, config.renormalize);
        let record = measure(
            step,
            u.components().to_vec(),
            &field,
            step_start.elapsed().as_secs_f64() * 1e3,
        )?;
        let reached = config
            .stop_epsilon
            .map(|eps| record.nikodym_to_ball <= eps * volume0)
            .unwrap_or(false);
        records.push(record);
        snapshot(step, &field)?;
        if reached {
            break;
        }
    }

    if let Some(path) = &config.trace_path {
        write_trace_csv(&records, path)?;
    }

    Ok(RunOutcome {
        records,
        final_field: field,
    })
}

/// Version tag on the first line of every trace file.
pub const TRACE_VERSION_LINE: &str = "#steiner-trace v1";

fn trace_header(dim: usize) -> String {
    let mut h = String::from("step");
    for a in 1..=dim {
        let _ = write!(h, ",u{a}");
    }
    h.push_str(",volume,volume_drift,nikodym_to_ball,moment,moment_excess,barycenter_norm,perimeter_tv,wall_time_ms");
    h
}

/// Write records as CSV. Floats are printed with Rust's shortest
/// round-trip formatting, so parsing the file recovers them exactly.
pub fn write_trace_csv(records: &[StepRecord], path: &Path) -> Result<()> {
    let dim = records.first().map(|r| r.direction.len()).unwrap_or(2);
    let mut out = String::new();
    out.push_str(TRACE_VERSION_LINE);
    out.push('\n');
    out.push_str(&trace_header(dim));
    out.push('\n');
    for r in records {
        let _ = write!(out, "{}", r.step);
        for c in &r.direction {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{}",
            r.volume,
            r.volume_drift,
            r.nikodym_to_ball,
            r.moment,
            r.moment_excess,
            r.barycenter_norm,
            r.perimeter_tv,
            r.wall_time_ms
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parse a trace CSV written by [`write_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<StepRecord>> {
    let text = fs::read_to_string(path)?;
    let bad = |msg: String| Error::ConfigInvalid(format!("trace {}: {msg}", path.display()));
    let mut lines = text.lines().filter(|l| !l.is_empty());

    let version = lines.next().ok_or_else(|| bad("empty file".into()))?;
    if version != TRACE_VERSION_LINE {
        return Err(bad(format!("unexpected version line '{version}'")));
    }
    let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
    let dim = header.split(',').filter(|c| c.starts_with('u')).count();
    if dim == 0 {
        return Err(bad("no direction columns in header".into()));
    }

    let mut records = Vec::new();
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + dim + 8 {
            return Err(bad(format!(
                "row has {} fields, expected {}",
                fields.len(),
                1 + dim + 8
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| bad(format!("bad float '{s}'")))
        };
        let step: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad step '{}'", fields[0])))?;
        let direction = fields[1..1 + dim]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>>>()?;
        let rest: Vec<f64> = fields[1 + dim..]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<f64>>>()?;
        records.push(StepRecord {
            step,
            direction,
            volume: rest[0],
            volume_drift: rest[1],
            nikodym_to_ball: rest[2],
            moment: rest[3],
            moment_excess: rest[4],
            barycenter_norm: rest[5],
            perimeter_tv: rest[6],
            wall_time_ms: rest[7],
        });
    }
    Ok(records)
}
