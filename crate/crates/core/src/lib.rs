//! Random Steiner symmetrization of bounded measurable sets.
//!
//! Sets are modeled as fractional occupancy fields on a fixed grid over
//! `[-R, R]^d` (d = 2 or 3). The crate provides:
//!
//! - the Steiner symmetrization operator for arbitrary unit directions
//!   ([`symmetrize`]), built on fiber-mass line integrals and a gather-style
//!   reconstruction;
//! - scalar measures ([`measures`]): volume, barycenter, central moment of
//!   inertia, Nikodym (symmetric-difference) distance, a total-variation
//!   perimeter estimate;
//! - direction models on the projective sphere ([`direction`]): i.i.d.
//!   uniform, deterministic equidistributed, cyclic, and axis-biased
//!   symmetric laws, all bit-reproducible from a seed;
//! - an exact oracle on finite unions of axis-aligned boxes
//!   ([`box_oracle`]) used as ground truth for the raster operators;
//! - an experiment harness ([`experiment`]) that records per-step
//!   diagnostics to versioned CSV traces and PGM snapshots, plus the
//!   command-line interface ([`cli`]).
//!
//! Iterating the operator with uniformly random directions drives any
//! initial set toward the centered ball of equal volume in the Nikodym
//! metric; the experiment harness exists to observe exactly that descent.

pub mod box_oracle;
pub mod checks;
pub mod cli;
pub mod direction;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod measures;
pub mod pgm;
pub mod rng;
pub mod shape;
pub mod stats;
pub mod symmetrize;

pub use box_oracle::{exact_nikodym, Aabb, BoxUnion};
pub use direction::{
    direction_distance, double_cap_probability, sample_uniform, Direction, DirectionSource,
    DirectionSourceSpec,
};
pub use error::{Error, Result};
pub use experiment::{read_trace_csv, run, write_trace_csv, RunConfig, RunOutcome, StepRecord};
pub use grid::{GridSpec, OccupancyField};
pub use measures::{moment_unit_ball, nikodym_distance, unit_ball_volume};
pub use pgm::{read_mask_pgm, write_snapshot_pgm, MaskImage};
pub use rng::Rng;
pub use shape::{ball_field, rasterize, ShapeKind, ShapeSpec};
pub use symmetrize::{
    fiber_mass, orthobasis, reflect_along, steiner_symmetrize, symmetrize_sequence, FiberMassCache,
};
