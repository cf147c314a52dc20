//! Deterministic 2D swarm simulator: agents discover circular cargos, gather
//! around them through a detection-triggered density and Voronoi coverage
//! control, and carry them to the workspace boundary under a barrier-function
//! safety filter.

pub mod coordination;
pub mod density;
pub mod geometry;
pub mod qp;
pub mod safety;
pub mod world;

pub use density::{DensityField, GaussianComponent, PeakAnchor, ScalingLaw};
pub use geometry::{ConvexPolygon, GeometryError, HalfPlane, Point2, Quadrature, Rect, Vec2, VoronoiCell};
pub use qp::{QpError, QpOptions, QpSolution};
pub use safety::{SafetyConstraint, SafetyParams};
pub use world::{
    run, run_config, validate_setup, AgentState, Cargo, CargoPhase, CargoSpec, RunFailure, RunLog, StepRecord,
    ValidationError, World, WorldConfig, WorldError,
};
