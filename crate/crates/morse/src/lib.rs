//! Critical points, gradient flow lines and flow categories of functions on
//! closed surfaces.

mod category;
mod continuation;
mod critical;
mod dump;
mod flow;
mod surface;

pub use category::{
    build_category, build_constant_flow_category, build_morse_flow_category, build_morsebott_s2_example,
    morsebott_s2, MorseBottExample, MorseCategory,
};
pub use continuation::{sphere_continuation, Continuation};
pub use critical::{critical_point, find_critical_points, CriticalPoint};
pub use dump::write_trajectories_csv;
pub use flow::{count_connecting_orbits, shoot_from, FlowLine, OrbitCount, Trace, Tracer};
pub use surface::{sphere_atlas, torus_atlas, SurfaceChart, SurfaceModel, Topology, Vec2, Vec3};

use flowcat_core::FlowError;
use thiserror::Error;

/// Numerical settings of the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub h_min: f64,
    pub h_max: f64,
    /// Local error accepted per RK4 step, measured in the ambient space.
    pub step_tol: f64,
    pub arrival_radius: f64,
    pub seed_radius: f64,
    pub max_steps: usize,
    pub newton_grid: usize,
    pub newton_iterations: usize,
    pub gradient_tol: f64,
    pub degeneracy_tol: f64,
    pub dedupe_tol: f64,
    /// Largest distance of an unsnapped quadrature value from ±1.
    pub quadrature_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            h_min: 1e-4,
            h_max: 1e-2,
            step_tol: 1e-9,
            arrival_radius: 1e-3,
            seed_radius: 1e-2,
            max_steps: 200_000,
            newton_grid: 12,
            newton_iterations: 60,
            gradient_tol: 1e-10,
            degeneracy_tol: 1e-6,
            dedupe_tol: 1e-6,
            quadrature_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorseError {
    #[error("degenerate critical point at {point:?} (|eigenvalue| {eigenvalue:e}, {count} such points)")]
    DegenerateCritical { point: Vec3, eigenvalue: f64, count: usize },
    #[error("flow from {from:?} to {to:?} is not transverse; re-tilt the function")]
    NonTransverse { from: Vec3, to: Vec3 },
    #[error("f failed to increase at {at:?}: {before} then {after}")]
    NotMonotone { at: Vec3, before: f64, after: f64 },
    #[error("flow from {from:?} did not arrive within {steps} steps")]
    Runaway { from: Vec3, steps: usize },
    #[error("flow line from {from:?} breaks the energy bound")]
    EnergyBound { from: Vec3 },
    #[error("critical points with equal value and different index near {0:?}")]
    MixedLevel(Vec3),
    #[error("{0}")]
    Unsupported(String),
    #[error("quadrature entry {key} = {value} is not within the quadrature tolerance of ±1")]
    BadQuadrature { key: String, value: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("trajectory dump failed: {0}")]
    Dump(String),
}
