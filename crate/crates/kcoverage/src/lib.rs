//! Deterministic simulator and planar-geometry library for k-order coverage
//! control with self-triggered communication.
//!
//! A network of n agents deploys over a convex polygon so that every point is
//! covered by the k nearest agents. Agents keep local records of where the
//! others were last seen, together with a radius bounding how far each may
//! have moved since. From those records an agent builds guaranteed and
//! dual-guaranteed dominant cells, moves toward the guaranteed centroid under
//! a safety constraint, and requests fresh positions only when its
//! accumulated uncertainty would otherwise let it move unproductively.
//!
//! Module layout:
//! - [`geometry`]: convex polygons, halfspace clipping, density integration,
//!   minimum enclosing circles, grid regions, and the to-ball-boundary map.
//! - [`partition`]: k-order Voronoi cells, dominant cells, guaranteed /
//!   dual-guaranteed cells under uncertainty, and the `bnd` safety bound.
//! - [`agent`]: per-agent data storage and the motion / update-decision /
//!   sleep-scheduling / neighbor-discovery procedures.
//! - [`simulator`]: the discrete-time engine with message and power
//!   accounting in benchmark, event-triggered and self-triggered modes.

pub mod agent;
pub mod error;
pub mod geometry;
pub mod partition;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::{ClosedBall, ConvexPolygon, DensityField, GridRegion, Halfspace, Point};
pub use partition::{CellIndex, DominantCell, KOrderDiagram, UncertainSite};
pub use simulator::{Mode, SimConfig, StepMetrics, TrajectoryLog};
