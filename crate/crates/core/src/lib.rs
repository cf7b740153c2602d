//! Evaluation toolkit for multimodal trajectory prediction.
//!
//! Geometry and metric code is generic over the float type ([`Scalar`]);
//! the scenario pipeline, benchmark orchestration, fixtures and file I/O
//! work in `f64`. Aliases for both widths live at the crate root.

pub mod bench;
pub mod error;
pub mod geom;
pub mod io;
pub mod map;
pub mod metrics;
mod scalar;
pub mod scenario;
pub mod synth;
pub mod trajectory;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type Point64 = geom::Point2<f64>;
pub type Vec64 = geom::Vec2<f64>;
pub type Polyline64 = geom::Polyline<f64>;
pub type Polygon64 = geom::Polygon<f64>;
pub type Trajectory64 = trajectory::Trajectory<f64>;
pub type PredictionSet64 = trajectory::PredictionSet<f64>;
pub type LaneSegment64 = map::LaneSegment<f64>;
pub type RoadMap64 = map::RoadMap<f64>;
pub type ScenarioRecord64 = scenario::ScenarioRecord<f64>;

pub type Point32 = geom::Point2<f32>;
pub type Vec32 = geom::Vec2<f32>;
pub type Polyline32 = geom::Polyline<f32>;
pub type Polygon32 = geom::Polygon<f32>;
pub type Trajectory32 = trajectory::Trajectory<f32>;
pub type PredictionSet32 = trajectory::PredictionSet<f32>;
pub type LaneSegment32 = map::LaneSegment<f32>;
pub type RoadMap32 = map::RoadMap<f32>;
