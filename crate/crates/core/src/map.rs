//! Lane-level road map and the queries the admissibility tests and scenario
//! tagging rely on.
//!
//! The drivable area is its own list of polygons (union semantics) and is
//! deliberately independent of lane membership.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{nearest_on_polyline, point_in_polygon, Aabb, GridIndex, Point2, Polygon, Polyline};
use crate::scalar::Scalar;

/// Centerline vertices may stray this far outside their lane polygon.
pub const CENTERLINE_TOLERANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TurnDirection {
    #[default]
    None,
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct LaneSegment<S> {
    pub id: String,
    pub centerline: Polyline<S>,
    pub polygon: Polygon<S>,
    pub turn: TurnDirection,
    pub is_intersection: bool,
    pub successors: Vec<String>,
    pub left_neighbor: Option<String>,
    pub right_neighbor: Option<String>,
}

impl<S: Scalar> LaneSegment<S> {
    /// An intersection lane tagged with a left or right turn.
    pub fn is_turn_lane(&self) -> bool {
        self.is_intersection && matches!(self.turn, TurnDirection::Left | TurnDirection::Right)
    }

    /// Driving direction of the lane at the centerline point nearest `p`.
    pub fn heading_at(&self, p: Point2<S>) -> Result<S> {
        nearest_on_polyline(p, &self.centerline)
            .map(|n| n.tangent_heading)
            .map_err(|_| Error::InvalidMap(format!("lane `{}` has a degenerate centerline", self.id)))
    }
}

/// Immutable road map with grid indexes over lane and drivable polygons.
#[derive(Clone, Debug)]
pub struct RoadMap<S> {
    map_id: String,
    lanes: Vec<LaneSegment<S>>,
    lane_index: GridIndex<S, Polygon<S>>,
    drivable: GridIndex<S, Polygon<S>>,
    by_id: HashMap<String, usize>,
    warnings: Vec<String>,
}

impl<S: Scalar> RoadMap<S> {
    /// Builds and validates a map.
    ///
    /// Lane ids must be unique, successor and neighbor ids must resolve and
    /// every centerline vertex must lie within [`CENTERLINE_TOLERANCE`] of its
    /// lane polygon. Lane polygons poking out of the drivable area only
    /// produce warnings.
    pub fn new(map_id: impl Into<String>, lanes: Vec<LaneSegment<S>>, drivable: Vec<Polygon<S>>) -> Result<Self> {
        let map_id = map_id.into();
        let mut by_id = HashMap::with_capacity(lanes.len());
        for (i, lane) in lanes.iter().enumerate() {
            if by_id.insert(lane.id.clone(), i).is_some() {
                return Err(Error::InvalidMap(format!("duplicate lane id `{}`", lane.id)));
            }
        }
        let tol = S::of(CENTERLINE_TOLERANCE);
        for lane in &lanes {
            let refs = lane
                .successors
                .iter()
                .chain(lane.left_neighbor.iter())
                .chain(lane.right_neighbor.iter());
            for r in refs {
                if !by_id.contains_key(r) {
                    return Err(Error::InvalidMap(format!(
                        "lane `{}` references unknown lane `{r}`",
                        lane.id
                    )));
                }
            }
            if lane.centerline.segments().all(|(a, b)| a.distance(b) == S::zero()) {
                return Err(Error::InvalidMap(format!("lane `{}` has a degenerate centerline", lane.id)));
            }
            if let Some(p) = lane
                .centerline
                .points()
                .iter()
                .find(|&&p| lane.polygon.distance_to(p) > tol)
            {
                return Err(Error::InvalidMap(format!(
                    "lane `{}` centerline vertex ({}, {}) lies outside its polygon",
                    lane.id, p.x, p.y
                )));
            }
        }

        let lane_index = GridIndex::with_default_cell(lanes.iter().map(|l| l.polygon.clone()).collect());
        let drivable = GridIndex::with_default_cell(drivable);
        let mut map = Self {
            map_id,
            lanes,
            lane_index,
            drivable,
            by_id,
            warnings: Vec::new(),
        };
        let warnings: Vec<String> = map
            .lanes
            .iter()
            .filter(|l| !l.polygon.ring().iter().all(|&p| map.drivable_contains(p)))
            .map(|l| format!("lane `{}` polygon extends beyond the drivable area", l.id))
            .collect();
        for w in &warnings {
            log::warn!("map `{}`: {w}", map.map_id);
        }
        map.warnings = warnings;
        Ok(map)
    }

    pub fn map_id(&self) -> &str {
        &self.map_id
    }

    pub fn lanes(&self) -> &[LaneSegment<S>] {
        &self.lanes
    }

    pub fn lane(&self, id: &str) -> Option<&LaneSegment<S>> {
        self.by_id.get(id).map(|&i| &self.lanes[i])
    }

    pub fn drivable_polygons(&self) -> &[Polygon<S>] {
        self.drivable.items()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn bounds(&self) -> Option<Aabb<S>> {
        match (self.lane_index.bounds(), self.drivable.bounds()) {
            (Some(a), Some(b)) => Some(a.union(b)),
            (a, b) => a.or(b),
        }
    }

    /// Lanes whose polygon contains `p` (boundary inclusive), in map order.
    pub fn lanes_containing(&self, p: Point2<S>) -> Vec<&LaneSegment<S>> {
        self.lane_index
            .candidates(Aabb::new(p, p))
            .into_iter()
            .filter(|&i| point_in_polygon(p, &self.lanes[i].polygon))
            .map(|i| &self.lanes[i])
            .collect()
    }

    /// Lanes whose polygon comes within `r` of `p`, in map order.
    pub fn lanes_within_radius(&self, p: Point2<S>, r: S) -> Vec<&LaneSegment<S>> {
        self.lane_index
            .query_radius(p, r)
            .into_iter()
            .map(|i| &self.lanes[i])
            .collect()
    }

    pub fn drivable_contains(&self, p: Point2<S>) -> bool {
        self.drivable
            .candidates(Aabb::new(p, p))
            .into_iter()
            .any(|i| point_in_polygon(p, &self.drivable.items()[i]))
    }

    pub fn to_document(&self) -> MapDocument {
        let pts = |ps: &[Point2<S>]| ps.iter().map(|p| p.cast::<f64>()).collect::<Vec<_>>();
        MapDocument {
            map_id: self.map_id.clone(),
            lanes: self
                .lanes
                .iter()
                .map(|l| LaneDocument {
                    id: l.id.clone(),
                    centerline: pts(l.centerline.points()),
                    polygon: pts(l.polygon.ring()),
                    turn: l.turn,
                    is_intersection: l.is_intersection,
                    successors: l.successors.clone(),
                    left_neighbor: l.left_neighbor.clone(),
                    right_neighbor: l.right_neighbor.clone(),
                })
                .collect(),
            drivable_area: self.drivable.items().iter().map(|p| pts(p.ring())).collect(),
        }
    }

    /// Validates a parsed map document; geometry errors carry the JSON path
    /// of the offending field.
    pub fn from_document(doc: &MapDocument) -> Result<Self> {
        let pts = |ps: &[Point2<f64>]| ps.iter().map(|p| p.cast::<S>()).collect::<Vec<_>>();
        let mut lanes = Vec::with_capacity(doc.lanes.len());
        for (i, l) in doc.lanes.iter().enumerate() {
            let centerline =
                Polyline::new(pts(&l.centerline)).map_err(|e| e.at(format!("lanes[{i}].centerline")))?;
            let polygon = Polygon::new(pts(&l.polygon)).map_err(|e| e.at(format!("lanes[{i}].polygon")))?;
            lanes.push(LaneSegment {
                id: l.id.clone(),
                centerline,
                polygon,
                turn: l.turn,
                is_intersection: l.is_intersection,
                successors: l.successors.clone(),
                left_neighbor: l.left_neighbor.clone(),
                right_neighbor: l.right_neighbor.clone(),
            });
        }
        let drivable = doc
            .drivable_area
            .iter()
            .enumerate()
            .map(|(i, ring)| Polygon::new(pts(ring)).map_err(|e| e.at(format!("drivable_area[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.map_id.clone(), lanes, drivable).map_err(|e| e.at("lanes"))
    }
}

/// On-disk map layout. Unknown fields are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub map_id: String,
    pub lanes: Vec<LaneDocument>,
    pub drivable_area: Vec<Vec<Point2<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaneDocument {
    pub id: String,
    pub centerline: Vec<Point2<f64>>,
    pub polygon: Vec<Point2<f64>>,
    pub turn: TurnDirection,
    pub is_intersection: bool,
    pub successors: Vec<String>,
    pub left_neighbor: Option<String>,
    pub right_neighbor: Option<String>,
}
