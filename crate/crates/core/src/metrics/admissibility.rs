use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AlignmentConfig, DaoConfig, StationaryPolicy};
use crate::error::Result;
use crate::geom::{angle_between, rasterize_occupancy, Aabb, Cell, Point2, Vec2, HEADING_EPS};
use crate::map::RoadMap;
use crate::scalar::{mean, Scalar};
use crate::trajectory::{kinematic_window_check, KinematicConfig, PredictionSet, Trajectory};

/// Road boundary compliance: every point lies in the drivable area.
pub fn test_boundary<S: Scalar>(mode: &Trajectory<S>, map: &RoadMap<S>) -> bool {
    mode.points().iter().all(|&p| map.drivable_contains(p))
}

/// Fraction of modes that stay entirely inside the drivable area.
pub fn dac<S: Scalar>(pred: &PredictionSet<S>, map: &RoadMap<S>) -> S {
    mean(pred.modes().iter().map(|m| if test_boundary(m, map) { S::one() } else { S::zero() }))
        .unwrap_or_else(S::zero)
}

fn roi_dims<S: Scalar>(cfg: &DaoConfig<S>) -> i64 {
    (cfg.roi_side / cfg.cell).ceil().to_i64().unwrap_or(0)
}

/// Cells of the region of interest whose centers are drivable.
pub fn drivable_cells<S: Scalar>(map: &RoadMap<S>, cfg: &DaoConfig<S>, anchor: Point2<S>) -> BTreeSet<Cell> {
    let roi = Aabb::square(anchor, cfg.roi_side);
    let n = roi_dims(cfg);
    let half = S::of(0.5);
    let mut cells = BTreeSet::new();
    for cx in 0..n {
        for cy in 0..n {
            let center = Point2::new(
                roi.min.x + (S::of(cx as f64) + half) * cfg.cell,
                roi.min.y + (S::of(cy as f64) + half) * cfg.cell,
            );
            if map.drivable_contains(center) {
                cells.insert((cx, cy));
            }
        }
    }
    cells
}

/// DAO against a precomputed drivable mask, for callers scoring several
/// prediction sets around the same anchor.
pub fn dao_with_mask<S: Scalar>(pred: &PredictionSet<S>, mask: &BTreeSet<Cell>, cfg: &DaoConfig<S>, anchor: Point2<S>) -> S {
    if mask.is_empty() {
        return S::zero();
    }
    let roi = Aabb::square(anchor, cfg.roi_side);
    let points: Vec<Point2<S>> = pred.modes().iter().flat_map(|m| m.points().iter().copied()).collect();
    let occupied = rasterize_occupancy(&points, roi, cfg.cell);
    let hits = occupied.intersection(mask).count();
    S::of_usize(hits) / S::of_usize(mask.len()) * cfg.scale
}

/// Drivable Area Occupancy: scaled share of drivable cells in the region of
/// interest that prediction points touch.
pub fn dao<S: Scalar>(pred: &PredictionSet<S>, map: &RoadMap<S>, cfg: &DaoConfig<S>, anchor: Point2<S>) -> S {
    dao_with_mask(pred, &drivable_cells(map, cfg, anchor), cfg, anchor)
}

/// Lane alignment confidence `max(0, 1 - Δθ/π)` for a heading difference in radians.
pub fn alignment_confidence<S: Scalar>(delta: S) -> S {
    (S::one() - delta / S::PI()).max(S::zero())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentOutcome<S> {
    pub pass: bool,
    /// Best confidence over tail points and their containing lanes; 0 when
    /// no tail point lies on a lane or the tail is stationary.
    pub max_confidence: S,
    pub stationary: bool,
}

/// Road boundary alignment: does the final heading agree with some lane the
/// tail points sit on?
pub fn test_alignment<S: Scalar>(mode: &Trajectory<S>, map: &RoadMap<S>, cfg: &AlignmentConfig<S>) -> AlignmentOutcome<S> {
    let pts = mode.points();
    let tail = &pts[pts.len() - cfg.tail_steps.min(pts.len())..];
    let motion: Vec2<S> = tail[tail.len() - 1] - tail[0];
    if motion.norm() < cfg.stationary_eps || motion.norm() <= S::of(HEADING_EPS) {
        return AlignmentOutcome {
            pass: cfg.stationary_policy == StationaryPolicy::Pass,
            max_confidence: S::zero(),
            stationary: true,
        };
    }
    let mut best = S::zero();
    for &p in tail {
        for lane in map.lanes_containing(p) {
            let Ok(lane_heading) = lane.heading_at(p) else { continue };
            if let Ok(delta) = angle_between(motion, Vec2::from_heading(lane_heading)) {
                best = best.max(alignment_confidence(delta));
            }
        }
    }
    AlignmentOutcome {
        pass: best > cfg.threshold_lac,
        max_confidence: best,
        stationary: false,
    }
}

/// Kinematic compliance: initial and final mean accelerations are admissible.
pub fn test_kinematic<S: Scalar>(mode: &Trajectory<S>, kin: &KinematicConfig<S>) -> Result<bool> {
    Ok(kinematic_window_check(mode, kin)?.pass)
}

/// Per-mode outcome of the admissibility triad.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TriadResult<S> {
    pub boundary_pass: Vec<bool>,
    pub alignment_pass: Vec<bool>,
    pub kinematic_pass: Vec<bool>,
    pub admissible: Vec<bool>,
    pub att_rate: S,
}

fn rate<S: Scalar>(flags: &[bool]) -> S {
    mean(flags.iter().map(|&b| if b { S::one() } else { S::zero() })).unwrap_or_else(S::zero)
}

impl<S: Scalar> TriadResult<S> {
    pub fn boundary_rate(&self) -> S {
        rate(&self.boundary_pass)
    }

    pub fn alignment_rate(&self) -> S {
        rate(&self.alignment_pass)
    }

    pub fn kinematic_rate(&self) -> S {
        rate(&self.kinematic_pass)
    }

    pub fn modes(&self) -> usize {
        self.admissible.len()
    }
}

/// Admissibility Triad Test: a mode is admissible when it passes the
/// boundary, alignment and kinematic tests; the rate is the admissible share.
pub fn att<S: Scalar>(
    pred: &PredictionSet<S>,
    map: &RoadMap<S>,
    align: &AlignmentConfig<S>,
    kin: &KinematicConfig<S>,
) -> Result<TriadResult<S>> {
    let k = pred.k();
    let mut res = TriadResult {
        boundary_pass: Vec::with_capacity(k),
        alignment_pass: Vec::with_capacity(k),
        kinematic_pass: Vec::with_capacity(k),
        admissible: Vec::with_capacity(k),
        att_rate: S::zero(),
    };
    for mode in pred.modes() {
        let b = test_boundary(mode, map);
        let a = test_alignment(mode, map, align).pass;
        let kp = test_kinematic(mode, kin)?;
        res.boundary_pass.push(b);
        res.alignment_pass.push(a);
        res.kinematic_pass.push(kp);
        res.admissible.push(b && a && kp);
    }
    res.att_rate = rate(&res.admissible);
    Ok(res)
}
