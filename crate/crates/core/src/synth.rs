//! Deterministic synthetic fixtures: maps, ground-truth scenarios and three
//! toy predictors.
//!
//! Randomness comes from SplitMix64 (`rand_xoshiro::SplitMix64`). Uniform
//! draws use the top 53 bits of each output, `(x >> 11) * 2^-53`; normal
//! draws use Box-Muller with one output kept per pair of uniforms. Each
//! scenario and each predictor call has its own stream, seeded with
//! [`mix_seed`]`(seed, stream)`: the first SplitMix64 output for state
//! `seed + stream * 0x9E3779B97F4A7C15` (wrapping).
//!
//! Maps use right-hand traffic. Intersection arms are 120 m long and meet a
//! square box of half-size `lanes_per_direction * lane_width + 6` m. Turn
//! connectors are quarter circles.

use std::collections::BTreeMap;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_between, nearest_on_polyline, Point2, Polygon, Polyline, Vec2};
use crate::map::{LaneSegment, RoadMap, TurnDirection};
use crate::scenario::ScenarioRecord;
use crate::trajectory::{PredictionSet, Trajectory};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const ARM_LENGTH: f64 = 120.0;
const BOX_MARGIN: f64 = 6.0;
const STRAIGHT_HALF_LENGTH: f64 = 150.0;
const ARC_SEGMENTS: usize = 12;
/// Dilation of lane strips forming the drivable area, meters.
pub const DRIVABLE_MARGIN: f64 = 0.3;
pub const SPEED_RANGE: (f64, f64) = (5.0, 15.0);
pub const NOISE_SIGMA: f64 = 1.0;
const MAX_ATTEMPTS: usize = 10_000;
const LANE_CHANGE_DISTANCE: f64 = 15.0;
const FAN_SPEED_FACTORS: [f64; 7] = [1.0, 0.8, 1.2, 0.9, 1.1, 0.7, 1.3];

/// Seed for an independent stream derived from `seed`.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    SplitMix64::seed_from_u64(seed.wrapping_add(stream.wrapping_mul(GOLDEN))).next_u64()
}

/// Pinned generator with the draws used by the fixtures.
pub struct SynthRng(SplitMix64);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index below `n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MapKind {
    Straight,
    TIntersection,
    Crossroads,
}

impl MapKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::Straight => "straight",
            MapKind::TIntersection => "t_intersection",
            MapKind::Crossroads => "crossroads",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub kind: MapKind,
    #[serde(default = "default_lanes")]
    pub lanes_per_direction: usize,
    #[serde(default = "default_lane_width")]
    pub lane_width: f64,
    pub seed: u64,
    pub n_scenarios: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_past")]
    pub past_steps: usize,
    #[serde(default = "default_future")]
    pub future_steps: usize,
}

fn default_lanes() -> usize {
    2
}
fn default_lane_width() -> f64 {
    3.7
}
fn default_dt() -> f64 {
    0.1
}
fn default_past() -> usize {
    20
}
fn default_future() -> usize {
    30
}

impl SynthSpec {
    pub fn new(kind: MapKind, seed: u64, n_scenarios: usize) -> Self {
        Self {
            kind,
            lanes_per_direction: default_lanes(),
            lane_width: default_lane_width(),
            seed,
            n_scenarios,
            dt: default_dt(),
            past_steps: default_past(),
            future_steps: default_future(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lanes_per_direction == 0 || self.n_scenarios == 0 {
            return Err(Error::InvalidConfig("lanes_per_direction and n_scenarios must be at least 1".into()));
        }
        if !(self.lane_width > 0.0 && self.lane_width.is_finite()) || !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("lane_width and dt must be positive".into()));
        }
        if self.past_steps < 2 || self.future_steps < 2 {
            return Err(Error::InvalidConfig("past_steps and future_steps must be at least 2".into()));
        }
        let travel = SPEED_RANGE.1 * self.dt * (self.past_steps + self.future_steps) as f64;
        if travel > ARM_LENGTH {
            return Err(Error::InvalidConfig(format!(
                "horizon too long for synthetic maps: up to {travel:.1} m of travel"
            )));
        }
        Ok(())
    }

    pub fn map_id(&self) -> String {
        format!("{}-{}", self.kind.as_str(), self.seed)
    }
}

fn strip(center: &[Point2<f64>], half: f64) -> Polygon<f64> {
    let n = center.len();
    let normal = |i: usize| -> Vec2<f64> {
        let a = center[i.saturating_sub(1)];
        let b = center[(i + 1).min(n - 1)];
        (b - a).normalized().expect("centerline has no repeated points").perp()
    };
    let mut ring: Vec<Point2<f64>> = (0..n).map(|i| center[i] + normal(i) * half).collect();
    ring.extend((0..n).rev().map(|i| center[i] - normal(i) * half));
    Polygon::new(ring).expect("lane strip is simple")
}

fn quarter_arc(start: Point2<f64>, end: Point2<f64>, h0: Vec2<f64>, left: bool) -> Vec<Point2<f64>> {
    let r = (end - start).dot(h0).abs();
    let side = if left { h0.perp() } else { -h0.perp() };
    let center = start + side * r;
    let mut pts: Vec<Point2<f64>> = (0..=ARC_SEGMENTS)
        .map(|k| {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / ARC_SEGMENTS as f64;
            center + (-side * th.cos() + h0 * th.sin()) * r
        })
        .collect();
    pts[ARC_SEGMENTS] = end;
    pts
}

struct LaneDraft {
    id: String,
    center: Vec<Point2<f64>>,
    turn: TurnDirection,
    is_intersection: bool,
    successors: Vec<String>,
    left: Option<String>,
    right: Option<String>,
}

impl LaneDraft {
    fn plain(id: String, center: Vec<Point2<f64>>) -> Self {
        Self {
            id,
            center,
            turn: TurnDirection::None,
            is_intersection: false,
            successors: vec![],
            left: None,
            right: None,
        }
    }
}

fn neighbor_ids(drafts: &mut [LaneDraft], ids: impl Fn(usize) -> String, n: usize, offset: usize) {
    for i in 0..n {
        let d = &mut drafts[offset + i];
        d.left = (i > 0).then(|| ids(i - 1));
        d.right = (i + 1 < n).then(|| ids(i + 1));
    }
}

fn straight_drafts(n: usize, w: f64) -> Vec<LaneDraft> {
    let mut drafts = Vec::with_capacity(2 * n);
    let l = STRAIGHT_HALF_LENGTH;
    for i in 0..n {
        let y = (i as f64 + 0.5) * w;
        drafts.push(LaneDraft::plain(format!("E_{i}"), vec![Point2::new(-l, -y), Point2::new(l, -y)]));
    }
    for i in 0..n {
        let y = (i as f64 + 0.5) * w;
        drafts.push(LaneDraft::plain(format!("W_{i}"), vec![Point2::new(l, y), Point2::new(-l, y)]));
    }
    neighbor_ids(&mut drafts, |i| format!("E_{i}"), n, 0);
    neighbor_ids(&mut drafts, |i| format!("W_{i}"), n, n);
    drafts
}

fn intersection_drafts(arms: &[(&str, Vec2<f64>)], n: usize, w: f64) -> Vec<LaneDraft> {
    let b = n as f64 * w + BOX_MARGIN;
    let origin = Point2::new(0.0, 0.0);
    let offset = |i: usize| (i as f64 + 0.5) * w;
    let mut drafts = Vec::new();
    for &(name, u) in arms {
        let nrm = u.perp();
        let start = drafts.len();
        for i in 0..n {
            let o = nrm * offset(i);
            drafts.push(LaneDraft::plain(
                format!("{name}_in_{i}"),
                vec![origin + u * (b + ARM_LENGTH) + o, origin + u * b + o],
            ));
        }
        neighbor_ids(&mut drafts, |i| format!("{name}_in_{i}"), n, start);
        let start = drafts.len();
        for i in 0..n {
            let o = nrm * offset(i);
            drafts.push(LaneDraft::plain(
                format!("{name}_out_{i}"),
                vec![origin + u * b - o, origin + u * (b + ARM_LENGTH) - o],
            ));
        }
        neighbor_ids(&mut drafts, |i| format!("{name}_out_{i}"), n, start);
    }
    let mut connectors = Vec::new();
    for &(a, ua) in arms {
        for &(bn, ub) in arms {
            if a == bn {
                continue;
            }
            let h0 = -ua;
            let c = h0.cross(ub);
            for i in 0..n {
                let p = origin + ua * b + ua.perp() * offset(i);
                let q = origin + ub * b - ub.perp() * offset(i);
                let (turn, center) = if c > 0.5 {
                    (TurnDirection::Left, quarter_arc(p, q, h0, true))
                } else if c < -0.5 {
                    (TurnDirection::Right, quarter_arc(p, q, h0, false))
                } else {
                    (TurnDirection::None, vec![p, q])
                };
                let id = format!("X_{a}{i}_{bn}{i}");
                let inbound = drafts.iter_mut().find(|d| d.id == format!("{a}_in_{i}")).expect("inbound lane");
                inbound.successors.push(id.clone());
                connectors.push(LaneDraft {
                    id,
                    center,
                    turn,
                    is_intersection: true,
                    successors: vec![format!("{bn}_out_{i}")],
                    left: None,
                    right: None,
                });
            }
        }
    }
    drafts.extend(connectors);
    drafts
}

/// Builds the road map for `spec.kind`.
pub fn gen_map(spec: &SynthSpec) -> Result<RoadMap<f64>> {
    spec.validate()?;
    let (n, w) = (spec.lanes_per_direction, spec.lane_width);
    let east = Vec2::new(1.0, 0.0);
    let north = Vec2::new(0.0, 1.0);
    let drafts = match spec.kind {
        MapKind::Straight => straight_drafts(n, w),
        MapKind::TIntersection => intersection_drafts(&[("W", -east), ("E", east), ("S", -north)], n, w),
        MapKind::Crossroads => intersection_drafts(&[("W", -east), ("E", east), ("S", -north), ("N", north)], n, w),
    };
    let mut lanes = Vec::with_capacity(drafts.len());
    let mut drivable = Vec::with_capacity(drafts.len());
    for d in drafts {
        drivable.push(strip(&d.center, w / 2.0 + DRIVABLE_MARGIN));
        lanes.push(LaneSegment {
            polygon: strip(&d.center, w / 2.0),
            centerline: Polyline::new(d.center)?,
            id: d.id,
            turn: d.turn,
            is_intersection: d.is_intersection,
            successors: d.successors,
            left_neighbor: d.left,
            right_neighbor: d.right,
        });
    }
    RoadMap::new(spec.map_id(), lanes, drivable)
}

/// Concatenates lane centerlines, dropping duplicated joints.
fn join(map: &RoadMap<f64>, ids: &[&str]) -> Polyline<f64> {
    let mut pts: Vec<Point2<f64>> = Vec::new();
    for id in ids {
        for &p in map.lane(id).expect("route lane exists").centerline.points() {
            if pts.last().is_none_or(|&q| q.distance(p) > 1e-9) {
                pts.push(p);
            }
        }
    }
    Polyline::new(pts).expect("route has length")
}

/// Every lane sequence from an entry lane: entry plus successors until a lane
/// without successors.
fn routes(map: &RoadMap<f64>) -> Vec<Polyline<f64>> {
    let has_pred: std::collections::HashSet<&str> =
        map.lanes().iter().flat_map(|l| l.successors.iter().map(String::as_str)).collect();
    let mut out = Vec::new();
    for l in map.lanes().iter().filter(|l| !has_pred.contains(l.id.as_str())) {
        let mut stack = vec![vec![l.id.as_str()]];
        while let Some(path) = stack.pop() {
            let last = map.lane(path[path.len() - 1]).expect("lane exists");
            if last.successors.is_empty() {
                out.push(join(map, &path));
            } else {
                for s in last.successors.iter().rev() {
                    let mut p = path.clone();
                    p.push(s);
                    stack.push(p);
                }
            }
        }
    }
    out
}

/// True when every point lies on some lane whose direction matches `dir`.
fn follows_lanes(map: &RoadMap<f64>, pts: &[Point2<f64>], dir: Vec2<f64>) -> bool {
    pts.iter().all(|&p| {
        map.lanes_containing(p).iter().any(|l| {
            l.heading_at(p)
                .ok()
                .and_then(|h| angle_between(dir, Vec2::from_heading(h)).ok())
                .is_some_and(|d| d < 1e-6)
        })
    })
}

fn constant_velocity(past: &Trajectory<f64>, steps: usize) -> Vec<Point2<f64>> {
    let p = past.points();
    let a = p[p.len() - 1];
    let v = a - p[p.len() - 2];
    (1..=steps).map(|t| a + v * t as f64).collect()
}

fn one_scenario(map: &RoadMap<f64>, spec: &SynthSpec, routes: &[Polyline<f64>], index: usize) -> Result<ScenarioRecord<f64>> {
    let mut rng = SynthRng::new(mix_seed(spec.seed, index as u64));
    let (l, t) = (spec.past_steps, spec.future_steps);
    for _ in 0..MAX_ATTEMPTS {
        let route = &routes[rng.below(routes.len())];
        let v = rng.range(SPEED_RANGE.0, SPEED_RANGE.1);
        let step = v * spec.dt;
        let span = step * (l + t - 1) as f64;
        let s0 = rng.uniform() * (crate::geom::arc_length(route) - span);
        let pts: Vec<Point2<f64>> = (0..l + t).map(|k| route.point_at(s0 + step * k as f64)).collect();
        let past = Trajectory::new(pts[..l].to_vec(), spec.dt)?;
        // Keep only scenarios whose observed motion, continued at constant
        // velocity, stays on lanes running the same way.
        let dir = pts[l - 1] - pts[l - 2];
        if !follows_lanes(map, &constant_velocity(&past, t), dir) || !follows_lanes(map, &pts[l - 2..l], dir) {
            continue;
        }
        let future = Trajectory::new(pts[l..].to_vec(), spec.dt)?;
        return ScenarioRecord::new(
            format!("{}-{index:04}", spec.map_id()),
            map.map_id(),
            format!("agent-{index}"),
            past,
            future,
        );
    }
    Err(Error::Internal(format!("no admissible placement for scenario {index} after {MAX_ATTEMPTS} draws")))
}

/// Places `spec.n_scenarios` agents on lane routes of `map`.
pub fn gen_scenarios(map: &RoadMap<f64>, spec: &SynthSpec) -> Result<Vec<ScenarioRecord<f64>>> {
    spec.validate()?;
    let routes = routes(map);
    if routes.is_empty() {
        return Err(Error::InvalidMap("map has no lane routes".into()));
    }
    (0..spec.n_scenarios)
        .into_par_iter()
        .map(|i| one_scenario(map, spec, &routes, i))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ToyKind {
    ConstVel,
    LaneFan,
    Noisy,
}

impl ToyKind {
    pub const ALL: [ToyKind; 3] = [ToyKind::ConstVel, ToyKind::LaneFan, ToyKind::Noisy];

    pub fn as_str(self) -> &'static str {
        match self {
            ToyKind::ConstVel => "CONST_VEL",
            ToyKind::LaneFan => "LANE_FAN",
            ToyKind::Noisy => "NOISY",
        }
    }

    /// Stream tag separating predictor seeds from scenario seeds.
    fn stream(self) -> u64 {
        match self {
            ToyKind::ConstVel => 0x434F_4E53,
            ToyKind::LaneFan => 0x4641_4E21,
            ToyKind::Noisy => 0x4E4F_4953,
        }
    }
}

/// Seed a toy predictor uses for scenario `index` of a run seeded with `seed`.
pub fn prediction_seed(kind: ToyKind, seed: u64, index: usize) -> u64 {
    mix_seed(mix_seed(seed, kind.stream()), index as u64)
}

fn sample_path(path: &Polyline<f64>, step: f64, steps: usize) -> Vec<Point2<f64>> {
    let len = crate::geom::arc_length(path);
    let pts = path.points();
    let tail = (pts[pts.len() - 1] - pts[pts.len() - 2]).normalized().unwrap_or(Vec2::zero());
    (1..=steps)
        .map(|t| {
            let s = step * t as f64;
            if s <= len {
                path.point_at(s)
            } else {
                path.last() + tail * (s - len)
            }
        })
        .collect()
}

/// Lane sequences starting at `lane`, cut off once `reach` meters are covered.
fn lane_sequences<'a>(map: &'a RoadMap<f64>, lane: &'a str, offset: f64, reach: f64) -> Vec<Vec<&'a str>> {
    let mut out = Vec::new();
    let mut stack = vec![(vec![lane], -offset)];
    while let Some((path, covered)) = stack.pop() {
        let last = map.lane(path[path.len() - 1]).expect("lane exists");
        let covered = covered + crate::geom::arc_length(&last.centerline);
        if covered >= reach || last.successors.is_empty() {
            out.push(path);
            continue;
        }
        for s in last.successors.iter().rev() {
            let mut p = path.clone();
            p.push(s.as_str());
            stack.push((p, covered));
        }
    }
    out
}

/// Polyline from `start` joining lane `seq` at arc offset `from` on its first lane.
fn path_from(map: &RoadMap<f64>, start: Point2<f64>, seq: &[&str], from: f64) -> Option<Polyline<f64>> {
    let joined = join(map, seq);
    let mut pts = vec![start];
    let mut acc = 0.0;
    for (a, b) in joined.segments() {
        acc += a.distance(b);
        if acc > from && b.distance(start) > 1e-9 {
            pts.push(b);
        }
    }
    if pts.len() == 1 {
        return None;
    }
    if from > 0.0 && from < crate::geom::arc_length(&joined) {
        let entry = joined.point_at(from);
        if entry.distance(start) > 1e-9 {
            pts.insert(1, entry);
        }
    }
    Polyline::new(pts).ok()
}

fn lane_fan(rec: &ScenarioRecord<f64>, map: &RoadMap<f64>, horizon: usize) -> Vec<Polyline<f64>> {
    let p = rec.past.points();
    let anchor = rec.anchor();
    let v = anchor - p[p.len() - 2];
    let Some(lane) = map
        .lanes_containing(anchor)
        .into_iter()
        .filter_map(|l| {
            let h = l.heading_at(anchor).ok()?;
            Some((angle_between(v, Vec2::from_heading(h)).ok()?, l))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, l)| l)
    else {
        return vec![];
    };
    let reach = v.norm() * horizon as f64 * FAN_SPEED_FACTORS.iter().cloned().fold(0.0, f64::max) + 10.0;
    let mut paths = Vec::new();
    let Ok(here) = nearest_on_polyline(anchor, &lane.centerline) else { return vec![] };
    for seq in lane_sequences(map, &lane.id, here.arc_offset, reach) {
        paths.extend(path_from(map, anchor, &seq, here.arc_offset));
    }
    for nb in lane.left_neighbor.iter().chain(lane.right_neighbor.iter()) {
        let other = map.lane(nb).expect("neighbor exists");
        let Ok(there) = nearest_on_polyline(anchor, &other.centerline) else { continue };
        let from = there.arc_offset + LANE_CHANGE_DISTANCE;
        for seq in lane_sequences(map, nb, from, reach) {
            paths.extend(path_from(map, anchor, &seq, from));
        }
    }
    paths
}

/// Runs a toy predictor on one scenario, producing `k` equally weighted modes.
pub fn toy_predict(kind: ToyKind, rec: &ScenarioRecord<f64>, map: &RoadMap<f64>, k: usize, seed: u64) -> Result<PredictionSet<f64>> {
    if k < 2 {
        return Err(Error::InsufficientModes { needed: 2, got: k });
    }
    let horizon = rec.future.len();
    let dt = rec.dt();
    let cv = constant_velocity(&rec.past, horizon);
    let modes: Vec<Vec<Point2<f64>>> = match kind {
        ToyKind::ConstVel => vec![cv; k],
        ToyKind::Noisy => {
            let mut rng = SynthRng::new(seed);
            (0..k)
                .map(|_| {
                    cv.iter()
                        .map(|&q| {
                            let dx = rng.normal() * NOISE_SIGMA;
                            let dy = rng.normal() * NOISE_SIGMA;
                            Point2::new(q.x + dx, q.y + dy)
                        })
                        .collect()
                })
                .collect()
        }
        ToyKind::LaneFan => {
            let paths = lane_fan(rec, map, horizon);
            if paths.is_empty() {
                vec![cv; k]
            } else {
                let p = rec.past.points();
                let step = rec.anchor().distance(p[p.len() - 2]);
                (0..k)
                    .map(|j| {
                        let f = FAN_SPEED_FACTORS[(j / paths.len()) % FAN_SPEED_FACTORS.len()];
                        sample_path(&paths[j % paths.len()], step * f, horizon)
                    })
                    .collect()
            }
        }
    };
    let modes = modes.into_iter().map(|m| Trajectory::new(m, dt)).collect::<Result<Vec<_>>>()?;
    PredictionSet::new(rec.id.clone(), modes, Some(vec![1.0 / k as f64; k]))
}

/// Predictions of every toy model for every scenario, keyed by model name.
pub fn toy_suite(
    records: &[ScenarioRecord<f64>],
    map: &RoadMap<f64>,
    k: usize,
    seed: u64,
) -> Result<BTreeMap<ToyKind, Vec<PredictionSet<f64>>>> {
    ToyKind::ALL
        .iter()
        .map(|&kind| {
            let sets = records
                .par_iter()
                .enumerate()
                .map(|(i, r)| toy_predict(kind, r, map, k, prediction_seed(kind, seed, i)))
                .collect::<Result<Vec<_>>>()?;
            Ok((kind, sets))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{aae, amv, att, dac, AlignmentConfig, AngleUnit, Reduction};
    use crate::scenario::{tag_length, tag_structure, LengthClass, Structure};
    use crate::trajectory::KinematicConfig;

    fn fixture(kind: MapKind, n: usize) -> (RoadMap<f64>, Vec<ScenarioRecord<f64>>) {
        let spec = SynthSpec::new(kind, 7, n);
        let map = gen_map(&spec).unwrap();
        let recs = gen_scenarios(&map, &spec).unwrap();
        (map, recs)
    }

    #[test]
    fn rng_is_pinned() {
        // First outputs of SplitMix64 seeded with 0, from the reference implementation.
        let mut r = SplitMix64::seed_from_u64(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut a = SynthRng::new(5);
        let mut b = SynthRng::new(5);
        for _ in 0..100 {
            let u = a.uniform();
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u, b.uniform());
        }
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
    }

    #[test]
    fn normal_draws_look_standard() {
        let mut r = SynthRng::new(11);
        let xs: Vec<f64> = (0..20_000).map(|_| r.normal()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn straight_map_shape() {
        let map = gen_map(&SynthSpec::new(MapKind::Straight, 1, 1)).unwrap();
        assert_eq!(map.lanes().len(), 4);
        assert!(map.lanes().iter().all(|l| !l.is_turn_lane()));
        assert!(map.warnings().is_empty());
    }

    #[test]
    fn intersection_maps_have_turns() {
        for kind in [MapKind::TIntersection, MapKind::Crossroads] {
            let map = gen_map(&SynthSpec::new(kind, 1, 1)).unwrap();
            assert!(map.warnings().is_empty(), "{:?}", map.warnings());
            let left = map.lanes().iter().filter(|l| l.is_turn_lane() && l.turn == TurnDirection::Left).count();
            let right = map.lanes().iter().filter(|l| l.is_turn_lane() && l.turn == TurnDirection::Right).count();
            assert!(left > 0 && right > 0);
        }
        // T: 3 arms x 2 directions x 2 lanes, plus 6 arm pairs x 2 lanes.
        let t = gen_map(&SynthSpec::new(MapKind::TIntersection, 1, 1)).unwrap();
        assert_eq!(t.lanes().len(), 12 + 12);
    }

    #[test]
    fn arcs_are_round() {
        let h0 = Vec2::new(1.0, 0.0);
        let pts = quarter_arc(Point2::new(0.0, 0.0), Point2::new(10.0, 10.0), h0, true);
        let c = Point2::new(0.0, 10.0);
        for p in &pts {
            assert!((p.distance(c) - 10.0).abs() < 1e-9);
        }
        assert_eq!(pts[ARC_SEGMENTS], Point2::new(10.0, 10.0));
    }

    #[test]
    fn same_spec_same_map() {
        let spec = SynthSpec::new(MapKind::Crossroads, 3, 4);
        let a = serde_json::to_string(&gen_map(&spec).unwrap().to_document()).unwrap();
        let b = serde_json::to_string(&gen_map(&spec).unwrap().to_document()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scenario_shapes_and_containment() {
        for kind in [MapKind::Straight, MapKind::TIntersection, MapKind::Crossroads] {
            let (map, recs) = fixture(kind, 25);
            assert_eq!(recs.len(), 25);
            for r in &recs {
                assert_eq!(r.past.len(), 20);
                assert_eq!(r.future.len(), 30);
                assert!(r.future.points().iter().all(|&p| map.drivable_contains(p)));
                let v = r.past.last().distance(r.past.points()[18]) / 0.1;
                assert!((5.0 - 1e-9..=15.0 + 1e-9).contains(&v));
            }
        }
    }

    #[test]
    fn fast_straight_agents_are_long() {
        let (_, recs) = fixture(MapKind::Straight, 60);
        for r in &recs {
            let v = r.past.last().distance(r.past.points()[18]) / 0.1;
            if v >= 9.6 + 1e-9 {
                assert_eq!(tag_length(r, 28.8), LengthClass::Long);
            }
        }
    }

    #[test]
    fn scenarios_are_deterministic() {
        let (_, a) = fixture(MapKind::TIntersection, 10);
        let (_, b) = fixture(MapKind::TIntersection, 10);
        assert_eq!(a, b);
    }

    #[test]
    fn structure_tags_follow_map() {
        let (map, recs) = fixture(MapKind::Straight, 5);
        assert!(recs.iter().all(|r| tag_structure(r, &map, 100.0).unwrap() == Structure::Cruising));
        let (map, recs) = fixture(MapKind::TIntersection, 5);
        assert!(recs.iter().all(|r| tag_structure(r, &map, 100.0).unwrap() == Structure::Turn));
    }

    #[test]
    fn const_vel_is_fully_admissible() {
        for kind in [MapKind::Straight, MapKind::TIntersection, MapKind::Crossroads] {
            let (map, recs) = fixture(kind, 30);
            for r in &recs {
                let p = toy_predict(ToyKind::ConstVel, r, &map, 6, 0).unwrap();
                let kin = KinematicConfig::default().with_anchor(r.anchor());
                let t = att(&p, &map, &AlignmentConfig::default(), &kin).unwrap();
                assert_eq!(t.att_rate, 1.0, "{}", r.id);
                assert_eq!(aae(&p, AngleUnit::Degrees).unwrap(), 0.0);
                assert_eq!(amv(&p, &kin, Reduction::Sum).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn lane_fan_spreads_at_junctions() {
        let (map, recs) = fixture(MapKind::TIntersection, 40);
        let mut fan = 0.0;
        let mut noisy = 0.0;
        for (i, r) in recs.iter().enumerate() {
            fan += aae(&toy_predict(ToyKind::LaneFan, r, &map, 6, 0).unwrap(), AngleUnit::Degrees).unwrap();
            let n = toy_predict(ToyKind::Noisy, r, &map, 6, prediction_seed(ToyKind::Noisy, 7, i)).unwrap();
            noisy += aae(&n, AngleUnit::Degrees).unwrap();
        }
        assert!(fan > noisy, "fan {fan} noisy {noisy}");
    }

    #[test]
    fn lane_fan_modes_stay_on_lanes() {
        let (map, recs) = fixture(MapKind::Crossroads, 20);
        for r in &recs {
            let p = toy_predict(ToyKind::LaneFan, r, &map, 6, 0).unwrap();
            assert_eq!(p.k(), 6);
            assert_eq!(p.horizon(), 30);
            assert!(dac(&p, &map) > 0.0);
        }
    }

    #[test]
    fn noisy_leaves_the_road() {
        let (map, recs) = fixture(MapKind::Straight, 10);
        let off = recs
            .iter()
            .enumerate()
            .map(|(i, r)| dac(&toy_predict(ToyKind::Noisy, r, &map, 6, prediction_seed(ToyKind::Noisy, 7, i)).unwrap(), &map))
            .any(|d| d < 1.0);
        assert!(off);
    }

    #[test]
    fn noisy_is_seeded() {
        let (map, recs) = fixture(MapKind::Straight, 1);
        let a = toy_predict(ToyKind::Noisy, &recs[0], &map, 3, 99).unwrap();
        let b = toy_predict(ToyKind::Noisy, &recs[0], &map, 3, 99).unwrap();
        let c = toy_predict(ToyKind::Noisy, &recs[0], &map, 3, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn k_below_two_rejected() {
        let (map, recs) = fixture(MapKind::Straight, 1);
        assert!(toy_predict(ToyKind::ConstVel, &recs[0], &map, 1, 0).is_err());
    }
}
