//! Trajectories, prediction sets and longitudinal kinematics.
//!
//! Kinematic profiles optionally start from an anchor, the agent's last
//! observed position. With an anchor a `T`-point trajectory yields `T` step
//! vectors; without one it yields `T - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{arc_length, Point2, Polyline, Vec2};
use crate::scalar::{mean, Scalar};

/// Uniformly sampled 2D track.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S> {
    points: Vec<Point2<S>>,
    dt: S,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(points: Vec<Point2<S>>, dt: S) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "trajectory needs at least 2 points, got {}",
                points.len()
            )));
        }
        if !(dt > S::zero()) || !dt.is_finite() {
            return Err(Error::InvalidGeometry(format!("time step must be positive, got {dt}")));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("trajectory point {i} is not finite")));
        }
        Ok(Self { points, dt })
    }

    pub fn points(&self) -> &[Point2<S>] {
        &self.points
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2<S> {
        self.points[0]
    }

    pub fn last(&self) -> Point2<S> {
        self.points[self.points.len() - 1]
    }

    pub fn to_polyline(&self) -> Polyline<S> {
        Polyline::new(self.points.clone()).expect("trajectory invariants imply a valid polyline")
    }

    pub fn arc_length(&self) -> S {
        arc_length(&self.to_polyline())
    }

    /// First `n` points (at least 2, at most all).
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.clamp(2, self.points.len());
        Self {
            points: self.points[..n].to_vec(),
            dt: self.dt,
        }
    }

    pub fn map_points(&self, f: impl Fn(Point2<S>) -> Point2<S>) -> Result<Self> {
        Self::new(self.points.iter().copied().map(f).collect(), self.dt)
    }
}

/// `K` candidate futures for one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSet<S> {
    scenario_id: String,
    modes: Vec<Trajectory<S>>,
    probabilities: Option<Vec<S>>,
}

/// Tolerance on the probability sum.
pub const PROBABILITY_SUM_TOL: f64 = 1e-6;

impl<S: Scalar> PredictionSet<S> {
    pub fn new(scenario_id: impl Into<String>, modes: Vec<Trajectory<S>>, probabilities: Option<Vec<S>>) -> Result<Self> {
        let Some(first) = modes.first() else {
            return Err(Error::InsufficientModes { needed: 1, got: 0 });
        };
        let (len, dt) = (first.len(), first.dt());
        if let Some((k, m)) = modes.iter().enumerate().find(|(_, m)| m.len() != len || m.dt() != dt) {
            return Err(Error::Shape(format!(
                "mode {k} has {} points at dt={} but mode 0 has {len} points at dt={dt}",
                m.len(),
                m.dt()
            )));
        }
        if let Some(p) = &probabilities {
            if p.len() != modes.len() {
                return Err(Error::Shape(format!(
                    "{} probabilities for {} modes",
                    p.len(),
                    modes.len()
                )));
            }
            if p.iter().any(|&v| !(v >= S::zero()) || !v.is_finite()) {
                return Err(Error::Shape("probabilities must be finite and non-negative".into()));
            }
            let total: S = p.iter().copied().sum();
            if (total - S::one()).abs() > S::of(PROBABILITY_SUM_TOL) {
                return Err(Error::Shape(format!("probabilities sum to {total}, expected 1")));
            }
        }
        Ok(Self {
            scenario_id: scenario_id.into(),
            modes,
            probabilities,
        })
    }

    pub fn scenario_id(&self) -> &str {
        &self.scenario_id
    }

    pub fn modes(&self) -> &[Trajectory<S>] {
        &self.modes
    }

    pub fn k(&self) -> usize {
        self.modes.len()
    }

    /// Points per mode.
    pub fn horizon(&self) -> usize {
        self.modes[0].len()
    }

    pub fn probabilities(&self) -> Option<&[S]> {
        self.probabilities.as_deref()
    }
}

/// Longitudinal acceleration limits for normal driving.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct KinematicConfig<S> {
    /// m/s², inclusive.
    pub a_min: S,
    /// m/s², inclusive.
    pub a_max: S,
    /// Number of acceleration samples averaged at each end.
    pub window: usize,
    /// Last observed position; per scenario, never serialized.
    #[serde(skip)]
    pub anchor: Option<Point2<S>>,
}

impl<S: Scalar> Default for KinematicConfig<S> {
    fn default() -> Self {
        Self {
            a_min: S::of(-2.0),
            a_max: S::of(1.47),
            window: 3,
            anchor: None,
        }
    }
}

impl<S: Scalar> KinematicConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.a_min < self.a_max) || !self.a_min.is_finite() || !self.a_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "kinematic.a_min ({}) must be below kinematic.a_max ({})",
                self.a_min, self.a_max
            )));
        }
        if self.window < 1 {
            return Err(Error::InvalidConfig("kinematic.window must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_anchor(&self, anchor: Point2<S>) -> Self {
        Self {
            anchor: Some(anchor),
            ..self.clone()
        }
    }

    pub fn admits(&self, a: S) -> bool {
        a >= self.a_min && a <= self.a_max
    }
}

/// Per-step displacement vectors, starting from `anchor` when given.
pub fn step_vectors<S: Scalar>(traj: &Trajectory<S>, anchor: Option<Point2<S>>) -> Vec<Vec2<S>> {
    anchor
        .iter()
        .chain(traj.points())
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| *w[1] - *w[0])
        .collect()
}

/// Speed of each step, m/s.
pub fn speed_profile<S: Scalar>(traj: &Trajectory<S>, anchor: Option<Point2<S>>) -> Vec<S> {
    step_vectors(traj, anchor)
        .into_iter()
        .map(|v| v.norm() / traj.dt())
        .collect()
}

/// Longitudinal acceleration between consecutive speeds, m/s².
pub fn accel_profile<S: Scalar>(traj: &Trajectory<S>, anchor: Option<Point2<S>>) -> Result<Vec<S>> {
    accel_from_speeds(&speed_profile(traj, anchor), traj.dt())
}

fn accel_from_speeds<S: Scalar>(speeds: &[S], dt: S) -> Result<Vec<S>> {
    if speeds.len() < 2 {
        return Err(Error::TooShortForAcceleration(speeds.len()));
    }
    Ok(speeds.windows(2).map(|w| (w[1] - w[0]) / dt).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowCheck<S> {
    pub pass: bool,
    /// Mean of the first `window` accelerations.
    pub a_init: S,
    /// Mean of the last `window` accelerations.
    pub a_final: S,
}

/// Checks the mean initial and final accelerations against the admissible
/// range.
pub fn kinematic_window_check<S: Scalar>(traj: &Trajectory<S>, cfg: &KinematicConfig<S>) -> Result<WindowCheck<S>> {
    let acc = accel_profile(traj, cfg.anchor)?;
    let w = cfg.window.max(1).min(acc.len());
    let a_init = mean(acc[..w].iter().copied()).expect("window is non-empty");
    let a_final = mean(acc[acc.len() - w..].iter().copied()).expect("window is non-empty");
    Ok(WindowCheck {
        pass: cfg.admits(a_init) && cfg.admits(a_final),
        a_init,
        a_final,
    })
}

/// Longest prefix whose every acceleration sample is admissible, never
/// shorter than two points.
pub fn kinematic_clip<S: Scalar>(traj: &Trajectory<S>, cfg: &KinematicConfig<S>) -> Trajectory<S> {
    let Ok(acc) = accel_profile(traj, cfg.anchor) else {
        return traj.clone();
    };
    match acc.iter().position(|&a| !cfg.admits(a)) {
        None => traj.clone(),
        Some(first_bad) => {
            // Sample j spans speeds j and j+1. Keep the points producing
            // speeds 0..=first_bad; without an anchor speed i ends at point i+1.
            let keep = if cfg.anchor.is_some() { first_bad + 1 } else { first_bad + 2 };
            traj.prefix(keep)
        }
    }
}

/// Last point minus first point.
pub fn displacement_vector<S: Scalar>(traj: &Trajectory<S>) -> Vec2<S> {
    traj.last() - traj.first()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traj(pts: &[(f64, f64)], dt: f64) -> Trajectory<f64> {
        Trajectory::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(), dt).unwrap()
    }

    /// Straight eastbound track whose step lengths (m) are given.
    fn from_steps(steps: &[f64], dt: f64) -> Trajectory<f64> {
        let mut x = 0.0;
        let mut pts = vec![(0.0, 0.0)];
        for s in steps {
            x += s;
            pts.push((x, 0.0));
        }
        traj(&pts, dt)
    }

    #[test]
    fn construction_rules() {
        assert!(Trajectory::new(vec![Point2::new(0.0, 0.0)], 0.1).is_err());
        assert!(Trajectory::new(vec![Point2::new(0.0, 0.0); 2], 0.0).is_err());
        let a = traj(&[(0.0, 0.0), (1.0, 0.0)], 0.1);
        let b = traj(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 0.1);
        assert!(matches!(PredictionSet::new("s", vec![a.clone(), b], None), Err(Error::Shape(_))));
        assert!(PredictionSet::new("s", vec![a.clone(), a.clone()], Some(vec![0.5, 0.6])).is_err());
        assert!(PredictionSet::new("s", vec![a.clone(), a.clone()], Some(vec![0.25, 0.75])).is_ok());
        assert!(PredictionSet::<f64>::new("s", vec![], None).is_err());
    }

    #[test]
    fn step_vector_examples() {
        let t = traj(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 0.1);
        assert_eq!(step_vectors(&t, None), vec![Vec2::new(1.0, 0.0); 2]);
        assert_eq!(step_vectors(&t, Some(Point2::new(-1.0, 0.0))), vec![Vec2::new(1.0, 0.0); 3]);
    }

    #[test]
    fn speed_examples() {
        let t = from_steps(&[1.0; 5], 0.1);
        assert!(speed_profile(&t, None).iter().all(|&s| (s - 10.0).abs() < 1e-12));
        let still = traj(&[(3.0, 3.0); 4], 0.1);
        assert_eq!(speed_profile(&still, None), vec![0.0; 3]);
        let doubled = t.map_points(|p| Point2::new(2.0 * p.x, 2.0 * p.y)).unwrap();
        for (a, b) in speed_profile(&t, None).iter().zip(speed_profile(&doubled, None)) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn accel_examples() {
        assert!(accel_profile(&from_steps(&[1.0; 4], 0.1), None)
            .unwrap()
            .iter()
            .all(|a| a.abs() < 1e-9));
        let up = accel_from_speeds::<f64>(&[10.0, 10.1], 0.1).unwrap();
        assert!((up[0] - 1.0).abs() < 1e-9);
        let down = accel_from_speeds::<f64>(&[10.0, 9.7], 0.1).unwrap();
        assert!((down[0] + 3.0).abs() < 1e-9);
        assert!(matches!(
            accel_profile(&from_steps(&[1.0], 0.1), None),
            Err(Error::TooShortForAcceleration(1))
        ));
    }

    #[test]
    fn window_check_examples() {
        let cfg = KinematicConfig::default();
        let cruise = kinematic_window_check(&from_steps(&[1.0; 10], 0.1), &cfg).unwrap();
        assert!(cruise.pass);
        assert!(cruise.a_init.abs() < 1e-9 && cruise.a_final.abs() < 1e-9);

        // +10 m/s² at dt=0.1: each step 0.01 m longer than the last (Δv = 1 m/s).
        let steps: Vec<f64> = (0..10).map(|i| 1.0 + 0.1 * i as f64).collect();
        let fast = kinematic_window_check(&from_steps(&steps, 0.1), &cfg).unwrap();
        assert!(!fast.pass);
        assert!((fast.a_init - 10.0).abs() < 1e-9 && (fast.a_final - 10.0).abs() < 1e-9);

        let steps: Vec<f64> = (0..10).map(|i| 2.0 - 0.03 * i as f64).collect();
        let brake = kinematic_window_check(&from_steps(&steps, 0.1), &cfg).unwrap();
        assert!(!brake.pass);
        assert!((brake.a_init + 3.0).abs() < 1e-9 && (brake.a_final + 3.0).abs() < 1e-9);
    }

    #[test]
    fn window_shorter_than_profile() {
        let cfg = KinematicConfig { window: 10, ..KinematicConfig::default() };
        let t = from_steps(&[1.0, 1.0, 1.0], 0.1);
        let c = kinematic_window_check(&t, &cfg).unwrap();
        assert!(c.pass);
    }

    #[test]
    fn clip_identity_when_compliant() {
        let t = from_steps(&[1.0; 8], 0.1);
        assert_eq!(kinematic_clip(&t, &KinematicConfig::default()), t);
    }

    #[test]
    fn clip_before_first_violation() {
        // Speeds [10, 10, 13, 13] m/s: samples [0, 30, 0], first bad index 1.
        let t = from_steps(&[1.0, 1.0, 1.3, 1.3], 0.1);
        let acc = accel_profile(&t, None).unwrap();
        let first_bad = acc.iter().position(|a| !(-2.0..=1.47).contains(a)).unwrap();
        assert_eq!(first_bad, 1);
        // Last compliant speed is speed 1, produced by point 2.
        let clipped = kinematic_clip(&t, &KinematicConfig::default());
        assert_eq!(clipped.points(), &t.points()[..3]);

        // With an anchor the same speeds come from one point earlier.
        let anchor = Point2::new(-1.0, 0.0);
        let t2 = traj(&[(0.0, 0.0), (1.0, 0.0), (2.3, 0.0), (3.6, 0.0)], 0.1);
        let cfg = KinematicConfig::default().with_anchor(anchor);
        assert_eq!(kinematic_clip(&t2, &cfg).points(), &t2.points()[..2]);
    }

    #[test]
    fn clip_floor_is_two_points() {
        let t = from_steps(&[1.0, 2.0, 4.0, 8.0, 16.0], 0.1);
        assert_eq!(kinematic_clip(&t, &KinematicConfig::default()).len(), 2);
    }

    #[test]
    fn displacement_examples() {
        let line: Vec<(f64, f64)> = (0..=30).map(|i| (i as f64, 0.0)).collect();
        assert_eq!(displacement_vector(&traj(&line, 0.1)), Vec2::new(30.0, 0.0));
        let lp = traj(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)], 0.1);
        assert_eq!(displacement_vector(&lp), Vec2::new(0.0, 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(KinematicConfig::<f64>::default().validate().is_ok());
        let bad = KinematicConfig::<f64> { a_min: 2.0, a_max: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = KinematicConfig::<f64> { window: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    fn arb_traj() -> impl Strategy<Value = Trajectory<f64>> {
        proptest::collection::vec((0.0..2.0f64, -0.3..0.3f64), 3..20).prop_map(|steps| {
            let mut p = Point2::new(0.0, 0.0);
            let mut pts = vec![p];
            for (dx, dy) in steps {
                p = p + Vec2::new(dx, dy);
                pts.push(p);
            }
            Trajectory::new(pts, 0.1).unwrap()
        })
    }

    proptest! {
        #[test]
        fn steps_prefix_sum_reproduces_points(t in arb_traj()) {
            let mut p = t.first();
            for (v, q) in step_vectors(&t, None).iter().zip(&t.points()[1..]) {
                p = p + *v;
                prop_assert!(p.distance(*q) < 1e-9);
            }
        }

        #[test]
        fn profiles_rigid_invariant(t in arb_traj(), rot in -3.0..3.0f64, tx in -100.0..100.0f64) {
            let moved = t.map_points(|p| Point2::new(0.0, 0.0) + p.to_vec().rotate(rot) + Vec2::new(tx, -tx)).unwrap();
            for (a, b) in speed_profile(&t, None).iter().zip(speed_profile(&moved, None)) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in accel_profile(&t, None).unwrap().iter().zip(accel_profile(&moved, None).unwrap()) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }

        #[test]
        fn clip_is_idempotent_prefix(t in arb_traj(), anchored in any::<bool>()) {
            let mut cfg = KinematicConfig::default();
            if anchored {
                cfg.anchor = Some(Point2::new(-1.0, 0.0));
            }
            let once = kinematic_clip(&t, &cfg);
            prop_assert!(once.len() >= 2 && once.len() <= t.len());
            prop_assert_eq!(once.points(), &t.points()[..once.len()]);
            prop_assert_eq!(kinematic_clip(&once, &cfg), once);
        }

        #[test]
        fn window_one_unclipped_means_pass(t in arb_traj()) {
            let cfg = KinematicConfig { window: 1, ..KinematicConfig::default() };
            let check = kinematic_window_check(&t, &cfg).unwrap();
            let clipped = kinematic_clip(&t, &cfg);
            let all_ok = accel_profile(&t, None).unwrap().iter().all(|&a| cfg.admits(a));
            prop_assert_eq!(clipped.len() == t.len(), all_ok);
            if all_ok {
                prop_assert!(check.pass);
            }
        }
    }
}
