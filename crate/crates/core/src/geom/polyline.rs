use super::{closest_on_segment, heading, Aabb, Point2, HEADING_EPS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordered chain of at least two points.
///
/// Consecutive duplicates are allowed but flagged through
/// [`Polyline::has_repeats`].
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline<S> {
    points: Vec<Point2<S>>,
    has_repeats: bool,
}

impl<S: Scalar> Polyline<S> {
    pub fn new(points: Vec<Point2<S>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "polyline point {i} is not finite"
            )));
        }
        let has_repeats = points.windows(2).any(|w| w[0] == w[1]);
        Ok(Self { points, has_repeats })
    }

    pub fn points(&self) -> &[Point2<S>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2<S>> {
        self.points
    }

    pub fn has_repeats(&self) -> bool {
        self.has_repeats
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2<S>, Point2<S>)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn bbox(&self) -> Aabb<S> {
        Aabb::from_points(self.points.iter().copied()).expect("polyline is non-empty")
    }

    pub fn first(&self) -> Point2<S> {
        self.points[0]
    }

    pub fn last(&self) -> Point2<S> {
        self.points[self.points.len() - 1]
    }

    /// Point at arc-length `s` from the start, clamped to the ends.
    pub fn point_at(&self, s: S) -> Point2<S> {
        if s <= S::zero() {
            return self.first();
        }
        let mut acc = S::zero();
        for (a, b) in self.segments() {
            let len = a.distance(b);
            if acc + len >= s && len > S::zero() {
                return a.lerp(b, (s - acc) / len);
            }
            acc = acc + len;
        }
        self.last()
    }
}

/// Sum of Euclidean segment lengths.
pub fn arc_length<S: Scalar>(pl: &Polyline<S>) -> S {
    pl.segments().map(|(a, b)| a.distance(b)).sum()
}

/// Result of projecting a point onto a polyline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestOnPolyline<S> {
    pub foot: Point2<S>,
    /// Arc length from the polyline start to `foot`.
    pub arc_offset: S,
    pub distance: S,
    /// Heading of the segment holding `foot`.
    pub tangent_heading: S,
    pub segment: usize,
}

/// Closest point on `pl` to `p`.
///
/// Ties between segments go to the later one, so a point sitting on an
/// interior vertex reports the heading of the segment that follows it.
/// Zero-length segments are skipped; a polyline made only of them has no
/// tangent and is reported as a degenerate heading.
pub fn nearest_on_polyline<S: Scalar>(p: Point2<S>, pl: &Polyline<S>) -> Result<NearestOnPolyline<S>> {
    let eps = S::of(HEADING_EPS);
    let mut best: Option<NearestOnPolyline<S>> = None;
    let mut acc = S::zero();
    for (i, (a, b)) in pl.segments().enumerate() {
        let len = a.distance(b);
        if len > eps {
            let (foot, t) = closest_on_segment(p, a, b);
            let distance = foot.distance(p);
            if best.is_none_or(|b| distance <= b.distance) {
                best = Some(NearestOnPolyline {
                    foot,
                    arc_offset: acc + t * len,
                    distance,
                    tangent_heading: heading(b - a)?,
                    segment: i,
                });
            }
        }
        acc = acc + len;
    }
    best.ok_or(Error::DegenerateHeading {
        threshold: HEADING_EPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::segment_distance;
    use proptest::prelude::*;
    use rand_core::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn pl(pts: &[(f64, f64)]) -> Polyline<f64> {
        Polyline::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn unit(rng: &mut SplitMix64) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn rejects_short_and_nonfinite() {
        assert!(Polyline::new(vec![Point2::new(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![Point2::new(0.0, 0.0), Point2::new(f64::NAN, 0.0)]).is_err());
        assert!(pl(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).has_repeats());
    }

    #[test]
    fn arc_length_examples() {
        assert_eq!(arc_length(&pl(&[(0.0, 0.0), (3.0, 4.0)])), 5.0);
        assert_eq!(arc_length(&pl(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])), 2.0);
    }

    #[test]
    fn arc_length_matches_per_segment_sum() {
        let mut rng = SplitMix64::seed_from_u64(7);
        let pts: Vec<_> = (0..50)
            .map(|_| Point2::new(unit(&mut rng) * 100.0, unit(&mut rng) * 100.0))
            .collect();
        let mut oracle = 0.0;
        for i in 1..pts.len() {
            let dx = pts[i].x - pts[i - 1].x;
            let dy = pts[i].y - pts[i - 1].y;
            oracle += (dx * dx + dy * dy).sqrt();
        }
        let got = arc_length(&Polyline::new(pts).unwrap());
        assert!((got - oracle).abs() <= 1e-9 * oracle);
    }

    #[test]
    fn perpendicular_drop() {
        let n = nearest_on_polyline(Point2::new(3.0, 4.0), &pl(&[(0.0, 0.0), (10.0, 0.0)])).unwrap();
        assert_eq!(n.foot, Point2::new(3.0, 0.0));
        assert_eq!(n.arc_offset, 3.0);
        assert_eq!(n.tangent_heading, 0.0);
        assert_eq!(n.distance, 4.0);
    }

    #[test]
    fn vertex_takes_following_segment() {
        let line = pl(&[(0.0, 0.0), (2.0, 0.0), (2.0, 3.0)]);
        let n = nearest_on_polyline(Point2::new(2.0, 0.0), &line).unwrap();
        assert_eq!(n.arc_offset, 2.0);
        assert_eq!(n.segment, 1);
        assert_eq!(n.tangent_heading, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn all_degenerate_has_no_heading() {
        let line = pl(&[(1.0, 1.0), (1.0, 1.0)]);
        assert!(nearest_on_polyline(Point2::new(0.0, 0.0), &line).is_err());
    }

    #[test]
    fn nearest_beats_dense_sampling() {
        let mut rng = SplitMix64::seed_from_u64(11);
        for _ in 0..100 {
            let n_pts = 2 + (rng.next_u64() % 6) as usize;
            let pts: Vec<_> = (0..n_pts)
                .map(|_| Point2::new(unit(&mut rng) * 50.0, unit(&mut rng) * 50.0))
                .collect();
            let line = Polyline::new(pts.clone()).unwrap();
            let p = Point2::new(unit(&mut rng) * 60.0 - 5.0, unit(&mut rng) * 60.0 - 5.0);
            let got = nearest_on_polyline(p, &line).unwrap();
            // 10,000 samples spread uniformly by arc length.
            let total = arc_length(&line);
            let mut oracle = f64::INFINITY;
            for k in 0..10_000 {
                let q = line.point_at(total * k as f64 / 9_999.0);
                oracle = oracle.min(q.distance(p));
            }
            assert!(got.distance <= oracle + 1e-12, "{} > {}", got.distance, oracle);
            let direct = pts
                .windows(2)
                .map(|w| segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            assert!((got.distance - direct).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn arc_length_additive(
            a in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..10),
            b in proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 1..10),
        ) {
            let first = pl(&a);
            let mut tail = vec![*a.last().unwrap()];
            tail.extend(b.iter().copied());
            let second = pl(&tail);
            let mut joined = a.clone();
            joined.extend(b.iter().copied());
            let whole = arc_length(&pl(&joined));
            let parts = arc_length(&first) + arc_length(&second);
            prop_assert!((whole - parts).abs() <= 1e-9 * whole.max(1.0));
        }
    }
}
