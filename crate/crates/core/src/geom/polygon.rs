use super::{segment_distance, Aabb, Point2, BOUNDARY_EPS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Simple polygon without holes, stored counter-clockwise and implicitly
/// closed.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<S> {
    ring: Vec<Point2<S>>,
    bbox: Aabb<S>,
}

impl<S: Scalar> Polygon<S> {
    /// Validates and normalizes a ring. A repeated closing vertex is dropped,
    /// zero-area and self-intersecting rings are rejected, and clockwise
    /// rings are reversed.
    pub fn new(mut ring: Vec<Point2<S>>) -> Result<Self> {
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                ring.len()
            )));
        }
        if let Some(i) = ring.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "polygon vertex {i} is not finite"
            )));
        }
        let area = signed_area(&ring);
        if area == S::zero() || !area.is_finite() {
            return Err(Error::InvalidGeometry("degenerate polygon (zero area)".into()));
        }
        if let Some((i, j)) = first_self_intersection(&ring) {
            return Err(Error::InvalidGeometry(format!(
                "polygon ring is not simple: edges {i} and {j} intersect"
            )));
        }
        if area < S::zero() {
            ring.reverse();
        }
        let bbox = Aabb::from_points(ring.iter().copied()).expect("ring is non-empty");
        Ok(Self { ring, bbox })
    }

    pub fn ring(&self) -> &[Point2<S>] {
        &self.ring
    }

    pub fn bbox(&self) -> Aabb<S> {
        self.bbox
    }

    /// Positive area (the ring is counter-clockwise).
    pub fn area(&self) -> S {
        signed_area(&self.ring)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<S>, Point2<S>)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |i| (self.ring[i], self.ring[(i + 1) % n]))
    }

    pub fn contains(&self, p: Point2<S>) -> bool {
        point_in_polygon(p, self)
    }

    /// Distance from `p` to the polygon; 0 when `p` is inside.
    pub fn distance_to(&self, p: Point2<S>) -> S {
        if self.contains(p) {
            S::zero()
        } else {
            self.boundary_distance(p)
        }
    }

    pub fn boundary_distance(&self, p: Point2<S>) -> S {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(S::infinity(), S::min)
    }
}

fn signed_area<S: Scalar>(ring: &[Point2<S>]) -> S {
    let n = ring.len();
    let twice: S = (0..n)
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice / S::of(2.0)
}

fn orient<S: Scalar>(a: Point2<S>, b: Point2<S>, c: Point2<S>) -> S {
    (b - a).cross(c - a)
}

fn on_segment<S: Scalar>(a: Point2<S>, b: Point2<S>, p: Point2<S>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect<S: Scalar>(a: Point2<S>, b: Point2<S>, c: Point2<S>, d: Point2<S>) -> bool {
    let zero = S::zero();
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero))
        && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero))
    {
        return true;
    }
    (d1 == zero && on_segment(c, d, a))
        || (d2 == zero && on_segment(c, d, b))
        || (d3 == zero && on_segment(a, b, c))
        || (d4 == zero && on_segment(a, b, d))
}

fn first_self_intersection<S: Scalar>(ring: &[Point2<S>]) -> Option<(usize, usize)> {
    let n = ring.len();
    let edge = |i: usize| (ring[i], ring[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = edge(i);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent through the closing edge
            }
            let (c, d) = edge(j);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Boundary-inclusive containment: true for interior points and for points
/// within [`BOUNDARY_EPS`] of an edge.
pub fn point_in_polygon<S: Scalar>(p: Point2<S>, poly: &Polygon<S>) -> bool {
    let eps = S::of(BOUNDARY_EPS);
    if !poly.bbox.expanded(eps).contains(p) {
        return false;
    }
    if poly.edges().any(|(a, b)| segment_distance(p, a, b) <= eps) {
        return true;
    }
    // Crossing number on a horizontal ray towards +x.
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use proptest::prelude::*;
    use rand_core::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;
    use std::f64::consts::PI;

    fn poly(pts: &[(f64, f64)]) -> Polygon<f64> {
        Polygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn unit_square() -> Polygon<f64> {
        poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    fn unit(rng: &mut SplitMix64) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Convex polygon from sorted random angles on a circle.
    fn random_convex(rng: &mut SplitMix64, n: usize) -> Vec<Point2<f64>> {
        let mut angles: Vec<f64> = (0..n).map(|_| unit(rng) * 2.0 * PI).collect();
        angles.sort_by(f64::total_cmp);
        let (cx, cy, r) = (unit(rng) * 10.0, unit(rng) * 10.0, 2.0 + unit(rng) * 5.0);
        angles
            .iter()
            .map(|a| Point2::new(cx + r * a.cos(), cy + r * a.sin()))
            .collect()
    }

    /// Inside iff on the left of (or on) every counter-clockwise edge.
    fn half_plane_inside(p: Point2<f64>, ring: &[Point2<f64>]) -> bool {
        let n = ring.len();
        (0..n).all(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
        })
    }

    #[test]
    fn unit_square_examples() {
        let sq = unit_square();
        assert!(point_in_polygon(Point2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point2::new(2.0, 0.0), &sq));
        assert!(point_in_polygon(Point2::new(1.0, 0.5), &sq));
        assert!(point_in_polygon(Point2::new(0.0, 0.0), &sq));
        assert!(point_in_polygon(Point2::new(1.0 + 5e-10, 0.5), &sq));
        assert!(!point_in_polygon(Point2::new(1.0 + 1e-6, 0.5), &sq));
    }

    #[test]
    fn normalizes_orientation_and_closing_vertex() {
        let cw = poly(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(cw.ring().len(), 4);
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn rejects_degenerate_and_self_intersecting() {
        let flat = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ]);
        assert!(matches!(flat, Err(Error::InvalidGeometry(m)) if m.contains("zero area")));
        let bowtie = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.5),
        ]);
        assert!(bowtie.is_err());
    }

    #[test]
    fn distance_to_polygon() {
        let sq = unit_square();
        assert_eq!(sq.distance_to(Point2::new(0.5, 0.5)), 0.0);
        assert_eq!(sq.distance_to(Point2::new(4.0, 5.0)), 5.0);
        assert_eq!(sq.distance_to(Point2::new(0.5, -2.0)), 2.0);
    }

    #[test]
    fn convex_octagon_matches_half_plane_oracle() {
        let mut rng = SplitMix64::seed_from_u64(3);
        let ring = random_convex(&mut rng, 8);
        let p = Polygon::new(ring).unwrap();
        let mut checked = 0;
        for _ in 0..1000 {
            let q = Point2::new(unit(&mut rng) * 24.0 - 7.0, unit(&mut rng) * 24.0 - 7.0);
            if p.boundary_distance(q) <= 1e-6 {
                continue;
            }
            checked += 1;
            assert_eq!(point_in_polygon(q, &p), half_plane_inside(q, p.ring()), "{q:?}");
        }
        assert!(checked > 900);
    }

    #[test]
    fn works_for_f32() {
        let sq = Polygon::<f32>::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(sq.contains(Point2::new(1.0, 1.0)));
        assert!(!sq.contains(Point2::new(3.0, 1.0)));
    }

    proptest! {
        #[test]
        fn rigid_motion_invariance(seed in any::<u64>(), rot in -PI..PI, tx in -1e3..1e3f64, ty in -1e3..1e3f64) {
            let mut rng = SplitMix64::seed_from_u64(seed);
            let ring = random_convex(&mut rng, 6);
            let p = Polygon::new(ring.clone()).unwrap();
            let t = Vec2::new(tx, ty);
            let moved_ring: Vec<_> = ring.iter().map(|q| Point2::new(0.0, 0.0) + q.to_vec().rotate(rot) + t).collect();
            let moved = Polygon::new(moved_ring).unwrap();
            for _ in 0..50 {
                let q = Point2::new(unit(&mut rng) * 24.0 - 7.0, unit(&mut rng) * 24.0 - 7.0);
                prop_assume!(p.boundary_distance(q) > 1e-6);
                let mq = Point2::new(0.0, 0.0) + q.to_vec().rotate(rot) + t;
                prop_assert_eq!(p.contains(q), moved.contains(mq));
            }
        }
    }
}
