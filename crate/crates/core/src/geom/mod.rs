//! Piecewise-linear 2D geometry: points, vectors, polylines, polygons, a
//! uniform-grid spatial index and occupancy rasterization.
//!
//! Everything here is a pure function over immutable values. Coordinates are
//! meters in a map-local frame.

mod grid;
mod polygon;
mod polyline;
mod raster;

use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use grid::{GridIndex, Shape, DEFAULT_CELL_SIZE};
pub use polygon::{point_in_polygon, Polygon};
pub use polyline::{arc_length, nearest_on_polyline, NearestOnPolyline, Polyline};
pub use raster::{rasterize_occupancy, Cell};

/// Half-width of the band around a polygon boundary that counts as inside.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Vectors shorter than this have no defined heading.
pub const HEADING_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point2<S> {
    #[inline]
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    /// Like [`Point2::new`] but rejects NaN and infinite coordinates.
    pub fn try_new(x: S, y: S) -> Result<Self> {
        let p = Self { x, y };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::InvalidGeometry(format!(
                "non-finite coordinate ({x}, {y})"
            )))
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn distance(self, other: Self) -> S {
        (self - other).norm()
    }

    /// Point at parameter `t` on the segment `self → other`.
    #[inline]
    pub fn lerp(self, other: Self, t: S) -> Self {
        self + (other - self) * t
    }

    #[inline]
    pub fn to_vec(self) -> Vec2<S> {
        Vec2::new(self.x, self.y)
    }

    pub fn cast<T: Scalar>(self) -> Point2<T> {
        Point2::new(T::of(self.x.as_f64()), T::of(self.y.as_f64()))
    }
}

impl<S: Scalar> Sub for Point2<S> {
    type Output = Vec2<S>;
    #[inline]
    fn sub(self, rhs: Self) -> Vec2<S> {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<S: Scalar> Add<Vec2<S>> for Point2<S> {
    type Output = Point2<S>;
    #[inline]
    fn add(self, rhs: Vec2<S>) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<S: Scalar> Sub<Vec2<S>> for Point2<S> {
    type Output = Point2<S>;
    #[inline]
    fn sub(self, rhs: Vec2<S>) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

// Points travel as `[x, y]` in every file format.
impl<S: Scalar> Serialize for Point2<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Point2<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[S; 2]>::deserialize(deserializer)?;
        Ok(Point2::new(x, y))
    }
}

/// Displacement in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    #[inline]
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    /// Unit vector pointing along `heading` (radians from the x-axis).
    #[inline]
    pub fn from_heading(heading: S) -> Self {
        Self::new(heading.cos(), heading.sin())
    }

    #[inline]
    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }

    /// Counter-clockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: S) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > S::zero()).then(|| Self::new(self.x / n, self.y / n))
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<S: Scalar> Mul<S> for Vec2<S> {
    type Output = Self;
    #[inline]
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

fn check_heading_norm<S: Scalar>(v: Vec2<S>) -> Result<()> {
    if v.norm() > S::of(HEADING_EPS) {
        Ok(())
    } else {
        Err(Error::DegenerateHeading {
            threshold: HEADING_EPS,
        })
    }
}

/// Heading of `v` in `(-π, π]`, measured counter-clockwise from the x-axis.
pub fn heading<S: Scalar>(v: Vec2<S>) -> Result<S> {
    check_heading_norm(v)?;
    let h = v.y.atan2(v.x);
    // atan2 yields -π for (-x, -0.0); fold it onto the closed end.
    Ok(if h <= -S::PI() { S::PI() } else { h })
}

/// Unsigned angle between two vectors, in `[0, π]`.
///
/// Computed as `atan2(|a × b|, a · b)`, which is exact for parallel inputs
/// and well conditioned near 0 and π.
pub fn angle_between<S: Scalar>(a: Vec2<S>, b: Vec2<S>) -> Result<S> {
    check_heading_norm(a)?;
    check_heading_norm(b)?;
    Ok(a.cross(b).abs().atan2(a.dot(b)))
}

/// Axis-aligned box with `min <= max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<S> {
    pub min: Point2<S>,
    pub max: Point2<S>,
}

impl<S: Scalar> Aabb<S> {
    pub fn new(min: Point2<S>, max: Point2<S>) -> Self {
        Self { min, max }
    }

    /// Square of side `side` centered at `center`.
    pub fn square(center: Point2<S>, side: S) -> Self {
        let h = side / S::of(2.0);
        Self::new(
            Point2::new(center.x - h, center.y - h),
            Point2::new(center.x + h, center.y + h),
        )
    }

    pub fn from_points<I: IntoIterator<Item = Point2<S>>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Self::new(first, first), |b, p| b.including(p)))
    }

    pub fn including(self, p: Point2<S>) -> Self {
        Self::new(
            Point2::new(self.min.x.min(p.x), self.min.y.min(p.y)),
            Point2::new(self.max.x.max(p.x), self.max.y.max(p.y)),
        )
    }

    pub fn union(self, o: Self) -> Self {
        self.including(o.min).including(o.max)
    }

    pub fn expanded(self, r: S) -> Self {
        Self::new(
            Point2::new(self.min.x - r, self.min.y - r),
            Point2::new(self.max.x + r, self.max.y + r),
        )
    }

    /// Closed containment.
    pub fn contains(&self, p: Point2<S>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersects(&self, o: &Self) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn intersection(&self, o: &Self) -> Option<Self> {
        self.intersects(o).then(|| {
            Self::new(
                Point2::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y)),
                Point2::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y)),
            )
        })
    }

    pub fn width(&self) -> S {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> S {
        self.max.y - self.min.y
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance_to(&self, p: Point2<S>) -> S {
        let dx = (self.min.x - p.x).max(p.x - self.max.x).max(S::zero());
        let dy = (self.min.y - p.y).max(p.y - self.max.y).max(S::zero());
        dx.hypot(dy)
    }
}

/// Closest point to `p` on segment `a → b` and its parameter in `[0, 1]`.
pub(crate) fn closest_on_segment<S: Scalar>(p: Point2<S>, a: Point2<S>, b: Point2<S>) -> (Point2<S>, S) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == S::zero() {
        return (a, S::zero());
    }
    let t = ((p - a).dot(ab) / len2).max(S::zero()).min(S::one());
    (a.lerp(b, t), t)
}

pub(crate) fn segment_distance<S: Scalar>(p: Point2<S>, a: Point2<S>, b: Point2<S>) -> S {
    closest_on_segment(p, a, b).0.distance(p)
}
