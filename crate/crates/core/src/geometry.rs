//! Exact geometric primitives: points, width-one tubes, floor lines and the
//! box families used for counting.
//!
//! Membership tests evaluate the defining inequalities directly in `f64`
//! with no tolerance. Lattice generators only emit exactly representable
//! integers, so every lattice count is exact; boundary behavior follows the
//! documented open/closed conventions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the closed first quadrant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0 {
            Ok(Point { x, y })
        } else {
            Err(Error::InvalidPoint { x, y })
        }
    }

    /// Lattice point; always valid.
    pub fn lattice(x: u64, y: u64) -> Self {
        Point {
            x: x as f64,
            y: y as f64,
        }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Unit cell `(floor x, floor y)` holding the point.
    pub fn cell(&self) -> (i64, i64) {
        (self.x.floor() as i64, self.y.floor() as i64)
    }
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    pub fn is_empty(&self) -> bool {
        !(self.x_min <= self.x_max && self.y_min <= self.y_max)
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x_min: self.x_min.max(other.x_min),
            x_max: self.x_max.min(other.x_max),
            y_min: self.y_min.max(other.y_min),
            y_max: self.y_max.min(other.y_max),
        }
    }

    pub(crate) fn around(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first.x, first.x, first.y, first.y);
        for p in it {
            r.x_min = r.x_min.min(p.x);
            r.x_max = r.x_max.max(p.x);
            r.y_min = r.y_min.min(p.y);
            r.y_max = r.y_max.max(p.y);
        }
        Some(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Edges `y = -x/u + c`; the perpendicular through the origin has slope `u`.
    Standard,
    /// `v < y <= v + 1`, the `u = infinity` member of the family.
    Horizontal,
}

/// Strip of perpendicular width exactly one:
///
/// `-(1/u) x + v sqrt(1 + 1/u^2) < y <= -(1/u) x + (v + 1) sqrt(1 + 1/u^2)`.
///
/// The lower edge is open and the upper edge closed, so the tubes
/// `{t(u, v + k) : k in Z}` tile the plane. `u` may be negative: those are
/// the tubes whose edges rise to the right into the first quadrant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    u: f64,
    v: f64,
    orientation: Orientation,
}

impl Tube {
    pub fn standard(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && u != 0.0) {
            return Err(Error::invalid("u", format!("tube slope parameter must be finite and non-zero, got {u}")));
        }
        if !v.is_finite() {
            return Err(Error::invalid("v", format!("tube offset must be finite, got {v}")));
        }
        Ok(Tube {
            u,
            v,
            orientation: Orientation::Standard,
        })
    }

    pub fn horizontal(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::invalid("v", format!("tube offset must be finite, got {v}")));
        }
        Ok(Tube {
            u: f64::INFINITY,
            v,
            orientation: Orientation::Horizontal,
        })
    }

    /// Tube whose edges have slope `m`, i.e. `u = -1/m`. With `v = -1/2` the
    /// line `y = m x` runs down the middle of the tube.
    pub fn along_slope(m: f64, v: f64) -> Result<Self> {
        if m == 0.0 {
            return Tube::horizontal(v);
        }
        Tube::standard(-1.0 / m, v)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Same slope, offset replaced.
    pub fn with_offset(&self, v: f64) -> Tube {
        Tube { v, ..*self }
    }

    /// Slope of the edge lines (`0` for horizontal tubes).
    pub fn edge_slope(&self) -> f64 {
        match self.orientation {
            Orientation::Standard => -1.0 / self.u,
            Orientation::Horizontal => 0.0,
        }
    }

    /// `sqrt(1 + 1/u^2)`, the vertical extent of the tube.
    pub fn vertical_extent(&self) -> f64 {
        match self.orientation {
            Orientation::Standard => (1.0 + 1.0 / (self.u * self.u)).sqrt(),
            Orientation::Horizontal => 1.0,
        }
    }

    /// Intercepts `(lower, upper)` of the two edge lines at `x = 0`.
    pub fn intercepts(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::Standard => {
                let s = self.vertical_extent();
                (self.v * s, (self.v + 1.0) * s)
            }
            Orientation::Horizontal => (self.v, self.v + 1.0),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self.orientation {
            Orientation::Standard => {
                let s = self.vertical_extent();
                let base = -p.x / self.u;
                base + self.v * s < p.y && p.y <= base + (self.v + 1.0) * s
            }
            Orientation::Horizontal => self.v < p.y && p.y <= self.v + 1.0,
        }
    }

    /// Perpendicular distance between the edge lines, measured from the
    /// lower edge's `x = 0` point to the upper edge line.
    pub fn edge_distance(&self) -> f64 {
        let (lo, hi) = self.intercepts();
        let k = self.edge_slope();
        (hi - lo).abs() / k.hypot(1.0)
    }

    /// Unit vector along the tube, pointing upward (rightward when
    /// horizontal).
    pub fn direction(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::Standard => {
                let k = -1.0 / self.u;
                let n = k.hypot(1.0);
                if k >= 0.0 {
                    (1.0 / n, k / n)
                } else {
                    (-1.0 / n, -k / n)
                }
            }
            Orientation::Horizontal => (1.0, 0.0),
        }
    }

    /// Unit normal; the tube is `v < p . normal <= v + 1`.
    pub fn normal(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::Standard => {
                let s = self.vertical_extent();
                (1.0 / (self.u * s), 1.0 / s)
            }
            Orientation::Horizontal => (0.0, 1.0),
        }
    }

    /// Tube-aligned coordinates `(s, t)`: `s` along [`Tube::direction`] from
    /// the perpendicular through the origin, `t` along [`Tube::normal`].
    pub fn frame(&self, p: &Point) -> (f64, f64) {
        let (dx, dy) = self.direction();
        let (nx, ny) = self.normal();
        (p.x * dx + p.y * dy, p.x * nx + p.y * ny)
    }
}

/// The broken line `y = floor(u x + v)` for `u > 0`, `v >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorLine {
    u: f64,
    v: f64,
}

impl FloorLine {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::invalid("u", format!("floor-line slope must be positive, got {u}")));
        }
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid("v", format!("floor-line intercept must be non-negative, got {v}")));
        }
        Ok(FloorLine { u, v })
    }

    /// Construction without the `v >= 0` check; used by sweeps whose
    /// parameter boxes are validated up front.
    pub(crate) fn unchecked(u: f64, v: f64) -> Self {
        FloorLine { u, v }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn height_at(&self, x: f64) -> f64 {
        (self.u * x + self.v).floor()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.y == self.height_at(p.x)
    }

    /// Width-one tube with edges of slope `u` containing the whole broken
    /// line: its upper edge is `y = u x + v`.
    pub fn enclosing_tube(&self) -> Tube {
        let s = self.u.hypot(1.0);
        Tube {
            u: -1.0 / self.u,
            v: self.v / s - 1.0,
            orientation: Orientation::Standard,
        }
    }
}

/// Box families for counting queries. All boxes are closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoxSpec {
    /// `[0, l]^2`.
    FirstQuadrant { size: f64 },
    /// `[-l, l]^2`.
    Centered { size: f64 },
    /// Square of side `n` aligned with `tube`: it starts at the
    /// perpendicular through the origin, extends `n` along the tube and is
    /// symmetric about the tube's center line.
    Slanted { size: f64, tube: Tube },
    /// `[x0, x0 + l] x [y0, y0 + l]`, used by the counting-dimension search.
    Window { x0: f64, y0: f64, size: f64 },
}

impl BoxSpec {
    pub fn first_quadrant(size: f64) -> Self {
        BoxSpec::FirstQuadrant { size }
    }

    pub fn size(&self) -> f64 {
        match *self {
            BoxSpec::FirstQuadrant { size }
            | BoxSpec::Centered { size }
            | BoxSpec::Slanted { size, .. }
            | BoxSpec::Window { size, .. } => size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let size = self.size();
        if !(size.is_finite() && size >= 0.0) {
            return Err(Error::invalid("size", format!("box size must be finite and non-negative, got {size}")));
        }
        if let BoxSpec::Window { x0, y0, .. } = *self {
            if !(x0.is_finite() && y0.is_finite()) {
                return Err(Error::invalid("window", "window corner must be finite"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            BoxSpec::FirstQuadrant { size } => {
                0.0 <= p.x && p.x <= size && 0.0 <= p.y && p.y <= size
            }
            BoxSpec::Centered { size } => p.x.abs() <= size && p.y.abs() <= size,
            BoxSpec::Slanted { size, tube } => {
                let (s, t) = tube.frame(p);
                let center = tube.v() + 0.5;
                0.0 <= s && s <= size && (t - center).abs() <= size / 2.0
            }
            BoxSpec::Window { x0, y0, size } => {
                x0 <= p.x && p.x <= x0 + size && y0 <= p.y && p.y <= y0 + size
            }
        }
    }

    /// Smallest axis rectangle containing the box (padded by a few ulps for
    /// slanted boxes, whose corners are rounded).
    pub fn bounding_rect(&self) -> Rect {
        match *self {
            BoxSpec::FirstQuadrant { size } => Rect::new(0.0, size, 0.0, size),
            BoxSpec::Centered { size } => Rect::new(-size, size, -size, size),
            BoxSpec::Window { x0, y0, size } => Rect::new(x0, x0 + size, y0, y0 + size),
            BoxSpec::Slanted { size, tube } => {
                let corners = self.slanted_corners(size, &tube);
                let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for (x, y) in corners {
                    r.x_min = r.x_min.min(x);
                    r.x_max = r.x_max.max(x);
                    r.y_min = r.y_min.min(y);
                    r.y_max = r.y_max.max(y);
                }
                let pad = 1e-9 * (1.0 + size + r.x_max.abs().max(r.y_max.abs()));
                Rect::new(r.x_min - pad, r.x_max + pad, r.y_min - pad, r.y_max + pad)
            }
        }
    }

    /// Corner coordinates of a slanted box, in boundary order.
    pub fn corners(&self) -> [(f64, f64); 4] {
        match *self {
            BoxSpec::Slanted { size, tube } => {
                let c = self.slanted_corners(size, &tube);
                [c[0], c[2], c[3], c[1]]
            }
            _ => {
                let r = self.bounding_rect();
                [(r.x_min, r.y_min), (r.x_max, r.y_min), (r.x_max, r.y_max), (r.x_min, r.y_max)]
            }
        }
    }

    fn slanted_corners(&self, size: f64, tube: &Tube) -> [(f64, f64); 4] {
        let (dx, dy) = tube.direction();
        let (nx, ny) = tube.normal();
        let c = tube.v() + 0.5;
        let mut out = [(0.0, 0.0); 4];
        for (i, (s, t)) in [(0.0, c - size / 2.0), (0.0, c + size / 2.0), (size, c - size / 2.0), (size, c + size / 2.0)]
            .into_iter()
            .enumerate()
        {
            out[i] = (s * dx + t * nx, s * dy + t * ny);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y).unwrap()
    }

    #[test]
    fn point_domain() {
        assert!(Point::new(-1.0, 0.0).is_err());
        assert!(Point::new(0.0, f64::NAN).is_err());
        assert!(Point::new(0.0, f64::INFINITY).is_err());
        assert_eq!(Point::lattice(3, 4).cell(), (3, 4));
        assert_eq!(pt(2.5, 0.999).cell(), (2, 0));
    }

    #[test]
    fn tube_boundary_conventions() {
        let t = Tube::standard(1.0, 0.0).unwrap();
        // 0 < 1 <= sqrt 2
        assert!(t.contains(&pt(0.0, 1.0)));
        // lower edge is open
        assert!(!t.contains(&pt(0.0, 0.0)));
        // upper edge is closed: y = sqrt(2) at x = 0
        assert!(t.contains(&pt(0.0, 2f64.sqrt())));
    }

    #[test]
    fn tube_edges_constructed_analytically() {
        let t = Tube::standard(2.0, 3.0).unwrap();
        let s = (1.0f64 + 0.25).sqrt();
        for x in [0.0, 1.0, 2.5, 4.0] {
            // upper edge line: y = -x/2 + 4 s
            let y_up = -x / 2.0 + 4.0 * s;
            assert!(t.contains(&pt(x, y_up)), "upper edge at x={x}");
            let y_low = -x / 2.0 + 3.0 * s;
            assert!(!t.contains(&pt(x, y_low - 1e-6)), "below lower edge at x={x}");
            assert!(t.contains(&pt(x, y_low + 1e-6)));
        }
    }

    #[test]
    fn horizontal_tube() {
        let t = Tube::horizontal(2.0).unwrap();
        assert!(!t.contains(&pt(10.0, 2.0)));
        assert!(t.contains(&pt(10.0, 3.0)));
        assert!(!t.contains(&pt(10.0, 3.0001)));
        assert_eq!(t.edge_distance(), 1.0);
    }

    #[test]
    fn tube_width_is_one() {
        for (u, v) in [(1.0, 0.0), (1000.0, -5.0), (0.01, 17.0), (-3.0, 2.0)] {
            let w = Tube::standard(u, v).unwrap().edge_distance();
            assert!((w - 1.0).abs() < 1e-9, "u={u} v={v} width={w}");
        }
    }

    #[test]
    fn tube_rejects_degenerate_slope() {
        assert!(Tube::standard(0.0, 1.0).is_err());
        assert!(Tube::standard(f64::NAN, 1.0).is_err());
        assert!(Tube::horizontal(f64::INFINITY).is_err());
    }

    #[test]
    fn frame_matches_edge_inequalities() {
        let t = Tube::standard(-0.7, 1.3).unwrap();
        let (nx, ny) = t.normal();
        assert!((nx.hypot(ny) - 1.0).abs() < 1e-15);
        let (dx, dy) = t.direction();
        assert!((dx * nx + dy * ny).abs() < 1e-15);
        assert!(dy > 0.0);
        let p = pt(3.0, 9.0);
        let (_, tc) = t.frame(&p);
        assert_eq!(t.contains(&p), 1.3 < tc && tc <= 2.3);
    }

    #[test]
    fn floor_line_basics() {
        let l = FloorLine::new(0.4, 0.2).unwrap();
        assert_eq!(l.height_at(2.0), 1.0);
        assert_eq!(l.height_at(3.0), 1.0);
        assert!(FloorLine::new(0.0, 1.0).is_err());
        assert!(FloorLine::new(1.0, -1.0).is_err());
    }

    #[test]
    fn floor_line_inside_enclosing_tube() {
        for &(u, v) in &[(0.3, 0.0), (1.0, 0.5), (7.25, 3.0), (0.01, 10.0)] {
            let l = FloorLine::new(u, v).unwrap();
            let tube = l.enclosing_tube();
            assert!((tube.edge_distance() - 1.0).abs() < 1e-12);
            for i in 0..400 {
                let x = i as f64 * 0.37;
                assert!(tube.contains(&Point { x, y: l.height_at(x) }), "u={u} v={v} x={x}");
            }
        }
    }

    #[test]
    fn degenerate_and_slanted_boxes() {
        let b = BoxSpec::first_quadrant(0.0);
        assert!(b.contains(&pt(0.0, 0.0)));
        assert!(!b.contains(&pt(0.0, 1.0)));

        let tube = Tube::along_slope(1.0, -0.5).unwrap();
        let sb = BoxSpec::Slanted { size: 4.0, tube };
        let r = sb.bounding_rect();
        // points on the diagonal with arc length <= 4
        assert!(sb.contains(&pt(2.0, 2.0)));
        assert!(!sb.contains(&pt(3.0, 3.0)));
        assert!(r.contains(&pt(2.0, 2.0)));
        assert!(r.x_min < 0.0 && r.x_max > 2.8);
    }
}
