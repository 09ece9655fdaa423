//! Exact shapes and their polygonization.

use std::f64::consts::PI;

pub type Point = [f64; 2];

/// Minimum vertex count of a full circle.
pub const MIN_CIRCLE_SEGMENTS: usize = 40;

/// A closed planar shape in meters.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Simple polygon, counterclockwise.
    Polygon(Vec<Point>),
    Circle {
        center: Point,
        radius: f64,
    },
    /// Region between two radii and two angles (radians, `theta0 < theta1`).
    AnnularSector {
        center: Point,
        r_inner: f64,
        r_outer: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Shape {
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let (xa, xb) = (x0.min(x1), x0.max(x1));
        let (ya, yb) = (y0.min(y1), y0.max(y1));
        Shape::Polygon(vec![[xa, ya], [xb, ya], [xb, yb], [xa, yb]])
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        Shape::Circle { center, radius }
    }

    /// Exact area.
    pub fn area(&self) -> f64 {
        match self {
            Shape::Polygon(p) => polygon_area(p),
            Shape::Circle { radius, .. } => PI * radius * radius,
            Shape::AnnularSector {
                r_inner,
                r_outer,
                theta0,
                theta1,
                ..
            } => 0.5 * (theta1 - theta0) * (r_outer * r_outer - r_inner * r_inner),
        }
    }

    /// Axis-aligned bounding box `[min, max]`.
    pub fn bbox(&self) -> [Point; 2] {
        match self {
            Shape::Polygon(p) => points_bbox(p),
            Shape::Circle { center, radius } => [
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ],
            Shape::AnnularSector { .. } => points_bbox(&self.outline(1e-4 * self.size_hint())),
        }
    }

    fn size_hint(&self) -> f64 {
        match self {
            Shape::Polygon(p) => {
                let b = points_bbox(p);
                (b[1][0] - b[0][0]).max(b[1][1] - b[0][1])
            }
            Shape::Circle { radius, .. } => *radius,
            Shape::AnnularSector { r_outer, .. } => *r_outer,
        }
    }

    /// Counterclockwise polygon whose edges deviate from the exact boundary by at most
    /// `max_sagitta`. Circle vertices sit at angles 2πk/n with n a multiple of 4.
    pub fn outline(&self, max_sagitta: f64) -> Vec<Point> {
        match self {
            Shape::Polygon(p) => {
                if polygon_area(p) < 0.0 {
                    p.iter().rev().copied().collect()
                } else {
                    p.clone()
                }
            }
            Shape::Circle { center, radius } => {
                let n = circle_segments(*radius, max_sagitta);
                (0..n)
                    .map(|k| polar(*center, *radius, 2.0 * PI * k as f64 / n as f64))
                    .collect()
            }
            Shape::AnnularSector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => {
                let span = theta1 - theta0;
                let no = arc_segments(*r_outer, span, max_sagitta);
                let mut pts = Vec::with_capacity(no + 2);
                for k in 0..=no {
                    pts.push(polar(*center, *r_outer, arc_angle(*theta0, *theta1, k, no)));
                }
                if *r_inner > 0.0 {
                    let ni = arc_segments(*r_inner, span, max_sagitta);
                    for k in (0..=ni).rev() {
                        pts.push(polar(*center, *r_inner, arc_angle(*theta0, *theta1, k, ni)));
                    }
                } else {
                    pts.push(*center);
                }
                pts
            }
        }
    }

    /// Like [`Shape::outline`], but circle vertices sit on the radius at which the polygon
    /// encloses exactly πr², so meshed conductor areas carry no polygonization deficit.
    pub fn mesh_outline(&self, max_sagitta: f64) -> Vec<Point> {
        match self {
            Shape::Circle { center, radius } => {
                let n = circle_segments(*radius, max_sagitta);
                let step = 2.0 * PI / n as f64;
                let r = radius * (step / step.sin()).sqrt();
                (0..n).map(|k| polar(*center, r, step * k as f64)).collect()
            }
            _ => self.outline(max_sagitta),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        match self {
            Shape::Polygon(p) => Shape::Polygon(p.iter().map(|q| [q[0] + dx, q[1] + dy]).collect()),
            Shape::Circle { center, radius } => Shape::Circle {
                center: [center[0] + dx, center[1] + dy],
                radius: *radius,
            },
            Shape::AnnularSector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => Shape::AnnularSector {
                center: [center[0] + dx, center[1] + dy],
                r_inner: *r_inner,
                r_outer: *r_outer,
                theta0: *theta0,
                theta1: *theta1,
            },
        }
    }

    /// Mirror image across the line x = 0.
    pub fn mirrored_x(&self) -> Self {
        match self {
            Shape::Polygon(p) => Shape::Polygon(p.iter().rev().map(|q| [-q[0], q[1]]).collect()),
            Shape::Circle { center, radius } => Shape::Circle {
                center: [-center[0], center[1]],
                radius: *radius,
            },
            Shape::AnnularSector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => Shape::AnnularSector {
                center: [-center[0], center[1]],
                r_inner: *r_inner,
                r_outer: *r_outer,
                theta0: PI - theta1,
                theta1: PI - theta0,
            },
        }
    }
}

fn arc_angle(t0: f64, t1: f64, k: usize, n: usize) -> f64 {
    if k == 0 {
        t0
    } else if k == n {
        t1
    } else {
        t0 + (t1 - t0) * k as f64 / n as f64
    }
}

/// Point at angle `theta`, reduced to [0, 2π) so that equal directions give equal points.
pub fn polar(c: Point, r: f64, theta: f64) -> Point {
    let t = theta.rem_euclid(2.0 * PI);
    [c[0] + r * t.cos(), c[1] + r * t.sin()]
}

/// Vertex count for a full circle: at least [`MIN_CIRCLE_SEGMENTS`], a multiple of 4, and
/// chord sagitta no larger than `max_sagitta`.
pub fn circle_segments(radius: f64, max_sagitta: f64) -> usize {
    let mut n = MIN_CIRCLE_SEGMENTS;
    if max_sagitta > 0.0 && max_sagitta < radius {
        let half = (1.0 - max_sagitta / radius).acos();
        let need = (PI / half).ceil();
        if need.is_finite() && need as usize > n {
            n = need as usize;
        }
    }
    n.div_ceil(4) * 4
}

/// Segment count for an arc of `span` radians under the same sagitta rule.
pub fn arc_segments(radius: f64, span: f64, max_sagitta: f64) -> usize {
    let full = circle_segments(radius, max_sagitta) as f64;
    ((span / (2.0 * PI) * full).ceil() as usize).max(2)
}

/// Signed area, positive for counterclockwise.
pub fn polygon_area(p: &[Point]) -> f64 {
    let n = p.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = p[i];
        let b = p[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

pub fn points_bbox(p: &[Point]) -> [Point; 2] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for q in p {
        for k in 0..2 {
            lo[k] = lo[k].min(q[k]);
            hi[k] = hi[k].max(q[k]);
        }
    }
    [lo, hi]
}

/// Crossing-number test; points exactly on the boundary may go either way.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// True when the open segments cross at a single interior point of both.
pub fn segments_properly_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let scale = (dist(a, b) * dist(c, d)).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    ((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) && ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol))
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_properly_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Minimum distance between two closed polylines (boundaries only).
pub fn polyline_distance(p: &[Point], q: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        for j in 0..q.len() {
            let (c, d) = (q[j], q[(j + 1) % q.len()]);
            best = best.min(segment_segment_distance(a, b, c, d));
        }
    }
    best
}

/// True when the interiors of two simple polygons intersect.
pub fn polygons_overlap(p: &[Point], q: &[Point]) -> bool {
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        for j in 0..q.len() {
            let (c, d) = (q[j], q[(j + 1) % q.len()]);
            if segments_properly_cross(a, b, c, d) {
                return true;
            }
        }
    }
    // containment, tested at an interior point near the first edge midpoint
    interior_probe(p).is_some_and(|x| point_in_polygon(x, q))
        || interior_probe(q).is_some_and(|x| point_in_polygon(x, p))
}

/// A point strictly inside the polygon, next to its longest edge.
pub fn interior_probe(p: &[Point]) -> Option<Point> {
    let area = polygon_area(p);
    if area == 0.0 {
        return None;
    }
    let n = p.len();
    let (mut best, mut len) = (0, 0.0);
    for i in 0..n {
        let l = dist(p[i], p[(i + 1) % n]);
        if l > len {
            best = i;
            len = l;
        }
    }
    let (a, b) = (p[best], p[(best + 1) % n]);
    let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let sign = area.signum();
    let nrm = [-(b[1] - a[1]) / len * sign, (b[0] - a[0]) / len * sign];
    let mut step = 1e-3 * len;
    for _ in 0..30 {
        let x = [m[0] + nrm[0] * step, m[1] + nrm[1] * step];
        if point_in_polygon(x, p) {
            return Some(x);
        }
        step *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_vertex_rules() {
        let c = Shape::circle([0.0, 0.0], 1.0);
        let o = c.outline(0.5);
        assert_eq!(o.len(), 40);
        let o = c.outline(1e-4);
        assert_eq!(o.len() % 4, 0);
        let n = o.len();
        let sag = 1.0 - (PI / n as f64).cos();
        assert!(sag <= 1e-4);
        assert!(o[n / 4][0].abs() < 1e-15);
        assert!(polygon_area(&o) > 0.0);
        let m = c.mesh_outline(0.5);
        assert_eq!(m.len(), 40);
        assert!((polygon_area(&m) - PI).abs() < 1e-14);
    }

    #[test]
    fn sector_area_and_outline() {
        let s = Shape::AnnularSector {
            center: [0.0, 0.0],
            r_inner: 1.0,
            r_outer: 2.0,
            theta0: 0.0,
            theta1: PI / 2.0,
        };
        assert!((s.area() - 0.75 * PI).abs() < 1e-15);
        let o = s.outline(1e-3);
        assert!(polygon_area(&o) > 0.0);
        assert!((polygon_area(&o) / s.area() - 1.0).abs() < 2e-3);
    }

    #[test]
    fn distances() {
        assert_eq!(point_segment_distance([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]), 1.0);
        assert_eq!(point_segment_distance([3.0, 0.0], [-1.0, 0.0], [1.0, 0.0]), 2.0);
        assert!(segments_properly_cross([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]));
        assert!(!segments_properly_cross([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 1.0]));
        let a = Shape::rect(0.0, 0.0, 1.0, 1.0).outline(0.0);
        let b = Shape::rect(1.0, 0.0, 2.0, 1.0).outline(0.0);
        assert!(!polygons_overlap(&a, &b));
        let c = Shape::rect(0.5, 0.5, 0.7, 0.7).outline(0.0);
        assert!(polygons_overlap(&a, &c));
    }
}
