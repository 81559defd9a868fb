//! 3D geometry kernel: vectors, segments, planes, rotations, reflections,
//! robust segment-segment distance, and small least-squares helpers.
//!
//! Everything works in plain `f64` model units. Lengths in this project are
//! normalized so that comparisons at `1e-9` absolute are meaningful.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// Default absolute comparison tolerance in model units.
pub const TOL: f64 = 1e-9;

/// A point (or vector) in 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Alias used where a value is a direction or displacement, not a location.
pub type Vec3 = Point3;

impl Point3 {
    pub const ZERO: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(self, o: Vec3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(self, o: Point3) -> Vec3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Point3) -> f64 {
        self.sub(o).norm()
    }

    /// Unit vector in the same direction. Fails on (near-)zero vectors.
    pub fn normalized(self) -> Result<Vec3, GeomError> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(GeomError::ZeroVector);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn lerp(self, o: Point3, t: f64) -> Point3 {
        self.add(o.sub(self).scale(t))
    }

    pub fn mid(self, o: Point3) -> Point3 {
        self.lerp(o, 0.5)
    }

    /// Component of `self` orthogonal to the unit vector `u`.
    pub fn reject_from_unit(self, u: Vec3) -> Vec3 {
        self.sub(u.scale(self.dot(u)))
    }
}

/// A closed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment3 {
    pub a: Point3,
    pub b: Point3,
}

impl Segment3 {
    pub fn new(a: Point3, b: Point3) -> Result<Self, GeomError> {
        if a.dist(b) < 1e-14 {
            return Err(GeomError::DegenerateSegment);
        }
        Ok(Segment3 { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        self.a.lerp(self.b, t)
    }
}

/// An oriented plane given by a point on it and a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane3 {
    pub point: Point3,
    pub unit_normal: Vec3,
}

impl Plane3 {
    pub fn new(point: Point3, normal: Vec3) -> Result<Self, GeomError> {
        let n = normal.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(GeomError::NonUnitNormal { norm: n });
        }
        Ok(Plane3 { point, unit_normal: normal })
    }

    pub fn from_point_and_dir(point: Point3, dir: Vec3) -> Result<Self, GeomError> {
        Ok(Plane3 { point, unit_normal: dir.normalized()? })
    }

    /// Signed distance from `p`, positive on the normal side.
    pub fn signed_distance(&self, p: Point3) -> f64 {
        p.sub(self.point).dot(self.unit_normal)
    }
}

/// Minimum Euclidean distance between two closed segments.
///
/// Clamped closest-point parameterization with a fallback for the
/// near-parallel case; exact arithmetic is not needed at the clearances the
/// motion generators guarantee.
pub fn segment_min_distance(s: &Segment3, t: &Segment3) -> f64 {
    let d1 = s.b.sub(s.a);
    let d2 = t.b.sub(t.a);
    let r = s.a.sub(t.a);
    let a = d1.norm2();
    let e = d2.norm2();
    let f = d2.dot(r);
    let c = d1.dot(r);
    let b = d1.dot(d2);
    let denom = a * e - b * b;

    // Closest parameters on the infinite lines, clamped into [0,1] with the
    // usual two-pass correction.
    let mut u = if denom.abs() > 1e-12 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0 // near-parallel: any point on s works as a seed
    };
    let mut v = if e > 0.0 { ((b * u + f) / e).clamp(0.0, 1.0) } else { 0.0 };
    u = if a > 0.0 { ((b * v - c) / a).clamp(0.0, 1.0) } else { 0.0 };
    v = if e > 0.0 { ((b * u + f) / e).clamp(0.0, 1.0) } else { 0.0 };
    let mut best = s.point_at(u).dist(t.point_at(v));

    // The clamped stationary point can miss an endpoint optimum in the
    // parallel/degenerate configurations; endpoint-vs-segment distances
    // cover those.
    for &(p, seg) in &[(s.a, t), (s.b, t), (t.a, s), (t.b, s)] {
        best = best.min(point_segment_distance(p, seg));
    }
    best
}

/// Distance from a point to a closed segment.
pub fn point_segment_distance(p: Point3, s: &Segment3) -> f64 {
    let d = s.b.sub(s.a);
    let t = (p.sub(s.a).dot(d) / d.norm2()).clamp(0.0, 1.0);
    p.dist(s.point_at(t))
}

/// Rotate `p` about the axis through `axis_point` with unit direction
/// `axis_dir` by `angle` radians (right-handed).
pub fn rotate_about_axis(
    p: Point3,
    axis_point: Point3,
    axis_dir: Vec3,
    angle: f64,
) -> Result<Point3, GeomError> {
    let n = axis_dir.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(GeomError::NonUnitAxis { norm: n });
    }
    Ok(axis_point.add(rotate_vec(p.sub(axis_point), axis_dir, angle)))
}

/// Rodrigues rotation of a free vector about a unit axis.
pub fn rotate_vec(v: Vec3, unit_axis: Vec3, angle: f64) -> Vec3 {
    let (sin, cos) = angle.sin_cos();
    let k = unit_axis;
    v.scale(cos)
        .add(k.cross(v).scale(sin))
        .add(k.scale(k.dot(v) * (1.0 - cos)))
}

/// Mirror `p` through `plane`.
pub fn reflect_across_plane(p: Point3, plane: &Plane3) -> Point3 {
    let d = plane.signed_distance(p);
    p.sub(plane.unit_normal.scale(2.0 * d))
}

/// Spherical interpolation between two unit vectors. Falls back to
/// normalized linear interpolation when they are nearly (anti)parallel;
/// callers that may hit the antiparallel case should pass a waypoint.
pub fn slerp_unit(a: Vec3, b: Vec3, t: f64) -> Vec3 {
    let dot = a.dot(b).clamp(-1.0, 1.0);
    if dot > 1.0 - 1e-12 {
        return a.lerp(b, t).normalized().unwrap_or(a);
    }
    if dot < -1.0 + 1e-9 {
        // Antiparallel: rotate through an arbitrary orthogonal waypoint.
        let w = orthonormal_to(a);
        let half = slerp_unit(a, w, t * 2.0);
        return if t <= 0.5 { half } else { slerp_unit(w, b, t * 2.0 - 1.0) };
    }
    let theta = dot.acos();
    let s = theta.sin();
    a.scale(((1.0 - t) * theta).sin() / s)
        .add(b.scale((t * theta).sin() / s))
}

/// Some unit vector orthogonal to `v` (which must be nonzero).
pub fn orthonormal_to(v: Vec3) -> Vec3 {
    let candidate = if v.x.abs() < 0.9 {
        Point3::new(1.0, 0.0, 0.0)
    } else {
        Point3::new(0.0, 1.0, 0.0)
    };
    candidate.reject_from_unit(v.normalized().expect("nonzero")).normalized().expect("orthogonal")
}

/// Apex of the isosceles triangle with base `a..b` and equal legs
/// `half_len`, displaced along the component of `dir_hint` orthogonal to
/// the base. `dir_hint` must not be parallel to the base.
pub fn isosceles_apex(a: Point3, b: Point3, half_len: f64, dir_hint: Vec3) -> Point3 {
    let chord = b.sub(a);
    let c2 = chord.norm2();
    let h2 = half_len * half_len - 0.25 * c2;
    // Guard tiny negative values from rounding when the chain is straight.
    let h = if h2 <= 0.0 { 0.0 } else { h2.sqrt() };
    let chord_unit = chord.scale(1.0 / c2.sqrt());
    let d = dir_hint
        .reject_from_unit(chord_unit)
        .normalized()
        .expect("fold direction parallel to chord");
    a.mid(b).add(d.scale(h))
}

// ---------------------------------------------------------------------------
// Small symmetric eigensolver + least-squares fits
// ---------------------------------------------------------------------------

/// Jacobi eigen-decomposition of a symmetric matrix (row-major `n x n`,
/// n <= 4). Returns (eigenvalues, eigenvectors as columns).
pub fn jacobi_eigen<const N: usize>(mut m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        // Largest off-diagonal element.
        let (mut p, mut q, mut max) = (0, 1, 0.0f64);
        for i in 0..N {
            for j in (i + 1)..N {
                if m[i][j].abs() > max {
                    max = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if max < 1e-14 {
            break;
        }
        let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for k in 0..N {
            let (mkp, mkq) = (m[k][p], m[k][q]);
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..N {
            let (mpk, mqk) = (m[p][k], m[q][k]);
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
        for k in 0..N {
            let (vkp, vkq) = (v[k][p], v[k][q]);
            v[k][p] = c * vkp - s * vkq;
            v[k][q] = s * vkp + c * vkq;
        }
    }
    let mut evals = [0.0; N];
    for i in 0..N {
        evals[i] = m[i][i];
    }
    (evals, v)
}

fn centroid(points: &[Point3]) -> Point3 {
    let mut c = Point3::ZERO;
    for p in points {
        c = c.add(*p);
    }
    c.scale(1.0 / points.len() as f64)
}

fn scatter(points: &[Point3], c: Point3) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for p in points {
        let d = p.sub(c);
        let v = [d.x, d.y, d.z];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += v[i] * v[j];
            }
        }
    }
    m
}

/// Best-fit plane through a point set; returns the plane and the maximum
/// absolute residual.
pub fn fit_plane(points: &[Point3]) -> (Plane3, f64) {
    let c = centroid(points);
    let (evals, evecs) = jacobi_eigen(scatter(points, c));
    let mut k = 0;
    for i in 1..3 {
        if evals[i] < evals[k] {
            k = i;
        }
    }
    let n = Point3::new(evecs[0][k], evecs[1][k], evecs[2][k])
        .normalized()
        .unwrap_or(Point3::new(0.0, 0.0, 1.0));
    let plane = Plane3 { point: c, unit_normal: n };
    let resid = points
        .iter()
        .map(|p| plane.signed_distance(*p).abs())
        .fold(0.0, f64::max);
    (plane, resid)
}

/// Best-fit line through a point set; returns (point, unit direction,
/// maximum distance of any point from the line).
pub fn fit_line(points: &[Point3]) -> (Point3, Vec3, f64) {
    let c = centroid(points);
    let (evals, evecs) = jacobi_eigen(scatter(points, c));
    let mut k = 0;
    for i in 1..3 {
        if evals[i] > evals[k] {
            k = i;
        }
    }
    let d = Point3::new(evecs[0][k], evecs[1][k], evecs[2][k])
        .normalized()
        .unwrap_or(Point3::new(1.0, 0.0, 0.0));
    let resid = points
        .iter()
        .map(|p| p.sub(c).reject_from_unit(d).norm())
        .fold(0.0, f64::max);
    (c, d, resid)
}

/// Optimal label-respecting rigid alignment (rotation + translation) of
/// `source` onto `target`, via Horn's quaternion method. Returns the RMS
/// residual after alignment.
pub fn rigid_align_rms(source: &[Point3], target: &[Point3]) -> f64 {
    assert_eq!(source.len(), target.len());
    assert!(source.len() >= 3);
    let cs = centroid(source);
    let ct = centroid(target);
    // Cross-covariance of centered sets.
    let mut s = [[0.0f64; 3]; 3];
    for (p, q) in source.iter().zip(target.iter()) {
        let a = p.sub(cs);
        let b = q.sub(ct);
        let av = [a.x, a.y, a.z];
        let bv = [b.x, b.y, b.z];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += av[i] * bv[j];
            }
        }
    }
    // Horn's 4x4 symmetric matrix; its top eigenvector is the optimal
    // rotation quaternion (proper rotation, never a reflection).
    let n = [
        [
            s[0][0] + s[1][1] + s[2][2],
            s[1][2] - s[2][1],
            s[2][0] - s[0][2],
            s[0][1] - s[1][0],
        ],
        [
            s[1][2] - s[2][1],
            s[0][0] - s[1][1] - s[2][2],
            s[0][1] + s[1][0],
            s[2][0] + s[0][2],
        ],
        [
            s[2][0] - s[0][2],
            s[0][1] + s[1][0],
            -s[0][0] + s[1][1] - s[2][2],
            s[1][2] + s[2][1],
        ],
        [
            s[0][1] - s[1][0],
            s[2][0] + s[0][2],
            s[1][2] + s[2][1],
            -s[0][0] - s[1][1] + s[2][2],
        ],
    ];
    let (evals, evecs) = jacobi_eigen(n);
    let mut k = 0;
    for i in 1..4 {
        if evals[i] > evals[k] {
            k = i;
        }
    }
    let q = [evecs[0][k], evecs[1][k], evecs[2][k], evecs[3][k]];
    let rot = quat_to_matrix(q);
    let mut sum = 0.0;
    for (p, tgt) in source.iter().zip(target.iter()) {
        let a = p.sub(cs);
        let r = Point3::new(
            rot[0][0] * a.x + rot[0][1] * a.y + rot[0][2] * a.z,
            rot[1][0] * a.x + rot[1][1] * a.y + rot[1][2] * a.z,
            rot[2][0] * a.x + rot[2][1] * a.y + rot[2][2] * a.z,
        );
        sum += r.add(ct).dist(*tgt).powi(2);
    }
    (sum / source.len() as f64).sqrt()
}

fn quat_to_matrix(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Signed volume of the tetrahedron (a, b, c, d); sign flips under
/// reflection.
pub fn signed_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    b.sub(a).cross(c.sub(a)).dot(d.sub(a)) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parallel_offset_segments() {
        let s = Segment3::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let t = Segment3::new(Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(segment_min_distance(&s, &t), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shared_endpoint_is_zero() {
        let s = Segment3::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let t = Segment3::new(Point3::new(1.0, 0.0, 0.0), Point3::new(1.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(segment_min_distance(&s, &t), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn skew_perpendicular_segments() {
        // Derived by grid brute force in tests/geom_oracle.rs as well.
        let s = Segment3::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let t = Segment3::new(Point3::new(0.0, 0.0, 1.0), Point3::new(0.0, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(segment_min_distance(&s, &t), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_segment_rejected() {
        let p = Point3::new(1.0, 2.0, 3.0);
        assert!(Segment3::new(p, p).is_err());
    }

    #[test]
    fn rotation_examples() {
        let z = Point3::new(0.0, 0.0, 1.0);
        let p = rotate_about_axis(Point3::new(1.0, 0.0, 0.0), Point3::ZERO, z, std::f64::consts::FRAC_PI_2)
            .unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-12);

        let q = rotate_about_axis(Point3::new(0.3, -0.7, 2.0), Point3::new(1.0, 1.0, 1.0), z, 0.0).unwrap();
        assert_abs_diff_eq!(q.dist(Point3::new(0.3, -0.7, 2.0)), 0.0, epsilon = 1e-12);

        let r = rotate_about_axis(Point3::new(1.0, 0.0, 0.0), Point3::ZERO, z, std::f64::consts::FRAC_PI_4)
            .unwrap();
        let s2 = 2f64.sqrt() / 2.0;
        assert_abs_diff_eq!(r.x, s2, epsilon = 1e-12);
        assert_abs_diff_eq!(r.y, s2, epsilon = 1e-12);
    }

    #[test]
    fn non_unit_axis_rejected() {
        let err = rotate_about_axis(
            Point3::new(1.0, 0.0, 0.0),
            Point3::ZERO,
            Point3::new(0.0, 0.0, 2.0),
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn reflection_examples() {
        let z0 = Plane3::new(Point3::ZERO, Point3::new(0.0, 0.0, 1.0)).unwrap();
        let p = reflect_across_plane(Point3::new(1.0, 2.0, 3.0), &z0);
        assert_abs_diff_eq!(p.z, -3.0, epsilon = 1e-12);

        let on_plane = Point3::new(4.0, -1.0, 0.0);
        assert_abs_diff_eq!(reflect_across_plane(on_plane, &z0).dist(on_plane), 0.0, epsilon = 1e-12);

        let z2 = Plane3::new(Point3::new(0.0, 0.0, 2.0), Point3::new(0.0, 0.0, 1.0)).unwrap();
        let q = reflect_across_plane(Point3::new(0.0, 0.0, 1.0), &z2);
        assert_abs_diff_eq!(q.z, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_plane_flat_points() {
        let pts: Vec<Point3> = (0..10)
            .map(|i| Point3::new(i as f64, (i * i) as f64 * 0.1, 0.0))
            .collect();
        let (_, resid) = fit_plane(&pts);
        assert!(resid < 1e-12);
    }

    #[test]
    fn fit_line_collinear_points() {
        let pts: Vec<Point3> = (0..10)
            .map(|i| Point3::new(i as f64 * 0.5, i as f64, -i as f64 * 2.0))
            .collect();
        let (_, _, resid) = fit_line(&pts);
        assert!(resid < 1e-12);
    }

    #[test]
    fn align_absorbs_rigid_motion() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let moved: Vec<Point3> = pts
            .iter()
            .map(|p| {
                rotate_about_axis(
                    *p,
                    Point3::new(0.3, 0.2, 0.1),
                    Point3::new(0.0, 1.0, 0.0),
                    0.83,
                )
                .unwrap()
                .add(Point3::new(5.0, -2.0, 7.0))
            })
            .collect();
        assert!(rigid_align_rms(&pts, &moved) < 1e-9);
    }

    #[test]
    fn align_detects_reflection() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let mirrored: Vec<Point3> = pts.iter().map(|p| Point3::new(p.x, p.y, -p.z)).collect();
        // A proper rotation cannot undo a reflection of a chiral set.
        assert!(rigid_align_rms(&pts, &mirrored) > 0.1);
    }

    #[test]
    fn signed_volume_flips_under_reflection() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(0.0, 1.0, 0.0);
        let d = Point3::new(0.0, 0.0, 1.0);
        let v = signed_volume(a, b, c, d);
        let v2 = signed_volume(a, b, c, Point3::new(0.0, 0.0, -1.0));
        assert!(v > 0.0 && v2 < 0.0);
    }
}
