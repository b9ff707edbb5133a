//! Set-valued objects and their metrics.
//!
//! Subdifferentials and their Minkowski averages in these experiments are
//! always points, intervals, segments, or zonotopes, so everything here is
//! restricted to convex polytopes in dimension <= 2 and all metrics are
//! exact: the excess of a polytope is attained at a vertex because
//! `dist(., D)` is convex.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Tolerance for merging collinear vertices during canonicalization.
pub const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, t: f64) -> Vec2 {
        Vec2::new(self.x * t, self.y * t)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Closed interval [lo, hi]; degenerate intervals are singletons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(CoreError::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn singleton(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from a scalar to the interval.
    pub fn dist(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }
}

/// The segment {base + t * dir : t in [0,1]}; `dir` may be zero (singleton).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment2 {
    pub base: Vec2,
    pub dir: Vec2,
}

impl Segment2 {
    pub fn new(base: Vec2, dir: Vec2) -> Self {
        Segment2 { base, dir }
    }

    pub fn point(p: Vec2) -> Self {
        Segment2 {
            base: p,
            dir: Vec2::new(0.0, 0.0),
        }
    }

    pub fn end(&self) -> Vec2 {
        self.base.add(self.dir)
    }

    /// Euclidean distance from a point via projection onto the segment.
    pub fn dist(&self, p: Vec2) -> f64 {
        let len2 = self.dir.dot(self.dir);
        if len2 == 0.0 {
            return p.sub(self.base).norm();
        }
        let t = (p.sub(self.base).dot(self.dir) / len2).clamp(0.0, 1.0);
        p.sub(self.base.add(self.dir.scale(t))).norm()
    }
}

/// Convex polygon with counterclockwise vertices; one vertex represents a
/// point and two represent a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    /// Build from vertices already in CCW convex position; canonicalizes.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(CoreError::EmptySet);
        }
        let mut p = ConvexPolygon { vertices };
        p.canonicalize();
        Ok(p)
    }

    /// Convex hull of an arbitrary point set (Andrew's monotone chain).
    pub fn convex_hull(points: &[Vec2]) -> Result<Self> {
        if points.is_empty() {
            return Err(CoreError::EmptySet);
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
        pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
        if pts.len() <= 2 {
            return Self::new(pts);
        }
        let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
        for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if b.sub(a).cross(p.sub(a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop(); // closing point repeats the first
        Self::new(hull)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    fn canonicalize(&mut self) {
        // Drop duplicate and collinear vertices, then rotate so the
        // lexicographically smallest vertex comes first.
        let scale = self
            .vertices
            .iter()
            .map(|v| v.x.abs().max(v.y.abs()))
            .fold(1.0f64, f64::max);
        let tol = COLLINEAR_TOL * scale * scale;
        let mut out: Vec<Vec2> = Vec::with_capacity(self.vertices.len());
        let n = self.vertices.len();
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            if n >= 3 {
                // Keep only true corners; endpoints of a degenerate
                // (all-collinear) polygon are recovered below.
                let turn = cur.sub(prev).cross(next.sub(cur));
                if turn.abs() <= tol {
                    continue;
                }
            }
            out.push(cur);
        }
        if out.len() < 2 && n >= 2 {
            // Fully collinear input: keep the two extreme points.
            let mut pts = self.vertices.clone();
            pts.sort_by(|a, b| {
                a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap())
            });
            let first = pts[0];
            let last = pts[pts.len() - 1];
            out = if first.sub(last).norm() <= COLLINEAR_TOL * scale.max(1.0) {
                vec![first]
            } else {
                vec![first, last]
            };
        }
        // Rotate to start at the lexicographic minimum.
        let start = out
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap())
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        out.rotate_left(start);
        self.vertices = out;
    }

    /// True if the point lies inside or on the boundary.
    pub fn contains(&self, p: Vec2) -> bool {
        match self.vertices.len() {
            1 => p.sub(self.vertices[0]).norm() == 0.0,
            2 => Segment2::new(self.vertices[0], self.vertices[1].sub(self.vertices[0])).dist(p) == 0.0,
            _ => {
                let n = self.vertices.len();
                (0..n).all(|i| {
                    let a = self.vertices[i];
                    let b = self.vertices[(i + 1) % n];
                    b.sub(a).cross(p.sub(a)) >= -COLLINEAR_TOL
                })
            }
        }
    }

    /// Euclidean distance from a point; 0 inside.
    pub fn dist(&self, p: Vec2) -> f64 {
        match self.vertices.len() {
            1 => p.sub(self.vertices[0]).norm(),
            2 => Segment2::new(self.vertices[0], self.vertices[1].sub(self.vertices[0])).dist(p),
            _ => {
                if self.contains(p) {
                    return 0.0;
                }
                let n = self.vertices.len();
                (0..n)
                    .map(|i| {
                        let a = self.vertices[i];
                        let b = self.vertices[(i + 1) % n];
                        Segment2::new(a, b.sub(a)).dist(p)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| self.vertices[(i + 1) % n].sub(self.vertices[i]).norm())
            .sum()
    }
}

/// A convex set of one of the supported kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    Interval(Interval),
    Segment(Segment2),
    Polygon(ConvexPolygon),
}

impl ConvexSet {
    pub fn dim(&self) -> u8 {
        match self {
            ConvexSet::Interval(_) => 1,
            _ => 2,
        }
    }

    fn vertices_2d(&self) -> Vec<Vec2> {
        match self {
            ConvexSet::Interval(_) => unreachable!("1-D set has no 2-D vertices"),
            ConvexSet::Segment(s) => {
                if s.dir.norm() == 0.0 {
                    vec![s.base]
                } else {
                    vec![s.base, s.end()]
                }
            }
            ConvexSet::Polygon(p) => p.vertices().to_vec(),
        }
    }

    fn dist_2d(&self, p: Vec2) -> f64 {
        match self {
            ConvexSet::Interval(_) => unreachable!(),
            ConvexSet::Segment(s) => s.dist(p),
            ConvexSet::Polygon(poly) => poly.dist(p),
        }
    }
}

/// The excess `exs(C; D) = sup_{z in C} dist(z, D)`, exact for polytopes:
/// the supremum of the convex function `dist(., D)` over `C` is attained at
/// a vertex of `C`.
pub fn excess(c: &ConvexSet, d: &ConvexSet) -> Result<f64> {
    if c.dim() != d.dim() {
        return Err(CoreError::DimensionMismatch);
    }
    match (c, d) {
        (ConvexSet::Interval(a), ConvexSet::Interval(b)) => {
            Ok(d_interval(a, b))
        }
        _ => {
            let verts = c.vertices_2d();
            if verts.is_empty() {
                return Err(CoreError::EmptySet);
            }
            Ok(verts
                .into_iter()
                .map(|v| d.dist_2d(v))
                .fold(0.0f64, f64::max))
        }
    }
}

fn d_interval(a: &Interval, b: &Interval) -> f64 {
    b.dist(a.lo).max(b.dist(a.hi))
}

/// Hausdorff distance `max(exs(C; D), exs(D; C))`.
pub fn hausdorff(c: &ConvexSet, d: &ConvexSet) -> Result<f64> {
    Ok(excess(c, d)?.max(excess(d, c)?))
}

/// Hausdorff distance between intervals in closed form.
pub fn hausdorff_intervals(a: &Interval, b: &Interval) -> f64 {
    (a.lo - b.lo).abs().max((a.hi - b.hi).abs())
}

/// Exact Minkowski average `(1/n) (S_1 + ... + S_n)`.
///
/// Intervals average endpoint-wise; segments become a zonotope built from
/// the scaled generators in angular order, returned as a polygon.
pub fn minkowski_average(sets: &[ConvexSet]) -> Result<ConvexSet> {
    if sets.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let n = sets.len() as f64;
    match &sets[0] {
        ConvexSet::Interval(_) => {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for s in sets {
                match s {
                    ConvexSet::Interval(i) => {
                        lo += i.lo;
                        hi += i.hi;
                    }
                    _ => return Err(CoreError::DimensionMismatch),
                }
            }
            Ok(ConvexSet::Interval(Interval::new(lo / n, hi / n)?))
        }
        ConvexSet::Segment(_) => {
            let mut base = Vec2::new(0.0, 0.0);
            let mut generators = Vec::with_capacity(sets.len());
            for s in sets {
                match s {
                    ConvexSet::Segment(seg) => {
                        base = base.add(seg.base.scale(1.0 / n));
                        let g = seg.dir.scale(1.0 / n);
                        if g.norm() > 0.0 {
                            generators.push(g);
                        }
                    }
                    _ => return Err(CoreError::DimensionMismatch),
                }
            }
            Ok(ConvexSet::Polygon(zonotope(base, &mut generators)?))
        }
        ConvexSet::Polygon(_) => Err(CoreError::Unsupported(
            "Minkowski average of general polygons is not needed here".into(),
        )),
    }
}

/// Zonotope `base + sum_i [0,1] g_i` as a CCW polygon (<= 2m vertices).
fn zonotope(mut base: Vec2, generators: &mut Vec<Vec2>) -> Result<ConvexPolygon> {
    // Normalize generators into the upper half-plane; a flipped generator
    // shifts the base by the original since [0,1]g = g + [0,1](-g).
    for g in generators.iter_mut() {
        if g.y < 0.0 || (g.y == 0.0 && g.x < 0.0) {
            base = base.add(*g);
            *g = g.scale(-1.0);
        }
    }
    generators.sort_by(|a, b| {
        // CCW angular order in [0, pi): a before b iff cross(a, b) > 0.
        b.cross(*a).partial_cmp(&0.0).unwrap()
    });
    // Merge parallel generators.
    let mut merged: Vec<Vec2> = Vec::with_capacity(generators.len());
    for g in generators.iter() {
        if let Some(last) = merged.last_mut() {
            let tol = COLLINEAR_TOL * last.norm().max(1.0) * g.norm().max(1.0);
            if last.cross(*g).abs() <= tol {
                *last = last.add(*g);
                continue;
            }
        }
        merged.push(*g);
    }
    if merged.is_empty() {
        return ConvexPolygon::new(vec![base]);
    }
    // Walk the right chain bottom-to-top, then the left chain back down.
    let mut verts = Vec::with_capacity(2 * merged.len());
    let mut v = base;
    verts.push(v);
    for g in merged.iter() {
        v = v.add(*g);
        verts.push(v);
    }
    for g in merged.iter() {
        v = v.sub(*g);
        if verts.len() < 2 * merged.len() {
            verts.push(v);
        }
    }
    ConvexPolygon::new(verts)
}
