//! Equal-edge planar polylines and the reduced (heading) chart.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result, Vec2};

/// Relative edge spread accepted for externally supplied points.
pub const INPUT_EDGE_TOL: f64 = 1e-9;
/// Relative edge spread accepted for internally constructed curves.
pub const INTERNAL_EDGE_TOL: f64 = 1e-12;
/// `1 + cos(alpha)` below this is treated as an anti-parallel cusp.
pub const CUSP_TOL: f64 = 1e-12;

/// An ordered polyline whose edges all have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<Vec2>,
    edge_len: f64,
}

/// Constraint-free chart of equal-edge polylines.
///
/// `x_1 = base`, `x_{i+1} = x_i + edge_len * (cos h_i, sin h_i)`. Headings are
/// kept unwrapped so that neighbouring headings differ by at most `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoords {
    pub base: Vec2,
    pub edge_len: f64,
    pub headings: Vec<f64>,
}

/// Unit edge tangents and their counterclockwise normals.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFrame {
    pub tangents: Vec<Vec2>,
    pub normals: Vec<Vec2>,
}

/// Scalar summary of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub total_length: f64,
    pub gap: f64,
    /// `sum_{i=2}^{N-1} kappa_i^2`; infinite if some vertex is a cusp.
    pub bending_sum: f64,
}

fn edge_spread(points: &[Vec2]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for w in points.windows(2) {
        let e = w[1].dist(w[0]);
        min = min.min(e);
        max = max.max(e);
        sum += e;
    }
    let mean = sum / (points.len() - 1) as f64;
    let spread = if mean > 0.0 { (max - min) / mean } else { 0.0 };
    (mean, spread)
}

impl DiscreteCurve {
    /// Validate external input: at least two points, equal edges to a
    /// relative spread of [`INPUT_EDGE_TOL`], distinct endpoints.
    pub fn validate(points: Vec<Vec2>) -> Result<Self> {
        Self::validate_with_tol(points, INPUT_EDGE_TOL)
    }

    pub fn validate_with_tol(points: Vec<Vec2>, tol: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (mean, spread) = edge_spread(&points);
        if spread > tol {
            return Err(Error::UnequalEdges { spread });
        }
        let curve = DiscreteCurve {
            points,
            edge_len: mean,
        };
        if curve.gap() == 0.0 {
            return Err(Error::DegenerateGap);
        }
        Ok(curve)
    }

    /// Builds a curve whose equal-edge property holds by construction.
    pub(crate) fn from_parts(points: Vec<Vec2>, edge_len: f64) -> Self {
        debug_assert!(points.len() >= 2);
        DiscreteCurve { points, edge_len }
    }

    /// Equally spaced points on the segment from `a` to `b`.
    pub fn straight(a: Vec2, b: Vec2, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: n });
        }
        if a == b {
            return Err(Error::DegenerateGap);
        }
        let m = (n - 1) as f64;
        let points = (0..n)
            .map(|i| {
                let t = i as f64 / m;
                a + (b - a) * t
            })
            .collect::<Vec<_>>();
        let mut points = points;
        points[n - 1] = b;
        Ok(DiscreteCurve::from_parts(points, a.dist(b) / m))
    }

    #[inline]
    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    /// Number of vertices `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn edge_len(&self) -> f64 {
        self.edge_len
    }

    /// Polygonal length `(N-1) l`.
    #[inline]
    pub fn total_length(&self) -> f64 {
        (self.points.len() - 1) as f64 * self.edge_len
    }

    /// Endpoint distance `|x_1 - x_N|`.
    #[inline]
    pub fn gap(&self) -> f64 {
        self.points[0].dist(self.points[self.points.len() - 1])
    }

    /// Relative spread of the actual edge lengths.
    pub fn edge_spread(&self) -> f64 {
        edge_spread(&self.points).1
    }

    /// Unit tangent of every edge.
    pub fn tangents(&self) -> Vec<Vec2> {
        self.points
            .windows(2)
            .map(|w| (w[1] - w[0]).normalized().unwrap_or(Vec2::ZERO))
            .collect()
    }

    pub fn frame(&self) -> EdgeFrame {
        let tangents = self.tangents();
        let normals = tangents.iter().map(|t| t.rot90()).collect();
        EdgeFrame { tangents, normals }
    }

    /// Reduced coordinates with unwrapped headings.
    pub fn to_reduced(&self) -> Result<ReducedCoords> {
        if self.edge_len <= 0.0 {
            return Err(Error::ZeroEdgeLength);
        }
        let mut headings = Vec::with_capacity(self.points.len() - 1);
        let mut prev: Option<f64> = None;
        for w in self.points.windows(2) {
            let raw = (w[1] - w[0]).angle();
            let h = match prev {
                None => raw,
                Some(p) => p + math::wrap_angle(raw - p),
            };
            headings.push(h);
            prev = Some(h);
        }
        Ok(ReducedCoords {
            base: self.points[0],
            edge_len: self.edge_len,
            headings,
        })
    }

    /// Unsigned turning angles `alpha_2 .. alpha_{N-1}` in `[0, pi]`.
    pub fn turning_angles(&self) -> Result<Vec<f64>> {
        if self.points.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                got: self.points.len(),
            });
        }
        let t = self.tangents();
        Ok(t.windows(2)
            .map(|w| math::atan2(math::abs(w[0].cross(w[1])), w[0].dot(w[1])))
            .collect())
    }

    /// Signed curvature `kappa_i = (2/l) (t_{i-1} x t_i) / (1 + <t_{i-1}, t_i>)`
    /// at the interior vertices `2 .. N-1`. Positive for left turns.
    pub fn curvature(&self) -> Result<Vec<f64>> {
        if self.points.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                got: self.points.len(),
            });
        }
        if self.edge_len <= 0.0 {
            return Err(Error::ZeroEdgeLength);
        }
        let t = self.tangents();
        let scale = 2.0 / self.edge_len;
        t.windows(2)
            .enumerate()
            .map(|(k, w)| {
                let denom = 1.0 + w[0].dot(w[1]);
                if denom < CUSP_TOL {
                    Err(Error::CuspAngle { vertex: k + 1 })
                } else {
                    Ok(scale * w[0].cross(w[1]) / denom)
                }
            })
            .collect()
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        DiscreteCurve::from_parts(points, self.edge_len)
    }

    /// Apply an isometry of the plane to every vertex.
    pub fn map_isometry(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        DiscreteCurve::from_parts(self.points.iter().map(|&p| f(p)).collect(), self.edge_len)
    }

    /// Reflection across the x-axis.
    pub fn mirrored(&self) -> Self {
        self.map_isometry(|p| Vec2::new(p.x, -p.y))
    }
}

/// Length, endpoint gap and bending sum of a curve.
pub fn measures(curve: &DiscreteCurve) -> Measures {
    let bending_sum = if curve.len() < 3 {
        0.0
    } else {
        match curve.curvature() {
            Ok(k) => k.iter().map(|k| k * k).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    Measures {
        total_length: curve.total_length(),
        gap: curve.gap(),
        bending_sum,
    }
}

impl ReducedCoords {
    pub fn new(base: Vec2, edge_len: f64, headings: Vec<f64>) -> Self {
        ReducedCoords {
            base,
            edge_len,
            headings,
        }
    }

    /// Vertex count of the reconstructed curve.
    #[inline]
    pub fn n_points(&self) -> usize {
        self.headings.len() + 1
    }

    /// Number of scalar coordinates: base (2), edge length, headings.
    #[inline]
    pub fn dim(&self) -> usize {
        3 + self.headings.len()
    }

    /// Flat layout `[base_x, base_y, l, h_1, ..., h_{N-1}]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&[self.base.x, self.base.y, self.edge_len]);
        v.extend_from_slice(&self.headings);
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        ReducedCoords {
            base: Vec2::new(v[0], v[1]),
            edge_len: v[2],
            headings: v[3..].to_vec(),
        }
    }

    /// Points `x_1 .. x_N`.
    pub fn points(&self) -> Vec<Vec2> {
        let mut pts = Vec::with_capacity(self.n_points());
        let mut p = self.base;
        pts.push(p);
        for &h in &self.headings {
            p += Vec2::from_angle(h) * self.edge_len;
            pts.push(p);
        }
        pts
    }

    /// Reconstruct the curve. The result has equal edges by construction.
    pub fn to_curve(&self) -> DiscreteCurve {
        DiscreteCurve::from_parts(self.points(), self.edge_len)
    }
}
