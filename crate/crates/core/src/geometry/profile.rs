use super::{segment_distance, GeometryError, Point};
use serde::Serialize;

/// Slopes closer than this are treated as one straight line.
const CORNER_SLOPE_TOL: f64 = 1e-12;

/// Piecewise-linear Lipschitz height function `h` with `supp h = [0, d]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProfile {
    breakpoints: Vec<Point>,
    support_length: f64,
    lipschitz: f64,
}

impl BoundaryProfile {
    /// Builds a profile from `(x, y)` breakpoints.
    pub fn new(points: &[(f64, f64)]) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for i in 1..points.len() {
            if points[i].0 <= points[i - 1].0 {
                return Err(GeometryError::NonMonotoneX(i));
            }
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first.1 != 0.0 {
            return Err(GeometryError::NonZeroEndpoints(first.1));
        }
        if last.1 != 0.0 {
            return Err(GeometryError::NonZeroEndpoints(last.1));
        }
        if first.0 != 0.0 {
            return Err(GeometryError::NonZeroStart(first.0));
        }
        let breakpoints: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let lipschitz = breakpoints
            .windows(2)
            .map(|w| ((w[1].y - w[0].y) / (w[1].x - w[0].x)).abs())
            .fold(0.0, f64::max);
        Ok(Self { breakpoints, support_length: last.0, lipschitz })
    }

    /// The flat profile `h ≡ 0` on `[0, d]`.
    pub fn flat(d: f64) -> Result<Self, GeometryError> {
        Self::new(&[(0.0, 0.0), (d, 0.0)])
    }

    pub fn breakpoints(&self) -> &[Point] {
        &self.breakpoints
    }

    /// Length `d` of the support.
    pub fn support_length(&self) -> f64 {
        self.support_length
    }

    /// Lipschitz constant: the largest absolute segment slope.
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn slope(&self, segment: usize) -> f64 {
        let (a, b) = self.segment(segment);
        (b.y - a.y) / (b.x - a.x)
    }

    /// Height `h(x)`: linear interpolation on `[0, d]`, zero outside.
    pub fn height(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.support_length || x.is_nan() {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|p| p.x <= x);
        let a = self.breakpoints[idx - 1];
        let b = self.breakpoints[idx];
        a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)
    }

    /// Whether the slope jumps at breakpoint `i`, counting the flat
    /// continuation `h = 0` beyond both ends of the support.
    pub fn is_corner(&self, i: usize) -> bool {
        let n = self.breakpoints.len();
        let left = if i == 0 { 0.0 } else { self.slope(i - 1) };
        let right = if i == n - 1 { 0.0 } else { self.slope(i) };
        (left - right).abs() > CORNER_SLOPE_TOL
    }

    /// Indices of interior breakpoints where the slope jumps.
    pub fn interior_corners(&self) -> Vec<usize> {
        (1..self.breakpoints.len() - 1).filter(|&i| self.is_corner(i)).collect()
    }

    /// True when the profile has a slope discontinuity anywhere on `[0, d]`.
    pub fn has_corner(&self) -> bool {
        (0..self.breakpoints.len()).any(|i| self.is_corner(i))
    }

    pub fn is_flat(&self) -> bool {
        self.breakpoints.iter().all(|p| p.y == 0.0)
    }

    pub fn min_height(&self) -> f64 {
        self.breakpoints.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }

    pub fn max_height(&self) -> f64 {
        self.breakpoints.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Arc length of the graph over `[0, d]`.
    pub fn arc_length(&self) -> f64 {
        self.breakpoints.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn shortest_segment(&self) -> f64 {
        self.breakpoints.windows(2).map(|w| w[0].distance(w[1])).fold(f64::INFINITY, f64::min)
    }

    /// Strictly above the graph, i.e. inside `D`.
    pub fn contains(&self, p: Point) -> bool {
        p.y > self.height(p.x)
    }

    /// Euclidean distance from `p` to the whole boundary `∂D`, including the
    /// flat half-lines.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        let d = self.support_length;
        let mut best = if p.x <= 0.0 {
            p.y.abs()
        } else {
            p.distance(Point::new(0.0, 0.0))
        };
        best = best.min(if p.x >= d { p.y.abs() } else { p.distance(Point::new(d, 0.0)) });
        for w in self.breakpoints.windows(2) {
            best = best.min(segment_distance(p, w[0], w[1]));
        }
        best
    }
}
