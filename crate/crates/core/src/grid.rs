//! Regular 2-D grids: geometry, the plain-text file format, bilinear vector
//! samples and C1 bicubic scalar samples.
//!
//! File layout (shared by flow fields and wake tables):
//!
//! ```text
//! nx ny x0 y0 dx dy
//! <one sample per line, row-major, x varying fastest>
//! ```
//!
//! Vector grids store `u v` per line, scalar grids a single value. Values are
//! written with the shortest round-trip representation, so reloading is exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::{Real, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub origin: Vec2<T>,
    pub spacing: Vec2<T>,
    pub nx: usize,
    pub ny: usize,
}

/// Position of a coordinate inside a grid axis.
#[derive(Debug, Clone, Copy)]
struct AxisHit<T> {
    cell: usize,
    t: T,
    /// Query lay outside and was clamped onto the edge.
    clamped: bool,
}

impl<T: Real> GridSpec<T> {
    pub fn new(origin: Vec2<T>, spacing: Vec2<T>, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Grid(format!("need at least 2x2 nodes, got {nx}x{ny}")));
        }
        if !(spacing[0] > T::zero() && spacing[1] > T::zero()) || !spacing.iter().all(|s| s.is_finite()) {
            return Err(Error::Grid(format!(
                "axes must be strictly increasing (dx = {}, dy = {})",
                spacing[0], spacing[1]
            )));
        }
        if !origin.iter().all(|o| o.is_finite()) {
            return Err(Error::Grid("non-finite origin".into()));
        }
        Ok(GridSpec { origin, spacing, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2<T> {
        [self.origin[0] + T::lit(i as f64) * self.spacing[0], self.origin[1] + T::lit(j as f64) * self.spacing[1]]
    }

    pub fn extent(&self) -> (Vec2<T>, Vec2<T>) {
        (self.origin, self.node(self.nx - 1, self.ny - 1))
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        let (lo, hi) = self.extent();
        p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    fn locate_axis(&self, x: T, axis: usize) -> AxisHit<T> {
        let n = if axis == 0 { self.nx } else { self.ny };
        let s = (x - self.origin[axis]) / self.spacing[axis];
        let last = T::lit((n - 1) as f64);
        if !(s > T::zero()) {
            // also catches NaN
            return AxisHit { cell: 0, t: T::zero(), clamped: s < T::zero() };
        }
        if s >= last {
            return AxisHit { cell: n - 2, t: T::one(), clamped: s > last };
        }
        let cell = s.floor().to_usize().unwrap_or(0).min(n - 2);
        AxisHit { cell, t: s - T::lit(cell as f64), clamped: false }
    }

    fn header_line(&self) -> String {
        format!(
            "{} {} {} {} {} {}\n",
            self.nx,
            self.ny,
            self.origin[0].to_f64_lossy(),
            self.origin[1].to_f64_lossy(),
            self.spacing[0].to_f64_lossy(),
            self.spacing[1].to_f64_lossy()
        )
    }
}

fn parse_grid_text<T: Real>(text: &str, path: &Path, width: usize) -> Result<(GridSpec<T>, Vec<T>)> {
    let bad = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hno, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 {
        return Err(bad(hno + 1, "header must be `nx ny x0 y0 dx dy`".into()));
    }
    let nx: usize = h[0].parse().map_err(|e| bad(hno + 1, format!("nx: {e}")))?;
    let ny: usize = h[1].parse().map_err(|e| bad(hno + 1, format!("ny: {e}")))?;
    let mut f = [0.0f64; 4];
    for (k, v) in f.iter_mut().enumerate() {
        *v = h[2 + k].parse().map_err(|e| bad(hno + 1, format!("{e}")))?;
    }
    let spec = GridSpec::new([T::lit(f[0]), T::lit(f[1])], [T::lit(f[2]), T::lit(f[3])], nx, ny)
        .map_err(|e| bad(hno + 1, e.to_string()))?;
    let mut values = Vec::with_capacity(spec.len() * width);
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != width {
            return Err(bad(no + 1, format!("expected {width} values, got {}", fields.len())));
        }
        for field in fields {
            let v: f64 = field.parse().map_err(|e| bad(no + 1, format!("{e}")))?;
            if !v.is_finite() {
                return Err(bad(no + 1, "non-finite sample".into()));
            }
            values.push(T::lit(v));
        }
    }
    if values.len() != spec.len() * width {
        return Err(bad(
            text.lines().count(),
            format!("expected {} samples, got {}", spec.len(), values.len() / width),
        ));
    }
    Ok((spec, values))
}

/// Gridded 2-D vector samples with bilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedField<T> {
    spec: GridSpec<T>,
    samples: Vec<Vec2<T>>,
}

impl<T: Real> GriddedField<T> {
    pub fn new(spec: GridSpec<T>, samples: Vec<Vec2<T>>) -> Result<Self> {
        if samples.len() != spec.len() {
            return Err(Error::Grid(format!("{} samples for a {}x{} grid", samples.len(), spec.nx, spec.ny)));
        }
        Ok(GriddedField { spec, samples })
    }

    /// Samples `f` at every node.
    pub fn from_fn(spec: GridSpec<T>, mut f: impl FnMut(Vec2<T>) -> Vec2<T>) -> Self {
        let mut samples = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                samples.push(f(spec.node(i, j)));
            }
        }
        GriddedField { spec, samples }
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn sample(&self, i: usize, j: usize) -> Vec2<T> {
        self.samples[self.spec.index(i, j)]
    }

    /// Bilinear value and its derivative; outside the grid the nearest edge
    /// value is used and the derivative across the clamped axis is zero.
    pub fn eval(&self, p: Vec2<T>) -> (Vec2<T>, [Vec2<T>; 2]) {
        let hx = self.spec.locate_axis(p[0], 0);
        let hy = self.spec.locate_axis(p[1], 1);
        let (i, j) = (hx.cell, hy.cell);
        let (u, v) = (hx.t, hy.t);
        let one = T::one();
        let f00 = self.sample(i, j);
        let f10 = self.sample(i + 1, j);
        let f01 = self.sample(i, j + 1);
        let f11 = self.sample(i + 1, j + 1);
        let mut value = [T::zero(); 2];
        let mut ddx = [T::zero(); 2];
        let mut ddy = [T::zero(); 2];
        for c in 0..2 {
            value[c] =
                f00[c] * (one - u) * (one - v) + f10[c] * u * (one - v) + f01[c] * (one - u) * v + f11[c] * u * v;
            if !hx.clamped {
                ddx[c] = ((f10[c] - f00[c]) * (one - v) + (f11[c] - f01[c]) * v) / self.spec.spacing[0];
            }
            if !hy.clamped {
                ddy[c] = ((f01[c] - f00[c]) * (one - u) + (f11[c] - f10[c]) * u) / self.spec.spacing[1];
            }
        }
        (value, [ddx, ddy])
    }

    pub fn to_text(&self) -> String {
        let mut s = self.spec.header_line();
        for v in &self.samples {
            let _ = writeln!(s, "{} {}", v[0].to_f64_lossy(), v[1].to_f64_lossy());
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let (spec, values) = parse_grid_text(text, path, 2)?;
        let samples = values.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        GriddedField::new(spec, samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Gridded scalar samples with a C1 bicubic Hermite interpolant.
///
/// Node slopes come from central differences (one-sided on the edges), so
/// neighbouring patches share value and first derivatives along every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BicubicGrid<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
    fx: Vec<T>,
    fy: Vec<T>,
    fxy: Vec<T>,
}

#[inline]
fn hermite<T: Real>(t: T) -> ([T; 4], [T; 4]) {
    // [h0, h1, g0, g1] and their derivatives
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let six = T::lit(6.0);
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [two * t3 - three * t2 + one, three * t2 - two * t3, t3 - two * t2 + t, t3 - t2],
        [six * t2 - six * t, six * t - six * t2, three * t2 - four * t + one, three * t2 - two * t],
    )
}

impl<T: Real> BicubicGrid<T> {
    pub fn new(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Grid(format!("{} samples for a {}x{} grid", values.len(), spec.nx, spec.ny)));
        }
        let (nx, ny) = (spec.nx, spec.ny);
        let two = T::lit(2.0);
        let slope = |data: &[T], i: usize, j: usize, axis: usize| -> T {
            let (n, k) = if axis == 0 { (nx, i) } else { (ny, j) };
            let at = |kk: usize| {
                if axis == 0 {
                    data[spec.index(kk, j)]
                } else {
                    data[spec.index(i, kk)]
                }
            };
            let h = spec.spacing[axis];
            if k == 0 {
                (at(1) - at(0)) / h
            } else if k == n - 1 {
                (at(n - 1) - at(n - 2)) / h
            } else {
                (at(k + 1) - at(k - 1)) / (two * h)
            }
        };
        let mut fx = vec![T::zero(); spec.len()];
        let mut fy = vec![T::zero(); spec.len()];
        for j in 0..ny {
            for i in 0..nx {
                fx[spec.index(i, j)] = slope(&values, i, j, 0);
                fy[spec.index(i, j)] = slope(&values, i, j, 1);
            }
        }
        let mut fxy = vec![T::zero(); spec.len()];
        for j in 0..ny {
            for i in 0..nx {
                fxy[spec.index(i, j)] = slope(&fy, i, j, 0);
            }
        }
        Ok(BicubicGrid { spec, values, fx, fy, fxy })
    }

    pub fn from_fn(spec: GridSpec<T>, mut f: impl FnMut(Vec2<T>) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(f(spec.node(i, j)));
            }
        }
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sample(&self, i: usize, j: usize) -> T {
        self.values[self.spec.index(i, j)]
    }

    /// Interpolated value and gradient at a point inside the grid extent.
    /// Points outside are clamped onto the edge.
    pub fn eval(&self, p: Vec2<T>) -> (T, Vec2<T>) {
        let hx = self.spec.locate_axis(p[0], 0);
        let hy = self.spec.locate_axis(p[1], 1);
        let (bu, du) = hermite(hx.t);
        let (bv, dv) = hermite(hy.t);
        let [dx, dy] = self.spec.spacing;
        let mut f = T::zero();
        let mut f_u = T::zero();
        let mut f_v = T::zero();
        for b in 0..2 {
            for a in 0..2 {
                let k = self.spec.index(hx.cell + a, hy.cell + b);
                let (val, sx, sy, sxy) = (self.values[k], self.fx[k] * dx, self.fy[k] * dy, self.fxy[k] * dx * dy);
                let (hu, gu, hu_d, gu_d) = (bu[a], bu[2 + a], du[a], du[2 + a]);
                let (hv, gv, hv_d, gv_d) = (bv[b], bv[2 + b], dv[b], dv[2 + b]);
                f = f + hu * hv * val + gu * hv * sx + hu * gv * sy + gu * gv * sxy;
                f_u = f_u + hu_d * hv * val + gu_d * hv * sx + hu_d * gv * sy + gu_d * gv * sxy;
                f_v = f_v + hu * hv_d * val + gu * hv_d * sx + hu * gv_d * sy + gu * gv_d * sxy;
            }
        }
        (f, [f_u / dx, f_v / dy])
    }

    pub fn to_text(&self) -> String {
        let mut s = self.spec.header_line();
        for v in &self.values {
            let _ = writeln!(s, "{}", v.to_f64_lossy());
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let (spec, values) = parse_grid_text(text, path, 1)?;
        Self::new(spec, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(nx: usize, ny: usize) -> GridSpec<f64> {
        GridSpec::new([0.0, 0.0], [1.0, 1.0], nx, ny).unwrap()
    }

    #[test]
    fn bilinear_cell_centre_average() {
        let g = GriddedField::new(spec(2, 2), vec![[1.0, 0.0], [3.0, 0.0], [1.0, 0.0], [3.0, 0.0]]).unwrap();
        let (v, _) = g.eval([0.5, 0.5]);
        assert_eq!(v, [2.0, 0.0]);
        let (v, d) = g.eval([5.0, -3.0]);
        assert_eq!(v, [3.0, 0.0]);
        assert_eq!(d, [[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn malformed_grids_rejected() {
        assert!(GridSpec::new([0.0, 0.0], [-1.0, 1.0], 3, 3).is_err());
        assert!(GridSpec::new([0.0, 0.0], [1.0, 1.0], 1, 3).is_err());
        let text = "2 2 0 0 1 1\n1 0\n1 0\n1 0\n";
        assert!(GriddedField::<f64>::parse(text, Path::new("t")).is_err());
        let text = "2 2 0 0 -1 1\n1 0\n1 0\n1 0\n1 0\n";
        assert!(GriddedField::<f64>::parse(text, Path::new("t")).is_err());
    }

    #[test]
    fn bicubic_reproduces_bilinear_function_exactly() {
        // f = 2 + x - 3y + xy: central/one-sided differences are exact, so the
        // Hermite patch reproduces it everywhere.
        let f = |p: [f64; 2]| 2.0 + p[0] - 3.0 * p[1] + p[0] * p[1];
        let g = BicubicGrid::from_fn(spec(5, 4), f).unwrap();
        for &(x, y) in &[(0.3, 0.7), (2.5, 1.25), (3.9, 2.99)] {
            let (v, d) = g.eval([x, y]);
            assert!((v - f([x, y])).abs() < 1e-12);
            assert!((d[0] - (1.0 + y)).abs() < 1e-12);
            assert!((d[1] - (-3.0 + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn bicubic_nodes_exact_and_text_round_trip() {
        let g = BicubicGrid::from_fn(spec(6, 5), |p| (p[0] * 0.7).sin() + (p[1] * 0.3).cos() / 3.0).unwrap();
        for j in 0..5 {
            for i in 0..6 {
                assert_eq!(g.eval([i as f64, j as f64]).0, g.sample(i, j));
            }
        }
        let back = BicubicGrid::<f64>::parse(&g.to_text(), Path::new("t")).unwrap();
        assert_eq!(back, g);
    }
}
