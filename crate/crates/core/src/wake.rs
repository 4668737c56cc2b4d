//! Wake reduction-factor fields and their combination.
//!
//! Each turbine `i` imposes a scalar factor `r_i` on the flow around it,
//! expressed in a local frame whose x-axis follows the ambient flow at the
//! turbine. The flow seen at a point is the ambient velocity scaled by the
//! product of all factors acting there. Factors above 1 (flow accelerated
//! beside a rotor) are allowed.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flowfield::AmbientFlow;
use crate::grid::{BicubicGrid, GridSpec};
use crate::layout::{Layout, TurbineSpec};
use crate::real::{dot, norm, smoothstep, Real, Vec2};

/// Offsets of a query point from a turbine: `x0` downstream, `y0` to the
/// left of the flow direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame<T> {
    pub x0: T,
    pub y0: T,
}

pub fn to_local_frame<T: Real>(turbine: Vec2<T>, query: Vec2<T>, flow_dir: Vec2<T>) -> Result<LocalFrame<T>> {
    let n = norm(flow_dir);
    if !((n - T::one()).abs() <= T::lit(1e-9)) {
        return Err(Error::BadDirection(n.to_f64_lossy()));
    }
    Ok(frame_unchecked(turbine, query, flow_dir))
}

#[inline]
pub(crate) fn frame_unchecked<T: Real>(turbine: Vec2<T>, query: Vec2<T>, f: Vec2<T>) -> LocalFrame<T> {
    let d = [query[0] - turbine[0], query[1] - turbine[1]];
    LocalFrame { x0: dot(d, f), y0: dot(d, [-f[1], f[0]]) }
}

pub trait WakeModel<T: Real>: Send + Sync {
    /// Dimensionless reduction factor at `frame`.
    fn factor(&self, frame: LocalFrame<T>) -> T;

    /// `(dr/dx0, dr/dy0)` in 1/m.
    fn gradient(&self, frame: LocalFrame<T>) -> Vec2<T>;

    fn factor_and_gradient(&self, frame: LocalFrame<T>) -> (T, Vec2<T>) {
        (self.factor(frame), self.gradient(frame))
    }
}

/// Top-hat linearly expanding wake. Discontinuous at the cone edge, so only
/// useful as a baseline and for gradient-free optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenWake<T> {
    pub spec: TurbineSpec<T>,
    pub decay: T,
}

impl<T: Real> JensenWake<T> {
    pub fn new(spec: TurbineSpec<T>) -> Self {
        JensenWake { spec, decay: T::lit(0.05) }
    }

    fn inside(&self, frame: LocalFrame<T>) -> bool {
        let half = T::lit(0.5);
        frame.x0 > T::zero() && frame.y0.abs() <= self.spec.diameter * half + self.decay * frame.x0
    }

    fn deficit_amplitude(&self) -> T {
        T::one() - (T::one() - self.spec.thrust_coefficient).sqrt()
    }
}

pub fn jensen_factor<T: Real>(w: &JensenWake<T>, frame: LocalFrame<T>) -> T {
    if !w.inside(frame) {
        return T::one();
    }
    let d = w.spec.diameter;
    let ratio = d / (d + T::lit(2.0) * w.decay * frame.x0);
    T::one() - w.deficit_amplitude() * ratio * ratio
}

impl<T: Real> WakeModel<T> for JensenWake<T> {
    fn factor(&self, frame: LocalFrame<T>) -> T {
        jensen_factor(self, frame)
    }

    fn gradient(&self, frame: LocalFrame<T>) -> Vec2<T> {
        if !self.inside(frame) {
            return [T::zero(), T::zero()];
        }
        let d = self.spec.diameter;
        let denom = d + T::lit(2.0) * self.decay * frame.x0;
        let dr = T::lit(4.0) * self.deficit_amplitude() * self.decay * d * d / (denom * denom * denom);
        [dr, T::zero()]
    }
}

/// Tabulated reduction factor around a turbine at the table origin, with a C1
/// bicubic interpolant. Exactly 1 (zero gradient) outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTable<T> {
    grid: BicubicGrid<T>,
}

impl<T: Real> ReductionTable<T> {
    pub fn new(grid: BicubicGrid<T>) -> Result<Self> {
        if let Some(v) = grid.values().iter().find(|v| !(**v > T::zero())) {
            return Err(Error::Grid(format!("reduction factors must be positive, found {v}")));
        }
        Ok(ReductionTable { grid })
    }

    pub fn grid(&self) -> &BicubicGrid<T> {
        &self.grid
    }

    pub fn spec(&self) -> &GridSpec<T> {
        self.grid.spec()
    }

    pub fn min_value(&self) -> T {
        self.grid.values().iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.grid.values().iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Largest `|r - 1|` over the outermost ring of nodes.
    pub fn boundary_deviation(&self) -> T {
        let s = self.spec();
        let mut worst = T::zero();
        for j in 0..s.ny {
            for i in 0..s.nx {
                if i == 0 || j == 0 || i == s.nx - 1 || j == s.ny - 1 {
                    worst = worst.max((self.grid.sample(i, j) - T::one()).abs());
                }
            }
        }
        worst
    }

    pub fn to_text(&self) -> String {
        self.grid.to_text()
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        Self::new(BicubicGrid::parse(text, path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn table_factor<T: Real>(t: &ReductionTable<T>, frame: LocalFrame<T>) -> T {
    t.factor_and_gradient(frame).0
}

pub fn table_gradient<T: Real>(t: &ReductionTable<T>, frame: LocalFrame<T>) -> Vec2<T> {
    t.factor_and_gradient(frame).1
}

impl<T: Real> WakeModel<T> for ReductionTable<T> {
    fn factor(&self, frame: LocalFrame<T>) -> T {
        self.factor_and_gradient(frame).0
    }

    fn gradient(&self, frame: LocalFrame<T>) -> Vec2<T> {
        self.factor_and_gradient(frame).1
    }

    fn factor_and_gradient(&self, frame: LocalFrame<T>) -> (T, Vec2<T>) {
        let p = [frame.x0, frame.y0];
        if !self.grid.spec().contains(p) {
            return (T::one(), [T::zero(), T::zero()]);
        }
        self.grid.eval(p)
    }
}

/// Rectangle in the turbine-local frame covered by a generated table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableExtent<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> TableExtent<T> {
    /// `[-5D, 45D] x [-10D, 10D]`.
    pub fn for_diameter(d: T) -> Self {
        TableExtent {
            x_min: T::lit(-5.0) * d,
            x_max: T::lit(45.0) * d,
            y_min: T::lit(-10.0) * d,
            y_max: T::lit(10.0) * d,
        }
    }
}

/// Shape of the synthetic wake: a Gaussian deficit decaying downstream plus
/// two acceleration lobes beside the rotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthWakeParams<T> {
    /// Centreline deficit once the wake has formed, in (0, 1).
    pub deficit: T,
    /// e-folding length of the deficit (m).
    pub decay_length: T,
    /// Gaussian width of the deficit at the rotor (m).
    pub sigma0: T,
    /// Widening rate of the deficit (m per m downstream).
    pub widening: T,
    /// Peak speed-up in the side lobes.
    pub lobe: T,
}

impl<T: Real> SynthWakeParams<T> {
    pub fn for_turbine(spec: &TurbineSpec<T>) -> Self {
        let d = spec.diameter;
        SynthWakeParams {
            deficit: T::lit(0.6),
            decay_length: T::lit(8.0) * d,
            sigma0: d / T::lit(4.0),
            widening: T::lit(0.06),
            lobe: T::lit(0.05),
        }
    }
}

/// Analytic reduction factor the table generator samples, before tapering.
///
/// ```text
/// r = 1 - A g(x0) exp(-x0/lambda) exp(-y0^2 / 2 sigma(x0)^2)
///       + B g(x0) q exp(1 - q) exp(-x0^2 / 2 (2D)^2),   q = (y0 / D)^2
/// ```
///
/// `g` ramps both terms in over the diameter upstream of the rotor, so
/// `r = 1` for `x0 <= -D`.
pub fn synth_wake_value<T: Real>(spec: &TurbineSpec<T>, params: &SynthWakeParams<T>, x0: T, y0: T) -> T {
    let d = spec.diameter;
    let one = T::one();
    let two = T::lit(2.0);
    let xd = x0.max(T::zero());
    let sigma = params.sigma0 + params.widening * xd;
    let (ramp, _) = smoothstep((x0 + d) / d);
    let deficit =
        params.deficit * ramp * (-xd / params.decay_length).exp() * (-(y0 * y0) / (two * sigma * sigma)).exp();
    let q = (y0 * y0) / (d * d);
    let lobe_len = two * d;
    let lobe = params.lobe * ramp * q * (one - q).exp() * (-(x0 * x0) / (two * lobe_len * lobe_len)).exp();
    one - deficit + lobe
}

/// Sample the synthetic wake on an `nx x ny` grid over `extent`.
///
/// A smooth taper pulls the factor to exactly 1 over the outer tenth of the
/// table, reaching it two node rows before the edge so the interpolant joins
/// the constant exterior with matching slope.
pub fn synth_swe_like_table<T: Real>(
    spec: &TurbineSpec<T>,
    params: &SynthWakeParams<T>,
    nx: usize,
    ny: usize,
    extent: TableExtent<T>,
) -> Result<ReductionTable<T>> {
    if extent.x_max < T::lit(10.0) * spec.diameter {
        return Err(Error::Grid(format!(
            "table must reach at least 10 diameters downstream (x_max = {})",
            extent.x_max
        )));
    }
    if !(extent.x_min < extent.x_max && extent.y_min < extent.y_max) {
        return Err(Error::Grid("empty table extent".into()));
    }
    if nx < 8 || ny < 8 {
        return Err(Error::Grid(format!("table needs at least 8x8 nodes, got {nx}x{ny}")));
    }
    let dx = (extent.x_max - extent.x_min) / T::lit((nx - 1) as f64);
    let dy = (extent.y_max - extent.y_min) / T::lit((ny - 1) as f64);
    let grid_spec = GridSpec::new([extent.x_min, extent.y_min], [dx, dy], nx, ny)?;

    let tenth = T::lit(0.1);
    let two = T::lit(2.0);
    let taper = |v: T, lo: T, hi: T, h: T| -> T {
        let band = (hi - lo) * tenth;
        let (a, _) = smoothstep((v - lo - two * h) / band);
        let (b, _) = smoothstep((hi - two * h - v) / band);
        a * b
    };
    let grid = BicubicGrid::from_fn(grid_spec, |p| {
        let raw = synth_wake_value(spec, params, p[0], p[1]);
        let w = taper(p[0], extent.x_min, extent.x_max, dx) * taper(p[1], extent.y_min, extent.y_max, dy);
        T::one() + (raw - T::one()) * w
    })?;
    ReductionTable::new(grid)
}

/// Default table for a turbine: `[-5D, 45D] x [-10D, 10D]` at `spacing` metres.
pub fn default_table<T: Real>(spec: &TurbineSpec<T>, spacing: T) -> Result<ReductionTable<T>> {
    let extent = TableExtent::for_diameter(spec.diameter);
    let nx = ((extent.x_max - extent.x_min) / spacing).round().to_usize().unwrap_or(0) + 1;
    let ny = ((extent.y_max - extent.y_min) / spacing).round().to_usize().unwrap_or(0) + 1;
    synth_swe_like_table(spec, &SynthWakeParams::for_turbine(spec), nx, ny, extent)
}

/// One wake model shared by every turbine, or one per turbine.
#[derive(Clone)]
pub enum WakeSet<T: Real> {
    Shared(Arc<dyn WakeModel<T>>),
    PerTurbine(Vec<Arc<dyn WakeModel<T>>>),
}

impl<T: Real> WakeSet<T> {
    pub fn shared(model: impl WakeModel<T> + 'static) -> Self {
        WakeSet::Shared(Arc::new(model))
    }

    pub fn get(&self, i: usize) -> &dyn WakeModel<T> {
        match self {
            WakeSet::Shared(m) => m.as_ref(),
            WakeSet::PerTurbine(ms) => ms[i].as_ref(),
        }
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        match self {
            WakeSet::PerTurbine(ms) if ms.len() != n => Err(Error::WakeModelCount { expected: n, got: ms.len() }),
            _ => Ok(()),
        }
    }
}

/// Unit ambient flow direction at a turbine.
pub(crate) fn flow_direction<T: Real>(ambient: &dyn AmbientFlow<T>, p: Vec2<T>, turbine: usize) -> Result<Vec2<T>> {
    let u = ambient.velocity(p);
    let s = norm(u);
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::ZeroFlow { turbine });
    }
    Ok([u[0] / s, u[1] / s])
}

/// Product of every turbine's factor at `query`. A turbine sitting exactly
/// on the query point is left out of the product.
///
/// Factors are multiplied in ascending order, which makes the result
/// bit-identical under any permutation of the turbines.
pub fn combined_factor<T: Real>(
    models: &WakeSet<T>,
    layout: &Layout<T>,
    query: Vec2<T>,
    ambient: &dyn AmbientFlow<T>,
) -> Result<T> {
    models.check(layout.n_turbines())?;
    let mut factors = Vec::with_capacity(layout.n_turbines());
    for (i, p) in layout.positions().enumerate() {
        if p == query {
            continue;
        }
        let f = flow_direction(ambient, p, i)?;
        factors.push(models.get(i).factor(frame_unchecked(p, query, f)));
    }
    factors.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(factors.into_iter().fold(T::one(), |c, r| c * r))
}

pub fn reduced_velocity<T: Real>(
    models: &WakeSet<T>,
    layout: &Layout<T>,
    query: Vec2<T>,
    ambient: &dyn AmbientFlow<T>,
) -> Result<Vec2<T>> {
    let c = combined_factor(models, layout, query, ambient)?;
    let u = ambient.velocity(query);
    Ok([c * u[0], c * u[1]])
}
