//! The wake-model power functional `J = alpha * sum_i ||u_r(x_i, y_i)||^3`,
//! its exact gradient, and the Taylor remainder check used to verify it.
//!
//! The gradient is the chain rule written out by hand through
//! `u_r = c * u_a`, `c = prod r_i` and the turbine-local frames. Moving a
//! turbine changes both the flow it samples and, through its position and
//! its local flow direction, the wake factor it imposes on every other
//! turbine; both paths are included.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::flowfield::AmbientFlow;
use crate::layout::{Layout, RngSeed, Site};
use crate::objective::Objective;
use crate::real::{mat_t_vec, norm, Mat2, Real, Vec2};
use crate::wake::{flow_direction, frame_unchecked, WakeSet};

/// Seawater density used by the default scaling constant (kg/m^3).
pub const WATER_DENSITY: f64 = 1000.0;
/// Dimensionless turbine friction coefficient used by the default scaling constant.
pub const TURBINE_FRICTION: f64 = 21.0;
/// `integral_{-1}^{1} exp(1 - 1/(1 - x^2)) dx`, evaluated numerically.
pub const BUMP_INTEGRAL_1D: f64 = 1.206_900_322_437_874_3;

/// `alpha = rho K A_t / 2`, with `A_t` the integral of the 2-D bump
/// function over a square turbine footprint of the given radius.
pub fn default_alpha(turbine_radius: f64) -> f64 {
    let footprint = (turbine_radius * BUMP_INTEGRAL_1D).powi(2);
    0.5 * WATER_DENSITY * TURBINE_FRICTION * footprint
}

pub struct PowerFunctional<T: Real> {
    /// W s^3 / m^3.
    pub alpha: T,
    pub ambient: Arc<dyn AmbientFlow<T>>,
    pub wakes: WakeSet<T>,
    pub site: Site<T>,
}

impl<T: Real> Clone for PowerFunctional<T> {
    fn clone(&self) -> Self {
        PowerFunctional {
            alpha: self.alpha,
            ambient: Arc::clone(&self.ambient),
            wakes: self.wakes.clone(),
            site: self.site,
        }
    }
}

/// Per-turbine quantities shared by the value and gradient passes.
struct TurbineState<T> {
    pos: Vec2<T>,
    speed: T,
    /// Unit ambient flow direction.
    dir: Vec2<T>,
    /// Ambient velocity Jacobian.
    jac: Mat2<T>,
}

impl<T: Real> PowerFunctional<T> {
    pub fn new(alpha: T, ambient: Arc<dyn AmbientFlow<T>>, wakes: WakeSet<T>, site: Site<T>) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        Ok(PowerFunctional { alpha, ambient, wakes, site })
    }

    fn states(&self, layout: &Layout<T>) -> Result<Vec<TurbineState<T>>> {
        self.wakes.check(layout.n_turbines())?;
        layout
            .positions()
            .enumerate()
            .map(|(i, pos)| {
                let (u, jac) = self.ambient.velocity_and_jacobian(pos);
                let dir = flow_direction(self.ambient.as_ref(), pos, i)?;
                Ok(TurbineState { pos, speed: norm(u), dir, jac })
            })
            .collect()
    }

    /// Reduced speed at every turbine (own wake excluded).
    pub fn turbine_speeds(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        let states = self.states(layout)?;
        Ok((0..states.len())
            .map(|j| {
                let c = states.iter().enumerate().filter(|&(i, _)| i != j).fold(T::one(), |c, (i, s)| {
                    c * self.wakes.get(i).factor(frame_unchecked(s.pos, states[j].pos, s.dir))
                });
                c * states[j].speed
            })
            .collect())
    }

    /// Power in W. Cost is quadratic in the number of turbines.
    pub fn evaluate_power(&self, layout: &Layout<T>) -> Result<T> {
        let speeds = self.turbine_speeds(layout)?;
        let total = speeds.into_iter().fold(T::zero(), |acc, s| acc + s * s * s);
        Ok(self.alpha * total)
    }

    /// `dJ/dm` in W/m, ordered like the layout vector.
    pub fn evaluate_gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        Ok(self.power_and_gradient(layout)?.1)
    }

    pub fn power_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        let states = self.states(layout)?;
        let n = states.len();
        let zero = T::zero();
        let three = T::lit(3.0);
        let mut grad = vec![zero; 2 * n];
        let mut total = zero;

        // d(dir)/dp = (I - f f^T) Jac / |u|, and the same rotated for the
        // cross-stream axis (-f_y, f_x).
        let ddir: Vec<(Mat2<T>, Mat2<T>)> = states
            .iter()
            .map(|s| {
                let f = s.dir;
                let proj = [[T::one() - f[0] * f[0], -f[0] * f[1]], [-f[1] * f[0], T::one() - f[1] * f[1]]];
                let df: Mat2<T> = std::array::from_fn(|a| {
                    std::array::from_fn(|b| (proj[a][0] * s.jac[0][b] + proj[a][1] * s.jac[1][b]) / s.speed)
                });
                let dperp = [[-df[1][0], -df[1][1]], [df[0][0], df[0][1]]];
                (df, dperp)
            })
            .collect();

        let mut factors: Vec<(usize, T, Vec2<T>)> = Vec::with_capacity(n);
        let mut prefix = vec![T::one(); n + 1];
        let mut suffix = vec![T::one(); n + 1];
        for (j, target) in states.iter().enumerate() {
            factors.clear();
            for (i, src) in states.iter().enumerate() {
                if i == j {
                    continue;
                }
                let frame = frame_unchecked(src.pos, target.pos, src.dir);
                let (r, g) = self.wakes.get(i).factor_and_gradient(frame);
                factors.push((i, r, g));
            }
            let m = factors.len();
            for k in 0..m {
                prefix[k + 1] = prefix[k] * factors[k].1;
            }
            suffix[m] = T::one();
            for k in (0..m).rev() {
                suffix[k] = suffix[k + 1] * factors[k].1;
            }
            let c = prefix[m];
            let reduced = c * target.speed;
            total = total + reduced * reduced * reduced;
            let weight = self.alpha * three * reduced * reduced;

            // own ambient speed
            let dspeed = mat_t_vec(target.jac, target.dir);
            grad[2 * j] = grad[2 * j] + weight * c * dspeed[0];
            grad[2 * j + 1] = grad[2 * j + 1] + weight * c * dspeed[1];

            for (k, &(i, _, g)) in factors.iter().enumerate() {
                let others = prefix[k] * suffix[k + 1];
                let scale = weight * target.speed * others;
                let src = &states[i];
                let f = src.dir;
                let perp = [-f[1], f[0]];
                // dr/d(target position)
                let along = [g[0] * f[0] + g[1] * perp[0], g[0] * f[1] + g[1] * perp[1]];
                grad[2 * j] = grad[2 * j] + scale * along[0];
                grad[2 * j + 1] = grad[2 * j + 1] + scale * along[1];
                // dr/d(source position): frame offset plus frame rotation
                let d = [target.pos[0] - src.pos[0], target.pos[1] - src.pos[1]];
                let (df, dperp) = ddir[i];
                let rot_x0 = mat_t_vec(df, d);
                let rot_y0 = mat_t_vec(dperp, d);
                for a in 0..2 {
                    let dr = -along[a] + g[0] * rot_x0[a] + g[1] * rot_y0[a];
                    grad[2 * i + a] = grad[2 * i + a] + scale * dr;
                }
            }
        }
        Ok((self.alpha * total, grad))
    }
}

impl<T: Real> Objective<T> for PowerFunctional<T> {
    fn value(&self, layout: &Layout<T>) -> Result<T> {
        self.evaluate_power(layout)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, layout: &Layout<T>) -> Result<Vec<T>> {
        self.evaluate_gradient(layout)
    }

    fn value_and_gradient(&self, layout: &Layout<T>) -> Result<(T, Vec<T>)> {
        self.power_and_gradient(layout)
    }
}

/// Outcome of a Taylor remainder test.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReport {
    /// Perturbation sizes, halving each level.
    pub h: Vec<f64>,
    /// `|J(m + h d) - J(m)|`
    pub r0: Vec<f64>,
    /// `|J(m + h d) - J(m) - h grad J . d|`
    pub r1: Vec<f64>,
    /// Log-log least-squares slope of `r0`; `None` when a remainder is zero.
    pub slope_r0: Option<f64>,
    pub slope_r1: Option<f64>,
}

impl TaylorReport {
    pub fn is_degenerate(&self) -> bool {
        self.slope_r0.is_none() || self.slope_r1.is_none()
    }

    /// First order without the gradient, second order with it.
    pub fn passes(&self, r0_band: (f64, f64), r1_band: (f64, f64)) -> bool {
        let within = |s: Option<f64>, (lo, hi): (f64, f64)| s.is_some_and(|s| s >= lo && s <= hi);
        within(self.slope_r0, r0_band) && within(self.slope_r1, r1_band)
    }

    /// `h,R0,R1` rows followed by a `#` line with the fitted slopes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,R0,R1\n");
        for k in 0..self.h.len() {
            let _ = writeln!(s, "{:e},{:e},{:e}", self.h[k], self.r0[k], self.r1[k]);
        }
        let fmt = |v: Option<f64>| v.map_or_else(|| "degenerate".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(s, "# slope_R0={},slope_R1={}", fmt(self.slope_r0), fmt(self.slope_r1));
        s
    }
}

/// Least-squares slope of `log y` against `log x`; `None` if any value is
/// zero or non-finite.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Random unit vector with `dim` components (uniform cube draw, normalised).
pub fn random_direction<T: Real>(dim: usize, seed: RngSeed) -> Vec<T> {
    let mut rng = seed.rng();
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

/// Taylor remainder test at `layout` along `direction` with `h = h0 / 2^k`,
/// `k = 0..n_levels`.
pub fn taylor_remainder_test<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    layout: &Layout<T>,
    direction: &[T],
    h0: f64,
    n_levels: usize,
) -> Result<TaylorReport> {
    if n_levels < 4 {
        return Err(Error::Config(format!("Taylor test needs at least 4 levels, got {n_levels}")));
    }
    if direction.len() != layout.len() {
        return Err(Error::LengthMismatch { left: layout.len(), right: direction.len() });
    }
    let (j0, grad) = objective.value_and_gradient(layout)?;
    let slope: T = grad.iter().zip(direction).map(|(&g, &d)| g * d).sum();
    let mut report = TaylorReport { h: vec![], r0: vec![], r1: vec![], slope_r0: None, slope_r1: None };
    for k in 0..n_levels {
        let h = h0 / f64::powi(2.0, k as i32);
        let jh = objective.value(&layout.offset(direction, T::lit(h))?)?;
        let diff = jh - j0;
        report.h.push(h);
        report.r0.push(diff.abs().to_f64_lossy());
        report.r1.push((diff - T::lit(h) * slope).abs().to_f64_lossy());
    }
    report.slope_r0 = loglog_slope(&report.h, &report.r0);
    report.slope_r1 = loglog_slope(&report.h, &report.r1);
    Ok(report)
}

/// Central finite-difference gradient, the independent check on
/// [`PowerFunctional::evaluate_gradient`].
pub fn finite_difference_gradient<T: Real, O: Objective<T> + ?Sized>(
    objective: &O,
    layout: &Layout<T>,
    step: T,
) -> Result<Vec<T>> {
    let two = T::lit(2.0);
    (0..layout.len())
        .map(|k| {
            let mut plus = layout.clone();
            let mut minus = layout.clone();
            plus.coords_mut()[k] = plus.coords()[k] + step;
            minus.coords_mut()[k] = minus.coords()[k] - step;
            Ok((objective.value(&plus)? - objective.value(&minus)?) / (two * step))
        })
        .collect()
}
