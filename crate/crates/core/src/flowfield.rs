//! Ambient (turbine-free) velocity fields and their spatial Jacobians.
//!
//! All fields are immutable once built. Queries outside a field's natural
//! domain never fail: line searches may probe outside the site before
//! projecting back.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GriddedField};
use crate::layout::RngSeed;
use crate::real::{dot, norm, smoothstep, Mat2, Real, Vec2};

/// Minimum depth any bathymetry profile reports.
pub const DEPTH_FLOOR: f64 = 5.0;

pub trait AmbientFlow<T: Real>: Send + Sync {
    /// Velocity `(u, v)` in m/s.
    fn velocity(&self, p: Vec2<T>) -> Vec2<T>;

    /// `jac[i][j] = d velocity_i / d x_j`, in 1/s.
    fn jacobian(&self, p: Vec2<T>) -> Mat2<T>;

    fn velocity_and_jacobian(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        (self.velocity(p), self.jacobian(p))
    }

    fn speed(&self, p: Vec2<T>) -> T {
        norm(self.velocity(p))
    }
}

impl<T: Real, F: AmbientFlow<T> + ?Sized> AmbientFlow<T> for Arc<F> {
    fn velocity(&self, p: Vec2<T>) -> Vec2<T> {
        (**self).velocity(p)
    }
    fn jacobian(&self, p: Vec2<T>) -> Mat2<T> {
        (**self).jacobian(p)
    }
    fn velocity_and_jacobian(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        (**self).velocity_and_jacobian(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformFlow<T> {
    pub velocity: Vec2<T>,
}

pub fn uniform_flow<T: Real>(velocity: Vec2<T>) -> Result<UniformFlow<T>> {
    if !(norm(velocity) > T::zero()) {
        return Err(Error::Config("uniform flow needs a non-zero velocity".into()));
    }
    Ok(UniformFlow { velocity })
}

impl<T: Real> AmbientFlow<T> for UniformFlow<T> {
    fn velocity(&self, _p: Vec2<T>) -> Vec2<T> {
        self.velocity
    }
    fn jacobian(&self, _p: Vec2<T>) -> Mat2<T> {
        [[T::zero(); 2]; 2]
    }
}

/// `u(p) = base + gradient * p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFlow<T> {
    pub base: Vec2<T>,
    pub gradient: Mat2<T>,
}

/// The gradient-bearing test field `(1 + x/1280, 1 + y/640)` m/s used for
/// gradient verification on a 640 m x 320 m domain.
pub fn linear_gradient_flow<T: Real>() -> LinearFlow<T> {
    let zero = T::zero();
    LinearFlow {
        base: [T::one(), T::one()],
        gradient: [[T::one() / T::lit(1280.0), zero], [zero, T::one() / T::lit(640.0)]],
    }
}

impl<T: Real> AmbientFlow<T> for LinearFlow<T> {
    fn velocity(&self, p: Vec2<T>) -> Vec2<T> {
        let g = self.gradient;
        [self.base[0] + g[0][0] * p[0] + g[0][1] * p[1], self.base[1] + g[1][0] * p[0] + g[1][1] * p[1]]
    }
    fn jacobian(&self, _p: Vec2<T>) -> Mat2<T> {
        self.gradient
    }
}

/// How a depth profile blends between two consecutive knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blend {
    Linear,
    /// C1 smoothstep.
    Smooth,
}

/// Compactly supported raised-cosine bump added to a base depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBump<T> {
    pub centre: Vec2<T>,
    pub radius: T,
    /// Metres; positive deepens.
    pub amplitude: T,
}

/// Seabed depth `H(x, y)` in metres, never below [`DEPTH_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub enum BathymetryProfile<T> {
    Flat(T),
    /// Depth varies only along `axis`, measured from `origin`: piecewise between
    /// `knots` `(s, depth)` (ascending `s`), constant beyond the first and last knot.
    /// `blends[k]` shapes the segment from knot `k` to `k + 1`.
    AlongAxis {
        origin: Vec2<T>,
        axis: Vec2<T>,
        knots: Vec<(T, T)>,
        blends: Vec<Blend>,
    },
    Bumps {
        base: T,
        bumps: Vec<DepthBump<T>>,
    },
}

impl<T: Real> BathymetryProfile<T> {
    /// Channel ramp: depth rises linearly from `shallow` at the inflow (`s = 0`)
    /// to `deep` at `s = length / 2`, drops smoothly back to `shallow` over
    /// `drop_width`, and stays there to the outflow.
    pub fn channel_ramp(length: T, shallow: T, deep: T, drop_width: T) -> Self {
        let mid = length / T::lit(2.0);
        BathymetryProfile::AlongAxis {
            origin: [T::zero(), T::zero()],
            axis: [T::one(), T::zero()],
            knots: vec![(T::zero(), shallow), (mid, deep), (mid + drop_width, shallow)],
            blends: vec![Blend::Linear, Blend::Smooth],
        }
    }

    /// `n` seeded raised-cosine bumps with amplitudes in `[-max_amplitude, max_amplitude]`
    /// scattered over the box `lo..hi` on top of `base`.
    pub fn random_bumps(base: T, n: usize, max_amplitude: T, lo: Vec2<T>, hi: Vec2<T>, seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let span = (hi[0] - lo[0]).min(hi[1] - lo[1]);
        let bumps = (0..n)
            .map(|_| {
                let cx = lo[0] + (hi[0] - lo[0]) * T::lit(rng.gen::<f64>());
                let cy = lo[1] + (hi[1] - lo[1]) * T::lit(rng.gen::<f64>());
                let radius = span * T::lit(0.2 + 0.3 * rng.gen::<f64>());
                let amplitude = max_amplitude * T::lit(2.0 * rng.gen::<f64>() - 1.0);
                DepthBump { centre: [cx, cy], radius, amplitude }
            })
            .collect();
        BathymetryProfile::Bumps { base, bumps }
    }

    /// Depth and its gradient, before the floor is applied.
    fn raw(&self, p: Vec2<T>) -> (T, Vec2<T>) {
        let zero = T::zero();
        match self {
            BathymetryProfile::Flat(h) => (*h, [zero, zero]),
            BathymetryProfile::AlongAxis { origin, axis, knots, blends } => {
                let s = dot([p[0] - origin[0], p[1] - origin[1]], *axis);
                let (h, dh_ds) = piecewise(knots, blends, s);
                (h, [dh_ds * axis[0], dh_ds * axis[1]])
            }
            BathymetryProfile::Bumps { base, bumps } => {
                let mut h = *base;
                let mut g = [zero, zero];
                let half = T::lit(0.5);
                let pi = T::lit(std::f64::consts::PI);
                for b in bumps {
                    let d = [p[0] - b.centre[0], p[1] - b.centre[1]];
                    let r = norm(d);
                    if r >= b.radius {
                        continue;
                    }
                    let phase = pi * r / b.radius;
                    h = h + b.amplitude * half * (T::one() + phase.cos());
                    if r > zero {
                        let dh_dr = -b.amplitude * half * phase.sin() * pi / b.radius;
                        g[0] = g[0] + dh_dr * d[0] / r;
                        g[1] = g[1] + dh_dr * d[1] / r;
                    }
                }
                (h, g)
            }
        }
    }

    pub fn depth(&self, p: Vec2<T>) -> T {
        self.depth_and_gradient(p).0
    }

    /// Depth clamped to the floor; the gradient is zero where the floor is active.
    pub fn depth_and_gradient(&self, p: Vec2<T>) -> (T, Vec2<T>) {
        let floor = T::lit(DEPTH_FLOOR);
        let (h, g) = self.raw(p);
        if h < floor {
            (floor, [T::zero(), T::zero()])
        } else {
            (h, g)
        }
    }
}

fn piecewise<T: Real>(knots: &[(T, T)], blends: &[Blend], s: T) -> (T, T) {
    let zero = T::zero();
    match knots {
        [] => (T::lit(DEPTH_FLOOR), zero),
        [only] => (only.1, zero),
        _ => {
            if s <= knots[0].0 {
                return (knots[0].1, zero);
            }
            for (k, w) in knots.windows(2).enumerate() {
                let ((s0, h0), (s1, h1)) = (w[0], w[1]);
                if s < s1 {
                    let len = s1 - s0;
                    let t = (s - s0) / len;
                    let (b, db) = match blends.get(k).copied().unwrap_or(Blend::Linear) {
                        Blend::Linear => (t, T::one()),
                        Blend::Smooth => smoothstep(t),
                    };
                    return (h0 + (h1 - h0) * b, (h1 - h0) * db / len);
                }
            }
            (knots[knots.len() - 1].1, zero)
        }
    }
}

/// Quasi-1-D depth-averaged continuity: speed `u_in * H_in / H(p)` along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFlow<T> {
    pub profile: BathymetryProfile<T>,
    pub inflow_speed: T,
    pub inflow_depth: T,
    pub axis: Vec2<T>,
}

pub fn channel_continuity_flow<T: Real>(
    profile: BathymetryProfile<T>,
    inflow_speed: T,
    inflow_depth: T,
    axis: Vec2<T>,
) -> Result<ChannelFlow<T>> {
    if !(inflow_speed > T::zero()) || !(inflow_depth > T::zero()) {
        return Err(Error::Config("channel flow needs positive inflow speed and depth".into()));
    }
    let n = norm(axis);
    if !(n > T::zero()) {
        return Err(Error::BadDirection(0.0));
    }
    Ok(ChannelFlow { profile, inflow_speed, inflow_depth, axis: [axis[0] / n, axis[1] / n] })
}

impl<T: Real> ChannelFlow<T> {
    pub fn flux(&self) -> T {
        self.inflow_speed * self.inflow_depth
    }
}

impl<T: Real> AmbientFlow<T> for ChannelFlow<T> {
    fn velocity(&self, p: Vec2<T>) -> Vec2<T> {
        let speed = self.flux() / self.profile.depth(p);
        [speed * self.axis[0], speed * self.axis[1]]
    }

    fn jacobian(&self, p: Vec2<T>) -> Mat2<T> {
        self.velocity_and_jacobian(p).1
    }

    fn velocity_and_jacobian(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let (h, dh) = self.profile.depth_and_gradient(p);
        let speed = self.flux() / h;
        let dspeed = [-speed / h * dh[0], -speed / h * dh[1]];
        let a = self.axis;
        ([speed * a[0], speed * a[1]], [[a[0] * dspeed[0], a[0] * dspeed[1]], [a[1] * dspeed[0], a[1] * dspeed[1]]])
    }
}

/// Bilinear interpolation of a sampled field, constant beyond its edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFlow<T> {
    pub field: GriddedField<T>,
}

pub fn gridded_flow<T: Real>(field: GriddedField<T>) -> GriddedFlow<T> {
    GriddedFlow { field }
}

impl<T: Real> AmbientFlow<T> for GriddedFlow<T> {
    fn velocity(&self, p: Vec2<T>) -> Vec2<T> {
        self.field.eval(p).0
    }

    fn jacobian(&self, p: Vec2<T>) -> Mat2<T> {
        self.velocity_and_jacobian(p).1
    }

    fn velocity_and_jacobian(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let (v, [ddx, ddy]) = self.field.eval(p);
        (v, [[ddx[0], ddy[0]], [ddx[1], ddy[1]]])
    }
}

/// Raised-cosine profile `height * (1 + cos(pi (x - centre) / half_length)) / 2`
/// on `|x - centre| < half_length`, zero elsewhere; returns value and slope.
fn cosine_profile(x: f64, centre: f64, half_length: f64, height: f64) -> (f64, f64) {
    let s = (x - centre) / half_length;
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let pi = std::f64::consts::PI;
    (0.5 * height * (1.0 + (pi * s).cos()), -0.5 * height * pi / half_length * (pi * s).sin())
}

/// Land outline for the coastal constructions below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Headland {
    pub centre_x: f64,
    pub half_length: f64,
    /// Reach into the channel from the `y = 0` coast.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Island {
    pub centre: Vec2<f64>,
    pub half_length: f64,
    pub half_width: f64,
}

/// Channel `[0, length] x [0, width]` with inflow `u_in` along `x` squeezed by a
/// headland on the lower coast. Stream function `psi = u_in W (y - h) / (W - h)`,
/// so every cross-section carries the same flux. Land samples are zero.
pub fn headland_field<T: Real>(
    length: f64,
    width: f64,
    u_in: f64,
    land: Headland,
    spacing: f64,
) -> Result<GriddedField<T>> {
    let spec = coastal_grid(length, width, spacing)?;
    Ok(GriddedField::from_fn(spec, |p| {
        let (x, y) = (p[0].to_f64_lossy(), p[1].to_f64_lossy());
        let (h, dh) = cosine_profile(x, land.centre_x, land.half_length, land.height);
        if y < h {
            return [T::zero(), T::zero()];
        }
        let gap = width - h;
        [T::lit(u_in * width / gap), T::lit(u_in * width * dh * (width - y) / (gap * gap))]
    }))
}

/// Channel `[0, length] x [0, width]` split by an island: the flux below the
/// island centre line passes under it, the rest over it, each by continuity.
pub fn island_field<T: Real>(
    length: f64,
    width: f64,
    u_in: f64,
    land: Island,
    spacing: f64,
) -> Result<GriddedField<T>> {
    let spec = coastal_grid(length, width, spacing)?;
    let yc = land.centre[1];
    Ok(GriddedField::from_fn(spec, |p| {
        let (x, y) = (p[0].to_f64_lossy(), p[1].to_f64_lossy());
        let (b, db) = cosine_profile(x, land.centre[0], land.half_length, land.half_width);
        if y <= yc - b {
            let gap = yc - b;
            [T::lit(u_in * yc / gap), T::lit(-u_in * yc * y * db / (gap * gap))]
        } else if y >= yc + b {
            let gap = width - yc - b;
            [T::lit(u_in * (width - yc) / gap), T::lit(u_in * (width - yc) * db * (width - y) / (gap * gap))]
        } else {
            [T::zero(), T::zero()]
        }
    }))
}

fn coastal_grid<T: Real>(length: f64, width: f64, spacing: f64) -> Result<GridSpec<T>> {
    let nx = (length / spacing).round() as usize + 1;
    let ny = (width / spacing).round() as usize + 1;
    GridSpec::new([T::zero(), T::zero()], [T::lit(spacing), T::lit(spacing)], nx, ny)
}

/// Depth-modulated version of another field: `u(p) * H_ref / H(p)`.
pub struct DepthScaledFlow<T: Real> {
    pub inner: Arc<dyn AmbientFlow<T>>,
    pub profile: BathymetryProfile<T>,
    pub reference_depth: T,
}

impl<T: Real> AmbientFlow<T> for DepthScaledFlow<T> {
    fn velocity(&self, p: Vec2<T>) -> Vec2<T> {
        let s = self.reference_depth / self.profile.depth(p);
        let u = self.inner.velocity(p);
        [u[0] * s, u[1] * s]
    }

    fn jacobian(&self, p: Vec2<T>) -> Mat2<T> {
        self.velocity_and_jacobian(p).1
    }

    fn velocity_and_jacobian(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let (h, dh) = self.profile.depth_and_gradient(p);
        let s = self.reference_depth / h;
        let ds = [-s / h * dh[0], -s / h * dh[1]];
        let (u, j) = self.inner.velocity_and_jacobian(p);
        let mut out = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                out[i][k] = j[i][k] * s + u[i] * ds[k];
            }
        }
        ([u[0] * s, u[1] * s], out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rand::SeedableRng;

    /// Central-difference Jacobian, the oracle for every analytic field.
    fn fd_jacobian(f: &dyn AmbientFlow<f64>, p: Vec2<f64>, h: f64) -> Mat2<f64> {
        let mut out = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let (va, vb) = (f.velocity(a), f.velocity(b));
            for i in 0..2 {
                out[i][k] = (va[i] - vb[i]) / (2.0 * h);
            }
        }
        out
    }

    fn assert_jacobian_matches_fd(f: &dyn AmbientFlow<f64>, lo: Vec2<f64>, hi: Vec2<f64>, seed: u64) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
            let exact = f.jacobian(p);
            let fd = fd_jacobian(f, p, 1e-3);
            let scale = exact.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
            for i in 0..2 {
                for k in 0..2 {
                    assert!((exact[i][k] - fd[i][k]).abs() <= 1e-6 * scale, "at {p:?}: {exact:?} vs {fd:?}");
                }
            }
        }
    }

    #[test]
    fn uniform_examples() {
        let f = uniform_flow([2.0, 0.0]).unwrap();
        assert_eq!(f.velocity([100.0, 50.0]), [2.0, 0.0]);
        assert_eq!(f.jacobian([3.0, -7.0]), [[0.0; 2]; 2]);
        assert_eq!(f.speed([1e4, 1e4]), 2.0);
        assert!(uniform_flow([0.0, 0.0]).is_err());
    }

    #[test]
    fn linear_gradient_examples() {
        let f = linear_gradient_flow::<f64>();
        assert_eq!(f.velocity([0.0, 0.0]), [1.0, 1.0]);
        assert_eq!(f.velocity([1280.0, 640.0]), [2.0, 2.0]);
        assert_eq!(f.jacobian([5.0, 9.0]), [[1.0 / 1280.0, 0.0], [0.0, 1.0 / 640.0]]);
        assert_jacobian_matches_fd(&f, [0.0, 0.0], [640.0, 320.0], 1);
    }

    #[test]
    fn channel_examples() {
        let flat = channel_continuity_flow(BathymetryProfile::Flat(50.0), 1.0, 50.0, [1.0, 0.0]).unwrap();
        assert_eq!(flat.velocity([10.0, 10.0]), [1.0, 0.0]);
        let shallow = channel_continuity_flow(BathymetryProfile::Flat(25.0), 1.0, 50.0, [1.0, 0.0]).unwrap();
        assert_eq!(shallow.speed([0.0, 0.0]), 2.0);
    }

    #[test]
    fn ramp_speed_profile() {
        let profile = BathymetryProfile::channel_ramp(640.0, 25.0, 30.0, 20.0);
        let f = channel_continuity_flow(profile, 2.0, 25.0, [1.0, 0.0]).unwrap();
        let speeds: Vec<f64> = (0..=32).map(|k| f.speed([k as f64 * 10.0, 50.0])).collect();
        for w in speeds.windows(2) {
            assert!(w[1] < w[0], "ramp half must slow down: {speeds:?}");
        }
        let shallow: Vec<f64> = (34..=64).map(|k| f.speed([k as f64 * 10.0, 50.0])).collect();
        assert!(shallow.iter().all(|&s| s == 2.0));
        assert_jacobian_matches_fd(&f, [5.0, 0.0], [315.0, 320.0], 2);
    }

    #[test]
    fn bump_field_jacobian_and_floor() {
        let profile = BathymetryProfile::random_bumps(25.0, 6, 5.0, [0.0, 0.0], [640.0, 320.0], RngSeed(9));
        let f = channel_continuity_flow(profile.clone(), 2.0, 25.0, [1.0, 0.0]).unwrap();
        assert_jacobian_matches_fd(&f, [0.0, 0.0], [640.0, 320.0], 3);
        let deep = BathymetryProfile::Bumps {
            base: 6.0,
            bumps: vec![DepthBump { centre: [0.0, 0.0], radius: 10.0, amplitude: -5.0 }],
        };
        assert_eq!(deep.depth([0.0, 0.0]), DEPTH_FLOOR);
    }

    #[test]
    fn mass_flux_invariant() {
        let profile = BathymetryProfile::random_bumps(25.0, 6, 5.0, [0.0, 0.0], [640.0, 320.0], RngSeed(4));
        let f = channel_continuity_flow(profile.clone(), 1.7, 30.0, [0.6, 0.8]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = [rng.gen_range(0.0..640.0), rng.gen_range(0.0..320.0)];
            let flux: f64 = f.speed(p) * profile.depth(p);
            assert!((flux - 1.7 * 30.0).abs() <= 1e-12 * 51.0);
        }
    }

    #[test]
    fn depth_scaled_jacobian() {
        let inner: Arc<dyn AmbientFlow<f64>> = Arc::new(linear_gradient_flow());
        let f = DepthScaledFlow {
            inner,
            profile: BathymetryProfile::random_bumps(25.0, 6, 5.0, [0.0, 0.0], [640.0, 320.0], RngSeed(7)),
            reference_depth: 25.0,
        };
        assert_jacobian_matches_fd(&f, [0.0, 0.0], [640.0, 320.0], 8);
    }

    #[test]
    fn gridded_nodes_edges_and_outside() {
        let spec = GridSpec::new([0.0, 0.0], [10.0, 5.0], 4, 3).unwrap();
        let field = GriddedField::from_fn(spec, |p: [f64; 2]| [1.0 + p[0] * p[1] / 100.0, (p[0] / 7.0).sin()]);
        let f = gridded_flow(field.clone());
        for j in 0..3 {
            for i in 0..4 {
                assert_eq!(f.velocity(spec.node(i, j)), field.sample(i, j));
            }
        }
        assert_eq!(f.velocity([-50.0, 2.0 * 5.0]), field.sample(0, 2));
        assert_eq!(f.velocity([500.0, 500.0]), field.sample(3, 2));

        // continuity across interior cell edges
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let vertical = rng.gen::<bool>();
            let (a, b) = if vertical {
                let x = 10.0 * rng.gen_range(1..3) as f64;
                let y = rng.gen_range(0.0..10.0);
                ([x - 1e-12, y], [x + 1e-12, y])
            } else {
                let y = 5.0;
                let x = rng.gen_range(0.0..30.0);
                ([x, y - 1e-12], [x, y + 1e-12])
            };
            let (va, vb) = (f.velocity(a), f.velocity(b));
            assert!((va[0] - vb[0]).abs() < 1e-9 && (va[1] - vb[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn coastal_fields_conserve_flux() {
        let land = Headland { centre_x: 320.0, half_length: 160.0, height: 60.0 };
        let f = headland_field::<f64>(640.0, 320.0, 2.0, land, 5.0).unwrap();
        for i in [0, 40, 64, 80, 128] {
            let flux: f64 = (0..65).map(|j| f.sample(i, j)[0] * if j == 0 || j == 64 { 2.5 } else { 5.0 }).sum();
            assert!((flux - 640.0).abs() < 0.03 * 640.0, "x index {i}: {flux}");
        }
        assert_eq!(f.sample(64, 0), [0.0, 0.0]);
        assert!((f.sample(64, 40)[0] - 2.0 * 320.0 / 260.0).abs() < 1e-12);

        let island = Island { centre: [480.0, 300.0], half_length: 240.0, half_width: 120.0 };
        let g = island_field::<f64>(960.0, 480.0, 2.0, island, 10.0).unwrap();
        assert!((g.sample(48, 5)[0] - 2.0 * 300.0 / 180.0).abs() < 1e-12);
        assert_eq!(g.sample(48, 30), [0.0, 0.0]);
        assert_eq!(g.sample(0, 5), [2.0, 0.0]);
    }
}
