//! Turbine layouts, the site box they live in, and layout seeding.
//!
//! A layout is the flat coordinate vector `(x1, y1, ..., xN, yN)` that every
//! optimizer works on. Random draws go through [`RngSeed::rng`], which is
//! ChaCha8 seeded from a `u64`, so a fixed seed reproduces a run exactly.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::real::{Real, Vec2};

/// Rotor geometry used by the wake models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineSpec<T> {
    pub diameter: T,
    pub thrust_coefficient: T,
    /// Informational only; nothing enforces spacing.
    pub hub_exclusion_radius: T,
}

impl<T: Real> TurbineSpec<T> {
    pub fn new(diameter: T, thrust_coefficient: T) -> Result<Self> {
        if !(diameter > T::zero()) {
            return Err(Error::InvalidTurbine(format!("diameter {diameter} must be positive")));
        }
        if !(thrust_coefficient > T::zero() && thrust_coefficient < T::one()) {
            return Err(Error::InvalidTurbine(format!("thrust coefficient {thrust_coefficient} must lie in (0, 1)")));
        }
        Ok(TurbineSpec { diameter, thrust_coefficient, hub_exclusion_radius: diameter / T::lit(2.0) })
    }

    pub fn radius(&self) -> T {
        self.diameter / T::lit(2.0)
    }
}

impl<T: Real> Default for TurbineSpec<T> {
    /// 20 m rotor (10 m radius), thrust coefficient 0.84.
    fn default() -> Self {
        TurbineSpec::new(T::lit(20.0), T::lit(0.84)).unwrap()
    }
}

/// Axis-aligned box the turbines must stay inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> Site<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        if !(x_min < x_max) || !(y_min < y_max) {
            return Err(Error::InvalidSite(format!("[{x_min}, {x_max}] x [{y_min}, {y_max}] is empty")));
        }
        Ok(Site { x_min, x_max, y_min, y_max })
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn clamp(&self, p: Vec2<T>) -> Vec2<T> {
        [p[0].max(self.x_min).min(self.x_max), p[1].max(self.y_min).min(self.y_max)]
    }

    /// Bounds of coordinate `k` of a flat layout vector.
    pub fn axis_bounds(&self, k: usize) -> (T, T) {
        if k.is_multiple_of(2) {
            (self.x_min, self.x_max)
        } else {
            (self.y_min, self.y_max)
        }
    }
}

impl<T: Real> Default for Site<T> {
    /// The idealised 320 m x 160 m site with its corner at the origin.
    fn default() -> Self {
        Site::new(T::zero(), T::lit(320.0), T::zero(), T::lit(160.0)).unwrap()
    }
}

/// Flattened turbine coordinates `(x1, y1, ..., xN, yN)` in metres.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout<T> {
    coords: Vec<T>,
}

impl<T: Real> Layout<T> {
    pub fn from_coords(coords: Vec<T>) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::OddLayout(coords.len()));
        }
        Ok(Layout { coords })
    }

    pub fn pack(positions: &[Vec2<T>]) -> Self {
        Layout { coords: positions.iter().flat_map(|p| p.iter().copied()).collect() }
    }

    pub fn unpack(&self) -> Vec<Vec2<T>> {
        self.positions().collect()
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = Vec2<T>> + '_ {
        self.coords.chunks_exact(2).map(|c| [c[0], c[1]])
    }

    pub fn n_turbines(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn position(&self, i: usize) -> Vec2<T> {
        [self.coords[2 * i], self.coords[2 * i + 1]]
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [T] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `self + h * direction`, no projection.
    pub fn offset(&self, direction: &[T], h: T) -> Result<Self> {
        if direction.len() != self.coords.len() {
            return Err(Error::LengthMismatch { left: self.coords.len(), right: direction.len() });
        }
        Ok(Layout { coords: self.coords.iter().zip(direction).map(|(&m, &d)| m + h * d).collect() })
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Layout<U> {
        Layout { coords: self.coords.iter().map(|c| U::lit(c.to_f64_lossy())).collect() }
    }
}

/// Clamp every turbine componentwise into the site box.
pub fn project_to_site<T: Real>(layout: &Layout<T>, site: &Site<T>) -> Layout<T> {
    let mut out = layout.clone();
    project_in_place(out.coords_mut(), site);
    out
}

pub(crate) fn project_in_place<T: Real>(coords: &mut [T], site: &Site<T>) {
    for (k, c) in coords.iter_mut().enumerate() {
        let (lo, hi) = site.axis_bounds(k);
        *c = c.max(lo).min(hi);
    }
}

/// `n_rows * n_cols` turbines at cell centres, row-major (rows along y).
pub fn regular_grid_layout<T: Real>(n_rows: usize, n_cols: usize, site: &Site<T>) -> Layout<T> {
    grid_in_box(n_rows, n_cols, site)
}

fn grid_in_box<T: Real>(n_rows: usize, n_cols: usize, site: &Site<T>) -> Layout<T> {
    let half = T::lit(0.5);
    let dx = site.width() / T::lit(n_cols.max(1) as f64);
    let dy = site.height() / T::lit(n_rows.max(1) as f64);
    let mut positions = Vec::with_capacity(n_rows * n_cols);
    for i in 0..n_rows {
        for j in 0..n_cols {
            positions.push([site.x_min + (T::lit(j as f64) + half) * dx, site.y_min + (T::lit(i as f64) + half) * dy]);
        }
    }
    Layout::pack(&positions)
}

/// Seed for every random draw in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// ChaCha8 stream seeded with `seed_from_u64`.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream derived from this seed, e.g. one per stage.
    pub fn derive(self, stream: u64) -> RngSeed {
        // splitmix64 finaliser
        let mut z = self.0 ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// Uniform draw in `[lo, hi]` through an `f64` sample.
pub(crate) fn uniform_in<T: Real, R: Rng + ?Sized>(rng: &mut R, lo: T, hi: T) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * T::lit(u)
}

pub fn random_layout<T: Real, R: Rng + ?Sized>(n_turbines: usize, site: &Site<T>, rng: &mut R) -> Layout<T> {
    let coords = (0..2 * n_turbines)
        .map(|k| {
            let (lo, hi) = site.axis_bounds(k);
            uniform_in(rng, lo, hi)
        })
        .collect();
    Layout { coords }
}

/// `n` points equispaced on the segment `a -> b`; a single point sits at the midpoint.
fn line_layout<T: Real>(n: usize, a: Vec2<T>, b: Vec2<T>) -> Layout<T> {
    let half = T::lit(0.5);
    let positions: Vec<Vec2<T>> = if n == 1 {
        vec![[(a[0] + b[0]) * half, (a[1] + b[1]) * half]]
    } else {
        let last = T::lit((n - 1) as f64);
        (0..n)
            .map(|k| {
                let t = T::lit(k as f64) / last;
                [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
            })
            .collect()
    };
    Layout::pack(&positions)
}

/// Every `(rows, cols)` with `rows * cols == n`, rows ascending.
pub fn factor_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).filter(|&r| n.is_multiple_of(r)).map(|r| (r, n / r)).collect()
}

/// Deterministic seed family followed by `n_random` uniform layouts.
///
/// Order: bottom, top, left and right edge lines; the two diagonals; one
/// cell-centred grid per factor pair of `n_turbines`; then the random ones.
/// Lines are inset from the site edges by `margin` (one rotor diameter in
/// the presets). Everything is projected into the site.
pub fn seeded_layouts<T: Real>(
    n_turbines: usize,
    site: &Site<T>,
    seed: RngSeed,
    n_random: usize,
    margin: T,
) -> Result<Vec<Layout<T>>> {
    if n_turbines == 0 {
        return Err(Error::TooFewTurbines { needed: 1, got: 0 });
    }
    let half = T::lit(0.5);
    let mx = margin.min(site.width() * half).max(T::zero());
    let my = margin.min(site.height() * half).max(T::zero());
    let (x0, x1) = (site.x_min + mx, site.x_max - mx);
    let (y0, y1) = (site.y_min + my, site.y_max - my);

    let mut out = vec![
        line_layout(n_turbines, [x0, y0], [x1, y0]),
        line_layout(n_turbines, [x0, y1], [x1, y1]),
        line_layout(n_turbines, [x0, y0], [x0, y1]),
        line_layout(n_turbines, [x1, y0], [x1, y1]),
        line_layout(n_turbines, [x0, y0], [x1, y1]),
        line_layout(n_turbines, [x0, y1], [x1, y0]),
    ];
    out.extend(factor_pairs(n_turbines).into_iter().map(|(r, c)| regular_grid_layout(r, c, site)));
    let mut rng = seed.rng();
    out.extend((0..n_random).map(|_| random_layout(n_turbines, site, &mut rng)));
    Ok(out.iter().map(|l| project_to_site(l, site)).collect())
}

pub fn min_pairwise_distance<T: Real>(layout: &Layout<T>) -> Result<T> {
    let n = layout.n_turbines();
    if n < 2 {
        return Err(Error::TooFewTurbines { needed: 2, got: n });
    }
    let mut best = T::infinity();
    for i in 0..n {
        let p = layout.position(i);
        for j in i + 1..n {
            let q = layout.position(j);
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    Ok(best)
}

/// `turbine,x,y` with 1-based turbine numbers and 6 decimals.
pub fn layout_to_csv<T: Real>(layout: &Layout<T>) -> String {
    let mut s = String::from("turbine,x,y\n");
    for (i, p) in layout.positions().enumerate() {
        let _ = writeln!(s, "{},{:.6},{:.6}", i + 1, p[0].to_f64_lossy(), p[1].to_f64_lossy());
    }
    s
}

pub fn write_layout_csv<T: Real>(layout: &Layout<T>, path: &Path) -> Result<()> {
    std::fs::write(path, layout_to_csv(layout)).map_err(|e| Error::io(path, e))
}

pub fn read_layout_csv<T: Real>(path: &Path) -> Result<Layout<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_layout_csv(&text, path)
}

pub fn parse_layout_csv<T: Real>(text: &str, path: &Path) -> Result<Layout<T>> {
    let bad = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "turbine,x,y" => {}
        _ => return Err(bad(1, "expected header `turbine,x,y`".into())),
    }
    let mut coords = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(no + 1, format!("expected 3 fields, got {}", fields.len())));
        }
        for f in &fields[1..] {
            let v: f64 = f.trim().parse().map_err(|e| bad(no + 1, format!("{e}")))?;
            coords.push(T::lit(v));
        }
    }
    Layout::from_coords(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn site() -> Site<f64> {
        Site::default()
    }

    #[test]
    fn pack_examples() {
        assert_eq!(Layout::pack(&[[0.0, 0.0]]).coords(), &[0.0, 0.0]);
        assert_eq!(Layout::pack(&[[1.0, 2.0], [3.0, 4.0]]).coords(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(Layout::<f64>::from_coords(vec![1.0]), Err(Error::OddLayout(1))));
    }

    #[test]
    fn projection_examples() {
        let l = Layout::pack(&[[-5.0, 50.0], [100.0, 80.0], [400.0, 200.0]]);
        let p = project_to_site(&l, &site());
        assert_eq!(p.unpack(), vec![[0.0, 50.0], [100.0, 80.0], [320.0, 160.0]]);
    }

    #[test]
    fn grid_examples() {
        assert_eq!(regular_grid_layout(1, 1, &site()).coords(), &[160.0, 80.0]);
        let g = regular_grid_layout(2, 4, &site());
        assert_eq!(g.n_turbines(), 8);
        for p in g.positions() {
            assert!([40.0, 120.0, 200.0, 280.0].contains(&p[0]));
            assert!([40.0, 120.0].contains(&p[1]));
        }
        assert_eq!(min_pairwise_distance(&g).unwrap(), 80.0);

        let g = regular_grid_layout(4, 4, &site());
        let pts = g.unpack();
        assert!(pts.iter().all(|&p| site().contains(p)));
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                assert_ne!(pts[i], pts[j]);
            }
        }
    }

    #[test]
    fn edge_seed_uses_margin() {
        let seeds = seeded_layouts(4, &site(), RngSeed(1), 0, 20.0).unwrap();
        // bottom edge: y = 0 + 20, x from 20 to 300 in thirds
        let bottom = seeds[0].unpack();
        let xs: Vec<f64> = bottom.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![20.0, 20.0 + 280.0 / 3.0, 20.0 + 560.0 / 3.0, 300.0]);
        assert!(bottom.iter().all(|p| p[1] == 20.0));
        // diagonal from (20, 20) to (300, 140)
        let diag = seeds[4].unpack();
        assert_eq!(diag[0], [20.0, 20.0]);
        assert_eq!(diag[3], [300.0, 140.0]);
    }

    #[test]
    fn grid_seeds_follow_factor_pairs() {
        assert_eq!(factor_pairs(6), vec![(1, 6), (2, 3), (3, 2), (6, 1)]);
        let seeds = seeded_layouts(6, &site(), RngSeed(0), 3, 20.0).unwrap();
        assert_eq!(seeds.len(), 6 + 4 + 3);
        assert_eq!(seeds[7], regular_grid_layout(2, 3, &site()));
    }

    #[test]
    fn seeded_layouts_are_deterministic() {
        let a = seeded_layouts(5, &site(), RngSeed(42), 10, 20.0).unwrap();
        let b = seeded_layouts(5, &site(), RngSeed(42), 10, 20.0).unwrap();
        let c = seeded_layouts(5, &site(), RngSeed(43), 10, 20.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(seeded_layouts::<f64>(0, &site(), RngSeed(0), 0, 20.0).is_err());
    }

    #[test]
    fn pairwise_distance_examples() {
        assert_eq!(min_pairwise_distance(&Layout::pack(&[[0.0, 0.0], [3.0, 4.0]])).unwrap(), 5.0);
        assert_eq!(min_pairwise_distance(&Layout::pack(&[[1.0, 1.0], [1.0, 1.0]])).unwrap(), 0.0);
        assert!(matches!(
            min_pairwise_distance(&Layout::pack(&[[1.0, 1.0]])),
            Err(Error::TooFewTurbines { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let l = Layout::pack(&[[1.5, 2.25], [300.125, 0.0]]);
        let text = layout_to_csv(&l);
        assert_eq!(text, "turbine,x,y\n1,1.500000,2.250000\n2,300.125000,0.000000\n");
        let back: Layout<f64> = parse_layout_csv(&text, Path::new("mem")).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TurbineSpec::new(0.0, 0.5).is_err());
        assert!(TurbineSpec::new(20.0, 1.0).is_err());
        assert!(Site::new(1.0, 1.0, 0.0, 1.0).is_err());
        let spec: TurbineSpec<f64> = TurbineSpec::default();
        assert_eq!(spec.diameter, 20.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pack_unpack_round_trip(pts in proptest::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 0..20)) {
                let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
                prop_assert_eq!(Layout::pack(&pts).unpack(), pts);
            }

            #[test]
            fn projection_idempotent_and_contained(coords in proptest::collection::vec(-500f64..800.0, 0..16)) {
                let mut coords = coords;
                if coords.len() % 2 == 1 { coords.pop(); }
                let l = Layout::from_coords(coords).unwrap();
                let once = project_to_site(&l, &site());
                prop_assert_eq!(project_to_site(&once, &site()), once.clone());
                prop_assert!(once.positions().all(|p| site().contains(p)));
            }

            #[test]
            fn seeds_inside_site(n in 1usize..13, seed in any::<u64>()) {
                let seeds = seeded_layouts(n, &site(), RngSeed(seed), 4, 20.0).unwrap();
                for l in &seeds {
                    prop_assert_eq!(l.n_turbines(), n);
                    prop_assert!(l.positions().all(|p| site().contains(p)));
                }
            }
        }
    }
}
