//! Distances, geodesics, Gromov products, four-point estimates and shadows
//! over every model.
//!
//! Tree distances are exact integers wrapped in [`Dist::Exact`]; the plane
//! model produces [`Dist::Approx`] values, so callers can tell from the
//! value itself whether it may feed a certificate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::models::{ActionModel, Cylinder, ModelId, PlanePoint, TreeModel};
use crate::{Error, Result};

/// A length in a model space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    Exact(Rational64),
    Approx(f64),
    Infinite,
}

impl Dist {
    pub const ZERO: Dist = Dist::Exact(Rational64::new_raw(0, 1));

    pub fn from_int(n: i64) -> Dist {
        Dist::Exact(Rational64::from_integer(n))
    }

    pub fn exact(r: Rational64) -> Dist {
        Dist::Exact(r)
    }

    pub fn approx(v: f64) -> Dist {
        Dist::Approx(v)
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            Dist::Exact(r) => Some(*r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Dist::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Dist::Approx(v) => *v,
            Dist::Infinite => f64::INFINITY,
        }
    }

    pub fn is_approximate(&self) -> bool {
        matches!(self, Dist::Approx(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Dist::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Dist::Exact(r) => r.is_zero(),
            Dist::Approx(v) => *v == 0.0,
            Dist::Infinite => false,
        }
    }

    /// Multiplication by an exact non-negative factor.
    pub fn scale(&self, k: Rational64) -> Dist {
        match self {
            Dist::Exact(r) => Dist::Exact(r * k),
            Dist::Approx(v) => Dist::Approx(v * k.to_f64().unwrap_or(f64::NAN)),
            Dist::Infinite if k.is_zero() => Dist::ZERO,
            Dist::Infinite => Dist::Infinite,
        }
    }

    pub fn max(self, other: Dist) -> Dist {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `max(self − other, 0)`; `None` when `self` is infinite.
    pub fn saturating_sub(&self, other: &Dist) -> Option<Dist> {
        let d = match (self, other) {
            (Dist::Infinite, _) => return None,
            (_, Dist::Infinite) => return Some(Dist::ZERO),
            (Dist::Exact(a), Dist::Exact(b)) => Dist::Exact(a - b),
            _ => Dist::Approx(self.to_f64() - other.to_f64()),
        };
        Some(if d < Dist::ZERO { Dist::ZERO } else { d })
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Dist::Infinite, Dist::Infinite) => Some(Ordering::Equal),
            (Dist::Infinite, _) => Some(Ordering::Greater),
            (_, Dist::Infinite) => Some(Ordering::Less),
            (Dist::Exact(a), Dist::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl Add for Dist {
    type Output = Dist;

    fn add(self, rhs: Dist) -> Dist {
        match (self, rhs) {
            (Dist::Infinite, _) | (_, Dist::Infinite) => Dist::Infinite,
            (Dist::Exact(a), Dist::Exact(b)) => Dist::Exact(a + b),
            (a, b) => Dist::Approx(a.to_f64() + b.to_f64()),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Exact(r) => write!(f, "{r}"),
            Dist::Approx(v) => write!(f, "~{v}"),
            Dist::Infinite => f.write_str("inf"),
        }
    }
}

/// A point of a model space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    /// A tree vertex, as the edge-label path from the basepoint.
    Vertex { model: ModelId, path: Vec<u32> },
    Plane { model: ModelId, point: PlanePoint },
}

impl Site {
    pub fn vertex(model: ModelId, path: Vec<u32>) -> Site {
        Site::Vertex { model, path }
    }

    pub fn model(&self) -> ModelId {
        match self {
            Site::Vertex { model, .. } | Site::Plane { model, .. } => *model,
        }
    }

    pub fn path(&self) -> Option<&[u32]> {
        match self {
            Site::Vertex { path, .. } => Some(path),
            Site::Plane { .. } => None,
        }
    }
}

/// A Gromov product `(x·y)_z`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct GromovValue {
    pub value: Dist,
}

/// Sites along a geodesic; `approximate` is set for sampled plane geodesics.
#[derive(Clone, Debug, PartialEq)]
pub struct Geodesic {
    pub sites: Vec<Site>,
    pub approximate: bool,
}

/// Result of [`delta_estimate`]: a lower bound for the hyperbolicity constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaEstimate {
    pub value: Dist,
    /// Every quadruple of the ball was examined.
    pub exhaustive: bool,
    pub quadruples: u64,
}

fn same_model(model: &ActionModel, sites: &[&Site]) -> Result<()> {
    if sites.iter().all(|s| s.model() == model.id()) {
        Ok(())
    } else {
        Err(Error::ModelMismatch)
    }
}

pub fn distance(model: &ActionModel, x: &Site, y: &Site) -> Result<Dist> {
    same_model(model, &[x, y])?;
    match (model, x, y) {
        (ActionModel::Tree(_), Site::Vertex { path: p, .. }, Site::Vertex { path: q, .. }) => {
            Ok(Dist::from_int(TreeModel::path_distance(p, q) as i64))
        }
        (ActionModel::Plane(m), Site::Plane { point: z, .. }, Site::Plane { point: w, .. }) => {
            Ok(Dist::approx(m.distance(*z, *w)))
        }
        _ => Err(Error::ModelMismatch),
    }
}

/// `(x·y)_z = ½(d(x,z) + d(y,z) − d(x,y))`.
pub fn gromov_product(model: &ActionModel, x: &Site, y: &Site, z: &Site) -> Result<GromovValue> {
    let xz = distance(model, x, z)?;
    let yz = distance(model, y, z)?;
    let xy = distance(model, x, y)?;
    let value = match (xz, yz, xy) {
        (Dist::Exact(a), Dist::Exact(b), Dist::Exact(c)) => Dist::Exact((a + b - c) / 2),
        _ => Dist::approx(((xz.to_f64() + yz.to_f64() - xy.to_f64()) / 2.0).max(0.0)),
    };
    Ok(GromovValue { value })
}

/// Tree geodesics list every vertex; plane geodesics are sampled at about
/// unit spacing and flagged approximate.
pub fn geodesic(model: &ActionModel, x: &Site, y: &Site) -> Result<Geodesic> {
    same_model(model, &[x, y])?;
    match (model, x, y) {
        (ActionModel::Tree(t), Site::Vertex { path: p, .. }, Site::Vertex { path: q, .. }) => Ok(Geodesic {
            sites: TreeModel::path_geodesic(p, q).into_iter().map(|v| t.site(v)).collect(),
            approximate: false,
        }),
        (ActionModel::Plane(m), Site::Plane { point: z, .. }, Site::Plane { point: w, .. }) => {
            let d = m.distance(*z, *w);
            let steps = d.ceil().max(1.0) as usize;
            let (a, b) = (to_hyperboloid(*z), to_hyperboloid(*w));
            let mut sites = Vec::with_capacity(steps + 1);
            sites.push(x.clone());
            for k in 1..steps {
                let t = k as f64 / steps as f64;
                let (s0, s1) = (((1.0 - t) * d).sinh() / d.sinh(), (t * d).sinh() / d.sinh());
                let p = [0, 1, 2].map(|i| s0 * a[i] + s1 * b[i]);
                sites.push(m.site(from_hyperboloid(p)));
            }
            if steps > 0 && x != y {
                sites.push(y.clone());
            }
            Ok(Geodesic { sites, approximate: true })
        }
        _ => Err(Error::ModelMismatch),
    }
}

fn to_hyperboloid(z: PlanePoint) -> [f64; 3] {
    let r = z.x * z.x + z.y * z.y;
    [(r + 1.0) / (2.0 * z.y), (r - 1.0) / (2.0 * z.y), z.x / z.y]
}

fn from_hyperboloid(p: [f64; 3]) -> PlanePoint {
    let y = 1.0 / (p[0] - p[1]);
    PlanePoint::new(p[2] * y, y)
}

/// Four-point defect of a quadruple, given the six distances: half the gap
/// between the two largest of the three pair sums.
fn defect<T: Copy + PartialOrd + std::ops::Add<Output = T>>(xy: T, zw: T, xz: T, yw: T, xw: T, yz: T) -> (T, T) {
    let mut s = [xy + zw, xz + yw, xw + yz];
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    (s[0], s[1])
}

const QUADRUPLE_CAP: u128 = 30_000_000;

/// Largest four-point defect over quadruples from the ball of `radius`
/// around the basepoint.
///
/// Tree balls are scanned exhaustively when the number of quadruples is at
/// most 3·10⁷; larger balls use every quadruple through the basepoint plus
/// `samples` seeded random quadruples. The plane model always samples.
pub fn delta_estimate(model: &ActionModel, radius: usize, samples: usize, seed: u64) -> Result<DeltaEstimate> {
    if radius == 0 {
        return Err(Error::Domain("sample radius must be at least 1".into()));
    }
    match model {
        ActionModel::Tree(t) => Ok(tree_delta(t, radius, samples, seed)),
        ActionModel::Plane(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pick = || {
                let r = rng.gen_range(0.0..radius as f64);
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                // disk point of hyperbolic radius r, then the Cayley map to the half-plane
                let rho = (r / 2.0).tanh();
                let (u, v) = (rho * th.cos(), rho * th.sin());
                let den = (1.0 - u).powi(2) + v * v;
                PlanePoint::new(-2.0 * v / den, (1.0 - u * u - v * v) / den)
            };
            let mut best = 0.0f64;
            for _ in 0..samples {
                let q = [pick(), pick(), pick(), pick()];
                let d = |i: usize, j: usize| m.distance(q[i], q[j]);
                let (a, b) = defect(d(0, 1), d(2, 3), d(0, 2), d(1, 3), d(0, 3), d(1, 2));
                best = best.max((a - b) / 2.0);
            }
            Ok(DeltaEstimate { value: Dist::approx(best), exhaustive: false, quadruples: samples as u64 })
        }
    }
}

fn tree_delta(t: &TreeModel, radius: usize, samples: usize, seed: u64) -> DeltaEstimate {
    let ball = t.ball_paths(radius);
    let n = ball.len();
    let dist = |i: usize, j: usize| TreeModel::path_distance(&ball[i], &ball[j]);
    let choose4 = (n as u128) * (n as u128 - 1) * (n as u128 - 2) * (n as u128 - 3) / 24;
    let worst_of = |i: usize, j: usize, k: usize, l: usize| {
        let (a, b) = defect(dist(i, j), dist(k, l), dist(i, k), dist(j, l), dist(i, l), dist(j, k));
        a - b
    };
    let (gap, count, exhaustive) = if n < 4 {
        (0, 0, true)
    } else if choose4 <= QUADRUPLE_CAP {
        let gap = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut g = 0;
                for j in i + 1..n {
                    for k in j + 1..n {
                        for l in k + 1..n {
                            g = g.max(worst_of(i, j, k, l));
                        }
                    }
                }
                g
            })
            .max()
            .unwrap_or(0);
        (gap, choose4 as u64, true)
    } else {
        // ball[0] is the basepoint
        let based = (1..n)
            .into_par_iter()
            .map(|i| {
                let mut g = 0;
                for j in i + 1..n {
                    for k in j + 1..n {
                        g = g.max(worst_of(0, i, j, k));
                    }
                }
                g
            })
            .max()
            .unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = based;
        for _ in 0..samples {
            let q: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..n));
            g = g.max(worst_of(q[0], q[1], q[2], q[3]));
        }
        let based_count = (n as u64 - 1) * (n as u64 - 2) * (n as u64 - 3) / 6;
        (g, based_count + samples as u64, false)
    };
    DeltaEstimate { value: Dist::exact(Rational64::new(gap as i64, 2)), exhaustive, quadruples: count }
}

/// Depth-`depth` cylinders (from the basepoint) meeting the shadow of `s`
/// seen from `x0`: the ends `ξ` such that the ray `[x0, ξ)` passes through
/// some member of `s`. Trees have `δ = 0`, so no slack is added.
pub fn shadow(model: &ActionModel, s: &[Site], x0: &Site, depth: usize) -> Result<Vec<Cylinder>> {
    let t = model.as_tree()?;
    let from = t.path_of(x0)?;
    let sets = s
        .iter()
        .map(|x| t.path_of(x).map(|w| t.branch_beyond(w, from)))
        .collect::<Result<Vec<_>>>()?;
    Ok(t.cylinders(depth)
        .into_iter()
        .filter(|c| sets.iter().any(|set| set.as_ref().is_none_or(|set| t.set_meets(set, c))))
        .collect())
}

/// A vertex or an edge midpoint of a tree: the midpoint variant names the
/// edge by its endpoint farther from the basepoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreePoint {
    Vertex(Vec<u32>),
    Midpoint(Vec<u32>),
}

impl TreePoint {
    /// The point at distance `s` from `x` on `[x, y]`; `2s` must be an
    /// integer in `0..=2d(x, y)`.
    pub fn along(x: &[u32], y: &[u32], s: Rational64) -> Result<TreePoint> {
        let twice = s * 2;
        let d = TreeModel::path_distance(x, y) as i64;
        if !twice.is_integer() || twice < Rational64::zero() || twice.to_integer() > 2 * d {
            return Err(Error::Domain(format!("{s} is not a half-integer position on a segment of length {d}")));
        }
        let geo = TreeModel::path_geodesic(x, y);
        let k = twice.to_integer() as usize;
        if k.is_multiple_of(2) {
            return Ok(TreePoint::Vertex(geo[k / 2].clone()));
        }
        let (a, b) = (&geo[k / 2], &geo[k / 2 + 1]);
        Ok(TreePoint::Midpoint(if a.len() > b.len() { a.clone() } else { b.clone() }))
    }

    fn ends(&self) -> Vec<&[u32]> {
        match self {
            TreePoint::Vertex(p) => vec![p],
            TreePoint::Midpoint(p) => vec![p, &p[..p.len() - 1]],
        }
    }

    pub fn distance(&self, other: &TreePoint) -> Rational64 {
        if self == other {
            return Rational64::zero();
        }
        let mut best = u64::MAX;
        for a in self.ends() {
            for b in other.ends() {
                best = best.min(TreeModel::path_distance(a, b));
            }
        }
        let halves = matches!(self, TreePoint::Midpoint(_)) as i64 + matches!(other, TreePoint::Midpoint(_)) as i64;
        Rational64::from_integer(best as i64) + Rational64::new(halves, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::PlaneModel;

    fn f2() -> (ActionModel, TreeModel) {
        let t = TreeModel::free_group(2).unwrap();
        (t.clone().into(), t)
    }

    #[test]
    fn distances_in_trees() {
        let (m, t) = f2();
        let ab = t.act(&t.parse("ab").unwrap(), &t.basepoint()).unwrap();
        assert_eq!(distance(&m, &t.basepoint(), &ab).unwrap(), Dist::from_int(2));
        let bs = TreeModel::modular();
        let mm: ActionModel = bs.clone().into();
        let v = bs.act(&bs.parse("st").unwrap(), &bs.basepoint()).unwrap();
        assert_eq!(distance(&mm, &bs.basepoint(), &v).unwrap(), Dist::from_int(2));
        assert_eq!(geodesic(&mm, &bs.basepoint(), &v).unwrap().sites.len(), 3);
        assert!(matches!(distance(&m, &t.basepoint(), &bs.basepoint()), Err(Error::ModelMismatch)));
    }

    #[test]
    fn gromov_products() {
        let (m, t) = f2();
        let at = |w: &str| t.act(&t.parse(w).unwrap(), &t.basepoint()).unwrap();
        let one = t.basepoint();
        assert_eq!(gromov_product(&m, &at("a"), &at("b"), &one).unwrap().value, Dist::ZERO);
        assert_eq!(gromov_product(&m, &at("ab"), &at("a"), &one).unwrap().value, Dist::from_int(1));
        assert_eq!(gromov_product(&m, &at("ab"), &at("b"), &at("ab")).unwrap().value, Dist::ZERO);
    }

    #[test]
    fn geodesic_endpoints() {
        let (m, t) = f2();
        let x = t.act(&t.parse("ab").unwrap(), &t.basepoint()).unwrap();
        let g = geodesic(&m, &t.basepoint(), &x).unwrap();
        let shown: Vec<_> = g.sites.iter().map(|s| t.show_path(s.path().unwrap())).collect();
        assert_eq!(shown, ["1", "a", "ab"]);
        assert_eq!(geodesic(&m, &x, &x).unwrap().sites, vec![x]);
    }

    #[test]
    fn trees_are_zero_hyperbolic() {
        let (m, _) = f2();
        let e = delta_estimate(&m, 4, 0, 1).unwrap();
        assert!(e.exhaustive);
        assert_eq!(e.value, Dist::ZERO);
        let e = delta_estimate(&TreeModel::modular().into(), 4, 100, 1).unwrap();
        assert_eq!(e.value, Dist::ZERO);
    }

    #[test]
    fn plane_defect_is_bounded() {
        let m: ActionModel = PlaneModel::sanov().into();
        let e = delta_estimate(&m, 2, 1000, 3).unwrap();
        assert!(e.value.is_approximate());
        let v = e.value.to_f64();
        assert!(v > 0.0 && v <= std::f64::consts::SQRT_2.ln_1p(), "{v}");
    }

    #[test]
    fn plane_geodesic_is_flagged() {
        let p = PlaneModel::sanov();
        let m: ActionModel = p.clone().into();
        let y = p.site(PlanePoint::new(3.0, 0.5));
        let g = geodesic(&m, &p.basepoint(), &y).unwrap();
        assert!(g.approximate);
        let total: f64 = g
            .sites
            .windows(2)
            .map(|w| distance(&m, &w[0], &w[1]).unwrap().to_f64())
            .sum();
        assert!((total - distance(&m, &p.basepoint(), &y).unwrap().to_f64()).abs() < 1e-6);
    }

    #[test]
    fn shadows() {
        let (m, t) = f2();
        let at = |w: &str| t.act(&t.parse(w).unwrap(), &t.basepoint()).unwrap();
        let one = t.basepoint();
        let c = shadow(&m, &[at("a")], &one, 1).unwrap();
        assert_eq!(c, vec![t.cylinder(vec![0]).unwrap()]);
        assert_eq!(shadow(&m, std::slice::from_ref(&one), &one, 2).unwrap().len(), 12);
        let c = shadow(&m, &[at("ab")], &one, 2).unwrap();
        assert_eq!(c, vec![t.cylinder(vec![0, 2]).unwrap()]);
    }

    #[test]
    fn half_points() {
        let x = vec![0, 2];
        let y = vec![1];
        let m = TreePoint::along(&x, &y, Rational64::new(3, 2)).unwrap();
        assert_eq!(m, TreePoint::Midpoint(vec![0]));
        assert_eq!(m.distance(&TreePoint::Vertex(x.clone())), Rational64::new(3, 2));
        let m2 = TreePoint::along(&x, &y, Rational64::new(1, 2)).unwrap();
        assert_eq!(m.distance(&m2), Rational64::from_integer(1));
    }
}
