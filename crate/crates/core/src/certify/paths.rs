use num_rational::Rational64;

use super::freeness::{FreeProductWord, Letter};
use crate::hypspace::{Dist, Site, TreePoint};
use crate::models::{GroupElement, TreeModel};
use crate::{Error, Result};

/// `(x_{i+1}·x_{i−2})_{x_i}` at the start `x_i` of a `T`-segment, against
/// `|𝔭ᵢ|/2 − 2Δ + 100δ` for the current and the previous segment (`δ = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBound {
    pub segment: usize,
    pub value: Rational64,
    pub bound_current: Rational64,
    pub bound_previous: Rational64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    /// Lengths of `[m_{2i−1}, m_{2i+1}]`, from the base point through the
    /// segment midpoints to the final point.
    pub pieces: Vec<Rational64>,
    pub total_length: Rational64,
    pub endpoint_distance: Rational64,
    /// On a tree the broken path is a geodesic iff the two agree.
    pub exact_geodesic: bool,
    pub products: Vec<ProductBound>,
    pub all_bounds_hold: bool,
}

/// Builds the broken path of the ping-pong argument for `word` evaluated at
/// `T = γᴺ`, starting from `base` (a point fixed by the subgroup), and
/// checks it on the tree.
pub fn path_quasigeodesic_check(
    t: &TreeModel,
    gamma_n: &GroupElement,
    word: &FreeProductWord,
    base: &Site,
    delta_big: &Dist,
) -> Result<PathReport> {
    t.check(gamma_n)?;
    let x0 = t.path_of(base)?.to_vec();
    let big = delta_big
        .as_rational()
        .ok_or_else(|| Error::Domain("the path check needs an exact Delta".into()))?;
    let mut prefix = t.identity();
    let mut segments: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for l in &word.0 {
        match l {
            Letter::Sub(h) => prefix = t.mul(&prefix, h),
            Letter::Power(e) => {
                let start = t.act_path(&prefix, &x0);
                prefix = t.mul(&prefix, &t.pow(gamma_n, *e));
                segments.push((start, t.act_path(&prefix, &x0)));
            }
        }
    }
    let last = t.act_path(&prefix, &x0);
    let mut points = vec![TreePoint::Vertex(x0.clone())];
    for (a, b) in &segments {
        let len = TreeModel::path_distance(a, b) as i64;
        points.push(TreePoint::along(a, b, Rational64::new(len, 2))?);
    }
    points.push(TreePoint::Vertex(last.clone()));
    let pieces: Vec<Rational64> = points.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total_length = pieces.iter().copied().sum();
    let endpoint_distance = Rational64::from_integer(TreeModel::path_distance(&x0, &last) as i64);

    let d = |a: &[u32], b: &[u32]| Rational64::from_integer(TreeModel::path_distance(a, b) as i64);
    let products: Vec<ProductBound> = (1..segments.len())
        .map(|j| {
            let (xi, xn) = &segments[j];
            let (xp, xq) = &segments[j - 1];
            let value = (d(xn, xi) + d(xp, xi) - d(xn, xp)) / 2;
            let bound_current = d(xi, xn) / 2 - big * 2;
            let bound_previous = d(xp, xq) / 2 - big * 2;
            ProductBound { segment: j, value, bound_current, bound_previous, holds: value <= bound_current && value <= bound_previous }
        })
        .collect();
    let segments_long = segments.iter().all(|(a, b)| d(a, b) / 2 - big * 2 >= Rational64::from_integer(0));
    Ok(PathReport {
        exact_geodesic: total_length == endpoint_distance,
        all_bounds_hold: segments_long && products.iter().all(|p| p.holds),
        pieces,
        total_length,
        endpoint_distance,
        products,
    })
}
