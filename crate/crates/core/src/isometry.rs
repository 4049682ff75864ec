//! Classification of single isometries and quasi-fixed sets of finite
//! subgroups.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::hypspace::{Dist, Site};
use crate::models::ends::end_limit;
use crate::models::{ActionModel, Cylinder, EndPoint, GroupElement, TreeModel};
use crate::{Error, Result};

/// Largest finite subgroup [`fix_set`] will enumerate.
pub const SUBGROUP_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsometryClass {
    Elliptic,
    Loxodromic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometryReport {
    pub element: GroupElement,
    pub class: IsometryClass,
    pub translation_length: Dist,
    /// Every sample point `x` has `d(x, gx) ≤ translation_length + slack`.
    pub axis_sample: Vec<Site>,
    pub slack: Dist,
    /// `(g⁺, g⁻)`, present exactly for loxodromics.
    pub ends: Option<(EndPoint, EndPoint)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixSet {
    pub subgroup_generators: Vec<GroupElement>,
    /// All elements of the generated subgroup, in shortlex order.
    pub elements: Vec<GroupElement>,
    pub k: Dist,
    pub region_radius: usize,
    pub sites: Vec<Site>,
    pub depth: usize,
    pub boundary_closure: Vec<Cylinder>,
}

impl FixSet {
    pub fn closure_contains(&self, xi: &EndPoint) -> bool {
        self.boundary_closure.binary_search(&xi.cylinder(self.depth)).is_ok()
    }
}

fn displacement(t: &TreeModel, g: &GroupElement, p: &[u32]) -> u64 {
    TreeModel::path_distance(p, &t.act_path(g, p))
}

/// The vertex of least displacement closest to the basepoint, with its
/// displacement. It lies on the geodesic from the basepoint to `g·v₀`.
pub(crate) fn min_displacement(t: &TreeModel, g: &GroupElement) -> (Vec<u32>, u64) {
    let target = t.orbit_path(g);
    let mut best: Option<(Vec<u32>, u64)> = None;
    for v in TreeModel::path_geodesic(&[], &target) {
        let d = displacement(t, g, &v);
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((v, d));
        }
    }
    best.expect("a geodesic has at least one vertex")
}

/// Exact translation length in a tree, cross-checked against
/// `max(0, d(v₀, g²v₀) − d(v₀, gv₀))`.
pub(crate) fn tree_translation_length(t: &TreeModel, g: &GroupElement) -> Result<u64> {
    let (_, scan) = min_displacement(t, g);
    let once = TreeModel::path_distance(&[], &t.orbit_path(g));
    let twice = TreeModel::path_distance(&[], &t.orbit_path(&t.mul(g, g)));
    let formula = twice.saturating_sub(once);
    if scan != formula {
        return Err(Error::OracleDisagreement { word: t.show(g) });
    }
    Ok(scan)
}

/// `inf_x d(x, gx)`. Exact on trees; on the plane `2 arcosh(|tr g| / 2)`,
/// returned as an approximate value.
pub fn translation_length(model: &ActionModel, g: &GroupElement) -> Result<Dist> {
    match model {
        ActionModel::Tree(t) => {
            t.check(g)?;
            Ok(Dist::from_int(tree_translation_length(t, g)? as i64))
        }
        ActionModel::Plane(p) => {
            let m = p.matrix(g)?;
            let tr = (m[0][0] + m[1][1]).abs();
            Ok(Dist::approx(if tr > 2.0 { 2.0 * (tr / 2.0).acosh() } else { 0.0 }))
        }
    }
}

pub fn is_loxodromic(t: &TreeModel, g: &GroupElement) -> Result<bool> {
    t.check(g)?;
    Ok(tree_translation_length(t, g)? > 0)
}

/// Classification on tree models. The plane model has parabolics and no
/// exact arithmetic, so it is refused here.
pub fn classify(model: &ActionModel, g: &GroupElement) -> Result<IsometryReport> {
    let t = model.as_tree()?;
    t.check(g)?;
    let ell = tree_translation_length(t, g)?;
    let (p, _) = min_displacement(t, g);
    if ell == 0 {
        return Ok(IsometryReport {
            element: g.clone(),
            class: IsometryClass::Elliptic,
            translation_length: Dist::ZERO,
            axis_sample: vec![t.site(p)],
            slack: Dist::ZERO,
            ends: None,
        });
    }
    let back = t.act_path(&t.inv(g), &p);
    let fwd = t.act_path(g, &p);
    let mut sample: Vec<Site> = TreeModel::path_geodesic(&back, &p).into_iter().map(|v| t.site(v)).collect();
    sample.extend(TreeModel::path_geodesic(&p, &fwd).into_iter().skip(1).map(|v| t.site(v)));
    Ok(IsometryReport {
        element: g.clone(),
        class: IsometryClass::Loxodromic,
        translation_length: Dist::from_int(ell as i64),
        axis_sample: sample,
        slack: Dist::ZERO,
        ends: Some(fixed_ends(t, g)?),
    })
}

fn exact_int(k: &Dist, what: &str) -> Result<u64> {
    k.as_rational()
        .map(|r| r.floor().to_integer())
        .and_then(|v| v.to_u64())
        .ok_or_else(|| Error::Domain(format!("{what} must be a finite exact length")))
}

/// Sites of the ball with `d(x, gx) ≤ ℓ(g) + r`, in ball order.
pub fn quasi_axis(t: &TreeModel, g: &GroupElement, r: &Dist, region_radius: usize) -> Result<Vec<Site>> {
    t.check(g)?;
    let ell = tree_translation_length(t, g)?;
    if ell == 0 {
        return Err(Error::Domain(format!("{} is elliptic and has no axis", t.show(g))));
    }
    let bound = ell + exact_int(r, "slack")?;
    Ok(t.ball_paths(region_radius)
        .into_par_iter()
        .filter(|p| displacement(t, g, p) <= bound)
        .map(|p| t.site(p))
        .collect())
}

/// The axis of a loxodromic as vertex paths: the segment from `g⁻ⁿ·p` to
/// `gⁿ·p` with `p` the axis vertex closest to the basepoint.
pub(crate) fn axis_segment(t: &TreeModel, g: &GroupElement, n: i64) -> Vec<Vec<u32>> {
    let (p, _) = min_displacement(t, g);
    let a = t.act_path(&t.pow(g, -n), &p);
    let b = t.act_path(&t.pow(g, n), &p);
    TreeModel::path_geodesic(&a, &b)
}

/// `(g⁺, g⁻)`: the attracting and repelling ends of a loxodromic.
pub fn fixed_ends(t: &TreeModel, g: &GroupElement) -> Result<(EndPoint, EndPoint)> {
    t.check(g)?;
    let ell = tree_translation_length(t, g)? as usize;
    if ell == 0 {
        return Err(Error::Domain(format!("{} is elliptic and fixes no pair of ends", t.show(g))));
    }
    let (p, _) = min_displacement(t, g);
    let cap = p.len() / ell + 16;
    let limit = |h: &GroupElement| {
        end_limit(|k| t.act_path(&t.pow(h, k as i64), &p), ell, cap)
            .ok_or_else(|| Error::Domain(format!("no periodic limit for {}", t.show(h))))
    };
    Ok((limit(g)?, limit(&t.inv(g))?))
}

/// All elements of `⟨gens⟩`, in shortlex order; refuses beyond `cap`.
pub fn subgroup_closure(t: &TreeModel, gens: &[GroupElement], cap: usize) -> Result<Vec<GroupElement>> {
    for g in gens {
        t.check(g)?;
    }
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut out = vec![t.identity()];
    seen.insert(t.lex_key(&t.identity()));
    let mut queue = VecDeque::from([t.identity()]);
    let steps: Vec<GroupElement> = gens.iter().flat_map(|g| [g.clone(), t.inv(g)]).collect();
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y = t.mul(&x, s);
            if seen.insert(t.lex_key(&y)) {
                if out.len() == cap {
                    return Err(Error::SubgroupTooLarge { cap });
                }
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    out.sort_by(|a, b| t.shortlex_cmp(a, b));
    Ok(out)
}

/// `Fix_K(H)` within the ball of `region_radius`, and the depth-`depth`
/// cylinders through its vertices on the boundary sphere of the ball.
pub fn fix_set(t: &TreeModel, gens: &[GroupElement], k: &Dist, region_radius: usize, depth: usize) -> Result<FixSet> {
    let kk = exact_int(k, "K")?;
    let elements = subgroup_closure(t, gens, SUBGROUP_CAP)?;
    let paths: Vec<Vec<u32>> = t
        .ball_paths(region_radius)
        .into_par_iter()
        .filter(|p| elements.iter().all(|h| displacement(t, h, p) <= kk))
        .collect();
    let closure: BTreeSet<Cylinder> = paths
        .iter()
        .filter(|p| p.len() == region_radius && p.len() >= depth)
        .map(|p| Cylinder(p[..depth].to_vec()))
        .collect();
    Ok(FixSet {
        subgroup_generators: gens.to_vec(),
        elements,
        k: *k,
        region_radius,
        sites: paths.into_iter().map(|p| t.site(p)).collect(),
        depth,
        boundary_closure: closure.into_iter().collect(),
    })
}

/// Largest number of elements of length at most `word_length_cap` moving
/// both `x` and `y` by at most `epsilon`, over ball pairs with
/// `d(x, y) ≥ m`. A lower bound for the acylindricity constant.
pub fn acylindricity_probe(
    t: &TreeModel,
    epsilon: &Dist,
    m: &Dist,
    region_radius: usize,
    word_length_cap: usize,
) -> Result<u64> {
    let eps = exact_int(epsilon, "epsilon")?;
    let m = m
        .as_rational()
        .filter(|r| *r <= Rational64::from_integer(2 * region_radius as i64))
        .ok_or_else(|| Error::Domain("M must be exact and at most twice the region radius".into()))?
        .ceil()
        .to_integer()
        .max(0) as u64;
    let ball = t.ball_paths(region_radius);
    let elements = t.elements_up_to(word_length_cap);
    let near: Vec<Vec<usize>> = elements
        .par_iter()
        .map(|g| (0..ball.len()).filter(|&i| displacement(t, g, &ball[i]) <= eps).collect())
        .collect();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    for set in &near {
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a..] {
                if TreeModel::path_distance(&ball[i], &ball[j]) >= m {
                    *counts.entry((i, j)).or_default() += 1;
                }
            }
        }
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(t: &TreeModel, w: &str) -> u64 {
        tree_translation_length(t, &t.parse(w).unwrap()).unwrap()
    }

    #[test]
    fn translation_lengths() {
        let f2 = TreeModel::free_group(2).unwrap();
        assert_eq!(tl(&f2, "ab"), 2);
        assert_eq!(tl(&f2, "1"), 0);
        assert_eq!(tl(&f2, "abA"), 1);
        assert_eq!(tl(&f2, "aabA"), 2);
        let m = TreeModel::modular();
        assert_eq!(tl(&m, "s"), 0);
        assert_eq!(tl(&m, "st"), 2);
        assert_eq!(tl(&m, "tst^2"), 0);
    }

    #[test]
    fn classification() {
        let m = TreeModel::modular();
        let am: ActionModel = m.clone().into();
        let r = classify(&am, &m.parse("st").unwrap()).unwrap();
        assert_eq!(r.class, IsometryClass::Loxodromic);
        assert_eq!(r.translation_length, Dist::from_int(2));
        assert!(r.ends.is_some());
        let r = classify(&am, &m.parse("t").unwrap()).unwrap();
        assert_eq!(r.class, IsometryClass::Elliptic);
        assert!(r.ends.is_none());
        let f2 = TreeModel::free_group(2).unwrap();
        let r = classify(&f2.clone().into(), &f2.parse("a").unwrap()).unwrap();
        assert_eq!(r.translation_length, Dist::from_int(1));
    }

    #[test]
    fn ends_of_free_words() {
        let f2 = TreeModel::free_group(2).unwrap();
        let (p, m) = fixed_ends(&f2, &f2.parse("ab").unwrap()).unwrap();
        assert_eq!(f2.show_end(&p), f2.show_end(&f2.end(vec![], vec![0, 2]).unwrap()));
        assert_eq!(m, f2.end(vec![], vec![3, 1]).unwrap());
        let (p, m) = fixed_ends(&f2, &f2.parse("bab^-1").unwrap()).unwrap();
        assert_eq!(p, f2.end(vec![2], vec![0]).unwrap());
        assert_eq!(m, f2.end(vec![2], vec![1]).unwrap());
    }

    #[test]
    fn quasi_axis_of_ab() {
        let f2 = TreeModel::free_group(2).unwrap();
        let g = f2.parse("ab").unwrap();
        let ax = quasi_axis(&f2, &g, &Dist::ZERO, 3).unwrap();
        let shown: BTreeSet<String> = ax.iter().map(|s| f2.show_path(s.path().unwrap())).collect();
        let want: BTreeSet<String> = ["B", "1", "a", "ab", "aba", "BA", "BAB"].iter().map(|s| s.to_string()).collect();
        assert_eq!(shown, want);
        assert_eq!(quasi_axis(&f2, &g, &Dist::from_int(6), 3).unwrap().len(), f2.ball_paths(3).len());
        assert!(quasi_axis(&f2, &f2.identity(), &Dist::ZERO, 3).is_err());
    }

    #[test]
    fn fix_sets_of_factors() {
        let m = TreeModel::modular();
        let s = m.parse("s").unwrap();
        let f = fix_set(&m, &[s], &Dist::ZERO, 4, 3).unwrap();
        assert_eq!(f.sites, vec![m.basepoint()]);
        let f = fix_set(&m, &[m.parse("t").unwrap()], &Dist::ZERO, 4, 3).unwrap();
        assert_eq!(f.sites, vec![m.site(vec![0])]);
        assert_eq!(f.elements.len(), 3);
        let f = fix_set(&m, &[], &Dist::from_int(0), 3, 2).unwrap();
        assert_eq!(f.sites.len(), m.ball_paths(3).len());
        let err = fix_set(&m, &[m.parse("st").unwrap()], &Dist::ZERO, 2, 1);
        assert!(matches!(err, Err(Error::SubgroupTooLarge { .. })));
    }

    #[test]
    fn acylindricity() {
        let f2 = TreeModel::free_group(2).unwrap();
        assert_eq!(acylindricity_probe(&f2, &Dist::ZERO, &Dist::from_int(2), 2, 6).unwrap(), 1);
        let m = TreeModel::modular();
        assert_eq!(acylindricity_probe(&m, &Dist::ZERO, &Dist::from_int(4), 3, 8).unwrap(), 1);
        assert_eq!(acylindricity_probe(&m, &Dist::ZERO, &Dist::ZERO, 3, 8).unwrap(), 3);
    }
}
