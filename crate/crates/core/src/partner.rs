//! Construction of ping-pong partners: loxodromics with prescribed ends,
//! the escape search, the power selection, and the end-to-end pipeline.

use std::collections::HashSet;

use num_rational::Rational64;
use rayon::prelude::*;

use crate::certify::{freeness_certificate, FreenessCertificate, ENUMERATION_CAP};
use crate::hypspace::Dist;
use crate::isometry::{self, fix_set, fixed_ends, is_loxodromic, FixSet};
use crate::models::{ActionModel, Cylinder, EndPoint, GroupElement, TreeModel};
use crate::{Error, Result};

/// A loxodromic `g₁ⁿ g₂ᵏ` found by [`loa_construct`].
#[derive(Clone, Debug, PartialEq)]
pub struct LoaOutcome {
    pub element: GroupElement,
    pub n: u32,
    pub k: u32,
    pub plus: EndPoint,
    pub minus: EndPoint,
}

fn ends_within(t: &TreeModel, w: &GroupElement, v: &Cylinder, u: &Cylinder) -> Result<Option<(EndPoint, EndPoint)>> {
    if !is_loxodromic(t, w)? {
        return Ok(None);
    }
    let (p, m) = fixed_ends(t, w)?;
    Ok((p.in_cylinder(v) && m.in_cylinder(u)).then_some((p, m)))
}

/// Smallest `(n, k)` in lexicographic order, both in `1..=max_exp`, such that
/// `g₁ⁿ g₂ᵏ` is loxodromic with attracting end in `v` and repelling end in
/// `u`. Requires `g₁⁺ ∈ v`, `g₂⁻ ∈ u` and disjoint fixed pairs.
pub fn loa_construct(
    t: &TreeModel,
    g1: &GroupElement,
    g2: &GroupElement,
    u: &Cylinder,
    v: &Cylinder,
    max_exp: u32,
) -> Result<LoaOutcome> {
    for g in [g1, g2] {
        if !is_loxodromic(t, g)? {
            return Err(Error::Domain(format!("{} is not loxodromic", t.show(g))));
        }
    }
    let (p1, m1) = fixed_ends(t, g1)?;
    let (p2, m2) = fixed_ends(t, g2)?;
    if [&p1, &m1].iter().any(|e| **e == p2 || **e == m2) {
        return Err(Error::Domain(format!(
            "{} and {} share a fixed end",
            t.show(g1),
            t.show(g2)
        )));
    }
    if !p1.in_cylinder(v) || !m2.in_cylinder(u) {
        return Err(Error::Domain("the target cylinders must contain g1+ and g2-".into()));
    }
    for n in 1..=max_exp {
        let a = t.pow(g1, n as i64);
        for k in 1..=max_exp {
            let w = t.mul(&a, &t.pow(g2, k as i64));
            if let Some((plus, minus)) = ends_within(t, &w, v, u)? {
                return Ok(LoaOutcome { element: w, n, k, plus, minus });
            }
        }
    }
    Err(Error::SearchExhausted(format!("no g1^n g2^k with n, k <= {max_exp}")))
}

/// Limits for [`escape_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EscapeBudget {
    /// Longest candidate (or conjugator) examined in shortlex scans.
    pub max_len: usize,
    /// Largest exponent tried in product constructions.
    pub max_exp: u32,
}

impl Default for EscapeBudget {
    fn default() -> Self {
        EscapeBudget { max_len: 6, max_exp: 4 }
    }
}

/// Per-subgroup data the escape search verified.
#[derive(Clone, Debug, PartialEq)]
pub struct Avoidance {
    pub fix: FixSet,
    pub ends_outside_closure: bool,
    pub pair_preservation_checked: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeOutcome {
    pub gamma: GroupElement,
    pub plus: EndPoint,
    pub minus: EndPoint,
    /// One entry per nontrivial input subgroup, in input order.
    pub evidence: Vec<Avoidance>,
    /// Which construction produced `gamma`.
    pub route: &'static str,
}

struct Constraints<'a> {
    t: &'a TreeModel,
    fixes: Vec<FixSet>,
}

impl Constraints<'_> {
    fn ends(&self, g: &GroupElement) -> Result<Option<(EndPoint, EndPoint)>> {
        if is_loxodromic(self.t, g)? {
            fixed_ends(self.t, g).map(Some)
        } else {
            Ok(None)
        }
    }

    fn avoids(&self, i: usize, ends: &(EndPoint, EndPoint)) -> bool {
        !self.fixes[i].closure_contains(&ends.0) && !self.fixes[i].closure_contains(&ends.1)
    }

    fn avoids_all(&self, ends: &(EndPoint, EndPoint)) -> bool {
        (0..self.fixes.len()).all(|i| self.avoids(i, ends))
    }

    fn pair_free(&self, ends: &(EndPoint, EndPoint)) -> bool {
        self.fixes.iter().all(|f| {
            f.elements.iter().filter(|h| !h.is_identity()).all(|h| {
                let a = self.t.act_end(h, &ends.0);
                let b = self.t.act_end(h, &ends.1);
                !((a == ends.0 && b == ends.1) || (a == ends.1 && b == ends.0))
            })
        })
    }

    fn good(&self, g: &GroupElement) -> Result<Option<(EndPoint, EndPoint)>> {
        Ok(self.ends(g)?.filter(|e| self.avoids_all(e) && self.pair_free(e)))
    }
}

fn loxodromics_upto(t: &TreeModel, max_len: usize) -> impl Iterator<Item = GroupElement> + '_ {
    (1..=max_len)
        .flat_map(move |l| t.elements_of_length(l))
        .filter(move |g| is_loxodromic(t, g).unwrap_or(false))
}

/// Checks that every subgroup is finite, generated by elliptics, and does
/// not quasi-fix the whole ball. Trivial subgroups impose nothing and are
/// dropped; the returned indices say which inputs were kept.
pub(crate) fn prepare_subgroups(
    t: &TreeModel,
    subgroups: &[Vec<GroupElement>],
    region_radius: usize,
    depth: usize,
) -> Result<(Vec<usize>, Vec<FixSet>)> {
    let ball = t.ball_paths(region_radius).len();
    let mut kept = Vec::new();
    let mut fixes = Vec::new();
    for (i, gens) in subgroups.iter().enumerate() {
        for g in gens {
            t.check(g)?;
            if is_loxodromic(t, g)? {
                return Err(Error::NeedsEllipticization(t.show(g)));
            }
        }
        let fix = fix_set(t, gens, &Dist::ZERO, region_radius, depth)?;
        if fix.elements.len() == 1 {
            continue;
        }
        if fix.sites.len() == ball {
            return Err(Error::Domain(format!(
                "subgroup {i} fixes the whole ball of radius {region_radius}; a finite normal subgroup is likely"
            )));
        }
        kept.push(i);
        fixes.push(fix);
    }
    Ok((kept, fixes))
}

/// A loxodromic whose ends avoid the closures of every `Fix₀(Hᵢ)` and whose
/// end pair no nontrivial element of any `Hᵢ` preserves.
///
/// Follows the chain construction: start from the first loxodromic, and
/// while some closure still contains an end, combine with a loxodromic
/// avoiding that closure through [`loa_construct`]-style powers. If the
/// result still has its pair preserved, try `(gⁿh⁻¹gⁿh)ⁿg⁻ⁿ` over
/// conjugators `h` in shortlex order. Every output is re-verified.
pub fn escape_search(
    t: &TreeModel,
    subgroups: &[Vec<GroupElement>],
    region_radius: usize,
    depth: usize,
    budget: EscapeBudget,
) -> Result<EscapeOutcome> {
    let (_, fixes) = prepare_subgroups(t, subgroups, region_radius, depth)?;
    let cons = Constraints { t, fixes };
    let finish = |gamma: GroupElement, ends: (EndPoint, EndPoint), route| EscapeOutcome {
        gamma,
        plus: ends.0,
        minus: ends.1,
        evidence: cons
            .fixes
            .iter()
            .map(|f| Avoidance { fix: f.clone(), ends_outside_closure: true, pair_preservation_checked: true })
            .collect(),
        route,
    };

    let mut gamma = loxodromics_upto(t, budget.max_len)
        .next()
        .ok_or_else(|| Error::SearchExhausted("no loxodromic element within the length budget".into()))?;
    let mut route = "first loxodromic";
    let mut ends = cons.ends(&gamma)?.expect("loxodromic");

    // chain: repair one subgroup at a time
    while let Some(i) = (0..cons.fixes.len()).find(|&i| !cons.avoids(i, &ends)) {
        let helper = loxodromics_upto(t, budget.max_len)
            .find(|g| cons.ends(g).ok().flatten().is_some_and(|e| cons.avoids(i, &e)))
            .ok_or_else(|| Error::SearchExhausted(format!("no loxodromic avoids the fixed closure of subgroup {i}")))?;
        let helper_ends = cons.ends(&helper)?.expect("loxodromic");
        if cons.avoids_all(&helper_ends) {
            gamma = helper;
            ends = helper_ends;
            route = "chain";
            continue;
        }
        let repaired = (1..=budget.max_exp).find_map(|n| {
            let w = t.mul(&t.pow(&helper, n as i64), &t.pow(&gamma, n as i64));
            let e = cons.ends(&w).ok().flatten()?;
            (0..=i).all(|j| cons.avoids(j, &e)).then_some((w, e))
        });
        let (w, e) = repaired.ok_or_else(|| Error::SearchExhausted(format!("chain step for subgroup {i} exceeded the exponent budget")))?;
        gamma = w;
        ends = e;
        route = "chain";
    }
    if cons.pair_free(&ends) {
        return Ok(finish(gamma, ends, route));
    }

    // conjugate construction
    let g = gamma;
    let conjugators: Vec<GroupElement> = (1..=budget.max_len).flat_map(|l| t.elements_of_length(l)).collect();
    let found = conjugators
        .par_iter()
        .map(|h| -> Result<Option<(GroupElement, (EndPoint, EndPoint))>> {
            let hinv = t.inv(h);
            for n in 1..=budget.max_exp as i64 {
                let gn = t.pow(&g, n);
                let inner = t.product([&gn, &hinv, &gn, h]);
                let w = t.mul(&t.pow(&inner, n), &t.pow(&g, -n));
                if let Some(e) = cons.good(&w)? {
                    return Ok(Some((w, e)));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((w, e)) = found.into_iter().flatten().next() {
        return Ok(finish(w, e, "conjugate construction"));
    }

    // last resort: plain shortlex scan
    for w in loxodromics_upto(t, budget.max_len) {
        if let Some(e) = cons.good(&w)? {
            return Ok(finish(w, e, "shortlex scan"));
        }
    }
    Err(Error::SearchExhausted("no partner candidate within the escape budget".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubgroupConstants {
    pub subgroup: Vec<GroupElement>,
    pub d_observed: Dist,
    pub dprime_observed: Dist,
    pub ends_outside_closure: bool,
    pub pair_preservation_checked: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartnerResult {
    pub gamma: GroupElement,
    pub translation_length: Dist,
    pub power_n: u64,
    pub delta_big: Dist,
    pub c: Dist,
    pub delta: Dist,
    pub k1: Dist,
    pub k2: Dist,
    pub region_radius: usize,
    /// One entry per nontrivial subgroup, in input order.
    pub per_subgroup: Vec<SubgroupConstants>,
}

fn diameter(paths: &[Vec<u32>]) -> u64 {
    let mut best = 0;
    for (i, p) in paths.iter().enumerate() {
        for q in &paths[i + 1..] {
            best = best.max(TreeModel::path_distance(p, q));
        }
    }
    best
}

/// Length of the overlap between the axis of `g` and its translate by `h`.
/// The two lines must have different end pairs.
fn axis_overlap(t: &TreeModel, g: &GroupElement, h: &GroupElement) -> u64 {
    let mut n = 4;
    loop {
        let seg = isometry::axis_segment(t, g, n);
        let image: Vec<Vec<u32>> = seg.iter().map(|p| t.act_path(h, p)).collect();
        let mine: HashSet<&Vec<u32>> = seg.iter().collect();
        let common: Vec<&Vec<u32>> = image.iter().filter(|p| mine.contains(p)).collect();
        let touches = |s: &[Vec<u32>]| common.iter().any(|p| **p == s[0] || **p == s[s.len() - 1]);
        if common.is_empty() || !(touches(&seg) || touches(&image)) || n >= 256 {
            return common.len().saturating_sub(1) as u64;
        }
        n *= 2;
    }
}

/// Largest overlap of the axis of `gamma` with a translate `h·axis` having a
/// different end pair, over `h` of length at most `region_radius`.
pub fn dprime_observed(t: &TreeModel, gamma: &GroupElement, region_radius: usize) -> Result<u64> {
    let (plus, minus) = fixed_ends(t, gamma)?;
    let hs = t.elements_up_to(region_radius);
    Ok(hs
        .par_iter()
        .filter(|h| {
            let (a, b) = (t.act_end(h, &plus), t.act_end(h, &minus));
            !((a == plus && b == minus) || (a == minus && b == plus))
        })
        .map(|h| axis_overlap(t, gamma, h))
        .max()
        .unwrap_or(0))
}

/// Measures `D` and `D′` within the ball and applies
/// `Δ = max{D, D′, 1000δ, K₁, K₂²}`, `C = 10Δ + 1000δ`, `N = ⌈C / ℓ(γ)⌉`.
pub fn pingpong_power(
    model: &ActionModel,
    gamma: &GroupElement,
    subgroups: &[Vec<GroupElement>],
    region_radius: usize,
    depth: usize,
) -> Result<PartnerResult> {
    let t = model.as_tree()?;
    let ell = isometry::tree_translation_length(t, gamma)?;
    if ell == 0 {
        return Err(Error::Domain(format!("{} is not loxodromic", t.show(gamma))));
    }
    let (kept, fixes) = prepare_subgroups(t, subgroups, region_radius, depth)?;
    let axis: Vec<Vec<u32>> = isometry::quasi_axis(t, gamma, &Dist::ZERO, region_radius)?
        .into_iter()
        .map(|s| s.path().expect("tree site").to_vec())
        .collect();
    let dprime = dprime_observed(t, gamma, region_radius)?;
    let (plus, minus) = fixed_ends(t, gamma)?;
    let per_subgroup: Vec<SubgroupConstants> = kept
        .iter()
        .zip(&fixes)
        .map(|(&i, fix)| {
            let fixed: HashSet<&[u32]> = fix.sites.iter().map(|s| s.path().expect("tree site")).collect();
            let meet: Vec<Vec<u32>> = axis.iter().filter(|p| fixed.contains(p.as_slice())).cloned().collect();
            let pair_free = fix.elements.iter().filter(|h| !h.is_identity()).all(|h| {
                let (a, b) = (t.act_end(h, &plus), t.act_end(h, &minus));
                !((a == plus && b == minus) || (a == minus && b == plus))
            });
            SubgroupConstants {
                subgroup: subgroups[i].clone(),
                d_observed: Dist::from_int(diameter(&meet) as i64),
                dprime_observed: Dist::from_int(dprime as i64),
                ends_outside_closure: !fix.closure_contains(&plus) && !fix.closure_contains(&minus),
                pair_preservation_checked: pair_free,
            }
        })
        .collect();
    let delta = model.delta();
    let (k1, k2) = model.local_global_constants();
    let k2sq = k2.as_rational().map(|r| Dist::exact(r * r)).unwrap_or(Dist::approx(k2.to_f64().powi(2)));
    let thousand = Rational64::from_integer(1000);
    let mut big = delta.scale(thousand).max(k1).max(k2sq).max(Dist::from_int(dprime as i64));
    for s in &per_subgroup {
        big = big.max(s.d_observed);
    }
    let c = big.scale(Rational64::from_integer(10)) + delta.scale(thousand);
    let c_exact = c.as_rational().ok_or_else(|| Error::Unsupported("C must be exact".into()))?;
    let power_n = (c_exact / Rational64::from_integer(ell as i64)).ceil().to_integer().max(1) as u64;
    Ok(PartnerResult {
        gamma: gamma.clone(),
        translation_length: Dist::from_int(ell as i64),
        power_n,
        delta_big: big,
        c,
        delta,
        k1,
        k2,
        region_radius,
        per_subgroup,
    })
}

/// Bounds for [`pnaive_pipeline`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineParams {
    pub region_radius: usize,
    pub depth: usize,
    pub syllable_bound: usize,
    pub exponent_bound: u32,
    pub budget: EscapeBudget,
    pub enumeration_cap: u128,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            region_radius: 6,
            depth: 3,
            syllable_bound: 8,
            exponent_bound: 3,
            budget: EscapeBudget::default(),
            enumeration_cap: ENUMERATION_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub escape_route: &'static str,
    pub partner: PartnerResult,
    pub gamma_n: GroupElement,
    /// One certificate per input subgroup, trivial ones included.
    pub certificates: Vec<FreenessCertificate>,
}

impl PipelineOutcome {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(FreenessCertificate::passed)
    }
}

/// Escape search, power selection and one freeness certificate per
/// subgroup. A failing certificate is returned, not raised. Loxodromic generators are refused: turning them elliptic needs
/// a cone-off, which is outside the desk models.
pub fn pnaive_pipeline(model: &ActionModel, subgroups: &[Vec<GroupElement>], params: PipelineParams) -> Result<PipelineOutcome> {
    if !model.certificate_capable() {
        return Err(Error::Unsupported("the pipeline needs an exact model".into()));
    }
    let t = model.as_tree()?;
    let esc = escape_search(t, subgroups, params.region_radius, params.depth, params.budget)?;
    let partner = pingpong_power(model, &esc.gamma, subgroups, params.region_radius, params.depth)?;
    let gamma_n = t.pow(&esc.gamma, partner.power_n as i64);
    let certificates = subgroups
        .iter()
        .map(|h| freeness_certificate(t, &gamma_n, h, params.syllable_bound, params.exponent_bound, params.enumeration_cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineOutcome { escape_route: esc.route, partner, gamma_n, certificates })
}
