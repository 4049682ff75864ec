use std::collections::{HashMap, VecDeque};

use crate::hypspace::Dist;
use crate::isometry::{subgroup_closure, SUBGROUP_CAP};
use crate::models::{GroupElement, TreeKind, TreeModel};
use crate::{Error, Result};

/// `d̂(h₁, h₂)`: the shortest path from `h₁` to `h₂` in the Cayley graph on
/// `X ⊔ H` that uses no edge joining two elements of `H` by an `H`-label,
/// searched among elements of length at most `ball`. `H` is a factor
/// subgroup generated by one generator and `X` is the other generator.
pub fn rel_metric(t: &TreeModel, factor: &[GroupElement], h1: &GroupElement, h2: &GroupElement, ball: usize) -> Result<Dist> {
    if !matches!(t.kind(), TreeKind::FreeProduct { .. }) {
        return Err(Error::Unsupported("the relative metric is defined for free-product models".into()));
    }
    let group = subgroup_closure(t, factor, SUBGROUP_CAP)?;
    for h in [h1, h2] {
        t.check(h)?;
        if !group.contains(h) {
            return Err(Error::Domain(format!("{} is not in the subgroup", t.show(h))));
        }
    }
    if h1 == h2 {
        return Ok(Dist::ZERO);
    }
    let gen = group
        .iter()
        .find(|g| !g.is_identity())
        .and_then(|g| match g.syllables() {
            [one] => Some(one.gen),
            _ => None,
        })
        .filter(|&i| group.len() as u32 == t.order_of_generator(i).unwrap_or(0))
        .ok_or_else(|| Error::Domain("H must be one of the two factors".into()))?;
    let x = t.generator(1 - gen);
    let mut labels = vec![x.clone(), t.inv(&x)];
    labels.dedup();
    let in_h = |g: &GroupElement| group.contains(g);
    let mut dist: HashMap<GroupElement, u64> = HashMap::from([(h1.clone(), 0)]);
    let mut queue = VecDeque::from([h1.clone()]);
    while let Some(g) = queue.pop_front() {
        let d = dist[&g];
        let mut next: Vec<GroupElement> = labels.iter().map(|l| t.mul(&g, l)).collect();
        if !in_h(&g) {
            next.extend(group.iter().filter(|h| !h.is_identity()).map(|h| t.mul(&g, h)));
        }
        for y in next {
            if t.len(&y) > ball || dist.contains_key(&y) {
                continue;
            }
            if y == *h2 {
                return Ok(Dist::from_int(d as i64 + 1));
            }
            dist.insert(y.clone(), d + 1);
            queue.push_back(y);
        }
    }
    Ok(Dist::Infinite)
}
