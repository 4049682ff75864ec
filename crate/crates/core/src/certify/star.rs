use rayon::prelude::*;

use super::freeness::ENUMERATION_CAP;
use crate::isometry::{fixed_ends, is_loxodromic};
use crate::models::{ActionModel, EndPoint, GroupElement, Syllable, TreeModel};
use crate::{Error, Result};

/// The maximal virtually cyclic subgroup `E(u)` of a loxodromic `u`.
///
/// On trees with trivial edge stabilizers `E(u)` is the setwise stabilizer
/// of `{u⁺, u⁻}`, which is how membership is decided. It contains the
/// cyclic group of the primitive root, and can be larger: in `Z/2 * Z/3`,
/// `s` inverts `stst²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryClosure {
    pub u: GroupElement,
    pub root: GroupElement,
    pub plus: EndPoint,
    pub minus: EndPoint,
}

impl ElementaryClosure {
    pub fn contains(&self, t: &TreeModel, g: &GroupElement) -> bool {
        let a = t.act_end(g, &self.plus);
        let b = t.act_end(g, &self.minus);
        (a == self.plus && b == self.minus) || (a == self.minus && b == self.plus)
    }
}

/// The shortest `r` with `rᵏ = u` for some `k ≥ 1`.
pub fn primitive_root(t: &TreeModel, u: &GroupElement) -> GroupElement {
    let (w, core) = t.cyclic_reduction(u);
    let syl = core.syllables();
    let root_core: Vec<Syllable> = match syl {
        [] => Vec::new(),
        [one] if t.order_of_generator(one.gen).is_none() => vec![Syllable::new(one.gen, one.exp.signum())],
        [one] => {
            // a power of a finite-order generator: its smallest positive power
            // generating the same cyclic group is not a root; keep it
            vec![*one]
        }
        _ => {
            let n = syl.len();
            let p = (1..=n)
                .find(|&p| n % p == 0 && (p..n).all(|i| syl[i] == syl[i - p]))
                .unwrap_or(n);
            syl[..p].to_vec()
        }
    };
    let r = t.reduce(&root_core).expect("syllables come from a normal form");
    t.conj(&r, &w)
}

pub fn elementary_closure(model: &ActionModel, u: &GroupElement) -> Result<ElementaryClosure> {
    let t = model.as_tree()?;
    t.check(u)?;
    if !is_loxodromic(t, u)? {
        return Err(Error::Domain(format!("{} is not loxodromic", t.show(u))));
    }
    let (plus, minus) = fixed_ends(t, u)?;
    Ok(ElementaryClosure { u: u.clone(), root: primitive_root(t, u), plus, minus })
}

#[derive(Clone, Debug, PartialEq)]
pub enum WordStatus<W> {
    Pass,
    Fail { witness: W },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoLoopsReport {
    pub words_checked: u64,
    pub n: u64,
    pub exp_bound: u64,
    /// On failure, the exponents `(n₀, …, n_k)`.
    pub status: WordStatus<Vec<i64>>,
}

impl NoLoopsReport {
    pub fn passed(&self) -> bool {
        self.status == WordStatus::Pass
    }
}

/// Exponents in search order: `N, −N, N+1, −(N+1), …`.
fn exponent_order(n: u64, bound: u64) -> Vec<i64> {
    (n.max(1)..=bound).flat_map(|e| [e as i64, -(e as i64)]).collect()
}

/// Checks `u^{n₀} g₁ u^{n₁} … g_k u^{n_k} ≠ 1` for every exponent tuple
/// with `N ≤ |nᵢ| ≤ exp_bound`. Each `gᵢ` must lie outside `E(u)`.
pub fn noloops_check(t: &TreeModel, u: &GroupElement, gs: &[GroupElement], n: u64, exp_bound: u64) -> Result<NoLoopsReport> {
    let e = elementary_closure(&ActionModel::Tree(t.clone()), u)?;
    for g in gs {
        t.check(g)?;
        if e.contains(t, g) {
            return Err(Error::Domain(format!("{} lies in E({})", t.show(g), t.show(u))));
        }
    }
    noloops_unchecked(t, u, gs, n, exp_bound)
}

fn noloops_unchecked(t: &TreeModel, u: &GroupElement, gs: &[GroupElement], n: u64, exp_bound: u64) -> Result<NoLoopsReport> {
    let exps = exponent_order(n, exp_bound);
    let slots = gs.len() + 1;
    let total = (exps.len() as u128).saturating_pow(slots as u32);
    if total > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { estimate: total, cap: ENUMERATION_CAP });
    }
    let powers: Vec<GroupElement> = exps.iter().map(|&k| t.pow(u, k)).collect();
    // index tuples in lexicographic order; the first failure is minimal
    let first_fail = (0..total as u64).into_par_iter().find_first(|&code| {
        let mut c = code;
        let mut idx = vec![0usize; slots];
        for slot in idx.iter_mut().rev() {
            *slot = (c % exps.len() as u64) as usize;
            c /= exps.len() as u64;
        }
        let mut acc = powers[idx[0]].clone();
        for (g, &i) in gs.iter().zip(&idx[1..]) {
            acc = t.mul(&t.mul(&acc, g), &powers[i]);
        }
        acc.is_identity()
    });
    let status = match first_fail {
        None => WordStatus::Pass,
        Some(code) => {
            let mut c = code;
            let mut out = vec![0i64; slots];
            for slot in out.iter_mut().rev() {
                *slot = exps[(c % exps.len() as u64) as usize];
                c /= exps.len() as u64;
            }
            WordStatus::Fail { witness: out }
        }
    };
    Ok(NoLoopsReport { words_checked: total as u64, n, exp_bound, status })
}

/// The least `N ≤ n_cap` such that the no-loops words pass on the window
/// `[N, 3N]` for every sequence from `m_set` of length at most `k_max`.
/// Adequacy beyond that window is not claimed.
pub fn noloops_bound(t: &TreeModel, u: &GroupElement, m_set: &[GroupElement], k_max: usize, n_cap: u64) -> Result<u64> {
    let e = elementary_closure(&ActionModel::Tree(t.clone()), u)?;
    if let Some(g) = m_set.iter().find(|g| e.contains(t, g)) {
        return Err(Error::Domain(format!("{} lies in E({})", t.show(g), t.show(u))));
    }
    let mut seqs: Vec<Vec<GroupElement>> = vec![Vec::new()];
    let mut all = Vec::new();
    for _ in 0..k_max {
        seqs = seqs
            .iter()
            .flat_map(|s| m_set.iter().map(move |g| [s.clone(), vec![g.clone()]].concat()))
            .collect();
        all.extend(seqs.iter().cloned());
    }
    'outer: for n in 1..=n_cap {
        for gs in &all {
            if !noloops_unchecked(t, u, gs, n, 3 * n)?.passed() {
                continue 'outer;
            }
        }
        return Ok(n);
    }
    Err(Error::SearchExhausted(format!("no N <= {n_cap} clears the no-loops window")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarReport {
    pub products_checked: u64,
    /// On failure: indices into `M` and into the triple `(a, b, c)`.
    pub status: WordStatus<(Vec<usize>, Vec<usize>)>,
}

impl StarReport {
    pub fn passed(&self) -> bool {
        self.status == WordStatus::Pass
    }
}

/// Property (*) with `a = uᴺ`, `b = u²ᴺ`, `c = u³ᴺ`.
pub fn star_property_check(t: &TreeModel, m_set: &[GroupElement], m: usize, u: &GroupElement, n: u64) -> Result<StarReport> {
    t.check(u)?;
    if !is_loxodromic(t, u)? {
        return Err(Error::Domain(format!("{} is not loxodromic", t.show(u))));
    }
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let n = n as i64;
    let triple = [t.pow(u, n), t.pow(u, 2 * n), t.pow(u, 3 * n)];
    star_property_check_triple(t, m_set, m, &triple)
}

/// Checks that `(x₁⁻¹g₁x₁)⋯(x_m⁻¹g_mx_m) ≠ 1` for every `gᵢ ∈ M` and every
/// `xᵢ` from the triple with `xᵢ ≠ xᵢ₊₁`.
pub fn star_property_check_triple(t: &TreeModel, m_set: &[GroupElement], m: usize, triple: &[GroupElement; 3]) -> Result<StarReport> {
    for g in m_set.iter().chain(triple) {
        t.check(g)?;
    }
    if m_set.iter().any(|g| g.is_identity()) {
        return Err(Error::Domain("M must consist of nontrivial elements".into()));
    }
    if triple[0] == triple[1] || triple[1] == triple[2] || triple[0] == triple[2] {
        return Err(Error::Domain("a, b, c must be distinct".into()));
    }
    if m_set.is_empty() || m == 0 {
        return Ok(StarReport { products_checked: 0, status: WordStatus::Pass });
    }
    let g_tuples = (m_set.len() as u128).saturating_pow(m as u32);
    let total = g_tuples.saturating_mul(3u128 << (m - 1));
    if total > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { estimate: total, cap: ENUMERATION_CAP });
    }
    let mut xs: Vec<Vec<usize>> = (0..3).map(|i| vec![i]).collect();
    for _ in 1..m {
        xs = xs
            .iter()
            .flat_map(|s| (0..3).filter(|j| s.last() != Some(j)).map(move |j| [s.clone(), vec![j]].concat()))
            .collect();
    }
    let inv: Vec<GroupElement> = triple.iter().map(|x| t.inv(x)).collect();
    // conj[g][x] = x⁻¹ g x
    let conj: Vec<Vec<GroupElement>> = m_set
        .iter()
        .map(|g| (0..3).map(|x| t.product([&inv[x], g, &triple[x]])).collect())
        .collect();
    let first = (0..g_tuples as u64).into_par_iter().find_map_first(|code| {
        let mut c = code;
        let mut gi = vec![0usize; m];
        for slot in gi.iter_mut().rev() {
            *slot = (c % m_set.len() as u64) as usize;
            c /= m_set.len() as u64;
        }
        xs.iter()
            .find(|x| {
                let mut acc = t.identity();
                for (g, xi) in gi.iter().zip(x.iter()) {
                    acc = t.mul(&acc, &conj[*g][*xi]);
                }
                acc.is_identity()
            })
            .map(|x| (gi.clone(), x.clone()))
    });
    Ok(StarReport {
        products_checked: total as u64,
        status: first.map_or(WordStatus::Pass, |w| WordStatus::Fail { witness: w }),
    })
}

/// The first loxodromic in shortlex order, up to length `max_len`, whose
/// `E(u)` avoids every element of `m_set`.
pub fn star_partner(t: &TreeModel, m_set: &[GroupElement], max_len: usize) -> Result<GroupElement> {
    let model = ActionModel::Tree(t.clone());
    for len in 1..=max_len {
        for u in t.elements_of_length(len) {
            if !is_loxodromic(t, &u)? {
                continue;
            }
            let e = elementary_closure(&model, &u)?;
            if m_set.iter().all(|g| !e.contains(t, g)) {
                return Ok(u);
            }
        }
    }
    Err(Error::SearchExhausted(format!("no loxodromic of length <= {max_len} avoids M")))
}
