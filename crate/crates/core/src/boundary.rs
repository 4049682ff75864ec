//! Finite experiments on the space of ends: pushing finitely supported
//! measures, strong proximality runs, minimality and topological freeness
//! at a fixed cylinder depth.

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::isometry::{fixed_ends, is_loxodromic};
use crate::models::{Cylinder, EndPoint, GroupElement, TreeModel};
use crate::partner::loa_construct;
use crate::{Error, Result};

/// A probability measure with finitely many atoms, kept sorted by end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndMeasure {
    atoms: Vec<(EndPoint, Rational64)>,
}

impl EndMeasure {
    pub fn new(atoms: Vec<(EndPoint, Rational64)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| *w <= Rational64::zero()) {
            return Err(Error::Domain("atom weights must be positive".into()));
        }
        let mut merged: Vec<(EndPoint, Rational64)> = Vec::new();
        let mut sorted = atoms;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (e, w) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += w,
                _ => merged.push((e, w)),
            }
        }
        let total: Rational64 = merged.iter().map(|a| a.1).sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(EndMeasure { atoms: merged })
    }

    pub fn dirac(e: EndPoint) -> Self {
        EndMeasure { atoms: vec![(e, Rational64::one())] }
    }

    pub fn atoms(&self) -> &[(EndPoint, Rational64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> Rational64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn mass_in(&self, c: &Cylinder) -> Rational64 {
        self.atoms.iter().filter(|(e, _)| e.in_cylinder(c)).map(|a| a.1).sum()
    }
}

/// `g_*μ`.
pub fn push_measure(t: &TreeModel, g: &GroupElement, mu: &EndMeasure) -> Result<EndMeasure> {
    t.check(g)?;
    let mut atoms: Vec<(EndPoint, Rational64)> = mu.atoms.iter().map(|(e, w)| (t.act_end(g, e), *w)).collect();
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(EndMeasure { atoms })
}

/// A measure with `atoms` distinct atoms at ends of seeded random
/// loxodromics and random positive integer weights, normalized.
pub fn random_measure(t: &TreeModel, atoms: usize, seed: u64) -> EndMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends: Vec<EndPoint> = Vec::new();
    while ends.len() < atoms {
        let len = rng.gen_range(1..=5);
        let g = t.random_element_with(len, &mut rng);
        if !is_loxodromic(t, &g).unwrap_or(false) {
            continue;
        }
        let (p, m) = fixed_ends(t, &g).expect("loxodromic");
        let e = if rng.gen_bool(0.5) { p } else { m };
        if !ends.contains(&e) {
            ends.push(e);
        }
    }
    let weights: Vec<i64> = (0..atoms).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    EndMeasure::new(ends.into_iter().zip(weights).map(|(e, w)| (e, Rational64::new(w, total))).collect())
        .expect("weights are normalized")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProximalityStep {
    pub element: GroupElement,
    /// The low-mass cylinder holding the repelling end.
    pub repelling_cylinder: Cylinder,
    pub power: u32,
    pub masses: (Rational64, Rational64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProximalityTrace {
    pub target: Cylinder,
    pub steps: Vec<ProximalityStep>,
    /// The elements `tₙ`; the last one achieves the target mass.
    pub sequence: Vec<GroupElement>,
}

/// Limits for [`proximality_run`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProximalityBudget {
    /// Number of elements tried.
    pub steps: usize,
    /// Longest conjugator used to steer ends.
    pub max_len: usize,
    /// Largest exponent for the product and for the final power.
    pub max_exp: u32,
    pub max_power: u32,
}

impl Default for ProximalityBudget {
    fn default() -> Self {
        ProximalityBudget { steps: 20, max_len: 8, max_exp: 10, max_power: 64 }
    }
}

/// First conjugate `h b h⁻¹` of the first loxodromic `b` whose chosen end
/// lies in `c`, with `h` in shortlex order.
fn steer(t: &TreeModel, c: &Cylinder, attracting: bool, avoid: &[EndPoint], max_len: usize) -> Option<GroupElement> {
    let b = (1..=2).flat_map(|l| t.elements_of_length(l)).find(|g| is_loxodromic(t, g).unwrap_or(false))?;
    let (bp, bm) = fixed_ends(t, &b).ok()?;
    let base = if attracting { bp } else { bm };
    (0..=max_len).flat_map(|l| t.elements_of_length(l)).find_map(|h| {
        if !t.act_end(&h, &base).in_cylinder(c) {
            return None;
        }
        let g = t.conj(&b, &h);
        let (p, m) = fixed_ends(t, &g).ok()?;
        (!avoid.contains(&p) && !avoid.contains(&m)).then_some(g)
    })
}

/// Finds elements pushing both measures to mass at least `1 − tol` in the
/// depth-`depth` cylinder of `zeta`.
///
/// Each attempt picks the cylinder `U` of least combined mass (first in
/// label order) at increasing depth, builds a loxodromic with attracting end
/// near `zeta` and repelling end in `U` as in [`loa_construct`], and raises
/// it to the least sufficient power.
pub fn proximality_run(
    t: &TreeModel,
    mu1: &EndMeasure,
    mu2: &EndMeasure,
    zeta: &EndPoint,
    depth: usize,
    tol: Rational64,
    budget: ProximalityBudget,
) -> Result<ProximalityTrace> {
    let target = zeta.cylinder(depth);
    let need = Rational64::one() - tol;
    let mut trace = ProximalityTrace { target: target.clone(), steps: Vec::new(), sequence: Vec::new() };
    if mu1.mass_in(&target) >= need && mu2.mass_in(&target) >= need {
        return Ok(trace);
    }
    for step in 0..budget.steps {
        let d = depth.max(1) + step;
        let u = t
            .cylinders(d)
            .into_iter()
            .min_by_key(|c| mu1.mass_in(c) + mu2.mass_in(c))
            .expect("a tree has cylinders at every depth");
        let g1 = steer(t, &target, true, &[], budget.max_len);
        let g1 = match g1 {
            Some(g) => g,
            None => break,
        };
        let (p1, m1) = fixed_ends(t, &g1)?;
        let Some(g2) = steer(t, &u, false, &[p1, m1], budget.max_len) else { continue };
        let Ok(w) = loa_construct(t, &g1, &g2, &u, &target, budget.max_exp) else { continue };
        let mut last = None;
        for power in 1..=budget.max_power {
            let tn = t.pow(&w.element, power as i64);
            let a = push_measure(t, &tn, mu1)?.mass_in(&target);
            let b = push_measure(t, &tn, mu2)?.mass_in(&target);
            last = Some((tn.clone(), power, (a, b)));
            if a >= need && b >= need {
                break;
            }
        }
        let (tn, power, masses) = last.expect("max_power is positive");
        trace.steps.push(ProximalityStep { element: tn.clone(), repelling_cylinder: u, power, masses });
        trace.sequence.push(tn);
        if masses.0 >= need && masses.1 >= need {
            return Ok(trace);
        }
    }
    Err(Error::SearchExhausted(format!("target mass not reached in {} steps", budget.steps)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityReport {
    pub depth: usize,
    /// For each covered cylinder, the first element in shortlex order
    /// moving the end into it.
    pub witnesses: Vec<(Cylinder, GroupElement)>,
    pub uncovered: Vec<Cylinder>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Looks for `g` of length at most `max_len` with `g·ξ` in each depth-`depth`
/// cylinder.
pub fn minimality_check(t: &TreeModel, xi: &EndPoint, depth: usize, max_len: usize) -> MinimalityReport {
    let elements = t.elements_up_to(max_len);
    let images: Vec<EndPoint> = elements.par_iter().map(|g| t.act_end(g, xi)).collect();
    let found: Vec<(Cylinder, Option<GroupElement>)> = t
        .cylinders(depth)
        .into_par_iter()
        .map(|c| {
            let hit = images.iter().position(|e| e.in_cylinder(&c)).map(|i| elements[i].clone());
            (c, hit)
        })
        .collect();
    let mut report = MinimalityReport { depth, witnesses: Vec::new(), uncovered: Vec::new() };
    for (c, hit) in found {
        match hit {
            Some(g) => report.witnesses.push((c, g)),
            None => report.uncovered.push(c),
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopologicalFreenessReport {
    pub depth: usize,
    pub cylinders_checked: usize,
    /// For a loxodromic, the cylinders of `g⁺` and `g⁻`.
    pub fixed_cylinders: Vec<Cylinder>,
    pub fixed_ends: Option<(EndPoint, EndPoint)>,
    /// Cylinders where the check failed.
    pub offending: Vec<Cylinder>,
}

impl TopologicalFreenessReport {
    pub fn passed(&self) -> bool {
        self.offending.is_empty()
    }
}

/// At depth `depth`: for a loxodromic, every cylinder missing `g±` is
/// moved off itself; for an elliptic, every cylinder contains an end moved
/// by `g`.
pub fn topological_freeness_check(t: &TreeModel, g: &GroupElement, depth: usize) -> Result<TopologicalFreenessReport> {
    t.check(g)?;
    if g.is_identity() {
        return Err(Error::Domain("the identity fixes everything; g must be nontrivial".into()));
    }
    let cylinders = t.cylinders(depth);
    let mut report = TopologicalFreenessReport {
        depth,
        cylinders_checked: cylinders.len(),
        fixed_cylinders: Vec::new(),
        fixed_ends: None,
        offending: Vec::new(),
    };
    if is_loxodromic(t, g)? {
        let (p, m) = fixed_ends(t, g)?;
        let mut fixed = vec![p.cylinder(depth), m.cylinder(depth)];
        fixed.dedup();
        report.offending = cylinders
            .par_iter()
            .filter(|c| !fixed.contains(c) && (depth == 0 || t.set_meets(&t.image_of_cylinder(g, c), c)))
            .cloned()
            .collect();
        report.fixed_cylinders = fixed;
        report.fixed_ends = Some((p, m));
    } else {
        report.offending = cylinders
            .par_iter()
            .filter(|c| {
                let base = t.canonical_cylinder(c.labels().to_vec());
                let mut candidates = vec![t.end_in(&Cylinder(base.clone()))];
                for l in t.child_labels(&base) {
                    let mut child = base.clone();
                    child.push(l);
                    candidates.push(t.end_in(&Cylinder(child)));
                }
                candidates.iter().all(|e| t.act_end(g, e) == *e)
            })
            .cloned()
            .collect();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pushing_measures() {
        let f2 = TreeModel::free_group(2).unwrap();
        let e = f2.end(vec![], vec![2]).unwrap();
        let mu = EndMeasure::dirac(e.clone());
        assert_eq!(push_measure(&f2, &f2.identity(), &mu).unwrap(), mu);
        let pushed = push_measure(&f2, &f2.parse("a").unwrap(), &mu).unwrap();
        assert_eq!(pushed.atoms()[0].0, f2.end(vec![0], vec![2]).unwrap());
        let mu = random_measure(&f2, 3, 11);
        assert_eq!(mu.atoms().len(), 3);
        assert!(push_measure(&f2, &f2.parse("abAB").unwrap(), &mu).unwrap().total_mass().is_one());
        assert!(EndMeasure::new(vec![(e, Rational64::new(1, 2))]).is_err());
    }

    #[test]
    fn proximality_on_small_measures() {
        let f2 = TreeModel::free_group(2).unwrap();
        let zeta = f2.end(vec![2, 0], vec![0]).unwrap();
        let mu = EndMeasure::dirac(zeta.clone());
        let tr = proximality_run(&f2, &mu, &mu, &zeta, 2, Rational64::zero(), ProximalityBudget::default()).unwrap();
        assert!(tr.sequence.is_empty());
        let mu1 = random_measure(&f2, 2, 1);
        let mu2 = random_measure(&f2, 2, 2);
        let tr = proximality_run(&f2, &mu1, &mu2, &zeta, 2, Rational64::zero(), ProximalityBudget::default()).unwrap();
        let last = tr.sequence.last().unwrap();
        assert!(push_measure(&f2, last, &mu1).unwrap().mass_in(&tr.target).is_one());
        assert!(push_measure(&f2, last, &mu2).unwrap().mass_in(&tr.target).is_one());
    }

    #[test]
    fn minimality_examples() {
        let f2 = TreeModel::free_group(2).unwrap();
        let xi = f2.end(vec![], vec![0]).unwrap();
        let r = minimality_check(&f2, &xi, 1, 4);
        assert!(r.passed());
        assert_eq!(r.witnesses.len(), 4);
        assert!(minimality_check(&f2, &xi, 0, 0).passed());
        let m = TreeModel::modular();
        let xi = m.end(vec![], vec![1, 1]).unwrap();
        assert!(minimality_check(&m, &xi, 2, 6).passed());
    }

    #[test]
    fn topological_freeness_examples() {
        let f2 = TreeModel::free_group(2).unwrap();
        let a = f2.parse("a").unwrap();
        for d in 1..=4 {
            let r = topological_freeness_check(&f2, &a, d).unwrap();
            assert!(r.passed());
            assert_eq!(r.fixed_cylinders.len(), 2);
        }
        assert!(topological_freeness_check(&f2, &f2.identity(), 3).is_err());
        let m = TreeModel::modular();
        assert!(topological_freeness_check(&m, &m.parse("s").unwrap(), 3).unwrap().passed());
    }
}
