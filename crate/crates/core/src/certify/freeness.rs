use rayon::prelude::*;

use crate::isometry::{subgroup_closure, SUBGROUP_CAP};
use crate::models::{GroupElement, Mat2, TreeModel};
use crate::{Error, Result};

/// Default refusal threshold for exhaustive enumerations.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// A letter of `H * ⟨T⟩`: an element of `H` or a power of the free
/// generator `T`, which evaluates to `γᴺ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Sub(GroupElement),
    Power(i64),
}

/// An alternating word in `H * ⟨T⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FreeProductWord(pub Vec<Letter>);

impl FreeProductWord {
    pub fn syllables(&self) -> usize {
        self.0.len()
    }

    /// `Σ |lᵢ|` over the `T`-syllables.
    pub fn exponent_weight(&self) -> u64 {
        self.0
            .iter()
            .map(|l| match l {
                Letter::Power(e) => e.unsigned_abs(),
                Letter::Sub(_) => 0,
            })
            .sum()
    }

    pub fn evaluate(&self, t: &TreeModel, gamma_n: &GroupElement) -> GroupElement {
        let mut acc = t.identity();
        for l in &self.0 {
            acc = match l {
                Letter::Sub(h) => t.mul(&acc, h),
                Letter::Power(e) => t.mul(&acc, &t.pow(gamma_n, *e)),
            };
        }
        acc
    }

    /// Written with `γ` for the generator `T`, e.g. `s·γ^2·t^2·γ^-1`.
    pub fn show(&self, t: &TreeModel) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|l| match l {
                Letter::Sub(h) => t.show(h),
                Letter::Power(1) => "γ".to_string(),
                Letter::Power(e) => format!("γ^{e}"),
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertStatus {
    Pass,
    /// The first word evaluating to the identity, in the order: syllable
    /// count, then total exponent magnitude, then letter order.
    Fail { witness: FreeProductWord },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreenessCertificate {
    pub gamma_n: GroupElement,
    pub subgroup: Vec<GroupElement>,
    pub subgroup_order: usize,
    pub syllable_bound: usize,
    pub exponent_bound: u32,
    pub words_checked: u64,
    pub status: CertStatus,
    /// Evaluation channels that agreed on every word.
    pub oracles: Vec<&'static str>,
}

impl FreenessCertificate {
    pub fn passed(&self) -> bool {
        self.status == CertStatus::Pass
    }
}

struct Tokens {
    elems: Vec<GroupElement>,
    mats: Vec<Option<Mat2>>,
    letters: Vec<Letter>,
    weights: Vec<u64>,
    /// Number of leading tokens that are subgroup letters.
    subs: usize,
}

fn count_words(subs: u128, powers: u128, bound: usize) -> u128 {
    let mut total: u128 = 0;
    for len in 1..=bound as u32 {
        let (hi, lo) = (len.div_ceil(2), len / 2);
        let a = subs.saturating_pow(hi).saturating_mul(powers.saturating_pow(lo));
        let b = powers.saturating_pow(hi).saturating_mul(subs.saturating_pow(lo));
        total = total.saturating_add(a).saturating_add(b);
    }
    total
}

type Witness = (usize, u64, Vec<usize>);

struct Search<'a> {
    t: &'a TreeModel,
    tok: &'a Tokens,
    bound: usize,
}

impl Search<'_> {
    fn dfs(
        &self,
        word: &mut Vec<usize>,
        weight: u64,
        value: &GroupElement,
        mat: &Option<Mat2>,
        count: &mut u64,
        best: &mut Option<Witness>,
    ) -> Result<()> {
        *count += 1;
        let nf_trivial = value.is_identity();
        if let Some(m) = mat {
            if m.is_projective_identity() != nf_trivial {
                let w = FreeProductWord(word.iter().map(|&i| self.tok.letters[i].clone()).collect());
                return Err(Error::OracleDisagreement { word: w.show(self.t) });
            }
        }
        if nf_trivial {
            let key = (word.len(), weight, word.clone());
            if best.as_ref().is_none_or(|b| key < *b) {
                *best = Some(key);
            }
        }
        if word.len() == self.bound {
            return Ok(());
        }
        let last_is_sub = *word.last().expect("nonempty") < self.tok.subs;
        let range = if last_is_sub { self.tok.subs..self.tok.elems.len() } else { 0..self.tok.subs };
        for i in range {
            let next = self.t.mul(value, &self.tok.elems[i]);
            let next_mat = match (mat, &self.tok.mats[i]) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            };
            word.push(i);
            self.dfs(word, weight + self.tok.weights[i], &next, &next_mat, count, best)?;
            word.pop();
        }
        Ok(())
    }
}

/// Evaluates every alternating word of `H * ⟨T⟩` with at most
/// `syllable_bound` syllables and `|lᵢ| ≤ exponent_bound` at `T = γᴺ`, and
/// passes iff none is trivial.
///
/// Both the normal form and, on `Z/2 * Z/3`, the `PSL(2, Z)` matrix are
/// evaluated for every word; disagreement aborts with an error.
pub fn freeness_certificate(
    t: &TreeModel,
    gamma_n: &GroupElement,
    subgroup: &[GroupElement],
    syllable_bound: usize,
    exponent_bound: u32,
    cap: u128,
) -> Result<FreenessCertificate> {
    t.check(gamma_n)?;
    let group = subgroup_closure(t, subgroup, SUBGROUP_CAP)?;
    let subs: Vec<GroupElement> = group.iter().filter(|h| !h.is_identity()).cloned().collect();
    let estimate = count_words(subs.len() as u128, 2 * exponent_bound as u128, syllable_bound);
    if estimate > cap {
        return Err(Error::EnumerationCap { estimate, cap });
    }
    let matrices = t.is_modular();
    let mat = |g: &GroupElement| if matrices { t.matrix_eval(g).ok() } else { None };
    let mut tok = Tokens { elems: Vec::new(), mats: Vec::new(), letters: Vec::new(), weights: Vec::new(), subs: subs.len() };
    for h in &subs {
        tok.mats.push(mat(h));
        tok.elems.push(h.clone());
        tok.letters.push(Letter::Sub(h.clone()));
        tok.weights.push(0);
    }
    for e in 1..=exponent_bound as i64 {
        for l in [e, -e] {
            let g = t.pow(gamma_n, l);
            tok.mats.push(mat(&g));
            tok.elems.push(g);
            tok.letters.push(Letter::Power(l));
            tok.weights.push(e as u64);
        }
    }
    let search = Search { t, tok: &tok, bound: syllable_bound };
    let parts = (0..tok.elems.len())
        .into_par_iter()
        .map(|i| -> Result<(u64, Option<Witness>)> {
            let (mut count, mut best) = (0, None);
            if syllable_bound > 0 {
                search.dfs(&mut vec![i], tok.weights[i], &tok.elems[i], &tok.mats[i], &mut count, &mut best)?;
            }
            Ok((count, best))
        })
        .collect::<Result<Vec<_>>>()?;
    let words_checked = parts.iter().map(|p| p.0).sum();
    let best = parts.into_iter().filter_map(|p| p.1).min();
    let status = match best {
        None => CertStatus::Pass,
        Some((_, _, ids)) => CertStatus::Fail {
            witness: FreeProductWord(ids.into_iter().map(|i| tok.letters[i].clone()).collect()),
        },
    };
    let mut oracles = vec!["normal-form"];
    if matrices {
        oracles.push("psl2z-matrix");
    }
    Ok(FreenessCertificate {
        gamma_n: gamma_n.clone(),
        subgroup: subgroup.to_vec(),
        subgroup_order: group.len(),
        syllable_bound,
        exponent_bound,
        words_checked,
        status,
        oracles,
    })
}
