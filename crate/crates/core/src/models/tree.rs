use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GroupElement, ModelId, Syllable};
use crate::hypspace::Site;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeKind {
    /// Free group of the given rank on its Cayley tree.
    FreeGroup { rank: usize },
    /// `Z/p * Z/q` on its Bass–Serre tree.
    FreeProduct { orders: [u32; 2] },
}

/// Vertex types of the Bass–Serre tree: cosets of the first or second factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexType {
    A,
    B,
}

/// A group acting on a simplicial tree.
///
/// Vertices are encoded by the sequence of edge labels on the geodesic from
/// the basepoint, so distances are `|x| + |y| - 2·lcp(x, y)`.
///
/// Cayley tree of `F_n`: label `2i` is the generator `i`, `2i + 1` its
/// inverse; the path of a vertex is the reduced word of the element.
///
/// Bass–Serre tree of `A * B` (`A = ⟨s⟩`, `B = ⟨t⟩`): the basepoint is the
/// coset `⟨s⟩` itself. The first step is labelled by an exponent of `s` in
/// `0..p` (`0` leads to the vertex `⟨t⟩`), later steps alternate between
/// nonzero exponents of `t` and of `s`.
#[derive(Clone, Debug)]
pub struct TreeModel {
    id: ModelId,
    kind: TreeKind,
    names: Vec<char>,
    orders: Vec<Option<u32>>,
}

impl TreeModel {
    pub fn free_group(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::Domain(format!("free group rank {rank} not in 1..=26")));
        }
        let names = (0..rank).map(|i| (b'a' + i as u8) as char).collect();
        Ok(TreeModel {
            id: ModelId::from_parts(&[0, rank as u64]),
            kind: TreeKind::FreeGroup { rank },
            names,
            orders: vec![None; rank],
        })
    }

    pub fn free_product(p: u32, q: u32) -> Result<Self> {
        if p < 2 || q < 2 || p > 1000 || q > 1000 {
            return Err(Error::Domain(format!("factor orders ({p}, {q}) must lie in 2..=1000")));
        }
        Ok(TreeModel {
            id: ModelId::from_parts(&[1, p as u64, q as u64]),
            kind: TreeKind::FreeProduct { orders: [p, q] },
            names: vec!['s', 't'],
            orders: vec![Some(p), Some(q)],
        })
    }

    /// `Z/2 * Z/3 ≅ PSL(2, Z)` with generators `s` (order 2) and `t` (order 3).
    pub fn modular() -> Self {
        Self::free_product(2, 3).expect("valid orders")
    }

    /// Replaces the single-letter generator names (lowercase ASCII).
    pub fn with_names(mut self, names: &[char]) -> Result<Self> {
        if names.len() != self.names.len() {
            return Err(Error::Domain(format!(
                "expected {} generator names, got {}",
                self.names.len(),
                names.len()
            )));
        }
        for (i, c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() || names[..i].contains(c) {
                return Err(Error::Domain(format!("bad generator name {c:?}")));
            }
        }
        self.names = names.to_vec();
        Ok(self)
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn kind(&self) -> &TreeKind {
        &self.kind
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    pub fn order_of_generator(&self, gen: usize) -> Option<u32> {
        self.orders[gen]
    }

    pub fn is_free_group(&self) -> bool {
        matches!(self.kind, TreeKind::FreeGroup { .. })
    }

    pub fn is_modular(&self) -> bool {
        self.kind == TreeKind::FreeProduct { orders: [2, 3] }
    }

    // ---- normal forms ----------------------------------------------------

    fn norm_exp(&self, gen: usize, exp: i64) -> i64 {
        match self.orders[gen] {
            Some(p) => exp.rem_euclid(p as i64),
            None => exp,
        }
    }

    fn push(&self, out: &mut Vec<Syllable>, s: Syllable) {
        let exp = self.norm_exp(s.gen, s.exp);
        if exp == 0 {
            return;
        }
        if let Some(last) = out.last_mut() {
            if last.gen == s.gen {
                let e = self.norm_exp(s.gen, last.exp + exp);
                if e == 0 {
                    out.pop();
                } else {
                    last.exp = e;
                }
                return;
            }
        }
        out.push(Syllable::new(s.gen, exp));
    }

    fn wrap(&self, syllables: Vec<Syllable>) -> GroupElement {
        GroupElement { model: self.id, syllables }
    }

    pub fn identity(&self) -> GroupElement {
        self.wrap(Vec::new())
    }

    pub fn generator(&self, gen: usize) -> GroupElement {
        assert!(gen < self.num_generators(), "generator index out of range");
        self.wrap(vec![Syllable::new(gen, 1)])
    }

    /// Normal form of a raw word given as generator powers.
    pub fn reduce(&self, raw: &[Syllable]) -> Result<GroupElement> {
        let mut out = Vec::with_capacity(raw.len());
        for (i, s) in raw.iter().enumerate() {
            if s.gen >= self.num_generators() {
                return Err(Error::Alphabet {
                    word: format!("{raw:?}"),
                    offset: i,
                    reason: format!("generator index {} out of range", s.gen),
                });
            }
            self.push(&mut out, *s);
        }
        Ok(self.wrap(out))
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        debug_assert!(g.model == self.id && h.model == self.id);
        let mut out = g.syllables.clone();
        for s in &h.syllables {
            self.push(&mut out, *s);
        }
        self.wrap(out)
    }

    pub fn product<'a>(&self, factors: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        let mut out = Vec::new();
        for f in factors {
            for s in &f.syllables {
                self.push(&mut out, *s);
            }
        }
        self.wrap(out)
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        let out = g
            .syllables
            .iter()
            .rev()
            .map(|s| Syllable::new(s.gen, self.norm_exp(s.gen, -s.exp)))
            .collect();
        self.wrap(out)
    }

    pub fn pow(&self, g: &GroupElement, n: i64) -> GroupElement {
        let base = if n < 0 { self.inv(g) } else { g.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// `h g h⁻¹`.
    pub fn conj(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.product([h, g, &self.inv(h)])
    }

    /// Word length for free groups, syllable length for free products.
    pub fn len(&self, g: &GroupElement) -> usize {
        match self.kind {
            TreeKind::FreeGroup { .. } => g.syllables.iter().map(|s| s.exp.unsigned_abs() as usize).sum(),
            TreeKind::FreeProduct { .. } => g.syllables.len(),
        }
    }

    /// Writes `g = w c w⁻¹` with `c` cyclically reduced; returns `(w, c)`.
    pub fn cyclic_reduction(&self, g: &GroupElement) -> (GroupElement, GroupElement) {
        let mut conj = Vec::new();
        let mut core = g.syllables.clone();
        while core.len() >= 2 && core[0].gen == core[core.len() - 1].gen {
            let (e0, e1) = (core[0].exp, core[core.len() - 1].exp);
            if self.orders[core[0].gen].is_none() && e0.signum() != e1.signum() && e0.abs() > e1.abs() {
                // peel only as much of the first syllable as cancels
                let k = -e1;
                conj.push(Syllable::new(core[0].gen, k));
                core[0].exp -= k;
                core.pop();
                continue;
            }
            let first = core.remove(0);
            conj.push(first);
            let last = core.last_mut().expect("nonempty");
            let e = self.norm_exp(first.gen, last.exp + first.exp);
            if e == 0 {
                core.pop();
            } else {
                last.exp = e;
            }
        }
        let mut w = Vec::new();
        for syl in conj {
            self.push(&mut w, syl);
        }
        (self.wrap(w), self.wrap(core))
    }

    /// Order of `g` if finite.
    pub fn finite_order(&self, g: &GroupElement) -> Option<u64> {
        let (_, core) = self.cyclic_reduction(g);
        match core.syllables.as_slice() {
            [] => Some(1),
            [s] => self.orders[s.gen].map(|p| {
                let p = p as u64;
                p / num_integer::gcd(p, s.exp.unsigned_abs())
            }),
            _ => None,
        }
    }

    /// Key for the documented tie-break order: shortest first, then
    /// lexicographic on this key.
    pub fn lex_key(&self, g: &GroupElement) -> Vec<u32> {
        match self.kind {
            TreeKind::FreeGroup { .. } => self.free_labels(&g.syllables),
            TreeKind::FreeProduct { .. } => g
                .syllables
                .iter()
                .map(|s| (s.gen as u32) * 1024 + s.exp as u32)
                .collect(),
        }
    }

    pub fn shortlex_cmp(&self, a: &GroupElement, b: &GroupElement) -> Ordering {
        self.len(a)
            .cmp(&self.len(b))
            .then_with(|| self.lex_key(a).cmp(&self.lex_key(b)))
    }

    // ---- text ------------------------------------------------------------

    /// Parses words such as `ab`, `aB`, `a^-1 b^2`, `s t^2 s`, `1`.
    /// An uppercase letter denotes the inverse of the lowercase generator.
    pub fn parse(&self, word: &str) -> Result<GroupElement> {
        let chars: Vec<char> = word.chars().collect();
        let err = |offset: usize, reason: &str| Error::Alphabet {
            word: word.to_string(),
            offset,
            reason: reason.to_string(),
        };
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '*' || c == '.' || c == '·' || c == '1' {
                i += 1;
                continue;
            }
            let (gen, sign) = if let Some(g) = self.names.iter().position(|&n| n == c) {
                (g, 1)
            } else if let Some(g) = self
                .names
                .iter()
                .position(|&n| c.is_uppercase() && n.to_ascii_uppercase() == c)
            {
                (g, -1)
            } else {
                return Err(err(i, "unknown generator"));
            };
            i += 1;
            let mut exp: i64 = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                exp = text.parse().map_err(|_| err(start, "malformed exponent"))?;
            } else if i + 1 < chars.len() && chars[i] == '⁻' && chars[i + 1] == '¹' {
                i += 2;
                exp = -1;
            }
            self.push(&mut out, Syllable::new(gen, sign * exp));
        }
        Ok(self.wrap(out))
    }

    pub fn show(&self, g: &GroupElement) -> String {
        if g.syllables.is_empty() {
            return "1".to_string();
        }
        let mut s = String::new();
        for syl in &g.syllables {
            let name = self.names[syl.gen];
            match syl.exp {
                1 => s.push(name),
                -1 if self.is_free_group() => s.push(name.to_ascii_uppercase()),
                e => {
                    s.push(name);
                    s.push('^');
                    s.push_str(&e.to_string());
                }
            }
        }
        s
    }

    // ---- enumeration -----------------------------------------------------

    /// All elements of exactly the given length, in shortlex order.
    pub fn elements_of_length(&self, length: usize) -> Vec<GroupElement> {
        let mut out = Vec::new();
        match self.kind {
            TreeKind::FreeGroup { rank } => {
                let mut labels = Vec::with_capacity(length);
                self.enum_free(rank, length, &mut labels, &mut out);
            }
            TreeKind::FreeProduct { .. } => {
                if length == 0 {
                    out.push(self.identity());
                } else {
                    for start in 0..2 {
                        let mut syl = Vec::with_capacity(length);
                        self.enum_product(start, length, &mut syl, &mut out);
                    }
                }
            }
        }
        out
    }

    fn enum_free(&self, rank: usize, length: usize, labels: &mut Vec<u32>, out: &mut Vec<GroupElement>) {
        if labels.len() == length {
            out.push(self.wrap(self.free_syllables(labels)));
            return;
        }
        for l in 0..(2 * rank as u32) {
            if labels.last().is_some_and(|&last| last ^ 1 == l) {
                continue;
            }
            labels.push(l);
            self.enum_free(rank, length, labels, out);
            labels.pop();
        }
    }

    fn enum_product(&self, gen: usize, length: usize, syl: &mut Vec<Syllable>, out: &mut Vec<GroupElement>) {
        if syl.len() == length {
            out.push(self.wrap(syl.clone()));
            return;
        }
        let p = self.orders[gen].expect("finite factor") as i64;
        for e in 1..p {
            syl.push(Syllable::new(gen, e));
            self.enum_product(1 - gen, length, syl, out);
            syl.pop();
        }
    }

    /// All elements of length at most `max_len`, in shortlex order.
    pub fn elements_up_to(&self, max_len: usize) -> Vec<GroupElement> {
        (0..=max_len).flat_map(|l| self.elements_of_length(l)).collect()
    }

    /// A uniformly chosen normal form of exactly the given length.
    pub fn random_element(&self, length: usize, seed: u64) -> GroupElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.random_element_with(length, &mut rng)
    }

    pub fn random_element_with<R: Rng>(&self, length: usize, rng: &mut R) -> GroupElement {
        match self.kind {
            TreeKind::FreeGroup { rank } => {
                let n = 2 * rank as u32;
                let mut labels: Vec<u32> = Vec::with_capacity(length);
                for i in 0..length {
                    let l = if i == 0 {
                        rng.gen_range(0..n)
                    } else {
                        let prev_inv = labels[i - 1] ^ 1;
                        let mut l = rng.gen_range(0..n - 1);
                        if l >= prev_inv {
                            l += 1;
                        }
                        l
                    };
                    labels.push(l);
                }
                self.wrap(self.free_syllables(&labels))
            }
            TreeKind::FreeProduct { orders } => {
                let mut gen = rng.gen_range(0..2usize);
                let mut syl = Vec::with_capacity(length);
                for _ in 0..length {
                    let e = rng.gen_range(1..orders[gen] as i64);
                    syl.push(Syllable::new(gen, e));
                    gen = 1 - gen;
                }
                self.wrap(syl)
            }
        }
    }

    // ---- tree vertices ---------------------------------------------------

    fn free_labels(&self, syl: &[Syllable]) -> Vec<u32> {
        let mut labels = Vec::new();
        for s in syl {
            let l = 2 * s.gen as u32 + u32::from(s.exp < 0);
            labels.extend(std::iter::repeat_n(l, s.exp.unsigned_abs() as usize));
        }
        labels
    }

    fn free_syllables(&self, labels: &[u32]) -> Vec<Syllable> {
        let mut out = Vec::new();
        for &l in labels {
            let gen = (l / 2) as usize;
            let e = if l % 2 == 0 { 1 } else { -1 };
            self.push(&mut out, Syllable::new(gen, e));
        }
        out
    }

    /// Path of the Bass–Serre vertex `g·v_ty`.
    fn product_vertex_path(&self, syl: &[Syllable], ty: VertexType) -> Vec<u32> {
        let ty_gen = match ty {
            VertexType::A => 0,
            VertexType::B => 1,
        };
        let syl = match syl.last() {
            Some(last) if last.gen == ty_gen => &syl[..syl.len() - 1],
            _ => syl,
        };
        match syl.first() {
            None => match ty {
                VertexType::A => Vec::new(),
                VertexType::B => vec![0],
            },
            Some(first) if first.gen == 0 => syl.iter().map(|s| s.exp as u32).collect(),
            Some(_) => std::iter::once(0).chain(syl.iter().map(|s| s.exp as u32)).collect(),
        }
    }

    /// Coset representative and type of the Bass–Serre vertex at `path`.
    fn product_vertex_rep(&self, path: &[u32]) -> (Vec<Syllable>, VertexType) {
        let ty = if path.len() % 2 == 1 { VertexType::B } else { VertexType::A };
        let syl = path
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(i, &l)| Syllable::new(i % 2, l as i64))
            .collect();
        (syl, ty)
    }

    /// Type of the vertex at `path` (always `A` for Cayley trees).
    pub fn vertex_type(&self, path: &[u32]) -> VertexType {
        match self.kind {
            TreeKind::FreeGroup { .. } => VertexType::A,
            TreeKind::FreeProduct { .. } => self.product_vertex_rep(path).1,
        }
    }

    /// The vertex `g·v₀` as a path.
    pub fn orbit_path(&self, g: &GroupElement) -> Vec<u32> {
        self.act_path(g, &[])
    }

    pub fn act_path(&self, g: &GroupElement, path: &[u32]) -> Vec<u32> {
        match self.kind {
            TreeKind::FreeGroup { .. } => {
                let mut out = g.syllables.clone();
                for s in self.free_syllables(path) {
                    self.push(&mut out, s);
                }
                self.free_labels(&out)
            }
            TreeKind::FreeProduct { .. } => {
                let (rep, ty) = self.product_vertex_rep(path);
                let mut out = g.syllables.clone();
                for s in rep {
                    self.push(&mut out, s);
                }
                self.product_vertex_path(&out, ty)
            }
        }
    }

    /// Labels of the children of the vertex at `path` (neighbours other than
    /// the parent), ascending.
    pub fn child_labels(&self, path: &[u32]) -> Vec<u32> {
        match self.kind {
            TreeKind::FreeGroup { rank } => (0..2 * rank as u32)
                .filter(|&l| path.last().is_none_or(|&last| last ^ 1 != l))
                .collect(),
            TreeKind::FreeProduct { orders } => {
                if path.is_empty() {
                    (0..orders[0]).collect()
                } else {
                    (1..orders[path.len() % 2]).collect()
                }
            }
        }
    }

    pub fn is_valid_path(&self, path: &[u32]) -> bool {
        (0..path.len()).all(|i| self.label_ok(&path[..i], path[i]))
    }

    pub(crate) fn label_ok(&self, prefix: &[u32], label: u32) -> bool {
        match self.kind {
            TreeKind::FreeGroup { rank } => {
                label < 2 * rank as u32 && prefix.last().is_none_or(|&last| last ^ 1 != label)
            }
            TreeKind::FreeProduct { orders } => {
                if prefix.is_empty() {
                    label < orders[0]
                } else {
                    label >= 1 && label < orders[prefix.len() % 2]
                }
            }
        }
    }

    pub fn path_distance(x: &[u32], y: &[u32]) -> u64 {
        let lcp = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        (x.len() + y.len() - 2 * lcp) as u64
    }

    /// Vertices of the geodesic from `x` to `y`, both included.
    pub fn path_geodesic(x: &[u32], y: &[u32]) -> Vec<Vec<u32>> {
        let lcp = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        let mut out = Vec::with_capacity(x.len() + y.len() - 2 * lcp + 1);
        for k in (lcp..=x.len()).rev() {
            out.push(x[..k].to_vec());
        }
        for k in lcp + 1..=y.len() {
            out.push(y[..k].to_vec());
        }
        out
    }

    /// Vertex paths of the ball of radius `radius` around the basepoint,
    /// by depth then label order.
    pub fn ball_paths(&self, radius: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        let mut layer_start = 0;
        for _ in 0..radius {
            let layer_end = out.len();
            for i in layer_start..layer_end {
                let parent = out[i].clone();
                for l in self.child_labels(&parent) {
                    let mut child = parent.clone();
                    child.push(l);
                    out.push(child);
                }
            }
            layer_start = layer_end;
        }
        out
    }

    /// Vertex paths at exactly distance `depth` from the basepoint.
    pub fn sphere_paths(&self, depth: usize) -> Vec<Vec<u32>> {
        self.ball_paths(depth).into_iter().filter(|p| p.len() == depth).collect()
    }

    pub fn site(&self, path: Vec<u32>) -> Site {
        Site::vertex(self.id, path)
    }

    pub fn basepoint(&self) -> Site {
        self.site(Vec::new())
    }

    pub fn ball(&self, radius: usize) -> Vec<Site> {
        self.ball_paths(radius).into_iter().map(|p| self.site(p)).collect()
    }

    pub(crate) fn path_of<'a>(&self, x: &'a Site) -> Result<&'a [u32]> {
        match x {
            Site::Vertex { model, path } if *model == self.id => Ok(path),
            _ => Err(Error::ModelMismatch),
        }
    }

    pub(crate) fn check(&self, g: &GroupElement) -> Result<()> {
        if g.model == self.id {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    pub fn act(&self, g: &GroupElement, x: &Site) -> Result<Site> {
        self.check(g)?;
        let path = self.path_of(x)?;
        Ok(self.site(self.act_path(g, path)))
    }

    /// Display form of a vertex: `g·v₀` for Cayley trees, `g·⟨s⟩` or
    /// `g·⟨t⟩` for Bass–Serre trees.
    pub fn show_path(&self, path: &[u32]) -> String {
        match self.kind {
            TreeKind::FreeGroup { .. } => self.show(&self.wrap(self.free_syllables(path))),
            TreeKind::FreeProduct { .. } => {
                let (rep, ty) = self.product_vertex_rep(path);
                let factor = match ty {
                    VertexType::A => self.names[0],
                    VertexType::B => self.names[1],
                };
                format!("{}<{}>", self.show(&self.wrap(rep)), factor)
            }
        }
    }

    /// Display form of a sequence of labels (an edge path from the basepoint).
    pub fn show_labels(&self, labels: &[u32]) -> String {
        match self.kind {
            TreeKind::FreeGroup { .. } => labels
                .iter()
                .map(|&l| {
                    let c = self.names[(l / 2) as usize];
                    if l % 2 == 0 {
                        c
                    } else {
                        c.to_ascii_uppercase()
                    }
                })
                .collect(),
            TreeKind::FreeProduct { .. } => labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    /// Parses the output of [`show_labels`](Self::show_labels).
    pub fn parse_labels(&self, text: &str) -> Result<Vec<u32>> {
        let err = |reason: &str| Error::Alphabet {
            word: text.to_string(),
            offset: 0,
            reason: reason.to_string(),
        };
        let labels: Vec<u32> = match self.kind {
            TreeKind::FreeGroup { .. } => text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    if let Some(g) = self.names.iter().position(|&n| n == c) {
                        Ok(2 * g as u32)
                    } else if let Some(g) = self.names.iter().position(|&n| n.to_ascii_uppercase() == c) {
                        Ok(2 * g as u32 + 1)
                    } else {
                        Err(err("unknown letter"))
                    }
                })
                .collect::<Result<_>>()?,
            TreeKind::FreeProduct { .. } => text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| err("malformed label")))
                .collect::<Result<_>>()?,
        };
        if !self.is_valid_path(&labels) {
            return Err(err("not a reduced edge path"));
        }
        Ok(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_cancellation() {
        let f2 = TreeModel::free_group(2).unwrap();
        assert_eq!(f2.parse("aAb").unwrap(), f2.parse("b").unwrap());
        assert_eq!(f2.show(&f2.parse("a^-1 b^2 a a").unwrap()), "Ab^2a^2");
    }

    #[test]
    fn finite_factor_orders() {
        let m = TreeModel::modular();
        assert!(m.parse("ss").unwrap().is_identity());
        assert_eq!(m.parse("tttt").unwrap(), m.parse("t").unwrap());
        assert_eq!(m.show(&m.parse("t^-1").unwrap()), "t^2");
    }

    #[test]
    fn parse_rejects_foreign_letters() {
        let m = TreeModel::modular();
        assert!(matches!(m.parse("sx"), Err(Error::Alphabet { offset: 1, .. })));
        assert!(matches!(m.parse("s^"), Err(Error::Alphabet { .. })));
    }

    #[test]
    fn reduce_rejects_out_of_range_generators() {
        let f2 = TreeModel::free_group(2).unwrap();
        assert!(f2.reduce(&[Syllable::new(2, 1)]).is_err());
    }

    #[test]
    fn bass_serre_basepoint_is_fixed_by_s() {
        let m = TreeModel::modular();
        let s = m.parse("s").unwrap();
        assert_eq!(m.act_path(&s, &[]), Vec::<u32>::new());
        let t = m.parse("t").unwrap();
        assert_eq!(m.act_path(&t, &[0]), vec![0]);
        // st·v₀ sits at distance 2
        let st = m.parse("st").unwrap();
        assert_eq!(TreeModel::path_distance(&[], &m.orbit_path(&st)), 2);
    }

    #[test]
    fn path_roundtrip_through_representatives() {
        let m = TreeModel::modular();
        for p in m.ball_paths(5) {
            let (rep, ty) = m.product_vertex_rep(&p);
            assert_eq!(m.product_vertex_path(&rep, ty), p);
        }
    }

    #[test]
    fn enumeration_counts() {
        let f2 = TreeModel::free_group(2).unwrap();
        assert_eq!(f2.elements_of_length(3).len(), 36);
        assert_eq!(f2.ball_paths(3).len(), 53);
        let m = TreeModel::modular();
        // alternating syllables: 1·2·1·2 + 2·1·2·1
        assert_eq!(m.elements_of_length(4).len(), 8);
    }

    #[test]
    fn cyclic_reduction_and_orders() {
        let m = TreeModel::modular();
        let g = m.parse("tst^2").unwrap();
        assert_eq!(m.finite_order(&g), Some(2));
        assert_eq!(m.finite_order(&m.parse("st").unwrap()), None);
        let f2 = TreeModel::free_group(2).unwrap();
        let (w, c) = f2.cyclic_reduction(&f2.parse("aabA").unwrap());
        assert_eq!(f2.show(&c), "ab");
        assert_eq!(f2.conj(&c, &w), f2.parse("aabA").unwrap());
    }

    #[test]
    fn random_elements_have_requested_length() {
        let f2 = TreeModel::free_group(2).unwrap();
        let g = f2.random_element(3, 7);
        assert_eq!(f2.len(&g), 3);
        assert_eq!(g, f2.random_element(3, 7));
        let m = TreeModel::modular();
        assert_eq!(m.len(&m.random_element(4, 1)), 4);
        assert!(m.random_element(0, 1).is_identity());
    }
}
