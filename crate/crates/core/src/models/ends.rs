use std::fmt;

use super::{GroupElement, TreeModel};
use crate::{Error, Result};

/// An eventually periodic end of a tree model: the ray from the basepoint
/// whose labels are `prefix · period · period · …`.
///
/// Stored canonically (primitive period, shortest prefix), so two values are
/// equal iff the rays eventually coincide and start at the basepoint, i.e.
/// iff they denote the same end.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndPoint {
    prefix: Vec<u32>,
    period: Vec<u32>,
}

impl EndPoint {
    pub(crate) fn canonical(mut prefix: Vec<u32>, period: Vec<u32>) -> Self {
        debug_assert!(!period.is_empty());
        let n = period.len();
        let root = (1..=n)
            .find(|&k| n.is_multiple_of(k) && (k..n).all(|i| period[i] == period[i - k]))
            .unwrap_or(n);
        let mut period = period[..root].to_vec();
        while let (Some(&p), Some(&q)) = (prefix.last(), period.last()) {
            if p != q {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        EndPoint { prefix, period }
    }

    pub fn prefix(&self) -> &[u32] {
        &self.prefix
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    /// The first `depth` labels of the ray.
    pub fn ray(&self, depth: usize) -> Vec<u32> {
        let mut out: Vec<u32> = self.prefix.iter().copied().take(depth).collect();
        let mut i = 0;
        while out.len() < depth {
            out.push(self.period[i % self.period.len()]);
            i += 1;
        }
        out
    }

    pub fn cylinder(&self, depth: usize) -> Cylinder {
        Cylinder(self.ray(depth))
    }

    pub fn in_cylinder(&self, c: &Cylinder) -> bool {
        self.ray(c.depth()) == c.0
    }
}

/// The set of ends whose ray from the basepoint starts with the given labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder(pub(crate) Vec<u32>);

impl Cylinder {
    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, other: &Cylinder) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// A clopen set of ends that is either a cylinder or the complement of one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CylinderSet {
    Cylinder(Vec<u32>),
    Complement(Vec<u32>),
}

impl CylinderSet {
    /// Whether the set meets the (canonical) cylinder `c`.
    pub fn meets(&self, c: &[u32]) -> bool {
        match self {
            CylinderSet::Cylinder(x) => x.starts_with(c) || c.starts_with(x),
            CylinderSet::Complement(u) => !c.starts_with(u),
        }
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Finds the end approached by the vertices `f(0), f(1), …`, which must lie
/// on a ray whose label sequence is eventually periodic with `step` labels
/// per index. Returns `None` if no stable window is found below `cap`.
pub(crate) fn end_limit(f: impl Fn(usize) -> Vec<u32>, step: usize, cap: usize) -> Option<EndPoint> {
    if step == 0 {
        return None;
    }
    let mut window: Vec<Vec<u32>> = (0..4).map(&f).collect();
    for k in 0..cap {
        let stable = (0..3).all(|j| {
            window[j + 1].len() == window[j].len() + step && window[j + 1].starts_with(&window[j])
        }) && (1..3).all(|j| window[j + 1][window[j].len()..] == window[1][window[0].len()..]);
        if stable {
            let ext = window[1][window[0].len()..].to_vec();
            return Some(EndPoint::canonical(window[0].clone(), ext));
        }
        window.remove(0);
        window.push(f(k + 4));
    }
    None
}

impl TreeModel {
    /// The end with rays `prefix · period^∞`, validated as a reduced path.
    pub fn end(&self, prefix: Vec<u32>, period: Vec<u32>) -> Result<EndPoint> {
        if period.is_empty() {
            return Err(Error::Domain("end period must be nonempty".into()));
        }
        let mut ray = prefix.clone();
        for _ in 0..3 {
            ray.extend_from_slice(&period);
        }
        if !self.is_valid_path(&ray) {
            return Err(Error::Domain("end ray is not a reduced edge path".into()));
        }
        Ok(EndPoint::canonical(prefix, period))
    }

    /// Parses `prefix(period)` written with [`show_labels`](Self::show_labels).
    pub fn parse_end(&self, text: &str) -> Result<EndPoint> {
        let bad = || Error::Alphabet {
            word: text.to_string(),
            offset: 0,
            reason: "expected prefix(period)".into(),
        };
        let open = text.find('(').ok_or_else(bad)?;
        let close = text.rfind(')').ok_or_else(bad)?;
        if close < open {
            return Err(bad());
        }
        let prefix = self.parse_labels_unchecked(&text[..open])?;
        let period = self.parse_labels_unchecked(&text[open + 1..close])?;
        self.end(prefix, period)
    }

    fn parse_labels_unchecked(&self, text: &str) -> Result<Vec<u32>> {
        // Validity is checked on the whole ray by `end`.
        if self.is_free_group() {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    let lower = c.to_ascii_lowercase();
                    let g = self.names().iter().position(|&n| n == lower).ok_or(Error::Alphabet {
                        word: text.to_string(),
                        offset: 0,
                        reason: format!("unknown letter {c:?}"),
                    })?;
                    Ok(2 * g as u32 + u32::from(c.is_uppercase()))
                })
                .collect()
        } else {
            text.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| Error::Alphabet {
                        word: text.to_string(),
                        offset: 0,
                        reason: "malformed label".into(),
                    })
                })
                .collect()
        }
    }

    pub fn show_end(&self, e: &EndPoint) -> String {
        format!("{}({})", self.show_labels(&e.prefix), self.show_labels(&e.period))
    }

    pub fn cylinder(&self, labels: Vec<u32>) -> Result<Cylinder> {
        if self.is_valid_path(&labels) {
            Ok(Cylinder(labels))
        } else {
            Err(Error::Domain("cylinder labels are not a reduced edge path".into()))
        }
    }

    /// All cylinders of the given depth, in label order.
    pub fn cylinders(&self, depth: usize) -> Vec<Cylinder> {
        self.sphere_paths(depth).into_iter().map(Cylinder).collect()
    }

    /// `g·ξ`.
    pub fn act_end(&self, g: &GroupElement, xi: &EndPoint) -> EndPoint {
        let base = xi.prefix.len();
        let per = xi.period.len();
        let reach = TreeModel::path_distance(&[], &self.orbit_path(g)) as usize;
        let cap = (2 * reach + base) / per + 16;
        end_limit(|k| self.act_path(g, &xi.ray(base + k * per)), per, cap)
            .expect("an isometry maps an eventually periodic ray to one")
    }

    /// Some end inside the cylinder: continue by repeating the last letter
    /// (Cayley trees) or by the label `1` (Bass–Serre trees).
    pub fn end_in(&self, c: &Cylinder) -> EndPoint {
        let period = if self.is_free_group() {
            vec![c.0.last().copied().unwrap_or(0)]
        } else {
            vec![1, 1]
        };
        EndPoint::canonical(c.0.clone(), period)
    }

    /// Extends a cylinder through vertices with a single child; two
    /// cylinders are equal as sets iff their canonical labels agree.
    pub(crate) fn canonical_cylinder(&self, mut path: Vec<u32>) -> Vec<u32> {
        while !path.is_empty() {
            let kids = self.child_labels(&path);
            if kids.len() != 1 {
                break;
            }
            path.push(kids[0]);
        }
        path
    }

    fn complement_of(&self, u: Vec<u32>) -> CylinderSet {
        let u = self.canonical_cylinder(u);
        let roots = self.child_labels(&[]);
        if roots.len() == 2 && !u.is_empty() && self.canonical_cylinder(vec![u[0]]) == u {
            let other = if roots[0] == u[0] { roots[1] } else { roots[0] };
            return CylinderSet::Cylinder(self.canonical_cylinder(vec![other]));
        }
        CylinderSet::Complement(u)
    }

    /// Ends whose ray from the vertex `from` passes through the vertex `w`.
    pub(crate) fn branch_beyond(&self, w: &[u32], from: &[u32]) -> Option<CylinderSet> {
        if w == from {
            return None;
        }
        let toward = &TreeModel::path_geodesic(w, from)[1];
        if !w.is_empty() && toward.as_slice() == &w[..w.len() - 1] {
            Some(CylinderSet::Cylinder(self.canonical_cylinder(w.to_vec())))
        } else {
            Some(self.complement_of(toward.clone()))
        }
    }

    /// `g·C` for a cylinder `C` of positive depth, as a cylinder set.
    pub fn image_of_cylinder(&self, g: &GroupElement, c: &Cylinder) -> CylinderSet {
        if c.0.is_empty() {
            return CylinderSet::Cylinder(Vec::new());
        }
        let w = self.act_path(g, &c.0);
        let groot = self.orbit_path(g);
        self.branch_beyond(&w, &groot).expect("distinct vertices")
    }

    /// Whether the set meets the cylinder `c`, which need not be canonical.
    pub fn set_meets(&self, set: &CylinderSet, c: &Cylinder) -> bool {
        set.meets(&self.canonical_cylinder(c.0.clone()))
    }

    pub fn canonical_set(&self, c: &Cylinder) -> CylinderSet {
        CylinderSet::Cylinder(self.canonical_cylinder(c.0.clone()))
    }
}
