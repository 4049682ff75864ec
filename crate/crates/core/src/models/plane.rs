use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use super::{GroupElement, ModelId, TreeModel};
use crate::hypspace::{Dist, Site};
use crate::{Error, Result};

/// A point `x + iy` of the upper half-plane.
#[derive(Clone, Copy, Debug)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }
}

impl PartialEq for PlanePoint {
    fn eq(&self, other: &Self) -> bool {
        self.x.to_bits() == other.x.to_bits() && self.y.to_bits() == other.y.to_bits()
    }
}

impl Eq for PlanePoint {}

impl Hash for PlanePoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.x.to_bits().hash(state);
        self.y.to_bits().hash(state);
    }
}

impl PartialOrd for PlanePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlanePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

/// A free group acting on the upper half-plane through real `2×2`
/// matrices of determinant one.
///
/// Floating point only: results are approximate and never certify.
/// Words are handled by an internal free group of the same rank.
#[derive(Clone, Debug)]
pub struct PlaneModel {
    id: ModelId,
    words: TreeModel,
    matrices: Vec<[[f64; 2]; 2]>,
}

impl PlaneModel {
    pub fn new(matrices: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Domain("the half-plane model needs at least one generator".into()));
        }
        for m in &matrices {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (det - 1.0).abs() > 1e-9 || m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("generator matrix {m:?} does not have determinant 1")));
            }
        }
        let words = TreeModel::free_group(matrices.len())?;
        let mut parts = vec![0x0050_4c41_4e45_u64];
        parts.extend(matrices.iter().flatten().flatten().map(|v| v.to_bits()));
        Ok(PlaneModel { id: ModelId::from_parts(&parts), words, matrices })
    }

    /// The level-2 congruence generators `[[1,2],[0,1]]` and `[[1,0],[2,1]]`,
    /// which generate a free group of rank two.
    pub fn sanov() -> Self {
        Self::new(vec![[[1.0, 2.0], [0.0, 1.0]], [[1.0, 0.0], [2.0, 1.0]]]).expect("valid matrices")
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn matrices(&self) -> &[[[f64; 2]; 2]] {
        &self.matrices
    }

    /// `ln(1 + √2)`, the four-point constant of the hyperbolic plane.
    pub fn delta(&self) -> Dist {
        Dist::approx(std::f64::consts::SQRT_2.ln_1p())
    }

    /// Conservative demo values; they are not derived from a proof and
    /// the model never feeds certificates.
    pub fn local_global_constants(&self) -> (Dist, Dist) {
        (Dist::approx(100.0), Dist::approx(2.0))
    }

    pub fn basepoint(&self) -> Site {
        self.site(PlanePoint::new(0.0, 1.0))
    }

    pub fn site(&self, point: PlanePoint) -> Site {
        Site::Plane { model: self.id, point }
    }

    fn rebrand(&self, g: GroupElement) -> GroupElement {
        GroupElement { model: self.id, syllables: g.syllables }
    }

    pub fn parse(&self, word: &str) -> Result<GroupElement> {
        self.words.parse(word).map(|g| self.rebrand(g))
    }

    pub fn show(&self, g: &GroupElement) -> String {
        let inner = GroupElement { model: self.words.id(), syllables: g.syllables.clone() };
        self.words.show(&inner)
    }

    pub fn random_element(&self, length: usize, seed: u64) -> GroupElement {
        self.rebrand(self.words.random_element(length, seed))
    }

    pub fn point_of(&self, x: &Site) -> Result<PlanePoint> {
        match x {
            Site::Plane { model, point } if *model == self.id => Ok(*point),
            _ => Err(Error::ModelMismatch),
        }
    }

    /// The matrix of `g`, as a product of generator powers.
    pub fn matrix(&self, g: &GroupElement) -> Result<[[f64; 2]; 2]> {
        if g.model != self.id {
            return Err(Error::ModelMismatch);
        }
        let mut acc = [[1.0, 0.0], [0.0, 1.0]];
        for syl in &g.syllables {
            let m = self.matrices[syl.gen];
            let step = if syl.exp > 0 { m } else { [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]] };
            for _ in 0..syl.exp.unsigned_abs() {
                acc = mat_mul(&acc, &step);
            }
        }
        Ok(acc)
    }

    pub fn act(&self, g: &GroupElement, x: &Site) -> Result<Site> {
        let z = self.point_of(x)?;
        Ok(self.site(mobius(&self.matrix(g)?, z)))
    }

    /// Hyperbolic distance `arcosh(1 + |z − w|² / (2 Im z Im w))`.
    pub fn distance(&self, z: PlanePoint, w: PlanePoint) -> f64 {
        let num = (z.x - w.x).powi(2) + (z.y - w.y).powi(2);
        (1.0 + num / (2.0 * z.y * w.y)).acosh()
    }
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub(crate) fn mobius(m: &[[f64; 2]; 2], z: PlanePoint) -> PlanePoint {
    // (az + b)/(cz + d) with z = x + iy
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let (nr, ni) = (a * z.x + b, a * z.y);
    let (dr, di) = (c * z.x + d, c * z.y);
    let den = dr * dr + di * di;
    PlanePoint::new((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
}
