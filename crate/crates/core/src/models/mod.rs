//! Concrete group actions.
//!
//! Tree models (free groups on Cayley trees, `Z/p * Z/q` on Bass–Serre
//! trees) are exact and may produce certificates. The half-plane model is
//! floating point and only serves demonstrations.

pub(crate) mod ends;
mod matrix;
mod plane;
mod tree;

pub use ends::{Cylinder, CylinderSet, EndPoint};
pub use matrix::Mat2;
pub use plane::{PlaneModel, PlanePoint};
pub use tree::{TreeKind, TreeModel, VertexType};

use crate::hypspace::{Dist, Site};
use crate::{Error, Result};

/// Opaque handle naming the model an element or site belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId(pub u64);

impl ModelId {
    pub(crate) fn from_parts(parts: &[u64]) -> Self {
        // FNV-1a over the words, stable across runs and platforms.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in parts {
            for b in p.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        ModelId(h)
    }
}

/// A power of one generator. In normal forms adjacent syllables use
/// different generators and exponents are nonzero; for a generator of
/// finite order `p` the exponent lies in `1..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub gen: usize,
    pub exp: i64,
}

impl Syllable {
    pub fn new(gen: usize, exp: i64) -> Self {
        Syllable { gen, exp }
    }
}

/// A group element stored in its unique normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub(crate) model: ModelId,
    pub(crate) syllables: Vec<Syllable>,
}

impl GroupElement {
    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }
}

#[derive(Clone, Debug)]
pub enum ActionModel {
    Tree(TreeModel),
    Plane(PlaneModel),
}

impl ActionModel {
    pub fn id(&self) -> ModelId {
        match self {
            ActionModel::Tree(t) => t.id(),
            ActionModel::Plane(p) => p.id(),
        }
    }

    /// The hyperbolicity constant the model is built with.
    pub fn delta(&self) -> Dist {
        match self {
            ActionModel::Tree(_) => Dist::ZERO,
            ActionModel::Plane(p) => p.delta(),
        }
    }

    /// `(K₁, K₂)`: every `K₁`-local `(1, 10δ)`-quasigeodesic is a global
    /// `K₂`-quasigeodesic.
    pub fn local_global_constants(&self) -> (Dist, Dist) {
        match self {
            ActionModel::Tree(_) => (Dist::from_int(1), Dist::from_int(1)),
            ActionModel::Plane(p) => p.local_global_constants(),
        }
    }

    pub fn basepoint(&self) -> Site {
        match self {
            ActionModel::Tree(t) => t.basepoint(),
            ActionModel::Plane(p) => p.basepoint(),
        }
    }

    /// Exact arithmetic throughout, so results may be used as certificates.
    pub fn certificate_capable(&self) -> bool {
        matches!(self, ActionModel::Tree(_))
    }

    pub fn as_tree(&self) -> Result<&TreeModel> {
        match self {
            ActionModel::Tree(t) => Ok(t),
            ActionModel::Plane(_) => Err(Error::Unsupported(
                "the half-plane model is floating point and demo-only".into(),
            )),
        }
    }

    pub fn parse(&self, word: &str) -> Result<GroupElement> {
        match self {
            ActionModel::Tree(t) => t.parse(word),
            ActionModel::Plane(p) => p.parse(word),
        }
    }

    pub fn show(&self, g: &GroupElement) -> String {
        match self {
            ActionModel::Tree(t) => t.show(g),
            ActionModel::Plane(p) => p.show(g),
        }
    }

    pub fn act(&self, g: &GroupElement, x: &Site) -> Result<Site> {
        match self {
            ActionModel::Tree(t) => t.act(g, x),
            ActionModel::Plane(p) => p.act(g, x),
        }
    }

    pub fn random_element(&self, length: usize, seed: u64) -> GroupElement {
        match self {
            ActionModel::Tree(t) => t.random_element(length, seed),
            ActionModel::Plane(p) => p.random_element(length, seed),
        }
    }
}

impl From<TreeModel> for ActionModel {
    fn from(t: TreeModel) -> Self {
        ActionModel::Tree(t)
    }
}

impl From<PlaneModel> for ActionModel {
    fn from(p: PlaneModel) -> Self {
        ActionModel::Plane(p)
    }
}
