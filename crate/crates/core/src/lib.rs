//! Ping-pong partners for group actions on trees.
//!
//! Given a group acting on a tree (a free group on its Cayley tree, or a
//! free product of two finite cyclic groups on its Bass–Serre tree), this
//! crate searches for a loxodromic element `γ` and a power `N` such that
//! `⟨γᴺ, H⟩ ≅ ⟨γᴺ⟩ * H` for each supplied finite subgroup `H`, and then
//! checks the result by exhaustive enumeration with independent oracles.
//!
//! Modules:
//! - [`hypspace`]: distances, geodesics, Gromov products, four-point δ, shadows.
//! - [`models`]: the concrete actions, normal forms, tree ends.
//! - [`isometry`]: classification, translation length, axes, fixed-point sets.
//! - [`partner`]: axis location, escape search, power selection, full pipeline.
//! - [`certify`]: freeness certificates and combinatorial word checks.
//! - [`boundary`]: measures on ends, proximality, minimality, topological freeness.

pub mod boundary;
pub mod certify;
mod error;
pub mod hypspace;
pub mod isometry;
pub mod models;
pub mod partner;

pub use error::{Error, Result};
pub use hypspace::{Dist, Site};
pub use models::{ActionModel, Cylinder, EndPoint, GroupElement, ModelId, Syllable, TreeModel};
