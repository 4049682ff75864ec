//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! subgroups = [["s"], ["t"]]
//!
//! [model]
//! kind = "free-product"        # or "free-group", "half-plane"
//! orders = [2, 3]
//!
//! [bounds]
//! region_radius = 6
//! ```
//!
//! Every section except `[model]` is optional; missing fields take the
//! defaults below. The resolved configuration is embedded in each record.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Required by `boundary-demo`, recorded everywhere.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Generator lists, one per subgroup.
    #[serde(default)]
    pub subgroups: Vec<Vec<String>>,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub certify_free: CertifyFreeConfig,
    #[serde(default)]
    pub star: StarConfig,
    #[serde(default)]
    pub noloops: NoLoopsConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub acylindricity: AcylindricityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    FreeGroup {
        rank: usize,
    },
    FreeProduct {
        orders: Vec<u32>,
    },
    /// Generators as 2×2 real matrices of determinant one.
    HalfPlane {
        matrices: Vec<[[f64; 2]; 2]>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bounds {
    pub region_radius: usize,
    pub depth: usize,
    pub syllable_bound: usize,
    pub exponent_bound: u32,
    pub escape_max_len: usize,
    pub escape_max_exp: u32,
    pub enumeration_cap: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            region_radius: 6,
            depth: 3,
            syllable_bound: 8,
            exponent_bound: 3,
            escape_max_len: 6,
            escape_max_exp: 4,
            enumeration_cap: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub elements: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyFreeConfig {
    /// The element playing `γᴺ`.
    pub gamma_n: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarConfig {
    pub m_set: Vec<String>,
    pub m: Vec<usize>,
    /// Searched for when absent.
    pub u: Option<String>,
    /// Computed from the no-loops window when absent.
    pub n: Option<u64>,
    /// Checks this triple instead of `(uᴺ, u²ᴺ, u³ᴺ)`.
    pub triple: Option<[String; 3]>,
    pub partner_max_len: usize,
    pub n_cap: u64,
}

impl Default for StarConfig {
    fn default() -> Self {
        StarConfig { m_set: Vec::new(), m: vec![2], u: None, n: None, triple: None, partner_max_len: 4, n_cap: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoLoopsConfig {
    pub u: String,
    pub elements: Vec<String>,
    pub n: u64,
    pub exp_bound: u64,
}

impl Default for NoLoopsConfig {
    fn default() -> Self {
        NoLoopsConfig { u: String::new(), elements: Vec::new(), n: 1, exp_bound: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub atoms: usize,
    /// `p/q`.
    pub tolerance: String,
    pub target_depth: usize,
    /// `prefix(period)`; a seeded end is used when absent.
    pub target: Option<String>,
    pub steps: usize,
    pub freeness_max_len: usize,
    pub freeness_depth: usize,
    pub minimality_ends: usize,
    pub minimality_depth: usize,
    pub minimality_max_len: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            atoms: 3,
            tolerance: "1/100".into(),
            target_depth: 3,
            target: None,
            steps: 20,
            freeness_max_len: 3,
            freeness_depth: 3,
            minimality_ends: 10,
            minimality_depth: 2,
            minimality_max_len: 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcylindricityConfig {
    pub epsilon: u64,
    pub m: u64,
    pub word_length_cap: usize,
}

impl Default for AcylindricityConfig {
    fn default() -> Self {
        AcylindricityConfig { epsilon: 0, m: 4, word_length_cap: 4 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every bound must be positive.
    pub fn validate(&self) -> Result<(), String> {
        let b = &self.bounds;
        let named = [
            ("bounds.region_radius", b.region_radius as u64),
            ("bounds.depth", b.depth as u64),
            ("bounds.syllable_bound", b.syllable_bound as u64),
            ("bounds.exponent_bound", u64::from(b.exponent_bound)),
            ("bounds.escape_max_len", b.escape_max_len as u64),
            ("bounds.escape_max_exp", u64::from(b.escape_max_exp)),
            ("bounds.enumeration_cap", b.enumeration_cap),
            ("star.partner_max_len", self.star.partner_max_len as u64),
            ("star.n_cap", self.star.n_cap),
            ("noloops.exp_bound", self.noloops.exp_bound),
            ("boundary.atoms", self.boundary.atoms as u64),
            ("boundary.target_depth", self.boundary.target_depth as u64),
            ("boundary.steps", self.boundary.steps as u64),
            ("boundary.freeness_max_len", self.boundary.freeness_max_len as u64),
            ("boundary.freeness_depth", self.boundary.freeness_depth as u64),
            ("boundary.minimality_depth", self.boundary.minimality_depth as u64),
            ("acylindricity.word_length_cap", self.acylindricity.word_length_cap as u64),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v == 0) {
            return Err(format!("{name} must be positive"));
        }
        if self.star.m.contains(&0) {
            return Err("star.m entries must be positive".into());
        }
        Ok(())
    }
}
