//! Brute-force verification: freeness of `⟨γᴺ⟩ * H`, the broken-path
//! geodesity check, property (*), the no-loops words, `E(u)` and the
//! relative metric of a factor.

mod freeness;
mod paths;
mod relmetric;
mod star;

pub use freeness::{freeness_certificate, CertStatus, FreeProductWord, FreenessCertificate, Letter, ENUMERATION_CAP};
pub use paths::{path_quasigeodesic_check, PathReport, ProductBound};
pub use relmetric::rel_metric;
pub use star::{
    elementary_closure, noloops_bound, noloops_check, primitive_root, star_partner, star_property_check,
    star_property_check_triple, ElementaryClosure, NoLoopsReport, StarReport, WordStatus,
};
