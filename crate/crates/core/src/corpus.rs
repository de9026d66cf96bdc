//! Bundled example systems and grammars.

use crate::decomposition::ConeTypeSystem;
use crate::error::Result;

pub const SYSTEMS: [(&str, &str); 5] = [
    ("line", include_str!("../systems/line.json")),
    ("ladder", include_str!("../systems/ladder.json")),
    ("tree3", include_str!("../systems/tree3.json")),
    (
        "paper-example",
        include_str!("../systems/paper-example.json"),
    ),
    (
        "free-product-c2-c3",
        include_str!("../systems/free-product-c2-c3.json"),
    ),
];

pub const NAMES: [&str; 5] = [
    "line",
    "ladder",
    "tree3",
    "paper-example",
    "free-product-c2-c3",
];

/// The two-rank example grammar for `{a^k b^l c^m : k >= l >= m >= 0}`.
pub const SEKI_GRAMMAR: &str = include_str!("../systems/seki.json");

pub fn text(name: &str) -> Option<&'static str> {
    SYSTEMS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn system(name: &str) -> Option<ConeTypeSystem> {
    text(name).map(|t| ConeTypeSystem::from_json(t).expect("bundled system is valid"))
}

pub fn load_all() -> Result<Vec<(&'static str, ConeTypeSystem)>> {
    SYSTEMS
        .iter()
        .map(|(n, t)| Ok((*n, ConeTypeSystem::from_json(t)?)))
        .collect()
}
