//! Drug-category economics and bundled run configurations.
//!
//! All money is in millions of USD. Revenue is lifetime revenue of an
//! approved drug, `c0` covers R&D and regulatory spending, `c` is the cost
//! per trial participant.

use crate::config::{ConfigError, RunConfig};

/// A reported value: optional median and a `[low, high]` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reported {
    pub median: Option<f64>,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrugCategory {
    pub name: &'static str,
    pub revenue: Reported,
    pub fixed_cost: Reported,
    pub sample_cost: f64,
}

pub const ONCOLOGY: DrugCategory = DrugCategory {
    name: "oncology",
    revenue: Reported {
        median: None,
        low: 1_500.0,
        high: 50_000.0,
    },
    fixed_cost: Reported {
        median: Some(648.0),
        low: 150.0,
        high: 1_000.0,
    },
    sample_cost: 0.136,
};

pub const CARDIOVASCULAR: DrugCategory = DrugCategory {
    name: "cardiovascular",
    revenue: Reported {
        median: Some(3_560.0),
        low: 1_000.0,
        high: 10_000.0,
    },
    fixed_cost: Reported {
        median: Some(141.0),
        low: 74.0,
        high: 183.0,
    },
    sample_cost: 0.128,
};

pub const VACCINE: DrugCategory = DrugCategory {
    name: "vaccine",
    revenue: Reported {
        median: None,
        low: 6_900.0,
        high: 36_900.0,
    },
    fixed_cost: Reported {
        median: Some(886.0),
        low: 100.0,
        high: 1_000.0,
    },
    sample_cost: 0.05,
};

pub const DRUG_CATEGORIES: [DrugCategory; 3] = [ONCOLOGY, CARDIOVASCULAR, VACCINE];

pub fn drug_category(name: &str) -> Option<DrugCategory> {
    DRUG_CATEGORIES.into_iter().find(|d| d.name == name)
}

/// Bundled configurations, by name.
pub const BUNDLED: [(&str, &str); 6] = [
    (
        "cardiovascular",
        include_str!("../presets/cardiovascular.json"),
    ),
    ("oncology", include_str!("../presets/oncology.json")),
    ("vaccine", include_str!("../presets/vaccine.json")),
    ("fn-curves-53", include_str!("../presets/fn-curves-53.json")),
    ("fn-curves-62", include_str!("../presets/fn-curves-62.json")),
    ("fn-curves-67", include_str!("../presets/fn-curves-67.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Loads a bundled configuration. Returns `None` for an unknown name.
pub fn preset(name: &str) -> Option<Result<RunConfig, ConfigError>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| RunConfig::from_json(text))
}
