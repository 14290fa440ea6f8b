//! Abstract entity types and built-in domain profiles used to theme DAGs.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::is_identifier;

pub const CATALOG_VERSION: &str = "entity-catalog/1";
pub const CATALOG_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityType {
    pub name: String,
    pub description: String,
    pub examples: Vec<String>,
}

impl EntityType {
    /// Lowercase identifier form used in mechanical predicate names.
    pub fn ident(&self) -> String {
        self.name.to_ascii_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("catalog has {0} entries, expected {CATALOG_SIZE}")]
    Size(usize),
    #[error("duplicate entity type `{0}`")]
    Duplicate(String),
    #[error("entity type `{0}` does not lower to an identifier")]
    BadName(String),
    #[error("profile `{0}` is missing a name, background or entity types")]
    Profile(String),
    #[error("profile refers to unknown entity type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCatalog {
    pub version: String,
    pub entries: Vec<EntityType>,
}

const BUILTIN: [(&str, &str, [&str; 2]); CATALOG_SIZE] = [
    ("Person", "an individual human", ["emma", "liam"]),
    ("Job", "an occupation or role", ["nurse", "pilot"]),
    (
        "Organization",
        "a company, agency or institution",
        ["acme", "city_council"],
    ),
    ("Location", "a named place", ["harbor", "north_gate"]),
    ("Building", "a physical structure", ["vault", "clinic"]),
    ("Vehicle", "a means of transport", ["truck_7", "ferry"]),
    ("Animal", "a non-human creature", ["otter", "falcon"]),
    ("Plant", "a plant or fungus", ["fern", "willow"]),
    (
        "Disease",
        "an illness or infection",
        ["influenza", "blight"],
    ),
    (
        "Medication",
        "a drug or treatment",
        ["aspirin", "vaccine_b"],
    ),
    ("Device", "a machine or instrument", ["scanner", "pump_2"]),
    (
        "Document",
        "a record, permit or report",
        ["permit_a", "ledger"],
    ),
    (
        "Event",
        "a scheduled or observed occurrence",
        ["audit", "launch"],
    ),
    (
        "Project",
        "an organized undertaking",
        ["bridge_plan", "survey"],
    ),
    ("Product", "a manufactured good", ["widget", "battery"]),
    (
        "Material",
        "a substance or raw material",
        ["steel", "resin"],
    ),
    ("Food", "an edible item", ["bread", "rice"]),
    ("Weather", "an atmospheric condition", ["storm", "frost"]),
    (
        "Account",
        "a financial or user account",
        ["acct_1", "wallet"],
    ),
    ("Course", "a unit of study", ["algebra", "chemistry"]),
    (
        "Experiment",
        "a controlled trial or test",
        ["trial_3", "assay"],
    ),
    (
        "Policy",
        "a rule set or regulation",
        ["safety_code", "tariff"],
    ),
    ("Contract", "a binding agreement", ["lease", "warranty"]),
    ("Artwork", "a creative work", ["mural", "sonata"]),
    ("Game", "a competitive match or sport", ["final", "derby"]),
    (
        "Software",
        "a program or service",
        ["firewall", "scheduler"],
    ),
    (
        "Network",
        "a communication or transport network",
        ["grid", "relay"],
    ),
    ("Currency", "a unit of money or credit", ["euro", "token"]),
    ("Team", "a group working together", ["crew", "squad"]),
    ("Facility", "a site providing a service", ["lab", "depot"]),
    ("Resource", "a consumable supply", ["water", "fuel"]),
    (
        "Signal",
        "an alarm, message or indicator",
        ["alarm", "beacon"],
    ),
];

impl EntityCatalog {
    pub fn builtin() -> Self {
        let entries = BUILTIN
            .iter()
            .map(|(n, d, ex)| EntityType {
                name: n.to_string(),
                description: d.to_string(),
                examples: ex.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        Self {
            version: CATALOG_VERSION.to_string(),
            entries,
        }
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.entries.len() != CATALOG_SIZE {
            return Err(CatalogError::Size(self.entries.len()));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !is_identifier(&e.ident()) {
                return Err(CatalogError::BadName(e.name.clone()));
            }
            if !seen.insert(e.ident()) {
                return Err(CatalogError::Duplicate(e.name.clone()));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&EntityType> {
        self.entries
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }
}

/// A themed scenario the instantiation step draws names and context from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainProfile {
    pub name: String,
    pub background: String,
    /// Constants usable as predicate arguments.
    pub constant_pool: Vec<String>,
    /// Catalog entity types this domain draws on.
    pub entity_types: Vec<String>,
}

impl DomainProfile {
    pub fn validate(&self, catalog: &EntityCatalog) -> Result<(), CatalogError> {
        if self.name.trim().is_empty()
            || self.background.trim().is_empty()
            || self.entity_types.is_empty()
        {
            return Err(CatalogError::Profile(self.name.clone()));
        }
        if let Some(bad) = self.constant_pool.iter().find(|c| !is_identifier(c)) {
            return Err(CatalogError::BadName(bad.clone()));
        }
        for t in &self.entity_types {
            if catalog.get(t).is_none() {
                return Err(CatalogError::UnknownType(t.clone()));
            }
        }
        Ok(())
    }
}

fn profile(name: &str, background: &str, constants: &[&str], types: &[&str]) -> DomainProfile {
    DomainProfile {
        name: name.to_string(),
        background: background.to_string(),
        constant_pool: constants.iter().map(|s| s.to_string()).collect(),
        entity_types: types.iter().map(|s| s.to_string()).collect(),
    }
}

/// Built-in profiles; instances pick one by seed.
pub fn builtin_profiles() -> Vec<DomainProfile> {
    Vec::from([
        profile(
            "access control",
            "A research facility guards its vault with layered checks. Staff may be admitted through \
             several independent procedures, and the security office records which credentials each \
             visitor presents.",
            &["emma", "liam", "guard_1"],
            &["Person", "Building", "Device", "Document", "Signal"],
        ),
        profile(
            "clinical trials",
            "A hospital runs a multi-site drug trial. Enrollment, dosing and reporting depend on patient \
             records, lab results and the trial protocol.",
            &["patient_4", "site_b", "dr_okafor"],
            &["Person", "Medication", "Disease", "Experiment", "Document"],
        ),
        profile(
            "logistics",
            "A regional carrier routes shipments between depots. Whether a parcel moves on a given day \
             depends on vehicles, weather and paperwork.",
            &["depot_north", "truck_7", "parcel_12"],
            &["Vehicle", "Facility", "Weather", "Product", "Document"],
        ),
        profile(
            "ecology survey",
            "Field biologists monitor a wetland reserve. Their conclusions about species and habitats \
             follow from observations, lab tests and reserve regulations.",
            &["marsh", "otter", "team_b"],
            &["Animal", "Plant", "Location", "Disease", "Team"],
        ),
        profile(
            "software release",
            "An engineering team prepares a product release. Shipping depends on test results, reviews, \
             infrastructure status and company policy.",
            &["build_42", "api", "ops_team"],
            &["Software", "Team", "Network", "Policy", "Event"],
        ),
        profile(
            "municipal budget",
            "A city council allocates funds across departments. Approvals follow from regulations, \
             audits and the outcome of votes.",
            &["council", "parks_dept", "audit_q3"],
            &["Organization", "Currency", "Policy", "Project", "Contract"],
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_is_valid() {
        let c = EntityCatalog::builtin();
        c.validate().unwrap();
        assert!(c.get("person").is_some());
        assert!(c.get("Job").is_some());
        for p in builtin_profiles() {
            p.validate(&c).unwrap();
        }
    }

    #[test]
    fn catalog_size_is_enforced() {
        let mut c = EntityCatalog::builtin();
        c.entries.pop();
        assert_eq!(c.validate(), Err(CatalogError::Size(31)));
        let mut c = EntityCatalog::builtin();
        c.entries[1].name = "person".into();
        assert!(matches!(c.validate(), Err(CatalogError::Duplicate(_))));
    }
}
