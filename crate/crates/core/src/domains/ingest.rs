//! Column schema for externally supplied per-object feature vectors.
//!
//! A demo file is line-delimited JSON: one `header` record describing the domain's
//! types and columns, then for each demonstration one `task` record followed by its
//! `transition` records in order.

use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{Error, Result};
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeColumns {
    #[serde(rename = "type")]
    pub ty: String,
    pub columns: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureIngestSpec {
    pub domain: String,
    pub types: Vec<TypeColumns>,
}

impl FeatureIngestSpec {
    pub fn for_domain(domain: &dyn Domain) -> Self {
        Self {
            domain: domain.name().to_string(),
            types: domain
                .signature()
                .types
                .iter()
                .map(|t| TypeColumns { ty: t.name.clone(), columns: domain.columns(&t.name) })
                .collect(),
        }
    }

    pub fn validate(&self, types: &[TypeSignature]) -> Result<()> {
        for t in types {
            let cols = self
                .types
                .iter()
                .find(|c| c.ty == t.name)
                .ok_or_else(|| Error::Input(format!("ingest schema has no columns for type `{}`", t.name)))?;
            if cols.columns.len() != t.feature_dim {
                return Err(Error::Input(format!(
                    "type `{}` declares {} columns but has feature_dim {}",
                    t.name,
                    cols.columns.len(),
                    t.feature_dim
                )));
            }
        }
        Ok(())
    }
}
