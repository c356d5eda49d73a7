//! Strictly positive vertex weights and the built-in weight families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Tree, VertexId};

/// Provenance of a weight, serialized as `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum WeightFamily {
    Constant { c: f64 },
    ReciprocalDepth,
    Geometric { c: f64 },
    Custom,
}

/// Weight document: vertex id -> value.
pub type WeightDocument = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    values: Vec<f64>,
    family: WeightFamily,
}

fn positive_param(name: &'static str, c: f64) -> Result<f64> {
    if c.is_finite() && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {c}"),
        })
    }
}

impl Weight {
    pub fn constant(tree: &Tree, c: f64) -> Result<Weight> {
        let c = positive_param("c", c)?;
        Ok(Weight {
            values: vec![c; tree.len()],
            family: WeightFamily::Constant { c },
        })
    }

    /// `1 / (1 + depth(v))`.
    pub fn reciprocal_depth(tree: &Tree) -> Weight {
        Weight {
            values: tree.depths().iter().map(|&d| 1.0 / (1.0 + d as f64)).collect(),
            family: WeightFamily::ReciprocalDepth,
        }
    }

    /// `c^depth(v)`. Powers beyond the `f64` range are rejected.
    pub fn geometric(tree: &Tree, c: f64) -> Result<Weight> {
        let c = positive_param("c", c)?;
        let values = tree.depths().iter().map(|&d| c.powi(d as i32)).collect();
        Weight::validated(tree, values, WeightFamily::Geometric { c })
    }

    pub fn instantiate(family: &WeightFamily, tree: &Tree) -> Result<Weight> {
        match *family {
            WeightFamily::Constant { c } => Weight::constant(tree, c),
            WeightFamily::ReciprocalDepth => Ok(Weight::reciprocal_depth(tree)),
            WeightFamily::Geometric { c } => Weight::geometric(tree, c),
            WeightFamily::Custom => Err(Error::InvalidParameter {
                name: "family",
                reason: "custom weights come from a weight document".into(),
            }),
        }
    }

    /// Custom weight from per-vertex values, indexed like the tree.
    pub fn from_values(tree: &Tree, values: Vec<f64>) -> Result<Weight> {
        Weight::validated(tree, values, WeightFamily::Custom)
    }

    fn validated(tree: &Tree, values: Vec<f64>, family: WeightFamily) -> Result<Weight> {
        if values.len() != tree.len() {
            return Err(Error::LengthMismatch {
                what: "weight",
                expected: tree.len(),
                found: values.len(),
            });
        }
        for (v, &x) in tree.vertices().zip(&values) {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidWeight {
                    vertex: tree.label(v).to_owned(),
                    value: x,
                });
            }
        }
        Ok(Weight { values, family })
    }

    /// Every vertex of `tree` must be present; extra ids (e.g. vertices
    /// cut off by a truncation) are ignored.
    pub fn load(tree: &Tree, document: &WeightDocument) -> Result<Weight> {
        let values = tree
            .vertices()
            .map(|v| {
                let label = tree.label(v);
                document
                    .get(label)
                    .copied()
                    .ok_or_else(|| Error::MissingWeight(label.to_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        Weight::from_values(tree, values)
    }

    pub fn to_document(&self, tree: &Tree) -> WeightDocument {
        tree.vertices()
            .map(|v| (tree.label(v).to_owned(), self.values[v.index()]))
            .collect()
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, v: VertexId) -> f64 {
        self.values[v.index()]
    }

    /// `(min, max)` over the stored vertices.
    pub fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }
}
