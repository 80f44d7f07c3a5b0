//! Gradient-boosted decision trees for binary classification with logistic
//! loss and Newton (second-order) leaf weights.
//!
//! Trees are grown level by level with exact greedy split search over
//! pre-sorted columns. Every candidate threshold is the midpoint between
//! two consecutive distinct values of a feature within a node; rows with
//! `value < threshold` go left. Missing values carry the ordinary
//! placeholder number and are split like any other value.

mod train;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::context::FeatureVector;

pub use train::{train, train_observed, Dataset, NodeEvent, TrainObserver};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GbmError {
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    pub max_depth: u32,
    pub rounds: u32,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub min_split_gain: f64,
    pub min_child_hessian: f64,
    /// Initial probability; the starting margin is its logit.
    pub base_score: f64,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams {
            max_depth: 7,
            rounds: 200,
            learning_rate: 0.3,
            l2_penalty: 1.0,
            min_split_gain: 0.0,
            min_child_hessian: 1.0,
            base_score: 0.5,
        }
    }
}

impl GbmParams {
    pub fn validate(&self) -> Result<(), GbmError> {
        let bad = |msg: String| Err(GbmError::InvalidParams(msg));
        if self.rounds < 1 {
            return bad(format!("rounds must be >= 1, got {}", self.rounds));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!(
                "learning rate must be in (0, 1], got {}",
                self.learning_rate
            ));
        }
        if !(self.l2_penalty >= 0.0) {
            return bad(format!("l2 penalty must be >= 0, got {}", self.l2_penalty));
        }
        if !(self.min_split_gain >= 0.0) || !(self.min_child_hessian >= 0.0) {
            return bad(format!(
                "gamma and min child hessian must be >= 0, got {} and {}",
                self.min_split_gain, self.min_child_hessian
            ));
        }
        if !(self.base_score > 0.0 && self.base_score < 1.0) {
            return bad(format!(
                "base score must be in (0, 1), got {}",
                self.base_score
            ));
        }
        Ok(())
    }

    pub fn base_margin(&self) -> f64 {
        libm::log(self.base_score / (1.0 - self.base_score))
    }
}

/// Array-encoded tree node. Leaves have `feature == -1`, no children and
/// keep their weight in `value`; splits keep their threshold there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub feature: i32,
    pub value: f64,
    pub left: i32,
    pub right: i32,
}

impl Node {
    pub fn leaf(value: f64) -> Self {
        Node {
            feature: -1,
            value,
            left: -1,
            right: -1,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature < 0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the leaf `row` lands in.
    pub fn leaf_index(&self, row: &[f64]) -> Result<usize, GbmError> {
        let mut i = 0usize;
        loop {
            let node = self
                .nodes
                .get(i)
                .ok_or_else(|| GbmError::SchemaMismatch(format!("dangling node index {i}")))?;
            if node.is_leaf() {
                return Ok(i);
            }
            let x = row.get(node.feature as usize).ok_or_else(|| {
                GbmError::SchemaMismatch(format!(
                    "split on slot {} but vector has {} slots",
                    node.feature,
                    row.len()
                ))
            })?;
            i = if *x < node.value {
                node.left
            } else {
                node.right
            } as usize;
        }
    }

    /// Structural checks: children in range and pointing forward, leaves
    /// finite.
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.is_leaf() {
                if n.left != -1 || n.right != -1 {
                    return Err(format!("leaf {i} has children"));
                }
                if !n.value.is_finite() {
                    return Err(format!("leaf {i} has non-finite value"));
                }
            } else {
                let ok = |c: i32| c as usize > i && (c as usize) < self.nodes.len();
                if n.left < 0 || n.right < 0 || !ok(n.left) || !ok(n.right) {
                    return Err(format!("split {i} has invalid children"));
                }
                if n.value.is_nan() {
                    return Err(format!("split {i} has NaN threshold"));
                }
            }
        }
        Ok(())
    }
}

/// A trained model: parameters, trees, and the hash of the feature schema
/// it was trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub params: GbmParams,
    pub trees: Vec<Tree>,
    pub schema_hash: u64,
}

const P_MIN: f64 = f64::MIN_POSITIVE;
const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function kept strictly inside (0, 1).
pub fn sigmoid(margin: f64) -> f64 {
    (1.0 / (1.0 + libm::exp(-margin))).clamp(P_MIN, P_MAX)
}

impl TreeEnsemble {
    /// Raw additive score: base margin plus every tree's leaf weight.
    pub fn margin(&self, row: &[f64]) -> Result<f64, GbmError> {
        let mut m = self.params.base_margin();
        for tree in &self.trees {
            m += tree.nodes[tree.leaf_index(row)?].value;
        }
        Ok(m)
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64, GbmError> {
        Ok(sigmoid(self.margin(row)?))
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<f64, GbmError> {
        if v.schema_hash != self.schema_hash {
            return Err(GbmError::SchemaMismatch(format!(
                "vector schema {:016x} but model expects {:016x}",
                v.schema_hash, self.schema_hash
            )));
        }
        self.predict_row(&v.values)
    }

    /// The model made of the first `rounds` trees.
    pub fn truncated(&self, rounds: usize) -> TreeEnsemble {
        let trees = self.trees[..rounds.min(self.trees.len())].to_vec();
        TreeEnsemble {
            params: GbmParams {
                rounds: trees.len() as u32,
                ..self.params
            },
            trees,
            schema_hash: self.schema_hash,
        }
    }
}
