//! Line-oriented text format for trained ensembles.
//!
//! ```text
//! GBM v1 <rounds> <maxDepth> <eta> <lambda> <gamma> <baseScore> <schemaHash>
//! tree <index> <nodeCount>
//! <nodeId> <featureSlot|-1> <threshold|leafValue> <left|-1> <right|-1>
//! ```
//!
//! Reals carry 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;
use vandalscore_core::gbm::{GbmParams, Node, Tree};
use vandalscore_core::TreeEnsemble;

pub const MODEL_MAGIC: &str = "GBM v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn corrupt(msg: impl Into<String>) -> ModelError {
    ModelError::CorruptModel(msg.into())
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn model_to_text(model: &TreeEnsemble) -> String {
    let p = &model.params;
    let mut out = format!(
        "{MODEL_MAGIC} {} {} {} {} {} {} {:016x}\n",
        model.trees.len(),
        p.max_depth,
        real(p.learning_rate),
        real(p.l2_penalty),
        real(p.min_split_gain),
        real(p.base_score),
        model.schema_hash
    );
    for (i, tree) in model.trees.iter().enumerate() {
        let _ = writeln!(out, "tree {i} {}", tree.nodes.len());
        for (id, n) in tree.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{id} {} {} {} {}",
                n.feature,
                real(n.value),
                n.left,
                n.right
            );
        }
    }
    out
}

fn field<T: FromStr>(parts: &[&str], i: usize, what: &str, line: usize) -> Result<T, ModelError> {
    parts
        .get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| corrupt(format!("line {line}: bad {what}")))
}

/// Parses [`model_to_text`] output. The minimum child hessian is a
/// training-only setting and comes back at its default.
pub fn model_from_text(text: &str) -> Result<TreeEnsemble, ModelError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| corrupt("empty model file"))?;
    let rest = header
        .strip_prefix(MODEL_MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| corrupt("wrong magic header"))?;
    let h: Vec<&str> = rest.split(' ').collect();
    if h.len() != 7 {
        return Err(corrupt(format!(
            "header has {} fields, expected 7",
            h.len()
        )));
    }
    let rounds: u32 = field(&h, 0, "rounds", 1)?;
    let params = GbmParams {
        rounds,
        max_depth: field(&h, 1, "max depth", 1)?,
        learning_rate: field(&h, 2, "learning rate", 1)?,
        l2_penalty: field(&h, 3, "l2 penalty", 1)?,
        min_split_gain: field(&h, 4, "gamma", 1)?,
        base_score: field(&h, 5, "base score", 1)?,
        ..GbmParams::default()
    };
    let schema_hash =
        u64::from_str_radix(h[6], 16).map_err(|_| corrupt("line 1: bad schema hash"))?;
    if rounds > 0 {
        params
            .validate()
            .map_err(|e| corrupt(format!("line 1: {e}")))?;
    }

    let mut trees = Vec::with_capacity(rounds as usize);
    for t in 0..rounds as usize {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| corrupt(format!("expected {rounds} trees, found {t}")))?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 || parts[0] != "tree" || parts[1] != t.to_string() {
            return Err(corrupt(format!("line {ln}: expected tree {t} header")));
        }
        let count: usize = field(&parts, 2, "node count", ln)?;
        let mut nodes = Vec::with_capacity(count);
        for id in 0..count {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| corrupt(format!("tree {t} truncated at node {id}")))?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 5 || parts[0] != id.to_string() {
                return Err(corrupt(format!("line {ln}: expected node {id}")));
            }
            nodes.push(Node {
                feature: field(&parts, 1, "feature", ln)?,
                value: field(&parts, 2, "value", ln)?,
                left: field(&parts, 3, "left child", ln)?,
                right: field(&parts, 4, "right child", ln)?,
            });
        }
        let tree = Tree { nodes };
        tree.validate()
            .map_err(|e| corrupt(format!("tree {t}: {e}")))?;
        trees.push(tree);
    }
    if let Some((ln, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(corrupt(format!("line {ln}: trailing content {line:?}")));
    }
    Ok(TreeEnsemble {
        params,
        trees,
        schema_hash,
    })
}

pub fn save_model(model: &TreeEnsemble, path: &Path) -> Result<(), ModelError> {
    Ok(fs::write(path, model_to_text(model))?)
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble, ModelError> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| corrupt("model file is not UTF-8"))?;
    model_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TreeEnsemble {
        TreeEnsemble {
            params: GbmParams {
                rounds: 2,
                ..GbmParams::default()
            },
            trees: vec![
                Tree {
                    nodes: vec![
                        Node {
                            feature: 3,
                            value: 0.1 + 0.2,
                            left: 1,
                            right: 2,
                        },
                        Node::leaf(-0.123456789012345678),
                        Node::leaf(1e-300),
                    ],
                },
                Tree {
                    nodes: vec![Node::leaf(f64::MIN_POSITIVE)],
                },
            ],
            schema_hash: 0xdead_beef_0123_4567,
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = model();
        let text = model_to_text(&m);
        assert!(text.starts_with("GBM v1 2 7 "));
        let back = model_from_text(&text).unwrap();
        assert_eq!(back, m);
        for (a, b) in m.trees.iter().zip(&back.trees) {
            for (x, y) in a.nodes.iter().zip(&b.nodes) {
                assert_eq!(x.value.to_bits(), y.value.to_bits());
            }
        }
    }

    #[test]
    fn corruption_is_rejected() {
        let text = model_to_text(&model());
        let bad = [
            text.replacen("GBM v1", "GBM v2", 1),
            text.replacen("tree 1 1", "tree 1 2", 1),
            text.replacen("0 3 ", "0 3 x", 1),
            text[..text.len() - 20].to_string(),
            text.clone() + "junk\n",
            text.replacen(" 1 2\n", " 1 0\n", 1),
            String::new(),
        ];
        for b in bad {
            assert!(
                matches!(model_from_text(&b), Err(ModelError::CorruptModel(_))),
                "accepted {b:?}"
            );
        }
    }
}
