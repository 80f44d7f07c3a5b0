use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{sigmoid, GbmError, GbmParams, Node, Tree, TreeEnsemble};
use crate::context::FeatureVector;

/// Column-major training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    n_rows: usize,
    schema_hash: u64,
}

impl Dataset {
    pub fn from_vectors(rows: &[FeatureVector]) -> Result<Self, GbmError> {
        let first = rows
            .first()
            .ok_or_else(|| GbmError::SchemaMismatch("no rows".into()))?;
        let width = first.values.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (i, row) in rows.iter().enumerate() {
            if row.schema_hash != first.schema_hash || row.values.len() != width {
                return Err(GbmError::SchemaMismatch(format!(
                    "row {i} does not match the schema of row 0"
                )));
            }
            for (col, &x) in columns.iter_mut().zip(&row.values) {
                col.push(x);
            }
        }
        Self::from_columns(columns, first.schema_hash)
    }

    /// Rows are `rows[r][f]`.
    pub fn from_rows(rows: &[Vec<f64>], schema_hash: u64) -> Result<Self, GbmError> {
        let width = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(GbmError::SchemaMismatch(format!(
                    "row {i} has {} values, expected {width}",
                    row.len()
                )));
            }
            for (col, &x) in columns.iter_mut().zip(row) {
                col.push(x);
            }
        }
        Self::from_columns(columns, schema_hash)
    }

    fn from_columns(columns: Vec<Vec<f64>>, schema_hash: u64) -> Result<Self, GbmError> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(GbmError::SchemaMismatch("non-finite feature value".into()));
        }
        Ok(Dataset {
            columns,
            n_rows,
            schema_hash,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }
}

/// What happened to one node while a tree was grown.
#[derive(Debug, Clone)]
pub struct NodeEvent<'a> {
    pub node: usize,
    pub depth: u32,
    /// Row indices reaching the node, ascending. Empty unless the observer
    /// asked for rows.
    pub rows: &'a [u32],
    pub grad_sum: f64,
    pub hess_sum: f64,
    /// `(feature, threshold, gain)` for split nodes.
    pub split: Option<(usize, f64, f64)>,
    /// Weight for leaves, already scaled by the learning rate.
    pub leaf_value: Option<f64>,
}

/// Hooks into training, for instrumentation and tests.
pub trait TrainObserver {
    fn wants_rows(&self) -> bool {
        false
    }
    fn round_started(&mut self, _round: usize, _grad: &[f64], _hess: &[f64]) {}
    fn node_finished(&mut self, _round: usize, _event: &NodeEvent<'_>) {}
    fn round_finished(&mut self, _round: usize, _tree: &Tree) {}
}

impl TrainObserver for () {}

pub fn train(
    data: &Dataset,
    labels: &[bool],
    params: &GbmParams,
) -> Result<TreeEnsemble, GbmError> {
    train_observed(data, labels, params, &mut ())
}

pub fn train_observed(
    data: &Dataset,
    labels: &[bool],
    params: &GbmParams,
    observer: &mut dyn TrainObserver,
) -> Result<TreeEnsemble, GbmError> {
    params.validate()?;
    if labels.len() != data.n_rows() {
        return Err(GbmError::SchemaMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            data.n_rows()
        )));
    }
    if !(labels.contains(&true) && labels.contains(&false)) {
        return Err(GbmError::DegenerateLabels);
    }

    let n = data.n_rows();
    let sorted: Vec<Vec<u32>> = data
        .columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            idx
        })
        .collect();

    let mut margins = vec![params.base_margin(); n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut grower = Grower::new(data, &sorted, params);
    let mut trees = Vec::with_capacity(params.rounds as usize);

    for round in 0..params.rounds as usize {
        for r in 0..n {
            let p = sigmoid(margins[r]);
            grad[r] = p - if labels[r] { 1.0 } else { 0.0 };
            hess[r] = p * (1.0 - p);
        }
        observer.round_started(round, &grad, &hess);
        let tree = grower.grow(&grad, &hess, round, observer);
        for (m, &leaf) in margins.iter_mut().zip(&grower.pos) {
            *m += tree.nodes[leaf as usize].value;
        }
        observer.round_finished(round, &tree);
        trees.push(tree);
    }

    Ok(TreeEnsemble {
        params: *params,
        trees,
        schema_hash: data.schema_hash,
    })
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

#[derive(Clone, Copy, Default)]
struct Scan {
    g: f64,
    h: f64,
    last: Option<f64>,
}

struct Grower<'a> {
    data: &'a Dataset,
    sorted: &'a [Vec<u32>],
    params: &'a GbmParams,
    /// Node each row currently sits in.
    pos: Vec<u32>,
}

impl<'a> Grower<'a> {
    fn new(data: &'a Dataset, sorted: &'a [Vec<u32>], params: &'a GbmParams) -> Self {
        Grower {
            data,
            sorted,
            params,
            pos: vec![0; data.n_rows()],
        }
    }

    fn gain(&self, gl: f64, hl: f64, g: f64, h: f64) -> Option<f64> {
        let hr = h - hl;
        if hl < self.params.min_child_hessian || hr < self.params.min_child_hessian {
            return None;
        }
        let gr = g - gl;
        let lambda = self.params.l2_penalty;
        Some(
            0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda))
                - self.params.min_split_gain,
        )
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -self.params.learning_rate * g / (h + self.params.l2_penalty)
    }

    fn grow(
        &mut self,
        grad: &[f64],
        hess: &[f64],
        round: usize,
        observer: &mut dyn TrainObserver,
    ) -> Tree {
        let n = self.data.n_rows();
        self.pos.iter_mut().for_each(|p| *p = 0);
        let mut nodes = vec![Node::leaf(0.0)];
        let mut stats = vec![(grad.iter().sum::<f64>(), hess.iter().sum::<f64>())];
        let mut frontier: Vec<u32> = vec![0];
        let want_rows = observer.wants_rows();
        let mut rows_buf: Vec<u32> = Vec::new();

        for depth in 0..=self.params.max_depth {
            if frontier.is_empty() {
                break;
            }
            let best = if depth < self.params.max_depth {
                self.find_splits(&frontier, &stats, grad, hess, nodes.len())
            } else {
                vec![None; frontier.len()]
            };

            let mut next = Vec::new();
            let mut child_of: Vec<Option<(u32, u32, usize, f64)>> = vec![None; nodes.len()];
            for (k, &node) in frontier.iter().enumerate() {
                let (g, h) = stats[node as usize];
                if want_rows {
                    rows_buf.clear();
                    rows_buf.extend((0..n as u32).filter(|&r| self.pos[r as usize] == node));
                }
                let event = match best[k] {
                    Some(c) => {
                        let left = nodes.len() as u32;
                        nodes.push(Node::leaf(0.0));
                        nodes.push(Node::leaf(0.0));
                        stats.push((0.0, 0.0));
                        stats.push((0.0, 0.0));
                        nodes[node as usize] = Node {
                            feature: c.feature as i32,
                            value: c.threshold,
                            left: left as i32,
                            right: left as i32 + 1,
                        };
                        child_of[node as usize] = Some((left, left + 1, c.feature, c.threshold));
                        next.push(left);
                        next.push(left + 1);
                        NodeEvent {
                            node: node as usize,
                            depth,
                            rows: &rows_buf,
                            grad_sum: g,
                            hess_sum: h,
                            split: Some((c.feature, c.threshold, c.gain)),
                            leaf_value: None,
                        }
                    }
                    None => {
                        let w = self.leaf_value(g, h);
                        nodes[node as usize] = Node::leaf(w);
                        NodeEvent {
                            node: node as usize,
                            depth,
                            rows: &rows_buf,
                            grad_sum: g,
                            hess_sum: h,
                            split: None,
                            leaf_value: Some(w),
                        }
                    }
                };
                observer.node_finished(round, &event);
            }

            if next.is_empty() {
                break;
            }
            for r in 0..n {
                let node = self.pos[r] as usize;
                if let Some(&Some((left, right, feature, threshold))) = child_of.get(node) {
                    let child = if self.data.columns[feature][r] < threshold {
                        left
                    } else {
                        right
                    };
                    self.pos[r] = child;
                    let s = &mut stats[child as usize];
                    s.0 += grad[r];
                    s.1 += hess[r];
                }
            }
            frontier = next;
        }
        Tree { nodes }
    }

    /// Best split per frontier node. Features and thresholds are scanned
    /// in ascending order and only a strictly larger gain replaces the
    /// incumbent, so ties go to the lowest feature, then lowest threshold.
    fn find_splits(
        &self,
        frontier: &[u32],
        stats: &[(f64, f64)],
        grad: &[f64],
        hess: &[f64],
        n_nodes: usize,
    ) -> Vec<Option<Candidate>> {
        let mut slot = vec![NONE; n_nodes];
        for (k, &node) in frontier.iter().enumerate() {
            slot[node as usize] = k as u32;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; frontier.len()];
        let mut scan = vec![Scan::default(); frontier.len()];

        for (feature, order) in self.sorted.iter().enumerate() {
            let col = &self.data.columns[feature];
            scan.iter_mut().for_each(|s| *s = Scan::default());
            for &r in order {
                let r = r as usize;
                let k = slot[self.pos[r] as usize];
                if k == NONE {
                    continue;
                }
                let k = k as usize;
                let x = col[r];
                let s = &mut scan[k];
                if let Some(last) = s.last {
                    if x != last {
                        let (g, h) = stats[frontier[k] as usize];
                        if let Some(gain) = self.gain(s.g, s.h, g, h) {
                            if gain > best[k].map_or(0.0, |c| c.gain) {
                                best[k] = Some(Candidate {
                                    gain,
                                    feature,
                                    threshold: midpoint(last, x),
                                });
                            }
                        }
                    }
                }
                s.g += grad[r];
                s.h += hess[r];
                s.last = Some(x);
            }
        }
        best
    }
}

/// Threshold between two consecutive distinct values `lo < hi`, always
/// satisfying `lo < t <= hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}
