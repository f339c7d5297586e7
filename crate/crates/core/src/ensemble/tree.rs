//! Single decision-tree training: greedy top-down split search with either
//! gain-ratio (multiway categorical branches) or Gini-decrease (binary
//! category subsets) scoring, optional pessimistic-error pruning, and an
//! index-arena representation for prediction and serialization.
//!
//! Split scores derive only from integer class counts, with a fixed
//! formula and evaluation order, so any re-derivation from the same counts
//! produces bitwise-identical floats. Ties go to the lowest feature index,
//! then the lowest threshold (or category mask).

use super::{Algorithm, Dataset, FeatureKind, FeatureValue, TrainParams};

/// 75th percentile of the standard normal; fixes the pruning confidence
/// level at 0.25.
const PRUNE_Z: f64 = 0.6744897501960817;

/// Slack when comparing collapsed-leaf error against subtree error, so the
/// comparison is not decided by float noise.
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf { pos: u32, total: u32 },
    /// Values `<= threshold` go left.
    Numeric { feature: u16, threshold: f64, left: u32, right: u32 },
    /// Categories with their mask bit set go left.
    Subset { feature: u16, mask: u32, left: u32, right: u32 },
    /// One child per category value.
    Multiway { feature: u16, children: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: u32,
}

/// Root decision of a trained tree, exposed for diagnostics and audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootSplit {
    Numeric { feature: usize, threshold: f64 },
    Subset { feature: usize, mask: u32 },
    Multiway { feature: usize },
}

fn num_at(row: &[FeatureValue], f: usize) -> f64 {
    match row[f] {
        FeatureValue::Numeric(v) => v,
        FeatureValue::Categorical(c) => c as f64,
    }
}

fn cat_at(row: &[FeatureValue], f: usize) -> usize {
    match row[f] {
        FeatureValue::Categorical(c) => c as usize,
        FeatureValue::Numeric(v) => v as usize,
    }
}

impl DecisionTree {
    /// Laplace-smoothed positive-class probability of the leaf `row` lands
    /// in: `(pos + 1) / (total + 2)`. Rows are schema-validated upstream.
    pub fn predict(&self, row: &[FeatureValue]) -> f64 {
        let mut cur = self.root as usize;
        loop {
            match &self.nodes[cur] {
                Node::Leaf { pos, total } => {
                    return (*pos as f64 + 1.0) / (*total as f64 + 2.0);
                }
                Node::Numeric { feature, threshold, left, right } => {
                    cur = if num_at(row, *feature as usize) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Subset { feature, mask, left, right } => {
                    let c = cat_at(row, *feature as usize);
                    cur = if mask >> c & 1 == 1 { *left as usize } else { *right as usize };
                }
                Node::Multiway { feature, children } => {
                    let c = cat_at(row, *feature as usize).min(children.len() - 1);
                    cur = children[c] as usize;
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 1,
                Node::Numeric { left, right, .. } | Node::Subset { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
                Node::Multiway { children, .. } => {
                    1 + children.iter().map(|&c| walk(nodes, c as usize)).max().unwrap_or(0)
                }
            }
        }
        walk(&self.nodes, self.root as usize)
    }

    pub fn root_split(&self) -> Option<RootSplit> {
        match &self.nodes[self.root as usize] {
            Node::Leaf { .. } => None,
            Node::Numeric { feature, threshold, .. } => {
                Some(RootSplit::Numeric { feature: *feature as usize, threshold: *threshold })
            }
            Node::Subset { feature, mask, .. } => {
                Some(RootSplit::Subset { feature: *feature as usize, mask: *mask })
            }
            Node::Multiway { feature, .. } => {
                Some(RootSplit::Multiway { feature: *feature as usize })
            }
        }
    }
}

fn entropy(pos: u32, neg: u32) -> f64 {
    if pos == 0 || neg == 0 {
        return 0.0;
    }
    let t = (pos + neg) as f64;
    let pp = pos as f64 / t;
    let pn = neg as f64 / t;
    -(pp * pp.log2() + pn * pn.log2())
}

fn gini(pos: u32, neg: u32) -> f64 {
    let total = pos + neg;
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let pp = pos as f64 / t;
    let pn = neg as f64 / t;
    1.0 - pp * pp - pn * pn
}

/// Upper confidence bound (Wilson) on the true error rate given `e`
/// observed errors in `n` cases, at the confidence fixed by [`PRUNE_Z`].
fn error_upper_bound(n: f64, e: f64) -> f64 {
    if n == 0.0 {
        return 1.0;
    }
    let f = e / n;
    let z2 = PRUNE_Z * PRUNE_Z;
    (f + z2 / (2.0 * n) + PRUNE_Z * (f * (1.0 - f) / n + z2 / (4.0 * n * n)).sqrt())
        / (1.0 + z2 / n)
}

fn leaf_error_estimate(pos: u32, total: u32) -> f64 {
    let errors = pos.min(total - pos);
    total as f64 * error_upper_bound(total as f64, errors as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SplitChoice {
    Numeric { feature: usize, threshold: f64 },
    Subset { feature: usize, mask: u32 },
    Multiway { feature: usize },
}

enum BNode {
    Leaf { pos: u32, total: u32 },
    Numeric { feature: usize, threshold: f64, left: Box<BNode>, right: Box<BNode> },
    Subset { feature: usize, mask: u32, left: Box<BNode>, right: Box<BNode> },
    Multiway { feature: usize, children: Vec<BNode> },
}

struct TreeBuilder<'a> {
    dataset: &'a Dataset,
    params: &'a TrainParams,
}

pub fn train_tree(dataset: &Dataset, indices: &[u32], params: &TrainParams) -> DecisionTree {
    let builder = TreeBuilder { dataset, params };
    let (root, _est) = builder.build(indices);
    flatten(root)
}

impl TreeBuilder<'_> {
    fn build(&self, indices: &[u32]) -> (BNode, f64) {
        let total = indices.len() as u32;
        let pos = indices.iter().filter(|&&i| self.dataset.label(i as usize)).count() as u32;

        let leaf = || (BNode::Leaf { pos, total }, leaf_error_estimate(pos, total));
        if total == 0 {
            return (BNode::Leaf { pos: 0, total: 0 }, 0.0);
        }
        if pos == 0 || pos == total || (total as usize) < 2 * self.params.min_leaf {
            return leaf();
        }
        let Some(choice) = self.find_best_split(indices, pos, total) else {
            return leaf();
        };

        let (node, subtree_est) = self.split_and_recurse(indices, pos, total, choice);
        if self.params.prune {
            let collapsed_est = leaf_error_estimate(pos, total);
            if collapsed_est <= subtree_est + PRUNE_EPS {
                return leaf();
            }
        }
        (node, subtree_est)
    }

    fn split_and_recurse(
        &self,
        indices: &[u32],
        pos: u32,
        total: u32,
        choice: SplitChoice,
    ) -> (BNode, f64) {
        match choice {
            SplitChoice::Numeric { feature, threshold } => {
                let (l, r): (Vec<u32>, Vec<u32>) = indices
                    .iter()
                    .partition(|&&i| num_at(self.dataset.row(i as usize), feature) <= threshold);
                let (left, le) = self.build(&l);
                let (right, re) = self.build(&r);
                (
                    BNode::Numeric { feature, threshold, left: Box::new(left), right: Box::new(right) },
                    le + re,
                )
            }
            SplitChoice::Subset { feature, mask } => {
                let (l, r): (Vec<u32>, Vec<u32>) = indices
                    .iter()
                    .partition(|&&i| mask >> cat_at(self.dataset.row(i as usize), feature) & 1 == 1);
                let (left, le) = self.build(&l);
                let (right, re) = self.build(&r);
                (
                    BNode::Subset { feature, mask, left: Box::new(left), right: Box::new(right) },
                    le + re,
                )
            }
            SplitChoice::Multiway { feature } => {
                let arity = match self.dataset.schema().kind(feature) {
                    FeatureKind::Categorical { arity } => arity as usize,
                    FeatureKind::Numeric => unreachable!("multiway split on numeric feature"),
                };
                let mut groups: Vec<Vec<u32>> = vec![Vec::new(); arity];
                for &i in indices {
                    groups[cat_at(self.dataset.row(i as usize), feature)].push(i);
                }
                let mut children = Vec::with_capacity(arity);
                let mut est = 0.0;
                for group in &groups {
                    if group.is_empty() {
                        // Unseen category: predict the parent's class mix.
                        // Carries no training rows, so no error contribution.
                        children.push(BNode::Leaf { pos, total });
                    } else {
                        let (child, ce) = self.build(group);
                        children.push(child);
                        est += ce;
                    }
                }
                (BNode::Multiway { feature, children }, est)
            }
        }
    }

    fn find_best_split(&self, indices: &[u32], pos: u32, total: u32) -> Option<SplitChoice> {
        let ds = self.dataset;
        let parent = match self.params.algorithm {
            Algorithm::C45 => entropy(pos, total - pos),
            Algorithm::Cart => gini(pos, total - pos),
        };
        let mut best: Option<(f64, SplitChoice)> = None;
        let mut consider = |score: f64, choice: SplitChoice| {
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, choice));
            }
        };

        for feature in 0..ds.schema().len() {
            match ds.schema().kind(feature) {
                FeatureKind::Numeric => {
                    self.numeric_candidates(indices, feature, pos, total, parent, &mut consider);
                }
                FeatureKind::Categorical { arity } => match self.params.algorithm {
                    Algorithm::C45 => self.multiway_candidate(
                        indices,
                        feature,
                        arity as usize,
                        pos,
                        total,
                        parent,
                        &mut consider,
                    ),
                    Algorithm::Cart => self.subset_candidates(
                        indices,
                        feature,
                        arity as usize,
                        pos,
                        total,
                        parent,
                        &mut consider,
                    ),
                },
            }
        }
        best.map(|(_, choice)| choice)
    }

    /// Scores a binary partition with counts `(lp, lt)` / `(rp, rt)` against
    /// parent impurity. Formula order is fixed: left term first.
    fn binary_score(&self, parent: f64, lp: u32, lt: u32, rp: u32, rt: u32) -> Option<f64> {
        let t = (lt + rt) as f64;
        let (wl, wr) = (lt as f64 / t, rt as f64 / t);
        match self.params.algorithm {
            Algorithm::C45 => {
                let remainder = wl * entropy(lp, lt - lp) + wr * entropy(rp, rt - rp);
                let gain = parent - remainder;
                if gain <= 0.0 {
                    return None;
                }
                let split_info = -(wl * wl.log2() + wr * wr.log2());
                if split_info <= 0.0 {
                    return None;
                }
                Some(gain / split_info)
            }
            Algorithm::Cart => {
                let decrease = parent - (wl * gini(lp, lt - lp) + wr * gini(rp, rt - rp));
                (decrease > 0.0).then_some(decrease)
            }
        }
    }

    fn numeric_candidates(
        &self,
        indices: &[u32],
        feature: usize,
        pos: u32,
        total: u32,
        parent: f64,
        consider: &mut impl FnMut(f64, SplitChoice),
    ) {
        let mut vals: Vec<(f64, bool)> = indices
            .iter()
            .map(|&i| (num_at(self.dataset.row(i as usize), feature), self.dataset.label(i as usize)))
            .collect();
        vals.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let min_leaf = self.params.min_leaf as u32;
        let mut lp = 0u32;
        for i in 0..vals.len() - 1 {
            lp += vals[i].1 as u32;
            if vals[i].0 >= vals[i + 1].0 {
                continue;
            }
            let lt = (i + 1) as u32;
            let rt = total - lt;
            if lt < min_leaf || rt < min_leaf {
                continue;
            }
            if let Some(score) = self.binary_score(parent, lp, lt, pos - lp, rt) {
                let threshold = (vals[i].0 + vals[i + 1].0) / 2.0;
                consider(score, SplitChoice::Numeric { feature, threshold });
            }
        }
    }

    fn category_counts(&self, indices: &[u32], feature: usize, arity: usize) -> Vec<(u32, u32)> {
        let mut counts = vec![(0u32, 0u32); arity];
        for &i in indices {
            let c = cat_at(self.dataset.row(i as usize), feature);
            counts[c].1 += 1;
            counts[c].0 += self.dataset.label(i as usize) as u32;
        }
        counts
    }

    fn multiway_candidate(
        &self,
        indices: &[u32],
        feature: usize,
        arity: usize,
        pos: u32,
        total: u32,
        parent: f64,
        consider: &mut impl FnMut(f64, SplitChoice),
    ) {
        let _ = pos;
        let counts = self.category_counts(indices, feature, arity);
        let nonempty = counts.iter().filter(|&&(_, t)| t > 0).count();
        let big_enough = counts.iter().filter(|&&(_, t)| t as usize >= self.params.min_leaf).count();
        if nonempty < 2 || big_enough < 2 {
            return;
        }
        let t = total as f64;
        let mut remainder = 0.0;
        let mut split_info = 0.0;
        for &(cp, ct) in &counts {
            if ct == 0 {
                continue;
            }
            let w = ct as f64 / t;
            remainder += w * entropy(cp, ct - cp);
            split_info += -(w * w.log2());
        }
        let gain = parent - remainder;
        if gain > 0.0 && split_info > 0.0 {
            consider(gain / split_info, SplitChoice::Multiway { feature });
        }
    }

    fn subset_candidates(
        &self,
        indices: &[u32],
        feature: usize,
        arity: usize,
        pos: u32,
        total: u32,
        parent: f64,
        consider: &mut impl FnMut(f64, SplitChoice),
    ) {
        let counts = self.category_counts(indices, feature, arity);
        let min_leaf = self.params.min_leaf as u32;
        for mask in 1..(1u32 << arity) - 1 {
            let (mut lp, mut lt) = (0u32, 0u32);
            for (c, &(cp, ct)) in counts.iter().enumerate() {
                if mask >> c & 1 == 1 {
                    lp += cp;
                    lt += ct;
                }
            }
            let rt = total - lt;
            if lt < min_leaf || rt < min_leaf {
                continue;
            }
            if let Some(score) = self.binary_score(parent, lp, lt, pos - lp, rt) {
                consider(score, SplitChoice::Subset { feature, mask });
            }
        }
    }
}

fn flatten(root: BNode) -> DecisionTree {
    fn emit(node: BNode, nodes: &mut Vec<Node>) -> u32 {
        let flat = match node {
            BNode::Leaf { pos, total } => Node::Leaf { pos, total },
            BNode::Numeric { feature, threshold, left, right } => {
                let l = emit(*left, nodes);
                let r = emit(*right, nodes);
                Node::Numeric { feature: feature as u16, threshold, left: l, right: r }
            }
            BNode::Subset { feature, mask, left, right } => {
                let l = emit(*left, nodes);
                let r = emit(*right, nodes);
                Node::Subset { feature: feature as u16, mask, left: l, right: r }
            }
            BNode::Multiway { feature, children } => {
                let ids = children.into_iter().map(|c| emit(c, nodes)).collect();
                Node::Multiway { feature: feature as u16, children: ids }
            }
        };
        nodes.push(flat);
        (nodes.len() - 1) as u32
    }
    let mut nodes = Vec::new();
    let root = emit(root, &mut nodes);
    DecisionTree { nodes, root }
}
