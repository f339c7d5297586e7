//! Bagged binary classifiers over mixed numeric/categorical feature rows.
//!
//! Two tree algorithms share one trainer skeleton: gain-ratio scoring with
//! multiway categorical branches and pessimistic pruning, or Gini-decrease
//! scoring with binary category-subset branches grown to purity. An
//! ensemble trains one tree per bootstrap bag and averages the trees'
//! Laplace-smoothed leaf probabilities.

mod io;
mod tree;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hashing::splitmix64;

pub use tree::{train_tree, DecisionTree, RootSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    C45,
    Cart,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::C45 => "c4.5",
            Algorithm::Cart => "cart",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c4.5" | "c45" => Ok(Algorithm::C45),
            "cart" => Ok(Algorithm::Cart),
            other => Err(Error::Config(format!("unknown algorithm \"{other}\" (use c4.5 or cart)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    /// Values are category indices in `0..arity`.
    Categorical { arity: u8 },
}

/// Column layout a model is trained for and validated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    kinds: Vec<FeatureKind>,
}

impl Schema {
    pub fn new(kinds: Vec<FeatureKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidArgument("schema needs at least one feature".into()));
        }
        for (i, kind) in kinds.iter().enumerate() {
            if let FeatureKind::Categorical { arity } = kind {
                if *arity < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "categorical feature {i} needs arity >= 2, got {arity}"
                    )));
                }
            }
        }
        Ok(Schema { kinds })
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, feature: usize) -> FeatureKind {
        self.kinds[feature]
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    /// Compact layout signature for mismatch messages, e.g. `"n n c4"`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .kinds
            .iter()
            .map(|k| match k {
                FeatureKind::Numeric => "n".to_string(),
                FeatureKind::Categorical { arity } => format!("c{arity}"),
            })
            .collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(u8),
}

/// Labeled feature rows, validated against a schema once at construction
/// so training and prediction can index without checks.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<FeatureValue>>,
    labels: Vec<bool>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Vec<FeatureValue>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {r} has {} values, schema has {} features",
                    row.len(),
                    schema.len()
                )));
            }
            for (f, value) in row.iter().enumerate() {
                match (schema.kind(f), value) {
                    (FeatureKind::Numeric, FeatureValue::Numeric(v)) => {
                        if !v.is_finite() {
                            return Err(Error::InvalidArgument(format!(
                                "row {r} feature {f}: non-finite value {v}"
                            )));
                        }
                    }
                    (FeatureKind::Categorical { arity }, FeatureValue::Categorical(c)) => {
                        if *c >= arity {
                            return Err(Error::InvalidArgument(format!(
                                "row {r} feature {f}: category {c} out of range 0..{arity}"
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "row {r} feature {f}: value kind does not match schema"
                        )));
                    }
                }
            }
        }
        Ok(Dataset { schema, rows, labels })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[FeatureValue] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn pos_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub algorithm: Algorithm,
    /// Minimum rows on each side of a binary split (and in at least two
    /// branches of a multiway split).
    pub min_leaf: usize,
    pub prune: bool,
}

impl TrainParams {
    /// Gain-ratio trees prune pessimistically; Gini trees grow to purity
    /// and rely on bagging to absorb variance.
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        TrainParams { algorithm, min_leaf: 2, prune: algorithm == Algorithm::C45 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingParams {
    pub n_bags: usize,
    pub seed: u64,
    pub tree: TrainParams,
}

impl BaggingParams {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        BaggingParams { n_bags: 10, seed, tree: TrainParams::for_algorithm(algorithm) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaggedTreeModel {
    pub(crate) schema: Schema,
    pub(crate) params: BaggingParams,
    pub(crate) trees: Vec<DecisionTree>,
}

impl BaggedTreeModel {
    /// Mean of the member trees' Laplace leaf probabilities.
    pub fn predict_proba(&self, row: &[FeatureValue]) -> f64 {
        debug_assert_eq!(row.len(), self.schema.len());
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn params(&self) -> &BaggingParams {
        &self.params
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

/// Bootstrap sample for one bag: `n_rows` draws with replacement, from a
/// stream fixed by `(seed, bag)`. Part of the model-reproducibility
/// contract: same inputs and seed give byte-identical model files.
pub fn bag_indices(n_rows: usize, seed: u64, bag: usize) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(bag as u64 + 1)));
    (0..n_rows).map(|_| rng.random_range(0..n_rows) as u32).collect()
}

pub fn train_bagging(dataset: &Dataset, params: &BaggingParams) -> Result<BaggedTreeModel> {
    let bags: Vec<Vec<u32>> =
        (0..params.n_bags).map(|b| bag_indices(dataset.len(), params.seed, b)).collect();
    train_bagging_from_bags(dataset, &bags, params)
}

/// Trains one tree per caller-supplied bag of row indices. The bagging
/// entry point above feeds it bootstrap samples; tests feed it handpicked
/// bags.
pub fn train_bagging_from_bags(
    dataset: &Dataset,
    bags: &[Vec<u32>],
    params: &BaggingParams,
) -> Result<BaggedTreeModel> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot train on an empty dataset".into()));
    }
    if bags.is_empty() {
        return Err(Error::InvalidArgument("need at least one bag".into()));
    }
    if params.tree.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    for (b, bag) in bags.iter().enumerate() {
        if bag.is_empty() {
            return Err(Error::InvalidArgument(format!("bag {b} is empty")));
        }
        if let Some(&i) = bag.iter().find(|&&i| i as usize >= dataset.len()) {
            return Err(Error::InvalidArgument(format!(
                "bag {b} references row {i}, dataset has {}",
                dataset.len()
            )));
        }
    }
    let trees: Vec<DecisionTree> =
        bags.par_iter().map(|bag| tree::train_tree(dataset, bag, &params.tree)).collect();
    Ok(BaggedTreeModel {
        schema: dataset.schema().clone(),
        params: BaggingParams { n_bags: bags.len(), ..*params },
        trees,
    })
}
