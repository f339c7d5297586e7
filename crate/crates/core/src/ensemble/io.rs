//! Tree-ensemble container format ("BGTM"). Little-endian, no alignment
//! padding; every structural index is validated on load so a well-formed
//! file can be walked without bounds surprises. Encoding is fully
//! determined by the model, so identical training inputs produce
//! byte-identical files.

use std::fs;
use std::path::Path;

use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

use super::tree::{DecisionTree, Node};
use super::{Algorithm, BaggedTreeModel, BaggingParams, FeatureKind, Schema, TrainParams};

const MAGIC: &[u8; 4] = b"BGTM";
const VERSION: u16 = 1;

impl BaggedTreeModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(match self.params.tree.algorithm {
            Algorithm::C45 => 0,
            Algorithm::Cart => 1,
        });
        w.u8(self.params.tree.prune as u8);
        w.u32(self.params.tree.min_leaf as u32);
        w.u32(self.params.n_bags as u32);
        w.u64(self.params.seed);

        w.u16(self.schema.len() as u16);
        for kind in self.schema.kinds() {
            match kind {
                FeatureKind::Numeric => {
                    w.u8(0);
                    w.u8(0);
                }
                FeatureKind::Categorical { arity } => {
                    w.u8(1);
                    w.u8(*arity);
                }
            }
        }

        w.u32(self.trees.len() as u32);
        for tree in &self.trees {
            w.u32(tree.nodes.len() as u32);
            w.u32(tree.root);
            for node in &tree.nodes {
                match node {
                    Node::Leaf { pos, total } => {
                        w.u8(0);
                        w.u32(*pos);
                        w.u32(*total);
                    }
                    Node::Numeric { feature, threshold, left, right } => {
                        w.u8(1);
                        w.u16(*feature);
                        w.f64(*threshold);
                        w.u32(*left);
                        w.u32(*right);
                    }
                    Node::Subset { feature, mask, left, right } => {
                        w.u8(2);
                        w.u16(*feature);
                        w.u32(*mask);
                        w.u32(*left);
                        w.u32(*right);
                    }
                    Node::Multiway { feature, children } => {
                        w.u8(3);
                        w.u16(*feature);
                        w.u8(children.len() as u8);
                        for &c in children {
                            w.u32(c);
                        }
                    }
                }
            }
        }
        w.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn from_bytes(data: &[u8], origin: &Path) -> Result<Self> {
        let fail = |message: String| Error::ModelFormat { path: origin.to_path_buf(), message };
        let mut r = Reader::new(data, origin);
        r.expect_magic(MAGIC, "tree ensemble")?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(fail(format!("unsupported version {version} (expected {VERSION})")));
        }
        let algorithm = match r.u8()? {
            0 => Algorithm::C45,
            1 => Algorithm::Cart,
            other => return Err(fail(format!("unknown algorithm tag {other}"))),
        };
        let prune = r.u8()? != 0;
        let min_leaf = r.u32()? as usize;
        let n_bags = r.u32()? as usize;
        let seed = r.u64()?;

        let n_features = r.u16()? as usize;
        let mut kinds = Vec::with_capacity(n_features);
        for f in 0..n_features {
            let kind = match (r.u8()?, r.u8()?) {
                (0, _) => FeatureKind::Numeric,
                (1, arity) => FeatureKind::Categorical { arity },
                (tag, _) => return Err(fail(format!("feature {f}: unknown kind tag {tag}"))),
            };
            kinds.push(kind);
        }
        let schema = Schema::new(kinds).map_err(|e| fail(e.to_string()))?;

        let n_trees = r.u32()? as usize;
        if n_trees != n_bags {
            return Err(fail(format!("{n_trees} trees stored but params say {n_bags} bags")));
        }
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            trees.push(read_tree(&mut r, t, &schema, &fail)?);
        }
        if !r.done() {
            return Err(fail("trailing bytes after final tree".into()));
        }
        Ok(BaggedTreeModel {
            schema,
            params: BaggingParams {
                n_bags,
                seed,
                tree: TrainParams { algorithm, min_leaf, prune },
            },
            trees,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&data, path)
    }
}

fn read_tree(
    r: &mut Reader<'_>,
    t: usize,
    schema: &Schema,
    fail: &impl Fn(String) -> Error,
) -> Result<DecisionTree> {
    let n_nodes = r.u32()? as usize;
    if n_nodes == 0 {
        return Err(fail(format!("tree {t} has no nodes")));
    }
    let root = r.u32()?;
    if root as usize >= n_nodes {
        return Err(fail(format!("tree {t}: root {root} out of range")));
    }
    let check_child = |what: &str, c: u32| {
        if c as usize >= n_nodes {
            Err(fail(format!("tree {t}: {what} child {c} out of range 0..{n_nodes}")))
        } else {
            Ok(c)
        }
    };
    let feature_kind = |feature: u16| {
        if (feature as usize) < schema.len() {
            Ok(schema.kind(feature as usize))
        } else {
            Err(fail(format!("tree {t}: feature {feature} outside schema ({})", schema.describe())))
        }
    };

    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let node = match r.u8()? {
            0 => {
                let pos = r.u32()?;
                let total = r.u32()?;
                if pos > total {
                    return Err(fail(format!("tree {t}: leaf with {pos} of {total} positive")));
                }
                Node::Leaf { pos, total }
            }
            1 => {
                let feature = r.u16()?;
                let threshold = r.f64()?;
                if feature_kind(feature)? != FeatureKind::Numeric {
                    return Err(fail(format!("tree {t}: numeric split on categorical feature")));
                }
                if !threshold.is_finite() {
                    return Err(fail(format!("tree {t}: non-finite threshold")));
                }
                let left = check_child("left", r.u32()?)?;
                let right = check_child("right", r.u32()?)?;
                Node::Numeric { feature, threshold, left, right }
            }
            2 => {
                let feature = r.u16()?;
                let mask = r.u32()?;
                let FeatureKind::Categorical { arity } = feature_kind(feature)? else {
                    return Err(fail(format!("tree {t}: subset split on numeric feature")));
                };
                if mask == 0 || mask >= 1 << arity {
                    return Err(fail(format!("tree {t}: subset mask {mask:#x} invalid for arity {arity}")));
                }
                let left = check_child("left", r.u32()?)?;
                let right = check_child("right", r.u32()?)?;
                Node::Subset { feature, mask, left, right }
            }
            3 => {
                let feature = r.u16()?;
                let n_children = r.u8()? as usize;
                let FeatureKind::Categorical { arity } = feature_kind(feature)? else {
                    return Err(fail(format!("tree {t}: multiway split on numeric feature")));
                };
                if n_children != arity as usize {
                    return Err(fail(format!(
                        "tree {t}: multiway split has {n_children} children, arity is {arity}"
                    )));
                }
                let mut children = Vec::with_capacity(n_children);
                for _ in 0..n_children {
                    children.push(check_child("multiway", r.u32()?)?);
                }
                Node::Multiway { feature, children }
            }
            tag => return Err(fail(format!("tree {t}: unknown node tag {tag}"))),
        };
        nodes.push(node);
    }
    Ok(DecisionTree { nodes, root })
}
