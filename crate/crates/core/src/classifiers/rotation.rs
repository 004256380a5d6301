//! Rotation forest.
//!
//! Each tree sees the training data through its own block-diagonal
//! rotation: attributes are split at random into groups, and each group is
//! replaced by its principal components estimated on a bootstrap drawn from
//! a random subset of classes.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::tree::DecisionTree;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed;

const ZERO_VARIANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RotationForestConfig {
    pub tree_count: usize,
    pub group_size: usize,
    pub sampling_fraction: f64,
    pub seed: u64,
}

impl Default for RotationForestConfig {
    fn default() -> Self {
        RotationForestConfig {
            tree_count: 50,
            group_size: 3,
            sampling_fraction: 0.75,
            seed: 0,
        }
    }
}

impl RotationForestConfig {
    fn validate(&self) -> Result<()> {
        if self.tree_count < 1 || self.group_size < 1 {
            return Err(Error::Parameter(
                "rotation forest needs tree_count >= 1 and group_size >= 1".into(),
            ));
        }
        if !(self.sampling_fraction > 0.0 && self.sampling_fraction <= 1.0) {
            return Err(Error::Parameter(format!(
                "sampling fraction {} outside (0, 1]",
                self.sampling_fraction
            )));
        }
        Ok(())
    }
}

/// One orthonormal block of a tree's rotation: `components` is
/// `attributes.len()` square, column `c` holding the `c`-th principal axis.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationBlock {
    pub attributes: Vec<usize>,
    pub components: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
struct RotatedTree {
    blocks: Vec<RotationBlock>,
    tree: DecisionTree,
}

fn rotate(blocks: &[RotationBlock], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for b in blocks {
        for c in 0..b.components.ncols() {
            out.push(
                b.attributes
                    .iter()
                    .enumerate()
                    .map(|(a, &attr)| x[attr] * b.components[(a, c)])
                    .sum(),
            );
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationForest {
    classes: Vec<String>,
    trees: Vec<RotatedTree>,
    n_attributes: usize,
}

/// Principal axes of the rows in `sample`, restricted to `attributes`,
/// ordered by decreasing variance with a sign convention that makes the
/// largest-magnitude loading positive. Identity when the sample has no
/// variance.
fn principal_block(rows: &[&[f64]], sample: &[usize], attributes: &[usize]) -> DMatrix<f64> {
    let g = attributes.len();
    let n = sample.len();
    let identity = DMatrix::identity(g, g);
    if n < 2 {
        return identity;
    }
    let mut means = vec![0.0; g];
    for &i in sample {
        for (a, &attr) in attributes.iter().enumerate() {
            means[a] += rows[i][attr];
        }
    }
    means.iter_mut().for_each(|v| *v /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(g, g);
    for &i in sample {
        for a in 0..g {
            let da = rows[i][attributes[a]] - means[a];
            for b in a..g {
                let db = rows[i][attributes[b]] - means[b];
                cov[(a, b)] += da * db;
            }
        }
    }
    for a in 0..g {
        for b in a..g {
            let v = cov[(a, b)] / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    if cov.trace() < ZERO_VARIANCE {
        return identity;
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut block = DMatrix::<f64>::zeros(g, g);
    for (c, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..g {
            block[(r, c)] = sign * col[r];
        }
    }
    block
}

fn draw_classes(rng: &mut ChaCha8Rng, n_classes: usize) -> Vec<bool> {
    loop {
        let pick: Vec<bool> = (0..n_classes).map(|_| rng.random_bool(0.5)).collect();
        if pick.iter().any(|&p| p) {
            return pick;
        }
    }
}

impl RotationForest {
    pub fn fit(train: &LabeledDataset, cfg: &RotationForestConfig) -> Result<Self> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::Validation("rotation forest needs training data".into()));
        }
        let classes = train.classes();
        // canonical instance order makes the model independent of input order
        let mut order: Vec<usize> = (0..train.len()).collect();
        let inst = train.instances();
        order.sort_by(|&a, &b| {
            inst[a].label.cmp(&inst[b].label).then_with(|| {
                inst[a]
                    .series
                    .values()
                    .iter()
                    .zip(inst[b].series.values())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let rows: Vec<&[f64]> = order.iter().map(|&i| inst[i].series.values()).collect();
        let labels: Vec<usize> = order
            .iter()
            .map(|&i| classes.binary_search(&inst[i].label).expect("known class"))
            .collect();
        let n_attributes = train.series_length();
        let by_class: Vec<Vec<usize>> = (0..classes.len())
            .map(|c| (0..rows.len()).filter(|&i| labels[i] == c).collect())
            .collect();

        let trees = (0..cfg.tree_count)
            .map(|t| {
                let mut rng = seed::rng_for(&["rotation-forest", &cfg.seed.to_string(), &t.to_string()]);
                let mut attrs: Vec<usize> = (0..n_attributes).collect();
                attrs.shuffle(&mut rng);
                let blocks: Vec<RotationBlock> = attrs
                    .chunks(cfg.group_size)
                    .map(|group| {
                        let picked = draw_classes(&mut rng, classes.len());
                        let pool: Vec<usize> = by_class
                            .iter()
                            .enumerate()
                            .filter(|(c, _)| picked[*c])
                            .flat_map(|(_, idx)| idx.iter().copied())
                            .collect();
                        let size = ((cfg.sampling_fraction * pool.len() as f64).round() as usize).max(1);
                        let sample: Vec<usize> = if pool.is_empty() {
                            Vec::new()
                        } else {
                            (0..size).map(|_| pool[rng.random_range(0..pool.len())]).collect()
                        };
                        RotationBlock {
                            attributes: group.to_vec(),
                            components: principal_block(&rows, &sample, group),
                        }
                    })
                    .collect();
                let rotated: Vec<Vec<f64>> = rows.iter().map(|x| rotate(&blocks, x)).collect();
                let tree = DecisionTree::fit(&rotated, &labels, classes.len());
                RotatedTree { blocks, tree }
            })
            .collect();
        Ok(RotationForest {
            classes,
            trees,
            n_attributes,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    /// Rotation blocks of every tree, for inspection.
    pub fn rotation_blocks(&self) -> impl Iterator<Item = &RotationBlock> {
        self.trees.iter().flat_map(|t| t.blocks.iter())
    }

    /// Mean of the per-tree class distributions, in `classes()` order.
    pub fn distribution(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_attributes {
            return Err(Error::Validation(format!(
                "query length {} differs from training length {}",
                x.len(),
                self.n_attributes
            )));
        }
        let mut acc = vec![0.0; self.classes.len()];
        for t in &self.trees {
            let d = t.tree.predict_distribution(&rotate(&t.blocks, x));
            acc.iter_mut().zip(d).for_each(|(a, p)| *a += p);
        }
        let total: f64 = acc.iter().sum();
        acc.iter_mut().for_each(|a| *a /= total);
        Ok(acc)
    }
}
