//! Unpruned binary decision tree on dense real features, entropy gain,
//! minimum leaf size one.

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf {
        distribution: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_classes: usize,
}

fn entropy(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    n_features: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn leaf(&mut self, counts: &[usize], total: usize) -> usize {
        let distribution = counts.iter().map(|&c| c as f64 / total as f64).collect();
        self.nodes.push(Node::Leaf { distribution });
        self.nodes.len() - 1
    }

    /// Best (gain, feature, threshold) over all features; `None` when every
    /// feature is constant on `idx`.
    fn best_split(&self, idx: &[usize], counts: &[usize]) -> Option<(f64, usize, f64)> {
        let total = idx.len();
        let parent = entropy(counts.iter().copied(), total);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = idx.to_vec();
        let mut left = vec![0usize; self.n_classes];
        for f in 0..self.n_features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            left.iter_mut().for_each(|c| *c = 0);
            for pos in 0..total - 1 {
                let i = order[pos];
                left[self.labels[i]] += 1;
                let (a, b) = (self.rows[i][f], self.rows[order[pos + 1]][f]);
                if a == b {
                    continue;
                }
                let n_left = pos + 1;
                let n_right = total - n_left;
                let right = counts.iter().zip(&left).map(|(c, l)| c - l);
                let child = (n_left as f64 * entropy(left.iter().copied(), n_left)
                    + n_right as f64 * entropy(right, n_right))
                    / total as f64;
                let gain = parent - child;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((gain, f, threshold));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let counts = self.counts(&idx);
        let total = idx.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || total < 2 {
            return self.leaf(&counts, total);
        }
        let Some((_, feature, threshold)) = self.best_split(&idx, &counts) else {
            return self.leaf(&counts, total);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.rows[i][feature] <= threshold);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf {
            distribution: Vec::new(),
        });
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }
}

impl DecisionTree {
    /// Fit on rows of equal width with class indices `< n_classes`.
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Self {
        assert_eq!(rows.len(), labels.len());
        assert!(!rows.is_empty());
        let mut b = Builder {
            rows,
            labels,
            n_classes,
            n_features: rows[0].len(),
            nodes: Vec::new(),
        };
        b.grow((0..rows.len()).collect());
        DecisionTree {
            nodes: b.nodes,
            n_classes,
        }
    }

    pub fn predict_distribution(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
