//! Greedy top-down decision-tree induction with an incrementally increased
//! depth cap: the first depth at which the tree reaches zero training error
//! wins. Splits maximize information gain; ties and zero-gain plateaus fall
//! back to the lowest feature index that still partitions the rows.
//! Deterministic: no randomness, fixed tie-breaking.

use super::{CondSynthError, TruthTable};
use crate::rules::{render_binding, Atom, Condition, Literal};

#[derive(Debug, Clone)]
pub enum TreeNode {
    Leaf(bool),
    Split {
        feature: usize,
        /// Child when the feature is false / true.
        lo: usize,
        hi: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, n: usize) -> usize {
            match &t.nodes[n] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { lo, hi, .. } => 1 + go(t, *lo).max(go(t, *hi)),
            }
        }
        go(self, self.root)
    }
}

/// Packed row set.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn count_and(&self, other: &Bits) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

fn entropy(p: u64, n: u64) -> f64 {
    if n == 0 || p == 0 || p == n {
        return 0.0;
    }
    let q = p as f64 / n as f64;
    -(q * q.log2() + (1.0 - q) * (1.0 - q).log2())
}

struct Fitter<'a> {
    feats: &'a [Bits],
    label: &'a Bits,
    nodes: Vec<TreeNode>,
}

impl<'a> Fitter<'a> {
    /// Builds greedily under a depth cap; leaves at the cap take the
    /// majority label (ties -> false). Returns (root, misclassified).
    fn build(&mut self, rows: Bits, depth_left: usize) -> (usize, u64) {
        let n = rows.count();
        let pos = rows.count_and(self.label);
        if pos == 0 || pos == n || depth_left == 0 {
            let majority = pos * 2 > n;
            let err = if majority { n - pos } else { pos };
            self.nodes.push(TreeNode::Leaf(majority));
            return (self.nodes.len() - 1, err);
        }
        let base = entropy(pos, n);
        let mut best: Option<(f64, usize)> = None;
        for (fi, f) in self.feats.iter().enumerate() {
            let n1 = rows.count_and(f);
            if n1 == 0 || n1 == n {
                continue;
            }
            let p1 = rows.and(f).count_and(self.label);
            let p0 = pos - p1;
            let n0 = n - n1;
            let gain = base
                - (n1 as f64 / n as f64) * entropy(p1, n1)
                - (n0 as f64 / n as f64) * entropy(p0, n0);
            let better = match best {
                None => true,
                Some((g, _)) => gain > g + 1e-12,
            };
            if better {
                best = Some((gain, fi));
            }
        }
        let fi = match best {
            // All features constant on these rows: impure but unsplittable.
            None => {
                let majority = pos * 2 > n;
                let err = if majority { n - pos } else { pos };
                self.nodes.push(TreeNode::Leaf(majority));
                return (self.nodes.len() - 1, err);
            }
            Some((_, fi)) => fi,
        };
        let f = &self.feats[fi];
        let hi_rows = rows.and(f);
        let lo_rows = rows.and_not(f);
        let (lo, e0) = self.build(lo_rows, depth_left - 1);
        let (hi, e1) = self.build(hi_rows, depth_left - 1);
        self.nodes.push(TreeNode::Split { feature: fi, lo, hi });
        (self.nodes.len() - 1, e0 + e1)
    }
}

/// Fits the table: retrains with max depth 0, 1, 2, ... and returns the
/// first zero-error tree with its depth.
pub fn fit_tree(
    table: &TruthTable,
    features: &[Atom],
) -> Result<(DecisionTree, usize), CondSynthError> {
    let n = table.maps.len();
    let mut label = Bits::zeros(n);
    for (i, l) in table.labels.iter().enumerate() {
        if *l {
            label.set(i);
        }
    }
    let feats: Vec<Bits> = features
        .iter()
        .map(|a| {
            let mut b = Bits::zeros(n);
            for (i, m) in table.maps.iter().enumerate() {
                if a.eval(m) == Some(true) {
                    b.set(i);
                }
            }
            b
        })
        .collect();
    let mut all = Bits::zeros(n);
    for i in 0..n {
        all.set(i);
    }
    for cap in 0..=features.len().max(1) {
        let mut fit = Fitter {
            feats: &feats,
            label: &label,
            nodes: Vec::new(),
        };
        let (root, err) = fit.build(all.clone(), cap);
        if err == 0 {
            let tree = DecisionTree {
                nodes: fit.nodes,
                root,
            };
            let d = tree.depth();
            return Ok((tree, d));
        }
    }
    // Even the unbounded tree misclassifies: two rows share every feature
    // but disagree. Find one such pair for the report.
    let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    for i in 0..n {
        let key: Vec<u64> = feats.iter().map(|f| f.get(i) as u64).collect();
        match seen.get(&key) {
            Some(&j) if table.labels[j] != table.labels[i] => {
                return Err(CondSynthError::Inseparable(
                    render_binding(&table.maps[j]),
                    render_binding(&table.maps[i]),
                ));
            }
            Some(_) => {}
            None => {
                seen.insert(key, i);
            }
        }
    }
    Err(CondSynthError::Inseparable("<unknown>".into(), "<unknown>".into()))
}

/// One product per true leaf: the literals along the root-to-leaf path.
pub fn tree_to_sop(tree: &DecisionTree, features: &[Atom]) -> Condition {
    fn go(
        tree: &DecisionTree,
        features: &[Atom],
        n: usize,
        path: &mut Vec<Literal>,
        products: &mut Vec<Vec<Literal>>,
    ) {
        match &tree.nodes[n] {
            TreeNode::Leaf(true) => products.push(path.clone()),
            TreeNode::Leaf(false) => {}
            TreeNode::Split { feature, lo, hi } => {
                path.push(Literal {
                    atom: features[*feature].clone(),
                    positive: false,
                });
                go(tree, features, *lo, path, products);
                path.pop();
                path.push(Literal {
                    atom: features[*feature].clone(),
                    positive: true,
                });
                go(tree, features, *hi, path, products);
                path.pop();
            }
        }
    }
    let mut products = Vec::new();
    let mut path: Vec<Literal> = Vec::new();
    go(tree, features, tree.root, &mut path, &mut products);
    if products.is_empty() {
        return Condition::False;
    }
    if products.len() == 1 && products[0].is_empty() {
        return Condition::True;
    }
    Condition::Sop(products)
}
