use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{argmax, check_training_set, check_width};
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::NUM_CLASSES;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreeNode {
    Leaf {
        class: usize,
    },
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f32,
        left: usize,
        right: usize,
    },
}

/// CART-style classification tree grown greedily on Gini impurity.
///
/// Pure nodes always become leaves. Among equally good splits the lowest
/// feature index, then the lowest threshold, wins.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    width: usize,
    nodes: Vec<TreeNode>,
}

const HEADER: &str = "pricefuse-tree 1";

fn class_counts(y: &[usize], idx: &[usize]) -> [usize; NUM_CLASSES] {
    let mut c = [0; NUM_CLASSES];
    for &i in idx {
        c[y[i]] += 1;
    }
    c
}

fn purity_score(counts: &[usize; NUM_CLASSES], n: usize) -> f64 {
    counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n as f64
}

struct Grower<'a> {
    x: &'a Tensor<f32>,
    y: &'a [usize],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f32, Vec<usize>, Vec<usize>)> {
        let n = idx.len();
        let total = class_counts(self.y, idx);
        let mut best: Option<(f64, usize, f32)> = None;
        let mut order = idx.to_vec();
        for feat in 0..self.x.row_len() {
            let value = |i: usize| self.x.row(i)[feat];
            order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
            let mut left = [0usize; NUM_CLASSES];
            for p in 1..n {
                left[self.y[order[p - 1]]] += 1;
                let (lo, hi) = (value(order[p - 1]), value(order[p]));
                if lo >= hi || p < self.min_leaf || n - p < self.min_leaf {
                    continue;
                }
                let right: [usize; NUM_CLASSES] = core::array::from_fn(|k| total[k] - left[k]);
                // Maximizing this is equivalent to minimizing weighted Gini.
                let score = purity_score(&left, p) + purity_score(&right, n - p);
                if best.is_none_or(|(s, _, _)| score > s) {
                    let mid = ((lo as f64 + hi as f64) / 2.0) as f32;
                    let threshold = if mid >= hi { lo } else { mid };
                    best = Some((score, feat, threshold));
                }
            }
        }
        let (_, feat, threshold) = best?;
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x.row(i)[feat] <= threshold);
        Some((feat, threshold, l, r))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = class_counts(self.y, &idx);
        let majority = argmax(&counts.map(|c| c as f64));
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { class: majority });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }
        if let Some((feature, threshold, l, r)) = self.best_split(&idx) {
            let left = self.grow(l, depth + 1);
            let right = self.grow(r, depth + 1);
            self.nodes[id] = TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        id
    }
}

impl DecisionTree {
    pub fn fit(x: &Tensor<f32>, y: &[usize], max_depth: usize, min_leaf: usize) -> Result<Self> {
        check_training_set(x, y)?;
        if min_leaf == 0 {
            return Err(Error::InvalidConfig("tree min_leaf must be >= 1".into()));
        }
        let mut g = Grower {
            x,
            y,
            max_depth,
            min_leaf,
            nodes: Vec::new(),
        };
        g.grow((0..y.len()).collect(), 0);
        Ok(DecisionTree {
            width: x.row_len(),
            nodes: g.nodes,
        })
    }

    pub fn input_width(&self) -> usize {
        self.width
    }

    /// Nodes in preorder; index 0 is the root.
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + rec(nodes, left).max(rec(nodes, right)),
            }
        }
        rec(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[f32]) -> Result<usize> {
        check_width(self.width, x.len())?;
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { class } => return Ok(class),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Plain-text node list:
    ///
    /// ```text
    /// pricefuse-tree 1
    /// width <F>
    /// nodes <count>
    /// <id> split <feature> <threshold> <left> <right>
    /// <id> leaf <class>
    /// ```
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{HEADER}\nwidth {}\nnodes {}",
            self.width,
            self.nodes.len()
        );
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = match node {
                TreeNode::Leaf { class } => writeln!(s, "{id} leaf {class}"),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(s, "{id} split {feature} {threshold:?} {left} {right}"),
            };
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Format(format!("tree text: {msg}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(HEADER) {
            return Err(bad("missing header".into()));
        }
        let mut header_value = |key: &str| -> Result<usize> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing `{key}`")))?;
            line.strip_prefix(key)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(format!("bad `{key}` line `{line}`")))
        };
        let width = header_value("width")?;
        let count = header_value("nodes")?;
        let mut nodes = Vec::with_capacity(count);
        for (expected, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<usize> {
                parts
                    .get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad(format!("bad node line `{line}`")))
            };
            if num(0)? != expected {
                return Err(bad(format!("node ids out of order at `{line}`")));
            }
            let node = match parts.get(1).copied() {
                Some("leaf") if parts.len() == 3 => TreeNode::Leaf { class: num(2)? },
                Some("split") if parts.len() == 6 => TreeNode::Split {
                    feature: num(2)?,
                    threshold: parts[3]
                        .parse()
                        .map_err(|_| bad(format!("bad threshold in `{line}`")))?,
                    left: num(4)?,
                    right: num(5)?,
                },
                _ => return Err(bad(format!("bad node line `{line}`"))),
            };
            nodes.push(node);
        }
        if nodes.len() != count || count == 0 {
            return Err(bad(format!(
                "expected {count} nodes, found {}",
                nodes.len()
            )));
        }
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                TreeNode::Leaf { class } if class >= NUM_CLASSES => {
                    return Err(bad(format!("leaf class {class}")))
                }
                TreeNode::Split {
                    feature,
                    left,
                    right,
                    ..
                } if feature >= width
                    || left <= id
                    || right <= id
                    || left >= count
                    || right >= count =>
                {
                    return Err(bad(format!("node {id} has invalid links")))
                }
                _ => {}
            }
        }
        Ok(DecisionTree { width, nodes })
    }
}
