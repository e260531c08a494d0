//! Agglomerative clustering and Gruvaeus–Wainer leaf ordering.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::Argument(format!("unknown linkage '{other}'"))),
        }
    }
}

/// One agglomeration step. Leaves are nodes `0..M`; the cluster formed by
/// merge `i` is node `M + i`. `left` is the cluster holding the smaller
/// leaf index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDendrogram")]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
    leaf_order: Vec<usize>,
}

#[derive(Deserialize)]
struct RawDendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
    leaf_order: Vec<usize>,
}

impl TryFrom<RawDendrogram> for Dendrogram {
    type Error = Error;

    fn try_from(raw: RawDendrogram) -> Result<Self> {
        Dendrogram::new(raw.labels, raw.merges, raw.leaf_order)
    }
}

impl Dendrogram {
    /// Checks that `merges` builds one binary tree over the labels and that
    /// `leaf_order` keeps every subtree contiguous.
    pub fn new(labels: Vec<String>, merges: Vec<Merge>, leaf_order: Vec<usize>) -> Result<Self> {
        let m = labels.len();
        if m < 2 {
            return Err(Error::InsufficientSamples { found: m });
        }
        if merges.len() != m - 1 {
            return Err(Error::Argument(format!(
                "{} merges for {m} leaves",
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * m - 1];
        for (i, mg) in merges.iter().enumerate() {
            for node in [mg.left, mg.right] {
                if node >= m + i || used[node] {
                    return Err(Error::Argument(format!(
                        "merge {i} refers to unavailable node {node}"
                    )));
                }
                used[node] = true;
            }
            if !(mg.height >= 0.0) || !mg.height.is_finite() {
                return Err(Error::Argument(format!("merge {i} has height {}", mg.height)));
            }
        }
        let dend = Self {
            labels,
            merges,
            leaf_order: Vec::new(),
        };
        if !dend.is_consistent(&leaf_order) {
            return Err(Error::Argument(
                "leaf order is not a tree-consistent permutation".into(),
            ));
        }
        Ok(Self { leaf_order, ..dend })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves() - 2
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Height at which `node` was formed; 0 for leaves.
    pub fn node_height(&self, node: usize) -> f64 {
        node.checked_sub(self.n_leaves())
            .map_or(0.0, |i| self.merges[i].height)
    }

    /// Children of an internal node.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.n_leaves())
            .map(|i| (self.merges[i].left, self.merges[i].right))
    }

    /// Leaves under `node`, left subtree first.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            match self.children(n) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(n),
            }
        }
        out
    }

    /// Same tree with a different leaf order.
    pub fn with_leaf_order(&self, order: Vec<usize>) -> Result<Self> {
        Self::new(self.labels.clone(), self.merges.clone(), order)
    }

    /// True when `order` is a permutation of the leaves in which every
    /// subtree occupies a contiguous run.
    pub fn is_consistent(&self, order: &[usize]) -> bool {
        let m = self.n_leaves();
        if order.len() != m {
            return false;
        }
        let mut pos = vec![usize::MAX; m];
        for (i, &leaf) in order.iter().enumerate() {
            if leaf >= m || pos[leaf] != usize::MAX {
                return false;
            }
            pos[leaf] = i;
        }
        // (min position, max position, size) per node.
        let mut span: Vec<(usize, usize, usize)> = pos.iter().map(|&p| (p, p, 1)).collect();
        for mg in &self.merges {
            let (a, b) = (span[mg.left], span[mg.right]);
            let s = (a.0.min(b.0), a.1.max(b.1), a.2 + b.2);
            if s.1 - s.0 + 1 != s.2 {
                return false;
            }
            span.push(s);
        }
        true
    }
}

/// Agglomerative clustering with the chosen linkage.
///
/// Ties go to the lowest pair of clusters, each cluster identified by its
/// smallest leaf. Average linkage keeps exact sums of leaf-to-leaf
/// distances, so integer-valued inputs give exact heights.
pub fn agglomerative_cluster(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let violations = DistanceMatrix::violations(d.labels(), d.matrix());
    if !violations.is_empty() {
        return Err(Error::InvalidDistance(violations));
    }
    let m = d.len();
    if m < 2 {
        return Err(Error::InsufficientSamples { found: m });
    }
    // Slot i holds the cluster whose smallest leaf is i.
    let mut w: Array2<f64> = d.matrix().clone();
    let mut size = vec![1usize; m];
    let mut node: Vec<usize> = (0..m).collect();
    let mut active = vec![true; m];
    let mut merges = Vec::with_capacity(m - 1);

    let value = |w: &Array2<f64>, size: &[usize], i: usize, j: usize| match linkage {
        Linkage::Average => w[[i, j]] / (size[i] * size[j]) as f64,
        _ => w[[i, j]],
    };

    for step in 0..m - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..m).filter(|&i| active[i]) {
            for j in (i + 1..m).filter(|&j| active[j]) {
                let v = value(&w, &size, i, j);
                if best.is_none_or(|b| v < b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        let (a, b, height) = best.expect("at least two active clusters");
        merges.push(Merge {
            left: node[a],
            right: node[b],
            height,
        });
        for k in (0..m).filter(|&k| active[k] && k != a && k != b) {
            let v = match linkage {
                Linkage::Single => w[[a, k]].min(w[[b, k]]),
                Linkage::Complete => w[[a, k]].max(w[[b, k]]),
                Linkage::Average => w[[a, k]] + w[[b, k]],
            };
            w[[a, k]] = v;
            w[[k, a]] = v;
        }
        size[a] += size[b];
        node[a] = m + step;
        active[b] = false;
    }

    let labels = d.labels().to_vec();
    let provisional = Dendrogram {
        labels,
        merges,
        leaf_order: Vec::new(),
    };
    let order = provisional.leaves(provisional.root());
    Ok(Dendrogram {
        leaf_order: order,
        ..provisional
    })
}

/// Gruvaeus–Wainer ordering: working up from the first merge, each node
/// is oriented so that the two leaves meeting at the boundary between its
/// subtrees are as close as possible. Of the four orientations the first
/// attaining the minimum wins, which keeps the input order on ties.
pub fn gw_leaf_order(dend: &Dendrogram, d: &DistanceMatrix) -> Result<Vec<usize>> {
    let m = dend.n_leaves();
    if d.len() != m {
        return Err(Error::Argument(format!(
            "dendrogram has {m} leaves, distance matrix {}",
            d.len()
        )));
    }
    let mut seq: Vec<Option<Vec<usize>>> = (0..m).map(|i| Some(vec![i])).collect();
    for mg in dend.merges() {
        let l = seq[mg.left].take().expect("node used once");
        let r = seq[mg.right].take().expect("node used once");
        let candidates = [(false, false), (true, false), (false, true), (true, true)];
        let boundary = |(fl, fr): (bool, bool)| {
            let a = if fl { l[0] } else { l[l.len() - 1] };
            let b = if fr { r[r.len() - 1] } else { r[0] };
            d.get(a, b)
        };
        let mut best = candidates[0];
        for c in &candidates[1..] {
            if boundary(*c) < boundary(best) {
                best = *c;
            }
        }
        let mut joined = l;
        if best.0 {
            joined.reverse();
        }
        let mut right = r;
        if best.1 {
            right.reverse();
        }
        joined.extend(right);
        seq.push(Some(joined));
    }
    Ok(seq.pop().flatten().expect("root sequence"))
}

/// Sum of distances between consecutive leaves of an ordering.
pub fn adjacent_distance_sum(d: &DistanceMatrix, order: &[usize]) -> f64 {
    order.windows(2).map(|w| d.get(w[0], w[1])).sum()
}

/// Applies `perm` to rows, columns and labels: `out[i][j] = d[perm[i]][perm[j]]`.
pub fn reorder(d: &DistanceMatrix, perm: &[usize]) -> Result<DistanceMatrix> {
    let m = d.len();
    let mut seen = vec![false; m];
    if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::Argument(format!(
            "{perm:?} is not a permutation of 0..{m}"
        )));
    }
    let out = Array2::from_shape_fn((m, m), |(i, j)| d.get(perm[i], perm[j]));
    let labels = perm.iter().map(|&p| d.labels()[p].clone()).collect();
    DistanceMatrix::new(labels, out)
}
