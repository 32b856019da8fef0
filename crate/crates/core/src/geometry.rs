//! Axis-aligned cells and binary partition trees of the unit cube.
//!
//! Cells are half-open `(lower_j, upper_j]` boxes, except that a lower bound
//! of exactly 0 is inclusive so that every point of `[0,1]^d` has a leaf. A
//! point with `x_j == threshold` goes to the left child.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRectangle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisRectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::param(
                "rectangle",
                "bounds must have equal, nonzero length",
            ));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(0.0 <= *a && a < b && *b <= 1.0) {
                return Err(Error::param("rectangle", format!("invalid side ({a}, {b}]")));
            }
        }
        Ok(AxisRectangle { lower, upper })
    }

    pub fn unit(d: usize) -> Self {
        AxisRectangle {
            lower: vec![0.0; d],
            upper: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        rect_volume(&self.lower, &self.upper)
    }

    pub fn side(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        cell_contains(&self.lower, &self.upper, x)
    }
}

/// Lebesgue measure of the box.
pub fn rect_volume(lower: &[f64], upper: &[f64]) -> f64 {
    lower.iter().zip(upper).map(|(a, b)| b - a).product()
}

/// Whether `v` lies in the side `(a, b]` (or `[0, b]` when `a == 0`).
#[inline]
pub fn in_interval(v: f64, a: f64, b: f64) -> bool {
    (v > a || (a == 0.0 && v >= 0.0)) && v <= b
}

#[inline]
pub fn cell_contains(lower: &[f64], upper: &[f64], x: &[f64]) -> bool {
    x.iter()
        .zip(lower.iter().zip(upper))
        .all(|(&v, (&a, &b))| in_interval(v, a, b))
}

/// Number of splits on the path to a leaf, in total and per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub total: u32,
    pub per_coordinate: Vec<u32>,
}

impl SplitCounts {
    pub fn from_per_coordinate(per_coordinate: &[u32]) -> Self {
        SplitCounts {
            total: per_coordinate.iter().sum(),
            per_coordinate: per_coordinate.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Node {
    /// Left child is the next node in preorder; `right` is stored.
    Split {
        feature: u32,
        threshold: f64,
        right: u32,
    },
    Leaf {
        leaf: u32,
    },
}

/// A note recorded while growing a tree, e.g. a node that could not be split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthNote {
    pub depth: u32,
    pub message: String,
}

/// Binary axis-aligned partition of `[0,1]^d`.
///
/// Nodes are stored in preorder. Leaf cells and split counts live in flat
/// side tables indexed by leaf number, so building a tree allocates a handful
/// of vectors regardless of its size.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    dim: usize,
    nodes: Vec<Node>,
    leaf_bounds: Vec<f64>,
    leaf_counts: Vec<u32>,
    notes: Vec<GrowthNote>,
}

/// Borrowed view of one leaf.
#[derive(Clone, Copy, Debug)]
pub struct LeafRef<'a> {
    pub id: usize,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub split_counts: &'a [u32],
}

impl LeafRef<'_> {
    pub fn depth(&self) -> u32 {
        self.split_counts.iter().sum()
    }

    pub fn volume(&self) -> f64 {
        rect_volume(self.lower, self.upper)
    }

    pub fn side(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        cell_contains(self.lower, self.upper, x)
    }

    pub fn rect(&self) -> AxisRectangle {
        AxisRectangle {
            lower: self.lower.to_vec(),
            upper: self.upper.to_vec(),
        }
    }

    pub fn counts(&self) -> SplitCounts {
        SplitCounts::from_per_coordinate(self.split_counts)
    }
}

/// An internal node together with its cell, as produced by [`Tree::splits`].
#[derive(Clone, Debug)]
pub struct SplitView {
    pub node: usize,
    pub depth: u32,
    pub feature: usize,
    pub threshold: f64,
    pub cell: AxisRectangle,
}

impl Tree {
    /// The tree with a single leaf `[0,1]^d`.
    pub fn root_only(d: usize) -> Tree {
        let mut b = TreeBuilder::new(d);
        let cell = AxisRectangle::unit(d);
        b.push_leaf(&cell.lower, &cell.upper, &vec![0; d]);
        b.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_counts.len() / self.dim
    }

    pub fn notes(&self) -> &[GrowthNote] {
        &self.notes
    }

    pub fn leaf(&self, id: usize) -> LeafRef<'_> {
        let d = self.dim;
        let bounds = &self.leaf_bounds[2 * d * id..2 * d * (id + 1)];
        LeafRef {
            id,
            lower: &bounds[..d],
            upper: &bounds[d..],
            split_counts: &self.leaf_counts[d * id..d * (id + 1)],
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> impl Iterator<Item = LeafRef<'_>> + '_ {
        (0..self.num_leaves()).map(move |id| self.leaf(id))
    }

    /// Index of the leaf whose cell contains `x`.
    pub fn leaf_id_of(&self, x: &[f64]) -> usize {
        let mut idx = 0usize;
        loop {
            match self.nodes[idx] {
                Node::Leaf { leaf } => return leaf as usize,
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    idx = if x[feature as usize] <= threshold {
                        idx + 1
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    /// The leaf `L(x)` containing `x`.
    pub fn leaf_of(&self, x: &[f64]) -> LeafRef<'_> {
        self.leaf(self.leaf_id_of(x))
    }

    /// Smallest leaf volume.
    pub fn min_leaf_volume(&self) -> f64 {
        self.leaves().map(|l| l.volume()).fold(f64::INFINITY, f64::min)
    }

    /// Largest side length along coordinate `j` over all leaves.
    pub fn max_side_length(&self, j: usize) -> f64 {
        self.leaves().map(|l| l.side(j)).fold(0.0, f64::max)
    }

    /// Smallest per-coordinate split count over all leaves.
    pub fn min_split_count(&self, j: usize) -> u32 {
        self.leaves().map(|l| l.split_counts[j]).min().unwrap_or(0)
    }

    /// Internal nodes in preorder with their cells.
    pub fn splits(&self) -> Vec<SplitView> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, AxisRectangle::unit(self.dim), 0u32)];
        while let Some((idx, cell, depth)) = stack.pop() {
            if let Node::Split {
                feature,
                threshold,
                right,
            } = self.nodes[idx]
            {
                let j = feature as usize;
                let mut left_cell = cell.clone();
                left_cell.upper[j] = threshold;
                let mut right_cell = cell.clone();
                right_cell.lower[j] = threshold;
                out.push(SplitView {
                    node: idx,
                    depth,
                    feature: j,
                    threshold,
                    cell,
                });
                stack.push((right as usize, right_cell, depth + 1));
                stack.push((idx + 1, left_cell, depth + 1));
            }
        }
        out
    }

    /// Child node indices of the internal node `node`, or `None` for a leaf.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        match self.nodes[node] {
            Node::Split { right, .. } => Some((node + 1, right as usize)),
            Node::Leaf { .. } => None,
        }
    }

    /// For each point, the preorder indices of every node on its root-to-leaf path.
    #[cfg(test)]
    pub(crate) fn for_each_path_node(&self, x: &[f64], mut visit: impl FnMut(usize)) {
        let mut idx = 0usize;
        loop {
            visit(idx);
            match self.nodes[idx] {
                Node::Leaf { .. } => return,
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    idx = if x[feature as usize] <= threshold {
                        idx + 1
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn to_document(&self) -> TreeDocument {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Split {
                    feature, threshold, ..
                } => NodeRecord::Split {
                    feature: feature as usize,
                    threshold,
                },
                Node::Leaf { leaf } => {
                    let l = self.leaf(leaf as usize);
                    NodeRecord::Leaf {
                        leaf: LeafRecord {
                            lower: l.lower.to_vec(),
                            upper: l.upper.to_vec(),
                            counts: l.split_counts.to_vec(),
                        },
                    }
                }
            })
            .collect();
        TreeDocument { dim: self.dim, nodes }
    }

    /// Rebuilds a tree from its preorder document, checking that every
    /// leaf's stored cell and counts match the splits above it.
    pub fn from_document(doc: &TreeDocument) -> Result<Tree> {
        let d = doc.dim;
        if d == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let mut b = TreeBuilder::new(d);
        let mut pos = 0usize;
        let mut cell = AxisRectangle::unit(d);
        let mut counts = vec![0u32; d];
        rebuild(&doc.nodes, &mut pos, &mut b, &mut cell, &mut counts)?;
        if pos != doc.nodes.len() {
            return Err(Error::param("nodes", "trailing nodes after a complete tree"));
        }
        Ok(b.finish())
    }
}

fn rebuild(
    nodes: &[NodeRecord],
    pos: &mut usize,
    b: &mut TreeBuilder,
    cell: &mut AxisRectangle,
    counts: &mut [u32],
) -> Result<()> {
    let node = nodes
        .get(*pos)
        .ok_or_else(|| Error::param("nodes", "document ends inside the tree"))?;
    *pos += 1;
    match node {
        NodeRecord::Leaf { leaf } => {
            if leaf.lower != cell.lower || leaf.upper != cell.upper || leaf.counts != counts {
                return Err(Error::param("nodes", "leaf cell does not match its splits"));
            }
            b.push_leaf(&cell.lower, &cell.upper, counts);
        }
        &NodeRecord::Split { feature, threshold } => {
            if feature >= cell.dim() || !(cell.lower[feature] < threshold && threshold < cell.upper[feature])
            {
                return Err(Error::param(
                    "nodes",
                    format!("invalid split ({feature}, {threshold})"),
                ));
            }
            let at = b.begin_split(feature, threshold);
            let old = cell.upper[feature];
            cell.upper[feature] = threshold;
            counts[feature] += 1;
            rebuild(nodes, pos, b, cell, counts)?;
            cell.upper[feature] = old;
            b.mark_right(at);
            let old = cell.lower[feature];
            cell.lower[feature] = threshold;
            rebuild(nodes, pos, b, cell, counts)?;
            cell.lower[feature] = old;
            counts[feature] -= 1;
        }
    }
    Ok(())
}

/// JSON form of a tree: the preorder node list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub dim: usize,
    pub nodes: Vec<NodeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRecord {
    Split { feature: usize, threshold: f64 },
    Leaf { leaf: LeafRecord },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<u32>,
}

impl Serialize for Tree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TreeDocument::deserialize(d)?;
        Tree::from_document(&doc).map_err(serde::de::Error::custom)
    }
}

/// Incremental preorder construction used by the growers.
pub(crate) struct TreeBuilder {
    tree: Tree,
}

impl TreeBuilder {
    pub(crate) fn new(d: usize) -> Self {
        TreeBuilder {
            tree: Tree {
                dim: d,
                nodes: Vec::new(),
                leaf_bounds: Vec::new(),
                leaf_counts: Vec::new(),
                notes: Vec::new(),
            },
        }
    }

    /// Appends a split node; its left subtree must be pushed next, then
    /// [`mark_right`](Self::mark_right) called before the right subtree.
    pub(crate) fn begin_split(&mut self, feature: usize, threshold: f64) -> usize {
        self.tree.nodes.push(Node::Split {
            feature: feature as u32,
            threshold,
            right: 0,
        });
        self.tree.nodes.len() - 1
    }

    pub(crate) fn mark_right(&mut self, at: usize) {
        let next = self.tree.nodes.len() as u32;
        if let Node::Split { right, .. } = &mut self.tree.nodes[at] {
            *right = next;
        }
    }

    pub(crate) fn push_leaf(&mut self, lower: &[f64], upper: &[f64], counts: &[u32]) {
        let leaf = self.tree.num_leaves() as u32;
        self.tree.leaf_bounds.extend_from_slice(lower);
        self.tree.leaf_bounds.extend_from_slice(upper);
        self.tree.leaf_counts.extend_from_slice(counts);
        self.tree.nodes.push(Node::Leaf { leaf });
    }

    pub(crate) fn note(&mut self, depth: u32, message: impl Into<String>) {
        self.tree.notes.push(GrowthNote {
            depth,
            message: message.into(),
        });
    }

    pub(crate) fn finish(self) -> Tree {
        self.tree
    }
}

/// Grows a full tree where `choose(depth, lower, upper)` picks each split, or
/// `None` to stop. Used by the data-free growers.
pub(crate) fn grow_with<F>(d: usize, mut choose: F) -> Tree
where
    F: FnMut(u32, &[f64], &[f64]) -> Option<(usize, f64)>,
{
    fn recurse<F: FnMut(u32, &[f64], &[f64]) -> Option<(usize, f64)>>(
        b: &mut TreeBuilder,
        lower: &mut [f64],
        upper: &mut [f64],
        counts: &mut [u32],
        depth: u32,
        choose: &mut F,
    ) {
        match choose(depth, lower, upper) {
            None => b.push_leaf(lower, upper, counts),
            Some((j, c)) => {
                let at = b.begin_split(j, c);
                counts[j] += 1;
                let old = upper[j];
                upper[j] = c;
                recurse(b, lower, upper, counts, depth + 1, choose);
                upper[j] = old;
                b.mark_right(at);
                let old = lower[j];
                lower[j] = c;
                recurse(b, lower, upper, counts, depth + 1, choose);
                lower[j] = old;
                counts[j] -= 1;
            }
        }
    }
    let mut b = TreeBuilder::new(d);
    let mut lower = vec![0.0; d];
    let mut upper = vec![1.0; d];
    let mut counts = vec![0u32; d];
    recurse(&mut b, &mut lower, &mut upper, &mut counts, 0, &mut choose);
    b.finish()
}
