use std::fmt;

use super::OracleError;

/// A 2-cover of `[n]` in canonical form: each block sorted ascending, blocks
/// sorted lexicographically, duplicates adjacent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoCover {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TwoCover {
    /// Validates and canonicalizes a multiset of blocks of 1-based elements.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, OracleError> {
        let mut degree = vec![0usize; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
            if block.is_empty() {
                return Err(OracleError::NotACover("empty block".into()));
            }
            if block.windows(2).any(|w| w[0] == w[1]) {
                return Err(OracleError::NotACover(format!("repeated element in {block:?}")));
            }
            for &e in block.iter() {
                if e == 0 || e > n {
                    return Err(OracleError::NotACover(format!("element {e} outside [{n}]")));
                }
                degree[e - 1] += 1;
            }
        }
        if let Some(j) = degree.iter().position(|&d| d != 2) {
            return Err(OracleError::NotACover(format!(
                "element {} lies in {} blocks",
                j + 1,
                degree[j]
            )));
        }
        blocks.sort();
        Ok(TwoCover { n, blocks })
    }

    pub(crate) fn from_masks(n: usize, masks: &[u64]) -> Self {
        let mut blocks: Vec<Vec<usize>> = masks
            .iter()
            .map(|&m| (0..n).filter(|&j| m >> j & 1 == 1).map(|j| j + 1).collect())
            .collect();
        blocks.sort();
        TwoCover { n, blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of pairs of equal blocks (a block occurs at most twice).
    pub fn duplicate_pairs(&self) -> usize {
        self.blocks.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// No repeated block: the incidence matrix has no repeated row.
    pub fn is_proper(&self) -> bool {
        self.duplicate_pairs() == 0
    }

    /// No two elements share two blocks: no repeated incidence column.
    pub fn is_restricted(&self) -> bool {
        let masks = self.masks();
        for (i, a) in masks.iter().enumerate() {
            for b in &masks[i + 1..] {
                if (a & b).count_ones() >= 2 {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn masks(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .map(|b| b.iter().fold(0u64, |m, &e| m | 1 << (e - 1)))
            .collect()
    }
}

impl fmt::Debug for TwoCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoCover({}){:?}", self.n, self.blocks)
    }
}

impl fmt::Display for TwoCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|e| e.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Simple graph on the labelled vertex set `[n]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    n: usize,
    // adjacency[i] has bit j set iff vertices i+1 and j+1 are adjacent
    adjacency: Vec<u64>,
}

impl LabeledGraph {
    pub fn empty(n: usize) -> Self {
        LabeledGraph {
            n,
            adjacency: vec![0; n],
        }
    }

    /// Graph from 1-based edges; loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, OracleError> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a == b || a == 0 || b == 0 || a > n || b > n {
                return Err(OracleError::NotAGraph(format!("bad edge ({a},{b})")));
            }
            g.connect(a - 1, b - 1);
        }
        Ok(g)
    }

    fn connect(&mut self, a: usize, b: usize) {
        self.adjacency[a] |= 1 << b;
        self.adjacency[b] |= 1 << a;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a >= 1 && b >= 1 && a <= self.n && b <= self.n && self.adjacency[a - 1] >> (b - 1) & 1 == 1
    }

    /// Edges `(a, b)` with `a < b`, 1-based, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.adjacency[a] >> b & 1 == 1 {
                    out.push((a + 1, b + 1));
                }
            }
        }
        out
    }
}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabeledGraph({}){:?}", self.n, self.edges())
    }
}

/// Line graph of the simple root graph encoded by a restricted 2-cover.
///
/// Elements of `[n]` are the root's edges and blocks its vertices, so two
/// elements are adjacent iff some block contains both.
pub fn line_graph_of(cover: &TwoCover) -> Result<LabeledGraph, OracleError> {
    if !cover.is_restricted() {
        return Err(OracleError::NotRestricted(cover.to_string()));
    }
    Ok(line_graph_of_masks(cover.n, &cover.masks()))
}

pub(crate) fn line_graph_of_masks(n: usize, masks: &[u64]) -> LabeledGraph {
    let mut g = LabeledGraph::empty(n);
    for &m in masks {
        let mut rest = m;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            g.adjacency[a] |= m & !(1 << a);
        }
    }
    g
}
