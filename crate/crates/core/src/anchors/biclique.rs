//! Maximal biclique search on a bipartite incidence mask.
//!
//! Small graphs (at most [`EXACT_VERTEX_LIMIT`] vertices in total) are
//! enumerated exactly with a backtracking search in the style of MBEA. Larger
//! graphs fall back to a deterministic greedy multi-start heuristic whose
//! outputs are still complete and maximal, but not necessarily optimal.

use std::cmp::Ordering;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;

/// Above this many vertices (rows + columns) the search is heuristic.
pub const EXACT_VERTEX_LIMIT: usize = 40;

/// Number of column seeds tried by the heuristic.
pub const HEURISTIC_STARTS: usize = 16;

/// A complete bipartite subgraph: every `(row, col)` pair is an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Biclique {
    /// Ascending row indices.
    pub rows: Vec<usize>,
    /// Ascending column indices.
    pub cols: Vec<usize>,
}

impl Biclique {
    pub fn min_side(&self) -> usize {
        self.rows.len().min(self.cols.len())
    }

    pub fn area(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn is_complete(&self, mask: &DMatrix<bool>) -> bool {
        self.rows
            .iter()
            .all(|&r| self.cols.iter().all(|&c| mask[(r, c)]))
    }

    /// Complete, and no row or column can be added while staying complete.
    pub fn is_maximal(&self, mask: &DMatrix<bool>) -> bool {
        if self.rows.is_empty() || self.cols.is_empty() || !self.is_complete(mask) {
            return false;
        }
        let row_addable = (0..mask.nrows())
            .filter(|r| !self.rows.contains(r))
            .any(|r| self.cols.iter().all(|&c| mask[(r, c)]));
        let col_addable = (0..mask.ncols())
            .filter(|c| !self.cols.contains(c))
            .any(|c| self.rows.iter().all(|&r| mask[(r, c)]));
        !row_addable && !col_addable
    }
}

/// Anchor selection order: larger min side, then larger area, then the
/// lexicographically smaller row set.
pub fn anchor_order(a: &Biclique, b: &Biclique) -> Ordering {
    a.min_side()
        .cmp(&b.min_side())
        .then(a.area().cmp(&b.area()))
        .then_with(|| b.rows.cmp(&a.rows))
}

/// Adjacency in both directions as bitsets.
struct Bigraph {
    /// For each row, the set of adjacent columns.
    row_nbrs: Vec<FixedBitSet>,
    /// For each column, the set of adjacent rows.
    col_nbrs: Vec<FixedBitSet>,
}

impl Bigraph {
    fn new(mask: &DMatrix<bool>) -> Self {
        let (m, n) = mask.shape();
        let mut row_nbrs = vec![FixedBitSet::with_capacity(n); m];
        let mut col_nbrs = vec![FixedBitSet::with_capacity(m); n];
        for r in 0..m {
            for c in 0..n {
                if mask[(r, c)] {
                    row_nbrs[r].insert(c);
                    col_nbrs[c].insert(r);
                }
            }
        }
        Self { row_nbrs, col_nbrs }
    }

    fn transposed(self) -> Self {
        Self {
            row_nbrs: self.col_nbrs,
            col_nbrs: self.row_nbrs,
        }
    }

    fn nrows(&self) -> usize {
        self.row_nbrs.len()
    }

    fn ncols(&self) -> usize {
        self.col_nbrs.len()
    }

    /// Closes a nonempty column set into a maximal biclique.
    fn close_from_cols(&self, cols: &FixedBitSet) -> Option<Biclique> {
        let mut rows = FixedBitSet::with_capacity(self.nrows());
        rows.insert_range(..);
        for c in cols.ones() {
            rows.intersect_with(&self.col_nbrs[c]);
        }
        self.close_from_rows(&rows)
    }

    fn close_from_rows(&self, rows: &FixedBitSet) -> Option<Biclique> {
        if rows.is_clear() {
            return None;
        }
        let mut cols = FixedBitSet::with_capacity(self.ncols());
        cols.insert_range(..);
        for r in rows.ones() {
            cols.intersect_with(&self.row_nbrs[r]);
        }
        if cols.is_clear() {
            return None;
        }
        Some(Biclique {
            rows: rows.ones().collect(),
            cols: cols.ones().collect(),
        })
    }
}

/// Receives bicliques from the exact search.
trait Sink {
    /// `left` and `right` are in search orientation.
    fn report(&mut self, left: &FixedBitSet, right: &[usize]);
    /// Whether a subtree whose bicliques have at most `left` and `right`
    /// vertices can be skipped.
    fn prune(&self, left: usize, right: usize) -> bool;
    fn done(&self) -> bool {
        false
    }
}

/// Backtracking enumeration of maximal bicliques. `graph.col_nbrs` indexes
/// the branching ("right") side.
fn enumerate(graph: &Bigraph, sink: &mut dyn Sink) {
    let mut left = FixedBitSet::with_capacity(graph.nrows());
    left.insert_range(..);
    let candidates: Vec<usize> = (0..graph.ncols())
        .filter(|&c| !graph.col_nbrs[c].is_clear())
        .collect();
    expand(graph, &left, &[], candidates, Vec::new(), sink);
}

fn expand(
    graph: &Bigraph,
    left: &FixedBitSet,
    right: &[usize],
    mut candidates: Vec<usize>,
    mut excluded: Vec<usize>,
    sink: &mut dyn Sink,
) {
    candidates.reverse();
    while let Some(x) = candidates.pop() {
        if sink.done() {
            return;
        }
        let mut new_left = left.clone();
        new_left.intersect_with(&graph.col_nbrs[x]);
        let size = new_left.count_ones(..);

        let mut maximal = true;
        let mut new_excluded = Vec::new();
        for &v in &excluded {
            let c = new_left.intersection_count(&graph.col_nbrs[v]);
            if c == size {
                maximal = false;
                break;
            }
            if c > 0 {
                new_excluded.push(v);
            }
        }

        if maximal {
            let mut new_right = right.to_vec();
            new_right.push(x);
            let mut new_candidates = Vec::new();
            // candidates are stored reversed; restore ascending order
            for &v in candidates.iter().rev() {
                let c = new_left.intersection_count(&graph.col_nbrs[v]);
                if c == size {
                    new_right.push(v);
                } else if c > 0 {
                    new_candidates.push(v);
                }
            }
            sink.report(&new_left, &new_right);
            let reach = new_right.len() + new_candidates.len();
            if !new_candidates.is_empty() && !sink.prune(size, reach) {
                expand(graph, &new_left, &new_right, new_candidates, new_excluded, sink);
            }
        }
        excluded.push(x);
    }
}

/// Maps search orientation back to rows/columns.
struct Orientation {
    swapped: bool,
}

impl Orientation {
    fn biclique(&self, left: &FixedBitSet, right: &[usize]) -> Biclique {
        let mut r = right.to_vec();
        r.sort_unstable();
        let l: Vec<usize> = left.ones().collect();
        if self.swapped {
            Biclique { rows: r, cols: l }
        } else {
            Biclique { rows: l, cols: r }
        }
    }
}

struct Collect {
    orient: Orientation,
    out: Vec<Biclique>,
    limit: usize,
}

impl Sink for Collect {
    fn report(&mut self, left: &FixedBitSet, right: &[usize]) {
        if self.out.len() < self.limit {
            self.out.push(self.orient.biclique(left, right));
        }
    }

    fn prune(&self, _: usize, _: usize) -> bool {
        false
    }

    fn done(&self) -> bool {
        self.out.len() >= self.limit
    }
}

struct Best {
    orient: Orientation,
    best: Option<Biclique>,
}

impl Sink for Best {
    fn report(&mut self, left: &FixedBitSet, right: &[usize]) {
        let l = left.count_ones(..);
        let r = right.len();
        if let Some(b) = &self.best {
            let (min, area) = (l.min(r), l * r);
            if (min, area) < (b.min_side(), b.area()) {
                return;
            }
        }
        let cand = self.orient.biclique(left, right);
        match &self.best {
            Some(b) if anchor_order(&cand, b) != Ordering::Greater => {}
            _ => self.best = Some(cand),
        }
    }

    fn prune(&self, left: usize, right: usize) -> bool {
        match &self.best {
            None => false,
            Some(b) => (left.min(right), left * right) < (b.min_side(), b.area()),
        }
    }
}

/// Builds the search graph, branching on the smaller side.
fn oriented(mask: &DMatrix<bool>) -> (Bigraph, Orientation) {
    let g = Bigraph::new(mask);
    if mask.nrows() < mask.ncols() {
        (g.transposed(), Orientation { swapped: true })
    } else {
        (g, Orientation { swapped: false })
    }
}

pub fn is_exact_size(mask: &DMatrix<bool>) -> bool {
    mask.nrows() + mask.ncols() <= EXACT_VERTEX_LIMIT
}

/// Maximal bicliques of `mask`, at most `limit` of them, deduplicated.
///
/// Exhaustive when the graph has at most [`EXACT_VERTEX_LIMIT`] vertices,
/// otherwise the heuristic candidates.
pub fn maximal_bicliques(mask: &DMatrix<bool>, limit: usize) -> Vec<Biclique> {
    if mask.is_empty() || limit == 0 {
        return Vec::new();
    }
    if is_exact_size(mask) {
        exact_bicliques(mask, limit)
    } else {
        let mut out = heuristic_bicliques(mask);
        out.truncate(limit);
        out
    }
}

/// Exhaustive enumeration regardless of size.
pub fn exact_bicliques(mask: &DMatrix<bool>, limit: usize) -> Vec<Biclique> {
    let (g, orient) = oriented(mask);
    let mut sink = Collect {
        orient,
        out: Vec::new(),
        limit,
    };
    enumerate(&g, &mut sink);
    sink.out
}

/// The biclique maximizing [`anchor_order`] among the maximal bicliques the
/// search visits; exact for small graphs.
pub fn best_biclique(mask: &DMatrix<bool>) -> Option<Biclique> {
    if mask.is_empty() {
        return None;
    }
    if is_exact_size(mask) {
        best_exact(mask)
    } else {
        heuristic_bicliques(mask).into_iter().max_by(anchor_order)
    }
}

/// Branch-and-bound search for the optimum under [`anchor_order`].
pub fn best_exact(mask: &DMatrix<bool>) -> Option<Biclique> {
    let (g, orient) = oriented(mask);
    let mut sink = Best { orient, best: None };
    enumerate(&g, &mut sink);
    sink.best
}

/// Deterministic greedy multi-start search.
///
/// Each of the [`HEURISTIC_STARTS`] highest-degree columns seeds a path that
/// repeatedly adds the column sharing the most rows with the current row set;
/// every prefix of the path is closed into a maximal biclique. One extra start
/// begins from the whole graph and prunes the least dense row or column until
/// the block is complete.
pub fn heuristic_bicliques(mask: &DMatrix<bool>) -> Vec<Biclique> {
    let g = Bigraph::new(mask);
    let mut out: Vec<Biclique> = Vec::new();
    let push = |b: Option<Biclique>, out: &mut Vec<Biclique>| {
        if let Some(b) = b {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    };

    let mut seeds: Vec<usize> = (0..g.ncols())
        .filter(|&c| !g.col_nbrs[c].is_clear())
        .collect();
    seeds.sort_by_key(|&c| std::cmp::Reverse(g.col_nbrs[c].count_ones(..)));
    seeds.truncate(HEURISTIC_STARTS);

    for &seed in &seeds {
        let mut cols = FixedBitSet::with_capacity(g.ncols());
        cols.insert(seed);
        let mut rows = g.col_nbrs[seed].clone();
        push(g.close_from_cols(&cols), &mut out);
        loop {
            let mut pick: Option<(usize, usize)> = None;
            for c in 0..g.ncols() {
                if cols.contains(c) {
                    continue;
                }
                let shared = rows.intersection_count(&g.col_nbrs[c]);
                if shared > 0 && pick.is_none_or(|(_, s)| shared > s) {
                    pick = Some((c, shared));
                }
            }
            let Some((c, _)) = pick else { break };
            cols.insert(c);
            rows.intersect_with(&g.col_nbrs[c]);
            push(g.close_from_cols(&cols), &mut out);
        }
    }

    push(prune_to_complete(mask, &g), &mut out);
    out
}

/// Removes the row or column with the most missing cells until the remaining
/// block is fully observed, then closes it.
fn prune_to_complete(mask: &DMatrix<bool>, g: &Bigraph) -> Option<Biclique> {
    let mut rows: Vec<usize> = (0..g.nrows()).filter(|&r| !g.row_nbrs[r].is_clear()).collect();
    let mut cols: Vec<usize> = (0..g.ncols()).filter(|&c| !g.col_nbrs[c].is_clear()).collect();
    loop {
        if rows.is_empty() || cols.is_empty() {
            return None;
        }
        let row_missing: Vec<usize> = rows
            .iter()
            .map(|&r| cols.iter().filter(|&&c| !mask[(r, c)]).count())
            .collect();
        let col_missing: Vec<usize> = cols
            .iter()
            .map(|&c| rows.iter().filter(|&&r| !mask[(r, c)]).count())
            .collect();
        let worst_row = (0..rows.len()).max_by_key(|&k| (row_missing[k], std::cmp::Reverse(k)));
        let worst_col = (0..cols.len()).max_by_key(|&k| (col_missing[k], std::cmp::Reverse(k)));
        let (wr, wc) = (worst_row.unwrap(), worst_col.unwrap());
        if row_missing[wr] == 0 {
            break;
        }
        // normalize by the other side's length so both compare as densities
        let row_gap = row_missing[wr] as f64 / cols.len() as f64;
        let col_gap = col_missing[wc] as f64 / rows.len() as f64;
        if row_gap >= col_gap {
            rows.remove(wr);
        } else {
            cols.remove(wc);
        }
    }
    let mut set = FixedBitSet::with_capacity(g.ncols());
    for c in cols {
        set.insert(c);
    }
    g.close_from_cols(&set)
}
