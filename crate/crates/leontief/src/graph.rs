//! Boolean-matrix and traversal machinery for the flow web: adjacency,
//! accessibility and distance matrices, strong components with condensation,
//! Markov state classification, and essential-flow filtering.

use crate::matrix::Matrix;
use std::collections::VecDeque;
use thiserror::Error;

/// Row-sum tolerance used when classifying chain states.
pub const STATE_STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("weight matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{labels} labels provided for {vertices} vertices")]
    LabelMismatch { labels: usize, vertices: usize },
    #[error("adjacency needs {expected} entries for {n} vertices, got {got}")]
    AdjacencyShape {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("duplicate vertex label {label:?}")]
    DuplicateLabel { label: String },
    #[error("row {row} sums to {sum}, not a probability distribution")]
    NotStochastic { row: usize, sum: f64 },
    #[error("graph carries no weights")]
    MissingWeights,
}

/// Directed graph over labeled vertices, with optional arc weights.
///
/// Weights are stored as a full matrix masked to the arc set: entries where
/// no arc exists are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    labels: Vec<String>,
    adjacency: Vec<bool>,
    weights: Option<Matrix>,
}

impl Digraph {
    pub fn new(labels: Vec<String>, adjacency: Vec<bool>) -> Result<Self, GraphError> {
        let n = labels.len();
        if adjacency.len() != n * n {
            return Err(GraphError::AdjacencyShape {
                n,
                expected: n * n,
                got: adjacency.len(),
            });
        }
        check_unique(&labels)?;
        Ok(Self {
            n,
            labels,
            adjacency,
            weights: None,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn arc(&self, from: usize, to: usize) -> bool {
        self.adjacency[from * self.n + to]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        if !self.arc(from, to) {
            return None;
        }
        self.weights.as_ref().map(|w| w.get(from, to))
    }

    pub fn weights(&self) -> Option<&Matrix> {
        self.weights.as_ref()
    }

    pub fn out_neighbors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&to| self.arc(from, to))
    }

    pub fn arc_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a).count()
    }

    /// All arcs as `(from, to, weight)`; weight is zero on unweighted graphs.
    pub fn arcs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.arc(i, j) {
                    let w = self.weight(i, j).unwrap_or(0.0);
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

fn check_unique(labels: &[String]) -> Result<(), GraphError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(GraphError::DuplicateLabel { label: l.clone() });
        }
    }
    Ok(())
}

/// Builds the weighted digraph of a square matrix: an arc `i -> j` exists iff
/// `weights[i][j] > tol` (strict positivity at the default `tol = 0`).
pub fn adjacency_from_matrix(
    weights: &Matrix,
    labels: &[String],
    tol: f64,
) -> Result<Digraph, GraphError> {
    if !weights.is_square() {
        return Err(GraphError::NotSquare {
            rows: weights.rows(),
            cols: weights.cols(),
        });
    }
    let n = weights.rows();
    if labels.len() != n {
        return Err(GraphError::LabelMismatch {
            labels: labels.len(),
            vertices: n,
        });
    }
    check_unique(labels)?;
    let mut adjacency = vec![false; n * n];
    let mut masked = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let w = weights.get(i, j);
            if w > tol {
                adjacency[i * n + j] = true;
                masked.set(i, j, w);
            }
        }
    }
    Ok(Digraph {
        n,
        labels: labels.to_vec(),
        adjacency,
        weights: Some(masked),
    })
}

/// Accessibility matrix `R` and distance matrix `D` of a digraph.
///
/// `R[i][i] = 1` and `D[i][i] = 0` by convention; unreachable pairs carry an
/// explicit `None` distance rather than the ambiguous zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilitySummary {
    n: usize,
    access: Vec<bool>,
    distance: Vec<Option<u32>>,
}

impl ReachabilitySummary {
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        self.access[from * self.n + to]
    }

    pub fn distance(&self, from: usize, to: usize) -> Option<u32> {
        self.distance[from * self.n + to]
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// Computes reachability by Warshall closure and distances by breadth-first
/// search from every source.
pub fn accessibility(g: &Digraph) -> ReachabilitySummary {
    let n = g.n;
    let mut access = g.adjacency.clone();
    for k in 0..n {
        for i in 0..n {
            if access[i * n + k] {
                for j in 0..n {
                    if access[k * n + j] {
                        access[i * n + j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        access[i * n + i] = true;
    }

    let mut distance = vec![None; n * n];
    let mut queue = VecDeque::new();
    for src in 0..n {
        distance[src * n + src] = Some(0);
        queue.clear();
        // Seed with direct arcs so a self-loop distance stays 0 by convention.
        for j in g.out_neighbors(src) {
            if j != src && distance[src * n + j].is_none() {
                distance[src * n + j] = Some(1);
                queue.push_back(j);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = distance[src * n + u].unwrap();
            for v in g.out_neighbors(u) {
                if v != src && distance[src * n + v].is_none() {
                    distance[src * n + v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    ReachabilitySummary {
        n,
        access,
        distance,
    }
}

/// Partition of the vertex set into strong components plus their condensation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPartition {
    pub component_of: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub condensation: Digraph,
}

/// Strong components by Tarjan traversal; components are ordered by their
/// smallest vertex index rather than discovery order.
pub fn strong_components(g: &Digraph) -> ComponentPartition {
    let n = g.n;
    let mut state = TarjanState {
        next_index: 0,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        components: Vec::new(),
    };
    for v in 0..n {
        if state.index[v].is_none() {
            strongconnect(g, v, &mut state);
        }
    }

    let mut components = state.components;
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (id, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = id;
        }
    }

    let m = components.len();
    let mut cond_adj = vec![false; m * m];
    for i in 0..n {
        for j in g.out_neighbors(i) {
            let (ci, cj) = (component_of[i], component_of[j]);
            if ci != cj {
                cond_adj[ci * m + cj] = true;
            }
        }
    }
    let cond_labels = components
        .iter()
        .map(|c| g.labels[c[0]].clone())
        .collect();
    let condensation = Digraph {
        n: m,
        labels: cond_labels,
        adjacency: cond_adj,
        weights: None,
    };
    ComponentPartition {
        component_of,
        components,
        condensation,
    }
}

struct TarjanState {
    next_index: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    components: Vec<Vec<usize>>,
}

fn strongconnect(g: &Digraph, v: usize, state: &mut TarjanState) {
    state.index[v] = Some(state.next_index);
    state.low[v] = state.next_index;
    state.next_index += 1;
    state.stack.push(v);
    state.on_stack[v] = true;

    for w in g.out_neighbors(v) {
        if state.index[w].is_none() {
            strongconnect(g, w, state);
            state.low[v] = state.low[v].min(state.low[w]);
        } else if state.on_stack[w] {
            state.low[v] = state.low[v].min(state.index[w].unwrap());
        }
    }

    if state.low[v] == state.index[v].unwrap() {
        let mut comp = Vec::new();
        loop {
            let w = state.stack.pop().expect("tarjan stack underflow");
            state.on_stack[w] = false;
            comp.push(w);
            if w == v {
                break;
            }
        }
        state.components.push(comp);
    }
}

/// Strong components recovered from the accessibility matrix via the
/// `S = R * R^T` construction. Cubic in the closure; kept as the reference
/// route that tests cross-assert against [`strong_components`].
pub fn strong_components_from_reachability(r: &ReachabilitySummary) -> Vec<Vec<usize>> {
    let n = r.n;
    let mut component_of = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if component_of[i] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut comp = Vec::new();
        for j in 0..n {
            // S_ij = R_ij * R_ji
            if r.reachable(i, j) && r.reachable(j, i) {
                component_of[j] = id;
                comp.push(j);
            }
        }
        components.push(comp);
    }
    components
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Transient,
    Recurrent,
    Absorbing,
}

impl StateKind {
    /// Absorbing states are recurrent.
    pub fn is_recurrent(self) -> bool {
        matches!(self, StateKind::Recurrent | StateKind::Absorbing)
    }
}

/// Per-state classification of a random walk on a weighted digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct StateClassification {
    pub kinds: Vec<StateKind>,
    pub closed_sets: Vec<Vec<usize>>,
}

impl StateClassification {
    pub fn absorbing_states(&self) -> Vec<usize> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == StateKind::Absorbing)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn transient_states(&self) -> Vec<usize> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == StateKind::Transient)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Classifies the states of a row-stochastic walk: recurrent iff the state's
/// strong component is closed, absorbing iff it is a singleton closed
/// component whose self-loop carries probability one.
pub fn classify_states(g: &Digraph) -> Result<StateClassification, GraphError> {
    let weights = g.weights.as_ref().ok_or(GraphError::MissingWeights)?;
    for i in 0..g.n {
        let sum: f64 = weights.row(i).iter().sum();
        if (sum - 1.0).abs() > STATE_STOCHASTIC_TOL {
            return Err(GraphError::NotStochastic { row: i, sum });
        }
    }
    let partition = strong_components(g);
    let mut closed = vec![true; partition.components.len()];
    for i in 0..g.n {
        for j in g.out_neighbors(i) {
            if partition.component_of[i] != partition.component_of[j] {
                closed[partition.component_of[i]] = false;
            }
        }
    }
    let mut kinds = vec![StateKind::Transient; g.n];
    let mut closed_sets = Vec::new();
    for (id, comp) in partition.components.iter().enumerate() {
        if !closed[id] {
            continue;
        }
        closed_sets.push(comp.clone());
        let absorbing =
            comp.len() == 1 && weights.get(comp[0], comp[0]) >= 1.0 - STATE_STOCHASTIC_TOL;
        for &v in comp {
            kinds[v] = if absorbing {
                StateKind::Absorbing
            } else {
                StateKind::Recurrent
            };
        }
    }
    Ok(StateClassification { kinds, closed_sets })
}

/// Subgraph retaining arcs whose weight strictly exceeds `threshold`.
///
/// The fair-division threshold for an augmented chain on `n + 1` states is
/// `1 / (n + 1)`. An unweighted graph filters down to the empty arc set.
pub fn essential_flows(g: &Digraph, threshold: f64) -> Digraph {
    let n = g.n;
    let mut adjacency = vec![false; n * n];
    let mut masked = Matrix::zeros(n, n);
    if let Some(w) = &g.weights {
        for i in 0..n {
            for j in 0..n {
                if g.arc(i, j) && w.get(i, j) > threshold {
                    adjacency[i * n + j] = true;
                    masked.set(i, j, w.get(i, j));
                }
            }
        }
    }
    Digraph {
        n,
        labels: g.labels.clone(),
        adjacency,
        weights: Some(masked),
    }
}
