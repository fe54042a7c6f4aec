//! Check lattices used by the graph decoders.
//!
//! For one check kind, nodes are the checks of that kind (local indices
//! `0..m`) plus two boundary nodes `m` and `m + 1` for the two sides hosting
//! virtual checks. Every data qubit is an edge: it touches one or two checks
//! of the kind, and a qubit touching only one check runs to the boundary node
//! of its side.

use crate::code::{Check, CheckKind, Side};

/// Far end of a qubit edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Check(usize),
    /// Index into the lattice's two boundary sides.
    Boundary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitEdge {
    pub qubit: usize,
    pub a: usize,
    pub b: Endpoint,
}

#[derive(Debug, Clone)]
pub struct DecodingLattice {
    kind: CheckKind,
    num_checks: usize,
    sides: [Side; 2],
    edges: Vec<QubitEdge>,
    incident: Vec<Vec<usize>>,
}

fn side_of(d: usize, qubit: usize, sides: [Side; 2]) -> usize {
    let (r, c) = (qubit / d, qubit % d);
    let on = |s: Side| match s {
        Side::Top => r == 0,
        Side::Bottom => r == d - 1,
        Side::Left => c == 0,
        Side::Right => c == d - 1,
    };
    if on(sides[0]) {
        0
    } else {
        assert!(on(sides[1]), "qubit {qubit} with a single check is not on a virtual side");
        1
    }
}

impl DecodingLattice {
    pub(crate) fn build(d: usize, kind: CheckKind, checks: &[Check], sides: [Side; 2]) -> Self {
        let n = d * d;
        let m = checks.len();
        let mut owners: Vec<Vec<usize>> = vec![Vec::with_capacity(2); n];
        for (ci, c) in checks.iter().enumerate() {
            for &q in &c.support {
                owners[q].push(ci);
            }
        }
        let mut edges = Vec::with_capacity(n);
        let mut incident = vec![Vec::new(); m + 2];
        for (q, own) in owners.iter().enumerate() {
            let edge = match own.as_slice() {
                [a] => QubitEdge {
                    qubit: q,
                    a: *a,
                    b: Endpoint::Boundary(side_of(d, q, sides)),
                },
                [a, b] => QubitEdge {
                    qubit: q,
                    a: *a,
                    b: Endpoint::Check(*b),
                },
                other => panic!("qubit {q} lies in {} checks of one kind", other.len()),
            };
            incident[edge.a].push(q);
            let far = match edge.b {
                Endpoint::Check(b) => b,
                Endpoint::Boundary(s) => m + s,
            };
            incident[far].push(q);
            edges.push(edge);
        }
        Self {
            kind,
            num_checks: m,
            sides,
            edges,
            incident,
        }
    }

    pub fn kind(&self) -> CheckKind {
        self.kind
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    /// Checks plus the two boundary nodes.
    pub fn num_nodes(&self) -> usize {
        self.num_checks + 2
    }

    pub fn sides(&self) -> [Side; 2] {
        self.sides
    }

    pub fn boundary_node(&self, side: usize) -> usize {
        self.num_checks + side
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        node >= self.num_checks
    }

    /// Edges indexed by qubit.
    pub fn edges(&self) -> &[QubitEdge] {
        &self.edges
    }

    /// Node pair of qubit `q`, boundary sides mapped to node ids.
    pub fn endpoints(&self, q: usize) -> (usize, usize) {
        let e = &self.edges[q];
        let b = match e.b {
            Endpoint::Check(b) => b,
            Endpoint::Boundary(s) => self.num_checks + s,
        };
        (e.a, b)
    }

    /// Qubits incident to `node`, ascending.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    /// Single-source shortest paths over the lattice with per-qubit weights.
    ///
    /// Boundary nodes are sinks: paths end there but never pass through.
    /// Equal-length alternatives resolve to the lowest `(node, qubit)`
    /// predecessor.
    pub fn shortest_paths(&self, source: usize, weights: &[f64]) -> ShortestPaths {
        let v = self.num_nodes();
        let mut dist = vec![f64::INFINITY; v];
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; v];
        let mut done = vec![false; v];
        dist[source] = 0.0;
        loop {
            let mut u = usize::MAX;
            for i in 0..v {
                if !done[i] && dist[i].is_finite() && (u == usize::MAX || dist[i] < dist[u]) {
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if self.is_boundary(u) && u != source {
                continue;
            }
            for &q in &self.incident[u] {
                let (a, b) = self.endpoints(q);
                let w = if a == u { b } else { a };
                if done[w] {
                    continue;
                }
                let nd = dist[u] + weights[q];
                let better = nd < dist[w] || (nd == dist[w] && pred[w].is_some_and(|p| (u, q) < p));
                if better {
                    dist[w] = nd;
                    pred[w] = Some((u, q));
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }
}

/// Shortest-path tree from one source.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    source: usize,
    dist: Vec<f64>,
    pred: Vec<Option<(usize, usize)>>,
}

impl ShortestPaths {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn dist(&self, node: usize) -> f64 {
        self.dist[node]
    }

    /// Qubits on the path from the source to `target`, target end first.
    pub fn path(&self, target: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = target;
        while cur != self.source {
            let (p, q) = self.pred[cur].expect("target unreachable from source");
            out.push(q);
            cur = p;
        }
        out
    }
}
