//! Union-Find decoder: cluster growth until every cluster is even or touches
//! the boundary, then peeling of a spanning forest of each cluster.
//!
//! The decoding graph of one check kind has a node per check plus one virtual
//! node per boundary qubit; every qubit is an edge. Erased qubits start out
//! absorbed.

use std::collections::VecDeque;

use crate::bits::BitVec;
use crate::code::{CheckKind, RotatedPlanarCode, Syndrome};
use crate::error::{check_len, Error, Result};
use crate::lattice::Endpoint;
use crate::pauli::PauliOperator;

/// Check-and-virtual graph of one check kind.
#[derive(Debug, Clone)]
pub struct UfGraph {
    num_checks: usize,
    num_nodes: usize,
    endpoints: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl UfGraph {
    pub fn new(code: &RotatedPlanarCode, kind: CheckKind) -> Self {
        let lattice = code.lattice(kind);
        let m = lattice.num_checks();
        let mut next_virtual = m;
        let endpoints: Vec<(usize, usize)> = lattice
            .edges()
            .iter()
            .map(|e| match e.b {
                Endpoint::Check(b) => (e.a, b),
                Endpoint::Boundary(_) => {
                    next_virtual += 1;
                    (e.a, next_virtual - 1)
                }
            })
            .collect();
        let mut incident = vec![Vec::new(); next_virtual];
        for (q, &(a, b)) in endpoints.iter().enumerate() {
            incident[a].push(q);
            incident[b].push(q);
        }
        Self {
            num_checks: m,
            num_nodes: next_virtual,
            endpoints,
            incident,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn is_virtual(&self, node: usize) -> bool {
        node >= self.num_checks
    }

    pub fn endpoints(&self, q: usize) -> (usize, usize) {
        self.endpoints[q]
    }

    pub fn num_edges(&self) -> usize {
        self.endpoints.len()
    }
}

/// Disjoint sets over graph nodes with per-root cluster data.
#[derive(Debug, Clone)]
pub struct ClusterForest {
    parent: Vec<usize>,
    rank: Vec<u8>,
    parity: Vec<bool>,
    boundary: Vec<bool>,
    /// Qubits absorbed into clusters.
    pub grown: BitVec,
    /// Number of half-edge growth rounds performed.
    pub rounds: usize,
}

impl ClusterForest {
    fn new(graph: &UfGraph, triggered: &BitVec) -> Self {
        let n = graph.num_nodes();
        let mut parity = vec![false; n];
        for c in triggered.ones() {
            parity[c] = true;
        }
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            parity,
            boundary: (0..n).map(|v| graph.is_virtual(v)).collect(),
            grown: BitVec::zeros(graph.num_edges()),
            rounds: 0,
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[v] != root {
            let next = self.parent[v];
            self.parent[v] = root;
            v = next;
        }
        root
    }

    /// Merge the sets of `a` and `b`; returns the surviving root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (hi, lo) = match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Equal => {
                // lower index keeps ownership on equal rank
                let (hi, lo) = if ra < rb { (ra, rb) } else { (rb, ra) };
                self.rank[hi] += 1;
                (hi, lo)
            }
        };
        self.parent[lo] = hi;
        self.parity[hi] ^= self.parity[lo];
        self.boundary[hi] |= self.boundary[lo];
        hi
    }

    pub fn parity(&mut self, v: usize) -> bool {
        let r = self.find(v);
        self.parity[r]
    }

    pub fn touches_boundary(&mut self, v: usize) -> bool {
        let r = self.find(v);
        self.boundary[r]
    }

    /// A cluster stops growing once it is even or reaches a virtual node.
    pub fn is_frozen(&mut self, v: usize) -> bool {
        let r = self.find(v);
        !self.parity[r] || self.boundary[r]
    }
}

/// Grow clusters around the triggered checks until all are frozen.
///
/// Growth is in half edges. Each round, every unfrozen cluster adds half an
/// edge to every qubit incident to it that is not yet absorbed (decided on
/// the state at the start of the round); a qubit between two growing
/// clusters thus gains a full edge. Qubits reaching a full edge are absorbed
/// and merge their endpoint clusters.
pub fn syndrome_validation(graph: &UfGraph, triggered: &BitVec, erased: &BitVec) -> Result<ClusterForest> {
    check_len(graph.num_checks(), triggered.len())?;
    check_len(graph.num_edges(), erased.len())?;
    let mut forest = ClusterForest::new(graph, triggered);
    let mut support = vec![0u8; graph.num_edges()];
    for q in erased.ones() {
        forest.grown.set(q, true);
        support[q] = 2;
        let (a, b) = graph.endpoints(q);
        forest.union(a, b);
    }
    loop {
        let mut active = vec![false; graph.num_nodes()];
        let mut any = false;
        for v in 0..graph.num_nodes() {
            let r = forest.find(v);
            if !forest.is_frozen(r) {
                active[r] = true;
                any = true;
            }
        }
        if !any {
            break;
        }
        let frozen_before: Vec<bool> = (0..graph.num_nodes())
            .map(|v| forest.find(v) == v && !active[v])
            .collect();
        let mut absorb = Vec::new();
        let mut grew = false;
        for q in 0..graph.num_edges() {
            if forest.grown.get(q) {
                continue;
            }
            let (a, b) = graph.endpoints(q);
            let (ra, rb) = (forest.find(a), forest.find(b));
            let inc = if ra == rb { 2 * active[ra] as u8 } else { active[ra] as u8 + active[rb] as u8 };
            if inc > 0 {
                grew = true;
                support[q] = (support[q] + inc).min(2);
                if support[q] == 2 {
                    absorb.push(q);
                }
            }
        }
        if !grew {
            return Err(Error::ContractViolation("active cluster with no room to grow".into()));
        }
        let mut merged = vec![false; graph.num_nodes()];
        for q in absorb {
            forest.grown.set(q, true);
            let (a, b) = graph.endpoints(q);
            let (ra, rb) = (forest.find(a), forest.find(b));
            merged[ra] = true;
            merged[rb] = true;
            forest.union(a, b);
        }
        for v in 0..graph.num_nodes() {
            if frozen_before[v] && !merged[v] {
                assert!(forest.is_frozen(v), "untouched frozen cluster {v} thawed");
            }
        }
        forest.rounds += 1;
    }
    Ok(forest)
}

/// Spanning trees over the absorbed qubits.
///
/// A cluster with an even number of triggered checks is corrected inside
/// itself: one tree rooted at its lowest check, virtual nodes only as leaves.
/// An odd cluster is split into one tree per virtual node it reached, each
/// rooted at that virtual node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningForest {
    pub roots: Vec<usize>,
    /// `(child, parent, qubit)` in breadth-first order.
    pub edges: Vec<(usize, usize, usize)>,
}

pub fn spanning_forest(graph: &UfGraph, grown: &BitVec, triggered: &BitVec) -> Result<SpanningForest> {
    check_len(graph.num_edges(), grown.len())?;
    check_len(graph.num_checks(), triggered.len())?;
    let n = graph.num_nodes();
    let grown_neighbours = |u: usize| {
        graph.incident[u].iter().filter(|&&q| grown.get(q)).map(move |&q| {
            let (a, b) = graph.endpoints(q);
            (q, if a == u { b } else { a })
        })
    };

    // clusters = connected components of the absorbed edges
    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..graph.num_checks {
        if comp[start] != usize::MAX || grown_neighbours(start).next().is_none() {
            continue;
        }
        let id = members.len();
        let mut list = vec![start];
        comp[start] = id;
        let mut i = 0;
        while i < list.len() {
            let u = list[i];
            i += 1;
            for (_, w) in grown_neighbours(u) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    list.push(w);
                }
            }
        }
        list.sort_unstable();
        members.push(list);
    }

    let mut visited = vec![false; n];
    let mut roots = Vec::new();
    let mut edges = Vec::new();
    for list in &members {
        let odd = list.iter().filter(|&&v| !graph.is_virtual(v) && triggered.get(v)).count() % 2 == 1;
        let virtuals: Vec<usize> = list.iter().copied().filter(|&v| graph.is_virtual(v)).collect();
        let seeds = if odd && !virtuals.is_empty() { virtuals } else { vec![list[0]] };
        for &r in &seeds {
            visited[r] = true;
        }
        roots.extend(&seeds);
        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(u) = queue.pop_front() {
            for (q, w) in grown_neighbours(u) {
                if !visited[w] {
                    visited[w] = true;
                    edges.push((w, u, q));
                    if !graph.is_virtual(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    Ok(SpanningForest { roots, edges })
}

/// Peel the forest leaves-first; returns the flipped qubits.
pub fn peel(graph: &UfGraph, forest: &SpanningForest, triggered: &BitVec) -> Result<BitVec> {
    check_len(graph.num_checks(), triggered.len())?;
    let n = graph.num_nodes();
    let mut marked = vec![false; n];
    for c in triggered.ones() {
        marked[c] = true;
    }
    let mut seen_child = vec![false; n];
    for &r in &forest.roots {
        seen_child[r] = true;
    }
    for &(child, _, _) in &forest.edges {
        if seen_child[child] {
            return Err(Error::ContractViolation(format!("node {child} appears twice in the forest")));
        }
        seen_child[child] = true;
    }
    let mut correction = BitVec::zeros(graph.num_edges());
    for &(child, parent, q) in forest.edges.iter().rev() {
        let (a, b) = graph.endpoints(q);
        if !((a, b) == (child, parent) || (a, b) == (parent, child)) {
            return Err(Error::ContractViolation(format!("qubit {q} does not join {child} and {parent}")));
        }
        if marked[child] {
            correction.flip(q);
            marked[child] = false;
            marked[parent] ^= true;
        }
    }
    if let Some(v) = (0..graph.num_checks).find(|&v| marked[v]) {
        return Err(Error::ContractViolation(format!("check {v} still flipped after peeling")));
    }
    Ok(correction)
}

fn decode_kind(code: &RotatedPlanarCode, kind: CheckKind, triggered: &BitVec, erased: &BitVec) -> Result<BitVec> {
    let graph = UfGraph::new(code, kind);
    let clusters = syndrome_validation(&graph, triggered, erased)?;
    let forest = spanning_forest(&graph, &clusters.grown, triggered)?;
    peel(&graph, &forest, triggered)
}

/// Union-Find decoding of both check kinds.
pub fn decode_uf(code: &RotatedPlanarCode, syndrome: &Syndrome, erased: &BitVec) -> Result<PauliOperator> {
    check_len(code.num_checks(), syndrome.len())?;
    check_len(code.n(), erased.len())?;
    let z_part = decode_kind(code, CheckKind::X, &syndrome.x_checks(), erased)?;
    let x_part = decode_kind(code, CheckKind::Z, &syndrome.z_checks(), erased)?;
    PauliOperator::from_parts(x_part, z_part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_code, LogicalClass};
    use crate::noise::{sample_error, trial_rng, NoiseModel, PauliChannelParams};
    use crate::pauli::Pauli;
    use rand::Rng;

    fn local(code: &RotatedPlanarCode, kind: CheckKind, e: &PauliOperator) -> BitVec {
        code.syndrome(e).unwrap().segment(kind)
    }

    #[test]
    fn union_find_axioms() {
        let code = build_code(5).unwrap();
        let g = UfGraph::new(&code, CheckKind::Z);
        let mut f = ClusterForest::new(&g, &BitVec::from_indices(12, [0, 3]));
        f.union(0, 1);
        f.union(2, 3);
        assert_eq!(f.find(0), f.find(1));
        assert_ne!(f.find(0), f.find(2));
        assert!(f.parity(1) && f.parity(2));
        let r = f.union(1, 2);
        for v in 0..4 {
            assert_eq!(f.find(v), r);
            let root = f.find(v);
            assert_eq!(f.find(root), root);
        }
        assert!(!f.parity(0));
        assert!(!f.touches_boundary(0));
        f.union(0, g.num_nodes() - 1);
        assert!(f.touches_boundary(3));
    }

    #[test]
    fn graph_has_one_virtual_per_boundary_qubit() {
        for d in [3, 5, 7] {
            let code = build_code(d).unwrap();
            for kind in [CheckKind::X, CheckKind::Z] {
                let g = UfGraph::new(&code, kind);
                assert_eq!(g.num_nodes() - g.num_checks(), 2 * d);
            }
        }
    }

    #[test]
    fn zero_syndrome_grows_nothing() {
        let code = build_code(5).unwrap();
        let g = UfGraph::new(&code, CheckKind::Z);
        let f = syndrome_validation(&g, &BitVec::zeros(12), &BitVec::zeros(25)).unwrap();
        assert!(f.grown.is_zero());
        assert_eq!(f.rounds, 0);
        assert!(decode_uf(&code, &Syndrome::zeros(&code), &BitVec::zeros(25)).unwrap().is_identity());
    }

    #[test]
    fn adjacent_defects_merge_in_one_half_step() {
        let d = 5;
        let code = build_code(d).unwrap();
        let e = PauliOperator::x_on(25, [2 * d + 2]);
        let trig = local(&code, CheckKind::Z, &e);
        assert_eq!(trig.count_ones(), 2);
        let g = UfGraph::new(&code, CheckKind::Z);
        let mut f = syndrome_validation(&g, &trig, &BitVec::zeros(25)).unwrap();
        assert_eq!(f.rounds, 1);
        assert_eq!(f.grown.ones().collect::<Vec<_>>(), vec![2 * d + 2]);
        let c = trig.ones().next().unwrap();
        assert!(f.is_frozen(c) && !f.touches_boundary(c));
    }

    #[test]
    fn two_close_defects_merge_in_one_full_edge() {
        // X on two horizontally adjacent bulk qubits lights two Z-checks two
        // lattice steps apart; two half steps join them through the check
        // they share with the middle.
        let d = 5;
        let code = build_code(d).unwrap();
        let e = PauliOperator::x_on(25, [2 * d + 1, 2 * d + 2]);
        let trig = local(&code, CheckKind::Z, &e);
        assert_eq!(trig.count_ones(), 2);
        let g = UfGraph::new(&code, CheckKind::Z);
        let mut f = syndrome_validation(&g, &trig, &BitVec::zeros(25)).unwrap();
        assert_eq!(f.rounds, 2);
        let defects: Vec<usize> = trig.ones().collect();
        assert_eq!(f.find(defects[0]), f.find(defects[1]));
        assert!(!f.parity(defects[0]));
        assert!(f.is_frozen(defects[0]));
    }

    #[test]
    fn defect_next_to_boundary_freezes_on_virtual() {
        let code = build_code(3).unwrap();
        let e = PauliOperator::x_on(9, [1]); // top row
        let trig = local(&code, CheckKind::Z, &e);
        assert_eq!(trig.count_ones(), 1);
        let g = UfGraph::new(&code, CheckKind::Z);
        let mut f = syndrome_validation(&g, &trig, &BitVec::zeros(9)).unwrap();
        assert_eq!(f.rounds, 2);
        let c = trig.ones().next().unwrap();
        assert!(f.touches_boundary(c) && f.parity(c));
    }

    #[test]
    fn two_node_peel() {
        let code = build_code(3).unwrap();
        let g = UfGraph::new(&code, CheckKind::Z);
        // find a qubit joining two checks, mark only one end
        let q = (0..9).find(|&q| !g.is_virtual(g.endpoints(q).1)).unwrap();
        let (a, b) = g.endpoints(q);
        let forest = SpanningForest {
            roots: vec![b],
            edges: vec![(a, b, q)],
        };
        let c = peel(&g, &forest, &BitVec::from_indices(4, [a, b])).unwrap();
        assert_eq!(c.ones().collect::<Vec<_>>(), vec![q]);
        let c = peel(&g, &forest, &BitVec::zeros(4)).unwrap();
        assert!(c.is_zero());
        // marked lone root: odd cluster without boundary
        assert!(peel(&g, &forest, &BitVec::from_indices(4, [a])).is_err());
        // repeated child
        let bad = SpanningForest {
            roots: vec![b],
            edges: vec![(a, b, q), (a, b, q)],
        };
        assert!(matches!(peel(&g, &bad, &BitVec::zeros(4)), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn spanning_forest_is_acyclic_and_spanning() {
        let code = build_code(7).unwrap();
        let g = UfGraph::new(&code, CheckKind::X);
        let mut rng = trial_rng(4, 0);
        for _ in 0..200 {
            let grown = BitVec::from_bools(&(0..49).map(|_| rng.random_bool(0.4)).collect::<Vec<_>>());
            let trig = BitVec::from_bools(&(0..g.num_checks()).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
            let f = spanning_forest(&g, &grown, &trig).unwrap();
            let mut touched = std::collections::BTreeSet::new();
            for q in grown.ones() {
                let (a, b) = g.endpoints(q);
                touched.insert(a);
                touched.insert(b);
            }
            let mut covered: Vec<usize> = f.roots.iter().copied().chain(f.edges.iter().map(|e| e.0)).collect();
            covered.sort();
            let before = covered.len();
            covered.dedup();
            assert_eq!(before, covered.len());
            assert_eq!(covered, touched.into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn all_weight_one_errors_at_d3() {
        let code = build_code(3).unwrap();
        for q in 0..9 {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let mut e = PauliOperator::identity(9);
                e.set(q, p);
                let s = code.syndrome(&e).unwrap();
                let c = decode_uf(&code, &s, &BitVec::zeros(9)).unwrap();
                assert_eq!(code.logical_class(&c.multiply(&e).unwrap()).unwrap(), LogicalClass::I);
            }
        }
    }

    #[test]
    fn corrects_every_same_type_error_up_to_half_distance() {
        let d = 7;
        let code = build_code(d).unwrap();
        let n = d * d;
        let mut sets: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
        for a in 0..n {
            for b in a + 1..n {
                sets.push(vec![a, b]);
                sets.extend((b + 1..n).map(|c| vec![a, b, c]));
            }
        }
        for set in sets {
            for e in [PauliOperator::x_on(n, set.iter().copied()), PauliOperator::z_on(n, set.iter().copied())] {
                let c = decode_uf(&code, &code.syndrome(&e).unwrap(), &BitVec::zeros(n)).unwrap();
                assert_eq!(code.logical_class(&c.multiply(&e).unwrap()).unwrap(), LogicalClass::I, "{set:?}");
            }
        }
    }

    #[test]
    fn syndrome_matches_with_and_without_erasures() {
        for d in [3, 5, 7] {
            let code = build_code(d).unwrap();
            let c = PauliChannelParams::depolarizing(0.12).unwrap().with_erasure(0.05).unwrap();
            let noise = NoiseModel::iid(d * d, c);
            for t in 0..500 {
                let sample = sample_error(&noise, &mut trial_rng(17, t));
                let s = code.syndrome(&sample.pauli).unwrap();
                let corr = decode_uf(&code, &s, &sample.erased).unwrap();
                assert_eq!(code.syndrome(&corr).unwrap(), s);
                let corr = decode_uf(&code, &s, &BitVec::zeros(d * d)).unwrap();
                assert_eq!(code.syndrome(&corr).unwrap(), s);
            }
        }
    }

    // Whether some operator of the given type supported on `set` is a
    // nontrivial logical.
    fn supports_logical(code: &RotatedPlanarCode, set: &[usize], x_type: bool) -> bool {
        (1u32..1 << set.len()).any(|mask| {
            let qs = set.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &q)| q);
            let op = if x_type {
                PauliOperator::x_on(code.n(), qs)
            } else {
                PauliOperator::z_on(code.n(), qs)
            };
            code.syndrome(&op).unwrap().is_trivial() && code.logical_class(&op).unwrap() != LogicalClass::I
        })
    }

    #[test]
    fn erasures_without_logical_support_never_fail() {
        let code = build_code(3).unwrap();
        let mut rng = trial_rng(8, 0);
        for mask in 0u32..(1 << 9) {
            let set: Vec<usize> = (0..9).filter(|q| mask >> q & 1 == 1).collect();
            let erased = BitVec::from_indices(9, set.iter().copied());
            let x_ok = !supports_logical(&code, &set, true);
            let z_ok = !supports_logical(&code, &set, false);
            for _ in 0..8 {
                let mut e = PauliOperator::identity(9);
                for &q in &set {
                    e.set(q, Pauli::ALL[rng.random_range(0..4)]);
                }
                let s = code.syndrome(&e).unwrap();
                let c = decode_uf(&code, &s, &erased).unwrap();
                let res = c.multiply(&e).unwrap();
                let class = code.logical_class(&res).unwrap();
                let (fx, fz) = class.components();
                assert!(!(fx && x_ok), "X failure on {set:?}");
                assert!(!(fz && z_ok), "Z failure on {set:?}");
            }
        }
    }

    #[test]
    fn pure_erasure_success_rate() {
        let code = build_code(5).unwrap();
        let noise = NoiseModel::iid(25, PauliChannelParams::noiseless().with_erasure(0.1).unwrap());
        let trials = 10_000;
        let mut ok = 0;
        for t in 0..trials {
            let sample = sample_error(&noise, &mut trial_rng(21, t));
            let s = code.syndrome(&sample.pauli).unwrap();
            let c = decode_uf(&code, &s, &sample.erased).unwrap();
            let res = c.multiply(&sample.pauli).unwrap();
            if code.logical_class(&res).unwrap() == LogicalClass::I {
                ok += 1;
            }
        }
        assert!(ok as f64 / trials as f64 > 0.99, "{ok}");
    }

    #[test]
    fn separated_clusters_at_d9_are_peeled_independently() {
        // Several well-separated short chains, one touching the boundary:
        // growth yields multiple clusters and the peeled correction must
        // differ from the input by a stabilizer.
        let d = 9;
        let code = build_code(d).unwrap();
        let at = |r: usize, c: usize| r * d + c;
        let e = PauliOperator::x_on(81, [at(1, 1), at(1, 2), at(4, 5), at(5, 5), at(8, 2), at(7, 7), at(7, 8)]);
        let trig = local(&code, CheckKind::Z, &e);
        let g = UfGraph::new(&code, CheckKind::Z);
        let clusters = syndrome_validation(&g, &trig, &BitVec::zeros(81)).unwrap();
        let forest = spanning_forest(&g, &clusters.grown, &trig).unwrap();
        assert!(forest.roots.len() >= 3, "{:?}", forest.roots);
        let corr = peel(&g, &forest, &trig).unwrap();
        let c = PauliOperator::from_parts(corr, BitVec::zeros(81)).unwrap();
        let res = c.multiply(&e).unwrap();
        assert_eq!(code.logical_class(&res).unwrap(), LogicalClass::I);
    }
}
