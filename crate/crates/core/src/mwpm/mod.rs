//! Minimum-weight perfect matching decoder.
//!
//! Each check kind gets its own defect graph: one node per triggered check,
//! one virtual node per defect (joined to its defect with the distance to the
//! nearer virtual boundary), and zero-weight edges between all virtual nodes.

pub mod blossom;

use crate::bits::BitVec;
use crate::code::{CheckKind, RotatedPlanarCode, Syndrome};
use crate::error::{check_len, invalid, Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::PauliOperator;

/// Float weights are mapped to integers with this resolution before matching.
const WEIGHT_SCALE: f64 = (1u64 << 20) as f64;
const MIN_LOG_WEIGHT: f64 = 1e-4;
const MAX_LOG_WEIGHT: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DefectEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    /// Qubits whose flips realise this edge.
    pub path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectGraph {
    pub kind: CheckKind,
    /// Local check indices of the defects; node `i < k` is `defects[i]` and
    /// node `k + i` is its virtual partner.
    pub defects: Vec<usize>,
    pub edges: Vec<DefectEdge>,
}

impl DefectGraph {
    pub fn num_nodes(&self) -> usize {
        2 * self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn is_virtual(&self, node: usize) -> bool {
        node >= self.defects.len()
    }

    pub fn edge(&self, u: usize, v: usize) -> Option<&DefectEdge> {
        self.edges.iter().find(|e| (e.u, e.v) == (u, v) || (e.u, e.v) == (v, u))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Pairs `(u, v)` with `u < v`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: f64,
}

/// Per-qubit weights for shortest paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeWeights {
    /// Every qubit costs 1.
    #[default]
    Unit,
    /// `ln((1 - q) / q)` with `q` the probability of the qubit flipping the
    /// checks of the graph.
    LogLikelihood,
}

fn log_odds_weight(q: f64) -> f64 {
    if q <= 0.0 {
        return MAX_LOG_WEIGHT;
    }
    ((1.0 - q) / q).ln().clamp(MIN_LOG_WEIGHT, MAX_LOG_WEIGHT)
}

/// Per-qubit weights for the graph built from checks of `kind`.
pub fn qubit_weights(kind: CheckKind, noise: &NoiseModel, mode: EdgeWeights) -> Vec<f64> {
    match mode {
        EdgeWeights::Unit => vec![1.0; noise.n()],
        EdgeWeights::LogLikelihood => noise
            .per_qubit()
            .iter()
            .map(|c| match kind {
                CheckKind::X => log_odds_weight(c.p_z + c.p_y),
                CheckKind::Z => log_odds_weight(c.p_x + c.p_y),
            })
            .collect(),
    }
}

fn validate_weights(code: &RotatedPlanarCode, weights: &[f64]) -> Result<()> {
    check_len(code.n(), weights.len())?;
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(invalid(format!("qubit weights must be positive and finite, found {w}")));
    }
    Ok(())
}

/// Defect graph for checks of `kind`.
pub fn build_defect_graph(code: &RotatedPlanarCode, kind: CheckKind, triggered: &BitVec, weights: &[f64]) -> Result<DefectGraph> {
    validate_weights(code, weights)?;
    let lattice = code.lattice(kind);
    check_len(lattice.num_checks(), triggered.len())?;
    let defects: Vec<usize> = triggered.ones().collect();
    let k = defects.len();
    let mut edges = Vec::with_capacity(k * k);
    for (i, &di) in defects.iter().enumerate() {
        let sp = lattice.shortest_paths(di, weights);
        for (j, &dj) in defects.iter().enumerate().skip(i + 1) {
            edges.push(DefectEdge {
                u: i,
                v: j,
                weight: sp.dist(dj),
                path: sp.path(dj),
            });
        }
        let (b0, b1) = (lattice.boundary_node(0), lattice.boundary_node(1));
        let side = if sp.dist(b1) < sp.dist(b0) { b1 } else { b0 };
        edges.push(DefectEdge {
            u: i,
            v: k + i,
            weight: sp.dist(side),
            path: sp.path(side),
        });
    }
    for i in 0..k {
        for j in i + 1..k {
            edges.push(DefectEdge {
                u: k + i,
                v: k + j,
                weight: 0.0,
                path: Vec::new(),
            });
        }
    }
    Ok(DefectGraph { kind, defects, edges })
}

/// Defect graphs for the X-type and Z-type checks, in that order.
pub fn build_defect_graphs(
    code: &RotatedPlanarCode,
    syndrome: &Syndrome,
    weights_x: &[f64],
    weights_z: &[f64],
) -> Result<(DefectGraph, DefectGraph)> {
    check_len(code.num_checks(), syndrome.len())?;
    Ok((
        build_defect_graph(code, CheckKind::X, &syndrome.x_checks(), weights_x)?,
        build_defect_graph(code, CheckKind::Z, &syndrome.z_checks(), weights_z)?,
    ))
}

/// Exact minimum-weight perfect matching.
///
/// Weights are quantised to `2^-20` and solved as a maximum-cardinality,
/// maximum-weight matching of `C - w`. Among equal-weight optima the result
/// is fixed by the edge order of the graph.
pub fn min_weight_perfect_matching(g: &DefectGraph) -> Result<Matching> {
    let n = g.num_nodes();
    if n % 2 == 1 {
        return Err(Error::ContractViolation(format!("odd node count {n}")));
    }
    if n == 0 {
        return Ok(Matching {
            pairs: Vec::new(),
            total_weight: 0.0,
        });
    }
    let scaled: Vec<i64> = g.edges.iter().map(|e| (e.weight * WEIGHT_SCALE).round() as i64).collect();
    let cap = scaled.iter().copied().max().unwrap_or(0) + 1;
    let int_edges: Vec<(usize, usize, i64)> = g.edges.iter().zip(&scaled).map(|(e, &w)| (e.u, e.v, cap - w)).collect();
    let mate = blossom::max_weight_matching(n, &int_edges, true);
    let mut pairs = Vec::with_capacity(n / 2);
    for (u, m) in mate.iter().enumerate() {
        match m {
            Some(v) if u < *v => pairs.push((u, *v)),
            Some(_) => {}
            None => return Err(Error::ContractViolation(format!("node {u} left unmatched"))),
        }
    }
    let total_weight = pairs.iter().map(|&(u, v)| g.edge(u, v).unwrap().weight).sum();
    Ok(Matching { pairs, total_weight })
}

/// Qubits flipped by the matched paths, as a bit vector.
fn matched_flips(code: &RotatedPlanarCode, g: &DefectGraph, m: &Matching) -> BitVec {
    let mut flips = BitVec::zeros(code.n());
    for &(u, v) in &m.pairs {
        for &q in &g.edge(u, v).unwrap().path {
            flips.flip(q);
        }
    }
    flips
}

/// Corrections flipping the X-type checks (a Z part) and the Z-type checks
/// (an X part).
fn decode_kind(code: &RotatedPlanarCode, kind: CheckKind, triggered: &BitVec, weights: &[f64]) -> Result<BitVec> {
    let g = build_defect_graph(code, kind, triggered, weights)?;
    let m = min_weight_perfect_matching(&g)?;
    Ok(matched_flips(code, &g, &m))
}

/// Matching decoder with explicit per-qubit weights for each graph.
pub fn decode_mwpm_weighted(code: &RotatedPlanarCode, syndrome: &Syndrome, weights_x: &[f64], weights_z: &[f64]) -> Result<PauliOperator> {
    check_len(code.num_checks(), syndrome.len())?;
    let z_part = decode_kind(code, CheckKind::X, &syndrome.x_checks(), weights_x)?;
    let x_part = decode_kind(code, CheckKind::Z, &syndrome.z_checks(), weights_z)?;
    PauliOperator::from_parts(x_part, z_part)
}

/// Standard matching decoder. X and Z graphs are solved independently.
pub fn decode_mwpm(code: &RotatedPlanarCode, syndrome: &Syndrome, noise: &NoiseModel, mode: EdgeWeights) -> Result<PauliOperator> {
    check_len(code.n(), noise.n())?;
    let wx = qubit_weights(CheckKind::X, noise, mode);
    let wz = qubit_weights(CheckKind::Z, noise, mode);
    decode_mwpm_weighted(code, syndrome, &wx, &wz)
}

/// Two-pass decoder that reweights the Z-error graph with the X correction.
///
/// Pass one matches the Z-type checks with the graph's ordinary weights,
/// giving the X part. Pass two matches the X-type checks with
/// `-ln(q / (1 - q))` where `q = p_y / (p_x + p_y)` on qubits carrying an X
/// correction and `q = p_z` elsewhere. Qubits with `p_x + p_y == 0` keep
/// their first-pass weights.
pub fn correlated_two_pass(code: &RotatedPlanarCode, syndrome: &Syndrome, noise: &NoiseModel, mode: EdgeWeights) -> Result<PauliOperator> {
    check_len(code.n(), noise.n())?;
    check_len(code.num_checks(), syndrome.len())?;
    let wz = qubit_weights(CheckKind::Z, noise, mode);
    let x_part = decode_kind(code, CheckKind::Z, &syndrome.z_checks(), &wz)?;

    let base = qubit_weights(CheckKind::X, noise, mode);
    let wx: Vec<f64> = noise
        .per_qubit()
        .iter()
        .enumerate()
        .map(|(q, c)| {
            let xy = c.p_x + c.p_y;
            if xy <= 0.0 {
                base[q]
            } else if x_part.get(q) {
                log_odds_weight(c.p_y / xy)
            } else {
                log_odds_weight(c.p_z)
            }
        })
        .collect();
    let z_part = decode_kind(code, CheckKind::X, &syndrome.x_checks(), &wx)?;
    PauliOperator::from_parts(x_part, z_part)
}
