//! Tensor-network maximum-likelihood decoder.
//!
//! A coset probability is a sum over the stabilizer group. Each plaquette
//! carries a binary variable saying whether its check is applied, and each
//! data qubit is a four-index factor over the plaquettes at its corners
//! holding the probability of the resulting Pauli. Plaquette columns are
//! carried left to right as an MPS; each qubit column acts as an MPO of bond
//! dimension 4 that copies the plaquette row variables down the column.

pub mod exact;
pub mod mps;

use crate::bits::BitVec;
use crate::code::{CheckKind, LogicalClass, RotatedPlanarCode, Syndrome};
use crate::error::{check_len, invalid, Result};
use crate::noise::NoiseModel;
use crate::pauli::{Pauli, PauliOperator};

pub use exact::{decode_exact, exact_coset_probabilities, MAX_GENERATORS};
use mps::{Mps, MpoSite};

const ARGMAX_TIE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnConfig {
    pub chi: usize,
    /// Singular values below `cutoff` times the largest are dropped.
    pub cutoff: f64,
}

impl TnConfig {
    pub const DEFAULT_CHI: usize = 16;

    pub fn with_chi(chi: usize) -> Self {
        Self { chi, ..Self::default() }
    }
}

impl Default for TnConfig {
    fn default() -> Self {
        Self {
            chi: Self::DEFAULT_CHI,
            cutoff: 1e-14,
        }
    }
}

/// Unnormalized coset probabilities; the value for class `L` is
/// `get(L) * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosetProbabilities {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub log_scale: f64,
}

impl CosetProbabilities {
    /// Combine per-class `(mantissa, log_scale)` pairs onto a shared scale.
    /// Negative mantissas from truncation are clipped to zero.
    pub fn from_scaled(parts: [(f64, f64); 4]) -> Self {
        let live = parts.iter().filter(|(m, _)| *m > 0.0);
        let common = live.map(|(m, s)| m.ln() + s).fold(f64::NEG_INFINITY, f64::max);
        let common = if common.is_finite() { common } else { 0.0 };
        let v = |(m, s): (f64, f64)| if m > 0.0 { (m.ln() + s - common).exp() } else { 0.0 };
        Self {
            p_i: v(parts[0]),
            p_x: v(parts[1]),
            p_y: v(parts[2]),
            p_z: v(parts[3]),
            log_scale: common,
        }
    }

    pub fn get(&self, class: LogicalClass) -> f64 {
        match class {
            LogicalClass::I => self.p_i,
            LogicalClass::X => self.p_x,
            LogicalClass::Y => self.p_y,
            LogicalClass::Z => self.p_z,
        }
    }

    /// Natural log of the absolute probability of `class`.
    pub fn ln(&self, class: LogicalClass) -> f64 {
        self.get(class).ln() + self.log_scale
    }

    /// Most probable class; values within a relative `1e-8` tie, and ties
    /// resolve in the order I, X, Z, Y.
    pub fn argmax(&self) -> LogicalClass {
        let mut best = LogicalClass::I;
        for c in [LogicalClass::X, LogicalClass::Z, LogicalClass::Y] {
            if self.get(c) > self.get(best) * (1.0 + ARGMAX_TIE) {
                best = c;
            }
        }
        best
    }

    /// Largest relative deviation between matching classes, measured
    /// against the larger of the two values.
    pub fn max_relative_deviation(&self, other: &Self) -> f64 {
        LogicalClass::ALL
            .iter()
            .map(|&c| {
                let (a, b) = (self.ln(c), other.ln(c));
                if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
                    0.0
                } else {
                    let hi = a.max(b);
                    ((a - hi).exp() - (b - hi).exp()).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Per-qubit Pauli probabilities indexed by `2 * x + z`. Erased qubits are
/// uniform.
pub(crate) fn qubit_tables(noise: &NoiseModel, erased: Option<&BitVec>) -> Vec<[f64; 4]> {
    noise
        .per_qubit()
        .iter()
        .enumerate()
        .map(|(q, c)| {
            if erased.is_some_and(|e| e.get(q)) {
                [0.25; 4]
            } else {
                [c.prob(Pauli::I), c.prob(Pauli::Z), c.prob(Pauli::X), c.prob(Pauli::Y)]
            }
        })
        .collect()
}

/// A correction reproducing the syndrome: every defect is joined to the
/// nearer virtual boundary of its lattice by a shortest chain, ties to the
/// first side.
pub fn build_erec(code: &RotatedPlanarCode, syndrome: &Syndrome) -> Result<PauliOperator> {
    check_len(code.num_checks(), syndrome.len())?;
    let unit = vec![1.0; code.n()];
    let mut parts = [BitVec::zeros(code.n()), BitVec::zeros(code.n())];
    for (slot, kind) in [(1, CheckKind::X), (0, CheckKind::Z)] {
        let lattice = code.lattice(kind);
        let (b0, b1) = (lattice.boundary_node(0), lattice.boundary_node(1));
        for c in syndrome.segment(kind).ones() {
            let sp = lattice.shortest_paths(c, &unit);
            let target = if sp.dist(b1) < sp.dist(b0) { b1 } else { b0 };
            for q in sp.path(target) {
                parts[slot].flip(q);
            }
        }
    }
    let [x, z] = parts;
    PauliOperator::from_parts(x, z)
}

/// Plaquette kind at `(i, j)`, if a check lives there.
fn plaquette_kind(code: &RotatedPlanarCode, i: usize, j: usize) -> Option<CheckKind> {
    code.plaquette(i, j).map(|g| code.checks()[g].kind)
}

/// Operator for qubit column `c`: input legs are plaquette column `c`,
/// output legs plaquette column `c + 1`, sites are plaquette rows `0..=d`.
fn column_mpo(code: &RotatedPlanarCode, c: usize, op: &PauliOperator, tables: &[[f64; 4]]) -> Vec<MpoSite> {
    let d = code.d();
    let kinds = |i: usize| [plaquette_kind(code, i, c), plaquette_kind(code, i, c + 1)];
    // probability of qubit (r, c) given the four corner plaquette variables
    let factor = |r: usize, top: [usize; 2], bottom: [usize; 2]| -> f64 {
        let q = r * d + c;
        let (mut x, mut z) = op.get(q).bits();
        for (ks, bits) in [(kinds(r), top), (kinds(r + 1), bottom)] {
            for (k, b) in ks.iter().zip(bits) {
                if b == 1 {
                    match k {
                        Some(CheckKind::X) => x = !x,
                        Some(CheckKind::Z) => z = !z,
                        None => {}
                    }
                }
            }
        }
        tables[q][2 * x as usize + z as usize]
    };
    let allowed = |i: usize, out: usize| out == 0 || code.plaquette(i, c + 1).is_some();
    (0..=d)
        .map(|i| {
            let wl = if i == 0 { 1 } else { 4 };
            let wr = if i == d { 1 } else { 4 };
            let mut w = MpoSite::zeros(wl, wr);
            for input in 0..2 {
                for out in 0..2 {
                    if !allowed(i, out) {
                        continue;
                    }
                    let br = if i == d { 0 } else { input * 2 + out };
                    if i == 0 {
                        w.set(0, br, input, out, 1.0);
                        continue;
                    }
                    for bl in 0..4 {
                        let v = factor(i - 1, [bl / 2, bl % 2], [input, out]);
                        w.set(bl, br, input, out, v);
                    }
                }
            }
            w
        })
        .collect()
}

/// `(mantissa, log_scale)` of the total probability of the coset of `op`.
fn coset_weight(code: &RotatedPlanarCode, op: &PauliOperator, tables: &[[f64; 4]], config: &TnConfig) -> Result<(f64, f64)> {
    let d = code.d();
    let start: Vec<[f64; 2]> = (0..=d).map(|i| [1.0, if code.plaquette(i, 0).is_some() { 1.0 } else { 0.0 }]).collect();
    let mut state = Mps::product(&start);
    for c in 0..d {
        state.apply(&column_mpo(code, c, op, tables));
        // orthogonal sweeps cost accuracy on small components, so only
        // compress when a bond actually exceeds chi
        if state.max_bond() > config.chi {
            state.compress(config.chi, config.cutoff)?;
        }
        if !state.normalize() {
            return Ok((0.0, 0.0));
        }
    }
    Ok((state.contract(&vec![[1.0, 1.0]; d + 1]), state.log_scale()))
}

pub fn coset_probabilities_tn(
    code: &RotatedPlanarCode,
    e_rec: &PauliOperator,
    noise: &NoiseModel,
    erased: Option<&BitVec>,
    config: &TnConfig,
) -> Result<CosetProbabilities> {
    if config.chi == 0 {
        return Err(invalid("bond dimension must be at least 1"));
    }
    check_len(code.n(), e_rec.n())?;
    check_len(code.n(), noise.n())?;
    if let Some(e) = erased {
        check_len(code.n(), e.len())?;
    }
    let tables = qubit_tables(noise, erased);
    let mut parts = [(0.0, 0.0); 4];
    for (slot, class) in LogicalClass::ALL.into_iter().enumerate() {
        let op = e_rec.multiply(&code.logical(class))?;
        parts[slot] = coset_weight(code, &op, &tables, config)?;
    }
    Ok(CosetProbabilities::from_scaled(parts))
}

pub fn decode_tn(
    code: &RotatedPlanarCode,
    syndrome: &Syndrome,
    noise: &NoiseModel,
    erased: Option<&BitVec>,
    config: &TnConfig,
) -> Result<PauliOperator> {
    let e_rec = build_erec(code, syndrome)?;
    let probs = coset_probabilities_tn(code, &e_rec, noise, erased, config)?;
    e_rec.multiply(&code.logical(probs.argmax()))
}
