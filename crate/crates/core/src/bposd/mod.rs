//! Belief propagation with ordered-statistics post-processing.
//!
//! The X and Z parts of the error are decoded independently: the X part
//! from the Z-type checks with priors `p_x + p_y`, the Z part from the
//! X-type checks with priors `p_z + p_y`.

pub mod bp;
pub mod osd;

use crate::bits::BitVec;
use crate::code::{CheckKind, RotatedPlanarCode, Syndrome};
use crate::error::{check_len, invalid, Result};
use crate::noise::NoiseModel;
use crate::pauli::PauliOperator;

pub use bp::{bp_decode, bp_run, BpResult, BpState, TannerGraph};
pub use osd::{osd0, osd_w, osd_w_candidates, reliability_order};

const PRIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsdMode {
    /// Plain BP: the hard decision is returned even when it fails the syndrome.
    None,
    Osd0,
    OsdW(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpOsdConfig {
    pub max_iter: usize,
    pub osd: OsdMode,
}

impl Default for BpOsdConfig {
    fn default() -> Self {
        Self {
            max_iter: 30,
            osd: OsdMode::Osd0,
        }
    }
}

impl BpOsdConfig {
    pub const DEFAULT_ORDER: usize = 4;

    pub fn bp() -> Self {
        Self {
            osd: OsdMode::None,
            ..Self::default()
        }
    }

    pub fn osd0() -> Self {
        Self::default()
    }

    pub fn osd_w(w: usize) -> Self {
        Self {
            osd: OsdMode::OsdW(w),
            ..Self::default()
        }
    }
}

/// Decode one binary problem `H e = s`.
pub fn decode_binary(h: &[BitVec], syndrome: &BitVec, priors: &[f64], config: &BpOsdConfig) -> Result<BitVec> {
    if config.max_iter == 0 {
        return Err(invalid("BP needs at least one iteration"));
    }
    let r = bp_decode(h, syndrome, priors, config.max_iter)?;
    if r.converged {
        return Ok(r.hard_decision);
    }
    match config.osd {
        OsdMode::None => Ok(r.hard_decision),
        OsdMode::Osd0 => osd0(h, syndrome, &r.posteriors),
        OsdMode::OsdW(w) => {
            let free = h.first().map_or(0, |row| row.len()) - crate::gf2::rank(h);
            osd_w(h, syndrome, &r.posteriors, w.min(free))
        }
    }
}

/// Per-qubit flip priors for one binary problem. Erased qubits carry a
/// uniformly random Pauli, so each component flips with probability 1/2.
pub fn binary_priors(noise: &NoiseModel, kind: CheckKind, erased: Option<&BitVec>) -> Vec<f64> {
    noise
        .per_qubit()
        .iter()
        .enumerate()
        .map(|(q, c)| {
            if erased.is_some_and(|e| e.get(q)) {
                return 0.5;
            }
            let p = match kind {
                CheckKind::X => c.p_z + c.p_y,
                CheckKind::Z => c.p_x + c.p_y,
            };
            p.clamp(PRIOR_FLOOR, 1.0 - PRIOR_FLOOR)
        })
        .collect()
}

pub fn decode_bposd(
    code: &RotatedPlanarCode,
    syndrome: &Syndrome,
    noise: &NoiseModel,
    erased: Option<&BitVec>,
    config: &BpOsdConfig,
) -> Result<PauliOperator> {
    check_len(code.n(), noise.n())?;
    check_len(code.num_checks(), syndrome.len())?;
    if let Some(e) = erased {
        check_len(code.n(), e.len())?;
    }
    let x_part = decode_binary(code.h_z(), &syndrome.z_checks(), &binary_priors(noise, CheckKind::Z, erased), config)?;
    let z_part = decode_binary(code.h_x(), &syndrome.x_checks(), &binary_priors(noise, CheckKind::X, erased), config)?;
    PauliOperator::from_parts(x_part, z_part)
}
