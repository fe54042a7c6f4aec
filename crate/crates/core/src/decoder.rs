//! Registry of decoders behind one interface.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitVec;
use crate::bposd::{decode_bposd, BpOsdConfig, OsdMode};
use crate::code::{CheckKind, RotatedPlanarCode, Syndrome};
use crate::error::{invalid, Error, Result};
use crate::mwpm::{correlated_two_pass, decode_mwpm_weighted, qubit_weights, EdgeWeights};
use crate::noise::NoiseModel;
use crate::pauli::PauliOperator;
use crate::tn::{decode_exact, decode_tn, TnConfig};
use crate::uf::decode_uf;

/// Matching weight given to erased qubits, which are free to carry any Pauli.
const ERASED_WEIGHT: f64 = 1e-4;

/// Anything that maps a syndrome (plus erasure flags) to a correction.
pub trait Decoder: Sync {
    fn decode(&self, syndrome: &Syndrome, erased: Option<&BitVec>) -> Result<PauliOperator>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderKind {
    Mwpm,
    MwpmCorr,
    Uf,
    Bp,
    Bposd0,
    BposdW,
    Tn,
    Exact,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 8] = [
        DecoderKind::Mwpm,
        DecoderKind::MwpmCorr,
        DecoderKind::Uf,
        DecoderKind::Bp,
        DecoderKind::Bposd0,
        DecoderKind::BposdW,
        DecoderKind::Tn,
        DecoderKind::Exact,
    ];

    pub fn id(self) -> &'static str {
        match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::MwpmCorr => "mwpm-corr",
            DecoderKind::Uf => "uf",
            DecoderKind::Bp => "bp",
            DecoderKind::Bposd0 => "bposd0",
            DecoderKind::BposdW => "bposdw",
            DecoderKind::Tn => "tn",
            DecoderKind::Exact => "exact",
        }
    }

    /// Largest distance the decoder accepts.
    pub fn max_distance(self) -> Option<usize> {
        match self {
            DecoderKind::Exact => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| invalid(format!("unknown decoder `{s}`")))
    }
}

/// Tunables shared by the registry; each decoder reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderParams {
    pub chi: usize,
    pub osd_order: usize,
    pub bp_iters: usize,
    pub weights: EdgeWeights,
}

impl Default for DecoderParams {
    fn default() -> Self {
        Self {
            chi: TnConfig::DEFAULT_CHI,
            osd_order: BpOsdConfig::DEFAULT_ORDER,
            bp_iters: BpOsdConfig::default().max_iter,
            weights: EdgeWeights::LogLikelihood,
        }
    }
}

/// A registered decoder bound to a code and a noise model.
#[derive(Debug, Clone)]
pub struct RegisteredDecoder<'a> {
    pub kind: DecoderKind,
    pub params: DecoderParams,
    code: &'a RotatedPlanarCode,
    noise: &'a NoiseModel,
}

impl<'a> RegisteredDecoder<'a> {
    pub fn new(kind: DecoderKind, params: DecoderParams, code: &'a RotatedPlanarCode, noise: &'a NoiseModel) -> Result<Self> {
        crate::error::check_len(code.n(), noise.n())?;
        if let Some(max) = kind.max_distance() {
            if code.d() > max {
                return Err(invalid(format!("decoder `{kind}` supports d <= {max}, got {}", code.d())));
            }
        }
        if kind == DecoderKind::Tn && params.chi == 0 {
            return Err(invalid("bond dimension must be at least 1"));
        }
        if matches!(kind, DecoderKind::Bp | DecoderKind::Bposd0 | DecoderKind::BposdW) && params.bp_iters == 0 {
            return Err(invalid("BP needs at least one iteration"));
        }
        Ok(Self { kind, params, code, noise })
    }

    fn bposd_config(&self) -> BpOsdConfig {
        let osd = match self.kind {
            DecoderKind::Bp => OsdMode::None,
            DecoderKind::BposdW => OsdMode::OsdW(self.params.osd_order),
            _ => OsdMode::Osd0,
        };
        BpOsdConfig {
            max_iter: self.params.bp_iters,
            osd,
        }
    }

    fn matching_weights(&self, kind: CheckKind, erased: Option<&BitVec>) -> Vec<f64> {
        let mut w = qubit_weights(kind, self.noise, self.params.weights);
        if let Some(e) = erased {
            for q in e.ones() {
                w[q] = ERASED_WEIGHT;
            }
        }
        w
    }
}

impl Decoder for RegisteredDecoder<'_> {
    fn decode(&self, syndrome: &Syndrome, erased: Option<&BitVec>) -> Result<PauliOperator> {
        let (code, noise) = (self.code, self.noise);
        match self.kind {
            DecoderKind::Mwpm => {
                let wx = self.matching_weights(CheckKind::X, erased);
                let wz = self.matching_weights(CheckKind::Z, erased);
                decode_mwpm_weighted(code, syndrome, &wx, &wz)
            }
            DecoderKind::MwpmCorr => correlated_two_pass(code, syndrome, noise, self.params.weights),
            DecoderKind::Uf => match erased {
                Some(e) => decode_uf(code, syndrome, e),
                None => decode_uf(code, syndrome, &BitVec::zeros(code.n())),
            },
            DecoderKind::Bp | DecoderKind::Bposd0 | DecoderKind::BposdW => {
                decode_bposd(code, syndrome, noise, erased, &self.bposd_config())
            }
            DecoderKind::Tn => decode_tn(code, syndrome, noise, erased, &TnConfig::with_chi(self.params.chi)),
            DecoderKind::Exact => decode_exact(code, syndrome, noise, erased),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::LogicalClass;
    use crate::noise::{sample_error, trial_rng};

    #[test]
    fn ids_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.id().parse::<DecoderKind>().unwrap(), k);
        }
        assert!("blossom".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn exact_is_limited_to_d3() {
        let code = RotatedPlanarCode::new(5).unwrap();
        let noise = NoiseModel::depolarizing(25, 0.1).unwrap();
        assert!(RegisteredDecoder::new(DecoderKind::Exact, DecoderParams::default(), &code, &noise).is_err());
    }

    #[test]
    fn every_decoder_corrects_single_qubit_errors_at_d3() {
        let code = RotatedPlanarCode::new(3).unwrap();
        let noise = NoiseModel::depolarizing(9, 0.05).unwrap();
        for kind in DecoderKind::ALL {
            let dec = RegisteredDecoder::new(kind, DecoderParams::default(), &code, &noise).unwrap();
            for q in 0..9 {
                for p in [crate::Pauli::X, crate::Pauli::Y, crate::Pauli::Z] {
                    let mut e = PauliOperator::identity(9);
                    e.set(q, p);
                    let s = code.syndrome(&e).unwrap();
                    let c = dec.decode(&s, None).unwrap();
                    let r = e.multiply(&c).unwrap();
                    // plain BP may stall on degenerate single errors
                    if kind == DecoderKind::Bp && !code.syndrome(&r).unwrap().is_trivial() {
                        continue;
                    }
                    assert_eq!(code.logical_class(&r).unwrap(), LogicalClass::I, "{kind} q={q} {p:?}");
                }
            }
        }
    }

    #[test]
    fn erasure_aware_decoders_match_syndrome() {
        let code = RotatedPlanarCode::new(5).unwrap();
        let params = crate::noise::PauliChannelParams::depolarizing(0.05).unwrap().with_erasure(0.1).unwrap();
        let noise = NoiseModel::iid(25, params);
        for kind in [DecoderKind::Mwpm, DecoderKind::Uf, DecoderKind::Bposd0, DecoderKind::Tn] {
            let dec = RegisteredDecoder::new(kind, DecoderParams::default(), &code, &noise).unwrap();
            for t in 0..300 {
                let e = sample_error(&noise, &mut trial_rng(9, t));
                let s = code.syndrome(&e.pauli).unwrap();
                let c = dec.decode(&s, Some(&e.erased)).unwrap();
                assert_eq!(code.syndrome(&c).unwrap(), s, "{kind}");
            }
        }
    }
}
