//! Single-qubit Pauli and erasure channels, and reproducible error sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitVec;
use crate::error::{invalid, Result};
use crate::pauli::{Pauli, PauliOperator};

/// Bias values at or above this are treated as pure dephasing.
pub const ETA_INFINITE: f64 = 1e9;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn twirl_radical(gamma: f64, lambda: f64) -> Result<f64> {
    check_unit("gamma", gamma)?;
    check_unit("lambda", lambda)?;
    let radicand = 1.0 - gamma - (1.0 - gamma) * lambda;
    if radicand < 0.0 {
        return Err(invalid(format!("negative radicand {radicand}")));
    }
    Ok(radicand.sqrt())
}

/// Pauli-twirled amplitude/phase damping channel, returned as `(p_x, p_y, p_z)`.
pub fn twirl_pta(gamma: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    let root = twirl_radical(gamma, lambda)?;
    let pxy = gamma / 4.0;
    let pz = ((2.0 - gamma - 2.0 * root) / 4.0).max(0.0);
    Ok((pxy, pxy, pz))
}

/// Clifford-twirled amplitude/phase damping channel (depolarizing).
pub fn twirl_cta(gamma: f64, lambda: f64) -> Result<(f64, f64, f64)> {
    let root = twirl_radical(gamma, lambda)?;
    let p = ((2.0 + gamma - 2.0 * root) / 12.0).max(0.0);
    Ok((p, p, p))
}

/// Damping and scattering parameters for idling time `t` with relaxation
/// time `t1` and dephasing time `t2`.
///
/// `gamma = 1 - exp(-t/T1)`, `lambda = 1 - exp(-2t/Tphi)` with
/// `1/Tphi = 1/T2 - 1/(2 T1)`.
pub fn damping_parameters(t: f64, t1: f64, t2: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0 && t1 > 0.0 && t2 > 0.0) {
        return Err(invalid(format!("need t >= 0, T1 > 0, T2 > 0 (got {t}, {t1}, {t2})")));
    }
    if t2 > 2.0 * t1 {
        return Err(invalid(format!("T2 = {t2} exceeds 2 T1 = {}", 2.0 * t1)));
    }
    let gamma = 1.0 - (-t / t1).exp();
    let inv_tphi = 1.0 / t2 - 1.0 / (2.0 * t1);
    let lambda = 1.0 - (-2.0 * t * inv_tphi).exp();
    Ok((gamma, lambda))
}

/// Split a total error probability `p` by bias `eta = p_z / (p_x + p_y)`
/// with `p_x == p_y`.
pub fn bias_split(p: f64, eta: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1), got {p}")));
    }
    if eta.is_nan() || eta < 0.0 {
        return Err(invalid(format!("eta must be >= 0, got {eta}")));
    }
    if eta >= ETA_INFINITE {
        return Ok((0.0, 0.0, p));
    }
    let pz = p * eta / (1.0 + eta);
    let pxy = p / (2.0 * (1.0 + eta));
    Ok((pxy, pxy, pz))
}

/// One qubit's channel. `p_e` is the erasure probability; the Pauli
/// probabilities apply to qubits that were not erased.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannelParams {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub p_e: f64,
}

impl PauliChannelParams {
    pub fn new(p_x: f64, p_y: f64, p_z: f64, p_e: f64) -> Result<Self> {
        for (name, v) in [("p_x", p_x), ("p_y", p_y), ("p_z", p_z), ("p_e", p_e)] {
            check_unit(name, v)?;
        }
        let total = p_x + p_y + p_z + p_e;
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("channel probabilities sum to {total} > 1")));
        }
        Ok(Self { p_x, p_y, p_z, p_e })
    }

    pub fn noiseless() -> Self {
        Self {
            p_x: 0.0,
            p_y: 0.0,
            p_z: 0.0,
            p_e: 0.0,
        }
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        Self::new(p / 3.0, p / 3.0, p / 3.0, 0.0)
    }

    pub fn biased(p: f64, eta: f64) -> Result<Self> {
        let (x, y, z) = bias_split(p, eta)?;
        Self::new(x, y, z, 0.0)
    }

    pub fn pta(gamma: f64, lambda: f64) -> Result<Self> {
        let (x, y, z) = twirl_pta(gamma, lambda)?;
        Self::new(x, y, z, 0.0)
    }

    pub fn cta(gamma: f64, lambda: f64) -> Result<Self> {
        let (x, y, z) = twirl_cta(gamma, lambda)?;
        Self::new(x, y, z, 0.0)
    }

    pub fn with_erasure(self, p_e: f64) -> Result<Self> {
        Self::new(self.p_x, self.p_y, self.p_z, p_e)
    }

    pub fn p_identity(&self) -> f64 {
        (1.0 - self.p_x - self.p_y - self.p_z).max(0.0)
    }

    /// Total Pauli error probability `p_x + p_y + p_z`.
    pub fn p_total(&self) -> f64 {
        self.p_x + self.p_y + self.p_z
    }

    /// Probability of a non-erased qubit carrying `p`.
    pub fn prob(&self, p: Pauli) -> f64 {
        match p {
            Pauli::I => self.p_identity(),
            Pauli::X => self.p_x,
            Pauli::Y => self.p_y,
            Pauli::Z => self.p_z,
        }
    }

    /// `p_z / (p_x + p_y)`, infinite when `p_x + p_y == 0`.
    pub fn eta(&self) -> f64 {
        let xy = self.p_x + self.p_y;
        if xy == 0.0 {
            f64::INFINITY
        } else {
            self.p_z / xy
        }
    }
}

/// Per-qubit channels for an `n`-qubit code.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    per_qubit: Vec<PauliChannelParams>,
}

impl NoiseModel {
    /// Identical channel on every qubit.
    pub fn iid(n: usize, params: PauliChannelParams) -> Self {
        Self {
            per_qubit: vec![params; n],
        }
    }

    /// Independent but not identically distributed channels.
    pub fn inid(per_qubit: Vec<PauliChannelParams>) -> Self {
        Self { per_qubit }
    }

    pub fn depolarizing(n: usize, p: f64) -> Result<Self> {
        Ok(Self::iid(n, PauliChannelParams::depolarizing(p)?))
    }

    pub fn biased(n: usize, p: f64, eta: f64) -> Result<Self> {
        Ok(Self::iid(n, PauliChannelParams::biased(p, eta)?))
    }

    pub fn n(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn params(&self, q: usize) -> &PauliChannelParams {
        &self.per_qubit[q]
    }

    pub fn per_qubit(&self) -> &[PauliChannelParams] {
        &self.per_qubit
    }

    pub fn has_erasures(&self) -> bool {
        self.per_qubit.iter().any(|c| c.p_e > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledError {
    pub pauli: PauliOperator,
    pub erased: BitVec,
}

/// RNG for one Monte Carlo trial: stream `trial` of the ChaCha8 generator
/// keyed by `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Draw one error from `model`.
///
/// Each qubit is erased with probability `p_e`, in which case it carries a
/// uniformly random Pauli. Otherwise it carries X, Y or Z with probabilities
/// `p_x`, `p_y`, `p_z`.
pub fn sample_error<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> SampledError {
    let n = model.n();
    let mut pauli = PauliOperator::identity(n);
    let mut erased = BitVec::zeros(n);
    for (q, c) in model.per_qubit.iter().enumerate() {
        if c.p_e > 0.0 && rng.random::<f64>() < c.p_e {
            erased.set(q, true);
            pauli.set(q, Pauli::ALL[rng.random_range(0..4)]);
            continue;
        }
        let u: f64 = rng.random();
        let p = if u < c.p_x {
            Pauli::X
        } else if u < c.p_x + c.p_y {
            Pauli::Y
        } else if u < c.p_x + c.p_y + c.p_z {
            Pauli::Z
        } else {
            Pauli::I
        };
        if p != Pauli::I {
            pauli.set(q, p);
        }
    }
    SampledError { pauli, erased }
}
