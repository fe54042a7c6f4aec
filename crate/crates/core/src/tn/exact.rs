//! Coset probabilities by enumerating the stabilizer group.

use super::{build_erec, qubit_tables, CosetProbabilities};
use crate::bits::BitVec;
use crate::code::{LogicalClass, RotatedPlanarCode, Syndrome};
use crate::error::{check_len, Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::PauliOperator;

/// Largest generator count enumerated (d = 3 has 8).
pub const MAX_GENERATORS: usize = 20;

fn probability(op: &PauliOperator, tables: &[[f64; 4]]) -> f64 {
    let (x, z) = (op.x_part(), op.z_part());
    tables.iter().enumerate().map(|(q, t)| t[2 * x.get(q) as usize + z.get(q) as usize]).product()
}

pub fn exact_coset_probabilities(
    code: &RotatedPlanarCode,
    e_rec: &PauliOperator,
    noise: &NoiseModel,
    erased: Option<&BitVec>,
) -> Result<CosetProbabilities> {
    check_len(code.n(), e_rec.n())?;
    check_len(code.n(), noise.n())?;
    if let Some(e) = erased {
        check_len(code.n(), e.len())?;
    }
    let generators = code.generators();
    if generators.len() > MAX_GENERATORS {
        return Err(Error::Capacity(format!(
            "{} generators exceed the enumeration limit of {MAX_GENERATORS}",
            generators.len()
        )));
    }
    let tables = qubit_tables(noise, erased);
    let mut parts = [(0.0, 0.0); 4];
    for (slot, class) in LogicalClass::ALL.into_iter().enumerate() {
        // Gray code: consecutive stabilizers differ by one generator
        let mut op = e_rec.multiply(&code.logical(class))?;
        let mut total = probability(&op, &tables);
        for k in 1u64..1 << generators.len() {
            op.mul_assign(&generators[k.trailing_zeros() as usize]);
            total += probability(&op, &tables);
        }
        parts[slot] = (total, 0.0);
    }
    Ok(CosetProbabilities::from_scaled(parts))
}

/// Maximum-likelihood coset decoder by enumeration.
pub fn decode_exact(code: &RotatedPlanarCode, syndrome: &Syndrome, noise: &NoiseModel, erased: Option<&BitVec>) -> Result<PauliOperator> {
    let e_rec = build_erec(code, syndrome)?;
    let probs = exact_coset_probabilities(code, &e_rec, noise, erased)?;
    e_rec.multiply(&code.logical(probs.argmax()))
}
