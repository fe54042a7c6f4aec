//! Phaseless n-qubit Pauli operators in symplectic form.

use std::fmt;

use crate::bits::BitVec;
use crate::error::{check_len, Result};

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// An n-qubit Pauli operator with the global phase dropped.
///
/// `x_part[i]` is set where X or Y acts on qubit `i`; `z_part[i]` where Z or Y
/// acts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x_part: BitVec,
    z_part: BitVec,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x_part: BitVec::zeros(n),
            z_part: BitVec::zeros(n),
        }
    }

    pub fn from_parts(x_part: BitVec, z_part: BitVec) -> Result<Self> {
        check_len(x_part.len(), z_part.len())?;
        Ok(Self { x_part, z_part })
    }

    /// Pure X-type operator on `qubits`.
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x_part: BitVec::from_indices(n, qubits),
            z_part: BitVec::zeros(n),
        }
    }

    /// Pure Z-type operator on `qubits`.
    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        Self {
            x_part: BitVec::zeros(n),
            z_part: BitVec::from_indices(n, qubits),
        }
    }

    /// Builds an operator from single-qubit labels, e.g. `[X, I, Z]`.
    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut op = Self::identity(paulis.len());
        for (q, p) in paulis.iter().enumerate() {
            op.set(q, *p);
        }
        op
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x_part.len()
    }

    pub fn x_part(&self) -> &BitVec {
        &self.x_part
    }

    pub fn z_part(&self) -> &BitVec {
        &self.z_part
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_part.get(q), self.z_part.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x_part.set(q, x);
        self.z_part.set(q, z);
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x_part.or(&self.z_part).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_part.is_zero() && self.z_part.is_zero()
    }

    /// Phaseless product: componentwise XOR of the symplectic parts.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_len(self.n(), other.n())?;
        let mut out = self.clone();
        out.x_part.xor_assign(&other.x_part);
        out.z_part.xor_assign(&other.z_part);
        Ok(out)
    }

    /// In-place product; panics on length mismatch.
    pub fn mul_assign(&mut self, other: &PauliOperator) {
        self.x_part.xor_assign(&other.x_part);
        self.z_part.xor_assign(&other.z_part);
    }

    /// True iff the symplectic product `a.x·b.z + a.z·b.x` vanishes mod 2.
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        check_len(self.n(), other.n())?;
        Ok(self.x_part.dot(&other.z_part) == self.z_part.dot(&other.x_part))
    }
}

/// Free-function form of [`PauliOperator::multiply`].
pub fn multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.multiply(b)
}

/// Free-function form of [`PauliOperator::commutes`].
pub fn commutes(a: &PauliOperator, b: &PauliOperator) -> Result<bool> {
    a.commutes(b)
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            let c = match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::Pauli::*;
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    #[test]
    fn x_times_z_is_y() {
        let xi = PauliOperator::from_paulis(&[X, I]);
        let zi = PauliOperator::from_paulis(&[Z, I]);
        let y = xi.multiply(&zi).unwrap();
        assert_eq!(y, PauliOperator::from_paulis(&[Y, I]));
        assert_eq!(y.x_part(), &BitVec::from_indices(2, [0]));
        assert_eq!(y.z_part(), &BitVec::from_indices(2, [0]));
    }

    #[test]
    fn z_squared_cancels() {
        let xz = PauliOperator::from_paulis(&[X, Z]);
        let iz = PauliOperator::from_paulis(&[I, Z]);
        assert_eq!(xz.multiply(&iz).unwrap(), PauliOperator::from_paulis(&[X, I]));
    }

    #[test]
    fn commutation_examples() {
        let xi = PauliOperator::from_paulis(&[X, I]);
        let zi = PauliOperator::from_paulis(&[Z, I]);
        assert!(!xi.commutes(&zi).unwrap());
        let xx = PauliOperator::from_paulis(&[X, X]);
        let zz = PauliOperator::from_paulis(&[Z, Z]);
        assert!(xx.commutes(&zz).unwrap());
        let id = PauliOperator::identity(2);
        for p in [&xi, &zi, &xx, &zz] {
            assert!(p.commutes(&id).unwrap());
        }
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let a = PauliOperator::identity(2);
        let b = PauliOperator::identity(3);
        assert!(matches!(a.multiply(&b), Err(Error::Dimension { .. })));
        assert!(matches!(a.commutes(&b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn weight_counts_support() {
        let p = PauliOperator::from_paulis(&[X, I, Y, Z, I]);
        assert_eq!(p.weight(), 3);
        assert_eq!(p.to_string(), "XIYZI");
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        proptest::collection::vec(0u8..4, n).prop_map(|v| {
            PauliOperator::from_paulis(&v.iter().map(|&k| Pauli::ALL[k as usize]).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn product_is_involutive(a in arb_pauli(13)) {
            prop_assert!(a.multiply(&a).unwrap().is_identity());
        }

        #[test]
        fn commutation_is_symmetric_and_bilinear(a in arb_pauli(9), b in arb_pauli(9), c in arb_pauli(9)) {
            prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
            let bc = b.multiply(&c).unwrap();
            // [a, bc] = [a, b] xor [a, c] in the symplectic form
            let lhs = !a.commutes(&bc).unwrap();
            let rhs = (!a.commutes(&b).unwrap()) ^ (!a.commutes(&c).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
