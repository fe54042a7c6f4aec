//! Rotated planar code construction, syndrome extraction and logical-class
//! classification.
//!
//! Layout conventions:
//!
//! * Data qubit `(r, c)` of the `d x d` lattice has index `r * d + c`
//!   (row 0 at the top).
//! * Plaquette `(i, j)`, `0 <= i, j <= d`, is the face whose corners are data
//!   qubits `(i-1, j-1)`, `(i-1, j)`, `(i, j-1)`, `(i, j)`. Bulk plaquettes are
//!   X-type when `i + j` is even and Z-type otherwise.
//! * Two-qubit X-type checks sit on the top and bottom edges, two-qubit Z-type
//!   checks on the left and right edges. A Z error on the left or right column
//!   therefore fires a single X-type check (X-type virtual boundaries are
//!   left/right), and an X error on the top or bottom row fires a single
//!   Z-type check (Z-type virtual boundaries are top/bottom).
//! * Checks are indexed X-type first, then Z-type, each row-major over the
//!   plaquette grid. Syndrome bits follow the same order.
//! * `logical_x` is X on the left column and `logical_z` is Z on the bottom
//!   row; they overlap on the bottom-left qubit only.

use std::fmt;

use crate::bits::BitVec;
use crate::error::{check_len, invalid, Error, Result};
use crate::lattice::DecodingLattice;
use crate::pauli::PauliOperator;

/// Stabilizer type of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// Product of X on the support; detects Z components of errors.
    X,
    /// Product of Z on the support; detects X components of errors.
    Z,
}

/// Side of the data-qubit lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckKind,
    /// Data-qubit indices, ascending.
    pub support: Vec<usize>,
    /// Plaquette coordinates `(i, j)`.
    pub position: (usize, usize),
}

impl Check {
    pub fn is_boundary(&self) -> bool {
        self.support.len() == 2
    }

    pub fn as_pauli(&self, n: usize) -> PauliOperator {
        match self.kind {
            CheckKind::X => PauliOperator::x_on(n, self.support.iter().copied()),
            CheckKind::Z => PauliOperator::z_on(n, self.support.iter().copied()),
        }
    }
}

/// Sides that host virtual checks for each check kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryMap {
    pub x_checks: [Side; 2],
    pub z_checks: [Side; 2],
}

impl BoundaryMap {
    pub fn sides(&self, kind: CheckKind) -> [Side; 2] {
        match kind {
            CheckKind::X => self.x_checks,
            CheckKind::Z => self.z_checks,
        }
    }
}

/// Logical coset label of a normalizer element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicalClass {
    I,
    X,
    Y,
    Z,
}

impl LogicalClass {
    pub const ALL: [LogicalClass; 4] = [LogicalClass::I, LogicalClass::X, LogicalClass::Y, LogicalClass::Z];

    pub fn from_components(has_x: bool, has_z: bool) -> Self {
        match (has_x, has_z) {
            (false, false) => LogicalClass::I,
            (true, false) => LogicalClass::X,
            (true, true) => LogicalClass::Y,
            (false, true) => LogicalClass::Z,
        }
    }

    pub fn components(self) -> (bool, bool) {
        match self {
            LogicalClass::I => (false, false),
            LogicalClass::X => (true, false),
            LogicalClass::Y => (true, true),
            LogicalClass::Z => (false, true),
        }
    }
}

impl fmt::Display for LogicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LogicalClass::I => "I",
            LogicalClass::X => "X",
            LogicalClass::Y => "Y",
            LogicalClass::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Check outcomes, X-type segment first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome {
    bits: BitVec,
    num_x: usize,
}

impl Syndrome {
    pub fn new(bits: BitVec, num_x: usize) -> Result<Self> {
        if num_x > bits.len() {
            return Err(Error::Dimension {
                expected: bits.len(),
                found: num_x,
            });
        }
        Ok(Self { bits, num_x })
    }

    pub fn zeros(code: &RotatedPlanarCode) -> Self {
        Self {
            bits: BitVec::zeros(code.num_checks()),
            num_x: code.num_x_checks(),
        }
    }

    /// Syndrome of `code` with the given check indices triggered.
    pub fn from_indices(code: &RotatedPlanarCode, triggered: impl IntoIterator<Item = usize>) -> Self {
        Self {
            bits: BitVec::from_indices(code.num_checks(), triggered),
            num_x: code.num_x_checks(),
        }
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn x_checks(&self) -> BitVec {
        self.bits.slice(0, self.num_x)
    }

    pub fn z_checks(&self) -> BitVec {
        self.bits.slice(self.num_x, self.bits.len())
    }

    /// Segment belonging to checks of `kind`, indexed locally within the kind.
    pub fn segment(&self, kind: CheckKind) -> BitVec {
        match kind {
            CheckKind::X => self.x_checks(),
            CheckKind::Z => self.z_checks(),
        }
    }

    pub fn xor(&self, other: &Syndrome) -> Result<Syndrome> {
        check_len(self.len(), other.len())?;
        let mut bits = self.bits.clone();
        bits.xor_assign(&other.bits);
        Ok(Syndrome {
            bits,
            num_x: self.num_x,
        })
    }
}

/// The `[[d^2, 1, d]]` rotated planar code.
#[derive(Debug, Clone)]
pub struct RotatedPlanarCode {
    d: usize,
    checks: Vec<Check>,
    num_x: usize,
    h_x: Vec<BitVec>,
    h_z: Vec<BitVec>,
    logical_x: PauliOperator,
    logical_z: PauliOperator,
    boundary_map: BoundaryMap,
    /// `plaquettes[i * (d + 1) + j]` is the global check index at plaquette `(i, j)`.
    plaquettes: Vec<Option<usize>>,
    x_lattice: DecodingLattice,
    z_lattice: DecodingLattice,
}

fn plaquette_kind(d: usize, i: usize, j: usize) -> Option<CheckKind> {
    let colour = if (i + j).is_multiple_of(2) { CheckKind::X } else { CheckKind::Z };
    let top_or_bottom = i == 0 || i == d;
    let left_or_right = j == 0 || j == d;
    match (top_or_bottom, left_or_right) {
        (false, false) => Some(colour),
        (true, true) => None,
        (true, false) => (colour == CheckKind::X).then_some(CheckKind::X),
        (false, true) => (colour == CheckKind::Z).then_some(CheckKind::Z),
    }
}

impl RotatedPlanarCode {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 || d.is_multiple_of(2) {
            return Err(invalid(format!("distance must be odd and >= 3, got {d}")));
        }
        let n = d * d;
        let mut x_checks = Vec::new();
        let mut z_checks = Vec::new();
        for i in 0..=d {
            for j in 0..=d {
                let Some(kind) = plaquette_kind(d, i, j) else { continue };
                let mut support = Vec::with_capacity(4);
                for (r, c) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i, j)] {
                    if r < d && c < d {
                        support.push(r * d + c);
                    }
                }
                let check = Check {
                    kind,
                    support,
                    position: (i, j),
                };
                match kind {
                    CheckKind::X => x_checks.push(check),
                    CheckKind::Z => z_checks.push(check),
                }
            }
        }
        let num_x = x_checks.len();
        let checks: Vec<Check> = x_checks.into_iter().chain(z_checks).collect();

        let mut plaquettes = vec![None; (d + 1) * (d + 1)];
        for (idx, c) in checks.iter().enumerate() {
            plaquettes[c.position.0 * (d + 1) + c.position.1] = Some(idx);
        }
        let row = |c: &Check| BitVec::from_indices(n, c.support.iter().copied());
        let h_x = checks[..num_x].iter().map(row).collect();
        let h_z = checks[num_x..].iter().map(row).collect();

        let logical_x = PauliOperator::x_on(n, (0..d).map(|r| r * d));
        let logical_z = PauliOperator::z_on(n, (0..d).map(|c| (d - 1) * d + c));
        let boundary_map = BoundaryMap {
            x_checks: [Side::Left, Side::Right],
            z_checks: [Side::Top, Side::Bottom],
        };

        let x_lattice = DecodingLattice::build(d, CheckKind::X, &checks[..num_x], boundary_map.x_checks);
        let z_lattice = DecodingLattice::build(d, CheckKind::Z, &checks[num_x..], boundary_map.z_checks);

        Ok(Self {
            d,
            checks,
            num_x,
            h_x,
            h_z,
            logical_x,
            logical_z,
            boundary_map,
            plaquettes,
            x_lattice,
            z_lattice,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.d * self.d
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn num_x_checks(&self) -> usize {
        self.num_x
    }

    pub fn num_z_checks(&self) -> usize {
        self.checks.len() - self.num_x
    }

    /// Checks of one kind, in local index order.
    pub fn checks_of(&self, kind: CheckKind) -> &[Check] {
        match kind {
            CheckKind::X => &self.checks[..self.num_x],
            CheckKind::Z => &self.checks[self.num_x..],
        }
    }

    /// Global check index of the `local`-th check of `kind`.
    pub fn global_index(&self, kind: CheckKind, local: usize) -> usize {
        match kind {
            CheckKind::X => local,
            CheckKind::Z => self.num_x + local,
        }
    }

    /// Rows are X-type checks.
    pub fn h_x(&self) -> &[BitVec] {
        &self.h_x
    }

    /// Rows are Z-type checks.
    pub fn h_z(&self) -> &[BitVec] {
        &self.h_z
    }

    pub fn parity_check(&self, kind: CheckKind) -> &[BitVec] {
        match kind {
            CheckKind::X => &self.h_x,
            CheckKind::Z => &self.h_z,
        }
    }

    pub fn logical_x(&self) -> &PauliOperator {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliOperator {
        &self.logical_z
    }

    /// Representative of the logical coset `class`.
    pub fn logical(&self, class: LogicalClass) -> PauliOperator {
        let (x, z) = class.components();
        let mut op = PauliOperator::identity(self.n());
        if x {
            op.mul_assign(&self.logical_x);
        }
        if z {
            op.mul_assign(&self.logical_z);
        }
        op
    }

    pub fn boundary_map(&self) -> BoundaryMap {
        self.boundary_map
    }

    /// Global check index at plaquette `(i, j)`, if a check lives there.
    pub fn plaquette(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.d || j > self.d {
            return None;
        }
        self.plaquettes[i * (self.d + 1) + j]
    }

    pub fn lattice(&self, kind: CheckKind) -> &DecodingLattice {
        match kind {
            CheckKind::X => &self.x_lattice,
            CheckKind::Z => &self.z_lattice,
        }
    }

    /// Stabilizer generators as Pauli operators, in check order.
    pub fn generators(&self) -> Vec<PauliOperator> {
        self.checks.iter().map(|c| c.as_pauli(self.n())).collect()
    }

    pub fn syndrome(&self, e: &PauliOperator) -> Result<Syndrome> {
        check_len(self.n(), e.n())?;
        let mut bits = BitVec::zeros(self.num_checks());
        // X-type checks see the Z part, Z-type checks see the X part.
        for (i, row) in self.h_x.iter().enumerate() {
            if row.dot(e.z_part()) {
                bits.set(i, true);
            }
        }
        for (i, row) in self.h_z.iter().enumerate() {
            if row.dot(e.x_part()) {
                bits.set(self.num_x + i, true);
            }
        }
        Ok(Syndrome {
            bits,
            num_x: self.num_x,
        })
    }

    /// Logical coset of a zero-syndrome `residual`.
    pub fn logical_class(&self, residual: &PauliOperator) -> Result<LogicalClass> {
        let s = self.syndrome(residual)?;
        if !s.is_trivial() {
            return Err(Error::ContractViolation(format!(
                "logical class requested for an operator with {} fired checks",
                s.bits().count_ones()
            )));
        }
        Ok(self.logical_class_unchecked(residual))
    }

    /// Logical coset from the commutation with both logicals, without checking
    /// the syndrome.
    pub fn logical_class_unchecked(&self, residual: &PauliOperator) -> LogicalClass {
        let has_x = residual.x_part().dot(self.logical_z.z_part());
        let has_z = residual.z_part().dot(self.logical_x.x_part());
        LogicalClass::from_components(has_x, has_z)
    }
}

/// Free-function form of [`RotatedPlanarCode::new`].
pub fn build_code(d: usize) -> Result<RotatedPlanarCode> {
    RotatedPlanarCode::new(d)
}

pub fn syndrome(code: &RotatedPlanarCode, e: &PauliOperator) -> Result<Syndrome> {
    code.syndrome(e)
}

pub fn logical_class(code: &RotatedPlanarCode, residual: &PauliOperator) -> Result<LogicalClass> {
    code.logical_class(residual)
}
