//! Gaussian elimination over GF(2) on packed rows.

use crate::bits::BitVec;
use crate::error::{check_len, Error, Result};

/// Rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[BitVec]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let ncols = first.len();
    let mut work: Vec<BitVec> = rows.to_vec();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..work.len()).find(|&i| work[i].get(c)) else { continue };
        work.swap(r, p);
        for i in r + 1..work.len() {
            if work[i].get(c) {
                let pivot = work[r].clone();
                work[i].xor_assign(&pivot);
            }
        }
        r += 1;
        if r == work.len() {
            break;
        }
    }
    r
}

/// Reduced row echelon form of `H x = s` with columns visited in a given
/// order, so pivots land on the earliest independent columns of that order.
#[derive(Debug, Clone)]
pub struct Elimination {
    /// `order[k]` is the original column at position `k`.
    pub order: Vec<usize>,
    /// Pivot position (in `order`) of reduced row `r`, for `r < rank`.
    pub pivots: Vec<usize>,
    /// Non-pivot positions, ascending.
    pub free: Vec<usize>,
    /// Reduced rows over permuted columns.
    pub rows: Vec<BitVec>,
    /// Reduced right-hand side.
    pub rhs: BitVec,
}

impl Elimination {
    pub fn new(h: &[BitVec], s: &BitVec, order: &[usize]) -> Result<Self> {
        check_len(h.len(), s.len())?;
        let ncols = order.len();
        if let Some(row) = h.first() {
            check_len(row.len(), ncols)?;
        }
        let mut rows: Vec<BitVec> = h
            .iter()
            .map(|row| BitVec::from_indices(ncols, (0..ncols).filter(|&k| row.get(order[k]))))
            .collect();
        let mut rhs = s.clone();
        let mut pivots = Vec::new();
        let mut free = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            let found = if r < rows.len() { (r..rows.len()).find(|&i| rows[i].get(c)) } else { None };
            let Some(p) = found else {
                free.push(c);
                continue;
            };
            rows.swap(r, p);
            let (a, b) = (rhs.get(r), rhs.get(p));
            rhs.set(r, b);
            rhs.set(p, a);
            let pivot = rows[r].clone();
            let pivot_rhs = rhs.get(r);
            for i in 0..rows.len() {
                if i != r && rows[i].get(c) {
                    rows[i].xor_assign(&pivot);
                    if pivot_rhs {
                        rhs.flip(i);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        if (r..rows.len()).any(|i| rhs.get(i)) {
            return Err(Error::Unsatisfiable);
        }
        Ok(Self {
            order: order.to_vec(),
            pivots,
            free,
            rows,
            rhs,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solution with the given free positions set (all other free positions
    /// zero), in original column order.
    pub fn solve_with(&self, free_set: &[usize]) -> BitVec {
        let n = self.order.len();
        let mut x = BitVec::zeros(n);
        for (r, &pc) in self.pivots.iter().enumerate() {
            let mut bit = self.rhs.get(r);
            for &f in free_set {
                bit ^= self.rows[r].get(f);
            }
            if bit {
                x.set(self.order[pc], true);
            }
        }
        for &f in free_set {
            x.flip(self.order[f]);
        }
        x
    }
}

/// `H x` over GF(2).
pub fn mul_vec(h: &[BitVec], x: &BitVec) -> BitVec {
    BitVec::from_bools(&h.iter().map(|row| row.dot(x)).collect::<Vec<_>>())
}
