//! Ordered-statistics post-processing.

use crate::bits::BitVec;
use crate::error::{check_len, invalid, Result};
use crate::gf2::Elimination;

/// Column order from least to most reliable: ascending posterior LLR, ties
/// by index.
pub fn reliability_order(posteriors: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..posteriors.len()).collect();
    order.sort_by(|&a, &b| posteriors[a].total_cmp(&posteriors[b]).then(a.cmp(&b)));
    order
}

/// OSD-0: solve on the first `rank(H)` independent columns of the
/// reliability order, all other bits zero.
pub fn osd0(h: &[BitVec], syndrome: &BitVec, posteriors: &[f64]) -> Result<BitVec> {
    if let Some(row) = h.first() {
        check_len(row.len(), posteriors.len())?;
    }
    let el = Elimination::new(h, syndrome, &reliability_order(posteriors))?;
    Ok(el.solve_with(&[]))
}

/// Candidates examined by [`osd_w`], for inspection and testing.
pub fn osd_w_candidates(h: &[BitVec], syndrome: &BitVec, posteriors: &[f64], w: usize) -> Result<Vec<BitVec>> {
    if let Some(row) = h.first() {
        check_len(row.len(), posteriors.len())?;
    }
    let el = Elimination::new(h, syndrome, &reliability_order(posteriors))?;
    let nfree = el.free.len();
    if w > nfree {
        return Err(invalid(format!("OSD order {w} exceeds n - rank(H) = {nfree}")));
    }
    let mut out = Vec::with_capacity(1 + nfree + w * w.saturating_sub(1) / 2);
    out.push(el.solve_with(&[]));
    for &f in &el.free {
        out.push(el.solve_with(&[f]));
    }
    for i in 0..w {
        for j in i + 1..w {
            out.push(el.solve_with(&[el.free[i], el.free[j]]));
        }
    }
    Ok(out)
}

/// OSD-w: the lightest of the OSD-0 solution, every weight-1 free-bit
/// candidate, and every weight-2 candidate within the first `w` free bits.
pub fn osd_w(h: &[BitVec], syndrome: &BitVec, posteriors: &[f64], w: usize) -> Result<BitVec> {
    let mut candidates = osd_w_candidates(h, syndrome, posteriors, w)?;
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.count_ones() < candidates[best].count_ones() {
            best = i;
        }
    }
    Ok(candidates.swap_remove(best))
}
