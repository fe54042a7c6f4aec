//! Matrix product states with physical dimension 2 and the operators that
//! act on them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Site tensor `A[l, s, r]`, stored row-major as `((l * 2 + s) * dr + r)`.
#[derive(Debug, Clone)]
struct Site {
    dl: usize,
    dr: usize,
    data: Vec<f64>,
}

impl Site {
    fn at(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[(l * 2 + s) * self.dr + r]
    }
}

/// Operator site `W[bl, br, in, out]`, stored as `((bl * wr + br) * 2 + in) * 2 + out`.
#[derive(Debug, Clone)]
pub struct MpoSite {
    wl: usize,
    wr: usize,
    data: Vec<f64>,
}

impl MpoSite {
    pub fn zeros(wl: usize, wr: usize) -> Self {
        Self {
            wl,
            wr,
            data: vec![0.0; wl * wr * 4],
        }
    }

    pub fn set(&mut self, bl: usize, br: usize, input: usize, output: usize, value: f64) {
        self.data[((bl * self.wr + br) * 2 + input) * 2 + output] = value;
    }

    fn at(&self, bl: usize, br: usize, input: usize, output: usize) -> f64 {
        self.data[((bl * self.wr + br) * 2 + input) * 2 + output]
    }
}

/// An MPS whose represented tensor is `exp(log_scale)` times the product of
/// its sites.
#[derive(Debug, Clone)]
pub struct Mps {
    sites: Vec<Site>,
    log_scale: f64,
}

fn to_matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

impl Mps {
    /// Product state with one local vector per site.
    pub fn product(vectors: &[[f64; 2]]) -> Self {
        let sites = vectors
            .iter()
            .map(|v| Site {
                dl: 1,
                dr: 1,
                data: v.to_vec(),
            })
            .collect();
        Self { sites, log_scale: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn max_bond(&self) -> usize {
        self.sites.iter().map(|s| s.dr).max().unwrap_or(1)
    }

    /// Contract the operator's input legs with the state. Bond dimensions
    /// multiply.
    pub fn apply(&mut self, mpo: &[MpoSite]) {
        assert_eq!(mpo.len(), self.sites.len(), "operator length mismatch");
        for (a, w) in self.sites.iter_mut().zip(mpo) {
            let (dl, dr) = (a.dl * w.wl, a.dr * w.wr);
            let mut data = vec![0.0; dl * 2 * dr];
            for l in 0..a.dl {
                for bl in 0..w.wl {
                    for out in 0..2 {
                        for r in 0..a.dr {
                            for br in 0..w.wr {
                                let mut acc = 0.0;
                                for input in 0..2 {
                                    acc += a.at(l, input, r) * w.at(bl, br, input, out);
                                }
                                data[((l * w.wl + bl) * 2 + out) * dr + r * w.wr + br] = acc;
                            }
                        }
                    }
                }
            }
            *a = Site { dl, dr, data };
        }
    }

    /// QR sweep to the right, then truncated SVD sweep to the left keeping at
    /// most `chi` singular values above `cutoff` times the largest.
    pub fn compress(&mut self, chi: usize, cutoff: f64) -> Result<()> {
        let len = self.sites.len();
        for k in 0..len.saturating_sub(1) {
            let site = &self.sites[k];
            let dl = site.dl;
            let qr = to_matrix(dl * 2, site.dr, &site.data).qr();
            let (q, r) = (qr.q(), qr.r());
            let next = &self.sites[k + 1];
            let ndr = next.dr;
            let carried = &r * to_matrix(next.dl, 2 * ndr, &next.data);
            let nd = q.ncols();
            self.sites[k] = Site {
                dl,
                dr: nd,
                data: from_matrix(&q),
            };
            self.sites[k + 1] = Site {
                dl: nd,
                dr: ndr,
                data: from_matrix(&carried),
            };
        }
        for k in (1..len).rev() {
            let site = &self.sites[k];
            let m = to_matrix(site.dl, 2 * site.dr, &site.data);
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!("non-finite entry at site {k} before SVD")));
            }
            let svd = m.try_svd(true, true, f64::EPSILON, 0).ok_or_else(|| Error::Numerical(format!("SVD did not converge at site {k}")))?;
            let (Some(u), Some(vt)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
                return Err(Error::Numerical(format!("SVD failed at site {k}")));
            };
            let s = &svd.singular_values;
            let mut idx: Vec<usize> = (0..s.len()).collect();
            idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
            let smax = s[idx[0]];
            let keep = idx
                .iter()
                .take(chi)
                .take_while(|&&i| s[i] > cutoff * smax)
                .count()
                .max(1);
            let idx = &idx[..keep];
            let dr = site.dr;
            let mut vt_kept = DMatrix::zeros(keep, 2 * dr);
            let mut us = DMatrix::zeros(u.nrows(), keep);
            for (t, &i) in idx.iter().enumerate() {
                vt_kept.set_row(t, &vt.row(i));
                us.set_column(t, &(u.column(i) * s[i]));
            }
            self.sites[k] = Site {
                dl: keep,
                dr,
                data: from_matrix(&vt_kept),
            };
            let prev = &self.sites[k - 1];
            let merged = to_matrix(prev.dl * 2, prev.dr, &prev.data) * us;
            self.sites[k - 1] = Site {
                dl: prev.dl,
                dr: keep,
                data: from_matrix(&merged),
            };
        }
        Ok(())
    }

    /// Scale every site to unit max-entry, moving the factors into
    /// `log_scale`. Returns false if some site vanished.
    pub fn normalize(&mut self) -> bool {
        for site in &mut self.sites {
            let m = site.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            if m == 0.0 {
                return false;
            }
            site.data.iter_mut().for_each(|x| *x /= m);
            self.log_scale += m.ln();
        }
        true
    }

    /// Contract every physical leg with a local vector. Returns the mantissa;
    /// the full value is `mantissa * exp(log_scale)`.
    pub fn contract(&self, vectors: &[[f64; 2]]) -> f64 {
        assert_eq!(vectors.len(), self.sites.len(), "vector count mismatch");
        let mut env = vec![1.0];
        for (site, v) in self.sites.iter().zip(vectors) {
            let mut next = vec![0.0; site.dr];
            for (l, &e) in env.iter().enumerate() {
                if e == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    if v[s] == 0.0 {
                        continue;
                    }
                    for (r, n) in next.iter_mut().enumerate() {
                        *n += e * v[s] * site.at(l, s, r);
                    }
                }
            }
            env = next;
        }
        env[0]
    }

    /// Dense amplitudes, site 0 as the most significant bit. For tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let len = self.sites.len();
        (0..1usize << len)
            .map(|idx| {
                let mut env = vec![1.0];
                for (k, site) in self.sites.iter().enumerate() {
                    let s = idx >> (len - 1 - k) & 1;
                    env = (0..site.dr).map(|r| env.iter().enumerate().map(|(l, e)| e * site.at(l, s, r)).sum()).collect();
                }
                env[0] * self.log_scale.exp()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mpo(rng: &mut impl Rng, len: usize, w: usize) -> Vec<MpoSite> {
        (0..len)
            .map(|k| {
                let wl = if k == 0 { 1 } else { w };
                let wr = if k + 1 == len { 1 } else { w };
                let mut s = MpoSite::zeros(wl, wr);
                s.data.iter_mut().for_each(|x| *x = rng.random_range(0.0..1.0));
                s
            })
            .collect()
    }

    fn apply_dense(mpo: &[MpoSite], v: &[f64]) -> Vec<f64> {
        let len = mpo.len();
        (0..1usize << len)
            .map(|out| {
                (0..1usize << len)
                    .map(|input| {
                        let mut env = vec![1.0];
                        for (k, w) in mpo.iter().enumerate() {
                            let (i, o) = (input >> (len - 1 - k) & 1, out >> (len - 1 - k) & 1);
                            env = (0..w.wr).map(|br| env.iter().enumerate().map(|(bl, e)| e * w.at(bl, br, i, o)).sum()).collect();
                        }
                        env[0] * v[input]
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn apply_and_exact_compress_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let len = 5;
        let vecs: Vec<[f64; 2]> = (0..len).map(|_| [rng.random_range(0.1..1.0), rng.random_range(0.1..1.0)]).collect();
        let mut mps = Mps::product(&vecs);
        let mut dense = mps.to_dense();
        for _ in 0..3 {
            let mpo = random_mpo(&mut rng, len, 3);
            dense = apply_dense(&mpo, &dense);
            mps.apply(&mpo);
            mps.compress(64, 0.0).unwrap();
            assert!(mps.normalize());
            for (a, b) in mps.to_dense().iter().zip(&dense) {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "{a} {b}");
            }
        }
        assert!(mps.max_bond() <= 4);
        let total: f64 = dense.iter().sum();
        let got = mps.contract(&vec![[1.0, 1.0]; len]) * mps.log_scale().exp();
        assert!((got - total).abs() < 1e-10 * total);
    }

    #[test]
    fn truncation_respects_chi() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let len = 6;
        let mut mps = Mps::product(&vec![[1.0, 0.5]; len]);
        for _ in 0..3 {
            mps.apply(&random_mpo(&mut rng, len, 4));
            mps.compress(3, 1e-14).unwrap();
            assert!(mps.max_bond() <= 3);
        }
    }

    #[test]
    fn zero_state_is_detected() {
        let mut mps = Mps::product(&[[1.0, 0.0], [0.0, 0.0]]);
        assert!(!mps.normalize());
    }
}
