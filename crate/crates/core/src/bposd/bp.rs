//! Log-domain sum-product belief propagation, flooding schedule.

use crate::bits::BitVec;
use crate::error::{check_len, invalid, Result};

/// Messages and log-likelihood ratios are clamped to this magnitude.
pub const LLR_CLAMP: f64 = 25.0;

#[derive(Debug, Clone)]
pub struct TannerGraph {
    m: usize,
    n: usize,
    /// `edges[e] = (check, variable)`, grouped by check.
    edges: Vec<(usize, usize)>,
    check_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &[BitVec]) -> Self {
        let m = h.len();
        let n = h.first().map_or(0, |r| r.len());
        let mut edges = Vec::new();
        let mut check_edges = vec![Vec::new(); m];
        let mut var_edges = vec![Vec::new(); n];
        for (c, row) in h.iter().enumerate() {
            for v in row.ones() {
                check_edges[c].push(edges.len());
                var_edges[v].push(edges.len());
                edges.push((c, v));
            }
        }
        Self {
            m,
            n,
            edges,
            check_edges,
            var_edges,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_edges[c].len()
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_edges[v].len()
    }

    fn syndrome_of(&self, e: &BitVec) -> BitVec {
        let mut s = BitVec::zeros(self.m);
        for &(c, v) in &self.edges {
            if e.get(v) {
                s.flip(c);
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct BpResult {
    pub hard_decision: BitVec,
    /// A-posteriori log-likelihood ratios `ln(P(0) / P(1))`.
    pub posteriors: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Message state after a number of flooding iterations.
#[derive(Debug, Clone)]
pub struct BpState {
    pub var_to_check: Vec<f64>,
    pub check_to_var: Vec<f64>,
    pub channel: Vec<f64>,
    pub posteriors: Vec<f64>,
    pub iteration: usize,
}

fn clamp(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}

impl BpState {
    fn new(g: &TannerGraph, priors: &[f64]) -> Result<Self> {
        check_len(g.num_vars(), priors.len())?;
        if let Some(p) = priors.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(invalid(format!("priors must lie strictly inside (0, 1), found {p}")));
        }
        let channel: Vec<f64> = priors.iter().map(|&p| clamp(((1.0 - p) / p).ln())).collect();
        let var_to_check = g.edges.iter().map(|&(_, v)| channel[v]).collect();
        Ok(Self {
            var_to_check,
            check_to_var: vec![0.0; g.edges.len()],
            posteriors: channel.clone(),
            channel,
            iteration: 0,
        })
    }

    fn step(&mut self, g: &TannerGraph, syndrome: &BitVec) {
        // check -> variable: leave-one-out product of tanh(mu / 2)
        let mut prefix = Vec::new();
        for (c, edges) in g.check_edges.iter().enumerate() {
            let sign = if syndrome.get(c) { -1.0 } else { 1.0 };
            let t: Vec<f64> = edges.iter().map(|&e| (self.var_to_check[e] / 2.0).tanh()).collect();
            prefix.clear();
            let mut acc = 1.0;
            for &x in &t {
                prefix.push(acc);
                acc *= x;
            }
            let mut suffix = 1.0;
            for k in (0..edges.len()).rev() {
                let prod = prefix[k] * suffix;
                self.check_to_var[edges[k]] = clamp(sign * 2.0 * prod.atanh());
                suffix *= t[k];
            }
        }
        // posteriors, then variable -> check excluding the target
        for (v, edges) in g.var_edges.iter().enumerate() {
            let total = self.channel[v] + edges.iter().map(|&e| self.check_to_var[e]).sum::<f64>();
            self.posteriors[v] = total;
            for &e in edges {
                self.var_to_check[e] = clamp(total - self.check_to_var[e]);
            }
        }
        self.iteration += 1;
    }

    /// Bit `v` is flipped iff its posterior is strictly negative.
    pub fn hard_decision(&self) -> BitVec {
        BitVec::from_bools(&self.posteriors.iter().map(|&l| l < 0.0).collect::<Vec<_>>())
    }
}

/// Run exactly `iterations` flooding rounds without a stopping test.
pub fn bp_run(h: &[BitVec], syndrome: &BitVec, priors: &[f64], iterations: usize) -> Result<BpState> {
    let g = TannerGraph::new(h);
    check_len(g.num_checks(), syndrome.len())?;
    let mut state = BpState::new(&g, priors)?;
    for _ in 0..iterations {
        state.step(&g, syndrome);
    }
    Ok(state)
}

/// Belief propagation with early stopping once the hard decision reproduces
/// the syndrome.
pub fn bp_decode(h: &[BitVec], syndrome: &BitVec, priors: &[f64], max_iter: usize) -> Result<BpResult> {
    let g = TannerGraph::new(h);
    check_len(g.num_checks(), syndrome.len())?;
    let mut state = BpState::new(&g, priors)?;
    let mut hard = BitVec::zeros(g.num_vars());
    for _ in 0..max_iter {
        state.step(&g, syndrome);
        hard = state.hard_decision();
        if g.syndrome_of(&hard) == *syndrome {
            return Ok(BpResult {
                hard_decision: hard,
                posteriors: state.posteriors,
                converged: true,
                iterations: state.iteration,
            });
        }
    }
    Ok(BpResult {
        hard_decision: hard,
        posteriors: state.posteriors,
        converged: false,
        iterations: state.iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::mul_vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_syndrome_converges_immediately() {
        let h = vec![BitVec::from_indices(4, [0, 1]), BitVec::from_indices(4, [1, 2, 3])];
        let r = bp_decode(&h, &BitVec::zeros(2), &[0.1; 4], 30).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.hard_decision.is_zero());
    }

    #[test]
    fn single_check_two_variables() {
        let h = vec![BitVec::from_indices(2, [0, 1])];
        let s = BitVec::from_indices(1, [0]);
        let l = 9f64.ln();
        let st = bp_run(&h, &s, &[0.1, 0.1], 1).unwrap();
        for &m in &st.check_to_var {
            assert!((m - (-2.0 * (l / 2.0).tanh().atanh())).abs() < 1e-12);
            assert!((m + l).abs() < 1e-12);
        }
        for &p in &st.posteriors {
            assert!(p.abs() < 1e-12);
        }
        let r = bp_decode(&h, &s, &[0.1, 0.1], 30).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 30);
    }

    #[test]
    fn syndrome_bit_negates_check_messages() {
        let h = vec![BitVec::from_indices(3, [0, 1, 2])];
        let priors = [0.05, 0.2, 0.3];
        let a = bp_run(&h, &BitVec::zeros(1), &priors, 1).unwrap();
        let b = bp_run(&h, &BitVec::from_indices(1, [0]), &priors, 1).unwrap();
        for (x, y) in a.check_to_var.iter().zip(&b.check_to_var) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn degree_one_check_sends_clamped_message() {
        let h = vec![BitVec::from_indices(2, [0])];
        let st = bp_run(&h, &BitVec::from_indices(1, [0]), &[0.1, 0.1], 1).unwrap();
        assert_eq!(st.check_to_var, vec![-LLR_CLAMP]);
    }

    #[test]
    fn degenerate_priors_are_rejected() {
        let h = vec![BitVec::from_indices(2, [0, 1])];
        assert!(bp_decode(&h, &BitVec::zeros(1), &[0.0, 0.1], 5).is_err());
        assert!(bp_decode(&h, &BitVec::zeros(1), &[0.1, 1.0], 5).is_err());
    }

    #[test]
    fn tree_posteriors_are_exact() {
        // chain v0 - c0 - v1 - c1 - v2
        let h = vec![BitVec::from_indices(3, [0, 1]), BitVec::from_indices(3, [1, 2])];
        let priors = [0.1, 0.25, 0.05];
        for smask in 0..4u32 {
            let s = BitVec::from_indices(2, (0..2).filter(|i| smask >> i & 1 == 1));
            let mut p0 = [0.0; 3];
            let mut p1 = [0.0; 3];
            for emask in 0..8u32 {
                let e = BitVec::from_indices(3, (0..3).filter(|i| emask >> i & 1 == 1));
                if mul_vec(&h, &e) != s {
                    continue;
                }
                let w: f64 = (0..3).map(|i| if e.get(i) { priors[i] } else { 1.0 - priors[i] }).product();
                for i in 0..3 {
                    if e.get(i) {
                        p1[i] += w;
                    } else {
                        p0[i] += w;
                    }
                }
            }
            let st = bp_run(&h, &s, &priors, 4).unwrap();
            for i in 0..3 {
                let exact = (p0[i] / p1[i]).ln();
                assert!((st.posteriors[i] - exact).abs() < 1e-10, "s={smask} v{i}");
            }
        }
    }

    #[test]
    fn complementing_priors_negates_messages() {
        // Flipping every prior p -> 1 - p is the same problem for the
        // complemented error, whose syndrome is s + H 1.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let (m, n) = (5, 9);
            let h: Vec<BitVec> = (0..m)
                .map(|_| BitVec::from_bools(&(0..n).map(|_| rng.random_bool(0.4)).collect::<Vec<_>>()))
                .collect();
            let s = BitVec::from_bools(&(0..m).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
            let priors: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.45)).collect();
            let flipped: Vec<f64> = priors.iter().map(|p| 1.0 - p).collect();
            let mut s2 = s.clone();
            s2.xor_assign(&mul_vec(&h, &BitVec::from_indices(n, 0..n)));
            let a = bp_run(&h, &s, &priors, 7).unwrap();
            let b = bp_run(&h, &s2, &flipped, 7).unwrap();
            // compared as tanh(l/2): atanh near saturation amplifies rounding
            let t = |l: f64| (l / 2.0).tanh();
            for (x, y) in a.check_to_var.iter().zip(&b.check_to_var) {
                assert!((t(*x) + t(*y)).abs() < 1e-12, "{x} {y}");
            }
            for (x, y) in a.posteriors.iter().zip(&b.posteriors) {
                assert!((t(*x) + t(*y)).abs() < 1e-12);
                if x.abs() > 1e-6 {
                    assert_ne!(*x < 0.0, *y < 0.0);
                }
            }
        }
    }
}
