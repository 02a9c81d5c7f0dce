//! Response of a biased operator pair to smooth data, as a power series in
//! `s = h d/dx`.
//!
//! On an unbounded grid the forward operator maps `u` to
//! `D = sum_j p_j h^(j-1) u^(j)` and `D2 = sum_j q_j h^(j-2) u^(j)`, where
//! `p` and `q` are the Taylor coefficients of the operator's transfer
//! functions with the shift `E = exp(s)`. Evaluating these series with the
//! exact derivatives of `u` gives the value the sweep converges to away from
//! its starting node.

use crate::weights::{Direction, PrefactoredWeights};

/// Default truncation order of the transfer-function series.
pub const SERIES_ORDER: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSeries {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

fn exp_series(sign: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut term = 1.0;
    for j in 0..=order {
        if j > 0 {
            term *= sign / j as f64;
        }
        out.push(term);
    }
    out
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

fn div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut q = vec![0.0; n];
    for k in 0..n {
        let acc: f64 = (1..=k).map(|j| b[j] * q[k - j]).sum();
        q[k] = (a[k] - acc) / b[0];
    }
    q
}

fn lin(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n).map(|k| terms.iter().map(|(c, s)| c * s[k]).sum()).collect()
}

impl OperatorSeries {
    /// Transfer-function series truncated after `s^order`.
    ///
    /// Panics if the constant term of the operator determinant,
    /// `(1 + beta_i)(1 + theta_ii) - theta_i beta_ii`, vanishes.
    pub fn new(wts: &PrefactoredWeights, order: usize) -> Self {
        let one: Vec<f64> = (0..=order).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
        let ep = exp_series(1.0, order);
        let em = exp_series(-1.0, order);
        let shift = match wts.direction {
            Direction::Forward => &ep,
            Direction::Backward => &em,
        };
        let a1 = lin(&[(wts.a_i, &em), (wts.b_i, &one), (wts.c_i, &ep)]);
        let a2 = lin(&[(wts.a_ii, &em), (wts.b_ii, &one), (wts.c_ii, &ep)]);
        let shift2 = mul(shift, shift);
        let b = wts.beta_i + wts.theta_ii;
        let c = wts.beta_i * wts.theta_ii - wts.theta_i * wts.beta_ii;
        let det = lin(&[(1.0, &one), (b, shift), (c, &shift2)]);
        assert!(det[0] != 0.0, "operator determinant vanishes at zero frequency");

        let l1 = lin(&[(1.0, &one), (wts.theta_ii, shift)]);
        let l2 = lin(&[(1.0, &one), (wts.beta_i, shift)]);
        let s_a1 = mul(shift, &a1);
        let s_a2 = mul(shift, &a2);
        let p = lin(&[(1.0, &mul(&l1, &a1)), (-wts.theta_i, &s_a2)]);
        let q = lin(&[(1.0, &mul(&l2, &a2)), (-wts.beta_ii, &s_a1)]);
        Self { first: div(&p, &det), second: div(&q, &det) }
    }

    /// `(D, D2)` for data with derivatives `derivs = [u, u', u'', ...]`.
    /// Terms beyond the available derivatives are dropped.
    pub fn response(&self, h: f64, derivs: &[f64]) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let mut hp = 1.0 / (h * h);
        for ((c1, c2), d) in self.first.iter().zip(&self.second).zip(derivs) {
            d1 += c1 * hp * h * d;
            d2 += c2 * hp * d;
            hp *= h;
        }
        (d1, d2)
    }
}
