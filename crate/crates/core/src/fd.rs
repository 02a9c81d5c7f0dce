//! Explicit finite-difference weights on arbitrary nodes (Fornberg's recursion).

/// Weights `c[k][j]` such that `f^(k)(z) ~= sum_j c[k][j] f(x[j])` for
/// `k = 0..=m`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivatives `u, u', ..., u^(m)` at node `at` estimated from `count`
/// consecutive nodes starting at `start` on a grid of spacing `h`.
pub fn one_sided_derivatives(values: &[f64], h: f64, at: usize, start: usize, count: usize, m: usize) -> Vec<f64> {
    let x: Vec<f64> = (start..start + count).map(|j| (j as f64 - at as f64) * h).collect();
    let c = fornberg(0.0, &x, m);
    c.iter().map(|row| row.iter().zip(&values[start..start + count]).map(|(w, u)| w * u).sum()).collect()
}
