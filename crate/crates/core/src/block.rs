//! Block tridiagonal elimination with 2x2 blocks.
//!
//! Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
//! For the open system `lower[0]` and `upper[n-1]` are ignored; for the cyclic
//! system they couple to `x[n-1]` and `x[0]` respectively.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Block = Matrix2<f64>;
pub type Pair = Vector2<f64>;

/// Relative pivot threshold on `|det|` compared with the squared block norm.
const PIVOT_EPS: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub lower: Vec<Block>,
    pub diag: Vec<Block>,
    pub upper: Vec<Block>,
}

/// Factorised open system: inverted modified pivots and elimination multipliers.
struct Factor<'a> {
    sys: &'a BlockTridiagonal,
    pivot_inv: Vec<Block>,
    mult: Vec<Block>,
}

fn invert(m: &Block, index: usize) -> Result<Block> {
    let det = m.determinant();
    let scale = m.abs().max().powi(2);
    if !(det.abs() > PIVOT_EPS * scale) {
        return Err(Error::SingularPivot { index, det });
    }
    Ok(Block::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

impl<'a> Factor<'a> {
    fn new(sys: &'a BlockTridiagonal, n: usize) -> Result<Self> {
        let mut pivot_inv = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n);
        mult.push(Block::zeros());
        pivot_inv.push(invert(&sys.diag[0], 0)?);
        for i in 1..n {
            let f = sys.lower[i] * pivot_inv[i - 1];
            let piv = sys.diag[i] - f * sys.upper[i - 1];
            mult.push(f);
            pivot_inv.push(invert(&piv, i)?);
        }
        Ok(Self { sys, pivot_inv, mult })
    }

    fn solve(&self, rhs: &[Pair]) -> Vec<Pair> {
        let n = self.pivot_inv.len();
        let mut y = Vec::with_capacity(n);
        y.push(rhs[0]);
        for i in 1..n {
            let prev = y[i - 1];
            y.push(rhs[i] - self.mult[i] * prev);
        }
        let mut x = vec![Pair::zeros(); n];
        x[n - 1] = self.pivot_inv[n - 1] * y[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = self.pivot_inv[i] * (y[i] - self.sys.upper[i] * x[i + 1]);
        }
        x
    }
}

impl BlockTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check(&self, rhs: &[Pair]) -> Result<()> {
        let n = self.len();
        for (what, got) in
            [("lower blocks", self.lower.len()), ("upper blocks", self.upper.len()), ("right-hand side", rhs.len())]
        {
            if got != n {
                return Err(Error::LengthMismatch { what, got, expected: n });
            }
        }
        if n == 0 {
            return Err(Error::GridTooSmall { min: 1, got: 0 });
        }
        Ok(())
    }

    /// Solves the open (non-cyclic) system.
    pub fn solve(&self, rhs: &[Pair]) -> Result<Vec<Pair>> {
        self.check(rhs)?;
        Ok(Factor::new(self, self.len())?.solve(rhs))
    }

    /// Solves the cyclic system by bordering: the leading `n-1` rows are
    /// eliminated as an open system with `x[n-1]` carried as a 2x2 unknown,
    /// then the last row closes the loop.
    pub fn solve_cyclic(&self, rhs: &[Pair]) -> Result<Vec<Pair>> {
        self.check(rhs)?;
        let n = self.len();
        if n < 3 {
            return Err(Error::GridTooSmall { min: 3, got: n });
        }
        let m = n - 1;
        let lead = Factor::new(self, m)?;
        let y = lead.solve(&rhs[..m]);

        // Influence of x[n-1] on the leading rows, one column at a time.
        let mut z = vec![Block::zeros(); m];
        for col in 0..2 {
            let mut e = vec![Pair::zeros(); m];
            e[0] -= self.lower[0].column(col);
            e[m - 1] -= self.upper[m - 1].column(col);
            for (zi, ci) in z.iter_mut().zip(lead.solve(&e)) {
                zi.set_column(col, &ci);
            }
        }

        let closing = self.diag[m] + self.lower[m] * z[m - 1] + self.upper[m] * z[0];
        let last = invert(&closing, m)? * (rhs[m] - self.lower[m] * y[m - 1] - self.upper[m] * y[0]);
        let mut x: Vec<Pair> = y.iter().zip(&z).map(|(yi, zi)| yi + zi * last).collect();
        x.push(last);
        Ok(x)
    }

    /// `A x`, treating the system as cyclic when `cyclic` is set.
    pub fn apply(&self, x: &[Pair], cyclic: bool) -> Vec<Pair> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = self.diag[i] * x[i];
                if i > 0 {
                    r += self.lower[i] * x[i - 1];
                } else if cyclic {
                    r += self.lower[i] * x[n - 1];
                }
                if i + 1 < n {
                    r += self.upper[i] * x[i + 1];
                } else if cyclic {
                    r += self.upper[i] * x[0];
                }
                r
            })
            .collect()
    }
}
