//! Direct LU factorization of square band matrices without pivoting.
//!
//! `I - K` is strictly diagonally dominant whenever every row of `K` sums
//! to less than one, so elimination without row exchanges is stable and
//! preserves the band.

use crate::error::{Result, StroboError};
use crate::operator::StroboOperator;
use crate::scalar::Scalar;

/// Row-major band storage of an `n x n` matrix with half-bandwidth `bw`.
/// Entry `(i, j)` lives at `i * (2 bw + 1) + bw + j - i`.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    bw: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedLu<T> {
    /// Factor the band matrix whose entries are given by `entry(i, j)` for `|i - j| <= bw`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> T) -> Result<Self> {
        let bw = bw.min(n.saturating_sub(1));
        let width = 2 * bw + 1;
        let mut data = vec![T::zero(); n * width];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=(i + bw).min(n - 1) {
                data[i * width + bw + j - i] = entry(i, j);
            }
        }
        let mut lu = Self { n, bw, data };
        lu.eliminate()?;
        Ok(lu)
    }

    /// Factor `I - K`.
    pub fn identity_minus(op: &StroboOperator<T>) -> Result<Self> {
        let band = op.band();
        Self::factor(op.n(), op.bandwidth(), |i, j| {
            let k = band[i.abs_diff(j)];
            if i == j {
                T::one() - k
            } else {
                -k
            }
        })
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        let width = 2 * bw + 1;
        let scale = self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
        for k in 0..n {
            let pivot = self.data[k * width + bw];
            if !(pivot.abs() > tiny) || !pivot.is_finite() {
                return Err(StroboError::Solver(format!(
                    "zero or non-finite pivot {pivot} at row {k}; operator is not strictly sub-stochastic"
                )));
            }
            let last = (k + bw).min(n - 1);
            let (head, tail) = self.data.split_at_mut((k + 1) * width);
            // pivot row: columns k..=last
            let prow = &head[k * width + bw..k * width + bw + (last - k) + 1];
            for i in (k + 1)..=last {
                let row = &mut tail[(i - k - 1) * width..(i - k) * width];
                let off = bw + k - i; // column k in row i
                let l = row[off] / pivot;
                row[off] = l;
                if l == T::zero() {
                    continue;
                }
                for (dst, &src) in row[off + 1..off + 1 + (last - k)]
                    .iter_mut()
                    .zip(&prow[1..])
                {
                    *dst -= l * src;
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` using the stored factors.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, bw) = (self.n, self.bw);
        assert_eq!(x.len(), n, "right-hand side length must match matrix");
        let width = 2 * bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * width..(i + 1) * width];
            let mut s = x[i];
            for j in lo..i {
                s -= row[bw + j - i] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let row = &self.data[i * width..(i + 1) * width];
            let mut s = x[i];
            for j in (i + 1)..=hi {
                s -= row[bw + j - i] * x[j];
            }
            x[i] = s / row[bw];
        }
    }
}
