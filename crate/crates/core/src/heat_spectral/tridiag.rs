//! Symmetric tridiagonal eigenproblems by Sturm bisection and inverse
//! iteration.

/// A real symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have length n - 1");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count from the pivots
    /// of `T - x I = L D L^T`).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                d = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (from 0), bisected to working precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for the (simple) eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let shift = lambda + 64.0 * f64::EPSILON * scale;
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            x = self.solve_shifted(shift, &x, scale);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    /// Solves `(T - s I) x = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, s: f64, b: &[f64], scale: f64) -> Vec<f64> {
        let n = self.len();
        // Row i holds entries in columns i, i+1, i+2 after pivoting.
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - s).collect();
        let mut u1: Vec<f64> = self.off.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut l: Vec<f64> = self.off.clone();
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if l[i].abs() > d[i].abs() {
                // Swap rows i and i + 1.
                std::mem::swap(&mut d[i], &mut l[i]);
                std::mem::swap(&mut d[i + 1], &mut u1[i]);
                std::mem::swap(&mut u1[i + 1], &mut u2[i]);
                rhs.swap(i, i + 1);
            }
            let piv = if d[i] == 0.0 { f64::EPSILON * scale } else { d[i] };
            d[i] = piv;
            let m = l[i] / piv;
            d[i + 1] -= m * u1[i];
            u1[i + 1] -= m * u2[i];
            rhs[i + 1] -= m * rhs[i];
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON * scale;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            if i + 1 < n {
                acc -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / d[i];
        }
        x
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sample(n: usize) -> SymTridiagonal {
        let diag = (0..n).map(|i| ((2 * i) as f64).powi(2) + (i as f64 * 0.37).sin()).collect();
        let off = (0..n - 1).map(|i| 1.5 + (i as f64 * 1.3).cos()).collect();
        SymTridiagonal::new(diag, off)
    }

    #[test]
    fn bisection_matches_dense_solver() {
        let t = sample(24);
        let n = t.len();
        let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => t.diag[i],
            1 => t.off[i.min(j)],
            _ => 0.0,
        });
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, e) in ev.iter().enumerate() {
            let b = t.eigenvalue(k);
            assert!((b - e).abs() <= 1e-12 * e.abs().max(1.0), "k={k}: {b} vs {e}");
        }
    }

    #[test]
    fn eigenvectors_have_small_residual() {
        let t = sample(30);
        for k in 0..10 {
            let lam = t.eigenvalue(k);
            let v = t.eigenvector(lam);
            let tv = t.mul_vec(&v);
            let res = tv.iter().zip(&v).map(|(a, b)| (a - lam * b).abs()).fold(0.0, f64::max);
            assert!(res < 1e-10 * lam.abs().max(1.0), "k={k}: {res}");
        }
    }

    #[test]
    fn sturm_count_brackets_spectrum() {
        let t = sample(12);
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.count_below(lo - 1.0), 0);
        assert_eq!(t.count_below(hi + 1.0), 12);
    }
}
