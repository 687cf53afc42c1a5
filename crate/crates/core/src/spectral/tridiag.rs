//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (len n-1).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl Tridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len().max(1));
        Tridiag { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.d.len();
        if n == 0 {
            return 0;
        }
        let mut c = 0;
        let mut q = self.d[0] - x;
        if q < 0.0 {
            c += 1;
        }
        for i in 1..n {
            let qq = if q == 0.0 { f64::MIN_POSITIVE.sqrt() } else { q };
            q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / qq;
            if q < 0.0 {
                c += 1;
            }
        }
        c
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// All eigenvalues below `upper`, ascending.
    pub fn eigenvalues_below(&self, upper: f64) -> Vec<f64> {
        let k = self.count_below(upper);
        if k == 0 {
            return Vec::new();
        }
        let (glo, _) = self.gershgorin();
        let lo0 = glo - 1e-12 * (1.0 + glo.abs());
        let mut out = Vec::with_capacity(k);
        // bracket of eigenvalue j is [lo_j, hi_j]; the lower end reuses the previous root
        let mut lo = lo0;
        for j in 0..k {
            let (mut a, mut b) = (lo, upper);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if self.count_below(m) > j {
                    b = m;
                } else {
                    a = m;
                }
                if b - a <= 2e-15 * (a.abs().max(b.abs())) + 1e-300 {
                    break;
                }
            }
            let v = 0.5 * (a + b);
            out.push(v);
            lo = a;
        }
        out
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (_, hi) = self.gershgorin();
        self.eigenvalues_below(hi + 1e-12 * (1.0 + hi.abs()) + 1e-300)
    }

    /// Sum of the negative eigenvalues.
    pub fn negative_sum(&self) -> f64 {
        self.eigenvalues_below(0.0).iter().sum()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let n = self.d.len();
        faer::Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.d[i]
            } else if i + 1 == j {
                self.e[i]
            } else if j + 1 == i {
                self.e[j]
            } else {
                0.0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_chain_spectrum() {
        let n = 50;
        let t = Tridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let ev = t.eigenvalues();
        for (k, v) in ev.iter().enumerate() {
            let th = std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64;
            assert!((v - (2.0 - 2.0 * th.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_negative_sum() {
        let t = Tridiag::new(vec![-1.0, 2.0, -3.0], vec![0.0, 0.0]);
        assert!((t.negative_sum() + 4.0).abs() < 1e-13);
    }
}
