//! Symmetric tridiagonal matrices with constant off-diagonal: Sturm-sequence
//! bisection for eigenvalues, inverse iteration for vectors, and a Thomas
//! solver for the shifted systems.

/// Symmetric tridiagonal matrix with diagonal `diag` and every off-diagonal
/// entry equal to `off`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: f64) -> Self {
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 { d - x } else { d - x - e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &d) in self.diag.iter().enumerate() {
            let r = self.off.abs() * (usize::from(i > 0) + usize::from(i + 1 < n)) as f64;
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection down to adjacent
    /// floating-point numbers.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index {k} out of range");
        let (mut lo, mut hi) = self.gershgorin();
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return 0.5 * (lo + hi);
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `(T - shift I) x = rhs` by Gaussian elimination without
    /// pivoting; zero pivots are nudged so that inverse iteration at an exact
    /// eigenvalue still produces a finite vector.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let diag: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        thomas_solve(self.off, &diag, self.off, rhs)
    }
}

/// Thomas algorithm for a tridiagonal system with constant sub/super
/// diagonals `lower`/`upper` and main diagonal `diag`.
pub fn thomas_solve(lower: f64, diag: &[f64], upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    let scale = diag
        .iter()
        .fold(lower.abs() + upper.abs(), |m, d| m.max(d.abs()));
    let floor = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut c = vec![0.0; n];
    let mut x = rhs.to_vec();
    let mut beta = diag[0];
    if beta.abs() < floor {
        beta = floor;
    }
    x[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper / beta;
        beta = diag[i] - lower * c[i - 1];
        if beta.abs() < floor {
            beta = floor.copysign(beta);
        }
        x[i] = (x[i] - lower * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}
