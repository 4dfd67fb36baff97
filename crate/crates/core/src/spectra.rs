//! Bogoliubov-de Gennes frequencies around the uniform two-ring states.
//!
//! Two routes are provided. The closed forms [`omega1`] / [`omega2`] give the
//! tunnel-independent and tunnel-dependent branches directly. [`BdgBlock`]
//! builds the explicit 4x4 linearization acting on
//! `(u_m^u, u_m^d, v_-m^u, v_-m^d)` and [`bdg_eigenvalues`] diagonalizes it
//! through the in-phase / out-of-phase channel decomposition, checking every
//! eigenvalue against the characteristic determinant.
//!
//! Squared frequencies are evaluated in factored form,
//! `w^2 = (a - eps)(a + eps)`, which is algebraically the same as
//! `a^2 - eps^2` but does not lose the small factor near a threshold.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::ring_model::{CouplingSign, Parity, RingParams};

/// A mode counts as unstable when its growth rate exceeds this value.
pub const INSTABILITY_THRESHOLD: f64 = 1e-9;

/// Relative bound on `|det(M - wI)| / ||M||^4` accepted for a reported
/// eigenvalue.
pub const DETERMINANT_TOLERANCE: f64 = 1e-9;

/// Principal square root of a real number: non-negative real, or
/// `i sqrt(-x)` with positive imaginary part.
pub fn principal_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Tunnel-independent branch, `sqrt((m^2 + eps)^2 - eps^2)`.
pub fn omega1(m: i32, eps: f64) -> Complex64 {
    let m2 = f64::from(m * m);
    principal_sqrt(m2 * (m2 + 2.0 * eps))
}

/// Tunnel-dependent branch, `sqrt((m^2 + eps +- 2|kappa|)^2 - eps^2)` with
/// `+` for the symmetric and `-` for the antisymmetric background under the
/// physical coupling sign. A positive coupling exchanges the two.
pub fn omega2(
    m: i32,
    eps: f64,
    kappa_mag: f64,
    background: Parity,
    kappa_sign: CouplingSign,
) -> Complex64 {
    let m2 = f64::from(m * m);
    let shift = 2.0 * kappa_sign.effective_parity(background).sign() * kappa_mag;
    principal_sqrt((m2 + shift) * (m2 + 2.0 * eps + shift))
}

/// Both branches for one angular mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeFrequency {
    pub m: i32,
    pub omega1: Complex64,
    pub omega2: Complex64,
}

impl ModeFrequency {
    pub fn new(m: i32, eps: f64, kappa_mag: f64, background: Parity, sign: CouplingSign) -> Self {
        Self {
            m,
            omega1: omega1(m, eps),
            omega2: omega2(m, eps, kappa_mag, background, sign),
        }
    }

    pub fn growth_rate(&self) -> f64 {
        self.omega1.im.max(self.omega2.im)
    }
}

/// Linearization of the ring equations around a uniform state for one `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BdgBlock {
    pub m: i32,
    pub matrix: [[f64; 4]; 4],
}

impl BdgBlock {
    /// Rows 1-2: `w u = (m^2 + 2 eps - mu) u + kappa u_other + eps v`.
    /// Rows 3-4 are the negated mirror for `v_-m`. `mu` is the chemical
    /// potential of the background, so the diagonal is `m^2 + eps -+ kappa`.
    pub fn new(m: i32, eps: f64, kappa_mag: f64, background: Parity, sign: CouplingSign) -> Self {
        let m2 = f64::from(m * m);
        let kappa = sign.value() * kappa_mag;
        let diag = m2 + eps - background.sign() * kappa;
        let matrix = [
            [diag, kappa, eps, 0.0],
            [kappa, diag, 0.0, eps],
            [-eps, 0.0, -diag, -kappa],
            [0.0, -eps, -kappa, -diag],
        ];
        Self { m, matrix }
    }

    pub fn for_params(m: i32, params: &RingParams, background: Parity) -> Self {
        Self::new(
            m,
            params.epsilon(),
            params.kappa_mag,
            background,
            params.kappa_sign,
        )
    }

    /// Maximum absolute row sum.
    pub fn norm(&self) -> f64 {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `det(M - w I)` by partially pivoted elimination.
    pub fn characteristic_det(&self, omega: Complex64) -> Complex64 {
        let mut a = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                a[i][j] = Complex64::new(x, 0.0);
            }
            a[i][i] -= omega;
        }
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap_or(col);
            if a[pivot][col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            let pivot_row = a[col];
            for row in a.iter_mut().skip(col + 1) {
                let f = row[col] / pivot_row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
        det
    }

    /// In-phase (`u^u + u^d`) and out-of-phase (`u^u - u^d`) 2x2 channels,
    /// each of the form `[[a, b], [-b, -a]]`, returned as `(a, b)` pairs.
    fn channels(&self) -> [(f64, f64); 2] {
        let m = &self.matrix;
        debug_assert_eq!(m[0][0], -m[2][2]);
        debug_assert_eq!(m[0][2], -m[2][0]);
        [
            (m[0][0] + m[0][1], m[0][2] + m[0][3]),
            (m[0][0] - m[0][1], m[0][2] - m[0][3]),
        ]
    }
}

/// All four eigenvalues of the block, as `[w_in, -w_in, w_out, -w_out]`.
pub fn bdg_eigenvalues(block: &BdgBlock) -> Result<[Complex64; 4]> {
    let [(a_in, b_in), (a_out, b_out)] = block.channels();
    let w_in = principal_sqrt((a_in - b_in) * (a_in + b_in));
    let w_out = principal_sqrt((a_out - b_out) * (a_out + b_out));
    let eigenvalues = [w_in, -w_in, w_out, -w_out];

    let bound = DETERMINANT_TOLERANCE * block.norm().powi(4);
    for &w in &eigenvalues {
        let residual = block.characteristic_det(w).norm();
        if residual > bound {
            return Err(Error::DeterminantCheck {
                m: block.m,
                omega: format!("{w}"),
                residual,
                bound,
            });
        }
    }
    Ok(eigenvalues)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnstableMode {
    pub m: i32,
    pub growth_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub params: RingParams,
    pub background: Parity,
    pub m_max: i32,
    /// One entry per `m = 0..=m_max`.
    pub modes: Vec<ModeFrequency>,
    pub unstable_modes: Vec<UnstableMode>,
    pub max_growth: Option<UnstableMode>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.unstable_modes.is_empty()
    }

    pub fn is_unstable_at(&self, m: i32) -> bool {
        self.unstable_modes.iter().any(|u| u.m == m)
    }
}

/// Scan `m = 0..=m_max` around the uniform state of parity `background`.
///
/// `m = 0` is reported but never classified: its perturbations are not
/// angular excitations, and its `omega1` is the global-phase zero mode.
pub fn stability_report(
    params: &RingParams,
    background: Parity,
    m_max: i32,
) -> Result<StabilityReport> {
    if m_max < 1 {
        return Err(Error::invalid(
            "m_max",
            format!("must be >= 1, got {m_max}"),
        ));
    }
    let eps = params.epsilon();
    let modes: Vec<ModeFrequency> = (0..=m_max)
        .map(|m| ModeFrequency::new(m, eps, params.kappa_mag, background, params.kappa_sign))
        .collect();
    let unstable_modes: Vec<UnstableMode> = modes
        .iter()
        .filter(|f| f.m != 0)
        .filter_map(|f| {
            let rate = f.growth_rate();
            (rate > INSTABILITY_THRESHOLD).then_some(UnstableMode {
                m: f.m,
                growth_rate: rate,
            })
        })
        .collect();
    let max_growth = unstable_modes.iter().copied().reduce(|best, u| {
        if u.growth_rate > best.growth_rate {
            u
        } else {
            best
        }
    });
    Ok(StabilityReport {
        params: *params,
        background,
        m_max,
        modes,
        unstable_modes,
        max_growth,
    })
}

/// One cell of an `(eps, |kappa|)` stability map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityCell {
    pub eps: f64,
    pub kappa_mag: f64,
    pub max_growth: f64,
    pub m_star: Option<i32>,
    pub unstable_count: usize,
}

/// Stability over the Cartesian product `eps_values x kappa_values`, `eps`
/// varying slowest. Cells are independent and evaluated according to `exec`.
pub fn stability_map(
    eps_values: &[f64],
    kappa_values: &[f64],
    sign: CouplingSign,
    background: Parity,
    m_max: i32,
    exec: Execution,
) -> Result<Vec<StabilityCell>> {
    let cells: Vec<(f64, f64)> = eps_values
        .iter()
        .flat_map(|&e| kappa_values.iter().map(move |&k| (e, k)))
        .collect();
    map_ordered(&cells, exec, |&(eps, kappa_mag)| {
        let params = RingParams::from_epsilon(eps, kappa_mag, sign)?;
        let report = stability_report(&params, background, m_max)?;
        Ok(StabilityCell {
            eps,
            kappa_mag,
            max_growth: report.max_growth.map_or(0.0, |u| u.growth_rate),
            m_star: report.max_growth.map(|u| u.m),
            unstable_count: report.unstable_modes.len(),
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const NEG: CouplingSign = CouplingSign::Negative;
    const POS: CouplingSign = CouplingSign::Positive;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn assert_multiset(actual: &[Complex64], expected: &[Complex64], tol: f64) {
        let (a, e) = (sorted(actual.to_vec()), sorted(expected.to_vec()));
        for (x, y) in a.iter().zip(&e) {
            assert!((x - y).norm() <= tol, "{a:?} vs {e:?}");
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn omega1_examples() {
        assert_eq!(omega1(0, 3.0), c(0.0, 0.0));
        assert_eq!(omega1(1, 1.5), c(2.0, 0.0));
        assert_eq!(omega1(1, -1.0), c(0.0, 1.0));
    }

    #[test]
    fn omega2_examples() {
        assert_eq!(omega2(1, 2.0, 1.5, Parity::Antisymmetric, NEG), c(0.0, 2.0));
        assert_relative_eq!(
            omega2(1, 2.0, 1.5, Parity::Symmetric, NEG).re,
            32f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(omega2(1, 0.5, 1.0, Parity::Antisymmetric, NEG), c(0.0, 0.0));
    }

    #[test]
    fn zero_mode_antisymmetric_closed_form() {
        // omega2 at m = 0 is sqrt((eps - 2k)^2 - eps^2) = 2 sqrt(k (k - eps)).
        for &(eps, k) in &[(2.0, 1.5), (1.0, 3.0), (-1.0, 0.5), (0.5, 0.5)] {
            let w = omega2(0, eps, k, Parity::Antisymmetric, NEG);
            let sq: f64 = (eps - 2.0 * k) * (eps - 2.0 * k) - eps * eps;
            assert_relative_eq!((w * w).re, sq, epsilon = 1e-12);
            assert_eq!(w.im > 0.0, eps > k && k > 0.0);
        }
        assert_eq!(omega1(0, 2.0), c(0.0, 0.0));
    }

    #[test]
    fn block_layout_matches_linearization() {
        let b = BdgBlock::new(1, 2.0, 1.5, Parity::Antisymmetric, NEG);
        // m^2 + eps - |kappa| on the diagonal, -|kappa| between rings.
        assert_eq!(b.matrix[0], [1.5, -1.5, 2.0, 0.0]);
        assert_eq!(b.matrix[3], [0.0, -2.0, 1.5, -1.5]);
        let s = BdgBlock::new(1, 2.0, 1.5, Parity::Symmetric, NEG);
        assert_eq!(s.matrix[1], [-1.5, 4.5, 0.0, 2.0]);
    }

    #[test]
    fn eigenvalue_examples() {
        let b = BdgBlock::new(1, 2.0, 1.5, Parity::Antisymmetric, NEG);
        let w = bdg_eigenvalues(&b).unwrap();
        let r5 = 5f64.sqrt();
        assert_multiset(
            &w,
            &[c(r5, 0.0), c(-r5, 0.0), c(0.0, 2.0), c(0.0, -2.0)],
            1e-14,
        );

        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            let b = BdgBlock::new(1, 0.0, 0.0, parity, NEG);
            let w = bdg_eigenvalues(&b).unwrap();
            assert_multiset(
                &w,
                &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
                1e-15,
            );
        }

        let b = BdgBlock::new(2, 1.0, 0.25, Parity::Symmetric, NEG);
        let w = bdg_eigenvalues(&b).unwrap();
        let w1 = 24f64.sqrt();
        let w2 = (5.5f64 * 5.5 - 1.0).sqrt();
        assert_multiset(
            &w,
            &[c(w1, 0.0), c(-w1, 0.0), c(w2, 0.0), c(-w2, 0.0)],
            1e-13,
        );
    }

    #[test]
    fn determinant_check_rejects_wrong_root() {
        let b = BdgBlock::new(1, 2.0, 1.5, Parity::Antisymmetric, NEG);
        let ok = b.characteristic_det(c(0.0, 2.0)).norm();
        let bad = b.characteristic_det(c(0.0, 2.1)).norm();
        let bound = DETERMINANT_TOLERANCE * b.norm().powi(4);
        assert!(ok <= bound);
        assert!(bad > bound);
    }

    #[test]
    fn report_repulsive_antisymmetric() {
        let p = RingParams::from_epsilon(2.0, 1.5, NEG).unwrap();
        let r = stability_report(&p, Parity::Antisymmetric, 4).unwrap();
        assert_eq!(r.modes.len(), 5);
        assert_eq!(r.unstable_modes.len(), 1);
        assert_eq!(r.unstable_modes[0].m, 1);
        assert_relative_eq!(r.unstable_modes[0].growth_rate, 2.0, epsilon = 1e-15);
        assert_eq!(r.max_growth.unwrap().m, 1);
    }

    #[test]
    fn report_repulsive_symmetric_stable() {
        let p = RingParams::from_epsilon(2.0, 1.5, NEG).unwrap();
        let r = stability_report(&p, Parity::Symmetric, 4).unwrap();
        assert!(r.is_stable());
        assert!(r.max_growth.is_none());
    }

    #[test]
    fn report_attractive_decoupled() {
        let p = RingParams::from_epsilon(-1.0, 0.0, NEG).unwrap();
        for parity in [Parity::Symmetric, Parity::Antisymmetric] {
            let r = stability_report(&p, parity, 3).unwrap();
            assert_eq!(r.unstable_modes.len(), 1, "{parity:?}");
            assert_eq!(r.unstable_modes[0].m, 1);
            assert_relative_eq!(r.unstable_modes[0].growth_rate, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn report_needs_positive_m_max() {
        let p = RingParams::from_epsilon(1.0, 1.0, NEG).unwrap();
        assert!(stability_report(&p, Parity::Symmetric, 0).is_err());
    }

    #[test]
    fn marginal_mode_is_not_unstable() {
        // eps = |kappa| - m^2/2 exactly
        let p = RingParams::from_epsilon(0.5, 1.0, NEG).unwrap();
        let r = stability_report(&p, Parity::Antisymmetric, 3).unwrap();
        assert!(!r.is_unstable_at(1));
    }

    #[test]
    fn omega1_ignores_coupling_and_parity() {
        for m in 0..7 {
            for eps in [-3.0, -0.5, 0.0, 0.7, 4.0] {
                let reference = ModeFrequency::new(m, eps, 0.0, Parity::Symmetric, NEG).omega1;
                for k in [0.0, 0.1, 1.0, 2.5, 9.0] {
                    for parity in [Parity::Symmetric, Parity::Antisymmetric] {
                        for sign in [NEG, POS] {
                            let w = ModeFrequency::new(m, eps, k, parity, sign).omega1;
                            assert_eq!(w.re.to_bits(), reference.re.to_bits());
                            assert_eq!(w.im.to_bits(), reference.im.to_bits());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn map_orders_eps_slowest() {
        let cells = stability_map(
            &[0.0, 1.0],
            &[0.0, 2.0, 4.0],
            NEG,
            Parity::Antisymmetric,
            3,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[4].eps, cells[4].kappa_mag), (1.0, 2.0));
        // eps = 1 > |kappa| - 1/2 = 1.5 fails; m = 1 stable, m=0 excluded
        assert_eq!(cells[4].m_star, None);
        // eps = 1, |kappa| = 4: m=1 (3.5 > 0 but eps < 3.5) stable; m=2 (2 > 0, eps < 2) stable
        assert_eq!(cells[5].m_star, None);
    }
}
