//! Stationary states of the dimensionless 1D GP equation
//!
//! `mu phi = [-d^2/dxi^2 + V(xi) + g |phi|^2] phi`,   `V = h (xi^2 - xi0^2)^2`
//!
//! in a fixed parity sector, plus the symmetric/antisymmetric splitting and
//! sweeps over the interaction strength.
//!
//! The grid holds `n_grid` points on `[-L, L]` (odd, so `xi = 0` is a sample)
//! with homogeneous Dirichlet values one spacing outside each end. The
//! kinetic term is the standard 3-point Laplacian, which makes the linear
//! problem exactly the tridiagonal matrix used by [`linear_oracle`].
//!
//! Solves use normalized imaginary-time propagation with a semi-implicit
//! (backward Euler) step: the linear part is treated implicitly, the density
//! is lagged one step, and every step is followed by a parity projection and
//! renormalization. A fixed point satisfies the discrete stationary equation
//! exactly, so the residual can be driven to roundoff.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::ring_model::Parity;
use crate::tridiagonal::{thomas_solve, SymTridiagonal};

/// Target grid spacing for the convenience constructors.
pub const DEFAULT_SPACING: f64 = 0.01;
pub const MIN_GRID_POINTS: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialShape {
    /// `h (xi^2 - xi0^2)^2`
    Quartic,
    /// `xi^2`, spectrum `2n + 1`; for validation.
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DWellParams {
    pub shape: PotentialShape,
    pub xi0: f64,
    pub h: f64,
    pub g_tilde: f64,
    pub half_length: f64,
    pub n_grid: usize,
}

fn grid_points_for(half_length: f64) -> usize {
    2 * ((half_length / DEFAULT_SPACING).round() as usize) + 1
}

impl DWellParams {
    /// Quartic double well on `[-2 xi0, 2 xi0]` with spacing about 0.01.
    pub fn quartic(xi0: f64, h: f64, g_tilde: f64) -> Result<Self> {
        let half_length = 2.0 * xi0;
        Self {
            shape: PotentialShape::Quartic,
            xi0,
            h,
            g_tilde,
            half_length,
            n_grid: grid_points_for(half_length).max(MIN_GRID_POINTS),
        }
        .validated()
    }

    pub fn harmonic(g_tilde: f64, half_length: f64, n_grid: usize) -> Result<Self> {
        Self {
            shape: PotentialShape::Harmonic,
            xi0: 0.0,
            h: 0.0,
            g_tilde,
            half_length,
            n_grid,
        }
        .validated()
    }

    pub fn with_grid(self, half_length: f64, n_grid: usize) -> Result<Self> {
        Self {
            half_length,
            n_grid,
            ..self
        }
        .validated()
    }

    pub fn with_g(self, g_tilde: f64) -> Result<Self> {
        Self { g_tilde, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.shape == PotentialShape::Quartic {
            if !(self.xi0.is_finite() && self.xi0 > 0.0) {
                return Err(Error::invalid(
                    "xi0",
                    format!("must be > 0, got {}", self.xi0),
                ));
            }
            if !(self.h.is_finite() && self.h > 0.0) {
                return Err(Error::invalid("h", format!("must be > 0, got {}", self.h)));
            }
        }
        if !self.g_tilde.is_finite() {
            return Err(Error::invalid("g_tilde", "must be finite"));
        }
        if !(self.half_length.is_finite() && self.half_length > self.xi0 && self.half_length > 0.0)
        {
            return Err(Error::invalid(
                "half_length",
                format!("must exceed xi0 = {}, got {}", self.xi0, self.half_length),
            ));
        }
        if self.n_grid < MIN_GRID_POINTS || self.n_grid.is_multiple_of(2) {
            return Err(Error::invalid(
                "n_grid",
                format!("must be odd and >= {MIN_GRID_POINTS}, got {}", self.n_grid),
            ));
        }
        Ok(self)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.n_grid - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let d = self.spacing();
        let c = (self.n_grid / 2) as f64;
        (0..self.n_grid).map(|j| (j as f64 - c) * d).collect()
    }

    pub fn potential_values(&self) -> Vec<f64> {
        self.grid()
            .into_iter()
            .map(|x| potential(x, self))
            .collect()
    }

    /// Same spacing, about 25% more room on each side.
    pub fn extended(&self) -> Self {
        let d = self.spacing();
        let extra = (0.25 * self.half_length / d).ceil() as usize;
        Self {
            half_length: d * (self.n_grid / 2 + extra) as f64,
            n_grid: self.n_grid + 2 * extra,
            ..*self
        }
    }

    /// Same domain, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_grid: 2 * self.n_grid - 1,
            ..*self
        }
    }

    /// Linear Hamiltonian `-d^2/dxi^2 + V` on the grid.
    pub fn linear_hamiltonian(&self) -> SymTridiagonal {
        let d = self.spacing();
        let inv = 1.0 / (d * d);
        SymTridiagonal::new(
            self.potential_values()
                .into_iter()
                .map(|v| 2.0 * inv + v)
                .collect(),
            -inv,
        )
    }
}

pub fn potential(xi: f64, params: &DWellParams) -> f64 {
    match params.shape {
        PotentialShape::Quartic => {
            let s = xi * xi - params.xi0 * params.xi0;
            params.h * s * s
        }
        PotentialShape::Harmonic => xi * xi,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Initial imaginary-time step; halved whenever the energy rises.
    pub dtau: f64,
    pub max_iterations: usize,
    pub mu_tolerance: f64,
    pub residual_tolerance: f64,
    pub tail_tolerance: f64,
    /// Grow the domain when the boundary tail check fails.
    pub auto_extend: bool,
    pub max_extensions: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dtau: 1.0,
            max_iterations: 200_000,
            mu_tolerance: 1e-10,
            residual_tolerance: 1e-8,
            tail_tolerance: 1e-8,
            auto_extend: true,
            max_extensions: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DWellSolution {
    pub parity: Parity,
    /// Parameters actually used, including any domain extension.
    pub params: DWellParams,
    pub phi: Vec<f64>,
    pub mu: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DWellSolution {
    pub fn xi(&self) -> Vec<f64> {
        self.params.grid()
    }

    pub fn norm(&self) -> f64 {
        self.phi.iter().map(|p| p * p).sum::<f64>() * self.params.spacing()
    }

    /// `|phi(0)|^2`
    pub fn center_density(&self) -> f64 {
        let c = self.phi[self.phi.len() / 2];
        c * c
    }

    pub fn tail(&self) -> f64 {
        self.phi[0].abs().max(self.phi[self.phi.len() - 1].abs())
    }

    /// Sign changes, ignoring samples below `1e-12` of the peak.
    pub fn sign_changes(&self) -> usize {
        let peak = self.phi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let cutoff = 1e-12 * peak;
        let mut last = 0.0f64;
        let mut changes = 0;
        for &p in self.phi.iter().filter(|p| p.abs() > cutoff) {
            if last != 0.0 && p.signum() != last.signum() {
                changes += 1;
            }
            last = p;
        }
        changes
    }
}

struct Functionals {
    mu: f64,
    energy: f64,
    residual: f64,
}

/// `mu = <phi|H[phi]|phi>`, the energy functional and the sup-norm residual
/// of the stationary equation, for normalized `phi`.
fn functionals(phi: &[f64], pot: &[f64], g: f64, dx: f64) -> Functionals {
    let n = phi.len();
    let inv = 1.0 / (dx * dx);
    let at = |j: isize| -> f64 {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            phi[j as usize]
        }
    };
    let mut h_phi = vec![0.0; n];
    let (mut kinetic, mut potential_e, mut quartic) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let jj = j as isize;
        let p = phi[j];
        let lap = (2.0 * p - at(jj - 1) - at(jj + 1)) * inv;
        let dens = p * p;
        h_phi[j] = lap + (pot[j] + g * dens) * p;
        let fwd = at(jj + 1) - p;
        kinetic += fwd * fwd;
        potential_e += pot[j] * dens;
        quartic += dens * dens;
    }
    // forward difference across the left Dirichlet point
    kinetic += phi[0] * phi[0];
    let kinetic = kinetic * inv * dx;
    let potential_e = potential_e * dx;
    let quartic = quartic * dx;
    let mu = kinetic + potential_e + g * quartic;
    let energy = kinetic + potential_e + 0.5 * g * quartic;
    let residual = h_phi
        .iter()
        .zip(phi)
        .map(|(hp, p)| (hp - mu * p).abs())
        .fold(0.0, f64::max);
    Functionals {
        mu,
        energy,
        residual,
    }
}

fn project(phi: &mut [f64], parity: Parity) {
    let n = phi.len();
    let s = parity.sign();
    for j in 0..n / 2 {
        let k = n - 1 - j;
        let even = 0.5 * (phi[j] + s * phi[k]);
        phi[j] = even;
        phi[k] = s * even;
    }
    if parity == Parity::Antisymmetric {
        phi[n / 2] = 0.0;
    }
}

fn normalize(phi: &mut [f64], dx: f64) {
    let norm = (phi.iter().map(|p| p * p).sum::<f64>() * dx).sqrt();
    phi.iter_mut().for_each(|p| *p /= norm);
}

fn initial_guess(params: &DWellParams, parity: Parity) -> Vec<f64> {
    let s = parity.sign();
    params
        .grid()
        .into_iter()
        .map(|x| match params.shape {
            PotentialShape::Quartic => {
                let a = params.xi0;
                (-(x - a).powi(2) / 2.0).exp() + s * (-(x + a).powi(2) / 2.0).exp()
            }
            PotentialShape::Harmonic => {
                let base = (-x * x / 2.0).exp();
                if parity == Parity::Symmetric {
                    base
                } else {
                    x * base
                }
            }
        })
        .collect()
}

/// Center `src` inside a vector of length `n`, padding with zeros or
/// cropping symmetrically. Both lengths are odd.
fn recenter(src: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let (cs, cd) = ((src.len() / 2) as isize, (n / 2) as isize);
    for (i, &v) in src.iter().enumerate() {
        let j = i as isize - cs + cd;
        if j >= 0 && (j as usize) < n {
            out[j as usize] = v;
        }
    }
    out
}

fn relax(
    params: &DWellParams,
    parity: Parity,
    mut phi: Vec<f64>,
    opts: &SolverOptions,
) -> Result<DWellSolution> {
    let dx = params.spacing();
    let pot = params.potential_values();
    let g = params.g_tilde;
    let inv = 1.0 / (dx * dx);
    project(&mut phi, parity);
    normalize(&mut phi, dx);

    let mut state = functionals(&phi, &pot, g, dx);
    let mut dtau = opts.dtau;
    let mut diag = vec![0.0; phi.len()];
    for it in 1..=opts.max_iterations {
        for ((d, v), p) in diag.iter_mut().zip(&pot).zip(&phi) {
            *d = 1.0 + dtau * (2.0 * inv + v + g * p * p);
        }
        let mut next = thomas_solve(-dtau * inv, &diag, -dtau * inv, &phi);
        project(&mut next, parity);
        normalize(&mut next, dx);
        let f = functionals(&next, &pot, g, dx);
        if f.energy > state.energy + 1e-13 * state.energy.abs().max(1.0) {
            // reject the step
            dtau *= 0.5;
            if dtau < 1e-12 {
                return Err(Error::NotConverged {
                    parity,
                    iterations: it,
                    residual: state.residual,
                    delta_mu: f64::NAN,
                });
            }
            continue;
        }
        let delta_mu = (f.mu - state.mu).abs();
        phi = next;
        state = f;
        if delta_mu < opts.mu_tolerance && state.residual < opts.residual_tolerance {
            return Ok(DWellSolution {
                parity,
                params: *params,
                phi,
                mu: state.mu,
                energy: state.energy,
                residual: state.residual,
                iterations: it,
                converged: true,
            });
        }
        if it == opts.max_iterations {
            return Err(Error::NotConverged {
                parity,
                iterations: it,
                residual: state.residual,
                delta_mu,
            });
        }
    }
    Err(Error::NotConverged {
        parity,
        iterations: opts.max_iterations,
        residual: state.residual,
        delta_mu: f64::NAN,
    })
}

/// Lowest normalized stationary state in the given parity sector.
pub fn solve_stationary(params: &DWellParams, parity: Parity) -> Result<DWellSolution> {
    solve_stationary_with(params, parity, None, &SolverOptions::default())
}

/// As [`solve_stationary`], optionally starting from `initial` (recentred
/// onto the grid) and with explicit solver options. When the converged state
/// has a boundary value above the tail tolerance the domain is extended by
/// about 25% at fixed spacing and the solve resumes from the padded state.
pub fn solve_stationary_with(
    params: &DWellParams,
    parity: Parity,
    initial: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<DWellSolution> {
    let mut params = params.validated()?;
    let mut phi = match initial {
        Some(v) => recenter(v, params.n_grid),
        None => initial_guess(&params, parity),
    };
    let mut extensions = 0;
    loop {
        let sol = relax(&params, parity, phi, opts)?;
        let tail = sol.tail();
        if tail <= opts.tail_tolerance {
            return Ok(sol);
        }
        if !opts.auto_extend || extensions >= opts.max_extensions {
            return Err(Error::DomainTooSmall {
                tail,
                half_length: params.half_length,
            });
        }
        params = params.extended();
        phi = recenter(&sol.phi, params.n_grid);
        extensions += 1;
    }
}

/// Two lowest eigenpairs of the linear finite-difference problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearSpectrum {
    pub eigenvalues: [f64; 2],
    /// Normalized so that `sum phi^2 dxi = 1`; the first is even, the
    /// second odd.
    pub eigenvectors: [Vec<f64>; 2],
}

/// Eigenvalues by Sturm-sequence bisection of the full tridiagonal matrix,
/// vectors by inverse iteration restricted to the even and odd sectors
/// (the potential is even, so the sectors decouple exactly and a tiny
/// splitting cannot mix them).
pub fn linear_oracle(params: &DWellParams) -> Result<LinearSpectrum> {
    let params = params.validated()?;
    let t = params.linear_hamiltonian();
    let eigenvalues = [t.eigenvalue(0), t.eigenvalue(1)];
    let dx = params.spacing();
    let vectors = [Parity::Symmetric, Parity::Antisymmetric].map(|parity| {
        let sector_value = if parity == Parity::Symmetric {
            eigenvalues[0]
        } else {
            eigenvalues[1]
        };
        let mut v = initial_guess(&params, parity);
        project(&mut v, parity);
        normalize(&mut v, dx);
        let shift = sector_value - 1e-9 * sector_value.abs().max(1.0);
        for _ in 0..50 {
            let mut next = t.solve_shifted(shift, &v);
            project(&mut next, parity);
            normalize(&mut next, dx);
            let change = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            v = next;
            if change < 1e-13 {
                break;
            }
        }
        if v[params.n_grid / 2 + 1] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    });
    Ok(LinearSpectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Symmetric and antisymmetric solutions on a common grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Splitting {
    pub symmetric: DWellSolution,
    pub antisymmetric: DWellSolution,
    /// `E_A - E_S` from the energy functional.
    pub delta_e: f64,
    /// `mu_A - mu_S`.
    pub delta_mu: f64,
}

impl Splitting {
    /// Two-mode tunnel coupling `-Delta_AS / 2`.
    pub fn tunnel_coupling(&self) -> f64 {
        -0.5 * self.delta_e
    }
}

pub fn delta_as(params: &DWellParams) -> Result<Splitting> {
    delta_as_with(params, None, &SolverOptions::default())
}

/// `warm` gives optional starting vectors `(symmetric, antisymmetric)`.
pub fn delta_as_with(
    params: &DWellParams,
    warm: Option<(&[f64], &[f64])>,
    opts: &SolverOptions,
) -> Result<Splitting> {
    let mut s = solve_stationary_with(params, Parity::Symmetric, warm.map(|w| w.0), opts)?;
    let mut a = solve_stationary_with(&s.params, Parity::Antisymmetric, warm.map(|w| w.1), opts)?;
    if a.params.n_grid != s.params.n_grid {
        s = solve_stationary_with(&a.params, Parity::Symmetric, Some(&s.phi), opts)?;
    }
    if s.params.n_grid != a.params.n_grid {
        a = solve_stationary_with(&s.params, Parity::Antisymmetric, Some(&a.phi), opts)?;
    }
    Ok(Splitting {
        delta_e: a.energy - s.energy,
        delta_mu: a.mu - s.mu,
        symmetric: s,
        antisymmetric: a,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingRow {
    pub g_tilde: f64,
    pub e_s: f64,
    pub e_a: f64,
    pub delta_e: f64,
    pub mu_s: f64,
    pub mu_a: f64,
    pub delta_mu: f64,
    /// Domain actually used for this row.
    pub half_length: f64,
    pub n_grid: usize,
    pub error: Option<String>,
}

impl SplittingRow {
    fn failed(g_tilde: f64, params: &DWellParams, err: &Error) -> Self {
        Self {
            g_tilde,
            e_s: f64::NAN,
            e_a: f64::NAN,
            delta_e: f64::NAN,
            mu_s: f64::NAN,
            mu_a: f64::NAN,
            delta_mu: f64::NAN,
            half_length: params.half_length,
            n_grid: params.n_grid,
            error: Some(err.to_string()),
        }
    }

    pub fn converged(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplittingCurve {
    pub xi0: f64,
    pub h: f64,
    /// Sorted by `g_tilde`.
    pub rows: Vec<SplittingRow>,
}

impl SplittingCurve {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(SplittingRow::converged)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepDirection {
    Ascending,
    Descending,
}

/// `Delta_AS` for each `g` in ascending `g_values`, warm-starting each solve
/// from the previous row. Failed rows are recorded and the sweep continues.
pub fn sweep_g(params: &DWellParams, g_values: &[f64]) -> Result<SplittingCurve> {
    if g_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("g_values", "must be sorted ascending"));
    }
    sweep_g_with(
        params,
        g_values,
        SweepDirection::Ascending,
        &SolverOptions::default(),
    )
}

/// Every row starts on the grid of `params`; only the starting vectors carry
/// over between rows, so the direction affects convergence but not the
/// discretization.
pub fn sweep_g_with(
    params: &DWellParams,
    g_values: &[f64],
    direction: SweepDirection,
    opts: &SolverOptions,
) -> Result<SplittingCurve> {
    let params = params.validated()?;
    let mut order: Vec<usize> = (0..g_values.len()).collect();
    order.sort_by(|&i, &j| g_values[i].total_cmp(&g_values[j]));
    if direction == SweepDirection::Descending {
        order.reverse();
    }
    let mut rows: Vec<Option<SplittingRow>> = vec![None; g_values.len()];
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;
    for i in order {
        let g = g_values[i];
        let row = match params.with_g(g).and_then(|p| {
            let w = warm.as_ref().map(|(s, a)| (s.as_slice(), a.as_slice()));
            delta_as_with(&p, w, opts)
        }) {
            Ok(sp) => {
                let row = SplittingRow {
                    g_tilde: g,
                    e_s: sp.symmetric.energy,
                    e_a: sp.antisymmetric.energy,
                    delta_e: sp.delta_e,
                    mu_s: sp.symmetric.mu,
                    mu_a: sp.antisymmetric.mu,
                    delta_mu: sp.delta_mu,
                    half_length: sp.symmetric.params.half_length,
                    n_grid: sp.symmetric.params.n_grid,
                    error: None,
                };
                warm = Some((sp.symmetric.phi, sp.antisymmetric.phi));
                row
            }
            Err(e) => SplittingRow::failed(g, &params, &e),
        };
        rows[i] = Some(row);
    }
    let mut rows: Vec<SplittingRow> = rows.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.g_tilde.total_cmp(&b.g_tilde));
    Ok(SplittingCurve {
        xi0: params.xi0,
        h: params.h,
        rows,
    })
}

/// One ascending sweep per barrier parameter in `h_values`, curves computed
/// independently according to `exec`.
pub fn sweep_curves(
    base: &DWellParams,
    h_values: &[f64],
    g_values: &[f64],
    exec: Execution,
) -> Result<Vec<SplittingCurve>> {
    map_ordered(h_values, exec, |&h| {
        let params = DWellParams { h, ..*base }.validated()?;
        sweep_g(&params, g_values)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn potential_examples() {
        let p = DWellParams::quartic(5.0, 0.05, 0.0).unwrap();
        assert_eq!(potential(5.0, &p), 0.0);
        assert_eq!(potential(-5.0, &p), 0.0);
        assert_relative_eq!(potential(0.0, &p), 31.25, max_relative = 1e-15);
        let q = DWellParams::quartic(5.0, 0.002, 0.0).unwrap();
        assert_relative_eq!(potential(0.0, &q), 1.25, max_relative = 1e-15);
    }

    #[test]
    fn params_validation() {
        let p = DWellParams::quartic(5.0, 0.05, 0.0).unwrap();
        assert_eq!(p.n_grid, 2001);
        assert_relative_eq!(p.spacing(), 0.01, max_relative = 1e-14);
        assert!(p.with_grid(10.0, 2000).is_err());
        assert!(p.with_grid(10.0, 101).is_err());
        assert!(p.with_grid(4.0, 2001).is_err());
        assert!(DWellParams::quartic(5.0, -1.0, 0.0).is_err());
        let g = p.grid();
        assert_eq!(g[1000], 0.0);
        assert_relative_eq!(g[0], -10.0, max_relative = 1e-14);
    }

    #[test]
    fn extension_keeps_spacing_and_center() {
        let p = DWellParams::quartic(5.0, 0.05, 0.0).unwrap();
        let e = p.extended();
        assert_relative_eq!(e.spacing(), p.spacing(), max_relative = 1e-12);
        assert!(e.half_length >= 1.25 * p.half_length - 1e-9);
        assert_eq!(e.n_grid % 2, 1);
        let v: Vec<f64> = (0..5).map(f64::from).collect();
        assert_eq!(recenter(&v, 7), vec![0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 0.0]);
        assert_eq!(recenter(&v, 3), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn projection_enforces_parity() {
        let mut v = vec![1.0, 2.0, 3.0, 5.0, 7.0];
        project(&mut v, Parity::Antisymmetric);
        assert_eq!(v, vec![-3.0, -1.5, 0.0, 1.5, 3.0]);
        let mut w = vec![1.0, 2.0, 3.0, 5.0, 7.0];
        project(&mut w, Parity::Symmetric);
        assert_eq!(w, vec![4.0, 3.5, 3.0, 3.5, 4.0]);
    }

    #[test]
    fn harmonic_levels() {
        let p = DWellParams::harmonic(0.0, 10.0, 2001).unwrap();
        let s = solve_stationary(&p, Parity::Symmetric).unwrap();
        let a = solve_stationary(&p, Parity::Antisymmetric).unwrap();
        assert_relative_eq!(s.mu, 1.0, epsilon = 1e-4);
        assert_relative_eq!(s.energy, 1.0, epsilon = 1e-4);
        assert_relative_eq!(a.mu, 3.0, epsilon = 1e-4);
        assert_relative_eq!(a.energy, 3.0, epsilon = 1e-4);
        assert!(s.residual < 1e-8);
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(s.sign_changes(), 0);
        assert_eq!(a.sign_changes(), 1);
    }

    #[test]
    fn harmonic_oracle() {
        let p = DWellParams::harmonic(0.0, 10.0, 2001).unwrap();
        let lin = linear_oracle(&p).unwrap();
        assert_relative_eq!(lin.eigenvalues[0], 1.0, epsilon = 1e-4);
        assert_relative_eq!(lin.eigenvalues[1], 3.0, epsilon = 1e-4);
        // eigenvector check: T v = lambda v
        let t = p.linear_hamiltonian();
        for (lam, v) in lin.eigenvalues.iter().zip(&lin.eigenvectors) {
            let tv = t.matvec(v);
            let res = tv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b).abs())
                .fold(0.0, f64::max);
            assert!(res < 1e-6, "{res}");
        }
    }

    #[test]
    fn oracle_discretization_is_second_order() {
        let coarse = DWellParams::harmonic(0.0, 10.0, 401).unwrap();
        let fine = coarse.refined();
        let e_coarse = linear_oracle(&coarse).unwrap().eigenvalues[1] - 3.0;
        let e_fine = linear_oracle(&fine).unwrap().eigenvalues[1] - 3.0;
        let ratio = e_coarse / e_fine;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn weak_barrier_oracle_gap_positive() {
        let p = DWellParams::quartic(5.0, 0.002, 0.0).unwrap();
        let lin = linear_oracle(&p).unwrap();
        assert!(lin.eigenvalues[1] - lin.eigenvalues[0] > 0.0);
    }

    #[test]
    fn unsorted_sweep_rejected() {
        let p = DWellParams::quartic(5.0, 0.05, 0.0).unwrap();
        assert!(sweep_g(&p, &[30.0, 0.0]).is_err());
    }

    #[test]
    fn tiny_domain_without_extension_fails() {
        let p = DWellParams::quartic(5.0, 0.002, 300.0).unwrap();
        let opts = SolverOptions {
            auto_extend: false,
            ..SolverOptions::default()
        };
        let err = solve_stationary_with(&p, Parity::Symmetric, None, &opts).unwrap_err();
        assert!(matches!(err, Error::DomainTooSmall { .. }), "{err}");
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let p = DWellParams::quartic(5.0, 0.05, 30.0).unwrap();
        let opts = SolverOptions {
            max_iterations: 3,
            ..SolverOptions::default()
        };
        let err = solve_stationary_with(&p, Parity::Symmetric, None, &opts).unwrap_err();
        assert!(
            matches!(err, Error::NotConverged { iterations: 3, .. }),
            "{err}"
        );
    }
}
