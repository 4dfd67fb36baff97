//! Real-time propagation of the coupled ring equations
//!
//! `i d/dtau chi_u = -d^2/dphi^2 chi_u + kappa chi_d + gamma |chi_u|^2 chi_u`
//!
//! (and `u <-> d`) on a periodic azimuthal grid. The integrator is Strang
//! splitting: half a nonlinear phase step, one exact linear step in Fourier
//! space, half a nonlinear step. Kinetic energy and tunnelling commute mode
//! by mode, so the linear step is the product of `exp(-i m^2 dt)` and the
//! 2x2 rotation `exp(-i kappa dt sigma_x)` with no splitting error.
//!
//! Fourier amplitudes follow `chi(phi) = (2 pi)^(-1/2) sum_m alpha_m e^{i m phi}`,
//! so `sum_m |alpha_m|^2` is the ring population.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring_model::{Parity, RingParams};

pub const DEFAULT_POINTS: usize = 128;
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_NOISE: f64 = 1e-4;
pub const DEFAULT_MODES: [i32; 3] = [1, 2, 3];

/// Lower edge of the growth-fit window in units of the seeded noise level.
pub const FIT_FLOOR_FACTOR: f64 = 10.0;
/// Upper edge of the growth-fit window relative to the background amplitude.
pub const FIT_CEILING_FRACTION: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RingGrid {
    n_points: usize,
}

impl RingGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::invalid(
                "n_points",
                format!("must be a power of two >= 16, got {n_points}"),
            ));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|j| self.spacing() * j as f64)
            .collect()
    }

    /// Angular mode index of FFT bin `k`, in `-n/2..n/2`.
    pub fn mode_of_bin(&self, k: usize) -> i32 {
        let n = self.n_points;
        if k < n / 2 {
            k as i32
        } else {
            k as i32 - n as i32
        }
    }

    pub fn bin_of_mode(&self, m: i32) -> Option<usize> {
        let half = (self.n_points / 2) as i32;
        if m < -half || m >= half {
            return None;
        }
        Some(m.rem_euclid(self.n_points as i32) as usize)
    }
}

impl Default for RingGrid {
    fn default() -> Self {
        Self {
            n_points: DEFAULT_POINTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    Upper,
    Lower,
}

/// Sampled fields of both rings.
#[derive(Clone, Debug, PartialEq)]
pub struct RingFields {
    pub grid: RingGrid,
    pub chi_u: Vec<Complex64>,
    pub chi_d: Vec<Complex64>,
    pub tau: f64,
    /// Reference modulus used to express noise and fit bounds; `sqrt(N0/2pi)`
    /// for prepared states.
    pub background: f64,
    /// Relative noise level applied by [`seed_noise`], zero if none.
    pub noise_amplitude: f64,
}

impl RingFields {
    pub fn from_samples(
        grid: RingGrid,
        chi_u: Vec<Complex64>,
        chi_d: Vec<Complex64>,
    ) -> Result<Self> {
        let n = grid.n_points();
        if chi_u.len() != n || chi_d.len() != n {
            return Err(Error::invalid(
                "chi",
                format!("expected {n} samples per ring"),
            ));
        }
        let mut fields = Self {
            grid,
            chi_u,
            chi_d,
            tau: 0.0,
            background: 0.0,
            noise_amplitude: 0.0,
        };
        let (nu, nd) = (fields.norm(Ring::Upper), fields.norm(Ring::Lower));
        if !(nu.is_finite() && nd.is_finite() && nu + nd > 0.0) {
            return Err(Error::invalid(
                "chi",
                "fields must be finite and not identically zero",
            ));
        }
        fields.background = (0.5 * (nu + nd) / TAU).sqrt();
        Ok(fields)
    }

    pub fn ring(&self, ring: Ring) -> &[Complex64] {
        match ring {
            Ring::Upper => &self.chi_u,
            Ring::Lower => &self.chi_d,
        }
    }

    /// `(2 pi / n) sum_j |chi_j|^2`.
    pub fn norm(&self, ring: Ring) -> f64 {
        self.grid.spacing() * self.ring(ring).iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `alpha_m` for every FFT bin (see [`RingGrid::mode_of_bin`]).
    pub fn fourier_amplitudes(&self, ring: Ring) -> Vec<Complex64> {
        let mut buf = self.ring(ring).to_vec();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        let scale = TAU.sqrt() / self.grid.n_points() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    pub fn alpha(&self, ring: Ring, m: i32) -> Option<Complex64> {
        let k = self.grid.bin_of_mode(m)?;
        Some(self.fourier_amplitudes(ring)[k])
    }

    /// `sum_m m |alpha_m|^2 / sum_m |alpha_m|^2`.
    pub fn angular_momentum(&self, ring: Ring) -> f64 {
        angular_momentum(&self.grid, &self.fourier_amplitudes(ring))
    }

    pub fn is_finite(&self) -> bool {
        self.chi_u
            .iter()
            .chain(&self.chi_d)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn angular_momentum(grid: &RingGrid, alpha: &[Complex64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (k, a) in alpha.iter().enumerate() {
        let p = a.norm_sqr();
        num += f64::from(grid.mode_of_bin(k)) * p;
        den += p;
    }
    num / den
}

/// Uniform state `chi_u = sqrt(N0/2pi)`, `chi_d = +-chi_u`.
pub fn prepare_uniform(params: &RingParams, parity: Parity, grid: RingGrid) -> RingFields {
    let amp = params.background_amplitude();
    let n = grid.n_points();
    RingFields {
        grid,
        chi_u: vec![Complex64::new(amp, 0.0); n],
        chi_d: vec![Complex64::new(parity.sign() * amp, 0.0); n],
        tau: 0.0,
        background: amp,
        noise_amplitude: 0.0,
    }
}

/// Add complex Gaussian noise to every `m != 0` Fourier component of both
/// rings. Real and imaginary parts of the plane-wave coefficient
/// `alpha_m / sqrt(2 pi)` each get standard deviation
/// `amplitude * background`. Deterministic for a given seed.
pub fn seed_noise(fields: &mut RingFields, amplitude: f64, seed: u64) -> Result<()> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid(
            "noise",
            format!("must be >= 0, got {amplitude}"),
        ));
    }
    if amplitude == 0.0 {
        return Ok(());
    }
    let n = fields.grid.n_points();
    let sigma = amplitude * fields.background;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    for chi in [&mut fields.chi_u, &mut fields.chi_d] {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for c in coeffs.iter_mut().skip(1) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *c = Complex64::new(sigma * re, sigma * im);
        }
        // unnormalized inverse transform gives sum_m c_m e^{i m phi_j}
        ifft.process(&mut coeffs);
        chi.iter_mut().zip(&coeffs).for_each(|(x, d)| *x += d);
    }
    fields.noise_amplitude = amplitude;
    Ok(())
}

/// Strang-split propagator with cached FFT plans and linear phase factors.
pub struct RingPropagator {
    grid: RingGrid,
    dt: f64,
    gamma: f64,
    kappa: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// `exp(-i m^2 dt) / n` per bin
    kinetic: Vec<Complex64>,
    cos_k: f64,
    sin_k: f64,
}

impl RingPropagator {
    pub fn new(grid: RingGrid, params: &RingParams, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft
            .get_inplace_scratch_len()
            .max(ifft.get_inplace_scratch_len());
        let inv_n = 1.0 / n as f64;
        let kinetic = (0..n)
            .map(|k| {
                let m = f64::from(grid.mode_of_bin(k));
                Complex64::from_polar(inv_n, -m * m * dt)
            })
            .collect();
        let kappa = params.kappa();
        Ok(Self {
            grid,
            dt,
            gamma: params.gamma,
            kappa,
            fft,
            ifft,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            kinetic,
            cos_k: (kappa * dt).cos(),
            sin_k: (kappa * dt).sin(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn nonlinear_half(&self, chi: &mut [Complex64]) {
        let h = 0.5 * self.gamma * self.dt;
        for z in chi.iter_mut() {
            *z *= Complex64::from_polar(1.0, -h * z.norm_sqr());
        }
    }

    fn linear(&mut self, fields: &mut RingFields) {
        self.fft
            .process_with_scratch(&mut fields.chi_u, &mut self.scratch);
        self.fft
            .process_with_scratch(&mut fields.chi_d, &mut self.scratch);
        let rot = Complex64::new(0.0, -self.sin_k);
        for ((u, d), ph) in fields
            .chi_u
            .iter_mut()
            .zip(fields.chi_d.iter_mut())
            .zip(&self.kinetic)
        {
            let (a, b) = (*u, *d);
            *u = ph * (a * self.cos_k + rot * b);
            *d = ph * (b * self.cos_k + rot * a);
        }
        self.ifft
            .process_with_scratch(&mut fields.chi_u, &mut self.scratch);
        self.ifft
            .process_with_scratch(&mut fields.chi_d, &mut self.scratch);
    }

    /// Advance by one `dt`. Fails, leaving `fields` at the non-finite state,
    /// if any sample stops being finite.
    pub fn step(&mut self, fields: &mut RingFields) -> Result<()> {
        debug_assert_eq!(fields.grid, self.grid);
        self.nonlinear_half(&mut fields.chi_u);
        self.nonlinear_half(&mut fields.chi_d);
        self.linear(fields);
        self.nonlinear_half(&mut fields.chi_u);
        self.nonlinear_half(&mut fields.chi_d);
        fields.tau += self.dt;
        if !fields.is_finite() {
            return Err(Error::BlowUp { tau: fields.tau });
        }
        Ok(())
    }

    fn amplitudes(&mut self, chi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = chi.to_vec();
        self.fft.process_with_scratch(&mut buf, &mut self.scratch);
        let scale = TAU.sqrt() / self.grid.n_points() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        buf
    }

    fn observe(&mut self, fields: &RingFields, modes: &[(i32, usize)]) -> Sample {
        let grid = self.grid;
        let alpha_u = self.amplitudes(&fields.chi_u);
        let alpha_d = self.amplitudes(&fields.chi_d);
        let kinetic: f64 = alpha_u
            .iter()
            .zip(&alpha_d)
            .enumerate()
            .map(|(k, (a, b))| {
                let m = f64::from(grid.mode_of_bin(k));
                m * m * (a.norm_sqr() + b.norm_sqr())
            })
            .sum();
        let h = grid.spacing();
        let overlap: f64 = fields
            .chi_u
            .iter()
            .zip(&fields.chi_d)
            .map(|(u, d)| (u.conj() * d).re)
            .sum();
        let quartic: f64 = fields
            .chi_u
            .iter()
            .chain(&fields.chi_d)
            .map(|z| z.norm_sqr() * z.norm_sqr())
            .sum();
        let energy = kinetic + 2.0 * self.kappa * h * overlap + 0.5 * self.gamma * h * quartic;
        Sample {
            tau: fields.tau,
            norm_u: fields.norm(Ring::Upper),
            norm_d: fields.norm(Ring::Lower),
            energy,
            l_u: angular_momentum(&grid, &alpha_u),
            l_d: angular_momentum(&grid, &alpha_d),
            modes: modes
                .iter()
                .map(|&(_, k)| (alpha_u[k].norm(), alpha_d[k].norm()))
                .collect(),
        }
    }
}

struct Sample {
    tau: f64,
    norm_u: f64,
    norm_d: f64,
    energy: f64,
    l_u: f64,
    l_d: f64,
    modes: Vec<(f64, f64)>,
}

/// One Strang step of size `dt`. Builds FFT plans on every call; use
/// [`RingPropagator`] for repeated stepping.
pub fn step(fields: &mut RingFields, dt: f64, params: &RingParams) -> Result<()> {
    RingPropagator::new(fields.grid, params, dt)?.step(fields)
}

/// Total energy of the fields under `params`, with the kinetic term
/// evaluated spectrally.
pub fn energy(fields: &RingFields, params: &RingParams) -> Result<f64> {
    let mut p = RingPropagator::new(fields.grid, params, 1.0)?;
    Ok(p.observe(fields, &[]).energy)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
    pub modes: Vec<i32>,
}

impl EvolveConfig {
    /// Steps of the default size up to (at least) `tau_max`.
    pub fn until(tau_max: f64) -> Self {
        Self {
            dt: DEFAULT_DT,
            n_steps: (tau_max / DEFAULT_DT).round() as usize,
            record_every: 100,
            modes: DEFAULT_MODES.to_vec(),
        }
    }
}

/// History of `|alpha_m|` in both rings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeTrace {
    pub m: i32,
    pub abs_u: Vec<f64>,
    pub abs_d: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub norm_u: Vec<f64>,
    pub norm_d: Vec<f64>,
    pub energy: Vec<f64>,
    pub l_u: Vec<f64>,
    pub l_d: Vec<f64>,
    pub modes: Vec<ModeTrace>,
    pub background: f64,
    pub noise_amplitude: f64,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn trace(&self, m: i32) -> Option<&ModeTrace> {
        self.modes.iter().find(|t| t.m == m)
    }

    /// Largest `|x_k - x_0| / |x_0|` over the record, divided by elapsed time.
    pub fn norm_drift_rate(&self) -> f64 {
        let total: Vec<f64> = self
            .norm_u
            .iter()
            .zip(&self.norm_d)
            .map(|(a, b)| a + b)
            .collect();
        let elapsed = self.times.last().unwrap_or(&0.0) - self.times.first().unwrap_or(&0.0);
        max_relative_deviation(&total) / elapsed.max(f64::MIN_POSITIVE)
    }

    pub fn energy_drift(&self) -> f64 {
        max_relative_deviation(&self.energy)
    }

    fn push(&mut self, s: Sample) {
        self.times.push(s.tau);
        self.norm_u.push(s.norm_u);
        self.norm_d.push(s.norm_d);
        self.energy.push(s.energy);
        self.l_u.push(s.l_u);
        self.l_d.push(s.l_d);
        for (trace, (u, d)) in self.modes.iter_mut().zip(s.modes) {
            trace.abs_u.push(u);
            trace.abs_d.push(d);
        }
    }
}

fn max_relative_deviation(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else { return 0.0 };
    xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max) / x0.abs()
}

/// Step `fields` `config.n_steps` times, sampling observables before the
/// first step and after every `record_every` steps.
pub fn evolve(
    fields: &mut RingFields,
    params: &RingParams,
    config: &EvolveConfig,
) -> Result<EvolutionRecord> {
    if config.record_every == 0 {
        return Err(Error::invalid("record_every", "must be >= 1"));
    }
    let mut prop = RingPropagator::new(fields.grid, params, config.dt)?;
    let modes: Vec<(i32, usize)> =
        config
            .modes
            .iter()
            .map(|&m| {
                fields.grid.bin_of_mode(m).map(|k| (m, k)).ok_or_else(|| {
                    Error::invalid("modes", format!("m={m} not resolved on the grid"))
                })
            })
            .collect::<Result<_>>()?;
    let mut record = EvolutionRecord {
        times: Vec::new(),
        norm_u: Vec::new(),
        norm_d: Vec::new(),
        energy: Vec::new(),
        l_u: Vec::new(),
        l_d: Vec::new(),
        modes: modes
            .iter()
            .map(|&(m, _)| ModeTrace {
                m,
                abs_u: Vec::new(),
                abs_d: Vec::new(),
            })
            .collect(),
        background: fields.background,
        noise_amplitude: fields.noise_amplitude,
    };
    record.push(prop.observe(fields, &modes));
    let t0 = fields.tau;
    for i in 1..=config.n_steps {
        prop.step(fields)?;
        // avoid accumulating roundoff in the clock
        fields.tau = t0 + i as f64 * config.dt;
        if i % config.record_every == 0 || i == config.n_steps {
            record.push(prop.observe(fields, &modes));
        }
    }
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub m: i32,
    pub rate: f64,
    /// `(tau_start, tau_end)` of the samples used.
    pub window: (f64, f64),
    /// RMS deviation of `ln|alpha_m|` from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Exponential growth rate of mode `m` from a least-squares fit of
/// `ln|alpha_m|` against time.
///
/// The amplitude is the RMS of both rings, expressed as a plane-wave
/// coefficient `|alpha_m| / sqrt(2 pi)`. The fit uses the first stretch of
/// samples between `10 x noise x background` and `1e-2 x background`, and
/// requires the amplitude to leave that window from the top.
pub fn measure_growth_rate(record: &EvolutionRecord, m: i32) -> Result<GrowthFit> {
    let trace = record.trace(m).ok_or(Error::ModeNotTracked(m))?;
    if record.noise_amplitude <= 0.0 {
        return Err(Error::NoGrowthWindow {
            m,
            reason: "record carries no seeded noise level".into(),
        });
    }
    let norm = TAU.sqrt();
    let amp: Vec<f64> = trace
        .abs_u
        .iter()
        .zip(&trace.abs_d)
        .map(|(u, d)| ((u * u + d * d) / 2.0).sqrt() / norm)
        .collect();
    let floor = FIT_FLOOR_FACTOR * record.noise_amplitude * record.background;
    let ceiling = FIT_CEILING_FRACTION * record.background;
    if floor >= ceiling {
        return Err(Error::NoGrowthWindow {
            m,
            reason: format!("noise floor {floor:e} is above the ceiling {ceiling:e}"),
        });
    }
    let start = amp
        .iter()
        .position(|&a| a >= floor)
        .ok_or_else(|| Error::NoGrowthWindow {
            m,
            reason: "amplitude never leaves the noise floor".into(),
        })?;
    let end = amp[start..]
        .iter()
        .position(|&a| a > ceiling)
        .map(|i| start + i)
        .ok_or_else(|| Error::NoGrowthWindow {
            m,
            reason: "amplitude never grows through the window".into(),
        })?;
    if end - start < 3 {
        return Err(Error::NoGrowthWindow {
            m,
            reason: format!("only {} samples inside the window", end - start),
        });
    }
    let ts = &record.times[start..end];
    let ys: Vec<f64> = amp[start..end].iter().map(|a| a.ln()).collect();
    let (slope, intercept) = linear_fit(ts, &ys);
    let residual = (ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - slope * t - intercept).powi(2))
        .sum::<f64>()
        / ts.len() as f64)
        .sqrt();
    Ok(GrowthFit {
        m,
        rate: slope,
        window: (ts[0], ts[ts.len() - 1]),
        residual,
        samples: ts.len(),
    })
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring_model::CouplingSign;
    use approx::assert_relative_eq;

    fn params(eps: f64, k: f64) -> RingParams {
        RingParams::from_epsilon(eps, k, CouplingSign::Negative).unwrap()
    }

    #[test]
    fn grid_validation_and_modes() {
        assert!(RingGrid::new(8).is_err());
        assert!(RingGrid::new(100).is_err());
        let g = RingGrid::new(16).unwrap();
        assert_eq!(g.mode_of_bin(0), 0);
        assert_eq!(g.mode_of_bin(7), 7);
        assert_eq!(g.mode_of_bin(8), -8);
        assert_eq!(g.mode_of_bin(15), -1);
        assert_eq!(g.bin_of_mode(-1), Some(15));
        assert_eq!(g.bin_of_mode(8), None);
        for k in 0..16 {
            assert_eq!(g.bin_of_mode(g.mode_of_bin(k)), Some(k));
        }
    }

    #[test]
    fn uniform_preparation() {
        let p = RingParams::new(0.3, CouplingSign::Negative, 1.0, TAU).unwrap();
        let g = RingGrid::new(32).unwrap();
        let s = prepare_uniform(&p, Parity::Symmetric, g);
        assert!(s
            .chi_u
            .iter()
            .chain(&s.chi_d)
            .all(|z| (z - 1.0).norm() < 1e-15));
        let a = prepare_uniform(&p, Parity::Antisymmetric, g);
        assert!(a.chi_d.iter().all(|z| (z + 1.0).norm() < 1e-15));
        let alpha = a.fourier_amplitudes(Ring::Upper);
        assert_relative_eq!(alpha[0].re, TAU.sqrt(), max_relative = 1e-14);
        assert!(alpha[1..].iter().all(|z| z.norm() < 1e-14));
        assert_relative_eq!(a.norm(Ring::Lower), p.n0, max_relative = 1e-14);
    }

    #[test]
    fn noise_is_deterministic_and_spares_zero_mode() {
        let p = params(2.0, 1.5);
        let base = prepare_uniform(&p, Parity::Antisymmetric, RingGrid::default());
        let mut a = base.clone();
        let mut b = base.clone();
        seed_noise(&mut a, 1e-4, 7).unwrap();
        seed_noise(&mut b, 1e-4, 7).unwrap();
        assert_eq!(a, b);
        let mut c = base.clone();
        seed_noise(&mut c, 1e-4, 8).unwrap();
        assert_ne!(a, c);
        for ring in [Ring::Upper, Ring::Lower] {
            let x = a.alpha(ring, 0).unwrap();
            let y = base.alpha(ring, 0).unwrap();
            assert!((x - y).norm() < 1e-14);
        }
        let mut z = base.clone();
        seed_noise(&mut z, 0.0, 1).unwrap();
        assert_eq!(z, base);
        assert!(seed_noise(&mut z, -1.0, 1).is_err());
    }

    #[test]
    fn free_evolution_is_exact() {
        let p = RingParams::new(0.0, CouplingSign::Negative, 0.0, TAU).unwrap();
        let g = RingGrid::new(32).unwrap();
        let m = 3;
        let chi: Vec<Complex64> = g
            .angles()
            .iter()
            .map(|&phi| Complex64::from_polar(1.0, f64::from(m) * phi))
            .collect();
        let mut f = RingFields::from_samples(g, chi.clone(), chi).unwrap();
        let a0 = f.alpha(Ring::Upper, m).unwrap();
        let mut prop = RingPropagator::new(g, &p, 0.01).unwrap();
        for _ in 0..100 {
            prop.step(&mut f).unwrap();
        }
        let expected = a0 * Complex64::from_polar(1.0, -f64::from(m * m) * f.tau);
        assert!((f.alpha(Ring::Upper, m).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn linear_josephson_oscillation() {
        // gamma = 0, population starts in the upper ring: N_u = N cos^2(kappa t)
        let k = 0.7;
        let p = RingParams::new(k, CouplingSign::Negative, 0.0, TAU).unwrap();
        let g = RingGrid::new(16).unwrap();
        let n = g.n_points();
        let mut f = RingFields::from_samples(
            g,
            vec![Complex64::new(2f64.sqrt(), 0.0); n],
            vec![Complex64::new(0.0, 0.0); n],
        )
        .unwrap();
        let total = f.norm(Ring::Upper);
        let mut prop = RingPropagator::new(g, &p, 1e-3).unwrap();
        let period = std::f64::consts::PI / k;
        let steps = (period / 1e-3).round() as usize;
        for i in 1..=steps {
            prop.step(&mut f).unwrap();
            if i == steps / 2 {
                assert!(f.norm(Ring::Upper) / total < 1e-5);
            }
        }
        let t = f.tau;
        assert_relative_eq!(
            f.norm(Ring::Upper),
            total * (k * t).cos().powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn symmetric_uniform_rotates_with_mu() {
        let p = params(2.0, 1.5);
        let mut f = prepare_uniform(&p, Parity::Symmetric, RingGrid::new(16).unwrap());
        let dt = 1e-3;
        let mut prop = RingPropagator::new(f.grid, &p, dt).unwrap();
        let mu = p.epsilon() - p.kappa_mag;
        for _ in 0..1000 {
            prop.step(&mut f).unwrap();
        }
        let expected = Complex64::from_polar(1.0, -mu * f.tau);
        for z in f.chi_u.iter().chain(&f.chi_d) {
            assert!((z - expected).norm() < 1e-12, "{z} vs {expected}");
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let p = params(2.0, 0.0);
        let mut f = prepare_uniform(&p, Parity::Symmetric, RingGrid::new(16).unwrap());
        f.chi_u[3] = Complex64::new(f64::NAN, 0.0);
        let err = step(&mut f, 1e-3, &p).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
        let mut g = prepare_uniform(&p, Parity::Symmetric, RingGrid::new(16).unwrap());
        assert!(step(&mut g, 0.0, &p).is_err());
    }

    #[test]
    fn linear_runs_conserve_energy_and_norm() {
        let p = RingParams::new(0.8, CouplingSign::Negative, 0.0, TAU).unwrap();
        let mut f = prepare_uniform(&p, Parity::Antisymmetric, RingGrid::new(32).unwrap());
        seed_noise(&mut f, 1e-2, 3).unwrap();
        let cfg = EvolveConfig {
            dt: 1e-3,
            n_steps: 2000,
            record_every: 50,
            modes: vec![1, -1, 2],
        };
        let rec = evolve(&mut f, &p, &cfg).unwrap();
        assert_eq!(rec.len(), 41);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert!(rec.energy_drift() < 1e-12, "{}", rec.energy_drift());
        assert!(rec.norm_drift_rate() < 1e-12);
    }

    #[test]
    fn growth_fit_errors() {
        let p = params(2.0, 1.5);
        let mut f = prepare_uniform(&p, Parity::Symmetric, RingGrid::new(32).unwrap());
        let cfg = EvolveConfig {
            dt: 1e-3,
            n_steps: 100,
            record_every: 10,
            modes: vec![1],
        };
        let rec = evolve(&mut f, &p, &cfg).unwrap();
        assert!(matches!(
            measure_growth_rate(&rec, 2),
            Err(Error::ModeNotTracked(2))
        ));
        assert!(matches!(
            measure_growth_rate(&rec, 1),
            Err(Error::NoGrowthWindow { .. })
        ));
        let bad = EvolveConfig {
            modes: vec![16],
            ..cfg
        };
        assert!(evolve(&mut f, &p, &bad).is_err());
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, i) = linear_fit(&xs, &ys);
        assert_relative_eq!(s, 2.5, epsilon = 1e-14);
        assert_relative_eq!(i, -1.0, epsilon = 1e-14);
    }
}
