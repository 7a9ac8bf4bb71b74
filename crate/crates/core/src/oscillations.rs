//! Overlap coefficients `T_mn`, orbital densities, broadened Landau-comb
//! traces over inverse field, and their Fourier spectra.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ladder::C64;
use crate::model2::{
    solve_amplitudes, AmplitudeSolution, DensityPair, OmegaProfile, PhaseBranch, TwoOrbitParams,
};
use crate::specfun::{gaussian_comb, laguerre_row, MAX_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapCoefficient {
    pub m: usize,
    pub n: usize,
    pub value: C64,
}

fn require_unit_omega(params: &TwoOrbitParams) -> Result<()> {
    if params.profile != OmegaProfile::Constant || (params.omega0 - 1.0).abs() > 1e-12 {
        return Err(Error::UnsupportedClosedForm(format!(
            "the overlap closed form needs a constant omega0 = 1 (got {} with {:?} profile); use the quadrature oracle",
            params.omega0, params.profile
        )));
    }
    Ok(())
}

/// Coefficients multiplying the two Laguerre products in `T_mn`: the
/// same-centre part `cs(|A|²e^{2iδ/h} − |B|²e^{−2iδ/h})` and the cross-centre
/// parts `A B̄ c²` and `B Ā s²`.
fn overlap_weights(params: &TwoOrbitParams, amps: &AmplitudeSolution) -> (C64, C64, C64) {
    let (c, s) = params.half_angles();
    let (a, b) = (amps.a, amps.b);
    let rot = C64::from_polar(1.0, 2.0 * params.delta / params.h);
    let same = c * s * (a.norm_sqr() * rot - b.norm_sqr() * rot.conj());
    (same, a * b.conj() * c * c, b * a.conj() * s * s)
}

/// Closed-form `T_mn = ∫ φ_m conj(φ̃_n) dx` for `ω0 = 1`.
pub fn transfer_coefficient(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    m: usize,
    n: usize,
) -> Result<OverlapCoefficient> {
    require_unit_omega(params)?;
    for &level in &[m, n] {
        if level > MAX_LEVEL {
            return Err(Error::Capacity {
                what: "level index",
                value: level,
                cap: MAX_LEVEL,
            });
        }
    }
    let h = params.h;
    let d = params.delta;
    let (lo, hi) = (m.min(n), m.max(n));
    let k = hi - lo;
    let (same, ab, ba) = overlap_weights(params, amps);

    let lag_same = laguerre_row(lo, k, 2.0 / h)[lo];
    let lag_cross = laguerre_row(lo, k, 2.0 * (1.0 + d * d) / h)[lo];
    // sqrt(lo!/hi!) (2/h)^{k/2}, kept in logs so large k stays finite
    let log_mag = 0.5 * (ln_gamma(lo as f64 + 1.0) - ln_gamma(hi as f64 + 1.0))
        + 0.5 * k as f64 * (2.0 / h).ln();
    let phase = C64::new(0.0, -1.0).powu(k as u32);
    let pref = phase * log_mag.exp();

    let minus = C64::new(1.0, -d).powu(k as u32);
    let plus = C64::new(1.0, d).powu(k as u32);
    let (c_fac, s_fac) = if m <= n { (minus, plus) } else { (plus, minus) };
    let value = pref * (same * lag_same + (ab * c_fac - ba * s_fac) * lag_cross);
    Ok(OverlapCoefficient { m, n, value })
}

/// Weights `(a, b)` in `T_nn = a·e^{−1/h}L_n(2/h) + b·e^{−(1+δ²)/h}L_n(2(1+δ²)/h)`.
pub(crate) fn diagonal_weights(params: &TwoOrbitParams, amps: &AmplitudeSolution) -> (C64, C64) {
    let (same, ab, ba) = overlap_weights(params, amps);
    (same, ab - ba)
}

/// `T_nn` for `n = 0..=n_max` from two Laguerre rows.
pub fn transfer_diagonal_row(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    n_max: usize,
) -> Result<Vec<C64>> {
    require_unit_omega(params)?;
    let h = params.h;
    let d2 = params.delta * params.delta;
    let (same, cross) = diagonal_weights(params, amps);
    let l1 = laguerre_row(n_max, 0, 2.0 / h);
    let l2 = laguerre_row(n_max, 0, 2.0 * (1.0 + d2) / h);
    Ok(l1.iter().zip(&l2).map(|(a, b)| same * a + cross * b).collect())
}

/// Orbital densities `(ρ_n, ρ̃_n)` for `n = 0..=n_max`.
///
/// The `e^{−iθ/2}` phases cancel in `|φ_n|²`, so this holds for any `ω(x)`.
pub fn orbital_density_row(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    n_max: usize,
) -> Vec<(f64, f64)> {
    let (c, s) = params.half_angles();
    let (a2, b2) = (amps.a.norm_sqr(), amps.b.norm_sqr());
    let total = a2 + b2;
    let k = params.g / params.delta * (amps.a * amps.b.conj()).re;
    let d2 = params.delta * params.delta;
    let overlap = laguerre_row(n_max, 0, 2.0 * d2 / params.h);
    let rho_first0 = a2 * c * c + b2 * s * s;
    overlap
        .iter()
        .map(|l| {
            let rho = rho_first0 - k * l;
            (rho, total - rho)
        })
        .collect()
}

pub fn orbital_density(params: &TwoOrbitParams, amps: &AmplitudeSolution, n: usize) -> Result<(f64, f64)> {
    if n > MAX_LEVEL {
        return Err(Error::Capacity {
            what: "level index",
            value: n,
            cap: MAX_LEVEL,
        });
    }
    Ok(orbital_density_row(params, amps, n)[n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    Overlap,
    Charge,
}

/// Everything a trace needs apart from its grid. The `h` stored in `params`
/// is ignored; every sample sets its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSetup {
    pub params: TwoOrbitParams,
    pub densities: DensityPair,
    pub branch: PhaseBranch,
    pub energy: f64,
    pub gamma: f64,
}

impl TraceSetup {
    pub fn new(params: TwoOrbitParams, energy: f64, gamma: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(domain(format!("energy must be positive, got {energy}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain(format!("broadening must be positive, got {gamma}")));
        }
        Ok(Self {
            params,
            densities: DensityPair::default(),
            branch: PhaseBranch::default(),
            energy,
            gamma,
        })
    }

    pub fn with_densities(mut self, densities: DensityPair) -> Self {
        self.densities = densities;
        self
    }

    pub fn with_branch(mut self, branch: PhaseBranch) -> Self {
        self.branch = branch;
        self
    }

    /// Parameters and solved amplitudes at one value of `h`.
    pub fn at(&self, h: f64) -> Result<(TwoOrbitParams, AmplitudeSolution)> {
        let p = self.params.at_h(h);
        let (ta, tb) = self.branch.phases();
        let amps = solve_amplitudes(&p, &self.densities, ta, tb)?;
        Ok((p, amps))
    }

    /// Highest comb tooth kept at `h`: `E/2h + 10Γ`.
    pub fn comb_top(&self, h: f64) -> Result<usize> {
        let top = (self.energy / (2.0 * h) + 10.0 * self.gamma).floor();
        if top > MAX_LEVEL as f64 {
            return Err(Error::Capacity {
                what: "comb level",
                value: top as usize,
                cap: MAX_LEVEL,
            });
        }
        Ok(top as usize)
    }

    /// `F0 = E/2`, the free-orbit frequency.
    pub fn f0(&self) -> f64 {
        0.5 * self.energy
    }
}

/// A sampled function of inverse field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTrace {
    pub grid: Vec<f64>,
    pub values: Vec<C64>,
    pub energy: f64,
    pub gamma: f64,
    pub kind: TraceKind,
}

/// `samples` uniform points from `min` to `max` inclusive.
pub fn uniform_grid(min: f64, max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && max > min) || samples < 2 {
        return Err(domain(format!(
            "grid needs min < max and at least 2 samples, got [{min}, {max}] with {samples}"
        )));
    }
    let step = (max - min) / (samples - 1) as f64;
    Ok((0..samples).map(|i| min + i as f64 * step).collect())
}

fn check_inverse_field_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(domain("inverse-field samples must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("inverse-field grid must be strictly increasing"));
    }
    Ok(())
}

fn comb_weights(setup: &TraceSetup, h: f64, top: usize) -> Vec<f64> {
    (0..=top)
        .map(|n| gaussian_comb(n as i64, setup.energy, h, setup.gamma))
        .collect()
}

/// Comb sum `Σ_n w_n(h) f_n(h)` at one inverse-field value.
fn trace_point(setup: &TraceSetup, inv_h: f64, kind: TraceKind) -> Result<C64> {
    let h = 1.0 / inv_h;
    let top = setup.comb_top(h)?;
    let weights = comb_weights(setup, h, top);
    let (p, amps) = setup.at(h)?;
    let terms: Vec<C64> = match kind {
        TraceKind::Overlap => transfer_diagonal_row(&p, &amps, top)?,
        TraceKind::Charge => orbital_density_row(&p, &amps, top)
            .into_iter()
            .map(|(a, b)| C64::new(a - b, 0.0))
            .collect(),
    };
    Ok(weights.iter().zip(&terms).map(|(w, t)| *w * t).sum())
}

fn build_trace(setup: &TraceSetup, grid: &[f64], kind: TraceKind, exec: Exec) -> Result<SpectrumTrace> {
    check_inverse_field_grid(grid)?;
    let values: Result<Vec<C64>> = exec
        .map(grid.len(), |i| trace_point(setup, grid[i], kind))
        .into_iter()
        .collect();
    Ok(SpectrumTrace {
        grid: grid.to_vec(),
        values: values?,
        energy: setup.energy,
        gamma: setup.gamma,
        kind,
    })
}

/// Broadened overlap trace `T(h) = Σ_n δ_Γ(n − E/2h) T_nn(h)`.
pub fn transfer_trace(setup: &TraceSetup, grid: &[f64], exec: Exec) -> Result<SpectrumTrace> {
    require_unit_omega(&setup.params)?;
    build_trace(setup, grid, TraceKind::Overlap, exec)
}

/// Broadened charge-transfer trace `Δρ(h) = Σ_n δ_Γ(n − E/2h)(ρ_n − ρ̃_n)`.
pub fn charge_trace(setup: &TraceSetup, grid: &[f64], exec: Exec) -> Result<SpectrumTrace> {
    build_trace(setup, grid, TraceKind::Charge, exec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<C64>,
    pub peaks: Vec<Peak>,
    /// Width of one resolution cell in frequency.
    pub resolution: f64,
}

/// Fraction of the global maximum a peak must exceed.
pub const PEAK_THRESHOLD: f64 = 0.05;

/// Local maxima of `|A|` above [`PEAK_THRESHOLD`] of the global maximum that
/// also dominate a neighbourhood of two resolution cells on either side,
/// refined by a three-point parabola.
///
/// The neighbourhood rule removes the side lobes of a finite comb, which sit
/// one resolution cell from a main peak and can exceed the bare threshold.
pub fn detect_peaks(frequencies: &[f64], magnitudes: &[f64], resolution: f64) -> Vec<Peak> {
    let n = magnitudes.len();
    if n < 3 {
        return Vec::new();
    }
    let top = magnitudes.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Vec::new();
    }
    let df = (frequencies[n - 1] - frequencies[0]) / (n - 1) as f64;
    let reach = ((2.0 * resolution / df).ceil() as usize).max(1);
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let y = magnitudes[i];
        if !(y > magnitudes[i - 1] && y >= magnitudes[i + 1]) || y <= PEAK_THRESHOLD * top {
            continue;
        }
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(n - 1);
        if magnitudes[lo..=hi].iter().any(|&v| v > y) {
            continue;
        }
        let (ym, yp) = (magnitudes[i - 1], magnitudes[i + 1]);
        let curv = ym - 2.0 * y + yp;
        let offset = if curv < 0.0 { 0.5 * (ym - yp) / curv } else { 0.0 };
        peaks.push(Peak {
            frequency: frequencies[i] + offset * df,
            amplitude: y - 0.25 * (ym - yp) * offset,
        });
    }
    peaks
}

/// Comb coefficients `c_n = f_n(F0/n)` for `n = 1..=n_max`.
pub fn comb_coefficients(setup: &TraceSetup, kind: TraceKind, n_max: usize, exec: Exec) -> Result<Vec<C64>> {
    if kind == TraceKind::Overlap {
        require_unit_omega(&setup.params)?;
    }
    let f0 = setup.f0();
    exec.map(n_max, |i| {
        let n = i + 1;
        let (p, amps) = setup.at(f0 / n as f64)?;
        Ok(match kind {
            TraceKind::Overlap => transfer_diagonal_row(&p, &amps, n)?[n],
            TraceKind::Charge => {
                let (a, b) = orbital_density_row(&p, &amps, n)[n];
                C64::new(a - b, 0.0)
            }
        })
    })
    .into_iter()
    .collect()
}

/// Number of comb teeth inside a window ending at `inv_h_max`.
pub fn comb_terms(energy: f64, inv_h_max: f64) -> Result<usize> {
    let n = (0.5 * energy * inv_h_max).ceil();
    if !(n >= 1.0) {
        return Err(domain("the inverse-field window holds no comb tooth"));
    }
    if n > MAX_LEVEL as f64 {
        return Err(Error::Capacity {
            what: "comb terms",
            value: n as usize,
            cap: MAX_LEVEL,
        });
    }
    Ok(n as usize)
}

/// Exact comb transform `A(F) = (1/F0) Σ_{n=1}^{n_max} c_n e^{−2πinF/F0}`
/// with `n_max = ⌈E h⁻¹_max / 2⌉`.
pub fn comb_fourier(
    setup: &TraceSetup,
    kind: TraceKind,
    inv_h_max: f64,
    frequencies: &[f64],
    exec: Exec,
) -> Result<FourierSpectrum> {
    let n_max = comb_terms(setup.energy, inv_h_max)?;
    let coeffs = comb_coefficients(setup, kind, n_max, exec)?;
    let f0 = setup.f0();
    let amplitudes = exec.map(frequencies.len(), |i| {
        let step = C64::from_polar(1.0, -2.0 * PI * frequencies[i] / f0);
        let mut rot = step;
        let mut acc = C64::new(0.0, 0.0);
        for c in &coeffs {
            acc += c * rot;
            rot *= step;
        }
        acc / f0
    });
    let resolution = f0 / n_max as f64;
    let mags: Vec<f64> = amplitudes.iter().map(|a| a.norm()).collect();
    Ok(FourierSpectrum {
        peaks: detect_peaks(frequencies, &mags, resolution),
        frequencies: frequencies.to_vec(),
        amplitudes,
        resolution,
    })
}

/// Flat-window trapezoid transform `∫ trace(u) e^{−2πiFu} du` of a sampled
/// trace, the numerical counterpart of [`comb_fourier`].
pub fn trace_fourier(trace: &SpectrumTrace, frequencies: &[f64], exec: Exec) -> Result<FourierSpectrum> {
    let g = &trace.grid;
    if g.len() < 2 {
        return Err(domain("trace needs at least two samples"));
    }
    let amplitudes = exec.map(frequencies.len(), |i| {
        let f = frequencies[i];
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..g.len() - 1 {
            let du = g[k + 1] - g[k];
            let a = trace.values[k] * C64::from_polar(1.0, -2.0 * PI * f * g[k]);
            let b = trace.values[k + 1] * C64::from_polar(1.0, -2.0 * PI * f * g[k + 1]);
            acc += 0.5 * du * (a + b);
        }
        acc
    });
    let resolution = 1.0 / (g[g.len() - 1] - g[0]);
    let mags: Vec<f64> = amplitudes.iter().map(|a| a.norm()).collect();
    Ok(FourierSpectrum {
        peaks: detect_peaks(frequencies, &mags, resolution),
        frequencies: frequencies.to_vec(),
        amplitudes,
        resolution,
    })
}
