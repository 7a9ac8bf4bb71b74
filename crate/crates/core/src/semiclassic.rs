//! Saddle-point forms of the comb-resummed Laguerre series: orbit areas,
//! beating frequencies `F_c(w)`, and semiclassical traces.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ladder::C64;
use crate::oscillations::{
    diagonal_weights, orbital_density_row, SpectrumTrace, TraceKind, TraceSetup,
};
use crate::specfun::{gaussian_comb, laguerre_row};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalFrequency {
    pub w: f64,
    pub energy: f64,
    /// `F = (E arcsin sqrt(w/E) + sqrt(w(E − w)))/2π`
    pub f: f64,
    /// `tan χ = sqrt(w/(E − w))`
    pub chi: f64,
}

fn check_area(w: f64, energy: f64) -> Result<()> {
    if !(w > 0.0 && w < energy) {
        return Err(domain(format!("need 0 < w < E, got w = {w}, E = {energy}")));
    }
    Ok(())
}

pub fn freq_fc(w: f64, energy: f64) -> Result<SemiclassicalFrequency> {
    check_area(w, energy)?;
    let f = (energy * (w / energy).sqrt().asin() + (w * (energy - w)).sqrt()) / (2.0 * PI);
    let chi = (w / (energy - w)).sqrt().atan();
    Ok(SemiclassicalFrequency { w, energy, f, chi })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitAreas {
    pub a_alpha: f64,
    pub a_beta: f64,
    pub a_0: f64,
}

impl OrbitAreas {
    pub fn f_alpha(&self) -> f64 {
        self.a_alpha / (2.0 * PI)
    }

    pub fn f_beta(&self) -> f64 {
        self.a_beta / (2.0 * PI)
    }

    pub fn f_0(&self) -> f64 {
        self.a_0 / (2.0 * PI)
    }
}

/// Pocket area `A_α` at `g → 0`.
pub fn area_alpha(energy: f64, omega0: f64, x_c: f64) -> Result<f64> {
    let w = omega0 * omega0 + x_c * x_c;
    if !(energy > w) {
        return Err(Error::NoPocket {
            energy,
            threshold: w,
        });
    }
    let e = energy - w;
    Ok(2.0 * energy * (e / energy).sqrt().asin() - 2.0 * (e * w).sqrt())
}

pub fn orbit_areas(energy: f64, omega0: f64, x_c: f64) -> Result<OrbitAreas> {
    let a_alpha = area_alpha(energy, omega0, x_c)?;
    let a_0 = PI * energy;
    Ok(OrbitAreas {
        a_alpha,
        a_beta: 2.0 * a_0 - a_alpha,
        a_0,
    })
}

/// `sqrt(h/π)(w(E − w))^{−1/4}`, the saddle-point envelope.
pub fn saddle_envelope(h: f64, w: f64, energy: f64) -> f64 {
    (h / PI).sqrt() * (w * (energy - w)).powf(-0.25)
}

/// Leading saddle-pair approximation to `e^{−w/h} L_n(2w/h)` at level energy
/// `E_n = 2hn`. Returns zero past the turning point `w ≥ E_n`, where the exact
/// value is exponentially small.
pub fn saddle_tooth(h: f64, w: f64, level_energy: f64) -> f64 {
    if !(w > 0.0 && w < level_energy) {
        return 0.0;
    }
    let fc = (level_energy * (w / level_energy).sqrt().asin() + (w * (level_energy - w)).sqrt())
        / (2.0 * PI);
    let chi = (w / (level_energy - w)).sqrt().atan();
    saddle_envelope(h, w, level_energy) * (2.0 * PI * fc / h + FRAC_PI_4 + chi).sin()
}

fn comb_range(energy: f64, h: f64, gamma: f64) -> (usize, usize) {
    let centre = energy / (2.0 * h);
    let lo = (centre - 10.0 * gamma).ceil().max(1.0) as usize;
    let hi = (centre + 10.0 * gamma).floor().max(0.0) as usize;
    (lo, hi)
}

/// `G(h, w) ≈ Σ_n δ_Γ(n − E/2h) · saddle_tooth(h, w, 2hn)`.
///
/// Each comb tooth takes the saddle form at its own level energy; as `Γ → 0`
/// only `E_n = E` survives and this is the single-energy saddle result.
pub fn g_saddle(h: f64, w: f64, energy: f64, gamma: f64) -> Result<f64> {
    check_area(w, energy)?;
    if !(h > 0.0 && gamma > 0.0) {
        return Err(domain("h and the broadening must be positive"));
    }
    let (lo, hi) = comb_range(energy, h, gamma);
    Ok((lo..=hi)
        .map(|n| gaussian_comb(n as i64, energy, h, gamma) * saddle_tooth(h, w, 2.0 * h * n as f64))
        .sum())
}

/// The exact comb sum `Σ_n δ_Γ(n − E/2h) e^{−w/h} L_n(2w/h)` that
/// [`g_saddle`] approximates.
pub fn g_exact(h: f64, w: f64, energy: f64, gamma: f64) -> Result<f64> {
    if !(h > 0.0 && gamma > 0.0 && w > 0.0) {
        return Err(domain("h, w and the broadening must be positive"));
    }
    let (_, hi) = comb_range(energy, h, gamma);
    let row = laguerre_row(hi, 0, 2.0 * w / h);
    Ok((0..=hi)
        .map(|n| gaussian_comb(n as i64, energy, h, gamma) * row[n])
        .sum())
}

/// `φ'(x)` for `φ(x) = ½Ex − 2iw/(e^{−ix} − 1)`.
pub fn saddle_phase_derivative(x: C64, w: f64, energy: f64) -> C64 {
    let e = (-C64::i() * x).exp();
    0.5 * energy + 2.0 * w * e / ((e - 1.0) * (e - 1.0))
}

/// The leading stationary points `±2 arcsin sqrt(w/E)`.
pub fn saddle_points(w: f64, energy: f64) -> Result<[f64; 2]> {
    check_area(w, energy)?;
    let x = 2.0 * (w / energy).sqrt().asin();
    Ok([x, -x])
}

fn semiclassical_point(setup: &TraceSetup, inv_h: f64, kind: TraceKind) -> Result<C64> {
    let h = 1.0 / inv_h;
    let (p, amps) = setup.at(h)?;
    let (lo, hi) = comb_range(setup.energy, h, setup.gamma);
    let d2 = p.delta * p.delta;
    let mut acc = C64::new(0.0, 0.0);
    match kind {
        TraceKind::Overlap => {
            // T_nn = a·e^{−1/h}L_n(2/h) + b·e^{−(1+δ²)/h}L_n(2(1+δ²)/h)
            let (same, cross) = diagonal_weights(&p, &amps);
            for n in lo..=hi {
                let en = 2.0 * h * n as f64;
                let w = gaussian_comb(n as i64, setup.energy, h, setup.gamma);
                acc += w * (same * saddle_tooth(h, 1.0, en) + cross * saddle_tooth(h, 1.0 + d2, en));
            }
        }
        TraceKind::Charge => {
            let rows = orbital_density_row(&p, &amps, 0);
            let offset = rows[0].0 - rows[0].1;
            let k = 2.0 * p.g / p.delta * (amps.a * amps.b.conj()).re;
            let decay = (-d2 / h).exp();
            for n in lo..=hi {
                let en = 2.0 * h * n as f64;
                let w = gaussian_comb(n as i64, setup.energy, h, setup.gamma);
                // ρ_n − ρ̃_n = (ρ0 − ρ̃0) + K(e^{−δ²/h} − e^{−δ²/h}L_n(2δ²/h))
                acc += w * (offset + k * (decay - saddle_tooth(h, d2, en)));
            }
        }
    }
    Ok(acc)
}

fn semiclassical_trace(setup: &TraceSetup, grid: &[f64], kind: TraceKind, exec: Exec) -> Result<SpectrumTrace> {
    if grid.iter().any(|v| !(*v > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("inverse-field grid must be positive and strictly increasing"));
    }
    let values: Result<Vec<C64>> = exec
        .map(grid.len(), |i| semiclassical_point(setup, grid[i], kind))
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

/// Semiclassical `T(h)`: the exact comb with each Laguerre product replaced
/// by its saddle form.
pub fn transfer_semiclassical(setup: &TraceSetup, grid: &[f64], exec: Exec) -> Result<SpectrumTrace> {
    let p = setup.params;
    if p.profile != crate::model2::OmegaProfile::Constant || (p.omega0 - 1.0).abs() > 1e-12 {
        return Err(Error::UnsupportedClosedForm(
            "the semiclassical overlap needs a constant omega0 = 1".into(),
        ));
    }
    semiclassical_trace(setup, grid, TraceKind::Overlap, exec)
}

/// Semiclassical `Δρ(h)`.
pub fn charge_semiclassical(setup: &TraceSetup, grid: &[f64], exec: Exec) -> Result<SpectrumTrace> {
    let d2 = setup.params.delta * setup.params.delta;
    if !(d2 < setup.energy) {
        return Err(domain(format!(
            "the charge beating needs delta^2 = {d2} below E = {}",
            setup.energy
        )));
    }
    semiclassical_trace(setup, grid, TraceKind::Charge, exec)
}

/// Root-mean-square of `|a − b|` over samples with `lo ≤ u ≤ hi`, relative to
/// the root-mean-square of `|a|` there.
pub fn relative_rms(exact: &SpectrumTrace, approx: &SpectrumTrace, lo: f64, hi: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((u, a), b) in exact.grid.iter().zip(&exact.values).zip(&approx.values) {
        if *u >= lo && *u <= hi {
            num += (a - b).norm_sqr();
            den += a.norm_sqr();
        }
    }
    (num / den).sqrt()
}
