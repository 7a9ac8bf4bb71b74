//! The invariant suite behind the `validate` command: every closed form is
//! compared with an oracle and every check reports its measured value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{
    bessel_eigenvalues, build_tilde_q, chain_fermi_contours, chain_ground_state, eigen_tridiagonal,
    quartic_n1, ChainParams, ChainSpectrum, Coefficients,
};
use crate::error::Result;
use crate::exec::Exec;
use crate::ladder::commutator_deviation;
use crate::model2::{derive_params, eigenfunction, fermi_contours, solve_amplitudes, DensityPair};
use crate::oracle::{
    annihilation_residual, creation_check, densities_by_quadrature, eigen_residual_fd, grid_spectrum,
    overlap_matrix, QuadratureSpec,
};
use crate::oscillations::{
    charge_trace, comb_fourier, orbital_density_row, transfer_coefficient, transfer_trace, uniform_grid,
    Peak, TraceKind, TraceSetup,
};
use crate::semiclassic::{area_alpha, charge_semiclassical, freq_fc, relative_rms, transfer_semiclassical};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured ≤ threshold`.
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    fn failed(name: &str, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured: f64::NAN,
            threshold,
            pass: false,
        }
    }
}

/// Parameters the suite runs at. The defaults are the parameters of the
/// reference overlap and charge traces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    pub g: f64,
    pub x_c: f64,
    pub energy: f64,
    pub gamma: f64,
    pub h: f64,
    pub densities: DensityPair,
    /// Largest level in the overlap comparison.
    pub level_max: usize,
    /// Largest chain index checked.
    pub chain_max: usize,
    pub grid_points: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            g: 0.2,
            x_c: 1.0,
            energy: 3.0,
            gamma: 0.1,
            h: 1.0,
            densities: DensityPair::default(),
            level_max: 10,
            chain_max: 3,
            grid_points: 4000,
        }
    }
}

fn guarded(name: &str, threshold: f64, f: impl FnOnce() -> Result<f64>) -> Check {
    match f() {
        Ok(v) => Check::at_most(name, v, threshold),
        Err(_) => Check::failed(name, threshold),
    }
}

pub fn run_validation(cfg: &ValidationConfig, exec: Exec) -> Vec<Check> {
    let mut out = Vec::new();

    out.push(guarded("commutator_two_orbit", 1e-12, || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = derive_params(
                rng.random_range(0.0..1.0),
                rng.random_range(0.1..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.05..2.0),
            )?;
            worst = worst.max(commutator_deviation(&p, rng.random_range(-5.0..5.0)));
        }
        Ok(worst)
    }));

    out.push(guarded("commutator_chain", 1e-12, || {
        let mut worst: f64 = 0.0;
        for n in 0..=cfg.chain_max {
            let p = ChainParams::new(n, cfg.g, cfg.x_c, 0.7, cfg.h)?;
            for x in [-3.0, -0.5, 0.0, 0.8, 2.5] {
                worst = worst.max(commutator_deviation(&p, x));
            }
        }
        Ok(worst)
    }));

    let two = || -> Result<_> {
        let p = derive_params(cfg.g, cfg.x_c, 1.0, cfg.h)?;
        let amps = solve_amplitudes(&p, &cfg.densities, 0.0, 0.0)?;
        Ok((p, amps))
    };

    out.push(guarded("annihilation_two_orbit", 1e-10, || {
        let (p, amps) = two()?;
        let spec = QuadratureSpec::for_states(p.delta, 0, p.h);
        annihilation_residual(&eigenfunction(&p, &amps, 0), &spec, exec)
    }));

    out.push(guarded("fd_eigen_relation", 1e-6, || {
        let (p, amps) = two()?;
        let xs: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
        let mut worst: f64 = 0.0;
        for n in 0..=5 {
            let st = eigenfunction(&p, &amps, n);
            worst = worst.max(eigen_residual_fd(&st, st.energy(), &xs, 1e-3));
        }
        Ok(worst)
    }));

    out.push(guarded("creation_factor", 1e-8, || {
        let (p, amps) = two()?;
        let spec = QuadratureSpec::for_states(p.delta, 6, p.h);
        let mut worst: f64 = 0.0;
        for n in 0..5 {
            let c = creation_check(&eigenfunction(&p, &amps, n), &eigenfunction(&p, &amps, n + 1), &spec, exec)?;
            worst = worst.max((c.factor - ((n + 1) as f64).sqrt()).norm()).max(c.residual);
        }
        Ok(worst)
    }));

    out.push(guarded("overlap_closed_vs_quadrature", 1e-8, || {
        let (p, amps) = two()?;
        let k = cfg.level_max;
        let spec = QuadratureSpec::for_states(p.delta, k, p.h);
        let quad = overlap_matrix(&p, &amps, k, &spec, exec)?;
        let mut worst: f64 = 0.0;
        for m in 0..=k {
            for n in 0..=k {
                let t = transfer_coefficient(&p, &amps, m, n)?.value;
                let scale = t.norm().max(1e-12);
                worst = worst.max((t - quad[m][n]).norm() / scale);
            }
        }
        Ok(worst)
    }));

    out.push(guarded("density_closed_vs_quadrature", 1e-8, || {
        let (p, amps) = two()?;
        let k = 2 * cfg.level_max;
        let spec = QuadratureSpec::for_states(p.delta, k, p.h);
        let quad = densities_by_quadrature(&p, &amps, k, &spec, exec)?;
        let closed = orbital_density_row(&p, &amps, k);
        Ok(closed
            .iter()
            .zip(&quad)
            .map(|(a, b)| ((a.0 - b.0).abs() / a.0.abs()).max((a.1 - b.1).abs() / a.1.abs()))
            .fold(0.0, f64::max))
    }));

    out.push(guarded("grid_spectrum", 1e-3, || {
        let p = derive_params(cfg.g, cfg.x_c, 1.0, cfg.h)?;
        let l = QuadratureSpec::min_half_width(p.delta, 4, p.h).max(12.0);
        let ev = grid_spectrum(&p, cfg.grid_points, l, 8, exec)?;
        Ok(ev
            .iter()
            .enumerate()
            .map(|(i, e)| (e - 2.0 * p.h * (i / 2) as f64).abs())
            .fold(0.0, f64::max))
    }));

    out.push(guarded("pocket_area", 1e-3, || {
        let want = area_alpha(cfg.energy, 1.0, cfg.x_c)?;
        let p = derive_params(1e-3, cfg.x_c, 1.0, 1.0)?;
        let pocket = fermi_contours(&p, cfg.energy, None, exec)?
            .iter()
            .filter(|c| c.line.closed)
            .map(|c| c.line.area())
            .fold(f64::INFINITY, f64::min);
        Ok((pocket - want).abs() / want)
    }));

    let setup = || -> Result<TraceSetup> {
        let p = derive_params(cfg.g, cfg.x_c, 1.0, 1.0)?;
        Ok(TraceSetup::new(p, cfg.energy, cfg.gamma)?.with_densities(cfg.densities))
    };

    out.push(guarded("overlap_doublet", 0.02, || {
        let s = setup()?;
        let d2 = s.params.delta * s.params.delta;
        let fc = freq_fc(1.0 + d2, cfg.energy)?.f;
        let spec = comb_fourier(&s, TraceKind::Overlap, 60.0, &uniform_grid(0.0, 3.0, 3001)?, exec)?;
        let expected = [fc, s.f0() - fc, s.f0() + fc, 2.0 * s.f0() - fc];
        Ok(nearest_peak_error(&spec.peaks, &expected))
    }));

    out.push(guarded("charge_beating", 0.003, || {
        let s = setup()?;
        let d2 = s.params.delta * s.params.delta;
        let fc = freq_fc(d2, cfg.energy)?.f;
        let spec = comb_fourier(&s, TraceKind::Charge, 60.0, &uniform_grid(0.0, 3.0, 3001)?, exec)?;
        Ok(nearest_peak_error(&spec.peaks, &[fc]))
    }));

    out.push(guarded("semiclassical_improvement", 1.0, || {
        let s = setup()?;
        // ratio of the deviation on h⁻¹ ∈ [10, 20] to that on [1, 5]
        let grid = uniform_grid(1.0, 20.0, 4096)?;
        let (te, ts) = (transfer_trace(&s, &grid, exec)?, transfer_semiclassical(&s, &grid, exec)?);
        let (ce, cs) = (charge_trace(&s, &grid, exec)?, charge_semiclassical(&s, &grid, exec)?);
        let t = relative_rms(&te, &ts, 10.0, 20.0) / relative_rms(&te, &ts, 1.0, 5.0);
        let c = relative_rms(&ce, &cs, 10.0, 20.0) / relative_rms(&ce, &cs, 1.0, 5.0);
        Ok(t.max(c))
    }));

    out.push(guarded("chain_eigenvalue_agreement", 1e-10, || {
        let mut worst: f64 = 0.0;
        for r in [0.05, 0.1, 0.5] {
            for n in 0..=cfg.chain_max {
                let b = bessel_eigenvalues(n, r)?;
                let t = eigen_tridiagonal(&build_tilde_q(n, r, 1.0)?);
                for (mu, l) in b.iter().zip(t.iter().rev()) {
                    worst = worst.max((mu - 0.5 * (l - 1.0)).abs());
                }
                if n == 1 {
                    for (mu, q) in b.iter().zip(quartic_n1(r)?) {
                        worst = worst.max((mu - q).abs());
                    }
                }
            }
        }
        Ok(worst)
    }));

    out.push(guarded("chain_annihilation", 1e-8, || {
        let mut worst: f64 = 0.0;
        for n in 0..=cfg.chain_max {
            let p = ChainParams::new(n, cfg.g, cfg.x_c, 1.0, cfg.h)?;
            let spec = ChainSpectrum::of(&p)?;
            let st = chain_ground_state(&p, &spec, Coefficients::Densities(vec![1.0; p.orbits()]))?;
            let q = QuadratureSpec::for_states(spec.lambda[0].abs() * p.x_c, 0, p.h);
            worst = worst.max(annihilation_residual(&st, &q, exec)?);
            for d in st.densities() {
                worst = worst.max((d - 1.0).abs());
            }
        }
        Ok(worst)
    }));

    out.push(guarded("chain_closed_orbits", 0.0, || {
        let p = ChainParams::new(1, 0.1, 1.0, 0.5, 1.0)?;
        let loops = chain_fermi_contours(&p, 2.0, None, exec)?.iter().filter(|c| c.line.closed).count();
        Ok((loops as f64 - 4.0).abs())
    }));

    out
}

fn nearest_peak_error(peaks: &[Peak], expected: &[f64]) -> f64 {
    expected
        .iter()
        .map(|f| peaks.iter().map(|p| (p.frequency - f).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}
