//! The two-orbit model: parameters, `Q(x)`, classical Fermi surface, amplitude
//! solving and exact Landau states.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::contour::{marching_squares, GridSpec, Polyline};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ladder::{LadderField, MultiComponentState, C64};
use crate::specfun::hermite_functions_into;

/// Shape of the internal current `ω(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OmegaProfile {
    /// `ω(x) = ω0`
    #[default]
    Constant,
    /// `ω(x) = ω0 x`
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoOrbitParams {
    pub g: f64,
    pub x_c: f64,
    pub omega0: f64,
    pub h: f64,
    pub delta: f64,
    pub phi_rot: f64,
    pub profile: OmegaProfile,
}

pub fn derive_params(g: f64, x_c: f64, omega0: f64, h: f64) -> Result<TwoOrbitParams> {
    if !(x_c > 0.0 && x_c.is_finite()) {
        return Err(domain(format!(
            "x_c must be positive, got {x_c} (coincident orbit centres are not supported)"
        )));
    }
    if !(g >= 0.0 && g.is_finite()) {
        return Err(domain(format!("g must be non-negative, got {g}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain(format!("h must be positive, got {h}")));
    }
    if !omega0.is_finite() {
        return Err(domain(format!("omega0 must be finite, got {omega0}")));
    }
    Ok(TwoOrbitParams {
        g,
        x_c,
        omega0,
        h,
        delta: g.hypot(x_c),
        phi_rot: g.atan2(x_c),
        profile: OmegaProfile::Constant,
    })
}

impl TwoOrbitParams {
    pub fn with_profile(mut self, profile: OmegaProfile) -> Self {
        self.profile = profile;
        self
    }

    /// Same physical parameters at another `h`.
    pub fn at_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn omega(&self, x: f64) -> f64 {
        match self.profile {
            OmegaProfile::Constant => self.omega0,
            OmegaProfile::Linear => self.omega0 * x,
        }
    }

    fn omega_prime(&self) -> f64 {
        match self.profile {
            OmegaProfile::Constant => 0.0,
            OmegaProfile::Linear => self.omega0,
        }
    }

    /// Wavefunction phase `θ(x) = (2/h)∫₀ˣ ω`.
    pub fn theta(&self, x: f64) -> f64 {
        match self.profile {
            OmegaProfile::Constant => 2.0 * self.omega0 * x / self.h,
            OmegaProfile::Linear => self.omega0 * x * x / self.h,
        }
    }

    pub fn theta_prime(&self, x: f64) -> f64 {
        2.0 * self.omega(x) / self.h
    }

    /// `(cos φ_rot/2, sin φ_rot/2)`.
    pub fn half_angles(&self) -> (f64, f64) {
        let half = 0.5 * self.phi_rot;
        (half.cos(), half.sin())
    }
}

impl LadderField for TwoOrbitParams {
    fn dim(&self) -> usize {
        2
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn q_into(&self, x: f64, out: &mut [C64]) {
        let w = self.omega(x);
        let ph = C64::from_polar(self.g, self.theta(x));
        out[0] = C64::new(x + self.x_c, w);
        out[1] = ph.conj();
        out[2] = ph;
        out[3] = C64::new(x - self.x_c, -w);
    }

    fn dq_into(&self, x: f64, out: &mut [C64]) {
        let wp = self.omega_prime();
        let ph = C64::from_polar(self.g * self.theta_prime(x), self.theta(x));
        out[0] = C64::new(1.0, wp);
        out[1] = -C64::i() * ph.conj();
        out[2] = C64::i() * ph;
        out[3] = C64::new(1.0, -wp);
    }
}

/// `Q(x)` as a 2×2 array.
pub fn q_matrix(params: &TwoOrbitParams, x: f64) -> [[C64; 2]; 2] {
    let q = params.q(x);
    [[q[0], q[1]], [q[2], q[3]]]
}

/// `P(x) = ½(Q' + Q'^†) + (1/2h)[Q, Q^†]` as a 2×2 array.
pub fn commutator_p(params: &TwoOrbitParams, x: f64) -> [[C64; 2]; 2] {
    let p = crate::ladder::commutator_p(params, x);
    [[p[0], p[1]], [p[2], p[3]]]
}

/// Classical Hamiltonian `(Q_cl + ip)^†(Q_cl + ip)` at a phase-space point.
/// The phases `e^{±iθ}` are a gauge and drop out classically.
pub fn classical_matrix(params: &TwoOrbitParams, x: f64, p: f64) -> [[C64; 2]; 2] {
    let w = params.omega(x);
    let m = [
        [C64::new(x + params.x_c, w + p), C64::new(params.g, 0.0)],
        [C64::new(params.g, 0.0), C64::new(x - params.x_c, p - w)],
    ];
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
        }
    }
    out
}

/// The two Fermi-surface sheets `(E₋, E₊)` at `(x, p)`.
pub fn energy_sheets(params: &TwoOrbitParams, x: f64, p: f64) -> (f64, f64) {
    let w = params.omega(x);
    let (g, xc) = (params.g, params.x_c);
    let base = p * p + w * w + x * x + xc * xc + g * g;
    let a = p * w + x * xc;
    let root = 2.0 * (a * a + g * g * (x * x + w * w)).sqrt();
    (base - root, base + root)
}

/// A closed or open piece of the Fermi surface, tagged with its sheet
/// (0 for `E₋`, 1 for `E₊`).
#[derive(Clone, Debug, PartialEq)]
pub struct FermiContour {
    pub sheet: usize,
    pub line: Polyline,
}

/// Default contour grid: 800 nodes per axis, wide enough to hold every orbit
/// of a chain whose outermost centre sits at `outer` for energy `energy`.
pub fn default_contour_grid(outer: f64, omega_reach: f64, energy: f64) -> GridSpec {
    let r = 1.2 * energy.max(0.0).sqrt();
    let half_x = 1.05 * (outer + r) + 0.1;
    let half_p = 1.05 * (omega_reach + r) + 0.1;
    GridSpec::square(half_x, half_p, 800)
}

/// Extracts the `energy` level set of every sheet, where `sheet_values`
/// returns all sheet energies at one phase-space point. Closed loops smaller
/// than one grid cell are marching-squares artefacts at tangency points and
/// are discarded.
pub fn contours_of_sheets<F>(
    sheets: usize,
    energy: f64,
    grid: &GridSpec,
    exec: Exec,
    sheet_values: F,
) -> Vec<FermiContour>
where
    F: Fn(f64, f64) -> Vec<f64> + Sync + Send,
{
    let rows = exec.map(grid.np, |j| {
        let p = grid.p(j);
        (0..grid.nx).map(|i| sheet_values(grid.x(i), p)).collect::<Vec<_>>()
    });
    let min_area = grid.cell_area();
    let mut out = Vec::new();
    for s in 0..sheets {
        let vals: Vec<f64> = rows.iter().flatten().map(|v| v[s]).collect();
        for line in marching_squares(&vals, grid, energy) {
            if line.closed && line.area() < min_area {
                continue;
            }
            out.push(FermiContour { sheet: s, line });
        }
    }
    out
}

/// Fermi contours `E±(x, p) = E` of the two-orbit model.
pub fn fermi_contours(
    params: &TwoOrbitParams,
    energy: f64,
    grid: Option<GridSpec>,
    exec: Exec,
) -> Result<Vec<FermiContour>> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(domain(format!("energy must be positive, got {energy}")));
    }
    let reach = match params.profile {
        OmegaProfile::Constant => params.omega0.abs(),
        OmegaProfile::Linear => params.omega0.abs() * (params.x_c + 1.2 * energy.sqrt()),
    };
    let grid = grid.unwrap_or_else(|| default_contour_grid(params.x_c, reach, energy));
    Ok(contours_of_sheets(2, energy, &grid, exec, |x, p| {
        let (lo, hi) = energy_sheets(params, x, p);
        vec![lo, hi]
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPair {
    pub rho0: f64,
    pub rho0_tilde: f64,
}

impl DensityPair {
    pub fn new(rho0: f64, rho0_tilde: f64) -> Result<Self> {
        if !(rho0 >= 0.0 && rho0_tilde >= 0.0 && rho0 + rho0_tilde > 0.0)
            || !(rho0 + rho0_tilde).is_finite()
        {
            return Err(domain(format!(
                "densities must be non-negative with positive sum, got ({rho0}, {rho0_tilde})"
            )));
        }
        Ok(Self { rho0, rho0_tilde })
    }

    pub fn total(&self) -> f64 {
        self.rho0 + self.rho0_tilde
    }
}

impl Default for DensityPair {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            rho0_tilde: 1.0,
        }
    }
}

/// How the amplitude phases are chosen when none are given explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PhaseBranch {
    /// `θ_A = θ_B = 0`
    #[default]
    Aligned,
    /// `θ_A = 0, θ_B = π/2`, so `cos(θ_A − θ_B) = 0` and the constraint no
    /// longer depends on `h`
    Orthogonal,
}

impl PhaseBranch {
    pub fn phases(self) -> (f64, f64) {
        match self {
            PhaseBranch::Aligned => (0.0, 0.0),
            PhaseBranch::Orthogonal => (0.0, FRAC_PI_2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeSolution {
    pub a: C64,
    pub b: C64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub phi_mix: f64,
}

impl AmplitudeSolution {
    /// Builds `A = sqrt(S) cos φ e^{iθ_A}`, `B = sqrt(S) sin φ e^{iθ_B}`.
    pub fn from_angles(total: f64, phi_mix: f64, theta_a: f64, theta_b: f64) -> Self {
        let r = total.sqrt();
        Self {
            a: C64::from_polar(r * phi_mix.cos(), theta_a),
            b: C64::from_polar(r * phi_mix.sin(), theta_b),
            theta_a,
            theta_b,
            phi_mix,
        }
    }
}

/// Solves the density constraint for the mixing angle by bisection on
/// `u = 2φ ∈ (0, π)`.
pub fn solve_amplitudes(
    params: &TwoOrbitParams,
    densities: &DensityPair,
    theta_a: f64,
    theta_b: f64,
) -> Result<AmplitudeSolution> {
    let s = densities.total();
    let r = (densities.rho0 - densities.rho0_tilde) / s * params.delta / params.x_c;
    if !(r.abs() < 1.0) {
        return Err(Error::InfeasibleDensity(format!(
            "|rho0 - rho0~|/(rho0 + rho0~) = {} must stay below x_c/delta = {}",
            (densities.rho0 - densities.rho0_tilde).abs() / s,
            params.x_c / params.delta
        )));
    }
    let kappa = params.g / params.x_c
        * (theta_a - theta_b).cos()
        * (-params.delta * params.delta / params.h).exp();
    let f = |u: f64| u.cos() - kappa * u.sin() - r;
    let (mut lo, mut hi) = (0.0, PI);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi_mix = 0.25 * (lo + hi);
    Ok(AmplitudeSolution::from_angles(s, phi_mix, theta_a, theta_b))
}

/// `ρ̃0/ρ0 = tan²(φ_rot/2) = g²/(x_c + δ)²` for the `B = 0` configuration.
pub fn density_ratio_b_zero(params: &TwoOrbitParams) -> f64 {
    let t = params.g / (params.x_c + params.delta);
    t * t
}

/// Exact Landau state `Ψ_n = (φ_n, φ̃_n)` with energy `2hn`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandauState {
    pub n: usize,
    pub params: TwoOrbitParams,
    pub amps: AmplitudeSolution,
}

pub fn eigenfunction(params: &TwoOrbitParams, amps: &AmplitudeSolution, n: usize) -> LandauState {
    LandauState {
        n,
        params: *params,
        amps: *amps,
    }
}

/// `h^{-1/4} ψ_n(y/sqrt h)` and its `y`-derivative, the oscillator function of
/// width `sqrt h`. `buf` is scratch space.
pub(crate) fn oscillator_with_derivative(n: usize, y: f64, h: f64, buf: &mut Vec<f64>) -> (f64, f64) {
    let sh = h.sqrt();
    hermite_functions_into(n + 1, y / sh, buf);
    let norm = h.powf(-0.25);
    let nf = n as f64;
    let lower = if n > 0 { buf[n - 1] } else { 0.0 };
    let d = (0.5 * nf).sqrt() * lower - (0.5 * (nf + 1.0)).sqrt() * buf[n + 1];
    (norm * buf[n], norm * d / sh)
}

pub(crate) fn oscillator(n: usize, y: f64, h: f64, buf: &mut Vec<f64>) -> f64 {
    hermite_functions_into(n, y / h.sqrt(), buf);
    h.powf(-0.25) * buf[n]
}

impl LandauState {
    /// `(φ_n(x), φ̃_n(x))`.
    pub fn components(&self, x: f64) -> (C64, C64) {
        let mut buf = Vec::with_capacity(self.n + 2);
        let p = &self.params;
        let (c, s) = p.half_angles();
        let up = oscillator(self.n, x + p.delta, p.h, &mut buf);
        let dn = oscillator(self.n, x - p.delta, p.h, &mut buf);
        let ph = C64::from_polar(1.0, -0.5 * p.theta(x));
        let (a, b) = (self.amps.a, self.amps.b);
        (
            ph * (a * c * up - b * s * dn),
            ph.conj() * (a * s * up + b * c * dn),
        )
    }

    /// Components and their `x`-derivatives.
    pub fn components_with_derivative(&self, x: f64) -> ([C64; 2], [C64; 2]) {
        let mut buf = Vec::with_capacity(self.n + 2);
        let p = &self.params;
        let (c, s) = p.half_angles();
        let (up, dup) = oscillator_with_derivative(self.n, x + p.delta, p.h, &mut buf);
        let (dn, ddn) = oscillator_with_derivative(self.n, x - p.delta, p.h, &mut buf);
        let ph = C64::from_polar(1.0, -0.5 * p.theta(x));
        let half_tp = 0.5 * p.theta_prime(x);
        let (a, b) = (self.amps.a, self.amps.b);
        let u = a * c * up - b * s * dn;
        let du = a * c * dup - b * s * ddn;
        let v = a * s * up + b * c * dn;
        let dv = a * s * dup + b * c * ddn;
        let i = C64::i();
        (
            [ph * u, ph.conj() * v],
            [ph * (du - i * half_tp * u), ph.conj() * (dv + i * half_tp * v)],
        )
    }

    pub fn energy(&self) -> f64 {
        2.0 * self.params.h * self.n as f64
    }
}

impl MultiComponentState for LandauState {
    type Field = TwoOrbitParams;

    fn field(&self) -> &TwoOrbitParams {
        &self.params
    }

    fn eval_into(&self, x: f64, val: &mut [C64]) {
        let (u, v) = self.components(x);
        val[0] = u;
        val[1] = v;
    }

    fn eval_with_derivative(&self, x: f64, val: &mut [C64], der: &mut [C64]) {
        let (v, d) = self.components_with_derivative(x);
        val.copy_from_slice(&v);
        der.copy_from_slice(&d);
    }

    fn support_half_width(&self) -> f64 {
        let h = self.params.h;
        self.params.delta + (2.0 * h * (2.0 * self.n as f64 + 1.0)).sqrt() + 6.0 * (0.5 * h).sqrt()
    }
}

/// Probability currents `J = ½h Im(φ* ∂φ)` of the two components.
pub fn currents(params: &TwoOrbitParams, amps: &AmplitudeSolution, n: usize, x: f64) -> (f64, f64) {
    let st = eigenfunction(params, amps, n);
    let (v, d) = st.components_with_derivative(x);
    let h = params.h;
    (
        0.5 * h * (v[0].conj() * d[0]).im,
        0.5 * h * (v[1].conj() * d[1]).im,
    )
}
