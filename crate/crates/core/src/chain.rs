//! The linear chain of `2(N+1)` coupled orbits.
//!
//! Rows are indexed by `j = 0..2N+1`, orbital label `k = N − j`. Row `j`
//! carries `+iω` on the diagonal for even `j` and `−iω` for odd `j`.

use nalgebra::{DMatrix, DVector};

use crate::contour::GridSpec;
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ladder::{LadderField, MultiComponentState, C64};
use crate::linalg::{real_roots, SymTridiagonal};
use crate::model2::{contours_of_sheets, default_contour_grid, oscillator_with_derivative, FermiContour};
use crate::specfun::{bessel_jy, laguerre_row};

/// Largest supported chain index; the Bessel orders reach `μ + N + 2`.
pub const MAX_CHAIN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub g: f64,
    pub x_c: f64,
    pub omega0: f64,
    pub h: f64,
}

impl ChainParams {
    pub fn new(n: usize, g: f64, x_c: f64, omega0: f64, h: f64) -> Result<Self> {
        if n > MAX_CHAIN {
            return Err(Error::Capacity {
                what: "chain index N",
                value: n,
                cap: MAX_CHAIN,
            });
        }
        if !(x_c > 0.0 && x_c.is_finite()) {
            return Err(domain(format!("x_c must be positive, got {x_c}")));
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
        Ok(Self { n, g, x_c, omega0, h })
    }

    pub fn at_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    /// Number of orbits `2(N+1)`.
    pub fn orbits(&self) -> usize {
        2 * (self.n + 1)
    }

    pub fn ratio(&self) -> f64 {
        self.g / self.x_c
    }

    /// Orbital label `k = N − j` of row `j`.
    pub fn label(&self, j: usize) -> i64 {
        self.n as i64 - j as i64
    }

    /// `+1` for rows carrying `+iω`, `−1` otherwise.
    pub fn sign(j: usize) -> f64 {
        if j.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn theta(&self, x: f64) -> f64 {
        2.0 * self.omega0 * x / self.h
    }

    fn centre(&self, j: usize) -> f64 {
        (2 * self.label(j) + 1) as f64 * self.x_c
    }
}

impl LadderField for ChainParams {
    fn dim(&self) -> usize {
        self.orbits()
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn q_into(&self, x: f64, out: &mut [C64]) {
        let d = self.orbits();
        out.fill(C64::new(0.0, 0.0));
        let th = self.theta(x);
        for j in 0..d {
            let s = Self::sign(j);
            out[j * d + j] = C64::new(x + self.centre(j), s * self.omega0);
            if j + 1 < d {
                let ph = C64::from_polar(self.g, -s * th);
                out[j * d + j + 1] = ph;
                out[(j + 1) * d + j] = ph.conj();
            }
        }
    }

    fn dq_into(&self, x: f64, out: &mut [C64]) {
        let d = self.orbits();
        out.fill(C64::new(0.0, 0.0));
        let th = self.theta(x);
        let tp = 2.0 * self.omega0 / self.h;
        for j in 0..d {
            let s = Self::sign(j);
            out[j * d + j] = C64::new(1.0, 0.0);
            if j + 1 < d {
                let ph = C64::from_polar(self.g, -s * th) * C64::new(0.0, -s * tp);
                out[j * d + j + 1] = ph;
                out[(j + 1) * d + j] = ph.conj();
            }
        }
    }
}

/// The constant matrix `Q̃`: diagonal `(2k+1)x_c` for `k = N…−N−1`,
/// off-diagonal `g`.
pub fn build_tilde_q(n: usize, g: f64, x_c: f64) -> Result<SymTridiagonal> {
    let d = 2 * (n + 1);
    let diag = (0..d).map(|j| (2 * (n as i64 - j as i64) + 1) as f64 * x_c).collect();
    SymTridiagonal::new(diag, vec![g; d - 1])
}

/// All eigenvalues, ascending.
pub fn eigen_tridiagonal(matrix: &SymTridiagonal) -> Vec<f64> {
    matrix.eigenvalues()
}

/// `C(μ) = J_{μ+N+2}(r)Y_{μ−N−1}(r) − Y_{μ+N+2}(r)J_{μ−N−1}(r)`.
pub fn bessel_cross(mu: f64, n: usize, r: f64) -> Result<f64> {
    let nf = n as f64;
    let hi = bessel_jy(mu + nf + 2.0, r)?;
    let lo = bessel_jy(mu - nf - 1.0, r)?;
    Ok(hi.j * lo.y - hi.y * lo.j)
}

/// Roots `μ_N > … > μ_{−N−1}` of [`bessel_cross`], seeded by the
/// tridiagonal eigenvalues and refined by bisection.
pub fn bessel_eigenvalues(n: usize, r: f64) -> Result<Vec<f64>> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain(format!("r = g/x_c must be non-negative, got {r}")));
    }
    let count = 2 * (n + 1);
    if r == 0.0 {
        return Ok((0..count).map(|j| n as f64 - j as f64).collect());
    }
    let seeds: Vec<f64> = eigen_tridiagonal(&build_tilde_q(n, r, 1.0)?)
        .into_iter()
        .rev()
        .map(|l| 0.5 * (l - 1.0))
        .collect();
    // half the smallest seed gap bounds every bracket
    let gap = seeds.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let mut roots = Vec::with_capacity(count);
    for &seed in &seeds {
        if let Some(root) = refine_root(seed, 0.5 * gap, n, r)? {
            roots.push(root);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if roots.len() != count {
        return Err(Error::RootCount {
            expected: count,
            found: roots.len(),
        });
    }
    Ok(roots)
}

fn refine_root(seed: f64, reach: f64, n: usize, r: f64) -> Result<Option<f64>> {
    let f0 = bessel_cross(seed, n, r)?;
    if f0 == 0.0 {
        return Ok(Some(seed));
    }
    let mut d = 1e-9;
    let (mut a, mut b, mut fa) = loop {
        if d > reach {
            return Ok(None);
        }
        let (lo, hi) = (seed - d, seed + d);
        let (flo, fhi) = (bessel_cross(lo, n, r)?, bessel_cross(hi, n, r)?);
        if flo.signum() != fhi.signum() {
            break (lo, hi, flo);
        }
        d *= 4.0;
    };
    while b - a > 1e-15 * (1.0 + seed.abs()) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = bessel_cross(m, n, r)?;
        if fm == 0.0 {
            return Ok(Some(m));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Coefficients of `16μ⁴ + 32μ³ − 4(3r²+4)μ² − 4(3r²+8)μ + r⁴`, ascending.
pub fn quartic_coefficients(r: f64) -> [f64; 5] {
    let r2 = r * r;
    [r2 * r2, -4.0 * (3.0 * r2 + 8.0), -4.0 * (3.0 * r2 + 4.0), 32.0, 16.0]
}

/// The four real roots of the `N = 1` quartic, descending.
pub fn quartic_n1(r: f64) -> Result<[f64; 4]> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(domain(format!("r must be non-negative, got {r}")));
    }
    let mut roots = real_roots(&quartic_coefficients(r));
    if roots.len() != 4 {
        return Err(Error::RootCount {
            expected: 4,
            found: roots.len(),
        });
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

fn cross_at(mu: f64, order: f64, anchor: (f64, f64), r: f64) -> Result<f64> {
    let p = bessel_jy(mu - order, r)?;
    Ok(anchor.1 * p.j - anchor.0 * p.y)
}

/// Eigenvector components `v_k` in row order (`k = N` first), normalised so
/// that `v_N = 1`. At `r = 0` the decoupled unit vector is returned.
pub fn eigenvector_components(mu: f64, n: usize, r: f64) -> Result<Vec<f64>> {
    let d = 2 * (n + 1);
    if r == 0.0 {
        let k0 = mu.round();
        return Ok((0..d).map(|j| if (n as f64 - j as f64) == k0 { 1.0 } else { 0.0 }).collect());
    }
    let nf = n as f64;
    let anchor = bessel_jy(mu - nf - 1.0, r)?;
    let anchor = (anchor.j, anchor.y);
    let norm = cross_at(mu, nf, anchor, r)?;
    (0..d)
        .map(|j| Ok(cross_at(mu, nf - j as f64, anchor, r)? / norm))
        .collect()
}

/// `(v_{N+1}, v_{−N−2})` in the [`eigenvector_components`] normalisation.
pub fn boundary_values(mu: f64, n: usize, r: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let anchor = bessel_jy(mu - nf - 1.0, r)?;
    let anchor = (anchor.j, anchor.y);
    let norm = cross_at(mu, nf, anchor, r)?;
    Ok((
        cross_at(mu, nf + 1.0, anchor, r)? / norm,
        cross_at(mu, -nf - 2.0, anchor, r)? / norm,
    ))
}

/// Largest `|v_{k−1} + v_{k+1} + ((2k+1−λ)/r)v_k|` over the chain, with the
/// boundary values taken as zero, relative to `max|v|/r`.
pub fn recurrence_residual(v: &[f64], mu: f64, n: usize, r: f64) -> f64 {
    let lambda = 2.0 * mu + 1.0;
    let d = v.len();
    let at = |j: isize| if j < 0 || j as usize >= d { 0.0 } else { v[j as usize] };
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) / r;
    (0..d as isize)
        .map(|j| {
            let k = n as f64 - j as f64;
            // v_{k+1} sits at row j − 1
            (at(j - 1) + at(j + 1) + (2.0 * k + 1.0 - lambda) / r * at(j)).abs()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Eigenvalues and eigenvectors of the chain, `μ` descending.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpectrum {
    pub n: usize,
    pub r: f64,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `vectors[l][j]`: unit-norm eigenvector of `λ_l` in row order, sign
    /// fixed so its largest component is positive.
    pub vectors: Vec<Vec<f64>>,
}

impl ChainSpectrum {
    /// Eigenvalues come from the Bessel roots. The vectors come from inverse
    /// iteration on `Q̃/x_c` at those roots: the Bessel ratio cancels badly
    /// once `r^{2N+1}` nears machine precision.
    pub fn compute(n: usize, r: f64) -> Result<Self> {
        let mu = bessel_eigenvalues(n, r)?;
        let lambda: Vec<f64> = mu.iter().map(|m| 2.0 * m + 1.0).collect();
        let tilde = build_tilde_q(n, r, 1.0)?;
        let vectors = lambda.iter().map(|&l| unit_positive(tilde.eigenvector(l))).collect();
        Ok(Self { n, r, mu, lambda, vectors })
    }

    pub fn of(params: &ChainParams) -> Result<Self> {
        Self::compute(params.n, params.ratio())
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

fn unit_positive(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = big.signum() / norm;
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Overlaps `∫ψ_n(x+a_l)ψ_n(x+a_m)dx = e^{−d²/4h}L_n(d²/2h)`, `d = a_l − a_m`.
fn gram(shifts: &[f64], level: usize, h: f64) -> DMatrix<f64> {
    let d = shifts.len();
    DMatrix::from_fn(d, d, |l, m| {
        let s = shifts[l] - shifts[m];
        laguerre_row(level, 0, s * s / (2.0 * h))[level]
    })
}

/// Per-orbital densities `∫|φ^{(k)}|²` for coefficients `c`.
pub fn chain_densities(params: &ChainParams, spec: &ChainSpectrum, c: &[f64], level: usize) -> Vec<f64> {
    let shifts: Vec<f64> = spec.lambda.iter().map(|l| l * params.x_c).collect();
    let g = gram(&shifts, level, params.h);
    densities_with(&g, &spec.vectors, c)
}

fn densities_with(g: &DMatrix<f64>, vectors: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let d = c.len();
    (0..d)
        .map(|j| {
            let mut acc = 0.0;
            for l in 0..d {
                for m in 0..d {
                    acc += c[l] * c[m] * vectors[l][j] * vectors[m][j] * g[(l, m)];
                }
            }
            acc
        })
        .collect()
}

/// Damped Newton for real `C_l` meeting per-orbital density targets, started
/// from `C_l = sqrt(ρ_l)`.
pub fn solve_coefficients(
    params: &ChainParams,
    spec: &ChainSpectrum,
    targets: &[f64],
    level: usize,
) -> Result<Vec<f64>> {
    let d = spec.len();
    if targets.len() != d {
        return Err(domain(format!("expected {d} density targets, got {}", targets.len())));
    }
    if targets.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(domain("density targets must be positive"));
    }
    let shifts: Vec<f64> = spec.lambda.iter().map(|l| l * params.x_c).collect();
    let g = gram(&shifts, level, params.h);
    let v = &spec.vectors;
    let residual = |c: &[f64]| -> Vec<f64> {
        densities_with(&g, v, c).iter().zip(targets).map(|(a, b)| a - b).collect()
    };
    let norm = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut c: Vec<f64> = targets.iter().map(|t| t.sqrt()).collect();
    let mut f = residual(&c);
    for _ in 0..100 {
        let fnorm = norm(&f);
        if fnorm < 1e-14 {
            return Ok(c);
        }
        // J_jl = 2 v_l[j] Σ_m v_m[j] G_lm C_m
        let jac = DMatrix::from_fn(d, d, |j, l| {
            2.0 * v[l][j] * (0..d).map(|m| v[m][j] * g[(l, m)] * c[m]).sum::<f64>()
        });
        let Some(step) = jac.lu().solve(&DVector::from_column_slice(&f)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            let ft = residual(&trial);
            if norm(&ft) < fnorm {
                c = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let fnorm = norm(&f);
    if fnorm < 1e-14 {
        Ok(c)
    } else {
        Err(Error::Unsolvable { residual: fnorm })
    }
}

/// Where the chain coefficients come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Given(Vec<f64>),
    Densities(Vec<f64>),
}

/// Exact chain eigenstate at level `n` with energy `2hn`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub params: ChainParams,
    pub spectrum: ChainSpectrum,
    pub level: usize,
    pub coefficients: Vec<f64>,
}

pub fn chain_excited_state(
    params: &ChainParams,
    spectrum: &ChainSpectrum,
    coefficients: Coefficients,
    level: usize,
) -> Result<ChainState> {
    if spectrum.n != params.n || (spectrum.r - params.ratio()).abs() > 1e-15 * (1.0 + spectrum.r) {
        return Err(domain("spectrum was computed for other chain parameters"));
    }
    let coefficients = match coefficients {
        Coefficients::Given(c) => {
            if c.len() != spectrum.len() {
                return Err(domain(format!("expected {} coefficients, got {}", spectrum.len(), c.len())));
            }
            c
        }
        Coefficients::Densities(t) => solve_coefficients(params, spectrum, &t, level)?,
    };
    Ok(ChainState {
        params: *params,
        spectrum: spectrum.clone(),
        level,
        coefficients,
    })
}

pub fn chain_ground_state(
    params: &ChainParams,
    spectrum: &ChainSpectrum,
    coefficients: Coefficients,
) -> Result<ChainState> {
    chain_excited_state(params, spectrum, coefficients, 0)
}

impl ChainState {
    pub fn energy(&self) -> f64 {
        2.0 * self.params.h * self.level as f64
    }

    pub fn densities(&self) -> Vec<f64> {
        chain_densities(&self.params, &self.spectrum, &self.coefficients, self.level)
    }

    fn eval_parts(&self, x: f64, val: &mut [C64], der: Option<&mut [C64]>) {
        let p = &self.params;
        let d = p.orbits();
        let mut buf = Vec::with_capacity(self.level + 2);
        let mut f = vec![0.0; d];
        let mut fp = vec![0.0; d];
        for (l, vec) in self.spectrum.vectors.iter().enumerate() {
            let (psi, dpsi) = oscillator_with_derivative(self.level, x + self.spectrum.lambda[l] * p.x_c, p.h, &mut buf);
            let c = self.coefficients[l];
            for j in 0..d {
                f[j] += c * vec[j] * psi;
                fp[j] += c * vec[j] * dpsi;
            }
        }
        let th = p.theta(x);
        let half_tp = p.omega0 / p.h;
        match der {
            Some(der) => {
                for j in 0..d {
                    let s = ChainParams::sign(j);
                    let ph = C64::from_polar(1.0, -0.5 * s * th);
                    val[j] = ph * f[j];
                    der[j] = ph * C64::new(fp[j], -s * half_tp * f[j]);
                }
            }
            None => {
                for j in 0..d {
                    val[j] = C64::from_polar(f[j], -0.5 * ChainParams::sign(j) * th);
                }
            }
        }
    }
}

impl MultiComponentState for ChainState {
    type Field = ChainParams;

    fn field(&self) -> &ChainParams {
        &self.params
    }

    fn eval_into(&self, x: f64, val: &mut [C64]) {
        self.eval_parts(x, val, None);
    }

    fn eval_with_derivative(&self, x: f64, val: &mut [C64], der: &mut [C64]) {
        self.eval_parts(x, val, Some(der));
    }

    fn support_half_width(&self) -> f64 {
        let h = self.params.h;
        let outer = self.spectrum.lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())) * self.params.x_c;
        outer + (2.0 * h * (2.0 * self.level as f64 + 1.0)).sqrt() + 6.0 * (0.5 * h).sqrt()
    }
}

/// Sheets of the classical chain Hamiltonian: eigenvalues of `M^†M` with
/// `M = Q_cl + ip`, ascending.
pub fn chain_energy_sheets(params: &ChainParams, x: f64, p: f64) -> Vec<f64> {
    let d = params.orbits();
    let m = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(x + params.centre(j), ChainParams::sign(j) * params.omega0 + p)
        } else if i.abs_diff(j) == 1 {
            C64::new(params.g, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let hc = m.adjoint() * &m;
    let mut ev: Vec<f64> = hc.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Fermi contours of the chain at `energy`.
pub fn chain_fermi_contours(
    params: &ChainParams,
    energy: f64,
    grid: Option<GridSpec>,
    exec: Exec,
) -> Result<Vec<FermiContour>> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(domain(format!("energy must be positive, got {energy}")));
    }
    let outer = (2 * params.n + 1) as f64 * params.x_c;
    let grid = grid.unwrap_or_else(|| default_contour_grid(outer, params.omega0.abs(), energy));
    Ok(contours_of_sheets(params.orbits(), energy, &grid, exec, |x, p| {
        chain_energy_sheets(params, x, p)
    }))
}
