//! Brute-force verification engines, independent of the closed forms:
//! adaptive quadrature, a finite-difference Hamiltonian on a grid, and direct
//! application of the ladder operators.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ladder::{apply_ladder, LadderField, MultiComponentState, C64, ZERO};
use crate::linalg::HermitianBand;
use crate::model2::{oscillator, AmplitudeSolution, LandauState, TwoOrbitParams};

/// Integration window and accuracy for the adaptive Simpson rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub half_width: f64,
    /// Absolute tolerance on every component of the integral.
    pub tolerance: f64,
    /// Cap on the number of accepted panels.
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    /// Smallest half-width that keeps the Gaussian tails of every state up to
    /// level `n_max`, centred within `delta_max` of the origin, below double
    /// precision.
    pub fn min_half_width(delta_max: f64, n_max: usize, h: f64) -> f64 {
        delta_max + (2.0 * h * (2.0 * n_max as f64 + 1.0)).sqrt() + 6.0 * (0.5 * h).sqrt()
    }

    pub fn for_states(delta_max: f64, n_max: usize, h: f64) -> Self {
        Self {
            half_width: Self::min_half_width(delta_max, n_max, h),
            tolerance: 1e-10,
            max_subdivisions: 1 << 20,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }
}

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: usize = 40;

fn axpy(acc: &mut [C64], w: f64, v: &[C64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: Vec<C64>,
    fm: Vec<C64>,
    fb: Vec<C64>,
    whole: Vec<C64>,
    tol: f64,
    depth: usize,
}

fn simpson(a: f64, b: f64, fa: &[C64], fm: &[C64], fb: &[C64]) -> Vec<C64> {
    let w = (b - a) / 6.0;
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((x, y), z)| w * (x + 4.0 * y + z))
        .collect()
}

/// Adaptive Simpson on `[a, b]` for a vector-valued integrand, with the
/// Richardson correction applied to each accepted panel.
fn adaptive_simpson<F>(f: &F, dim: usize, a: f64, b: f64, tol: f64, budget: usize) -> Result<(Vec<C64>, usize)>
where
    F: Fn(f64, &mut [C64]),
{
    let eval = |x: f64| {
        let mut v = vec![ZERO; dim];
        f(x, &mut v);
        v
    };
    let (fa, fb) = (eval(a), eval(b));
    let fm = eval(0.5 * (a + b));
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        depth: 0,
    }];
    let mut total = vec![ZERO; dim];
    let mut accepted = 0usize;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m));
        let frm = eval(0.5 * (m + p.b));
        let left = simpson(p.a, m, &p.fa, &flm, &p.fm);
        let right = simpson(m, p.b, &p.fm, &frm, &p.fb);
        let err = left
            .iter()
            .zip(&right)
            .zip(&p.whole)
            .map(|((l, r), w)| (l + r - w).norm())
            .fold(0.0, f64::max);
        if err <= 15.0 * p.tol || p.depth >= MAX_DEPTH {
            for k in 0..dim {
                let two = left[k] + right[k];
                total[k] += two + (two - p.whole[k]) / 15.0;
            }
            accepted += 1;
            if accepted > budget {
                return Err(Error::Accuracy(format!(
                    "more than {budget} panels needed for tolerance {tol:e}"
                )));
            }
        } else {
            // right pushed first so the left half is processed first
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm.clone(),
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: 0.5 * p.tol,
                depth: p.depth + 1,
            });
        }
    }
    Ok((total, accepted))
}

/// `∫_{-L}^{L} f(x) dx` for a vector-valued `f` writing `dim` components.
pub fn integrate<F>(spec: &QuadratureSpec, dim: usize, exec: Exec, f: F) -> Result<Vec<C64>>
where
    F: Fn(f64, &mut [C64]) + Sync + Send,
{
    if !(spec.half_width > 0.0) || !(spec.tolerance > 0.0) {
        return Err(domain("quadrature needs a positive half-width and tolerance"));
    }
    let l = spec.half_width;
    let width = 2.0 * l / INITIAL_PANELS as f64;
    let tol = spec.tolerance / INITIAL_PANELS as f64;
    let parts = exec.map(INITIAL_PANELS, |k| {
        let a = -l + k as f64 * width;
        adaptive_simpson(&f, dim, a, a + width, tol, spec.max_subdivisions)
    });
    let mut total = vec![ZERO; dim];
    let mut panels = 0usize;
    for part in parts {
        let (v, n) = part?;
        axpy(&mut total, 1.0, &v);
        panels += n;
    }
    if panels > spec.max_subdivisions {
        return Err(Error::Accuracy(format!(
            "{panels} panels exceed the cap {}",
            spec.max_subdivisions
        )));
    }
    Ok(total)
}

/// `⟨a, b⟩ = Σ_k ∫ conj(a_k) b_k`.
pub fn inner_product<A, B>(a: &A, b: &B, spec: &QuadratureSpec, exec: Exec) -> Result<C64>
where
    A: MultiComponentState,
    B: MultiComponentState,
{
    let nc = a.components();
    let v = integrate(spec, 1, exec, |x, out| {
        let (va, vb) = (a.eval(x), b.eval(x));
        out[0] = (0..nc).map(|k| va[k].conj() * vb[k]).sum();
    })?;
    Ok(v[0])
}

/// `T_mn = ∫ φ_m conj(φ̃_n) dx` by quadrature of the two states.
pub fn quadrature_overlap(
    state_m: &LandauState,
    state_n: &LandauState,
    spec: &QuadratureSpec,
) -> Result<C64> {
    if state_m.params != state_n.params {
        return Err(domain("overlap needs states built from the same parameters"));
    }
    let v = integrate(spec, 1, Exec::Sequential, |x, out| {
        let (u, _) = state_m.components(x);
        let (_, w) = state_n.components(x);
        out[0] = u * w.conj();
    })?;
    Ok(v[0])
}

/// All `(φ_n(x), φ̃_n(x))` for `n = 0..=n_max` from one pair of recurrences.
pub fn two_orbit_components_all(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    n_max: usize,
    x: f64,
    buf: &mut Vec<f64>,
    out_u: &mut [C64],
    out_v: &mut [C64],
) {
    let (c, s) = params.half_angles();
    let h = params.h;
    let norm = h.powf(-0.25);
    let sh = h.sqrt();
    crate::specfun::hermite_functions_into(n_max, (x + params.delta) / sh, buf);
    let up: Vec<f64> = buf.iter().map(|v| norm * v).collect();
    crate::specfun::hermite_functions_into(n_max, (x - params.delta) / sh, buf);
    let ph = C64::from_polar(1.0, -0.5 * params.theta(x));
    let (a, b) = (amps.a, amps.b);
    for n in 0..=n_max {
        let dn = norm * buf[n];
        out_u[n] = ph * (a * c * up[n] - b * s * dn);
        out_v[n] = ph.conj() * (a * s * up[n] + b * c * dn);
    }
}

/// Every `T_mn` with `m, n ≤ n_max` by one vector-valued quadrature;
/// entry `[m][n]`.
pub fn overlap_matrix(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    n_max: usize,
    spec: &QuadratureSpec,
    exec: Exec,
) -> Result<Vec<Vec<C64>>> {
    let k = n_max + 1;
    let flat = integrate(spec, k * k, exec, |x, out| {
        let mut buf = Vec::with_capacity(k);
        let mut u = vec![ZERO; k];
        let mut v = vec![ZERO; k];
        two_orbit_components_all(params, amps, n_max, x, &mut buf, &mut u, &mut v);
        for m in 0..k {
            for n in 0..k {
                out[m * k + n] = u[m] * v[n].conj();
            }
        }
    })?;
    Ok(flat.chunks(k).map(|r| r.to_vec()).collect())
}

/// `(∫|φ_n|², ∫|φ̃_n|²)` for `n = 0..=n_max` by quadrature.
pub fn densities_by_quadrature(
    params: &TwoOrbitParams,
    amps: &AmplitudeSolution,
    n_max: usize,
    spec: &QuadratureSpec,
    exec: Exec,
) -> Result<Vec<(f64, f64)>> {
    let k = n_max + 1;
    let flat = integrate(spec, 2 * k, exec, |x, out| {
        let mut buf = Vec::with_capacity(k);
        let mut u = vec![ZERO; k];
        let mut v = vec![ZERO; k];
        two_orbit_components_all(params, amps, n_max, x, &mut buf, &mut u, &mut v);
        for n in 0..k {
            out[2 * n] = C64::new(u[n].norm_sqr(), 0.0);
            out[2 * n + 1] = C64::new(v[n].norm_sqr(), 0.0);
        }
    })?;
    Ok((0..k).map(|n| (flat[2 * n].re, flat[2 * n + 1].re)).collect())
}

/// `‖DΨ‖ / ‖Ψ‖` with the derivative taken from the analytic representation.
pub fn annihilation_residual<S: MultiComponentState>(
    state: &S,
    spec: &QuadratureSpec,
    exec: Exec,
) -> Result<f64> {
    let nc = state.components();
    let v = integrate(spec, 2, exec, |x, out| {
        let mut d = vec![ZERO; nc];
        apply_ladder(state, x, false, &mut d);
        let val = state.eval(x);
        out[0] = C64::new(d.iter().map(|z| z.norm_sqr()).sum(), 0.0);
        out[1] = C64::new(val.iter().map(|z| z.norm_sqr()).sum(), 0.0);
    })?;
    Ok((v[0].re / v[1].re).sqrt())
}

/// Ladder check for `D†Ψ_n ∝ Ψ_{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderCheck {
    /// `⟨Ψ_{n+1}, D†Ψ_n⟩ / ⟨Ψ_{n+1}, Ψ_{n+1}⟩`
    pub factor: C64,
    /// `‖D†Ψ_n − factor·Ψ_{n+1}‖ / ‖Ψ_{n+1}‖`
    pub residual: f64,
}

pub fn creation_check<S, T>(lower: &S, upper: &T, spec: &QuadratureSpec, exec: Exec) -> Result<LadderCheck>
where
    S: MultiComponentState,
    T: MultiComponentState,
{
    let nc = lower.components();
    let sums = integrate(spec, 2, exec, |x, out| {
        let mut d = vec![ZERO; nc];
        apply_ladder(lower, x, true, &mut d);
        let up = upper.eval(x);
        out[0] = (0..nc).map(|k| up[k].conj() * d[k]).sum();
        out[1] = C64::new(up.iter().map(|z| z.norm_sqr()).sum(), 0.0);
    })?;
    let norm_up = sums[1].re;
    let factor = sums[0] / norm_up;
    // a second pass integrates the remainder directly; subtracting norms
    // would cancel down to the square root of the quadrature tolerance
    let rest = integrate(spec, 1, exec, |x, out| {
        let mut d = vec![ZERO; nc];
        apply_ladder(lower, x, true, &mut d);
        let up = upper.eval(x);
        out[0] = C64::new((0..nc).map(|k| (d[k] - factor * up[k]).norm_sqr()).sum(), 0.0);
    })?;
    Ok(LadderCheck {
        factor,
        residual: (rest[0].re.max(0.0) / norm_up).sqrt(),
    })
}

/// `(HΨ)(x)` with `H = −h²∂² + (Q†−Q)h∂ − hQ' + Q†Q`, derivatives taken by
/// Richardson-extrapolated central differences of step `step`.
pub fn hamiltonian_fd<S: MultiComponentState>(state: &S, x: f64, step: f64) -> Vec<C64> {
    let field = state.field();
    let n = field.dim();
    let h = field.h();
    let f0 = state.eval(x);
    let d1 = |s: f64| -> (Vec<C64>, Vec<C64>) {
        let (fp, fm) = (state.eval(x + s), state.eval(x - s));
        let first = (0..n).map(|k| (fp[k] - fm[k]) / (2.0 * s)).collect();
        let second = (0..n).map(|k| (fp[k] - 2.0 * f0[k] + fm[k]) / (s * s)).collect();
        (first, second)
    };
    // Richardson on (2s, s) keeps the finest step at `step`, where roundoff
    // in the second difference is already ε/step²
    let (a1, a2) = d1(2.0 * step);
    let (b1, b2) = d1(step);
    let first: Vec<C64> = (0..n).map(|k| (4.0 * b1[k] - a1[k]) / 3.0).collect();
    let second: Vec<C64> = (0..n).map(|k| (4.0 * b2[k] - a2[k]) / 3.0).collect();
    let q = field.q(x);
    let dq = field.dq(x);
    let mut out = vec![ZERO; n];
    for i in 0..n {
        let mut acc = -h * h * second[i];
        for k in 0..n {
            let kmat = q[k * n + i].conj() - q[i * n + k];
            let mut qq = ZERO;
            for l in 0..n {
                qq += q[l * n + i].conj() * q[l * n + k];
            }
            acc += h * kmat * first[k] - h * dq[i * n + k] * f0[k] + qq * f0[k];
        }
        out[i] = acc;
    }
    out
}

/// Largest `|HΨ − EΨ|` over sample points, relative to the largest `|Ψ|`.
pub fn eigen_residual_fd<S: MultiComponentState>(state: &S, energy: f64, xs: &[f64], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in xs {
        let hv = hamiltonian_fd(state, x, step);
        let v = state.eval(x);
        for k in 0..v.len() {
            worst = worst.max((hv[k] - energy * v[k]).norm());
            scale = scale.max(v[k].norm());
        }
    }
    worst / scale
}

/// The Hamiltonian discretized on `M` interior points of `[−L, L]` with
/// Dirichlet ends. Components are interleaved so the matrix is banded with
/// half-bandwidth `2·dim − 1`.
#[derive(Clone, Debug)]
pub struct GridHamiltonian {
    pub half_width: f64,
    pub points: usize,
    pub components: usize,
    pub matrix: HermitianBand,
    /// Largest `|B − B^†|` over the assembled diagonal blocks.
    pub hermiticity_defect: f64,
}

impl GridHamiltonian {
    pub fn assemble<F: LadderField>(field: &F, points: usize, half_width: f64) -> Result<Self> {
        if points < 3 || !(half_width > 0.0) {
            return Err(domain("grid needs at least 3 points and a positive half-width"));
        }
        let nc = field.dim();
        let h = field.h();
        let dx = 2.0 * half_width / (points + 1) as f64;
        let bw = 2 * nc - 1;
        let mut m = HermitianBand::zeros(points * nc, bw);
        let xs: Vec<f64> = (0..points).map(|i| -half_width + (i + 1) as f64 * dx).collect();
        let kmat = |q: &[C64]| -> Vec<C64> {
            let mut k = vec![ZERO; nc * nc];
            for i in 0..nc {
                for j in 0..nc {
                    k[i * nc + j] = q[j * nc + i].conj() - q[i * nc + j];
                }
            }
            k
        };
        let mut defect: f64 = 0.0;
        let mut k_prev: Option<Vec<C64>> = None;
        for (i, &x) in xs.iter().enumerate() {
            let q = field.q(x);
            let dq = field.dq(x);
            let mut block = vec![ZERO; nc * nc];
            for a in 0..nc {
                for b in 0..nc {
                    let mut qq = ZERO;
                    for l in 0..nc {
                        qq += q[l * nc + a].conj() * q[l * nc + b];
                    }
                    let sym = 0.5 * h * (dq[a * nc + b] + dq[b * nc + a].conj());
                    let kin = if a == b { 2.0 * h * h / (dx * dx) } else { 0.0 };
                    block[a * nc + b] = qq - sym + kin;
                }
            }
            for a in 0..nc {
                for b in 0..=a {
                    defect = defect.max((block[a * nc + b] - block[b * nc + a].conj()).norm());
                    m.add_lower(i * nc + a, i * nc + b, block[a * nc + b]);
                }
            }
            let k_here = kmat(&q);
            if let Some(kp) = k_prev.take() {
                // block (i, i-1) = −h²/dx² I − h(K_{i−1} + K_i)/(4dx)
                for a in 0..nc {
                    for b in 0..nc {
                        let mut v = -h * (kp[a * nc + b] + k_here[a * nc + b]) / (4.0 * dx);
                        if a == b {
                            v -= h * h / (dx * dx);
                        }
                        m.add_lower(i * nc + a, (i - 1) * nc + b, v);
                    }
                }
            }
            k_prev = Some(k_here);
        }
        Ok(Self {
            half_width,
            points,
            components: nc,
            matrix: m,
            hermiticity_defect: defect,
        })
    }

    /// Lowest `count` eigenvalues by shift-invert subspace iteration with
    /// Rayleigh–Ritz extraction.
    pub fn lowest_eigenvalues(&self, count: usize, exec: Exec) -> Result<Vec<f64>> {
        let n = self.matrix.n;
        let p = (count + 8).min(n);
        let shift = 1.0;
        let mut shifted = self.matrix.clone();
        for i in 0..n {
            shifted.add_lower(i, i, C64::new(shift, 0.0));
        }
        let chol = shifted.cholesky()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
        let mut v = DMatrix::<C64>::from_fn(n, p, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut prev = vec![f64::INFINITY; count];
        for _ in 0..500 {
            let cols = exec.map(p, |j| {
                let mut c: Vec<C64> = v.column(j).iter().copied().collect();
                chol.solve_in_place(&mut c);
                c
            });
            let w = DMatrix::from_fn(n, p, |i, j| cols[j][i]);
            let q = w.qr().q();
            let hq_cols = exec.map(p, |j| {
                let c: Vec<C64> = q.column(j).iter().copied().collect();
                let mut y = vec![ZERO; n];
                self.matrix.matvec(&c, &mut y);
                y
            });
            let hq = DMatrix::from_fn(n, p, |i, j| hq_cols[j][i]);
            let small = q.adjoint() * hq;
            let small = (&small + small.adjoint()) * C64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(small);
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            let u = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
            v = q * u;
            let change = (0..count)
                .map(|k| (vals[k] - prev[k]).abs() / vals[k].abs().max(1.0))
                .fold(0.0, f64::max);
            prev.copy_from_slice(&vals[..count]);
            if change < 1e-13 {
                return Ok(prev);
            }
        }
        Err(Error::Accuracy(
            "subspace iteration did not settle within 500 sweeps".into(),
        ))
    }
}

/// Lowest eigenvalues of the discretized Hamiltonian of `field`.
pub fn grid_spectrum<F: LadderField>(
    field: &F,
    points: usize,
    half_width: f64,
    count: usize,
    exec: Exec,
) -> Result<Vec<f64>> {
    GridHamiltonian::assemble(field, points, half_width)?.lowest_eigenvalues(count, exec)
}

/// Oscillator function `h^{-1/4} ψ_n(y/sqrt h)`.
pub fn oscillator_value(n: usize, y: f64, h: f64) -> f64 {
    let mut buf = Vec::with_capacity(n + 1);
    oscillator(n, y, h, &mut buf)
}
