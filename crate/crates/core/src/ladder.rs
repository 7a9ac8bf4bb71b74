//! Generic first-order matrix operators `D = (h∂ + Q)/sqrt(2h)` and the
//! states they act on.
//!
//! Matrices are passed around as row-major slices of length `dim²`.

use num_complex::Complex64;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A matrix field `Q(x)` together with the effective Planck constant.
pub trait LadderField: Sync {
    fn dim(&self) -> usize;
    fn h(&self) -> f64;
    /// Writes `Q(x)` row-major into `out`.
    fn q_into(&self, x: f64, out: &mut [C64]);
    /// Writes `dQ/dx` row-major into `out`.
    fn dq_into(&self, x: f64, out: &mut [C64]);

    fn q(&self, x: f64) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim() * self.dim()];
        self.q_into(x, &mut out);
        out
    }

    fn dq(&self, x: f64) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim() * self.dim()];
        self.dq_into(x, &mut out);
        out
    }
}

/// `P(x) = ½(Q' + Q'^†) + (1/2h)[Q, Q^†]`, row-major.
pub fn commutator_p<F: LadderField + ?Sized>(field: &F, x: f64) -> Vec<C64> {
    let n = field.dim();
    let h = field.h();
    let q = field.q(x);
    let dq = field.dq(x);
    let mut p = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut comm = ZERO;
            for k in 0..n {
                // (Q Q†)_ij - (Q† Q)_ij
                comm += q[i * n + k] * q[j * n + k].conj() - q[k * n + i].conj() * q[k * n + j];
            }
            p[i * n + j] = 0.5 * (dq[i * n + j] + dq[j * n + i].conj()) + comm / (2.0 * h);
        }
    }
    p
}

/// Largest entrywise deviation of `P(x)` from the identity.
pub fn commutator_deviation<F: LadderField + ?Sized>(field: &F, x: f64) -> f64 {
    let n = field.dim();
    commutator_p(field, x)
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let target = if idx / n == idx % n { 1.0 } else { 0.0 };
            (v - target).norm()
        })
        .fold(0.0, f64::max)
}

/// A multi-component wavefunction with analytic derivative.
pub trait MultiComponentState: Sync {
    type Field: LadderField;

    fn field(&self) -> &Self::Field;

    fn components(&self) -> usize {
        self.field().dim()
    }

    /// Writes the components at `x` into `val`.
    fn eval_into(&self, x: f64, val: &mut [C64]);

    /// Writes the components and their derivatives at `x`.
    fn eval_with_derivative(&self, x: f64, val: &mut [C64], der: &mut [C64]);

    /// Half-width outside which every component is negligible.
    fn support_half_width(&self) -> f64;

    fn eval(&self, x: f64) -> Vec<C64> {
        let mut v = vec![ZERO; self.components()];
        self.eval_into(x, &mut v);
        v
    }
}

/// `(h∂ ± Q^{(†)})Ψ / sqrt(2h)` at one point, for the annihilation operator
/// (`dagger = false`) or the creation operator (`dagger = true`).
pub fn apply_ladder<S: MultiComponentState + ?Sized>(
    state: &S,
    x: f64,
    dagger: bool,
    out: &mut [C64],
) {
    let field = state.field();
    let n = field.dim();
    let h = field.h();
    let mut val = vec![ZERO; n];
    let mut der = vec![ZERO; n];
    state.eval_with_derivative(x, &mut val, &mut der);
    let q = field.q(x);
    let norm = (2.0 * h).sqrt().recip();
    for i in 0..n {
        let mut acc = ZERO;
        for k in 0..n {
            acc += if dagger {
                q[k * n + i].conj() * val[k]
            } else {
                q[i * n + k] * val[k]
            };
        }
        let kinetic = if dagger { -h * der[i] } else { h * der[i] };
        out[i] = (kinetic + acc) * norm;
    }
}
