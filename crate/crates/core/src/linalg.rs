//! Small dense and banded linear-algebra kernels: Sturm-sequence bisection for
//! symmetric tridiagonal matrices, real polynomial roots, and a banded
//! Hermitian Cholesky factorization.

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Real symmetric tridiagonal matrix held as its diagonal and sub-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(domain(format!(
                "tridiagonal shape mismatch: {} diagonal vs {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Infinity norm, used as the scale for bisection tolerances.
    pub fn norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = self.off.get(i).map_or(0.0, |v| v.abs());
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] / q } else { 0.0 };
            q = self.diag[i] - x - coupling;
            // an exact zero pivot is nudged to the negative side and counted
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let (lo, hi) = (-norm - 1.0, norm + 1.0);
        let tol = 4.0 * f64::EPSILON * norm;
        (0..n)
            .map(|k| {
                let (mut a, mut b) = (lo, hi);
                while b - a > tol {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if self.count_below(m) > k {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Unit eigenvector for an accurate `eigenvalue`, by inverse iteration.
    pub fn eigenvector(&self, eigenvalue: f64) -> Vec<f64> {
        let n = self.dim();
        let shift = eigenvalue + 8.0 * f64::EPSILON * self.norm().max(1.0);
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i] - shift
            } else if i.abs_diff(j) == 1 {
                self.off[i.min(j)]
            } else {
                0.0
            }
        });
        let lu = a.lu();
        let mut v = nalgebra::DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
        for _ in 0..3 {
            v = match lu.solve(&v) {
                Some(w) if w.iter().all(|x| x.is_finite()) => w,
                _ => break,
            };
            v /= v.norm();
        }
        v.iter().copied().collect()
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }
}

/// Evaluates a polynomial given by ascending coefficients.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn bisect_poly(coeffs: &[f64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = poly_eval(coeffs, a);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return m;
        }
        let fm = poly_eval(coeffs, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}

/// Real roots of a polynomial with ascending coefficients, ascending.
///
/// Critical points of the polynomial split the line into monotone pieces, each
/// holding at most one root; the critical points come from the same routine
/// applied to the derivative.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-c[0] / c[1]];
    }
    let lead = c[deg];
    let bound = 1.0 + c[..deg].iter().map(|v| (v / lead).abs()).fold(0.0, f64::max);
    let mut knots = vec![-bound];
    knots.extend(real_roots(&poly_derivative(&c)));
    knots.push(bound);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (poly_eval(&c, a), poly_eval(&c, b));
        if fa == 0.0 {
            if roots.last().is_none_or(|&r: &f64| r < a) {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 {
            roots.push(b);
            continue;
        }
        if (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect_poly(&c, a, b));
        }
    }
    roots
}

/// Hermitian band matrix storing the lower triangle: entry `(i, j)` with
/// `i - bw <= j <= i` sits at `data[i * (bw + 1) + (i - j)]`.
#[derive(Clone, Debug)]
pub struct HermitianBand {
    pub n: usize,
    pub bw: usize,
    pub data: Vec<Complex64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![Complex64::new(0.0, 0.0); n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (i - j)
    }

    /// Entry `(i, j)` for any pair inside the band.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            if i - j > self.bw {
                return Complex64::new(0.0, 0.0);
            }
            self.data[self.idx(i, j)]
        } else {
            self.get(j, i).conj()
        }
    }

    /// Adds `v` to entry `(i, j)` with `i >= j`.
    pub fn add_lower(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut s = Complex64::new(0.0, 0.0);
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw).min(self.n - 1);
            for j in lo..=i {
                s += self.data[self.idx(i, j)] * x[j];
            }
            for j in i + 1..=hi {
                s += self.data[self.idx(j, i)].conj() * x[j];
            }
            y[i] = s;
        }
    }

    /// Largest deviation from Hermiticity of the stored diagonal.
    pub fn diagonal_imag_max(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[self.idx(i, i)].im.abs())
            .fold(0.0, f64::max)
    }

    /// Cholesky factor `L` with `A = L L^H`, in the same band layout.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let bw = self.bw;
        let mut l = HermitianBand::zeros(self.n, bw);
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l.data[l.idx(i, k)] * l.data[l.idx(j, k)].conj();
                }
                let slot = l.idx(i, j);
                if i == j {
                    if !(s.re > 0.0) {
                        return Err(domain(format!(
                            "band matrix is not positive definite at row {i}"
                        )));
                    }
                    l.data[slot] = Complex64::new(s.re.sqrt(), 0.0);
                } else {
                    l.data[slot] = s / l.data[l.idx(j, j)].re;
                }
            }
        }
        Ok(BandCholesky { l })
    }
}

/// Lower banded Cholesky factor.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: HermitianBand,
}

impl BandCholesky {
    /// Overwrites `b` with the solution of `L L^H x = b`.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.data[l.idx(i, k)] * b[k];
            }
            b[i] = s / l.data[l.idx(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= l.data[l.idx(k, i)].conj() * b[k];
            }
            b[i] = s / l.data[l.idx(i, i)].re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_eigenvalues_are_sorted_diagonal() {
        let t = SymTridiagonal::new(vec![3.0, -1.0, 2.0, 0.5], vec![0.0; 3]).unwrap();
        let ev = t.eigenvalues();
        for (a, b) in ev.iter().zip([-1.0, 0.5, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_counts_stay_monotone() {
        // the shift 5 hits an exact zero pivot in the first row
        let t = SymTridiagonal::new(vec![5.0, 3.0, 1.0, -1.0, -3.0, -5.0], vec![3.0; 5]).unwrap();
        let dense = nalgebra::DMatrix::from_fn(6, 6, |i, j| t.to_dense()[i][j]);
        let mut want: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in t.eigenvalues().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut last = 0;
        for k in 0..=200 {
            let c = t.count_below(-10.0 + 0.1 * k as f64);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn inverse_iteration_eigenvector() {
        let t = SymTridiagonal::new(vec![3.0, 1.0, -1.0, -3.0], vec![0.1; 3]).unwrap();
        for lam in t.eigenvalues() {
            let v = t.eigenvector(lam);
            let d = t.to_dense();
            for i in 0..4 {
                let av: f64 = (0..4).map(|j| d[i][j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let (g, xc) = (0.2, 1.0);
        let t = SymTridiagonal::new(vec![xc, -xc], vec![g]).unwrap();
        let d = (g * g + xc * xc).sqrt();
        let ev = t.eigenvalues();
        assert!((ev[0] + d).abs() < 1e-14 && (ev[1] - d).abs() < 1e-14);
    }

    #[test]
    fn quartic_with_known_roots() {
        // 16 mu (mu - 1)(mu + 1)(mu + 2)
        let r = real_roots(&[0.0, -32.0, -16.0, 32.0, 16.0]);
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip([-2.0, -1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn band_cholesky_solves() {
        let n = 12;
        let mut a = HermitianBand::zeros(n, 2);
        for i in 0..n {
            a.add_lower(i, i, Complex64::new(6.0 + i as f64 * 0.1, 0.0));
            if i >= 1 {
                a.add_lower(i, i - 1, Complex64::new(1.0, 0.5));
            }
            if i >= 2 {
                a.add_lower(i, i - 2, Complex64::new(-0.3, 0.2));
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        a.matvec(&x, &mut b);
        a.cholesky().unwrap().solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
