use magorbits::chain::*;
use magorbits::ladder::{commutator_deviation, MultiComponentState, C64};
use magorbits::model2::{derive_params, eigenfunction, solve_amplitudes, DensityPair};
use magorbits::oracle::{
    annihilation_residual, creation_check, eigen_residual_fd, grid_spectrum, inner_product, QuadratureSpec,
};
use magorbits::Exec;
use proptest::prelude::*;

fn tridiagonal_mu(n: usize, r: f64) -> Vec<f64> {
    eigen_tridiagonal(&build_tilde_q(n, r, 1.0).unwrap())
        .into_iter()
        .rev()
        .map(|l| 0.5 * (l - 1.0))
        .collect()
}

fn quad_for(state: &ChainState) -> QuadratureSpec {
    QuadratureSpec::for_states(state.spectrum.lambda[0].abs() * state.params.x_c, state.level + 1, state.params.h)
}

#[test]
fn eigenvalue_routes_agree() {
    for r in [0.05, 0.1, 0.5] {
        for n in 0..=3 {
            let b = bessel_eigenvalues(n, r).unwrap();
            let t = tridiagonal_mu(n, r);
            assert_eq!(b.len(), 2 * n + 2);
            for (x, y) in b.iter().zip(&t) {
                assert!((x - y).abs() < 1e-10, "N={n} r={r}");
            }
        }
        for (x, y) in bessel_eigenvalues(1, r).unwrap().iter().zip(quartic_n1(r).unwrap()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn quartic_roots_satisfy_their_polynomial() {
    let r = 0.3;
    let c = quartic_coefficients(r);
    for mu in quartic_n1(r).unwrap() {
        let v = c.iter().rev().fold(0.0, |acc, a| acc * mu + a);
        assert!(v.abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn spectrum_is_symmetric(n in 0usize..4, r in 0.01..2.0f64) {
        let s = ChainSpectrum::compute(n, r).unwrap();
        let d = s.len();
        for l in 0..d {
            prop_assert!((s.lambda[l] + s.lambda[d - 1 - l]).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_bracket_a_sign_change(n in 0usize..4, r in 0.05..2.0f64) {
        for mu in bessel_eigenvalues(n, r).unwrap() {
            let eps = 1e-12 * (1.0 + mu.abs());
            let (a, b) = (bessel_cross(mu - eps, n, r).unwrap(), bessel_cross(mu + eps, n, r).unwrap());
            prop_assert!(a * b <= 0.0, "{mu}: {a} {b}");
        }
    }

    #[test]
    fn boundary_values_vanish(n in 0usize..2, r in 0.3..2.0f64) {
        // the far boundary is sensitive to the last digit of μ once N grows
        for mu in bessel_eigenvalues(n, r).unwrap() {
            let scale = eigenvector_components(mu, n, r).unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let (top, bottom) = boundary_values(mu, n, r).unwrap();
            prop_assert!(top.abs() < 1e-8 * scale && bottom.abs() < 1e-8 * scale, "{top} {bottom}");
        }
    }

    #[test]
    fn chain_commutator(n in 0usize..4, g in 0.0..1.0f64, xc in 0.2..2.0f64, w in -2.0..2.0f64, h in 0.1..2.0f64, x in -5.0..5.0f64) {
        let p = ChainParams::new(n, g, xc, w, h).unwrap();
        prop_assert!(commutator_deviation(&p, x) < 1e-12);
    }
}

#[test]
fn weak_coupling_shift_is_quadratic() {
    for n in 0..=2 {
        let k: Vec<f64> = bessel_eigenvalues(n, 0.0).unwrap();
        let shift = |r: f64| {
            bessel_eigenvalues(n, r)
                .unwrap()
                .iter()
                .zip(&k)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (shift(0.02), shift(0.01));
        assert!(a < 0.02 * 0.02);
        assert!((a / b - 4.0).abs() < 0.05, "N={n}: {}", a / b);
    }
}

#[test]
fn bessel_ratio_matches_stored_vectors() {
    for (n, r) in [(0, 0.3), (1, 0.1), (1, 0.5), (1, 1.0), (2, 0.8), (2, 1.5)] {
        let s = ChainSpectrum::compute(n, r).unwrap();
        for (l, mu) in s.mu.iter().enumerate() {
            let v = eigenvector_components(*mu, n, r).unwrap();
            assert!(recurrence_residual(&v, *mu, n, r) < 1e-8);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let sign = if v.iter().zip(&s.vectors[l]).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for (a, b) in v.iter().zip(&s.vectors[l]) {
                assert!((sign * a / norm - b).abs() < 1e-8, "N={n} r={r} l={l}");
            }
        }
    }
}

#[test]
fn stored_vectors_solve_the_eigenproblem() {
    for n in 0..=3 {
        for r in [0.05, 0.5, 2.0] {
            let s = ChainSpectrum::compute(n, r).unwrap();
            let q = build_tilde_q(n, r, 1.0).unwrap().to_dense();
            for (l, v) in s.vectors.iter().enumerate() {
                for (row, qrow) in q.iter().enumerate() {
                    let qv: f64 = qrow.iter().zip(v).map(|(a, b)| a * b).sum();
                    assert!((qv - s.lambda[l] * v[row]).abs() < 1e-12);
                }
                assert!(recurrence_residual(v, s.mu[l], n, r) < 1e-12);
            }
        }
    }
}

#[test]
fn single_pair_chain_is_the_two_orbit_model() {
    let (g, xc, w, h) = (0.2, 1.0, 1.0, 0.7);
    let p2 = derive_params(g, xc, w, h).unwrap();
    let amps = solve_amplitudes(&p2, &DensityPair::default(), 0.0, 0.0).unwrap();
    let pc = ChainParams::new(0, g, xc, w, h).unwrap();
    let spec = ChainSpectrum::of(&pc).unwrap();
    for level in [0, 1, 3] {
        let given = chain_excited_state(&pc, &spec, Coefficients::Given(vec![amps.a.re, amps.b.re]), level).unwrap();
        let two = eigenfunction(&p2, &amps, level);
        for x in [-3.0, -1.2, 0.0, 0.4, 2.5] {
            for (a, b) in given.eval(x).iter().zip(two.eval(x)) {
                assert!((a - b).norm() < 1e-10, "level {level} x {x}");
            }
        }
    }
    let solved = chain_ground_state(&pc, &spec, Coefficients::Densities(vec![1.0, 1.0])).unwrap();
    assert!((solved.coefficients[0] - amps.a.re).abs() < 1e-10);
    assert!((solved.coefficients[1] - amps.b.re).abs() < 1e-10);
}

#[test]
fn decoupled_chain_is_shifted_gaussians() {
    let p = ChainParams::new(1, 0.0, 1.0, 1.0, 0.5).unwrap();
    let spec = ChainSpectrum::of(&p).unwrap();
    let rho = vec![1.0, 0.5, 2.0, 1.5];
    let st = chain_ground_state(&p, &spec, Coefficients::Densities(rho.clone())).unwrap();
    for (c, t) in st.coefficients.iter().zip(&rho) {
        assert!((c - t.sqrt()).abs() < 1e-12);
    }
    for (j, t) in rho.iter().enumerate() {
        let k = p.label(j) as f64;
        let centre = -(2.0 * k + 1.0) * p.x_c;
        let amp = (t / (std::f64::consts::PI * p.h).sqrt()).sqrt();
        for x in [-2.0, 0.0, 1.5] {
            let want = amp * (-(x - centre).powi(2) / (2.0 * p.h)).exp();
            assert!((st.eval(x)[j].norm() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn ground_states_are_annihilated_with_target_densities() {
    for n in 0..=3 {
        let p = ChainParams::new(n, 0.3, 1.0, 1.0, 0.5).unwrap();
        let spec = ChainSpectrum::of(&p).unwrap();
        let targets: Vec<f64> = (0..p.orbits()).map(|j| 0.8 + 0.1 * j as f64).collect();
        let st = chain_ground_state(&p, &spec, Coefficients::Densities(targets.clone())).unwrap();
        assert!(annihilation_residual(&st, &quad_for(&st), Exec::Parallel).unwrap() < 1e-8);
        for (a, b) in st.densities().iter().zip(&targets) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

/// A chain state with the alternating phase pattern replaced by a common one.
struct CommonPhase(ChainState);

impl MultiComponentState for CommonPhase {
    type Field = ChainParams;

    fn field(&self) -> &ChainParams {
        &self.0.params
    }

    fn eval_into(&self, x: f64, val: &mut [C64]) {
        let mut der = vec![C64::new(0.0, 0.0); val.len()];
        self.eval_with_derivative(x, val, &mut der);
    }

    fn eval_with_derivative(&self, x: f64, val: &mut [C64], der: &mut [C64]) {
        self.0.eval_with_derivative(x, val, der);
        let p = &self.0.params;
        let dth = 2.0 * p.omega0 / p.h;
        for j in 0..val.len() {
            if ChainParams::sign(j) < 0.0 {
                let m = C64::from_polar(1.0, -p.theta(x));
                der[j] = der[j] * m - C64::i() * dth * m * val[j];
                val[j] *= m;
            }
        }
    }

    fn support_half_width(&self) -> f64 {
        self.0.support_half_width()
    }
}

#[test]
fn wrong_phase_pattern_is_not_annihilated() {
    let p = ChainParams::new(1, 0.3, 1.0, 1.0, 0.5).unwrap();
    let spec = ChainSpectrum::of(&p).unwrap();
    let st = chain_ground_state(&p, &spec, Coefficients::Densities(vec![1.0; 4])).unwrap();
    let q = quad_for(&st);
    assert!(annihilation_residual(&CommonPhase(st), &q, Exec::Parallel).unwrap() > 0.1);
}

#[test]
fn excited_states_form_a_ladder() {
    let p = ChainParams::new(1, 0.3, 1.0, 1.0, 0.5).unwrap();
    let spec = ChainSpectrum::of(&p).unwrap();
    let c = Coefficients::Given(vec![1.0, 0.7, 0.4, 0.9]);
    let states: Vec<ChainState> = (0..=5).map(|n| chain_excited_state(&p, &spec, c.clone(), n).unwrap()).collect();
    let xs: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    let q = quad_for(&states[5]);
    for (n, st) in states.iter().enumerate() {
        assert!((st.energy() - 2.0 * p.h * n as f64).abs() < 1e-15);
        assert!(eigen_residual_fd(st, st.energy(), &xs, 1e-3) < 1e-6, "level {n}");
        for m in 0..n {
            let ip = inner_product(&states[m], st, &q, Exec::Parallel).unwrap();
            assert!(ip.norm() < 1e-8, "<{m}|{n}> = {ip}");
        }
    }
    for n in 0..5 {
        let c = creation_check(&states[n], &states[n + 1], &q, Exec::Parallel).unwrap();
        assert!((c.factor - ((n + 1) as f64).sqrt()).norm() < 1e-8, "{n}: {}", c.factor);
        assert!(c.residual < 1e-8);
    }
}

#[test]
fn mismatched_spectrum_is_rejected() {
    let p = ChainParams::new(1, 0.3, 1.0, 1.0, 0.5).unwrap();
    let other = ChainSpectrum::compute(1, 0.5).unwrap();
    assert!(chain_ground_state(&p, &other, Coefficients::Densities(vec![1.0; 4])).is_err());
    let spec = ChainSpectrum::of(&p).unwrap();
    assert!(chain_ground_state(&p, &spec, Coefficients::Given(vec![1.0; 3])).is_err());
    assert!(chain_ground_state(&p, &spec, Coefficients::Densities(vec![1.0, -1.0, 1.0, 1.0])).is_err());
    assert!(ChainParams::new(MAX_CHAIN + 1, 0.3, 1.0, 1.0, 0.5).is_err());
    assert!(ChainParams::new(1, 0.3, 0.0, 1.0, 0.5).is_err());
}

#[test]
fn classical_chain_has_four_closed_orbits() {
    let p = ChainParams::new(1, 0.1, 1.0, 0.5, 1.0).unwrap();
    let contours = chain_fermi_contours(&p, 2.0, None, Exec::Parallel).unwrap();
    let closed: Vec<_> = contours.iter().filter(|c| c.line.closed).collect();
    assert_eq!(closed.len(), 4);
}

#[test]
fn chain_sheets_are_sorted_and_non_negative() {
    let p = ChainParams::new(2, 0.4, 1.0, 0.5, 1.0).unwrap();
    for (x, k) in [(0.0, 0.0), (1.3, -0.4), (-2.0, 2.2)] {
        let s = chain_energy_sheets(&p, x, k);
        assert_eq!(s.len(), 6);
        assert!(s.windows(2).all(|w| w[0] <= w[1]) && s[0] > -1e-12);
    }
}

#[test]
fn chain_grid_levels_are_fourfold() {
    let p = ChainParams::new(1, 0.3, 1.0, 1.0, 1.0).unwrap();
    let ev = grid_spectrum(&p, 3000, 12.0, 8, Exec::Parallel).unwrap();
    for (i, e) in ev.iter().enumerate() {
        assert!((e - 2.0 * p.h * (i / 4) as f64).abs() < 1e-3, "{ev:?}");
    }
}
