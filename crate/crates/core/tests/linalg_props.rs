use magorbits::linalg::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Ascending coefficients of `det(T − x)` from the three-term recurrence.
fn char_poly(t: &SymTridiagonal) -> Vec<f64> {
    let mut prev = vec![1.0];
    let mut cur = vec![t.diag[0], -1.0];
    for i in 1..t.dim() {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, c) in cur.iter().enumerate() {
            next[k] += t.diag[i] * c;
            next[k + 1] -= c;
        }
        let e2 = t.off[i - 1] * t.off[i - 1];
        for (k, c) in prev.iter().enumerate() {
            next[k] -= e2 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn tridiagonal() -> impl Strategy<Value = SymTridiagonal> {
    (prop::collection::vec(-3.0..3.0f64, 6), prop::collection::vec(0.1..1.5f64, 5))
        .prop_map(|(d, e)| SymTridiagonal::new(d, e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bisection_matches_characteristic_roots(t in tridiagonal()) {
        let ev = t.eigenvalues();
        let roots = real_roots(&char_poly(&t));
        prop_assert_eq!(roots.len(), 6);
        for (a, b) in ev.iter().zip(&roots) {
            prop_assert!((a - b).abs() < 1e-10, "{ev:?} {roots:?}");
        }
    }

    #[test]
    fn bisection_matches_dense_solver(t in tridiagonal()) {
        let dense = t.to_dense();
        let m = DMatrix::from_fn(6, 6, |i, j| dense[i][j]);
        let mut want: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        want.sort_by(f64::total_cmp);
        let mut got = t.eigenvalues();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sturm_count_is_monotone(t in tridiagonal(), xs in prop::collection::vec(-6.0..6.0f64, 10)) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let counts: Vec<usize> = xs.iter().map(|x| t.count_below(*x)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn inverse_iteration_vectors(t in tridiagonal()) {
        let dense = t.to_dense();
        for l in t.eigenvalues() {
            let v = t.eigenvector(l);
            prop_assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            for (row, r) in dense.iter().enumerate() {
                let tv: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                prop_assert!((tv - l * v[row]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn polynomial_roots() {
    // (x − 1)(x + 2)(x − 3) = x³ − 2x² − 5x + 6
    let r = real_roots(&[6.0, -5.0, -2.0, 1.0]);
    assert_eq!(r.len(), 3);
    for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
    assert_eq!(real_roots(&[2.0, 4.0]), vec![-0.5]);
    assert!((poly_eval(&[1.0, 2.0, 3.0], 2.0) - 17.0).abs() < 1e-15);
}

#[test]
fn shape_is_validated() {
    assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![0.5, 0.5]).is_err());
}
