use proptest::prelude::*;
use resetdf::matkit::{eigenvalues, lstsq, mat_exp, spectral_abscissa, spectral_radius};
use resetdf::Mat;

fn square(n: usize, max: f64) -> impl Strategy<Value = Mat> {
    proptest::collection::vec(-max..max, n * n).prop_map(move |v| Mat::from_vec(n, n, v).unwrap())
}

fn scaled_to_norm(m: Mat, bound: f64) -> Mat {
    let n = m.norm_1();
    if n > bound {
        m.scale(bound / n)
    } else {
        m
    }
}

#[test]
fn expm_matches_reference_values() {
    // reference from scipy.linalg.expm
    let m = Mat::from_rows(&[
        vec![0.3, -1.2, 0.5],
        vec![2.0, -0.7, 0.1],
        vec![-0.4, 0.9, -1.5],
    ])
    .unwrap();
    let expect = Mat::from_rows(&[
        vec![0.3922093965887027, -0.5767224825694975, 0.1654332641919072],
        vec![1.121072158219004, -0.10753180144635244, 0.24114024584871008],
        vec![0.25133663809409346, 0.25184596540029563, 0.2600417390208415],
    ])
    .unwrap();
    let e = mat_exp(&m).unwrap();
    assert!((&e - &expect).max_abs() < 1e-12);

    let eig = eigenvalues(&m).unwrap();
    let mut re: Vec<f64> = eig.iter().map(|l| l.re).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 1.2119383486505018).abs() < 1e-10);
    assert!((re[2] + 0.3440308256747493).abs() < 1e-10);
    let max_im = eig.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    assert!((max_im - 1.39561975103511).abs() < 1e-10);
}

#[test]
fn lstsq_matches_normal_equations() {
    // 10x2 system; solution from the normal equations in numpy
    let a = Mat::from_rows(&[
        vec![0.751, 2.383],
        vec![1.654, -1.649],
        vec![-1.199, 2.241],
        vec![-2.968, 1.927],
        vec![1.782, -0.192],
        vec![-1.182, -1.329],
        vec![-1.471, -0.33],
        vec![0.027, 0.321],
        vec![2.973, 1.756],
        vec![0.733, 2.934],
    ])
    .unwrap();
    let b = Mat::column(&[
        -2.847, -3.398, 1.125, -4.561, -4.643, 0.149, -0.338, 4.172, 1.292, 0.141,
    ]);
    let sol = lstsq(&a, &b).unwrap();
    assert!((sol.x[(0, 0)] - 0.017293655476722705).abs() < 1e-10);
    assert!((sol.x[(1, 0)] + 0.08489115510249634).abs() < 1e-10);
    assert_eq!(sol.rank, 2);
}

#[test]
fn spectral_radius_examples() {
    assert_eq!(spectral_radius(&Mat::zeros(3, 3)).unwrap(), 0.0);
    assert!((spectral_radius(&Mat::identity(2)).unwrap() - 1.0).abs() < 1e-12);
    let m = Mat::from_rows(&[vec![0.0, 1.0], vec![-2.0, -3.0]]).unwrap();
    assert!((spectral_radius(&m).unwrap() - 2.0).abs() < 1e-10);
    assert!(spectral_radius(&Mat::zeros(2, 3)).is_err());
}

proptest! {
    #[test]
    fn expm_inverse(m in square(3, 5.0)) {
        let m = scaled_to_norm(m, 5.0);
        let prod = &mat_exp(&m).unwrap() * &mat_exp(&m.scale(-1.0)).unwrap();
        prop_assert!((&prod - &Mat::identity(3)).max_abs() < 1e-10);
    }

    #[test]
    fn expm_semigroup(m in square(3, 2.0), t in 0.0f64..1.5, s in 0.0f64..1.5) {
        let whole = mat_exp(&m.scale(t + s)).unwrap();
        let split = &mat_exp(&m.scale(t)).unwrap() * &mat_exp(&m.scale(s)).unwrap();
        prop_assert!((&whole - &split).max_abs() < 1e-10 * whole.max_abs().max(1.0));
    }

    #[test]
    fn spectral_radius_of_exponential(d in proptest::collection::vec(-3.0f64..1.0, 3), p in square(3, 1.0)) {
        // similarity transform of a diagonal matrix keeps it diagonalizable
        let t = &Mat::identity(3) + &p.scale(0.3);
        prop_assume!(resetdf::matkit::inverse(&t).is_ok());
        let ti = resetdf::matkit::inverse(&t).unwrap();
        let a = &(&t * &Mat::diag(&d)) * &ti;
        let r = spectral_radius(&mat_exp(&a).unwrap()).unwrap();
        let expect = spectral_abscissa(&a).unwrap().exp();
        prop_assert!((r - expect).abs() < 1e-8 * expect.max(1.0));
    }

    #[test]
    fn lstsq_residual_is_orthogonal(
        entries in proptest::collection::vec(-10.0f64..10.0, 24),
        rhs in proptest::collection::vec(-10.0f64..10.0, 8),
    ) {
        let a = Mat::from_vec(8, 3, entries).unwrap();
        let b = Mat::column(&rhs);
        let sol = lstsq(&a, &b).unwrap();
        let r = &(&a * &sol.x) - &b;
        let normal = &a.transpose() * &r;
        prop_assert!(normal.norm_fro() <= 1e-8 * a.norm_fro() * b.norm_fro().max(1.0));
    }
}
