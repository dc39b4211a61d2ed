use gaudin_core::gaudin::quadratic_family;
use gaudin_core::opcore::{eigen, exact_kernel, in_span, matrix_unit, LinOp};
use gaudin_core::repspace::standard_module;
use gaudin_core::scalar::{int, rat};
use gaudin_core::{QOp, Rational, SitePoints, TensorSpace};
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| rat(p, q))
}

fn rational_matrix(dim: usize) -> impl Strategy<Value = QOp> {
    prop::collection::vec(small_rational(), dim * dim).prop_map(move |v| LinOp::from_dense(dim, v))
}

/// Flip on C^2 ⊗ C^2 written out by hand.
fn flip4() -> QOp {
    LinOp::from_triplets(4, [(0, 0, int(1)), (1, 2, int(1)), (2, 1, int(1)), (3, 3, int(1))])
}

fn sorted_re(mut v: Vec<Complex64>) -> Vec<f64> {
    v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    v.iter().map(|c| c.re).collect()
}

#[test]
fn gl2_relation_on_standard_units() {
    let e12: QOp = matrix_unit(2, 0, 1);
    let e21: QOp = matrix_unit(2, 1, 0);
    assert_eq!(e12.commutator(&e21).unwrap(), LinOp::diagonal(vec![int(1), int(-1)]));
}

#[test]
fn flip_commutes_with_h1() {
    let s = TensorSpace::new(vec![standard_module(2); 2]).unwrap();
    let h = quadratic_family(&s, &SitePoints::from_ints(&[0, 1]).unwrap()).unwrap();
    assert!(flip4().commutator(&h.members()[0].op).unwrap().is_zero());
}

#[test]
fn diagonal_raising_kernel_on_two_sites() {
    let s = TensorSpace::new(vec![standard_module(2); 2]).unwrap();
    let k = exact_kernel(&s.diag_gen(0, 1));
    assert_eq!(k.len(), 2);
}

#[test]
fn flip_and_h1_eigenvalues() {
    let e = eigen(&flip4()).unwrap();
    let want = [-1.0, 1.0, 1.0, 1.0].map(|x| Complex64::new(x, 0.0)).to_vec();
    assert!(matched(e.values, want, 1e-12));
    let s = TensorSpace::new(vec![standard_module(2); 2]).unwrap();
    let h = quadratic_family(&s, &SitePoints::from_ints(&[0, 1]).unwrap()).unwrap();
    let e = eigen(&h.members()[0].op).unwrap();
    let v = sorted_re(e.values);
    for (x, y) in v.iter().zip([-1.0, -1.0, -1.0, 1.0]) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn span_examples() {
    let id: QOp = LinOp::identity(3);
    let r = in_span(&id.scale(&int(2)), &[id]).unwrap();
    assert!(r.member);
    assert_eq!(r.coefficients.unwrap(), vec![int(2)]);
    let r = in_span(&matrix_unit::<Rational>(2, 0, 1), &[matrix_unit(2, 1, 0)]).unwrap();
    assert!(!r.member);
}

/// Roots of the characteristic polynomial of a 2x2 matrix, closed form.
fn roots2(a: &QOp) -> Vec<Complex64> {
    let f = |r, c| gaudin_core::scalar::rational_to_f64(&a.get(r, c));
    let (p, q, r, s) = (f(0, 0), f(0, 1), f(1, 0), f(1, 1));
    let tr = p + s;
    let det = p * s - q * r;
    let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
    vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
}

fn matched(a: Vec<Complex64>, mut b: Vec<Complex64>, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| {
            let (i, d) = b.iter().enumerate().map(|(i, y)| (i, (x - y).norm() / (1.0 + y.norm()))).fold((0, f64::INFINITY), |m, c| if c.1 < m.1 { c } else { m });
            b.swap_remove(i);
            d <= tol
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_is_antisymmetric(a in rational_matrix(3), b in rational_matrix(3)) {
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        prop_assert_eq!(ab, ba.scale(&int(-1)));
    }

    #[test]
    fn kernel_vectors_are_annihilated(a in rational_matrix(4), zero_rows in 0usize..3) {
        // force a nontrivial kernel by zeroing rows and duplicating a column
        let mut v = a.to_dense();
        for r in 0..zero_rows {
            for c in 0..4 { v[r * 4 + c] = Rational::zero(); }
        }
        for r in 0..4 { v[r * 4 + 3] = v[r * 4].clone(); }
        let a = LinOp::from_dense(4, v);
        let k = exact_kernel(&a);
        prop_assert!(!k.is_empty());
        for x in &k {
            prop_assert!(a.apply(x).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn span_coefficients_reconstruct(cs in prop::collection::vec(small_rational(), 3), b in prop::collection::vec(rational_matrix(2), 3)) {
        let target = b.iter().zip(&cs).fold(LinOp::zeros(2), |acc, (m, c)| acc.try_axpy(c, m).unwrap());
        let r = in_span(&target, &b).unwrap();
        prop_assert!(r.member);
        let got = r.coefficients.unwrap();
        let rebuilt = b.iter().zip(&got).fold(LinOp::zeros(2), |acc, (m, c)| acc.try_axpy(c, m).unwrap());
        prop_assert_eq!(rebuilt, target);
    }

    #[test]
    fn float_eigenvalues_match_exact_quadratic(a in rational_matrix(2)) {
        let e = match eigen(&a) { Ok(e) => e, Err(_) => return Ok(()) };
        prop_assert!(matched(e.values, roots2(&a), 1e-9));
    }

    #[test]
    fn triangular_3x3_eigenvalues(d in prop::collection::vec(-20i64..20, 3), off in prop::collection::vec(small_rational(), 3)) {
        prop_assume!(d[0] != d[1] && d[1] != d[2] && d[0] != d[2]);
        // P T P^{-1} with P unipotent lower triangular keeps the spectrum {d}
        let t = LinOp::from_triplets(3, [(0, 0, int(d[0])), (1, 1, int(d[1])), (2, 2, int(d[2])), (0, 1, off[0].clone()), (0, 2, off[1].clone()), (1, 2, off[2].clone())]);
        let p = LinOp::from_triplets(3, [(0, 0, int(1)), (1, 1, int(1)), (2, 2, int(1)), (1, 0, int(2)), (2, 1, int(-1))]);
        let pinv = LinOp::from_triplets(3, [(0, 0, int(1)), (1, 1, int(1)), (2, 2, int(1)), (1, 0, int(-2)), (2, 1, int(1)), (2, 0, int(-2))]);
        prop_assert_eq!(p.try_mul(&pinv).unwrap(), LinOp::identity(3));
        let a = p.try_mul(&t).unwrap().try_mul(&pinv).unwrap();
        let e = eigen(&a).unwrap();
        let want: Vec<Complex64> = d.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect();
        prop_assert!(matched(e.values, want, 1e-9));
    }
}
