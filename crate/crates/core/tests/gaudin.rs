use gaudin_core::gaudin::{
    default_trunc, diag_casimirs, extract_generators, gaudin_family, lax_series, quadratic_family, split_casimir, Provenance,
};
use gaudin_core::opcore::{in_span, LinOp};
use gaudin_core::repspace::{standard_module, symmetric_tensor_space};
use gaudin_core::scalar::{int, rat};
use gaudin_core::{OperatorFamily, QOp, Rational, SitePoints, TensorSpace};
use proptest::prelude::*;

fn flip_oracle(s: &TensorSpace<Rational>, i: usize, j: usize) -> QOp {
    let trip = (0..s.dim()).map(|x| {
        let mut d = s.decode(x);
        d.swap(i, j);
        (s.encode(&d), x, int(1))
    });
    LinOp::from_triplets(s.dim(), trip)
}

fn std_space(n_lie: usize, n: usize) -> TensorSpace<Rational> {
    TensorSpace::new(vec![standard_module(n_lie); n]).unwrap()
}

fn assert_commutes(fam: &OperatorFamily<Rational>) {
    let r = fam.commute_report(0.0).unwrap();
    assert!(r.all_commute, "failures: {:?}", r.failures);
    assert_eq!(r.max_norm, "0/1");
}

#[test]
fn split_casimir_is_flip_on_standard() {
    for n_lie in 1..=3 {
        let s = std_space(n_lie, 3);
        assert_eq!(split_casimir(&s, 0, 2).unwrap(), flip_oracle(&s, 0, 2));
        assert_eq!(split_casimir(&s, 0, 2).unwrap(), split_casimir(&s, 2, 0).unwrap());
    }
}

#[test]
fn split_casimir_is_gl_invariant() {
    let s = symmetric_tensor_space(3, &[2, 1]).unwrap();
    let om = split_casimir(&s, 0, 1).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert!(om.commutator(&s.diag_gen(a, b)).unwrap().is_zero());
        }
    }
}

#[test]
fn quadratic_examples() {
    let one = quadratic_family(&std_space(2, 1), &SitePoints::from_ints(&[4]).unwrap()).unwrap();
    assert!(one.members()[0].op.is_zero());
    let two = std_space(2, 2);
    let h = quadratic_family(&two, &SitePoints::from_ints(&[0, 1]).unwrap()).unwrap();
    assert_eq!(h.members()[0].op, flip_oracle(&two, 0, 1).scale(&int(-1)));
}

#[test]
fn repeated_points_are_rejected() {
    let err = SitePoints::new(vec![int(0), int(1), int(0)]).unwrap_err();
    assert_eq!(err.to_string(), "sites not pairwise distinct");
}

#[test]
fn lax_expansion_coefficients() {
    let s = std_space(2, 2);
    let z = SitePoints::from_ints(&[0, 1]).unwrap();
    let lax = lax_series(&s, &z, 0, 3).unwrap();
    for p in 0..2 {
        for q in 0..2 {
            let e = lax.entry(p, q);
            assert_eq!(e.coeff(-1), s.site_op(0, p, q));
            // E^(2)/(u - 1) = -E^(2) (1 + u + u^2 + ...)
            assert_eq!(*e.coeff(0), s.site_op(1, p, q).scale(&int(-1)));
            assert_eq!(*e.coeff(1), s.site_op(1, p, q).scale(&int(-1)));
        }
    }
    let single = lax_series(&std_space(2, 1), &SitePoints::from_ints(&[7]).unwrap(), 0, 3).unwrap();
    assert_eq!(single.entry(0, 1).coeff(-1), std_space(2, 1).site_op(0, 0, 1));
    for j in 0..=3 {
        assert!(single.entry(0, 1).coeff(j).is_zero());
    }
}

#[test]
fn gl1_generators_are_site_units() {
    let s = std_space(1, 3);
    let f = extract_generators(&s, &SitePoints::from_ints(&[0, 1, 3]).unwrap(), default_trunc(1)).unwrap();
    let ops = f.ops();
    for i in 0..3 {
        let r = in_span(&s.embed_at_site(i, 0, 0).unwrap(), &ops).unwrap();
        assert!(r.member, "E_11 at site {i}");
    }
    assert_commutes(&f);
}

#[test]
fn degree_one_generators_are_site_traces() {
    let s = symmetric_tensor_space(2, &[1, 2, 1]).unwrap();
    let f = extract_generators(&s, &SitePoints::from_ints(&[0, 1, 3]).unwrap(), default_trunc(2)).unwrap();
    for m in f.members() {
        if let Provenance::Laurent { pole, l: 1, m: 1 } = m.provenance {
            let site = pole - 1;
            let tr = s.embed_at_site(site, 0, 0).unwrap().try_add(&s.embed_at_site(site, 1, 1).unwrap()).unwrap();
            // residue of -Tr L
            assert_eq!(m.op.scale(&int(-1)), tr, "pole {pole}");
        }
    }
}

/// Central part: diagonal Casimirs, site Casimirs and the identity.
fn center_like(s: &TensorSpace<Rational>) -> Vec<QOp> {
    let n = s.n_lie();
    let mut c = diag_casimirs(s).ops();
    for site in 0..s.n_sites() {
        let tr = (0..n).fold(LinOp::zeros(s.dim()), |acc, a| acc.try_add(s.site_op(site, a, a)).unwrap());
        c.push(tr.try_mul(&tr).unwrap());
        let sq = (0..n * n).fold(LinOp::zeros(s.dim()), |acc, k| acc.try_add(&s.site_op(site, k / n, k % n).try_mul(s.site_op(site, k % n, k / n)).unwrap()).unwrap());
        c.push(sq);
        c.push(tr);
    }
    c.push(LinOp::identity(s.dim()));
    c
}

#[test]
fn quadratic_hamiltonians_live_in_the_extracted_span() {
    for (n_lie, degs) in [(2, vec![1, 1]), (2, vec![1, 1, 1]), (3, vec![1, 2, 1])] {
        let s = symmetric_tensor_space(n_lie, &degs).unwrap();
        let z = SitePoints::from_ints(&[0, 1, 3][..degs.len()]).unwrap();
        let gens = extract_generators(&s, &z, default_trunc(n_lie)).unwrap();
        let mut basis = gens.ops();
        basis.extend(center_like(&s));
        for h in quadratic_family(&s, &z).unwrap().members() {
            assert!(in_span(&h.op, &basis).unwrap().member, "{} for N={n_lie} m={degs:?}", h.label);
        }
    }
}

#[test]
fn families_commute_exactly() {
    for (n_lie, degs) in [(2, vec![1, 1]), (2, vec![2, 1, 1]), (3, vec![1, 1]), (3, vec![1, 1, 1])] {
        let s = symmetric_tensor_space(n_lie, &degs).unwrap();
        let z = SitePoints::from_ints(&[0, 1, 3][..degs.len()]).unwrap();
        let f = gaudin_family(&s, &z, default_trunc(n_lie)).unwrap();
        assert_commutes(&f);
        let mut diag = OperatorFamily::new(s.dim());
        for a in 0..n_lie {
            for b in 0..n_lie {
                diag.push(format!("E_{a}{b}"), s.diag_gen(a, b), Provenance::Identity);
            }
        }
        assert!(f.cross_commute_report(&diag, 0.0).unwrap().all_commute);
    }
}

#[test]
fn hamiltonians_sum_to_zero() {
    let s = symmetric_tensor_space(2, &[1, 2, 1]).unwrap();
    let h = quadratic_family(&s, &SitePoints::new(vec![rat(-1, 2), int(3), rat(7, 5)]).unwrap()).unwrap();
    let sum = h.ops().iter().fold(LinOp::zeros(s.dim()), |a, b| a.try_add(b).unwrap());
    assert!(sum.is_zero());
}

#[test]
fn affine_stability_gl2_three_sites() {
    let s = std_space(2, 3);
    let z = SitePoints::from_ints(&[0, 1, 3]).unwrap();
    let w = z.affine(&int(2), &int(5)).unwrap();
    let a = extract_generators(&s, &z, 4).unwrap().nonzero().ops();
    let b = extract_generators(&s, &w, 4).unwrap().nonzero().ops();
    for x in &a {
        assert!(in_span(x, &b).unwrap().member);
    }
    for x in &b {
        assert!(in_span(x, &a).unwrap().member);
    }
}

#[test]
fn wider_truncation_gives_the_same_family() {
    let s = std_space(2, 3);
    let z = SitePoints::from_ints(&[0, 1, 3]).unwrap();
    let a = extract_generators(&s, &z, 4).unwrap();
    let b = extract_generators(&s, &z, 7).unwrap();
    assert_eq!(a.ops(), b.ops());
}

#[test]
fn short_truncation_is_rejected() {
    let s = std_space(2, 2);
    assert!(extract_generators(&s, &SitePoints::from_ints(&[0, 1]).unwrap(), 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_points_commute(p in prop::collection::vec((-30i64..30, 1i64..8), 3)) {
        let z: Vec<Rational> = p.iter().map(|&(a, b)| rat(a, b)).collect();
        let Ok(z) = SitePoints::new(z) else { return Ok(()) };
        let s = std_space(2, 3);
        let f = gaudin_family(&s, &z, 4).unwrap();
        prop_assert!(f.commute_report(0.0).unwrap().all_commute);
        let sum = quadratic_family(&s, &z).unwrap().ops().iter().fold(LinOp::zeros(8), |a, b| a.try_add(b).unwrap());
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn affine_images_span_the_same_space(a in 1i64..6, b in -5i64..5) {
        let s = symmetric_tensor_space(2, &[1, 2]).unwrap();
        let z = SitePoints::from_ints(&[0, 2]).unwrap();
        let w = z.affine(&int(a), &int(b)).unwrap();
        let x = extract_generators(&s, &z, 4).unwrap().nonzero().ops();
        let y = extract_generators(&s, &w, 4).unwrap().nonzero().ops();
        for o in &x {
            prop_assert!(in_span(o, &y).unwrap().member);
        }
        for o in &y {
            prop_assert!(in_span(o, &x).unwrap().member);
        }
    }
}

#[test]
fn float_family_matches_exact() {
    let s = std_space(2, 3);
    let z = SitePoints::from_ints(&[0, 1, 3]).unwrap();
    let exact = gaudin_family(&s, &z, 4).unwrap();
    let float = gaudin_family(&s.to_field::<f64>(), &z, 4).unwrap();
    for (e, f) in exact.members().iter().zip(float.members()) {
        let diff = e.op.to_field::<f64>().try_sub(&f.op).unwrap();
        assert!(diff.max_abs() <= 1e-12 * (1.0 + e.op.max_abs()), "{}", e.label);
    }
    assert!(float.commute_report(1e-10).unwrap().max_norm_f64 <= 1e-10);
}

#[test]
fn member_count_and_labels() {
    // poles 1..n-1 give N(N+1)/2 members, the last pole N, then N Casimirs
    let s = std_space(3, 2);
    let f = extract_generators(&s, &SitePoints::from_ints(&[0, 1]).unwrap(), 6).unwrap();
    assert_eq!(f.len(), 6 + 3 + 3);
    assert!(f.get("S_2^(1,1)").is_some());
    assert!(f.get("C_3").is_some());
}
