use gaudin_core::gaudin::{extract_generators, gaudin_family, split_casimir};
use gaudin_core::limits::{
    alim_generators, bending_functions, bending_quadratic_family, classical_bending, compare_spans, diagonal_center, fd_poisson_bracket,
    gr_consistency, limit_sweep, poisson_bracket, predicted_limit_family, ClassicalFn, ClassicalPoint, DegenSchedule, SpanVerdict,
};
use gaudin_core::opcore::{in_span, LinOp};
use gaudin_core::repspace::{standard_module, symmetric_tensor_space};
use gaudin_core::scalar::{int, rat};
use gaudin_core::{QOp, Rational, SitePoints, TensorSpace};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn std_space(n_lie: usize, n: usize) -> TensorSpace<Rational> {
    TensorSpace::new(vec![standard_module(n_lie); n]).unwrap()
}

fn schedule(z_fixed: &[i64], center: i64, u: &[i64]) -> DegenSchedule {
    DegenSchedule {
        z_fixed: z_fixed.iter().map(|&x| int(x)).collect(),
        z_center: int(center),
        u: u.iter().map(|&x| int(x)).collect(),
        s_values: vec![rat(1, 10), rat(1, 100), rat(1, 1000), rat(1, 10000)],
    }
}

#[test]
fn predicted_family_commutes_and_parts_cross_commute() {
    let s = std_space(2, 3);
    let sch = schedule(&[0], 1, &[0, 1]);
    let fam = predicted_limit_family(&s, &sch, 4).unwrap();
    assert!(fam.commute_report(0.0).unwrap().all_commute);
    let (a, b): (Vec<_>, Vec<_>) = fam.members().iter().partition(|m| m.label.starts_with("a:"));
    assert!(!a.is_empty() && !b.is_empty());
    for x in &a {
        for y in &b {
            assert!(x.op.commutator(&y.op).unwrap().is_zero(), "{} vs {}", x.label, y.label);
        }
    }
}

#[test]
fn glued_quadratic_is_the_two_site_hamiltonian() {
    let s = std_space(2, 3);
    let sch = schedule(&[0], 1, &[0, 1]);
    let fam = predicted_limit_family(&s, &sch, 4).unwrap();
    // Ω^{(2,3)}/(u_1 − u_2) lifted
    let want = split_casimir(&s, 1, 2).unwrap().scale(&int(-1));
    assert_eq!(fam.get("b:H_1").unwrap().op, want);
}

#[test]
fn rescaled_glued_hamiltonian_approaches_its_limit() {
    let s = std_space(2, 3);
    let sch = schedule(&[0], 1, &[0, 1]);
    let limit = split_casimir(&s, 1, 2).unwrap().scale(&int(-1));
    let mut prev = f64::INFINITY;
    for sv in &sch.s_values {
        let h = gaudin_family(&s, &sch.points(sv).unwrap(), 4).unwrap();
        let scaled = h.get("H_2").unwrap().op.scale(sv);
        let d = scaled.try_sub(&limit).unwrap().max_abs();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-3);
}

#[test]
fn sweep_converges_at_linear_rate() {
    let s = std_space(2, 3);
    let r = limit_sweep(&s, &schedule(&[0], 1, &[0, 1]), 4).unwrap();
    assert!(r.passed, "{r:?}");
    let slope = r.slope.unwrap();
    assert!((slope - 1.0).abs() < 0.2, "slope {slope}");
    assert!(r.ambiguities.is_empty());
}

#[test]
fn invalid_schedules() {
    let s = std_space(2, 3);
    let mut sch = schedule(&[0], 1, &[0, 1]);
    sch.s_values = vec![rat(1, 100), rat(1, 10)];
    assert!(limit_sweep(&s, &sch, 4).is_err());
    let sch = schedule(&[1], 1, &[0, 1]);
    assert!(predicted_limit_family(&s, &sch, 4).is_err());
}

#[test]
fn bending_examples() {
    let two = std_space(2, 2);
    let f = bending_quadratic_family(&two).unwrap();
    assert_eq!(f.members()[0].op, split_casimir(&two, 0, 1).unwrap());
    let s = symmetric_tensor_space(2, &[1, 2, 1]).unwrap();
    let f = bending_quadratic_family(&s).unwrap();
    assert!(f.commute_report(0.0).unwrap().all_commute);
    for m in f.members() {
        for a in 0..2 {
            for b in 0..2 {
                assert!(m.op.commutator(&s.diag_gen(a, b)).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn alim_contains_the_bending_quadratics() {
    let s = std_space(2, 3);
    let alim = alim_generators(&s, &int(0), &int(1), 4).unwrap();
    assert!(alim.commute_report(0.0).unwrap().all_commute);
    let mut basis = alim.ops();
    basis.extend(diagonal_center(&s));
    for m in bending_quadratic_family(&s).unwrap().members() {
        assert!(in_span(&m.op, &basis).unwrap().member, "{}", m.label);
    }
}

#[test]
fn alim_is_affine_stable() {
    let s = std_space(2, 3);
    let a = alim_generators(&s, &int(0), &int(1), 4).unwrap();
    let b = alim_generators(&s, &int(0), &int(5), 4).unwrap();
    assert_eq!(compare_spans(&a, &b, &[]).unwrap().verdict, SpanVerdict::Equal);
}

#[test]
fn alim_on_two_sites_is_the_gaudin_algebra() {
    let s = symmetric_tensor_space(2, &[1, 2]).unwrap();
    let z = SitePoints::from_ints(&[0, 1]).unwrap();
    let a = alim_generators(&s, &int(0), &int(1), 4).unwrap();
    let e = extract_generators(&s, &z, 4).unwrap();
    for (x, y) in a.members().iter().zip(e.members()) {
        assert_eq!(x.op, y.op, "{}", y.label);
    }
}

fn point(n_lie: usize, n_sites: usize, seed: u64) -> ClassicalPoint {
    ClassicalPoint::random(n_lie, n_sites, 20, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn trace_power(m: &QOp, l: usize) -> Rational {
    let mut p = LinOp::identity(m.dim());
    for _ in 0..l {
        p = p.try_mul(m).unwrap();
    }
    p.trace()
}

#[test]
fn classical_special_cases() {
    let pt = point(3, 3, 4);
    let x = pt.x(0).clone();
    let y = pt.tail_sum(0);
    for l in 1..=3 {
        assert_eq!(classical_bending(&pt, l, 0, 0).unwrap(), trace_power(&x, l));
        assert_eq!(classical_bending(&pt, l, 0, l).unwrap(), trace_power(&y, l));
    }
    let xy = x.try_mul(&y).unwrap().trace();
    assert_eq!(classical_bending(&pt, 2, 0, 1).unwrap(), xy * int(2));
}

#[test]
fn linear_functions_bracket_like_the_lie_algebra() {
    let pt = point(2, 2, 9);
    let a: QOp = LinOp::from_dense(2, vec![int(1), int(2), int(0), int(-1)]);
    let b: QOp = LinOp::from_dense(2, vec![int(0), int(1), int(3), int(2)]);
    let f = ClassicalFn::Linear { site: 0, a: a.clone() };
    let g = ClassicalFn::Linear { site: 0, a: b.clone() };
    let want = pt.x(0).try_mul(&a.commutator(&b).unwrap()).unwrap().trace();
    assert_eq!(poisson_bracket(&f, &g, &pt).unwrap(), want);
    assert!(poisson_bracket(&f, &f, &pt).unwrap().is_zero());
}

#[test]
fn bending_functions_poisson_commute() {
    let fs = bending_functions(3, 3);
    for seed in 0..4 {
        let pt = point(3, 3, 100 + seed);
        for f in &fs {
            for g in &fs {
                assert!(poisson_bracket(f, g, &pt).unwrap().is_zero(), "{f:?} {g:?}");
            }
        }
    }
}

#[test]
fn finite_difference_oracle_agrees() {
    let pt = point(2, 2, 5);
    let f = ClassicalFn::Bending { l: 2, k: 0, alpha: 0 };
    let g = ClassicalFn::Bending { l: 2, k: 0, alpha: 1 };
    assert!(fd_poisson_bracket(&f, &g, &pt, 1e-4).abs() < 1e-6);
    // a nonzero bracket, to make sure the oracle is not trivially zero
    let lin = ClassicalFn::Linear { site: 0, a: LinOp::from_dense(2, vec![int(0), int(1), int(0), int(0)]) };
    let exact = gaudin_core::scalar::rational_to_f64(&poisson_bracket(&g, &lin, &pt).unwrap());
    assert!(exact.abs() > 1e-3);
    assert!((fd_poisson_bracket(&g, &lin, &pt, 1e-4) - exact).abs() < 1e-6 * (1.0 + exact.abs()));
}

#[test]
fn quadratic_symbols_match_bending_hamiltonians() {
    for n in [2, 3] {
        let pts: Vec<_> = (0..4).map(|i| point(n, n, 40 + i)).collect();
        for k in 0..n - 1 {
            let checks = gr_consistency(&pts, k, &int(0), &int(1)).unwrap();
            assert!(!checks.is_empty());
            assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        }
    }
}
