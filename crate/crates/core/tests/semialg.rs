use momap::config::Tolerances;
use momap::linalg::RankPolicy;
use momap::poly::{Polynomial, PolynomialMap};
use momap::semialg::*;
use momap::strata::random_samples;
use nalgebra::{Complex, DVector};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

/// ρ computed with complex arithmetic from the slice coordinates.
fn rho_oracle(p: &[f64]) -> [f64; 5] {
    let z1 = Complex::new(p[1], p[2]);
    let z2 = Complex::new(p[3], p[4]);
    let w = z1 * z2.conj();
    [p[0], z1.norm_sqr(), z2.norm_sqr(), w.re, w.im]
}

#[test]
fn su2su2_generators_match_closed_form() {
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    assert_eq!(data.rho.target_dim(), 5);
    assert_eq!(data.sigma.target_dim(), 2);
    for p in random_samples(5, 200, 3, 0.3) {
        let got = data.rho.eval(&p).unwrap();
        let want = rho_oracle(p.as_slice());
        for i in 0..5 {
            assert!((got[i] - want[i]).abs() < 1e-12);
        }
    }
    let xi = v(&[1.0, 2.0, 0.0, -1.0, 0.5, 0.5]);
    let s = data.sigma.eval(&xi).unwrap();
    assert!((s[0] - 5.0).abs() < 1e-14 && (s[1] - 1.5).abs() < 1e-14);
    let pr = data.relation.eval(&v(&[2.0, 1.0, 3.0, 0.0, 0.0])).unwrap();
    assert_eq!(pr.as_slice(), &[5.0, 7.0]);
}

#[test]
fn commuting_square_examples() {
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    let p = v(&[1.0, 1.0, 0.0, 0.0, 0.0]);
    let rho = data.rho.eval(&p).unwrap();
    assert_eq!(rho.as_slice(), &[1.0, 1.0, 0.0, 0.0, 0.0]);
    assert_eq!(data.relation.eval(&rho).unwrap().as_slice(), &[2.0, 1.0]);
    let sj = data.sigma.eval(&data.momentum(&p).unwrap()).unwrap();
    assert!((sj[0] - 2.0).abs() < 1e-15 && (sj[1] - 1.0).abs() < 1e-15);
    assert_eq!(commuting_square_residual(&data, &[p]).unwrap(), 0.0);
    assert_eq!(commuting_square_residual(&data, &[DVector::zeros(5)]).unwrap(), 0.0);
    let samples = random_samples(5, 1000, 11, 0.0);
    assert!(commuting_square_residual(&data, &samples).unwrap() < 1e-10);
}

#[test]
fn commuting_square_for_torus_and_adjoint() {
    for id in ["torus-weights(1;1)", "torus-weights(1;1;1)", "torus-weights(2;1,0;0,1;1,1)", "su2-adjoint"] {
        let data = builtin_hilbert_maps(id).unwrap();
        let samples = random_samples(data.rho.source_dim(), 300, 5, 0.2);
        assert!(commuting_square_residual(&data, &samples).unwrap() < 1e-10, "{id}");
    }
}

#[test]
fn builtin_generators() {
    let adj = builtin_hilbert_maps("su2-adjoint").unwrap();
    assert_eq!(adj.rho.target_dim(), 1);
    // -Tr(X^2) for X = e1 = diag(i, -i) is 2.
    assert_eq!(adj.rho.eval(&v(&[1.0, 0.0, 0.0])).unwrap()[0], 2.0);

    let w1 = builtin_hilbert_maps("torus-weights(1;1)").unwrap();
    assert_eq!(w1.rho.target_dim(), 1);
    let z = v(&[0.6, -0.8]);
    assert!((w1.rho.eval(&z).unwrap()[0] - 1.0).abs() < 1e-15);

    // Weights (1, 1) on C^2: |z1|^2, |z2|^2, Re and Im of z1 z̄2.
    let w11 = builtin_hilbert_maps("torus-weights(1;1;1)").unwrap();
    assert_eq!(w11.rho.target_dim(), 4);
    let p = [0.3, 0.4, -1.0, 2.0];
    let got = w11.rho.eval(&v(&p)).unwrap();
    let z1 = Complex::new(p[0], p[1]);
    let z2 = Complex::new(p[2], p[3]);
    let w = z1 * z2.conj();
    let want = [z1.norm_sqr(), z2.norm_sqr(), w.re, w.im];
    for i in 0..4 {
        assert!((got[i] - want[i]).abs() < 1e-12);
    }

    // Weights (1, -1): the invariant is z1 z2.
    let w1m = builtin_hilbert_maps("torus-weights(1;1;-1)").unwrap();
    let got = w1m.rho.eval(&v(&p)).unwrap();
    let w = z1 * z2;
    assert!((got[2] - w.re).abs() < 1e-12 && (got[3] - w.im).abs() < 1e-12);

    // Weights (1, 2): z1^2 z̄2.
    let w12 = builtin_hilbert_maps("torus-weights(1;1;2)").unwrap();
    assert_eq!(w12.rho.target_dim(), 4);
    let got = w12.rho.eval(&v(&p)).unwrap();
    let w = z1 * z1 * z2.conj();
    assert!((got[2] - w.re).abs() < 1e-12 && (got[3] - w.im).abs() < 1e-12);
}

#[test]
fn unknown_ids_are_input_errors() {
    for id in ["su3", "torus-weights(2;1)", "torus-weights(x;1)", "torus-weights(1;a)", "torus-weights(1)"] {
        assert!(builtin_hilbert_maps(id).unwrap_err().is_input_error(), "{id}");
    }
}

#[test]
fn generators_are_invariant() {
    for id in [
        "su2su2-circle",
        "su2-adjoint",
        "torus-weights(1;1)",
        "torus-weights(1;1;2)",
        "torus-weights(2;1,0;0,1;1,1)",
    ] {
        let data = builtin_hilbert_maps(id).unwrap();
        let pts = random_samples(data.rho.source_dim(), 20, 9, 0.2);
        assert!(data.rho.invariance_residual(&pts, 100, 1).unwrap() < 1e-9, "{id}");
        let gpts = random_samples(data.sigma.source_dim(), 20, 9, 0.2);
        assert!(data.sigma.invariance_residual(&gpts, 100, 2).unwrap() < 1e-9, "{id}");
    }
}

#[test]
fn generators_separate_orbits() {
    for id in ["su2su2-circle", "su2-adjoint", "torus-weights(1;1)", "torus-weights(1;1;1)"] {
        let data = builtin_hilbert_maps(id).unwrap();
        let r = separation_check(&data.rho, 1000, 1e-3, 1e-6, 4).unwrap();
        assert!(r.tested > 500, "{id}: {r:?}");
        assert_eq!(r.violations, 0, "{id}: {r:?}");
    }
}

#[test]
fn membership_examples() {
    let img = image_descriptor_su2su2();
    let t = tol();
    assert!(img.member(&[0.0; 5], &t).unwrap());
    assert!(img.member(&[0.0, 1.0, 1.0, 1.0, 0.0], &t).unwrap());
    assert!(!img.member(&[0.0, 1.0, 1.0, 2.0, 0.0], &t).unwrap());
    assert!(!img.member(&[0.0, -1.0, -1.0, 1.0, 0.0], &t).unwrap());
    assert!(img.member(&[0.0; 4], &t).unwrap_err().is_input_error());
    assert!(img.member(&[f64::NAN, 0.0, 0.0, 0.0, 0.0], &t).unwrap_err().is_input_error());
    // Equality band is 1e-9.
    assert!(img.member(&[0.0, 1.0, 1.0, 1.0 + 4e-10, 0.0], &t).unwrap());
    assert!(!img.member(&[0.0, 1.0, 1.0, 1.0 + 1e-8, 0.0], &t).unwrap());
}

#[test]
fn image_contains_all_samples() {
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    let img = image_descriptor_su2su2();
    for x in image_samples(&data, 10_000, 21, 0.5).unwrap() {
        assert!(img.member(x.as_slice(), &tol()).unwrap(), "{x}");
    }
}

#[test]
fn six_descriptors_partition_the_image() {
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    let descs = strata_descriptors_su2su2();
    assert_eq!(descs.len(), 6);
    let [low, high] = coarse_strata_su2su2();
    let t = tol();
    let mut hits = [0usize; 6];
    for x in image_samples(&data, 10_000, 22, 0.5).unwrap() {
        let m: Vec<bool> = descs.iter().map(|d| d.member(x.as_slice(), &t).unwrap()).collect();
        assert_eq!(m.iter().filter(|&&b| b).count(), 1, "{x}");
        for (i, &b) in m.iter().enumerate() {
            hits[i] += b as usize;
        }
        assert_eq!(low.member(x.as_slice(), &t).unwrap(), m[0] || m[1] || m[2]);
        assert_eq!(high.member(x.as_slice(), &t).unwrap(), m[3] || m[4] || m[5]);
    }
    assert!(hits.iter().all(|&h| h > 0), "{hits:?}");
}

#[test]
fn stratum_fiber_dimensions() {
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    let descs = strata_descriptors_su2su2();
    let pol = RankPolicy::default();
    let points = [
        [-1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0; 5],
        [0.7, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.5, 0.0, 0.0, 0.0],
        [0.0, 0.0, 2.0, 0.0, 0.0],
        [0.3, 1.0, 2.0, 1.0, -1.0],
    ];
    for (i, x) in points.iter().enumerate() {
        assert!(descs[i].member(x, &tol()).unwrap());
        let d = fiber_dimension(&descs[i], &data.relation, &v(x), &pol).unwrap();
        assert_eq!(d, if i == 5 { 2 } else { 0 }, "descriptor {i}");
    }
    // Generic points of the open stratum.
    for p in random_samples(5, 50, 31, 0.0) {
        let x = data.rho.eval(&p).unwrap();
        assert_eq!(fiber_dimension(&descs[5], &data.relation, &x, &pol).unwrap(), 2);
    }
}

#[test]
fn fiber_surface_examples() {
    let t = tol();
    let f = fiber_surface(1.0, 2.0, 100, 1, &t).unwrap();
    assert!(f.descriptor.member(&[0.0, 2f64.sqrt(), 0.0], &t).unwrap());
    assert!(f.descriptor.member(&[0.0, 1.0, 1.0], &t).unwrap());
    assert!(!f.descriptor.member(&[0.0, 1.0, 0.0], &t).unwrap());
    assert!(f.punctures.is_empty());

    let f = fiber_surface(1.0, 1.0, 100, 1, &t).unwrap();
    assert_eq!(f.punctures.len(), 2);
    assert_eq!(f.punctures[0], [-1.0, 0.0, 0.0]);
    assert_eq!(f.punctures[1], [1.0, 0.0, 0.0]);

    for e in [fiber_surface(0.0, 1.0, 10, 1, &t), fiber_surface(1.0, -2.0, 10, 1, &t)] {
        assert!(e.unwrap_err().is_input_error());
    }
}

#[test]
fn fiber_samples_lie_on_the_fiber() {
    let t = tol();
    let data = builtin_hilbert_maps("su2su2-circle").unwrap();
    let open = &strata_descriptors_su2su2()[5];
    for (y1, y2) in [(1.0, 2.0), (1.0, 1.0), (3.0, 0.5)] {
        let f = fiber_surface(y1, y2, 250, 7, &t).unwrap();
        assert_eq!(f.samples.len(), 250);
        for s in &f.samples {
            assert!(f.descriptor.member(&s[..3], &t).unwrap());
            let x = fiber_point(s);
            assert!(open.member(&x, &t).unwrap());
            let y = data.relation.eval(&v(&x)).unwrap();
            assert!((y[0] - y1).abs() < 1e-12 && (y[1] - y2).abs() < 1e-12);
        }
        let csv = fiber_csv(&f);
        assert!(csv.starts_with("x1,x4,x5,x2,x3\n"));
        assert_eq!(csv.lines().count(), 251);
    }
}

fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..3, nvars), -2.0f64..2.0), 0..6)
        .prop_map(move |terms| Polynomial::from_terms(nvars, terms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_and_composition_evaluate_pointwise(
        a in arb_poly(3), b in arb_poly(3), c in arb_poly(2), d in arb_poly(2),
        x in prop::collection::vec(-1.5f64..1.5, 3), y in prop::collection::vec(-1.5f64..1.5, 2),
    ) {
        let ab = (&a * &b).eval(&x).unwrap();
        prop_assert!((ab - a.eval(&x).unwrap() * b.eval(&x).unwrap()).abs() < 1e-9);
        let s = (&a - &b).eval(&x).unwrap();
        prop_assert!((s - (a.eval(&x).unwrap() - b.eval(&x).unwrap())).abs() < 1e-9);
        let outer = Polynomial::from_terms(2, [(vec![2, 1], 1.5), (vec![0, 1], -1.0)]).unwrap();
        let comp = outer.compose(&[c.clone(), d.clone()]).unwrap();
        let want = outer.eval(&[c.eval(&y).unwrap(), d.eval(&y).unwrap()]).unwrap();
        prop_assert!((comp.eval(&y).unwrap() - want).abs() < 1e-8 * (1.0 + want.abs()));
    }

    #[test]
    fn jacobian_matches_finite_differences(a in arb_poly(3), b in arb_poly(3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let map = PolynomialMap::new(3, vec![a, b]).unwrap();
        let xv = v(&x);
        let jac = map.jacobian(&xv).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = xv.clone();
            let mut xm = xv.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (map.eval(&xp).unwrap() - map.eval(&xm).unwrap()) / (2.0 * h);
            for i in 0..2 {
                prop_assert!((fd[i] - jac[(i, j)]).abs() < 1e-6);
            }
        }
    }
}
