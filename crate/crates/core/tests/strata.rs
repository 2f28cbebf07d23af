use momap::group::gaussian_vector;
use momap::models;
use momap::momentum::{HamiltonianModel, QuadraticMomentumMap};
use momap::strata::{
    analyze_point, codim_one_audit, dimension_type_label, frontier_sampling, isotropy_algebra, isotropy_data,
    leaf_rank_check, morita_type_label, random_samples, regular_part_test, stratum_through_origin, GridSpec,
    Stratification,
};
use momap::Tolerances;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn weight_one() -> HamiltonianModel {
    models::torus_weights("w1", 1, &[vec![1]]).unwrap()
}

fn trivial() -> HamiltonianModel {
    models::torus_weights("w0", 1, &[vec![0]]).unwrap()
}

/// `dim u_x` for `u` in `su(2)*`: the whole algebra at zero, a circle otherwise.
fn su2_stabilizer_dim(u: &[f64]) -> usize {
    if u.iter().all(|c| *c == 0.0) {
        3
    } else {
        1
    }
}

/// Leaf and orbit isotropy dimensions of the diagonal-circle slice at
/// `(θ, a1, b1, a2, b2)`, where `J = (θ, a1, b1, -θ, a2, b2)`.
fn su2su2_oracle(p: &[f64]) -> (usize, usize) {
    let leaf = su2_stabilizer_dim(&[p[0], p[1], p[2]]) + su2_stabilizer_dim(&[-p[0], p[3], p[4]]);
    let orbit = if p[1..].iter().all(|c| *c == 0.0) { 1 } else { 0 };
    (leaf, orbit)
}

#[test]
fn isotropy_algebra_examples() {
    let m = weight_one();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    assert_eq!(isotropy_algebra(m.rep(), &j, &v(&[0.0, 0.0]), &tol()).unwrap().ncols(), 1);
    assert_eq!(isotropy_algebra(m.rep(), &j, &v(&[1.0, 0.0]), &tol()).unwrap().ncols(), 0);
    let s = models::su2su2_circle().unwrap();
    let iso = isotropy_data(&s, &v(&[0.7, 0.0, 0.0, 0.0, 0.0]), &tol()).unwrap();
    assert_eq!(iso.algebra.ncols(), 1);
    assert!(iso.exact);
    assert!(iso.bracket_residual < 1e-10);
}

#[test]
fn dimension_types() {
    let m = weight_one();
    assert_eq!(dimension_type_label(&m, &v(&[0.0, 0.0]), &tol()).unwrap(), (0, 0));
    assert_eq!(dimension_type_label(&m, &v(&[0.3, -1.0]), &tol()).unwrap(), (1, 0));
    let s = models::su2su2_circle().unwrap();
    assert_eq!(dimension_type_label(&s, &v(&[0.2, 1.0, 0.0, 0.0, 0.0]), &tol()).unwrap().0, 1);
}

#[test]
fn stratum_through_origin_examples() {
    assert_eq!(stratum_through_origin(&weight_one(), &tol()).unwrap().ncols(), 0);
    let t = models::subtorus("t2", 2, 1, &[]).unwrap();
    let b = stratum_through_origin(&t, &tol()).unwrap();
    assert_eq!((b.nrows(), b.ncols()), (1, 1));
    let s = models::su2su2_circle().unwrap();
    assert_eq!(stratum_through_origin(&s, &tol()).unwrap().ncols(), 0);
}

#[test]
fn su2su2_labels_against_closed_form() {
    let s = models::su2su2_circle().unwrap();
    let pts = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.8, 0.0, 0.0, 0.0, 0.0],
        [-0.3, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.4, -0.2, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.5],
        [0.0, 0.4, -0.2, 1.0, 0.5],
        [0.5, 0.0, 0.0, 1.0, 0.5],
        [0.5, 0.3, 0.1, 0.0, 0.0],
        [0.5, 0.3, 0.1, -1.0, 0.2],
    ];
    for p in pts {
        let a = analyze_point(&s, &v(&p), &tol()).unwrap();
        assert_eq!((a.leaf_isotropy_dim(), a.orbit_isotropy_dim()), su2su2_oracle(&p), "at {p:?}");
        assert!(a.label().orbit_isotropy_dim <= a.label().leaf_isotropy_dim);
    }
    let axis = analyze_point(&s, &v(&[0.8, 0.0, 0.0, 0.0, 0.0]), &tol()).unwrap();
    assert_eq!((axis.leaf_isotropy_dim(), axis.orbit_isotropy_dim()), (2, 1));
}

#[test]
fn open_points_share_a_label() {
    let s = models::su2su2_circle().unwrap();
    let a = morita_type_label(&s, &v(&[0.1, 0.5, -0.3, 0.2, 0.9]), &tol()).unwrap();
    let b = morita_type_label(&s, &v(&[-1.2, 0.0, 0.0, 0.4, 0.1]), &tol()).unwrap();
    let c = morita_type_label(&s, &v(&[0.0, 2.0, 1.0, -0.7, 0.0]), &tol()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let o = morita_type_label(&s, &v(&[0.0; 5]), &tol()).unwrap();
    assert_ne!(o.orbit_isotropy_dim, a.orbit_isotropy_dim);
}

#[test]
fn weights_of_a_two_torus_at_the_origin() {
    // weights (1,0), (0,1), (1,1): norms 1, 1, √2
    let m = models::torus_weights("t2", 2, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let l = morita_type_label(&m, &v(&[0.0; 6]), &tol()).unwrap();
    assert_eq!(l.weight_signature, vec![1_000_000, 1_000_000, 1_414_214]);
}

#[test]
fn regular_parts() {
    let m = weight_one();
    let r = regular_part_test(&m, &v(&[0.5, 0.1]), &tol()).unwrap();
    assert!(r.principal && r.regular);
    let r0 = regular_part_test(&m, &v(&[0.0, 0.0]), &tol()).unwrap();
    assert!(!r0.regular && !r0.principal);
    let t = trivial();
    for p in [[0.0, 0.0], [1.0, -2.0], [0.0, 0.3]] {
        let r = regular_part_test(&t, &v(&p), &tol()).unwrap();
        assert!(r.principal && r.regular && r.principal_hamiltonian);
    }
}

#[test]
fn weight_one_circle_stratification() {
    let m = weight_one();
    let s = Stratification::from_grid(&m, GridSpec::default(), &tol()).unwrap();
    assert_eq!(s.label_count(), 2);
    let mut dims: Vec<usize> = s.strata.iter().map(|x| x.stratum_dim).collect();
    dims.sort();
    assert_eq!(dims, vec![0, 2]);
    assert!(codim_one_audit(&s, &[]).passed());
    let f = frontier_sampling(&s);
    assert!(f.passed());
    let origin = s.strata.iter().find(|x| x.stratum_dim == 0).unwrap().id;
    assert!(f.adjacent.iter().any(|p| p.lower == origin));
}

#[test]
fn trivial_action_is_one_stratum() {
    let s = Stratification::from_grid(&trivial(), GridSpec::default(), &tol()).unwrap();
    assert_eq!(s.strata.len(), 1);
    assert_eq!(s.strata[0].codim_infinitesimal, 0);
    assert!(codim_one_audit(&s, &[]).passed());
    let f = frontier_sampling(&s);
    assert!(f.adjacent.is_empty() && f.passed());
    // leaves are all of V
    let pairs: Vec<_> = s.analyses.iter().map(|a| (None, a)).collect();
    let r = leaf_rank_check(&pairs);
    assert_eq!(r.mismatches, 0);
    assert!(r.entries.iter().all(|e| e.normal_fixed == 2));
}

#[test]
fn su2su2_grid_strata() {
    let m = models::su2su2_circle().unwrap();
    let s = Stratification::from_grid(&m, GridSpec::default(), &tol()).unwrap();
    assert_eq!(s.strata.len(), 6);
    assert_eq!(s.label_count(), 4);
    let mut codims: Vec<usize> = s.strata.iter().map(|x| x.codim_infinitesimal).collect();
    codims.sort();
    assert_eq!(codims, vec![0, 3, 3, 4, 4, 5]);
    for st in &s.strata {
        let expect = if st.codim_infinitesimal == 0 { 2 } else { 0 };
        assert_eq!(st.leaf_dim, expect);
        assert_eq!(st.fiber_dim, expect);
    }
    assert!(codim_one_audit(&s, &[]).passed());
    let f = frontier_sampling(&s);
    assert!(f.passed());
    // the two halves of the axis are not in each other's closure
    let halves: Vec<usize> = s.strata.iter().filter(|x| x.codim_infinitesimal == 4).map(|x| x.id).collect();
    assert!(!f
        .adjacent
        .iter()
        .any(|p| halves.contains(&p.upper) && halves.contains(&p.lower)));
}

#[test]
fn sampled_points_are_assigned_on_their_stratum() {
    let m = models::su2su2_circle().unwrap();
    let s = Stratification::from_grid(&m, GridSpec::default(), &tol()).unwrap();
    let neg = analyze_point(&m, &v(&[-0.2, 0.0, 0.0, 0.0, 0.0]), &tol()).unwrap();
    let pos = analyze_point(&m, &v(&[0.3, 0.0, 0.0, 0.0, 0.0]), &tol()).unwrap();
    let a = s.assign(&neg, 1e-9).unwrap();
    let b = s.assign(&pos, 1e-9).unwrap();
    assert_ne!(a, b);
    assert!(s.strata[a].representative[0] < 0.0 && s.strata[b].representative[0] > 0.0);
    let p1 = analyze_point(&m, &v(&[0.0, 0.1, 0.1, 0.0, 0.0]), &tol()).unwrap();
    let c = s.assign(&p1, 1e-9).unwrap();
    assert!(s.strata[c].representative[3] == 0.0 && s.strata[c].representative[4] == 0.0);
}

#[test]
fn reflection_control_has_canonical_codim_one_only() {
    let m = models::o2_reflection("o2").unwrap();
    let a = analyze_point(&m, &v(&[0.0]), &tol()).unwrap();
    assert_eq!(a.codim_canonical(), 1);
    assert_eq!(a.codim_infinitesimal(), 0);
    assert!(a.reflection_on_complement);
    let s = Stratification::from_grid(&m, GridSpec::default(), &tol()).unwrap();
    let audit = codim_one_audit(&s, &[]);
    assert!(audit.passed());
    assert_eq!(audit.canonical_codim_one.len(), 1);
}

#[test]
fn finite_isotropy_of_the_cotangent_reflection() {
    let m = models::o2_cotangent("o2c").unwrap();
    // on the q1-axis the reflection fixes the point
    let iso = isotropy_data(&m, &v(&[1.0, 0.0, 0.5, 0.0]), &tol()).unwrap();
    assert_eq!(iso.finite.len(), 1);
    assert!(iso.finite[0].certified && iso.finite[0].residual < 1e-9);
    // some rotation composed with the reflection fixes any point of a line through 0
    let gen = isotropy_data(&m, &v(&[0.6, 0.8, 1.2, 1.6]), &tol()).unwrap();
    assert!(gen.finite[0].certified);
    let off = isotropy_data(&m, &v(&[1.0, 0.0, 0.0, 1.0]), &tol()).unwrap();
    assert!(!off.finite[0].certified);
    assert!(!off.exact);
}

#[test]
fn bad_points_are_rejected() {
    let m = weight_one();
    assert!(analyze_point(&m, &v(&[1.0]), &tol()).is_err());
    assert!(analyze_point(&m, &v(&[f64::NAN, 0.0]), &tol()).is_err());
}

fn sample_point(m: &HamiltonianModel, seed: u64) -> DVector<f64> {
    random_samples(m.slice_dim(), 1, seed, 0.5).remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn labels_are_constant_on_orbits(model_seed in 0u64..200, seed in any::<u64>()) {
        let m = models::random_supported_model(model_seed).unwrap();
        let p = sample_point(&m, seed);
        let a = analyze_point(&m, &p, &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..50 {
            let h = m.sample_subgroup_element(&mut rng);
            let q = m.slice_matrix(&h) * &p;
            let b = analyze_point(&m, &q, &tol()).unwrap();
            prop_assert_eq!(a.label(), b.label());
            prop_assert_eq!(a.dimension_type(), b.dimension_type());
        }
    }

    #[test]
    fn principal_implies_regular(model_seed in 0u64..200, seed in any::<u64>()) {
        let m = models::random_supported_model(model_seed).unwrap();
        let a = analyze_point(&m, &sample_point(&m, seed), &tol()).unwrap();
        prop_assert!(!a.regular.principal || a.regular.regular);
        prop_assert!(!a.regular.principal_hamiltonian || a.regular.principal);
        prop_assert!(!a.regular.regular_hamiltonian || a.regular.regular);
        prop_assert!(a.orbit_isotropy_dim() <= a.leaf_isotropy_dim());
        prop_assert_eq!(a.leaf_dim(), a.fiber_dim());
        prop_assert_eq!(a.tangent_orbit_space_dim(), a.annihilator_fixed_inf + a.normal_fixed_inf);
        prop_assert!(a.codim_infinitesimal() != 1);
    }

    #[test]
    fn origin_stratum_is_fixed(model_seed in 0u64..200, seed in any::<u64>()) {
        let m = models::random_supported_model(model_seed).unwrap();
        let b = stratum_through_origin(&m, &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let h = m.sample_subgroup_element(&mut rng);
            let r = m.slice_matrix(&h) * &b - &b;
            prop_assert!(r.amax() < 1e-9);
        }
        let c = gaussian_vector(&mut rng, b.ncols());
        let point = &b * c;
        let a = analyze_point(&m, &point, &tol()).unwrap();
        let o = analyze_point(&m, &DVector::zeros(m.slice_dim()), &tol()).unwrap();
        prop_assert_eq!(a.label(), o.label());
    }
}

#[test]
fn codim_audit_over_random_models() {
    let grid = GridSpec { spacing: 1.0, extent: 1.0 };
    for seed in 0..12 {
        let m = models::random_supported_model(seed).unwrap();
        let s = Stratification::from_grid(&m, grid, &tol()).unwrap();
        let extra: Vec<_> = random_samples(m.slice_dim(), 40, seed, 0.5)
            .iter()
            .map(|p| analyze_point(&m, p, &tol()).unwrap())
            .collect();
        let audit = codim_one_audit(&s, &extra);
        assert!(audit.passed(), "model {} violates: {:?}", m.name(), audit);
    }
}
