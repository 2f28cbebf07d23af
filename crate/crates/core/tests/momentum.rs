use momap::linalg::{self, RankPolicy};
use momap::models;
use momap::momentum::{
    equivariance_residual, infinitesimal_action, kernel_image_identities, quadratic_differential,
    quadratic_differential_check, MgsModel, MomentumMap, ModelParts, HamiltonianModel, QuadraticMomentumMap,
};
use momap::group::{gaussian_vector, CompactGroupModel};
use momap::symplectic::{self, complex_omega};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn pol() -> RankPolicy {
    RankPolicy::default()
}

#[test]
fn weight_one_circle_action_and_momentum() {
    let m = models::torus_weights("w1", 1, &[vec![1]]).unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    let act = infinitesimal_action(m.rep(), &j, &v(&[1.0]), &v(&[1.0, 0.0])).unwrap();
    assert!((act.vector - v(&[0.0, 1.0])).amax() < 1e-15);
    assert!(act.momentum_residual < 1e-15);
    // J = -|v|^2 / 2
    let val = j.value(&v(&[0.6, -0.8])).unwrap();
    assert!((val[0] + 0.5).abs() < 1e-15);
}

#[test]
fn symplectic_orthogonal_of_a_line_in_r4() {
    // ω pairs e1 with e2 and e3 with e4
    let omega = complex_omega(2);
    let w = DMatrix::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
    let perp = symplectic::symplectic_orthogonal(&w, &omega, &pol()).unwrap();
    let expected = DMatrix::from_column_slice(4, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    assert!(linalg::subspace_distance(&perp, &expected) < 1e-14);
}

#[test]
fn rank_deficient_subspace_is_rejected() {
    let omega = complex_omega(1);
    let w = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
    assert!(symplectic::symplectic_orthogonal(&w, &omega, &pol()).is_err());
}

#[test]
fn non_symplectic_generator_is_rejected() {
    let group = CompactGroupModel::standard(1, 0).unwrap();
    let r = HamiltonianModel::new(ModelParts {
        name: "bad".into(),
        group,
        inclusion: DMatrix::identity(1, 1),
        omega: complex_omega(1),
        generators: vec![DMatrix::identity(2, 2)],
        momentum_forms: None,
        annihilator: None,
        splitting: None,
        components: vec![],
    });
    assert!(r.unwrap_err().is_input_error());
}

#[test]
fn su2su2_slice_momentum_is_the_inclusion() {
    let m = models::su2su2_circle().unwrap();
    assert_eq!((m.group().dim(), m.sub_dim(), m.slice_dim()), (6, 1, 5));
    let x = m.slice_momentum(&v(&[1.0, 1.0, 0.0, 0.0, 0.0])).unwrap();
    assert!((x - v(&[1.0, 1.0, 0.0, -1.0, 0.0, 0.0])).amax() < 1e-15);
}

#[test]
fn normal_space_of_weight_one_circle() {
    let m = models::torus_weights("w1", 1, &[vec![1]]).unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    let sn = symplectic::symplectic_normal_space(m.rep(), &j, &v(&[0.3, 0.4]), &pol(), 1e-8).unwrap();
    assert_eq!(sn.dim(), 0);
    let sn = symplectic::symplectic_normal_space(m.rep(), &j, &v(&[0.0, 0.0]), &pol(), 1e-8).unwrap();
    assert_eq!(sn.dim(), 2);
    assert_eq!(sn.isotropy.ncols(), 1);
}

#[test]
fn normal_space_of_weights_one_one() {
    let m = models::torus_weights("w11", 1, &[vec![1], vec![1]]).unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    let sn = symplectic::symplectic_normal_space(m.rep(), &j, &v(&[1.0, 0.0, 0.0, 0.0]), &pol(), 1e-8).unwrap();
    assert_eq!(sn.dim(), 2);
    assert!(sn.omega.clone().determinant().abs() > 0.5);
}

#[test]
fn finite_isotropy_of_the_cotangent_o2_model() {
    let m = models::o2_cotangent("o2").unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    // q = (1, 0), p = 0 is fixed by the reflection diag(1, -1)
    let sn = symplectic::symplectic_normal_space(m.rep(), &j, &v(&[1.0, 0.0, 0.0, 0.0]), &pol(), 1e-8).unwrap();
    assert!(sn.certificates[0].certified);
    assert_eq!(sn.component_action.len(), 1);
    // a generic point has trivial isotropy
    let sn = symplectic::symplectic_normal_space(m.rep(), &j, &v(&[1.0, 0.3, -0.2, 0.7]), &pol(), 1e-8).unwrap();
    assert!(!sn.certificates[0].certified);
}

#[test]
fn quadratic_differential_matches_normal_momentum() {
    // T^2 on C^3 with weights (1,0), (0,1), (1,1) at z = (1, 0, 0); isotropy is the
    // second circle and the normal momentum is -|v|^2/2 on the last two factors.
    let m = models::torus_weights("t2", 2, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    let p = v(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let w = v(&[0.0, 0.9, 0.3, -0.4, 0.5, 0.2]);
    let chk = quadratic_differential_check(m.rep(), &j, &p, &w, &pol(), 1e-8).unwrap();
    assert_eq!(chk.differential.len(), 1);
    let oracle = -0.5 * (0.3f64.powi(2) + 0.4f64.powi(2) + 0.5f64.powi(2) + 0.2f64.powi(2));
    assert!((chk.normal_momentum[0].abs() - oracle.abs()).abs() < 1e-12);
    assert!(chk.relative_error < 1e-6);
}

#[test]
fn quadratic_differential_rejects_non_kernel_direction() {
    let m = models::torus_weights("w1", 1, &[vec![1]]).unwrap();
    let j = QuadraticMomentumMap::from_rep(m.rep());
    let r = quadratic_differential(&j, &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &pol());
    assert!(r.unwrap_err().is_input_error());
}

#[test]
fn corrupted_omega_breaks_the_momentum_condition() {
    let good = models::torus_weights("w1", 1, &[vec![1]]).unwrap();
    let forms = good.rep_momentum().forms().to_vec();
    let bad = HamiltonianModel::new(ModelParts {
        name: "corrupt".into(),
        group: CompactGroupModel::standard(1, 0).unwrap(),
        inclusion: DMatrix::identity(1, 1),
        omega: -complex_omega(1),
        generators: good.rep().generators().to_vec(),
        momentum_forms: Some(forms),
        annihilator: None,
        splitting: None,
        components: vec![],
    })
    .unwrap();
    let act = infinitesimal_action(bad.rep(), bad.rep_momentum(), &v(&[1.0]), &v(&[1.0, 0.0])).unwrap();
    assert!(act.momentum_residual > 0.5);
}

#[test]
fn mgs_momentum_reduces_to_slice_momentum_and_is_equivariant() {
    // K = SU(2) with anchor e1*, whose isotropy is the maximal torus
    let ambient = CompactGroupModel::standard(0, 1).unwrap();
    let mut inc = DMatrix::zeros(3, 1);
    inc[(0, 0)] = 1.0;
    let mgs = MgsModel::new(ambient.clone(), inc, v(&[1.0, 0.0, 0.0]), None).unwrap();
    let model = models::torus_weights("w1", 1, &[vec![1]]).unwrap();
    let beta = DVector::zeros(0);
    let vv = v(&[0.3, -0.7]);
    let at_id = mgs.momentum(&model, &ambient.identity(), &beta, &vv).unwrap();
    let shift = model.slice_momentum(&vv).unwrap()[0];
    assert!((at_id - v(&[1.0 + shift, 0.0, 0.0])).amax() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let g = ambient.sample_element(&mut rng);
        let h = ambient.sample_element(&mut rng);
        let lhs = mgs.momentum(&model, &g.compose(&h), &beta, &vv).unwrap();
        let rhs = ambient.coadjoint_action(&g, &mgs.momentum(&model, &h, &beta, &vv).unwrap()).unwrap();
        assert!((lhs - rhs).amax() < 1e-12);
    }
}

#[test]
fn anchor_not_fixed_is_rejected() {
    let ambient = CompactGroupModel::standard(0, 1).unwrap();
    let mut inc = DMatrix::zeros(3, 1);
    inc[(0, 0)] = 1.0;
    assert!(MgsModel::new(ambient, inc, v(&[0.0, 1.0, 0.0]), None).is_err());
}

fn identity_models() -> Vec<HamiltonianModel> {
    vec![
        models::torus_weights("w1", 1, &[vec![1]]).unwrap(),
        models::torus_weights("w11", 1, &[vec![1], vec![1]]).unwrap(),
        models::torus_weights("t2", 2, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap(),
        models::su2_torus_slice("su2t", 1).unwrap(),
        models::su2_quaternion("su2q").unwrap(),
        models::o2_cotangent("o2").unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn momentum_condition_and_identities(idx in 0usize..6, seed in any::<u64>(), mask in 0u32..64) {
        let models = identity_models();
        let m = &models[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = gaussian_vector(&mut rng, m.rep_dim());
        for i in 0..p.len() {
            if mask & (1 << (i % 6)) != 0 { p[i] = 0.0; }
        }
        let j = m.rep_momentum();
        let xi = gaussian_vector(&mut rng, m.sub_dim());
        let act = infinitesimal_action(m.rep(), j, &xi, &p).unwrap();
        prop_assert!(act.momentum_residual < 1e-12);
        let rep = kernel_image_identities(m.rep(), j, &p, &pol()).unwrap();
        prop_assert!(rep.max_distance() < 1e-8, "{:?}", rep);
        let h = m.sample_subgroup_element(&mut rng);
        prop_assert!(equivariance_residual(m, &h, &p).unwrap() < 1e-10);
    }

    #[test]
    fn normal_space_is_symplectic_and_invariant(idx in 0usize..6, seed in any::<u64>(), mask in 0u32..64) {
        let models = identity_models();
        let m = &models[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = gaussian_vector(&mut rng, m.rep_dim());
        for i in 0..p.len() {
            if mask & (1 << (i % 6)) != 0 { p[i] = 0.0; }
        }
        let sn = symplectic::symplectic_normal_space(m.rep(), m.rep_momentum(), &p, &pol(), 1e-8).unwrap();
        prop_assert_eq!(sn.dim() % 2, 0);
        if sn.dim() > 0 {
            let smin = sn.omega.clone().svd(false, false).singular_values.min();
            prop_assert!(smin > 1e-8);
        }
        for a in &sn.isotropy_action {
            let r = linalg::max_abs(&(a.transpose() * &sn.omega + &sn.omega * a));
            prop_assert!(r < 1e-10);
        }
        // dim SN = dim ker dJ - dim (T ∩ ker dJ)
        prop_assert_eq!(sn.dim(), sn.kernel.ncols() - sn.intersection.ncols());
    }

    #[test]
    fn quadratic_differential_on_random_kernel_vectors(idx in 0usize..6, seed in any::<u64>(), mask in 0u32..64) {
        let models = identity_models();
        let m = &models[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = gaussian_vector(&mut rng, m.rep_dim());
        for i in 0..p.len() {
            if mask & (1 << (i % 6)) != 0 { p[i] = 0.0; }
        }
        let j = m.rep_momentum();
        let ker = linalg::kernel(&j.jacobian(&p).unwrap(), &pol(), "k").unwrap();
        let w = &ker * gaussian_vector(&mut rng, ker.ncols());
        let chk = quadratic_differential_check(m.rep(), j, &p, &w, &pol(), 1e-8).unwrap();
        prop_assert!(chk.relative_error < 1e-4, "{:?}", chk);
    }
}
