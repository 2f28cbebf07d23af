//! Isotropy data, stratum labels and sampled stratifications of slice models.
//!
//! A point `p` of the slice `Y = h⁰ ⊕ V` stands for the point `[e, p]` of the
//! local model `G ×_H Y`. Its isotropy group is `H_p`, its momentum value is
//! `x = J(p)` and its symplectic normal space is realised as
//! `{w ∈ Y : dJ(w) ∈ g·x} / h·p`. The annihilator `g_p⁰` lives in `g_x*`.
//!
//! Labels are a necessary condition for two points to have the same
//! Hamiltonian Morita type. For toral isotropy the weight multiset is a
//! complete invariant of the normal representation; for nonabelian isotropy
//! only the norms of the weights of a maximal torus are recorded, so distinct
//! representations with equal weight norms are not told apart.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::group::{gauss_newton_fixing, unit_vectors, CosetCertificate, GroupElement};
use crate::linalg::{self, RankPolicy};
use crate::momentum::{HamiltonianModel, MomentumMap, SubgroupElement};
use crate::symplectic::{self, SymplecticRep};

const FINITE_RESTARTS: usize = 5;
const FINITE_SEED: u64 = 0x150;
const CARTAN_SEED: u64 = 0xca27;
/// Weights are recorded in units of `1e-6`.
const WEIGHT_SCALE: f64 = 1e6;

/// Isotropy algebra `{ξ : ρ(ξ) p = 0}` of a symplectic representation, checked
/// against the annihilator of `Im dJ_p`.
pub fn isotropy_algebra(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    p: &DVector<f64>,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let k = symplectic::isotropy_kernel(rep, p, &tol.rank)?;
    let jac = momentum.jacobian(p)?;
    let ann = linalg::kernel_ref(
        &jac.transpose(),
        &tol.rank,
        linalg::max_abs(&jac).max(rep.generator_scale() * p.norm()),
        "annihilator of Im dJ",
    )?;
    let d = linalg::subspace_distance(&k, &ann);
    if d > tol.principal_angle {
        return Err(Error::invariant("isotropy algebra = annihilator of Im dJ", d, tol.principal_angle));
    }
    Ok(k)
}

/// Isotropy of a slice point.
#[derive(Debug, Clone)]
pub struct IsotropyData {
    pub point: DVector<f64>,
    /// Orthonormal basis of `h_p` in subalgebra coordinates.
    pub algebra: DMatrix<f64>,
    /// Orthonormal basis of `ι(h_p)` in `g`.
    pub algebra_in_g: DMatrix<f64>,
    /// One certificate per non-identity component coset of `H`.
    pub finite: Vec<CosetCertificate>,
    /// True when every coset either carries a certified element or there are
    /// no cosets; absence of a fixing element is never proved.
    pub exact: bool,
    pub bracket_residual: f64,
}

/// Complete local data at a slice point.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub point: DVector<f64>,
    pub momentum: DVector<f64>,
    pub isotropy: IsotropyData,
    /// Orthonormal basis of `g_x` in `g`.
    pub leaf_isotropy: DMatrix<f64>,
    /// Certificates for the component cosets of `G` fixing `x`.
    pub leaf_finite: Vec<CosetCertificate>,
    /// Orthonormal basis of `h·p` in the slice.
    pub slice_orbit: DMatrix<f64>,
    /// Orthonormal basis of `g·x`.
    pub coadjoint_orbit: DMatrix<f64>,
    /// Orthonormal basis (in the slice) of the realisation of `𝒮𝒩_p`.
    pub normal_basis: DMatrix<f64>,
    /// Action of the `h_p` basis on `𝒮𝒩_p`.
    pub normal_action: Vec<DMatrix<f64>>,
    /// Action of the certified finite isotropy elements on `𝒮𝒩_p`.
    pub normal_finite_action: Vec<DMatrix<f64>>,
    /// `dim g_p⁰` with `g_p⁰ ⊂ g_x*`.
    pub annihilator_dim: usize,
    pub annihilator_fixed_inf: usize,
    pub annihilator_fixed: usize,
    pub normal_fixed_inf: usize,
    pub normal_fixed: usize,
    /// Dimension of the local model `G ×_H Y`.
    pub model_dim: usize,
    pub group_dim: usize,
    pub weights: Vec<i64>,
    /// Tangent space of the stratum through `p`, inside the slice.
    pub stratum_tangent: DMatrix<f64>,
    /// Rank of the transverse momentum map along the stratum.
    pub transverse_rank: usize,
    pub regular: RegularPart,
    /// Some certified element of `G_x` acts by `-1` on the complement of
    /// `(g_p⁰)^{G_x}`.
    pub reflection_on_complement: bool,
}

/// Discrete invariant of the Hamiltonian Morita type of a point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StratumLabel {
    pub leaf_isotropy_dim: usize,
    pub orbit_isotropy_dim: usize,
    /// Sorted norms of the weights of a maximal torus of `h_p` on `𝒮𝒩_p`, one
    /// per real 2-plane, in units of `1e-6`.
    pub weight_signature: Vec<i64>,
    pub finite_part: FinitePart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FinitePart {
    /// Certified non-identity cosets of `H` meeting `H_p`.
    pub orbit: usize,
    /// Certified non-identity cosets of `G` meeting `G_x`.
    pub leaf: usize,
    /// Some coset search failed, so absence is only heuristic.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularPart {
    pub principal: bool,
    pub regular: bool,
    pub principal_hamiltonian: bool,
    pub regular_hamiltonian: bool,
}

fn certify_cosets<F>(count: usize, dim: usize, tol: f64, mut residual: F) -> Vec<CosetCertificate>
where
    F: FnMut(usize, &DVector<f64>) -> DVector<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(FINITE_SEED);
    (1..count)
        .map(|c| {
            let (x, res) = gauss_newton_fixing(dim, |x| residual(c, x), &mut rng, FINITE_RESTARTS, tol);
            CosetCertificate {
                component: c,
                algebra_element: x,
                residual: res,
                certified: res < tol,
            }
        })
        .collect()
}

fn orthonormal_image(m: &DMatrix<f64>, policy: &RankPolicy, context: &str) -> Result<DMatrix<f64>> {
    if m.ncols() == 0 {
        return Ok(DMatrix::zeros(m.nrows(), 0));
    }
    linalg::image(m, policy, context)
}

fn stack_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    linalg::hstack(&[a.clone(), b.clone()], a.nrows())
}

fn all_small(ms: &[DMatrix<f64>], tol: f64) -> bool {
    ms.iter().all(|m| linalg::max_abs(m) < tol)
}

/// Isotropy algebra and finite isotropy of a slice point.
pub fn isotropy_data(model: &HamiltonianModel, p: &DVector<f64>, tol: &Tolerances) -> Result<IsotropyData> {
    let ny = model.slice_dim();
    if p.len() != ny {
        return Err(Error::dim("slice point", ny, p.len()));
    }
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("slice point".into()));
    }
    let gens = model.slice_generators();
    let scale = linalg::family_scale(&gens);
    let cols: Vec<_> = gens.iter().map(|s| s * p).collect();
    let tmat = linalg::columns_of(&cols, ny);
    let algebra = linalg::kernel_ref(&tmat, &tol.rank, scale * p.norm(), "slice isotropy")?;
    let algebra_in_g = orthonormal_image(&(model.inclusion() * &algebra), &tol.rank, "isotropy in g")?;
    let alg = model.group().algebra();
    let mut bracket_residual: f64 = 0.0;
    for i in 0..algebra_in_g.ncols() {
        for j in (i + 1)..algebra_in_g.ncols() {
            let b = alg.bracket(&algebra_in_g.column(i).into_owned(), &algebra_in_g.column(j).into_owned())?;
            let off = &b - &algebra_in_g * (algebra_in_g.transpose() * &b);
            bracket_residual = bracket_residual.max(off.norm());
        }
    }
    if bracket_residual > tol.identity {
        return Err(Error::invariant("isotropy bracket closure", bracket_residual, tol.identity));
    }
    let finite = certify_cosets(model.subgroup_component_count(), model.sub_dim(), tol.certify, |c, z| {
        match model.subgroup_element(c, z) {
            Ok(h) => model.slice_matrix(&h) * p - p,
            Err(_) => DVector::from_element(ny, f64::INFINITY),
        }
    });
    let exact = finite.iter().all(|c| c.certified);
    Ok(IsotropyData {
        point: p.clone(),
        algebra,
        algebra_in_g,
        finite,
        exact,
        bracket_residual,
    })
}

fn finite_elements(model: &HamiltonianModel, certs: &[CosetCertificate]) -> Result<Vec<SubgroupElement>> {
    certs
        .iter()
        .filter(|c| c.certified)
        .map(|c| model.subgroup_element(c.component, &c.algebra_element))
        .collect()
}

fn leaf_elements(model: &HamiltonianModel, certs: &[CosetCertificate]) -> Result<Vec<GroupElement>> {
    certs
        .iter()
        .filter(|c| c.certified)
        .map(|c| model.group().element(c.component, &c.algebra_element))
        .collect()
}

/// Norms of the weights of a maximal torus of `h_p` (basis `iso_g` in `g`)
/// acting on the normal space, one per real 2-plane.
fn weight_norms(
    model: &HamiltonianModel,
    iso_g: &DMatrix<f64>,
    normal: &DMatrix<f64>,
    policy: &RankPolicy,
) -> Result<Vec<i64>> {
    let dn = normal.ncols();
    if dn == 0 {
        return Ok(Vec::new());
    }
    let k = iso_g.ncols();
    if k == 0 {
        return Ok(vec![0; dn / 2]);
    }
    let alg = model.group().algebra();
    // the centraliser of a generic element is a maximal torus
    let mut rng = ChaCha8Rng::seed_from_u64(CARTAN_SEED);
    let c: DVector<f64> = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = iso_g * c;
    let ad = alg.ad_matrix(&x);
    let cent = linalg::kernel_ref(&(&ad * iso_g), policy, linalg::max_abs(&ad), "centraliser")?;
    let torus = iso_g * cent;
    let b = model.group().inner_product();
    let gram = torus.transpose() * b * &torus;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::input("inner product is not positive on the isotropy torus"))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::input("singular torus Gram matrix"))?;
    let torus = torus * l_inv.transpose();
    let mut casimir = DMatrix::zeros(dn, dn);
    for i in 0..torus.ncols() {
        let zeta = model.restrict_algebra(&torus.column(i).into_owned());
        let a = normal.transpose() * model.slice_generator(&zeta) * normal;
        casimir -= &a * &a;
    }
    let mut ev: Vec<f64> = casimir
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ev.chunks(2).map(|c| (c[0] * WEIGHT_SCALE).round() as i64).collect())
}

/// Computes the full local data of the model at the slice point `p`.
pub fn analyze_point(model: &HamiltonianModel, p: &DVector<f64>, tol: &Tolerances) -> Result<PointAnalysis> {
    let pol = &tol.rank;
    let iso = isotropy_data(model, p, tol)?;
    let ng = model.group().dim();
    let nh = model.sub_dim();
    let ny = model.slice_dim();
    let alg = model.group().algebra();
    let jmap = model.slice_momentum_map();
    let x = jmap.value(p)?;
    let d = jmap.jacobian(p)?;
    let d_scale = d.norm();

    let coads: Vec<DMatrix<f64>> = unit_vectors(ng).iter().map(|e| alg.coad_matrix(e)).collect();
    let coad_scale = linalg::family_scale(&coads);
    let tx = linalg::columns_of(&coads.iter().map(|m| m * &x).collect::<Vec<_>>(), ng);
    let gx_svd = linalg::ranked_svd_ref(&tx, pol, coad_scale * x.norm(), "coadjoint isotropy")?;
    let leaf_isotropy = gx_svd.kernel();
    let coadjoint_orbit = gx_svd.range.clone();

    // g_p is the annihilator of Im dJ on the local model.
    let im_dj = linalg::hstack(&[tx.clone(), d.clone()], ng);
    let ann = linalg::kernel_ref(
        &im_dj.transpose(),
        pol,
        d_scale.max(coad_scale * x.norm()),
        "annihilator of Im dJ",
    )?;
    let dist = linalg::subspace_distance(&ann, &iso.algebra_in_g);
    if dist > tol.principal_angle {
        return Err(Error::invariant("isotropy algebra = annihilator of Im dJ", dist, tol.principal_angle));
    }

    let slice_gens = model.slice_generators();
    let s_scale = linalg::family_scale(&slice_gens);
    let tmat = linalg::columns_of(&slice_gens.iter().map(|s| s * p).collect::<Vec<_>>(), ny);
    let slice_orbit = linalg::image_ref(&tmat, pol, s_scale * p.norm(), "slice orbit")?;

    let leaf_finite = certify_cosets(model.group().component_count(), ng, tol.certify, |c, xi| {
        match model.group().element(c, xi) {
            Ok(g) => model.group().coadjoint(&g) * &x - &x,
            Err(_) => DVector::from_element(ng, f64::INFINITY),
        }
    });
    let fin = finite_elements(model, &iso.finite)?;
    let leaf_fin = leaf_elements(model, &leaf_finite)?;

    // symplectic normal space
    let nb = linalg::complement(&slice_orbit, pol, "slice normal")?;
    let nx = linalg::complement(&coadjoint_orbit, pol, "coadjoint normal")?;
    let reduced = nx.transpose() * &d * &nb;
    let ks = linalg::kernel_ref(&reduced, pol, d_scale, "symplectic normal space")?;
    let normal_basis = &nb * ks;
    let dn = normal_basis.ncols();
    let model_dim = 2 * (ng - nh) + model.rep_dim();
    let expected = (model_dim + 2 * iso.algebra.ncols()) as i64 - (ng + leaf_isotropy.ncols()) as i64;
    if expected != dn as i64 {
        return Err(Error::invariant(
            "dim 𝒮𝒩 = dim M - dim g - dim g_x + 2 dim g_p",
            (expected - dn as i64).abs() as f64,
            0.0,
        ));
    }
    let iso_h: Vec<DVector<f64>> = iso.algebra.column_iter().map(|c| c.into_owned()).collect();
    let iso_gens: Vec<DMatrix<f64>> = iso_h.iter().map(|z| model.slice_generator(z)).collect();
    let normal_action: Vec<DMatrix<f64>> = iso_gens
        .iter()
        .map(|s| normal_basis.transpose() * s * &normal_basis)
        .collect();
    let normal_finite_action: Vec<DMatrix<f64>> = fin
        .iter()
        .map(|h| normal_basis.transpose() * model.slice_matrix(h) * &normal_basis)
        .collect();
    let normal_fixed_inf = linalg::fixed_subspace(dn, &normal_action, &[], s_scale, pol, "normal fixed space")?.ncols();
    let normal_fixed =
        linalg::fixed_subspace(dn, &normal_action, &normal_finite_action, s_scale, pol, "normal fixed space")?.ncols();

    // g_p⁰ inside g_x*, in coordinates dual to the basis of g_x
    let gx = &leaf_isotropy;
    let kx = gx.ncols();
    let in_gx = gx.transpose() * &iso.algebra_in_g;
    let ann_x = linalg::complement(&in_gx, pol, "annihilator in g_x*")?;
    let gx_coad: Vec<DMatrix<f64>> = gx
        .column_iter()
        .map(|c| gx.transpose() * alg.coad_matrix(&c.into_owned()) * gx)
        .collect();
    let gx_fin: Vec<DMatrix<f64>> = leaf_fin
        .iter()
        .map(|g| gx.transpose() * model.group().coadjoint(g) * gx)
        .collect();
    let fixed_in_ann = |linear: &[DMatrix<f64>], elements: &[DMatrix<f64>]| -> Result<DMatrix<f64>> {
        let mut rows: Vec<DMatrix<f64>> = linear.iter().map(|m| m * &ann_x).collect();
        let id = DMatrix::<f64>::identity(kx, kx);
        rows.extend(elements.iter().map(|e| (e - &id) * &ann_x));
        if rows.is_empty() {
            return Ok(DMatrix::identity(ann_x.ncols(), ann_x.ncols()));
        }
        let reference = if elements.is_empty() { coad_scale } else { coad_scale.max(1.0) };
        linalg::kernel_ref(&linalg::vstack(&rows, ann_x.ncols()), pol, reference, "fixed annihilator")
    };
    let annihilator_dim = ann_x.ncols();
    let annihilator_fixed_inf = fixed_in_ann(&gx_coad, &[])?.ncols();
    let fixed_can = fixed_in_ann(&gx_coad, &gx_fin)?;
    let annihilator_fixed = fixed_can.ncols();

    // Some finite element acting by -1 on g_p⁰ / (g_p⁰)^{G_x} when that quotient is a line.
    let mut reflection_on_complement = false;
    if annihilator_dim == annihilator_fixed + 1 {
        let fixed_vecs = &ann_x * &fixed_can;
        let line = &ann_x * linalg::complement(&fixed_can, pol, "reflection line")?;
        let u = line.column(0).into_owned();
        reflection_on_complement = gx_fin.iter().any(|m| {
            let r = m * &u + &u;
            (&r - &fixed_vecs * (fixed_vecs.transpose() * &r)).norm() < 1e-8
        });
    }

    // regular parts
    let gp_coad: Vec<DMatrix<f64>> = iso
        .algebra_in_g
        .column_iter()
        .map(|c| (gx.transpose() * alg.coad_matrix(&c.into_owned()) * gx) * &ann_x)
        .collect();
    let gp_fin_coad: Vec<DMatrix<f64>> = fin
        .iter()
        .map(|h| (gx.transpose() * model.group().coadjoint(&h.in_group) * gx) * &ann_x - &ann_x)
        .collect();
    let fin_on_normal: Vec<DMatrix<f64>> = normal_finite_action
        .iter()
        .map(|m| m - DMatrix::<f64>::identity(dn, dn))
        .collect();
    let regular = all_small(&gp_coad, tol.certify) && all_small(&normal_action, tol.certify);
    let principal = regular && all_small(&gp_fin_coad, tol.certify) && all_small(&fin_on_normal, tol.certify);
    let regular_part = RegularPart {
        principal,
        regular,
        principal_hamiltonian: principal && annihilator_fixed == annihilator_dim,
        regular_hamiltonian: regular && annihilator_fixed_inf == annihilator_dim,
    };

    // stratum tangent {w ∈ Y^{G_p} : dJ w ∈ (g*)^{G_x} + g·x} + h·p
    let fin_slice: Vec<DMatrix<f64>> = fin.iter().map(|h| model.slice_matrix(h)).collect();
    let y_fixed = linalg::fixed_subspace(ny, &iso_gens, &fin_slice, s_scale, pol, "slice fixed space")?;
    let gx_full: Vec<DMatrix<f64>> = gx.column_iter().map(|c| alg.coad_matrix(&c.into_owned())).collect();
    let gx_full_fin: Vec<DMatrix<f64>> = leaf_fin.iter().map(|g| model.group().coadjoint(g)).collect();
    let dual_fixed = linalg::fixed_subspace(ng, &gx_full, &gx_full_fin, coad_scale, pol, "fixed dual")?;
    let target = orthonormal_image(&stack_columns(&dual_fixed, &coadjoint_orbit), pol, "stratum target")?;
    let q = linalg::complement(&target, pol, "stratum target complement")?;
    let cond = q.transpose() * &d * &y_fixed;
    let ker = linalg::kernel_ref(&cond, pol, d_scale, "stratum tangent")?;
    let stratum_tangent = orthonormal_image(&stack_columns(&(&y_fixed * &ker), &slice_orbit), pol, "stratum tangent")?;
    let transverse = nx.transpose() * &d * &stratum_tangent;
    let transverse_rank = linalg::ranked_svd_ref(&transverse, pol, d_scale, "transverse momentum rank")?.rank;

    let weights = weight_norms(model, &iso.algebra_in_g, &normal_basis, pol)?;

    Ok(PointAnalysis {
        point: p.clone(),
        momentum: x,
        isotropy: iso,
        leaf_isotropy,
        leaf_finite,
        slice_orbit,
        coadjoint_orbit,
        normal_basis,
        normal_action,
        normal_finite_action,
        annihilator_dim,
        annihilator_fixed_inf,
        annihilator_fixed,
        normal_fixed_inf,
        normal_fixed,
        model_dim,
        group_dim: ng,
        weights,
        stratum_tangent,
        transverse_rank,
        regular: regular_part,
        reflection_on_complement,
    })
}

impl PointAnalysis {
    pub fn orbit_isotropy_dim(&self) -> usize {
        self.isotropy.algebra.ncols()
    }

    pub fn leaf_isotropy_dim(&self) -> usize {
        self.leaf_isotropy.ncols()
    }

    pub fn normal_dim(&self) -> usize {
        self.normal_basis.ncols()
    }

    pub fn label(&self) -> StratumLabel {
        let orbit = self.isotropy.finite.iter().filter(|c| c.certified).count();
        let leaf = self.leaf_finite.iter().filter(|c| c.certified).count();
        let heuristic = self
            .isotropy
            .finite
            .iter()
            .chain(&self.leaf_finite)
            .any(|c| !c.certified);
        StratumLabel {
            leaf_isotropy_dim: self.leaf_isotropy_dim(),
            orbit_isotropy_dim: self.orbit_isotropy_dim(),
            weight_signature: self.weights.clone(),
            finite_part: FinitePart { orbit, leaf, heuristic },
        }
    }

    /// `(dim h·p, dim G·x)`: the orbit through `p` in the slice and the
    /// coadjoint orbit through its momentum value.
    pub fn dimension_type(&self) -> (usize, usize) {
        (self.slice_orbit.ncols(), self.coadjoint_orbit.ncols())
    }

    /// Codimension of the stratum of the infinitesimal stratification.
    pub fn codim_infinitesimal(&self) -> usize {
        (self.annihilator_dim - self.annihilator_fixed_inf) + (self.normal_dim() - self.normal_fixed_inf)
    }

    /// Codimension with the certified finite isotropy taken into account.
    pub fn codim_canonical(&self) -> usize {
        (self.annihilator_dim - self.annihilator_fixed) + (self.normal_dim() - self.normal_fixed)
    }

    /// Dimension of the stratum in the orbit space.
    pub fn orbit_space_dim(&self) -> usize {
        self.annihilator_fixed + self.normal_fixed
    }

    /// Dimension of the stratum in the local model.
    pub fn stratum_dim(&self) -> usize {
        self.group_dim - self.orbit_isotropy_dim() + self.orbit_space_dim()
    }

    /// Leaf dimension `dim 𝒮𝒩_p^{G_p}`.
    pub fn leaf_dim(&self) -> usize {
        self.normal_fixed
    }

    /// Stratum dimension in the orbit space computed from the stratum tangent.
    pub fn tangent_orbit_space_dim(&self) -> usize {
        self.stratum_tangent.ncols() - self.slice_orbit.ncols()
    }

    /// Fiber dimension of the transverse momentum map on the stratum.
    pub fn fiber_dim(&self) -> usize {
        self.tangent_orbit_space_dim().saturating_sub(self.transverse_rank)
    }
}

pub fn morita_type_label(model: &HamiltonianModel, p: &DVector<f64>, tol: &Tolerances) -> Result<StratumLabel> {
    Ok(analyze_point(model, p, tol)?.label())
}

pub fn dimension_type_label(model: &HamiltonianModel, p: &DVector<f64>, tol: &Tolerances) -> Result<(usize, usize)> {
    Ok(analyze_point(model, p, tol)?.dimension_type())
}

pub fn regular_part_test(model: &HamiltonianModel, p: &DVector<f64>, tol: &Tolerances) -> Result<RegularPart> {
    Ok(analyze_point(model, p, tol)?.regular)
}

/// Basis, in slice coordinates, of `(h⁰)^G ⊕ V^H`.
pub fn stratum_through_origin(model: &HamiltonianModel, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let pol = &tol.rank;
    let g = model.group();
    let ng = g.dim();
    let a = model.annihilator();
    let m = model.annihilator_dim();
    let mut rows: Vec<DMatrix<f64>> = unit_vectors(ng).iter().map(|e| g.algebra().coad_matrix(e) * a).collect();
    let id = DMatrix::<f64>::identity(ng, ng);
    rows.extend(g.components()[1..].iter().map(|c| (g.coadjoint(c) - &id) * a));
    let alpha_fixed = if rows.is_empty() || m == 0 {
        DMatrix::identity(m, m)
    } else {
        let scale = linalg::max_abs(a).max(1.0) * linalg::family_scale(&rows).max(1.0);
        linalg::kernel_ref(&linalg::vstack(&rows, m), pol, scale, "fixed annihilator")?
    };
    let alpha_fixed = orthonormal_image(&alpha_fixed, pol, "fixed annihilator")?;
    let rep = model.rep();
    let nv = rep.dim();
    let v_fixed = linalg::fixed_subspace(
        nv,
        rep.generators(),
        &model.subgroup_components().iter().map(|c| c.on_rep.clone()).collect::<Vec<_>>(),
        rep.generator_scale(),
        pol,
        "fixed vectors",
    )?;
    Ok(linalg::block_diag(&[alpha_fixed, v_fixed]))
}

/// Sample points on the lattice `spacing · Z^dim` inside `[-extent, extent]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub spacing: f64,
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            spacing: 0.5,
            extent: 1.0,
        }
    }
}

impl GridSpec {
    pub fn steps(&self) -> i64 {
        (self.extent / self.spacing + 1e-9).floor() as i64
    }

    /// Lattice indices and the corresponding points.
    pub fn points(&self, dim: usize) -> Vec<(Vec<i64>, DVector<f64>)> {
        let n = self.steps();
        let side = (2 * n + 1) as usize;
        let total = side.pow(dim as u32);
        (0..total)
            .map(|mut k| {
                let mut idx = vec![0i64; dim];
                for slot in idx.iter_mut() {
                    *slot = (k % side) as i64 - n;
                    k /= side;
                }
                let pt = DVector::from_iterator(dim, idx.iter().map(|&i| i as f64 * self.spacing));
                (idx, pt)
            })
            .collect()
    }
}

/// Gaussian samples in which each coordinate is independently set to zero
/// with probability `zero_prob`, so that lower strata are hit with positive
/// probability.
pub fn random_samples(dim: usize, count: usize, seed: u64, zero_prob: f64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            DVector::from_fn(dim, |_, _| {
                let z: f64 = rng.sample(StandardNormal);
                if rng.random_bool(zero_prob) {
                    0.0
                } else {
                    z
                }
            })
        })
        .collect()
}

/// A stratum found on the grid: one label and one lattice-connected component.
#[derive(Debug, Clone, Serialize)]
pub struct StratumSummary {
    pub id: usize,
    pub label: StratumLabel,
    pub component: usize,
    pub representative: Vec<f64>,
    pub grid_points: usize,
    pub stratum_dim: usize,
    pub orbit_space_dim: usize,
    pub codim_infinitesimal: usize,
    pub codim_canonical: usize,
    pub leaf_dim: usize,
    pub fiber_dim: usize,
    pub dimension_type: (usize, usize),
}

/// Grid points grouped by label and lattice connectivity.
#[derive(Debug, Clone)]
pub struct Stratification {
    pub grid: GridSpec,
    pub indices: Vec<Vec<i64>>,
    pub analyses: Vec<PointAnalysis>,
    /// Stratum id of each grid point.
    pub assignment: Vec<usize>,
    pub strata: Vec<StratumSummary>,
    /// Grid points of each label as matrix columns, with their strata.
    by_label: BTreeMap<StratumLabel, (DMatrix<f64>, Vec<usize>)>,
}

/// Analyses every point in parallel.
pub fn analyze_points(model: &HamiltonianModel, points: &[DVector<f64>], tol: &Tolerances) -> Vec<Result<PointAnalysis>> {
    points.par_iter().map(|p| analyze_point(model, p, tol)).collect()
}

fn summary(id: usize, component: usize, a: &PointAnalysis, count: usize) -> StratumSummary {
    StratumSummary {
        id,
        label: a.label(),
        component,
        representative: a.point.iter().copied().collect(),
        grid_points: count,
        stratum_dim: a.stratum_dim(),
        orbit_space_dim: a.orbit_space_dim(),
        codim_infinitesimal: a.codim_infinitesimal(),
        codim_canonical: a.codim_canonical(),
        leaf_dim: a.leaf_dim(),
        fiber_dim: a.fiber_dim(),
        dimension_type: a.dimension_type(),
    }
}

impl Stratification {
    /// Labels the grid and splits each label class into components of the
    /// lattice graph whose edges join points one step apart along an axis.
    pub fn from_grid(model: &HamiltonianModel, grid: GridSpec, tol: &Tolerances) -> Result<Self> {
        let pts = grid.points(model.slice_dim());
        let (indices, points): (Vec<_>, Vec<_>) = pts.into_iter().unzip();
        let analyses: Vec<PointAnalysis> = analyze_points(model, &points, tol).into_iter().collect::<Result<_>>()?;
        let labels: Vec<StratumLabel> = analyses.iter().map(|a| a.label()).collect();
        let lookup: HashMap<&[i64], usize> = indices.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
        let mut assignment = vec![usize::MAX; points.len()];
        let mut by_label: BTreeMap<StratumLabel, usize> = BTreeMap::new();
        let mut strata = Vec::new();
        for start in 0..points.len() {
            if assignment[start] != usize::MAX {
                continue;
            }
            let id = strata.len();
            let comp = by_label.entry(labels[start].clone()).or_insert(0);
            let component = *comp;
            *comp += 1;
            let mut queue = VecDeque::from([start]);
            assignment[start] = id;
            let mut count = 0;
            while let Some(i) = queue.pop_front() {
                count += 1;
                for axis in 0..indices[i].len() {
                    for step in [-1i64, 1] {
                        let mut nb = indices[i].clone();
                        nb[axis] += step;
                        if let Some(&j) = lookup.get(nb.as_slice()) {
                            if assignment[j] == usize::MAX && labels[j] == labels[i] {
                                assignment[j] = id;
                                queue.push_back(j);
                            }
                        }
                    }
                }
            }
            strata.push(summary(id, component, &analyses[start], count));
        }
        let mut groups: BTreeMap<StratumLabel, Vec<usize>> = BTreeMap::new();
        for (i, l) in labels.into_iter().enumerate() {
            groups.entry(l).or_default().push(i);
        }
        let by_label = groups
            .into_iter()
            .map(|(l, idx)| {
                let pts = DMatrix::from_fn(model.slice_dim(), idx.len(), |r, c| points[idx[c]][r]);
                let ids = idx.iter().map(|&i| assignment[i]).collect();
                (l, (pts, ids))
            })
            .collect();
        Ok(Stratification {
            grid,
            indices,
            analyses,
            assignment,
            strata,
            by_label,
        })
    }

    pub fn label_count(&self) -> usize {
        let mut labels: Vec<&StratumLabel> = self.strata.iter().map(|s| &s.label).collect();
        labels.sort();
        labels.dedup();
        labels.len()
    }

    pub fn points_of(&self, stratum: usize) -> impl Iterator<Item = &PointAnalysis> {
        self.analyses
            .iter()
            .zip(&self.assignment)
            .filter(move |(_, &s)| s == stratum)
            .map(|(a, _)| a)
    }

    /// Stratum of an analysed off-grid point: nearest grid point with the same
    /// label lying on the affine space `p + T_pΣ`.
    pub fn assign(&self, a: &PointAnalysis, tol: f64) -> Option<usize> {
        let (pts, ids) = self.by_label.get(&a.label())?;
        let t = &a.stratum_tangent;
        let mut diff = pts.clone();
        for mut c in diff.column_iter_mut() {
            c -= &a.point;
        }
        let off = if t.ncols() == t.nrows() {
            DMatrix::zeros(0, diff.ncols())
        } else {
            &diff - t * (t.transpose() * &diff)
        };
        let mut best: Option<(f64, usize)> = None;
        for (j, &s) in ids.iter().enumerate() {
            let dist = diff.column(j).norm();
            if off.nrows() > 0 && off.column(j).norm() > tol * (1.0 + dist) {
                continue;
            }
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, s));
            }
        }
        best.map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CodimAuditEntry {
    pub stratum: usize,
    pub codim_infinitesimal: usize,
    pub codim_canonical: usize,
    pub reflection_on_complement: bool,
}

/// Codimension-one audit of a stratification.
#[derive(Debug, Clone, Serialize)]
pub struct CodimAudit {
    pub entries: Vec<CodimAuditEntry>,
    /// Strata of infinitesimal codimension one.
    pub violations: Vec<usize>,
    /// Strata with canonical codimension one; these are not counterexamples
    /// when their infinitesimal codimension differs from one.
    pub canonical_codim_one: Vec<usize>,
}

impl CodimAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Codimensions of every stratum, with extra analysed samples contributing
/// their own entries (stratum id `usize::MAX` when they match no grid stratum).
pub fn codim_one_audit(strat: &Stratification, extra: &[PointAnalysis]) -> CodimAudit {
    let mut entries: Vec<CodimAuditEntry> = strat
        .strata
        .iter()
        .map(|s| {
            let rep = strat.points_of(s.id).next().expect("strata are nonempty");
            CodimAuditEntry {
                stratum: s.id,
                codim_infinitesimal: s.codim_infinitesimal,
                codim_canonical: s.codim_canonical,
                reflection_on_complement: rep.reflection_on_complement,
            }
        })
        .collect();
    let mut seen: Vec<StratumLabel> = strat.strata.iter().map(|s| s.label.clone()).collect();
    for a in extra {
        let l = a.label();
        if seen.contains(&l) {
            continue;
        }
        seen.push(l);
        entries.push(CodimAuditEntry {
            stratum: usize::MAX,
            codim_infinitesimal: a.codim_infinitesimal(),
            codim_canonical: a.codim_canonical(),
            reflection_on_complement: a.reflection_on_complement,
        });
    }
    let violations = entries
        .iter()
        .filter(|e| e.codim_infinitesimal == 1)
        .map(|e| e.stratum)
        .collect();
    let canonical_codim_one = entries
        .iter()
        .filter(|e| e.codim_canonical == 1)
        .map(|e| e.stratum)
        .collect();
    CodimAudit {
        entries,
        violations,
        canonical_codim_one,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierPair {
    /// Stratum whose closure contains `lower`.
    pub upper: usize,
    pub lower: usize,
    pub upper_dim: usize,
    pub lower_dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierReport {
    pub adjacent: Vec<FrontierPair>,
    pub violations: Vec<FrontierPair>,
}

impl FrontierReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A stratum `B` counts as lying in the closure of `A` when every grid point
/// of `B` is closer than twice the spacing to some grid point of `A`.
pub fn frontier_sampling(strat: &Stratification) -> FrontierReport {
    let radius = 2.0 * strat.grid.spacing;
    let members: Vec<Vec<&DVector<f64>>> = strat
        .strata
        .iter()
        .map(|s| strat.points_of(s.id).map(|a| &a.point).collect())
        .collect();
    let mut adjacent = Vec::new();
    let mut violations = Vec::new();
    for a in &strat.strata {
        for b in &strat.strata {
            if a.id == b.id {
                continue;
            }
            let inside = members[b.id]
                .iter()
                .all(|pb| members[a.id].iter().any(|pa| (*pa - *pb).norm() < radius - 1e-12));
            if !inside {
                continue;
            }
            let pair = FrontierPair {
                upper: a.id,
                lower: b.id,
                upper_dim: a.stratum_dim,
                lower_dim: b.stratum_dim,
            };
            if b.stratum_dim >= a.stratum_dim {
                violations.push(pair.clone());
            }
            adjacent.push(pair);
        }
    }
    FrontierReport { adjacent, violations }
}

/// Result of comparing the two computations of the leaf dimension.
#[derive(Debug, Clone, Serialize)]
pub struct LeafRankEntry {
    pub point: Vec<f64>,
    pub stratum: Option<usize>,
    /// `dim 𝒮𝒩_p^{G_p}`.
    pub normal_fixed: usize,
    /// Stratum dimension minus the rank of the transverse momentum map.
    pub fiber: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafRankReport {
    pub entries: Vec<LeafRankEntry>,
    pub mismatches: usize,
}

pub fn leaf_rank_check(analyses: &[(Option<usize>, &PointAnalysis)]) -> LeafRankReport {
    let entries: Vec<LeafRankEntry> = analyses
        .iter()
        .map(|(s, a)| LeafRankEntry {
            point: a.point.iter().copied().collect(),
            stratum: *s,
            normal_fixed: a.leaf_dim(),
            fiber: a.fiber_dim(),
        })
        .collect();
    let mismatches = entries.iter().filter(|e| e.normal_fixed != e.fiber).count();
    LeafRankReport { entries, mismatches }
}
