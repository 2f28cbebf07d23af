//! Momentum maps of linear slice models and their first and second order
//! identities.
//!
//! A [`HamiltonianModel`] is the data `(G, H, V)` of a local normal form: a
//! compact group `G`, a closed subgroup `H` given by an inclusion of Lie
//! algebras, and a symplectic `H`-representation `V`. Its slice is
//! `Y = h⁰ ⊕ V` with the momentum map `J(α, v) = α + 𝔭(J_V(v))`, where
//! `J_V(v)_i = ½ ω(ρ(X_i) v, v)` and `𝔭 : h* → g*` splits the restriction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{gaussian_vector, unit_vectors, CompactGroupModel, GroupElement, LieAlgebraBasis};
use crate::linalg::{self, RankPolicy};
use crate::symplectic::{self, omega_pair, SymplecticRep};

/// A smooth equivariant map into a dual Lie algebra, with its derivative.
pub trait MomentumMap {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>>;
    /// Rows are the differentials of the components.
    fn jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>>;
}

fn check_source(dim: usize, p: &DVector<f64>) -> Result<()> {
    if p.len() != dim {
        return Err(Error::dim("momentum map argument", dim, p.len()));
    }
    if !p.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("momentum map argument".into()));
    }
    Ok(())
}

/// `J_i(v) = ½ vᵀ Q_i v` with symmetric `Q_i`.
#[derive(Debug, Clone)]
pub struct QuadraticMomentumMap {
    dim: usize,
    forms: Vec<DMatrix<f64>>,
}

impl QuadraticMomentumMap {
    /// The quadratic momentum map of a symplectic representation:
    /// `Q_i` is the symmetric part of `ρ_iᵀ Ω`.
    pub fn from_rep(rep: &SymplecticRep) -> Self {
        let forms = rep
            .generators()
            .iter()
            .map(|a| {
                let m = a.transpose() * rep.omega();
                (&m + m.transpose()) * 0.5
            })
            .collect();
        QuadraticMomentumMap { dim: rep.dim(), forms }
    }

    pub fn from_forms(dim: usize, forms: Vec<DMatrix<f64>>) -> Result<Self> {
        for (i, q) in forms.iter().enumerate() {
            if q.shape() != (dim, dim) {
                return Err(Error::input(format!("momentum form {i} has shape {:?}", q.shape())));
            }
            if !q.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite(format!("momentum form {i}")));
            }
            if linalg::max_abs(&(q - q.transpose())) > 1e-12 {
                return Err(Error::input(format!("momentum form {i} is not symmetric")));
            }
        }
        Ok(QuadraticMomentumMap { dim, forms })
    }

    pub fn forms(&self) -> &[DMatrix<f64>] {
        &self.forms
    }
}

impl MomentumMap for QuadraticMomentumMap {
    fn source_dim(&self) -> usize {
        self.dim
    }

    fn target_dim(&self) -> usize {
        self.forms.len()
    }

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        check_source(self.dim, p)?;
        Ok(DVector::from_iterator(
            self.forms.len(),
            self.forms.iter().map(|q| 0.5 * p.dot(&(q * p))),
        ))
    }

    fn jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        check_source(self.dim, p)?;
        let mut j = DMatrix::zeros(self.forms.len(), self.dim);
        for (i, q) in self.forms.iter().enumerate() {
            j.set_row(i, &(q * p).transpose());
        }
        Ok(j)
    }
}

/// Result of [`infinitesimal_action`].
#[derive(Debug, Clone)]
pub struct InfinitesimalAction {
    pub vector: DVector<f64>,
    /// `|ω(ρ(ξ)p, ·) - d⟨J, ξ⟩_p|_∞`.
    pub momentum_residual: f64,
}

/// `ρ(ξ) p` together with the residual of the momentum condition at `p`.
pub fn infinitesimal_action(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    xi: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<InfinitesimalAction> {
    rep.check_point(p)?;
    if xi.len() != rep.algebra().dim() {
        return Err(Error::dim("algebra element", rep.algebra().dim(), xi.len()));
    }
    let vector = rep.generator(xi) * p;
    let lhs = rep.omega().transpose() * &vector;
    let rhs = momentum.jacobian(p)?.transpose() * xi;
    Ok(InfinitesimalAction {
        momentum_residual: (lhs - rhs).amax(),
        vector,
    })
}

/// Subspace distances between the two pairs of spaces that must coincide for
/// a momentum map: `(T_pO)^ω` versus `ker dJ_p`, and the isotropy algebra
/// versus the annihilator of `im dJ_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelImageReport {
    pub omega_orthogonal_dim: usize,
    pub kernel_dim: usize,
    pub kernel_distance: f64,
    pub isotropy_dim: usize,
    pub annihilator_dim: usize,
    pub isotropy_distance: f64,
}

impl KernelImageReport {
    pub fn max_distance(&self) -> f64 {
        self.kernel_distance.max(self.isotropy_distance)
    }
}

pub fn kernel_image_identities(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    p: &DVector<f64>,
    policy: &RankPolicy,
) -> Result<KernelImageReport> {
    let tangent = symplectic::orbit_tangent(rep, p, policy)?;
    let perp = symplectic::symplectic_orthogonal(&tangent, rep.omega(), policy)?;
    let jac = momentum.jacobian(p)?;
    let kernel = linalg::kernel(&jac, policy, "ker dJ")?;
    let iso = symplectic::isotropy_kernel(rep, p, policy)?;
    let ann = linalg::kernel(&jac.transpose(), policy, "annihilator of im dJ")?;
    Ok(KernelImageReport {
        omega_orthogonal_dim: perp.ncols(),
        kernel_dim: kernel.ncols(),
        kernel_distance: linalg::subspace_distance(&perp, &kernel),
        isotropy_dim: iso.ncols(),
        annihilator_dim: ann.ncols(),
        isotropy_distance: linalg::subspace_distance(&iso, &ann),
    })
}

/// Second derivative of a momentum map along a kernel direction.
#[derive(Debug, Clone)]
pub struct QuadraticDifferential {
    /// `½ d²/dt² J(p + t v)` at `t = 0` by central differences.
    pub second_derivative: DVector<f64>,
    /// Orthonormal complement of `im dJ_p` in the target.
    pub cokernel_basis: DMatrix<f64>,
    /// Coordinates of the second derivative on `cokernel_basis`.
    pub cokernel: DVector<f64>,
}

/// Evaluates the quadratic differential of `momentum` at `p` on `v ∈ ker dJ_p`.
pub fn quadratic_differential(
    momentum: &dyn MomentumMap,
    p: &DVector<f64>,
    v: &DVector<f64>,
    policy: &RankPolicy,
) -> Result<QuadraticDifferential> {
    check_source(momentum.source_dim(), p)?;
    check_source(momentum.source_dim(), v)?;
    let jac = momentum.jacobian(p)?;
    let scale = 1.0_f64.max(v.norm()) * 1.0_f64.max(linalg::max_abs(&jac));
    let res = (&jac * v).amax();
    if res > 1e-8 * scale {
        return Err(Error::input(format!(
            "direction is not in ker dJ_p (residual {res:.2e})"
        )));
    }
    let h = 1e-4 * (1.0 + p.norm());
    let jp = momentum.value(&(p + v * h))?;
    let j0 = momentum.value(p)?;
    let jm = momentum.value(&(p - v * h))?;
    let second_derivative = (jp - j0 * 2.0 + jm) / (2.0 * h * h);
    let image = linalg::image(&jac, policy, "im dJ")?;
    let cokernel_basis = linalg::complement(&image, policy, "coker dJ")?;
    let cokernel = cokernel_basis.transpose() * &second_derivative;
    Ok(QuadraticDifferential {
        second_derivative,
        cokernel_basis,
        cokernel,
    })
}

/// Comparison of the quadratic differential with the normal momentum map.
#[derive(Debug, Clone)]
pub struct QuadraticDifferentialCheck {
    /// The second derivative paired with the isotropy basis.
    pub differential: DVector<f64>,
    /// `J_SN` of the projection of `v` onto the symplectic normal space.
    pub normal_momentum: DVector<f64>,
    pub relative_error: f64,
}

pub fn quadratic_differential_check(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    p: &DVector<f64>,
    v: &DVector<f64>,
    policy: &RankPolicy,
    angle_tol: f64,
) -> Result<QuadraticDifferentialCheck> {
    let sn = symplectic::symplectic_normal_space(rep, momentum, p, policy, angle_tol)?;
    let qd = quadratic_differential(momentum, p, v, policy)?;
    let differential = sn.isotropy.transpose() * &qd.second_derivative;
    let y = sn.basis.transpose() * v;
    let normal_momentum = sn.normal_momentum(&y);
    let denom = differential.norm().max(normal_momentum.norm());
    let diff = (&differential - &normal_momentum).norm();
    let relative_error = if denom > 1e-12 { diff / denom } else { diff };
    Ok(QuadraticDifferentialCheck {
        differential,
        normal_momentum,
        relative_error,
    })
}

/// A component coset of the subgroup: its representative in `G` and its
/// action on `V`.
#[derive(Debug, Clone)]
pub struct SubgroupComponent {
    pub in_group: GroupElement,
    pub on_rep: DMatrix<f64>,
}

/// An element of the subgroup `H` in both representations.
#[derive(Debug, Clone)]
pub struct SubgroupElement {
    pub in_group: GroupElement,
    pub on_rep: DMatrix<f64>,
}

/// Raw ingredients of a [`HamiltonianModel`].
#[derive(Debug, Clone)]
pub struct ModelParts {
    pub name: String,
    pub group: CompactGroupModel,
    /// Columns are the subalgebra basis in coordinates of `g`.
    pub inclusion: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    /// `ρ(h_i)` for each subalgebra basis vector.
    pub generators: Vec<DMatrix<f64>>,
    /// Explicit momentum forms; derived from the representation when absent.
    pub momentum_forms: Option<Vec<DMatrix<f64>>>,
    /// Columns span `h⁰ ⊂ g*`; an orthonormal basis is computed when absent.
    pub annihilator: Option<DMatrix<f64>>,
    /// `𝔭 : h* → g*`; the orthogonal splitting when absent.
    pub splitting: Option<DMatrix<f64>>,
    pub components: Vec<SubgroupComponent>,
}

/// The local model `(G, H, V)` together with its slice `h⁰ ⊕ V`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    name: String,
    group: CompactGroupModel,
    inclusion: DMatrix<f64>,
    inclusion_pinv: DMatrix<f64>,
    rep: SymplecticRep,
    momentum: QuadraticMomentumMap,
    annihilator: DMatrix<f64>,
    annihilator_pinv: DMatrix<f64>,
    splitting: DMatrix<f64>,
    components: Vec<SubgroupComponent>,
}

const MODEL_SEED: u64 = 0x0de1;

/// The orthogonal splitting `B ι (ιᵀ B ι)⁻¹` of the restriction `g* → h*`.
pub fn orthogonal_splitting(inner_product: &DMatrix<f64>, inclusion: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let bi = inner_product * inclusion;
    let gram = inclusion.transpose() * &bi;
    if gram.nrows() == 0 {
        return Ok(DMatrix::zeros(inclusion.nrows(), 0));
    }
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::input("subalgebra inclusion is degenerate"))?;
    Ok(bi * inv)
}

impl HamiltonianModel {
    pub fn new(parts: ModelParts) -> Result<Self> {
        let pol = RankPolicy::default();
        let ng = parts.group.dim();
        let inc = parts.inclusion;
        if inc.nrows() != ng {
            return Err(Error::dim("subalgebra inclusion rows", ng, inc.nrows()));
        }
        let nh = inc.ncols();
        if nh > 0 && linalg::rank(&inc, &pol, "subalgebra inclusion")? < nh {
            return Err(Error::input("subalgebra inclusion is rank deficient"));
        }
        let sub = parts.group.algebra().subalgebra(&inc)?;
        let comp_actions: Vec<_> = parts.components.iter().map(|c| c.on_rep.clone()).collect();
        let rep = SymplecticRep::new(sub, parts.omega, parts.generators, comp_actions)?;
        let momentum = match parts.momentum_forms {
            Some(f) => {
                if f.len() != nh {
                    return Err(Error::dim("momentum forms", nh, f.len()));
                }
                QuadraticMomentumMap::from_forms(rep.dim(), f)?
            }
            None => QuadraticMomentumMap::from_rep(&rep),
        };
        let annihilator = match parts.annihilator {
            Some(a) => {
                if a.nrows() != ng || a.ncols() != ng - nh {
                    return Err(Error::input(format!(
                        "annihilator basis has shape {:?}, expected {}x{}",
                        a.shape(),
                        ng,
                        ng - nh
                    )));
                }
                let r = linalg::max_abs(&(inc.transpose() * &a));
                if r > 1e-12 {
                    return Err(Error::invariant("annihilator pairs to zero with h", r, 1e-12));
                }
                if ng > nh && linalg::rank(&a, &pol, "annihilator basis")? < ng - nh {
                    return Err(Error::input("annihilator basis is rank deficient"));
                }
                a
            }
            None => linalg::kernel(&inc.transpose(), &pol, "annihilator")?,
        };
        let splitting = match parts.splitting {
            Some(s) => {
                if s.shape() != (ng, nh) {
                    return Err(Error::input(format!("splitting has shape {:?}", s.shape())));
                }
                let r = linalg::max_abs(&(inc.transpose() * &s - DMatrix::identity(nh, nh)));
                if r > 1e-12 {
                    return Err(Error::invariant("splitting of the restriction g* -> h*", r, 1e-12));
                }
                s
            }
            None => orthogonal_splitting(parts.group.inner_product(), &inc)?,
        };
        let model = HamiltonianModel {
            name: parts.name,
            inclusion_pinv: linalg::pinv(&inc)?,
            annihilator_pinv: linalg::pinv(&annihilator)?,
            group: parts.group,
            inclusion: inc,
            rep,
            momentum,
            annihilator,
            splitting,
            components: parts.components,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let size = self.group.matrix_size();
        for (i, c) in self.components.iter().enumerate() {
            if c.in_group.matrix.shape() != (size, size) {
                return Err(Error::input(format!("subgroup component {i} has the wrong size")));
            }
            let ad = self.group.adjoint(&c.in_group);
            let mapped = &ad * &self.inclusion;
            let back = &self.inclusion * (&self.inclusion_pinv * &mapped);
            let r = linalg::max_abs(&(&mapped - back));
            if r > 1e-10 {
                return Err(Error::invariant(format!("subgroup component {i} normalises h"), r, 1e-10));
            }
            let adh = &self.inclusion_pinv * mapped;
            let inv = c
                .on_rep
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::input(format!("subgroup component {i} is not invertible on V")))?;
            for (j, e) in unit_vectors(self.sub_dim()).iter().enumerate() {
                let lhs = &c.on_rep * self.rep.generator(e) * &inv;
                let rhs = self.rep.generator(&(&adh * e));
                let r = linalg::max_abs(&(lhs - rhs));
                if r > 1e-10 {
                    return Err(Error::invariant(
                        format!("subgroup component {i} intertwines generator {j}"),
                        r,
                        1e-10,
                    ));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(MODEL_SEED);
        for _ in 0..4 {
            let h = self.sample_subgroup_element(&mut rng);
            let lhs = &self.splitting * self.subgroup_coadjoint(&h.in_group);
            let rhs = self.group.coadjoint(&h.in_group) * &self.splitting;
            let r = linalg::max_abs(&(lhs - rhs));
            if r > 1e-10 {
                return Err(Error::invariant("H-equivariance of the splitting", r, 1e-10));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &CompactGroupModel {
        &self.group
    }

    pub fn inclusion(&self) -> &DMatrix<f64> {
        &self.inclusion
    }

    pub fn rep(&self) -> &SymplecticRep {
        &self.rep
    }

    pub fn rep_momentum(&self) -> &QuadraticMomentumMap {
        &self.momentum
    }

    pub fn annihilator(&self) -> &DMatrix<f64> {
        &self.annihilator
    }

    pub fn splitting(&self) -> &DMatrix<f64> {
        &self.splitting
    }

    pub fn subgroup_components(&self) -> &[SubgroupComponent] {
        &self.components
    }

    pub fn sub_algebra(&self) -> &LieAlgebraBasis {
        self.rep.algebra()
    }

    pub fn sub_dim(&self) -> usize {
        self.inclusion.ncols()
    }

    pub fn annihilator_dim(&self) -> usize {
        self.annihilator.ncols()
    }

    pub fn rep_dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn slice_dim(&self) -> usize {
        self.annihilator_dim() + self.rep_dim()
    }

    /// Maps subalgebra coordinates into `g`.
    pub fn include(&self, zeta: &DVector<f64>) -> DVector<f64> {
        &self.inclusion * zeta
    }

    /// Coordinates in `h` of an element of `g` lying in `h`.
    pub fn restrict_algebra(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inclusion_pinv * x
    }

    pub fn split_point(&self, p: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        check_source(self.slice_dim(), p)?;
        let m = self.annihilator_dim();
        Ok((p.rows(0, m).into_owned(), p.rows(m, self.rep_dim()).into_owned()))
    }

    pub fn join_point(&self, alpha: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut p = DVector::zeros(alpha.len() + v.len());
        p.rows_mut(0, alpha.len()).copy_from(alpha);
        p.rows_mut(alpha.len(), v.len()).copy_from(v);
        p
    }

    /// `Ad*` of an element of `H` on `h*`.
    pub fn subgroup_coadjoint(&self, g: &GroupElement) -> DMatrix<f64> {
        let ad_inv = self.group.adjoint(&g.inverse());
        (&self.inclusion_pinv * ad_inv * &self.inclusion).transpose()
    }

    /// `components[c] * exp(ζ)` in both representations; component 0 is the identity.
    pub fn subgroup_element(&self, component: usize, zeta: &DVector<f64>) -> Result<SubgroupElement> {
        if zeta.len() != self.sub_dim() {
            return Err(Error::dim("subalgebra element", self.sub_dim(), zeta.len()));
        }
        let eg = self.group.exp_algebra(&self.include(zeta), 1.0)?;
        let ev = linalg::expm(&self.rep.generator(zeta));
        if component == 0 {
            return Ok(SubgroupElement {
                in_group: eg,
                on_rep: ev,
            });
        }
        let c = self
            .components
            .get(component - 1)
            .ok_or_else(|| Error::input(format!("no subgroup component {component}")))?;
        Ok(SubgroupElement {
            in_group: c.in_group.compose(&eg),
            on_rep: &c.on_rep * ev,
        })
    }

    pub fn subgroup_component_count(&self) -> usize {
        self.components.len() + 1
    }

    pub fn sample_subgroup_element<R: Rng + ?Sized>(&self, rng: &mut R) -> SubgroupElement {
        let c = rng.random_range(0..self.subgroup_component_count());
        let z = gaussian_vector(rng, self.sub_dim());
        self.subgroup_element(c, &z).expect("sampled subgroup element is well formed")
    }

    /// Matrix of `ad*_{ι(ζ)}` restricted to `h⁰`, in annihilator coordinates.
    pub fn annihilator_generator(&self, zeta: &DVector<f64>) -> DMatrix<f64> {
        let coad = self.group.algebra().coad_matrix(&self.include(zeta));
        &self.annihilator_pinv * coad * &self.annihilator
    }

    /// Infinitesimal action of `ζ ∈ h` on the slice.
    pub fn slice_generator(&self, zeta: &DVector<f64>) -> DMatrix<f64> {
        linalg::block_diag(&[self.annihilator_generator(zeta), self.rep.generator(zeta)])
    }

    pub fn slice_generators(&self) -> Vec<DMatrix<f64>> {
        unit_vectors(self.sub_dim())
            .iter()
            .map(|e| self.slice_generator(e))
            .collect()
    }

    /// Action of a subgroup element on the slice.
    pub fn slice_matrix(&self, h: &SubgroupElement) -> DMatrix<f64> {
        let coad = self.group.coadjoint(&h.in_group);
        linalg::block_diag(&[&self.annihilator_pinv * coad * &self.annihilator, h.on_rep.clone()])
    }

    /// `J(α, v) = Aα + 𝔭(J_V(v))` in dual coordinates of `g`.
    pub fn slice_momentum(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        SliceMomentum(self).value(p)
    }

    pub fn slice_momentum_map(&self) -> SliceMomentum<'_> {
        SliceMomentum(self)
    }
}

/// The slice momentum map `h⁰ ⊕ V → g*` of a model.
#[derive(Debug, Clone, Copy)]
pub struct SliceMomentum<'a>(pub &'a HamiltonianModel);

impl MomentumMap for SliceMomentum<'_> {
    fn source_dim(&self) -> usize {
        self.0.slice_dim()
    }

    fn target_dim(&self) -> usize {
        self.0.group.dim()
    }

    fn value(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let (alpha, v) = self.0.split_point(p)?;
        let jv = self.0.momentum.value(&v)?;
        Ok(&self.0.annihilator * alpha + &self.0.splitting * jv)
    }

    fn jacobian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (_, v) = self.0.split_point(p)?;
        let djv = self.0.momentum.jacobian(&v)?;
        let right = &self.0.splitting * djv;
        Ok(linalg::hstack(&[self.0.annihilator.clone(), right], self.0.group.dim()))
    }
}

/// A normal-form embedding of a model into an ambient group `K` with anchor
/// `α₀ ∈ k*`, where `G` is the identity component of the isotropy of `α₀`.
#[derive(Debug, Clone)]
pub struct MgsModel {
    ambient: CompactGroupModel,
    inclusion: DMatrix<f64>,
    anchor: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl MgsModel {
    pub fn new(
        ambient: CompactGroupModel,
        inclusion: DMatrix<f64>,
        anchor: DVector<f64>,
        sigma: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let nk = ambient.dim();
        if inclusion.nrows() != nk {
            return Err(Error::dim("isotropy inclusion rows", nk, inclusion.nrows()));
        }
        if anchor.len() != nk {
            return Err(Error::dim("anchor", nk, anchor.len()));
        }
        ambient.algebra().subalgebra(&inclusion)?;
        for j in 0..inclusion.ncols() {
            let x = inclusion.column(j).into_owned();
            let r = (ambient.algebra().coad_matrix(&x) * &anchor).amax();
            if r > 1e-10 {
                return Err(Error::invariant("anchor fixed by the isotropy algebra", r, 1e-10));
            }
        }
        let sigma = match sigma {
            Some(s) => {
                let ng = inclusion.ncols();
                if s.shape() != (nk, ng) {
                    return Err(Error::input(format!("sigma has shape {:?}", s.shape())));
                }
                let r = linalg::max_abs(&(inclusion.transpose() * &s - DMatrix::identity(ng, ng)));
                if r > 1e-12 {
                    return Err(Error::invariant("sigma splits the restriction", r, 1e-12));
                }
                s
            }
            None => orthogonal_splitting(ambient.inner_product(), &inclusion)?,
        };
        Ok(MgsModel {
            ambient,
            inclusion,
            anchor,
            sigma,
        })
    }

    pub fn ambient(&self) -> &CompactGroupModel {
        &self.ambient
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    /// `Ad*_g (α₀ + σ(β + 𝔭(J_V(v))))`.
    pub fn momentum(
        &self,
        model: &HamiltonianModel,
        g: &GroupElement,
        beta: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if model.group().dim() != self.inclusion.ncols() {
            return Err(Error::dim("model group in ambient", self.inclusion.ncols(), model.group().dim()));
        }
        let inner = model.slice_momentum(&model.join_point(beta, v))?;
        let x = &self.anchor + &self.sigma * inner;
        self.ambient.coadjoint_action(g, &x)
    }
}

/// `ω(ρ(ξ)p, w) - d⟨J, ξ⟩_p(w)` maximised over unit coordinate directions.
pub fn momentum_condition_residual(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    xi: &DVector<f64>,
    p: &DVector<f64>,
) -> Result<f64> {
    Ok(infinitesimal_action(rep, momentum, xi, p)?.momentum_residual)
}

/// `|J(g·v) - Ad*(g) J(v)|_∞` for a subgroup element.
pub fn equivariance_residual(model: &HamiltonianModel, h: &SubgroupElement, v: &DVector<f64>) -> Result<f64> {
    let lhs = model.momentum.value(&(&h.on_rep * v))?;
    let rhs = model.subgroup_coadjoint(&h.in_group) * model.momentum.value(v)?;
    Ok((lhs - rhs).amax())
}

/// Evaluates `½ ω(ρ(ξ) v, v)` directly, independently of stored forms.
pub fn pairing_from_omega(rep: &SymplecticRep, xi: &DVector<f64>, v: &DVector<f64>) -> f64 {
    0.5 * omega_pair(rep.omega(), &(rep.generator(xi) * v), v)
}
