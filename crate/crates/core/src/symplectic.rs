//! Symplectic representations and their linear invariants at a point.
//!
//! Convention: `ω(a, b) = aᵀ Ω b`, with `Ω = [[0, I], [-I, 0]]` when no form
//! is given.

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{gauss_newton_fixing, CosetCertificate, LieAlgebraBasis};
use crate::linalg::{self, RankPolicy};
use crate::momentum::MomentumMap;

const SYMPLECTIC_TOL: f64 = 1e-12;
const REP_TOL: f64 = 1e-10;
const FINITE_SEARCH_SEED: u64 = 0xf1_7e;
const FINITE_RESTARTS: usize = 5;

/// `Ω = [[0, I], [-I, 0]]` on `R^{2n}`.
pub fn standard_omega(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = 1.0;
        o[(n + i, i)] = -1.0;
    }
    o
}

/// `Σ dx_k ∧ dy_k` on `C^n` with coordinates `(x_1, y_1, ..., x_n, y_n)`.
pub fn complex_omega(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(2 * i, 2 * i + 1)] = 1.0;
        o[(2 * i + 1, 2 * i)] = -1.0;
    }
    o
}

/// `ω(a, b) = aᵀ Ω b`.
pub fn omega_pair(omega: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(&(omega * b))
}

/// Symplectic representation of a compact group on `(V, Ω)`.
#[derive(Debug, Clone)]
pub struct SymplecticRep {
    algebra: LieAlgebraBasis,
    omega: DMatrix<f64>,
    generators: Vec<DMatrix<f64>>,
    /// Matrices of the non-identity component representatives.
    components: Vec<DMatrix<f64>>,
}

impl SymplecticRep {
    pub fn new(
        algebra: LieAlgebraBasis,
        omega: DMatrix<f64>,
        generators: Vec<DMatrix<f64>>,
        components: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let d = omega.nrows();
        if !omega.is_square() || d % 2 != 0 {
            return Err(Error::input(format!(
                "symplectic form must be square of even size, got {:?}",
                omega.shape()
            )));
        }
        if !omega.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("symplectic form".into()));
        }
        if linalg::max_abs(&(&omega + omega.transpose())) > SYMPLECTIC_TOL {
            return Err(Error::input("symplectic form is not antisymmetric"));
        }
        if d > 0 {
            let smin = omega
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if smin <= 1e-10 {
                return Err(Error::input(format!(
                    "symplectic form is degenerate (smallest singular value {smin:.2e})"
                )));
            }
        }
        if generators.len() != algebra.dim() {
            return Err(Error::dim("representation generators", algebra.dim(), generators.len()));
        }
        for (i, a) in generators.iter().enumerate() {
            if a.shape() != (d, d) {
                return Err(Error::input(format!("generator {i} has shape {:?}", a.shape())));
            }
            let r = linalg::max_abs(&(a.transpose() * &omega + &omega * a));
            if r > SYMPLECTIC_TOL * (1.0 + linalg::max_abs(a)) {
                return Err(Error::input(format!(
                    "generator {i} is not infinitesimally symplectic (residual {r:.2e})"
                )));
            }
        }
        let n = algebra.dim();
        for i in 0..n {
            for j in 0..n {
                let lhs = &generators[i] * &generators[j] - &generators[j] * &generators[i];
                let mut rhs = DMatrix::zeros(d, d);
                for (k, g) in generators.iter().enumerate() {
                    rhs += g * algebra.structure_constant(i, j, k);
                }
                let r = linalg::max_abs(&(lhs - rhs));
                if r > REP_TOL {
                    return Err(Error::invariant(
                        format!("representation property for generators {i},{j}"),
                        r,
                        REP_TOL,
                    ));
                }
            }
        }
        for (i, l) in components.iter().enumerate() {
            if l.shape() != (d, d) {
                return Err(Error::input(format!("component action {i} has shape {:?}", l.shape())));
            }
            let r = linalg::max_abs(&(l.transpose() * &omega * l - &omega));
            if r > 1e-10 {
                return Err(Error::input(format!("component action {i} is not symplectic")));
            }
        }
        Ok(SymplecticRep {
            algebra,
            omega,
            generators,
            components,
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn algebra(&self) -> &LieAlgebraBasis {
        &self.algebra
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    pub fn components(&self) -> &[DMatrix<f64>] {
        &self.components
    }

    /// `ρ(ξ) = Σ ξ_i ρ_i`.
    pub fn generator(&self, xi: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (x, g) in xi.iter().zip(&self.generators) {
            m += g * *x;
        }
        m
    }

    /// Action of `components[c] * exp(ξ)`; component 0 is the identity.
    pub fn element_matrix(&self, component: usize, xi: &DVector<f64>) -> DMatrix<f64> {
        let e = linalg::expm(&self.generator(xi));
        if component == 0 {
            e
        } else {
            &self.components[component - 1] * e
        }
    }

    pub fn component_count(&self) -> usize {
        self.components.len() + 1
    }

    pub(crate) fn check_point(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::dim("point of the representation", self.dim(), p.len()));
        }
        if !p.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("point of the representation".into()));
        }
        Ok(())
    }

    /// Scale of the generators, for rank decisions on matrices built from them.
    pub fn generator_scale(&self) -> f64 {
        linalg::family_scale(&self.generators)
    }

    /// Columns `ρ(X_i) p`.
    pub fn tangent_matrix(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let vs: Vec<_> = self.generators.iter().map(|g| g * p).collect();
        linalg::columns_of(&vs, self.dim())
    }

    /// Searches every non-identity component coset for an element fixing `p`.
    pub fn finite_isotropy(&self, p: &DVector<f64>, tol: f64) -> Vec<CosetCertificate> {
        let mut rng = ChaCha8Rng::seed_from_u64(FINITE_SEARCH_SEED);
        (1..self.component_count())
            .map(|c| {
                let (x, res) = gauss_newton_fixing(
                    self.algebra.dim(),
                    |x| self.element_matrix(c, x) * p - p,
                    &mut rng,
                    FINITE_RESTARTS,
                    tol,
                );
                CosetCertificate {
                    component: c,
                    algebra_element: x,
                    residual: res,
                    certified: res < tol,
                }
            })
            .collect()
    }
}

/// Orthonormal basis of `T_p(G·p) = span{ρ(X_i) p}`.
pub fn orbit_tangent(rep: &SymplecticRep, p: &DVector<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    rep.check_point(p)?;
    linalg::image_ref(&rep.tangent_matrix(p), policy, rep.generator_scale() * p.norm(), "orbit tangent")
}

/// Isotropy algebra `{ξ : ρ(ξ) p = 0}` as an orthonormal basis in algebra coordinates.
pub fn isotropy_kernel(rep: &SymplecticRep, p: &DVector<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    rep.check_point(p)?;
    linalg::kernel_ref(&rep.tangent_matrix(p), policy, rep.generator_scale() * p.norm(), "isotropy algebra")
}

/// Orthonormal basis of `W^ω = {v : ω(w, v) = 0 for all w ∈ W}`.
pub fn symplectic_orthogonal(w: &DMatrix<f64>, omega: &DMatrix<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    if w.nrows() != omega.nrows() {
        return Err(Error::dim("subspace basis rows", omega.nrows(), w.nrows()));
    }
    let d = omega.nrows();
    if w.ncols() == 0 {
        return Ok(DMatrix::identity(d, d));
    }
    let r = linalg::rank(w, policy, "symplectic orthogonal input")?;
    if r < w.ncols() {
        return Err(Error::input("subspace basis is rank deficient"));
    }
    linalg::kernel(&(w.transpose() * omega), policy, "symplectic orthogonal")
}

/// The symplectic normal space `(T_pO)^ω / (T_pO ∩ (T_pO)^ω)` realised on the
/// complement of the intersection inside `(T_pO)^ω`.
#[derive(Debug, Clone)]
pub struct SymplecticNormalData {
    pub base_point: DVector<f64>,
    /// Basis (columns in `V`) of the realising complement.
    pub basis: DMatrix<f64>,
    /// `ω` restricted to `basis`.
    pub omega: DMatrix<f64>,
    /// Orthonormal basis of the isotropy algebra in algebra coordinates.
    pub isotropy: DMatrix<f64>,
    /// Induced action of each isotropy basis vector.
    pub isotropy_action: Vec<DMatrix<f64>>,
    /// Induced action of certified finite isotropy elements.
    pub component_action: Vec<DMatrix<f64>>,
    pub certificates: Vec<CosetCertificate>,
    pub orbit_tangent: DMatrix<f64>,
    /// `ker dJ_p`, cross-validated against `(T_pO)^ω`.
    pub kernel: DMatrix<f64>,
    /// `T_pO ∩ ker dJ_p`.
    pub intersection: DMatrix<f64>,
    /// Scale of the generators the isotropy action was projected from.
    pub action_scale: f64,
}

impl SymplecticNormalData {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Normal momentum `J_SN(y)_a = ½ ω_p(A_a y, y)` in coordinates on `basis`.
    pub fn normal_momentum(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.isotropy_action.len(),
            self.isotropy_action
                .iter()
                .map(|a| 0.5 * omega_pair(&self.omega, &(a * y), y)),
        )
    }

    /// Dimension of the subspace fixed by the identity component of the isotropy.
    pub fn fixed_dim(&self, policy: &RankPolicy) -> Result<usize> {
        Ok(linalg::fixed_subspace(self.dim(), &self.isotropy_action, &[], self.action_scale, policy, "normal fixed space")?.ncols())
    }

    /// Dimension of the subspace fixed by the isotropy algebra and the certified finite elements.
    pub fn group_fixed_dim(&self, policy: &RankPolicy) -> Result<usize> {
        Ok(linalg::fixed_subspace(
            self.dim(),
            &self.isotropy_action,
            &self.component_action,
            self.action_scale,
            policy,
            "normal fixed space",
        )?
        .ncols())
    }
}

/// Computes the symplectic normal representation of `rep` at `p`.
pub fn symplectic_normal_space(
    rep: &SymplecticRep,
    momentum: &dyn MomentumMap,
    p: &DVector<f64>,
    policy: &RankPolicy,
    angle_tol: f64,
) -> Result<SymplecticNormalData> {
    rep.check_point(p)?;
    if momentum.source_dim() != rep.dim() || momentum.target_dim() != rep.algebra().dim() {
        return Err(Error::input("momentum map does not match the representation"));
    }
    let tangent = orbit_tangent(rep, p, policy)?;
    let omega_perp = symplectic_orthogonal(&tangent, rep.omega(), policy)?;
    let jac = momentum.jacobian(p)?;
    let kernel = linalg::kernel_ref(&jac, policy, linalg::max_abs(&jac).max(rep.generator_scale() * p.norm()), "ker dJ")?;
    let dist = linalg::subspace_distance(&omega_perp, &kernel);
    if dist > angle_tol {
        return Err(Error::invariant("ker dJ_p = (T_pO)^ω", dist, angle_tol));
    }
    let intersection = linalg::intersection(&tangent, &kernel, policy, "T_pO ∩ ker dJ")?;
    let basis = if intersection.ncols() == 0 {
        kernel.clone()
    } else {
        let y = linalg::kernel(&(intersection.transpose() * &kernel), policy, "normal complement")?;
        &kernel * y
    };
    let omega_p = basis.transpose() * rep.omega() * &basis;
    let isotropy = isotropy_kernel(rep, p, policy)?;
    let isotropy_action = (0..isotropy.ncols())
        .map(|a| basis.transpose() * rep.generator(&isotropy.column(a).into_owned()) * &basis)
        .collect();
    let certificates = rep.finite_isotropy(p, 1e-9);
    let component_action = certificates
        .iter()
        .filter(|c| c.certified)
        .map(|c| basis.transpose() * rep.element_matrix(c.component, &c.algebra_element) * &basis)
        .collect();
    Ok(SymplecticNormalData {
        base_point: p.clone(),
        basis,
        omega: omega_p,
        isotropy,
        isotropy_action,
        component_action,
        certificates,
        orbit_tangent: tangent,
        kernel,
        intersection,
        action_scale: rep.generator_scale(),
    })
}
