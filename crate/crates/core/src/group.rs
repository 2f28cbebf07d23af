//! Compact groups `(T^k x SU(2)^m) ⋊ Γ` in a real defining representation.
//!
//! The Lie algebra is stored as a list of skew matrices together with the
//! structure constants obtained by projecting commutators back onto the list.
//! Dual vectors are written in the dual basis, so the coadjoint action of `g`
//! is the inverse transpose of its adjoint matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, RankPolicy};

const CLOSURE_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-10;
const VALIDATION_SEED: u64 = 0x5eed_0001;

/// Basis of a matrix Lie algebra with its structure constants.
#[derive(Debug, Clone)]
pub struct LieAlgebraBasis {
    matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    /// `c[(i * n + j) * n + k]` is the coefficient of `X_k` in `[X_i, X_j]`.
    structure: Vec<f64>,
    /// Maps a vectorised matrix to basis coordinates (least squares).
    projector: DMatrix<f64>,
    vectorised: DMatrix<f64>,
}

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

impl LieAlgebraBasis {
    /// Builds the algebra spanned by `basis` (square matrices of size `matrix_size`).
    pub fn from_matrices(matrix_size: usize, basis: Vec<DMatrix<f64>>) -> Result<Self> {
        for (i, b) in basis.iter().enumerate() {
            if b.shape() != (matrix_size, matrix_size) {
                return Err(Error::input(format!(
                    "basis matrix {i} has shape {:?}, expected {matrix_size}x{matrix_size}",
                    b.shape()
                )));
            }
        }
        let n = basis.len();
        let vectorised = linalg::columns_of(
            &basis.iter().map(vec_of).collect::<Vec<_>>(),
            matrix_size * matrix_size,
        );
        if n > 0 {
            let r = linalg::rank(&vectorised, &RankPolicy::default(), "Lie algebra basis")?;
            if r < n {
                return Err(Error::input("Lie algebra basis matrices are linearly dependent"));
            }
        }
        let projector = linalg::pinv(&vectorised)?;
        let mut alg = LieAlgebraBasis {
            matrix_size,
            basis,
            structure: vec![0.0; n * n * n],
            projector,
            vectorised,
        };
        for i in 0..n {
            for j in 0..n {
                let c = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let (coef, res) = alg.coordinates(&c);
                if res > CLOSURE_TOL * (1.0 + linalg::max_abs(&c)) {
                    return Err(Error::invariant("bracket closure of the algebra basis", res, CLOSURE_TOL));
                }
                for k in 0..n {
                    alg.structure[(i * n + j) * n + k] = coef[k];
                }
            }
        }
        Ok(alg)
    }

    /// `u(1)` as the rotation generator of `R^2`.
    pub fn circle_generator() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    /// The basis `diag(i,-i)`, `[[0,-1],[1,0]]`, `[[0,i],[i,0]]` of `su(2)`,
    /// realified on `C^2 = R^4` with coordinates `(Re z1, Re z2, Im z1, Im z2)`.
    pub fn su2_generators() -> Vec<DMatrix<f64>> {
        let realify = |a: [f64; 4], b: [f64; 4]| {
            let a = DMatrix::from_row_slice(2, 2, &a);
            let b = DMatrix::from_row_slice(2, 2, &b);
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&a);
            m.view_mut((0, 2), (2, 2)).copy_from(&(-&b));
            m.view_mut((2, 0), (2, 2)).copy_from(&b);
            m.view_mut((2, 2), (2, 2)).copy_from(&a);
            m
        };
        vec![
            realify([0.0; 4], [1.0, 0.0, 0.0, -1.0]),
            realify([0.0, -1.0, 1.0, 0.0], [0.0; 4]),
            realify([0.0; 4], [0.0, 1.0, 1.0, 0.0]),
        ]
    }

    /// Algebra of `T^k x SU(2)^m` in its block-diagonal defining representation
    /// (torus blocks first).
    pub fn standard(torus_rank: usize, su2_factors: usize) -> Result<Self> {
        let size = 2 * torus_rank + 4 * su2_factors;
        let mut basis = Vec::new();
        let mut offset = 0;
        for _ in 0..torus_rank {
            let mut m = DMatrix::zeros(size, size);
            m.view_mut((offset, offset), (2, 2))
                .copy_from(&Self::circle_generator());
            basis.push(m);
            offset += 2;
        }
        for _ in 0..su2_factors {
            for g in Self::su2_generators() {
                let mut m = DMatrix::zeros(size, size);
                m.view_mut((offset, offset), (4, 4)).copy_from(&g);
                basis.push(m);
            }
            offset += 4;
        }
        Self::from_matrices(size, basis)
    }

    /// Subalgebra whose basis is given by the columns of `inclusion`
    /// (coordinates in this algebra).
    pub fn subalgebra(&self, inclusion: &DMatrix<f64>) -> Result<Self> {
        if inclusion.nrows() != self.dim() {
            return Err(Error::dim("subalgebra inclusion rows", self.dim(), inclusion.nrows()));
        }
        let basis = (0..inclusion.ncols())
            .map(|j| self.realize(&inclusion.column(j).into_owned()))
            .collect();
        Self::from_matrices(self.matrix_size, basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.structure[(i * n + j) * n + k]
    }

    /// `sum_i x_i X_i` as a matrix.
    pub fn realize(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.matrix_size, self.matrix_size);
        for (xi, b) in x.iter().zip(&self.basis) {
            m += b * *xi;
        }
        m
    }

    /// Basis coordinates of a matrix and the residual of the projection.
    pub fn coordinates(&self, m: &DMatrix<f64>) -> (DVector<f64>, f64) {
        let v = vec_of(m);
        let c = &self.projector * &v;
        let res = (&self.vectorised * &c - v).norm();
        (c, res)
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += x[i] * y[j] * self.structure_constant(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad_x` in the basis.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += x[i] * self.structure_constant(i, j, k);
                }
            }
        }
        m
    }

    /// Matrix of `ad*_x` on the dual, in the dual basis.
    pub fn coad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        -self.ad_matrix(x).transpose()
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dim("Lie algebra element", self.dim(), x.len()));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Lie algebra element".into()));
        }
        Ok(())
    }

    /// Largest violation of the Jacobi identity over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let e = |i: usize| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (e(i), e(j), e(k));
                    let t1 = self.bracket(&a, &self.bracket(&b, &c).unwrap()).unwrap();
                    let t2 = self.bracket(&b, &self.bracket(&c, &a).unwrap()).unwrap();
                    let t3 = self.bracket(&c, &self.bracket(&a, &b).unwrap()).unwrap();
                    worst = worst.max((t1 + t2 + t3).amax());
                }
            }
        }
        worst
    }
}

/// A group element in the defining representation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
}

impl GroupElement {
    pub fn identity(size: usize) -> Self {
        GroupElement {
            matrix: DMatrix::identity(size, size),
        }
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Inverse; elements are orthogonal matrices.
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.matrix.transpose(),
        }
    }
}

/// `(T^k x SU(2)^m) ⋊ Γ` with an Ad-invariant inner product on its algebra.
#[derive(Debug, Clone)]
pub struct CompactGroupModel {
    algebra: LieAlgebraBasis,
    /// Coset representatives of the identity component; index 0 is the identity.
    components: Vec<GroupElement>,
    inner_product: DMatrix<f64>,
    inner_product_inv: DMatrix<f64>,
}

impl CompactGroupModel {
    /// Validates and assembles a group model. `components` lists coset
    /// representatives; the identity is prepended when missing. A missing
    /// inner product defaults to the identity matrix in the given basis.
    pub fn new(
        algebra: LieAlgebraBasis,
        components: Vec<DMatrix<f64>>,
        inner_product: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = algebra.dim();
        let size = algebra.matrix_size();
        for (i, b) in algebra.basis().iter().enumerate() {
            if !linalg::is_skew(b, 1e-12) {
                return Err(Error::input(format!("algebra basis matrix {i} is not skew-symmetric")));
            }
        }
        let id = DMatrix::<f64>::identity(size, size);
        let mut comps = vec![GroupElement::identity(size)];
        for (i, c) in components.into_iter().enumerate() {
            if c.shape() != (size, size) {
                return Err(Error::input(format!("component {i} has shape {:?}", c.shape())));
            }
            if linalg::max_abs(&(c.transpose() * &c - &id)) > 1e-10 {
                return Err(Error::input(format!("component {i} is not orthogonal")));
            }
            if linalg::max_abs(&(&c - &id)) < 1e-12 {
                continue;
            }
            comps.push(GroupElement { matrix: c });
        }
        let b = inner_product.unwrap_or_else(|| DMatrix::identity(n, n));
        if b.shape() != (n, n) {
            return Err(Error::dim("inner product", n, b.nrows()));
        }
        if linalg::max_abs(&(&b - b.transpose())) > 1e-12 {
            return Err(Error::input("inner product is not symmetric"));
        }
        if n > 0 && b.clone().cholesky().is_none() {
            return Err(Error::input("inner product is not positive definite"));
        }
        let b_inv = if n > 0 {
            b.clone()
                .try_inverse()
                .ok_or_else(|| Error::input("inner product is singular"))?
        } else {
            DMatrix::zeros(0, 0)
        };
        let model = CompactGroupModel {
            algebra,
            components: comps,
            inner_product: b,
            inner_product_inv: b_inv,
        };
        model.validate()?;
        Ok(model)
    }

    /// `T^k x SU(2)^m` with the standard basis and inner product.
    pub fn standard(torus_rank: usize, su2_factors: usize) -> Result<Self> {
        Self::new(LieAlgebraBasis::standard(torus_rank, su2_factors)?, Vec::new(), None)
    }

    fn validate(&self) -> Result<()> {
        let n = self.algebra.dim();
        let b = &self.inner_product;
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            let ad = self.algebra.ad_matrix(&e);
            let r = linalg::max_abs(&(ad.transpose() * b + b * &ad));
            if r > INVARIANCE_TOL {
                return Err(Error::invariant("ad-invariance of the inner product", r, INVARIANCE_TOL));
            }
        }
        for (ci, c) in self.components.iter().enumerate().skip(1) {
            for (j, x) in self.algebra.basis().iter().enumerate() {
                let conj = &c.matrix * x * c.matrix.transpose();
                let (_, res) = self.algebra.coordinates(&conj);
                if res > CLOSURE_TOL {
                    return Err(Error::input(format!(
                        "component {ci} does not normalise the algebra (basis element {j}, residual {res:.2e})"
                    )));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..4 {
            let g = self.sample_element(&mut rng);
            let ad = self.adjoint(&g);
            let r = linalg::max_abs(&(ad.transpose() * b * &ad - b));
            if r > INVARIANCE_TOL {
                return Err(Error::invariant("Ad-invariance of the inner product", r, INVARIANCE_TOL));
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &LieAlgebraBasis {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn matrix_size(&self) -> usize {
        self.algebra.matrix_size()
    }

    pub fn components(&self) -> &[GroupElement] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn inner_product(&self) -> &DMatrix<f64> {
        &self.inner_product
    }

    /// Inner product on the dual induced by the one on the algebra.
    pub fn dual_inner_product(&self) -> &DMatrix<f64> {
        &self.inner_product_inv
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.matrix_size())
    }

    pub fn exp_algebra(&self, x: &DVector<f64>, t: f64) -> Result<GroupElement> {
        self.algebra.check_len(x)?;
        if !t.is_finite() {
            return Err(Error::NonFinite("exponential parameter".into()));
        }
        Ok(GroupElement {
            matrix: linalg::expm(&(self.algebra.realize(x) * t)),
        })
    }

    /// `components[c] * exp(x)`.
    pub fn element(&self, component: usize, x: &DVector<f64>) -> Result<GroupElement> {
        let c = self
            .components
            .get(component)
            .ok_or_else(|| Error::input(format!("no component {component}")))?;
        Ok(c.compose(&self.exp_algebra(x, 1.0)?))
    }

    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let c = rng.random_range(0..self.components.len());
        let x = gaussian_vector(rng, self.dim());
        self.element(c, &x).expect("sampled element is well formed")
    }

    /// Matrix of `Ad(g)` in the algebra basis.
    pub fn adjoint(&self, g: &GroupElement) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let gi = g.matrix.transpose();
        for (j, x) in self.algebra.basis().iter().enumerate() {
            let (c, _) = self.algebra.coordinates(&(&g.matrix * x * &gi));
            m.set_column(j, &c);
        }
        m
    }

    /// Matrix of `Ad*(g) = Ad(g)^{-T}` in the dual basis.
    pub fn coadjoint(&self, g: &GroupElement) -> DMatrix<f64> {
        self.adjoint(&g.inverse()).transpose()
    }

    pub fn adjoint_action(&self, g: &GroupElement, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.algebra.check_len(x)?;
        Ok(self.adjoint(g) * x)
    }

    pub fn coadjoint_action(&self, g: &GroupElement, xi: &DVector<f64>) -> Result<DVector<f64>> {
        self.algebra.check_len(xi)?;
        Ok(self.coadjoint(g) * xi)
    }

    /// Dual vector `B x` paired with `x` through the inner product.
    pub fn flat(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inner_product * x
    }

    pub fn dual_norm(&self, xi: &DVector<f64>) -> f64 {
        xi.dot(&(&self.inner_product_inv * xi)).max(0.0).sqrt()
    }

    pub fn adjoint_rep(&self) -> LinearRep {
        let n = self.dim();
        LinearRep {
            dim: n,
            generators: unit_vectors(n).iter().map(|e| self.algebra.ad_matrix(e)).collect(),
            components: self.components[1..].iter().map(|c| self.adjoint(c)).collect(),
            inner_product: Some(self.inner_product.clone()),
        }
    }

    pub fn coadjoint_rep(&self) -> LinearRep {
        let n = self.dim();
        LinearRep {
            dim: n,
            generators: unit_vectors(n).iter().map(|e| self.algebra.coad_matrix(e)).collect(),
            components: self.components[1..].iter().map(|c| self.coadjoint(c)).collect(),
            inner_product: Some(self.inner_product_inv.clone()),
        }
    }
}

pub fn unit_vectors(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        })
        .collect()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// A linear representation given by algebra generators and the matrices of
/// the non-identity component representatives.
#[derive(Debug, Clone)]
pub struct LinearRep {
    pub dim: usize,
    pub generators: Vec<DMatrix<f64>>,
    pub components: Vec<DMatrix<f64>>,
    /// Invariant inner product; `None` means Euclidean.
    pub inner_product: Option<DMatrix<f64>>,
}

impl LinearRep {
    fn check(&self) -> Result<()> {
        for m in self.generators.iter().chain(&self.components) {
            if m.shape() != (self.dim, self.dim) {
                return Err(Error::dim("representation matrix", self.dim, m.nrows()));
            }
        }
        Ok(())
    }

    /// Orthonormal basis of the fixed subspace `V^G`.
    pub fn fixed_point_set(&self, policy: &RankPolicy) -> Result<DMatrix<f64>> {
        self.check()?;
        let scale = linalg::family_scale(&self.generators);
        linalg::fixed_subspace(self.dim, &self.generators, &self.components, scale, policy, "fixed point set")
    }

    /// Basis of the complement of `V^G`, orthogonal for the invariant inner product.
    pub fn fixed_point_complement(&self, policy: &RankPolicy) -> Result<DMatrix<f64>> {
        let fixed = self.fixed_point_set(policy)?;
        let b = match &self.inner_product {
            Some(b) => {
                if b.shape() != (self.dim, self.dim) {
                    return Err(Error::dim("inner product", self.dim, b.nrows()));
                }
                if self.dim > 0 && b.clone().cholesky().is_none() {
                    return Err(Error::input("degenerate inner product"));
                }
                b.clone()
            }
            None => DMatrix::identity(self.dim, self.dim),
        };
        if fixed.ncols() == 0 {
            return Ok(DMatrix::identity(self.dim, self.dim));
        }
        linalg::kernel(&(b * fixed).transpose(), policy, "fixed point complement")
    }
}

/// Result of the search for an element of a component coset fixing a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CosetCertificate {
    pub component: usize,
    /// Algebra element `X` such that `components[c] * exp(X)` is the best fit found.
    pub algebra_element: DVector<f64>,
    pub residual: f64,
    pub certified: bool,
}

/// Minimises `|residual(X)|` over the algebra by Gauss-Newton with a central
/// finite-difference Jacobian, restarting from `X = 0` and `restarts - 1`
/// Gaussian initial points.
pub fn gauss_newton_fixing<F, R>(
    dim: usize,
    mut residual: F,
    rng: &mut R,
    restarts: usize,
    tol: f64,
) -> (DVector<f64>, f64)
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
    R: Rng + ?Sized,
{
    let mut best = (DVector::zeros(dim), residual(&DVector::zeros(dim)).norm());
    if dim == 0 || best.1 < tol {
        return best;
    }
    for r in 0..restarts.max(1) {
        let mut x = if r == 0 {
            DVector::zeros(dim)
        } else {
            gaussian_vector(rng, dim) * 1.5
        };
        let mut f = residual(&x);
        let mut fn_ = f.norm();
        for _ in 0..80 {
            // polish well past `tol`: fixed spaces of the element feed tight rank cutoffs
            if fn_ < tol * 1e-6 {
                break;
            }
            let h = 1e-6;
            let mut jac = DMatrix::zeros(f.len(), dim);
            for j in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let col = (residual(&xp) - residual(&xm)) / (2.0 * h);
                jac.set_column(j, &col);
            }
            let step = match linalg::pinv(&jac) {
                Ok(p) => -(p * &f),
                Err(_) => break,
            };
            let mut t = 1.0;
            let mut improved = false;
            while t > 1e-6 {
                let xn = &x + &step * t;
                let fnew = residual(&xn);
                if fnew.norm() < fn_ {
                    x = xn;
                    f = fnew;
                    fn_ = f.norm();
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if fn_ < best.1 {
            best = (x, fn_);
        }
        if best.1 < tol {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> DVector<f64> {
        unit_vectors(n)[i].clone()
    }

    #[test]
    fn su2_brackets() {
        let g = LieAlgebraBasis::standard(0, 1).unwrap();
        // [e1, e2] = -2 e3, [e2, e3] = -2 e1, [e3, e1] = -2 e2 for this basis
        let b = g.bracket(&e(3, 0), &e(3, 1)).unwrap();
        assert!((b - DVector::from_vec(vec![0.0, 0.0, -2.0])).amax() < 1e-14);
        let b = g.bracket(&e(3, 1), &e(3, 2)).unwrap();
        assert!((b - DVector::from_vec(vec![-2.0, 0.0, 0.0])).amax() < 1e-14);
        let b = g.bracket(&e(3, 2), &e(3, 0)).unwrap();
        assert!((b - DVector::from_vec(vec![0.0, -2.0, 0.0])).amax() < 1e-14);
        assert!(g.jacobi_residual() < 1e-13);
    }

    #[test]
    fn torus_is_abelian() {
        let g = LieAlgebraBasis::standard(2, 0).unwrap();
        let b = g.bracket(&e(2, 0), &e(2, 1)).unwrap();
        assert_eq!(b.amax(), 0.0);
    }

    #[test]
    fn exp_of_circle_generator() {
        let g = CompactGroupModel::standard(1, 0).unwrap();
        let h = g.exp_algebra(&e(1, 0), std::f64::consts::FRAC_PI_2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(linalg::max_abs(&(h.matrix - expected)) < 1e-14);
    }

    #[test]
    fn su2_exp_period() {
        // exp(pi e1) = -1 in SU(2)
        let g = CompactGroupModel::standard(0, 1).unwrap();
        let h = g.exp_algebra(&e(3, 0), std::f64::consts::PI).unwrap();
        assert!(linalg::max_abs(&(h.matrix + DMatrix::identity(4, 4))) < 1e-13);
    }

    #[test]
    fn coadjoint_of_torus_is_trivial() {
        let g = CompactGroupModel::standard(1, 0).unwrap();
        let h = g.exp_algebra(&e(1, 0), 0.7).unwrap();
        let xi = DVector::from_vec(vec![2.5]);
        assert!((g.coadjoint_action(&h, &xi).unwrap() - xi).amax() < 1e-14);
    }

    #[test]
    fn reflection_component_flips_circle() {
        let alg = LieAlgebraBasis::standard(1, 0).unwrap();
        let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let g = CompactGroupModel::new(alg, vec![refl], None).unwrap();
        assert_eq!(g.component_count(), 2);
        let ad = g.adjoint(&g.components()[1]);
        assert!((ad[(0, 0)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_normalising_component_rejected() {
        let alg = LieAlgebraBasis::standard(0, 1).unwrap();
        // an orientation-reversing element of O(4) swaps the two su(2) ideals of so(4)
        let mut p = DMatrix::<f64>::identity(4, 4);
        p[(0, 0)] = -1.0;
        let r = CompactGroupModel::new(alg, vec![p], None);
        assert!(r.is_err());
    }

    #[test]
    fn fixed_points_of_adjoint_reps() {
        let pol = RankPolicy::default();
        let t = CompactGroupModel::standard(1, 0).unwrap();
        assert_eq!(t.adjoint_rep().fixed_point_complement(&pol).unwrap().ncols(), 0);
        let s = CompactGroupModel::standard(0, 1).unwrap();
        assert_eq!(s.adjoint_rep().fixed_point_complement(&pol).unwrap().ncols(), 3);
        let z2 = LinearRep {
            dim: 1,
            generators: vec![],
            components: vec![DMatrix::from_element(1, 1, -1.0)],
            inner_product: None,
        };
        assert_eq!(z2.fixed_point_complement(&pol).unwrap().ncols(), 1);
    }

    #[test]
    fn degenerate_inner_product_rejected() {
        let rep = LinearRep {
            dim: 2,
            generators: vec![DMatrix::zeros(2, 2)],
            components: vec![],
            inner_product: Some(DMatrix::zeros(2, 2)),
        };
        assert!(rep.fixed_point_complement(&RankPolicy::default()).is_err());
    }

    #[test]
    fn gauss_newton_finds_half_turn() {
        // exp(t J) maps (1,0) to (-1,0) at t = pi
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = CompactGroupModel::standard(1, 0).unwrap();
        let p = DVector::from_vec(vec![1.0, 0.0]);
        let target = DVector::from_vec(vec![-1.0, 0.0]);
        let (x, res) = gauss_newton_fixing(
            1,
            |x| g.exp_algebra(x, 1.0).unwrap().matrix * &p - &target,
            &mut rng,
            5,
            1e-9,
        );
        assert!(res < 1e-9);
        assert!(((x[0].rem_euclid(2.0 * std::f64::consts::PI)) - std::f64::consts::PI).abs() < 1e-6);
    }
}
