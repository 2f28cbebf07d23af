//! Poisson brackets of polynomial functions on symplectic vector spaces and
//! numerical checks of the Poisson structure on invariants and leaves.
//!
//! Conventions: `ω(a, b) = aᵀ Ω b`, the Hamiltonian vector field solves
//! `ι_{X_f} ω = df`, so `X_f = Ω^{-T} ∇f`, and
//! `{f, h} = ω(X_f, X_h) = ∇fᵀ Ω^{-T} ∇h`. On `R^2` with `Ω = [[0, 1], [-1, 0]]`
//! this gives `{x, y} = 1`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::group::gaussian_vector;
use crate::linalg;
use crate::momentum::{HamiltonianModel, MomentumMap};
use crate::poly::Polynomial;
use crate::strata::{self, analyze_point, LeafRankReport, PointAnalysis, Stratification};

/// `½ vᵀ Q v` as a polynomial.
pub fn quadratic_polynomial(q: &DMatrix<f64>) -> Polynomial {
    let n = q.nrows();
    let mut p = Polynomial::zero(n);
    for i in 0..n {
        for j in 0..n {
            if q[(i, j)] != 0.0 {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                p = &p + &Polynomial::monomial(e, 0.5 * q[(i, j)]);
            }
        }
    }
    p
}

/// Orthonormal basis of the symmetric `Q` with `AᵀQ + QA = 0` for every
/// generator and `LᵀQL = Q` for every finite element: the invariant
/// quadratic forms of a linear action.
pub fn invariant_quadratic_forms(
    dim: usize,
    generators: &[DMatrix<f64>],
    elements: &[DMatrix<f64>],
    policy: &linalg::RankPolicy,
) -> Result<Vec<DMatrix<f64>>> {
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect();
    let basis: Vec<DMatrix<f64>> = pairs
        .iter()
        .map(|&(i, j)| {
            let mut e = DMatrix::zeros(dim, dim);
            let c = if i == j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
            e[(i, j)] = c;
            e[(j, i)] = c;
            e
        })
        .collect();
    let conditions = generators.len() + elements.len();
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    if conditions == 0 {
        return Ok(basis);
    }
    let mut m = DMatrix::zeros(conditions * dim * dim, basis.len());
    for (k, b) in basis.iter().enumerate() {
        let mut col = Vec::with_capacity(conditions * dim * dim);
        for a in generators {
            col.extend((a.transpose() * b + b * a).iter().copied());
        }
        for l in elements {
            col.extend((l.transpose() * b * l - b).iter().copied());
        }
        m.set_column(k, &DVector::from_vec(col));
    }
    let scale = generators.iter().chain(elements).fold(1.0f64, |s, a| s.max(linalg::max_abs(a)));
    let ker = linalg::kernel_ref(&m, policy, scale, "invariant quadratic forms")?;
    Ok(ker
        .column_iter()
        .map(|c| basis.iter().zip(c.iter()).fold(DMatrix::zeros(dim, dim), |acc, (b, &x)| acc + b * x))
        .collect())
}

/// Invariance pre-check for bracket closure.
pub const INVARIANCE_TOL: f64 = 1e-9;
pub const CLOSURE_TOL: f64 = 1e-8;
pub const FIBER_TOL: f64 = 1e-9;
pub const IDEAL_TOL: f64 = 1e-7;

/// A polynomial with its exact gradient.
#[derive(Debug, Clone)]
pub struct PolynomialFunction {
    pub poly: Polynomial,
    gradient: Vec<Polynomial>,
}

impl PolynomialFunction {
    pub fn new(poly: Polynomial) -> Self {
        let gradient = poly.gradient();
        PolynomialFunction { poly, gradient }
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.poly.eval(x.as_slice())
    }

    pub fn gradient_polys(&self) -> &[Polynomial] {
        &self.gradient
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self
            .gradient
            .iter()
            .map(|p| p.eval(x.as_slice()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(g))
    }
}

impl From<Polynomial> for PolynomialFunction {
    fn from(p: Polynomial) -> Self {
        PolynomialFunction::new(p)
    }
}

/// `Ω^{-T}`, after checking that `Ω` is square, antisymmetric and invertible.
pub fn poisson_tensor(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = omega.nrows();
    if omega.ncols() != n {
        return Err(Error::dim("symplectic form columns", n, omega.ncols()));
    }
    if omega.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("symplectic form".into()));
    }
    let scale = omega.amax().max(1.0);
    if (omega + omega.transpose()).amax() > 1e-12 * scale {
        return Err(Error::input("symplectic form is not antisymmetric"));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let sv = omega.clone().svd(false, false).singular_values;
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::input("symplectic form is degenerate"));
    }
    let inv = omega
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::input("symplectic form is degenerate"))?;
    Ok(inv.transpose())
}

/// `{f, h} = Σ Π_ij ∂_i f ∂_j h` computed on coefficients.
pub fn poisson_bracket(f: &PolynomialFunction, h: &PolynomialFunction, omega: &DMatrix<f64>) -> Result<PolynomialFunction> {
    let pi = poisson_tensor(omega)?;
    bracket_with_tensor(f, h, &pi)
}

fn bracket_with_tensor(f: &PolynomialFunction, h: &PolynomialFunction, pi: &DMatrix<f64>) -> Result<PolynomialFunction> {
    let n = pi.nrows();
    if f.nvars() != n || h.nvars() != n {
        return Err(Error::dim("bracket arguments", n, if f.nvars() != n { f.nvars() } else { h.nvars() }));
    }
    let mut out = Polynomial::zero(n);
    for i in 0..n {
        let fi = &f.gradient[i];
        if fi.is_zero() {
            continue;
        }
        for j in 0..n {
            let c = pi[(i, j)];
            if c == 0.0 || h.gradient[j].is_zero() {
                continue;
            }
            out = &out + &(fi * &h.gradient[j]).scale(c);
        }
    }
    Ok(PolynomialFunction::new(out))
}

/// Largest `|f(g·x) - f(x)|` over the sample points and element matrices.
pub fn invariance_residual(f: &PolynomialFunction, elements: &[DMatrix<f64>], points: &[DVector<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let fx = f.eval(x)?;
        for g in elements {
            if g.ncols() != x.len() {
                return Err(Error::dim("group element", x.len(), g.ncols()));
            }
            worst = worst.max((f.eval(&(g * x))? - fx).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub f_invariance: f64,
    pub h_invariance: f64,
    pub residual: f64,
    pub passed: bool,
}

/// Checks that `{f, h}` is invariant when `f` and `h` are. `elements` are
/// matrices of sampled group elements acting linearly and symplectically.
pub fn invariant_closure_check(
    f: &PolynomialFunction,
    h: &PolynomialFunction,
    omega: &DMatrix<f64>,
    elements: &[DMatrix<f64>],
    points: &[DVector<f64>],
) -> Result<ClosureReport> {
    let fi = invariance_residual(f, elements, points)?;
    if fi >= INVARIANCE_TOL {
        return Err(Error::invariant("invariance of the first argument", fi, INVARIANCE_TOL));
    }
    let hi = invariance_residual(h, elements, points)?;
    if hi >= INVARIANCE_TOL {
        return Err(Error::invariant("invariance of the second argument", hi, INVARIANCE_TOL));
    }
    let b = poisson_bracket(f, h, omega)?;
    let residual = invariance_residual(&b, elements, points)?;
    Ok(ClosureReport {
        f_invariance: fi,
        h_invariance: hi,
        residual,
        passed: residual < CLOSURE_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealReport {
    pub samples: usize,
    pub max_h: f64,
    pub max_bracket: f64,
    pub passed: bool,
}

/// Checks that `{f, h}` vanishes on a level set where `h` vanishes.
pub fn poisson_ideal_check(
    f: &PolynomialFunction,
    h: &PolynomialFunction,
    omega: &DMatrix<f64>,
    fiber: &[DVector<f64>],
) -> Result<IdealReport> {
    let mut max_h: f64 = 0.0;
    for x in fiber {
        max_h = max_h.max(h.eval(x)?.abs());
    }
    if max_h >= FIBER_TOL {
        return Err(Error::invariant("vanishing on the fiber samples", max_h, FIBER_TOL));
    }
    let b = poisson_bracket(f, h, omega)?;
    let mut max_bracket: f64 = 0.0;
    for x in fiber {
        max_bracket = max_bracket.max(b.eval(x)?.abs());
    }
    Ok(IdealReport {
        samples: fiber.len(),
        max_h,
        max_bracket,
        passed: max_bracket < IDEAL_TOL,
    })
}

/// Points of `J⁻¹(value)` obtained by Newton projection of Gaussian starting
/// points with `pinv(dJ)`. Starts that do not converge are dropped.
pub fn level_set_samples(
    momentum: &dyn MomentumMap,
    value: &DVector<f64>,
    count: usize,
    seed: u64,
    scale: f64,
) -> Result<Vec<DVector<f64>>> {
    if value.len() != momentum.target_dim() {
        return Err(Error::dim("momentum value", momentum.target_dim(), value.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 20 * count.max(1) {
        attempts += 1;
        let mut x = gaussian_vector(&mut rng, momentum.source_dim()) * scale;
        for _ in 0..60 {
            let r = momentum.value(&x)? - value;
            if r.norm() < 1e-14 * (1.0 + value.norm()) {
                break;
            }
            let step = linalg::pinv(&momentum.jacobian(&x)?)? * r;
            x -= step;
        }
        if (momentum.value(&x)? - value).norm() < 1e-12 * (1.0 + value.norm()) {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(Error::input("level set appears to be empty"));
    }
    Ok(out)
}

/// Leaf-rank equality at each sample: `dim 𝒮𝒩_p^{G_p}` against the fiber
/// dimension of `J` on the stratum. Points where the rank is numerically
/// ambiguous are counted and skipped.
#[derive(Debug, Clone, Serialize)]
pub struct LeafRankSampleReport {
    pub report: LeafRankReport,
    pub degenerate: usize,
}

pub fn leaf_rank_check(
    model: &HamiltonianModel,
    samples: &[DVector<f64>],
    strat: Option<&Stratification>,
    tol: &Tolerances,
) -> Result<LeafRankSampleReport> {
    let mut analyses: Vec<(Option<usize>, PointAnalysis)> = Vec::new();
    let mut degenerate = 0;
    for p in samples {
        match analyze_point(model, p, tol) {
            Ok(a) => {
                let s = strat.and_then(|s| s.assign(&a, tol.equality.max(1e-9)));
                analyses.push((s, a));
            }
            Err(e) if e.is_degenerate() => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    let refs: Vec<(Option<usize>, &PointAnalysis)> = analyses.iter().map(|(s, a)| (*s, a)).collect();
    Ok(LeafRankSampleReport {
        report: strata::leaf_rank_check(&refs),
        degenerate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub center: Vec<f64>,
    pub center_leaf_dim: usize,
    pub neighbor_leaf_dims: Vec<usize>,
    pub degenerate: usize,
    pub violations: usize,
}

impl MonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Compares the leaf dimension at `center` with the leaf dimensions at
/// `count` points within `radius` of it.
pub fn leaf_dim_monotonicity(
    model: &HamiltonianModel,
    center: &DVector<f64>,
    radius: f64,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MonotonicityReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::input("neighbourhood radius must be positive"));
    }
    let c = analyze_point(model, center, tol)?.leaf_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = Vec::with_capacity(count);
    let mut degenerate = 0;
    for _ in 0..count {
        let mut d = gaussian_vector(&mut rng, center.len());
        let n = d.norm();
        if n > 0.0 {
            d *= radius * rng.random_range(0.05..1.0) / n;
        }
        match analyze_point(model, &(center + d), tol) {
            Ok(a) => dims.push(a.leaf_dim()),
            Err(e) if e.is_degenerate() => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    let violations = dims.iter().filter(|&&d| d < c).count();
    Ok(MonotonicityReport {
        center: center.iter().copied().collect(),
        center_leaf_dim: c,
        neighbor_leaf_dims: dims,
        degenerate,
        violations,
    })
}
