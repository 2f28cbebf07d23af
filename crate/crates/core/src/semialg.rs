//! Invariant polynomials, Hilbert maps and semi-algebraic descriptions of
//! orbit spaces.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::group::{gaussian_vector, CompactGroupModel};
use crate::linalg::{self, RankPolicy};
use crate::models;
use crate::momentum::HamiltonianModel;
use crate::poly::{ComplexPolynomial, Polynomial, PolynomialMap};

const ORBIT_RESTARTS: usize = 6;

/// The group action on the source of a Hilbert map.
#[derive(Debug, Clone)]
pub enum SourceAction {
    /// `H` acting on the slice `h⁰ ⊕ V` of a model.
    Slice(Box<HamiltonianModel>),
    /// `G` acting on `g*` by the coadjoint action.
    Coadjoint(Box<CompactGroupModel>),
}

impl SourceAction {
    pub fn dim(&self) -> usize {
        match self {
            SourceAction::Slice(m) => m.slice_dim(),
            SourceAction::Coadjoint(g) => g.dim(),
        }
    }

    fn algebra_dim(&self) -> usize {
        match self {
            SourceAction::Slice(m) => m.sub_dim(),
            SourceAction::Coadjoint(g) => g.dim(),
        }
    }

    fn component_count(&self) -> usize {
        match self {
            SourceAction::Slice(m) => m.subgroup_component_count(),
            SourceAction::Coadjoint(g) => g.component_count(),
        }
    }

    /// Matrix of `components[c] * exp(x)`.
    pub fn matrix(&self, component: usize, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self {
            SourceAction::Slice(m) if component == 0 => {
                if x.len() != m.sub_dim() {
                    return Err(Error::dim("subalgebra element", m.sub_dim(), x.len()));
                }
                Ok(linalg::expm(&m.slice_generator(x)))
            }
            SourceAction::Slice(m) => Ok(m.slice_matrix(&m.subgroup_element(component, x)?)),
            SourceAction::Coadjoint(g) if component == 0 => {
                if x.len() != g.dim() {
                    return Err(Error::dim("algebra element", g.dim(), x.len()));
                }
                Ok(linalg::expm(&g.algebra().coad_matrix(x)))
            }
            SourceAction::Coadjoint(g) => Ok(g.coadjoint(&g.element(component, x)?)),
        }
    }

    pub fn sample_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        match self {
            SourceAction::Slice(m) => m.slice_matrix(&m.sample_subgroup_element(rng)),
            SourceAction::Coadjoint(g) => g.coadjoint(&g.sample_element(rng)),
        }
    }

    /// `min_g |g·p - q|`, found by Gauss-Newton with restarts in each
    /// component. The result is an upper bound for the true distance.
    pub fn orbit_distance<R: Rng + ?Sized>(&self, p: &DVector<f64>, q: &DVector<f64>, rng: &mut R) -> f64 {
        let dim = self.algebra_dim();
        let residual = |c: usize, x: &DVector<f64>| match self.matrix(c, x) {
            Ok(m) => m * p - q,
            Err(_) => DVector::from_element(p.len(), f64::INFINITY),
        };
        let mut best = f64::INFINITY;
        for c in 0..self.component_count() {
            for r in 0..ORBIT_RESTARTS {
                let x0 = if r == 0 {
                    DVector::zeros(dim)
                } else {
                    gaussian_vector(rng, dim) * 2.0
                };
                best = best.min(local_min(dim, |x| residual(c, x), x0));
                if best < 1e-13 * (1.0 + q.norm()) {
                    return best;
                }
            }
        }
        best
    }
}

/// Gauss-Newton descent on `|f|` with a finite-difference Jacobian, stopped
/// when a step no longer improves the norm by a relative `1e-12`.
fn local_min<F: Fn(&DVector<f64>) -> DVector<f64>>(dim: usize, f: F, mut x: DVector<f64>) -> f64 {
    let mut fx = f(&x);
    let mut n = fx.norm();
    if dim == 0 {
        return n;
    }
    let h = 1e-6;
    for _ in 0..60 {
        let mut jac = DMatrix::zeros(fx.len(), dim);
        for j in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            jac.set_column(j, &((f(&xp) - f(&xm)) / (2.0 * h)));
        }
        let Ok(pinv) = linalg::pinv(&jac) else { break };
        let step = -(pinv * &fx);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-4 {
            let xn = &x + &step * t;
            let fnew = f(&xn);
            if fnew.norm() < n {
                accepted = Some((xn, fnew));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gain = n - fnew.norm();
        x = xn;
        fx = fnew;
        n = fx.norm();
        if gain <= 1e-12 * (1.0 + n) {
            break;
        }
    }
    n
}

/// A polynomial map whose components generate the invariants of an action.
#[derive(Debug, Clone)]
pub struct HilbertMap {
    pub map: PolynomialMap,
    pub action: SourceAction,
}

impl HilbertMap {
    pub fn new(map: PolynomialMap, action: SourceAction) -> Result<Self> {
        if map.source_dim != action.dim() {
            return Err(Error::dim("Hilbert map source", action.dim(), map.source_dim));
        }
        Ok(HilbertMap { map, action })
    }

    pub fn source_dim(&self) -> usize {
        self.map.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.map.target_dim()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.map.eval(x)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.map.jacobian(x)
    }

    /// Largest `|ρ(g·x) - ρ(x)|`, scaled by `1 + |ρ(x)|`, over `elements`
    /// sampled group elements and the given points.
    pub fn invariance_residual(&self, points: &[DVector<f64>], elements: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<_> = (0..elements).map(|_| self.action.sample_matrix(&mut rng)).collect();
        let mut worst: f64 = 0.0;
        for x in points {
            let fx = self.eval(x)?;
            let scale = 1.0 + fx.norm();
            for m in &mats {
                worst = worst.max((self.eval(&(m * x))? - &fx).norm() / scale);
            }
        }
        Ok(worst)
    }
}

/// The invariant theory attached to a built-in example: `ρ` on the slice,
/// `σ` on `g*` and the polynomial map `P` with `σ ∘ J = P ∘ ρ`.
#[derive(Debug, Clone)]
pub struct HilbertData {
    pub id: String,
    pub rho: HilbertMap,
    pub sigma: HilbertMap,
    pub relation: PolynomialMap,
    /// `None` when the source of `ρ` is `g*` itself and `J` is the identity.
    pub model: Option<HamiltonianModel>,
}

impl HilbertData {
    pub fn momentum(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.model {
            Some(m) => m.slice_momentum(p),
            None => Ok(p.clone()),
        }
    }
}

fn var(n: usize, i: usize) -> Polynomial {
    Polynomial::var(n, i)
}

fn sum_squares(n: usize, idx: impl IntoIterator<Item = usize>) -> Polynomial {
    idx.into_iter()
        .fold(Polynomial::zero(n), |acc, i| &acc + &var(n, i).pow(2))
}

/// Built-in Hilbert maps by id: `su2su2-circle`, `su2-adjoint` and
/// `torus-weights(k;w1;w2;...)` with each weight a comma separated vector of
/// length `k`.
pub fn builtin_hilbert_maps(id: &str) -> Result<HilbertData> {
    match id {
        "su2su2-circle" => su2su2_hilbert(),
        "su2-adjoint" => su2_adjoint_hilbert(),
        _ => {
            let (rank, weights) = parse_torus_id(id)?;
            torus_hilbert(id, rank, &weights, default_degree_bound(&weights))
        }
    }
}

fn parse_torus_id(id: &str) -> Result<(usize, Vec<Vec<i32>>)> {
    let inner = id
        .strip_prefix("torus-weights(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::input(format!("unknown Hilbert map id {id:?}")))?;
    let mut parts = inner.split(';');
    let rank: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::input(format!("bad torus rank in {id:?}")))?;
    let weights = parts
        .map(|w| {
            w.split(',')
                .map(|c| c.trim().parse::<i32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::input(format!("bad weight {w:?} in {id:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if rank == 0 || weights.is_empty() {
        return Err(Error::input(format!("torus id {id:?} needs a rank and at least one weight")));
    }
    if let Some(w) = weights.iter().find(|w| w.len() != rank) {
        return Err(Error::dim("torus weight", rank, w.len()));
    }
    Ok((rank, weights))
}

fn default_degree_bound(weights: &[Vec<i32>]) -> u32 {
    let max_w = weights.iter().flatten().map(|w| w.unsigned_abs()).max().unwrap_or(1).max(1);
    (2 * max_w * weights.len() as u32).clamp(2, 10)
}

/// Sign-compatible indecomposable nonzero `c ∈ Z^n` with `Σ c_j w_j = 0` and
/// `|c|_1 ≤ bound`, one of each pair `±c`.
fn weight_zero_exponents(weights: &[Vec<i32>], bound: u32) -> Vec<Vec<i32>> {
    let n = weights.len();
    let k = weights.first().map(|w| w.len()).unwrap_or(0);
    let in_kernel = |c: &[i32]| (0..k).all(|a| c.iter().zip(weights).map(|(ci, w)| ci * w[a]).sum::<i32>() == 0);
    let b = bound as i32;
    let mut all = Vec::new();
    let mut c = vec![-b; n];
    loop {
        let l1: i32 = c.iter().map(|x| x.abs()).sum();
        if l1 > 0 && l1 <= b && in_kernel(&c) {
            all.push(c.clone());
        }
        let mut i = 0;
        while i < n {
            c[i] += 1;
            if c[i] <= b {
                break;
            }
            c[i] = -b;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    // A reduced monomial with |z_j|^2 factors removed is indecomposable when
    // no proper sign-compatible part of it also has weight zero.
    let decomposes = |c: &Vec<i32>| {
        all.iter().any(|d| {
            d != c && d.iter().zip(c).all(|(&di, &ci)| di * ci >= 0 && di.abs() <= ci.abs())
        })
    };
    all.iter()
        .filter(|c| {
            let lead = c.iter().find(|&&x| x != 0).copied().unwrap_or(0);
            lead > 0 && !decomposes(c)
        })
        .cloned()
        .collect()
}

/// Generators of the `T^k`-invariants on `C^n`: every `|z_j|^2` followed by
/// the real and imaginary parts of the indecomposable weight-zero monomials
/// `z^a z̄^b` with disjoint supports.
pub fn torus_invariants(weights: &[Vec<i32>], bound: u32) -> Vec<Polynomial> {
    let n = weights.len();
    let nv = 2 * n;
    let mut gens: Vec<Polynomial> = (0..n).map(|j| sum_squares(nv, [2 * j, 2 * j + 1])).collect();
    for c in weight_zero_exponents(weights, bound) {
        let mut m = ComplexPolynomial::one(nv);
        for (j, &cj) in c.iter().enumerate() {
            let z = ComplexPolynomial::z(nv, j);
            let f = if cj > 0 { z } else { z.conj() };
            for _ in 0..cj.unsigned_abs() {
                m = m.mul(&f);
            }
        }
        gens.push(m.re);
        gens.push(m.im);
    }
    gens
}

fn torus_hilbert(id: &str, rank: usize, weights: &[Vec<i32>], bound: u32) -> Result<HilbertData> {
    let model = models::torus_weights(id, rank, weights)?;
    let nv = model.slice_dim();
    let gens = torus_invariants(weights, bound);
    let nrho = gens.len();
    let rho = HilbertMap::new(
        PolynomialMap::new(nv, gens)?,
        SourceAction::Slice(Box::new(model.clone())),
    )?;
    let group = CompactGroupModel::standard(rank, 0)?;
    let sigma = HilbertMap::new(
        PolynomialMap::new(rank, (0..rank).map(|a| var(rank, a)).collect())?,
        SourceAction::Coadjoint(Box::new(group)),
    )?;
    // J_a = -1/2 Σ_j w_ja |z_j|^2, and |z_j|^2 is generator j.
    let relation = (0..rank)
        .map(|a| {
            weights.iter().enumerate().fold(Polynomial::zero(nrho), |acc, (j, w)| {
                &acc + &var(nrho, j).scale(-0.5 * w[a] as f64)
            })
        })
        .collect();
    Ok(HilbertData {
        id: id.to_string(),
        rho,
        sigma,
        relation: PolynomialMap::new(nrho, relation)?,
        model: Some(model),
    })
}

fn su2_adjoint_hilbert() -> Result<HilbertData> {
    let group = CompactGroupModel::standard(0, 1)?;
    // -Tr(X^2) = 2 |x|^2 in the standard basis.
    let norm = sum_squares(3, 0..3).scale(2.0);
    let action = SourceAction::Coadjoint(Box::new(group));
    let rho = HilbertMap::new(PolynomialMap::new(3, vec![norm])?, action)?;
    Ok(HilbertData {
        id: "su2-adjoint".to_string(),
        sigma: rho.clone(),
        rho,
        relation: PolynomialMap::new(1, vec![var(1, 0)])?,
        model: None,
    })
}

/// `ρ = (θ, |z1|², |z2|², Re z1 z̄2, Im z1 z̄2)` on the slice,
/// `σ = (|ξ1|², |ξ2|²)` on `su(2)* ⊕ su(2)*` and `P = (x1² + x2, x1² + x3)`.
fn su2su2_hilbert() -> Result<HilbertData> {
    let model = models::su2su2_circle()?;
    let n = 5;
    let (a1, b1, a2, b2) = (var(n, 1), var(n, 2), var(n, 3), var(n, 4));
    let rho_comps = vec![
        var(n, 0),
        sum_squares(n, [1, 2]),
        sum_squares(n, [3, 4]),
        &(&a1 * &a2) + &(&b1 * &b2),
        &(&b1 * &a2) - &(&a1 * &b2),
    ];
    let rho = HilbertMap::new(
        PolynomialMap::new(n, rho_comps)?,
        SourceAction::Slice(Box::new(model.clone())),
    )?;
    let sigma = HilbertMap::new(
        PolynomialMap::new(6, vec![sum_squares(6, 0..3), sum_squares(6, 3..6)])?,
        SourceAction::Coadjoint(Box::new(model.group().clone())),
    )?;
    let x1sq = var(5, 0).pow(2);
    let relation = PolynomialMap::new(5, vec![&x1sq + &var(5, 1), &x1sq + &var(5, 2)])?;
    Ok(HilbertData {
        id: "su2su2-circle".to_string(),
        rho,
        sigma,
        relation,
        model: Some(model),
    })
}

/// Largest `|σ(J(v)) - P(ρ(v))|` over the samples.
pub fn commuting_square_residual(data: &HilbertData, samples: &[DVector<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in samples {
        let left = data.sigma.eval(&data.momentum(v)?)?;
        let right = data.relation.eval(&data.rho.eval(v)?)?;
        worst = worst.max((left - right).norm());
    }
    Ok(worst)
}

/// Fraction of sampled pairs violating separation: orbit distance above
/// `orbit_gap` with image distance at most `image_gap`.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub pairs: usize,
    pub tested: usize,
    pub violations: usize,
    pub min_image_distance: f64,
}

/// Samples pairs `(p, q)`, half of them as small perturbations of an orbit
/// point of `p`, and checks that `ρ` separates the pairs whose orbits are
/// more than `orbit_gap` apart.
pub fn separation_check(
    map: &HilbertMap,
    pairs: usize,
    orbit_gap: f64,
    image_gap: f64,
    seed: u64,
) -> Result<SeparationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = map.source_dim();
    let mut report = SeparationReport {
        pairs,
        tested: 0,
        violations: 0,
        min_image_distance: f64::INFINITY,
    };
    for i in 0..pairs {
        let p = gaussian_vector(&mut rng, n);
        let q = if i % 2 == 0 {
            gaussian_vector(&mut rng, n)
        } else {
            let g = map.action.sample_matrix(&mut rng);
            let scale = 10f64.powf(rng.random_range(-2.5..0.0));
            g * &p + gaussian_vector(&mut rng, n) * scale
        };
        if map.action.orbit_distance(&p, &q, &mut rng) <= orbit_gap {
            continue;
        }
        report.tested += 1;
        let d = (map.eval(&p)? - map.eval(&q)?).norm();
        report.min_image_distance = report.min_image_distance.min(d);
        if d <= image_gap {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `{x : e(x) = 0, s(x) > 0, n(x) ≥ 0, and for each group some member > 0}`.
#[derive(Debug, Clone, Serialize)]
pub struct SemiAlgDescription {
    pub name: String,
    pub dim: usize,
    pub equalities: Vec<Polynomial>,
    pub strict: Vec<Polynomial>,
    pub nonstrict: Vec<Polynomial>,
    pub strict_any: Vec<Vec<Polynomial>>,
}

impl SemiAlgDescription {
    pub fn new(name: &str, dim: usize) -> Self {
        SemiAlgDescription {
            name: name.to_string(),
            dim,
            equalities: Vec::new(),
            strict: Vec::new(),
            nonstrict: Vec::new(),
            strict_any: Vec::new(),
        }
    }

    fn polys(&self) -> impl Iterator<Item = &Polynomial> {
        self.equalities
            .iter()
            .chain(&self.strict)
            .chain(&self.nonstrict)
            .chain(self.strict_any.iter().flatten())
    }

    pub fn validate(&self) -> Result<()> {
        match self.polys().find(|p| p.nvars() != self.dim) {
            Some(p) => Err(Error::dim(format!("constraint of {}", self.name), self.dim, p.nvars())),
            None => Ok(()),
        }
    }

    /// Equalities hold to `tol.equality`, strict inequalities exceed
    /// `tol.strict_margin`, non-strict ones are above `-tol.equality`.
    pub fn member(&self, x: &[f64], tol: &Tolerances) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::dim(format!("point tested against {}", self.name), self.dim, x.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("semi-algebraic membership point".into()));
        }
        for p in &self.equalities {
            if p.eval(x)?.abs() > tol.equality {
                return Ok(false);
            }
        }
        for p in &self.strict {
            if p.eval(x)? <= tol.strict_margin {
                return Ok(false);
            }
        }
        for p in &self.nonstrict {
            if p.eval(x)? < -tol.equality {
                return Ok(false);
            }
        }
        for group in &self.strict_any {
            let mut any = false;
            for p in group {
                if p.eval(x)? > tol.strict_margin {
                    any = true;
                    break;
                }
            }
            if !any {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Orthonormal basis of the kernel of the Jacobian of the equalities at `x`.
    pub fn tangent(&self, x: &DVector<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
        if self.equalities.is_empty() {
            return Ok(DMatrix::identity(self.dim, self.dim));
        }
        let map = PolynomialMap::new(self.dim, self.equalities.clone())?;
        let jac = map.jacobian(x)?;
        linalg::kernel(&jac, policy, "stratum tangent")
    }
}

/// Index of the first description containing `x`.
pub fn descriptor_index(descs: &[SemiAlgDescription], x: &[f64], tol: &Tolerances) -> Result<Option<usize>> {
    for (i, d) in descs.iter().enumerate() {
        if d.member(x, tol)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Image of `ρ` for the `SU(2) x SU(2)` example:
/// `x2 ≥ 0, x3 ≥ 0, x4² + x5² = x2 x3`.
pub fn image_descriptor_su2su2() -> SemiAlgDescription {
    let mut d = SemiAlgDescription::new("image", 5);
    d.equalities.push(relation_su2su2());
    d.nonstrict = vec![var(5, 1), var(5, 2)];
    d
}

fn relation_su2su2() -> Polynomial {
    &(&var(5, 3).pow(2) + &var(5, 4).pow(2)) - &(&var(5, 1) * &var(5, 2))
}

/// The two orbit-type strata of the example: `x2 = x3 = x4 = x5 = 0`, and
/// the rest of the image.
pub fn coarse_strata_su2su2() -> [SemiAlgDescription; 2] {
    let mut low = SemiAlgDescription::new("orbit-type-fixed", 5);
    low.equalities = (1..5).map(|i| var(5, i)).collect();
    let mut high = image_descriptor_su2su2();
    high.name = "orbit-type-free".into();
    high.strict_any = vec![vec![var(5, 1), var(5, 2)]];
    [low, high]
}

/// The six strata of the example as pieces of the image in `R^5`.
pub fn strata_descriptors_su2su2() -> Vec<SemiAlgDescription> {
    let x = |i: usize| var(5, i - 1);
    let eqs = |idx: &[usize]| idx.iter().map(|&i| x(i)).collect::<Vec<_>>();
    let mut out = Vec::new();
    let mut d = SemiAlgDescription::new("axis-negative", 5);
    d.equalities = eqs(&[2, 3, 4, 5]);
    d.strict = vec![-&x(1)];
    out.push(d);
    let mut d = SemiAlgDescription::new("origin", 5);
    d.equalities = eqs(&[1, 2, 3, 4, 5]);
    out.push(d);
    let mut d = SemiAlgDescription::new("axis-positive", 5);
    d.equalities = eqs(&[2, 3, 4, 5]);
    d.strict = vec![x(1)];
    out.push(d);
    let mut d = SemiAlgDescription::new("plane-first", 5);
    d.equalities = eqs(&[1, 3, 4, 5]);
    d.strict = vec![x(2)];
    out.push(d);
    let mut d = SemiAlgDescription::new("plane-second", 5);
    d.equalities = eqs(&[1, 2, 4, 5]);
    d.strict = vec![x(3)];
    out.push(d);
    let x1sq = x(1).pow(2);
    let mut d = SemiAlgDescription::new("open", 5);
    d.equalities = vec![relation_su2su2()];
    d.strict = vec![&x1sq + &x(2), &x1sq + &x(3)];
    d.strict_any = vec![vec![x(2), x(3)]];
    out.push(d);
    out
}

/// `dim T - rank(dP|_T)` at `x`, with `T` the tangent of the description.
pub fn fiber_dimension(
    desc: &SemiAlgDescription,
    relation: &PolynomialMap,
    x: &DVector<f64>,
    policy: &RankPolicy,
) -> Result<usize> {
    let t = desc.tangent(x, policy)?;
    if t.ncols() == 0 {
        return Ok(0);
    }
    let r = linalg::rank(&(relation.jacobian(x)? * &t), policy, "fiber rank")?;
    Ok(t.ncols() - r)
}

/// A fiber of `P` over `(y1, y2)` in the open stratum, in coordinates
/// `(x1, x4, x5)`.
#[derive(Debug, Clone, Serialize)]
pub struct FiberSurface {
    pub y: [f64; 2],
    pub descriptor: SemiAlgDescription,
    /// Points `(x1, x4, x5, x2, x3)` of the fiber.
    pub samples: Vec<[f64; 5]>,
    /// Boundary points `(x1, x4, x5)` of the closure missing from the fiber.
    pub punctures: Vec<[f64; 3]>,
}

pub const FIBER_CSV_HEADER: [&str; 5] = ["x1", "x4", "x5", "x2", "x3"];

/// Samples the fiber `x4² + x5² = (y1 - x1²)(y2 - x1²), x1² < max(y1, y2)`.
pub fn fiber_surface(y1: f64, y2: f64, n: usize, seed: u64, tol: &Tolerances) -> Result<FiberSurface> {
    if !(y1.is_finite() && y2.is_finite()) {
        return Err(Error::NonFinite("fiber value".into()));
    }
    if y1 <= 0.0 || y2 <= 0.0 {
        return Err(Error::input(format!("fiber value ({y1}, {y2}) must be positive")));
    }
    let x = |i: usize| var(3, i);
    let x1sq = x(0).pow(2);
    let mut descriptor = SemiAlgDescription::new("fiber", 3);
    let rhs = &(&Polynomial::constant(3, y1) - &x1sq) * &(&Polynomial::constant(3, y2) - &x1sq);
    descriptor.equalities = vec![&(&x(1).pow(2) + &x(2).pow(2)) - &rhs];
    descriptor.strict = vec![&Polynomial::constant(3, y1.max(y2)) - &x1sq];

    let m = y1.min(y2).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let x1: f64 = loop {
                let t = rng.random_range(-m..m);
                if t.abs() < m {
                    break t;
                }
            };
            let x2 = y1 - x1 * x1;
            let x3 = y2 - x1 * x1;
            let r = (x2 * x3).max(0.0).sqrt();
            let phi = rng.random_range(0.0..2.0 * PI);
            [x1, r * phi.cos(), r * phi.sin(), x2, x3]
        })
        .collect();
    let mut punctures = Vec::new();
    for s in [-m, m] {
        let p = [s, 0.0, 0.0];
        if !descriptor.member(&p, tol)? {
            punctures.push(p);
        }
    }
    Ok(FiberSurface {
        y: [y1, y2],
        descriptor,
        samples,
        punctures,
    })
}

/// Writes fiber samples as CSV with columns `x1,x4,x5,x2,x3`.
pub fn fiber_csv(fiber: &FiberSurface) -> String {
    let mut s = FIBER_CSV_HEADER.join(",");
    s.push('\n');
    for row in &fiber.samples {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Reorders a fiber sample to the coordinates `(x1, ..., x5)` of `R^5`.
pub fn fiber_point(sample: &[f64; 5]) -> [f64; 5] {
    [sample[0], sample[3], sample[4], sample[1], sample[2]]
}

/// Samples of the slice mapped by `ρ`, for tests of image descriptions.
pub fn image_samples(data: &HilbertData, count: usize, seed: u64, zero_prob: f64) -> Result<Vec<DVector<f64>>> {
    crate::strata::random_samples(data.rho.source_dim(), count, seed, zero_prob)
        .iter()
        .map(|p| data.rho.eval(p))
        .collect()
}
