//! Verification suites run by `verify`.

use std::str::FromStr;
use std::time::Instant;

use momap::config::Tolerances;
use momap::group::gaussian_vector;
use momap::linalg;
use momap::momentum::{self, kernel_image_identities, quadratic_differential_check, HamiltonianModel, MomentumMap, QuadraticMomentumMap};
use momap::poisson::{self, PolynomialFunction};
use momap::poly::Polynomial;
use momap::strata::{analyze_point, random_samples};
use momap::symplectic::{self, complex_omega, SymplecticRep};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model_file::SamplingSpec;
use crate::report::{CheckResult, Status};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    MomentumCondition,
    InfMomAct,
    SesDims,
    QuadraticDifferential,
    BracketClosure,
    Ideal,
    LeafRank,
    Monotonicity,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::MomentumCondition,
        Suite::InfMomAct,
        Suite::SesDims,
        Suite::QuadraticDifferential,
        Suite::BracketClosure,
        Suite::Ideal,
        Suite::LeafRank,
        Suite::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MomentumCondition => "momentum-condition",
            Suite::InfMomAct => "infmomact",
            Suite::SesDims => "ses-dims",
            Suite::QuadraticDifferential => "quadratic-differential",
            Suite::BracketClosure => "bracket-closure",
            Suite::Ideal => "ideal",
            Suite::LeafRank => "leaf-rank",
            Suite::Monotonicity => "monotonicity",
        }
    }
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                CliError::Input(format!("unknown suite {s:?}; known suites: {}", names.join(", ")))
            })
    }
}

/// Parses a comma separated suite list, keeping the canonical order and
/// dropping repeats.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>, CliError> {
    let chosen = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Suite::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if chosen.is_empty() {
        return Err(CliError::Input("empty suite list".into()));
    }
    Ok(Suite::ALL.into_iter().filter(|s| chosen.contains(s)).collect())
}

/// The linear symplectic part of a model that the bracket and momentum
/// identities are evaluated on: `V` itself, or, when `V = 0`, the
/// coordinates of the slice moved by `H` with the standard complex form.
#[derive(Debug, Clone)]
pub struct SymplecticBlock {
    pub coords: Vec<usize>,
    pub rep: SymplecticRep,
    pub momentum: QuadraticMomentumMap,
    /// Finite isotropy-free component actions on the block.
    pub components: Vec<DMatrix<f64>>,
    from_rep: bool,
}

impl SymplecticBlock {
    pub fn of(model: &HamiltonianModel) -> Option<Self> {
        if model.rep_dim() > 0 {
            let components = model.subgroup_components().iter().map(|c| c.on_rep.clone()).collect();
            return Some(SymplecticBlock {
                coords: (model.annihilator_dim()..model.slice_dim()).collect(),
                rep: model.rep().clone(),
                momentum: model.rep_momentum().clone(),
                components,
                from_rep: true,
            });
        }
        let gens = model.slice_generators();
        let n = model.slice_dim();
        let cut = 1e-12 * linalg::family_scale(&gens).max(1.0);
        let coords: Vec<usize> = (0..n)
            .filter(|&i| gens.iter().any(|g| g.row(i).amax() > cut || g.column(i).amax() > cut))
            .collect();
        if coords.is_empty() || coords.len() % 2 != 0 || model.subgroup_component_count() > 1 {
            return None;
        }
        let restrict = |m: &DMatrix<f64>| DMatrix::from_fn(coords.len(), coords.len(), |i, j| m[(coords[i], coords[j])]);
        let block_gens: Vec<_> = gens.iter().map(restrict).collect();
        let rep = SymplecticRep::new(
            model.sub_algebra().clone(),
            complex_omega(coords.len() / 2),
            block_gens,
            Vec::new(),
        )
        .ok()?;
        let momentum = QuadraticMomentumMap::from_rep(&rep);
        Some(SymplecticBlock {
            coords,
            rep,
            momentum,
            components: Vec::new(),
            from_rep: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Matrices of sampled subgroup elements acting on the block.
    pub fn sample_elements(&self, model: &HamiltonianModel, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let h = model.sample_subgroup_element(&mut rng);
                if self.from_rep {
                    h.on_rep
                } else {
                    let s = model.slice_matrix(&h);
                    DMatrix::from_fn(self.dim(), self.dim(), |i, j| s[(self.coords[i], self.coords[j])])
                }
            })
            .collect()
    }

    /// Basis of the invariant quadratic forms as polynomials.
    pub fn invariants(&self, tol: &Tolerances) -> Result<Vec<Polynomial>, CliError> {
        let forms = poisson::invariant_quadratic_forms(self.dim(), self.rep.generators(), &self.components, &tol.rank)?;
        Ok(forms.iter().map(poisson::quadratic_polynomial).collect())
    }

    /// The components of the block momentum map as polynomials.
    pub fn momentum_polys(&self) -> Vec<Polynomial> {
        self.momentum.forms().iter().map(poisson::quadratic_polynomial).collect()
    }
}

fn block_samples(block: &SymplecticBlock, count: usize, seed: u64) -> Vec<DVector<f64>> {
    random_samples(block.dim(), count, seed, 0.3)
}

fn skipped(name: &str, reason: &str) -> CheckResult {
    CheckResult::from_residual(name, 0.0, 1.0, 0).with_detail(serde_json::json!({ "skipped": reason }))
}

fn degenerate(mut c: CheckResult) -> CheckResult {
    if c.status == Status::Pass {
        c.status = Status::Degenerate;
    }
    c
}

pub struct SuiteContext<'a> {
    pub model: &'a HamiltonianModel,
    pub sampling: &'a SamplingSpec,
    pub tol: &'a Tolerances,
}

/// Runs the suites in parallel; results keep the order of `suites`.
pub fn run_suites(ctx: &SuiteContext<'_>, suites: &[Suite]) -> Vec<(CheckResult, f64)> {
    suites
        .par_iter()
        .map(|&s| {
            let t = Instant::now();
            let r = run_suite(ctx, s).unwrap_or_else(|e| {
                let status = match &e {
                    CliError::Core(c) if c.is_degenerate() => Status::Degenerate,
                    _ => Status::Fail,
                };
                CheckResult {
                    name: s.name().into(),
                    status,
                    max_residual: f64::INFINITY,
                    tolerance: 0.0,
                    samples: 0,
                    detail: serde_json::json!({ "error": e.to_string() }),
                }
            });
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

pub fn run_suite(ctx: &SuiteContext<'_>, suite: Suite) -> Result<CheckResult, CliError> {
    let seed = ctx.sampling.seed.wrapping_add(suite as u64 * 0x9e37);
    let n = ctx.sampling.samples.max(1);
    match suite {
        Suite::MomentumCondition => momentum_condition(ctx, n, seed),
        Suite::InfMomAct => infmomact(ctx, n, seed),
        Suite::SesDims => ses_dims(ctx, n, seed),
        Suite::QuadraticDifferential => quadratic_differential(ctx, n, seed),
        Suite::BracketClosure => bracket_closure(ctx, n, seed),
        Suite::Ideal => ideal(ctx, n, seed),
        Suite::LeafRank => leaf_rank(ctx, n, seed),
        Suite::Monotonicity => monotonicity(ctx, seed),
    }
}

const MOMENTUM_TOL: f64 = 1e-8;

fn momentum_condition(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let m = ctx.model;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block_res: f64 = 0.0;
    let mut samples = 0;
    if let Some(b) = SymplecticBlock::of(m) {
        for p in block_samples(&b, n, seed) {
            let xi = gaussian_vector(&mut rng, m.sub_dim());
            let r = momentum::momentum_condition_residual(&b.rep, &b.momentum, &xi, &p)?;
            block_res = block_res.max(r / (1.0 + p.norm() * xi.norm()));
            samples += 1;
        }
    }
    let mut equiv: f64 = 0.0;
    let jmap = m.slice_momentum_map();
    for p in random_samples(m.slice_dim(), n, seed ^ 1, 0.3) {
        let h = m.sample_subgroup_element(&mut rng);
        let lhs = jmap.value(&(m.slice_matrix(&h) * &p))?;
        let rhs = m.group().coadjoint(&h.in_group) * jmap.value(&p)?;
        equiv = equiv.max((lhs - rhs).amax() / (1.0 + p.norm_squared()));
        samples += 1;
    }
    let worst = block_res.max(equiv);
    Ok(CheckResult::from_residual("momentum-condition", worst, MOMENTUM_TOL, samples)
        .with_detail(serde_json::json!({ "momentum_condition": block_res, "equivariance": equiv })))
}

fn infmomact(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let Some(b) = SymplecticBlock::of(ctx.model) else {
        return Ok(skipped("infmomact", "no symplectic block"));
    };
    let mut kernel: f64 = 0.0;
    let mut iso: f64 = 0.0;
    let mut degen = 0;
    let mut samples = 0;
    for p in block_samples(&b, n, seed) {
        match kernel_image_identities(&b.rep, &b.momentum, &p, &ctx.tol.rank) {
            Ok(r) => {
                kernel = kernel.max(r.kernel_distance);
                iso = iso.max(r.isotropy_distance);
                samples += 1;
            }
            Err(e) if e.is_degenerate() => degen += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let c = CheckResult::from_residual("infmomact", kernel.max(iso), ctx.tol.principal_angle, samples)
        .with_detail(serde_json::json!({ "kernel_distance": kernel, "isotropy_distance": iso, "degenerate": degen }));
    Ok(if samples == 0 && degen > 0 { degenerate(c) } else { c })
}

#[derive(Debug, Default, Serialize)]
struct SesCounts {
    block_points: usize,
    slice_points: usize,
    mismatches: usize,
    degenerate: usize,
    first_mismatch: Option<String>,
}

fn ses_dims(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let m = ctx.model;
    let pol = &ctx.tol.rank;
    let mut c = SesCounts::default();
    let note = |c: &mut SesCounts, what: String| {
        c.mismatches += 1;
        c.first_mismatch.get_or_insert(what);
    };
    if let Some(b) = SymplecticBlock::of(m) {
        let nh = m.sub_dim();
        let alg = b.rep.algebra();
        for p in block_samples(&b, n, seed) {
            let sn = match symplectic::symplectic_normal_space(&b.rep, &b.momentum, &p, pol, ctx.tol.principal_angle) {
                Ok(sn) => sn,
                Err(e) if e.is_degenerate() => {
                    c.degenerate += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            c.block_points += 1;
            let hp = sn.isotropy.ncols();
            let mu = b.momentum.value(&p)?;
            let coad = DMatrix::from_columns(
                &(0..nh)
                    .map(|i| {
                        let mut e = DVector::zeros(nh);
                        e[i] = 1.0;
                        alg.coad_matrix(&e) * &mu
                    })
                    .collect::<Vec<_>>(),
            );
            let hmu = if nh == 0 {
                0
            } else {
                linalg::kernel_ref(&coad, pol, linalg::max_abs(&coad).max(mu.norm()), "momentum isotropy")?.ncols()
            };
            let rank_dj = linalg::rank(&b.momentum.jacobian(&p)?, pol, "dJ")?;
            let checks = [
                ("dim h·p = dim h - dim h_p", sn.orbit_tangent.ncols(), nh - hp),
                ("rank dJ = dim h - dim h_p", rank_dj, nh - hp),
                ("dim (h·p ∩ ker dJ) = dim h_μ - dim h_p", sn.intersection.ncols(), hmu.saturating_sub(hp)),
                ("dim 𝒮𝒩 = dim V - dim h - dim h_μ + 2 dim h_p", sn.dim(), b.dim() + 2 * hp - nh - hmu),
            ];
            for (name, got, want) in checks {
                if got != want {
                    note(&mut c, format!("{name}: {got} != {want} at {:?}", p.as_slice()));
                }
            }
        }
    }
    for p in random_samples(m.slice_dim(), n, seed ^ 2, 0.5) {
        match analyze_point(m, &p, ctx.tol) {
            Ok(a) => {
                c.slice_points += 1;
                let want = (a.model_dim + 2 * a.orbit_isotropy_dim()) as i64 - (a.group_dim + a.leaf_isotropy_dim()) as i64;
                if want != a.normal_dim() as i64 {
                    note(&mut c, format!("slice 𝒮𝒩 dimension {} != {want}", a.normal_dim()));
                }
            }
            Err(e) if e.is_degenerate() => c.degenerate += 1,
            Err(momap::Error::Invariant { name, .. }) => note(&mut c, name),
            Err(e) => return Err(e.into()),
        }
    }
    let samples = c.block_points + c.slice_points;
    let r = CheckResult::from_residual("ses-dims", c.mismatches as f64, 0.0, samples);
    let r = r.with_detail(&c);
    Ok(if samples == 0 { degenerate(r) } else { r })
}

fn quadratic_differential(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let Some(b) = SymplecticBlock::of(ctx.model) else {
        return Ok(skipped("quadratic-differential", "no symplectic block"));
    };
    let pol = &ctx.tol.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut degen = 0;
    let mut isotropic = 0;
    // points with isotropy are where the identity has content
    for p in random_samples(b.dim(), n, seed, 0.6) {
        let ker = linalg::kernel(&b.momentum.jacobian(&p)?, pol, "ker dJ")?;
        if ker.ncols() == 0 {
            continue;
        }
        let w = &ker * gaussian_vector(&mut rng, ker.ncols());
        match quadratic_differential_check(&b.rep, &b.momentum, &p, &w, pol, ctx.tol.principal_angle) {
            Ok(chk) => {
                worst = worst.max(chk.relative_error);
                samples += 1;
                isotropic += (!chk.differential.is_empty()) as usize;
            }
            Err(e) if e.is_degenerate() => degen += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(CheckResult::from_residual("quadratic-differential", worst, 1e-4, samples)
        .with_detail(serde_json::json!({ "degenerate": degen, "with_isotropy": isotropic })))
}

/// Quadratic invariants and the products of the first few of them.
fn invariant_family(b: &SymplecticBlock, tol: &Tolerances) -> Result<Vec<Polynomial>, CliError> {
    let quad = b.invariants(tol)?;
    let mut all = quad.clone();
    for i in 0..quad.len().min(3) {
        for j in i..quad.len().min(3) {
            all.push(&quad[i] * &quad[j]);
        }
    }
    Ok(all)
}

fn bracket_closure(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let Some(b) = SymplecticBlock::of(ctx.model) else {
        return Ok(skipped("bracket-closure", "no symplectic block"));
    };
    let fam = invariant_family(&b, ctx.tol)?;
    let elements = b.sample_elements(ctx.model, 50, seed);
    let points = block_samples(&b, n.min(30), seed ^ 3);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for (i, f) in fam.iter().enumerate() {
        for h in &fam[i + 1..] {
            let r = poisson::invariant_closure_check(
                &PolynomialFunction::new(f.clone()),
                &PolynomialFunction::new(h.clone()),
                b.rep.omega(),
                &elements,
                &points,
            )?;
            worst = worst.max(r.residual);
            pairs += 1;
        }
    }
    Ok(CheckResult::from_residual("bracket-closure", worst, poisson::CLOSURE_TOL, points.len())
        .with_detail(serde_json::json!({ "invariants": fam.len(), "pairs": pairs, "elements": elements.len() })))
}

fn ideal(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let m = ctx.model;
    let Some(b) = SymplecticBlock::of(m) else {
        return Ok(skipped("ideal", "no symplectic block"));
    };
    if m.sub_dim() == 0 {
        return Ok(skipped("ideal", "trivial subgroup"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v0 = gaussian_vector(&mut rng, b.dim());
    let c = b.momentum.value(&v0)?;
    let fiber = poisson::level_set_samples(&b.momentum, &c, n, seed ^ 4, 1.0)?;
    // h = |J|^2 - |c|^2 in the inner product dual to B restricted to h.
    let bh = m.inclusion().transpose() * m.group().inner_product() * m.inclusion();
    let bh_inv = bh.try_inverse().ok_or_else(|| CliError::Input("degenerate inner product on h".into()))?;
    let js = b.momentum_polys();
    let d = b.dim();
    let mut h = Polynomial::constant(d, -(c.transpose() * &bh_inv * &c)[(0, 0)]);
    for i in 0..js.len() {
        for j in 0..js.len() {
            if bh_inv[(i, j)] != 0.0 {
                h = &h + &(&js[i] * &js[j]).scale(bh_inv[(i, j)]);
            }
        }
    }
    let h = PolynomialFunction::new(h);
    let mut worst: f64 = 0.0;
    let mut max_h: f64 = 0.0;
    for f in invariant_family(&b, ctx.tol)? {
        let r = poisson::poisson_ideal_check(&PolynomialFunction::new(f), &h, b.rep.omega(), &fiber)?;
        worst = worst.max(r.max_bracket);
        max_h = max_h.max(r.max_h);
    }
    Ok(CheckResult::from_residual("ideal", worst, poisson::IDEAL_TOL, fiber.len())
        .with_detail(serde_json::json!({ "level": c.as_slice(), "max_h_on_fiber": max_h })))
}

fn leaf_rank(ctx: &SuiteContext<'_>, n: usize, seed: u64) -> Result<CheckResult, CliError> {
    let samples = random_samples(ctx.model.slice_dim(), n, seed, 0.5);
    let r = poisson::leaf_rank_check(ctx.model, &samples, None, ctx.tol)?;
    let used = r.report.entries.len();
    let c = CheckResult::from_residual("leaf-rank", r.report.mismatches as f64, 0.0, used)
        .with_detail(serde_json::json!({ "degenerate": r.degenerate }));
    Ok(if used == 0 { degenerate(c) } else { c })
}

fn monotonicity(ctx: &SuiteContext<'_>, seed: u64) -> Result<CheckResult, CliError> {
    let m = ctx.model;
    let mut centers = vec![DVector::zeros(m.slice_dim())];
    centers.extend(random_samples(m.slice_dim(), 3, seed, 0.6));
    let mut violations = 0;
    let mut samples = 0;
    let mut reports = Vec::new();
    for (k, c) in centers.iter().enumerate() {
        let r = poisson::leaf_dim_monotonicity(m, c, 0.1, 20, seed + k as u64, ctx.tol)?;
        violations += r.violations;
        samples += r.neighbor_leaf_dims.len();
        reports.push(serde_json::json!({
            "center": r.center,
            "center_leaf_dim": r.center_leaf_dim,
            "min_neighbor_leaf_dim": r.neighbor_leaf_dims.iter().min(),
        }));
    }
    Ok(CheckResult::from_residual("monotonicity", violations as f64, 0.0, samples).with_detail(reports))
}
