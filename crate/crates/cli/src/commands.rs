//! The subcommands, each producing a [`Report`].

use std::time::Instant;

use momap::config::Tolerances;
use momap::momentum::HamiltonianModel;
use momap::poisson;
use momap::semialg::{
    builtin_hilbert_maps, commuting_square_residual, descriptor_index, fiber_csv, fiber_point, fiber_surface,
    strata_descriptors_su2su2, FiberSurface, SemiAlgDescription,
};
use momap::strata::{
    analyze_points, codim_one_audit, frontier_sampling, random_samples, GridSpec, StratumLabel, Stratification,
};
use momap::models;
use nalgebra::DVector;
use serde::Serialize;

use crate::model_file::{LoadedModel, SamplingSpec};
use crate::report::{CheckResult, Report};
use crate::suites::{run_suites, Suite, SuiteContext};
use crate::CliError;

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// One row of the stratum table.
#[derive(Debug, Clone, Serialize)]
pub struct StratumRow {
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
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<String>,
}

/// Built-in descriptors of the strata images, keyed by Hilbert map id.
fn descriptors_for(hilbert: Option<&str>) -> Option<Vec<SemiAlgDescription>> {
    match hilbert {
        Some("su2su2-circle") => Some(strata_descriptors_su2su2()),
        _ => None,
    }
}

/// Index of the built-in descriptor containing `ρ(p)`.
fn descriptor_of(hilbert: &str, descs: &[SemiAlgDescription], p: &[f64], tol: &Tolerances) -> Result<Option<usize>, CliError> {
    let data = builtin_hilbert_maps(hilbert)?;
    let x = data.rho.eval(&DVector::from_column_slice(p))?;
    Ok(descriptor_index(descs, x.as_slice(), tol)?)
}

pub fn stratum_table(strat: &Stratification, hilbert: Option<&str>, tol: &Tolerances) -> Result<Vec<StratumRow>, CliError> {
    let descs = descriptors_for(hilbert);
    strat
        .strata
        .iter()
        .map(|s| {
            let descriptor = match (&descs, hilbert) {
                (Some(d), Some(h)) => descriptor_of(h, d, &s.representative, tol)?.map(|i| d[i].name.clone()),
                _ => None,
            };
            Ok(StratumRow {
                id: s.id,
                label: s.label.clone(),
                component: s.component,
                representative: s.representative.clone(),
                grid_points: s.grid_points,
                stratum_dim: s.stratum_dim,
                orbit_space_dim: s.orbit_space_dim,
                codim_infinitesimal: s.codim_infinitesimal,
                codim_canonical: s.codim_canonical,
                leaf_dim: s.leaf_dim,
                fiber_dim: s.fiber_dim,
                dimension_type: s.dimension_type,
                descriptor,
            })
        })
        .collect()
}

#[derive(Debug, Default, Serialize)]
struct SampleSummary {
    samples: usize,
    assigned: usize,
    unassigned: usize,
    degenerate: usize,
}

/// Why the closure test cannot be trusted on this grid, if it cannot: fewer
/// than two steps per half-axis, or a label whose lattice components include
/// isolated points, which happens when a stratum is not axis-aligned.
fn unresolved_grid(strat: &Stratification) -> Option<&'static str> {
    if strat.grid.steps() < 2 {
        return Some("grid has fewer than two steps per half-axis");
    }
    let split = strat.strata.iter().any(|s| {
        s.grid_points == 1 && strat.strata.iter().any(|t| t.id != s.id && t.label == s.label)
    });
    split.then_some("a label splits into isolated grid points")
}

/// Grid stratification, random sample assignment, codimension audit and
/// frontier check.
pub fn stratify(
    loaded: &LoadedModel,
    seed: Option<u64>,
    grid: Option<f64>,
    tol: &Tolerances,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let s = &loaded.file.sampling;
    let seed = seed.unwrap_or(s.seed);
    let spacing = grid.unwrap_or(s.grid);
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(CliError::Input(format!("grid spacing must be positive, got {spacing}")));
    }
    let m = &loaded.model;
    let mut report = Report::new("stratify", Some(m), seed, tol.equality);
    stratify_into(&mut report, m, loaded.file.hilbert.as_deref(), spacing, s, seed, tol)?;
    report.timing.total_ms = ms(start);
    Ok(report)
}

fn stratify_into(
    report: &mut Report,
    m: &HamiltonianModel,
    hilbert: Option<&str>,
    spacing: f64,
    s: &SamplingSpec,
    seed: u64,
    tol: &Tolerances,
) -> Result<Stratification, CliError> {
    let t = Instant::now();
    let strat = Stratification::from_grid(
        m,
        GridSpec {
            spacing,
            extent: s.extent,
        },
        tol,
    )?;
    let grid_ms = ms(t);

    let t = Instant::now();
    let points = random_samples(m.slice_dim(), s.samples, seed, 0.5);
    let mut summary = SampleSummary {
        samples: points.len(),
        ..Default::default()
    };
    let mut extra = Vec::new();
    for r in analyze_points(m, &points, tol) {
        match r {
            Ok(a) => {
                if strat.assign(&a, tol.equality.max(1e-9)).is_some() {
                    summary.assigned += 1;
                } else {
                    summary.unassigned += 1;
                }
                extra.push(a);
            }
            Err(e) if e.is_degenerate() => summary.degenerate += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let audit = codim_one_audit(&strat, &extra);
    let audit_check = CheckResult::from_residual("codim-one-audit", audit.violations.len() as f64, 0.0, audit.entries.len())
        .with_detail(&audit);
    report.push(audit_check, grid_ms + ms(t));

    let t = Instant::now();
    let frontier = frontier_sampling(&strat);
    let mut frontier_check =
        CheckResult::from_residual("frontier", frontier.violations.len() as f64, 0.0, frontier.adjacent.len())
            .with_detail(&frontier);
    if let Some(reason) = unresolved_grid(&strat) {
        frontier_check.status = crate::Status::Degenerate;
        if let Some(o) = frontier_check.detail.as_object_mut() {
            o.insert("unresolved".into(), reason.into());
        }
    }
    report.push(frontier_check, ms(t));

    report.add_section(
        "stratification",
        serde_json::json!({
            "grid": { "spacing": spacing, "extent": s.extent, "points": strat.analyses.len() },
            "strata_count": strat.strata.len(),
            "label_count": strat.label_count(),
            "random_samples": summary,
        }),
    );
    report.add_section("strata", stratum_table(&strat, hilbert, tol)?);
    Ok(strat)
}

/// Runs the selected verification suites.
pub fn verify(loaded: &LoadedModel, suites: &[Suite], seed: Option<u64>, tol: &Tolerances) -> Report {
    let start = Instant::now();
    let mut sampling = loaded.file.sampling.clone();
    if let Some(s) = seed {
        sampling.seed = s;
    }
    let ctx = SuiteContext {
        model: &loaded.model,
        sampling: &sampling,
        tol,
    };
    let mut report = Report::new("verify", Some(&loaded.model), sampling.seed, tol.equality);
    for (check, t) in run_suites(&ctx, suites) {
        report.push(check, t);
    }
    report.timing.total_ms = ms(start);
    report
}

/// Largest violation of the fiber equation and of `P(x) = y`, and the count of samples the
/// descriptor rejects.
fn fiber_residual(f: &FiberSurface, tol: &Tolerances) -> Result<(f64, usize), CliError> {
    let [y1, y2] = f.y;
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    for s in &f.samples {
        let x = fiber_point(s);
        let lhs = x[3] * x[3] + x[4] * x[4];
        let rhs = (y1 - x[0] * x[0]) * (y2 - x[0] * x[0]);
        let level = (x[0] * x[0] + x[1] - y1).abs().max((x[0] * x[0] + x[2] - y2).abs());
        worst = worst.max((lhs - rhs).abs()).max(level);
        if !f.descriptor.member(&s[..3], tol)? {
            rejected += 1;
        }
    }
    Ok((worst, rejected))
}

const FIBER_TOL: f64 = 1e-9;

fn fiber_checks(report: &mut Report, f: &FiberSurface, name: &str, tol: &Tolerances) -> Result<(), CliError> {
    let t = Instant::now();
    let (worst, rejected) = fiber_residual(f, tol)?;
    let mut c = CheckResult::from_residual(name, worst, FIBER_TOL, f.samples.len()).with_detail(serde_json::json!({
        "y": f.y,
        "rejected_by_descriptor": rejected,
        "punctures": f.punctures,
    }));
    if rejected > 0 {
        c.status = crate::Status::Fail;
    }
    report.push(c, ms(t));
    Ok(())
}

/// Samples a fiber over `(y1, y2)` and writes it as CSV to `out`.
pub fn fibers(y1: f64, y2: f64, n: usize, out: &str, seed: u64, tol: &Tolerances) -> Result<Report, CliError> {
    let start = Instant::now();
    let f = fiber_surface(y1, y2, n, seed, tol)?;
    std::fs::write(out, fiber_csv(&f)).map_err(|source| CliError::Io {
        path: out.into(),
        source,
    })?;
    let mut report = Report::new("fibers", None, seed, tol.equality);
    fiber_checks(&mut report, &f, "fiber-membership", tol)?;
    report.add_section(
        "fiber",
        serde_json::json!({
            "y": f.y,
            "rows": f.samples.len(),
            "columns": momap::semialg::FIBER_CSV_HEADER,
            "punctures": f.punctures,
            "puncture_count": f.punctures.len(),
        }),
    );
    report.timing.total_ms = ms(start);
    Ok(report)
}

pub const EXAMPLE_STRATA: usize = 6;
pub const DESCRIPTOR_SAMPLES: usize = 10_000;
pub const SQUARE_SAMPLES: usize = 1_000;
pub const SQUARE_TOL: f64 = 1e-10;
const OPEN_DESCRIPTOR: &str = "open";

/// The worked `SU(2) × SU(2)` example. Without `full` only the stratum
/// count is checked.
pub fn example_su2su2(full: bool, seed: u64, tol: &Tolerances) -> Result<Report, CliError> {
    let start = Instant::now();
    let m = models::su2su2_circle()?;
    let mut report = Report::new(if full { "example su2su2 --full" } else { "example su2su2" }, Some(&m), seed, tol.equality);
    let sampling = SamplingSpec {
        seed,
        ..SamplingSpec::default()
    };
    let strat = stratify_into(&mut report, &m, Some("su2su2-circle"), sampling.grid, &sampling, seed, tol)?;
    let count = CheckResult::from_residual(
        "strata-count",
        (strat.strata.len() as f64 - EXAMPLE_STRATA as f64).abs(),
        0.0,
        strat.analyses.len(),
    )
    .with_detail(serde_json::json!({ "strata": strat.strata.len(), "labels": strat.label_count() }));
    report.push(count, 0.0);
    if !full {
        report.timing.total_ms = ms(start);
        return Ok(report);
    }
    let data = builtin_hilbert_maps("su2su2-circle")?;
    let descs = strata_descriptors_su2su2();

    // descriptor agreement
    let t = Instant::now();
    let stratum_desc: Vec<Option<usize>> = strat
        .strata
        .iter()
        .map(|s| descriptor_of("su2su2-circle", &descs, &s.representative, tol))
        .collect::<Result<_, _>>()?;
    let mut distinct: Vec<usize> = stratum_desc.iter().flatten().copied().collect();
    distinct.sort();
    distinct.dedup();
    let points = random_samples(m.slice_dim(), DESCRIPTOR_SAMPLES, seed ^ 0x5eed, 0.5);
    let mut mismatches = 0;
    let mut degenerate = 0;
    let mut hits = vec![0usize; descs.len()];
    for (p, a) in points.iter().zip(analyze_points(&m, &points, tol)) {
        let a = match a {
            Ok(a) => a,
            Err(e) if e.is_degenerate() => {
                degenerate += 1;
                mismatches += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let x = data.rho.eval(p)?;
        let d = descriptor_index(&descs, x.as_slice(), tol)?;
        if let Some(i) = d {
            hits[i] += 1;
        }
        let via_label = strat.assign(&a, tol.equality.max(1e-9)).and_then(|s| stratum_desc[s]);
        if d.is_none() || d != via_label {
            mismatches += 1;
        }
    }
    if distinct.len() != stratum_desc.len() {
        mismatches += 1;
    }
    let names: Vec<&str> = descs.iter().map(|d| d.name.as_str()).collect();
    report.push(
        CheckResult::from_residual("descriptor-agreement", mismatches as f64, 0.0, points.len()).with_detail(serde_json::json!({
            "descriptors": names,
            "hits": hits,
            "degenerate": degenerate,
            "stratum_descriptors": stratum_desc,
        })),
        ms(t),
    );

    // commuting square
    let t = Instant::now();
    let pts = random_samples(m.slice_dim(), SQUARE_SAMPLES, seed ^ 0x5a, 0.3);
    let r = commuting_square_residual(&data, &pts)?;
    report.push(CheckResult::from_residual("commuting-square", r, SQUARE_TOL, pts.len()), ms(t));

    // fibers
    let f = fiber_surface(1.0, 2.0, 1000, seed, tol)?;
    fiber_checks(&mut report, &f, "fiber-equation", tol)?;
    let t = Instant::now();
    let f = fiber_surface(1.0, 1.0, 1000, seed, tol)?;
    report.push(
        CheckResult::from_residual("fiber-punctures", (f.punctures.len() as f64 - 2.0).abs(), 0.0, f.samples.len())
            .with_detail(serde_json::json!({ "y": f.y, "punctures": f.punctures })),
        ms(t),
    );

    // leaf dimensions
    let t = Instant::now();
    let mut wrong = 0;
    let mut leaf = serde_json::Map::new();
    for (s, d) in strat.strata.iter().zip(&stratum_desc) {
        let name = d.map(|i| descs[i].name.clone()).unwrap_or_else(|| format!("stratum-{}", s.id));
        let want = if name == OPEN_DESCRIPTOR { 2 } else { 0 };
        if s.leaf_dim != want || s.fiber_dim != want {
            wrong += 1;
        }
        leaf.insert(name, serde_json::json!({ "leaf_dim": s.leaf_dim, "fiber_dim": s.fiber_dim }));
    }
    let samples = random_samples(m.slice_dim(), 200, seed ^ 0x1eaf, 0.5);
    let lr = poisson::leaf_rank_check(&m, &samples, Some(&strat), tol)?;
    for e in &lr.report.entries {
        let Some(s) = e.stratum else { continue };
        let want = stratum_desc[s].map(|i| if descs[i].name == OPEN_DESCRIPTOR { 2 } else { 0 });
        if want != Some(e.normal_fixed) {
            wrong += 1;
        }
    }
    wrong += lr.report.mismatches;
    report.push(
        CheckResult::from_residual("leaf-dims", wrong as f64, 0.0, strat.strata.len() + lr.report.entries.len())
            .with_detail(serde_json::json!({ "strata": leaf, "sample_mismatches": lr.report.mismatches, "degenerate": lr.degenerate })),
        ms(t),
    );
    report.timing.total_ms = ms(start);
    Ok(report)
}
