//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::Instant;

use momap::models;
use momap::poisson::{poisson_bracket, PolynomialFunction};
use momap::poly::Polynomial;
use momap::strata::{analyze_point, codim_one_audit, random_samples, GridSpec, Stratification};
use momap::symplectic::standard_omega;
use momap::Tolerances;
use momap_cli::commands;
use momap_cli::model_file::{load_model, FIXTURES};
use momap_cli::suites::Suite;
use momap_cli::{Report, Status};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn valid_fixtures() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n).filter(|n| *n != "corrupted_omega")
}

fn check_under(report: &Report, name: &str, bound: f64) -> Outcome {
    let c = report.check(name).ok_or(format!("no {name} check"))?;
    if c.status == Status::Pass && c.max_residual < bound {
        Ok(format!("{name} {:.2e} over {} samples", c.max_residual, c.samples))
    } else {
        Err(format!("{name} {:?} residual {:.3e} (bound {bound:.0e})", c.status, c.max_residual))
    }
}

fn example_full() -> Report {
    commands::example_su2su2(true, 1, &tol()).expect("example runs")
}

fn worked_example(report: &Report) -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_momap"))
        .args(["example", "su2su2", "--full", "--no-timing"])
        .output()
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    if out.status.code() != Some(0) {
        return Err(format!("exit {:?}", out.status.code()));
    }
    let count = report.check("strata-count").ok_or("no strata-count")?;
    let strata = count.detail["strata"].as_u64().unwrap_or(0);
    if count.status != Status::Pass || strata != 6 {
        return Err(format!("{strata} strata"));
    }
    let agree = report.check("descriptor-agreement").ok_or("no descriptor-agreement")?;
    if agree.status != Status::Pass || agree.max_residual != 0.0 || agree.samples < 10_000 {
        return Err(format!("{} mismatches over {}", agree.max_residual, agree.samples));
    }
    if secs >= 10.0 {
        return Err(format!("runtime {secs:.1} s"));
    }
    Ok(format!("6 strata, 0 mismatches over {} samples, {secs:.1} s", agree.samples))
}

fn fiber_geometry(report: &Report) -> Outcome {
    let eq = check_under(report, "fiber-equation", 1e-9)?;
    let p = report.check("fiber-punctures").ok_or("no fiber-punctures")?;
    let n = p.detail["punctures"].as_array().map(|a| a.len()).unwrap_or(0);
    if p.status != Status::Pass || n != 2 {
        return Err(format!("{n} punctures"));
    }
    Ok(format!("{eq}; 2 punctures at (1,1)"))
}

fn leaf_dims(report: &Report) -> Outcome {
    let c = report.check("leaf-dims").ok_or("no leaf-dims")?;
    let strata = c.detail["strata"].as_object().ok_or("no strata detail")?;
    let mut open = 0;
    let mut points = 0;
    for (name, d) in strata {
        let (leaf, fiber) = (d["leaf_dim"].as_u64(), d["fiber_dim"].as_u64());
        match (name.as_str(), leaf, fiber) {
            ("open", Some(2), Some(2)) => open += 1,
            (_, Some(0), Some(0)) if name != "open" => points += 1,
            _ => return Err(format!("{name}: {d}")),
        }
    }
    if c.status != Status::Pass || open != 1 || points != 5 {
        return Err(format!("{:?}, open {open}, others {points}", c.status));
    }
    Ok(format!("open 2, other five 0, {} samples", c.samples))
}

fn verify_all(names: &[&str], suites: &[Suite], seed: u64) -> Vec<(String, Report)> {
    names
        .iter()
        .map(|n| {
            let l = load_model(n).expect("fixture loads");
            (n.to_string(), commands::verify(&l, suites, Some(seed), &tol()))
        })
        .collect()
}

fn across(reports: &[(String, Report)], name: &str, bound: f64, min_samples: usize) -> Outcome {
    let mut worst = 0.0f64;
    let mut total = 0;
    let mut skipped = 0;
    for (model, r) in reports {
        let c = r.check(name).ok_or(format!("{model}: no {name}"))?;
        if c.status == Status::Pass && c.detail.get("skipped").is_some() {
            skipped += 1;
            continue;
        }
        if c.status != Status::Pass || !(c.max_residual < bound) {
            return Err(format!("{model}: {:?} residual {:.3e}", c.status, c.max_residual));
        }
        if c.samples < min_samples {
            return Err(format!("{model}: only {} samples", c.samples));
        }
        worst = worst.max(c.max_residual);
        total += c.samples;
    }
    Ok(format!("max {worst:.2e} over {total} samples on {} fixtures ({skipped} not applicable)", reports.len() - skipped))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> PolynomialFunction {
    let terms: Vec<(Vec<u32>, f64)> = (0..rng.random_range(1..6))
        .map(|_| {
            let mut e = vec![0u32; n];
            for _ in 0..rng.random_range(0..=3) {
                e[rng.random_range(0..n)] += 1;
            }
            (e, rng.random_range(-1.0..1.0))
        })
        .collect();
    PolynomialFunction::new(Polynomial::from_terms(n, terms).unwrap())
}

fn bracket_identities() -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for n in [2, 4, 6] {
        for _ in 0..40 {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.3..0.3));
            let om = standard_omega(n / 2) + (&a - a.transpose());
            let (f, g, h) = (random_poly(&mut rng, n), random_poly(&mut rng, n), random_poly(&mut rng, n));
            let br = |x: &PolynomialFunction, y: &PolynomialFunction| poisson_bracket(x, y, &om).map(|p| p.poly);
            let fg = br(&f, &g).map_err(|e| e.to_string())?;
            let gf = br(&g, &f).map_err(|e| e.to_string())?;
            let gh = PolynomialFunction::new(br(&g, &h).unwrap());
            let hf = PolynomialFunction::new(br(&h, &f).unwrap());
            let fgp = PolynomialFunction::new(fg.clone());
            let jacobi = &(&br(&f, &gh).unwrap() + &br(&g, &hf).unwrap()) + &br(&h, &fgp).unwrap();
            let prod = PolynomialFunction::new(&g.poly * &h.poly);
            let leibniz = &br(&f, &prod).unwrap() - &(&(&fg * &h.poly) + &(&g.poly * &br(&f, &h).unwrap()));
            worst = worst
                .max((&fg + &gf).max_coefficient())
                .max(jacobi.max_coefficient())
                .max(leibniz.max_coefficient());
        }
    }
    Ok(worst)
}

fn poisson_properties(reports: &[(String, Report)]) -> Outcome {
    let worst = bracket_identities()?;
    if !(worst < 1e-8) {
        return Err(format!("bracket identity residual {worst:.3e}"));
    }
    let closure = across(reports, "bracket-closure", 1e-8, 0)?;
    let ideal = across(reports, "ideal", 1e-7, 0)?;
    Ok(format!("identities {worst:.2e}; closure {closure}; ideal {ideal}"))
}

fn codim_audit() -> Outcome {
    let t = tol();
    let grid = GridSpec { spacing: 1.0, extent: 1.0 };
    let seeds = 0..12u64;
    let count = seeds.clone().count();
    for seed in seeds {
        let m = models::random_supported_model(seed).map_err(|e| e.to_string())?;
        let s = Stratification::from_grid(&m, grid, &t).map_err(|e| format!("{}: {e}", m.name()))?;
        let extra = random_samples(m.slice_dim(), 40, seed, 0.5)
            .iter()
            .map(|p| analyze_point(&m, p, &t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{}: {e}", m.name()))?;
        let audit = codim_one_audit(&s, &extra);
        if !audit.violations.is_empty() {
            return Err(format!("{} has codimension-one strata {:?}", m.name(), audit.violations));
        }
    }
    let m = models::o2_reflection("control").map_err(|e| e.to_string())?;
    let s = Stratification::from_grid(&m, GridSpec { spacing: 0.5, extent: 1.0 }, &t).map_err(|e| e.to_string())?;
    let audit = codim_one_audit(&s, &[]);
    let flagged: Vec<_> = audit.entries.iter().filter(|e| audit.canonical_codim_one.contains(&e.stratum)).collect();
    if !audit.violations.is_empty() || flagged.is_empty() {
        return Err(format!("control misreported: {audit:?}"));
    }
    if flagged.iter().any(|e| e.codim_infinitesimal == 1 || !e.reflection_on_complement) {
        return Err(format!("control entry {flagged:?}"));
    }
    Ok(format!("{count} random models clean; reflection control has canonical codim 1, infinitesimal {}", flagged[0].codim_infinitesimal))
}

fn determinism() -> Outcome {
    let t = tol();
    let l = load_model("torus2_weights").unwrap();
    let v = |seed| commands::verify(&l, &Suite::ALL, Some(seed), &t).deterministic_json();
    let su = load_model("su2su2_circle").unwrap();
    let s = |seed| commands::stratify(&su, Some(seed), None, &t).unwrap().deterministic_json();
    let e = |seed| commands::example_su2su2(true, seed, &t).unwrap().deterministic_json();
    for (what, a, b) in [("verify", v(5), v(5)), ("stratify", s(5), s(5)), ("example", e(5), e(5))] {
        if a != b {
            return Err(format!("{what} reports differ"));
        }
    }
    if v(5) == v(6) {
        return Err("verify ignores its seed".into());
    }
    Ok("verify, stratify and example reports are byte-identical".into())
}

fn main() {
    let example = example_full();
    let all: Vec<&str> = valid_fixtures().collect();
    let five = ["su2su2_circle", "torus_weight1", "torus_weight11", "torus2_weights", "su2_quaternion"];
    let infmomact = verify_all(&five, &[Suite::InfMomAct], 11);
    let full = verify_all(&all, &Suite::ALL, 12);

    let criteria: Vec<(&str, Outcome)> = vec![
        ("worked example strata and descriptors", worked_example(&example)),
        ("commuting square", check_under(&example, "commuting-square", 1e-10)),
        ("fiber geometry", fiber_geometry(&example)),
        ("leaf dimensions", leaf_dims(&example)),
        ("momentum map identities", across(&infmomact, "infmomact", 1e-8, 100)),
        ("exact sequence dimensions", across(&full, "ses-dims", 0.5, 1)),
        ("quadratic differential", across(&full, "quadratic-differential", 1e-4, 100)),
        ("Poisson properties", poisson_properties(&full)),
        ("codimension-one audit", codim_audit()),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in criteria.iter().enumerate() {
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
