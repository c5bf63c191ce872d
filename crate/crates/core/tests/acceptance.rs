//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relax2d::convexify::{vl_envelope, VlSampling};
use relax2d::energy::*;
use relax2d::fem::{minimize, QuadMesh, SolverOptions};
use relax2d::roc::{build_grid, directions, extract_laminates, reconstruct_microstructure, roc_iterate, RocConfig};
use relax2d::Mat2;

type Outcome = Result<String, String>;

fn f0() -> Mat2 {
    Mat2::scaled_identity(0.4)
}

fn random_mat(rng: &mut ChaCha8Rng, range: f64) -> Mat2 {
    Mat2::new(
        rng.gen_range(-range..range),
        rng.gen_range(-range..range),
        rng.gen_range(-range..range),
        rng.gen_range(-range..range),
    )
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1() -> Outcome {
    let (qd, wd, qb) = (q_dist_unconstrained(&f0()), w_dist(&f0()), q_biot_unconstrained(&f0()));
    check((qd - 0.68).abs() <= 1e-12, format!("q_dist = {qd}"))?;
    check((wd - 0.72).abs() <= 1e-12, format!("w_dist = {wd}"))?;
    check(qb.abs() <= 1e-12, format!("q_biot = {qb}"))?;
    Ok(format!("q_dist={qd} w_dist={wd} q_biot={qb}"))
}

fn c2() -> Outcome {
    let f = Mat2::new(1.0, 0.0, 0.0, -1.0);
    let (wd, wb) = (w_dist(&f), w_biot(&f));
    check((wd - 4.0).abs() <= 1e-12 && wb.abs() <= 1e-12, format!("w_dist={wd} w_biot={wb}"))?;
    Ok(format!("w_dist={wd} w_biot={wb}"))
}

fn c3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let f = random_mat(&mut rng, 3.0);
        worst = worst.max((q_biot_pipkin_oracle(&f) - q_biot_unconstrained(&f)).abs());
    }
    check(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let f = random_mat(&mut rng, 3.0);
        worst = worst.max((dist_so2_bruteforce(&f, 10_000) - w_dist(&f)).abs());
    }
    check(worst <= 1e-5, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let f = random_mat(&mut rng, 3.0);
        if f.singular_values().lambda1 >= 4.0 {
            continue;
        }
        let v = vl_envelope(|t| (t - 1.0).powi(2), &f, VlSampling::default()).map_err(|e| e.to_string())?;
        worst = worst.max((v - q_biot_unconstrained(&f)).abs());
        n += 1;
    }
    check(worst <= 2e-3, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn roc_biot(cfg: &RocConfig) -> Result<relax2d::roc::RocResult, String> {
    let g = build_grid(&Biot, cfg).map_err(|e| e.to_string())?;
    roc_iterate(g, &directions(1), cfg).map_err(|e| e.to_string())
}

fn c6() -> Outcome {
    let clock = Instant::now();
    let ci = roc_biot(&RocConfig::unconstrained(0.2, 1.0))?;
    let ci_time = clock.elapsed().as_secs_f64();
    let ci_value = ci.grid.interpolate(&f0()).ok_or("F0 outside the grid")?;
    check(ci_value <= 0.05, format!("CI value {ci_value}"))?;
    check(ci_time < 30.0, format!("CI variant took {ci_time:.1}s"))?;

    let full = roc_biot(&RocConfig::unconstrained(0.1, 2.0))?;
    let v = full.grid.interpolate(&f0()).ok_or("F0 outside the grid")?;
    check(v.abs() <= 1e-9, format!("value {v}"))?;
    let mut violations = 0;
    for i in 0..full.grid.len() {
        let f = full.grid.point(i);
        let r = full.grid.values[i];
        if q_biot_unconstrained(&f) > r + 1e-9 || r > w_biot(&f) + 1e-12 {
            violations += 1;
        }
    }
    check(violations == 0, format!("{violations} sandwich violations"))?;
    Ok(format!(
        "value {v:e} on {} nodes after {} sweeps; CI variant {ci_value:e} in {ci_time:.2}s",
        full.grid.len(),
        full.iterations()
    ))
}

fn c7() -> Outcome {
    let r = roc_biot(&RocConfig::constrained(0.1))?;
    let v = r.grid.interpolate(&f0()).ok_or("F0 outside the grid")?;
    check((v - 0.68).abs() <= 1e-9, format!("value {v}"))?;
    let tree = extract_laminates(&r, &Biot, &f0()).map_err(|e| e.to_string())?;
    tree.validate().map_err(|e| e.to_string())?;
    check(tree.leaves().iter().all(|(_, f)| f.det() > 0.0), "leaf with det <= 0")?;
    let e = tree.leaf_energy(&Biot);
    check((e - 0.68).abs() <= 1e-9, format!("leaf energy {e}"))?;
    let m = reconstruct_microstructure(&tree, 8, 64).map_err(|e| e.to_string())?;
    check((m.mean_gradient() - f0()).max_abs() <= 1e-10, "microstructure mean")?;

    let f1 = Mat2::new(0.5, -0.1, -0.1, 0.5);
    let f2 = Mat2::new(-0.5, 0.9, 0.9, -0.5);
    check(((f1 * 0.9 + f2 * 0.1) - f0()).max_abs() <= 1e-15, "split mean")?;
    check((f2 - f1).det().abs() <= 1e-15, "split not rank-one")?;
    let cert = 0.9 * w_dist(&f1) + 0.1 * w_dist(&f2);
    check((cert - 0.68).abs() <= 1e-12, format!("certificate {cert}"))?;
    Ok(format!(
        "value {v}, {} leaves, leaf energy {e}, certificate {cert}",
        tree.leaves().len()
    ))
}

fn fem_run(w: &dyn EnergyDensity) -> Result<relax2d::fem::SolveReport, String> {
    let mesh = QuadMesh::new(20).map_err(|e| e.to_string())?;
    let (_, report) = minimize(&mesh, w, &f0(), &SolverOptions::default()).map_err(|e| e.to_string())?;
    Ok(report)
}

fn c8() -> Outcome {
    let mut parts = Vec::new();
    let pen = density_from_name("biot_penalized", None).map_err(|e| e.to_string())?;
    for (name, w) in [("dist", &Dist as &dyn EnergyDensity), ("biot_penalized", &*pen)] {
        let r = fem_run(w)?;
        check(
            (0.680..=0.690).contains(&r.energy_per_volume),
            format!("{name}: energy per volume {}", r.energy_per_volume),
        )?;
        check(r.negative_det_count == 0, format!("{name}: {} negative determinants", r.negative_det_count))?;
        check(r.wall_time_s < 120.0, format!("{name}: {:.1}s", r.wall_time_s))?;
        parts.push(format!("{name} {:.6} (min det {:.4}, {:.1}s)", r.energy_per_volume, r.min_det, r.wall_time_s));
    }
    Ok(parts.join("; "))
}

fn c9() -> Outcome {
    let r = fem_run(&Biot)?;
    check(r.energy_per_volume < 0.5, format!("energy per volume {}", r.energy_per_volume))?;
    check(r.negative_det_count >= 1, "no negative determinant")?;
    check(r.wall_time_s < 120.0, format!("{:.1}s", r.wall_time_s))?;
    Ok(format!(
        "energy per volume {:.6}, {} negative determinants, {:.1}s",
        r.energy_per_volume, r.negative_det_count, r.wall_time_s
    ))
}

fn c10() -> Outcome {
    const N: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
    for _ in 0..N {
        let f = random_mat(&mut rng, 3.0);
        let g = Mat2::rotation(rng.gen_range(-3.2..3.2)) * f * Mat2::rotation(rng.gen_range(-3.2..3.2));
        for e in [w_biot, w_dist, q_biot_unconstrained, q_dist_unconstrained] {
            check(close(e(&f), e(&g), 1e-10), format!("objectivity at {f}"))?;
        }
    }
    for _ in 0..N {
        let f = random_mat(&mut rng, 3.0);
        let (qb, qd) = (q_biot_unconstrained(&f), q_dist_unconstrained(&f));
        check(qb <= qd + 1e-12 && qd <= w_dist(&f) + 1e-12 && qb <= w_biot(&f) + 1e-12, format!("ordering at {f}"))?;
        if f.det() > 0.0 {
            let qg = q_glp(&f).map_err(|e| e.to_string())?;
            check(qb <= qg + 1e-12 && qg <= w_biot(&f) + 1e-12, format!("q_glp ordering at {f}"))?;
        }
    }
    for _ in 0..N {
        let f = random_mat(&mut rng, 2.0);
        let d = Mat2::outer(
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        );
        let t: f64 = rng.gen_range(0.0..1.0);
        for q in [q_biot_unconstrained, q_dist_unconstrained] {
            check(
                q(&(f + d * t)) <= (1.0 - t) * q(&f) + t * q(&(f + d)) + 1e-10,
                format!("rank-one convexity at {f}"),
            )?;
        }
    }
    let mut checked = 0;
    for _ in 0..N {
        let f = random_mat(&mut rng, 2.0);
        let sp = f.singular_values();
        if sp.lambda2 < 1e-2 || sp.lambda1 - sp.lambda2 < 1e-2 || (f.conformal_sq() - 1.0).abs() < 1e-2 {
            continue;
        }
        for w in [&Biot as &dyn EnergyDensity, &Dist, &QDist] {
            if w.near_nonsmooth(&f, 1e-2) {
                continue;
            }
            let g = w.gradient(&f).ok_or("missing analytic gradient")?;
            let fd = fd_gradient(w, &f, 1e-6);
            check((g - fd).max_abs() <= 1e-5 * (1.0 + g.max_abs()), format!("{} gradient at {f}", w.name()))?;
            checked += 1;
        }
    }
    let mut trees = 0;
    for _ in 0..N / 10 {
        let f = random_mat(&mut rng, 1.0);
        let d = Mat2::outer(
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            [rng.gen_range(-2..=2) as f64, 1.0],
        );
        let w0 = rng.gen_range(0.05..0.95);
        let tree = relax2d::roc::LaminationTree {
            root: relax2d::roc::LaminationNode {
                f,
                weight: 1.0,
                direction: Some(d),
                children: vec![
                    relax2d::roc::LaminationNode::leaf(f - d * (1.0 - w0), w0),
                    relax2d::roc::LaminationNode::leaf(f + d * w0, 1.0 - w0),
                ],
            },
            tied_directions: vec![],
        };
        tree.validate().map_err(|e| e.to_string())?;
        let m = reconstruct_microstructure(&tree, 3, 16).map_err(|e| e.to_string())?;
        check((m.mean_gradient() - f).max_abs() <= 1e-10, "microstructure mean")?;
        trees += 1;
    }
    Ok(format!("{N} samples per property, {checked} gradient checks, {trees} trees"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("analytic point values", c1),
        ("counterexample pair", c2),
        ("pipkin oracle equivalence", c3),
        ("brute-force distance to SO(2)", c4),
        ("valanis-landel engine", c5),
        ("ROC unconstrained biot", c6),
        ("ROC constrained biot", c7),
        ("FEM dist and penalized biot", c8),
        ("FEM unconstrained biot", c9),
        ("property suites", c10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let clock = Instant::now();
        let outcome = run();
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} ({name}) [{secs:.2}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} ({name}) [{secs:.2}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
