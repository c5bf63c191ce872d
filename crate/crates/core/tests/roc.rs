use relax2d::convexify::{lower_convex_hull, SampledCurve};
use relax2d::energy::{q_biot_unconstrained, q_dist_unconstrained, w_biot, w_dist, Biot, Dist, EnergyDensity};
use relax2d::roc::io::{read_grid, write_grid, write_microstructure_csv, write_microstructure_vtk, write_trace};
use relax2d::roc::*;
use relax2d::{Error, Mat2};

fn f0() -> Mat2 {
    Mat2::scaled_identity(0.4)
}

/// One sweep computed node by node: every line through every node,
/// convexified on its own.
fn naive_sweep(grid: &Grid4, dirs: &DirectionSet, constrained: bool) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let f = grid.point(i);
            let own = grid.values[i];
            if constrained && f.det() <= 1e-12 {
                return own;
            }
            let mut best = own;
            for d in dirs.iter() {
                let line = line_points(&f, &d.matrix(1.0), grid, constrained);
                if line.is_degenerate() {
                    continue;
                }
                let ts = line.ls.iter().map(|&l| l as f64).collect();
                let hull = lower_convex_hull(&SampledCurve::new(ts, line.values).unwrap());
                best = best.min(hull.eval(0.0).unwrap());
            }
            best
        })
        .collect()
}

#[test]
fn line_sweep_matches_nodewise_convexification() {
    for (w, constrained) in [
        (&Dist as &dyn EnergyDensity, false),
        (&Biot as &dyn EnergyDensity, false),
        (&Biot as &dyn EnergyDensity, true),
    ] {
        let mut cfg = if constrained {
            RocConfig::constrained(0.25)
        } else {
            RocConfig::unconstrained(0.5, 1.5)
        };
        cfg.k_max = 1;
        let g = build_grid(w, &cfg).unwrap();
        let dirs = directions(1);
        let naive = naive_sweep(&g, &dirs, constrained);
        let fast = roc_iterate(g, &dirs, &cfg).unwrap();
        for (a, b) in naive.iter().zip(&fast.grid.values) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn iterates_decrease_monotonically() {
    let mut cfg = RocConfig::unconstrained(0.5, 1.5);
    let g0 = build_grid(&Dist, &cfg).unwrap();
    let mut prev = g0.values.clone();
    let dirs = directions(1);
    for k in 1..=4 {
        cfg.k_max = k;
        let r = roc_iterate(g0.clone(), &dirs, &cfg).unwrap();
        assert!(r.grid.values.iter().zip(&prev).all(|(n, p)| n <= p));
        prev = r.grid.values;
    }
}

#[test]
fn lines_through_compression() {
    let cfg = RocConfig::unconstrained(0.1, 2.0);
    let g = build_grid(&Biot, &cfg).unwrap();
    let shear = Mat2::new(0.0, 1.0, 0.0, 0.0);
    let line = line_points(&f0(), &shear, &g, false);
    assert_eq!(line.len(), 41);
    assert_eq!((line.ls[0], line.ls[40]), (-20, 20));

    // det(F + t e₁⊗e₂) = det F for diagonal F: the whole line survives the constraint
    let c = line_points(&f0(), &shear, &g, true);
    assert_eq!(c.len(), 41);

    // along e₁⊗e₁ the determinant is 0.4·(0.4 + 0.1 l), positive for l > −4
    let stretch = Mat2::new(1.0, 0.0, 0.0, 0.0);
    let c = line_points(&f0(), &stretch, &g, true);
    assert_eq!((c.ls[0], *c.ls.last().unwrap()), (-3, 16));
}

#[test]
fn unit_grid_biot_reaches_zero_at_compression() {
    // δ = 0.2, r = 1 keeps 0.4·id on the lattice and reaches the lattice points diag(±1, ±1)
    let cfg = RocConfig::unconstrained(0.2, 1.0);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    let v = r.grid.interpolate(&f0()).unwrap();
    assert!(v <= 0.05 && v.abs() < 1e-9, "{v}");
    let tree = extract_laminates(&r, &Biot, &f0()).unwrap();
    assert!(tree.leaf_energy(&Biot).abs() < 1e-9);
    // biot laminates at 0.4·id pass through reflections
    let m = reconstruct_microstructure(&tree, 4, 64).unwrap();
    assert!(m.has_negative_det());
    assert!(m.negative_det_leaves.iter().any(|(_, f)| f.det() < 0.0));
}

#[test]
fn dist_small_grid_sandwich_and_split() {
    let cfg = RocConfig::unconstrained(0.2, 1.0);
    let g0 = build_grid(&Dist, &cfg).unwrap();
    let r = roc_iterate(g0, &directions(1), &cfg).unwrap();
    for i in 0..r.grid.len() {
        let f = r.grid.point(i);
        assert!(q_dist_unconstrained(&f) <= r.grid.values[i] + 1e-9);
        assert!(r.grid.values[i] <= w_dist(&f) + 1e-12);
    }
    assert!((r.grid.interpolate(&f0()).unwrap() - 0.68).abs() < 1e-9);
    let tree = extract_laminates(&r, &Dist, &f0()).unwrap();
    assert!((tree.leaf_energy(&Dist) - 0.68).abs() < 1e-9);
}

#[test]
fn constrained_biot_tree_is_a_shear_laminate() {
    let cfg = RocConfig::constrained(0.1);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    assert!((r.grid.interpolate(&f0()).unwrap() - 0.68).abs() < 1e-9);
    let tree = extract_laminates(&r, &Biot, &f0()).unwrap();
    tree.validate().unwrap();
    let leaves = tree.leaves();
    assert_eq!(leaves.len(), 2);
    let want = [Mat2::new(0.4, -0.6, 0.0, 0.4), Mat2::new(0.4, 0.6, 0.0, 0.4)];
    for ((w, f), g) in leaves.iter().zip(want) {
        assert!((w - 0.5).abs() < 1e-12);
        assert!((*f - g).max_abs() < 1e-12, "{f}");
        assert!(f.det() > 0.0);
    }
    assert!((tree.leaf_energy(&Biot) - 0.68).abs() < 1e-9);

    let m = reconstruct_microstructure(&tree, 10, 100).unwrap();
    assert!(!m.has_negative_det());
    assert!((m.mean_gradient() - f0()).max_abs() < 1e-10);

    // lower bound by the constrained envelope on positive-determinant nodes
    for i in 0..r.grid.len() {
        let f = r.grid.point(i);
        if f.det() > 1e-12 {
            assert!(relax2d::energy::q_glp(&f).unwrap() <= r.grid.values[i] + 1e-9);
        }
    }
}

#[test]
fn constrained_nodes_with_nonpositive_determinant_keep_their_energy() {
    let cfg = RocConfig::constrained(0.25);
    let g0 = build_grid(&Biot, &cfg).unwrap();
    let r = roc_iterate(g0.clone(), &directions(1), &cfg).unwrap();
    for i in 0..g0.len() {
        if g0.point(i).det() <= 1e-12 {
            assert_eq!(r.grid.values[i], g0.values[i]);
        }
    }
}

#[test]
fn identity_has_a_single_node_tree() {
    let cfg = RocConfig::unconstrained(0.5, 1.0);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    let tree = extract_laminates(&r, &Biot, &Mat2::IDENTITY).unwrap();
    assert!(tree.root.is_leaf());
    assert_eq!(tree.leaf_energy(&Biot), 0.0);
}

#[test]
fn extraction_errors() {
    let mut cfg = RocConfig::unconstrained(0.5, 1.0);
    cfg.record_minimizers = false;
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    assert!(matches!(extract_laminates(&r, &Biot, &f0()), Err(Error::InvalidInput(_))));
    cfg.record_minimizers = true;
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    // 0.4 is not a multiple of 0.5 from −1
    assert!(matches!(extract_laminates(&r, &Biot, &f0()), Err(Error::InvalidInput(_))));
}

#[test]
fn corrupt_trees_are_rejected() {
    let json = r#"{"F":[0.4,0,0,0.4],"weight":1.0,"direction":[0,0.1,0,0],
        "children":[{"F":[0.4,-0.6,0,0.4],"weight":0.5,"direction":null,"children":[]},
                    {"F":[0.5,0.6,0.1,0.4],"weight":0.5,"direction":null,"children":[]}]}"#;
    let tree = LaminationTree::from_json(json).unwrap();
    assert!(matches!(tree.validate(), Err(Error::CorruptTree(_))));
    assert!(matches!(reconstruct_microstructure(&tree, 10, 20), Err(Error::CorruptTree(_))));

    let json = r#"{"F":[0.4,0,0,0.4],"weight":1.0,"direction":null,
        "children":[{"F":[0.4,-0.6,0,0.4],"weight":0.7,"direction":null,"children":[]},
                    {"F":[0.4,0.6,0,0.4],"weight":0.5,"direction":null,"children":[]}]}"#;
    let tree = LaminationTree::from_json(json).unwrap();
    assert!(matches!(tree.validate(), Err(Error::CorruptTree(_))));
}

#[test]
fn tree_json_round_trip() {
    let cfg = RocConfig::constrained(0.1);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    let tree = extract_laminates(&r, &Biot, &f0()).unwrap();
    let back = LaminationTree::from_json(&tree.to_json().unwrap()).unwrap();
    assert_eq!(back.root, tree.root);
    let v: serde_json::Value = serde_json::from_str(&tree.to_json().unwrap()).unwrap();
    assert!(v["F"].is_array() && v["children"].as_array().unwrap().len() == 2);
    assert!(v["children"][0]["direction"].is_null());
}

#[test]
fn snapshots_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RocConfig::unconstrained(0.5, 1.0);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    let stem = dir.path().join("grid");
    write_grid(&r.grid, &stem).unwrap();
    let back = read_grid(&stem).unwrap();
    assert_eq!(back, r.grid);
    let header = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(header.starts_with("axis,lo,hi,len,delta\na11,-1,1,5,0.5\n"));

    write_trace(&r.trace, &dir.path().join("trace.csv")).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), r.iterations() + 1);

    let tree = LaminationTree::single(Mat2::new(0.5, 0.1, 0.0, 0.7));
    let m = reconstruct_microstructure(&tree, 2, 4).unwrap();
    write_microstructure_csv(&m, &dir.path().join("m.csv")).unwrap();
    write_microstructure_vtk(&m, &dir.path().join("m.vtk")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,u1,u2,det"));
    assert_eq!(csv.lines().count(), 26);
    let vtk = std::fs::read_to_string(dir.path().join("m.vtk")).unwrap();
    assert!(vtk.contains("DATASET STRUCTURED_GRID") && vtk.contains("DIMENSIONS 5 5 1"));
}

#[test]
fn memory_budget_errors_propagate() {
    let mut cfg = RocConfig::unconstrained(0.05, 2.0);
    cfg.memory_budget_bytes = 1 << 20;
    assert!(matches!(build_grid(&Biot, &cfg), Err(Error::MemoryBudget { .. })));
    let g = Grid4::from_values(1.0, [-1.0; 4], [3; 4], vec![0.0; 81]).unwrap();
    assert!(matches!(roc_iterate(g, &directions(1), &cfg), Err(Error::MemoryBudget { .. })));
}

#[test]
fn biot_unit_grid_sandwich() {
    let cfg = RocConfig::unconstrained(0.5, 1.5);
    let r = roc_iterate(build_grid(&Biot, &cfg).unwrap(), &directions(1), &cfg).unwrap();
    for i in 0..r.grid.len() {
        let f = r.grid.point(i);
        assert!(q_biot_unconstrained(&f) <= r.grid.values[i] + 1e-9);
        assert!(r.grid.values[i] <= w_biot(&f) + 1e-12);
    }
}
