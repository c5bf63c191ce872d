use std::fmt::Write as _;
use std::path::PathBuf;

use relax2d::convexify::{even_extension, lower_convex_hull, VlSampling};
use relax2d::energy::{
    density_from_name, q_biot_pipkin_oracle, q_biot_unconstrained, q_dist_unconstrained, q_glp, w_biot, w_dist,
    DEFAULT_PENALTY,
};
use relax2d::fem::{minimize, write_mesh_csv, write_mesh_vtk, QuadMesh, SolveReport};
use relax2d::roc::io::{write_grid, write_microstructure_csv, write_microstructure_vtk, write_trace};
use relax2d::roc::{build_grid, directions, extract_laminates, reconstruct_microstructure, roc_iterate};
use relax2d::{EnergyDensity, Error, Mat2};

use crate::spec::{Command, FemSection, PlotSweep, RocSection, RunSpec, SectionKind};
use crate::table::{num, sig6, Table};
use crate::{CliError, Outcome};

const DOMAIN_ERROR: &str = "domain error";
const FAILED: &str = "FAILED";

pub fn run(spec: &RunSpec) -> Result<Outcome, CliError> {
    match spec.command {
        Command::Envelope => cmd_envelope(spec),
        Command::Roc => cmd_roc(spec),
        Command::Fem => cmd_fem(spec),
        Command::Compare => cmd_compare(spec),
        Command::Plotdata => cmd_plotdata(spec),
    }
}

fn f0_cells(f: &Mat2) -> [String; 4] {
    f.to_array().map(num)
}

pub fn cmd_envelope(spec: &RunSpec) -> Result<Outcome, CliError> {
    let w = spec.density()?;
    let f = spec.f0;
    let mut t = Table::new([
        "energy",
        "f11",
        "f12",
        "f21",
        "f22",
        "W",
        "w_biot",
        "w_dist",
        "q_biot_unconstrained",
        "q_dist_unconstrained",
        "q_glp",
        "q_biot_pipkin_oracle",
    ]);
    let glp = match q_glp(&f) {
        Ok(v) => num(v),
        Err(Error::Domain(_)) => DOMAIN_ERROR.into(),
        Err(e) => return Err(e.into()),
    };
    let mut row = vec![spec.energy.clone()];
    row.extend(f0_cells(&f));
    row.extend([
        num(w.value(&f)),
        num(w_biot(&f)),
        num(w_dist(&f)),
        num(q_biot_unconstrained(&f)),
        num(q_dist_unconstrained(&f)),
        glp,
        num(q_biot_pipkin_oracle(&f)),
    ]);
    t.push(row);
    let path = spec.path("envelope.csv");
    t.write(&path)?;
    Ok(Outcome {
        summary: t.render(),
        artifacts: vec![path],
        failure: None,
    })
}

/// Closed-form envelope matching a lamination run, where one is known.
fn analytic_reference(spec: &RunSpec, constrained: bool) -> Option<Result<f64, Error>> {
    if spec.penalty.is_some() {
        return None;
    }
    match (spec.energy.as_str(), constrained) {
        ("biot" | "dist", true) => Some(q_glp(&spec.f0)),
        ("biot", false) => Some(Ok(q_biot_unconstrained(&spec.f0))),
        ("dist", false) => Some(Ok(q_dist_unconstrained(&spec.f0))),
        _ => None,
    }
}

struct RocRun {
    value: f64,
    table: Table,
    artifacts: Vec<PathBuf>,
}

fn run_roc(spec: &RunSpec, w: &dyn EnergyDensity, section: &RocSection, prefix: &str) -> Result<RocRun, CliError> {
    let cfg = section.config();
    let grid = build_grid(w, &cfg)?;
    let r = roc_iterate(grid, &directions(cfg.order), &cfg)?;
    let value = r
        .grid
        .interpolate(&spec.f0)
        .ok_or_else(|| CliError::Config(format!("F0 = {} lies outside the grid", spec.f0)))?;

    let mut artifacts = Vec::new();
    let (bin, csv) = write_grid(&r.grid, &spec.path(&format!("{prefix}grid")))?;
    artifacts.extend([bin, csv]);
    let trace = spec.path(&format!("{prefix}trace.csv"));
    write_trace(&r.trace, &trace)?;
    artifacts.push(trace);

    let tree = extract_laminates(&r, w, &spec.f0)?;
    let tree_path = spec.path(&format!("{prefix}tree.json"));
    std::fs::write(&tree_path, tree.to_json()?)?;
    artifacts.push(tree_path);
    let m = reconstruct_microstructure(&tree, section.frequency, section.resolution)?;
    let (mc, mv) = (
        spec.path(&format!("{prefix}microstructure.csv")),
        spec.path(&format!("{prefix}microstructure.vtk")),
    );
    write_microstructure_csv(&m, &mc)?;
    write_microstructure_vtk(&m, &mv)?;
    artifacts.extend([mc, mv]);

    let reference = match analytic_reference(spec, section.constrained) {
        None => "n/a".to_string(),
        Some(Ok(v)) => num(v),
        Some(Err(Error::Domain(_))) => DOMAIN_ERROR.into(),
        Some(Err(e)) => return Err(e.into()),
    };
    let mut t = Table::new(["quantity", "value"]);
    for (k, v) in [
        ("roc_value", num(value)),
        ("analytic_reference", reference),
        ("leaf_energy", num(tree.leaf_energy(w))),
        ("leaves", tree.leaves().len().to_string()),
        ("tree_depth", tree.root.depth().to_string()),
        ("tied_directions", tree.tied_directions.len().to_string()),
        ("negative_det_leaves", m.negative_det_leaves.len().to_string()),
        ("self_intersecting", m.has_negative_det().to_string()),
        ("iterations", r.iterations().to_string()),
        ("nodes", r.grid.len().to_string()),
    ] {
        t.push([k.to_string(), v]);
    }
    let report = spec.path(&format!("{prefix}report.csv"));
    t.write(&report)?;
    artifacts.push(report);
    Ok(RocRun { value, table: t, artifacts })
}

pub fn cmd_roc(spec: &RunSpec) -> Result<Outcome, CliError> {
    let w = spec.density()?;
    let run = run_roc(spec, &*w, &spec.roc, "roc_")?;
    let mut summary = run.table.render();
    let reference = &run.table.rows[1][1];
    let shown = reference.parse::<f64>().map(sig6).unwrap_or_else(|_| reference.clone());
    let _ = writeln!(summary, "\nROC value at F0: {}   analytic: {shown}", sig6(run.value));
    Ok(Outcome {
        summary,
        artifacts: run.artifacts,
        failure: None,
    })
}

fn report_table(r: &SolveReport) -> Table {
    let mut t = Table::new(["quantity", "value"]);
    for (k, v) in [
        ("energy", num(r.energy)),
        ("energy_per_volume", num(r.energy_per_volume)),
        ("iterations", r.iterations.to_string()),
        ("grad_norm", num(r.grad_norm)),
        ("min_det", num(r.min_det)),
        ("max_det", num(r.max_det)),
        ("negative_det_count", r.negative_det_count.to_string()),
        ("orientation_violating", r.orientation_violating.to_string()),
        ("converged", r.converged.to_string()),
        ("wall_time_s", num(r.wall_time_s)),
    ] {
        t.push([k.to_string(), v]);
    }
    t
}

fn run_fem(
    spec: &RunSpec,
    w: &dyn EnergyDensity,
    fem: &FemSection,
    prefix: &str,
) -> Result<(SolveReport, Vec<PathBuf>), CliError> {
    let mesh = QuadMesh::new(fem.n_per_side)?;
    let (field, report) = minimize(&mesh, w, &spec.f0, &spec.solver_options(fem))?;
    let paths = [
        spec.path(&format!("{prefix}mesh.csv")),
        spec.path(&format!("{prefix}mesh.vtk")),
        spec.path(&format!("{prefix}report.json")),
        spec.path(&format!("{prefix}report.csv")),
    ];
    write_mesh_csv(&mesh, &field, &spec.f0, &paths[0])?;
    write_mesh_vtk(&mesh, &field, &spec.f0, &paths[1])?;
    std::fs::write(&paths[2], serde_json::to_string_pretty(&report)?)?;
    report_table(&report).write(&paths[3])?;
    Ok((report, paths.to_vec()))
}

fn non_convergence(r: &SolveReport) -> CliError {
    CliError::Numerical(format!(
        "optimizer stopped after {} iterations with gradient norm {}",
        r.iterations,
        sig6(r.grad_norm)
    ))
}

pub fn cmd_fem(spec: &RunSpec) -> Result<Outcome, CliError> {
    let w = spec.density()?;
    let (report, artifacts) = run_fem(spec, &*w, &spec.fem, "fem_")?;
    Ok(Outcome {
        summary: report_table(&report).render(),
        artifacts,
        failure: (!report.converged).then(|| non_convergence(&report)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Fem,
    Roc,
    AnalyticQ,
    RawW,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fem, Method::Roc, Method::AnalyticQ, Method::RawW];

    pub fn label(self) -> &'static str {
        match self {
            Method::Fem => "FEM",
            Method::Roc => "ROC",
            Method::AnalyticQ => "analytic_Q",
            Method::RawW => "raw_W",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.label() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    R2x2,
    GLp,
}

impl Domain {
    pub fn label(self) -> &'static str {
        match self {
            Domain::R2x2 => "R2x2",
            Domain::GLp => "GLp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Domain::R2x2, Domain::GLp].into_iter().find(|d| d.label() == s)
    }
}

/// One cell of the comparison table; `None` marks a failed sub-run.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub method: Method,
    pub energy: String,
    pub domain: Domain,
    pub value: Option<f64>,
}

impl ComparisonRow {
    pub const HEADER: [&'static str; 4] = ["method", "energy", "domain", "value"];

    pub fn record(&self) -> [String; 4] {
        [
            self.method.label().into(),
            self.energy.clone(),
            self.domain.label().into(),
            self.value.map_or_else(|| FAILED.into(), num),
        ]
    }

    pub fn from_record(r: &[String]) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("malformed comparison row {r:?}"));
        if r.len() != 4 {
            return Err(bad());
        }
        let value = if r[3] == FAILED {
            None
        } else {
            Some(r[3].parse::<f64>().map_err(|_| bad())?).filter(|v| v.is_finite())
        };
        if value.is_none() && r[3] != FAILED {
            return Err(bad());
        }
        Ok(ComparisonRow {
            method: Method::parse(&r[0]).ok_or_else(bad)?,
            energy: r[1].clone(),
            domain: Domain::parse(&r[2]).ok_or_else(bad)?,
            value,
        })
    }
}

const FOOTNOTE: &str = "PINN and HROC columns are omitted: neither method is implemented here.";

/// Per-unit-volume values at `F₀` for Biot on ℝ²ˣ², dist on ℝ²ˣ² and Biot
/// on GL⁺(2), by every available method.
pub fn cmd_compare(spec: &RunSpec) -> Result<Outcome, CliError> {
    let f = spec.f0;
    let roc = spec.compare.roc.clone().unwrap_or_default();
    let fem = spec.compare.fem.clone().unwrap_or_default();
    let penalty = spec.penalty.unwrap_or(DEFAULT_PENALTY);
    let cases: [(&str, Domain, &str, Option<_>, bool); 3] = [
        ("biot", Domain::R2x2, "biot", None, false),
        ("dist", Domain::R2x2, "dist", None, false),
        ("biot", Domain::GLp, "biot_penalized", Some(penalty), true),
    ];

    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut failure: Option<CliError> = None;
    let record = |failure: &mut Option<CliError>, r: Result<f64, CliError>| match r {
        Ok(v) if v.is_finite() => Some(v),
        Ok(v) => {
            failure.get_or_insert(CliError::Numerical(format!("non-finite value {v}")));
            None
        }
        Err(e) => {
            failure.get_or_insert(e);
            None
        }
    };

    for (energy, domain, fem_energy, fem_penalty, constrained) in cases {
        let sub = RunSpec {
            energy: energy.into(),
            penalty: None,
            ..spec.clone()
        };
        let tag = format!("compare_{energy}_{}_", domain.label());

        let fem_value = density_from_name(fem_energy, fem_penalty)
            .map_err(CliError::from)
            .and_then(|w| run_fem(&sub, &*w, &fem, &format!("{tag}fem_")))
            .and_then(|(r, paths)| {
                artifacts.extend(paths);
                if r.converged {
                    Ok(r.energy_per_volume)
                } else {
                    Err(non_convergence(&r))
                }
            });
        let roc_value = density_from_name(energy, None)
            .map_err(CliError::from)
            .and_then(|w| {
                let section = RocSection {
                    constrained,
                    ..roc.clone()
                };
                run_roc(&sub, &*w, &section, &format!("{tag}roc_"))
            })
            .map(|r| {
                artifacts.extend(r.artifacts);
                r.value
            });
        let analytic = match (energy, domain) {
            ("biot", Domain::R2x2) => Ok(q_biot_unconstrained(&f)),
            ("dist", _) => Ok(q_dist_unconstrained(&f)),
            _ => q_glp(&f).map_err(CliError::from),
        };
        let raw = if energy == "dist" { w_dist(&f) } else { w_biot(&f) };

        for (method, value) in [
            (Method::Fem, fem_value),
            (Method::Roc, roc_value),
            (Method::AnalyticQ, analytic),
            (Method::RawW, Ok(raw)),
        ] {
            rows.push(ComparisonRow {
                method,
                energy: energy.into(),
                domain,
                value: record(&mut failure, value),
            });
        }
    }

    let mut t = Table::new(ComparisonRow::HEADER);
    for r in &rows {
        t.push(r.record());
    }
    let path = spec.path("compare.csv");
    t.write(&path)?;
    artifacts.push(path);

    let mut matrix = Table::new(["energy", "domain", "FEM", "ROC", "analytic_Q", "raw_W"]);
    for chunk in rows.chunks(4) {
        let mut line = vec![chunk[0].energy.clone(), chunk[0].domain.label().to_string()];
        line.extend(chunk.iter().map(|r| r.record()[3].clone()));
        matrix.push(line);
    }
    let summary = format!("{}\n* {FOOTNOTE}\n", matrix.render());
    Ok(Outcome {
        summary,
        artifacts,
        failure,
    })
}

pub fn read_comparison(path: &std::path::Path) -> Result<Vec<ComparisonRow>, CliError> {
    Table::read(path)?.rows.iter().map(|r| ComparisonRow::from_record(r)).collect()
}

fn envelope_pair(energy: &str) -> Result<(fn(&Mat2) -> f64, fn(&Mat2) -> f64), CliError> {
    match energy {
        "biot" => Ok((w_biot, q_biot_unconstrained)),
        "dist" => Ok((w_dist, q_dist_unconstrained)),
        other => Err(CliError::Config(format!(
            "plot data needs a closed-form envelope; none for energy {other:?}"
        ))),
    }
}

fn sweep_table(sweep: &PlotSweep, energy: &str) -> Result<Table, CliError> {
    let ts = sweep.parameters();
    if sweep.kind == SectionKind::ValanisLandel {
        let h = |t: f64| (t - 1.0).powi(2);
        let radius = sweep.lo.abs().max(sweep.hi.abs()).max(1.0);
        let sampling = VlSampling {
            radius,
            ..VlSampling::default()
        };
        let hull = lower_convex_hull(&even_extension(h, sampling)?);
        let mut t = Table::new(["t", "h", "h_even", "conv_h_even"]);
        for x in ts {
            let c = hull
                .eval(x)
                .ok_or_else(|| CliError::Numerical(format!("{x} outside the sampled range")))?;
            t.push([num(x), num(h(x)), num(h(x.abs())), num(c)]);
        }
        return Ok(t);
    }
    let (w, q) = envelope_pair(energy)?;
    let param = match sweep.kind {
        SectionKind::Volumetric | SectionKind::Diag => "alpha",
        _ => "gamma",
    };
    let mut t = Table::new([param, "W", "QW"]);
    for x in ts {
        let f = match sweep.kind {
            SectionKind::Volumetric => Mat2::scaled_identity(x),
            SectionKind::Shear => Mat2::new(1.0, x, 0.0, 1.0),
            SectionKind::Diag => Mat2::new(x, 0.0, 0.0, sweep.beta),
            SectionKind::ValanisLandel => unreachable!(),
        };
        t.push([num(x), num(w(&f)), num(q(&f))]);
    }
    Ok(t)
}

pub fn cmd_plotdata(spec: &RunSpec) -> Result<Outcome, CliError> {
    let mut artifacts = Vec::new();
    let mut summary = String::new();
    for (i, sweep) in spec.plot.sweeps.iter().enumerate() {
        let t = sweep_table(sweep, &spec.energy)?;
        let duplicate = spec.plot.sweeps.iter().filter(|s| s.kind == sweep.kind).count() > 1;
        let name = if duplicate {
            format!("plot_{}_{i}.csv", sweep.name())
        } else {
            format!("plot_{}.csv", sweep.name())
        };
        let path = spec.path(&name);
        t.write(&path)?;
        let _ = writeln!(summary, "{name}: {} rows", t.rows.len());
        artifacts.push(path);
    }
    Ok(Outcome {
        summary,
        artifacts,
        failure: None,
    })
}
