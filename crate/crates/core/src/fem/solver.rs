use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{density_from_name, EnergyDensity, PenaltyConfig};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

use super::assemble::{assemble_energy, assemble_energy_only};
use super::diagnostics::{diagnostics, DetDiagnostics};
use super::mesh::{DisplacementField, QuadMesh};

/// Trust-region parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the Euclidean norm of the interior gradient drops below this.
    pub grad_tol: f64,
    pub seed: u64,
    /// Largest nodal value of the random initial `θ`.
    pub perturbation: f64,
    /// Number of sine modes per axis in the initial `θ`; 0 draws independent
    /// nodal values instead.
    pub perturbation_modes: usize,
    pub initial_radius: f64,
    pub max_radius: f64,
    /// Minimal actual/predicted decrease ratio for accepting a step.
    pub eta: f64,
    pub max_cg_iters: usize,
    /// Independent random starts with seeds `seed, seed+1, …`; the
    /// lowest final energy wins.
    pub starts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 2000,
            grad_tol: 1e-7,
            seed: 0,
            perturbation: 1e-3,
            perturbation_modes: 2,
            initial_radius: 0.05,
            max_radius: 10.0,
            eta: 1e-4,
            max_cg_iters: 200,
            starts: 6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} must be > 0, got {v}")))
            }
        };
        positive(self.grad_tol, "grad_tol")?;
        positive(self.initial_radius, "initial_radius")?;
        positive(self.max_radius, "max_radius")?;
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return Err(Error::InvalidInput("perturbation must be >= 0".into()));
        }
        if !(0.0..0.25).contains(&self.eta) {
            return Err(Error::InvalidInput("eta must lie in [0, 0.25)".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidInput("starts must be at least 1".into()));
        }
        if self.max_cg_iters == 0 {
            return Err(Error::InvalidInput("max_cg_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// A complete FEM run as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemConfig {
    #[serde(default = "default_n")]
    pub n_per_side: usize,
    pub f0: Mat2,
    pub energy: String,
    #[serde(default)]
    pub penalty: Option<PenaltyConfig>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    20
}
fn default_max_iters() -> usize {
    SolverOptions::default().max_iters
}
fn default_grad_tol() -> f64 {
    SolverOptions::default().grad_tol
}

impl FemConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: FemConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_side < 2 {
            return Err(Error::InvalidInput("n_per_side must be at least 2".into()));
        }
        if !self.f0.is_finite() {
            return Err(Error::InvalidInput("f0 must be finite".into()));
        }
        if let Some(p) = &self.penalty {
            p.validate()?;
        }
        self.options().validate()
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    /// Builds the mesh and density and runs [`minimize`].
    pub fn run(&self) -> Result<(QuadMesh, DisplacementField, SolveReport)> {
        self.validate()?;
        let mesh = QuadMesh::new(self.n_per_side)?;
        let w = density_from_name(&self.energy, self.penalty)?;
        let (field, report) = minimize(&mesh, &w, &self.f0, &self.options())?;
        Ok((mesh, field, report))
    }
}

/// Outcome of [`minimize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `I(φ) = ∫_Ω W(∇φ)`.
    pub energy: f64,
    /// `I / |Ω|`.
    pub energy_per_volume: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub min_det: f64,
    pub max_det: f64,
    pub negative_det_count: usize,
    pub orientation_violating: bool,
    pub converged: bool,
    pub wall_time_s: f64,
}

struct Problem<'a, W: ?Sized> {
    mesh: &'a QuadMesh,
    w: &'a W,
    f0: Mat2,
    interior: Vec<usize>,
    scratch: DisplacementField,
}

impl<W: EnergyDensity + ?Sized> Problem<'_, W> {
    fn energy(&mut self, x: &[f64]) -> Result<f64> {
        self.scratch.unpack(&self.interior, x);
        assemble_energy_only(self.mesh, &self.scratch, &self.f0, self.w)
    }

    fn energy_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.scratch.unpack(&self.interior, x);
        let (e, g) = assemble_energy(self.mesh, &self.scratch, &self.f0, self.w)?;
        Ok((e, self.interior.iter().flat_map(|&a| g[a]).collect()))
    }

    /// Directional finite difference of the gradient.
    fn hess_vec(&mut self, x: &[f64], g: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let vn = norm(v);
        if vn == 0.0 {
            return Ok(vec![0.0; v.len()]);
        }
        let eps = 1e-7 * (1.0 + norm(x)) / vn;
        let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + eps * b).collect();
        let (_, gp) = self.energy_grad(&xp)?;
        Ok(gp.iter().zip(g).map(|(a, b)| (a - b) / eps).collect())
    }
}

/// Seeded random start: independent nodal values, or a random combination
/// of `sin(kπ(X+1)/2)·sin(lπ(Y+1)/2)`, `k, l ≤ modes`, scaled to the
/// requested amplitude. Both vanish on the boundary.
fn initial_perturbation(mesh: &QuadMesh, interior: &[usize], opts: &SolverOptions) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    if opts.perturbation_modes == 0 {
        return (0..2 * interior.len())
            .map(|_| opts.perturbation * rng.gen_range(-1.0..=1.0))
            .collect();
    }
    let m = opts.perturbation_modes;
    let coeffs: Vec<[f64; 2]> = (0..m * m)
        .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
        .collect();
    let mut x: Vec<f64> = interior
        .iter()
        .flat_map(|&a| {
            let [px, py] = mesh.coords[a];
            let mut t = [0.0; 2];
            for k in 0..m {
                let sx = ((k + 1) as f64 * std::f64::consts::FRAC_PI_2 * (px + 1.0)).sin();
                for l in 0..m {
                    let sy = ((l + 1) as f64 * std::f64::consts::FRAC_PI_2 * (py + 1.0)).sin();
                    let c = coeffs[k * m + l];
                    t[0] += c[0] * sx * sy;
                    t[1] += c[1] * sx * sy;
                }
            }
            t
        })
        .collect();
    let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= opts.perturbation / peak);
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `τ ≥ 0` with `‖p + τ d‖ = r`.
fn to_boundary(p: &[f64], d: &[f64], r: f64) -> f64 {
    let (a, b, c) = (dot(d, d), 2.0 * dot(p, d), dot(p, p) - r * r);
    (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a)
}

/// Truncated conjugate gradients on the quadratic model inside the ball of
/// radius `r`. Returns the step and the model Hessian applied to it.
fn steihaug<W: EnergyDensity + ?Sized>(
    prob: &mut Problem<'_, W>,
    x: &[f64],
    g: &[f64],
    r: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.len();
    let gn = norm(g);
    let tol = gn * gn.sqrt().min(0.5);
    let mut p = vec![0.0; n];
    let mut hp = vec![0.0; n];
    let mut res: Vec<f64> = g.to_vec();
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut rr = dot(&res, &res);
    for _ in 0..max_iters {
        let hd = prob.hess_vec(x, g, &d)?;
        let curv = dot(&d, &hd);
        if curv <= 0.0 {
            let tau = to_boundary(&p, &d, r);
            for i in 0..n {
                p[i] += tau * d[i];
                hp[i] += tau * hd[i];
            }
            return Ok((p, hp));
        }
        let alpha = rr / curv;
        let next: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
        if norm(&next) >= r {
            let tau = to_boundary(&p, &d, r);
            for i in 0..n {
                p[i] += tau * d[i];
                hp[i] += tau * hd[i];
            }
            return Ok((p, hp));
        }
        p = next;
        for i in 0..n {
            hp[i] += alpha * hd[i];
            res[i] += alpha * hd[i];
        }
        let rr_new = dot(&res, &res);
        if rr_new.sqrt() <= tol {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            d[i] = -res[i] + beta * d[i];
        }
    }
    Ok((p, hp))
}

/// Minimizes `I(φ) = ∫_Ω W(∇φ)` over `φ = F₀x + θ`, `θ = 0` on `∂Ω`.
///
/// Trust-region Newton with truncated CG and finite-difference Hessian
/// products, run from `opts.starts` seeded random fields; the lowest final
/// energy is returned. Energies of accepted steps decrease monotonically.
/// Hitting the iteration cap is not an error; the report says
/// `converged: false`.
///
/// Densities with a [`EnergyDensity::warm_start_density`] are first
/// minimized through that density, and the result is refined with `w`.
pub fn minimize<W: EnergyDensity + ?Sized>(
    mesh: &QuadMesh,
    w: &W,
    f0: &Mat2,
    opts: &SolverOptions,
) -> Result<(DisplacementField, SolveReport)> {
    opts.validate()?;
    let clock = Instant::now();
    let interior = mesh.interior_nodes();
    let warm = w.warm_start_density();
    let mut best: Option<(DisplacementField, SolveReport)> = None;
    let mut iterations = 0;
    for k in 0..opts.starts {
        let run_opts = SolverOptions {
            seed: opts.seed.wrapping_add(k as u64),
            ..opts.clone()
        };
        let mut start = DisplacementField::zeros(mesh);
        start.unpack(&interior, &initial_perturbation(mesh, &interior, &run_opts));
        let run = match &warm {
            Some(s) => minimize_from(mesh, s, f0, &run_opts, &start)?,
            None => minimize_from(mesh, w, f0, &run_opts, &start)?,
        };
        iterations += run.1.iterations;
        if best.as_ref().map_or(true, |b| run.1.energy < b.1.energy) {
            best = Some(run);
        }
    }
    let (mut field, mut report) = best.expect("at least one start");
    if warm.is_some() {
        let refined = minimize_from(mesh, w, f0, opts, &field)?;
        iterations += refined.1.iterations;
        (field, report) = refined;
    }
    report.iterations = iterations;
    report.wall_time_s = clock.elapsed().as_secs_f64();
    Ok((field, report))
}

/// One trust-region run from a given field.
pub fn minimize_from<W: EnergyDensity + ?Sized>(
    mesh: &QuadMesh,
    w: &W,
    f0: &Mat2,
    opts: &SolverOptions,
    start_field: &DisplacementField,
) -> Result<(DisplacementField, SolveReport)> {
    opts.validate()?;
    if !f0.is_finite() {
        return Err(Error::InvalidInput("f0 must be finite".into()));
    }
    start_field.check_boundary(mesh)?;
    let start = Instant::now();
    let interior = mesh.interior_nodes();
    let mut x = start_field.pack(&interior);
    let mut prob = Problem {
        mesh,
        w,
        f0: *f0,
        interior,
        scratch: DisplacementField::zeros(mesh),
    };

    let (mut fx, mut g) = prob.energy_grad(&x)?;
    let mut radius = opts.initial_radius;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        if norm(&g) <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let (p, hp) = steihaug(&mut prob, &x, &g, radius, opts.max_cg_iters)?;
        let predicted = -(dot(&g, &p) + 0.5 * dot(&p, &hp));
        let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let f_trial = match prob.energy(&trial) {
            Ok(v) => v,
            Err(Error::NonFiniteEnergy { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let rho = if predicted > 0.0 {
            (fx - f_trial) / predicted
        } else {
            -1.0
        };
        let pn = norm(&p);
        if rho < 0.25 {
            radius = 0.25 * pn.min(radius);
        } else if rho > 0.75 && pn >= 0.99 * radius {
            radius = (2.0 * radius).min(opts.max_radius);
        }
        if rho > opts.eta && f_trial < fx {
            x = trial;
            let (fe, ge) = prob.energy_grad(&x)?;
            fx = fe;
            g = ge;
        }
        if radius < 1e-14 {
            break;
        }
    }
    if !converged && norm(&g) <= opts.grad_tol {
        converged = true;
    }

    let mut field = DisplacementField::zeros(mesh);
    field.unpack(&prob.interior, &x);
    field.check_boundary(mesh)?;
    let DetDiagnostics {
        min_det,
        max_det,
        negative_count,
        orientation_violating,
    } = diagnostics(mesh, &field, f0);
    let report = SolveReport {
        energy: fx,
        energy_per_volume: fx / mesh.area(),
        iterations,
        grad_norm: norm(&g),
        min_det,
        max_det,
        negative_det_count: negative_count,
        orientation_violating,
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((field, report))
}
