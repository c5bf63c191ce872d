//! Biot-type energy densities and their closed-form relaxations.
//!
//! All functions here are pure and isotropic: `W(Q₁ F Q₂) = W(F)` for
//! rotations `Q₁, Q₂`. The envelopes are
//!
//! * `Q W_Biot(F)   = Σ [λₖ − 1]₊²` on all of ℝ²ˣ²,
//! * `Q W_dist(F)   = 1 − 2 det F` if `‖F‖² + 2 det F < 1`, else `W_dist(F)`,
//! * `Q_{GL⁺} W_Biot = Q W_dist` on matrices with positive determinant.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat2::{singular_sum_gap_derivatives, singular_values, Mat2};
use crate::tolerances;

/// A stored-energy density `W: ℝ²ˣ² → ℝ`.
pub trait EnergyDensity: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, f: &Mat2) -> f64;

    /// Analytic derivative `∂W/∂F`, if the density supplies one.
    ///
    /// On nonsmooth sets a one-sided value is returned (the limit from the
    /// side with larger `‖F‖² + 2 det F`, resp. `det F > 0`); `None` means
    /// no gradient is available at `f`.
    fn gradient(&self, _f: &Mat2) -> Option<Mat2> {
        None
    }

    /// Whether `f` lies within `band` of a set where the density is not
    /// differentiable. Consumers use finite differences there.
    fn near_nonsmooth(&self, _f: &Mat2, _band: f64) -> bool {
        false
    }

    /// A density equal to this one wherever `det F > 0` and smooth across
    /// `det F = 0`, if one is known.
    fn positive_det_equivalent(&self) -> Option<SharedDensity> {
        None
    }

    /// Density whose minimizer is used as the starting field when
    /// minimizing this one. Set for determinant penalties, whose steep walls
    /// trap descent methods started from a random field.
    fn warm_start_density(&self) -> Option<SharedDensity> {
        None
    }
}

pub type SharedDensity = Arc<dyn EnergyDensity>;

impl<T: EnergyDensity + ?Sized> EnergyDensity for Arc<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn value(&self, f: &Mat2) -> f64 {
        (**self).value(f)
    }
    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        (**self).gradient(f)
    }
    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        (**self).near_nonsmooth(f, band)
    }
    fn positive_det_equivalent(&self) -> Option<SharedDensity> {
        (**self).positive_det_equivalent()
    }
    fn warm_start_density(&self) -> Option<SharedDensity> {
        (**self).warm_start_density()
    }
}

/// Central finite-difference gradient of a density.
pub fn fd_gradient<W: EnergyDensity + ?Sized>(w: &W, f: &Mat2, h: f64) -> Mat2 {
    let mut g = Mat2::ZERO;
    for k in 0..4 {
        let mut fp = *f;
        let mut fm = *f;
        fp.set(k, f.get(k) + h);
        fm.set(k, f.get(k) - h);
        g.set(k, (w.value(&fp) - w.value(&fm)) / (2.0 * h));
    }
    g
}

/// Gradient from the analytic map, or finite differences near kinks.
pub fn gradient_or_fd<W: EnergyDensity + ?Sized>(w: &W, f: &Mat2) -> Mat2 {
    if !w.near_nonsmooth(f, tolerances::NONSMOOTH_BAND) {
        if let Some(g) = w.gradient(f) {
            return g;
        }
    }
    fd_gradient(w, f, tolerances::FD_STEP)
}

// ---------------------------------------------------------------------------
// point evaluations

/// `W_Biot(F) = ‖√(FᵀF) − id‖² = (λ₁−1)² + (λ₂−1)²`.
pub fn w_biot(f: &Mat2) -> f64 {
    let sp = singular_values(f);
    let a = sp.lambda1 - 1.0;
    let b = sp.lambda2 - 1.0;
    a * a + b * b
}

/// `W_dist(F) = dist²(F, SO(2)) = ‖F‖² − 2√(‖F‖² + 2 det F) + 2`.
pub fn w_dist(f: &Mat2) -> f64 {
    (f.norm_sq() - 2.0 * f.conformal_sq().sqrt() + 2.0).max(0.0)
}

/// Seth–Hill scale function `f_(m)(x) = (x^{2m} − 1)/(2m)`, `log x` for `m = 0`.
pub fn seth_hill_scale(x: f64, m: f64) -> f64 {
    if m == 0.0 {
        x.ln()
    } else {
        (x.powf(2.0 * m) - 1.0) / (2.0 * m)
    }
}

fn seth_hill_scale_derivative(x: f64, m: f64) -> f64 {
    if m == 0.0 {
        1.0 / x
    } else {
        x.powf(2.0 * m - 1.0)
    }
}

/// `W_(m)(F) = Σᵢ f_(m)(λᵢ)²`.
///
/// `m = 1/2` is the Biot energy, `m = 0` the Hencky energy.
pub fn seth_hill_energy(f: &Mat2, m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::InvalidInput(format!("Seth-Hill exponent {m} is not finite")));
    }
    let sp = singular_values(f);
    if m <= 0.0 && sp.lambda2 <= 0.0 {
        return Err(Error::Domain(format!(
            "Seth-Hill energy with m = {m} needs positive singular values, got λ₂ = {}",
            sp.lambda2
        )));
    }
    let a = seth_hill_scale(sp.lambda1, m);
    let b = seth_hill_scale(sp.lambda2, m);
    Ok(a * a + b * b)
}

/// Relaxation of `W_Biot` over ℝ²ˣ²: `[λ₁−1]₊² + [λ₂−1]₊²`.
pub fn q_biot_unconstrained(f: &Mat2) -> f64 {
    let sp = singular_values(f);
    let a = (sp.lambda1 - 1.0).max(0.0);
    let b = (sp.lambda2 - 1.0).max(0.0);
    a * a + b * b
}

/// Relaxation of `W_dist` over ℝ²ˣ²: `1 − 2 det F` where `‖F‖² + 2 det F < 1`,
/// `W_dist` itself elsewhere.
pub fn q_dist_unconstrained(f: &Mat2) -> f64 {
    if f.conformal_sq() < 1.0 {
        1.0 - 2.0 * f.det()
    } else {
        w_dist(f)
    }
}

/// Relaxation of `W_Biot` (equivalently `W_dist`) restricted to `GL⁺(2)`.
pub fn q_glp(f: &Mat2) -> Result<f64> {
    let d = f.det();
    if d <= 0.0 {
        return Err(Error::Domain(format!(
            "constrained envelope is defined on det F > 0 only, got det F = {d}"
        )));
    }
    Ok(q_dist_unconstrained(f))
}

/// Independent route to `Q W_Biot` through `C = FᵀF`: minimize
/// `j(s₁, s₂) = (√(c₁+s₁) − 1)² + (√(c₂+s₂) − 1)²` over `s ≥ 0` by
/// enumerating the four complementarity cases and keeping the KKT points.
pub fn q_biot_pipkin_oracle(f: &Mat2) -> f64 {
    // eigenvalues of the symmetric C = FᵀF
    let c11 = f.a11 * f.a11 + f.a21 * f.a21;
    let c22 = f.a12 * f.a12 + f.a22 * f.a22;
    let c12 = f.a11 * f.a12 + f.a21 * f.a22;
    let mean = 0.5 * (c11 + c22);
    let half_diff = 0.5 * (c11 - c22);
    let radius = (half_diff * half_diff + c12 * c12).sqrt();
    let c = [(mean + radius).max(0.0), (mean - radius).max(0.0)];

    let j = |s: [f64; 2]| -> f64 {
        (0..2)
            .map(|i| {
                let r = (c[i] + s[i]).sqrt() - 1.0;
                r * r
            })
            .sum()
    };
    // ∂j/∂sᵢ has the sign of 1 − 1/√(cᵢ+sᵢ)
    let kkt = |s: [f64; 2]| -> bool {
        (0..2).all(|i| {
            let t = c[i] + s[i];
            let slope_nonneg = t >= 1.0 - 1e-14;
            let complementary = s[i] == 0.0 || (t - 1.0).abs() <= 1e-14;
            s[i] >= 0.0 && slope_nonneg && complementary
        })
    };

    let mut best = f64::INFINITY;
    for zero_first in [true, false] {
        for zero_second in [true, false] {
            let s = [
                if zero_first { 0.0 } else { 1.0 - c[0] },
                if zero_second { 0.0 } else { 1.0 - c[1] },
            ];
            if kkt(s) {
                best = best.min(j(s));
            }
        }
    }
    debug_assert!(best.is_finite(), "no KKT point for c = {c:?}");
    best
}

/// Brute-force `min_α ‖F − R(α)‖²` over `n` uniformly spaced angles in `(−π, π]`.
///
/// Test oracle for [`w_dist`].
pub fn dist_so2_bruteforce(f: &Mat2, n: usize) -> f64 {
    assert!(n >= 3, "need at least three angles");
    (1..=n)
        .map(|k| {
            let alpha = -PI + 2.0 * PI * k as f64 / n as f64;
            (*f - Mat2::rotation(alpha)).norm_sq()
        })
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// densities

/// `W_Biot` as a density.
#[derive(Clone, Copy, Debug, Default)]
pub struct Biot;

impl EnergyDensity for Biot {
    fn name(&self) -> String {
        "biot".into()
    }

    fn value(&self, f: &Mat2) -> f64 {
        w_biot(f)
    }

    // W = ‖F‖² − 2(λ₁+λ₂) + 2
    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let (d_sum, _) = singular_sum_gap_derivatives(f);
        d_sum.map(|ds| *f * 2.0 - ds * 2.0)
    }

    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        f.det().abs() < band || f.norm_sq() < band
    }

    fn positive_det_equivalent(&self) -> Option<SharedDensity> {
        Some(Arc::new(Dist))
    }
}

/// `W_dist = dist²(·, SO(2))` as a density.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dist;

impl EnergyDensity for Dist {
    fn name(&self) -> String {
        "dist".into()
    }

    fn value(&self, f: &Mat2) -> f64 {
        w_dist(f)
    }

    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let q = f.conformal_sq();
        (q > 0.0).then(|| *f * 2.0 - (*f + f.cofactor()) * (2.0 / q.sqrt()))
    }

    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        f.conformal_sq() < band
    }

    fn positive_det_equivalent(&self) -> Option<SharedDensity> {
        Some(Arc::new(Dist))
    }
}

/// Seth–Hill energy `W_(m)` as a density.
#[derive(Clone, Copy, Debug)]
pub struct SethHill {
    pub m: f64,
}

impl EnergyDensity for SethHill {
    fn name(&self) -> String {
        format!("seth_hill:{}", self.m)
    }

    /// Returns `+∞` outside the domain (`m ≤ 0` with a vanishing singular value).
    fn value(&self, f: &Mat2) -> f64 {
        seth_hill_energy(f, self.m).unwrap_or(f64::INFINITY)
    }

    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let sp = singular_values(f);
        if self.m <= 0.0 && sp.lambda2 <= 0.0 {
            return None;
        }
        let (d_sum, d_gap) = singular_sum_gap_derivatives(f);
        let (d_sum, d_gap) = (d_sum?, d_gap?);
        let g = |x: f64| seth_hill_scale(x, self.m) * seth_hill_scale_derivative(x, self.m);
        let g1 = g(sp.lambda1);
        let g2 = g(sp.lambda2);
        // ∂λ₁ = (∂Σ + ∂Δ)/2, ∂λ₂ = (∂Σ − ∂Δ)/2
        Some(d_sum * (g1 + g2) + d_gap * (g1 - g2))
    }

    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        let sp = singular_values(f);
        sp.gap() < band.sqrt() || f.det().abs() < band
    }
}

/// `Q W_Biot` over ℝ²ˣ² as a density.
#[derive(Clone, Copy, Debug, Default)]
pub struct QBiot;

impl EnergyDensity for QBiot {
    fn name(&self) -> String {
        "q_biot".into()
    }

    fn value(&self, f: &Mat2) -> f64 {
        q_biot_unconstrained(f)
    }

    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let sp = singular_values(f);
        if sp.lambda1 <= 1.0 {
            return Some(Mat2::ZERO);
        }
        let sign = if f.det() >= 0.0 { 1.0 } else { -1.0 };
        let (d_sum, d_gap) = singular_sum_gap_derivatives(f);
        let d_sum = d_sum?;
        if sp.lambda2 > 1.0 {
            // (λ₁−1)(∂Σ+∂Δ) + (λ₂−1)(∂Σ−∂Δ) = (Σ−2)∂Σ + Δ·∂Δ, and Δ·∂Δ = F − s·cof F
            Some(d_sum * (sp.sum() - 2.0) + (*f - f.cofactor() * sign))
        } else {
            Some((d_sum + d_gap?) * (sp.lambda1 - 1.0))
        }
    }

    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        let sp = singular_values(f);
        (sp.lambda1 - 1.0).abs() < band.sqrt()
            || (sp.lambda2 - 1.0).abs() < band.sqrt()
            || f.det().abs() < band
    }
}

/// `Q W_dist` over ℝ²ˣ² as a density. Continuously differentiable.
#[derive(Clone, Copy, Debug, Default)]
pub struct QDist;

impl EnergyDensity for QDist {
    fn name(&self) -> String {
        "q_dist".into()
    }

    fn value(&self, f: &Mat2) -> f64 {
        q_dist_unconstrained(f)
    }

    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let q = f.conformal_sq();
        if q < 1.0 {
            Some(f.cofactor() * -2.0)
        } else {
            Dist.gradient(f)
        }
    }
}

/// Penalty applied to non-positive determinants.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PenaltyConfig {
    pub k: f64,
    pub exponent: u32,
}

impl PenaltyConfig {
    pub fn new(k: f64, exponent: u32) -> Result<Self> {
        let cfg = PenaltyConfig { k, exponent };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidInput(format!("penalty k must be > 0, got {}", self.k)));
        }
        if !matches!(self.exponent, 1 | 2) {
            return Err(Error::InvalidInput(format!(
                "penalty exponent must be 1 or 2, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

/// `W(F) + k·[−det F]₊^e`.
#[derive(Clone, Debug)]
pub struct Penalized<W> {
    pub inner: W,
    pub cfg: PenaltyConfig,
}

/// Wrap a density with a determinant penalty.
pub fn penalize<W: EnergyDensity>(inner: W, cfg: PenaltyConfig) -> Result<Penalized<W>> {
    cfg.validate()?;
    Ok(Penalized { inner, cfg })
}

impl<W: EnergyDensity> EnergyDensity for Penalized<W> {
    fn name(&self) -> String {
        format!("{}+penalty(k={},e={})", self.inner.name(), self.cfg.k, self.cfg.exponent)
    }

    fn value(&self, f: &Mat2) -> f64 {
        let d = f.det();
        let base = self.inner.value(f);
        if d > 0.0 {
            base
        } else {
            base + self.cfg.k * (-d).powi(self.cfg.exponent as i32)
        }
    }

    /// At `det F = 0` the penalty contributes the `det F > 0` limit, i.e. nothing.
    fn gradient(&self, f: &Mat2) -> Option<Mat2> {
        let base = self.inner.gradient(f)?;
        let d = f.det();
        if d >= 0.0 {
            return Some(base);
        }
        let cof = f.cofactor();
        let extra = match self.cfg.exponent {
            1 => cof * -self.cfg.k,
            _ => cof * (2.0 * self.cfg.k * d),
        };
        Some(base + extra)
    }

    fn near_nonsmooth(&self, f: &Mat2, band: f64) -> bool {
        self.inner.near_nonsmooth(f, band) || (self.cfg.exponent == 1 && f.det().abs() < band)
    }

    fn warm_start_density(&self) -> Option<SharedDensity> {
        self.inner.positive_det_equivalent()
    }
}

/// Penalty used for `biot_penalized` when none is given.
pub const DEFAULT_PENALTY: PenaltyConfig = PenaltyConfig {
    k: 1e5,
    exponent: 1,
};

/// Looks up a density by name: `biot`, `dist`, `biot_penalized` or
/// `seth_hill:<m>`. A given penalty wraps any of them.
pub fn density_from_name(name: &str, penalty: Option<PenaltyConfig>) -> Result<SharedDensity> {
    let base: SharedDensity = match name.trim() {
        "biot" => Arc::new(Biot),
        "dist" => Arc::new(Dist),
        "biot_penalized" => {
            let cfg = penalty.unwrap_or(DEFAULT_PENALTY);
            return Ok(Arc::new(penalize(Biot, cfg)?));
        }
        other => match other.strip_prefix("seth_hill:") {
            Some(m) => {
                let m: f64 = m
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad Seth-Hill exponent in {other:?}")))?;
                if !m.is_finite() {
                    return Err(Error::InvalidInput(format!("bad Seth-Hill exponent in {other:?}")));
                }
                Arc::new(SethHill { m })
            }
            None => return Err(Error::InvalidInput(format!("unknown energy {other:?}"))),
        },
    };
    match penalty {
        Some(cfg) => Ok(Arc::new(penalize(base, cfg)?)),
        None => Ok(base),
    }
}
