//! One-dimensional convex envelopes.
//!
//! [`lower_convex_hull`] is a single monotone Graham-type scan over abscissae
//! that are already sorted, so it runs in linear time. The same kernel
//! ([`lower_hull_indices`]) drives the lattice-line sweeps of the rank-one
//! lamination.

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Samples `(tᵢ, vᵢ)` of a scalar function with strictly increasing `tᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl SampledCurve {
    pub fn new(ts: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if ts.len() != vs.len() {
            return Err(Error::InvalidInput(format!(
                "abscissae and ordinates differ in length ({} vs {})",
                ts.len(),
                vs.len()
            )));
        }
        if ts.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a sampled curve needs at least 2 points, got {}",
                ts.len()
            )));
        }
        if ts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        if ts.iter().chain(&vs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled curve contains non-finite values".into()));
        }
        Ok(SampledCurve { ts, vs })
    }

    /// Samples `f` at `t = lo + k·step` for `k = 0..=n`.
    pub fn from_fn(lo: f64, step: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let ts: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
        let vs = ts.iter().map(|&t| f(t)).collect();
        SampledCurve::new(ts, vs)
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn vs(&self) -> &[f64] {
        &self.vs
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }
}

/// Lower convex hull of a sampled curve, evaluated by linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexEnvelope1D {
    pub hull_ts: Vec<f64>,
    pub hull_vs: Vec<f64>,
}

impl ConvexEnvelope1D {
    /// Envelope value at `t`, or `None` outside the sampled range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let ts = &self.hull_ts;
        let (first, last) = (ts[0], ts[ts.len() - 1]);
        if !(t >= first && t <= last) {
            return None;
        }
        // index of the first vertex strictly right of t
        let j = ts.partition_point(|&x| x <= t);
        if j == 0 {
            return Some(self.hull_vs[0]);
        }
        if j == ts.len() {
            return Some(self.hull_vs[ts.len() - 1]);
        }
        let (t0, t1) = (ts[j - 1], ts[j]);
        let (v0, v1) = (self.hull_vs[j - 1], self.hull_vs[j]);
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// The hull as a sampled curve, e.g. to convexify it again.
    pub fn to_curve(&self) -> SampledCurve {
        SampledCurve {
            ts: self.hull_ts.clone(),
            vs: self.hull_vs.clone(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.hull_ts.len()
    }
}

/// Indices of the lower convex hull vertices of `(t(i), v[i])`, `t` increasing.
///
/// `hull` is cleared and reused. Points on a hull edge (collinear) are dropped;
/// both endpoints are always kept.
pub fn lower_hull_indices(t: impl Fn(usize) -> f64, v: &[f64], hull: &mut Vec<usize>) {
    hull.clear();
    for i in 0..v.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // b survives only if it lies strictly below the chord a–i
            let cross = (t(b) - t(a)) * (v[i] - v[a]) - (v[b] - v[a]) * (t(i) - t(a));
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
}

/// Lower convex hull (convex envelope) of a sampled curve.
pub fn lower_convex_hull(curve: &SampledCurve) -> ConvexEnvelope1D {
    let mut idx = Vec::with_capacity(curve.len());
    lower_hull_indices(|i| curve.ts[i], &curve.vs, &mut idx);
    ConvexEnvelope1D {
        hull_ts: idx.iter().map(|&i| curve.ts[i]).collect(),
        hull_vs: idx.iter().map(|&i| curve.vs[i]).collect(),
    }
}

/// Sampling parameters of [`vl_envelope`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlSampling {
    pub radius: f64,
    pub step: f64,
}

impl Default for VlSampling {
    fn default() -> Self {
        VlSampling {
            radius: 4.0,
            step: 1e-3,
        }
    }
}

/// Samples the even extension `h̃(t) = h(|t|)` on `[−radius, radius]`.
///
/// Abscissae are `k·step` for integer `k`, so paired samples `±t` are exact
/// negatives of each other.
pub fn even_extension(h: impl Fn(f64) -> f64, sampling: VlSampling) -> Result<SampledCurve> {
    let VlSampling { radius, step } = sampling;
    if !(step > 0.0 && radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sampling needs radius > 0 and step > 0, got {radius}, {step}"
        )));
    }
    let n = (radius / step + 1e-9).floor() as i64;
    let ts: Vec<f64> = (-n..=n).map(|k| k as f64 * step).collect();
    let vs = ts.iter().map(|t| h(t.abs())).collect();
    SampledCurve::new(ts, vs)
}

/// Envelope of a Valanis–Landel energy `W(F) = Σ h(λₖ)`: `Σ C h̃(λₖ)`,
/// with `C h̃` the convex envelope of the even extension of `h`.
pub fn vl_envelope(h: impl Fn(f64) -> f64, f: &Mat2, sampling: VlSampling) -> Result<f64> {
    let sp = f.singular_values();
    if sampling.radius < sp.lambda1 {
        return Err(Error::InvalidInput(format!(
            "sampling radius {} is below the largest singular value {}",
            sampling.radius, sp.lambda1
        )));
    }
    let hull = lower_convex_hull(&even_extension(h, sampling)?);
    let eval = |x: f64| {
        hull.eval(x).ok_or_else(|| {
            Error::InvalidInput(format!("singular value {x} outside the sampled range"))
        })
    };
    Ok(eval(sp.lambda1)? + eval(sp.lambda2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_convex_chain_is_kept() {
        let c = SampledCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0]).unwrap();
        let h = lower_convex_hull(&c);
        assert_eq!(h.hull_ts, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn collinear_points_are_dropped() {
        let c = SampledCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let h = lower_convex_hull(&c);
        assert_eq!(h.hull_ts, vec![0.0, 3.0]);
    }

    #[test]
    fn convex_samples_are_their_own_hull() {
        let c = SampledCurve::from_fn(-2.0, 0.01, 400, |t| t * t).unwrap();
        let h = lower_convex_hull(&c);
        assert_eq!(h.hull_ts.len(), c.len());
        for (t, v) in c.ts().iter().zip(c.vs()) {
            assert_eq!(h.eval(*t).unwrap(), *v);
        }
    }

    #[test]
    fn double_well_envelope() {
        let c = SampledCurve::from_fn(-2.0, 0.01, 400, |t: f64| (t.abs() - 1.0).powi(2)).unwrap();
        let h = lower_convex_hull(&c);
        for k in 0..=400 {
            let t = -2.0 + k as f64 * 0.01;
            let expected = if t.abs() <= 1.0 { 0.0 } else { (t.abs() - 1.0).powi(2) };
            assert!((h.eval(t).unwrap() - expected).abs() < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn rejects_short_and_unsorted_curves() {
        assert!(SampledCurve::new(vec![0.0], vec![1.0]).is_err());
        assert!(SampledCurve::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SampledCurve::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn eval_outside_range_is_none() {
        let c = SampledCurve::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let h = lower_convex_hull(&c);
        assert!(h.eval(-0.1).is_none());
        assert!(h.eval(1.1).is_none());
        assert_eq!(h.eval(1.0), Some(1.0));
    }

    #[test]
    fn even_extension_is_symmetric() {
        let c = even_extension(|t| (t - 1.0).powi(3) + t.sin(), VlSampling::default()).unwrap();
        let n = c.len();
        for i in 0..n {
            assert_eq!(c.ts()[i], -c.ts()[n - 1 - i]);
            assert_eq!(c.vs()[i], c.vs()[n - 1 - i]);
        }
    }

    #[test]
    fn vl_envelope_examples() {
        let s = VlSampling::default();
        let h = |t: f64| (t - 1.0).powi(2);
        assert!(vl_envelope(h, &Mat2::scaled_identity(0.4), s).unwrap().abs() < 1e-12);
        assert!((vl_envelope(h, &Mat2::diag(2.0, 0.5), s).unwrap() - 1.0).abs() < 2e-3);
        let f = Mat2::new(1.3, 0.2, -0.4, 0.8);
        let sp = f.singular_values();
        assert!((vl_envelope(|t| t, &f, s).unwrap() - sp.sum()).abs() < 1e-12);
    }

    #[test]
    fn vl_envelope_rejects_small_radius() {
        let s = VlSampling {
            radius: 1.0,
            step: 1e-2,
        };
        assert!(vl_envelope(|t| t, &Mat2::diag(2.0, 0.5), s).is_err());
    }
}
