//! Kernels `Ω` on the unit circle: representations, moments, and the
//! transfer to `[0,1]` by `Ω̃(x) = Ω(cos 2πx, sin 2πx)`.
//!
//! Circle integrals use unnormalized `dθ` on `[0, 2π)` throughout. Spike
//! families are natively parameterized on `[0,1]` and report their moments in
//! the native `dx` measure; the `2π` change-of-variable factor appears
//! explicitly wherever a circle-measure quantity of a spike kernel is formed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_segments;
use crate::numerics::sum::NeumaierSum;

/// Default tolerance for declared mean-zero checks on closed-form kernels.
pub const TOL_MEAN: f64 = 1e-10;

/// Overflow cap above which a moment integral is reported divergent.
pub const MOMENT_CAP: f64 = 1e12;

/// A direction on the circle, angle normalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitDirection {
    angle: f64,
}

impl UnitDirection {
    pub fn new(angle: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let mut a = angle % tau;
        if a < 0.0 {
            a += tau;
        }
        // the remainder can land exactly on tau through rounding
        if a >= tau {
            a = 0.0;
        }
        Self { angle: a }
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    /// `θ · ξ` for unit vectors given by the two angles.
    pub fn dot(self, other: UnitDirection) -> f64 {
        (self.angle - other.angle).cos()
    }
}

/// How a `SampledPeriodic` kernel is evaluated between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Trigonometric (spectral) interpolation; right for smooth kernels.
    Trig,
    /// Piecewise linear; does not overshoot on rough data.
    Linear,
}

/// One power spike `sign · |x - center|^{-β}` supported on
/// `(center - b, center)` with `b = e^{ln_width}` kept in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpike {
    pub center: f64,
    pub ln_width: f64,
    pub one_minus_beta: f64,
    pub sign: f64,
}

impl PowerSpike {
    /// `ln ∫ |spike| = (1-β) ln b - ln(1-β)`.
    pub fn ln_mass(&self) -> f64 {
        self.one_minus_beta * self.ln_width - self.one_minus_beta.ln()
    }

    pub fn mass(&self) -> f64 {
        self.ln_mass().exp()
    }
}

/// The § of parameters generating a paired-spike family with `n` running
/// from `n0` over `count` indices (kept so that position differences can be
/// computed without catastrophic cancellation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeFamilyParams {
    pub n0: u64,
    pub count: u64,
}

/// Kernel representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Finite Fourier series `Σ c_l e^{ilθ}`, coefficients sorted by `l`.
    Fourier { coeffs: Vec<(i64, Complex64)> },
    /// `M` uniform samples at `θ_j = 2πj/M` with an interpolation rule.
    Sampled { samples: Vec<Complex64>, interp: Interpolation },
    /// Power spikes on `[0,1]` plus a constant offset.
    Spikes { spikes: Vec<PowerSpike>, offset: f64, family: Option<SpikeFamilyParams> },
    /// `+1` on `[0, π)`, `-1` on `[π, 2π)`.
    Sign,
}

/// Serializable kernel descriptor (the external JSON interface).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelDescriptor {
    Fourier {
        /// Triples `[l, re, im]`.
        coefficients: Vec<(i64, f64, f64)>,
    },
    Sampled {
        samples: Vec<(f64, f64)>,
        interpolation: Interpolation,
    },
    Spikes {
        spikes: Vec<PowerSpike>,
        #[serde(default)]
        offset: f64,
    },
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n0: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<u64>,
    },
}

/// A kernel on the circle with cached metadata.
#[derive(Debug, Clone)]
pub struct SphericalKernel {
    repr: Representation,
    descriptor: KernelDescriptor,
    declared_mean_zero: bool,
    cached_l1: f64,
}

/// Moments of a kernel: `L¹` norm, mean, and the `|Ω| ln(2+|Ω|)` integral.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelMoments {
    pub l1_norm: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub llogl: f64,
    /// Estimated quadrature error on `llogl` (0 for closed forms).
    pub llogl_error: f64,
}

impl KernelMoments {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.mean_re, self.mean_im)
    }
}

impl SphericalKernel {
    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn descriptor(&self) -> &KernelDescriptor {
        &self.descriptor
    }

    pub fn declared_mean_zero(&self) -> bool {
        self.declared_mean_zero
    }

    /// Cached `L¹` norm (circle `dθ` measure; native `dx` for spike families).
    pub fn l1_norm(&self) -> f64 {
        self.cached_l1
    }

    pub fn from_fourier(coeffs: Vec<(i64, Complex64)>) -> Self {
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|&(l, _)| l);
        coeffs.retain(|&(_, c)| c.norm() != 0.0);
        let descriptor = KernelDescriptor::Fourier {
            coefficients: coeffs.iter().map(|&(l, c)| (l, c.re, c.im)).collect(),
        };
        let mean_zero = !coeffs.iter().any(|&(l, _)| l == 0);
        let mut k = Self {
            repr: Representation::Fourier { coeffs },
            descriptor,
            declared_mean_zero: mean_zero,
            cached_l1: 0.0,
        };
        k.cached_l1 = k.compute_l1();
        k
    }

    pub fn from_samples(samples: Vec<Complex64>, interp: Interpolation) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Domain("sampled kernel needs at least 4 samples".into()));
        }
        let descriptor = KernelDescriptor::Sampled {
            samples: samples.iter().map(|c| (c.re, c.im)).collect(),
            interpolation: interp,
        };
        let mean: Complex64 = samples.iter().sum::<Complex64>() / samples.len() as f64;
        let mut k = Self {
            repr: Representation::Sampled { samples, interp },
            descriptor,
            declared_mean_zero: mean.norm() <= TOL_MEAN,
            cached_l1: 0.0,
        };
        k.cached_l1 = k.compute_l1();
        Ok(k)
    }

    pub fn from_spikes(spikes: Vec<PowerSpike>, offset: f64) -> Result<Self> {
        Self::from_spike_family(spikes, offset, None)
    }

    pub(crate) fn from_spike_family(
        spikes: Vec<PowerSpike>,
        offset: f64,
        family: Option<SpikeFamilyParams>,
    ) -> Result<Self> {
        for s in &spikes {
            if !(s.one_minus_beta > 0.0 && s.one_minus_beta < 1.0) {
                return Err(Error::Domain(format!(
                    "spike exponent out of range: 1-beta = {}",
                    s.one_minus_beta
                )));
            }
            // support must stay inside (0, 1); widths are log-space so the
            // comparison is done against ln(center)
            if s.center <= 0.0 || s.center > 1.0 || s.ln_width >= s.center.ln() {
                return Err(Error::Domain(format!(
                    "spike support not inside (0,1): center {}, ln width {}",
                    s.center, s.ln_width
                )));
            }
        }
        let descriptor = KernelDescriptor::Spikes { spikes: spikes.clone(), offset };
        let mean: f64 = spikes.iter().map(|s| s.sign * s.mass()).sum::<f64>() + offset;
        let mut k = Self {
            repr: Representation::Spikes { spikes, offset, family },
            descriptor,
            declared_mean_zero: mean.abs() <= TOL_MEAN,
            cached_l1: 0.0,
        };
        k.cached_l1 = k.compute_l1();
        Ok(k)
    }

    /// Builtins: `cos`, `sin`, `sign`, `h1member` (lacunary series truncated
    /// at `terms`), `gs-counterexample` (paired spike family over
    /// `[n0, n0+count)`).
    pub fn builtin(name: &str, terms: Option<u64>, n0: Option<u64>, count: Option<u64>) -> Result<Self> {
        let descriptor = KernelDescriptor::Builtin {
            name: name.to_string(),
            terms,
            n0,
            count,
        };
        let mut k = match name {
            "cos" => {
                let half = Complex64::new(0.5, 0.0);
                Self::from_fourier(vec![(-1, half), (1, half)])
            }
            "sin" => {
                let half_i = Complex64::new(0.0, 0.5);
                Self::from_fourier(vec![(-1, half_i), (1, -half_i)])
            }
            "sign" => {
                let mut k = Self {
                    repr: Representation::Sign,
                    descriptor: descriptor.clone(),
                    declared_mean_zero: true,
                    cached_l1: std::f64::consts::TAU,
                };
                k.cached_l1 = std::f64::consts::TAU;
                k
            }
            "h1member" => {
                let m = terms.unwrap_or(1024);
                if m < 2 {
                    return Err(Error::Domain("h1member needs terms >= 2".into()));
                }
                let coeffs = (2..=m)
                    .map(|k| (k as i64, Complex64::new(1.0 / (k as f64).ln().powi(2), 0.0)))
                    .collect();
                Self::from_fourier(coeffs)
            }
            "gs-counterexample" => {
                let n0 = n0.unwrap_or(1_000_000_000);
                let count = count.unwrap_or(1000);
                let spikes = crate::counterexample::gs_spikes(n0, count, false)?;
                Self::from_spike_family(spikes, 0.0, Some(SpikeFamilyParams { n0, count }))?
            }
            other => return Err(Error::Domain(format!("unknown builtin kernel '{other}'"))),
        };
        k.descriptor = descriptor;
        Ok(k)
    }

    pub fn from_descriptor(d: &KernelDescriptor) -> Result<Self> {
        match d {
            KernelDescriptor::Fourier { coefficients } => Ok(Self::from_fourier(
                coefficients.iter().map(|&(l, re, im)| (l, Complex64::new(re, im))).collect(),
            )),
            KernelDescriptor::Sampled { samples, interpolation } => Self::from_samples(
                samples.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
                *interpolation,
            ),
            KernelDescriptor::Spikes { spikes, offset } => Self::from_spikes(spikes.clone(), *offset),
            KernelDescriptor::Builtin { name, terms, n0, count } => {
                Self::builtin(name, *terms, *n0, *count)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.descriptor)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: KernelDescriptor = serde_json::from_str(s)?;
        Self::from_descriptor(&d)
    }

    /// Largest Fourier order, when the representation is a series.
    pub fn fourier_order(&self) -> Option<i64> {
        match &self.repr {
            Representation::Fourier { coeffs } => {
                coeffs.iter().map(|&(l, _)| l.abs()).max()
            }
            _ => None,
        }
    }

    /// A cheap global bound for `sup |Ω|` (infinite for spike kernels).
    pub fn sup_bound(&self) -> f64 {
        match &self.repr {
            Representation::Fourier { coeffs } => coeffs.iter().map(|(_, c)| c.norm()).sum(),
            Representation::Sampled { samples, .. } => {
                2.0 * samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
            Representation::Spikes { .. } => f64::INFINITY,
            Representation::Sign => 1.0,
        }
    }
}

/// Pointwise evaluation `Ω(θ)`.
///
/// Spike kernels are evaluated through the `[0,1]` identification; landing
/// exactly on a spike endpoint is an error (the value is unbounded there).
pub fn eval_kernel(k: &SphericalKernel, theta: UnitDirection) -> Result<Complex64> {
    match k.representation() {
        Representation::Fourier { coeffs } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(l, c) in coeffs {
                acc += c * Complex64::new(0.0, l as f64 * theta.angle()).exp();
            }
            Ok(acc)
        }
        Representation::Sampled { samples, interp } => {
            Ok(eval_sampled(samples, *interp, theta.angle()))
        }
        Representation::Spikes { .. } => {
            let x = theta.angle() / std::f64::consts::TAU;
            eval_line_spikes(k, x)
        }
        Representation::Sign => {
            Ok(Complex64::new(if theta.angle() < std::f64::consts::PI { 1.0 } else { -1.0 }, 0.0))
        }
    }
}

fn eval_sampled(samples: &[Complex64], interp: Interpolation, angle: f64) -> Complex64 {
    let m = samples.len();
    let t = angle / std::f64::consts::TAU * m as f64;
    match interp {
        Interpolation::Linear => {
            let i0 = t.floor() as usize % m;
            let i1 = (i0 + 1) % m;
            let frac = t - t.floor();
            samples[i0] * (1.0 - frac) + samples[i1] * frac
        }
        Interpolation::Trig => {
            // cardinal-function form of the trigonometric interpolant; O(M)
            // per evaluation, allocation-free
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &s) in samples.iter().enumerate() {
                acc += s * cardinal(t - j as f64, m);
            }
            acc
        }
    }
}

/// Periodic cardinal interpolation weight for uniform samples.
fn cardinal(d: f64, m: usize) -> f64 {
    let x = std::f64::consts::PI * d / m as f64;
    if d.rem_euclid(m as f64).abs() < 1e-14 || (m as f64 - d.rem_euclid(m as f64)).abs() < 1e-14 {
        return 1.0;
    }
    if m % 2 == 0 {
        // sin(M x)/ (M tan x) form
        (m as f64 * x).sin() / (m as f64 * x.tan())
    } else {
        (m as f64 * x).sin() / (m as f64 * x.sin())
    }
}

/// Evaluate the line transfer `Ω̃(x)` at `x ∈ [0,1)`.
pub fn eval_line_spikes(k: &SphericalKernel, x: f64) -> Result<Complex64> {
    if let Representation::Spikes { spikes, offset, .. } = k.representation() {
        let mut acc = *offset;
        for s in spikes {
            if x == s.center {
                return Err(Error::SingularPoint(x));
            }
            let d = s.center - x;
            if d > 0.0 {
                let ln_d = d.ln();
                if ln_d < s.ln_width {
                    // inside the support: value = d^{-beta}
                    if ln_d == s.ln_width {
                        return Err(Error::SingularPoint(x));
                    }
                    acc += s.sign * ((s.one_minus_beta - 1.0) * ln_d).exp();
                }
            }
        }
        Ok(Complex64::new(acc, 0.0))
    } else {
        Err(Error::Domain("eval_line_spikes on a non-spike kernel".into()))
    }
}

/// `∫_{S¹} Ω dθ` (unnormalized surface integral), closed form where the
/// representation allows, quadrature otherwise. Returns (value, error bound).
pub fn mean_value(k: &SphericalKernel) -> Result<(Complex64, f64)> {
    match k.representation() {
        Representation::Fourier { coeffs } => {
            let c0 = coeffs
                .iter()
                .find(|&&(l, _)| l == 0)
                .map(|&(_, c)| c)
                .unwrap_or_else(|| Complex64::new(0.0, 0.0));
            Ok((c0 * std::f64::consts::TAU, 0.0))
        }
        Representation::Sampled { samples, .. } => {
            // periodic trapezoid = exact mean of the interpolant
            let mean: Complex64 = samples.iter().sum::<Complex64>() / samples.len() as f64;
            Ok((mean * std::f64::consts::TAU, 1e-14 * k.cached_l1))
        }
        Representation::Spikes { spikes, offset, .. } => {
            let mut acc = NeumaierSum::new();
            for s in spikes {
                acc.add(s.sign * s.mass());
            }
            acc.add(*offset);
            // native [0,1] measure
            Ok((Complex64::new(acc.value(), 0.0), 1e-15 * k.cached_l1))
        }
        Representation::Sign => Ok((Complex64::new(0.0, 0.0), 0.0)),
    }
}

/// Return `k - mean/(2π)` so that the result has mean value zero.
pub fn project_mean_zero(k: &SphericalKernel) -> Result<SphericalKernel> {
    let (mean, _) = mean_value(k)?;
    match k.representation() {
        Representation::Fourier { coeffs } => {
            let coeffs = coeffs.iter().cloned().filter(|&(l, _)| l != 0).collect();
            Ok(SphericalKernel::from_fourier(coeffs))
        }
        Representation::Sampled { samples, interp } => {
            let avg = mean / std::f64::consts::TAU;
            SphericalKernel::from_samples(samples.iter().map(|&s| s - avg).collect(), *interp)
        }
        Representation::Spikes { spikes, offset, family } => {
            // native measure: subtract the [0,1] mean from the offset
            SphericalKernel::from_spike_family(spikes.clone(), offset - mean.re, *family)
        }
        Representation::Sign => Ok(k.clone()),
    }
}

impl SphericalKernel {
    fn compute_l1(&self) -> f64 {
        match &self.repr {
            Representation::Spikes { spikes, offset, .. } => {
                let mut acc = NeumaierSum::new();
                for s in spikes {
                    acc.add(s.mass());
                }
                acc.value() + offset.abs()
            }
            Representation::Sign => std::f64::consts::TAU,
            _ => {
                let (v, _) = self
                    .quadrature_moment(|z| z.norm())
                    .expect("L1 quadrature of a bounded kernel cannot fail");
                v
            }
        }
    }

    /// Adaptive quadrature of `g(Ω(θ))` over the circle for bounded kernels.
    fn quadrature_moment<G: Fn(Complex64) -> f64>(&self, g: G) -> Result<(f64, f64)> {
        let tau = std::f64::consts::TAU;
        let f = |theta: f64| -> f64 {
            let v = eval_kernel_raw(self, theta);
            g(v)
        };
        // split at sample breakpoints / sign jumps to help the kink handling
        let splits: Vec<f64> = match &self.repr {
            Representation::Sign => vec![0.0, std::f64::consts::PI, tau],
            Representation::Fourier { coeffs } => {
                let order = coeffs.iter().map(|&(l, _)| l.abs()).max().unwrap_or(1).max(1);
                let pieces = (4 * order).min(256) as usize;
                (0..=pieces).map(|i| tau * i as f64 / pieces as f64).collect()
            }
            _ => (0..=16).map(|i| tau * i as f64 / 16.0).collect(),
        };
        let segs: Vec<(f64, f64)> = splits.windows(2).map(|w| (w[0], w[1])).collect();
        let out = adaptive_segments(&f, &segs, 1e-10 * (1.0 + self.cached_l1), 4000)?;
        Ok((out.value, out.error))
    }
}

fn eval_kernel_raw(k: &SphericalKernel, theta: f64) -> Complex64 {
    eval_kernel(k, UnitDirection::new(theta)).unwrap_or(Complex64::new(0.0, 0.0))
}

/// `L¹` norm, mean, and `∫ |Ω| ln(2+|Ω|)`.
pub fn moments(k: &SphericalKernel) -> Result<KernelMoments> {
    let (mean, _) = mean_value(k)?;
    match k.representation() {
        Representation::Spikes { spikes, offset, .. } => {
            // closed forms per spike: |Omega| = u^{-beta} on the support, so
            // |Omega| ln(2+|Omega|) = u^{-beta} [beta ln(1/u) + ln1p(2 u^beta)]
            let mut l1 = NeumaierSum::new();
            let mut llogl = NeumaierSum::new();
            for s in spikes {
                let mass = s.mass();
                l1.add(mass);
                let beta = 1.0 - s.one_minus_beta;
                let gamma = -s.ln_width;
                // beta * int u^{-beta} ln(1/u) du = beta * mass * (gamma + 1/(1-beta))
                llogl.add(beta * mass * (gamma + 1.0 / s.one_minus_beta));
                // series for int u^{-beta} ln1p(2 u^beta) du, exact for b <= 1/2
                let mut term_ln_b_pow = 0.0; // ln(b^{k beta}) accumulator
                for kk in 1..60 {
                    let kf = kk as f64;
                    term_ln_b_pow += beta * s.ln_width;
                    let piece = (2.0f64).powi(kk) / kf * (s.one_minus_beta * s.ln_width + term_ln_b_pow).exp()
                        / (s.one_minus_beta + kf * beta);
                    let signed = if kk % 2 == 1 { piece } else { -piece };
                    llogl.add(signed);
                    if piece < 1e-18 * llogl.value().abs().max(1e-300) {
                        break;
                    }
                }
            }
            if offset.abs() > 0.0 {
                l1.add(offset.abs());
                llogl.add(offset.abs() * (2.0 + offset.abs()).ln());
            }
            let l1 = l1.value();
            let llogl = llogl.value();
            if !llogl.is_finite() || llogl > MOMENT_CAP {
                return Err(Error::DivergentMoment { cap: MOMENT_CAP });
            }
            Ok(KernelMoments { l1_norm: l1, mean_re: mean.re, mean_im: mean.im, llogl, llogl_error: 1e-14 * llogl })
        }
        _ => {
            let (l1, e1) = k.quadrature_moment(|z| z.norm())?;
            let (llogl, e2) = k.quadrature_moment(|z| {
                let a = z.norm();
                a * (2.0 + a).ln()
            })?;
            if llogl > MOMENT_CAP {
                return Err(Error::DivergentMoment { cap: MOMENT_CAP });
            }
            Ok(KernelMoments {
                l1_norm: l1,
                mean_re: mean.re,
                mean_im: mean.im,
                llogl,
                llogl_error: e1 + e2,
            })
        }
    }
}

/// The transfer of a circle kernel to `[0,1]`.
pub struct LineKernel<'a> {
    kernel: &'a SphericalKernel,
}

/// `Ω̃` with `Ω̃(x) = Ω(cos 2πx, sin 2πx)`; spike kernels are native.
pub fn to_line_function(k: &SphericalKernel) -> LineKernel<'_> {
    LineKernel { kernel: k }
}

impl<'a> LineKernel<'a> {
    pub fn kernel(&self) -> &'a SphericalKernel {
        self.kernel
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        match self.kernel.representation() {
            Representation::Spikes { .. } => eval_line_spikes(self.kernel, x),
            _ => eval_kernel(self.kernel, UnitDirection::new(x * std::f64::consts::TAU)),
        }
    }

    /// `∫₀¹ |Ω̃| dx`.
    pub fn l1(&self) -> f64 {
        match self.kernel.representation() {
            Representation::Spikes { .. } => self.kernel.l1_norm(),
            _ => self.kernel.l1_norm() / std::f64::consts::TAU,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cos_kernel() -> SphericalKernel {
        SphericalKernel::builtin("cos", None, None, None).unwrap()
    }

    #[test]
    fn eval_fourier_basics() {
        let k = SphericalKernel::from_fourier(vec![(1, Complex64::new(1.0, 0.0))]);
        let v = eval_kernel(&k, UnitDirection::new(0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        let v = eval_kernel(&k, UnitDirection::new(std::f64::consts::PI)).unwrap();
        assert_relative_eq!(v.re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_sampled_cos() {
        let m = 256;
        let samples: Vec<Complex64> = (0..m)
            .map(|j| Complex64::new((std::f64::consts::TAU * j as f64 / m as f64).cos(), 0.0))
            .collect();
        for interp in [Interpolation::Trig, Interpolation::Linear] {
            let k = SphericalKernel::from_samples(samples.clone(), interp).unwrap();
            let v = eval_kernel(&k, UnitDirection::new(std::f64::consts::FRAC_PI_3)).unwrap();
            let tol = match interp {
                Interpolation::Trig => 1e-12,
                Interpolation::Linear => 1e-3,
            };
            assert!((v.re - 0.5).abs() < tol, "{interp:?}: {}", v.re);
        }
    }

    #[test]
    fn mean_values() {
        let k = SphericalKernel::from_fourier(vec![(1, Complex64::new(1.0, 0.0))]);
        assert_eq!(mean_value(&k).unwrap().0.norm(), 0.0);
        let k1 = SphericalKernel::from_fourier(vec![(0, Complex64::new(1.0, 0.0))]);
        assert_relative_eq!(mean_value(&k1).unwrap().0.re, std::f64::consts::TAU, epsilon = 1e-14);
    }

    #[test]
    fn spike_pair_mean_cancels() {
        let spikes = vec![
            PowerSpike { center: 0.3, ln_width: -20.0, one_minus_beta: 0.4, sign: 1.0 },
            PowerSpike { center: 0.7, ln_width: -20.0, one_minus_beta: 0.4, sign: -1.0 },
        ];
        let k = SphericalKernel::from_spikes(spikes, 0.0).unwrap();
        assert!(mean_value(&k).unwrap().0.norm() < 1e-12);
        assert!(k.declared_mean_zero());
    }

    #[test]
    fn project_mean_zero_cases() {
        // constant kernel dies
        let k1 = SphericalKernel::from_fourier(vec![(0, Complex64::new(1.0, 0.0))]);
        let p = project_mean_zero(&k1).unwrap();
        assert_eq!(mean_value(&p).unwrap().0.norm(), 0.0);
        assert_eq!(p.l1_norm(), 0.0);
        // kills only c0
        let k2 = SphericalKernel::from_fourier(vec![
            (0, Complex64::new(3.0, 0.0)),
            (1, Complex64::new(2.0, 0.0)),
        ]);
        let p2 = project_mean_zero(&k2).unwrap();
        match p2.representation() {
            Representation::Fourier { coeffs } => {
                assert_eq!(coeffs.len(), 1);
                assert_eq!(coeffs[0].0, 1);
                assert_relative_eq!(coeffs[0].1.re, 2.0);
            }
            _ => panic!("expected fourier"),
        }
        // idempotent on already-mean-zero kernels
        let p3 = project_mean_zero(&cos_kernel()).unwrap();
        assert!(mean_value(&p3).unwrap().0.norm() < 1e-12);
        let p4 = project_mean_zero(&p3).unwrap();
        assert!((p3.l1_norm() - p4.l1_norm()).abs() < 1e-12);
    }

    #[test]
    fn moments_of_cos() {
        let m = moments(&cos_kernel()).unwrap();
        assert_relative_eq!(m.l1_norm, 4.0, epsilon = 1e-9);
        assert!(m.mean().norm() < 1e-12);
        // |cos| ln(2+|cos|) <= |cos| ln 3 pointwise
        assert!(m.llogl <= 4.0 * 3.0f64.ln() + 1e-9);
        assert!(m.llogl >= m.l1_norm * std::f64::consts::LN_2 - 1e-9);
    }

    #[test]
    fn moments_zero_kernel() {
        let k = SphericalKernel::from_fourier(vec![]);
        let m = moments(&k).unwrap();
        assert_eq!(m.l1_norm, 0.0);
        assert_eq!(m.llogl, 0.0);
        assert_eq!(m.mean().norm(), 0.0);
    }

    #[test]
    fn sign_kernel_basics() {
        let k = SphericalKernel::builtin("sign", None, None, None).unwrap();
        assert_eq!(eval_kernel(&k, UnitDirection::new(1.0)).unwrap().re, 1.0);
        assert_eq!(eval_kernel(&k, UnitDirection::new(4.0)).unwrap().re, -1.0);
        assert_relative_eq!(k.l1_norm(), std::f64::consts::TAU);
        assert_eq!(mean_value(&k).unwrap().0.norm(), 0.0);
    }

    #[test]
    fn line_transfer() {
        let k = cos_kernel();
        let line = to_line_function(&k);
        for x in [0.0, 0.1, 0.37, 0.9] {
            let want = (std::f64::consts::TAU * x).cos();
            assert_relative_eq!(line.eval(x).unwrap().re, want, epsilon = 1e-13);
        }
        // L1 mass transfers with the 2 pi factor
        assert_relative_eq!(line.l1(), k.l1_norm() / std::f64::consts::TAU, epsilon = 1e-12);
    }

    #[test]
    fn spike_eval_and_singularities() {
        let s = PowerSpike { center: 0.5, ln_width: (0.01f64).ln(), one_minus_beta: 0.5, sign: 1.0 };
        let k = SphericalKernel::from_spikes(vec![s], 0.0).unwrap();
        let line = to_line_function(&k);
        // inside the support: (0.5 - x)^{-1/2}
        let x = 0.495;
        assert_relative_eq!(line.eval(x).unwrap().re, (0.5f64 - x).powf(-0.5), epsilon = 1e-12);
        // outside
        assert_eq!(line.eval(0.45).unwrap().re, 0.0);
        // exactly on the singular endpoint
        assert!(matches!(line.eval(0.5), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn descriptor_round_trip() {
        for k in [
            cos_kernel(),
            SphericalKernel::builtin("sign", None, None, None).unwrap(),
            SphericalKernel::builtin("h1member", Some(64), None, None).unwrap(),
            SphericalKernel::from_spikes(
                vec![PowerSpike { center: 0.25, ln_width: -30.0, one_minus_beta: 0.3, sign: -1.0 }],
                0.0,
            )
            .unwrap(),
        ] {
            let json = k.to_json().unwrap();
            let back = SphericalKernel::from_json(&json).unwrap();
            assert_eq!(k.descriptor(), back.descriptor());
            assert!((k.l1_norm() - back.l1_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_builtin_is_domain_error() {
        assert!(matches!(
            SphericalKernel::builtin("box", None, None, None),
            Err(Error::Domain(_))
        ));
    }
}
