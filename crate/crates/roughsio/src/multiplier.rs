//! Fourier symbols of the dyadic kernel pieces and the auxiliary symbols of
//! the Littlewood–Paley scheme, with decay scans at the symbol level (where
//! `L²→L²` norms are exact suprema of the multiplier).
//!
//! The annulus piece `σ₀ = Ω(x/|x|)/|x|² · χ_{1≤|x|≤2}` has
//! `σ̂₀(ξ) = ∫ Ω(θ) I(|ξ| ξ'·θ) dθ` with the radial factor
//! `I(t) = ∫₁² e^{2πirt} dr/r`. Low-order Fourier kernels reduce to annulus
//! Bessel profiles, which is what makes scans up to radius `2^20` cheap; rough
//! kernels go through certified adaptive quadrature in the angle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_kernel, Representation, SphericalKernel, UnitDirection};
use crate::numerics::quad::{adaptive_segments, composite_gl, gauss_legendre};
use crate::numerics::smoothstep;
use crate::numerics::special::{bessel_annulus_profile, e1_imag};

const TAU: f64 = std::f64::consts::TAU;
const LN2: f64 = std::f64::consts::LN_2;

/// A frequency point in polar form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub radius: f64,
    pub direction: UnitDirection,
}

impl FrequencyPoint {
    pub fn new(radius: f64, angle: f64) -> Self {
        Self { radius, direction: UnitDirection::new(angle) }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { radius: self.radius * factor, direction: self.direction }
    }
}

/// A symbol value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SymbolSample {
    pub frequency: FrequencyPoint,
    pub re: f64,
    pub im: f64,
    pub error: f64,
}

impl SymbolSample {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `I(t) = ∫₁² e^{2πirt} dr/r`.
///
/// Satisfies `I(0) = ln 2`, `I(-t) = conj I(t)` and `|I(t)| ≤ min(2, 3/|t|)`.
/// Small arguments use a fixed-order Gauss rule (the integrand is smooth);
/// large arguments use the exponential-integral representation
/// `I(t) = E₁(-2πit) - E₁(-4πit)`.
pub fn inner_oscillatory(t: f64) -> Complex64 {
    let at = t.abs();
    if at == 0.0 {
        return Complex64::new(LN2, 0.0);
    }
    let v = if at <= 2.0 {
        GL20.with(|nodes| {
            composite_gl(
                &|r: f64| Complex64::new(0.0, TAU * r * at).exp() / r,
                1.0,
                2.0,
                2,
                nodes,
            )
        })
    } else {
        // ∫₁² e^{2πi a r} dr/r = ∫_{2πa}^{4πa} e^{iu} du/u = E₁(-2πia) - E₁(-4πia)
        // and E₁(-iy) = conj E₁(iy)
        let y = TAU * at;
        (e1_imag(y) - e1_imag(2.0 * y)).conj()
    };
    if t > 0.0 {
        v
    } else {
        v.conj()
    }
}

thread_local! {
    static GL20: (Vec<f64>, Vec<f64>) = gauss_legendre(20);
    static GL15: (Vec<f64>, Vec<f64>) = gauss_legendre(15);
}

/// Circle-measure `L¹` norm (native spike masses carry the `2π` transfer
/// factor here).
fn circle_l1(k: &SphericalKernel) -> f64 {
    match k.representation() {
        Representation::Spikes { .. } => TAU * k.l1_norm(),
        _ => k.l1_norm(),
    }
}

fn fourier_small_order(k: &SphericalKernel) -> Option<&[(i64, Complex64)]> {
    match k.representation() {
        Representation::Fourier { coeffs } => {
            let order = coeffs.iter().map(|&(l, _)| l.abs()).max().unwrap_or(0);
            if order <= 12 {
                Some(coeffs)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// `i^l` for signed `l`.
fn i_pow(l: i64) -> Complex64 {
    match l.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Signed-order annulus profile `B_l`, using `B_{-l} = (-1)^l B_l`.
fn profile(l: i64, rho: f64) -> (f64, f64) {
    let (v, e) = bessel_annulus_profile(l.unsigned_abs() as u32, rho);
    if l < 0 && l.rem_euclid(2) == 1 {
        (-v, e)
    } else {
        (v, e)
    }
}

/// The symbol of the unit annulus piece at `ξ`.
pub fn sigma0_hat(k: &SphericalKernel, xi: FrequencyPoint, tol: f64) -> Result<SymbolSample> {
    let rho = xi.radius;
    let phi = xi.direction.angle();
    if rho == 0.0 {
        // the inner factor is the constant ln 2, so the mean decides
        let (mean, err) = crate::kernel::mean_value(k)?;
        let mz = match k.representation() {
            Representation::Spikes { .. } => mean * TAU,
            _ => mean,
        };
        let v = mz * LN2;
        return Ok(SymbolSample { frequency: xi, re: v.re, im: v.im, error: err * LN2 });
    }
    let (value, error) = match k.representation() {
        Representation::Fourier { .. } if fourier_small_order(k).is_some() => {
            let coeffs = fourier_small_order(k).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            for &(l, c) in coeffs {
                let (b, e) = profile(l, rho);
                acc += c * i_pow(l) * Complex64::new(0.0, l as f64 * phi).exp() * b;
                err += c.norm() * e;
            }
            (acc * TAU, err * TAU)
        }
        Representation::Spikes { spikes, offset, .. } => {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            let mut mass_total = 0.0;
            let mut width_max: f64 = 0.0;
            for s in spikes {
                let mass = s.mass();
                let t = rho * (TAU * s.center - phi).cos();
                acc += s.sign * mass * inner_oscillatory(t);
                mass_total += mass;
                width_max = width_max.max(s.ln_width.exp());
            }
            // point-mass replacement error: |I'| <= 4π over the spike width
            err += mass_total * 4.0 * std::f64::consts::PI * rho * TAU * width_max;
            if *offset != 0.0 {
                let (b0, e0) = profile(0, rho);
                acc += Complex64::new(offset * b0, 0.0);
                err += offset.abs() * e0;
            }
            (acc * TAU, err * TAU)
        }
        _ => theta_quadrature(k, rho, phi, tol, false)?,
    };
    if error > tol {
        return Err(Error::QuadratureFailure { achieved: error, requested: tol });
    }
    Ok(SymbolSample { frequency: xi, re: value.re, im: value.im, error })
}

/// Angle quadrature of `∫ g(θ) I(ρ cos(θ-φ)) dθ` with `g = Ω` or `|Ω|`.
fn theta_quadrature(
    k: &SphericalKernel,
    rho: f64,
    phi: f64,
    tol: f64,
    absolute: bool,
) -> Result<(Complex64, f64)> {
    let f = |theta: f64| -> Complex64 {
        let v = eval_kernel(k, UnitDirection::new(theta)).unwrap_or(Complex64::new(0.0, 0.0));
        let w = if absolute { Complex64::new(v.norm(), 0.0) } else { v };
        w * inner_oscillatory(rho * (theta - phi).cos())
    };
    // break at the kernel's own jumps and at the oscillation stationary points
    let mut breaks: Vec<f64> = vec![0.0, TAU];
    if let Representation::Sign = k.representation() {
        breaks.push(std::f64::consts::PI);
    }
    for s in [phi, phi + std::f64::consts::PI, phi + std::f64::consts::FRAC_PI_2, phi + 1.5 * std::f64::consts::PI] {
        breaks.push(s.rem_euclid(TAU));
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let segs: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    if rho <= 48.0 {
        let out = adaptive_segments(&f, &segs, tol, 6000)?;
        Ok((out.value, out.error))
    } else {
        // composite rule with the panel count tied to the phase budget,
        // error from one refinement step
        let panels_per_unit = (1.3 * rho / TAU).ceil().max(2.0);
        let run = |mult: f64| -> Complex64 {
            GL15.with(|nodes| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(a, b) in &segs {
                    let p = ((b - a) * panels_per_unit * mult).ceil().max(2.0) as usize;
                    acc += composite_gl(&f, a, b, p, nodes);
                }
                acc
            })
        };
        let coarse = run(1.0);
        let fine = run(1.6);
        let err = (fine - coarse).norm().max(1e-14 * circle_l1(k));
        Ok((fine, err))
    }
}

/// Symbol of `|σ₀|` (the kernel `|Ω|` on the same annulus). At the origin the
/// value is exactly `ln 2 · ‖Ω‖₁` (the calibration target for the bump).
pub fn abs_sigma0_hat(k: &SphericalKernel, xi: FrequencyPoint, tol: f64) -> Result<SymbolSample> {
    let rho = xi.radius;
    let phi = xi.direction.angle();
    if rho == 0.0 {
        let v = LN2 * circle_l1(k);
        return Ok(SymbolSample { frequency: xi, re: v, im: 0.0, error: 0.0 });
    }
    let (value, error) = match k.representation() {
        Representation::Sign => {
            // |Ω| ≡ 1: the symbol is the radial profile alone
            let (b0, e0) = profile(0, rho);
            (Complex64::new(TAU * b0, 0.0), TAU * e0)
        }
        Representation::Spikes { spikes, offset, .. } => {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut err = 0.0;
            let mut mass_total = 0.0;
            let mut width_max: f64 = 0.0;
            for s in spikes {
                let mass = s.mass();
                let t = rho * (TAU * s.center - phi).cos();
                acc += mass * inner_oscillatory(t);
                mass_total += mass;
                width_max = width_max.max(s.ln_width.exp());
            }
            err += mass_total * 4.0 * std::f64::consts::PI * rho * TAU * width_max;
            if *offset != 0.0 {
                let (b0, e0) = profile(0, rho);
                acc += Complex64::new(offset.abs() * b0, 0.0);
                err += offset.abs() * e0;
            }
            (acc * TAU, err * TAU)
        }
        _ => theta_quadrature(k, rho, phi, tol, true)?,
    };
    if error > tol {
        return Err(Error::QuadratureFailure { achieved: error, requested: tol });
    }
    Ok(SymbolSample { frequency: xi, re: value.re, im: value.im, error })
}

/// `σ̂_k(ξ) = σ̂₀(2^k ξ)` by the dilation identity (same code path).
pub fn dyadic_symbol(k: &SphericalKernel, kk: i32, xi: FrequencyPoint, tol: f64) -> Result<SymbolSample> {
    sigma0_hat(k, xi.scaled((kk as f64).exp2()), tol)
}

// ---------- Littlewood–Paley window ----------

/// Smooth radial window `ψ` with `Σ_j ψ(2^j r)² = 1` for all `r > 0`.
///
/// Built from a smoothstep cutoff `χ` (`χ = 1` on `r ≤ scale`, `0` on
/// `r ≥ 2·scale`) through `ψ(r)² = χ(r) - χ(2r)`, so the dyadic sum
/// telescopes exactly; support is `(scale/2, 2·scale)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LPWindow {
    pub scale: f64,
    pub order: u32,
    pub r_lo: f64,
    pub r_hi: f64,
}

/// Construct the window; `scale = 1`, `order = 7` is the default profile.
pub fn lp_window(scale: f64, order: u32) -> Result<LPWindow> {
    if !(scale > 0.0) {
        return Err(Error::Domain("window scale must be positive".into()));
    }
    Ok(LPWindow { scale, order, r_lo: scale / 2.0, r_hi: 2.0 * scale })
}

impl LPWindow {
    /// The cutoff `χ`.
    pub fn chi(&self, r: f64) -> f64 {
        1.0 - smoothstep(self.order, r / self.scale - 1.0)
    }

    /// `ψ(r)²` (exact telescoping identity `ψ(r)² + χ(2r) = χ(r)`).
    pub fn psi_sq(&self, r: f64) -> f64 {
        (self.chi(r) - self.chi(2.0 * r)).max(0.0)
    }
}

/// `ψ(r)`.
pub fn window_eval(w: &LPWindow, r: f64) -> f64 {
    w.psi_sq(r).sqrt()
}

/// Radial Schwartz-type bump on the Fourier side: `Φ̂(r) = amplitude` for
/// `r ≤ 2`, `0` for `r ≥ 3`, monotone smoothstep between.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchwartzBump {
    pub amplitude: f64,
    pub order: u32,
}

impl SchwartzBump {
    /// Unit bump, the `δ - Φ_k` building block.
    pub fn unit() -> Self {
        Self { amplitude: 1.0, order: 7 }
    }

    /// Amplitude matched to `abs_sigma0_hat(0) = ln 2 · ‖Ω‖₁`, the exact
    /// cancellation the `μ_k` construction needs.
    pub fn calibrated_for(k: &SphericalKernel) -> Self {
        Self { amplitude: LN2 * circle_l1(k), order: 7 }
    }

    pub fn hat(&self, r: f64) -> f64 {
        self.amplitude * (1.0 - smoothstep(self.order, r - 2.0))
    }
}

/// `μ̂_k(ξ) = |σ̂_k|(ξ) - Φ̂(2^k|ξ|)`, vanishing at the origin by calibration.
pub fn mu_symbol(
    k: &SphericalKernel,
    kk: i32,
    xi: FrequencyPoint,
    bump: &SchwartzBump,
    tol: f64,
) -> Result<SymbolSample> {
    let at_zero = LN2 * circle_l1(k) - bump.hat(0.0);
    if at_zero.abs() > 1e-10 {
        return Err(Error::Calibration(at_zero.abs()));
    }
    let scaled = xi.scaled((kk as f64).exp2());
    let base = abs_sigma0_hat(k, scaled, tol)?;
    let v = base.value() - bump.hat(scaled.radius);
    Ok(SymbolSample { frequency: xi, re: v.re, im: v.im, error: base.error })
}

// ---------- grid suprema ----------

/// Log-radius/direction grid with dyadic refinement until the supremum
/// stabilizes.
#[derive(Debug, Clone, Copy)]
pub struct SupGrid {
    pub points_per_octave: usize,
    pub directions: usize,
    pub tol_rel: f64,
    pub max_refinements: usize,
}

impl Default for SupGrid {
    fn default() -> Self {
        Self { points_per_octave: 48, directions: 16, tol_rel: 0.05, max_refinements: 3 }
    }
}

/// `sup_ξ |m_{T_j}(ξ)|` for `m_{T_j}(ξ) = Σ_k ψ(2^{j+k}|ξ|)² σ̂₀(2^k ξ)`.
///
/// The multiplier is invariant under `ξ → 2ξ` (re-indexing the sum), so one
/// octave of radii with the finitely many contributing `k` covers every
/// window support; this equals `‖T_j‖_{2→2}` by Plancherel up to grid
/// resolution.
pub fn tj_symbol_norm(
    k: &SphericalKernel,
    j: i32,
    w: &LPWindow,
    grid: SupGrid,
) -> Result<f64> {
    crate::init_thread_pool();
    let sup_at = |ppo: usize, dirs: usize| -> Result<f64> {
        let idx: Vec<usize> = (0..ppo).collect();
        let sups: Vec<f64> = idx
            .par_iter()
            .map(|&i| -> Result<f64> {
                let rho = (2.0f64).powf(i as f64 / ppo as f64);
                // contributing k: scale/2 < 2^{j+k} rho < 2 scale
                let lo = (w.r_lo / rho).log2().floor() as i32 - j;
                let hi = (w.r_hi / rho).log2().ceil() as i32 - j;
                let mut best: f64 = 0.0;
                for d in 0..dirs {
                    let phi = TAU * d as f64 / dirs as f64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for kk in lo..=hi {
                        let wgt = w.psi_sq((j as f64 + kk as f64).exp2() * rho);
                        if wgt <= 0.0 {
                            continue;
                        }
                        let s = sigma0_hat(
                            k,
                            FrequencyPoint::new((kk as f64).exp2() * rho, phi),
                            1e-6,
                        )?;
                        acc += wgt * s.value();
                    }
                    best = best.max(acc.norm());
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(sups.into_iter().fold(0.0, f64::max))
    };
    let mut prev = sup_at(grid.points_per_octave, grid.directions)?;
    for r in 1..=grid.max_refinements {
        let cur = sup_at(grid.points_per_octave << r, grid.directions << r.min(1))?;
        let delta = (cur - prev).abs();
        if delta <= grid.tol_rel * cur.max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
        if r == grid.max_refinements {
            return Err(Error::GridTooCoarse { delta, tol: grid.tol_rel * cur });
        }
    }
    Ok(prev)
}

/// Grid supremum of the Lemma-2 product symbol
/// `Π_i |1 - Φ̂(2^{k_i}|ξ|)| · |σ̂_{j+k_i}(ξ)|` over `|ξ| ≥ 2^{1-k₁}`.
pub fn mjk_product_norm(
    k: &SphericalKernel,
    j: i32,
    k_list: &[i32],
    bump: &SchwartzBump,
    grid: SupGrid,
    octaves: usize,
) -> Result<f64> {
    crate::init_thread_pool();
    if k_list.is_empty() || k_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("k-list must be nondecreasing and nonempty".into()));
    }
    let k1 = k_list[0];
    let rho_lo = (1.0 - k1 as f64).exp2();
    let sup_at = |ppo: usize, dirs: usize| -> Result<f64> {
        let n = ppo * octaves;
        let pts: Vec<usize> = (0..=n).collect();
        let sups: Vec<f64> = pts
            .par_iter()
            .map(|&i| -> Result<f64> {
                let rho = rho_lo * (2.0f64).powf(i as f64 / ppo as f64);
                let mut best: f64 = 0.0;
                for d in 0..dirs {
                    let phi = TAU * d as f64 / dirs as f64;
                    let mut prod = 1.0f64;
                    for &ki in k_list {
                        let cut = 1.0 - bump.hat((ki as f64).exp2() * rho) / bump.amplitude;
                        if cut <= 0.0 {
                            prod = 0.0;
                            break;
                        }
                        let s = sigma0_hat(
                            k,
                            FrequencyPoint::new(((j + ki) as f64).exp2() * rho, phi),
                            1e-6,
                        )?;
                        prod *= cut.abs() * s.value().norm();
                    }
                    best = best.max(prod);
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(sups.into_iter().fold(0.0, f64::max))
    };
    let mut prev = sup_at(grid.points_per_octave, grid.directions)?;
    for r in 1..=grid.max_refinements {
        let cur = sup_at(grid.points_per_octave << r, grid.directions << r.min(1))?;
        let delta = (cur - prev).abs();
        if delta <= grid.tol_rel * cur.max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
        if r == grid.max_refinements {
            return Err(Error::GridTooCoarse { delta, tol: grid.tol_rel * cur });
        }
    }
    Ok(prev)
}

/// One radius row of a decay scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayRow {
    pub radius: f64,
    pub sup_abs: f64,
    pub argmax_angle: f64,
}

/// Measured symbol decay across both regimes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub alpha: f64,
    pub rows: Vec<DecayRow>,
    /// `max_{r ≤ 2} sup|σ̂₀|/r`
    pub c_small: f64,
    /// `max_{r ≥ 2} sup|σ̂₀| (ln r)^{1+α}`
    pub c_large: f64,
}

/// Scan `sup_direction |σ̂₀|` over the given radii.
pub fn decay_scan(
    k: &SphericalKernel,
    radii: &[f64],
    alpha: f64,
    directions: usize,
) -> Result<DecayReport> {
    crate::init_thread_pool();
    let rows: Vec<DecayRow> = radii
        .par_iter()
        .map(|&r| -> Result<DecayRow> {
            let mut best = 0.0;
            let mut arg = 0.0;
            for d in 0..directions {
                let phi = TAU * d as f64 / directions as f64;
                let s = sigma0_hat(k, FrequencyPoint::new(r, phi), 1e-6)?;
                let a = s.value().norm();
                if a > best {
                    best = a;
                    arg = phi;
                }
            }
            Ok(DecayRow { radius: r, sup_abs: best, argmax_angle: arg })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_small = rows
        .iter()
        .filter(|r| r.radius <= 2.0 && r.radius > 0.0)
        .map(|r| r.sup_abs / r.radius)
        .fold(0.0, f64::max);
    let c_large = rows
        .iter()
        .filter(|r| r.radius >= 2.0)
        .map(|r| r.sup_abs * r.radius.ln().powf(1.0 + alpha))
        .fold(0.0, f64::max);
    Ok(DecayReport { alpha, rows, c_small, c_large })
}

/// CSV rows `(radius, direction, re, im, error)` for symbol scans, sorted by
/// radius then direction.
pub fn symbol_csv(samples: &[SymbolSample]) -> String {
    let mut rows: Vec<&SymbolSample> = samples.iter().collect();
    rows.sort_by(|a, b| {
        (a.frequency.radius, a.frequency.direction.angle())
            .partial_cmp(&(b.frequency.radius, b.frequency.direction.angle()))
            .unwrap()
    });
    let mut out = String::from("radius,direction,re,im,error\n");
    for s in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.frequency.radius,
            s.frequency.direction.angle(),
            s.re,
            s.im,
            s.error
        ));
    }
    out
}
