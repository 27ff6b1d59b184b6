//! Truncated, maximal, and Littlewood–Paley operators applied to sampled
//! planar functions, with direct-sum oracles and seeded operator-norm probes.
//!
//! Conventions on the grid: all spatial convolutions zero-pad by a factor of
//! two (no wraparound); kernels restricted to an annulus weight boundary
//! cells by their covered fraction through a fixed 4×4 subsampling rule, so
//! annulus regions are exactly additive; spectral operators act as DFT
//! multipliers on the unpadded grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{fft2, Grid2D};
use crate::kernel::{eval_kernel, SphericalKernel, UnitDirection};
use crate::multiplier::{sigma0_hat, FrequencyPoint, LPWindow, SchwartzBump};

/// Inner and outer truncation radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub eps: f64,
    pub outer: f64,
}

impl TruncationSpec {
    pub fn new(eps: f64, outer: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < outer) {
            return Err(Error::Domain(format!("need 0 < eps < outer, got ({eps}, {outer})")));
        }
        Ok(Self { eps, outer })
    }
}

/// 4×4 subsample offsets within a cell, in units of the spacing.
const SUB: [f64; 4] = [-0.375, -0.125, 0.125, 0.375];

/// Sampled kernel `Ω(y/|y|)/|y|²` restricted to `a ≤ |y| < b`, every cell
/// averaged over the 16 subsample points (the same rule for interior and
/// boundary cells, which makes `[a,b) = [a,c) ⊎ [c,b)` exact cell by cell).
pub fn annulus_kernel_grid(
    k: &SphericalKernel,
    n: usize,
    half_width: f64,
    a: f64,
    b: f64,
    absolute: bool,
) -> Result<Grid2D> {
    let mut g = Grid2D::zeros(n, half_width)?;
    let h = g.spacing();
    for i in 0..n {
        let x = g.coord(i);
        for j in 0..n {
            let y = g.coord(j);
            // quick reject: cell fully outside the annulus bounding box
            let rmin = (x.abs() - h).hypot(y.abs() - h).max(0.0);
            let rmax = (x.abs() + h).hypot(y.abs() + h);
            if rmax < a || rmin >= b {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for dx in SUB {
                for dy in SUB {
                    let sx = x + dx * h;
                    let sy = y + dy * h;
                    let r = sx.hypot(sy);
                    if r >= a && r < b {
                        let th = UnitDirection::new(sy.atan2(sx));
                        let mut v = eval_kernel(k, th)?;
                        if absolute {
                            v = Complex64::new(v.norm(), 0.0);
                        }
                        acc += v / (r * r);
                    }
                }
            }
            g.set(i, j, acc / 16.0);
        }
    }
    Ok(g)
}

/// Zero-padded linear convolution `(K * f)(x) = h² Σ_y K(y) f(x - y)`.
pub fn convolve(kernel: &Grid2D, f: &Grid2D) -> Result<Grid2D> {
    if kernel.n() != f.n() || kernel.half_width() != f.half_width() {
        return Err(Error::Domain("kernel/function grid mismatch".into()));
    }
    let n = f.n();
    let p = 2 * n;
    let mut ka = vec![Complex64::new(0.0, 0.0); p * p];
    let mut fa = vec![Complex64::new(0.0, 0.0); p * p];
    for i in 0..n {
        for j in 0..n {
            ka[i * p + j] = kernel.get(i, j);
            fa[i * p + j] = f.get(i, j);
        }
    }
    fft2(&mut ka, p, false);
    fft2(&mut fa, p, false);
    for (a, b) in ka.iter_mut().zip(&fa) {
        *a *= b;
    }
    fft2(&mut ka, p, true);
    let mut out = Grid2D::zeros(n, f.half_width())?;
    let h2 = f.spacing() * f.spacing();
    let off = n / 2;
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, ka[(i + off) * p + (j + off)] * h2);
        }
    }
    Ok(out)
}

/// Direct `O(N⁴)` convolution, the oracle for the FFT path.
pub fn convolve_direct(kernel: &Grid2D, f: &Grid2D) -> Result<Grid2D> {
    if kernel.n() != f.n() || kernel.half_width() != f.half_width() {
        return Err(Error::Domain("kernel/function grid mismatch".into()));
    }
    let n = f.n();
    let h2 = f.spacing() * f.spacing();
    let mut out = Grid2D::zeros(n, f.half_width())?;
    let half = (n / 2) as i64;
    for i in 0..n as i64 {
        for j in 0..n as i64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for ki in 0..n as i64 {
                for kj in 0..n as i64 {
                    let fi = i - (ki - half);
                    let fj = j - (kj - half);
                    if fi >= 0 && fi < n as i64 && fj >= 0 && fj < n as i64 {
                        acc += kernel.get(ki as usize, kj as usize) * f.get(fi as usize, fj as usize);
                    }
                }
            }
            out.set(i as usize, j as usize, acc * h2);
        }
    }
    Ok(out)
}

/// Truncated singular integral on the grid.
pub fn apply_truncated(k: &SphericalKernel, f: &Grid2D, spec: TruncationSpec) -> Result<Grid2D> {
    let h = f.spacing();
    if spec.eps < h {
        return Err(Error::Resolution { eps: spec.eps, h });
    }
    let kg = annulus_kernel_grid(k, f.n(), f.half_width(), spec.eps, spec.outer, false)?;
    convolve(&kg, f)
}

/// `T_k` result together with the bound on the discarded `|y| ≥ outer` part.
#[derive(Debug, Clone)]
pub struct TkResult {
    pub grid: Grid2D,
    pub discarded_tail_bound: f64,
}

/// `T_k f`: truncation at `ε = 2^k`, outer radius forced by the grid.
pub fn apply_tk(k: &SphericalKernel, f: &Grid2D, kk: i32, outer: f64) -> Result<TkResult> {
    let eps = (kk as f64).exp2();
    let grid = apply_truncated(k, f, TruncationSpec::new(eps, outer)?)?;
    // everything beyond `outer` out to the farthest reachable offset is
    // dropped; bound it by the L1 shell mass times sup |f|
    let reach = 2.0 * std::f64::consts::SQRT_2 * f.half_width();
    let tail = if outer >= reach {
        0.0
    } else {
        k.l1_norm() * (reach / outer).ln() * f.max_abs()
    };
    Ok(TkResult { grid, discarded_tail_bound: tail })
}

/// `sup_k |T_k f|` pixelwise over the dyadic range.
pub fn maximal_truncated(
    k: &SphericalKernel,
    f: &Grid2D,
    kk_range: std::ops::RangeInclusive<i32>,
    outer: f64,
) -> Result<Grid2D> {
    let mut out = Grid2D::zeros(f.n(), f.half_width())?;
    for kk in kk_range {
        let t = apply_tk(k, f, kk, outer)?;
        out = out.zip(&t.grid, |a, b| Complex64::new(a.re.max(b.norm()), 0.0))?;
    }
    Ok(out)
}

/// `σ*(f) = sup_k (|σ_k| * |f|)` pixelwise.
pub fn sigma_star(
    k: &SphericalKernel,
    f: &Grid2D,
    kk_range: std::ops::RangeInclusive<i32>,
) -> Result<Grid2D> {
    let af = f.abs();
    let mut out = Grid2D::zeros(f.n(), f.half_width())?;
    for kk in kk_range {
        let a = (kk as f64).exp2();
        let kg = annulus_kernel_grid(k, f.n(), f.half_width(), a, 2.0 * a, true)?;
        let c = convolve(&kg, &af)?;
        out = out.zip(&c, |x, y| Complex64::new(x.re.max(y.norm()), 0.0))?;
    }
    Ok(out)
}

/// Discrete centered Hardy–Littlewood maximal function over dyadic radii
/// `h·2^m` (plus the single-cell ball), zero extension outside the grid,
/// exact cell counting.
pub fn hl_maximal(f: &Grid2D) -> Result<Grid2D> {
    let n = f.n();
    let af = f.abs();
    let mut out = af.clone(); // radius h/2: the cell itself
    let mut m = 0u32;
    while (1usize << m) <= n {
        let radius_cells = 1i64 << m; // r = h 2^m, |offset|² ≤ 4^m in cell units
        let r2 = radius_cells * radius_cells;
        let mut mask = Grid2D::zeros(n, f.half_width())?;
        let half = (n / 2) as i64;
        let mut count = 0u64;
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                let (oi, oj) = (i - half, j - half);
                if oi * oi + oj * oj <= r2 {
                    mask.set(i as usize, j as usize, Complex64::new(1.0, 0.0));
                    count += 1;
                }
            }
        }
        let conv = convolve(&mask, &af)?;
        let h2 = f.spacing() * f.spacing();
        let scale = 1.0 / (h2 * count as f64);
        out = out.zip(&conv, |a, b| Complex64::new(a.re.max(b.re * scale), 0.0))?;
        m += 1;
    }
    Ok(out)
}

/// Count of cells in the discrete ball of radius `h·2^m` (for oracle tests).
pub fn hl_ball_count(m: u32) -> u64 {
    let r = 1i64 << m;
    let mut c = 0;
    for i in -r..=r {
        for j in -r..=r {
            if i * i + j * j <= r * r {
                c += 1;
            }
        }
    }
    c
}

/// DFT frequency radius at index pair `(i, j)` on an `n`-grid of half width `l`.
fn freq_polar(i: usize, j: usize, n: usize, l: f64) -> (f64, f64) {
    let wrap = |i: usize| -> f64 {
        let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
        m as f64
    };
    let fx = wrap(i) / (2.0 * l);
    let fy = wrap(j) / (2.0 * l);
    (fx.hypot(fy), fy.atan2(fx))
}

/// `S_j f`: band filter by the multiplier `ψ(2^j |ξ|)` on the DFT grid.
pub fn band_filter(f: &Grid2D, j: i32, w: &LPWindow) -> Result<Grid2D> {
    let n = f.n();
    let l = f.half_width();
    let mut v = f.values().to_vec();
    fft2(&mut v, n, false);
    for i in 0..n {
        for jj in 0..n {
            let (rho, _) = freq_polar(i, jj, n, l);
            let wgt = crate::multiplier::window_eval(w, (j as f64).exp2() * rho);
            v[i * n + jj] *= wgt;
        }
    }
    fft2(&mut v, n, true);
    let mut out = Grid2D::zeros(n, l)?;
    out.values_mut().copy_from_slice(&v);
    Ok(out)
}

/// The `j` range whose windows intersect the grid's nonzero frequencies.
pub fn band_range(n: usize, l: f64, w: &LPWindow) -> std::ops::RangeInclusive<i32> {
    let fmin = 1.0 / (2.0 * l);
    let fmax = (n as f64 / 2.0) * std::f64::consts::SQRT_2 / (2.0 * l);
    let lo = (w.r_lo / fmax).log2().floor() as i32;
    let hi = (w.r_hi / fmin).log2().ceil() as i32;
    lo..=hi
}

/// Cache for symbol values over a grid's frequency set.
struct SymbolCache<'a> {
    kernel: &'a SphericalKernel,
    map: HashMap<(u64, u64), Complex64>,
}

impl<'a> SymbolCache<'a> {
    fn new(kernel: &'a SphericalKernel) -> Self {
        Self { kernel, map: HashMap::new() }
    }

    fn get(&mut self, rho: f64, phi: f64) -> Result<Complex64> {
        let key = (rho.to_bits(), phi.to_bits());
        if let Some(&v) = self.map.get(&key) {
            return Ok(v);
        }
        let s = sigma0_hat(self.kernel, FrequencyPoint::new(rho, phi), 1e-6)?;
        self.map.insert(key, s.value());
        Ok(s.value())
    }
}

/// `T_j f = Σ_k S_{j+k}(σ_k * S_{j+k} f)`, realized spectrally as the DFT
/// multiplier `Σ_k ψ(2^{j+k}|ξ|)² σ̂₀(2^k ξ)`.
pub fn tj_apply(k: &SphericalKernel, f: &Grid2D, j: i32, w: &LPWindow) -> Result<Grid2D> {
    let n = f.n();
    let l = f.half_width();
    let mut v = f.values().to_vec();
    fft2(&mut v, n, false);
    let mut cache = SymbolCache::new(k);
    for i in 0..n {
        for jj in 0..n {
            let (rho, phi) = freq_polar(i, jj, n, l);
            if rho == 0.0 {
                v[i * n + jj] = Complex64::new(0.0, 0.0);
                continue;
            }
            let lo = (w.r_lo / rho).log2().floor() as i32 - j;
            let hi = (w.r_hi / rho).log2().ceil() as i32 - j;
            let mut mult = Complex64::new(0.0, 0.0);
            for kk in lo..=hi {
                let wgt = w.psi_sq(((j + kk) as f64).exp2() * rho);
                if wgt > 0.0 {
                    mult += wgt * cache.get((kk as f64).exp2() * rho, phi)?;
                }
            }
            v[i * n + jj] *= mult;
        }
    }
    fft2(&mut v, n, true);
    let mut out = Grid2D::zeros(n, l)?;
    out.values_mut().copy_from_slice(&v);
    Ok(out)
}

/// `Q_j f = sup_k |(δ - Φ_k) * σ_{j+k} * f|`, each shell realized spectrally
/// by the multiplier `(1 - Φ̂(2^k|ξ|)) σ̂_{j+k}(ξ)`.
pub fn qj_apply(
    k: &SphericalKernel,
    f: &Grid2D,
    j: i32,
    bump: &SchwartzBump,
    kk_range: std::ops::RangeInclusive<i32>,
) -> Result<Grid2D> {
    if j < 0 {
        return Err(Error::Domain("qj_apply wants j >= 0".into()));
    }
    let n = f.n();
    let l = f.half_width();
    let mut fhat = f.values().to_vec();
    fft2(&mut fhat, n, false);
    let mut out = Grid2D::zeros(n, l)?;
    let mut cache = SymbolCache::new(k);
    for kk in kk_range {
        let mut v = fhat.clone();
        for i in 0..n {
            for jj in 0..n {
                let (rho, phi) = freq_polar(i, jj, n, l);
                let cut = 1.0 - bump.hat((kk as f64).exp2() * rho) / bump.amplitude;
                if cut <= 0.0 || rho == 0.0 {
                    v[i * n + jj] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let s = cache.get(((j + kk) as f64).exp2() * rho, phi)?;
                v[i * n + jj] *= cut * s;
            }
        }
        fft2(&mut v, n, true);
        for (o, nv) in out.values_mut().iter_mut().zip(&v) {
            o.re = o.re.max(nv.norm());
        }
    }
    Ok(out)
}

/// Exhaustive sign-pattern average of `‖Σ ε_k a_k‖₂²` against `Σ ‖a_k‖₂²`.
pub fn rademacher_square_identity(pieces: &[Grid2D]) -> Result<(f64, f64)> {
    let kn = pieces.len();
    if kn == 0 || kn > 16 {
        return Err(Error::Domain("need 1..=16 pieces".into()));
    }
    let n = pieces[0].n();
    let sum_sq: f64 = pieces.iter().map(|g| g.l2_norm_sq()).sum();
    let mut avg = 0.0;
    for pattern in 0u32..(1 << kn) {
        let mut s = Grid2D::zeros(n, pieces[0].half_width())?;
        for (kidx, g) in pieces.iter().enumerate() {
            let sign = if pattern >> kidx & 1 == 1 { -1.0 } else { 1.0 };
            s = s.zip(g, |a, b| a + sign * b)?;
        }
        avg += s.l2_norm_sq();
    }
    avg /= (1u64 << kn) as f64;
    Ok((avg, sum_sq))
}

// ---------- operator norm probes ----------

/// Probe operators for empirical `L^p` ratio scans.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ProbeOperator {
    Identity,
    Truncated { eps: f64, outer: f64 },
    Maximal { kk_lo: i32, kk_hi: i32, outer: f64 },
    SigmaStar { kk_lo: i32, kk_hi: i32 },
    BandFilter { j: i32 },
}

/// Seeded probe families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeFamily {
    GaussianBumps,
    RandomBandLimited,
    DilatedTents,
}

/// Result of an empirical operator-norm probe (always a lower-bound probe,
/// never claimed as the norm).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpReport {
    pub p: f64,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
    pub family: ProbeFamily,
    pub seed: u64,
    pub draws: u32,
}

fn draw_probe(family: ProbeFamily, rng: &mut ChaCha8Rng, n: usize, l: f64) -> Result<Grid2D> {
    match family {
        ProbeFamily::GaussianBumps => {
            let cx = (rng.gen::<f64>() - 0.5) * l;
            let cy = (rng.gen::<f64>() - 0.5) * l;
            let wsig = l * (0.05 + 0.3 * rng.gen::<f64>());
            let amp = 0.5 + rng.gen::<f64>();
            Grid2D::from_fn(n, l, |x, y| {
                Complex64::new(
                    amp * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * wsig * wsig)).exp(),
                    0.0,
                )
            })
        }
        ProbeFamily::RandomBandLimited => {
            let mut v = vec![Complex64::new(0.0, 0.0); n * n];
            let band_lo = 2;
            let band_hi = (n / 4).max(3);
            for i in 0..n {
                for j in 0..n {
                    let wrap = |i: usize| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
                    let r2 = wrap(i).pow(2) + wrap(j).pow(2);
                    if r2 >= (band_lo * band_lo) as i64 && r2 <= (band_hi * band_hi) as i64 {
                        v[i * n + j] =
                            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    }
                }
            }
            fft2(&mut v, n, true);
            let mut g = Grid2D::zeros(n, l)?;
            g.values_mut().copy_from_slice(&v);
            Ok(g)
        }
        ProbeFamily::DilatedTents => {
            let scale = l * (0.1 + 0.8 * rng.gen::<f64>());
            let cx = (rng.gen::<f64>() - 0.5) * l * 0.5;
            let cy = (rng.gen::<f64>() - 0.5) * l * 0.5;
            Grid2D::from_fn(n, l, |x, y| {
                let t = 1.0 - ((x - cx).abs().max((y - cy).abs())) / scale;
                Complex64::new(t.max(0.0), 0.0)
            })
        }
    }
}

/// Max `‖Op f‖_p / ‖f‖_p` over seeded draws from the family.
#[allow(clippy::too_many_arguments)]
pub fn operator_norm_probe(
    kernel: Option<&SphericalKernel>,
    op: ProbeOperator,
    p: f64,
    family: ProbeFamily,
    draws: u32,
    seed: u64,
    n: usize,
    l: f64,
) -> Result<LpReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("probe wants 1 < p < inf, got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LpReport> = None;
    let w = crate::multiplier::lp_window(1.0, 7)?;
    for _ in 0..draws.max(1) {
        let f = draw_probe(family, &mut rng, n, l)?;
        let input = f.lp_norm(p)?;
        if input == 0.0 {
            continue;
        }
        let out = match op {
            ProbeOperator::Identity => f.clone(),
            ProbeOperator::Truncated { eps, outer } => {
                let k = kernel.ok_or_else(|| Error::Domain("probe needs a kernel".into()))?;
                apply_truncated(k, &f, TruncationSpec::new(eps, outer)?)?
            }
            ProbeOperator::Maximal { kk_lo, kk_hi, outer } => {
                let k = kernel.ok_or_else(|| Error::Domain("probe needs a kernel".into()))?;
                maximal_truncated(k, &f, kk_lo..=kk_hi, outer)?
            }
            ProbeOperator::SigmaStar { kk_lo, kk_hi } => {
                let k = kernel.ok_or_else(|| Error::Domain("probe needs a kernel".into()))?;
                sigma_star(k, &f, kk_lo..=kk_hi)?
            }
            ProbeOperator::BandFilter { j } => band_filter(&f, j, &w)?,
        };
        let output = out.lp_norm(p)?;
        let ratio = output / input;
        if best.as_ref().map_or(true, |b| ratio > b.ratio) {
            best = Some(LpReport {
                p,
                input_norm: input,
                output_norm: output,
                ratio,
                family,
                seed,
                draws,
            });
        }
    }
    best.ok_or_else(|| Error::Domain("all probe draws were zero".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cos_kernel() -> SphericalKernel {
        SphericalKernel::builtin("cos", None, None, None).unwrap()
    }

    fn gaussian(n: usize, l: f64, sig: f64) -> Grid2D {
        Grid2D::from_fn(n, l, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * sig * sig)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn annulus_additivity_exact() {
        let k = cos_kernel();
        let (n, l) = (16, 2.0);
        let a = annulus_kernel_grid(&k, n, l, 0.5, 1.5, false).unwrap();
        let b = annulus_kernel_grid(&k, n, l, 0.5, 1.0, false).unwrap();
        let c = annulus_kernel_grid(&k, n, l, 1.0, 1.5, false).unwrap();
        for i in 0..n {
            for j in 0..n {
                let d = a.get(i, j) - b.get(i, j) - c.get(i, j);
                assert_eq!(d.norm(), 0.0, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn truncated_annihilates_constants_for_odd_kernels() {
        let (n, l) = (32, 4.0);
        let f = Grid2D::from_fn(n, l, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        for name in ["cos", "sin", "sign"] {
            let k = SphericalKernel::builtin(name, None, None, None).unwrap();
            let out = apply_truncated(&k, &f, TruncationSpec::new(0.5, 3.0).unwrap()).unwrap();
            assert!(out.max_abs() < 1e-10, "{name}: {}", out.max_abs());
        }
    }

    #[test]
    fn resolution_guard() {
        let f = gaussian(16, 1.0, 0.3);
        let r = apply_truncated(&cos_kernel(), &f, TruncationSpec::new(0.01, 0.5).unwrap());
        assert!(matches!(r, Err(Error::Resolution { .. })));
    }

    #[test]
    fn fft_equals_direct_sum() {
        let k = cos_kernel();
        let f = gaussian(16, 2.0, 0.7);
        let kg = annulus_kernel_grid(&k, 16, 2.0, 0.5, 1.75, false).unwrap();
        let a = convolve(&kg, &f).unwrap();
        let b = convolve_direct(&kg, &f).unwrap();
        let scale = b.max_abs().max(1e-300);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn tk_decomposes_into_dyadic_pieces() {
        let k = cos_kernel();
        let f = gaussian(32, 4.0, 1.0);
        let t = apply_tk(&k, &f, -1, 4.0).unwrap();
        // sum sigma_j * f over shells [2^-1,2^0), [2^0,2^1), [2^1,2^2)
        let mut acc = Grid2D::zeros(32, 4.0).unwrap();
        for kk in -1..=1 {
            let a = (kk as f64).exp2();
            let kg = annulus_kernel_grid(&k, 32, 4.0, a, 2.0 * a, false).unwrap();
            let c = convolve(&kg, &f).unwrap();
            acc = acc.zip(&c, |x, y| x + y).unwrap();
        }
        for (x, y) in t.grid.values().iter().zip(acc.values()) {
            assert!((x - y).norm() < 1e-10);
        }
        // constants die
        let c = Grid2D::from_fn(32, 4.0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let tc = apply_tk(&k, &c, -1, 4.0).unwrap();
        assert!(tc.grid.max_abs() < 1e-10);
    }

    #[test]
    fn truncation_nesting_exact() {
        let k = cos_kernel();
        let f = gaussian(16, 2.0, 0.6);
        let t1 = apply_truncated(&k, &f, TruncationSpec::new(0.5, 1.8).unwrap()).unwrap();
        let t2 = apply_truncated(&k, &f, TruncationSpec::new(1.0, 1.8).unwrap()).unwrap();
        let mid = apply_truncated(&k, &f, TruncationSpec::new(0.5, 1.0).unwrap()).unwrap();
        for ((a, b), c) in t1.values().iter().zip(t2.values()).zip(mid.values()) {
            assert!((a - b - c).norm() < 1e-11);
        }
    }

    #[test]
    fn maximal_monotone_in_range() {
        let k = cos_kernel();
        let f = gaussian(32, 4.0, 1.2);
        let m1 = maximal_truncated(&k, &f, 0..=0, 4.0).unwrap();
        let t0 = apply_tk(&k, &f, 0, 4.0).unwrap();
        for (a, b) in m1.values().iter().zip(t0.grid.values()) {
            assert_relative_eq!(a.re, b.norm(), epsilon = 1e-14);
        }
        let m2 = maximal_truncated(&k, &f, -1..=1, 4.0).unwrap();
        for (a, b) in m2.values().iter().zip(m1.values()) {
            assert!(a.re >= b.re - 1e-15);
        }
    }

    #[test]
    fn hl_maximal_properties() {
        // constant is a fixed point
        let c = Grid2D::from_fn(16, 1.0, |_, _| Complex64::new(0.7, 0.0)).unwrap();
        let m = hl_maximal(&c).unwrap();
        for v in m.values() {
            assert_relative_eq!(v.re, 0.7, epsilon = 1e-12);
        }
        // dominates |f|
        let f = gaussian(16, 1.0, 0.2);
        let mf = hl_maximal(&f).unwrap();
        for (a, b) in mf.values().iter().zip(f.values()) {
            assert!(a.re >= b.norm() - 1e-15);
        }
        // point mass on 8x8: hand-counted ball averages
        let mut pm = Grid2D::zeros(8, 1.0).unwrap();
        pm.set(4, 4, Complex64::new(1.0, 0.0));
        let m = hl_maximal(&pm).unwrap();
        assert_relative_eq!(m.get(4, 4).re, 1.0, epsilon = 1e-12);
        // neighbor at distance h: best ball is radius h (5 cells)
        assert_relative_eq!(m.get(4, 5).re, 1.0 / 5.0, epsilon = 1e-12);
        assert_eq!(hl_ball_count(0), 5);
        // diagonal neighbor: radius 2h ball has 13 cells
        assert_eq!(hl_ball_count(1), 13);
        assert_relative_eq!(m.get(5, 5).re, 1.0 / 13.0, epsilon = 1e-12);
    }

    #[test]
    fn band_filter_partition() {
        let (n, l) = (32, 4.0);
        let w = crate::multiplier::lp_window(1.0, 7).unwrap();
        // band-limited, zero-mean input away from the Nyquist shell
        let f = Grid2D::from_fn(n, l, |x, y| {
            Complex64::new(
                (std::f64::consts::PI * x / 2.0).cos() * (std::f64::consts::PI * y / 4.0).sin(),
                0.0,
            )
        })
        .unwrap();
        let mut acc = Grid2D::zeros(n, l).unwrap();
        let mut energy = 0.0;
        for j in band_range(n, l, &w) {
            let s = band_filter(&f, j, &w).unwrap();
            let ss = band_filter(&s, j, &w).unwrap();
            acc = acc.zip(&ss, |a, b| a + b).unwrap();
            energy += s.l2_norm_sq();
        }
        for (a, b) in acc.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-10, "partition reconstruction");
        }
        assert_relative_eq!(energy, f.l2_norm_sq(), epsilon = 1e-10);
        // eigenfunction behavior on a pure wave
        let wave = Grid2D::from_fn(n, l, |x, _| {
            Complex64::new(0.0, std::f64::consts::TAU * x).exp()
        })
        .unwrap();
        let rho: f64 = 1.0; // wave frequency radius
        for j in [-1, 0, 1] {
            let out = band_filter(&wave, j, &w).unwrap();
            let expect = crate::multiplier::window_eval(&w, (j as f64).exp2() * rho);
            let got = out.get(7, 9).norm() / wave.get(7, 9).norm();
            assert_relative_eq!(got, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn tj_linear_and_zero() {
        let k = SphericalKernel::from_fourier(vec![]);
        let w = crate::multiplier::lp_window(1.0, 7).unwrap();
        let f = gaussian(16, 2.0, 0.5);
        let out = tj_apply(&k, &f, 2, &w).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn rademacher_identity_small() {
        let g1 = gaussian(16, 1.0, 0.2);
        let (avg, ss) = rademacher_square_identity(std::slice::from_ref(&g1)).unwrap();
        assert_relative_eq!(avg, ss, epsilon = 1e-14);
        let (avg2, ss2) = rademacher_square_identity(&[g1.clone(), g1.clone()]).unwrap();
        assert_relative_eq!(avg2, ss2, epsilon = 1e-14);
        assert_relative_eq!(avg2, 2.0 * g1.l2_norm_sq(), epsilon = 1e-12);
    }

    #[test]
    fn probe_identity_is_one() {
        let r = operator_norm_probe(
            None,
            ProbeOperator::Identity,
            2.0,
            ProbeFamily::GaussianBumps,
            3,
            42,
            16,
            1.0,
        )
        .unwrap();
        assert_eq!(r.ratio, 1.0);
        // determinism
        let r2 = operator_norm_probe(
            None,
            ProbeOperator::Identity,
            2.0,
            ProbeFamily::GaussianBumps,
            3,
            42,
            16,
            1.0,
        )
        .unwrap();
        assert_eq!(r.input_norm, r2.input_norm);
        assert!(operator_norm_probe(
            None,
            ProbeOperator::Identity,
            1.0,
            ProbeFamily::GaussianBumps,
            1,
            1,
            8,
            1.0
        )
        .is_err());
    }
}
