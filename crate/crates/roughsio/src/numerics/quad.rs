//! Adaptive Gauss–Kronrod quadrature with certified error estimates, plus a
//! composite fixed-order Gauss rule for oscillatory integrands whose panel
//! count is chosen from the phase budget.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Scalar output of an integrand: real or complex.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn scale(self, f: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

// 15-point Kronrod nodes on [-1,1] (positive half) with the embedded
// 7-point Gauss rule at the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 15(7) panel. Returns (kronrod value, error estimate).
pub fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    let mut res_abs = fc.norm() * WGK[7];
    let mut samples: [(T, f64); 15] = [(fc, WGK[7]); 15];
    let mut ns = 1;

    for (i, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let s = f1.add(f2);
        kron = kron.add(s.scale(WGK[i]));
        if i % 2 == 1 {
            gauss = gauss.add(s.scale(WG[i / 2]));
        }
        res_abs += WGK[i] * (f1.norm() + f2.norm());
        samples[ns] = (f1, WGK[i]);
        samples[ns + 1] = (f2, WGK[i]);
        ns += 2;
    }

    let mean = kron.scale(0.5);
    let mut res_asc = 0.0;
    for &(v, w) in samples.iter().take(ns) {
        res_asc += w * v.sub(mean).norm();
    }
    res_asc *= half.abs();
    res_abs *= half.abs();

    let value = kron.scale(half);
    let mut err = kron.sub(gauss).norm() * half.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T: Copy> PartialEq for Segment<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T: Copy> Eq for Segment<T> {}
impl<T: Copy> PartialOrd for Segment<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Copy> Ord for Segment<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.partial_cmp(&o.error).unwrap_or(Ordering::Equal)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integration over a union of segments (split points let callers
/// isolate known kinks and singular endpoints up front).
pub fn adaptive_segments<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    segments: &[(f64, f64)],
    tol_abs: f64,
    max_panels: usize,
) -> Result<QuadOutcome<T>> {
    let mut heap: BinaryHeap<Segment<T>> = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut panels = 0usize;
    for &(a, b) in segments {
        if a == b {
            continue;
        }
        let (v, e) = gk15(f, a, b);
        total = total.add(v);
        total_err += e;
        panels += 1;
        heap.push(Segment { a, b, value: v, error: e });
    }
    while total_err > tol_abs && panels < max_panels {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        if worst.error <= 0.0 || worst.b - worst.a < 1e-300 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total = total.sub(worst.value).add(v1).add(v2);
        total_err += e1 + e2 - worst.error;
        panels += 1;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    if total_err > tol_abs {
        return Err(Error::QuadratureFailure { achieved: total_err, requested: tol_abs });
    }
    Ok(QuadOutcome { value: total, error: total_err, panels })
}

/// Adaptive integration on a single interval.
pub fn adaptive<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    max_panels: usize,
) -> Result<QuadOutcome<T>> {
    adaptive_segments(f, &[(a, b)], tol_abs, max_panels)
}

/// Gauss–Legendre nodes/weights on [-1,1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            // evaluate P_n and P_n' by recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                xs[i] = -x;
                xs[n - 1 - i] = x;
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                ws[i] = w;
                ws[n - 1 - i] = w;
                break;
            }
        }
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

/// Composite fixed-order Gauss rule with `panels` equal panels.
pub fn composite_gl<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    nodes: &(Vec<f64>, Vec<f64>),
) -> T {
    let (xs, ws) = nodes;
    let hp = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let pa = a + p as f64 * hp;
        let c = pa + 0.5 * hp;
        let mut local = T::zero();
        for (&x, &w) in xs.iter().zip(ws.iter()) {
            local = local.add(f(c + 0.5 * hp * x).scale(w));
        }
        acc = acc.add(local.scale(0.5 * hp));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn gk15_polynomial_exact() {
        // Kronrod-15 integrates degree 22 exactly
        let (v, e) = gk15(&|x: f64| x.powi(10), -1.0, 1.0);
        assert!((v - 2.0 / 11.0).abs() < 1e-15, "v={v} e={e}");
    }

    #[test]
    fn adaptive_log_singularity() {
        // int_0^1 ln(1/x) dx = 1
        let out = adaptive(&|x: f64| (1.0 / x).ln(), 1e-300, 1.0, 1e-12, 2000).unwrap();
        assert!((out.value - 1.0).abs() < 1e-10, "value {}", out.value);
        // int_0^1 ln^2(1/x) dx = 2
        let out = adaptive(&|x: f64| (1.0 / x).ln().powi(2), 1e-300, 1.0, 1e-12, 4000).unwrap();
        assert!((out.value - 2.0).abs() < 1e-9, "value {}", out.value);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(&|x: f64| (1.0 / x).ln(), 1e-300, 1.0, 1e-13, 8);
        assert!(matches!(r, Err(crate::error::Error::QuadratureFailure { .. })));
    }

    #[test]
    fn complex_oscillatory_matches_closed_form() {
        // int_0^1 e^{i w x} dx = (e^{iw}-1)/(iw)
        let w = 37.0;
        let f = |x: f64| Complex64::new(0.0, w * x).exp();
        let out = adaptive(&f, 0.0, 1.0, 1e-12, 2000).unwrap();
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((out.value - exact).norm() < 1e-11);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [5, 15, 20, 31] {
            let (xs, ws) = gauss_legendre(n);
            let s: f64 = ws.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
            // exactness at degree 2n-1
            let p = 2 * n - 1;
            let v: f64 =
                xs.iter().zip(&ws).map(|(&x, &w)| w * x.powi(p as i32 - 1)).sum();
            let exact = 2.0 / p as f64;
            assert!((v - exact).abs() < 1e-12, "n={n} v={v} exact={exact}");
        }
    }

    #[test]
    fn composite_gl_oscillatory() {
        let nodes = gauss_legendre(15);
        let w = 200.0;
        let f = |x: f64| (w * x).cos();
        let v = composite_gl(&f, 0.0, 1.0, 60, &nodes);
        assert!((v - w.sin() / w).abs() < 1e-13);
    }
}
