//! Shared numerical machinery: compensated summation, adaptive and composite
//! quadrature, and the special functions the symbol and spike computations
//! lean on.

pub mod quad;
pub mod special;
pub mod sum;

/// Smoothstep of order `n`: the unique monotone polynomial of degree `2n+1`
/// with `S(0) = 0`, `S(1) = 1` and `n` vanishing derivatives at both ends.
/// Input is clamped to `[0, 1]`.
pub fn smoothstep(order: u32, t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    if t == 0.0 {
        return 0.0;
    }
    if t == 1.0 {
        return 1.0;
    }
    let n = order as i64;
    let mut acc = 0.0;
    for k in 0..=n {
        let c = binomial(n + k, k) * binomial(2 * n + 1, n - k);
        acc += c * (-t).powi(k as i32);
    }
    t.powi((n + 1) as i32) * acc
}

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints_and_monotone() {
        for order in [1, 3, 7] {
            assert_eq!(smoothstep(order, 0.0), 0.0);
            assert_eq!(smoothstep(order, 1.0), 1.0);
            assert_eq!(smoothstep(order, -2.0), 0.0);
            assert_eq!(smoothstep(order, 3.0), 1.0);
            let mut prev = 0.0;
            for i in 0..=100 {
                let v = smoothstep(order, i as f64 / 100.0);
                assert!(v >= prev - 1e-14);
                prev = v;
            }
        }
        // order 1 is the classic cubic 3t^2 - 2t^3
        let t: f64 = 0.37;
        assert!((smoothstep(1, t) - (3.0 * t * t - 2.0 * t * t * t)).abs() < 1e-14);
        // midpoint symmetry
        assert!((smoothstep(7, 0.5) - 0.5).abs() < 1e-14);
    }
}
