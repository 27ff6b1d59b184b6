//! Complex-valued functions sampled on a uniform square grid, the domain of
//! all planar operators, with flat-binary and CSV I/O.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `N × N` samples on `[-L, L)²` at positions `x_i = (i - N/2) h`, `h = 2L/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n: usize,
    half_width: f64,
    values: Vec<Complex64>,
}

impl Grid2D {
    pub fn zeros(n: usize, half_width: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::Domain(format!("grid size {n} must be a power of two >= 2")));
        }
        if !(half_width > 0.0) {
            return Err(Error::Domain("half width must be positive".into()));
        }
        Ok(Self { n, half_width, values: vec![Complex64::new(0.0, 0.0); n * n] })
    }

    pub fn from_fn<F: FnMut(f64, f64) -> Complex64>(n: usize, half_width: f64, mut f: F) -> Result<Self> {
        let mut g = Self::zeros(n, half_width)?;
        let h = g.spacing();
        for i in 0..n {
            let x = (i as f64 - (n / 2) as f64) * h;
            for j in 0..n {
                let y = (j as f64 - (n / 2) as f64) * h;
                g.values[i * n + j] = f(x, y);
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.values[i * self.n + j] = v;
    }

    /// Coordinate of index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> Self {
        Self {
            n: self.n,
            half_width: self.half_width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise modulus.
    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn zip<F: FnMut(Complex64, Complex64) -> Complex64>(&self, other: &Self, mut f: F) -> Result<Self> {
        if self.n != other.n || self.half_width != other.half_width {
            return Err(Error::Domain("grid shape mismatch".into()));
        }
        Ok(Self {
            n: self.n,
            half_width: self.half_width,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `(Σ |f|^p h²)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("lp_norm wants 1 < p < inf, got {p}")));
        }
        let h2 = self.spacing() * self.spacing();
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        Ok((s * h2).powf(1.0 / p))
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let h2 = self.spacing() * self.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h2
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Flat binary layout: `u64` N, `f64` L, then `2N²` little-endian `f64`
    /// (interleaved re/im, row-major).
    pub fn write_binary<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 16 * self.values.len());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(&self.half_width.to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 16 {
            return Err(Error::Domain("grid file truncated".into()));
        }
        let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let half_width = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let want = 16 + 16 * n * n;
        if bytes.len() != want {
            return Err(Error::Domain(format!(
                "grid file size {} does not match N = {n} (want {want})",
                bytes.len()
            )));
        }
        let mut g = Self::zeros(n, half_width)?;
        for (idx, v) in g.values.iter_mut().enumerate() {
            let o = 16 + 16 * idx;
            let re = f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[o + 8..o + 16].try_into().unwrap());
            *v = Complex64::new(re, im);
        }
        Ok(g)
    }

    /// CSV rows `x,y,re,im` sorted by (x, y).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,re,im\n");
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                out.push_str(&format!("{},{},{},{}\n", self.coord(i), self.coord(j), v.re, v.im));
            }
        }
        out
    }
}

/// In-place 2-D DFT (forward for `inverse = false`; the inverse includes the
/// `1/N²` factor).
pub fn fft2(values: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // rows
    for row in values.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = values[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            values[i * n + j] = col[i];
        }
    }
    if inverse {
        let s = 1.0 / (n * n) as f64;
        for v in values.iter_mut() {
            *v *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shapes_and_norms() {
        let g = Grid2D::zeros(8, 1.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert!(Grid2D::zeros(7, 1.0).is_err());
        // single-cell indicator at p=2 has norm h
        let mut g = Grid2D::zeros(16, 1.0).unwrap();
        g.set(3, 5, Complex64::new(1.0, 0.0));
        assert_relative_eq!(g.lp_norm(2.0).unwrap(), g.spacing(), epsilon = 1e-15);
        assert!(g.lp_norm(1.0).is_err());
        assert!(g.lp_norm(0.5).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid2D::from_fn(16, 2.0, |x, y| Complex64::new(x * y, x - y)).unwrap();
        let dir = std::env::temp_dir().join("roughsio-grid-test.bin");
        g.write_binary(&dir).unwrap();
        let back = Grid2D::read_binary(&dir).unwrap();
        assert_eq!(g, back);
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn fft_round_trip() {
        let g = Grid2D::from_fn(16, 1.0, |x, y| Complex64::new((3.0 * x).sin(), y)).unwrap();
        let mut v = g.values().to_vec();
        fft2(&mut v, 16, false);
        fft2(&mut v, 16, true);
        for (a, b) in v.iter().zip(g.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
