//! Numerical laboratory for convolution singular integrals with rough kernels
//! on the plane.
//!
//! The crate evaluates, on desk scale, the objects attached to an integrable
//! kernel `Ω` on the unit circle with mean value zero: the logarithmic
//! integrability conditions that govern `L^p` bounds, the Fourier symbols of
//! the dyadic kernel pieces and their decay, the Littlewood–Paley operator
//! scheme for the singular integral and its maximal truncations on sampled
//! planar grids, and a family of paired power-spike kernels (together with a
//! lacunary-series kernel) that separates the logarithmic conditions from the
//! Hardy-space condition.
//!
//! Everything is fixed at dimension `n = 2`; formulas that make sense on
//! `S^{n-1}` are stated for the circle only.

pub mod conditions;
pub mod counterexample;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod multiplier;
pub mod numerics;
pub mod transform;

pub use error::{Error, Result};

use once_cell::sync::OnceCell;

/// Initialize the global rayon pool honoring `ROUGHSIO_THREADS`.
///
/// Called lazily by the data-parallel entry points; safe to call repeatedly.
pub fn init_thread_pool() {
    static INIT: OnceCell<()> = OnceCell::new();
    INIT.get_or_init(|| {
        if let Ok(v) = std::env::var("ROUGHSIO_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    });
}
