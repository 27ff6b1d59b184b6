//! Neumaier-compensated summation for long series of small terms.

/// Kahan summation with Neumaier's correction for terms larger than the
/// running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn harmonic_tail_matches_f128_reference() {
        // sum_{k=1}^{10^6} 1/k, reference from exact rational arithmetic
        let mut s = NeumaierSum::new();
        for k in 1..=1_000_000u64 {
            s.add(1.0 / k as f64);
        }
        assert!((s.value() - 14.392726722865723631_f64).abs() < 1e-12);
    }
}
