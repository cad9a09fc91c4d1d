//! Compensated (Neumaier) summation.
//!
//! Piece sums routinely mix magnitudes like `e^-n` and `1`; plain
//! accumulation would lose the small terms that several closed-form
//! identities in the test suite depend on.

#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for term in iter {
            acc.add(term);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        acc.add(1e-16);
        acc.add(1e-16);
        acc.add(-1.0);
        assert_eq!(acc.total(), 2e-16);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(CompensatedSum::new().total(), 0.0);
    }
}
