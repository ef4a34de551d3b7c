/// Neumaier-compensated running sum that also tracks `Σ|term|`, so callers
/// can judge how much cancellation went into the result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SummationAccumulator {
    running_sum: f64,
    compensation: f64,
    sum_of_abs: f64,
}

impl SummationAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.running_sum + value;
        if self.running_sum.abs() >= value.abs() {
            self.compensation += (self.running_sum - t) + value;
        } else {
            self.compensation += (value - t) + self.running_sum;
        }
        self.running_sum = t;
        self.sum_of_abs += value.abs();
    }

    /// Compensated total.
    #[inline]
    pub fn sum(&self) -> f64 {
        self.running_sum + self.compensation
    }

    #[inline]
    pub fn sum_of_abs(&self) -> f64 {
        self.sum_of_abs
    }

    /// `Σ|term| / |Σ term|`. Equals 1 when no cancellation happened and grows
    /// as terms of opposite sign eat each other.
    pub fn cancellation_ratio(&self) -> f64 {
        self.sum_of_abs / self.sum().abs().max(f64::MIN_POSITIVE)
    }
}

impl Extend<f64> for SummationAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for SummationAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}
