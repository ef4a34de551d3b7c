//! Relay → base-station hop with Nakagami-m fading: the SNR is Gamma
//! distributed with shape m1 and mean μ_rf.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::numerics::gamma_upper_regularized;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfChannelParams {
    /// Nakagami fading parameter, ≥ 0.5. Need not be an integer.
    pub m1: f64,
    /// Average SNR (linear).
    pub mu_rf: f64,
}

impl RfChannelParams {
    pub fn new(m1: f64, mu_rf: f64) -> Result<Self> {
        let p = Self { m1, mu_rf };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m1 >= 0.5) || !self.m1.is_finite() {
            return Err(Error::domain(format!("Nakagami m1 must be >= 0.5, got {}", self.m1)));
        }
        if !(self.mu_rf > 0.0) || !self.mu_rf.is_finite() {
            return Err(Error::domain(format!("average RF SNR must be positive, got {}", self.mu_rf)));
        }
        Ok(())
    }

    /// F(γ) = 1 − Q(m1, m1·γ/μ_rf).
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain(format!("SNR must be non-negative, got {gamma}")));
        }
        Ok(1.0 - gamma_upper_regularized(self.m1, self.m1 * gamma / self.mu_rf)?)
    }

    /// ε_rf: probability a forwarded packet arrives below `gamma_th`.
    pub fn erasure_prob(&self, gamma_th: f64) -> Result<f64> {
        self.cdf(gamma_th)
    }

    /// The Gamma(m1, μ_rf/m1) law of the instantaneous SNR.
    pub fn snr_distribution(&self) -> Gamma<f64> {
        Gamma::new(self.m1, self.mu_rf / self.m1).expect("validated Nakagami parameters")
    }

    pub fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.snr_distribution().sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_case_at_the_mean() {
        let p = RfChannelParams::new(1.0, 10.0).unwrap();
        let expected = 1.0 - (-1f64).exp();
        assert!((p.cdf(10.0).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn zero_threshold_never_erases() {
        for m1 in [0.5, 1.0, 2.0, 7.3] {
            let p = RfChannelParams::new(m1, 3.0).unwrap();
            assert_eq!(p.erasure_prob(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn exponential_median() {
        let p = RfChannelParams::new(1.0, 4.0).unwrap();
        let th = 4.0 * std::f64::consts::LN_2;
        assert!((p.erasure_prob(th).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stronger_link_erases_less() {
        let mut last = 1.0;
        for mu in [1.0, 2.0, 5.0, 10.0, 100.0, 1e4, 1e8] {
            let eps = RfChannelParams::new(2.0, mu).unwrap().erasure_prob(0.8).unwrap();
            assert!(eps < last, "mu = {mu}");
            last = eps;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(RfChannelParams::new(0.4, 1.0).is_err());
        assert!(RfChannelParams::new(1.0, 0.0).is_err());
        assert!(RfChannelParams::new(1.0, 1.0).unwrap().cdf(-2.0).is_err());
    }
}
