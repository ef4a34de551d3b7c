//! Log-gamma, log-binomials and the regularized incomplete gamma functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Iteration cap for the incomplete-gamma series and continued fraction.
pub const MAX_ITERATIONS: usize = 10_000;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)| (Lanczos, g = 7), with reflection below 1/2.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("binomial C({n}, {k}) requires k <= n")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k == 1 {
        return Ok((n as f64).ln());
    }
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

fn check_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma needs a > 0, got a = {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma needs x >= 0, got x = {x}")));
    }
    Ok(())
}

/// `ln(e^{-x} x^a / Γ(a))`
fn log_prefactor(a: f64, x: f64) -> f64 {
    -x + a * x.ln() - ln_gamma(a)
}

/// Lower regularized P(a, x) by its power series, regardless of where `x`
/// lies. Converges everywhere but slowly for `x ≫ a`.
pub fn gamma_p_series(a: f64, x: f64) -> Result<f64> {
    check_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITERATIONS {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            let p = (sum.ln() + log_prefactor(a, x)).exp();
            if !p.is_finite() {
                return Err(Error::domain(format!("series for P({a}, {x}) is not finite")));
            }
            return Ok(p.min(1.0));
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma series",
        iterations: MAX_ITERATIONS,
    })
}

/// Upper regularized Q(a, x) by the Legendre continued fraction evaluated
/// with modified Lentz. Restricted to `x >= a`: well below `a` the
/// iteration still settles, but on a wrong value.
pub fn gamma_q_continued_fraction(a: f64, x: f64) -> Result<f64> {
    check_args(a, x)?;
    if x == 0.0 || x < a {
        return Err(Error::domain(format!("continued fraction for Q(a, x) needs x >= a > 0, got a = {a}, x = {x}")));
    }
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = if b.abs() < TINY { 1.0 / TINY } else { 1.0 / b };
    let mut h = d;
    for n in 1..=MAX_ITERATIONS {
        let n = n as f64;
        let an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            let q = (h.ln() + log_prefactor(a, x)).exp();
            if !q.is_finite() {
                return Err(Error::domain(format!("continued fraction for Q({a}, {x}) is not finite")));
            }
            return Ok(q.min(1.0));
        }
    }
    Err(Error::Convergence {
        routine: "incomplete gamma continued fraction",
        iterations: MAX_ITERATIONS,
    })
}

/// Q(a, x) = Γ(a, x) / Γ(a). Series below `a + 1`, continued fraction above.
pub fn gamma_upper_regularized(a: f64, x: f64) -> Result<f64> {
    check_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x)?)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// P(a, x) = γ(a, x) / Γ(a) = 1 − Q(a, x).
pub fn gamma_lower_regularized(a: f64, x: f64) -> Result<f64> {
    check_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        Ok(1.0 - gamma_q_continued_fraction(a, x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..=20u32 {
            fact *= f64::from(n);
            let got = ln_gamma(f64::from(n) + 1.0);
            assert!((got - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0), "n = {n}");
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn log_binomial_small_cases() {
        assert_eq!(log_binomial(5, 0).unwrap(), 0.0);
        assert_eq!(log_binomial(5, 5).unwrap(), 0.0);
        assert!((log_binomial(5, 2).unwrap() - 10f64.ln()).abs() < 1e-12);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn log_binomial_is_exactly_symmetric() {
        for n in [7u64, 50, 333, 1000] {
            for k in 0..=n {
                assert_eq!(log_binomial(n, k).unwrap(), log_binomial(n, n - k).unwrap());
            }
        }
    }

    #[test]
    fn q_at_zero_is_one() {
        for a in [0.3, 0.5, 1.0, 2.7, 40.0] {
            assert_eq!(gamma_upper_regularized(a, 0.0).unwrap(), 1.0);
            assert_eq!(gamma_lower_regularized(a, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn q_of_shape_one_is_exponential() {
        for x in [0.01, 0.5, 1.0, 1.99, 2.0, 2.01, 7.5, 30.0] {
            let q = gamma_upper_regularized(1.0, x).unwrap();
            assert!((q - (-x).exp()).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn integer_shape_matches_poisson_tail() {
        // Q(n, x) = e^{-x} Σ_{k<n} x^k / k!
        for n in 1..=6u32 {
            for x in [0.2, 1.0, 3.3, 6.0, 12.0] {
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 0..n {
                    if k > 0 {
                        term *= x / f64::from(k);
                    }
                    sum += term;
                }
                let expected = (-x).exp() * sum;
                let got = gamma_upper_regularized(f64::from(n), x).unwrap();
                assert!((got - expected).abs() < 1e-13, "n = {n}, x = {x}");
            }
        }
    }

    #[test]
    fn continued_fraction_refuses_small_x() {
        assert!(matches!(gamma_q_continued_fraction(10.0, 1.0), Err(Error::Domain(_))));
        assert!(gamma_q_continued_fraction(10.0, 10.0).is_ok());
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(matches!(gamma_upper_regularized(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_upper_regularized(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_upper_regularized(1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(gamma_upper_regularized(f64::NAN, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn reports_non_convergence_instead_of_truncating() {
        // The raw series needs ~x terms; far past the cap it must error.
        let err = gamma_p_series(1.0, 1e6).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }
}
