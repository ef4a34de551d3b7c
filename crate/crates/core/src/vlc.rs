//! Indoor optical hop: Lambertian line-of-sight intensity between a floor
//! user and a ceiling relay, and the SNR distribution it induces when the
//! user sits uniformly at random inside the LED footprint.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Geometry and optics of the user → relay link. Angles in radians,
/// lengths in metres, detector area in m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcChannelParams {
    /// Receiver field of view Ψ.
    pub fov_psi_max: f64,
    /// Photodetector surface area.
    pub area: f64,
    /// Responsivity, A/W.
    pub responsivity: f64,
    /// Optical filter gain T_s.
    pub filter_gain: f64,
    /// Refractive index ζ of the concentrator lens.
    pub refractive_index: f64,
    /// LED semi-angle at half illuminance Φ½.
    pub half_angle: f64,
    /// Vertical distance between the user plane and the ceiling.
    pub height: f64,
}

impl VlcChannelParams {
    /// Reference optics (90° FOV, 1 cm² detector, 0.4 A/W, unit filter gain,
    /// lens index 1.5) with the given beam half-angle and room height.
    pub fn reference_optics(half_angle: f64, height: f64) -> Self {
        Self {
            fov_psi_max: PI / 2.0,
            area: 1e-4,
            responsivity: 0.4,
            filter_gain: 1.0,
            refractive_index: 1.5,
            half_angle,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::domain(what.to_string()))
            }
        };
        check(
            self.fov_psi_max > 0.0 && self.fov_psi_max <= PI / 2.0,
            "field of view must lie in (0, pi/2]",
        )?;
        check(self.area > 0.0, "photodetector area must be positive")?;
        check(self.responsivity > 0.0, "responsivity must be positive")?;
        check(self.filter_gain > 0.0, "filter gain must be positive")?;
        check(self.refractive_index >= 1.0, "refractive index must be >= 1")?;
        check(
            self.half_angle > 0.0 && self.half_angle < PI / 2.0,
            "half-illuminance angle must lie in (0, pi/2)",
        )?;
        check(self.height > 0.0 && self.height.is_finite(), "height must be positive")?;
        Ok(())
    }
}

/// Constants derived once from [`VlcChannelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcDerived {
    /// Lambertian order m.
    pub lambert_order: f64,
    /// Footprint radius r_m = L·tan Φ½.
    pub cell_radius: f64,
    /// Concentrator gain ζ² / sin² Ψ.
    pub concentrator_gain: f64,
    /// 𝒳 = 𝒜(m+1)ℛ T_s g L^{m+1} / 2π, so that I(r) = 𝒳 / (r² + L²)^{(m+3)/2}.
    pub intensity_const: f64,
    /// Intensity at the footprint edge.
    pub i_min: f64,
    /// Intensity directly below the relay.
    pub i_max: f64,
}

pub fn derive_vlc(params: &VlcChannelParams) -> Result<VlcDerived> {
    params.validate()?;
    let cos_half = params.half_angle.cos();
    let sin_fov = params.fov_psi_max.sin();
    if cos_half <= 0.0 || cos_half >= 1.0 {
        return Err(Error::domain("cos of the half-illuminance angle must lie in (0, 1)"));
    }
    if sin_fov == 0.0 {
        return Err(Error::domain("sin of the field of view is zero"));
    }
    let m = -std::f64::consts::LN_2 / cos_half.ln();
    let l = params.height;
    let cell_radius = l * params.half_angle.tan();
    let concentrator_gain = params.refractive_index.powi(2) / sin_fov.powi(2);
    let intensity_const = params.area * (m + 1.0) * params.responsivity * params.filter_gain
        * concentrator_gain
        * l.powf(m + 1.0)
        / (2.0 * PI);
    let i_max = intensity_const / l.powf(m + 3.0);
    let i_min = intensity_const / (cell_radius * cell_radius + l * l).powf((m + 3.0) / 2.0);
    Ok(VlcDerived {
        lambert_order: m,
        cell_radius,
        concentrator_gain,
        intensity_const,
        i_min,
        i_max,
    })
}

/// A validated optical channel: parameters plus their derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcChannel {
    pub params: VlcChannelParams,
    pub derived: VlcDerived,
}

impl VlcChannel {
    pub fn new(params: VlcChannelParams) -> Result<Self> {
        let derived = derive_vlc(&params)?;
        Ok(Self { params, derived })
    }

    /// Optical intensity received from a user whose floor position is a
    /// horizontal distance `r` from the relay's projection. Zero outside the
    /// receiver field of view.
    pub fn intensity_at(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let l = self.params.height;
        let incidence = (r / l).atan();
        if incidence > self.params.fov_psi_max {
            return 0.0;
        }
        let m = self.derived.lambert_order;
        self.derived.intensity_const / (r * r + l * l).powf((m + 3.0) / 2.0)
    }
}

/// Electrical-side constants of the optical receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcSnrParams {
    /// Average transmitted optical power P_t, W.
    pub tx_power: f64,
    /// Optical-to-electrical conversion efficiency η.
    pub oe_efficiency: f64,
    /// Noise power spectral density N_0, W/Hz.
    pub noise_psd: f64,
    /// System bandwidth B, Hz.
    pub bandwidth: f64,
}

impl VlcSnrParams {
    /// η = 0.8, N_0 = 1e-21 W/Hz, B = 20 MHz.
    pub fn reference_receiver(tx_power: f64) -> Self {
        Self {
            tx_power,
            oe_efficiency: 0.8,
            noise_psd: 1e-21,
            bandwidth: 20e6,
        }
    }
}

/// Distribution of the electrical SNR at a relay for a user placed
/// uniformly in the disk of radius r_m around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcSnrModel {
    pub channel: VlcChannel,
    pub electrical: VlcSnrParams,
    /// μ_vlc = P_t² η² / (N_0 B).
    pub mu_vlc: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl VlcSnrModel {
    pub fn new(channel: VlcChannel, electrical: VlcSnrParams) -> Result<Self> {
        let e = electrical;
        if !(e.tx_power > 0.0 && e.oe_efficiency > 0.0 && e.noise_psd > 0.0 && e.bandwidth > 0.0) {
            return Err(Error::domain(
                "tx power, o/e efficiency, noise PSD and bandwidth must be positive",
            ));
        }
        let mu_vlc = e.tx_power * e.tx_power * e.oe_efficiency * e.oe_efficiency
            / (e.noise_psd * e.bandwidth);
        let d = channel.derived;
        let l2 = channel.params.height.powi(2);
        let m3 = d.lambert_order + 3.0;
        let scale = mu_vlc * d.intensity_const * d.intensity_const;
        let gamma_min = scale / (d.cell_radius * d.cell_radius + l2).powf(m3);
        let gamma_max = scale / l2.powf(m3);
        Ok(Self {
            channel,
            electrical,
            mu_vlc,
            gamma_min,
            gamma_max,
        })
    }

    /// γ = μ_vlc · I².
    #[inline]
    pub fn snr_of_intensity(&self, intensity: f64) -> f64 {
        self.mu_vlc * intensity * intensity
    }

    /// SNR of a user at horizontal distance `r` from the relay.
    #[inline]
    pub fn snr_at_distance(&self, r: f64) -> f64 {
        self.snr_of_intensity(self.channel.intensity_at(r))
    }

    /// CDF of the user SNR for uniform placement in the footprint.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::domain(format!("SNR must be non-negative, got {gamma}")));
        }
        if gamma < self.gamma_min {
            return Ok(0.0);
        }
        if gamma > self.gamma_max {
            return Ok(1.0);
        }
        let d = &self.channel.derived;
        let l2 = self.channel.params.height.powi(2);
        let rm2 = d.cell_radius * d.cell_radius;
        let scale = self.mu_vlc * d.intensity_const * d.intensity_const;
        let root = (scale / gamma).powf(1.0 / (d.lambert_order + 3.0));
        Ok((1.0 + l2 / rm2 - root / rm2).clamp(0.0, 1.0))
    }

    /// ε_vlc: probability that a uniformly placed user falls below `gamma_th`.
    pub fn erasure_prob(&self, gamma_th: f64) -> Result<f64> {
        self.cdf(gamma_th)
    }

    /// Threshold at which the erasure probability equals `eps` (inverse CDF).
    pub fn threshold_for_erasure(&self, eps: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::domain(format!("erasure probability must lie in [0, 1], got {eps}")));
        }
        let d = &self.channel.derived;
        let l2 = self.channel.params.height.powi(2);
        let rm2 = d.cell_radius * d.cell_radius;
        let scale = self.mu_vlc * d.intensity_const * d.intensity_const;
        Ok(scale / (l2 + rm2 * (1.0 - eps)).powf(d.lambert_order + 3.0))
    }

    /// Draws a user position with radial density 2r/r_m² and returns its SNR.
    pub fn sample_user_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.channel.derived.cell_radius * rng.random::<f64>().sqrt();
        self.snr_at_distance(r)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference() -> VlcSnrModel {
        let ch = VlcChannel::new(VlcChannelParams::reference_optics(PI / 4.0, 2.5)).unwrap();
        VlcSnrModel::new(ch, VlcSnrParams::reference_receiver(1.0)).unwrap()
    }

    /// Direct Lambertian evaluation with explicit distance and angles.
    fn lambertian_intensity(p: &VlcChannelParams, m: f64, r: f64) -> f64 {
        let d = (r * r + p.height * p.height).sqrt();
        let cos_theta = p.height / d;
        let psi = cos_theta.acos();
        if psi > p.fov_psi_max {
            return 0.0;
        }
        let g = p.refractive_index.powi(2) / p.fov_psi_max.sin().powi(2);
        p.area * (m + 1.0) * p.responsivity * p.filter_gain * g / (2.0 * PI * d * d)
            * cos_theta.powf(m)
            * psi.cos()
    }

    #[test]
    fn lambert_order_exact_cases() {
        let p45 = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        let p60 = VlcChannelParams::reference_optics(PI / 3.0, 2.5);
        assert!((derive_vlc(&p45).unwrap().lambert_order - 2.0).abs() < 1e-12);
        assert!((derive_vlc(&p60).unwrap().lambert_order - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_optics_constants() {
        let p = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        let d = derive_vlc(&p).unwrap();
        assert!((d.concentrator_gain - 2.25).abs() < 1e-15);
        assert!((d.cell_radius - 2.5).abs() < 1e-12);
        // compact form vs explicit Lambertian law at several radii
        for r in [0.0, 0.3, 1.0, 2.0, 2.5, 4.0] {
            let compact = VlcChannel { params: p, derived: d }.intensity_at(r);
            let explicit = lambertian_intensity(&p, d.lambert_order, r);
            assert!((compact - explicit).abs() <= 1e-12 * explicit, "r = {r}");
        }
        assert!((lambertian_intensity(&p, d.lambert_order, 0.0) - d.i_max).abs() <= 1e-12 * d.i_max);
        let ratio = d.i_max / d.i_min;
        let expected = ((d.cell_radius.powi(2) + 2.5f64.powi(2)) / 2.5f64.powi(2))
            .powf((d.lambert_order + 3.0) / 2.0);
        assert!((ratio - expected).abs() < 1e-12 * expected);
        assert!(d.i_min > 0.0 && d.i_min < d.i_max);
    }

    #[test]
    fn intensity_bounds_and_fov_cutoff() {
        let model = reference();
        let ch = model.channel;
        assert_eq!(ch.intensity_at(0.0), ch.derived.i_max);
        let edge = ch.intensity_at(ch.derived.cell_radius);
        assert!((edge - ch.derived.i_min).abs() < 1e-12 * ch.derived.i_min);

        let mut narrow = ch.params;
        narrow.fov_psi_max = 30f64.to_radians();
        let narrow = VlcChannel::new(narrow).unwrap();
        let beyond = narrow.params.height * 31f64.to_radians().tan();
        assert_eq!(narrow.intensity_at(beyond), 0.0);
        assert!(narrow.intensity_at(0.5) > 0.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut p = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        p.half_angle = PI / 2.0;
        assert!(VlcChannel::new(p).is_err());
        let mut p = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        p.height = 0.0;
        assert!(VlcChannel::new(p).is_err());
        let mut p = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        p.refractive_index = 0.9;
        assert!(VlcChannel::new(p).is_err());
        let mut p = VlcChannelParams::reference_optics(PI / 4.0, 2.5);
        p.fov_psi_max = 0.0;
        assert!(VlcChannel::new(p).is_err());
    }

    #[test]
    fn snr_square_law_and_bounds() {
        let model = reference();
        let d = model.channel.derived;
        assert_eq!(model.snr_of_intensity(0.0), 0.0);
        assert!((model.snr_of_intensity(d.i_max) - model.gamma_max).abs() < 1e-9 * model.gamma_max);
        let i = 0.5 * d.i_max;
        assert!((model.snr_of_intensity(2.0 * i) - 4.0 * model.snr_of_intensity(i)).abs() < 1e-9);
        let expected_mu = 0.64 / (1e-21 * 20e6);
        assert!((model.mu_vlc - expected_mu).abs() < 1e-14 * expected_mu);
    }

    #[test]
    fn cdf_piecewise_edges() {
        let m = reference();
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
        assert!(m.cdf(m.gamma_min).unwrap().abs() < 1e-12);
        assert!((m.cdf(m.gamma_max).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.cdf(m.gamma_max * 1.01).unwrap(), 1.0);
        assert!(m.cdf(-1.0).is_err());
        assert_eq!(m.erasure_prob(0.5 * m.gamma_min).unwrap(), 0.0);
        assert_eq!(m.erasure_prob(2.0 * m.gamma_max).unwrap(), 1.0);
    }

    #[test]
    fn threshold_inverts_cdf() {
        let m = reference();
        for eps in [0.0, 0.1, 0.37, 0.9, 1.0] {
            let th = m.threshold_for_erasure(eps).unwrap();
            assert!((m.cdf(th).unwrap() - eps).abs() < 1e-12, "eps = {eps}");
        }
    }

    #[test]
    fn taller_room_lowers_peak_snr() {
        let snr = |l: f64| {
            let ch = VlcChannel::new(VlcChannelParams::reference_optics(PI / 4.0, l)).unwrap();
            VlcSnrModel::new(ch, VlcSnrParams::reference_receiver(1.0)).unwrap().gamma_max
        };
        assert!(snr(2.0) > snr(2.5));
        assert!(snr(2.5) > snr(3.0));
    }

    #[test]
    fn sampled_radius_has_mean_two_thirds_rm() {
        let m = reference();
        let rm = m.channel.derived.cell_radius;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mean = (0..n).map(|_| rm * rng.random::<f64>().sqrt()).sum::<f64>() / n as f64;
        // var(r) = r_m²/2 − (2r_m/3)² = r_m²/18
        let sigma = (rm * rm / 18.0 / n as f64).sqrt();
        assert!((mean - 2.0 * rm / 3.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn samples_stay_in_support() {
        let m = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let g = m.sample_user_snr(&mut rng);
            assert!(g >= m.gamma_min * (1.0 - 1e-12) && g <= m.gamma_max * (1.0 + 1e-12));
        }
    }
}
