//! Laser and static field waveforms: the Gaussian-envelope pulse used by the
//! TDSE/flux/SFA runs and the CW-plus-static form used for saddle-point
//! analysis. The electric field is always the exact analytic derivative of
//! the vector potential, envelope term included.

use crate::config::PulseConfig;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const FOUR_LN2: f64 = 2.772_588_722_239_781;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaveformKind {
    /// A(t) = (F/w) exp(-4 ln2 (t/tau)^2) sin(w t + phi)
    GaussianPulse,
    /// E(t) = -F0 - F cos(w t), A(t) = F0 t + (F/w) sin(w t)
    CwPlusStatic,
}

/// A concrete field waveform. `sign` is +1 for the tip-side run and -1 for
/// the sample-side run with the instantaneous field inverted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub kind: WaveformKind,
    pub peak_field: f64,
    pub static_field: f64,
    pub omega: f64,
    pub fwhm: f64,
    pub cep: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub sign: f64,
}

impl Waveform {
    pub fn gaussian(pulse: &PulseConfig) -> Self {
        Waveform {
            kind: WaveformKind::GaussianPulse,
            peak_field: pulse.peak_field,
            static_field: pulse.static_field,
            omega: pulse.omega,
            fwhm: pulse.fwhm,
            cep: pulse.cep,
            t_min: pulse.t_min,
            t_max: pulse.t_max,
            sign: 1.0,
        }
    }

    pub fn cw(pulse: &PulseConfig) -> Self {
        Waveform { kind: WaveformKind::CwPlusStatic, ..Self::gaussian(pulse) }
    }

    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign = sign;
        self
    }

    /// Vector potential at complex time; both waveform kinds are entire
    /// functions, so this is the exact analytic continuation.
    pub fn vector_potential_c(&self, t: Complex64) -> Complex64 {
        let a = match self.kind {
            WaveformKind::GaussianPulse => {
                let env = (-(t / self.fwhm).powi(2) * FOUR_LN2).exp();
                self.peak_field / self.omega * env * (self.omega * t + self.cep).sin()
            }
            WaveformKind::CwPlusStatic => {
                self.static_field * t + self.peak_field / self.omega * (self.omega * t).sin()
            }
        };
        a * self.sign
    }

    /// Electric field E(t) = -dA/dt at complex time, analytic form.
    pub fn efield_c(&self, t: Complex64) -> Complex64 {
        let e = match self.kind {
            WaveformKind::GaussianPulse => {
                let env = (-(t / self.fwhm).powi(2) * FOUR_LN2).exp();
                let phase = self.omega * t + self.cep;
                -self.peak_field
                    * env
                    * (phase.cos() - 2.0 * FOUR_LN2 * t / (self.omega * self.fwhm * self.fwhm) * phase.sin())
            }
            WaveformKind::CwPlusStatic => {
                Complex64::from(-self.static_field) - self.peak_field * (self.omega * t).cos()
            }
        };
        e * self.sign
    }

    pub fn vector_potential(&self, t: f64) -> f64 {
        self.vector_potential_c(Complex64::from(t)).re
    }

    pub fn efield(&self, t: f64) -> f64 {
        self.efield_c(Complex64::from(t)).re
    }

    /// Closed-form int_{t1}^{t2} A dtau for the CW waveform.
    pub fn cw_a_antiderivative(&self, t: Complex64) -> Complex64 {
        debug_assert!(matches!(self.kind, WaveformKind::CwPlusStatic));
        (self.static_field * t * t * 0.5
            - self.peak_field / (self.omega * self.omega) * (self.omega * t).cos())
            * self.sign
    }

    /// Closed-form antiderivative of A^2 for the CW waveform.
    pub fn cw_a2_antiderivative(&self, t: Complex64) -> Complex64 {
        debug_assert!(matches!(self.kind, WaveformKind::CwPlusStatic));
        let f0 = self.static_field;
        let f = self.peak_field;
        let w = self.omega;
        // (F0 t + (F/w) sin wt)^2 expanded and integrated term by term
        let t2 = t * t;
        let sin = (w * t).sin();
        let cos = (w * t).cos();
        f0 * f0 * t2 * t / 3.0
            + 2.0 * f0 * f / w * (sin / (w * w) - t * cos / w)
            + f * f / (w * w) * (t * 0.5 - sin * cos / (2.0 * w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PulseConfig;
    use crate::units;
    use approx::assert_relative_eq;

    fn pulse(cep: f64) -> PulseConfig {
        PulseConfig::new(
            units::vnm_to_au(35.0),
            0.0,
            PulseConfig::omega_from_wavelength_nm(830.0),
            units::fs_to_au(6.0),
            cep,
            None,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_a_at_peak() {
        let w = Waveform::gaussian(&pulse(0.0));
        assert_relative_eq!(w.vector_potential(0.0), 0.0, epsilon = 1e-15);
        let w2 = Waveform::gaussian(&pulse(std::f64::consts::FRAC_PI_2));
        assert_relative_eq!(w2.vector_potential(0.0), w2.peak_field / w2.omega, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_field_at_peak() {
        // envelope derivative vanishes at t = 0, so E(0) = -F for CEP 0
        let w = Waveform::gaussian(&pulse(0.0));
        assert_relative_eq!(w.efield(0.0), -w.peak_field, max_relative = 1e-12);
    }

    #[test]
    fn cw_forms() {
        let mut p = pulse(0.0);
        p.static_field = units::vnm_to_au(1.0);
        p.peak_field = 0.0;
        let w = Waveform::cw(&p);
        let t = units::fs_to_au(1.0);
        assert_relative_eq!(w.vector_potential(t), p.static_field * t, max_relative = 1e-12);
        p.peak_field = units::vnm_to_au(35.0);
        let w = Waveform::cw(&p);
        assert_relative_eq!(w.efield(0.0), -p.static_field - p.peak_field, max_relative = 1e-12);
    }

    #[test]
    fn efield_is_minus_da_dt() {
        for wf in [Waveform::gaussian(&pulse(0.7)), Waveform::cw(&pulse(0.0))] {
            let h = 1e-4;
            for i in 0..40 {
                let t = wf.t_min + (wf.t_max - wf.t_min) * i as f64 / 39.0;
                let fd = -(wf.vector_potential(t + h) - wf.vector_potential(t - h)) / (2.0 * h);
                let scale = wf.peak_field.max(1e-30);
                assert!(
                    (wf.efield(t) - fd).abs() <= 1e-6 * scale,
                    "t = {t}: analytic {} vs fd {}",
                    wf.efield(t),
                    fd
                );
            }
        }
    }

    #[test]
    fn field_integral_matches_potential_difference() {
        let w = Waveform::gaussian(&pulse(1.1));
        let n = 20001;
        let h = (w.t_max - w.t_min) / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| w.efield(w.t_min + i as f64 * h)).collect();
        let integral = crate::math::trapezoid_real(&vals, h);
        let want = w.vector_potential(w.t_min) - w.vector_potential(w.t_max);
        assert_relative_eq!(integral, want, epsilon = 1e-6 * w.peak_field);
    }

    #[test]
    fn cep_pi_shift_flips_field() {
        let a = Waveform::gaussian(&pulse(0.4));
        let b = Waveform::gaussian(&pulse(0.4 + std::f64::consts::PI));
        let c = a.with_sign(-1.0);
        for i in 0..100 {
            let t = a.t_min + (a.t_max - a.t_min) * i as f64 / 99.0;
            assert_relative_eq!(a.efield(t), -b.efield(t), epsilon = 1e-14);
            assert_relative_eq!(a.vector_potential(t), -b.vector_potential(t), epsilon = 1e-14);
            // sign flip is the same identity
            assert_relative_eq!(c.efield(t), b.efield(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn cw_antiderivatives_match_quadrature() {
        let mut p = pulse(0.0);
        p.static_field = units::vnm_to_au(2.0);
        let w = Waveform::cw(&p);
        let t1 = Complex64::new(-30.0, 2.0);
        let t2 = Complex64::new(55.0, -1.0);
        let a_quad = crate::math::integrate_segment(|z| w.vector_potential_c(z), t1, t2, 64);
        let a_closed = w.cw_a_antiderivative(t2) - w.cw_a_antiderivative(t1);
        assert_relative_eq!(a_quad.re, a_closed.re, max_relative = 1e-10);
        assert_relative_eq!(a_quad.im, a_closed.im, max_relative = 1e-8, epsilon = 1e-10);
        let a2_quad = crate::math::integrate_segment(
            |z| {
                let a = w.vector_potential_c(z);
                a * a
            },
            t1,
            t2,
            64,
        );
        let a2_closed = w.cw_a2_antiderivative(t2) - w.cw_a2_antiderivative(t1);
        assert_relative_eq!(a2_quad.re, a2_closed.re, max_relative = 1e-9);
    }
}
