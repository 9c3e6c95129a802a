//! Strong-field-approximation tunneling amplitude: Volkov-propagator
//! prefactors xi and eta, effective momentum p_tilde, semiclassical action S,
//! and the oscillatory two-time integral
//!
//!   M_E = Int dt2 Int^{t2} dt1 sqrt(i / (8 pi (t2 - t1))) eta(t2) xi(t1)
//!         e^{i S(t2, t1)}.
//!
//! All building blocks accept complex times (the waveforms are entire
//! functions), which is what the saddle module differentiates; the amplitude
//! quadrature itself runs on the real (t1, sqrt(t2 - t1)) plane where the
//! inverse-square-root diagonal singularity cancels exactly.

use crate::config::{JunctionConfig, SfaConfig};
use crate::error::CoreError;
use crate::junction::StaticEigenstate;
use crate::math;
use crate::pulse::{Waveform, WaveformKind};
use crate::spectrum::Spectrum;
use crate::units::E_CHARGE;
use num_complex::Complex64;
use rayon::prelude::*;

/// One evaluation of the SFA integrand's building blocks at (t1, t2).
#[derive(Debug, Clone, Copy)]
pub struct SfaKernelPoint {
    pub t1: Complex64,
    pub t2: Complex64,
    pub p_tilde: Complex64,
    pub xi: Complex64,
    pub eta: Complex64,
    pub action: Complex64,
}

/// Int_{t1}^{t2} e A(tau) dtau along the straight segment; closed form for
/// the CW waveform, Gauss-Legendre panels otherwise.
pub fn a_integral(waveform: &Waveform, t1: Complex64, t2: Complex64) -> Complex64 {
    match waveform.kind {
        WaveformKind::CwPlusStatic => {
            E_CHARGE * (waveform.cw_a_antiderivative(t2) - waveform.cw_a_antiderivative(t1))
        }
        WaveformKind::GaussianPulse => {
            E_CHARGE
                * math::integrate_segment(
                    |z| waveform.vector_potential_c(z),
                    t1,
                    t2,
                    segment_panels(waveform, t1, t2),
                )
        }
    }
}

/// Int_{t1}^{t2} e^2 A^2(tau) dtau along the straight segment.
pub fn a2_integral(waveform: &Waveform, t1: Complex64, t2: Complex64) -> Complex64 {
    match waveform.kind {
        WaveformKind::CwPlusStatic => {
            waveform.cw_a2_antiderivative(t2) - waveform.cw_a2_antiderivative(t1)
        }
        WaveformKind::GaussianPulse => math::integrate_segment(
            |z| {
                let a = waveform.vector_potential_c(z);
                a * a
            },
            t1,
            t2,
            segment_panels(waveform, t1, t2),
        ),
    }
}

fn segment_panels(waveform: &Waveform, t1: Complex64, t2: Complex64) -> usize {
    // keep each Gauss-Legendre panel under ~3 radians of carrier phase
    ((t2 - t1).norm() * waveform.omega / 3.0).ceil() as usize + 2
}

/// Effective canonical momentum p_tilde = (Int e A + d) / (t2 - t1).
pub fn p_tilde(waveform: &Waveform, t1: Complex64, t2: Complex64, d: f64) -> Complex64 {
    (a_integral(waveform, t1, t2) + d) / (t2 - t1)
}

/// Emission prefactor xi(t1): the dipole matrix element of the gap part of
/// the initial state against the Volkov wave of effective momentum p_tilde,
/// xi = e E(t1) Int_0^d Psi0(x) x e^{-i (p_tilde - eA(t1)) x} dx in closed
/// form.
pub fn xi_prefactor(
    waveform: &Waveform,
    t1: Complex64,
    p_tilde: Complex64,
    state: &StaticEigenstate,
) -> Result<Complex64, CoreError> {
    let d = state.d;
    let w = p_tilde - E_CHARGE * waveform.vector_potential_c(t1);
    let i = Complex64::i();
    let q_minus = w - i * state.alpha;
    let q_plus = w + i * state.alpha;
    if q_minus.norm() < 1e-14 || q_plus.norm() < 1e-14 {
        return Err(CoreError::Numeric(
            "xi prefactor pole: p_tilde - eA = +-i alpha".into(),
        ));
    }
    let g = |q: Complex64| (-1.0 + (1.0 + i * q * d) * (-i * q * d).exp()) / (q * q);
    Ok(E_CHARGE * waveform.efield_c(t1) * (state.b1 * g(q_minus) + state.b2 * g(q_plus)))
}

/// Electrostatic energy of the sample-side gap edge relative to the tip-side
/// vacuum level; the SFA final plane wave carries momentum
/// sqrt(2 (E - u_s)).
pub fn sample_offset(junction: &JunctionConfig) -> f64 {
    -E_CHARGE * (junction.contact_potential + junction.bias)
}

/// Gap momentum of the arrival wave: k = sqrt(2 (E - u_s)) above the
/// sample-side gap edge u_s; below it (but above the sample band floor) the
/// wave is evanescent and k continues to -i kappa, so that e^{-i k d}
/// carries the static-tunneling suppression e^{-kappa d} of transfers into
/// the sample band.
pub fn gap_momentum(e: f64, junction: &JunctionConfig) -> Complex64 {
    let q = 2.0 * (e - sample_offset(junction));
    if q >= 0.0 {
        Complex64::from(q.sqrt())
    } else {
        -Complex64::i() * (-q).sqrt()
    }
}

/// Arrival prefactor eta(t2) = (p_tilde - eA(t2) + k) e^{-i k d} with
/// k the (possibly evanescent) gap momentum.
pub fn eta_prefactor(
    waveform: &Waveform,
    t2: Complex64,
    p_tilde: Complex64,
    e: f64,
    junction: &JunctionConfig,
) -> Result<Complex64, CoreError> {
    if e <= junction.sample_floor() {
        return Err(CoreError::Domain(format!(
            "sfa final energy {e} below the sample band floor"
        )));
    }
    let k = gap_momentum(e, junction);
    let a = waveform.vector_potential_c(t2);
    Ok((p_tilde - E_CHARGE * a + k) * (-Complex64::i() * k * junction.d).exp())
}

/// Semiclassical action S = E t2 + p_tilde^2 (t2 - t1) / 2
/// - Int e^2 A^2 / 2 + |E0| t1.
pub fn action(
    waveform: &Waveform,
    t1: Complex64,
    t2: Complex64,
    e: f64,
    e0_abs: f64,
    d: f64,
) -> Complex64 {
    let p = p_tilde(waveform, t1, t2, d);
    e * t2 + 0.5 * p * p * (t2 - t1) - 0.5 * a2_integral(waveform, t1, t2) + e0_abs * t1
}

/// All kernel pieces at once, sharing the p_tilde evaluation.
pub fn kernel_point(
    waveform: &Waveform,
    t1: Complex64,
    t2: Complex64,
    e: f64,
    state: &StaticEigenstate,
    junction: &JunctionConfig,
) -> Result<SfaKernelPoint, CoreError> {
    let p = p_tilde(waveform, t1, t2, junction.d);
    Ok(SfaKernelPoint {
        t1,
        t2,
        p_tilde: p,
        xi: xi_prefactor(waveform, t1, p, state)?,
        eta: eta_prefactor(waveform, t2, p, e, junction)?,
        action: e * t2 + 0.5 * p * p * (t2 - t1) - 0.5 * a2_integral(waveform, t1, t2)
            + state.energy.abs() * t1,
    })
}

/// The two-time SFA amplitude at final energy `e`.
///
/// Quadrature: composite trapezoid on the (t1, u = sqrt(t2 - t1)) plane. The
/// substitution absorbs the 1 / sqrt(t2 - t1) weight exactly, so the
/// integrand is bounded; the unresolvable diagonal oscillation of S ~
/// d^2 / (2 tau) is cut at tau_min. The last stretch of the t2 range is
/// cos^2-tapered to suppress hard-window ringing.
pub fn sfa_amplitude(
    e: f64,
    state: &StaticEigenstate,
    junction: &JunctionConfig,
    waveform: &Waveform,
    quad: &SfaConfig,
) -> Result<Complex64, CoreError> {
    if quad.tau_min <= 0.0 || quad.dt_quad <= 0.0 {
        return Err(CoreError::Config("sfa quadrature steps must be positive".into()));
    }
    if e <= junction.sample_floor() {
        return Err(CoreError::Domain(format!(
            "sfa final energy {e} below the sample band floor"
        )));
    }
    let (t_min, t_max) = (waveform.t_min, waveform.t_max);
    let window = t_max - t_min;
    if window <= quad.tau_min {
        return Err(CoreError::Config("time window shorter than tau_min".into()));
    }

    // cumulative integrals of eA and A^2 on a fine grid, linearly
    // interpolated; the fine step scales with dt_quad so self-convergence
    // checks see the full quadrature
    let h = 0.25 * quad.dt_quad;
    let n_fine = (window / h).ceil() as usize + 1;
    let hf = window / (n_fine - 1) as f64;
    let mut cum_ea = Vec::with_capacity(n_fine);
    let mut cum_a2 = Vec::with_capacity(n_fine);
    let mut sea = 0.0;
    let mut sa2 = 0.0;
    let mut prev_a = waveform.vector_potential(t_min);
    cum_ea.push(0.0);
    cum_a2.push(0.0);
    for i in 1..n_fine {
        let a = waveform.vector_potential(t_min + i as f64 * hf);
        sea += 0.5 * (prev_a + a) * hf * E_CHARGE;
        sa2 += 0.5 * (prev_a * prev_a + a * a) * hf;
        cum_ea.push(sea);
        cum_a2.push(sa2);
        prev_a = a;
    }
    let interp = |table: &[f64], t: f64| -> f64 {
        let s = ((t - t_min) / hf).clamp(0.0, (n_fine - 1) as f64);
        let i = (s as usize).min(n_fine - 2);
        let f = s - i as f64;
        table[i] * (1.0 - f) + table[i + 1] * f
    };

    let d = junction.d;
    let alpha = state.alpha;
    let e0_abs = state.energy.abs();
    let k_out = gap_momentum(e, junction);
    let eta_phase = (-Complex64::i() * k_out * d).exp();
    // sqrt(i / (8 pi tau)) * 2u du with tau = u^2 collapses to this constant
    let front = (Complex64::i() / (2.0 * std::f64::consts::PI)).sqrt();
    let exp_ad = (alpha * d).exp();
    let taper_width = (2.0 * 2.0 * std::f64::consts::PI / waveform.omega).min(0.1 * window);

    let n_t1 = (window / quad.dt_quad).ceil() as usize + 1;
    let dt1 = window / (n_t1 - 1) as f64;
    let du = quad.dt_quad / (2.0 * window.sqrt());
    let u_min = quad.tau_min.sqrt();

    let mut outer = Complex64::new(0.0, 0.0);
    for it in 0..n_t1 {
        let t1 = t_min + it as f64 * dt1;
        let tau_max = t_max - t1;
        if tau_max <= quad.tau_min {
            continue;
        }
        let ef1 = E_CHARGE * waveform.efield(t1);
        if ef1 == 0.0 {
            continue;
        }
        let ea1 = E_CHARGE * waveform.vector_potential(t1);
        let cum_ea1 = interp(&cum_ea, t1);
        let cum_a21 = interp(&cum_a2, t1);

        let u_max = tau_max.sqrt();
        let n_u = ((u_max - u_min) / du).ceil() as usize + 1;
        let duu = (u_max - u_min) / (n_u - 1).max(1) as f64;
        let mut inner = Complex64::new(0.0, 0.0);
        for iu in 0..n_u {
            let u = u_min + iu as f64 * duu;
            let tau = u * u;
            let t2 = t1 + tau;
            let p = (interp(&cum_ea, t2) - cum_ea1 + d) / tau;
            let w = p - ea1;
            // xi via the closed-form dipole bracket, one exponential
            let i = Complex64::i();
            let qm = w - i * alpha;
            let qp = w + i * alpha;
            let e_iwd = (-i * w * d).exp();
            let gm = (-1.0 + (1.0 + i * qm * d) * e_iwd / exp_ad) / (qm * qm);
            let gp = (-1.0 + (1.0 + i * qp * d) * e_iwd * exp_ad) / (qp * qp);
            let xi = ef1 * (state.b1 * gm + state.b2 * gp);
            let ea2 = E_CHARGE * waveform.vector_potential(t2);
            let eta = (p - ea2 + k_out) * eta_phase;
            let s = e * t2 + 0.5 * p * p * tau - 0.5 * (interp(&cum_a2, t2) - cum_a21)
                + e0_abs * t1;
            let taper = if t2 > t_max - taper_width {
                let v = ((t_max - t2) / taper_width * std::f64::consts::FRAC_PI_2).sin();
                v * v
            } else {
                1.0
            };
            let weight = if iu == 0 || iu == n_u - 1 { 0.5 } else { 1.0 };
            inner += eta * xi * (i * s).exp() * (taper * weight);
        }
        let w1 = if it == 0 || it == n_t1 - 1 { 0.5 } else { 1.0 };
        outer += inner * (duu * w1);
    }
    Ok(front * outer * dt1)
}

/// SFA spectrum over an energy grid, parallel per energy. The spectral
/// density uses the same 1 / (2 pi k) sample density-of-states weight as the
/// TDSE projection so the shapes are directly comparable.
pub fn sfa_spectrum(
    energies: &[f64],
    state: &StaticEigenstate,
    junction: &JunctionConfig,
    waveform: &Waveform,
    quad: &SfaConfig,
) -> Result<Spectrum, CoreError> {
    let floor = junction.sample_floor();
    let values: Result<Vec<f64>, CoreError> = energies
        .par_iter()
        .map(|&e| {
            if e <= floor {
                return Err(CoreError::Domain(format!(
                    "spectrum energy {e} below the sample band floor"
                )));
            }
            let m = sfa_amplitude(e, state, junction, waveform, quad)?;
            let k = (2.0 * (e - floor)).sqrt();
            Ok(m.norm_sqr() / (2.0 * std::f64::consts::PI * k))
        })
        .collect();
    Spectrum::new(energies.to_vec(), values?, "sfa")
}
