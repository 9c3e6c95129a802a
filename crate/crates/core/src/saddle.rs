//! Semiclassical layer: complex saddle points of the SFA action, travel-time
//! asymptotics, the cutoff law, and three-leg complex-contour trajectories.
//!
//! The three saddle equations in (t1, t2, p_tilde) are
//!
//!   (p - eA(t1))^2 / 2 = -|E0|,
//!   Int_{t1}^{t2} (p - eA(tau)) dtau = d,
//!   (p - eA(t2))^2 / 2 = E,
//!
//! solved by a damped Newton iteration with the analytic Jacobian. Seeds are
//! generated per half-cycle crest of the field, with the imaginary emission
//! time taken from the Keldysh time and the travel time from the short- and
//! long-trajectory asymptotics.

use crate::config::JunctionConfig;
use crate::error::CoreError;
use crate::math;
use crate::pulse::Waveform;
use crate::sfa::{a2_integral, a_integral};
use crate::units::E_CHARGE;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Classification of a saddle by the magnitude of its amplitude factor
/// |e^{iS}|: physical tunneling solutions decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    Decaying,
    Growing,
}

/// One converged complex saddle (t1s, t2s, p_s).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaddleSolution {
    pub t1s: Complex64,
    pub t2s: Complex64,
    pub p_s: Complex64,
    /// Residuals of the three saddle equations at the solution.
    pub residuals: [Complex64; 3],
    /// Half-cycle index of the seeding field crest.
    pub branch: i32,
    pub damping: Damping,
    /// Action S(t2s, t1s) at the saddle.
    pub action: Complex64,
}

impl SaddleSolution {
    /// Complex travel time tau = t2s - t1s.
    pub fn travel_time(&self) -> Complex64 {
        self.t2s - self.t1s
    }
}

/// The two closed-form travel-time approximations: the Keldysh constant
/// imaginary time (low E) and the Taylor short-transit form (high E).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TravelTimeAsymptotics {
    /// Low-energy form: purely imaginary, Im tau = -sqrt(2|E0|)/(|e|(F0+F)).
    pub low_e: Complex64,
    /// High-energy form: tau = 2 d / (sqrt(2E) + i sqrt(2|E0|)).
    pub high_e: Complex64,
}

pub fn travel_time_asymptotics(
    e: f64,
    e0: f64,
    junction: &JunctionConfig,
    waveform: &Waveform,
) -> Result<TravelTimeAsymptotics, CoreError> {
    let f_tot = peak_total_field(waveform);
    if f_tot <= 0.0 {
        return Err(CoreError::Domain("travel time undefined for zero field".into()));
    }
    if e <= 0.0 {
        return Err(CoreError::Domain("final energy must be positive".into()));
    }
    let alpha = (2.0 * e0.abs()).sqrt();
    let low_e = Complex64::new(0.0, -alpha / (E_CHARGE.abs() * f_tot));
    let high_e = 2.0 * junction.d / Complex64::new((2.0 * e).sqrt(), alpha);
    Ok(TravelTimeAsymptotics { low_e, high_e })
}

/// Classical cutoff law E_cutoff = |e| (F0 + F) d - |E0|.
pub fn cutoff_energy(
    junction: &JunctionConfig,
    waveform: &Waveform,
    e0: f64,
) -> Result<f64, CoreError> {
    let e_c = E_CHARGE.abs() * peak_total_field(waveform) * junction.d - e0.abs();
    if e_c <= 0.0 {
        return Err(CoreError::Detection(
            "no classical plateau: cutoff at or below zero".into(),
        ));
    }
    Ok(e_c)
}

fn peak_total_field(waveform: &Waveform) -> f64 {
    waveform.peak_field.abs() + waveform.static_field.abs()
}

/// Residuals of the three saddle equations at (t1, t2, p).
pub fn residuals(
    waveform: &Waveform,
    junction: &JunctionConfig,
    e: f64,
    e0_abs: f64,
    t1: Complex64,
    t2: Complex64,
    p: Complex64,
) -> [Complex64; 3] {
    let v1 = p - E_CHARGE * waveform.vector_potential_c(t1);
    let v2 = p - E_CHARGE * waveform.vector_potential_c(t2);
    [
        0.5 * v1 * v1 + e0_abs,
        p * (t2 - t1) - a_integral(waveform, t1, t2) - junction.d,
        0.5 * v2 * v2 - e,
    ]
}

/// Solve the saddle equations at final energy `e` for an initial state at
/// energy `e0` (bound, negative). Returns the deduplicated decaying family,
/// sorted by Re t1s.
pub fn solve_saddles(
    e: f64,
    e0: f64,
    junction: &JunctionConfig,
    waveform: &Waveform,
) -> Result<Vec<SaddleSolution>, CoreError> {
    if e <= 0.0 {
        return Err(CoreError::Domain("final energy must be positive".into()));
    }
    let f_tot = peak_total_field(waveform);
    if f_tot <= 0.0 {
        return Err(CoreError::Domain("saddles undefined for zero field".into()));
    }
    let e0_abs = e0.abs();
    let alpha = (2.0 * e0_abs).sqrt();
    let t_keldysh = alpha / f_tot;
    let asym = travel_time_asymptotics(e, e0, junction, waveform)?;
    let e_c = E_CHARGE.abs() * f_tot * junction.d - e0_abs;

    // travel-time seeds: classical ramp-up for the plateau, the Taylor form
    // beyond it, and a late (long-trajectory) variant
    let tau_short = if e_c > 0.0 && e < e_c {
        Complex64::new((2.0 * e).sqrt() / f_tot, -t_keldysh)
    } else {
        asym.high_e + Complex64::new(0.0, -0.3 * t_keldysh)
    };
    let tau_long = tau_short + 0.5 * 2.0 * std::f64::consts::PI / waveform.omega;

    let mut found: Vec<SaddleSolution> = Vec::new();
    for (branch, t_c) in field_crests(waveform).into_iter().enumerate() {
        for tau_seed in [tau_short, tau_long] {
            let t1 = Complex64::new(t_c, t_keldysh);
            let t2 = t1 + tau_seed;
            let p = E_CHARGE * waveform.vector_potential_c(t2) + (2.0 * e).sqrt();
            if let Some(sol) =
                newton(waveform, junction, e, e0_abs, t1, t2, p, branch as i32)
            {
                if sol.damping == Damping::Decaying
                    && sol.t2s.re > sol.t1s.re
                    && !found.iter().any(|s| {
                        (s.t1s - sol.t1s).norm() < 1e-5 && (s.t2s - sol.t2s).norm() < 1e-5
                    })
                {
                    found.push(sol);
                }
            }
        }
    }
    found.sort_by(|a, b| {
        a.t1s
            .re
            .total_cmp(&b.t1s.re)
            .then(max_residual(a).total_cmp(&max_residual(b)))
    });
    if found.is_empty() {
        return Err(CoreError::Detection(format!(
            "no convergent saddle at E = {e} au from any crest seed"
        )));
    }
    Ok(found)
}

fn max_residual(s: &SaddleSolution) -> f64 {
    s.residuals.iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Crest times of the field within the waveform window: local minima of
/// E(t) (the field sign that pushes the electron toward the sample).
fn field_crests(waveform: &Waveform) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / waveform.omega;
    let h = period / 64.0;
    let n = ((waveform.t_max - waveform.t_min) / h) as usize;
    let mut crests = Vec::new();
    let mut prev2 = waveform.efield(waveform.t_min);
    let mut prev1 = waveform.efield(waveform.t_min + h);
    for i in 2..=n {
        let t = waveform.t_min + i as f64 * h;
        let v = waveform.efield(t);
        if prev1 < prev2 && prev1 < v && prev1 < -0.01 * peak_total_field(waveform) {
            // parabolic refinement of the minimum
            let denom = prev2 - 2.0 * prev1 + v;
            let shift = if denom.abs() > 0.0 { 0.5 * (prev2 - v) / denom } else { 0.0 };
            crests.push(t - h + shift * h);
        }
        prev2 = prev1;
        prev1 = v;
    }
    crests
}

#[allow(clippy::too_many_arguments)]
fn newton(
    waveform: &Waveform,
    junction: &JunctionConfig,
    e: f64,
    e0_abs: f64,
    mut t1: Complex64,
    mut t2: Complex64,
    mut p: Complex64,
    branch: i32,
) -> Option<SaddleSolution> {
    let mut f = residuals(waveform, junction, e, e0_abs, t1, t2, p);
    let mut fnorm = f.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for _ in 0..200 {
        if fnorm < 1e-12 {
            break;
        }
        let v1 = p - E_CHARGE * waveform.vector_potential_c(t1);
        let v2 = p - E_CHARGE * waveform.vector_potential_c(t2);
        let ef1 = waveform.efield_c(t1);
        let ef2 = waveform.efield_c(t2);
        let zero = Complex64::new(0.0, 0.0);
        // rows: d f_i / d (t1, t2, p); d(-eA)/dt = eE
        let mut jac = vec![
            vec![v1 * E_CHARGE * ef1, zero, v1],
            vec![-v1, v2, t2 - t1],
            vec![zero, v2 * E_CHARGE * ef2, v2],
        ];
        let mut rhs = [-f[0], -f[1], -f[2]].to_vec();
        if math::solve_dense(&mut jac, &mut rhs).is_err() {
            return None;
        }
        // damped step: halve until the residual decreases
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let t1n = t1 + lambda * rhs[0];
            let t2n = t2 + lambda * rhs[1];
            let pn = p + lambda * rhs[2];
            let fn_ = residuals(waveform, junction, e, e0_abs, t1n, t2n, pn);
            let fm = fn_.iter().map(|r| r.norm()).fold(0.0, f64::max);
            if fm < fnorm || fm < 1e-12 {
                t1 = t1n;
                t2 = t2n;
                p = pn;
                f = fn_;
                fnorm = fm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if fnorm >= 1e-10 {
        return None;
    }
    let action = e * t2 + 0.5 * p * p * (t2 - t1) - 0.5 * a2_integral(waveform, t1, t2)
        + e0_abs * t1;
    let damping = if action.im >= -1e-9 { Damping::Decaying } else { Damping::Growing };
    Some(SaddleSolution { t1s: t1, t2s: t2, p_s: p, residuals: f, branch, damping, action })
}

/// Leg labels of the three-piece integration contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Leg {
    Tunneling,
    Classical,
    Attenuation,
}

/// The complex displacement D(t) sampled along the contour
/// t1s -> Re t1s -> Re t2s -> t2s.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub legs: Vec<Leg>,
}

/// Sample D(t) = Int_{t1s}^{t} (p - eA) dtau along the three straight legs,
/// `n_samples` points per leg.
pub fn trajectory(
    s: &SaddleSolution,
    waveform: &Waveform,
    n_samples: usize,
) -> Result<Trajectory, CoreError> {
    if n_samples < 2 {
        return Err(CoreError::Input("trajectory needs at least 2 samples per leg".into()));
    }
    let corners = [
        s.t1s,
        Complex64::from(s.t1s.re),
        Complex64::from(s.t2s.re),
        s.t2s,
    ];
    let labels = [Leg::Tunneling, Leg::Classical, Leg::Attenuation];
    let mut times = vec![s.t1s];
    let mut x = vec![Complex64::new(0.0, 0.0)];
    let mut legs = vec![Leg::Tunneling];
    let mut d_acc = Complex64::new(0.0, 0.0);
    let mut z_prev = s.t1s;
    for (leg, (&a, &b)) in corners.iter().zip(&corners[1..]).enumerate() {
        for k in 1..=n_samples - 1 {
            let z = a + (b - a) * k as f64 / (n_samples - 1) as f64;
            d_acc += s.p_s * (z - z_prev) - a_integral(waveform, z_prev, z);
            times.push(z);
            x.push(d_acc);
            legs.push(labels[leg]);
            z_prev = z;
        }
    }
    Ok(Trajectory { times, x, legs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PulseConfig;
    use crate::units;
    use approx::assert_relative_eq;

    fn cw(field_vnm: f64, static_vnm: f64) -> Waveform {
        let period = 2.0 * std::f64::consts::PI
            / PulseConfig::omega_from_wavelength_nm(830.0);
        let p = PulseConfig::new(
            units::vnm_to_au(field_vnm),
            units::vnm_to_au(static_vnm),
            PulseConfig::omega_from_wavelength_nm(830.0),
            period / 4.0,
            0.0,
            Some((-period / 2.0, period / 2.0)),
        )
        .unwrap();
        Waveform::cw(&p)
    }

    fn gold() -> JunctionConfig {
        JunctionConfig::gold(1.0)
    }

    const E0: f64 = -5.0 / units::HARTREE_EV;

    #[test]
    fn cutoff_reference_values() {
        let j = gold();
        let e_c = cutoff_energy(&j, &cw(35.0, 0.0), E0).unwrap();
        assert_relative_eq!(units::au_to_ev(e_c), 30.0, max_relative = 2e-3);
        let e_c = cutoff_energy(&j, &cw(35.0, 1.0), E0).unwrap();
        assert_relative_eq!(units::au_to_ev(e_c), 31.0, max_relative = 2e-3);
        assert!(cutoff_energy(&j, &cw(5.0, 0.0), E0).is_err());
    }

    #[test]
    fn travel_time_reference_values() {
        let j = gold();
        let a = travel_time_asymptotics(units::ev_to_au(5.0), E0, &j, &cw(35.0, 0.0)).unwrap();
        // tau = d (1 - i) / sqrt(2 E) at E = |E0|
        assert_relative_eq!(units::au_to_as(a.high_e.re), 754.0, max_relative = 0.01);
        assert_relative_eq!(units::au_to_as(a.high_e.im), -754.0, max_relative = 0.01);
        assert_relative_eq!(units::au_to_as(a.low_e.im), -215.0, max_relative = 0.01);
        assert_eq!(a.low_e.re, 0.0);
        // high-E limit: tau -> 0 like 1/sqrt(E)
        let b = travel_time_asymptotics(units::ev_to_au(1e6), E0, &j, &cw(35.0, 0.0)).unwrap();
        assert!(b.high_e.norm() < 1e-2 * a.high_e.norm());
    }

    #[test]
    fn asymptotic_intersection_is_cutoff_law() {
        // Im of the two approximations cross exactly at the cutoff energy
        let j = gold();
        let wf = cw(35.0, 0.0);
        let e_c = cutoff_energy(&j, &wf, E0).unwrap();
        let a = travel_time_asymptotics(e_c, E0, &j, &wf).unwrap();
        assert!(
            (a.low_e.im - a.high_e.im).abs() < 1e-9,
            "Im mismatch {} vs {}",
            a.low_e.im,
            a.high_e.im
        );
    }

    #[test]
    fn low_energy_saddle_matches_keldysh_time() {
        let j = gold();
        let wf = cw(35.0, 0.0);
        let sols = solve_saddles(units::ev_to_au(2.0), E0, &j, &wf).unwrap();
        let asym = travel_time_asymptotics(units::ev_to_au(2.0), E0, &j, &wf).unwrap();
        // the direct (shortest) saddle carries the Keldysh imaginary time
        let best = sols
            .iter()
            .min_by(|a, b| a.travel_time().re.total_cmp(&b.travel_time().re))
            .unwrap();
        let rel = (best.travel_time().im - asym.low_e.im).abs() / asym.low_e.im.abs();
        assert!(rel < 0.10, "Im tau {} vs Keldysh {}", best.travel_time().im, asym.low_e.im);
        for s in &sols {
            assert!(max_residual(s) < 1e-10);
            assert!(s.t2s.re > s.t1s.re);
            assert_eq!(s.damping, Damping::Decaying);
        }
    }

    #[test]
    fn high_energy_saddle_matches_taylor_form() {
        let j = gold();
        let wf = cw(35.0, 0.0);
        let e = units::ev_to_au(45.0); // 1.5x the 30 eV cutoff
        let sols = solve_saddles(e, E0, &j, &wf).unwrap();
        let asym = travel_time_asymptotics(e, E0, &j, &wf).unwrap();
        let best = sols
            .iter()
            .min_by(|a, b| a.travel_time().re.total_cmp(&b.travel_time().re))
            .unwrap();
        let rel = (best.travel_time().im - asym.high_e.im).abs() / asym.high_e.im.abs();
        assert!(rel < 0.10, "Im tau {} vs Taylor {}", best.travel_time().im, asym.high_e.im);
    }

    #[test]
    fn saddle_residual_is_root_of_equations() {
        let j = gold();
        let wf = cw(35.0, 0.0);
        let sols = solve_saddles(units::ev_to_au(15.0), E0, &j, &wf).unwrap();
        for s in &sols {
            let r = residuals(&wf, &j, units::ev_to_au(15.0), E0.abs(), s.t1s, s.t2s, s.p_s);
            assert!(r.iter().all(|v| v.norm() < 1e-10));
        }
    }

    #[test]
    fn trajectory_contour() {
        let j = gold();
        let wf = cw(35.0, 0.0);
        let e = units::ev_to_au(15.0);
        let sols = solve_saddles(e, E0, &j, &wf).unwrap();
        let s = sols
            .iter()
            .min_by(|a, b| a.travel_time().re.total_cmp(&b.travel_time().re))
            .unwrap();
        let tr = trajectory(s, &wf, 200).unwrap();
        // endpoints: D(t1s) = 0, D(t2s) = d
        assert!(tr.x[0].norm() < 1e-14);
        let end = *tr.x.last().unwrap();
        assert!((end - j.d).norm() < 1e-8 * j.d, "D(t2s) = {end}");
        // tunnel exit inside the gap; classical leg runs toward d with at most
        // a tiny backstep where Re(p - eA) crosses zero at the exit
        let exit_idx = tr.legs.iter().position(|l| *l == Leg::Classical).unwrap() - 1;
        assert!(tr.x[exit_idx].re > 0.0);
        let classical: Vec<f64> = tr
            .x
            .iter()
            .zip(&tr.legs)
            .filter(|(_, l)| **l == Leg::Classical)
            .map(|(x, _)| x.re)
            .collect();
        assert!(classical.windows(2).all(|w| w[1] >= w[0] - 1e-4 * j.d));
        assert!(classical.last().unwrap() - classical.first().unwrap() > 0.5 * j.d);
        // contour independence: the three-leg path agrees with the straight
        // chord from t1s to t2s
        let direct = s.p_s * (s.t2s - s.t1s) - a_integral(&wf, s.t1s, s.t2s);
        assert!((end - direct).norm() < 1e-8 * j.d);
    }

    #[test]
    fn gaussian_pulse_saddles_converge() {
        let p = PulseConfig::new(
            units::vnm_to_au(35.0),
            0.0,
            PulseConfig::omega_from_wavelength_nm(830.0),
            units::fs_to_au(3.0),
            0.0,
            None,
        )
        .unwrap();
        let wf = Waveform::gaussian(&p);
        let sols = solve_saddles(units::ev_to_au(10.0), E0, &gold(), &wf).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(max_residual(s) < 1e-10);
        }
        // sorted by emission time
        assert!(sols.windows(2).all(|w| w[0].t1s.re <= w[1].t1s.re));
    }

    #[test]
    fn rejects_invalid_inputs() {
        let j = gold();
        assert!(solve_saddles(-1.0, E0, &j, &cw(35.0, 0.0)).is_err());
        assert!(solve_saddles(0.1, E0, &j, &cw(0.0, 0.0)).is_err());
        let sols = solve_saddles(units::ev_to_au(15.0), E0, &j, &cw(35.0, 0.0)).unwrap();
        assert!(trajectory(&sols[0], &cw(35.0, 0.0), 1).is_err());
    }
}
