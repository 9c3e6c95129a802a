//! Crank-Nicolson propagation of the junction TDSE with the observables the
//! flux and analysis layers need: boundary traces, local currents, coarse
//! space-time current maps, tunneling spectra and burst durations.
//!
//! One step solves (1 + i dt H(t+dt/2)/2) psi' = (1 - i dt H(t+dt/2)/2) psi
//! with a complex tridiagonal (Thomas) solve; hard walls at the box ends.

use crate::config::JunctionConfig;
use crate::error::CoreError;
use crate::grid::{SpatialGrid, WaveField};
use crate::junction::{PotentialProfile, StaticEigenstate};
use crate::math;
use crate::pulse::Waveform;
use crate::spectrum::Spectrum;
use num_complex::Complex64;

/// Which Hamiltonian the propagator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialVariant {
    /// V0 + V_I: the full junction TDSE.
    Full,
    /// V_Is: the barrier-only potential with the wells flattened away.
    BarrierOnly,
}

/// Inhomogeneous term -(i/hbar) chi_gap V_I(t) Psi0(t) accumulated during
/// propagation; `psi0_gap` holds the initial-state samples on the gap nodes.
#[derive(Debug, Clone)]
pub struct GapSource {
    pub psi0_gap: Vec<Complex64>,
    pub e0: f64,
    /// Scale factor on the driving field inside the source (linearity tests).
    pub field_scale: f64,
}

/// Per-step boundary record at the junction planes x = 0 and x = d.
#[derive(Debug, Clone, Default)]
pub struct BoundaryTrace {
    pub times: Vec<f64>,
    pub psi_tip: Vec<Complex64>,
    pub dpsi_tip: Vec<Complex64>,
    pub psi_sample: Vec<Complex64>,
    pub dpsi_sample: Vec<Complex64>,
    /// Exact half-step fluxes through the faces just outside the gap nodes;
    /// their rectangle-rule time sums balance the gap population exactly.
    pub flux_tip_face: Vec<f64>,
    pub flux_sample_face: Vec<f64>,
    /// Midpoint (Crank-Nicolson averaged) amplitudes on the four nodes
    /// flanking the cut faces, one entry per step. These make the discrete
    /// Bardeen bond contraction exact.
    pub mid_tip_in: Vec<Complex64>,
    pub mid_tip: Vec<Complex64>,
    pub mid_sample: Vec<Complex64>,
    pub mid_sample_out: Vec<Complex64>,
    /// Central-difference currents at the planes, integer time stamps.
    pub j_tip: Vec<f64>,
    pub j_sample: Vec<f64>,
    pub dt: f64,
    pub dx: f64,
}

impl BoundaryTrace {
    /// Flip a backward-recorded trace into ascending-time order.
    pub fn reversed(mut self) -> Self {
        self.times.reverse();
        self.psi_tip.reverse();
        self.dpsi_tip.reverse();
        self.psi_sample.reverse();
        self.dpsi_sample.reverse();
        self.flux_tip_face.reverse();
        self.flux_sample_face.reverse();
        self.mid_tip_in.reverse();
        self.mid_tip.reverse();
        self.mid_sample.reverse();
        self.mid_sample_out.reverse();
        self.j_tip.reverse();
        self.j_sample.reverse();
        self
    }
}

/// Coarsened j(x, t) samples plus full-resolution boundary currents.
#[derive(Debug, Clone)]
pub struct CurrentMap {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    /// Row-major [time][x].
    pub values: Vec<f64>,
    pub boundary: BoundaryTrace,
}

/// Options controlling what a propagation records.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropagateOptions {
    pub record_boundary: bool,
    /// (time stride, space stride) for the coarse current map.
    pub map_strides: Option<(usize, usize)>,
}

/// Output of one propagation.
pub struct RunOutput {
    pub state: WaveField,
    pub boundary: Option<BoundaryTrace>,
    pub map: Option<CurrentMap>,
}

pub struct Propagator {
    pub grid: SpatialGrid,
    pub dt: f64,
    waveform: Waveform,
    v_static: Vec<f64>,
    shape: Vec<f64>,
    k_off: f64,
}

impl Propagator {
    pub fn new(
        grid: SpatialGrid,
        profile: &PotentialProfile,
        waveform: Waveform,
        variant: PotentialVariant,
        dt: f64,
    ) -> Self {
        // the grid is cell-centered around the junction, so no node sits on a
        // potential step and pointwise sampling is second-order accurate
        let v_static: Vec<f64> = grid
            .positions()
            .map(|x| match variant {
                PotentialVariant::Full => profile.v0(x),
                PotentialVariant::BarrierOnly => profile.v_interaction_static(x, 0.0),
            })
            .collect();
        let shape: Vec<f64> = grid
            .positions()
            .map(|x| match variant {
                PotentialVariant::Full => profile.v_interaction(x, 1.0),
                PotentialVariant::BarrierOnly => {
                    profile.v_interaction_static(x, 1.0) - profile.v_interaction_static(x, 0.0)
                }
            })
            .collect();
        let k_off = -0.5 / (grid.dx * grid.dx);
        Propagator { grid, dt, waveform, v_static, shape, k_off }
    }

    pub fn waveform(&self) -> &Waveform {
        &self.waveform
    }

    /// Propagate from `initial.time` to `t_end` (backward when t_end is
    /// earlier). The step count is rounded to cover the interval exactly.
    pub fn propagate(
        &self,
        initial: &WaveField,
        t_end: f64,
        source: Option<&GapSource>,
        opts: &PropagateOptions,
    ) -> Result<RunOutput, CoreError> {
        let t0 = initial.time;
        let span = t_end - t0;
        let n_steps = (span.abs() / self.dt).round() as usize;
        let dts = if span >= 0.0 { self.dt } else { -self.dt };

        let n = self.grid.n_points;
        let dx = self.grid.dx;
        let jt = self.grid.idx_tip;
        let js = self.grid.idx_sample;
        let kin_diag = -2.0 * self.k_off;
        let c_off = Complex64::new(0.0, 0.5 * dts * self.k_off);

        let mut psi = initial.values.clone();
        let mut rhs = vec![Complex64::default(); n];
        let mut diag = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); n];

        let mut boundary = if opts.record_boundary || opts.map_strides.is_some() {
            let mut b = BoundaryTrace { dt: dts, dx, ..Default::default() };
            record_integer_time(&mut b, &psi, t0, jt, js, dx);
            Some(b)
        } else {
            None
        };
        let mut map = opts.map_strides.map(|(_, xs_stride)| {
            let xs: Vec<f64> = (0..n).step_by(xs_stride.max(1)).map(|i| self.grid.x(i)).collect();
            (Vec::<f64>::new(), xs, Vec::<f64>::new())
        });
        if let Some((times, xs, values)) = map.as_mut() {
            times.push(t0);
            push_current_row(values, &psi, xs.len(), opts.map_strides.unwrap().1, dx);
        }

        // CN phase increment of the source oscillation, exact for a discrete
        // eigenstate so that the flux identity holds at machine level.
        let src_theta = source.map(|s| 2.0 * (s.e0 * dts / 2.0).atan());

        for step in 0..n_steps {
            let t = t0 + step as f64 * dts;
            let tm = t + 0.5 * dts;
            let ef = self.waveform.efield(tm);

            for i in 0..n {
                let h = 0.5 * dts * (kin_diag + self.v_static[i] + self.shape[i] * ef);
                diag[i] = Complex64::new(1.0, h);
                let mut r = Complex64::new(1.0, -h) * psi[i];
                if i > 0 {
                    r -= c_off * psi[i - 1];
                }
                if i + 1 < n {
                    r -= c_off * psi[i + 1];
                }
                rhs[i] = r;
            }
            if let (Some(src), Some(theta)) = (source, src_theta) {
                let phase = Complex64::from_polar(1.0, -theta * (step as f64 + 0.5))
                    * Complex64::from_polar(1.0, -src.e0 * t0);
                let ef_src = ef * src.field_scale;
                for (k, i) in (jt..=js).enumerate() {
                    // source = -i chi_gap V_I(t) Psi0(t)
                    let v_i = self.shape[i] * ef_src;
                    rhs[i] += Complex64::new(0.0, -dts) * v_i * src.psi0_gap[k] * phase;
                }
            }

            // save the pre-step values needed for half-step fluxes
            let old = [
                psi[jt.saturating_sub(1)],
                psi[jt],
                psi[js],
                psi[(js + 1).min(n - 1)],
            ];

            psi.copy_from_slice(&rhs);
            math::thomas_const_offdiag(c_off, &diag, &mut psi, &mut scratch);

            let t_next = t0 + (step + 1) as f64 * dts;
            if let Some(b) = boundary.as_mut() {
                let bar_tm1 = 0.5 * (old[0] + psi[jt - 1]);
                let bar_t = 0.5 * (old[1] + psi[jt]);
                let bar_s = 0.5 * (old[2] + psi[js]);
                let bar_sp1 = 0.5 * (old[3] + psi[js + 1]);
                b.flux_tip_face.push((bar_tm1.conj() * bar_t).im / dx);
                b.flux_sample_face.push((bar_s.conj() * bar_sp1).im / dx);
                b.mid_tip_in.push(bar_tm1);
                b.mid_tip.push(bar_t);
                b.mid_sample.push(bar_s);
                b.mid_sample_out.push(bar_sp1);
                record_integer_time(b, &psi, t_next, jt, js, dx);
            }
            if let Some((times, xs, values)) = map.as_mut() {
                let (t_stride, x_stride) = opts.map_strides.unwrap();
                if (step + 1) % t_stride.max(1) == 0 || step + 1 == n_steps {
                    times.push(t_next);
                    push_current_row(values, &psi, xs.len(), x_stride, dx);
                }
            }

            if step % 128 == 0 && !psi[n / 2].is_finite() {
                return Err(CoreError::Numeric(format!(
                    "non-finite amplitude at t = {t_next}"
                )));
            }
        }

        let state = WaveField::new(self.grid, psi, t0 + n_steps as f64 * dts);
        if !state.values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::Numeric("non-finite amplitudes in final state".into()));
        }
        let map = map.map(|(times, xs, values)| CurrentMap {
            times,
            xs,
            values,
            boundary: boundary.clone().unwrap_or_default(),
        });
        Ok(RunOutput { state, boundary, map })
    }
}

fn record_integer_time(
    b: &mut BoundaryTrace,
    psi: &[Complex64],
    t: f64,
    jt: usize,
    js: usize,
    dx: f64,
) {
    // x = 0 and x = d are bond midpoints, so the plane values and
    // derivatives are clean centered averages/differences of the two
    // straddling nodes
    b.times.push(t);
    let p_tip = 0.5 * (psi[jt - 1] + psi[jt]);
    let p_sam = 0.5 * (psi[js] + psi[js + 1]);
    let dtip = (psi[jt] - psi[jt - 1]) / dx;
    let dsam = (psi[js + 1] - psi[js]) / dx;
    b.psi_tip.push(p_tip);
    b.psi_sample.push(p_sam);
    b.dpsi_tip.push(dtip);
    b.dpsi_sample.push(dsam);
    b.j_tip.push((p_tip.conj() * dtip).im);
    b.j_sample.push((p_sam.conj() * dsam).im);
}

fn push_current_row(values: &mut Vec<f64>, psi: &[Complex64], n_cols: usize, x_stride: usize, dx: f64) {
    let n = psi.len();
    let mut col = 0;
    let mut i = 0;
    while col < n_cols {
        let j = if i == 0 {
            0.0
        } else if i + 1 >= n {
            0.0
        } else {
            (psi[i].conj() * ((psi[i + 1] - psi[i - 1]) / (2.0 * dx))).im
        };
        values.push(j);
        i += x_stride.max(1);
        col += 1;
    }
}

/// Probability current j = Im(psi* d_x psi) at an interior grid node.
pub fn local_current(state: &WaveField, x: f64) -> Result<f64, CoreError> {
    let g = &state.grid;
    let i = ((x - g.x_min) / g.dx).round() as isize;
    if i < 1 || i as usize >= g.n_points - 1 {
        return Err(CoreError::Domain("current needs an interior grid point".into()));
    }
    let i = i as usize;
    let d = (state.values[i + 1] - state.values[i - 1]) / (2.0 * g.dx);
    Ok((state.values[i].conj() * d).im)
}

/// Exact Crank-Nicolson phase accumulated by a discrete eigenstate of
/// energy `e` over `steps` steps of size `dt`.
pub fn cn_phase(e: f64, dt: f64, steps: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * (e * dt / 2.0).atan() * steps as f64)
}

/// The field-free initial state as an exact eigenvector of the discretized,
/// boxed Hamiltonian.
///
/// The analytic scattering state is not an eigenstate of the finite box: the
/// standing wave in the tip must vanish at the left wall. The eigenvalue is
/// therefore refined within one box level spacing (a few meV) of the
/// requested energy until the wall condition holds, which keeps the
/// field-free overlap |<Psi(T)|Psi(0)>| at 1 to better than 1e-6.
pub struct DiscreteInitialState {
    pub field: WaveField,
    pub energy: f64,
    /// Analytic continuum solution at the refined energy (SFA prefactors).
    pub analytic: StaticEigenstate,
}

pub fn discrete_initial_state(
    grid: &SpatialGrid,
    junction: &JunctionConfig,
    e0_target: f64,
) -> Result<DiscreteInitialState, CoreError> {
    let profile = PotentialProfile::new(*junction);
    if !profile.is_rectangular() {
        return Err(CoreError::Domain(
            "discrete initial state requires the rectangular junction".into(),
        ));
    }
    let v_tip = junction.tip_floor();
    let v_sam = junction.sample_floor();
    if e0_target <= v_tip || e0_target >= 0.0 || e0_target <= v_sam {
        return Err(CoreError::Domain("initial energy outside the tip band".into()));
    }
    let dx = grid.dx;
    let l_tip = (grid.idx_tip as f64 + 0.5) * dx;
    let k1_target = (2.0 * (e0_target - v_tip)).sqrt();
    // box level spacing around e0
    let de = std::f64::consts::PI * k1_target / l_tip;

    // Wall condition: psi(x_min) = 0, i.e. R e^{-2 i k1 x_min} = -1. The
    // residual h = -Im(R e^{-2 i theta}) changes sign at every node and every
    // antinode of the standing wave at the wall; Re(R e^{-2 i theta}) < 0
    // separates the nodes (true eigenvalues) from the antinodes.
    let wall_fn = |e: f64| discrete_matching(grid, junction, e);
    let mut best: Option<(f64, f64)> = None; // (E_root, |E_root - target|)
    let n_scan = 121;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n_scan {
        let e = e0_target - 1.5 * de + 3.0 * de * i as f64 / (n_scan - 1) as f64;
        if e >= 0.0 || e <= v_tip {
            continue;
        }
        let (z, _, _) = wall_fn(e);
        let g = -z.im;
        if let Some((ep, gp)) = prev {
            if gp == 0.0 || gp.signum() != g.signum() {
                let (mut lo, mut hi, mut glo) = (ep, e, gp);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let (zm, _, _) = wall_fn(mid);
                    let gm = -zm.im;
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if gm.signum() == glo.signum() {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                let (zr, _, _) = wall_fn(root);
                let dist = (root - e0_target).abs();
                if zr.re < 0.0 && best.map_or(true, |(_, bd)| dist < bd) {
                    best = Some((root, dist));
                }
            }
        }
        prev = Some((e, g));
    }
    let (e_root, _) = best.ok_or_else(|| {
        CoreError::Numeric("no wall-compatible eigenvalue near the requested energy".into())
    })?;

    let (_, coef, kappa) = wall_fn(e_root);
    let [r, b1, b2, t] = coef;
    let [k1, mu, k3] = kappa;
    let jt = grid.idx_tip;
    let js = grid.idx_sample;
    let d = junction.d;
    let values: Vec<Complex64> = (0..grid.n_points)
        .map(|i| {
            let x = grid.x(i);
            if i < jt {
                let p = Complex64::from_polar(1.0, k1 * x);
                p + r * p.conj()
            } else if i <= js {
                b1 * (-mu * x).exp() + b2 * (mu * x).exp()
            } else {
                t * Complex64::from_polar(1.0, k3 * (x - d))
            }
        })
        .collect();
    let mut field = WaveField::new(*grid, values, 0.0);
    field.normalize();
    let analytic = crate::junction::solve_initial_state(junction, e_root)?;
    Ok(DiscreteInitialState { field, energy: e_root, analytic })
}

/// Solve the discrete matching at energy `e`; returns z = R e^{-2 i k1 x_wall}
/// (the wall phasor, -1 at an eigenvalue), the coefficients [R, B1, B2, T]
/// and the discrete wavenumbers [k1, mu, k3].
///
/// On the cell-centered grid each region's three-term recurrence holds at
/// every one of its nodes; the recurrences at the two nodes straddling an
/// interface are equivalent to both region forms agreeing on both nodes, so
/// the matching conditions are two-point cross-continuity at x = +-dx/2
/// around each boundary.
fn discrete_matching(
    grid: &SpatialGrid,
    junction: &JunctionConfig,
    e: f64,
) -> (Complex64, [Complex64; 4], [f64; 3]) {
    let dx = grid.dx;
    let v_tip = junction.tip_floor();
    let v_sam = junction.sample_floor();
    // discrete dispersion: cos(k dx) = 1 - (E - V) dx^2 (propagating),
    // cosh(mu dx) = 1 + (V - E) dx^2 (evanescent)
    let k1 = (1.0 - (e - v_tip) * dx * dx).acos() / dx;
    let k3 = (1.0 - (e - v_sam) * dx * dx).acos() / dx;
    let mu = (1.0 + (0.0 - e) * dx * dx).acosh() / dx;
    let d = (grid.idx_sample - grid.idx_tip + 1) as f64 * dx;

    let h = 0.5 * dx;
    let z1h = Complex64::from_polar(1.0, k1 * h);
    let z3h = Complex64::from_polar(1.0, k3 * h);
    let wh = (mu * h).exp();
    let wm = (-mu * d).exp();
    let wp = (mu * d).exp();
    let zero = Complex64::new(0.0, 0.0);

    // unknowns [R, B1, B2, T]; tip form e^{i k1 x} + R e^{-i k1 x}, gap form
    // B1 e^{-mu x} + B2 e^{mu x}, sample form T e^{i k3 (x - d)}; the forms
    // agree pairwise at x = -+dx/2 and x = d -+ dx/2
    let mut a = vec![
        vec![z1h, Complex64::from(-wh), Complex64::from(-1.0 / wh), zero],
        vec![z1h.conj(), Complex64::from(-1.0 / wh), Complex64::from(-wh), zero],
        vec![zero, Complex64::from(wm * wh), Complex64::from(wp / wh), -z3h.conj()],
        vec![zero, Complex64::from(wm / wh), Complex64::from(wp * wh), -z3h],
    ];
    let mut b = vec![-z1h.conj(), -z1h, zero, zero];
    if math::solve_dense(&mut a, &mut b).is_err() {
        return (Complex64::new(f64::NAN, f64::NAN), [zero; 4], [k1, mu, k3]);
    }
    let r = b[0];
    // the hard wall is the implicit zero one step outside the box
    let x_wall = grid.x_min - dx;
    let z = r * Complex64::from_polar(1.0, -2.0 * k1 * x_wall);
    (z, [b[0], b[1], b[2], b[3]], [k1, mu, k3])
}

/// Project the transmitted wave onto the analytic sample eigenstates.
///
/// `subtract_phase` is the phase the initial state accumulated over the run
/// ([`cn_phase`] for a discrete eigenstate); the sample-domain part of the
/// initial state times this phase is removed before projection, isolating
/// the laser-induced tunneling wave.
pub fn project_spectrum(
    final_state: &WaveField,
    initial: &WaveField,
    subtract_phase: Complex64,
    junction: &JunctionConfig,
    energies: &[f64],
) -> Result<Spectrum, CoreError> {
    let g = &final_state.grid;
    let dx = g.dx;
    let js = g.idx_sample;
    let floor = junction.sample_floor();
    let n = g.n_points;
    let tun: Vec<Complex64> = (js + 1..n)
        .map(|i| final_state.values[i] - initial.values[i] * subtract_phase)
        .collect();
    let mut values = Vec::with_capacity(energies.len());
    for &e in energies {
        if e <= floor {
            return Err(CoreError::Domain(format!(
                "spectrum energy {e} below the sample band floor"
            )));
        }
        let k = (2.0 * (e - floor)).sqrt();
        let mut m = Complex64::new(0.0, 0.0);
        // midpoint rule over the sample cells with psi_E = exp(i k (x - d));
        // the first sample node sits at x = d + dx/2
        let step_phase = Complex64::from_polar(1.0, -k * dx);
        let mut ph = Complex64::from_polar(1.0, -k * 0.5 * dx);
        for v in &tun {
            m += ph * v;
            ph *= step_phase;
        }
        m *= dx;
        values.push(m.norm_sqr() / (2.0 * std::f64::consts::PI * k));
    }
    Spectrum::new(energies.to_vec(), values, "tdse")
}

/// FWHM of the current burst |j(x, t)| from a full-resolution time series.
/// Requires a single dominant burst at least 10x above the noise floor.
pub fn burst_duration(times: &[f64], j: &[f64]) -> Result<f64, CoreError> {
    if times.len() != j.len() || times.len() < 8 {
        return Err(CoreError::Input("burst trace too short".into()));
    }
    let a: Vec<f64> = j.iter().map(|v| v.abs()).collect();
    let mut sorted = a.clone();
    sorted.sort_by(f64::total_cmp);
    let noise = sorted[sorted.len() / 2];
    let peak = sorted[sorted.len() - 1];
    if peak < 10.0 * noise.max(1e-300) {
        return Err(CoreError::Detection(
            "no burst above 10x the noise floor".into(),
        ));
    }
    let dt = times[1] - times[0];
    math::fwhm(&a, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridConfig;
    use crate::units;
    use approx::assert_relative_eq;

    fn small_setup() -> (SpatialGrid, PotentialProfile, JunctionConfig, GridConfig) {
        let j = JunctionConfig::gold(1.0);
        let gc = GridConfig::new(
            units::nm_to_au(0.01),
            units::as_to_au(2.2),
            units::nm_to_au(25.0),
        )
        .unwrap();
        let grid = SpatialGrid::for_junction(&gc, &j).unwrap();
        (grid, PotentialProfile::new(j), j, gc)
    }

    fn zero_field_waveform() -> Waveform {
        let p = crate::config::PulseConfig::new(
            0.0,
            0.0,
            crate::config::PulseConfig::omega_from_wavelength_nm(830.0),
            units::fs_to_au(1.0),
            0.0,
            None,
        )
        .unwrap();
        Waveform::gaussian(&p)
    }

    #[test]
    fn discrete_eigenstate_is_stationary() {
        let (grid, profile, j, gc) = small_setup();
        let init = discrete_initial_state(&grid, &j, units::ev_to_au(-5.0)).unwrap();
        // the eigenvalue may shift by up to half a box level spacing
        let spacing = std::f64::consts::PI * (2.0 * units::ev_to_au(10.0)).sqrt()
            / (grid.idx_tip as f64 * grid.dx);
        assert!((init.energy - units::ev_to_au(-5.0)).abs() < 0.6 * spacing);
        let prop = Propagator::new(grid, &profile, zero_field_waveform(), PotentialVariant::Full, gc.dt);
        let t_end = units::fs_to_au(2.0);
        let out = prop
            .propagate(&init.field, t_end, None, &PropagateOptions::default())
            .unwrap();
        // unitarity
        assert!((out.state.norm_sqr() - 1.0).abs() < 1e-10);
        // stationarity: pure phase evolution
        let ov = out.state.overlap(&init.field).norm();
        assert!(ov > 1.0 - 1e-6, "overlap = {ov}");
    }

    #[test]
    fn zero_steps_is_identity() {
        let (grid, profile, j, gc) = small_setup();
        let init = discrete_initial_state(&grid, &j, units::ev_to_au(-5.0)).unwrap();
        let prop = Propagator::new(grid, &profile, zero_field_waveform(), PotentialVariant::Full, gc.dt);
        let out = prop.propagate(&init.field, 0.0, None, &PropagateOptions::default()).unwrap();
        assert_eq!(out.state.values, init.field.values);
    }

    #[test]
    fn forward_then_backward_returns_initial() {
        let (grid, profile, j, gc) = small_setup();
        let init = discrete_initial_state(&grid, &j, units::ev_to_au(-5.0)).unwrap();
        // drive with a real field so the test is not a trivial phase
        let p = crate::config::PulseConfig::new(
            units::vnm_to_au(10.0),
            0.0,
            crate::config::PulseConfig::omega_from_wavelength_nm(830.0),
            units::fs_to_au(0.5),
            0.0,
            Some((-units::fs_to_au(1.0), units::fs_to_au(1.0))),
        )
        .unwrap();
        let wf = Waveform::gaussian(&p);
        let prop = Propagator::new(grid, &profile, wf, PotentialVariant::Full, gc.dt);
        let mut start = init.field.clone();
        start.time = -units::fs_to_au(1.0);
        let fwd = prop.propagate(&start, units::fs_to_au(1.0), None, &PropagateOptions::default()).unwrap();
        let back = prop
            .propagate(&fwd.state, -units::fs_to_au(1.0), None, &PropagateOptions::default())
            .unwrap();
        let err: f64 = back
            .state
            .values
            .iter()
            .zip(&start.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * grid.dx;
        assert!(err.sqrt() < 1e-8, "round trip error {}", err.sqrt());
    }

    #[test]
    fn plane_wave_current() {
        let (grid, _, _, _) = small_setup();
        let k = 0.7;
        let state = WaveField::from_fn(grid, 0.0, |x| Complex64::from_polar(1.0, k * x));
        let jv = local_current(&state, units::nm_to_au(3.0)).unwrap();
        // central difference gives sin(k dx)/dx instead of k
        let expect = (k * grid.dx).sin() / grid.dx;
        assert_relative_eq!(jv, expect, max_relative = 1e-10);
        // real-valued state carries no current
        let flat = WaveField::from_fn(grid, 0.0, |x| Complex64::from((-(x * x) / 100.0).exp()));
        assert_relative_eq!(local_current(&flat, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(local_current(&state, grid.x_min).is_err());
    }

    #[test]
    fn zero_field_spectrum_vanishes() {
        let (grid, profile, j, gc) = small_setup();
        let init = discrete_initial_state(&grid, &j, units::ev_to_au(-5.0)).unwrap();
        let prop = Propagator::new(grid, &profile, zero_field_waveform(), PotentialVariant::Full, gc.dt);
        let out = prop.propagate(&init.field, units::fs_to_au(2.0), None, &PropagateOptions::default()).unwrap();
        let steps = (units::fs_to_au(2.0) / gc.dt).round() as usize;
        let phase = cn_phase(init.energy, gc.dt, steps);
        let energies: Vec<f64> = (0..20).map(|i| units::ev_to_au(1.0 + i as f64)).collect();
        let spec = project_spectrum(&out.state, &init.field, phase, &j, &energies).unwrap();
        // floor set by the transmitted tail reflecting off the right wall;
        // well below the static tunneling scale |T|^2/(2 pi k) ~ 1e-10
        for v in &spec.values {
            assert!(*v < 1e-11, "residual spectral density {v}");
        }
    }

    #[test]
    fn source_is_linear_in_field() {
        let (grid, profile, j, gc) = small_setup();
        let init = discrete_initial_state(&grid, &j, units::ev_to_au(-5.0)).unwrap();
        let p = crate::config::PulseConfig::new(
            units::vnm_to_au(20.0),
            0.0,
            crate::config::PulseConfig::omega_from_wavelength_nm(830.0),
            units::fs_to_au(0.5),
            0.0,
            Some((-units::fs_to_au(1.0), units::fs_to_au(1.0))),
        )
        .unwrap();
        let wf = Waveform::gaussian(&p);
        let prop = Propagator::new(grid, &profile, wf, PotentialVariant::BarrierOnly, gc.dt);
        let gap: Vec<Complex64> =
            (grid.idx_tip..=grid.idx_sample).map(|i| init.field.values[i]).collect();
        let mk = |scale: f64| GapSource { psi0_gap: gap.clone(), e0: init.energy, field_scale: scale };
        let mut start = WaveField::zeros(grid, -units::fs_to_au(1.0));
        start.time = -units::fs_to_au(1.0);
        let one = prop
            .propagate(&start, units::fs_to_au(1.0), Some(&mk(1.0)), &PropagateOptions::default())
            .unwrap();
        let two = prop
            .propagate(&start, units::fs_to_au(1.0), Some(&mk(2.0)), &PropagateOptions::default())
            .unwrap();
        let n1 = one.state.norm_sqr();
        assert!(n1 > 0.0);
        for (a, b) in one.state.values.iter().zip(&two.state.values) {
            assert!((b - 2.0 * a).norm() <= 1e-10 * n1.sqrt().max(1e-12) + 1e-14);
        }
        // zero field source leaves the state empty
        let prop0 = Propagator::new(grid, &profile, zero_field_waveform(), PotentialVariant::BarrierOnly, gc.dt);
        let none = prop0
            .propagate(&start, units::fs_to_au(1.0), Some(&mk(1.0)), &PropagateOptions::default())
            .unwrap();
        assert_eq!(none.state.norm_sqr(), 0.0);
    }

    #[test]
    fn backward_of_sample_eigenstate_is_phase() {
        let (grid, profile, j, gc) = small_setup();
        let s = crate::junction::sample_eigenstate(&j, units::ev_to_au(5.0)).unwrap();
        let mut field = WaveField::from_fn(grid, units::fs_to_au(1.0), |x| s.eval(x));
        field.time = units::fs_to_au(1.0);
        let prop = Propagator::new(grid, &profile, zero_field_waveform(), PotentialVariant::Full, gc.dt);
        let out = prop.propagate(&field, 0.0, None, &PropagateOptions::default()).unwrap();
        // away from the truncation edge the state only gains a phase
        // dispersive tails from the truncation edge at x = d reach everywhere,
        // so only modest accuracy is expected here
        let i0 = grid.idx_sample + (units::nm_to_au(8.0) / grid.dx) as usize;
        let ratio = out.state.values[i0] / field.values[i0];
        assert_relative_eq!(ratio.norm(), 1.0, max_relative = 1e-4);
        let ratio2 = out.state.values[i0 + 40] / field.values[i0 + 40];
        assert!((ratio - ratio2).norm() < 1e-3);
    }

    #[test]
    fn burst_fwhm_of_synthetic_gaussian() {
        let sigma_t = units::as_to_au(400.0) / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
        let dt = units::as_to_au(2.0);
        let times: Vec<f64> = (0..4000).map(|i| (i as f64 - 2000.0) * dt).collect();
        let j: Vec<f64> = times.iter().map(|t| (-t * t / (2.0 * sigma_t * sigma_t)).exp()).collect();
        let w = burst_duration(&times, &j).unwrap();
        assert_relative_eq!(units::au_to_as(w), 400.0, max_relative = 0.01);
        // flat trace has no detectable burst
        let flat = vec![1.0; 4000];
        assert!(burst_duration(&times, &flat).is_err());
    }
}
