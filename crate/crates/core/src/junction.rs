//! Static and interaction potentials of the STM junction and the analytic
//! field-free eigenstates: the bound-in-the-gap initial state of the tip and
//! the plane-wave eigenstates of the sample region.

use crate::config::JunctionConfig;
use crate::error::CoreError;
use crate::math;
use crate::units::E_CHARGE;
use num_complex::Complex64;
use std::sync::Arc;

/// Region classifier: tip x < 0, gap 0 <= x <= d, sample x > d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Tip,
    Gap,
    Sample,
}

/// Optional image-potential hook, evaluated only inside the gap.
pub type ImageHook = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The static junction potential and its laser interaction terms.
///
/// All samplers take positions and fields in atomic units and follow the
/// sign convention e = -|e| throughout.
#[derive(Clone)]
pub struct PotentialProfile {
    junction: JunctionConfig,
    image_hook: Option<ImageHook>,
}

impl PotentialProfile {
    pub fn new(junction: JunctionConfig) -> Self {
        PotentialProfile { junction, image_hook: None }
    }

    /// Install a caller-supplied image potential, used only when the
    /// junction enables it.
    pub fn with_image_hook(mut self, hook: ImageHook) -> Self {
        self.image_hook = Some(hook);
        self
    }

    pub fn junction(&self) -> &JunctionConfig {
        &self.junction
    }

    pub fn region(&self, x: f64) -> Region {
        if x < 0.0 {
            Region::Tip
        } else if x <= self.junction.d {
            Region::Gap
        } else {
            Region::Sample
        }
    }

    fn image(&self, x: f64) -> f64 {
        if self.junction.image_potential_enabled {
            self.image_hook.as_ref().map_or(0.0, |h| h(x))
        } else {
            0.0
        }
    }

    /// Field-free potential V0(x).
    pub fn v0(&self, x: f64) -> f64 {
        let j = &self.junction;
        match self.region(x) {
            Region::Tip => j.tip_floor(),
            Region::Gap => {
                self.image(x) - E_CHARGE * (j.contact_potential + j.bias) * x / j.d
            }
            Region::Sample => j.sample_floor(),
        }
    }

    /// Length-gauge laser interaction V_I(x, t) for an instantaneous field.
    pub fn v_interaction(&self, x: f64, efield: f64) -> f64 {
        match self.region(x) {
            Region::Tip => 0.0,
            Region::Gap => -E_CHARGE * efield * x,
            Region::Sample => -E_CHARGE * efield * self.junction.d,
        }
    }

    /// Barrier-only interaction V_Is(x, t): the full gap potential with the
    /// tip and sample wells flattened away.
    pub fn v_interaction_static(&self, x: f64, efield: f64) -> f64 {
        let j = &self.junction;
        match self.region(x) {
            Region::Tip => 0.0,
            Region::Gap => {
                self.image(x)
                    - E_CHARGE * x * (efield + (j.contact_potential + j.bias) / j.d)
            }
            Region::Sample => {
                -E_CHARGE * (efield * j.d + j.contact_potential + j.bias)
            }
        }
    }

    /// Full potential V(x, t) = V0 + V_I.
    pub fn v_total(&self, x: f64, efield: f64) -> f64 {
        self.v0(x) + self.v_interaction(x, efield)
    }

    /// True when the gap is rectangular at zero field: no static tilt and
    /// no image potential, so the field-free eigenproblem is analytic.
    pub fn is_rectangular(&self) -> bool {
        let j = &self.junction;
        (j.contact_potential + j.bias).abs() < 1e-14 && !j.image_potential_enabled
    }
}

/// Field-free initial state of the tip at energy `energy` (Eq.-14-style
/// piecewise form): incident + reflected wave in the tip, decaying and
/// growing exponentials in the gap, transmitted wave in the sample.
#[derive(Debug, Clone)]
pub struct StaticEigenstate {
    pub energy: f64,
    pub k1: f64,
    pub k3: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    /// Momentum scale of the under-barrier decay, sqrt(2 m |E0|).
    pub alpha: f64,
    pub d: f64,
}

impl StaticEigenstate {
    /// Evaluate the analytic wavefunction at position x.
    pub fn eval(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            let p = Complex64::new(0.0, self.k1 * x).exp();
            p + self.r * p.conj()
        } else if x <= self.d {
            self.b1 * (-self.alpha * x).exp() + self.b2 * (self.alpha * x).exp()
        } else {
            self.t * Complex64::new(0.0, self.k3 * x).exp()
        }
    }

    /// Analytic spatial derivative.
    pub fn eval_dx(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            let p = Complex64::new(0.0, self.k1 * x).exp();
            Complex64::new(0.0, self.k1) * (p - self.r * p.conj())
        } else if x <= self.d {
            self.alpha * (self.b2 * (self.alpha * x).exp() - self.b1 * (-self.alpha * x).exp())
        } else {
            Complex64::new(0.0, self.k3) * self.t * Complex64::new(0.0, self.k3 * x).exp()
        }
    }
}

/// Plane-wave eigenstate of the sample region.
///
/// `energy` is the eigenvalue on the shared energy axis: measured from the
/// gap vacuum level at zero bias. The wavenumber is measured from the sample
/// band floor, k = sqrt(2 m (E - floor)). Normalization: unit-amplitude
/// outgoing component.
#[derive(Debug, Clone, Copy)]
pub struct SampleEigenstate {
    pub energy: f64,
    pub k: f64,
    pub floor: f64,
    pub d: f64,
}

impl SampleEigenstate {
    /// psi_E(x) = exp(i k (x - d)) for x >= d, zero elsewhere.
    pub fn eval(&self, x: f64) -> Complex64 {
        if x >= self.d {
            Complex64::new(0.0, self.k * (x - self.d)).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Build the potential profile for a junction. The waveform is supplied per
/// evaluation (the profile itself is time-independent data).
pub fn build_potential(junction: &JunctionConfig) -> PotentialProfile {
    PotentialProfile::new(*junction)
}

/// Solve the field-free initial state at energy `e0` by boundary matching at
/// x = 0 and x = d. Analytic for the rectangular barrier.
pub fn solve_initial_state(
    junction: &JunctionConfig,
    e0: f64,
) -> Result<StaticEigenstate, CoreError> {
    let profile = PotentialProfile::new(*junction);
    if !profile.is_rectangular() {
        return Err(CoreError::Domain(
            "analytic initial state requires a rectangular gap (zero bias and contact \
             potential, image potential off)"
                .into(),
        ));
    }
    let tip_floor = junction.tip_floor();
    let sample_floor = junction.sample_floor();
    if e0 <= tip_floor || e0 >= 0.0 {
        return Err(CoreError::Domain(format!(
            "initial energy must satisfy {tip_floor} < e0 < 0, got {e0}"
        )));
    }
    if e0 <= sample_floor {
        return Err(CoreError::Domain(
            "initial energy below the sample band floor".into(),
        ));
    }
    let k1 = (2.0 * (e0 - tip_floor)).sqrt();
    let k3 = (2.0 * (e0 - sample_floor)).sqrt();
    let alpha = (2.0 * e0.abs()).sqrt();
    let d = junction.d;

    // unknowns [R, B1, B2, T]
    let i = Complex64::i();
    let em = Complex64::from((-alpha * d).exp());
    let ep = Complex64::from((alpha * d).exp());
    let phase3 = (i * k3 * d).exp();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![
        vec![Complex64::from(1.0), Complex64::from(-1.0), Complex64::from(-1.0), zero],
        vec![-i * k1, Complex64::from(alpha), -Complex64::from(alpha), zero],
        vec![zero, em, ep, -phase3],
        vec![zero, -alpha * em, alpha * ep, -i * k3 * phase3],
    ];
    let mut b = vec![Complex64::from(-1.0), -i * k1, zero, zero];
    math::solve_dense(&mut a, &mut b)?;
    Ok(StaticEigenstate {
        energy: e0,
        k1,
        k3,
        r: b[0],
        b1: b[1],
        b2: b[2],
        t: b[3],
        alpha,
        d,
    })
}

/// Analytic plane-wave eigenstate of the sample region at vacuum-referenced
/// energy `e`.
pub fn sample_eigenstate(
    junction: &JunctionConfig,
    e: f64,
) -> Result<SampleEigenstate, CoreError> {
    let floor = junction.sample_floor();
    if e <= floor {
        return Err(CoreError::Domain(format!(
            "sample eigenstate energy {e} below band floor {floor}"
        )));
    }
    Ok(SampleEigenstate {
        energy: e,
        k: (2.0 * (e - floor)).sqrt(),
        floor,
        d: junction.d,
    })
}
