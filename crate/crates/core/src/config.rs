//! Run configuration: the TOML file schema and its validated atomic-unit
//! counterparts handed to the solvers.
//!
//! Raw file values carry their unit in the key name (`d_nm`, `fwhm_fs`, ...);
//! validation converts everything to atomic units exactly once.

use crate::error::CoreError;
use crate::units::{self, E_CHARGE};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Raw file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub junction: RawJunction,
    pub pulse: RawPulse,
    #[serde(default)]
    pub grid: RawGrid,
    #[serde(default)]
    pub spectrum: RawSpectrum,
    #[serde(default)]
    pub sfa: RawSfa,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // keys mirror the config file schema
pub struct RawJunction {
    pub d_nm: f64,
    pub fermi_tip_eV: f64,
    pub fermi_sample_eV: f64,
    pub work_tip_eV: f64,
    pub work_sample_eV: f64,
    #[serde(default)]
    pub bias_V: f64,
    #[serde(default)]
    pub image_potential: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // keys mirror the config file schema
pub struct RawPulse {
    pub field_Vnm: f64,
    #[serde(default)]
    pub static_field_Vnm: f64,
    pub wavelength_nm: f64,
    pub fwhm_fs: f64,
    #[serde(default)]
    pub cep_rad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub dx_nm: f64,
    pub dt_as: f64,
    pub x_span_nm: f64,
    /// Total simulation window; defaults to 4x the pulse FWHM.
    pub t_span_fs: Option<f64>,
}

impl Default for RawGrid {
    fn default() -> Self {
        RawGrid { dx_nm: 0.01, dt_as: 2.2, x_span_nm: 300.0, t_span_fs: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)] // keys mirror the config file schema
pub struct RawSpectrum {
    pub e_min_eV: f64,
    pub e_max_eV: f64,
    pub n_points: usize,
}

impl Default for RawSpectrum {
    fn default() -> Self {
        RawSpectrum { e_min_eV: 0.0, e_max_eV: 40.0, n_points: 161 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSfa {
    pub tau_min_as: f64,
    pub dt_quad_as: f64,
}

impl Default for RawSfa {
    fn default() -> Self {
        RawSfa { tau_min_as: 1.0, dt_quad_as: 5.0 }
    }
}

// ---------------------------------------------------------------------------
// Validated atomic-unit configuration
// ---------------------------------------------------------------------------

/// Geometry and material energetics of the tip-vacuum-sample sandwich.
/// All fields in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionConfig {
    pub d: f64,
    pub fermi_tip: f64,
    pub fermi_sample: f64,
    pub work_tip: f64,
    pub work_sample: f64,
    pub bias: f64,
    pub contact_potential: f64,
    pub image_potential_enabled: bool,
}

impl JunctionConfig {
    pub fn new(
        d: f64,
        fermi_tip: f64,
        fermi_sample: f64,
        work_tip: f64,
        work_sample: f64,
        bias: f64,
        image_potential_enabled: bool,
    ) -> Result<Self, CoreError> {
        if d <= 0.0 {
            return Err(CoreError::Config("junction width d must be positive".into()));
        }
        if work_tip <= 0.0 || work_sample <= 0.0 {
            return Err(CoreError::Config("work functions must be positive".into()));
        }
        let contact_potential = (work_tip - work_sample) / E_CHARGE;
        Ok(JunctionConfig {
            d,
            fermi_tip,
            fermi_sample,
            work_tip,
            work_sample,
            bias,
            contact_potential,
            image_potential_enabled,
        })
    }

    /// Contact (Volta) potential recomputed from the work functions.
    pub fn recomputed_contact_potential(&self) -> f64 {
        (self.work_tip - self.work_sample) / E_CHARGE
    }

    /// Potential floor of the tip region, -(E_F,t + W_t).
    pub fn tip_floor(&self) -> f64 {
        -(self.fermi_tip + self.work_tip)
    }

    /// Potential floor of the sample region, -(E_F,s + W_s + e phi + e U_s).
    pub fn sample_floor(&self) -> f64 {
        -(self.fermi_sample
            + self.work_sample
            + E_CHARGE * self.contact_potential
            + E_CHARGE * self.bias)
    }

    /// Same junction with tip and sample roles exchanged. Used for the
    /// sample-to-tip current run.
    pub fn swapped(&self) -> Result<Self, CoreError> {
        JunctionConfig::new(
            self.d,
            self.fermi_sample,
            self.fermi_tip,
            self.work_sample,
            self.work_tip,
            -self.bias,
            self.image_potential_enabled,
        )
    }

    /// Gold/gold junction with zero bias, the reference system.
    pub fn gold(d_nm: f64) -> Self {
        JunctionConfig::new(
            units::nm_to_au(d_nm),
            units::ev_to_au(5.0),
            units::ev_to_au(5.0),
            units::ev_to_au(5.0),
            units::ev_to_au(5.0),
            0.0,
            false,
        )
        .expect("gold junction parameters are valid")
    }
}

/// Laser waveform parameters in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    pub peak_field: f64,
    pub static_field: f64,
    pub omega: f64,
    pub fwhm: f64,
    pub cep: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl PulseConfig {
    pub fn new(
        peak_field: f64,
        static_field: f64,
        omega: f64,
        fwhm: f64,
        cep: f64,
        t_window: Option<(f64, f64)>,
    ) -> Result<Self, CoreError> {
        if omega <= 0.0 {
            return Err(CoreError::Config("angular frequency must be positive".into()));
        }
        if fwhm <= 0.0 {
            return Err(CoreError::Config("pulse FWHM must be positive".into()));
        }
        let (t_min, t_max) = t_window.unwrap_or((-2.0 * fwhm, 2.0 * fwhm));
        if t_max - t_min < 4.0 * fwhm - 1e-9 * fwhm {
            return Err(CoreError::Config(format!(
                "time window must span at least 4x FWHM (have {:.3} fs, need {:.3} fs)",
                units::au_to_fs(t_max - t_min),
                units::au_to_fs(4.0 * fwhm)
            )));
        }
        Ok(PulseConfig { peak_field, static_field, omega, fwhm, cep, t_min, t_max })
    }

    /// Angular frequency for a vacuum wavelength in nm.
    pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
        2.0 * std::f64::consts::PI * units::C_AU / units::nm_to_au(wavelength_nm)
    }

    pub fn with_cep(mut self, cep: f64) -> Self {
        self.cep = cep;
        self
    }

    pub fn with_peak_field(mut self, peak_field: f64) -> Self {
        self.peak_field = peak_field;
        self
    }
}

/// Spatial and temporal discretization in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dx: f64,
    pub dt: f64,
    /// Half-width of the spatial box; walls sit at -x_span and d + x_span.
    pub x_span: f64,
}

impl GridConfig {
    pub fn new(dx: f64, dt: f64, x_span: f64) -> Result<Self, CoreError> {
        if dx <= 0.0 || dt <= 0.0 || x_span <= 0.0 {
            return Err(CoreError::Config("grid steps and span must be positive".into()));
        }
        Ok(GridConfig { dx, dt, x_span })
    }

    pub fn default_au() -> Self {
        GridConfig {
            dx: units::nm_to_au(0.01),
            dt: units::as_to_au(2.2),
            x_span: units::nm_to_au(300.0),
        }
    }
}

/// Energy grid for spectra, atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
}

impl SpectrumConfig {
    pub fn energies(&self) -> Vec<f64> {
        let n = self.n_points.max(2);
        (0..n)
            .map(|i| self.e_min + (self.e_max - self.e_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Quadrature controls for the two-time SFA integral, atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfaConfig {
    pub tau_min: f64,
    pub dt_quad: f64,
}

impl SfaConfig {
    pub fn default_au() -> Self {
        SfaConfig { tau_min: units::as_to_au(1.0), dt_quad: units::as_to_au(5.0) }
    }
}

/// Complete validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub junction: JunctionConfig,
    pub pulse: PulseConfig,
    pub grid: GridConfig,
    pub spectrum: SpectrumConfig,
    pub sfa: SfaConfig,
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CoreError> {
        let junction = JunctionConfig::new(
            units::nm_to_au(raw.junction.d_nm),
            units::ev_to_au(raw.junction.fermi_tip_eV),
            units::ev_to_au(raw.junction.fermi_sample_eV),
            units::ev_to_au(raw.junction.work_tip_eV),
            units::ev_to_au(raw.junction.work_sample_eV),
            units::ev_to_au(raw.junction.bias_V),
            raw.junction.image_potential,
        )?;
        let fwhm = units::fs_to_au(raw.pulse.fwhm_fs);
        let t_window = raw.grid.t_span_fs.map(|s| {
            let half = units::fs_to_au(s) / 2.0;
            (-half, half)
        });
        let pulse = PulseConfig::new(
            units::vnm_to_au(raw.pulse.field_Vnm),
            units::vnm_to_au(raw.pulse.static_field_Vnm),
            PulseConfig::omega_from_wavelength_nm(raw.pulse.wavelength_nm),
            fwhm,
            raw.pulse.cep_rad,
            t_window,
        )?;
        let grid = GridConfig::new(
            units::nm_to_au(raw.grid.dx_nm),
            units::as_to_au(raw.grid.dt_as),
            units::nm_to_au(raw.grid.x_span_nm),
        )?;
        let spectrum = SpectrumConfig {
            e_min: units::ev_to_au(raw.spectrum.e_min_eV),
            e_max: units::ev_to_au(raw.spectrum.e_max_eV),
            n_points: raw.spectrum.n_points,
        };
        if spectrum.n_points < 2 || spectrum.e_max <= spectrum.e_min {
            return Err(CoreError::Config("spectrum grid needs e_max > e_min and >= 2 points".into()));
        }
        let sfa = SfaConfig {
            tau_min: units::as_to_au(raw.sfa.tau_min_as),
            dt_quad: units::as_to_au(raw.sfa.dt_quad_as),
        };
        if sfa.tau_min <= 0.0 || sfa.dt_quad <= 0.0 {
            return Err(CoreError::Config("sfa quadrature steps must be positive".into()));
        }
        Ok(RunConfig { junction, pulse, grid, spectrum, sfa })
    }

    pub fn from_toml_str(s: &str) -> Result<Self, CoreError> {
        let raw: RawConfig =
            toml::from_str(s).map_err(|e| CoreError::Config(e.to_string()))?;
        Self::from_raw(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SAMPLE: &str = r#"
[junction]
d_nm = 1.0
fermi_tip_eV = 5.0
fermi_sample_eV = 5.0
work_tip_eV = 5.0
work_sample_eV = 5.0
bias_V = 0.0
image_potential = false

[pulse]
field_Vnm = 35.0
wavelength_nm = 830.0
fwhm_fs = 6.0
cep_rad = 0.0

[grid]
dx_nm = 0.01
dt_as = 2.2
x_span_nm = 300.0

[spectrum]
e_min_eV = 0.0
e_max_eV = 40.0
n_points = 161

[sfa]
tau_min_as = 1.0
dt_quad_as = 5.0
"#;

    #[test]
    fn parses_reference_config() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_relative_eq!(units::au_to_nm(cfg.junction.d), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            cfg.pulse.omega * units::AU_FREQ_PER_S,
            2.27e15,
            max_relative = 1e-3
        );
        // window defaults to 4x FWHM centered on the envelope peak
        assert_relative_eq!(units::au_to_fs(cfg.pulse.t_max), 12.0, max_relative = 1e-12);
        assert_relative_eq!(units::au_to_fs(cfg.pulse.t_min), -12.0, max_relative = 1e-12);
    }

    #[test]
    fn contact_potential_consistency() {
        let j = JunctionConfig::new(
            units::nm_to_au(1.0),
            units::ev_to_au(5.0),
            units::ev_to_au(4.0),
            units::ev_to_au(5.5),
            units::ev_to_au(4.5),
            0.0,
            false,
        )
        .unwrap();
        assert_relative_eq!(
            j.contact_potential,
            j.recomputed_contact_potential(),
            max_relative = 1e-12
        );
        // phi = (W_t - W_s)/e with e = -1
        assert_relative_eq!(j.contact_potential, units::ev_to_au(-1.0), max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(JunctionConfig::new(-1.0, 0.2, 0.2, 0.2, 0.2, 0.0, false).is_err());
    }

    #[test]
    fn rejects_short_window() {
        let r = PulseConfig::new(0.01, 0.0, 0.057, units::fs_to_au(6.0), 0.0,
                                 Some((-units::fs_to_au(5.0), units::fs_to_au(5.0))));
        assert!(r.is_err());
    }

    #[test]
    fn omega_wavelength_consistency() {
        // omega = 2 pi c / lambda to 1e-12 relative
        let omega = PulseConfig::omega_from_wavelength_nm(830.0);
        let lambda = 2.0 * std::f64::consts::PI * units::C_AU / omega;
        assert_relative_eq!(units::au_to_nm(lambda), 830.0, max_relative = 1e-12);
    }
}
