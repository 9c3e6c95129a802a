//! Physical constants and conversions between user-facing units and
//! Hartree atomic units (hbar = m = |e| = 1).
//!
//! Every solver in this crate works in atomic units internally; values
//! cross this module exactly once on the way in and once on the way out.

use crate::error::CoreError;
use serde::{Deserialize, Serialize};

/// Hartree energy in eV (CODATA 2018).
pub const HARTREE_EV: f64 = 27.211_386_245_988;
/// Bohr radius in nm.
pub const BOHR_NM: f64 = 0.052_917_721_090_380;
/// Atomic unit of time in fs.
pub const AUT_FS: f64 = 0.024_188_843_265_857;
/// Atomic unit of time in as.
pub const AUT_AS: f64 = 24.188_843_265_857;
/// Atomic unit of electric field in V/nm.
pub const FIELD_AU_VNM: f64 = 514.220_674_763;
/// Atomic unit of angular frequency in 1/s.
pub const AU_FREQ_PER_S: f64 = 4.134_137_333_518_2e16;
/// Speed of light in atomic units.
pub const C_AU: f64 = 137.035_999_084;

/// Signed electron charge in atomic units. Kept explicit so that no
/// formula silently flips a sign: e = -|e|.
pub const E_CHARGE: f64 = -1.0;

/// User-facing physical unit tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    EnergyEv,
    LengthNm,
    TimeFs,
    TimeAs,
    FieldVPerNm,
    AngularFrequencyPerSec,
    Dimensionless,
    /// Marker for values already expressed in Hartree atomic units.
    Atomic,
}

/// A value tagged with its unit. The tag is what keeps user units from
/// leaking past this module: solvers only accept `Unit::Atomic`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    /// Conversion factor from `unit` to atomic units.
    fn factor(unit: Unit) -> Option<f64> {
        match unit {
            Unit::EnergyEv => Some(1.0 / HARTREE_EV),
            Unit::LengthNm => Some(1.0 / BOHR_NM),
            Unit::TimeFs => Some(1.0 / AUT_FS),
            Unit::TimeAs => Some(1.0 / AUT_AS),
            Unit::FieldVPerNm => Some(1.0 / FIELD_AU_VNM),
            Unit::AngularFrequencyPerSec => Some(1.0 / AU_FREQ_PER_S),
            Unit::Dimensionless => Some(1.0),
            Unit::Atomic => None,
        }
    }

    /// Express this quantity in Hartree atomic units.
    pub fn to_atomic(self) -> Result<Quantity, CoreError> {
        match Self::factor(self.unit) {
            Some(f) => Ok(Quantity::new(self.value * f, Unit::Atomic)),
            None => Ok(self),
        }
    }

    /// Inverse of [`Quantity::to_atomic`] for a given target unit.
    pub fn from_atomic(self, target: Unit) -> Result<Quantity, CoreError> {
        if self.unit != Unit::Atomic {
            return Err(CoreError::Config(format!(
                "from_atomic expects an atomic-unit value, got {:?}",
                self.unit
            )));
        }
        match Self::factor(target) {
            Some(f) => Ok(Quantity::new(self.value / f, target)),
            None => Ok(self),
        }
    }
}

/// Convenience scalar conversions used throughout the crate.
pub fn ev_to_au(v: f64) -> f64 {
    v / HARTREE_EV
}
pub fn au_to_ev(v: f64) -> f64 {
    v * HARTREE_EV
}
pub fn nm_to_au(v: f64) -> f64 {
    v / BOHR_NM
}
pub fn au_to_nm(v: f64) -> f64 {
    v * BOHR_NM
}
pub fn fs_to_au(v: f64) -> f64 {
    v / AUT_FS
}
pub fn au_to_fs(v: f64) -> f64 {
    v * AUT_FS
}
pub fn as_to_au(v: f64) -> f64 {
    v / AUT_AS
}
pub fn au_to_as(v: f64) -> f64 {
    v * AUT_AS
}
pub fn vnm_to_au(v: f64) -> f64 {
    v / FIELD_AU_VNM
}

/// Keldysh parameter gamma = omega sqrt(2 m |E0|) / (|e| F), all atomic units.
///
/// `e0` is the initial binding energy (may be given as a negative energy;
/// only its magnitude enters). Errors when the field vanishes.
pub fn keldysh_gamma(omega: f64, peak_field: f64, e0: f64) -> Result<f64, CoreError> {
    if peak_field == 0.0 {
        return Err(CoreError::Domain(
            "Keldysh parameter undefined for zero field".into(),
        ));
    }
    Ok(omega * (2.0 * e0.abs()).sqrt() / (E_CHARGE.abs() * peak_field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hartree_in_ev() {
        // CODATA constant arithmetic
        let q = Quantity::new(27.211386245988, Unit::EnergyEv).to_atomic().unwrap();
        assert_relative_eq!(q.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_maps_to_zero() {
        let q = Quantity::new(0.0, Unit::EnergyEv).to_atomic().unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn nanometer_in_bohr() {
        let q = Quantity::new(1.0, Unit::LengthNm).to_atomic().unwrap();
        assert_relative_eq!(q.value, 18.8973, max_relative = 1e-4);
    }

    #[test]
    fn gamma_at_paper_fields() {
        // F = 17 V/nm, omega = 2.27e15 1/s, |E0| = 5 eV -> gamma ~ 1
        let omega = 2.27e15 / AU_FREQ_PER_S;
        let g17 = keldysh_gamma(omega, vnm_to_au(17.0), ev_to_au(5.0)).unwrap();
        assert!((g17 - 1.0).abs() / 1.0 < 0.02, "gamma = {g17}");
        let g35 = keldysh_gamma(omega, vnm_to_au(35.0), ev_to_au(5.0)).unwrap();
        assert_relative_eq!(g35, g17 * 17.0 / 35.0, max_relative = 1e-12);
        assert_relative_eq!(g35, 0.49, max_relative = 0.02);
    }

    #[test]
    fn gamma_zero_binding() {
        let g = keldysh_gamma(1.0, 1.0, 0.0).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gamma_zero_field_errors() {
        assert!(keldysh_gamma(1.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(v in -1e6f64..1e6, idx in 0usize..6) {
            let unit = [Unit::EnergyEv, Unit::LengthNm, Unit::TimeFs,
                        Unit::TimeAs, Unit::FieldVPerNm, Unit::AngularFrequencyPerSec][idx];
            let q = Quantity::new(v, unit);
            let back = q.to_atomic().unwrap().from_atomic(unit).unwrap();
            prop_assert!((back.value - v).abs() <= 1e-12 * v.abs().max(1e-300));
        }

        #[test]
        fn gamma_scales_inverse_field(f in 1e-4f64..10.0, e0 in 0.01f64..2.0, w in 0.01f64..1.0) {
            let g1 = keldysh_gamma(w, f, e0).unwrap();
            let g2 = keldysh_gamma(w, 2.0 * f, e0).unwrap();
            prop_assert!((g2 - g1 / 2.0).abs() <= 1e-12 * g1);
        }
    }
}
