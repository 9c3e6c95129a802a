//! Tunneling spectra on a shared energy axis: container, unit-integral
//! normalization, cutoff-knee detection and shape-comparison helpers.

use crate::error::CoreError;
use crate::math;
use serde::{Deserialize, Serialize};

/// Spectral density rho(E) on a uniform energy grid (atomic units).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    /// Which pipeline produced it ("tdse", "flux", "sfa").
    pub method: String,
}

impl Spectrum {
    pub fn new(energies: Vec<f64>, values: Vec<f64>, method: &str) -> Result<Self, CoreError> {
        if energies.len() != values.len() || energies.len() < 2 {
            return Err(CoreError::Input("spectrum needs matching grids of >= 2 points".into()));
        }
        if energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::Input("spectrum energy grid must be increasing".into()));
        }
        Ok(Spectrum { energies, values, method: method.to_string() })
    }

    pub fn de(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// Trapezoidal integral over the energy grid.
    pub fn integral(&self) -> f64 {
        math::trapezoid_real(&self.values, self.de())
    }

    /// Rescaled copy with unit integral; errors on a vanishing spectrum.
    pub fn normalized(&self) -> Result<Spectrum, CoreError> {
        let total = self.integral();
        if !(total > 0.0) || !total.is_finite() {
            return Err(CoreError::Numeric("spectrum integral is not positive".into()));
        }
        let values = self.values.iter().map(|v| v / total).collect();
        Ok(Spectrum { energies: self.energies.clone(), values, method: self.method.clone() })
    }

    /// Pearson correlation of log10 densities with another spectrum on the
    /// same grid, restricted to points where both exceed `floor` times their
    /// respective maxima.
    pub fn log_correlation(&self, other: &Spectrum, floor: f64) -> Result<f64, CoreError> {
        if self.energies.len() != other.energies.len() {
            return Err(CoreError::Input("spectra live on different energy grids".into()));
        }
        let ma = self.values.iter().cloned().fold(0.0, f64::max);
        let mb = other.values.iter().cloned().fold(0.0, f64::max);
        if ma <= 0.0 || mb <= 0.0 {
            return Err(CoreError::Numeric("cannot correlate a vanishing spectrum".into()));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (a, b) in self.values.iter().zip(&other.values) {
            if *a > floor * ma && *b > floor * mb {
                xs.push(a.log10());
                ys.push(b.log10());
            }
        }
        if xs.len() < 8 {
            return Err(CoreError::Detection("too few overlapping spectral points".into()));
        }
        Ok(math::correlation(&xs, &ys))
    }

    fn log10_normalized(&self) -> Result<(Vec<f64>, usize), CoreError> {
        let ma = self.values.iter().cloned().fold(0.0, f64::max);
        if ma <= 0.0 {
            return Err(CoreError::Detection("empty spectrum".into()));
        }
        let logs = self.values.iter().map(|v| (v / ma).max(1e-300).log10()).collect();
        let imax = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        Ok((logs, imax))
    }

    /// Locate the high-energy cutoff knee as the break point of a
    /// two-segment model of the log10 density beyond the spectral maximum:
    /// a flat plateau (median level, which ignores interference fringes)
    /// followed by a straight fall-off line, with the segment boundary
    /// chosen by least squares. The knee is where the two segments
    /// intersect. Points more than 3.5 decades below the maximum are
    /// excluded so a numerical noise floor cannot pollute the tail fit.
    pub fn cutoff_knee(&self) -> Result<f64, CoreError> {
        let (logs, imax) = self.log10_normalized()?;
        let mut n = logs.len();
        for i in imax..logs.len() {
            if logs[i] < -3.5 {
                n = i + 1;
                break;
            }
        }
        if n < imax + 8 {
            return Err(CoreError::Detection("too few points beyond the spectral peak".into()));
        }
        let median = |s: &[f64]| -> f64 {
            let mut v = s.to_vec();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let mut best: Option<(f64, f64, f64, f64)> = None;
        for ib in imax + 3..n - 3 {
            let level = median(&logs[imax..=ib]);
            let (slope, intercept) = math::linear_fit(&self.energies[ib..n], &logs[ib..n]);
            let sse = logs[imax..=ib].iter().map(|y| (y - level) * (y - level)).sum::<f64>()
                + self.energies[ib..n]
                    .iter()
                    .zip(&logs[ib..n])
                    .map(|(x, y)| {
                        let r = y - (slope * x + intercept);
                        r * r
                    })
                    .sum::<f64>();
            if best.is_none_or(|b| sse < b.0) {
                best = Some((sse, level, slope, intercept));
            }
        }
        let (_, level, slope, intercept) =
            best.ok_or_else(|| CoreError::Detection("no falling edge beyond the peak".into()))?;
        if slope >= 0.0 {
            return Err(CoreError::Detection("no falling edge beyond the peak".into()));
        }
        Ok((level - intercept) / slope)
    }

    /// Energy where the smoothed log10 density first falls `decades` below
    /// the plateau level beyond the spectral maximum: the strong-attenuation
    /// edge of the spectrum. Less sensitive to the fall-off shape than the
    /// knee, so better suited to tracking how the cutoff scales with a
    /// swept parameter.
    pub fn attenuation_edge(&self, decades: f64) -> Result<f64, CoreError> {
        let (logs, imax) = self.log10_normalized()?;
        let n = logs.len();
        let w = (n / 30).max(1);
        let smooth = math::moving_average(&logs, w);
        let e_pk = self.energies[imax];
        let plateau: Vec<f64> = self
            .energies
            .iter()
            .zip(&smooth)
            .filter(|(e, _)| **e >= e_pk / 4.0 && **e <= e_pk)
            .map(|(_, y)| *y)
            .collect();
        if plateau.is_empty() {
            return Err(CoreError::Detection("no plateau before the spectral peak".into()));
        }
        let mut level = plateau.clone();
        level.sort_by(f64::total_cmp);
        let threshold = level[level.len() / 2] - decades;
        for i in imax..n - 1 {
            if smooth[i] >= threshold && smooth[i + 1] < threshold {
                let frac = (smooth[i] - threshold) / (smooth[i] - smooth[i + 1]);
                return Ok(self.energies[i] + frac * (self.energies[i + 1] - self.energies[i]));
            }
        }
        Err(CoreError::Detection("spectrum never falls below the attenuation threshold".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * 0.01).collect()
    }

    #[test]
    fn normalization_unit_integral() {
        let e = grid(200);
        let v: Vec<f64> = e.iter().map(|x| (-(x - 0.7) * (x - 0.7) / 0.02).exp()).collect();
        let s = Spectrum::new(e, v, "tdse").unwrap().normalized().unwrap();
        assert_relative_eq!(s.integral(), 1.0, max_relative = 1e-12);
        let zero = Spectrum::new(grid(10), vec![0.0; 10], "tdse").unwrap();
        assert!(zero.normalized().is_err());
    }

    #[test]
    fn correlation_of_scaled_copies_is_one() {
        let e = grid(200);
        let v: Vec<f64> = e.iter().map(|x| (-3.0 * x).exp() + 1e-8).collect();
        let a = Spectrum::new(e.clone(), v.clone(), "tdse").unwrap();
        let b = Spectrum::new(e, v.iter().map(|x| 7.5 * x).collect(), "sfa").unwrap();
        let c = a.log_correlation(&b, 1e-10).unwrap();
        assert_relative_eq!(c, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn knee_of_synthetic_plateau() {
        // flat plateau to E = 1.2, then a steep exponential drop
        let e: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = e
            .iter()
            .map(|&x| if x < 1.2 { 1.0 } else { (-25.0 * (x - 1.2)).exp().max(1e-13) })
            .collect();
        let s = Spectrum::new(e, v, "tdse").unwrap();
        let knee = s.cutoff_knee().unwrap();
        assert!((knee - 1.2).abs() < 0.15, "knee at {knee}");
    }

    #[test]
    fn attenuation_edge_of_synthetic_plateau() {
        let e: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = e
            .iter()
            .map(|&x| if x < 1.2 { 1.0 } else { (-25.0 * (x - 1.2)).exp().max(1e-13) })
            .collect();
        let s = Spectrum::new(e, v, "tdse").unwrap();
        // log10 falls at 25/ln(10) per unit energy; 2 decades below the
        // plateau is reached at 1.2 + 2 ln(10)/25
        let edge = s.attenuation_edge(2.0).unwrap();
        assert!((edge - 1.384).abs() < 0.1, "edge at {edge}");
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0], "x").is_err());
        assert!(Spectrum::new(vec![1.0, 0.5], vec![1.0, 2.0], "x").is_err());
    }
}
