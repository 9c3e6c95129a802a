//! Small numerical utilities shared by the solvers: complex tridiagonal
//! and small dense linear solves, Gauss-Legendre quadrature, and a few
//! signal helpers for spectra and current traces.

use crate::error::CoreError;
use num_complex::Complex64;

/// Solve a tridiagonal system in place with the Thomas algorithm.
///
/// `lower`/`upper` are the constant off-diagonals (length n-1 semantics but
/// passed as scalars here since the kinetic coupling is uniform), `diag` the
/// diagonal, `rhs` the right-hand side which is overwritten by the solution.
/// `scratch` must have the same length as `diag`.
pub fn thomas_const_offdiag(
    offdiag: Complex64,
    diag: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert_eq!(scratch.len(), n);
    // forward sweep: scratch holds the modified upper coefficients
    let mut beta = diag[0];
    scratch[0] = offdiag / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - offdiag * scratch[i - 1];
        scratch[i] = offdiag / beta;
        rhs[i] = (rhs[i] - offdiag * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let t = scratch[i] * rhs[i + 1];
        rhs[i] -= t;
    }
}

/// Dense complex linear solve by Gaussian elimination with partial pivoting.
/// Sized for the 3x3 and 4x4 systems of the saddle and junction solvers.
pub fn solve_dense(a: &mut [Vec<Complex64>], b: &mut [Complex64]) -> Result<(), CoreError> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col][col].norm_sqr();
        for row in col + 1..n {
            let v = a[row][col].norm_sqr();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(CoreError::Numeric("singular linear system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let t = f * a[col][k];
                a[row][k] -= t;
            }
            let t = f * b[col];
            b[row] -= t;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * b[k];
        }
        b[col] = s / a[col][col];
    }
    Ok(())
}

/// 16-point Gauss-Legendre nodes and weights on [-1, 1].
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_73,
    0.124_628_971_255_533_87,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_095,
];

/// Composite 16-point Gauss-Legendre quadrature of a complex function along
/// the straight segment from `a` to `b` in the complex plane.
pub fn integrate_segment<F>(f: F, a: Complex64, b: Complex64, panels: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut sum = Complex64::new(0.0, 0.0);
    let step = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let mid = lo + step * 0.5;
        let half = step * 0.5;
        for k in 0..8 {
            let dx = half * GL16_X[k];
            sum += (f(mid + dx) + f(mid - dx)) * GL16_W[k];
        }
    }
    sum * (step * 0.5)
}

/// Trapezoidal sum of uniformly sampled complex values with spacing `h`.
pub fn trapezoid(values: &[Complex64], h: f64) -> Complex64 {
    if values.len() < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let mut s = (values[0] + values[values.len() - 1]) * 0.5;
    for v in &values[1..values.len() - 1] {
        s += v;
    }
    s * h
}

/// Trapezoidal sum of uniformly sampled real values with spacing `h`.
pub fn trapezoid_real(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    (0.5 * (values[0] + values[values.len() - 1]) + inner) * h
}

/// FWHM of a sampled non-negative peak around its global maximum, with
/// linear interpolation of the half-maximum crossings. `h` is the sample
/// spacing; returns an error when no crossing brackets the peak.
pub fn fwhm(values: &[f64], h: f64) -> Result<f64, CoreError> {
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| CoreError::Detection("empty trace".into()))?;
    if vmax <= 0.0 {
        return Err(CoreError::Detection("peak is not positive".into()));
    }
    let half = vmax / 2.0;
    let mut left = None;
    for i in (1..=imax).rev() {
        if values[i - 1] <= half && values[i] > half {
            let frac = (half - values[i - 1]) / (values[i] - values[i - 1]);
            left = Some((i - 1) as f64 + frac);
            break;
        }
    }
    let mut right = None;
    for i in imax..values.len() - 1 {
        if values[i] > half && values[i + 1] <= half {
            let frac = (values[i] - half) / (values[i] - values[i + 1]);
            right = Some(i as f64 + frac);
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l) * h),
        _ => Err(CoreError::Detection("half-maximum crossing not bracketed".into())),
    }
}

/// Least-squares straight line through (x, y); returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
        sxy += (xi - mx) * (yi - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Centered moving average with half-window `half` (clamped at the ends).
pub fn moving_average(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
