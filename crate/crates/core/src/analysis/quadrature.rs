//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes, centre last.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` (either orientation) to absolute error
/// `abs_tol` or relative error `rel_tol`, bisecting the worst interval.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi);
    let mut intervals = vec![(lo, hi, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureNonconvergence { estimate: total });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(sign * total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureNonconvergence {
                estimate: sign * total,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (l, r, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (l + r);
        let (v1, e1) = gk15(&f, l, m);
        let (v2, e2) = gk15(&f, m, r);
        intervals.push((l, m, v1, e1));
        intervals.push((m, r, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_one() {
        let s: f64 = WGK[..7].iter().sum::<f64>() * 2.0 + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = WG[..3].iter().sum::<f64>() * 2.0 + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    // Kronrod is exact through degree 22, Gauss through degree 13.
    #[test]
    fn polynomial_exactness() {
        for deg in 0..=22 {
            let f = |x: f64| x.powi(deg);
            let exact = (1.0 - (-1.0f64).powi(deg + 1)) / (deg as f64 + 1.0);
            let (k, _) = gk15(&f, -1.0, 1.0);
            assert!((k - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn reversed_limits_and_smooth_integrand() {
        let v = integrate_adaptive(f64::exp, 1.0, 0.0, 1e-14, 1e-14, 100).unwrap();
        assert!((v + (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let s = integrate_adaptive(|x: f64| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-10, 1e-12, 2000)
            .unwrap();
        assert!((s - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = integrate_adaptive(|x: f64| 1.0 / x, -1.0, 1.0, 1e-14, 1e-14, 10);
        assert!(matches!(r, Err(Error::QuadratureNonconvergence { .. })));
    }
}
