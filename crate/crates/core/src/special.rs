//! Special functions.

use std::f64::consts::PI;

use crate::error::{HlsError, Result};

/// Lanczos coefficients for `g = 607/128`, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below `1/2` are shifted up with `Γ(x) = Γ(x+1)/x` so the
/// Lanczos sum is only evaluated where it is accurate to ~1e-15.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(HlsError::invalid(format!("log_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(lanczos_ln_gamma(x + 1.0) - x.ln());
    }
    Ok(lanczos_ln_gamma(x))
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    // Exact values at 1 and 2 so that ratios like Γ(1)/Γ(2)² come out clean.
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// `Γ(x)` for moderate positive `x`.
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integer_points() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let mut fact = 1.0f64;
        for k in 1..30u32 {
            fact *= k as f64;
            let got = log_gamma(k as f64 + 1.0).unwrap();
            assert!((got - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0), "k={k}");
        }
    }

    #[test]
    fn half_integers() {
        let ln_sqrt_pi = 0.5 * PI.ln();
        assert!((log_gamma(0.5).unwrap() - ln_sqrt_pi).abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
        // Γ(5/2) = (3/4)√π
        let g52 = gamma(2.5).unwrap();
        assert!((g52 / (0.75 * PI.sqrt()) - 1.0).abs() < 1e-14);
        // Γ(3/2)² = π/4
        assert!((gamma(1.5).unwrap().powi(2) / (PI / 4.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn large_argument_against_stirling() {
        // Stirling series with four correction terms is accurate to ~1e-16 at x = 50.
        let x: f64 = 50.0;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
            - 1.0 / (1680.0 * x.powi(7));
        let got = log_gamma(x).unwrap();
        assert!((got / stirling - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn recurrence(x in 0.05..45.0f64) {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
        }
    }
}
