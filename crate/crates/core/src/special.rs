//! The dilogarithm on `[-1, 1]`.

use std::f64::consts::PI;

use crate::error::{check_domain, Result};

const PI2_6: f64 = PI * PI / 6.0;

fn dilog_series(x: f64) -> f64 {
    // |x| <= 1/2: terms fall below 1e-16 well before k = 60
    let mut sum = 0.0;
    let mut pow = x;
    let mut k = 1.0f64;
    loop {
        let term = pow / (k * k);
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
        k += 1.0;
        pow *= x;
    }
    sum
}

fn dilog_nonneg(x: f64) -> f64 {
    if x <= 0.5 {
        dilog_series(x)
    } else if x >= 1.0 {
        PI2_6
    } else {
        // Euler reflection Li₂(x) + Li₂(1-x) = π²/6 - ln x ln(1-x)
        PI2_6 - x.ln() * (-x).ln_1p() - dilog_series(1.0 - x)
    }
}

/// `Li₂(x) = Σ_{k≥1} x^k / k²` for `|x| ≤ 1`.
pub fn dilog(x: f64) -> Result<f64> {
    check_domain(x.abs() <= 1.0, "x", x, "|x| <= 1")?;
    Ok(if x >= 0.0 {
        dilog_nonneg(x)
    } else if x >= -0.5 {
        dilog_series(x)
    } else {
        // Li₂(x) = ½ Li₂(x²) - Li₂(-x)
        0.5 * dilog_nonneg(x * x) - dilog_nonneg(-x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial_sum(x: f64, terms: usize) -> f64 {
        (1..=terms).map(|k| x.powi(k as i32) / (k * k) as f64).sum()
    }

    #[test]
    fn known_values() {
        assert!((dilog(1.0).unwrap() - PI2_6).abs() < 1e-15);
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        let half = dilog(0.5).unwrap();
        assert!((half - partial_sum(0.5, 200)).abs() < 1e-12);
        assert!((half - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).abs() < 1e-14);
        assert!((dilog(-1.0).unwrap() + PI * PI / 12.0).abs() < 1e-14);
        assert!(dilog(1.0000001).is_err());
        assert!(dilog(-1.5).is_err());
    }

    #[test]
    fn matches_series_off_the_direct_range() {
        // slowly converging but exact partial sums away from |x| = 1
        for &x in &[0.6, 0.75, 0.9, -0.6, -0.8, -0.95, 0.3, -0.3] {
            let oracle = partial_sum(x, 4000);
            assert!((dilog(x).unwrap() - oracle).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn half_argument_identity() {
        // Li₂((1+a)/2) + Li₂((1-a)/2) = π²/6 - ln((1+a)/2) ln((1-a)/2)
        for i in 0..200 {
            let a = i as f64 / 200.0;
            let p = 0.5 * (1.0 + a);
            let m = 0.5 * (1.0 - a);
            let lhs = dilog(p).unwrap() + dilog(m).unwrap();
            let rhs = if m > 0.0 { PI2_6 - p.ln() * m.ln() } else { PI2_6 };
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
