//! Smooth cutoffs built from the `exp(-1/x)` ramp.

/// `exp(-1/x)` for `x > 0`, zero otherwise.
#[inline]
pub fn chi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = chi(x);
        a / (a + chi(1.0 - x))
    }
}

/// Raw annulus bump: support `[1/2, 4]`, equal to 1 on `[1, 2]`.
#[inline]
pub fn annulus_bump(rho: f64) -> f64 {
    ramp(2.0 * (rho - 0.5)) * ramp((4.0 - rho) / 2.0)
}

/// Sum of the raw bump over all dyadic dilates, `sum_m annulus_bump(2^-m rho)`.
pub fn dyadic_sum(rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let m0 = rho.log2().floor() as i32;
    (m0 - 3..=m0 + 3)
        .map(|m| annulus_bump(rho * 2f64.powi(-m)))
        .sum()
}

/// Normalized bump whose dyadic dilates sum to 1 on `(0, inf)`.
#[inline]
pub fn lp_bump(rho: f64) -> f64 {
    let b = annulus_bump(rho);
    if b == 0.0 {
        0.0
    } else {
        b / dyadic_sum(rho)
    }
}

/// Symbol of the Littlewood-Paley piece `Delta_k` at `|zeta| = rho`.
///
/// `k >= 0` is the annulus `lp_bump(2^-k rho)`; `k = -1` is the remainder
/// `1 - sum_{k >= 0}`, supported in `|zeta| <= 2`.
pub fn lp_symbol(k: i32, rho: f64) -> f64 {
    if k >= 0 {
        return lp_bump(rho * 2f64.powi(-k));
    }
    assert_eq!(k, -1, "band index must be >= -1");
    if rho <= 0.5 {
        return 1.0;
    }
    let top = (2.0 * rho).log2().ceil() as i32;
    let mut acc = 0.0;
    for j in 0..=top {
        acc += lp_bump(rho * 2f64.powi(-j));
    }
    (1.0 - acc).max(0.0)
}

/// Symbol of the low-pass `P_j = sum_{l = -1}^{j} Delta_l`.
///
/// Below `2^j` every higher piece vanishes and the value is exactly 1.
pub fn ball_symbol(j: i32, rho: f64) -> f64 {
    if rho <= 2f64.powi(j) {
        return 1.0;
    }
    (-1..=j).map(|l| lp_symbol(l, rho)).sum()
}

/// Radial bump of the dispersion-kernel integral, support `(1/2, 2)`.
#[inline]
pub fn kernel_bump(r: f64) -> f64 {
    ramp(2.0 * r - 1.0) * ramp(4.0 - 2.0 * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_bump_support_and_plateau() {
        assert_eq!(annulus_bump(0.5), 0.0);
        assert_eq!(annulus_bump(4.0), 0.0);
        assert_eq!(annulus_bump(1.0), 1.0);
        assert_eq!(annulus_bump(1.7), 1.0);
        assert_eq!(annulus_bump(2.0), 1.0);
        assert!(annulus_bump(0.75) > 0.0 && annulus_bump(0.75) < 1.0);
        assert!((ramp(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dilates_sum_to_one() {
        for i in 1..400 {
            let rho = 0.01 * i as f64 * 1.37;
            let s: f64 = (-10..=10).map(|k| lp_bump(rho * 2f64.powi(-k))).sum();
            assert!((s - 1.0).abs() < 1e-14, "rho={rho} s={s}");
        }
    }

    #[test]
    fn partition_with_low_block() {
        for i in 0..500 {
            let rho = 0.013 * i as f64;
            let s: f64 = (-1..=8).map(|k| lp_symbol(k, rho)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(lp_symbol(-1, 2.5), 0.0);
        assert_eq!(lp_symbol(0, 0.4), 0.0);
    }

    #[test]
    fn kernel_bump_support() {
        assert_eq!(kernel_bump(0.5), 0.0);
        assert_eq!(kernel_bump(2.0), 0.0);
        assert_eq!(kernel_bump(1.2), 1.0);
    }
}
