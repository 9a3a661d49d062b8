//! Analytic tail summation for the infinite products used elsewhere in the
//! crate. Everything here reduces to sums of `ln(1 - y/(n + offset)^2)` over
//! all integers `n` beyond a cutoff; nearby terms are summed verbatim and the
//! far tail by an Euler-Maclaurin expansion of the power sums.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `sum_{j >= 1} (b + j)^(-s)` for real `b > 0`, `s >= 2`.
///
/// Euler-Maclaurin with corrections through the fifth Bernoulli term. The
/// callers guarantee `b >= 40`, where the truncation error is below 1e-13
/// relative for s up to ~10 and degrades slowly after that (the expansion
/// parameter is s/b; s = 20 at b = 40 is still good to ~1e-12 relative).
/// Callers weight the s = 2k term by y^k with |y|/b^2 <= 1/9, so the
/// large-s rows carry geometrically small weight in every tail sum.
fn zeta_tail<T: Real>(s: u32, b: T) -> T {
    debug_assert!(s >= 2, "power sum needs s >= 2, got {s}");
    let sf = T::of(s as f64);
    let rise = |k: u32| -> T {
        // s (s+1) ... (s+k-1)
        let mut acc = T::one();
        for i in 0..k {
            acc = acc * (sf + T::of(i as f64));
        }
        acc
    };
    let inv_b = b.recip();
    // b^(1-s) via powi on the reciprocal keeps huge s from overflowing.
    let b_pow = inv_b.powi(s as i32 - 1);
    let integral = b_pow / (sf - T::one());
    let f0 = b_pow * inv_b;
    let mut sum = integral - f0 * T::of(0.5);
    sum = sum + rise(1) * f0 * inv_b / T::of(12.0);
    sum = sum - rise(3) * f0 * inv_b.powi(3) / T::of(720.0);
    sum = sum + rise(5) * f0 * inv_b.powi(5) / T::of(30240.0);
    sum = sum - rise(7) * f0 * inv_b.powi(7) / T::of(1209600.0);
    sum = sum + rise(9) * f0 * inv_b.powi(9) / T::of(47900160.0);
    sum
}

/// `sum_{n > r} ln(1 - y / (n + offset)^2)` with principal logarithms.
///
/// Terms with `n + offset < max(40, 3 sqrt|y|)` are summed directly; past
/// that point `|y| / (n + offset)^2 <= 1/9` and the sum is expanded as
/// `-sum_k y^k/k * zeta_tail(2k)`, which converges geometrically. Fails if a
/// factor vanishes exactly (the product has a zero in the tail) or `y` is
/// not finite.
pub(crate) fn log_tail<T: Real>(y: Complex<T>, r: i64, offset: T) -> Result<Complex<T>> {
    if !(y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::Computation(
            "tail parameter must be finite".into(),
        ));
    }
    let b0 = T::of(r as f64) + offset;
    assert!(
        b0 > T::zero(),
        "tail must start past the singularity: r + offset = {b0}"
    );
    let switch = T::of(40.0).max(T::of(3.0) * y.norm().sqrt());

    let mut acc = Complex::new(T::zero(), T::zero());
    let mut n = r;
    let mut b = b0;
    while b < switch {
        n += 1;
        b = T::of(n as f64) + offset;
        let factor = Complex::new(T::one(), T::zero()) - y / Complex::new(b * b, T::zero());
        if factor.norm() == T::zero() {
            return Err(Error::Computation(format!(
                "product factor vanishes at tail index {n}"
            )));
        }
        acc = acc + factor.ln();
    }

    // Geometric regime: |y| / b^2 <= 1/9.
    let mut tail = Complex::new(T::zero(), T::zero());
    let mut y_pow = Complex::new(T::one(), T::zero());
    let eps = T::of(1e-19);
    for k in 1..=300u32 {
        y_pow = y_pow * y;
        let term = y_pow * Complex::new(zeta_tail(2 * k, b) / T::of(k as f64), T::zero());
        tail = tail + term;
        if term.norm() <= eps * (T::one() + tail.norm()) {
            break;
        }
    }
    Ok(acc - tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn power_sum_matches_zeta_closed_forms() {
        // sum_{n > 40} n^-s = zeta(s) - head, closed for even s. The oracle
        // cancels two numbers near zeta(s), so it is only good to about an
        // ulp of zeta(s) in absolute terms.
        let head = |s: i32| -> f64 { (1..=40).map(|n| (n as f64).powi(-s)).sum() };
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        let t2 = zeta_tail(2, 40.0);
        let t4 = zeta_tail(4, 40.0);
        assert!((t2 - (zeta2 - head(2))).abs() < 1e-15, "s=2: {t2:e}");
        assert!((t4 - (zeta4 - head(4))).abs() < 1e-15, "s=4: {t4:e}");
    }

    #[test]
    fn power_sum_window_consistency() {
        // zeta_tail(s, b) - zeta_tail(s, b + w) telescopes to a finite sum
        // with no truncation error in the oracle. The s = 20 row is the
        // degraded large-s regime; see the zeta_tail docs.
        for &(s, b, rel) in &[
            (2u32, 40.0f64, 1e-13f64),
            (4, 55.5, 1e-13),
            (6, 123.25, 1e-13),
            (20, 41.0, 1e-10),
        ] {
            let w = 500usize;
            let window: f64 = (1..=w).map(|j| (b + j as f64).powi(-(s as i32))).sum();
            let em = zeta_tail(s, b) - zeta_tail(s, b + w as f64);
            assert!(
                (em - window).abs() < rel * window,
                "s={s} b={b}: em={em:e} window={window:e}"
            );
        }
    }

    #[test]
    fn sine_product_tail_recovers_sin() {
        // sin(pi z) / (pi z) = prod_{n>=1} (1 - z^2/n^2); compare the tail
        // beyond r against sin with the head divided out.
        let z = c(0.3, 0.7);
        let r = 5i64;
        let mut head = c(1.0, 0.0);
        for n in 1..=r {
            head *= c(1.0, 0.0) - z * z / c((n * n) as f64, 0.0);
        }
        let pi_z = z * std::f64::consts::PI;
        let want = pi_z.sin() / pi_z / head;
        let got = log_tail(z * z, r, 0.0).unwrap().exp();
        assert!(
            (got - want).norm() < 1e-14,
            "tail product {got} vs sine ratio {want}"
        );
    }

    #[test]
    fn cosine_product_tail_recovers_cos() {
        // cos(pi z / 2) = prod_{n>=0} (1 - z^2/(2n+1)^2); offset 1/2 halves
        // the lattice: (2n+1)^2 = 4 (n + 1/2)^2.
        let z = c(1.4, -0.2);
        let r = 7i64;
        let mut head = c(1.0, 0.0);
        for n in 0..=r {
            let m = (2 * n + 1) as f64;
            head *= c(1.0, 0.0) - z * z / c(m * m, 0.0);
        }
        let want = (z * std::f64::consts::FRAC_PI_2).cos() / head;
        let got = log_tail(z * z / c(4.0, 0.0), r, 0.5).unwrap().exp();
        assert!(
            (got - want).norm() < 1e-14,
            "tail product {got} vs cosine ratio {want}"
        );
    }

    #[test]
    fn peeling_handles_y_near_cutoff() {
        // |y| comparable to r^2 forces explicit peeling before the expansion.
        // Anchor against the sine product: the head to r divided out of
        // sin(pi z)/(pi z) is exactly the tail product. Compared through exp
        // so per-factor log branches cannot interfere.
        let z = c(61.0, 3.0);
        let y = z * z;
        let r = 60i64;
        let mut head = c(1.0, 0.0);
        for n in 1..=r {
            head *= c(1.0, 0.0) - y / c((n * n) as f64, 0.0);
        }
        let pi_z = z * std::f64::consts::PI;
        let want = pi_z.sin() / pi_z / head;
        let got = log_tail(y, r, 0.0).unwrap().exp();
        assert!(
            (got - want).norm() < 1e-11 * want.norm(),
            "peeled {got} vs sine ratio {want}"
        );
    }

    #[test]
    fn huge_cutoff_skips_peeling() {
        // The antiperiodic tail at its largest working cutoff, against the
        // cosine product: cos(pi 256 / 2) = 1 over the explicit head.
        let y = c(16384.0, 0.0); // (256/2)^2 on the half-integer lattice
        let r = 32768i64;
        let mut head = c(1.0, 0.0);
        for n in 0..=r {
            let b = n as f64 + 0.5;
            head *= c(1.0, 0.0) - y / c(b * b, 0.0);
        }
        let want = c(1.0, 0.0) / head;
        let got = log_tail(y, r, 0.5).unwrap().exp();
        assert!(
            (got - want).norm() < 1e-11 * want.norm(),
            "got {got} want {want}"
        );
    }

    #[test]
    fn exact_zero_factor_is_an_error() {
        // y = 50^2 makes the n = 50 factor vanish.
        let y = c(2500.0, 0.0);
        assert!(log_tail(y, 10, 0.0).is_err());
    }
}
