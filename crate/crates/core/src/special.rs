//! Special functions backing the normalization maps.
//!
//! Everything here is classical numerics: Cody's rational approximations for
//! the error function, a Lanczos log-gamma, and the regularized incomplete
//! beta function evaluated with a modified Lentz continued fraction. All are
//! accurate to well below the 1e-10 tolerance the normalizers require.

/// Complementary error function.
///
/// Rational Chebyshev approximations in three ranges (|x| <= 0.46875,
/// |x| <= 4, |x| > 4), relative error around 1e-16 for positive arguments.
pub fn erfc(x: f64) -> f64 {
    const THRESH: f64 = 0.46875;
    let y = x.abs();
    let result = if y <= THRESH {
        return 1.0 - erf(x);
    } else if y <= 4.0 {
        const C: [f64; 9] = [
            5.64188496988670089e-1,
            8.88314979438837594e0,
            6.61191906371416295e1,
            2.98635138197400131e2,
            8.81952221241769090e2,
            1.71204761263407058e3,
            2.05107837782607147e3,
            1.23033935479799725e3,
            2.15311535474403846e-8,
        ];
        const D: [f64; 8] = [
            1.57449261107098347e1,
            1.17693950891312499e2,
            5.37181101862009858e2,
            1.62138957456669019e3,
            3.29079923573345963e3,
            4.36261909014324716e3,
            3.43936767414372164e3,
            1.23033935480374942e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        scaled_exp(y) * (num + C[7]) / (den + D[7])
    } else {
        const P: [f64; 6] = [
            3.05326634961232344e-1,
            3.60344899949804439e-1,
            1.25781726111229246e-1,
            1.60837851487422766e-2,
            6.58749161529837803e-4,
            1.63153871373020978e-2,
        ];
        const Q: [f64; 5] = [
            2.56852019228982242e0,
            1.87295284992346047e0,
            5.27905102951428412e-1,
            6.05183413124413191e-2,
            2.33520497626869185e-3,
        ];
        const INV_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;
        if y >= 26.6 {
            // underflows the double range on the positive side
            0.0
        } else {
            let ysq = 1.0 / (y * y);
            let mut num = P[5] * ysq;
            let mut den = ysq;
            for i in 0..4 {
                num = (num + P[i]) * ysq;
                den = (den + Q[i]) * ysq;
            }
            let r = ysq * (num + P[4]) / (den + Q[4]);
            scaled_exp(y) * (INV_SQRT_PI - r) / y
        }
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// exp(-y^2) computed as exp(-hi^2) * exp(-(y-hi)(y+hi)) with hi a multiple
/// of 1/16, which keeps the argument splitting exact and the tail accurate.
fn scaled_exp(y: f64) -> f64 {
    let hi = (y * 16.0).trunc() / 16.0;
    let del = (y - hi) * (y + hi);
    (-hi * hi).exp() * (-del).exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    const THRESH: f64 = 0.46875;
    let y = x.abs();
    if y <= THRESH {
        const A: [f64; 5] = [
            3.16112374387056560e0,
            1.13864154151050156e2,
            3.77485237685302021e2,
            3.20937758913846947e3,
            1.85777706184603153e-1,
        ];
        const B: [f64; 4] = [
            2.36012909523441209e1,
            2.44024637934444173e2,
            1.28261652607737228e3,
            2.84423683343917062e3,
        ];
        let z = if y > 1e-300 { y * y } else { 0.0 };
        let mut num = A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + A[i]) * z;
            den = (den + B[i]) * z;
        }
        x * (num + A[3]) / (den + B[3])
    } else if x > 0.0 {
        1.0 - erfc(x)
    } else {
        erfc(-x) - 1.0
    }
}

/// Natural log of the gamma function for positive arguments (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection keeps the series argument away from the poles
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + 7.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Gauss-Legendre quadrature of f over [lo, hi], 64 panels of
    // 16 nodes; plenty for the smooth integrands below.
    fn quad(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        // 16-point Gauss-Legendre nodes/weights on [-1, 1] (symmetric halves)
        const X: [f64; 8] = [
            0.0950125098376374,
            0.2816035507792589,
            0.4580167776572274,
            0.6178762444026438,
            0.7554044083550030,
            0.8656312023878318,
            0.9445750230732326,
            0.9894009349916499,
        ];
        const W: [f64; 8] = [
            0.1894506104550685,
            0.1826034150449236,
            0.1691565193950025,
            0.1495959888165767,
            0.1246289712555339,
            0.0951585116824928,
            0.0622535239386479,
            0.0271524594117541,
        ];
        let mut total = 0.0;
        let n_panels = 64;
        let h = (hi - lo) / n_panels as f64;
        for p in 0..n_panels {
            let a = lo + p as f64 * h;
            let mid = a + 0.5 * h;
            let half = 0.5 * h;
            let mut s = 0.0;
            for i in 0..8 {
                s += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
            }
            total += s * half;
        }
        total
    }

    fn normal_pdf(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn erf_matches_quadrature_of_gaussian() {
        // erf(x) = 2/sqrt(pi) * int_0^x exp(-t^2) dt
        let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
        for &x in &[0.01, 0.1, 0.3, 0.46875, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.5] {
            let expected = two_over_sqrt_pi * quad(|t| (-t * t).exp(), 0.0, x);
            assert!(
                (erf(x) - expected).abs() <= 1e-12,
                "erf({x}) = {} vs {}",
                erf(x),
                expected
            );
            assert!((erf(-x) + expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn erfc_tail_is_accurate() {
        // relative accuracy in the far tail, checked against quadrature of
        // the scaled integrand erfc(x) = 2/sqrt(pi) int_x^{x+20} exp(-t^2)
        let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
        for &x in &[4.5, 6.0, 8.0, 10.0] {
            let expected = two_over_sqrt_pi * quad(|t| (-t * t).exp(), x, x + 20.0);
            let rel = (erfc(x) - expected).abs() / expected;
            assert!(rel < 1e-12, "erfc({x}) rel err {rel}");
        }
    }

    #[test]
    fn erfc_of_negative_arguments() {
        assert!((erfc(-1.0) - (2.0 - erfc(1.0))).abs() < 1e-15);
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(erfc(30.0), 0.0);
        assert!((erfc(-30.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_known_values() {
        let pi = std::f64::consts::PI;
        assert!((ln_gamma(0.5) - (pi.ln() * 0.5)).abs() < 1e-13); // Gamma(1/2) = sqrt(pi)
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(10.5) - quad_ln_gamma(10.5)).abs() < 1e-9);
    }

    // log Gamma(x) by quadrature of the defining integral, split to capture
    // both the origin and the tail; loose but independent.
    fn quad_ln_gamma(x: f64) -> f64 {
        let f = |t: f64| t.powf(x - 1.0) * (-t).exp();
        (quad(f, 1e-12, 1.0) + quad(f, 1.0, 60.0)).ln()
    }

    #[test]
    fn ln_gamma_recurrence() {
        // Gamma(x+1) = x Gamma(x)
        for &x in &[0.1, 0.7, 1.3, 4.2, 9.9, 25.0] {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn inc_beta_edges_and_symmetry() {
        assert_eq!(reg_inc_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(reg_inc_beta(2.0, 3.0, 1.0), 1.0);
        // I_x(a, b) = 1 - I_{1-x}(b, a)
        for &(a, b, x) in &[(2.0, 3.0, 0.4), (0.5, 0.5, 0.9), (5.0, 1.5, 0.2)] {
            let lhs = reg_inc_beta(a, b, x);
            let rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn inc_beta_uniform_case() {
        // I_x(1, 1) = x
        for &x in &[0.1, 0.25, 0.5, 0.75, 0.99] {
            assert!((reg_inc_beta(1.0, 1.0, x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn inc_beta_matches_quadrature() {
        // Quadrature of the beta density under t = u^2, which removes the
        // endpoint singularity whenever a >= 1/2 and x stays below 1.
        for &(a, b, x) in &[(3.5, 0.5, 0.6f64), (2.0, 2.0, 0.3), (0.5, 4.0, 0.05)] {
            let norm = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)).exp();
            let expected = norm
                * quad(
                    |u| 2.0 * u.powf(2.0 * a - 1.0) * (1.0 - u * u).powf(b - 1.0),
                    0.0,
                    x.sqrt(),
                );
            assert!(
                (reg_inc_beta(a, b, x) - expected).abs() < 1e-9,
                "a={a} b={b} x={x}"
            );
        }
    }

    #[test]
    fn normal_cdf_identity_through_erfc() {
        // Phi(x) = erfc(-x / sqrt(2)) / 2 checked against quadrature
        for &x in &[-3.0, -1.0, -0.2, 0.0, 0.5, 1.959964, 4.0] {
            let expected = 0.5 + quad(normal_pdf, 0.0, x);
            let got = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
            assert!((got - expected).abs() < 1e-12, "x = {x}");
        }
    }
}
