//! Special functions backing the inference statistics: complementary error
//! function, normal CDF and quantile, regularized incomplete gamma (for the
//! chi-square tail), and the Kolmogorov distribution tail.
//!
//! Self-contained so the summary never depends on external statistical
//! tables. erfc is routed through the regularized incomplete gamma, which is
//! needed for the likelihood-ratio test anyway.

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;
const FPMIN: f64 = f64::MIN_POSITIVE / EPS;

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEF.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Lower regularized incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper regularized incomplete gamma Q(a, x) by Lentz continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Lower regularized incomplete gamma P(a, x), a > 0, x >= 0.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p domain: a={a}, x={x}");
    if x == 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a={a}, x={x}");
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        1.0 + gamma_p(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Two-sided normal tail probability 2(1 - Phi(|z|)), computed directly
/// through erfc to keep precision in the far tail.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile. Rational initial guess refined by two Halley
/// steps against `normal_cdf`.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile domain: p={p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Chi-square survival function with `dof` degrees of freedom. `dof == 0`
/// is the point mass at zero.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if dof == 0 {
        return if x > 0.0 { 0.0 } else { 1.0 };
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Tail of the asymptotic Kolmogorov distribution,
/// `Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2)`, summed until the term
/// drops below 1e-16 (at least 100 terms available).
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=1000usize {
        let term = (-2.0 * (j * j) as f64 * t * t).exp();
        sum += sign * term;
        if term < 1e-16 && j >= 100 {
            break;
        }
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_values() {
        // 30-digit references.
        let cases = [
            (0.0, 1.0),
            (0.5, 0.479500122186953462317253346108),
            (1.0, 0.157299207050285130658779364917),
            (2.0, 0.00467773498104726583793074363275),
            (5.0, 1.53745979442803485018834348538e-12),
            (-1.0, 1.84270079294971486934122063508),
        ];
        for (x, expect) in cases {
            let got = erfc(x);
            assert!(
                (got - expect).abs() <= 1e-14 * expect.abs().max(1e-300),
                "erfc({x}) = {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn normal_cdf_basic() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let p = normal_cdf(1.959963984540054);
        assert!((p - 0.975).abs() < 1e-14);
        for z in [-6.0, -2.5, -0.3, 0.7, 3.1] {
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quantile_reference_and_roundtrip() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.95996398454005423).abs() < 1e-13);
        assert!((normal_quantile(0.995) - 2.57582930354890076).abs() < 1e-13);
        assert!((normal_quantile(0.9999999) - 5.19933758219281693).abs() < 1e-10);
        let mut z = -8.0;
        while z <= 8.0 {
            let back = normal_quantile(normal_cdf(z));
            assert!(
                (back - z).abs() <= 1e-12 * z.abs().max(1.0),
                "roundtrip at z={z}: {back}"
            );
            z += 0.37;
        }
    }

    #[test]
    fn chi_square_reference_values() {
        assert!((chi_square_sf(3.841458820694124, 1) - 0.05).abs() < 1e-12);
        assert!((chi_square_sf(5.991464547107979, 2) - 0.05).abs() < 1e-12);
        assert!((chi_square_sf(10.0, 5) - 0.0752352461465121787).abs() < 1e-13);
        assert_eq!(chi_square_sf(0.0, 3), 1.0);
        assert_eq!(chi_square_sf(0.0, 0), 1.0);
        assert_eq!(chi_square_sf(1.0, 0), 0.0);
    }

    #[test]
    fn kolmogorov_reference_values() {
        let cases = [
            (0.5, 0.963945243664875094),
            (0.828, 0.499329621193800836),
            (1.0, 0.269999671677354521),
            (1.36, 0.0494858767553779099),
            (2.0, 0.000670925255779695347),
        ];
        for (t, expect) in cases {
            let got = kolmogorov_sf(t);
            assert!(
                (got - expect).abs() < 1e-12,
                "kolmogorov_sf({t}) = {got}, expected {expect}"
            );
        }
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(8.0) >= 0.0);
    }

    #[test]
    fn gamma_fn_consistency() {
        // P + Q = 1 across series/continued-fraction crossover.
        for a in [0.5, 1.0, 2.5, 10.0] {
            for x in [0.01, 0.5, a, a + 0.9, a + 1.1, 5.0 * a] {
                let s = gamma_p(a, x) + gamma_q(a, x);
                assert!((s - 1.0).abs() < 1e-13, "P+Q at a={a}, x={x}: {s}");
            }
        }
        // ln_gamma against exact factorials.
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }
}
