//! Special functions used by the basis and kernel code.
//!
//! Probability masses follow Loader's saddle-point form (Stirling remainder
//! plus deviance `bd0`), which stays accurate for orders far beyond the range
//! where a plain `lgamma` difference keeps its digits. The regularized
//! incomplete gamma and beta functions reuse those masses as their prefactor
//! and finish with the usual series / Lentz continued fractions.

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

// stirlerr(n) for n = 0, 0.5, 1, ..., 15.
#[allow(clippy::excessive_precision)]
const SFERR_HALVES: [f64; 31] = [
    0.0,
    0.153_426_409_720_027_345_291_384_8,
    0.081_061_466_795_327_258_219_670_2,
    0.054_814_121_051_917_653_896_139_0,
    0.041_340_695_955_409_294_093_822_1,
    0.033_162_873_519_936_287_485_110_48,
    0.027_677_925_684_998_339_148_789_29,
    0.023_746_163_656_297_495_971_329_20,
    0.020_790_672_103_765_093_111_522_77,
    0.018_488_450_532_673_185_230_779_34,
    0.016_644_691_189_821_192_163_194_87,
    0.015_134_973_221_917_378_873_512_55,
    0.013_876_128_823_070_747_998_745_73,
    0.012_810_465_242_920_226_924_249_86,
    0.011_896_709_945_891_770_095_055_72,
    0.011_104_559_758_206_917_326_629_91,
    0.010_411_265_261_972_096_497_478_567,
    0.009_799_416_126_158_803_298_389_475,
    0.009_255_462_182_712_732_917_728_637,
    0.008_768_700_134_139_385_462_952_823,
    0.008_330_563_433_362_871_256_469_318,
    0.007_934_114_564_314_020_547_248_100,
    0.007_573_675_487_951_840_794_972_024,
    0.007_244_554_301_320_383_179_543_912,
    0.006_942_840_107_209_529_865_664_152,
    0.006_665_247_032_707_682_442_354_394,
    0.006_408_994_188_004_207_068_439_631,
    0.006_171_712_263_039_457_647_532_867,
    0.005_951_370_112_758_847_735_624_416,
    0.005_746_216_513_010_115_682_023_589,
    0.005_554_733_551_962_801_371_038_690,
];

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln Γ(n+1) − (n + ½) ln n + n − ln √(2π)`, the Stirling remainder.
pub fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15.0 {
        let nn = n + n;
        if nn == nn.trunc() {
            return SFERR_HALVES[nn as usize];
        }
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// Deviance term `x ln(x/np) + np − x`, evaluated without cancellation.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// Log of the Poisson mass `e^{−λ} λ^k / Γ(k+1)`; `k` may be any real ≥ 0.
pub fn ln_poisson_mass(k: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0.0 {
        return -lambda;
    }
    -stirlerr(k) - bd0(k, lambda) - 0.5 * (LN_2PI + k.ln())
}

/// Log of the binomial mass `C(n,k) p^k q^{n−k}` with `q = 1 − p` supplied
/// separately; `n` and `k` may be real with `0 ≤ k ≤ n`.
pub fn ln_binomial_mass(k: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0.0 {
        if n == 0.0 {
            return 0.0;
        }
        return if p < 0.1 { n * (-p).ln_1p() } else { n * q.ln() };
    }
    if k == n {
        return if q < 0.1 { n * (-q).ln_1p() } else { n * p.ln() };
    }
    if k < 0.0 || k > n {
        return f64::NEG_INFINITY;
    }
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(k, n * p) - bd0(n - k, n * q);
    let lf = LN_2PI + k.ln() + (-k / n).ln_1p();
    lc - 0.5 * lf
}

/// Log of the negative-binomial mass `(r)_k / k! · s^k q^r`, `s = 1 − q`.
pub fn ln_neg_binomial_mass(k: f64, r: f64, q: f64, s: f64) -> f64 {
    if k == 0.0 {
        return if s < 0.1 { r * (-s).ln_1p() } else { r * q.ln() };
    }
    (r / (r + k)).ln() + ln_binomial_mass(r, r + k, q, s)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let front = ln_poisson_mass(a, x).exp();
    if front == 0.0 {
        return 0.0;
    }
    let mut ap = a;
    let mut term = 1.0;
    let mut sum = 1.0;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    (front * sum).min(1.0)
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    // e^{-x} x^a / Γ(a) = a · (Poisson mass at a)
    let front = a * ln_poisson_mass(a, x).exp();
    if front == 0.0 {
        return 0.0;
    }
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
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
    (front * h).min(1.0)
}

/// Regularized incomplete beta `I_x(a, b)`. The complement `y = 1 − x` is
/// passed explicitly so callers can supply it without cancellation.
pub fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        beta_front(a, b, x, y) * beta_cf(a, b, x) / a
    } else {
        1.0 - beta_front(b, a, y, x) * beta_cf(b, a, y) / b
    }
}

/// `x^a y^b / B(a, b)` through the binomial mass with real order `a + b`.
fn beta_front(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let ln_mass = ln_binomial_mass(a, a + b, x, y);
    ln_mass.exp() * (a * b / (a + b))
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
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
    h
}

/// `ln Γ(a + k) − ln Γ(a)`, the log of the rising factorial `(a)_k`.
pub fn ln_rising_factorial(a: f64, k: f64) -> f64 {
    ln_gamma(a + k) - ln_gamma(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn stirlerr_matches_lgamma_definition() {
        for &n in &[0.7, 3.3, 14.9, 15.5, 36.0, 100.0, 1234.5] {
            let direct = ln_gamma(n + 1.0) - (n + 0.5) * f64::ln(n) + n - LN_SQRT_2PI;
            assert!((stirlerr(n) - direct).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn poisson_mass_small_values() {
        // e^{-2} 2^3 / 6
        let expected = (-2.0f64).exp() * 8.0 / 6.0;
        assert!(rel(ln_poisson_mass(3.0, 2.0).exp(), expected) < 1e-14);
        assert_eq!(ln_poisson_mass(0.0, 0.0), 0.0);
        assert_eq!(ln_poisson_mass(2.0, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_mass_small_values() {
        // C(5,2) 0.3^2 0.7^3
        let expected = 10.0 * 0.09 * 0.343;
        assert!(rel(ln_binomial_mass(2.0, 5.0, 0.3, 0.7).exp(), expected) < 1e-14);
        assert!(rel(ln_binomial_mass(0.0, 5.0, 0.3, 0.7).exp(), 0.7f64.powi(5)) < 1e-14);
        assert!(rel(ln_binomial_mass(5.0, 5.0, 0.3, 0.7).exp(), 0.3f64.powi(5)) < 1e-14);
    }

    #[test]
    fn neg_binomial_mass_small_values() {
        // r = 2.5, k = 3: (2.5)(3.5)(4.5)/6 s^3 q^2.5
        let (q, s) = (0.4f64, 0.6f64);
        let expected = 2.5 * 3.5 * 4.5 / 6.0 * s * s * s * q.powf(2.5);
        assert!(rel(ln_neg_binomial_mass(3.0, 2.5, q, s).exp(), expected) < 1e-13);
    }

    #[test]
    fn incomplete_gamma_known_values() {
        // P(1, x) = 1 - e^{-x}
        assert!(rel(gamma_p(1.0, 0.5), 1.0 - (-0.5f64).exp()) < 1e-14);
        assert!(rel(gamma_q(1.0, 3.0), (-3.0f64).exp()) < 1e-14);
        // P(3, 2) = 1 - e^{-2}(1 + 2 + 2)
        assert!(rel(gamma_p(3.0, 2.0), 1.0 - 5.0 * (-2.0f64).exp()) < 1e-14);
        assert!((gamma_p(7.5, 4.0) + gamma_q(7.5, 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incomplete_beta_known_values() {
        // I_x(1, b) = 1 - (1-x)^b
        assert!(rel(beta_reg(1.0, 3.0, 0.2, 0.8), 1.0 - 0.8f64.powi(3)) < 1e-14);
        // I_x(a, 1) = x^a
        assert!(rel(beta_reg(4.0, 1.0, 0.7, 0.3), 0.7f64.powi(4)) < 1e-13);
        // symmetry
        let v = beta_reg(3.5, 2.25, 0.4, 0.6) + beta_reg(2.25, 3.5, 0.6, 0.4);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
