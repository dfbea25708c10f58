//! Modified Bessel function of the second kind for real order, gamma-family
//! functions and a few normal-distribution helpers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LN_MAX: f64 = 709.78;

/// `ln K_v(z)` by trapezoidal summation of `(1/2) int exp(-z cosh t + |v| t) dt`
/// over the real line, centered on the peak of the exponent.
pub fn ln_bessel_k(v: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Bessel K needs z > 0, got {z}")));
    }
    if !v.is_finite() {
        return Err(Error::Domain(format!("Bessel K needs a finite order, got {v}")));
    }
    let v = v.abs();
    if (v - 0.5).fract() == 0.0 && v < 200.0 {
        return Ok(ln_bessel_k_half_integer((v - 0.5) as usize, z));
    }
    let phi = |t: f64| -> f64 {
        // z cosh t computed as z e^t / 2 + z e^-t / 2 without overflow
        let c = if t.abs() > 700.0 { f64::INFINITY } else { t.cosh() };
        -z * c + v * t
    };
    let t_star = (v / z).asinh();
    let peak = phi(t_star);
    let curv = z * t_star.cosh();
    let sigma = 1.0 / curv.sqrt();
    let h = (0.5 * sigma).min(0.2);
    let mut sum = 1.0;
    for dir in [-1.0, 1.0] {
        let mut k = 1;
        loop {
            let t = t_star + dir * h * k as f64;
            let e = phi(t) - peak;
            if e < -40.0 {
                break;
            }
            sum += e.exp();
            k += 1;
            if k > 200_000 {
                return Err(Error::Unstable("Bessel K quadrature did not terminate".into()));
            }
        }
    }
    Ok(peak + (h * sum).ln() - std::f64::consts::LN_2)
}

/// Closed form for `K_{n+1/2}`: a finite sum of positive terms, summed in log space.
fn ln_bessel_k_half_integer(n: usize, z: f64) -> f64 {
    let mut logs = Vec::with_capacity(n + 1);
    let mut lt = 0.0;
    logs.push(lt);
    for k in 1..=n {
        lt += (((n + k) * (n - k + 1)) as f64 / (k as f64 * 2.0 * z)).ln();
        logs.push(lt);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    0.5 * (PI / (2.0 * z)).ln() - z + top + s.ln()
}

/// `K_v(z)`; underflow returns 0, overflow is an error.
pub fn bessel_k(v: f64, z: f64) -> Result<f64> {
    let l = ln_bessel_k(v, z)?;
    if l > LN_MAX {
        return Err(Error::Overflow(format!("K_{v}({z}) exceeds the double range")));
    }
    Ok(l.exp())
}

/// `n`-th derivative in `z`: `(-1/2)^n sum_k C(n,k) K_{v-(2k-n)}(z)`.
pub fn bessel_k_deriv(v: f64, z: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return bessel_k(v, z);
    }
    let lns: Vec<f64> = (0..=n)
        .map(|k| ln_bessel_k(v - (2.0 * k as f64 - n as f64), z))
        .collect::<Result<_>>()?;
    let top = lns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut binom = 1.0;
    let mut s = 0.0;
    for (k, l) in lns.iter().enumerate() {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        s += binom * (l - top).exp();
    }
    let ln_mag = top + s.ln() - n as f64 * std::f64::consts::LN_2;
    if ln_mag > LN_MAX {
        return Err(Error::Overflow(format!("derivative {n} of K_{v}({z})")));
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln_mag.exp())
}

/// `a_k(v) = prod_{j=1..k} (4v^2 - (2j-1)^2) / (k! 8^k)`.
pub fn bessel_k_asymp_coeff(v: f64, k: usize) -> f64 {
    let mu = 4.0 * v * v;
    let mut a = 1.0;
    for j in 1..=k {
        let odd = (2 * j - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * j as f64);
    }
    a
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    if x > 0.0 && x == x.floor() && x <= 21.0 {
        return (1..x as usize).fold(1.0, |acc, i| acc * i as f64);
    }
    let sign = if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * ln_gamma(x).exp()
}

fn lower_series(a: f64, z: f64) -> f64 {
    // sum z^n / (a (a+1) ... (a+n)), times z^a e^-z
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..10_000 {
        term *= z / (a + n as f64);
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (a * z.ln() - z).exp()
}

fn upper_cf(a: f64, z: f64) -> Result<f64> {
    // modified Lentz on the Legendre continued fraction
    let tiny = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok((a * z.ln() - z).exp() * h);
        }
    }
    Err(Error::Unstable(format!("incomplete gamma continued fraction a={a}, z={z}")))
}

/// Lower incomplete gamma `gamma(a, z)` for `a > 0`.
pub fn lower_incomplete_gamma(a: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || z < 0.0 {
        return Err(Error::Domain(format!("lower incomplete gamma needs a > 0, z >= 0 (a={a}, z={z})")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z < a + 1.0 {
        Ok(lower_series(a, z))
    } else {
        Ok(gamma(a) - upper_cf(a, z)?)
    }
}

/// Upper incomplete gamma `Gamma(a, z)` for real `a` and `z > 0`.
pub fn upper_incomplete_gamma(a: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("upper incomplete gamma needs z > 0, got {z}")));
    }
    if a > 0.0 {
        if z < a + 1.0 {
            return Ok(gamma(a) - lower_series(a, z));
        }
        return upper_cf(a, z);
    }
    if z >= 1.0 {
        return upper_cf(a, z);
    }
    // step down from a positive order: Gamma(a,z) = (Gamma(a+1,z) - z^a e^-z) / a
    let frac = a - a.floor();
    if frac == 0.0 {
        // Gamma(0, z) = E_1(z) by its power series, then recur downwards
        let mut e1 = -0.577_215_664_901_532_9 - z.ln();
        let mut term = 1.0;
        for k in 1..200 {
            term *= -z / k as f64;
            e1 -= term / k as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        let mut g = e1;
        let mut order = 0.0;
        while order > a {
            order -= 1.0;
            g = (g - (order * z.ln() - z).exp()) / order;
        }
        return Ok(g);
    }
    let mut order = if frac == 0.0 { 1.0 } else { frac };
    let mut g = upper_incomplete_gamma(order, z)?;
    while order - 1.0 >= a - 1e-12 {
        order -= 1.0;
        g = (g - (order * z.ln() - z).exp()) / order;
    }
    Ok(g)
}

/// Regularized upper incomplete gamma `Q(a, z)` for `a > 0`.
pub fn gamma_q(a: f64, z: f64) -> Result<f64> {
    if z <= 0.0 {
        return Ok(1.0);
    }
    if z < a + 1.0 {
        Ok(1.0 - lower_series(a, z) / gamma(a))
    } else {
        Ok(upper_cf(a, z)? / gamma(a))
    }
}

/// Complementary error function via `Gamma(1/2, x^2) / sqrt(pi)`.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    let z = x * x;
    if z < 1.5 {
        1.0 - lower_series(0.5, z) / PI.sqrt()
    } else {
        upper_cf(0.5, z).map(|g| g / PI.sqrt()).unwrap_or(0.0)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by Newton refinement of a logistic-style start.
pub fn normal_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let t = if u < 0.5 { u } else { 1.0 - u };
    let s = (-2.0 * t.ln()).sqrt();
    let mut x = s - (2.515_517 + 0.802_853 * s + 0.010_328 * s * s)
        / (1.0 + 1.432_788 * s + 0.189_269 * s * s + 0.001_308 * s * s * s);
    if u < 0.5 {
        x = -x;
    }
    for _ in 0..8 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let err = if u < 0.5 { normal_cdf(x) - u } else { (1.0 - u) - normal_cdf(-x) };
        let step = err / pdf;
        x -= step;
        if step.abs() < 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
