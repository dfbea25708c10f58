//! Adaptive Gauss-Kronrod quadrature and safeguarded root finding.

use std::collections::BinaryHeap;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel with its embedded 7-point Gauss error estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive integration on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    for _ in 0..4000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, val: v2, err: e2 });
    }
    // recompute from panels to shed accumulated rounding
    let (mut t, mut e) = (0.0, 0.0);
    for p in heap.iter() {
        t += p.val;
        e += p.err;
    }
    if !t.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
    }
    if e > 1e3 * abs_tol.max(rel_tol * t.abs()) && e > 1e-10 {
        return Err(Error::Quadrature(format!("error estimate {e:e} on [{a}, {b}]")));
    }
    Ok((t, e))
}

/// Integral from `a` to `+inf` (`dir = 1`) or `-inf` (`dir = -1`) in growing chunks.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: &F, a: f64, dir: f64, step: f64, abs_tol: f64) -> Result<f64> {
    let mut lo = a;
    let mut len = step;
    let mut total = 0.0;
    let mut quiet = 0;
    for _ in 0..200 {
        let hi = lo + dir * len;
        let (p, q) = if dir > 0.0 { (lo, hi) } else { (hi, lo) };
        let (v, _) = integrate(f, p, q, abs_tol * 0.1, 1e-15)?;
        total += v;
        if v.abs() <= abs_tol * 1e-3 + 1e-17 * total.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        len *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::Quadrature("tail integral did not settle".into()))
}

/// Safeguarded Newton on `g(x) = 0` with a bracketing interval `[a, b]`
/// where `g(a) < 0 < g(b)`; `dg` must be positive.
pub fn newton_bracketed<G, D>(g: G, dg: D, mut a: f64, mut b: f64, x0: f64, tol_g: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let mut x = if x0 > a && x0 < b { x0 } else { 0.5 * (a + b) };
    let mut best = (f64::INFINITY, x);
    for _ in 0..200 {
        let gx = g(x)?;
        if gx.abs() < best.0 {
            best = (gx.abs(), x);
        }
        if gx.abs() <= tol_g {
            return Ok(x);
        }
        if gx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        if (b - a) <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(best.1);
        }
        let d = dg(x);
        let mut xn = x - gx / d;
        if !(xn > a && xn < b) || !xn.is_finite() {
            xn = 0.5 * (a + b);
        }
        if xn == x {
            return Ok(best.1);
        }
        x = xn;
    }
    Ok(best.1)
}

/// Plain bisection on a sign change.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ga = g(a);
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let gm = g(m);
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
