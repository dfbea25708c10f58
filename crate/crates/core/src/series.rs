//! Truncated power series algebra, reversion, Bell polynomials and the
//! log-polynomial asymptotic inverter used by the VG and GIG tails.

use serde::{Deserialize, Serialize};

use crate::accel::optimal_truncation;
use crate::error::{Error, Result};

/// Taylor coefficients about `center`; `coeffs[n]` multiplies `(x - center)^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedPowerSeries {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl TruncatedPowerSeries {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Self { center, coeffs }
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { center, coeffs }
    }

    /// The series of `x` itself about `center`.
    pub fn identity(center: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = center;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { center, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self::new(self.center, self.coeffs[..=n].to_vec())
    }

    /// Horner evaluation of the partial sum at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let h = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }

    /// Derivative of the partial sum at `x`.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let h = x - self.center;
        let mut acc = 0.0;
        for (n, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * h + n as f64 * c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::constant(self.center, 0.0, 0);
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(n, &c)| n as f64 * c).collect();
        Self::new(self.center, coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_center(self, other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|i| self.coeffs[i] + other.coeffs[i]).collect();
        Ok(Self::new(self.center, coeffs))
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

fn check_center(a: &TruncatedPowerSeries, b: &TruncatedPowerSeries) -> Result<()> {
    if a.center != b.center {
        return Err(Error::CenterMismatch(a.center, b.center));
    }
    Ok(())
}

/// Cauchy product truncated to the shorter order.
pub fn ps_mul(a: &TruncatedPowerSeries, b: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    check_center(a, b)?;
    let n = a.order().min(b.order());
    Ok(TruncatedPowerSeries::new(a.center, mul_coeffs(&a.coeffs, &b.coeffs, n)))
}

pub(crate) fn mul_coeffs(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, &ai) in a.iter().enumerate().take(order + 1) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn ps_recip(a: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let a0 = a.coeffs[0];
    if a0 == 0.0 {
        return Err(Error::BadConstantTerm(a0));
    }
    let n = a.order();
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0 / a0;
    for k in 1..=n {
        let s: f64 = (1..=k).map(|j| a.coeffs[j] * b[k - j]).sum();
        b[k] = -s / a0;
    }
    Ok(TruncatedPowerSeries::new(a.center, b))
}

pub fn ps_div(a: &TruncatedPowerSeries, b: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    ps_mul(a, &ps_recip(b)?)
}

pub fn ps_exp(a: &TruncatedPowerSeries) -> TruncatedPowerSeries {
    let n = a.order();
    let mut b = vec![0.0; n + 1];
    b[0] = a.coeffs[0].exp();
    for k in 1..=n {
        let s: f64 = (1..=k).map(|j| j as f64 * a.coeffs[j] * b[k - j]).sum();
        b[k] = s / k as f64;
    }
    TruncatedPowerSeries::new(a.center, b)
}

pub fn ps_log(a: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let a0 = a.coeffs[0];
    if !(a0 > 0.0) {
        return Err(Error::BadConstantTerm(a0));
    }
    let n = a.order();
    let mut b = vec![0.0; n + 1];
    b[0] = a0.ln();
    for k in 1..=n {
        let s: f64 = (1..k).map(|j| j as f64 * b[j] * a.coeffs[k - j]).sum();
        b[k] = (a.coeffs[k] - s / k as f64) / a0;
    }
    Ok(TruncatedPowerSeries::new(a.center, b))
}

/// `a^p`; non-integer `p` needs a positive constant term.
pub fn ps_pow_real(a: &TruncatedPowerSeries, p: f64) -> Result<TruncatedPowerSeries> {
    let a0 = a.coeffs[0];
    let integer = p.fract() == 0.0;
    if a0 == 0.0 || (!integer && a0 < 0.0) {
        return Err(Error::BadConstantTerm(a0));
    }
    let n = a.order();
    let mut b = vec![0.0; n + 1];
    b[0] = if integer && p.abs() < i32::MAX as f64 { a0.powi(p as i32) } else { a0.powf(p) };
    for k in 1..=n {
        let s: f64 = (1..=k).map(|j| (p * j as f64 - (k - j) as f64) * a.coeffs[j] * b[k - j]).sum();
        b[k] = s / (k as f64 * a0);
    }
    Ok(TruncatedPowerSeries::new(a.center, b))
}

/// Coefficients of `outer(inner(x))` about `inner.center`.
pub fn ps_compose(
    outer: &TruncatedPowerSeries,
    inner: &TruncatedPowerSeries,
) -> Result<TruncatedPowerSeries> {
    if inner.coeffs[0] != outer.center {
        return Err(Error::CenterMismatch(outer.center, inner.coeffs[0]));
    }
    let n = outer.order().min(inner.order());
    let mut h = inner.coeffs[..=n].to_vec();
    h[0] = 0.0;
    let mut acc = vec![0.0; n + 1];
    for &c in outer.coeffs[..=n].iter().rev() {
        acc = mul_coeffs(&acc, &h, n);
        acc[0] += c;
    }
    Ok(TruncatedPowerSeries::new(inner.center, acc))
}

/// Powers `h^1..h^max` of a series with zero constant term, truncated to `order`.
fn powers(h: &[f64], max: usize, order: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(max + 1);
    let mut cur = vec![0.0; order + 1];
    cur[0] = 1.0;
    out.push(cur.clone());
    for _ in 0..max {
        cur = mul_coeffs(&cur, h, order);
        out.push(cur.clone());
    }
    out
}

/// Above this order the solved Lagrange form loses digits to alternating
/// sums and the recursive form takes over.
const SOLVED_FORM_MAX_ORDER: usize = 16;

/// Compositional inverse: returns `g` about `f(center)` with `g(f(x)) = x`.
pub fn ps_revert(f: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let n = f.order();
    if n == 0 || f.coeffs[1] == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let g = if n <= SOLVED_FORM_MAX_ORDER {
        revert_lagrange_solved(f)?
    } else {
        revert_lagrange_recursive(f)?
    };
    if !g.is_finite() {
        return Err(Error::Unstable("reverted coefficients overflow".into()));
    }
    Ok(g)
}

/// Solved Lagrange form with `B_{n-1,k}` evaluated through powers of the
/// normalized tail `h(t) = sum a_{j+1}/a_1 t^j`.
pub fn revert_lagrange_solved(f: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let n = f.order();
    let a1 = *f.coeffs.get(1).ok_or(Error::VanishingCoefficient)?;
    if a1 == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let mut h = vec![0.0; n];
    for j in 1..n {
        h[j] = f.coeffs[j + 1] / a1;
    }
    let hp = powers(&h, n.saturating_sub(1), n.saturating_sub(1));
    let mut g = vec![0.0; n + 1];
    g[0] = f.center;
    g[1] = 1.0 / a1;
    let mut a1n = a1;
    for m in 2..=n {
        a1n *= a1;
        let mut s = 0.0;
        let mut binom = 1.0;
        for k in 1..m {
            binom *= (m + k - 1) as f64 / k as f64;
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            s += sign * binom * hp[k][m - 1];
        }
        g[m] = s / (m as f64 * a1n);
    }
    Ok(TruncatedPowerSeries::new(f.coeffs[0], g))
}

/// Recursive Lagrange form: `g_n a_1^n = -sum_{k<n} g_k [x^n] h^k`.
pub fn revert_lagrange_recursive(f: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let n = f.order();
    let a1 = *f.coeffs.get(1).ok_or(Error::VanishingCoefficient)?;
    if a1 == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let mut h = f.coeffs.clone();
    h[0] = 0.0;
    let hp = powers(&h, n, n);
    let mut g = vec![0.0; n + 1];
    g[0] = f.center;
    g[1] = 1.0 / a1;
    for m in 2..=n {
        let s: f64 = (1..m).map(|k| g[k] * hp[k][m]).sum();
        g[m] = -s / hp[m][m];
    }
    Ok(TruncatedPowerSeries::new(f.coeffs[0], g))
}

/// Newton iteration on `f(g(y)) = y`, doubling the correct order each step.
pub fn revert_newton(f: &TruncatedPowerSeries) -> Result<TruncatedPowerSeries> {
    let n = f.order();
    let a1 = *f.coeffs.get(1).ok_or(Error::VanishingCoefficient)?;
    if a1 == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let y0 = f.coeffs[0];
    let df = f.derivative();
    let mut g = TruncatedPowerSeries::identity(y0, n);
    g.coeffs[0] = f.center;
    g.coeffs[1] = 1.0 / a1;
    let target = TruncatedPowerSeries::identity(y0, n);
    let mut correct = 2;
    while correct <= n + 1 {
        let mut fg = ps_compose(&pad(f, n), &g)?;
        let dfg = ps_compose(&pad(&df, n), &g)?;
        for (r, t) in fg.coeffs.iter_mut().zip(&target.coeffs) {
            *r -= t;
        }
        let step = ps_div(&fg, &dfg)?;
        for (gc, s) in g.coeffs.iter_mut().zip(&step.coeffs) {
            *gc -= s;
        }
        correct *= 2;
    }
    Ok(g)
}

fn pad(s: &TruncatedPowerSeries, order: usize) -> TruncatedPowerSeries {
    let mut c = s.coeffs.clone();
    c.resize(order + 1, 0.0);
    TruncatedPowerSeries::new(s.center, c)
}

/// Multiplicities `v` (index 0 holds `v_1`) of a partition of `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionMultiplicity {
    pub v: Vec<usize>,
}

impl PartitionMultiplicity {
    pub fn parts(&self) -> usize {
        self.v.iter().sum()
    }

    pub fn weight(&self) -> usize {
        self.v.iter().enumerate().map(|(j, &m)| (j + 1) * m).sum()
    }
}

/// All partitions of `n` into exactly `k` positive parts.
pub fn partitions_with_k_parts(n: usize, k: usize) -> Vec<PartitionMultiplicity> {
    let mut out = Vec::new();
    if n == 0 || k == 0 || k > n {
        return out;
    }
    let mut v = vec![0usize; n];
    fill_parts(n, k, n - k + 1, &mut v, &mut out);
    out
}

fn fill_parts(
    rest: usize,
    k: usize,
    max_part: usize,
    v: &mut Vec<usize>,
    out: &mut Vec<PartitionMultiplicity>,
) {
    if k == 0 {
        if rest == 0 {
            out.push(PartitionMultiplicity { v: v.clone() });
        }
        return;
    }
    let hi = max_part.min(rest + 1 - k);
    let lo = rest.div_ceil(k);
    for part in (lo..=hi).rev() {
        v[part - 1] += 1;
        fill_parts(rest - part, k - 1, part, v, out);
        v[part - 1] -= 1;
    }
}

pub fn partitions(n: usize) -> Vec<PartitionMultiplicity> {
    (1..=n).flat_map(|k| partitions_with_k_parts(n, k)).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Partial exponential Bell polynomial `B_{n,k}(f_1, ..., f_{n-k+1})`; `f[0]` is `f_1`.
pub fn bell_polynomial(n: usize, k: usize, f: &[f64]) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!("Bell polynomial needs 1 <= k <= n, got n={n}, k={k}")));
    }
    if f.len() < n - k + 1 {
        return Err(Error::Insufficient { need: n - k + 1, have: f.len() });
    }
    let nf = factorial(n);
    let mut total = 0.0;
    for p in partitions_with_k_parts(n, k) {
        let mut term = nf;
        for (j, &m) in p.v.iter().enumerate() {
            if m == 0 {
                continue;
            }
            term *= f[j].powi(m as i32) / (factorial(m) * factorial(j + 1).powi(m as i32));
        }
        total += term;
    }
    Ok(total)
}

/// Literal recursive Lagrange form in derivative normalization:
/// `f[n]` is the n-th derivative at the center, result likewise.
pub fn lagrange_recursive_bell(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len() - 1;
    if n == 0 || f[1] == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let mut q = vec![0.0; n + 1];
    q[1] = 1.0 / f[1];
    for m in 2..=n {
        let mut s = 0.0;
        for k in 1..m {
            s += q[k] * bell_polynomial(m, k, &f[1..])?;
        }
        q[m] = -s / f[1].powi(m as i32);
    }
    Ok(q)
}

/// Literal solved Lagrange form in derivative normalization.
pub fn lagrange_solved_bell(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len() - 1;
    if n == 0 || f[1] == 0.0 {
        return Err(Error::VanishingCoefficient);
    }
    let scaled: Vec<f64> = (2..=n).map(|j| f[j] / (j as f64 * f[1])).collect();
    let mut q = vec![0.0; n + 1];
    q[1] = 1.0 / f[1];
    for m in 2..=n {
        let mut s = 0.0;
        for k in 1..m {
            let ratio = ((m)..(m + k)).fold(1.0, |acc, i| acc * i as f64);
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            s += sign * ratio * bell_polynomial(m - 1, k, &scaled)?;
        }
        q[m] = s / f[1].powi(m as i32);
    }
    Ok(q)
}

/// Radius of convergence from `max |q_n|^{1/n}` over the last third of indices.
pub fn cauchy_hadamard_radius(coeffs: &[f64]) -> Result<f64> {
    let n = coeffs.len();
    if coeffs.iter().skip(1).all(|&c| c == 0.0) {
        return Err(Error::Domain("all coefficients vanish".into()));
    }
    let start = (n - n / 3).max(1).min(n - 1);
    let mut best = 0.0f64;
    let mut used = 0;
    for (i, &c) in coeffs.iter().enumerate().skip(start) {
        if c != 0.0 && c.is_finite() {
            best = best.max(c.abs().powf(1.0 / i as f64));
            used += 1;
        }
    }
    if used == 0 {
        for (i, &c) in coeffs.iter().enumerate().skip(1) {
            if c != 0.0 && c.is_finite() {
                best = best.max(c.abs().powf(1.0 / i as f64));
            }
        }
    }
    if best == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / best)
}

/// `y + sum_n P_n(ln y) / y^n`; row `n` of `poly_coeffs` holds `P_n` in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPolySeries {
    pub poly_coeffs: Vec<Vec<f64>>,
}

impl LogPolySeries {
    pub fn n_max(&self) -> usize {
        self.poly_coeffs.len().saturating_sub(1)
    }

    pub fn eval_poly(&self, n: usize, xi: f64) -> f64 {
        self.poly_coeffs[n].iter().rev().fold(0.0, |acc, &c| acc * xi + c)
    }

    /// Individual terms `P_n(ln y) / y^n`.
    pub fn terms(&self, y: f64) -> Vec<f64> {
        let xi = y.ln();
        let mut yp = 1.0;
        let mut out = Vec::with_capacity(self.poly_coeffs.len());
        for n in 0..self.poly_coeffs.len() {
            out.push(self.eval_poly(n, xi) / yp);
            yp *= y;
        }
        out
    }

    /// Coefficients `e_n` of `sum_n P_n(xi) w^n` at fixed `xi`, for rational summation in `w = 1/y`.
    pub fn w_coeffs(&self, xi: f64) -> Vec<f64> {
        (0..self.poly_coeffs.len()).map(|n| self.eval_poly(n, xi)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    Optimal,
    Fixed(usize),
}

pub fn logpoly_eval(s: &LogPolySeries, y: f64, mode: TruncationMode) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(format!("log-polynomial expansion needs y > 1, got {y}")));
    }
    if s.poly_coeffs.is_empty() {
        return Ok(y);
    }
    let terms = s.terms(y);
    let sum = match mode {
        TruncationMode::Optimal => {
            if terms.len() < 2 {
                terms[0]
            } else {
                optimal_truncation(&terms).1
            }
        }
        TruncationMode::Fixed(n) => terms.iter().take(n + 1).sum(),
    };
    Ok(y + sum)
}

/// Asymptotic inverse of `x ~ y + A ln x + B ln D(1/x)` with `D(z) = sum b_k z^k`.
pub fn salvy_asymptotic_inverse(a: f64, b: f64, d: &[f64], n_max: usize) -> Result<LogPolySeries> {
    if d.len() < n_max + 1 {
        return Err(Error::Insufficient { need: n_max + 1, have: d.len() });
    }
    if !(d[0] > 0.0) {
        return Err(Error::BadConstantTerm(d[0]));
    }
    let c = salvy_constants(a, b, &d[..=n_max], n_max)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    rows.push(vec![c[0], a]);
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut p = vec![0.0; n + 1];
        for (i, &pc) in prev.iter().enumerate().skip(1) {
            p[i] += a * pc;
        }
        if n > 1 {
            for (i, &pc) in prev.iter().enumerate() {
                p[i + 1] -= a * (n - 1) as f64 * pc / (i + 1) as f64;
            }
        }
        p[0] += c[n];
        rows.push(p);
    }
    Ok(LogPolySeries { poly_coeffs: rows })
}

/// Constants `c_0..c_n` from the fixed point
/// `u = A ln(1 + t u) + B ln D(t / (1 + t u))` on series in `t`.
fn salvy_constants(a: f64, b: f64, d: &[f64], n: usize) -> Result<Vec<f64>> {
    let dser = TruncatedPowerSeries::new(0.0, pad_vec(d, n));
    let mut u = TruncatedPowerSeries::constant(0.0, d[0].ln(), n);
    let t = TruncatedPowerSeries::identity(0.0, n);
    for _ in 0..=n {
        let one_tu = ps_mul(&t, &u)?.add_const(1.0);
        let w = ps_div(&t, &one_tu)?;
        let dw = ps_compose(&dser, &w)?;
        u = ps_log(&one_tu)?.scale(a).add(&ps_log(&dw)?.scale(b))?;
    }
    Ok(u.coeffs)
}

fn pad_vec(v: &[f64], order: usize) -> Vec<f64> {
    let mut c = v[..v.len().min(order + 1)].to_vec();
    c.resize(order + 1, 0.0);
    c
}

/// Numeric solve of `x = y + A ln x + B ln D(1/x)` by Newton; the oracle for
/// [`salvy_asymptotic_inverse`].
pub fn salvy_numeric_inverse(a: f64, b: f64, d: &[f64], y: f64) -> Result<f64> {
    let dval = |z: f64| d.iter().rev().fold(0.0, |acc, &c| acc * z + c);
    let dder = |z: f64| {
        d.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &c)| acc * z + k as f64 * c)
    };
    let mut x = y.max(1.0);
    for _ in 0..200 {
        let z = 1.0 / x;
        let dv = dval(z);
        if !(dv > 0.0) {
            return Err(Error::Domain("D(1/x) not positive".into()));
        }
        let r = x - y - a * x.ln() - b * dv.ln();
        let dr = 1.0 - a / x + b * dder(z) * z * z / dv;
        let step = r / dr;
        x -= step;
        if step.abs() <= 1e-15 * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::Unstable("Newton iteration did not settle".into()))
}
