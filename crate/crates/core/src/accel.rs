//! Sequence acceleration and rational/Chebyshev approximant construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedPowerSeries;

/// Levin u-transform (beta = 1) over the whole table; returns the estimate only.
pub fn levin_u(partial_sums: &[f64]) -> Result<f64> {
    levin_u_estimate(partial_sums).map(|(v, _)| v)
}

/// Levin u-transform with an error estimate `|L_k - L_{k-1}|`.
///
/// Columns whose denominator sum cancels by more than eight digits are
/// rejected and the last stable column is reported.
pub fn levin_u_estimate(partial_sums: &[f64]) -> Result<(f64, f64)> {
    let n = partial_sums.len();
    if n < 2 {
        return Err(Error::Insufficient { need: 2, have: n });
    }
    let terms: Vec<f64> = (0..n)
        .map(|i| if i == 0 { partial_sums[0] } else { partial_sums[i] - partial_sums[i - 1] })
        .collect();
    let last = partial_sums[n - 1];
    // a sequence that has already settled needs no transform
    let first_zero = (1..n).rev().take_while(|&i| terms[i] == 0.0).last();
    if let Some(i) = first_zero {
        if n - i >= 2 || i == n - 1 && terms[..n - 1].iter().skip(1).all(|&t| t == 0.0) {
            return Ok((last, 0.0));
        }
    }
    if terms.iter().skip(1).any(|&t| t == 0.0) {
        return Err(Error::Unstable("zero term in Levin remainder estimate".into()));
    }
    let beta = 1.0;
    let mut best: Option<(f64, f64)> = None;
    let mut prev: Option<f64> = None;
    for k in 1..n {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut den_abs = 0.0;
        let mut binom = 1.0;
        let base = beta + k as f64;
        for j in 0..=k {
            if j > 0 {
                binom *= (k - j + 1) as f64 / j as f64;
            }
            let w = (beta + j as f64) * terms[j];
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binom * ((beta + j as f64) / base).powi(k as i32 - 1) / w;
            num += c * partial_sums[j];
            den += c;
            den_abs += c.abs();
        }
        if den == 0.0 || !(den_abs / den.abs() < 1e8) {
            if best.is_some() {
                break;
            }
            continue;
        }
        let value = num / den;
        if !value.is_finite() {
            break;
        }
        let err = prev.map_or(f64::INFINITY, |p: f64| (value - p).abs());
        best = Some((value, err));
        prev = Some(value);
    }
    best.ok_or_else(|| Error::Unstable("Levin table has no stable column".into()))
}

/// Wynn epsilon algorithm; returns the deepest even-column entry.
pub fn wynn_epsilon(partial_sums: &[f64]) -> Result<f64> {
    let n = partial_sums.len();
    if n < 2 {
        return Err(Error::Insufficient { need: 2, have: n });
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = partial_sums.to_vec();
    let mut result = *partial_sums.last().unwrap();
    for k in 1..n {
        let len = cur.len() - 1;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // converged exactly along this diagonal
                return Ok(if k % 2 == 1 { cur[i + 1] } else { result });
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if !next.iter().all(|v| v.is_finite()) {
            break;
        }
        if k % 2 == 0 {
            result = *next.last().unwrap();
        }
        prev = cur;
        cur = next;
        if cur.len() < 2 {
            break;
        }
    }
    Ok(result)
}

/// Cut before the smallest-magnitude term (kept inclusive); ties go to the shorter sum.
/// Returns the index of the first omitted term and the truncated sum.
pub fn optimal_truncation(terms: &[f64]) -> (usize, f64) {
    if terms.is_empty() {
        return (0, 0.0);
    }
    let mut m = 0;
    let mut smallest = terms[0].abs();
    for (k, t) in terms.iter().enumerate().skip(1) {
        if t.abs() < smallest * (1.0 - 1e-12) {
            smallest = t.abs();
            m = k;
        }
    }
    let sum = terms[..=m].iter().sum();
    (m + 1, sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum Basis {
    /// Powers of `(v - center) / scale`.
    Monomial { center: f64, scale: f64 },
    /// Chebyshev polynomials of `(2v - lo - hi) / (hi - lo)`.
    Chebyshev { lo: f64, hi: f64 },
}

impl Basis {
    fn local(&self, v: f64) -> f64 {
        match *self {
            Basis::Monomial { center, scale } => (v - center) / scale,
            Basis::Chebyshev { lo, hi } => (2.0 * v - lo - hi) / (hi - lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalApproximant {
    #[serde(flatten)]
    pub basis: Basis,
    pub numer: Vec<f64>,
    pub denom: Vec<f64>,
    pub interval: (f64, f64),
}

impl RationalApproximant {
    pub fn degrees(&self) -> (usize, usize) {
        (self.numer.len() - 1, self.denom.len() - 1)
    }

    pub fn eval(&self, v: f64) -> f64 {
        let t = self.basis.local(v);
        match self.basis {
            Basis::Monomial { .. } => horner(&self.numer, t) / horner(&self.denom, t),
            Basis::Chebyshev { .. } => clenshaw(&self.numer, t) / clenshaw(&self.denom, t),
        }
    }

    fn denom_at(&self, v: f64) -> f64 {
        let t = self.basis.local(v);
        match self.basis {
            Basis::Monomial { .. } => horner(&self.denom, t),
            Basis::Chebyshev { .. } => clenshaw(&self.denom, t),
        }
    }

    /// True when the denominator changes sign or nearly vanishes on the interval.
    pub fn has_defect(&self) -> bool {
        if self.denom.len() == 1 {
            return false;
        }
        let (lo, hi) = self.interval;
        let samples = 400;
        let mut min_abs = f64::INFINITY;
        let mut max_abs = 0.0f64;
        let mut sign = 0.0;
        for i in 0..=samples {
            let v = lo + (hi - lo) * i as f64 / samples as f64;
            let q = self.denom_at(v);
            if !q.is_finite() {
                return true;
            }
            if sign == 0.0 {
                sign = q.signum();
            } else if q.signum() != sign {
                return true;
            }
            min_abs = min_abs.min(q.abs());
            max_abs = max_abs.max(q.abs());
        }
        !(min_abs > 1e-10 * max_abs)
    }
}

pub fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Clenshaw summation of `sum_k c_k T_k(x)` (no halving of `c_0`).
pub fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}

fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let scale = a.amax();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let lu = a.full_piv_lu();
    let x = lu.solve(&b).ok_or(Error::Singular)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Padé approximant `[m/n]` in the unscaled variable `v - center`.
pub fn pade_from_taylor(ts: &TruncatedPowerSeries, m: usize, n: usize) -> Result<RationalApproximant> {
    let c = ts.center;
    pade_scaled(ts, m, n, 1.0, (c - 1.0, c + 1.0))
}

/// Padé approximant in the scaled variable `(v - center) / scale`; the
/// validity interval is used for defect detection only.
pub fn pade_scaled(
    ts: &TruncatedPowerSeries,
    m: usize,
    n: usize,
    scale: f64,
    interval: (f64, f64),
) -> Result<RationalApproximant> {
    if ts.order() < m + n {
        return Err(Error::Insufficient { need: m + n + 1, have: ts.coeffs.len() });
    }
    let mut c = Vec::with_capacity(m + n + 1);
    let mut s = 1.0;
    for k in 0..=m + n {
        c.push(ts.coeffs[k] * s);
        s *= scale;
    }
    let coef = |k: isize| if k < 0 { 0.0 } else { c[k as usize] };
    let mut denom = vec![1.0; n + 1];
    if n > 0 {
        let a = DMatrix::from_fn(n, n, |r, j| coef((m + r + 1) as isize - (j + 1) as isize));
        let b = DVector::from_fn(n, |r, _| -coef((m + r + 1) as isize));
        let x = solve(a, b)?;
        denom[1..].copy_from_slice(x.as_slice());
    }
    let numer = (0..=m)
        .map(|k| (0..=k.min(n)).map(|j| denom[j] * c[k - j]).sum())
        .collect();
    Ok(RationalApproximant {
        basis: Basis::Monomial { center: ts.center, scale },
        numer,
        denom,
        interval,
    })
}

/// Padé with defect handling: on a defect or singular system retry `(m+1, n-1)`.
pub fn pade_checked(
    ts: &TruncatedPowerSeries,
    m: usize,
    n: usize,
    scale: f64,
    interval: (f64, f64),
) -> Result<RationalApproximant> {
    let (mut m, mut n) = (m, n);
    loop {
        match pade_scaled(ts, m, n, scale, interval) {
            Ok(r) if !r.has_defect() => return Ok(r),
            Ok(_) | Err(Error::Singular) if n > 0 => {
                m += 1;
                n -= 1;
            }
            Ok(r) => return Ok(r),
            Err(e) => return Err(e),
        }
    }
}

/// Chebyshev coefficients `g~_k` on `[lo, hi]` with the halved-`T_0` convention
/// `g = g~_0/2 + sum_{k>=1} g~_k T_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSeriesRep {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
    /// Magnitude of the first neglected coefficient.
    pub error_estimate: f64,
}

impl ChebyshevSeriesRep {
    pub fn to_x(&self, v: f64) -> f64 {
        (2.0 * v - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn eval(&self, v: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_x(v)) - 0.5 * self.coeffs[0]
    }

    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.coeffs.len() - 1);
        let err = self.coeffs.get(k + 1).map_or(self.error_estimate, |c| c.abs());
        Self { lo: self.lo, hi: self.hi, coeffs: self.coeffs[..=k].to_vec(), error_estimate: err }
    }

    /// Coefficients in the plain basis `sum c_k T_k`.
    pub fn plain(&self) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        c[0] *= 0.5;
        c
    }

    pub fn as_rational(&self) -> RationalApproximant {
        RationalApproximant {
            basis: Basis::Chebyshev { lo: self.lo, hi: self.hi },
            numer: self.plain(),
            denom: vec![1.0],
            interval: (self.lo, self.hi),
        }
    }
}

/// `theta_{j,k}` of the monomial-to-Chebyshev relation `x^j = sum'_k theta_{j,k} T_k`.
pub fn thacher_theta(j: usize, k: usize) -> f64 {
    if k > j || (j - k) % 2 == 1 {
        return 0.0;
    }
    let r = (j - k) / 2;
    let mut binom = 1.0;
    for i in 0..r {
        binom = binom * (j - i) as f64 / (i + 1) as f64;
    }
    2f64.powi(1 - j as i32) * binom
}

/// Chebyshev coefficients on `[lo, hi]` from Taylor coefficients about the
/// interval midpoint; each inner sum is Levin-accelerated when that improves
/// on the raw partial sum.
pub fn chebyshev_from_taylor(
    ts: &TruncatedPowerSeries,
    interval: (f64, f64),
    k_max: usize,
) -> Result<ChebyshevSeriesRep> {
    let (lo, hi) = interval;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let ts = if (ts.center - mid).abs() > 1e-15 * (1.0 + mid.abs()) {
        taylor_shift(ts, mid)
    } else {
        ts.clone()
    };
    let radius = crate::series::cauchy_hadamard_radius(&ts.coeffs).unwrap_or(f64::INFINITY);
    if radius < 0.5 * half {
        return Err(Error::Domain(format!(
            "interval half-width {half} exceeds estimated radius {radius}"
        )));
    }
    let n = ts.order();
    let mut g = Vec::with_capacity(n + 1);
    let mut s = 1.0;
    for k in 0..=n {
        g.push(ts.coeffs[k] * s);
        s *= half;
    }
    let mut coeffs = Vec::with_capacity(k_max + 2);
    for k in 0..=(k_max + 1).min(n) {
        coeffs.push(theta_sum(&g, k));
    }
    let error_estimate = if coeffs.len() > k_max + 1 {
        coeffs.pop().unwrap().abs()
    } else {
        f64::NAN
    };
    while coeffs.len() < k_max + 1 {
        coeffs.push(0.0);
    }
    Ok(ChebyshevSeriesRep { lo, hi, coeffs, error_estimate })
}

fn theta_sum(g: &[f64], k: usize) -> f64 {
    let mut partial = Vec::new();
    let mut s = 0.0;
    let mut j = k;
    while j < g.len() {
        s += g[j] * thacher_theta(j, k);
        partial.push(s);
        j += 2;
    }
    if partial.len() < 8 {
        return s;
    }
    let raw_err = (partial[partial.len() - 1] - partial[partial.len() - 2]).abs();
    if raw_err <= 1e-16 * s.abs() {
        return s;
    }
    match levin_u_estimate(&partial) {
        Ok((v, e)) if e < raw_err && v.is_finite() => v,
        _ => s,
    }
}

/// First-kind Chebyshev nodes on `[lo, hi]`, in increasing order.
pub fn chebyshev_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|j| {
            let t = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        })
        .collect()
}

/// Chebyshev interpolation coefficients from values at [`chebyshev_nodes`],
/// keeping terms through `T_{k_max}`.
pub fn chebyshev_from_values(lo: f64, hi: f64, values: &[f64], k_max: usize) -> ChebyshevSeriesRep {
    let n = values.len();
    let coeff = |k: usize| -> f64 {
        let s: f64 = values
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let j = n - 1 - i;
                f * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos()
            })
            .sum();
        2.0 * s / n as f64
    };
    let keep = k_max.min(n - 1);
    let coeffs: Vec<f64> = (0..=keep).map(coeff).collect();
    let error_estimate = if keep + 1 < n { coeff(keep + 1).abs() } else { f64::NAN };
    ChebyshevSeriesRep { lo, hi, coeffs, error_estimate }
}

/// Re-expansion of the partial-sum polynomial about a new center.
pub fn taylor_shift(ts: &TruncatedPowerSeries, new_center: f64) -> TruncatedPowerSeries {
    let d = new_center - ts.center;
    let mut c = ts.coeffs.clone();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            c[j] += d * c[j + 1];
        }
    }
    TruncatedPowerSeries::new(new_center, c)
}

/// Linearized Chebyshev-Padé `[m/n]`: `b g - a` has vanishing Chebyshev
/// coefficients through `T_{m+n}`, with `b_0 = 1`. Coefficients beyond those
/// supplied are treated as zero.
pub fn chebyshev_pade(cheb: &ChebyshevSeriesRep, m: usize, n: usize) -> Result<RationalApproximant> {
    if cheb.coeffs.len() < m + n + 1 {
        return Err(Error::Insufficient { need: m + n + 1, have: cheb.coeffs.len() });
    }
    let g = cheb.plain();
    let gc = |i: usize| g.get(i).copied().unwrap_or(0.0);
    // [T_j g]_k in the plain basis
    let prod = |j: usize, k: usize| -> f64 {
        if j == 0 {
            return gc(k);
        }
        let mut v = 0.5 * gc(j + k);
        if k >= j {
            v += 0.5 * gc(k - j);
        }
        if j >= k && k > 0 {
            v += 0.5 * gc(j - k);
        }
        v
    };
    let mut b = vec![1.0; n + 1];
    if n > 0 {
        let a = DMatrix::from_fn(n, n, |r, c| prod(c + 1, m + 1 + r));
        let rhs = DVector::from_fn(n, |r, _| -prod(0, m + 1 + r));
        let x = solve(a, rhs)?;
        b[1..].copy_from_slice(x.as_slice());
    }
    let numer = (0..=m).map(|k| (0..=n).map(|j| b[j] * prod(j, k)).sum()).collect();
    let r = RationalApproximant {
        basis: Basis::Chebyshev { lo: cheb.lo, hi: cheb.hi },
        numer,
        denom: b,
        interval: (cheb.lo, cheb.hi),
    };
    Ok(r)
}

/// Chebyshev-Padé with the same `(m+1, n-1)` defect fallback as [`pade_checked`].
pub fn chebyshev_pade_checked(cheb: &ChebyshevSeriesRep, m: usize, n: usize) -> Result<RationalApproximant> {
    let (mut m, mut n) = (m, n);
    loop {
        match chebyshev_pade(cheb, m, n) {
            Ok(r) if !r.has_defect() => return Ok(r),
            Ok(_) | Err(Error::Singular) if n > 0 => {
                m += 1;
                n -= 1;
            }
            Ok(r) => return Ok(r),
            Err(e) => return Err(e),
        }
    }
}
