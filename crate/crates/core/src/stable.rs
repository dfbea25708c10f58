//! Alpha-stable distribution in the type (B) parametrization: conversions,
//! the two CDF series, accelerated CDF evaluation, quantile series by
//! reversion and a dispatcher between series and root finding.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::accel::{levin_u_estimate, optimal_truncation};
use crate::dist::{newton_log, DistributionParams, Family, Parametrization, StableParams};
use crate::error::{Error, Result};
use crate::quad::{golden_max, integrate};
use crate::series::{cauchy_hadamard_radius, ps_revert, TruncatedPowerSeries};
use crate::special::{ln_gamma, normal_cdf};

/// Convert between `P1` and `P2`; `P2 -> P1` applies the closed-form relations,
/// `P1 -> P2` inverts the skewness relation.
pub fn stable_convert(p: &StableParams, to: Parametrization) -> Result<StableParams> {
    p.validate()?;
    if p.parametrization == to {
        return Ok(*p);
    }
    let a = p.alpha;
    if a == 1.0 {
        return Err(Error::Domain("parametrization conversion is degenerate at alpha = 1".into()));
    }
    let k = p.k();
    match to {
        Parametrization::P1 => {
            let h = 0.5 * PI * k * p.beta;
            Ok(StableParams {
                alpha: a,
                beta: if a == 2.0 { 0.0 } else { (h.tan() / (FRAC_PI_2 * a).tan()).clamp(-1.0, 1.0) },
                mu: p.mu * p.sigma,
                sigma: (h.cos() * p.sigma).powf(1.0 / a),
                parametrization: Parametrization::P1,
            })
        }
        Parametrization::P2 => {
            let beta2 = if a == 2.0 || k == 0.0 {
                0.0
            } else {
                ((p.beta * (FRAC_PI_2 * a).tan()).atan() / (FRAC_PI_2 * k)).clamp(-1.0, 1.0)
            };
            let h = 0.5 * PI * k * beta2;
            let sigma2 = p.sigma.powf(a) / h.cos();
            Ok(StableParams {
                alpha: a,
                beta: beta2,
                mu: p.mu / sigma2,
                sigma: sigma2,
                parametrization: Parametrization::P2,
            })
        }
    }
}

/// Coefficients `f_n / n!` of the small-`x` CDF series and `f~_n / n!` of the
/// series in `x^{-alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSeriesPair {
    pub central: TruncatedPowerSeries,
    pub tail: TruncatedPowerSeries,
    pub u0: f64,
}

/// Standard (`mu2 = 0`, `sigma2 = 1`) stable law with tail index `alpha` and skewness `beta2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdStable {
    pub alpha: f64,
    pub beta: f64,
}

const SERIES_TERMS: usize = 400;
const CANCELLATION_LIMIT: f64 = 1e2;

impl StdStable {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        StableParams { alpha, beta, mu: 0.0, sigma: 1.0, parametrization: Parametrization::P2 }.validate()?;
        Ok(Self { alpha, beta })
    }

    pub fn reflected(&self) -> Self {
        Self { alpha: self.alpha, beta: -self.beta }
    }

    pub fn k(&self) -> f64 {
        StableParams { alpha: self.alpha, beta: self.beta, mu: 0.0, sigma: 1.0, parametrization: Parametrization::P2 }.k()
    }

    /// Zero quantile location `F(0)`.
    pub fn u0(&self) -> f64 {
        0.5 * (1.0 - self.beta * self.k() / self.alpha)
    }

    /// `rho = 1 - u0`.
    pub fn rho(&self) -> f64 {
        0.5 * (1.0 + self.beta * self.k() / self.alpha)
    }

    /// `f_n / n!` for `n >= 1`.
    fn central_coeff(&self, n: usize) -> f64 {
        let nf = n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let mag = (ln_gamma(nf / self.alpha + 1.0) - ln_gamma(nf + 1.0)).exp() / (PI * nf);
        sign * mag * (PI * nf * self.rho()).sin()
    }

    /// `f~_n / n!` for `n >= 1`.
    fn tail_coeff(&self, n: usize) -> f64 {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mag = (ln_gamma(self.alpha * nf + 1.0) - ln_gamma(nf + 1.0)).exp() / (self.alpha * PI * nf);
        sign * mag * (0.5 * nf * PI * (self.alpha + self.beta * self.k())).sin()
    }

    pub fn cdf_coeffs(&self, n: usize) -> StableSeriesPair {
        let u0 = self.u0();
        let mut c = vec![u0];
        let mut t = vec![1.0];
        for k in 1..=n {
            c.push(self.central_coeff(k));
            t.push(self.tail_coeff(k));
        }
        StableSeriesPair {
            central: TruncatedPowerSeries::new(0.0, c),
            tail: TruncatedPowerSeries::new(0.0, t),
            u0,
        }
    }

    /// `(F(x), 1 - F(x))`, each accurate in relative terms on its own side.
    pub fn cdf_sf(&self, x: f64) -> Result<(f64, f64)> {
        if x.is_nan() {
            return Err(Error::Domain("stable CDF at NaN".into()));
        }
        if x < 0.0 {
            let (c, s) = self.reflected().cdf_sf(-x)?;
            return Ok((s, c));
        }
        if x == 0.0 {
            return Ok((self.u0(), 1.0 - self.u0()));
        }
        if x == f64::INFINITY {
            return Ok((1.0, 0.0));
        }
        if self.alpha == 2.0 {
            return Ok((normal_cdf(x / 2f64.sqrt()), normal_cdf(-x / 2f64.sqrt())));
        }
        if self.alpha == 1.0 {
            let s = (1.0 / x).atan() / PI;
            return Ok((1.0 - s, s));
        }
        if self.alpha > 1.0 {
            if let Some(v) = self.central_sum(x) {
                return Ok((v, 1.0 - v));
            }
            if let Some(s) = self.tail_sum_asymptotic(x) {
                return Ok((1.0 - s, s));
            }
        } else {
            if let Some(s) = self.tail_sum_convergent(x) {
                return Ok((1.0 - s, s));
            }
            if let Some(v) = self.central_sum_asymptotic(x) {
                return Ok((v, 1.0 - v));
            }
        }
        self.cdf_sf_integral(x)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sf(x)?.0)
    }

    /// Convergent small-`x` series for `alpha > 1`, Levin-accelerated when the
    /// partial sums have not settled; `None` when cancellation would cost digits.
    fn central_sum(&self, x: f64) -> Option<f64> {
        let mut partial = Vec::with_capacity(64);
        let mut s = self.u0();
        let mut xp = 1.0;
        let mut biggest = s.abs();
        partial.push(s);
        for n in 1..=SERIES_TERMS {
            xp *= x;
            let t = self.central_coeff(n) * xp;
            if !t.is_finite() {
                return None;
            }
            biggest = biggest.max(t.abs());
            s += t;
            partial.push(s);
            if biggest > CANCELLATION_LIMIT {
                return None;
            }
            if n > 4 && t.abs() <= 1e-17 * s.abs() && (self.central_coeff(n + 1) * xp * x).abs() <= 1e-17 * s.abs() {
                return Some(s);
            }
            if n == 48 {
                if let Ok((v, err)) = levin_u_estimate(&partial) {
                    if err <= 1e-15 && v.is_finite() {
                        return Some(v);
                    }
                }
            }
        }
        None
    }

    /// Convergent series in `x^{-alpha}` for `alpha < 1`, returning `1 - F`.
    fn tail_sum_convergent(&self, x: f64) -> Option<f64> {
        let w = x.powf(-self.alpha);
        let mut s = 0.0;
        let mut wp = 1.0;
        let mut biggest: f64 = 0.0;
        for n in 1..=SERIES_TERMS {
            wp *= w;
            let t = -self.tail_coeff(n) * wp;
            if !t.is_finite() {
                return None;
            }
            biggest = biggest.max(t.abs());
            s += t;
            if biggest > CANCELLATION_LIMIT {
                return None;
            }
            if n > 4 && t.abs() <= 1e-17 * s.abs() {
                return if s > 0.0 && biggest <= 1e3 * s { Some(s) } else { None };
            }
        }
        None
    }

    /// Asymptotic series in `x^{-alpha}` for `alpha > 1`, truncated before the
    /// smallest term of the envelope (the sine factor can vanish by accident); returns `1 - F`.
    fn tail_sum_asymptotic(&self, x: f64) -> Option<f64> {
        let lw = -self.alpha * x.ln();
        let env = |n: usize| {
            let nf = n as f64;
            ln_gamma(self.alpha * nf + 1.0) - ln_gamma(nf + 1.0) - (self.alpha * PI * nf).ln() + nf * lw
        };
        let cut = envelope_cut(env, 120)?;
        let s: f64 = (1..cut).map(|n| -self.tail_coeff(n) * (n as f64 * lw).exp()).sum();
        (s > 0.0 && env(cut).exp() <= 1e-15 * s).then_some(s)
    }

    /// Asymptotic small-`x` series for `alpha < 1`, cut by its envelope.
    fn central_sum_asymptotic(&self, x: f64) -> Option<f64> {
        let lx = x.ln();
        let env = |n: usize| {
            let nf = n as f64;
            ln_gamma(nf / self.alpha + 1.0) - ln_gamma(nf + 1.0) - (PI * nf).ln() + nf * lx
        };
        let cut = envelope_cut(env, 120)?;
        let s: f64 = (1..cut).map(|n| self.central_coeff(n) * x.powi(n as i32)).sum();
        (env(cut).exp() <= 1e-16).then_some(self.u0() + s)
    }

    /// Quantities of the integral representation for `x > 0`:
    /// `theta0`, the scale between the two parametrizations, and `ln V(theta)`.
    fn theta0(&self) -> f64 {
        FRAC_PI_2 * self.k() * self.beta / self.alpha
    }

    fn p1_scale(&self) -> f64 {
        (FRAC_PI_2 * self.k() * self.beta).cos().powf(1.0 / self.alpha)
    }

    fn ln_v(&self, theta: f64) -> f64 {
        let a = self.alpha;
        let t0 = self.theta0();
        let s = (a * (t0 + theta)).sin();
        let c = theta.cos();
        let c2 = (a * t0 + (a - 1.0) * theta).cos();
        if !(s > 0.0) {
            return if a > 1.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if !(c > 0.0) || !(c2 > 0.0) {
            return if a > 1.0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        (a * t0).cos().ln() / (a - 1.0) + a / (a - 1.0) * (c.ln() - s.ln()) + c2.ln() - c.ln()
    }

    /// `(F, 1 - F)` for `x > 0` from the single-integral representation.
    pub fn cdf_sf_integral(&self, x: f64) -> Result<(f64, f64)> {
        let a = self.alpha;
        let x1 = x / self.p1_scale();
        let ln_g = a / (a - 1.0) * x1.ln();
        let t0 = self.theta0();
        let (lo, hi) = (-t0, FRAC_PI_2);
        if a > 1.0 {
            let f = |th: f64| (-(ln_g + self.ln_v(th)).exp()).exp();
            let (v, _) = integrate(&f, lo, hi, 1e-300, 1e-14)?;
            let s = v / PI;
            Ok((1.0 - s, s))
        } else {
            let f = |th: f64| -(-(ln_g + self.ln_v(th)).exp()).exp_m1();
            let (v, _) = integrate(&f, lo, hi, 1e-300, 1e-14)?;
            let s = v / PI;
            Ok((1.0 - s, s))
        }
    }

    /// Density from the integral representation for `x > 0`.
    fn pdf_integral(&self, x: f64) -> Result<f64> {
        let a = self.alpha;
        let sc = self.p1_scale();
        let x1 = x / sc;
        let ln_g = a / (a - 1.0) * x1.ln();
        let f = |th: f64| {
            let lv = self.ln_v(th);
            let e = ln_g + lv;
            if e == f64::INFINITY || lv == f64::NEG_INFINITY {
                0.0
            } else {
                (lv - e.exp()).exp()
            }
        };
        let (v, _) = integrate(&f, -self.theta0(), FRAC_PI_2, 1e-300, 1e-13)?;
        Ok(a * x1.powf(1.0 / (a - 1.0)) / (PI * (a - 1.0).abs()) * v / sc)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return self.reflected().pdf(-x);
        }
        if self.alpha == 2.0 {
            return (-0.25 * x * x).exp() / (2.0 * PI.sqrt());
        }
        if self.alpha == 1.0 {
            return 1.0 / (PI * (1.0 + x * x));
        }
        // derivative of the small-x series where it converges without cancellation
        let mut s = self.central_coeff(1);
        let mut xp = 1.0;
        let mut biggest = s.abs();
        let mut settled = x == 0.0;
        if !settled {
            for n in 2..=SERIES_TERMS {
                xp *= x;
                let t = n as f64 * self.central_coeff(n) * xp;
                biggest = biggest.max(t.abs());
                s += t;
                if biggest > CANCELLATION_LIMIT || !t.is_finite() {
                    break;
                }
                if n > 4 && t.abs() <= 1e-17 * s.abs() {
                    settled = self.alpha > 1.0 || t.abs() <= 1e-16;
                    break;
                }
            }
        }
        if settled && s > 0.0 {
            return s;
        }
        self.pdf_integral(x).unwrap_or(f64::NAN)
    }

    /// Root-finding quantile on the accelerated CDF.
    pub fn quantile_oracle(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile needs 0 < u < 1, got {u}")));
        }
        let u0 = self.u0();
        if u == u0 {
            return Ok(0.0);
        }
        if u < u0 {
            return Ok(-self.reflected().quantile_oracle(1.0 - u)?);
        }
        let target = (1.0 - u).ln();
        let g = |x: f64| -> Result<(f64, f64)> {
            let (_, sf) = self.cdf_sf(x)?;
            Ok((target - sf.ln(), self.pdf(x) / sf))
        };
        let guess = self.tail_guess(1.0 - u);
        let mut b = guess.max(1e-3);
        let mut k = 0;
        while !(g(b)?.0 > 0.0) {
            b *= 2.0;
            k += 1;
            if k > 200 {
                return Err(Error::Bracket(format!("no upper bracket for u={u}")));
            }
        }
        let mut a = 0.0;
        let mut t = b;
        for _ in 0..60 {
            t *= 0.5;
            if g(t)?.0 < 0.0 {
                a = t;
                break;
            }
        }
        let x0 = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
        newton_log(g, a, b, x0, 1e-14)
    }

    /// Leading-order right-tail estimate for tail probability `s`.
    fn tail_guess(&self, s: f64) -> f64 {
        if self.alpha == 2.0 {
            return 2f64.sqrt() * crate::special::normal_quantile(1.0 - s).max(0.0);
        }
        let c = -self.tail_coeff(1);
        if c > 0.0 {
            (c / s).powf(1.0 / self.alpha)
        } else {
            1.0
        }
    }

    /// Quantile series about `u0` by reversion of the small-`x` CDF series, valid for `u > u0`.
    pub fn quantile_central(&self, n: usize) -> Result<TruncatedPowerSeries> {
        let pair = self.cdf_coeffs(n);
        ps_revert(&pair.central)
    }

    /// Series of `G^{-1}` about `u = 1`, where `G(y) = sum f~_n y^n / n!` and `Q = [G^{-1}(u)]^{-1/alpha}`.
    pub fn quantile_tail(&self, n: usize) -> Result<StableTailSeries> {
        let pair = self.cdf_coeffs(n);
        if pair.tail.coeffs[1].abs() < 1e-14 {
            return Err(Error::Domain("degenerate tail series".into()));
        }
        Ok(StableTailSeries { inverse: ps_revert(&pair.tail)?, alpha: self.alpha })
    }
}

/// Index of the smallest log-envelope value over `1..=max`, if the minimum is interior.
fn envelope_cut<E: Fn(usize) -> f64>(env: E, max: usize) -> Option<usize> {
    let mut best = (f64::INFINITY, 0);
    for n in 1..=max {
        let e = env(n);
        if e < best.0 {
            best = (e, n);
        }
    }
    (best.1 > 1).then_some(best.1)
}

/// `Q(u) = [G^{-1}(u)]^{-1/alpha}` with `G^{-1}` as a series in `u - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableTailSeries {
    pub inverse: TruncatedPowerSeries,
    pub alpha: f64,
}

impl StableTailSeries {
    /// Optimally truncated evaluation; returns the value and the smallest retained term relative to the sum.
    pub fn eval_with_error(&self, u: f64) -> (f64, f64) {
        let h = u - 1.0;
        let mut hp = 1.0;
        let terms: Vec<f64> = self
            .inverse
            .coeffs
            .iter()
            .skip(1)
            .map(|&c| {
                hp *= h;
                c * hp
            })
            .collect();
        let (cut, y) = optimal_truncation(&terms);
        let rel = terms[cut - 1].abs() / y.abs();
        (y.powf(-1.0 / self.alpha), rel)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_with_error(u).0
    }
}

pub const CENTRAL_ORDER: usize = 80;
pub const TAIL_ORDER: usize = 40;
/// Central series used within this fraction of its estimated radius.
pub const CENTRAL_FRACTION: f64 = 0.7;
/// Tail series used for `u` at or above this level.
pub const TAIL_START: f64 = 0.995;

/// Quantile series for one side of the dispatcher (`u > u0` of some standard law).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSide {
    pub u0: f64,
    pub central: Option<TruncatedPowerSeries>,
    pub radius: f64,
    pub tail: Option<StableTailSeries>,
}

impl StableSide {
    pub fn new(d: &StdStable) -> Self {
        let central = if d.alpha > 1.0 { d.quantile_central(CENTRAL_ORDER).ok() } else { None };
        let radius = central
            .as_ref()
            .and_then(|c| cauchy_hadamard_radius(&c.coeffs).ok())
            .unwrap_or(0.0);
        let tail = d.quantile_tail(TAIL_ORDER).ok();
        Self { u0: d.u0(), central, radius, tail }
    }

    /// Series value when the dispatcher's rules accept it.
    pub fn try_eval(&self, u: f64) -> Option<f64> {
        if let Some(c) = &self.central {
            let h = u - self.u0;
            if h.abs() <= CENTRAL_FRACTION * self.radius {
                let last = c.coeffs[c.order()] * h.powi(c.order() as i32);
                let v = c.eval(u);
                if last.abs() <= 1e-15 * v.abs().max(1e-3) {
                    return Some(v);
                }
            }
        }
        if let Some(t) = &self.tail {
            if u >= TAIL_START {
                let (v, rel) = t.eval_with_error(u);
                if rel <= 1e-13 && v.is_finite() {
                    return Some(v);
                }
            }
        }
        None
    }
}

/// Stable law in user coordinates: `X = sigma2 mu2 + sigma2^{1/alpha} X_std` (type B).
#[derive(Debug, Clone)]
pub struct Stable {
    pub params: StableParams,
    pub std: StdStable,
    pub loc: f64,
    pub scale: f64,
    pub right: StableSide,
    pub left: StableSide,
    mode: f64,
    mode_u: f64,
}

impl Stable {
    pub fn new(params: StableParams) -> Result<Self> {
        params.validate()?;
        let p2 = stable_convert(&params, Parametrization::P2)?;
        let std = StdStable::new(p2.alpha, p2.beta)?;
        let loc = p2.sigma * p2.mu;
        let scale = p2.sigma.powf(1.0 / p2.alpha);
        let right = StableSide::new(&std);
        let left = StableSide::new(&std.reflected());
        let lo = std.quantile_oracle(0.25)?;
        let hi = std.quantile_oracle(0.75)?;
        let m = golden_max(|x| std.pdf(x), lo, hi, 1e-10);
        let mode_u = std.cdf(m)?;
        Ok(Self { params, std, loc, scale, right, left, mode: m, mode_u })
    }

    fn to_std(&self, x: f64) -> f64 {
        (x - self.loc) / self.scale
    }

    /// Dispatcher: reflection to `u > u0`, central series near `u0`, tail series
    /// near `1`, root finding elsewhere.
    pub fn quantile_dispatch(&self, u: f64) -> Result<f64> {
        Ok(self.loc + self.scale * self.std_quantile_dispatch(u)?)
    }

    pub fn std_quantile_dispatch(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile needs 0 < u < 1, got {u}")));
        }
        let u0 = self.std.u0();
        if u == u0 {
            return Ok(0.0);
        }
        if u > u0 {
            match self.right.try_eval(u) {
                Some(v) => Ok(v),
                None => self.std.quantile_oracle(u),
            }
        } else {
            match self.left.try_eval(1.0 - u) {
                Some(v) => Ok(-v),
                None => Ok(-self.std.reflected().quantile_oracle(1.0 - u)?),
            }
        }
    }
}

impl Family for Stable {
    fn params(&self) -> DistributionParams {
        DistributionParams::Stable(self.params)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.std.pdf(self.to_std(x)) / self.scale
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        self.std.cdf(self.to_std(x))
    }

    fn sf(&self, x: f64) -> Result<f64> {
        Ok(self.std.cdf_sf(self.to_std(x))?.1)
    }

    fn cdf_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.cdf(x)).collect()
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        Ok(self.loc + self.scale * self.std.quantile_oracle(u)?)
    }

    fn mode(&self) -> f64 {
        self.loc + self.scale * self.mode
    }

    fn mode_quantile(&self) -> f64 {
        self.mode_u
    }
}
