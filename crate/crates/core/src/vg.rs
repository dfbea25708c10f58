//! Variance gamma distribution: Leibniz/Faà di Bruno derivatives of the
//! reciprocal density, Taylor coefficients of the quantile, CDF tail
//! expansion with its Salvy inversion, base distribution and recycling.
//!
//! Standardized coordinates are `y = x - mu`.

use std::sync::OnceLock;

use crate::dist::{BaseDistribution, DistributionParams, LeftBranch, LocScale, RightBranch, Side, StdDensity, VGParams};
use crate::error::{Error, Result};
use crate::series::{
    bell_polynomial, logpoly_eval, partitions, ps_compose, salvy_asymptotic_inverse, LogPolySeries, PartitionMultiplicity,
    TruncatedPowerSeries, TruncationMode,
};
use crate::special::{bessel_k_asymp_coeff, ln_bessel_k, ln_gamma};

const MAX_CACHED_ORDER: usize = 30;

fn partition_cache(n: usize) -> Option<&'static [PartitionMultiplicity]> {
    static CACHE: OnceLock<Vec<Vec<PartitionMultiplicity>>> = OnceLock::new();
    let table = CACHE.get_or_init(|| (0..=MAX_CACHED_ORDER).map(partitions).collect());
    table.get(n).map(|v| v.as_slice())
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceGamma {
    pub params: VGParams,
    pub gamma: f64,
    pub nu: f64,
    /// `ln` of the density constant `gamma^{2 lambda} / ((2 alpha)^{lambda - 1/2} sqrt(pi) Gamma(lambda))`.
    pub ln_const: f64,
}

/// Derivatives `g^(n)(x0)` of `g = 1/f` with the factor tables they are built from,
/// each stored relative to the factor itself (`a^(n)/a`, `b^(n)/b`, `c^(n)/c`).
#[derive(Debug, Clone, PartialEq)]
pub struct VGDerivativeTable {
    pub x0: f64,
    pub g: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl VarianceGamma {
    pub fn new(params: VGParams) -> Result<Self> {
        params.validate()?;
        let VGParams { lambda, alpha, beta, .. } = params;
        let gamma = (alpha * alpha - beta * beta).sqrt();
        let nu = lambda - 0.5;
        let ln_const = 2.0 * lambda * gamma.ln() - nu * (2.0 * alpha).ln() - 0.5 * std::f64::consts::PI.ln() - ln_gamma(lambda);
        Ok(Self { params, gamma, nu, ln_const })
    }

    pub fn reflected(&self) -> Self {
        let mut p = self.params;
        p.beta = -p.beta;
        Self { params: p, ..*self }
    }

    pub fn into_family(self) -> Result<LocScale<Self>> {
        let mu = self.params.mu;
        LocScale::new(self, mu, 1.0, DistributionParams::Vg(self.params))
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let VGParams { alpha, beta, .. } = self.params;
        if y == 0.0 {
            if self.nu > 0.0 {
                // |y|^nu K_nu(alpha |y|) -> Gamma(nu) 2^{nu-1} alpha^{-nu}
                return self.ln_const + ln_gamma(self.nu) + (self.nu - 1.0) * std::f64::consts::LN_2 - self.nu * alpha.ln();
            }
            return f64::INFINITY;
        }
        let ay = y.abs();
        match ln_bessel_k(self.nu, alpha * ay) {
            Ok(lk) => self.ln_const + self.nu * ay.ln() + lk + beta * y,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// `g^(n)(x0)` for `n = 0..=order` by the Leibniz rule over `a = e^{-beta y}`,
    /// `b = |y|^{1/2 - lambda}`, `c = 1 / K_{lambda - 1/2}(alpha |y|)`.
    pub fn g_derivatives(&self, x0: f64, order: usize) -> Result<VGDerivativeTable> {
        if x0 == 0.0 {
            return Err(Error::Domain("VG derivatives need x0 != 0".into()));
        }
        let VGParams { lambda, alpha, beta, .. } = self.params;
        let nu = self.nu;
        let sgn = x0.signum();
        let z = alpha * x0.abs();
        let a: Vec<f64> = (0..=order).map(|n| (-beta).powi(n as i32)).collect();
        let mut b = vec![1.0; order + 1];
        for n in 1..=order {
            b[n] = b[n - 1] * (0.5 - lambda - (n - 1) as f64) / x0;
        }
        // c2^(j) / c2 from the Bessel derivative identity, in log space
        let lk0 = ln_bessel_k(nu, z)?;
        let mut r = vec![1.0; order + 1];
        for j in 1..=order {
            let mut s = 0.0;
            let mut binom = 1.0;
            for k in 0..=j {
                if k > 0 {
                    binom *= (j - k + 1) as f64 / k as f64;
                }
                let order_k = nu - (2.0 * k as f64 - j as f64);
                s += binom * (ln_bessel_k(order_k, z)? - lk0).exp();
            }
            r[j] = (-0.5 * sgn * alpha).powi(j as i32) * s;
        }
        // Faà di Bruno for c = c1(c2), c1(t) = 1/t; relative to c = 1/c2
        let mut c = vec![1.0; order + 1];
        for n in 1..=order {
            c[n] = faa_di_bruno_reciprocal(n, &r)?;
        }
        let mut g = vec![0.0; order + 1];
        let ln_g0 = -self.ln_pdf(x0);
        let g0 = ln_g0.exp();
        for n in 0..=order {
            let mut s = 0.0;
            let mut bnk = 1.0;
            for k in 0..=n {
                if k > 0 {
                    bnk *= (n - k + 1) as f64 / k as f64;
                }
                let mut bkj = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        bkj *= (k - j + 1) as f64 / j as f64;
                    }
                    s += bnk * bkj * a[n - k] * b[j] * c[k - j];
                }
            }
            g[n] = g0 * s;
        }
        Ok(VGDerivativeTable { x0, g, a, b, c })
    }

    /// Taylor coefficients of the standardized quantile about `u0` with `Q(u0) = x0`,
    /// from `q_{n+1} = [g o Q]_n / (n + 1)`.
    pub fn taylor_coeffs(&self, u0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        let table = self.g_derivatives(x0, n.saturating_sub(1))?;
        let gt = derivatives_to_taylor(&table.g, x0);
        Ok(solve_quantile_ode(&gt, None, x0, u0, n))
    }

    /// `b_0..b_k` of `1 - F ~ C x^{lambda-1} e^{-(alpha-beta) x} sum b_k x^{-k}`.
    pub fn cdf_tail_coeffs(&self, k_max: usize) -> Vec<f64> {
        let VGParams { lambda, alpha, beta, .. } = self.params;
        let s = alpha - beta;
        (0..=k_max)
            .map(|k| {
                let mut total = 0.0;
                for j in 0..=k {
                    let mut prod = 1.0;
                    for i in 0..j {
                        prod *= lambda - k as f64 + i as f64;
                    }
                    total += s.powi(-(j as i32 + 1)) * alpha.powi(-((k - j) as i32)) * prod * bessel_k_asymp_coeff(self.nu, k - j);
                }
                total
            })
            .collect()
    }

    /// `ln C` with `C = (2 alpha)^{-lambda} gamma^{2 lambda} / Gamma(lambda)`.
    pub fn ln_tail_const(&self) -> f64 {
        let VGParams { lambda, alpha, .. } = self.params;
        -lambda * (2.0 * alpha).ln() + 2.0 * lambda * self.gamma.ln() - ln_gamma(lambda)
    }

    /// Right tail expansion `x ~ y + sum P_n(ln y) / y^n`, `y = -ln v / (alpha - beta)`,
    /// `v = (1 - u) / C`; the left side is the right side of the reflected distribution.
    pub fn tail(&self, side: Side, n: usize) -> Result<LogTail> {
        let d = match side {
            Side::Right => *self,
            Side::Left => self.reflected(),
        };
        let VGParams { lambda, alpha, beta, .. } = d.params;
        let s = alpha - beta;
        let b = d.cdf_tail_coeffs(n);
        let series = salvy_asymptotic_inverse((lambda - 1.0) / s, 1.0 / s, &b, n)?;
        Ok(LogTail {
            side,
            series,
            ln_c: d.ln_tail_const(),
            rate: s,
            reciprocal: false,
        })
    }

    /// Two-sided exponential base at `0` with rates `alpha +- beta`; `p_minus = F(0)`.
    pub fn base(&self, p_minus: f64) -> BaseDistribution {
        let VGParams { alpha, beta, .. } = self.params;
        BaseDistribution {
            cutoff: 0.0,
            p_m: p_minus,
            left: LeftBranch::Exp { p: p_minus, r: alpha + beta },
            right: RightBranch { p: 1.0 - p_minus, r: alpha - beta },
        }
    }

    /// Taylor coefficients of `A` about `z0` with `A(z0) = x0`, solving
    /// `A' = f_B(z) g(A)` by the Leibniz product of the two Taylor series.
    pub fn recycle_coeffs(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        let VGParams { alpha, beta, .. } = self.params;
        let (amp, rate) = match side {
            Side::Left => match base.left {
                LeftBranch::Exp { p, .. } => (p * (alpha + beta) * ((alpha + beta) * z0).exp(), alpha + beta),
                LeftBranch::InvExp { .. } => return Err(Error::Domain("VG base has an exponential left branch".into())),
            },
            Side::Right => {
                let r = alpha - beta;
                (base.right.p * r * (-r * z0).exp(), -r)
            }
        };
        let mut fb = vec![0.0; n];
        let mut t = amp;
        for (k, v) in fb.iter_mut().enumerate() {
            *v = t;
            t *= rate / (k + 1) as f64;
        }
        let table = self.g_derivatives(x0, n.saturating_sub(1))?;
        let gt = derivatives_to_taylor(&table.g, x0);
        Ok(solve_quantile_ode(&gt, Some(&fb), x0, z0, n))
    }
}

/// Relative Faà di Bruno sum for `d^n/dy^n [1 / c2]` divided by `1 / c2`, given `r_j = c2^(j) / c2`.
fn faa_di_bruno_reciprocal(n: usize, r: &[f64]) -> Result<f64> {
    let owned;
    let parts: &[PartitionMultiplicity] = match partition_cache(n) {
        Some(p) => p,
        None => {
            owned = partitions(n);
            &owned
        }
    };
    let fact = |m: usize| (1..=m).fold(1.0, |acc, i| acc * i as f64);
    let nf = fact(n);
    let mut total = 0.0;
    for p in parts {
        let k = p.parts();
        let mut term = nf * if k % 2 == 0 { 1.0 } else { -1.0 } * fact(k);
        for (j, &m) in p.v.iter().enumerate() {
            if m > 0 {
                term *= (r[j + 1] / fact(j + 1)).powi(m as i32) / fact(m);
            }
        }
        total += term;
    }
    Ok(total)
}

/// The same Faà di Bruno sum through partial Bell polynomials, `sum_k c1^(k) B_{n,k}(c2', c2'', ...)`.
pub fn faa_di_bruno_bell(n: usize, outer: &[f64], inner: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for k in 1..=n {
        s += outer[k] * bell_polynomial(n, k, &inner[1..])?;
    }
    Ok(s)
}

fn derivatives_to_taylor(d: &[f64], center: f64) -> TruncatedPowerSeries {
    let mut fact = 1.0;
    let c = d
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect();
    TruncatedPowerSeries::new(center, c)
}

/// Solve `Q' = w(t) G(Q)` for Taylor coefficients about `t0` with `Q(t0) = x0`,
/// where `G` is given by its Taylor series about `x0` and `w` (if any) by its
/// series about `t0`.
pub(crate) fn solve_quantile_ode(gt: &TruncatedPowerSeries, w: Option<&[f64]>, x0: f64, t0: f64, n: usize) -> TruncatedPowerSeries {
    let mut q = vec![0.0; n + 1];
    q[0] = x0;
    for m in 0..n {
        let inner = TruncatedPowerSeries::new(t0, q[..=m].to_vec());
        let outer = TruncatedPowerSeries::new(x0, gt.coeffs[..=m.min(gt.order())].to_vec());
        let comp = ps_compose(&outer, &inner).expect("centers agree by construction");
        let mut val = 0.0;
        match w {
            None => val = comp.coeffs.get(m).copied().unwrap_or(0.0),
            Some(wc) => {
                for k in 0..=m {
                    val += wc[k] * comp.coeffs.get(m - k).copied().unwrap_or(0.0);
                }
            }
        }
        q[m + 1] = val / (m + 1) as f64;
    }
    TruncatedPowerSeries::new(t0, q)
}

/// Log-polynomial tail `x ~ y + sum P_n(ln y) / y^n` with `y = -(ln t - ln C) / rate`
/// for tail probability `t`; the left side negates (or, for reciprocal tails, inverts).
#[derive(Debug, Clone, PartialEq)]
pub struct LogTail {
    pub side: Side,
    pub series: LogPolySeries,
    pub ln_c: f64,
    pub rate: f64,
    pub reciprocal: bool,
}

impl LogTail {
    pub fn tail_prob(&self, u: f64) -> f64 {
        match self.side {
            Side::Right => 1.0 - u,
            Side::Left => u,
        }
    }

    pub fn y(&self, t: f64) -> f64 {
        -(t.ln() - self.ln_c) / self.rate
    }

    /// Expansion value before the side transform.
    pub fn raw(&self, u: f64, mode: TruncationMode) -> Result<f64> {
        logpoly_eval(&self.series, self.y(self.tail_prob(u)), mode)
    }

    pub fn finish(&self, raw: f64) -> f64 {
        match (self.side, self.reciprocal) {
            (Side::Right, _) => raw,
            (Side::Left, false) => -raw,
            (Side::Left, true) => 1.0 / raw,
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        Ok(self.finish(self.raw(u, TruncationMode::Optimal)?))
    }
}

impl StdDensity for VarianceGamma {
    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn mode(&self) -> f64 {
        0.0
    }

    fn decay(&self) -> f64 {
        let VGParams { lambda, alpha, beta, .. } = self.params;
        (1.0 / (alpha - beta.abs())) * lambda.max(1.0)
    }

    fn kink(&self) -> Option<f64> {
        Some(0.0)
    }

    fn guess(&self, u: f64) -> Option<f64> {
        let (d, t, sign) = if u > 0.5 { (*self, 1.0 - u, 1.0) } else { (self.reflected(), u, -1.0) };
        let VGParams { lambda, alpha, beta, .. } = d.params;
        let s = alpha - beta;
        let y = -(t.ln() - d.ln_tail_const()) / s;
        if y <= 1.0 {
            return None;
        }
        let x = y + (lambda - 1.0) / s * y.ln() - s.ln() / s;
        Some(sign * x.max(0.0))
    }
}
