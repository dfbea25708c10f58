//! Generalized inverse Gaussian distribution with `eta = 1`: Taylor
//! recursion, right tail expansion, the reciprocal identity for the left
//! tail, an inverse-exponential/exponential base and recycling solutions.

use crate::dist::{BaseDistribution, DistributionParams, GIGParams, LeftBranch, LocScale, RightBranch, Side, StdDensity};
use crate::error::{Error, Result};
use crate::series::{salvy_asymptotic_inverse, TruncatedPowerSeries};
use crate::special::ln_bessel_k;
use crate::vg::LogTail;

#[derive(Debug, Clone, Copy)]
pub struct Gig {
    pub params: GIGParams,
    /// `ln K_lambda(omega)`.
    pub ln_k: f64,
}

impl Gig {
    pub fn new(params: GIGParams) -> Result<Self> {
        params.validate()?;
        let ln_k = ln_bessel_k(params.lambda, params.omega)?;
        Ok(Self { params, ln_k })
    }

    /// The standardized distribution with `lambda -> -lambda`, the law of `1/X`.
    pub fn reciprocal(&self) -> Self {
        let mut p = self.params;
        p.lambda = -p.lambda;
        // K is even in its order
        Self { params: p, ..*self }
    }

    pub fn into_family(self) -> Result<LocScale<Self>> {
        LocScale::new(self, 0.0, self.params.eta, DistributionParams::Gig(self.params))
    }

    pub fn k(&self) -> f64 {
        self.ln_k.exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let GIGParams { lambda, omega, .. } = self.params;
        (lambda - 1.0) * x.ln() - 0.5 * omega * (x + 1.0 / x) - std::f64::consts::LN_2 - self.ln_k
    }

    /// Taylor coefficients of the standardized quantile about `u0`, `Q(u0) = x0`.
    pub fn taylor_coeffs(&self, u0: f64, x0: f64, n: usize) -> TruncatedPowerSeries {
        let GIGParams { lambda, omega, .. } = self.params;
        let kk = self.k();
        let mut q = vec![0.0; n + 1];
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        q[0] = x0;
        a[0] = 1.0 / x0;
        b[0] = (0.5 * omega * (a[0] + q[0])).exp();
        c[0] = x0.powf(1.0 - lambda);
        let unit = lambda == 1.0;
        for m in 1..=n {
            q[m] = if unit {
                2.0 / m as f64 * kk * b[m - 1]
            } else {
                let s: f64 = (0..m).map(|i| b[i] * c[m - i - 1]).sum();
                2.0 / m as f64 * kk * s
            };
            a[m] = -(1..=m).map(|i| q[i] * a[m - i]).sum::<f64>() / q[0];
            b[m] = 0.5 * omega / m as f64 * (1..=m).map(|i| i as f64 * (a[i] + q[i]) * b[m - i]).sum::<f64>();
            c[m] = (1..=m)
                .map(|i| ((2.0 - lambda) * i as f64 / m as f64 - 1.0) * q[i] * c[m - i])
                .sum::<f64>()
                / q[0];
        }
        TruncatedPowerSeries::new(u0, q)
    }

    /// `b_0..b_k` of `1 - F ~ x^{lambda-1} e^{-omega x/2} sum b_k x^{-k} / (2 K_lambda(omega))`.
    pub fn cdf_tail_coeffs(&self, k_max: usize) -> Vec<f64> {
        let GIGParams { lambda, omega, .. } = self.params;
        let h = 0.5 * omega;
        (0..=k_max)
            .map(|k| {
                let mut total = 0.0;
                let mut fact = 1.0;
                for i in 1..=k {
                    fact *= i as f64;
                }
                // fact runs over (k - j)!
                for j in 0..=k {
                    if j > 0 {
                        fact /= (k - j + 1) as f64;
                    }
                    let mut prod = 1.0;
                    for i in 0..j {
                        prod *= lambda - k as f64 + i as f64;
                    }
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    total += sign / fact * h.powi(k as i32 - 2 * j as i32 - 1) * prod;
                }
                total
            })
            .collect()
    }

    /// Tail expansion `x ~ y + sum P_n(ln y) / y^n` with `y = -(2/omega) ln(2 K (1 - u))`;
    /// the left side is the reciprocal of the right tail of the `-lambda` distribution.
    pub fn tail(&self, side: Side, n: usize) -> Result<LogTail> {
        let d = match side {
            Side::Right => *self,
            Side::Left => self.reciprocal(),
        };
        let GIGParams { lambda, omega, .. } = d.params;
        let b = d.cdf_tail_coeffs(n);
        let series = salvy_asymptotic_inverse(2.0 * (lambda - 1.0) / omega, 2.0 / omega, &b, n)?;
        Ok(LogTail {
            side,
            series,
            ln_c: -(std::f64::consts::LN_2 + d.ln_k),
            rate: 0.5 * omega,
            reciprocal: true,
        })
    }

    /// Base with an inverse-exponential left branch and exponential right branch, joined at the mode.
    pub fn base(&self, p_m: f64) -> BaseDistribution {
        let omega = self.params.omega;
        let xm = self.mode();
        BaseDistribution {
            cutoff: xm,
            p_m,
            left: LeftBranch::InvExp { p: (0.5 * omega / xm).exp() * p_m, c: 0.5 * omega },
            right: RightBranch { p: (0.5 * omega * xm).exp() * (1.0 - p_m), r: 0.5 * omega },
        }
    }

    /// Taylor coefficients of `A` with `Q = A(Q_B(u))` about `z0`, `A(z0) = x0`.
    pub fn recycle_coeffs(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        let GIGParams { lambda, omega, .. } = self.params;
        let kk = self.k();
        let h = 0.5 * omega;
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        let mut d = vec![0.0; n + 1];
        let mut e = vec![0.0; n + 1];
        a[0] = x0;
        c[0] = 1.0 / x0;
        e[0] = x0.powf(1.0 - lambda);
        let step_ce = |m: usize, a: &[f64], c: &mut [f64], e: &mut [f64]| {
            c[m] = -(1..=m).map(|i| a[i] * c[m - i]).sum::<f64>() / a[0];
            e[m] = (1..=m)
                .map(|i| ((2.0 - lambda) * i as f64 / m as f64 - 1.0) * a[i] * e[m - i])
                .sum::<f64>()
                / a[0];
        };
        match side {
            Side::Left => {
                let pl = match base.left {
                    LeftBranch::InvExp { p, .. } => p,
                    LeftBranch::Exp { .. } => return Err(Error::Domain("GIG base has an inverse-exponential left branch".into())),
                };
                if !(z0 > 0.0) {
                    return Err(Error::Domain(format!("left recycling needs z0 > 0, got {z0}")));
                }
                b[0] = (-h / z0).exp();
                for m in 1..=n {
                    b[m] = h / m as f64
                        * (0..m)
                            .map(|k| {
                                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                                sign * (k + 1) as f64 / z0.powi(k as i32 + 2) * b[m - k - 1]
                            })
                            .sum::<f64>();
                }
                d[0] = (h * (c[0] + a[0])).exp();
                for m in 1..=n {
                    let mut s = 0.0;
                    for k in 0..m {
                        for j in 0..m - k {
                            s += (k + 1) as f64 * b[k + 1] * d[j] * e[m - k - j - 1];
                        }
                    }
                    a[m] = 2.0 * pl / m as f64 * kk * s;
                    step_ce(m, &a, &mut c, &mut e);
                    d[m] = h / m as f64 * (1..=m).map(|i| i as f64 * (c[i] + a[i]) * d[m - i]).sum::<f64>();
                }
            }
            Side::Right => {
                let pr = base.right.p;
                b[0] = h * (c[0] + a[0]);
                d[0] = (b[0] - h * z0).exp();
                for m in 1..=n {
                    a[m] = omega * pr / m as f64 * kk * (0..m).map(|k| d[k] * e[m - k - 1]).sum::<f64>();
                    step_ce(m, &a, &mut c, &mut e);
                    b[m] = if m == 1 { h * (c[1] + a[1] - 1.0) } else { h * (c[m] + a[m]) };
                    d[m] = (1..=m).map(|i| i as f64 * b[i] * d[m - i]).sum::<f64>() / m as f64;
                }
            }
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow("recycling coefficients".into()));
        }
        Ok(TruncatedPowerSeries::new(z0, a))
    }
}

impl StdDensity for Gig {
    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn lower(&self) -> f64 {
        0.0
    }

    fn mode(&self) -> f64 {
        let GIGParams { lambda, omega, .. } = self.params;
        let l1 = lambda - 1.0;
        (l1 + (l1 * l1 + omega * omega).sqrt()) / omega
    }

    fn decay(&self) -> f64 {
        2.0 / self.params.omega * self.params.lambda.abs().max(1.0)
    }

    fn guess(&self, u: f64) -> Option<f64> {
        let right_guess = |d: &Gig, t: f64| -> Option<f64> {
            let GIGParams { lambda, omega, .. } = d.params;
            let y = -(2.0 / omega) * (t.ln() + std::f64::consts::LN_2 + d.ln_k);
            if y <= 1.0 {
                return None;
            }
            let x = y + 2.0 / omega * ((lambda - 1.0) * y.ln() + (2.0 / omega).ln());
            (x > 0.0).then_some(x)
        };
        if u > 0.5 {
            right_guess(self, 1.0 - u)
        } else {
            right_guess(&self.reciprocal(), u).map(|x| 1.0 / x)
        }
    }
}
