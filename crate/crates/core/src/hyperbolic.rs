//! Hyperbolic distribution: density, central Taylor recursion, tail
//! expansion, two-sided exponential base and recycling solutions.
//!
//! Everything below works in standardized coordinates (`delta = 1`, `mu = 0`)
//! with shape `alpha1 = delta alpha`, skew `beta1 = delta beta`.

use crate::dist::{BaseDistribution, DistributionParams, HypParams, LeftBranch, LocScale, RightBranch, Side, StdDensity};
use crate::error::{Error, Result};
use crate::series::TruncatedPowerSeries;
use crate::special::ln_bessel_k;

#[derive(Debug, Clone, Copy)]
pub struct Hyperbolic {
    pub params: HypParams,
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
    /// `ln N0`, `N0 = 2 alpha1 K_1(gamma1) / gamma1`.
    pub ln_n0: f64,
}

impl Hyperbolic {
    pub fn new(params: HypParams) -> Result<Self> {
        params.validate()?;
        let alpha1 = params.alpha1();
        let beta1 = params.beta1();
        let gamma1 = (alpha1 * alpha1 - beta1 * beta1).sqrt();
        let ln_n0 = (2.0 * alpha1 / gamma1).ln() + ln_bessel_k(1.0, gamma1)?;
        Ok(Self { params, alpha1, beta1, gamma1, ln_n0 })
    }

    /// Standardized distribution with the sign of the skew flipped.
    pub fn reflected(&self) -> Self {
        let mut p = self.params;
        p.beta = -p.beta;
        Self { params: p, beta1: -self.beta1, ..*self }
    }

    pub fn n0(&self) -> f64 {
        self.ln_n0.exp()
    }

    pub fn into_family(self) -> Result<LocScale<Self>> {
        let (mu, delta) = (self.params.mu, self.params.delta);
        LocScale::new(self, mu, delta, DistributionParams::Hyp(self.params))
    }

    /// Taylor coefficients of the standardized quantile about `u0`, where `x0 = Q(u0)`.
    pub fn taylor_coeffs(&self, u0: f64, x0: f64, n: usize) -> TruncatedPowerSeries {
        let (a1, b1) = (self.alpha1, self.beta1);
        let n0 = self.n0();
        let mut q = vec![0.0; n + 1];
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        q[0] = x0;
        a[0] = (1.0 + x0 * x0).sqrt();
        b[0] = (a1 * a[0] - b1 * x0).exp();
        for m in 1..=n {
            q[m] = n0 / m as f64 * b[m - 1];
            let mut s = m as f64 * q[m] * q[0];
            for k in 0..m.saturating_sub(1) {
                s += (k + 1) as f64 * (q[k + 1] * q[m - k - 1] - a[k + 1] * a[m - k - 1]);
            }
            a[m] = s / (m as f64 * a[0]);
            let mut t = 0.0;
            for k in 1..=m {
                t += k as f64 * (a1 * a[k] - b1 * q[k]) * b[m - k];
            }
            b[m] = t / m as f64;
        }
        TruncatedPowerSeries::new(u0, q)
    }

    /// Two-sided exponential base joined at the mode, where it takes the value `p_m`.
    pub fn base(&self, p_m: f64) -> BaseDistribution {
        let xm = self.mode();
        let (rl, rr) = (self.alpha1 + self.beta1, self.alpha1 - self.beta1);
        BaseDistribution {
            cutoff: xm,
            p_m,
            left: LeftBranch::Exp { p: (-rl * xm).exp() * p_m, r: rl },
            right: RightBranch { p: (rr * xm).exp() * (1.0 - p_m), r: rr },
        }
    }

    /// Taylor coefficients of `A` with `Q = A(Q_B(u))` about `z0 = Q_B(u0)`, `A(z0) = x0`.
    pub fn recycle_coeffs(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        let (a1, b1) = (self.alpha1, self.beta1);
        let (theta, phi, rho) = match side {
            Side::Left => match base.left {
                LeftBranch::Exp { p, .. } => (p, 1.0, a1 + b1),
                LeftBranch::InvExp { .. } => return Err(Error::Domain("hyperbolic base has an exponential left branch".into())),
            },
            Side::Right => (base.right.p, -1.0, -(a1 - b1)),
        };
        let lead = self.ln_n0 + theta.ln() + rho.abs().ln();
        let mut a = vec![0.0; n + 1];
        let mut b = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        let mut d = vec![0.0; n + 1];
        a[0] = x0;
        b[0] = (1.0 + x0 * x0).sqrt();
        let c0 = a1 * b[0] - b1 * x0 + rho * z0;
        // d is carried scaled by C theta |rho| so that a_n = d_{n-1} / n
        d[0] = (lead + c0).exp();
        for m in 1..=n {
            a[m] = d[m - 1] / m as f64;
            let mut s = m as f64 * a[m] * a[0];
            for k in 0..m.saturating_sub(1) {
                s += (k + 1) as f64 * (a[k + 1] * a[m - k - 1] - b[k + 1] * b[m - k - 1]);
            }
            b[m] = s / (m as f64 * b[0]);
            c[m] = if m == 1 { a1 * (b[1] + phi) + b1 * (1.0 - a[1]) } else { a1 * b[m] - b1 * a[m] };
            let mut t = 0.0;
            for k in 1..=m {
                t += k as f64 * c[k] * d[m - k];
            }
            d[m] = t / m as f64;
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow("recycling coefficients".into()));
        }
        Ok(TruncatedPowerSeries::new(z0, a))
    }

    /// Tail expansion on either side.
    pub fn tail(&self, side: Side, n: usize) -> HypTailSeries {
        let d = match side {
            Side::Right => *self,
            Side::Left => self.reflected(),
        };
        let s = d.alpha1 - d.beta1;
        HypTailSeries { side, coeffs: tail_coeffs(d.alpha1, d.beta1, n), ln_n0: d.ln_n0, rate: s }
    }
}

/// Coefficients `q_0..q_n` of the right-tail expansion `x ~ y + sum q_k / y^k`
/// with `y = -ln(N0 (alpha1 - beta1) (1 - u)) / (alpha1 - beta1)`.
pub fn tail_coeffs(alpha1: f64, beta1: f64, n: usize) -> Vec<f64> {
    let s = alpha1 - beta1;
    let len = n.max(1) + 1;
    let mut q = vec![0.0; len];
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    let mut c = vec![0.0; len];
    let mut d = vec![0.0; len];
    c[0] = 1.0;
    q[1] = -alpha1 / (2.0 * s);
    d[1] = 0.5;
    a[1] = q[1] + d[1];
    b[1] = alpha1 * a[1] - beta1 * q[1];
    c[1] = b[1];
    for m in 2..len {
        let mut dd = 0.0;
        for k in 0..=m - 2 {
            dd += (k + 1) as f64 * (q[k + 1] * q[m - k - 2] - a[k + 1] * a[m - k - 2]);
        }
        d[m] = dd / (m - 1) as f64;
        let mut conv = 0.0;
        for k in 1..m {
            conv += k as f64 * b[k] * c[m - k];
        }
        q[m] = -((m - 1) as f64 * q[m - 1] + conv / m as f64 + alpha1 * d[m]) / s;
        a[m] = q[m] + d[m];
        b[m] = alpha1 * a[m] - beta1 * q[m];
        let mut cc = 0.0;
        for k in 1..=m {
            cc += k as f64 * b[k] * c[m - k];
        }
        c[m] = cc / m as f64;
    }
    q.truncate(n + 1);
    q
}

/// Tail expansion in standardized coordinates; the left side is the right
/// side of the reflected distribution, negated.
#[derive(Debug, Clone, PartialEq)]
pub struct HypTailSeries {
    pub side: Side,
    pub coeffs: Vec<f64>,
    pub ln_n0: f64,
    pub rate: f64,
}

impl HypTailSeries {
    /// Expansion variable for tail probability `t` (`1 - u` on the right, `u` on the left).
    pub fn y(&self, t: f64) -> f64 {
        -(self.ln_n0 + self.rate.ln() + t.ln()) / self.rate
    }

    pub fn sign(&self) -> f64 {
        match self.side {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }

    pub fn tail_prob(&self, u: f64) -> f64 {
        match self.side {
            Side::Right => 1.0 - u,
            Side::Left => u,
        }
    }

    /// Optimally truncated sum at `u`.
    pub fn eval(&self, u: f64) -> f64 {
        let y = self.y(self.tail_prob(u));
        let w = 1.0 / y;
        let mut terms = Vec::with_capacity(self.coeffs.len());
        let mut wp = 1.0;
        for &c in &self.coeffs {
            terms.push(c * wp);
            wp *= w;
        }
        let (_, s) = crate::accel::optimal_truncation(&terms[1..]);
        self.sign() * (y + s)
    }
}

impl StdDensity for Hyperbolic {
    fn pdf(&self, x: f64) -> f64 {
        (-self.alpha1 * (1.0 + x * x).sqrt() + self.beta1 * x - self.ln_n0).exp()
    }

    fn mode(&self) -> f64 {
        self.beta1 / self.gamma1
    }

    fn decay(&self) -> f64 {
        1.0 / (self.alpha1 - self.beta1.abs())
    }

    fn guess(&self, u: f64) -> Option<f64> {
        let n0 = self.ln_n0.exp();
        if u > 0.5 {
            let s = self.alpha1 - self.beta1;
            Some(-(n0 * s * (1.0 - u)).ln() / s)
        } else {
            let s = self.alpha1 + self.beta1;
            Some((n0 * s * u).ln() / s)
        }
    }
}
