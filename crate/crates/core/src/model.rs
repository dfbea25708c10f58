//! Serializable piecewise quantile approximant: region partition, per-region
//! pieces, fast evaluation and verification against the CDF.

use serde::{Deserialize, Serialize};

use crate::accel::RationalApproximant;
use crate::dist::{BaseDistribution, DistributionParams, Family, Side};
use crate::error::{Error, Result};
use crate::series::{logpoly_eval, LogPolySeries, TruncationMode};
use crate::stable::{StableSide, StdStable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pade,
    Chebyshev,
    ChebyPade,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pade => "pade",
            Method::Chebyshev => "chebyshev",
            Method::ChebyPade => "cheby-pade",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pade" => Ok(Method::Pade),
            "chebyshev" => Ok(Method::Chebyshev),
            "cheby-pade" | "cheby_pade" => Ok(Method::ChebyPade),
            other => Err(Error::Domain(format!("unknown method {other}"))),
        }
    }
}

/// `0 < tau_l < u1 < u_m < u2 < 1 - tau_r < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub tau_l: f64,
    pub u1: f64,
    pub u_m: f64,
    pub u2: f64,
    pub tau_r: f64,
    pub r_tilde: Option<f64>,
    pub r_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    LeftTail,
    Left,
    Central,
    Right,
    RightTail,
    Stable,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::LeftTail => "left_tail",
            RegionKind::Left => "left",
            RegionKind::Central => "central",
            RegionKind::Right => "right",
            RegionKind::RightTail => "right_tail",
            RegionKind::Stable => "stable",
        }
    }
}

/// The variable a rational piece is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum Variable {
    /// The probability `u` itself.
    U,
    /// `z = Q_B(u)` on one branch of a base distribution.
    Base { side: Side, base: BaseDistribution },
}

impl Variable {
    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            Variable::U => u,
            Variable::Base { side: Side::Left, base } => base.quantile_left(u),
            Variable::Base { side: Side::Right, base } => base.quantile_right(1.0 - u),
        }
    }

    /// `u` as a function of the variable.
    pub fn invert(&self, v: f64) -> f64 {
        match self {
            Variable::U => v,
            Variable::Base { side: Side::Left, base } => match base.left {
                crate::dist::LeftBranch::Exp { p, r } => p * (r * v).exp(),
                crate::dist::LeftBranch::InvExp { p, c } => p * (-c / v).exp(),
            },
            Variable::Base { side: Side::Right, base } => 1.0 - base.right.p * (-base.right.r * v).exp(),
        }
    }
}

/// How the tail sum is turned into a standardized quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finish {
    Identity,
    Negate,
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sum", rename_all = "snake_case")]
pub enum TailSum {
    /// `y + R(1/y)`.
    Rational { approx: RationalApproximant },
    /// `y + sum P_n(ln y) / y^n`, optimally truncated.
    Logpoly { logpoly: LogPolySeries },
}

/// Tail expansion in `y = -(ln t - ln_c) / rate`, `t` the tail probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailApprox {
    pub side: Side,
    pub ln_c: f64,
    pub rate: f64,
    pub finish: Finish,
    #[serde(flatten)]
    pub sum: TailSum,
}

impl TailApprox {
    pub fn eval(&self, u: f64) -> f64 {
        self.eval_tail_prob(match self.side {
            Side::Left => u,
            Side::Right => 1.0 - u,
        })
    }

    /// Standardized quantile at tail probability `t`.
    pub fn eval_tail_prob(&self, t: f64) -> f64 {
        let y = -(t.ln() - self.ln_c) / self.rate;
        let raw = match &self.sum {
            TailSum::Rational { approx } => y + approx.eval(1.0 / y),
            TailSum::Logpoly { logpoly } => logpoly_eval(logpoly, y, TruncationMode::Optimal).unwrap_or(f64::NAN),
        };
        match self.finish {
            Finish::Identity => raw,
            Finish::Negate => -raw,
            Finish::Reciprocal => 1.0 / raw,
        }
    }
}

/// The stable dispatcher's series data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableApprox {
    pub alpha: f64,
    pub beta: f64,
    pub right: StableSide,
    pub left: StableSide,
}

impl StableApprox {
    pub fn eval(&self, u: f64) -> f64 {
        let std = StdStable { alpha: self.alpha, beta: self.beta };
        let u0 = std.u0();
        if u == u0 {
            return 0.0;
        }
        if u > u0 {
            self.right.try_eval(u).unwrap_or_else(|| std.quantile_oracle(u).unwrap_or(f64::NAN))
        } else {
            match self.left.try_eval(1.0 - u) {
                Some(v) => -v,
                None => -std.reflected().quantile_oracle(1.0 - u).unwrap_or(f64::NAN),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PieceBody {
    Rational { variable: Variable, approx: RationalApproximant },
    Tail(TailApprox),
    Stable(StableApprox),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// Half-open `[lo, hi)` in `u`.
    pub interval: (f64, f64),
    #[serde(flatten)]
    pub body: PieceBody,
}

impl Piece {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.body {
            PieceBody::Rational { variable, approx } => approx.eval(variable.apply(u)),
            PieceBody::Tail(t) => t.eval(u),
            PieceBody::Stable(s) => s.eval(u),
        }
    }

    pub fn degrees(&self) -> Option<(usize, usize)> {
        match &self.body {
            PieceBody::Rational { approx, .. } => Some(approx.degrees()),
            PieceBody::Tail(TailApprox { sum: TailSum::Rational { approx }, .. }) => Some(approx.degrees()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub interval: (f64, f64),
    pub pieces: Vec<Piece>,
}

impl Region {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let p = &self.pieces;
        if p.len() == 1 {
            return p[0].eval(u);
        }
        let i = p.partition_point(|pc| pc.interval.1 <= u).min(p.len() - 1);
        p[i].eval(u)
    }

    /// Human-readable degree summary.
    pub fn describe(&self) -> String {
        let degs: Vec<String> = self
            .pieces
            .iter()
            .map(|p| match p.degrees() {
                Some((m, n)) => format!("({m},{n})"),
                None => match &p.body {
                    PieceBody::Tail(TailApprox { sum: TailSum::Logpoly { logpoly }, .. }) => {
                        format!("logpoly {}", logpoly.n_max())
                    }
                    _ => "series".to_string(),
                },
            })
            .collect();
        if degs.len() == 1 {
            format!("{} {}", self.kind.name(), degs[0])
        } else {
            format!("{} {} pieces [{}]", self.kind.name(), degs.len(), degs.join(" "))
        }
    }

    /// Largest total degree over the rational pieces.
    pub fn max_total_degree(&self) -> usize {
        self.pieces.iter().filter_map(|p| p.degrees()).map(|(m, n)| m + n).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub method: Method,
    pub setup_seconds: f64,
    pub max_error: f64,
    pub max_x_error: f64,
    pub grid_size: usize,
    pub degrees: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub epsilon: f64,
    pub build_info: BuildInfo,
}

/// Piecewise quantile approximant in user coordinates `x = loc + scale * x_std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileModel {
    #[serde(flatten)]
    pub dist: DistributionParams,
    pub loc: f64,
    pub scale: f64,
    pub partition: RegionPartition,
    pub regions: Vec<Region>,
    pub meta: ModelMeta,
}

impl QuantileModel {
    pub fn region_index(&self, u: f64) -> usize {
        let r = &self.regions;
        if r.len() == 1 {
            return 0;
        }
        r.partition_point(|reg| reg.interval.1 <= u).min(r.len() - 1)
    }

    /// Standardized quantile; no range check.
    #[inline]
    pub fn eval_std(&self, u: f64) -> f64 {
        self.regions[self.region_index(u)].eval(u)
    }

    #[inline]
    pub fn eval_unchecked(&self, u: f64) -> f64 {
        self.loc + self.scale * self.eval_std(u)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
        }
        Ok(self.eval_unchecked(u))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        m.dist.validate()?;
        if m.regions.is_empty() || m.regions.iter().any(|r| r.pieces.is_empty()) {
            return Err(Error::Model("model has an empty region".into()));
        }
        Ok(m)
    }

    /// `|u - F(Q_A(u))|` over a composite grid reaching down to `min(1e-10, tau)`.
    pub fn verify(&self, family: &dyn Family, grid_size: usize) -> Result<VerifyReport> {
        let p = &self.partition;
        let us = verification_grid(grid_size, p.tau_l, p.tau_r);
        self.verify_at(family, &us)
    }

    pub fn verify_at(&self, family: &dyn Family, us: &[f64]) -> Result<VerifyReport> {
        let qs: Vec<f64> = us.iter().map(|&u| self.eval_unchecked(u)).collect();
        if let Some(i) = qs.iter().position(|q| !q.is_finite()) {
            return Err(Error::Model(format!("non-finite quantile at u={}", us[i])));
        }
        let fs = family.cdf_many(&qs)?;
        let mut rows = Vec::with_capacity(us.len());
        let mut per_region = vec![0.0f64; self.regions.len()];
        for ((&u, &q), &f) in us.iter().zip(&qs).zip(&fs) {
            let e = (u - f).abs();
            per_region[self.region_index(u)] = per_region[self.region_index(u)].max(e);
            rows.push((u, q, e));
        }
        let max_error = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        let max_x_error = rows
            .iter()
            .map(|&(_, q, e)| e / family.pdf(q))
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        Ok(VerifyReport { rows, max_error, max_x_error, per_region })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<(f64, f64, f64)>,
    pub max_error: f64,
    /// First-order `x`-error `|u - F(q)| / f(q)`, maximized over the grid.
    pub max_x_error: f64,
    pub per_region: Vec<f64>,
}

/// Geometric near `0`, uniform in the middle, geometric in `1 - u` near `1`;
/// contains `tau_l` and `1 - tau_r` exactly.
pub fn verification_grid(n: usize, tau_l: f64, tau_r: f64) -> Vec<f64> {
    let n = n.max(8);
    let lo = tau_l.min(1e-10);
    let lo_r = tau_r.min(1e-10);
    let edge = 0.05;
    let n_geo = n / 4;
    let n_mid = n - 2 * n_geo;
    let mut us = Vec::with_capacity(n + 2);
    for i in 0..n_geo {
        let t = i as f64 / n_geo as f64;
        us.push(lo * (edge / lo).powf(t));
    }
    for i in 0..n_mid {
        us.push(edge + (1.0 - 2.0 * edge) * i as f64 / (n_mid - 1) as f64);
    }
    for i in 0..n_geo {
        let t = i as f64 / n_geo as f64;
        us.push(1.0 - lo_r * (edge / lo_r).powf(t));
    }
    us.push(tau_l);
    us.push(1.0 - tau_r);
    us.retain(|&u| u > 0.0 && u < 1.0);
    us.sort_by(f64::total_cmp);
    us.dedup();
    us
}

/// `n` Chebyshev-spaced interior points `(1 - cos((2i+1) pi / 2n)) / 2`.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()))
        .collect()
}

/// Open-interval uniform from the top 53 bits of a 64-bit draw: `((x >> 11) + 0.5) 2^-53`.
#[inline]
pub fn uniform_from_bits(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
