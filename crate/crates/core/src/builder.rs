//! Construction of piecewise quantile approximants: region partition, tail
//! cut-off search, central and recycled side expansions summed by Padé,
//! Chebyshev or Chebyshev-Padé, with adaptive segmentation as the fallback.

use web_time::Instant;

use crate::accel::{
    chebyshev_from_taylor, chebyshev_from_values, chebyshev_nodes, chebyshev_pade_checked, pade_checked, taylor_shift,
    ChebyshevSeriesRep, RationalApproximant,
};
use crate::dist::{BaseDistribution, DistributionParams, Family, LocScale, Side, StdDensity};
use crate::error::{Error, Result};
use crate::gig::Gig;
use crate::hyperbolic::Hyperbolic;
use crate::model::{
    BuildInfo, Finish, Method, ModelMeta, Piece, PieceBody, QuantileModel, Region, RegionKind, RegionPartition,
    StableApprox, TailApprox, TailSum, Variable,
};
use crate::series::{cauchy_hadamard_radius, TruncatedPowerSeries};
use crate::stable::Stable;
use crate::vg::{LogTail, VarianceGamma};

/// Where the recycling series for a whole side region is centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Z0Rule {
    /// `(Q_B(tau) + Q_B(u_m / 2)) / 2`, clamped into the region.
    Paper,
    /// Midpoint of the region in `z`.
    Midpoint,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub epsilon: f64,
    pub method: Method,
    /// Size of the verification grid stored in the model metadata.
    pub grid_size: usize,
    pub z0_rule: Z0Rule,
    /// Maximum bisection depth of the segmentation fallback.
    pub max_depth: usize,
    /// Largest admissible tail cut-off.
    pub tau_max: f64,
    /// Cut-off used when no value in `[1e-16, tau_max]` meets the tolerance.
    pub tau_default: f64,
}

impl BuildOptions {
    pub fn new(epsilon: f64, method: Method) -> Self {
        Self {
            epsilon,
            method,
            grid_size: 10_000,
            z0_rule: Z0Rule::Paper,
            max_depth: 8,
            tau_max: 1e-9,
            tau_default: 1e-10,
        }
    }
}

/// Largest diagonal Padé order tried per piece.
pub const PADE_MAX: usize = 12;
/// Largest Chebyshev degree tried per piece.
pub const CHEBYSHEV_MAX: usize = 64;
/// Order of the central series used for the convergence radius.
pub const RADIUS_ORDER: usize = 40;
const CHECK_NODES: usize = 24;
const SAMPLE_NODES: usize = 96;
const STEP_ORDER: usize = 24;

/// Series a family must supply to the builder, in standardized coordinates.
pub trait Expansions: StdDensity + Send {
    /// Highest series order the recursions support at reasonable cost.
    fn max_order(&self) -> usize {
        100
    }
    /// False when the quantile is not analytic at the mode quantile.
    fn smooth_at_mode(&self) -> bool {
        true
    }
    fn taylor(&self, u0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries>;
    fn base(&self, p_m: f64) -> BaseDistribution;
    fn recycle(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries>;
    fn tail_approx(&self, side: Side) -> Result<TailApprox>;
}

impl Expansions for Hyperbolic {
    fn taylor(&self, u0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        Ok(self.taylor_coeffs(u0, x0, n))
    }

    fn base(&self, p_m: f64) -> BaseDistribution {
        Hyperbolic::base(self, p_m)
    }

    fn recycle(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        self.recycle_coeffs(base, side, z0, x0, n)
    }

    fn tail_approx(&self, side: Side) -> Result<TailApprox> {
        let t = self.tail(side, 20);
        let ln_c = -(t.ln_n0 + t.rate.ln());
        let y_min = -(1e-9f64.ln() - ln_c) / t.rate;
        let w_max = if y_min > 1.0 { 1.0 / y_min } else { 1.0 };
        let ts = TruncatedPowerSeries::new(0.0, t.coeffs.clone());
        let approx = pade_checked(&ts, 10, 10, 1.0, (0.0, w_max))?;
        Ok(TailApprox {
            side,
            ln_c,
            rate: t.rate,
            finish: match side {
                Side::Right => Finish::Identity,
                Side::Left => Finish::Negate,
            },
            sum: TailSum::Rational { approx },
        })
    }
}

fn log_tail_approx(t: LogTail) -> TailApprox {
    let finish = match (t.side, t.reciprocal) {
        (Side::Right, _) => Finish::Identity,
        (Side::Left, false) => Finish::Negate,
        (Side::Left, true) => Finish::Reciprocal,
    };
    TailApprox { side: t.side, ln_c: t.ln_c, rate: t.rate, finish, sum: TailSum::Logpoly { logpoly: t.series } }
}

/// Order of the log-polynomial tail expansions.
pub const LOGPOLY_ORDER: usize = 10;

impl Expansions for VarianceGamma {
    fn max_order(&self) -> usize {
        30
    }

    fn smooth_at_mode(&self) -> bool {
        false
    }

    fn taylor(&self, u0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        self.taylor_coeffs(u0, x0, n)
    }

    fn base(&self, p_m: f64) -> BaseDistribution {
        VarianceGamma::base(self, p_m)
    }

    fn recycle(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        self.recycle_coeffs(base, side, z0, x0, n)
    }

    fn tail_approx(&self, side: Side) -> Result<TailApprox> {
        Ok(log_tail_approx(self.tail(side, LOGPOLY_ORDER)?))
    }
}

impl Expansions for Gig {
    fn taylor(&self, u0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        Ok(self.taylor_coeffs(u0, x0, n))
    }

    fn base(&self, p_m: f64) -> BaseDistribution {
        Gig::base(self, p_m)
    }

    fn recycle(&self, base: &BaseDistribution, side: Side, z0: f64, x0: f64, n: usize) -> Result<TruncatedPowerSeries> {
        self.recycle_coeffs(base, side, z0, x0, n)
    }

    fn tail_approx(&self, side: Side) -> Result<TailApprox> {
        Ok(log_tail_approx(self.tail(side, LOGPOLY_ORDER)?))
    }
}

/// Build and verify an approximant for any supported family.
pub fn build(params: &DistributionParams, opts: &BuildOptions) -> Result<QuantileModel> {
    params.validate()?;
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {}", opts.epsilon)));
    }
    match params {
        DistributionParams::Hyp(p) => build_family(&Hyperbolic::new(*p)?.into_family()?, opts),
        DistributionParams::Vg(p) => build_family(&VarianceGamma::new(*p)?.into_family()?, opts),
        DistributionParams::Gig(p) => build_family(&Gig::new(*p)?.into_family()?, opts),
        DistributionParams::Stable(p) => build_stable(&Stable::new(*p)?, opts),
    }
}

/// Mode quantile, central radius and the inner split points `u1 < u_m < u2`.
pub fn central_partition<D: Expansions>(fam: &LocScale<D>) -> Result<(f64, Option<f64>, f64)> {
    let p_m = fam.anchor.p_m;
    let r_tilde = if fam.std.smooth_at_mode() {
        let ts = fam.std.taylor(p_m, fam.anchor.mode, RADIUS_ORDER)?;
        cauchy_hadamard_radius(&ts.coeffs).ok().filter(|r| r.is_finite() && *r > 0.0)
    } else {
        None
    };
    let mut r_bar = (p_m - 0.1).abs().min((p_m - 0.9).abs());
    if let Some(r) = r_tilde {
        r_bar = r_bar.min(r);
    }
    r_bar = r_bar.min(0.5 * p_m).min(0.5 * (1.0 - p_m));
    Ok((p_m, r_tilde, r_bar))
}

struct Ctx<'a, D> {
    fam: &'a LocScale<D>,
    target: f64,
    opts: &'a BuildOptions,
}

struct Fit {
    approx: RationalApproximant,
    err: f64,
}

impl<D: Expansions> Ctx<'_, D> {
    fn oracle(&self, u: f64) -> Result<f64> {
        self.fam.anchor.quantile(&self.fam.std, u)
    }

    fn u_error(&self, us: &[f64], xs: &[f64]) -> Result<f64> {
        if xs.iter().any(|x| !x.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let fs = self.fam.anchor.cdf_many(&self.fam.std, xs)?;
        Ok(us.iter().zip(&fs).map(|(u, f)| (u - f).abs()).fold(0.0, f64::max))
    }

    fn check(&self, approx: &RationalApproximant, nodes: &[(f64, f64)]) -> Result<f64> {
        let us: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let xs: Vec<f64> = nodes.iter().map(|n| approx.eval(n.1)).collect();
        self.u_error(&us, &xs)
    }

    fn series_order(&self) -> usize {
        let want = match self.opts.method {
            Method::Pade => 2 * PADE_MAX + 2,
            Method::Chebyshev | Method::ChebyPade => 100,
        };
        want.min(self.fam.std.max_order())
    }

    /// Best approximant on `[va, vb]` of the method's ladder, stopping at the
    /// first that meets the target unless `exhaustive`; `trace` collects
    /// `(total degree, error)` for every rung tried.
    fn fit(
        &self,
        ts: &TruncatedPowerSeries,
        va: f64,
        vb: f64,
        var: &Variable,
        exhaustive: bool,
        trace: &mut Vec<Rung>,
    ) -> Result<Fit> {
        let nodes: Vec<(f64, f64)> = check_nodes(va, vb).into_iter().map(|v| (var.invert(v), v)).collect();
        let reference = if exhaustive {
            let mut vs: Vec<f64> = nodes.iter().map(|n| n.1).collect();
            vs.sort_by(f64::total_cmp);
            let xs = self.values_at(var, &vs)?;
            Some((vs, xs))
        } else {
            None
        };
        let mut best: Option<Fit> = None;
        let mut consider = |approx: RationalApproximant| -> Result<bool> {
            let err = self.check(&approx, &nodes)?;
            let (m, n) = approx.degrees();
            let x_error = reference.as_ref().map_or(f64::NAN, |(vs, xs)| {
                self.fam.scale * vs.iter().zip(xs).map(|(&v, &x)| (approx.eval(v) - x).abs()).fold(0.0, f64::max)
            });
            trace.push(Rung { degree: m + n, u_error: err, x_error });
            let ok = err <= self.target;
            if best.as_ref().is_none_or(|b| err < b.err) {
                best = Some(Fit { approx, err });
            }
            Ok(ok && !exhaustive)
        };
        match self.opts.method {
            Method::Pade => {
                let half = (va - ts.center).abs().max((vb - ts.center).abs());
                let k_min = if matches!(var, Variable::U) { 2 } else { 4 };
                for k in k_min..=PADE_MAX.min(ts.order() / 2) {
                    let Ok(r) = pade_checked(ts, k, k, half, (va, vb)) else { continue };
                    if consider(r)? {
                        break;
                    }
                }
            }
            Method::Chebyshev => {
                let cheb = self.chebyshev(ts, va, vb, var, CHEBYSHEV_MAX)?;
                let k_max = cheb.coeffs.len() - 1;
                for k in (2..=k_max).step_by(2) {
                    if consider(cheb.truncate(k).as_rational())? {
                        break;
                    }
                }
            }
            Method::ChebyPade => {
                let cheb = self.chebyshev(ts, va, vb, var, 2 * PADE_MAX + 2)?;
                let k_max = cheb.coeffs.len() - 1;
                for k in 1..=PADE_MAX.min(k_max / 2) {
                    let Ok(r) = chebyshev_pade_checked(&cheb, k, k) else { continue };
                    if consider(r)? {
                        break;
                    }
                }
            }
        }
        best.ok_or_else(|| Error::Unstable(format!("no approximant on [{va}, {vb}]")))
    }

    /// Chebyshev coefficients on `[va, vb]`: Thacher sums of the Taylor series
    /// when its radius covers twice the half-width, otherwise interpolation of
    /// oracle values at Chebyshev nodes.
    fn chebyshev(&self, ts: &TruncatedPowerSeries, va: f64, vb: f64, var: &Variable, k_max: usize) -> Result<ChebyshevSeriesRep> {
        let half = 0.5 * (vb - va);
        let mid = 0.5 * (va + vb);
        let shifted = if ts.center == mid { ts.clone() } else { taylor_shift(ts, mid) };
        let radius = cauchy_hadamard_radius(&shifted.coeffs).unwrap_or(0.0);
        if radius >= 2.0 * half && ts.order() >= k_max + 2 {
            return chebyshev_from_taylor(&shifted, (va, vb), k_max);
        }
        let vs = chebyshev_nodes(va, vb, (k_max + 8).max(SAMPLE_NODES));
        let xs = self.values_at(var, &vs)?;
        Ok(chebyshev_from_values(va, vb, &xs, k_max))
    }

    /// Quantile values at increasing points `vs`, continued from one oracle
    /// value by short Taylor steps; a step whose last retained term is not
    /// negligible falls back to the oracle.
    fn values_at(&self, var: &Variable, vs: &[f64]) -> Result<Vec<f64>> {
        let mut xs = Vec::with_capacity(vs.len());
        xs.push(self.oracle(var.invert(vs[0]))?);
        for j in 1..vs.len() {
            let (v, x) = (vs[j - 1], xs[j - 1]);
            let ts = match var {
                Variable::U => self.fam.std.taylor(v, x, STEP_ORDER),
                Variable::Base { side, base } => self.fam.std.recycle(base, *side, v, x, STEP_ORDER),
            };
            let h = vs[j] - v;
            let next = ts.ok().and_then(|ts| {
                let last = (ts.coeffs[STEP_ORDER] * h.powi(STEP_ORDER as i32)).abs();
                let y = ts.eval(vs[j]);
                (y.is_finite() && last <= 1e-15 * y.abs().max(1.0)).then_some(y)
            });
            xs.push(match next {
                Some(y) => y,
                None => self.oracle(var.invert(vs[j]))?,
            });
        }
        Ok(xs)
    }

    /// Series about the point `v` of the region's variable.
    fn series_at(&self, var: &Variable, v: f64) -> Result<TruncatedPowerSeries> {
        let n = self.series_order();
        let u = var.invert(v);
        let x0 = self.oracle(u)?;
        match var {
            Variable::U => self.fam.std.taylor(v, x0, n),
            Variable::Base { side, base } => self.fam.std.recycle(base, *side, v, x0, n),
        }
    }

    /// Fit on `[va, vb]`, bisecting until every piece meets the target or the depth runs out.
    fn segment(
        &self,
        va: f64,
        vb: f64,
        var: &Variable,
        first: Option<TruncatedPowerSeries>,
        depth: usize,
        out: &mut Vec<(f64, f64, Fit)>,
    ) -> Result<()> {
        let attempt = (|| -> Result<Fit> {
            let ts = match first {
                Some(ts) => ts,
                None => self.series_at(var, 0.5 * (va + vb))?,
            };
            self.fit(&ts, va, vb, var, false, &mut Vec::new())
        })();
        match attempt {
            Ok(fit) if fit.err <= self.target || depth >= self.opts.max_depth => {
                out.push((va, vb, fit));
                Ok(())
            }
            Err(e) if depth >= self.opts.max_depth => Err(e),
            _ => {
                let mid = 0.5 * (va + vb);
                self.segment(va, mid, var, None, depth + 1, out)?;
                self.segment(mid, vb, var, None, depth + 1, out)
            }
        }
    }

    /// Pieces covering `[ua, ub)` in `u`, expressed in `var`.
    fn region_pieces(&self, ua: f64, ub: f64, var: Variable, first_center: Option<(f64, f64)>) -> Result<Vec<Piece>> {
        let (va, vb) = (var.apply(ua), var.apply(ub));
        let first = match first_center {
            Some((v0, x0)) => Some(match &var {
                Variable::U => self.fam.std.taylor(v0, x0, self.series_order())?,
                Variable::Base { side, base } => self.fam.std.recycle(base, *side, v0, x0, self.series_order())?,
            }),
            None => None,
        };
        let mut fits = Vec::new();
        self.segment(va, vb, &var, first, 0, &mut fits)?;
        let n = fits.len();
        Ok(fits
            .into_iter()
            .enumerate()
            .map(|(i, (a, b, fit))| {
                let lo = if i == 0 { ua } else { var.invert(a) };
                let hi = if i + 1 == n { ub } else { var.invert(b) };
                Piece { interval: (lo, hi), body: PieceBody::Rational { variable: var, approx: fit.approx } }
            })
            .collect())
    }

    /// Error in tail probability at `tau` and several points further out.
    fn tail_error(&self, tail: &TailApprox, tau: f64) -> Result<f64> {
        let (d, anchor) = (&self.fam.std, &self.fam.anchor);
        let mut worst = 0.0f64;
        for f in [1.0, 1e-1, 1e-2, 1e-4, 1e-8] {
            let t = tau * f;
            let x = tail.eval_tail_prob(t);
            if !x.is_finite() {
                return Ok(f64::INFINITY);
            }
            let got = match tail.side {
                Side::Left => anchor.cdf(d, x)?,
                Side::Right => anchor.sf(d, x)?,
            };
            worst = worst.max((got - t).abs());
        }
        Ok(worst)
    }

    /// Largest `tau <= tau_max` at which the tail expansion meets the target.
    fn search_tau(&self, tail: &TailApprox) -> Result<f64> {
        let max = self.opts.tau_max;
        if self.tail_error(tail, max)? <= self.target {
            return Ok(max);
        }
        let (mut lo, mut hi) = (-16.0f64, max.log10());
        if self.tail_error(tail, 10f64.powf(lo))? > self.target {
            return Ok(self.opts.tau_default);
        }
        for _ in 0..14 {
            let mid = 0.5 * (lo + hi);
            if self.tail_error(tail, 10f64.powf(mid))? <= self.target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(10f64.powf(lo))
    }
}

fn check_nodes(a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![a, b];
    for i in 0..CHECK_NODES {
        let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * CHECK_NODES) as f64).cos();
        v.push(0.5 * (a + b) + 0.5 * (b - a) * t);
    }
    v
}

struct Plan {
    partition: RegionPartition,
    left_tail: TailApprox,
    right_tail: TailApprox,
    base: BaseDistribution,
}

impl<D: Expansions> Ctx<'_, D> {
    fn plan(&self) -> Result<Plan> {
        let std = &self.fam.std;
        let (u_m, r_tilde, r_bar) = central_partition(self.fam)?;
        let (u1, u2) = (u_m - r_bar, u_m + r_bar);
        let left_tail = std.tail_approx(Side::Left)?;
        let right_tail = std.tail_approx(Side::Right)?;
        let tau_l = self.search_tau(&left_tail)?.min(0.5 * u1);
        let tau_r = self.search_tau(&right_tail)?.min(0.5 * (1.0 - u2));
        let partition = RegionPartition { tau_l, u1, u_m, u2, tau_r, r_tilde, r_bar };
        Ok(Plan { partition, left_tail, right_tail, base: std.base(u_m) })
    }

    /// `u`-interval, variable and expansion point of a side region.
    fn side_setup(&self, plan: &Plan, side: Side) -> (f64, f64, Variable, f64) {
        let p = &plan.partition;
        let base = plan.base;
        let (ua, ub) = match side {
            Side::Left => (p.tau_l, p.u1),
            Side::Right => (p.u2, 1.0 - p.tau_r),
        };
        let var = Variable::Base { side, base };
        let (za, zb) = (var.apply(ua), var.apply(ub));
        let z0 = match (self.opts.z0_rule, self.opts.method) {
            (Z0Rule::Paper, Method::Pade) => {
                let outer = match side {
                    Side::Left => za,
                    Side::Right => zb,
                };
                (0.5 * (outer + base.quantile_left(0.5 * p.u_m))).clamp(za, zb)
            }
            _ => 0.5 * (za + zb),
        };
        (ua, ub, var, z0)
    }
}

fn build_family<D: Expansions>(fam: &LocScale<D>, opts: &BuildOptions) -> Result<QuantileModel> {
    let start = Instant::now();
    let mut target = 0.5 * opts.epsilon;
    for _ in 0..MONOTONE_RETRIES {
        let (model, monotone) = assemble(fam, opts, target, start)?;
        if monotone {
            return Ok(model);
        }
        target *= 0.1;
    }
    Ok(assemble(fam, opts, target, start)?.0)
}

/// Rebuilds at a tenfold tighter target while a region boundary steps downward.
const MONOTONE_RETRIES: usize = 3;

fn assemble<D: Expansions>(
    fam: &LocScale<D>,
    opts: &BuildOptions,
    target: f64,
    start: Instant,
) -> Result<(QuantileModel, bool)> {
    let ctx = Ctx { fam, target, opts };
    let plan = ctx.plan()?;
    let RegionPartition { tau_l, u1, u_m, u2, tau_r, .. } = plan.partition;

    let central = if fam.std.smooth_at_mode() {
        ctx.region_pieces(u1, u2, Variable::U, Some((u_m, fam.anchor.mode)))?
    } else {
        let mut p = ctx.region_pieces(u1, u_m, Variable::U, None)?;
        p.extend(ctx.region_pieces(u_m, u2, Variable::U, None)?);
        p
    };
    let mut sides = Vec::new();
    for side in [Side::Left, Side::Right] {
        let (ua, ub, var, z0) = ctx.side_setup(&plan, side);
        let x0 = ctx.oracle(var.invert(z0))?;
        sides.push(ctx.region_pieces(ua, ub, var, Some((z0, x0)))?);
    }
    let right = sides.pop().unwrap();
    let left = sides.pop().unwrap();

    let tail_piece = |t: TailApprox, lo: f64, hi: f64| Piece { interval: (lo, hi), body: PieceBody::Tail(t) };
    let regions = vec![
        Region {
            kind: RegionKind::LeftTail,
            interval: (0.0, tau_l),
            pieces: vec![tail_piece(plan.left_tail, 0.0, tau_l)],
        },
        Region { kind: RegionKind::Left, interval: (tau_l, u1), pieces: left },
        Region { kind: RegionKind::Central, interval: (u1, u2), pieces: central },
        Region { kind: RegionKind::Right, interval: (u2, 1.0 - tau_r), pieces: right },
        Region {
            kind: RegionKind::RightTail,
            interval: (1.0 - tau_r, 1.0),
            pieces: vec![tail_piece(plan.right_tail, 1.0 - tau_r, 1.0)],
        },
    ];
    finish_model(fam, fam.params, fam.loc, fam.scale, plan.partition, regions, opts, start)
}

/// Errors of every rung of the method's degree ladder for a single,
/// unsegmented approximant on a whole region.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub kind: RegionKind,
    pub interval: (f64, f64),
    pub rungs: Vec<Rung>,
}

/// One approximant of a degree ladder with its errors at the check nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rung {
    /// Total degree `m + n`.
    pub degree: usize,
    /// Max `|u - F(Q_A(u))|`.
    pub u_error: f64,
    /// Max `|Q(u) - Q_A(u)|` in user coordinates.
    pub x_error: f64,
}

impl LadderReport {
    /// Smallest total degree whose `u`-error meets `eps`.
    pub fn degree_for(&self, eps: f64) -> Option<usize> {
        self.rungs.iter().filter(|r| r.u_error <= eps).map(|r| r.degree).min()
    }

    /// Smallest total degree whose `x`-error meets `eps`.
    pub fn degree_for_x(&self, eps: f64) -> Option<usize> {
        self.rungs.iter().filter(|r| r.x_error <= eps).map(|r| r.degree).min()
    }
}

fn ladder_family<D: Expansions>(fam: &LocScale<D>, kind: RegionKind, opts: &BuildOptions) -> Result<LadderReport> {
    let ctx = Ctx { fam, target: opts.epsilon, opts };
    let plan = ctx.plan()?;
    let p = plan.partition;
    let (ua, ub, var, v0) = match kind {
        RegionKind::Central if fam.std.smooth_at_mode() => (p.u1, p.u2, Variable::U, p.u_m),
        RegionKind::Left => ctx.side_setup(&plan, Side::Left),
        RegionKind::Right => ctx.side_setup(&plan, Side::Right),
        _ => return Err(Error::Domain(format!("no single-piece ladder for region {}", kind.name()))),
    };
    let ts = ctx.series_at(&var, v0)?;
    let mut rungs = Vec::new();
    ctx.fit(&ts, var.apply(ua), var.apply(ub), &var, true, &mut rungs)?;
    Ok(LadderReport { kind, interval: (ua, ub), rungs })
}

/// Single-piece degree ladder on one region of a hyperbolic, VG or GIG model.
pub fn region_ladder(params: &DistributionParams, kind: RegionKind, opts: &BuildOptions) -> Result<LadderReport> {
    params.validate()?;
    match params {
        DistributionParams::Hyp(p) => ladder_family(&Hyperbolic::new(*p)?.into_family()?, kind, opts),
        DistributionParams::Vg(p) => ladder_family(&VarianceGamma::new(*p)?.into_family()?, kind, opts),
        DistributionParams::Gig(p) => ladder_family(&Gig::new(*p)?.into_family()?, kind, opts),
        DistributionParams::Stable(_) => Err(Error::Domain("stable models have no region ladder".into())),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_model(
    family: &dyn Family,
    dist: DistributionParams,
    loc: f64,
    scale: f64,
    partition: RegionPartition,
    regions: Vec<Region>,
    opts: &BuildOptions,
    start: Instant,
) -> Result<(QuantileModel, bool)> {
    let degrees = regions.iter().map(|r| r.describe()).collect();
    let mut model = QuantileModel {
        dist,
        loc,
        scale,
        partition,
        regions,
        meta: ModelMeta {
            epsilon: opts.epsilon,
            build_info: BuildInfo {
                method: opts.method,
                setup_seconds: 0.0,
                max_error: 0.0,
                max_x_error: 0.0,
                grid_size: opts.grid_size,
                degrees,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        },
    };
    let report = model.verify(family, opts.grid_size)?;
    model.meta.build_info.max_error = report.max_error;
    model.meta.build_info.max_x_error = report.max_x_error;
    model.meta.build_info.setup_seconds = start.elapsed().as_secs_f64();
    let monotone = report.rows.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok((model, monotone))
}

/// Stable models carry the dispatcher's central and tail series; the method is not used.
fn build_stable(st: &Stable, opts: &BuildOptions) -> Result<QuantileModel> {
    let start = Instant::now();
    let u0 = st.std.u0();
    let approx = StableApprox { alpha: st.std.alpha, beta: st.std.beta, right: st.right.clone(), left: st.left.clone() };
    let regions = vec![Region {
        kind: RegionKind::Stable,
        interval: (0.0, 1.0),
        pieces: vec![Piece { interval: (0.0, 1.0), body: PieceBody::Stable(approx) }],
    }];
    let partition = RegionPartition { tau_l: 1e-10, u1: u0, u_m: u0, u2: u0, tau_r: 1e-10, r_tilde: None, r_bar: 0.0 };
    Ok(finish_model(st, DistributionParams::Stable(st.params), st.loc, st.scale, partition, regions, opts, start)?.0)
}
