use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use quantile_approx::accel::{chebyshev_from_taylor, levin_u, pade_from_taylor};
use quantile_approx::builder::{region_ladder, BuildOptions};
use quantile_approx::dist::*;
use quantile_approx::gig::Gig;
use quantile_approx::hyperbolic::Hyperbolic;
use quantile_approx::model::{uniform_from_bits, Method, QuantileModel, RegionKind};
use quantile_approx::quad::gk15;
use quantile_approx::series::*;
use quantile_approx::special::{bessel_k, bessel_k_deriv};
use quantile_approx::stable::StdStable;
use quantile_approx::vg::VarianceGamma;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const BMW_EPS: f64 = 2.98e-8;
const BMW_PARAMS: &str = "alpha=89.72,beta=4.7184,delta=0.0014,mu=-0.0015";
const BMW: HypParams = HypParams { alpha: 89.72, beta: 4.7184, delta: 0.0014, mu: -0.0015 };

fn qapprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qapprox")).args(args).output().expect("qapprox runs")
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qapprox-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(n: usize, ok: bool, detail: String) -> bool {
    let line = format!("criterion {n}: {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    // Written to the raw handle so the summary shows even when the harness captures output.
    let mut out = std::io::stdout();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    ok
}

fn bmw_model(dir: &Path) -> PathBuf {
    let model = dir.join("bmw.json");
    if !model.exists() {
        let out = qapprox(&["build", "--dist", "hyp", "--params", BMW_PARAMS, "--eps", "2.98e-8", "--out", path_str(&model)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    model
}

fn criterion_1(dir: &Path) -> bool {
    let start = Instant::now();
    let model_path = dir.join("bmw.json");
    let out = qapprox(&["build", "--dist", "hyp", "--params", BMW_PARAMS, "--eps", "2.98e-8", "--out", path_str(&model_path)]);
    let wall = start.elapsed().as_secs_f64();
    if !out.status.success() {
        return report(1, false, format!("build failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let model = QuantileModel::from_json(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    let central = model.regions.iter().find(|r| r.kind == RegionKind::Central).unwrap().max_total_degree();

    let csv = dir.join("verify.csv");
    let v = qapprox(&["verify", "--model", path_str(&model_path), "--grid-size", "10000", "--out", path_str(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut max_err = 0.0f64;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        max_err = max_err.max(err);
        rows += 1;
    }
    let setup = model.meta.build_info.setup_seconds;
    let ok = v.status.code() == Some(0) && max_err <= BMW_EPS && central <= 24 && setup <= 5.0 && rows >= 10_000;
    report(
        1,
        ok,
        format!("max |u-F(Q(u))| = {max_err:.3e} over {rows} points, central degree {central}, setup {setup:.3} s (process {wall:.3} s)"),
    )
}

fn criterion_2() -> bool {
    let params = DistributionParams::Hyp(BMW);
    let cheb = region_ladder(&params, RegionKind::Left, &BuildOptions::new(BMW_EPS, Method::Chebyshev)).unwrap();
    let cp = region_ladder(&params, RegionKind::Left, &BuildOptions::new(BMW_EPS, Method::ChebyPade)).unwrap();
    let dc = cheb.degree_for_x(BMW_EPS);
    let dp = cp.degree_for_x(BMW_EPS);
    let ok = dc.is_none_or(|d| d >= 30) && dp.is_some_and(|d| d <= 12);
    report(2, ok, format!("left region single piece: Chebyshev degree {dc:?}, Chebyshev-Pade total degree {dp:?}"))
}

fn families() -> Vec<DistributionParams> {
    vec![
        DistributionParams::Hyp(BMW),
        DistributionParams::Vg(VGParams { lambda: 2.0, alpha: 3.0, beta: 1.0, mu: 0.0 }),
        DistributionParams::Gig(GIGParams { lambda: 0.5, eta: 1.0, omega: 2.0 }),
        DistributionParams::Stable(StableParams {
            alpha: 1.7,
            beta: 0.5,
            mu: 0.0,
            sigma: 1.0,
            parametrization: Parametrization::P2,
        }),
    ]
}

fn criterion_3() -> bool {
    let us: Vec<f64> = (1..=20).map(|i| i as f64 / 21.0).collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for params in families() {
        let fam = distribution(&params).unwrap();
        for &u in &us {
            let q = fam.quantile(u).unwrap();
            let back = if u > 0.5 { 1.0 - fam.sf(q).unwrap() } else { fam.cdf(q).unwrap() };
            worst = worst.max((back - u).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(3, worst <= 1e-12 && secs <= 10.0, format!("max |F(Q(u))-u| = {worst:.2e} over 4 families x 20 points in {secs:.2} s"))
}

fn quantile(params: DistributionParams, u: f64) -> f64 {
    distribution(&params).unwrap().quantile(u).unwrap()
}

fn criterion_4() -> bool {
    let mut worst = 0.0f64;
    let mut note = |a: f64, b: f64| worst = worst.max((a - b).abs() / a.abs().max(1.0));
    let us = [1e-6, 0.05, 0.3, 0.5, 0.8, 0.999];
    let hyp = |beta| DistributionParams::Hyp(HypParams { alpha: 2.0, beta, delta: 1.0, mu: 0.0 });
    let vg = |beta| DistributionParams::Vg(VGParams { lambda: 1.5, alpha: 2.0, beta, mu: 0.0 });
    let gig = |lambda| DistributionParams::Gig(GIGParams { lambda, eta: 1.0, omega: 2.0 });
    let st = |beta| {
        DistributionParams::Stable(StableParams { alpha: 1.7, beta, mu: 0.0, sigma: 1.0, parametrization: Parametrization::P2 })
    };
    for u in us {
        note(quantile(hyp(0.8), u), -quantile(hyp(-0.8), 1.0 - u));
        note(quantile(vg(0.7), u), -quantile(vg(-0.7), 1.0 - u));
        note(quantile(gig(1.5), u) * quantile(gig(-1.5), 1.0 - u), 1.0);
        note(quantile(st(0.5), u), -quantile(st(-0.5), 1.0 - u));
    }
    let out = qapprox(&["oracle", "--dist", "stable", "--params", "alpha=2,beta=0", "--u", "0.975"]);
    let gauss: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap_or(f64::NAN);
    let gerr = (gauss - 2.7718076486993558906).abs();
    report(
        4,
        worst <= 1e-8 && gerr <= 1e-6,
        format!("largest identity defect {worst:.2e}; alpha=2 Q(0.975) = {gauss} (off by {gerr:.1e})"),
    )
}

/// Raw order-20 partial sum and its [10/10] Pade form against the oracle at `u0 +- r/2`.
fn central_check<F: Fn(usize) -> TruncatedPowerSeries, O: Fn(f64) -> f64>(make: F, probe: usize, oracle: O) -> (f64, f64) {
    let radius = cauchy_hadamard_radius(&make(probe).coeffs).unwrap();
    let ts = make(20);
    let pade = pade_from_taylor(&ts, 10, 10).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for u in [ts.center - 0.5 * radius, ts.center + 0.5 * radius] {
        let exact = oracle(u);
        worst.0 = worst.0.max((ts.eval(u) - exact).abs());
        worst.1 = worst.1.max((pade.eval(u) - exact).abs());
    }
    worst
}

fn criterion_5() -> bool {
    let hyp = Hyperbolic::new(BMW).unwrap().into_family().unwrap();
    let vg = VarianceGamma::new(VGParams { lambda: 2.0, alpha: 3.0, beta: 1.0, mu: 0.0 }).unwrap().into_family().unwrap();
    let gig = Gig::new(GIGParams { lambda: 0.5, eta: 1.0, omega: 2.0 }).unwrap().into_family().unwrap();
    let st = StdStable::new(1.7, 0.5).unwrap();

    let (a, m) = (hyp.anchor.p_m, hyp.anchor.mode);
    let h = central_check(|n| hyp.std.taylor_coeffs(a, m, n), 40, |u| hyp.to_std(hyp.quantile(u).unwrap()));
    let h = (h.0 * hyp.scale, h.1 * hyp.scale);
    let x0 = vg.to_std(vg.quantile(0.5).unwrap());
    let v = central_check(|n| vg.std.taylor_coeffs(0.5, x0, n).unwrap(), 30, |u| vg.to_std(vg.quantile(u).unwrap()));
    let (a, m) = (gig.anchor.p_m, gig.anchor.mode);
    let g = central_check(|n| gig.std.taylor_coeffs(a, m, n), 40, |u| gig.to_std(gig.quantile(u).unwrap()));
    let s = central_check(|n| st.quantile_central(n).unwrap(), 80, |u| st.quantile_oracle(u).unwrap());
    let summed = [h.1, v.1, g.1, s.1].into_iter().fold(0.0, f64::max);

    let hi = 1.0 - 1e-8;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let tails = [
        rel(hyp.std.tail(Side::Right, 20).eval(hi), hyp.to_std(hyp.quantile(hi).unwrap())),
        rel(hyp.std.tail(Side::Left, 20).eval(1e-8), hyp.to_std(hyp.quantile(1e-8).unwrap())),
        rel(vg.std.tail(Side::Right, 10).unwrap().eval(hi).unwrap(), vg.to_std(vg.quantile(hi).unwrap())),
        rel(gig.std.tail(Side::Right, 10).unwrap().eval(hi).unwrap(), gig.to_std(gig.quantile(hi).unwrap())),
        rel(st.quantile_tail(40).unwrap().eval(hi), st.quantile_oracle(hi).unwrap()),
    ];
    let tail = tails.into_iter().fold(0.0, f64::max);
    let ok = summed <= 1e-9 && tail <= 1e-5;
    let raw_over: Vec<&str> =
        [("hyp", h.0), ("vg", v.0), ("gig", g.0), ("stable", s.0)].iter().filter(|(_, e)| *e > 1e-9).map(|(n, _)| *n).collect();
    report(
        5,
        ok,
        format!(
            "order-20 at u0 +- r/2, raw partial sums hyp {:.1e} vg {:.1e} gig {:.1e} stable {:.1e} (above 1e-9: {raw_over:?}); \
             [10/10] Pade of the same coefficients max {summed:.1e}; tails at 1-1e-8 max rel {tail:.1e}",
            h.0, v.0, g.0, s.0
        ),
    )
}

fn criterion_6() -> bool {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let order = 2 + (unit() * 9.0) as usize;
        let a1 = (0.5 + 1.5 * unit()) * if unit() < 0.5 { -1.0 } else { 1.0 };
        let mut c = vec![0.0, a1];
        c.extend((1..order).map(|_| 2.0 * unit() - 1.0));
        let f = TruncatedPowerSeries::new(0.0, c);
        let newton = revert_newton(&f).unwrap();
        for form in [revert_lagrange_solved(&f).unwrap(), revert_lagrange_recursive(&f).unwrap()] {
            for (x, y) in form.coeffs.iter().zip(&newton.coeffs) {
                worst = worst.max((x - y).abs() / y.abs().max(1.0));
            }
        }
    }
    report(6, worst <= 1e-12, format!("50 fuzzed series, largest Lagrange/Newton reversion mismatch {worst:.1e}"))
}

fn criterion_7() -> bool {
    let mut sums = Vec::new();
    let mut s = 0.0;
    for k in 1..=15 {
        s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        sums.push(s);
    }
    let levin = (levin_u(&sums).unwrap() - std::f64::consts::LN_2).abs();

    let mut exp = vec![1.0];
    for k in 1..=30 {
        let prev = exp[k - 1];
        exp.push(prev / k as f64);
    }
    let ts = TruncatedPowerSeries::new(0.0, exp.clone());
    let mut order = 0.0f64;
    for (m, n) in [(2, 2), (3, 2), (4, 4), (6, 3)] {
        let r = pade_from_taylor(&ts, m, n).unwrap();
        for k in 0..=m + n {
            let mut res = -r.numer.get(k).copied().unwrap_or(0.0);
            for j in 0..=k.min(n) {
                res += r.denom[j] * exp[k - j];
            }
            order = order.max(res.abs());
        }
    }

    // Coefficients 2 I_k(1) of exp on [-1, 1], from quadrature of e^{cos t} cos(kt).
    let reference = [
        2.532_131_755_504_016_7,
        1.130_318_207_984_970_1,
        0.271_495_339_534_076_56,
        0.044_336_849_848_663_805,
        0.005_474_240_442_093_732_7,
        0.000_542_926_311_913_943_75,
    ];
    let ch = chebyshev_from_taylor(&ts, (-1.0, 1.0), 12).unwrap();
    let cheb = reference.iter().zip(&ch.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ok = levin <= 1e-9 && order <= 1e-14 && cheb <= 1e-10;
    report(
        7,
        ok,
        format!("Levin ln 2 error {levin:.1e}; Pade order residual {order:.1e}; Chebyshev coefficient error {cheb:.1e}"),
    )
}

fn criterion_8() -> bool {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let (mut rec, mut der) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let v = 20.0 * unit();
        let z = 0.05 + 40.0 * unit();
        let lhs = bessel_k(v + 1.0, z).unwrap();
        let rhs = bessel_k(v - 1.0, z).unwrap() + 2.0 * v / z * bessel_k(v, z).unwrap();
        rec = rec.max(((lhs - rhs) / lhs).abs());
        let h = 1e-5 * z;
        let fd = (bessel_k(v, z + h).unwrap() - bessel_k(v, z - h).unwrap()) / (2.0 * h);
        let d = bessel_k_deriv(v, z, 1).unwrap();
        der = der.max(((d - fd) / d).abs());
    }
    report(8, rec <= 1e-10 && der <= 1e-6, format!("K recurrence rel defect {rec:.1e}; derivative vs central difference {der:.1e}"))
}

fn criterion_9(dir: &Path) -> bool {
    let model_path = bmw_model(dir);
    let n = 1_000_000usize;
    let samples = dir.join("samples.csv");
    let out = qapprox(&["sample", "--model", path_str(&model_path), "-n", "1000000", "--seed", "9", "--out", path_str(&samples)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&samples).unwrap();
    let mut xs: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), n);
    xs.sort_by(f64::total_cmp);

    let fam = distribution(&DistributionParams::Hyp(BMW)).unwrap();
    let pdf = |x: f64| fam.pdf(x);
    let mut d = 0.0f64;
    let mut f = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        f = if i % 10_000 == 0 { fam.cdf(x).unwrap() } else { f + gk15(&pdf, xs[i - 1], x).0 };
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    let crit = 1.63 / (n as f64).sqrt();

    let model = QuantileModel::from_json(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(99);
    let start = Instant::now();
    let mut acc = 0.0;
    for _ in 0..n {
        acc += model.eval_unchecked(uniform_from_bits(rng.next_u64()));
    }
    let rate = n as f64 / start.elapsed().as_secs_f64();
    assert!(acc.is_finite());
    report(9, d <= crit && rate >= 1e6, format!("KS D = {d:.2e} (1% critical {crit:.2e}); {rate:.3e} variates/s"))
}

#[test]
fn acceptance_criteria() {
    let dir = workdir();
    let results = [
        criterion_1(&dir),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(&dir),
    ];
    let _ = std::fs::remove_dir_all(&dir);
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
