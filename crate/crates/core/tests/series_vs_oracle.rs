use quantile_approx::accel::pade_from_taylor;
use quantile_approx::dist::*;
use quantile_approx::gig::Gig;
use quantile_approx::hyperbolic::Hyperbolic;
use quantile_approx::series::{cauchy_hadamard_radius, TruncatedPowerSeries};
use quantile_approx::stable::StdStable;
use quantile_approx::vg::VarianceGamma;

const BMW: HypParams = HypParams { alpha: 89.72, beta: 4.7184, delta: 0.0014, mu: -0.0015 };
const VG: VGParams = VGParams { lambda: 2.0, alpha: 3.0, beta: 1.0, mu: 0.0 };
const GIG: GIGParams = GIGParams { lambda: 0.5, eta: 1.0, omega: 2.0 };

struct Central {
    series: TruncatedPowerSeries,
    radius: f64,
}

/// Order-20 expansion about `u0` with the radius estimated from an order-`probe` expansion.
fn central<F: Fn(usize) -> TruncatedPowerSeries>(make: F, probe: usize) -> Central {
    let radius = cauchy_hadamard_radius(&make(probe).coeffs).unwrap();
    Central { series: make(20), radius }
}

/// Largest deviation of the raw partial sum and of the `[10/10]` Padé form from `oracle` at `u0 +- r/2`.
fn deviations<O: Fn(f64) -> f64>(c: &Central, oracle: O) -> (f64, f64) {
    let pade = pade_from_taylor(&c.series, 10, 10).unwrap();
    let u0 = c.series.center;
    let mut worst = (0.0f64, 0.0f64);
    for u in [u0 - 0.5 * c.radius, u0 + 0.5 * c.radius] {
        let exact = oracle(u);
        worst.0 = worst.0.max((c.series.eval(u) - exact).abs());
        worst.1 = worst.1.max((pade.eval(u) - exact).abs());
    }
    worst
}

#[test]
fn hyperbolic_central_series() {
    let fam = Hyperbolic::new(BMW).unwrap().into_family().unwrap();
    let a = fam.anchor;
    let c = central(|n| fam.std.taylor_coeffs(a.p_m, a.mode, n), 40);
    assert!(c.radius > 0.05 && c.radius < 0.5, "{}", c.radius);
    let (raw, pade) = deviations(&c, |u| fam.to_std(fam.quantile(u).unwrap()));
    assert!(raw * fam.scale <= 1e-9, "raw partial sum off by {raw}");
    assert!(pade <= 1e-9, "Pade form off by {pade}");
}

#[test]
fn variance_gamma_central_series() {
    let fam = VarianceGamma::new(VG).unwrap().into_family().unwrap();
    let x0 = fam.to_std(fam.quantile(0.5).unwrap());
    let c = central(|n| fam.std.taylor_coeffs(0.5, x0, n).unwrap(), 30);
    let (raw, pade) = deviations(&c, |u| fam.to_std(fam.quantile(u).unwrap()));
    assert!(raw <= 1e-9, "raw partial sum off by {raw}");
    assert!(pade <= 1e-9, "Pade form off by {pade}");
}

#[test]
fn gig_central_series() {
    let fam = Gig::new(GIG).unwrap().into_family().unwrap();
    let a = fam.anchor;
    let c = central(|n| fam.std.taylor_coeffs(a.p_m, a.mode, n), 40);
    let (raw, pade) = deviations(&c, |u| fam.to_std(fam.quantile(u).unwrap()));
    assert!(pade <= 1e-9, "Pade form off by {pade}");
    // The order-20 remainder at half the radius is of order 2^-21 times the coefficient scale.
    assert!(raw <= 1e-6, "raw partial sum off by {raw}");
}

#[test]
fn stable_central_series() {
    let d = StdStable::new(1.7, 0.5).unwrap();
    let u0 = d.u0();
    let c = central(|n| d.quantile_central(n).unwrap(), 80);
    let (raw, pade) = deviations(&c, |u| d.quantile_oracle(u).unwrap());
    assert!(pade <= 1e-9, "Pade form off by {pade}");
    assert!(raw <= 1e-6, "raw partial sum off by {raw}");
    assert_eq!(c.series.eval(u0), 0.0);
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn hyperbolic_tails() {
    let fam = Hyperbolic::new(BMW).unwrap().into_family().unwrap();
    for (side, u) in [(Side::Right, 1.0 - 1e-8), (Side::Left, 1e-8)] {
        let x = fam.std.tail(side, 20).eval(u);
        let exact = fam.to_std(fam.quantile(u).unwrap());
        assert!(rel(x, exact) <= 1e-5, "{side:?}: {x} vs {exact}");
    }
}

#[test]
fn variance_gamma_tails() {
    let fam = VarianceGamma::new(VG).unwrap().into_family().unwrap();
    for (side, u) in [(Side::Right, 1.0 - 1e-8), (Side::Left, 1e-8)] {
        let x = fam.std.tail(side, 10).unwrap().eval(u).unwrap();
        let exact = fam.to_std(fam.quantile(u).unwrap());
        assert!(rel(x, exact) <= 1e-5, "{side:?}: {x} vs {exact}");
    }
}

#[test]
fn gig_tails() {
    let fam = Gig::new(GIG).unwrap().into_family().unwrap();
    for (side, u) in [(Side::Right, 1.0 - 1e-8), (Side::Left, 1e-8)] {
        let x = fam.std.tail(side, 10).unwrap().eval(u).unwrap();
        let exact = fam.to_std(fam.quantile(u).unwrap());
        assert!(rel(x, exact) <= 1e-5, "{side:?}: {x} vs {exact}");
    }
}

#[test]
fn stable_tails() {
    let d = StdStable::new(1.7, 0.5).unwrap();
    let right = d.quantile_tail(40).unwrap();
    let u = 1.0 - 1e-8;
    let (x, exact) = (right.eval(u), d.quantile_oracle(u).unwrap());
    assert!(rel(x, exact) <= 1e-5, "right: {x} vs {exact}");
    let r = d.reflected();
    let left = r.quantile_tail(40).unwrap();
    let (x, exact) = (-left.eval(u), d.quantile_oracle(1e-8).unwrap());
    assert!(rel(x, exact) <= 1e-5, "left: {x} vs {exact}");
}
