use std::sync::OnceLock;

use quantile_approx::builder::{build, region_ladder, BuildOptions};
use quantile_approx::dist::*;
use quantile_approx::model::{chebyshev_grid, verification_grid, Method, QuantileModel, RegionKind};

const BMW_EPS: f64 = 2.98e-8;

fn bmw() -> DistributionParams {
    DistributionParams::Hyp(HypParams { alpha: 89.72, beta: 4.7184, delta: 0.0014, mu: -0.0015 })
}

fn bmw_model() -> &'static QuantileModel {
    static MODEL: OnceLock<QuantileModel> = OnceLock::new();
    MODEL.get_or_init(|| build(&bmw(), &BuildOptions::new(BMW_EPS, Method::Pade)).unwrap())
}

fn check_model(model: &QuantileModel, eps: f64) {
    let fam = distribution(&model.dist).unwrap();
    let report = model.verify(fam.as_ref(), 10_000).unwrap();
    assert!(report.max_error <= eps, "max error {} > {eps}", report.max_error);
    assert_eq!(report.max_error, model.meta.build_info.max_error);

    let us = verification_grid(10_000, model.partition.tau_l, model.partition.tau_r);
    let xs: Vec<f64> = us.iter().map(|&u| model.eval(u).unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] <= w[1]), "model is not monotone");

    for pair in model.regions.windows(2) {
        let b = pair[0].interval.1;
        assert_eq!(b, pair[1].interval.0);
        let (xa, xb) = (pair[0].eval(b), pair[1].eval(b));
        let x = model.loc + model.scale * xb;
        let gap = (xa - xb).abs() * model.scale * fam.pdf(x);
        assert!(gap <= 10.0 * eps, "{:?}/{:?} disagree by {gap}", pair[0].kind, pair[1].kind);
    }
}

#[test]
fn bmw_meets_tolerance() {
    let model = bmw_model();
    check_model(model, BMW_EPS);
    let central = model.regions.iter().find(|r| r.kind == RegionKind::Central).unwrap();
    assert!(central.max_total_degree() <= 24);
    assert!(model.meta.build_info.setup_seconds <= 5.0);
    let kinds: Vec<RegionKind> = model.regions.iter().map(|r| r.kind).collect();
    assert_eq!(
        kinds,
        [RegionKind::LeftTail, RegionKind::Left, RegionKind::Central, RegionKind::Right, RegionKind::RightTail]
    );
}

#[test]
fn bmw_mode_is_reproduced() {
    let model = bmw_model();
    let fam = distribution(&model.dist).unwrap();
    let x = model.eval(model.partition.u_m).unwrap();
    assert!((x - fam.mode()).abs() <= BMW_EPS, "{x} vs {}", fam.mode());
}

#[test]
fn partition_is_ordered() {
    let p = bmw_model().partition;
    assert!(0.0 < p.tau_l && p.tau_l < p.u1 && p.u1 < p.u_m && p.u_m < p.u2 && p.u2 < 1.0 - p.tau_r);
    assert!(p.r_bar <= p.r_tilde.unwrap());
}

#[test]
fn verification_grid_contains_tail_thresholds() {
    let p = bmw_model().partition;
    let g = verification_grid(10_000, p.tau_l, p.tau_r);
    assert!(g.contains(&p.tau_l));
    assert!(g.contains(&(1.0 - p.tau_r)));
    assert!(g[0] <= 1e-10 && *g.last().unwrap() >= 1.0 - 1e-10);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn json_round_trip_is_exact() {
    let model = bmw_model();
    let back = QuantileModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(&back, model);
    for u in chebyshev_grid(257) {
        assert_eq!(back.eval(u).unwrap().to_bits(), model.eval(u).unwrap().to_bits());
    }
}

#[test]
fn rebuild_is_bit_identical() {
    let again = build(&bmw(), &BuildOptions::new(BMW_EPS, Method::Pade)).unwrap();
    let model = bmw_model();
    assert_eq!(again.partition, model.partition);
    assert_eq!(again.regions, model.regions);
}

#[test]
fn other_methods_meet_tolerance() {
    for method in [Method::Chebyshev, Method::ChebyPade] {
        let model = build(&bmw(), &BuildOptions::new(BMW_EPS, method)).unwrap();
        check_model(&model, BMW_EPS);
    }
}

#[test]
fn variance_gamma_and_gig_models() {
    let vg = DistributionParams::Vg(VGParams { lambda: 2.0, alpha: 3.0, beta: 1.0, mu: 0.0 });
    check_model(&build(&vg, &BuildOptions::new(1e-8, Method::Pade)).unwrap(), 1e-8);
    let gig = DistributionParams::Gig(GIGParams { lambda: 0.5, eta: 1.0, omega: 2.0 });
    for method in [Method::Pade, Method::Chebyshev, Method::ChebyPade] {
        check_model(&build(&gig, &BuildOptions::new(1e-7, method)).unwrap(), 1e-7);
    }
}

#[test]
fn loose_tolerance_builds() {
    let model = build(&bmw(), &BuildOptions::new(0.1, Method::Pade)).unwrap();
    check_model(&model, 0.1);
}

#[test]
fn stable_model() {
    let p = DistributionParams::Stable(StableParams {
        alpha: 1.7,
        beta: 0.5,
        mu: 0.0,
        sigma: 1.0,
        parametrization: Parametrization::P2,
    });
    let model = build(&p, &BuildOptions::new(1e-8, Method::Pade)).unwrap();
    assert_eq!(model.regions.len(), 1);
    assert_eq!(model.regions[0].kind, RegionKind::Stable);
    assert!(model.meta.build_info.max_error <= 1e-8);
    let back = QuantileModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(back.eval(0.9).unwrap(), model.eval(0.9).unwrap());
}

#[test]
fn single_piece_ladders() {
    let opts = BuildOptions::new(BMW_EPS, Method::Chebyshev);
    let cheb = region_ladder(&bmw(), RegionKind::Left, &opts).unwrap();
    let opts = BuildOptions::new(BMW_EPS, Method::ChebyPade);
    let cp = region_ladder(&bmw(), RegionKind::Left, &opts).unwrap();
    let dc = cheb.degree_for_x(BMW_EPS).unwrap();
    let dp = cp.degree_for_x(BMW_EPS).unwrap();
    assert!(dc >= 30, "Chebyshev degree {dc}");
    assert!(dp <= 12, "Chebyshev-Pade degree {dp}");
}

#[test]
fn invalid_inputs_are_rejected() {
    let bad = DistributionParams::Hyp(HypParams { alpha: 1.0, beta: 2.0, delta: 1.0, mu: 0.0 });
    let err = build(&bad, &BuildOptions::new(1e-8, Method::Pade)).unwrap_err();
    assert_eq!(err.to_string(), "constraint |beta|<alpha violated");
    assert!(build(&bmw(), &BuildOptions::new(0.0, Method::Pade)).is_err());
    assert!(bmw_model().eval(0.0).is_err());
    assert!(bmw_model().eval(1.0).is_err());
    assert!(bmw_model().eval(f64::NAN).is_err());
}

#[test]
fn tampered_model_fails_verification() {
    let mut model = bmw_model().clone();
    model.scale *= 1.001;
    let fam = distribution(&model.dist).unwrap();
    let report = model.verify(fam.as_ref(), 2_000).unwrap();
    assert!(report.max_error > BMW_EPS);
    assert!(QuantileModel::from_json("{\"regions\": []}").is_err());
}
