use quantile_approx::accel::*;
use quantile_approx::series::TruncatedPowerSeries;

fn partial_sums(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut s = 0.0;
    terms.map(|t| {
        s += t;
        s
    })
    .collect()
}

fn alt_harmonic(n: usize) -> Vec<f64> {
    partial_sums((1..=n).map(|k| if k % 2 == 1 { 1.0 / k as f64 } else { -1.0 / k as f64 }))
}

const LN2: f64 = 0.693_147_180_559_945_3;

#[test]
fn levin_examples() {
    assert_eq!(levin_u(&[2.5; 6]).unwrap(), 2.5);
    assert!((levin_u(&alt_harmonic(15)).unwrap() - LN2).abs() < 1e-9);
    let geo = partial_sums((0..8).map(|k| 0.5f64.powi(k)));
    assert!((levin_u(&geo).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn wynn_examples() {
    assert_eq!(wynn_epsilon(&[1.25; 7]).unwrap(), 1.25);
    assert!((wynn_epsilon(&alt_harmonic(15)).unwrap() - LN2).abs() < 1e-6);
    // sum (-1)^k k! x^k is the asymptotic series of int_0^inf e^-t / (1 + x t) dt
    let x: f64 = 0.1;
    let mut fact = 1.0;
    let terms = (0..10).map(|k| {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * fact * x.powi(k)
    });
    let euler = 0.915_633_339_397_880_8;
    assert!((wynn_epsilon(&partial_sums(terms)).unwrap() - euler).abs() < 1e-4);
}

#[test]
fn optimal_truncation_examples() {
    let t = [1.0, 0.5, 0.25, 0.125];
    assert_eq!(optimal_truncation(&t), (4, 1.875));
    let mut fact = 1.0;
    let terms: Vec<f64> = (0..25)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            fact / 10f64.powi(k)
        })
        .collect();
    // |t_9| = |t_10|: the tie goes to the shorter sum
    let (cut, _) = optimal_truncation(&terms);
    assert_eq!(cut, 10);
}

fn exp_series(order: usize) -> TruncatedPowerSeries {
    let mut c = vec![1.0];
    for k in 1..=order {
        let prev = c[k - 1];
        c.push(prev / k as f64);
    }
    TruncatedPowerSeries::new(0.0, c)
}

#[test]
fn pade_examples() {
    let r = pade_from_taylor(&exp_series(2), 1, 1).unwrap();
    assert!((r.numer[0] - 1.0).abs() < 1e-15 && (r.numer[1] - 0.5).abs() < 1e-15);
    assert!((r.denom[0] - 1.0).abs() < 1e-15 && (r.denom[1] + 0.5).abs() < 1e-15);
    let ts = exp_series(5);
    let r = pade_from_taylor(&ts, 5, 0).unwrap();
    assert_eq!(r.numer, ts.coeffs);
    // ln(1+x)/x = sum (-1)^k x^k / (k+1)
    let c: Vec<f64> = (0..5).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k + 1) as f64).collect();
    let ts = TruncatedPowerSeries::new(0.0, c.clone());
    let r = pade_from_taylor(&ts, 2, 2).unwrap();
    let re = reexpand(&r.numer, &r.denom, 4);
    for k in 0..=4 {
        assert!((re[k] - c[k]).abs() < 1e-14);
    }
    assert!(pade_from_taylor(&exp_series(2), 2, 2).is_err());
}

fn reexpand(p: &[f64], q: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for k in 0..=order {
        let mut s = p.get(k).copied().unwrap_or(0.0);
        for j in 1..=k.min(q.len() - 1) {
            s -= q[j] * out[k - j];
        }
        out[k] = s / q[0];
    }
    out
}

#[test]
fn pade_degenerate_table_is_signalled() {
    // even function: the [1/1] system is singular
    let ts = TruncatedPowerSeries::new(0.0, vec![1.0, 0.0, 1.0]);
    assert!(pade_from_taylor(&ts, 1, 1).is_err() || {
        let r = pade_from_taylor(&ts, 1, 1).unwrap();
        !r.eval(0.3).is_finite()
    });
}

#[test]
fn thacher_table() {
    assert_eq!(thacher_theta(3, 0), 0.0);
    assert_eq!(thacher_theta(5, 2), 0.0);
    assert_eq!(thacher_theta(2, 0), 1.0);
    assert_eq!(thacher_theta(2, 2), 0.5);
    assert_eq!(thacher_theta(3, 1), 0.75);
}

#[test]
fn chebyshev_of_monomial() {
    let ts = TruncatedPowerSeries::new(0.0, vec![0.0, 0.0, 1.0]);
    let ch = chebyshev_from_taylor(&ts, (-1.0, 1.0), 2).unwrap();
    // halved-T_0 convention: x^2 = (1/2) T_0 + (1/2) T_2
    assert!((ch.coeffs[0] - 1.0).abs() < 1e-15);
    assert!(ch.coeffs[1].abs() < 1e-15);
    assert!((ch.coeffs[2] - 0.5).abs() < 1e-15);
}

#[test]
fn chebyshev_of_exp_matches_quadrature_coefficients() {
    let reference = [
        2.532_131_755_504_016_7,
        1.130_318_207_984_970_1,
        0.271_495_339_534_076_56,
        0.044_336_849_848_663_805,
        0.005_474_240_442_093_732_7,
        0.000_542_926_311_913_943_75,
    ];
    let ch = chebyshev_from_taylor(&exp_series(30), (-1.0, 1.0), 12).unwrap();
    for (k, r) in reference.iter().enumerate() {
        assert!((ch.coeffs[k] - r).abs() < 1e-10, "k={k}");
    }
    for i in 0..=100 {
        let x = -1.0 + 0.02 * i as f64;
        assert!((ch.eval(x) - x.exp()).abs() < 1e-12);
    }
}

#[test]
fn chebyshev_on_shifted_interval() {
    let ts = exp_series(30);
    let ch = chebyshev_from_taylor(&ts, (0.5, 2.0), 14).unwrap();
    for i in 0..=100 {
        let x = 0.5 + 0.015 * i as f64;
        assert!(((ch.eval(x) - x.exp()) / x.exp()).abs() < 1e-12);
    }
}

#[test]
fn chebyshev_rejects_interval_beyond_radius() {
    let c: Vec<f64> = (0..30).map(|k| 3f64.powi(-k)).collect();
    let ts = TruncatedPowerSeries::new(0.0, c);
    assert!(chebyshev_from_taylor(&ts, (-10.0, 10.0), 8).is_err());
}

#[test]
fn chebyshev_pade_examples() {
    let ch = chebyshev_from_taylor(&exp_series(30), (-1.0, 1.0), 10).unwrap();
    let r = chebyshev_pade(&ch, 6, 0).unwrap();
    let plain = ch.truncate(6).plain();
    for k in 0..=6 {
        assert!((r.numer[k] - plain[k]).abs() < 1e-15);
    }
    // 1/(2 - x) = sum x^k / 2^{k+1}
    let c: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k + 1)).collect();
    let ch = chebyshev_from_taylor(&TruncatedPowerSeries::new(0.0, c), (-1.0, 1.0), 30).unwrap();
    let r = chebyshev_pade(&ch, 1, 1).unwrap();
    for i in 0..=50 {
        let x = -1.0 + 0.04 * i as f64;
        assert!((r.eval(x) - 1.0 / (2.0 - x)).abs() < 1e-12);
    }
}

#[test]
fn rational_serializes_with_basis_tag() {
    let r = pade_from_taylor(&exp_series(4), 2, 2).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    assert!(s.contains("\"basis\":\"monomial\""));
    let back: RationalApproximant = serde_json::from_str(&s).unwrap();
    assert_eq!(back, r);
}

mod properties {
    use super::*;
    use proptest::collection::vec;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pade_order_conditions(m in 0usize..6, n in 0usize..6, c in vec(-1.0f64..1.0, 13)) {
            let mut c = c;
            c[0] = 1.0;
            let ts = TruncatedPowerSeries::new(0.0, c.clone());
            if let Ok(r) = pade_from_taylor(&ts, m, n) {
                // coefficients of Q f - P vanish through degree m + n
                for k in 0..=m + n {
                    let mut s = -r.numer.get(k).copied().unwrap_or(0.0);
                    let mut mag = s.abs();
                    for j in 0..=k.min(n) {
                        s += r.denom[j] * c[k - j];
                        mag += (r.denom[j] * c[k - j]).abs();
                    }
                    prop_assert!(s.abs() <= 1e-12 * mag.max(1e-300), "k={} residual {}", k, s);
                }
            }
        }

        #[test]
        fn chebyshev_equals_direct_polynomial(c in vec(-1.0f64..1.0, 9), lo in -3.0f64..0.0, w in 0.1f64..2.0) {
            let hi = lo + w;
            let mid = 0.5 * (lo + hi);
            let ts = TruncatedPowerSeries::new(mid, c.clone());
            let ch = chebyshev_from_taylor(&ts, (lo, hi), 8).unwrap();
            for i in 0..=100 {
                let v = lo + w * i as f64 / 100.0;
                let direct = ts.eval(v);
                prop_assert!((ch.eval(v) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }

        #[test]
        fn chebyshev_pade_without_denominator_is_truncation(c in vec(-1.0f64..1.0, 9), m in 0usize..8) {
            let ts = TruncatedPowerSeries::new(0.0, c);
            let ch = chebyshev_from_taylor(&ts, (-1.0, 1.0), 8).unwrap();
            let r = chebyshev_pade(&ch, m, 0).unwrap();
            let plain = ch.truncate(m).plain();
            for k in 0..=m {
                prop_assert!((r.numer[k] - plain[k]).abs() < 1e-15);
            }
        }

        #[test]
        fn levin_never_worse_on_alternating(p in 1.0f64..3.0) {
            let sums = partial_sums((1..=15).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } / (k as f64).powf(p)));
            let exact: f64 = partial_sums((1..=200_000).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } / (k as f64).powf(p))).last().copied().unwrap();
            let raw = (sums[14] - exact).abs();
            let acc = (levin_u(&sums).unwrap() - exact).abs();
            prop_assert!(acc <= raw + 1e-10);
        }
    }
}
