use quantile_approx_wasm::Demo;

fn gig() -> Demo {
    Demo::create("gig", "lambda=0.5,omega=2", 1e-8, "pade").unwrap()
}

#[test]
fn curves_have_matching_lengths() {
    let d = gig();
    let (us, qs) = (d.curve_grid(200), d.quantile_curve(200));
    assert_eq!(us.len(), 200);
    assert_eq!(qs.len(), 200);
    assert!(qs.windows(2).all(|w| w[0] <= w[1]));

    let (eu, ee) = (d.error_grid(1000), d.error_curve(1000));
    assert_eq!(eu.len(), ee.len());
    assert!(ee.iter().all(|&e| e <= d.epsilon()));
    assert!(d.summary().lines().count() == 6);
    assert!(d.json().contains("\"regions\""));
}

#[test]
fn histogram_approximates_density() {
    let d = gig();
    let h = d.histogram(200_000, 3, 40);
    assert_eq!(h.len(), 42);
    let (lo, hi) = (h[0], h[1]);
    let width = (hi - lo) / 40.0;
    let mass: f64 = h[2..].iter().sum::<f64>() * width;
    assert!((mass - 0.99).abs() < 0.01, "{mass}");
    let mids: Vec<f64> = (0..40).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let pdf = d.pdf(mids);
    for (i, (&dens, &f)) in h[2..].iter().zip(&pdf).enumerate() {
        assert!((dens - f).abs() < 0.05 * f.max(0.1), "bin {i}: {dens} vs {f}");
    }
}

#[test]
fn sampling_is_seeded() {
    let d = gig();
    let a = d.sample(5, 11);
    assert_eq!(a, d.sample(5, 11));
    assert_ne!(a, d.sample(5, 12));
}

#[test]
fn bad_input_is_reported() {
    let err = Demo::create("hyp", "alpha=1,beta=2", 1e-8, "pade").err().unwrap();
    assert_eq!(err, "constraint |beta|<alpha violated");
    assert!(Demo::create("gig", "lambda=0.5,omega=2", 1e-8, "simpson").is_err());
    assert!(Demo::create("gig", "lambda=0.5,omega=2", 2.0, "pade").is_err());
}
