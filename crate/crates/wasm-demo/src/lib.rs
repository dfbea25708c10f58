//! Browser bindings: build a model, then draw its quantile curve, its error
//! curve and a histogram of inversion samples.

use quantile_approx::builder::{build, BuildOptions};
use quantile_approx::dist::{distribution, DistributionParams, Family};
use quantile_approx::model::{chebyshev_grid, uniform_from_bits, verification_grid, Method, QuantileModel};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    model: QuantileModel,
    family: Box<dyn Family>,
}

impl Demo {
    /// Native entry point; errors come back as display strings.
    pub fn create(dist: &str, params: &str, eps: f64, method: &str) -> Result<Demo, String> {
        let params = DistributionParams::parse(dist, params).map_err(|e| e.to_string())?;
        let method: Method = method.parse().map_err(|e: quantile_approx::Error| e.to_string())?;
        let model = build(&params, &BuildOptions::new(eps, method)).map_err(|e| e.to_string())?;
        let family = distribution(&params).map_err(|e| e.to_string())?;
        Ok(Demo { model, family })
    }

    pub fn model(&self) -> &QuantileModel {
        &self.model
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(dist: &str, params: &str, eps: f64, method: &str) -> Result<Demo, JsError> {
        Self::create(dist, params, eps, method).map_err(|e| JsError::new(&e))
    }

    /// Model as pretty-printed JSON.
    pub fn json(&self) -> String {
        self.model.to_json().unwrap_or_default()
    }

    /// One line per region, as printed by the command-line builder.
    pub fn summary(&self) -> String {
        let info = &self.model.meta.build_info;
        let mut s = format!(
            "setup {:.3} s, max |u - F(Q(u))| = {:.3e} (epsilon {:.3e})\n",
            info.setup_seconds, info.max_error, self.model.meta.epsilon
        );
        for d in &info.degrees {
            s.push_str(d);
            s.push('\n');
        }
        s
    }

    pub fn epsilon(&self) -> f64 {
        self.model.meta.epsilon
    }

    /// Chebyshev-spaced `u` values used by [`Demo::quantile_curve`].
    pub fn curve_grid(&self, n: usize) -> Vec<f64> {
        chebyshev_grid(n)
    }

    pub fn quantile_curve(&self, n: usize) -> Vec<f64> {
        chebyshev_grid(n).into_iter().map(|u| self.model.eval_unchecked(u)).collect()
    }

    /// Verification-grid `u` values used by [`Demo::error_curve`].
    pub fn error_grid(&self, n: usize) -> Vec<f64> {
        let p = &self.model.partition;
        verification_grid(n, p.tau_l, p.tau_r)
    }

    /// `|u - F(Q_A(u))|` on [`Demo::error_grid`].
    pub fn error_curve(&self, n: usize) -> Vec<f64> {
        let us = self.error_grid(n);
        match self.model.verify_at(self.family.as_ref(), &us) {
            Ok(r) => r.rows.into_iter().map(|(_, _, e)| e).collect(),
            Err(_) => vec![f64::NAN; us.len()],
        }
    }

    /// `n` inversion samples from a seeded xoshiro256++ stream.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n).map(|_| self.model.eval_unchecked(uniform_from_bits(rng.next_u64()))).collect()
    }

    /// `[lo, hi, d_0, .., d_{bins-1}]`: density-normalized counts between the
    /// 0.5% and 99.5% model quantiles.
    pub fn histogram(&self, n: usize, seed: u64, bins: usize) -> Vec<f64> {
        let bins = bins.max(1);
        let lo = self.model.eval_unchecked(0.005);
        let hi = self.model.eval_unchecked(0.995);
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0.0; bins];
        for x in self.sample(n, seed) {
            if x >= lo && x < hi {
                counts[(((x - lo) / width) as usize).min(bins - 1)] += 1.0;
            }
        }
        let norm = 1.0 / (n.max(1) as f64 * width);
        let mut out = vec![lo, hi];
        out.extend(counts.into_iter().map(|c| c * norm));
        out
    }

    /// Exact density at each `x`, for overlaying on the histogram.
    pub fn pdf(&self, xs: Vec<f64>) -> Vec<f64> {
        xs.into_iter().map(|x| self.family.pdf(x)).collect()
    }
}
