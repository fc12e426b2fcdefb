use rand::Rng;
use rand_distr::StandardNormal;

/// Values of a path on the uniform grid `s_i = i t / n`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub t: f64,
    pub values: Vec<f64>,
}

impl PathGrid {
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t / self.n() as f64
    }
}

/// Writes a bridge from 0 to `target` over `[0, t]` into `values` (length
/// `n + 1`) for a Brownian motion with variance `rate * s` at time `s`. The
/// endpoint is set exactly.
pub fn fill_bridge<R: Rng + ?Sized>(t: f64, target: f64, rate: f64, rng: &mut R, values: &mut [f64]) {
    let n = values.len() - 1;
    let sd = (rate * t / n as f64).sqrt();
    values[0] = 0.0;
    let mut w = 0.0;
    for v in values.iter_mut().skip(1) {
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z;
        *v = w;
    }
    let shift = target - w;
    for (i, v) in values.iter_mut().enumerate().skip(1) {
        *v += shift * (i as f64 / n as f64);
    }
    values[n] = target;
}

/// A standard Brownian bridge `B(s) = W(s) - (s/t) W(t) + (s/t) target` on
/// `n` steps.
pub fn sample_bridge<R: Rng + ?Sized>(t: f64, target: f64, n: usize, rng: &mut R) -> PathGrid {
    assert!(t > 0.0 && n >= 2, "sample_bridge needs t > 0 and n >= 2");
    let mut values = vec![0.0; n + 1];
    fill_bridge(t, target, 1.0, rng, &mut values);
    PathGrid { t, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;

    #[test]
    fn endpoint_is_exact_and_start_is_zero() {
        let mut rng = sample_rng(1, 0, 0);
        for k in 0..50 {
            let target = 0.37 * k as f64 - 3.0;
            let p = sample_bridge(0.8, target, 17, &mut rng);
            assert_eq!(p.values[0], 0.0);
            assert_eq!(p.values[17], target);
        }
    }

    #[test]
    fn fixed_seed_gives_identical_path() {
        let a = sample_bridge(1.0, 0.5, 64, &mut sample_rng(9, 3, 4));
        let b = sample_bridge(1.0, 0.5, 64, &mut sample_rng(9, 3, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn midpoint_has_bridge_variance() {
        // Midpoint of a bridge on [0, t] pinned at 0 is N(0, t/4). Compare the
        // empirical CDF with the normal CDF (Kolmogorov-Smirnov distance).
        let t = 2.0;
        let n = 10_000;
        let mut mids: Vec<f64> = (0..n)
            .map(|i| sample_bridge(t, 0.0, 2, &mut sample_rng(5, 0, i)).values[1])
            .collect();
        mids.sort_by(f64::total_cmp);
        let sd = (t / 4.0).sqrt();
        let cdf = |x: f64| 0.5 * (1.0 + erf(x / (sd * std::f64::consts::SQRT_2)));
        let d = mids
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // 1.63 / sqrt(n) is the 1% critical value.
        assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
    }

    fn erf(x: f64) -> f64 {
        // Abramowitz-Stegun 7.1.26 is too coarse for a KS test; use a series
        // and a continued fraction instead.
        if x.abs() < 2.5 {
            let mut sum = x;
            let mut term = x;
            let x2 = x * x;
            for k in 1..200 {
                term *= -x2 / k as f64;
                sum += term / (2 * k + 1) as f64;
            }
            2.0 / std::f64::consts::PI.sqrt() * sum
        } else {
            let s = x.signum();
            let a = x.abs();
            let mut f = 0.0;
            for k in (1..60).rev() {
                f = (k as f64 / 2.0) / (a + f);
            }
            s * (1.0 - (-a * a).exp() / std::f64::consts::PI.sqrt() / (a + f))
        }
    }
}
