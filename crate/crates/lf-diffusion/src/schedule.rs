use crate::error::DiffusionError;
use crate::Result;

/// Default number of diffusion steps.
pub const DEFAULT_T: usize = 1000;
/// Default first-step noise variance of the linear schedule.
pub const DEFAULT_BETA_1: f64 = 1e-4;
/// Default last-step noise variance of the linear schedule.
pub const DEFAULT_BETA_T: f64 = 2e-2;

/// Precomputed linear noise schedule.
///
/// All per-step quantities are 1-indexed by timestep `t` in `1..=T`:
/// `beta(t)` is the step variance, `alpha(t) = 1 - beta(t)`,
/// `alpha_bar(t)` the cumulative product of alphas (with the convention
/// `alpha_bar(0) = 1`), and `sigma(t)` the reverse-step noise scale, chosen
/// as the posterior standard deviation
/// `sigma(t)^2 = ((1 - alpha_bar(t-1)) / (1 - alpha_bar(t))) * beta(t)`
/// (which reduces to `sigma(1)^2 = beta(1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    t_max: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
    sigma: Vec<f64>,
}

/// Build a linear schedule with `T` steps from `beta_1` to `beta_t_max`
/// inclusive.
pub fn make_schedule(t_max: usize, beta_1: f64, beta_t_max: f64) -> Result<NoiseSchedule> {
    if t_max < 2 {
        return Err(DiffusionError::InvalidSchedule(format!("T must be >= 2, got {t_max}")));
    }
    if !(beta_1 > 0.0 && beta_1 < beta_t_max && beta_t_max < 1.0) {
        return Err(DiffusionError::InvalidSchedule(format!(
            "need 0 < beta_1 < beta_T < 1, got beta_1 = {beta_1}, beta_T = {beta_t_max}"
        )));
    }
    let step = (beta_t_max - beta_1) / (t_max - 1) as f64;
    let mut beta = Vec::with_capacity(t_max);
    let mut alpha = Vec::with_capacity(t_max);
    let mut alpha_bar = Vec::with_capacity(t_max);
    let mut sigma = Vec::with_capacity(t_max);
    let mut running = 1.0;
    for i in 0..t_max {
        let b = if i + 1 == t_max { beta_t_max } else { beta_1 + step * i as f64 };
        let a = 1.0 - b;
        let prev_bar = running;
        running *= a;
        beta.push(b);
        alpha.push(a);
        alpha_bar.push(running);
        // Posterior variance; degenerate at t = 1 where it is beta_1.
        let var = if i == 0 { b } else { (1.0 - prev_bar) / (1.0 - running) * b };
        sigma.push(var.sqrt());
    }
    // The linear ramp with the validated endpoints guarantees both
    // monotonicity invariants; keep them as hard asserts all the same.
    assert!(beta.windows(2).all(|w| w[0] < w[1]), "beta must increase strictly");
    assert!(alpha_bar.windows(2).all(|w| w[0] > w[1]), "alpha_bar must decrease strictly");
    Ok(NoiseSchedule { t_max, beta, alpha, alpha_bar, sigma })
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        make_schedule(DEFAULT_T, DEFAULT_BETA_1, DEFAULT_BETA_T).expect("default schedule is valid")
    }
}

impl NoiseSchedule {
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    fn check(&self, t: usize, lo: usize) -> Result<()> {
        if t < lo || t > self.t_max {
            return Err(DiffusionError::InvalidTimestep { t, lo, t_max: self.t_max });
        }
        Ok(())
    }

    /// Step variance `beta(t)`, `t` in `1..=T`.
    pub fn beta(&self, t: usize) -> Result<f64> {
        self.check(t, 1)?;
        Ok(self.beta[t - 1])
    }

    /// `alpha(t) = 1 - beta(t)`, `t` in `1..=T`.
    pub fn alpha(&self, t: usize) -> Result<f64> {
        self.check(t, 1)?;
        Ok(self.alpha[t - 1])
    }

    /// Cumulative product of alphas; `alpha_bar(0) = 1` by convention,
    /// `t` in `0..=T`.
    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        self.check(t, 0)?;
        Ok(if t == 0 { 1.0 } else { self.alpha_bar[t - 1] })
    }

    /// Reverse-step noise scale, `t` in `1..=T`.
    pub fn sigma(&self, t: usize) -> Result<f64> {
        self.check(t, 1)?;
        Ok(self.sigma[t - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_endpoints() {
        let s = NoiseSchedule::default();
        assert_eq!(s.t_max(), 1000);
        assert_eq!(s.beta(1).unwrap(), 1e-4);
        assert_eq!(s.beta(1000).unwrap(), 2e-2);
        assert_eq!(s.alpha_bar(0).unwrap(), 1.0);
        assert!((s.alpha_bar(1).unwrap() - 0.9999).abs() < 1e-15);
    }

    #[test]
    fn alpha_bar_matches_cumulative_product_oracle() {
        let s = NoiseSchedule::default();
        let beta_2 = 1e-4 + (2e-2 - 1e-4) / 999.0;
        let want = 0.9999 * (1.0 - beta_2);
        assert!((s.alpha_bar(2).unwrap() - want).abs() < 1e-15);
        // Full independent product at a deeper step.
        let mut prod = 1.0;
        for t in 1..=137 {
            prod *= 1.0 - (1e-4 + (2e-2 - 1e-4) * (t - 1) as f64 / 999.0);
        }
        assert!((s.alpha_bar(137).unwrap() - prod).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_over_the_full_schedule() {
        let s = NoiseSchedule::default();
        for t in 2..=1000 {
            assert!(s.beta(t).unwrap() > s.beta(t - 1).unwrap());
            assert!(s.alpha_bar(t).unwrap() < s.alpha_bar(t - 1).unwrap());
        }
        assert!(s.alpha_bar(1000).unwrap() < s.alpha_bar(1).unwrap());
    }

    #[test]
    fn sigma_is_the_posterior_std() {
        let s = NoiseSchedule::default();
        assert!((s.sigma(1).unwrap() - 1e-4f64.sqrt()).abs() < 1e-18);
        for t in [2usize, 17, 500, 1000] {
            let want = ((1.0 - s.alpha_bar(t - 1).unwrap()) / (1.0 - s.alpha_bar(t).unwrap())
                * s.beta(t).unwrap())
            .sqrt();
            assert_eq!(s.sigma(t).unwrap(), want);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(make_schedule(1, 1e-4, 2e-2).is_err());
        assert!(make_schedule(10, 0.0, 2e-2).is_err());
        assert!(make_schedule(10, 2e-2, 1e-4).is_err());
        assert!(make_schedule(10, 1e-4, 1.0).is_err());
        assert!(make_schedule(10, 1e-4, 1e-4).is_err());
    }

    #[test]
    fn out_of_range_timesteps_are_rejected() {
        let s = make_schedule(10, 1e-4, 2e-2).unwrap();
        assert!(s.beta(0).is_err());
        assert!(s.beta(11).is_err());
        assert!(s.alpha_bar(11).is_err());
        assert!(s.alpha_bar(0).is_ok());
        assert!(s.sigma(0).is_err());
    }
}
