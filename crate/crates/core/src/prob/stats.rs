/// Standard deviation of a binomial frequency with success probability `p`
/// (clamped to `[0, 1]`) over `trials` draws.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// 95% normal-approximation half-width for a mean with sample standard deviation `sd`.
pub fn normal_halfwidth(sd: f64, trials: u64) -> f64 {
    1.959_963_984_540_054 * sd / (trials as f64).sqrt()
}
