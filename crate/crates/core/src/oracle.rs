//! Independent numerical references used to audit analytic code paths.

/// Central-difference Jacobian of `f` at `x`; row `i` is d f_i / d x.
pub fn central_jacobian<F>(f: F, x: &[f64], h: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(x).len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = f(&probe);
        probe[j] = orig - h;
        let down = f(&probe);
        probe[j] = orig;
        for i in 0..m {
            jac[i][j] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    central_jacobian(|p| vec![f(p)], x, h).remove(0)
}

/// Largest elementwise relative error, with `floor` guarding near-zero entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Brute-force delay scan: the lag at which the effect most often reproduces
/// the cause exactly while active, minus the ticks where only one side is active.
pub fn best_matching_lag(effect: &[f64], cause: &[f64], max_lag: usize, active: f64) -> usize {
    let score = |lag: usize| -> i64 {
        let mut s = 0i64;
        for t in lag..effect.len().min(cause.len() + lag) {
            let (e, c) = (effect[t], cause[t - lag]);
            match (e.abs() > active, c.abs() > active) {
                (true, true) if (e - c).abs() < 1e-12 => s += 1,
                (false, false) => {}
                _ => s -= 1,
            }
        }
        s
    };
    (0..=max_lag).max_by_key(|&l| (score(l), std::cmp::Reverse(l))).unwrap()
}
