//! Small numeric helpers.

/// Compensated (Kahan) summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx = kahan_sum(x.iter().copied());
    let sy = kahan_sum(y.iter().copied());
    let sxx = kahan_sum(x.iter().map(|v| v * v));
    let sxy = kahan_sum(x.iter().zip(y).map(|(a, b)| a * b));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_accumulation() {
        let vals: Vec<f64> = (0..100_000).map(|_| 0.01).collect();
        let naive: f64 = vals.iter().sum();
        let compensated = kahan_sum(vals);
        assert!((compensated - 1000.0).abs() <= (naive - 1000.0).abs());
        assert!((compensated - 1000.0).abs() < 1e-10);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 2.5).abs() < 1e-12);
        assert!((b + 1.0).abs() < 1e-12);
    }
}
