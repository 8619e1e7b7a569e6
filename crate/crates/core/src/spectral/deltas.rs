/// Regression deltas over `+-n` frames with edge frames replicated:
/// `d_t = sum_{k=1..n} k (c_{t+k} - c_{t-k}) / (2 sum k^2)`.
pub fn deltas(m: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1, "delta half-window must be at least 1");
    let frames = m.len();
    if frames == 0 {
        return Vec::new();
    }
    let dims = m[0].len();
    let denom = 2.0 * (1..=n).map(|k| (k * k) as f64).sum::<f64>();
    let at = |t: isize| &m[t.clamp(0, frames as isize - 1) as usize];
    (0..frames as isize)
        .map(|t| {
            (0..dims)
                .map(|d| {
                    (1..=n as isize)
                        .map(|k| k as f64 * (at(t + k)[d] - at(t - k)[d]))
                        .sum::<f64>()
                        / denom
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gives_zero() {
        let m = vec![vec![4.0, -1.0]; 6];
        assert!(deltas(&m, 2).iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_slope_is_one_in_the_interior() {
        let m: Vec<Vec<f64>> = (0..10).map(|t| vec![t as f64]).collect();
        let d = deltas(&m, 2);
        for row in &d[2..8] {
            assert!((row[0] - 1.0).abs() < 1e-12);
        }
        // edges see replicated frames and a flatter slope
        assert!(d[0][0] < 1.0);
    }

    #[test]
    fn single_frame() {
        assert_eq!(deltas(&[vec![1.0, 2.0]], 2), vec![vec![0.0, 0.0]]);
    }
}
