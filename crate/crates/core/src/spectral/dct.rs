/// Orthonormal DCT-II basis, `n` rows of length `n`.
///
/// Row 0 is scaled by `sqrt(1/n)`, the others by `sqrt(2/n)`.
pub fn dct_matrix(n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            (0..n)
                .map(|i| {
                    scale * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos()
                })
                .collect()
        })
        .collect()
}

pub fn apply_dct(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    basis
        .iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal() {
        let d = dct_matrix(39);
        for i in 0..39 {
            for j in 0..39 {
                let dot: f64 = d[i].iter().zip(&d[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "({i},{j}) = {dot}");
            }
        }
    }

    #[test]
    fn constant_input_only_has_c0() {
        let d = dct_matrix(39);
        let c = apply_dct(&d, &[-3.5; 39]);
        assert!((c[0] - (-3.5 * 39f64.sqrt())).abs() < 1e-10);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-10));
    }
}
