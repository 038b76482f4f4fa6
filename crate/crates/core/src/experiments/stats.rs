use serde::Serialize;

/// Sample mean with standard error `sd / sqrt(M)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

/// Two-pass mean and standard error, summed in the given order. A single
/// sample has standard error 0.
pub fn mean_stderr(xs: &[f64]) -> MeanStderr {
    let m = xs.len();
    if m == 0 {
        return MeanStderr {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return MeanStderr { mean, stderr: 0.0 };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    MeanStderr {
        mean,
        stderr: (var / m as f64).sqrt(),
    }
}

/// Column-wise statistics of per-realization rows of equal length.
pub(crate) fn columns(rows: &[Vec<f64>]) -> Vec<MeanStderr> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|k| mean_stderr(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let s = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[7.0]).stderr, 0.0);
        let c = columns(&[vec![1.0, 0.0], vec![3.0, 0.0]]);
        assert_eq!(c[0].mean, 2.0);
        assert_eq!(c[1].stderr, 0.0);
    }
}
