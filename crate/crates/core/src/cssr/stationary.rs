use crate::error::{Error, Result};

pub const STATIONARY_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 1_000_000;

/// `‖πT − π‖∞`
pub fn stationary_residual(matrix: &[Vec<f64>], pi: &[f64]) -> f64 {
    let next = step(matrix, pi);
    next.iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn step(matrix: &[Vec<f64>], pi: &[f64]) -> Vec<f64> {
    let n = pi.len();
    let mut next = vec![0.0; n];
    for (i, row) in matrix.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            next[j] += pi[i] * p;
        }
    }
    next
}

/// Solves `πT = π, Σπ = 1` for a row-stochastic matrix by power iteration.
///
/// Iterates the lazy chain `(I + T) / 2`, which has the same fixed point but
/// is aperiodic, so periodic machines converge too.
pub fn stationary_distribution(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::InvalidDistribution("empty transition matrix".into()));
    }
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidDistribution("transition matrix is not square".into()));
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let moved = step(matrix, &pi);
        residual = moved
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual < STATIONARY_TOLERANCE {
            return Ok(pi);
        }
        let mut next: Vec<f64> = pi.iter().zip(&moved).map(|(a, b)| 0.5 * (a + b)).collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        pi = next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubly_stochastic() {
        let pi = stationary_distribution(&[vec![0.3, 0.7], vec![0.7, 0.3]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-9 && (pi[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn golden_mean() {
        // π0 = 0.5 π0 + π1, π0 + π1 = 1 → (2/3, 1/3)
        let t = [vec![0.5, 0.5], vec![1.0, 0.0]];
        let pi = stationary_distribution(&t).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-9);
        assert!(stationary_residual(&t, &pi) < 1e-9);
    }

    #[test]
    fn singleton_and_periodic() {
        assert_eq!(stationary_distribution(&[vec![1.0]]).unwrap(), vec![1.0]);
        let pi = stationary_distribution(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(pi, vec![0.5, 0.5]);
    }

    #[test]
    fn three_cycle() {
        let t = [
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ];
        let pi = stationary_distribution(&t).unwrap();
        assert!(pi.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-9));
    }
}
