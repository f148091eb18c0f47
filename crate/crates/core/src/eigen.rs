//! Dominant eigenpair of a Hermitian positive semidefinite operator by
//! (optionally shifted) power iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Stop once `||A v - lambda v|| / lambda` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Iterate on `A - shift I`. Must stay below the smallest eigenvalue
    /// magnitude gap that keeps the top eigenvalue dominant.
    pub shift: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit-norm eigenvector.
    pub vector: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `x^H y`.
fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter()
        .zip(y)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

impl PowerIteration {
    /// Top eigenpair of the `dim x dim` operator `apply`.
    ///
    /// Runs from the all-ones vector and from a fixed perturbation of it and
    /// keeps the larger eigenvalue, so a start orthogonal to the dominant
    /// eigenvector cannot stall on a smaller one. Fully deterministic.
    pub fn top_eigenpair<F>(&self, dim: usize, apply: F) -> Result<Eigenpair>
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("empty operator".into()));
        }
        let ones = vec![Complex64::new(1.0, 0.0); dim];
        let perturbed: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::new(1.0, 0.5 * (i + 1) as f64 / dim as f64))
            .collect();
        let first = self.run(ones, &apply)?;
        let second = self.run(perturbed, &apply)?;
        let tie = self.tolerance * first.value.abs().max(1.0);
        Ok(if second.value > first.value + tie {
            second
        } else {
            first
        })
    }

    fn run<F>(&self, start: Vec<Complex64>, apply: &F) -> Result<Eigenpair>
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let scale = norm(&start);
        let mut v: Vec<Complex64> = start.iter().map(|z| z / scale).collect();
        let mut residual = f64::INFINITY;
        for iteration in 1..=self.max_iterations {
            let av = apply(&v);
            if av.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: v.len(),
                    got: av.len(),
                });
            }
            let lambda = inner(&v, &av).re;
            let av_norm = norm(&av);
            if av_norm == 0.0 {
                // v lies in the null space; the operator may be zero
                return Ok(Eigenpair {
                    value: 0.0,
                    vector: v,
                    iterations: iteration,
                    residual: 0.0,
                });
            }
            let diff: f64 = av
                .iter()
                .zip(&v)
                .map(|(a, x)| (a - x * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = diff / lambda.abs();
            if residual < self.tolerance {
                return Ok(Eigenpair {
                    value: lambda,
                    vector: v,
                    iterations: iteration,
                    residual,
                });
            }
            let next: Vec<Complex64> = av.iter().zip(&v).map(|(a, x)| a - x * self.shift).collect();
            let next_norm = norm(&next);
            if next_norm == 0.0 {
                break;
            }
            v = next.into_iter().map(|z| z / next_norm).collect();
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
            residual,
        })
    }
}

/// Dense Hermitian matrix-vector product; `matrix` is row-major `dim x dim`.
pub fn dense_apply(matrix: &[Complex64], dim: usize, x: &[Complex64]) -> Vec<Complex64> {
    matrix
        .chunks_exact(dim)
        .map(|row| row.iter().zip(x).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
        .collect()
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix() {
        let m = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)];
        let e = PowerIteration::default()
            .top_eigenpair(2, |x| dense_apply(&m, 2, x))
            .unwrap();
        assert_relative_eq!(e.value, 3.0, max_relative = 1e-12);
        assert!(e.vector[0].norm() < 1e-6);
    }

    #[test]
    fn hermitian_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = [c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let e = PowerIteration::default()
            .top_eigenpair(2, |x| dense_apply(&m, 2, x))
            .unwrap();
        assert_relative_eq!(e.value, 3.0, max_relative = 1e-12);
        let av = dense_apply(&m, 2, &e.vector);
        for (a, v) in av.iter().zip(&e.vector) {
            assert!((a - v * 3.0).norm() < 1e-10);
        }
    }

    #[test]
    fn start_orthogonal_to_dominant_direction() {
        // all-ones is an eigenvector of the smaller eigenvalue here
        let m = [c(1.0, 0.0), c(-2.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)];
        let e = PowerIteration::default()
            .top_eigenpair(2, |x| dense_apply(&m, 2, x))
            .unwrap();
        assert_relative_eq!(e.value, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn shift_accelerates_without_changing_answer() {
        let m = [
            c(4.0, 0.0),
            c(1.0, 0.5),
            c(0.0, 0.0),
            c(1.0, -0.5),
            c(3.5, 0.0),
            c(0.2, 0.0),
            c(0.0, 0.0),
            c(0.2, 0.0),
            c(3.0, 0.0),
        ];
        let plain = PowerIteration::default()
            .top_eigenpair(3, |x| dense_apply(&m, 3, x))
            .unwrap();
        let shifted = PowerIteration {
            shift: 2.5,
            ..Default::default()
        }
        .top_eigenpair(3, |x| dense_apply(&m, 3, x))
        .unwrap();
        assert_relative_eq!(plain.value, shifted.value, max_relative = 1e-11);
        assert!(shifted.iterations < plain.iterations);
    }

    #[test]
    fn reports_non_convergence() {
        let m = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.999, 0.0)];
        let r = PowerIteration {
            max_iterations: 5,
            ..Default::default()
        }
        .top_eigenpair(2, |x| dense_apply(&m, 2, x));
        assert!(matches!(r, Err(Error::NoConvergence { iterations: 5, .. })));
    }
}
