use super::power::{dot, norm2};

/// Result of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    /// Relative residual `‖b − Ax‖₂ / ‖b‖₂`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite operator.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> SolveResult
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return SolveResult {
            x,
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while iterations < max_iter {
        if rr.sqrt() / b_norm < tol {
            break;
        }
        iterations += 1;
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    // true residual, not the recurrence estimate
    apply(&x, &mut ap);
    let residual = b
        .iter()
        .zip(&ap)
        .map(|(bi, ai)| (bi - ai).powi(2))
        .sum::<f64>()
        .sqrt()
        / b_norm;
    SolveResult {
        x,
        residual,
        iterations,
        converged: residual < tol * 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn solves_spd_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let b = [1.0, 2.0, 3.0];
        let r = conjugate_gradient(
            |x, out| {
                for i in 0..3 {
                    out[i] = (0..3).map(|j| a[(i, j)] * x[j]).sum();
                }
            },
            &b,
            1e-14,
            100,
        );
        assert!(r.converged);
        let exact = a.lu().solve(&nalgebra::DVector::from_row_slice(&b)).unwrap();
        for (x, y) in r.x.iter().zip(exact.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let r = conjugate_gradient(|x, out| out.copy_from_slice(x), &[0.0; 4], 1e-12, 10);
        assert_eq!(r.x, vec![0.0; 4]);
        assert_eq!(r.iterations, 0);
    }
}
