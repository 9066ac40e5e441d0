//! LSQR (Paige & Saunders) for `min ‖Ax − b‖₂` with a matrix-free operator.
//!
//! Starting from `x = 0`, the iterates stay in `range(Aᵀ)`, so the limit is
//! the minimum-norm least-squares solution.

pub(crate) struct LsqrOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// `apply(x, y)` must set `y = A x`; `apply_t(y, x)` must set `x = Aᵀ y`.
pub(crate) fn lsqr(
    cols: usize,
    b: &[f64],
    apply: impl Fn(&[f64], &mut [f64]),
    apply_t: impl Fn(&[f64], &mut [f64]),
    atol: f64,
    btol: f64,
    max_iterations: usize,
) -> LsqrOutcome {
    let rows = b.len();
    let mut x = vec![0.0; cols];
    let mut u = b.to_vec();
    let mut beta = norm(&u);
    let mut v = vec![0.0; cols];
    let mut alpha = 0.0;
    if beta > 0.0 {
        scale(&mut u, 1.0 / beta);
        apply_t(&u, &mut v);
        alpha = norm(&v);
    }
    if alpha > 0.0 {
        scale(&mut v, 1.0 / alpha);
    }
    if alpha * beta == 0.0 {
        return LsqrOutcome {
            x,
            iterations: 0,
            converged: true,
        };
    }
    let mut w = v.clone();
    let bnorm = beta;
    let mut rhobar = alpha;
    let mut phibar = beta;
    let mut anorm_sq = 0.0;
    let mut av = vec![0.0; rows];
    let mut atu = vec![0.0; cols];

    for it in 1..=max_iterations {
        apply(&v, &mut av);
        for (ui, ai) in u.iter_mut().zip(&av) {
            *ui = ai - alpha * *ui;
        }
        beta = norm(&u);
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
            anorm_sq += alpha * alpha + beta * beta;
            apply_t(&u, &mut atu);
            for (vi, ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm(&v);
            if alpha > 0.0 {
                scale(&mut v, 1.0 / alpha);
            }
        } else {
            anorm_sq += alpha * alpha;
        }

        let rho = rhobar.hypot(beta);
        let cs = rhobar / rho;
        let sn = beta / rho;
        let theta = sn * alpha;
        rhobar = -cs * alpha;
        let phi = cs * phibar;
        phibar *= sn;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for k in 0..cols {
            x[k] += t1 * w[k];
            w[k] = v[k] + t2 * w[k];
        }

        let anorm = anorm_sq.sqrt();
        let rnorm = phibar;
        let arnorm = alpha * (sn * phi).abs();
        let xnorm = norm(&x);
        let test1 = rnorm / bnorm;
        let test2 = arnorm / (anorm * rnorm + f64::MIN_POSITIVE);
        let rtol = btol + atol * anorm * xnorm / bnorm;
        if test1 <= rtol || test2 <= atol || alpha == 0.0 {
            return LsqrOutcome {
                x,
                iterations: it,
                converged: true,
            };
        }
    }
    LsqrOutcome {
        x,
        iterations: max_iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overdetermined_least_squares() {
        // A = [[1,0],[0,1],[1,1]], b = [1,2,4]; normal equations give x = (4/3, 7/3)
        let a = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let b = [1.0, 2.0, 4.0];
        let out = lsqr(
            2,
            &b,
            |x, y| {
                for (r, row) in a.iter().enumerate() {
                    y[r] = row[0] * x[0] + row[1] * x[1];
                }
            },
            |y, x| {
                x[0] = a.iter().zip(y).map(|(row, v)| row[0] * v).sum();
                x[1] = a.iter().zip(y).map(|(row, v)| row[1] * v).sum();
            },
            1e-12,
            1e-12,
            100,
        );
        assert!(out.converged);
        assert!((out.x[0] - 4.0 / 3.0).abs() < 1e-10);
        assert!((out.x[1] - 7.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_gives_min_norm() {
        // x0 - x1 = 1: minimum-norm solution (1/2, -1/2)
        let out = lsqr(
            2,
            &[1.0],
            |x, y| y[0] = x[0] - x[1],
            |y, x| {
                x[0] = y[0];
                x[1] = -y[0];
            },
            1e-12,
            1e-12,
            10,
        );
        assert!((out.x[0] - 0.5).abs() < 1e-12 && (out.x[1] + 0.5).abs() < 1e-12);
    }
}
