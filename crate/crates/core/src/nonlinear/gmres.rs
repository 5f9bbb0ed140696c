//! Restarted GMRES on real vectors.
//!
//! The linearized cubic term is only real-linear (it involves complex
//! conjugates), so Newton systems are posed on the real and imaginary parts.

use crate::quadrature::pairwise_sum_by;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-12, restart: 40, max_iter: 400 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    /// `||b - A x|| / ||b||`.
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum_by(a.len(), |k| a[k] * b[k])
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` from `x = 0`.
pub fn gmres(apply: impl Fn(&[f64]) -> Vec<f64>, b: &[f64], opts: GmresOptions) -> GmresOutcome {
    let len = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; len];
    if b_norm == 0.0 {
        return GmresOutcome { x, relative_residual: 0.0, iterations: 0, converged: true };
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < opts.max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= opts.tol {
            return GmresOutcome { x, relative_residual: rel, iterations, converged: true };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            if iterations >= opts.max_iter {
                break;
            }
            iterations += 1;
            let mut w = apply(&basis[k]);
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    hess[i][k] += c;
                    for (wj, vj) in w.iter_mut().zip(v) {
                        *wj -= c * vj;
                    }
                }
            }
            let wn = norm(&w);
            hess[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            rel = g[k + 1].abs() / b_norm;
            if rel <= opts.tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xj, vj) in x.iter_mut().zip(&basis[i]) {
                *xj += yi * vj;
            }
        }
        if rel <= opts.tol {
            let ax = apply(&x);
            let true_rel = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / b_norm;
            return GmresOutcome { x, relative_residual: true_rel, iterations, converged: true_rel <= opts.tol * 10.0 };
        }
        if k_used == 0 {
            break;
        }
    }
    GmresOutcome { x, relative_residual: rel, iterations, converged: false }
}
