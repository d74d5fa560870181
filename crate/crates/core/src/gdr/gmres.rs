//! Restarted GMRES with right preconditioning.

use super::GdrError;

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    /// `‖b - A x‖₂ / ‖b‖₂` recomputed from the returned solution.
    pub relative_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 3000,
            restart: 200,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` with `x = M⁻¹ y`, minimizing the residual over Krylov
/// spaces of `A M⁻¹`. Fails with the best residual seen after `max_iter`
/// inner iterations.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    settings: &GmresSettings,
) -> Result<GmresOutcome, GdrError> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            solution: vec![0.0; n],
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    let m = settings.restart.max(1);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut iterations = 0;

    let residual = |apply: &mut dyn FnMut(&[f64], &mut [f64]), x: &[f64], r: &mut [f64]| {
        apply(x, r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    };

    loop {
        residual(&mut apply, &x, &mut r);
        let beta = norm(&r);
        if beta / bnorm <= settings.tol {
            return Ok(GmresOutcome {
                solution: x,
                relative_residual: beta / bnorm,
                iterations,
            });
        }
        if iterations >= settings.max_iter {
            return Err(GdrError::NotConverged {
                iterations,
                residual: beta / bnorm,
            });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut cols = 0;
        for j in 0..m {
            precondition(&basis[j], &mut z);
            apply(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                hess[i][j] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let hnext = norm(&w);
            hess[j + 1][j] = hnext;
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let denom = hess[j][j].hypot(hess[j + 1][j]);
            cs[j] = hess[j][j] / denom;
            sn[j] = hess[j + 1][j] / denom;
            hess[j][j] = denom;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;
            iterations += 1;
            if g[j + 1].abs() / bnorm <= settings.tol || iterations >= settings.max_iter || hnext == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let s: f64 = (i + 1..cols).map(|k| hess[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, vk)| *u += yi * vk);
        }
        precondition(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
    }
}
