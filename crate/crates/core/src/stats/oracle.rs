//! Generic quasi-score assembly used to cross-check the closed-form
//! statistic.
//!
//! The score function is S(beta) = D' Sigma^{-1} (Y - mu(beta)) with
//! D = d mu / d beta; under the null, Sigma_0 = mu (1 - mu) R / 2 and the
//! statistic is S_1' [I(beta)^{-1}]_22 S_1 evaluated at (beta0_hat, 0).
//! This route solves through an LU factorization of Sigma_0 built from
//! scratch, sharing nothing with the Cholesky path it verifies.

use crate::error::{Error, Result};
use crate::linalg::{dot, Lu, SymMatrix};
use crate::pedigree::RMatrix;
use crate::stats::{fit_null_biallelic, w_g_biallelic};

#[derive(Debug, Clone)]
pub struct ScoreOracleReport {
    /// Score vector (S_beta0, S_beta1) at the null fit; the first component
    /// is zero up to rounding by the definition of the fit.
    pub score: [f64; 2],
    /// (2,2) entry of the inverse information matrix.
    pub info_inverse_entry: f64,
    /// Statistic assembled from the generic pieces.
    pub w_generic: f64,
    /// Closed-form statistic on the same input.
    pub w_closed: f64,
    /// |w_generic - w_closed| scaled by max(|w_closed|, |w_generic|, 1e-8);
    /// near-zero statistics compare absolutely at that floor.
    pub rel_diff: f64,
}

pub fn score_oracle(x: &[f64], y: &[f64], r: &RMatrix) -> Result<ScoreOracleReport> {
    let n = r.n();
    assert_eq!(x.len(), n);
    assert_eq!(y.len(), n);

    // Null estimate through the oracle's own LU route.
    let rlu = Lu::factor(r.entries())?;
    let z = rlu.solve(&vec![1.0; n]);
    let mu = dot(&z, y) / z.iter().sum::<f64>();
    if !(1e-10..=1.0 - 1e-10).contains(&mu) {
        return Err(Error::Monomorphic);
    }

    // Sigma_0 = mu (1 - mu) R / 2 and the derivative matrix at (beta0, 0):
    // d mu_i / d beta0 = mu (1 - mu), d mu_i / d beta1 = mu (1 - mu) x_i.
    let c = 0.5 * mu * (1.0 - mu);
    let mut sigma0 = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            sigma0.set(i, j, c * r.entry(i, j));
        }
    }
    let slu = Lu::factor(&sigma0)?;
    let g = mu * (1.0 - mu);
    let d0 = vec![g; n];
    let d1: Vec<f64> = x.iter().map(|&xi| g * xi).collect();

    let resid: Vec<f64> = y.iter().map(|&yi| yi - mu).collect();
    let s_resid = slu.solve(&resid);
    let score = [dot(&d0, &s_resid), dot(&d1, &s_resid)];

    let sd0 = slu.solve(&d0);
    let sd1 = slu.solve(&d1);
    let i00 = dot(&d0, &sd0);
    let i01 = dot(&d0, &sd1);
    let i11 = dot(&d1, &sd1);
    let det = i00 * i11 - i01 * i01;
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(Error::SingularInformation);
    }
    let info_inverse_entry = i00 / det;
    let w_generic = score[1] * info_inverse_entry * score[1];

    let fit = fit_null_biallelic(y, r)?;
    let closed = w_g_biallelic(x, y, r, &fit)?;
    let scale = w_generic.abs().max(closed.statistic.abs()).max(1e-8);
    let rel_diff = (w_generic - closed.statistic).abs() / scale;
    Ok(ScoreOracleReport {
        score,
        info_inverse_entry,
        w_generic,
        w_closed: closed.statistic,
        rel_diff,
    })
}
