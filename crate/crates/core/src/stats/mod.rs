//! Quasi-likelihood score statistics for allele-proportion responses.
//!
//! The model links the expected reference-allele proportion of a marker to
//! the trait through a logistic regression in which the trait is the
//! covariate; the score test of the trait coefficient has the closed form
//!
//!   W = [2 / (mu (1 - mu))] * A' B^{-1} A
//!   A = X' R^{-1} (Y - mu 1)
//!   B = X' R^{-1} X - (X' R^{-1} 1) (1' R^{-1} 1)^{-1} (1' R^{-1} X)
//!
//! with R the kinship correlation matrix and mu the generalized least
//! squares estimate of the common allele proportion under the null. The
//! statistic is asymptotically chi-square with k - 1 degrees of freedom for
//! a k-allele marker. Disjoint families contribute block sums; stratified
//! samples add their per-population statistics.

mod chi2;
mod oracle;

pub use chi2::chi_square_sf;
pub use oracle::{score_oracle, ScoreOracleReport};

use crate::error::{Error, Result};
use crate::linalg::{dot, SymMatrix};
use crate::pedigree::{FamilyBlock, RMatrix};

/// Fitted null model: the common allele-proportion estimate(s).
#[derive(Debug, Clone)]
pub struct NullFit {
    /// One entry per reported allele component (length 1 when biallelic).
    pub mu_hat: Vec<f64>,
    /// log(mu / (1 - mu)); biallelic fits only.
    pub beta0_hat: Option<f64>,
    /// Allele covariance matrix F for multi-allelic fits, (k-1) x (k-1).
    pub f_hat: Option<SymMatrix>,
}

impl NullFit {
    /// Biallelic estimate.
    pub fn mu(&self) -> f64 {
        self.mu_hat[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    SinglePedigree,
    MultiFamily,
    Multiallelic,
    Stratified,
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MethodTag::SinglePedigree => write!(f, "single-pedigree"),
            MethodTag::MultiFamily => write!(f, "multi-family"),
            MethodTag::Multiallelic => write!(f, "multiallelic"),
            MethodTag::Stratified => write!(f, "stratified"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    /// The p-value underflowed to zero.
    PUnderflow,
}

impl std::fmt::Display for Flag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flag::PUnderflow => write!(f, "p_underflow"),
        }
    }
}

/// Association test result for one marker.
#[derive(Debug, Clone)]
pub struct AssocResult {
    pub marker_id: String,
    pub method: MethodTag,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub null_fit: NullFit,
    pub n_used: usize,
    pub flags: Vec<Flag>,
    /// Per-population detail for stratified tests, empty otherwise.
    pub per_population: Vec<(String, AssocResult)>,
}

/// Relative threshold below which B is treated as zero (constant trait).
const TRAIT_CONSTANT_TOL: f64 = 1e-12;
/// mu outside [MU_TOL, 1 - MU_TOL] is declared monomorphic.
const MU_TOL: f64 = 1e-10;

fn check_mu(mu: f64) -> Result<f64> {
    if (MU_TOL..=1.0 - MU_TOL).contains(&mu) {
        Ok(mu)
    } else {
        Err(Error::Monomorphic)
    }
}

fn all_equal(y: &[f64]) -> bool {
    y.windows(2).all(|w| w[0] == w[1])
}

fn finish(statistic: f64, df: u32, null_fit: NullFit, n: usize, method: MethodTag) -> AssocResult {
    let p = chi_square_sf(statistic.max(0.0), df);
    let mut flags = Vec::new();
    if p == 0.0 {
        flags.push(Flag::PUnderflow);
    }
    AssocResult {
        marker_id: String::new(),
        method,
        statistic: statistic.max(0.0),
        df,
        p_value: p,
        null_fit,
        n_used: n,
        flags,
        per_population: Vec::new(),
    }
}

/// GLS estimate of the common allele proportion: mu = (1'R^-1 1)^-1 1'R^-1 Y.
pub fn fit_null_biallelic(y: &[f64], r: &RMatrix) -> Result<NullFit> {
    assert_eq!(y.len(), r.n());
    if y.len() < 2 {
        return Err(Error::TooFewSubjects { needed: 2, got: y.len() });
    }
    if all_equal(y) {
        return Err(Error::Monomorphic);
    }
    let r1 = r.solve(&vec![1.0; y.len()]);
    let s11: f64 = r1.iter().sum();
    let mu = check_mu(dot(&r1, y) / s11)?;
    Ok(NullFit {
        mu_hat: vec![mu],
        beta0_hat: Some((mu / (1.0 - mu)).ln()),
        f_hat: None,
    })
}

/// Block-sum form of the null estimate over independent families.
pub fn fit_null_multifamily(y: &[f64], blocks: &[FamilyBlock]) -> Result<NullFit> {
    if y.len() < 2 {
        return Err(Error::TooFewSubjects { needed: 2, got: y.len() });
    }
    if all_equal(y) {
        return Err(Error::Monomorphic);
    }
    let mut s11 = 0.0;
    let mut s1y = 0.0;
    for b in blocks {
        let r1 = b.r.solve(&vec![1.0; b.members.len()]);
        let yf: Vec<f64> = b.members.iter().map(|&i| y[i]).collect();
        s11 += r1.iter().sum::<f64>();
        s1y += dot(&r1, &yf);
    }
    let mu = check_mu(s1y / s11)?;
    Ok(NullFit {
        mu_hat: vec![mu],
        beta0_hat: Some((mu / (1.0 - mu)).ln()),
        f_hat: None,
    })
}

/// Closed-form biallelic statistic on one correlation block.
pub fn w_g_biallelic(x: &[f64], y: &[f64], r: &RMatrix, fit: &NullFit) -> Result<AssocResult> {
    let n = r.n();
    assert_eq!(x.len(), n);
    assert_eq!(y.len(), n);
    let rx = r.solve(x);
    let x_r_x = dot(x, &rx);
    let x_r_1: f64 = rx.iter().sum();
    let r1 = r.solve(&vec![1.0; n]);
    let s11: f64 = r1.iter().sum();
    let b = x_r_x - x_r_1 * x_r_1 / s11;
    if b <= TRAIT_CONSTANT_TOL * x_r_x {
        return Err(Error::TraitConstant);
    }
    let mu = fit.mu();
    let a = dot(&rx, y) - mu * x_r_1;
    let w = 2.0 / (mu * (1.0 - mu)) * a * a / b;
    Ok(finish(w, 1, fit.clone(), n, MethodTag::SinglePedigree))
}

/// Biallelic statistic summed over independent family blocks.
pub fn w_g_multifamily(
    x: &[f64],
    y: &[f64],
    blocks: &[FamilyBlock],
    fit: &NullFit,
) -> Result<AssocResult> {
    let n = x.len();
    assert_eq!(y.len(), n);
    debug_assert_eq!(blocks.iter().map(|b| b.members.len()).sum::<usize>(), n);
    let mu = fit.mu();
    let mut a = 0.0;
    let mut x_r_x = 0.0;
    let mut x_r_1 = 0.0;
    let mut s11 = 0.0;
    for bl in blocks {
        let xf: Vec<f64> = bl.members.iter().map(|&i| x[i]).collect();
        let yf: Vec<f64> = bl.members.iter().map(|&i| y[i]).collect();
        let rx = bl.r.solve(&xf);
        let r1 = bl.r.solve(&vec![1.0; xf.len()]);
        a += dot(&rx, &yf) - mu * rx.iter().sum::<f64>();
        x_r_x += dot(&xf, &rx);
        x_r_1 += rx.iter().sum::<f64>();
        s11 += r1.iter().sum::<f64>();
    }
    let b = x_r_x - x_r_1 * x_r_1 / s11;
    if b <= TRAIT_CONSTANT_TOL * x_r_x {
        return Err(Error::TraitConstant);
    }
    let w = 2.0 / (mu * (1.0 - mu)) * a * a / b;
    Ok(finish(w, 1, fit.clone(), n, MethodTag::MultiFamily))
}

/// Multinomial covariance of two allele draws at the fitted proportions:
/// F_jj = mu_j (1 - mu_j) / 2, F_jl = -mu_j mu_l / 2. For k = 2 this reduces
/// to mu (1 - mu) / 2.
fn f_matrix(mu: &[f64]) -> SymMatrix {
    let k1 = mu.len();
    let mut f = SymMatrix::zeros(k1);
    for j in 0..k1 {
        f.set(j, j, mu[j] * (1.0 - mu[j]) / 2.0);
        for l in 0..j {
            f.set(j, l, -mu[j] * mu[l] / 2.0);
        }
    }
    f
}

fn fit_from_component_mus(mu: Vec<f64>) -> Result<NullFit> {
    for (j, &m) in mu.iter().enumerate() {
        if !(MU_TOL..=1.0 - MU_TOL).contains(&m) {
            return Err(Error::MonomorphicComponent(j));
        }
    }
    let total: f64 = mu.iter().sum();
    if total > 1.0 - MU_TOL {
        // omitted allele unobserved
        return Err(Error::MonomorphicComponent(mu.len()));
    }
    let f = f_matrix(&mu);
    if f.cholesky().is_err() {
        return Err(Error::SingularF);
    }
    Ok(NullFit { mu_hat: mu, beta0_hat: None, f_hat: Some(f) })
}

/// Componentwise GLS estimates for a k-allele marker; `ys` holds the k - 1
/// reported component responses.
pub fn fit_null_multiallelic(ys: &[Vec<f64>], r: &RMatrix) -> Result<NullFit> {
    assert!(!ys.is_empty());
    let n = r.n();
    if n < 2 {
        return Err(Error::TooFewSubjects { needed: 2, got: n });
    }
    let r1 = r.solve(&vec![1.0; n]);
    let s11: f64 = r1.iter().sum();
    let mu: Vec<f64> = ys.iter().map(|yj| dot(&r1, yj) / s11).collect();
    fit_from_component_mus(mu)
}

/// Block-sum estimates over independent families.
pub fn fit_null_multiallelic_families(ys: &[Vec<f64>], blocks: &[FamilyBlock]) -> Result<NullFit> {
    assert!(!ys.is_empty());
    let k1 = ys.len();
    let mut s11 = 0.0;
    let mut s1y = vec![0.0; k1];
    for bl in blocks {
        let r1 = bl.r.solve(&vec![1.0; bl.members.len()]);
        s11 += r1.iter().sum::<f64>();
        for (j, yj) in ys.iter().enumerate() {
            let yf: Vec<f64> = bl.members.iter().map(|&i| yj[i]).collect();
            s1y[j] += dot(&r1, &yf);
        }
    }
    fit_from_component_mus(s1y.into_iter().map(|v| v / s11).collect())
}

/// Shared tail of the multi-allelic statistic: W = (1/B) s' F^{-1} s where
/// s_j = X'R^{-1}(Y_j - mu_j 1), evaluated through the double sum rather than
/// a Kronecker product.
fn multiallelic_quadratic(
    s: &[f64],
    b: f64,
    x_r_x: f64,
    fit: &NullFit,
    n: usize,
) -> Result<AssocResult> {
    if b <= TRAIT_CONSTANT_TOL * x_r_x {
        return Err(Error::TraitConstant);
    }
    let f = fit.f_hat.as_ref().expect("multiallelic fit carries F");
    let finv_s = f.cholesky().map_err(|_| Error::SingularF)?.solve(s);
    let w = dot(s, &finv_s) / b;
    Ok(finish(w, s.len() as u32, fit.clone(), n, MethodTag::Multiallelic))
}

/// Multi-allelic statistic on one correlation block; df = k - 1.
pub fn w_g_multiallelic(
    x: &[f64],
    ys: &[Vec<f64>],
    r: &RMatrix,
    fit: &NullFit,
) -> Result<AssocResult> {
    let n = r.n();
    assert_eq!(x.len(), n);
    let rx = r.solve(x);
    let x_r_x = dot(x, &rx);
    let x_r_1: f64 = rx.iter().sum();
    let r1 = r.solve(&vec![1.0; n]);
    let s11: f64 = r1.iter().sum();
    let b = x_r_x - x_r_1 * x_r_1 / s11;
    let s: Vec<f64> = ys
        .iter()
        .zip(&fit.mu_hat)
        .map(|(yj, &mu_j)| dot(&rx, yj) - mu_j * x_r_1)
        .collect();
    multiallelic_quadratic(&s, b, x_r_x, fit, n)
}

/// Multi-allelic statistic over independent family blocks.
pub fn w_g_multiallelic_families(
    x: &[f64],
    ys: &[Vec<f64>],
    blocks: &[FamilyBlock],
    fit: &NullFit,
) -> Result<AssocResult> {
    let n = x.len();
    let k1 = ys.len();
    let mut s = vec![0.0; k1];
    let mut x_r_x = 0.0;
    let mut x_r_1 = 0.0;
    let mut s11 = 0.0;
    for bl in blocks {
        let xf: Vec<f64> = bl.members.iter().map(|&i| x[i]).collect();
        let rx = bl.r.solve(&xf);
        let r1 = bl.r.solve(&vec![1.0; xf.len()]);
        x_r_x += dot(&xf, &rx);
        x_r_1 += rx.iter().sum::<f64>();
        s11 += r1.iter().sum::<f64>();
        for (j, yj) in ys.iter().enumerate() {
            let yf: Vec<f64> = bl.members.iter().map(|&i| yj[i]).collect();
            s[j] += dot(&rx, &yf) - fit.mu_hat[j] * rx.iter().sum::<f64>();
        }
    }
    let b = x_r_x - x_r_1 * x_r_1 / s11;
    multiallelic_quadratic(&s, b, x_r_x, fit, n)
}

/// Correlation structure of one population in a stratified analysis.
pub enum StratumDesign<'a> {
    Single(&'a RMatrix),
    Families(&'a [FamilyBlock]),
}

/// One population's aligned data for the stratified test.
pub struct Stratum<'a> {
    pub label: String,
    pub x: Vec<f64>,
    /// k - 1 component responses; a single component means biallelic.
    pub ys: Vec<Vec<f64>>,
    pub design: StratumDesign<'a>,
}

fn run_stratum(s: &Stratum) -> Result<AssocResult> {
    let biallelic = s.ys.len() == 1;
    match (&s.design, biallelic) {
        (StratumDesign::Single(r), true) => {
            let fit = fit_null_biallelic(&s.ys[0], r)?;
            w_g_biallelic(&s.x, &s.ys[0], r, &fit)
        }
        (StratumDesign::Families(blocks), true) => {
            let fit = fit_null_multifamily(&s.ys[0], blocks)?;
            w_g_multifamily(&s.x, &s.ys[0], blocks, &fit)
        }
        (StratumDesign::Single(r), false) => {
            let fit = fit_null_multiallelic(&s.ys, r)?;
            w_g_multiallelic(&s.x, &s.ys, r, &fit)
        }
        (StratumDesign::Families(blocks), false) => {
            let fit = fit_null_multiallelic_families(&s.ys, blocks)?;
            w_g_multiallelic_families(&s.x, &s.ys, blocks, &fit)
        }
    }
}

/// Sum of per-population statistics; chi-square with the summed degrees of
/// freedom. Every population must satisfy its own test's preconditions.
pub fn w_all_stratified(strata: &[Stratum]) -> Result<AssocResult> {
    if strata.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "stratified test needs at least 2 populations, got {}",
            strata.len()
        )));
    }
    let mut per_population = Vec::with_capacity(strata.len());
    let mut w_all = 0.0;
    let mut df = 0u32;
    let mut n_used = 0usize;
    for s in strata {
        let res = run_stratum(s).map_err(|e| Error::Population {
            label: s.label.clone(),
            source: Box::new(e),
        })?;
        w_all += res.statistic;
        df += res.df;
        n_used += res.n_used;
        per_population.push((s.label.clone(), res));
    }
    let p = chi_square_sf(w_all, df);
    let mut flags = Vec::new();
    if p == 0.0 {
        flags.push(Flag::PUnderflow);
    }
    Ok(AssocResult {
        marker_id: String::new(),
        method: MethodTag::Stratified,
        statistic: w_all,
        df,
        p_value: p,
        null_fit: per_population[0].1.null_fit.clone(),
        n_used,
        flags,
        per_population,
    })
}

#[cfg(test)]
mod tests;
