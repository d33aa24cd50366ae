//! Armitage trend test assuming independent subjects — the comparator that
//! demonstrates what ignoring relatedness does to the type I error.

use crate::error::{Error, Result};
use crate::genodata::TraitKind;
use crate::stats::chi_square_sf;

#[derive(Debug, Clone)]
pub struct TrendResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub n_used: usize,
}

/// Trend test on a biallelic marker with genotype scores (0, 1, 2) = 2Y.
/// Binary traits use the Cochran-Armitage closed form; quantitative traits
/// use the score form n * r^2 from the regression of 2Y on X.
pub fn trend_test(x: &[f64], kind: TraitKind, y: &[f64]) -> Result<TrendResult> {
    let n = x.len();
    assert_eq!(y.len(), n);
    if n < 3 {
        return Err(Error::TooFewSubjects { needed: 3, got: n });
    }
    let statistic = match kind {
        TraitKind::Binary => cochran_armitage(x, y)?,
        TraitKind::Quantitative => n_r_squared(x, y)?,
    };
    Ok(TrendResult {
        statistic,
        df: 1,
        p_value: chi_square_sf(statistic, 1),
        n_used: n,
    })
}

fn cochran_armitage(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    // genotype classes by allele count 2Y in {0, 1, 2}
    let mut class_total = [0.0_f64; 3];
    let mut class_cases = [0.0_f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let g = (2.0 * yi).round() as usize;
        debug_assert!(g <= 2);
        class_total[g] += 1.0;
        class_cases[g] += xi;
    }
    let cases: f64 = class_cases.iter().sum();
    if cases == 0.0 || cases == n {
        return Err(Error::TraitConstant);
    }
    let scores = [0.0, 1.0, 2.0];
    let sum_tn: f64 = (0..3).map(|j| scores[j] * class_total[j]).sum();
    let sum_t2n: f64 = (0..3).map(|j| scores[j] * scores[j] * class_total[j]).sum();
    let spread = sum_t2n - sum_tn * sum_tn / n;
    if spread <= 0.0 {
        return Err(Error::Monomorphic);
    }
    let u: f64 = (0..3).map(|j| scores[j] * class_cases[j]).sum::<f64>() - cases * sum_tn / n;
    let var_u = (cases / n) * (1.0 - cases / n) * spread;
    Ok(u * u / var_u)
}

fn n_r_squared(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let g: Vec<f64> = y.iter().map(|&v| 2.0 * v).collect();
    let xbar = x.iter().sum::<f64>() / n;
    let gbar = g.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sgg = 0.0;
    let mut sxg = 0.0;
    for (&xi, &gi) in x.iter().zip(&g) {
        sxx += (xi - xbar) * (xi - xbar);
        sgg += (gi - gbar) * (gi - gbar);
        sxg += (xi - xbar) * (gi - gbar);
    }
    if sxx <= 0.0 {
        return Err(Error::TraitConstant);
    }
    if sgg <= 0.0 {
        return Err(Error::Monomorphic);
    }
    Ok(n * sxg * sxg / (sxx * sgg))
}
