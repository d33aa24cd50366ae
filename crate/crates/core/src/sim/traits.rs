//! Trait generation conditional on causal genotypes.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::genodata::{MarkerData, TraitKind, TraitVector};

/// The six association models plus the two null models, keyed by tag:
///
/// - `qt1`/`qt2`/`qt3`: additive quantitative, X = b G + e with G in
///   {-1, 0, 1} and e ~ N(0, sigma^2); (b, sigma) = (0.5, 1.2), (1, 1.5),
///   (1, 1.2).
/// - `null_qt`: X ~ N(-1 + G, 1.2^2) with G the causal allele count; equal
///   in distribution to `qt3`, applied to a marker unlinked from the tested
///   one.
/// - `bt1`: recessive epistasis on two markers, penetrance 0.5 with two
///   copies at both, 0.4 with two copies at exactly one, 0.1 otherwise.
/// - `bt2`: dominant epistasis on two markers, 0.5 with at least one copy at
///   both, 0.1 otherwise.
/// - `bt3`: single locus, penetrances (0.1, 0.3, 0.5) by allele count.
/// - `null_bt`: Bernoulli(p_G) with p = (0.1, 0.3, 0.4) by allele count.
#[derive(Debug, Clone, PartialEq)]
pub enum TraitModel {
    Additive { b: f64, sigma: f64 },
    NullQuantitative { sigma: f64 },
    SingleLocus { penetrance: [f64; 3] },
    RecessiveEpistasis { f1: f64, f2: f64, f3: f64 },
    DominantEpistasis { f1: f64, f2: f64 },
}

impl TraitModel {
    pub fn from_tag(tag: &str) -> Result<TraitModel> {
        Ok(match tag {
            "qt1" => TraitModel::Additive { b: 0.5, sigma: 1.2 },
            "qt2" => TraitModel::Additive { b: 1.0, sigma: 1.5 },
            "qt3" => TraitModel::Additive { b: 1.0, sigma: 1.2 },
            "null_qt" => TraitModel::NullQuantitative { sigma: 1.2 },
            "bt1" => TraitModel::RecessiveEpistasis { f1: 0.5, f2: 0.4, f3: 0.1 },
            "bt2" => TraitModel::DominantEpistasis { f1: 0.5, f2: 0.1 },
            "bt3" => TraitModel::SingleLocus { penetrance: [0.1, 0.3, 0.5] },
            "null_bt" => TraitModel::SingleLocus { penetrance: [0.1, 0.3, 0.4] },
            other => {
                return Err(Error::InvalidConfig(format!("unknown trait model '{other}'")))
            }
        })
    }

    /// Number of causal markers the model conditions on.
    pub fn n_causal(&self) -> usize {
        match self {
            TraitModel::RecessiveEpistasis { .. } | TraitModel::DominantEpistasis { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_binary(&self) -> bool {
        !matches!(
            self,
            TraitModel::Additive { .. } | TraitModel::NullQuantitative { .. }
        )
    }

    /// True when the tag describes a null (no-association) model.
    pub fn tag_is_null(tag: &str) -> bool {
        tag.starts_with("null")
    }
}

/// Reference-allele copy count (0, 1, 2) for one subject.
fn copies(m: &MarkerData, subject: usize) -> u8 {
    (2.0 * m.y(subject).expect("simulated genotypes are complete")) as u8
}

/// Generates the trait for `subjects`, conditional on their genotypes at the
/// causal markers.
pub fn generate_trait<R: Rng>(
    model: &TraitModel,
    causal: &[&MarkerData],
    subjects: &[usize],
    rng: &mut R,
) -> Result<TraitVector> {
    if causal.len() != model.n_causal() {
        return Err(Error::InvalidConfig(format!(
            "model needs {} causal markers, got {}",
            model.n_causal(),
            causal.len()
        )));
    }
    let values: Vec<Option<f64>> = subjects
        .iter()
        .map(|&i| {
            let v = match model {
                TraitModel::Additive { b, sigma } => {
                    let g = copies(causal[0], i) as f64 - 1.0;
                    let z: f64 = StandardNormal.sample(rng);
                    b * g + sigma * z
                }
                TraitModel::NullQuantitative { sigma } => {
                    let g = copies(causal[0], i) as f64;
                    let z: f64 = StandardNormal.sample(rng);
                    -1.0 + g + sigma * z
                }
                TraitModel::SingleLocus { penetrance } => {
                    rng.gen_bool(penetrance[copies(causal[0], i) as usize]) as u8 as f64
                }
                TraitModel::RecessiveEpistasis { f1, f2, f3 } => {
                    let two_at =
                        (copies(causal[0], i) == 2) as u8 + (copies(causal[1], i) == 2) as u8;
                    let p = match two_at {
                        2 => *f1,
                        1 => *f2,
                        _ => *f3,
                    };
                    rng.gen_bool(p) as u8 as f64
                }
                TraitModel::DominantEpistasis { f1, f2 } => {
                    let p = if copies(causal[0], i) >= 1 && copies(causal[1], i) >= 1 {
                        *f1
                    } else {
                        *f2
                    };
                    rng.gen_bool(p) as u8 as f64
                }
            };
            Some(v)
        })
        .collect();
    let kind = if model.is_binary() { TraitKind::Binary } else { TraitKind::Quantitative };
    TraitVector::new(values, kind)
}
