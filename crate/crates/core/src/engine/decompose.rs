use serde::{Deserialize, Serialize};

use super::{PairTally, WeightScheme};
use crate::data::PairCase::{self, *};
use crate::error::{Error, Result};

/// One block of the weighted-average form: the rank-concordant share plus
/// `omega_p` times the tied-prediction share. `None` when the block has no pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTerms {
    pub concordant: f64,
    pub tied_predictions: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub alpha: f64,
    /// Pairs with `T_i < T_j`, `i` uncensored. `concordant` is the plain Harrell estimate.
    pub earlier_block: Option<BlockTerms>,
    /// Pairs with `T_i = T_j`, `i` uncensored, `j` censored.
    pub tied_time_block: Option<BlockTerms>,
    pub recombined: f64,
}

fn count(tally: &PairTally, cases: &[PairCase]) -> f64 {
    cases.iter().map(|&c| tally.case(c).pairs as f64).sum()
}

/// Splits the tie-weighted estimate into the earlier-event block and the
/// tied-time block, weighted by `alpha = A / (A + omega_o * B)`.
///
/// Uses raw pair counts, so the tally must come from uniform weights; the
/// policy that produced it does not need to include the tied-time cases.
pub fn decompose(tally: &PairTally, omega_o: f64, omega_p: f64) -> Result<DecompositionReport> {
    if tally.weight_scheme != WeightScheme::Uniform {
        return Err(Error::InvalidParameter(
            "decomposition requires a uniformly weighted tally".into(),
        ));
    }
    let a = count(tally, &[Case1A, Case1B, Case1C, Case2A, Case2B, Case2C]);
    let ac = count(tally, &[Case1A, Case2A]);
    let ad = count(tally, &[Case1C, Case2C]);
    let b = count(tally, &[Case6A, Case6B, Case6C]);
    let bc = count(tally, &[Case6A]);
    let bd = count(tally, &[Case6C]);

    let total = a + omega_o * b;
    if !(total > 0.0) {
        return Err(Error::NoComparablePairs);
    }
    let alpha = a / total;
    let block = |n: f64, c: f64, d: f64| {
        (n > 0.0).then(|| {
            let concordant = c / n;
            let tied_predictions = d / n;
            BlockTerms {
                concordant,
                tied_predictions,
                value: concordant + omega_p * tied_predictions,
            }
        })
    };
    let earlier_block = block(a, ac, ad);
    let tied_time_block = block(b, bc, bd);
    let mut recombined = 0.0;
    if alpha > 0.0 {
        recombined += alpha * earlier_block.map_or(0.0, |t| t.value);
    }
    if alpha < 1.0 {
        recombined += (1.0 - alpha) * tied_time_block.map_or(0.0, |t| t.value);
    }
    Ok(DecompositionReport {
        alpha,
        earlier_block,
        tied_time_block,
        recombined,
    })
}
