//! Central-difference verification of the analytic gradients.

use super::network::{sentence_backward, sentence_loss_with_mask, Labeled, SentenceInput};
use super::params::ClassifierParams;

/// Worst coordinate of one tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub max_relative_error: f64,
    pub checked: usize,
    /// Coordinates skipped because a relu changed state within the probe.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub tensors: Vec<TensorCheck>,
}

impl GradCheck {
    pub fn max_relative_error(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.max_relative_error)
            .fold(0.0, f64::max)
    }
}

/// `|a - n| / max(|a| + |n|, 1e-6)`; the floor keeps vanishing gradients
/// from turning round-off into large ratios.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6)
}

/// Compare the analytic gradient of the summed NLL with central finite
/// differences on every coordinate of every trainable tensor.
pub fn grad_check(
    params: &ClassifierParams,
    input: &SentenceInput,
    items: &[Labeled],
    epsilon: f64,
) -> GradCheck {
    let mut analytic = params.zeros_like();
    sentence_backward(params, &mut analytic, input, items);
    let (_, base_mask) = sentence_loss_with_mask(params, input, items);

    let names: Vec<String> = params.trainable().into_iter().map(|(n, _)| n).collect();
    let grads: Vec<Vec<f64>> = analytic
        .trainable()
        .into_iter()
        .map(|(_, m)| m.as_slice().to_vec())
        .collect();

    let mut probe = params.clone();
    let mut tensors = Vec::with_capacity(names.len());
    for (t, name) in names.into_iter().enumerate() {
        let mut check = TensorCheck {
            name,
            max_relative_error: 0.0,
            checked: 0,
            skipped: 0,
        };
        #[allow(clippy::needless_range_loop)]
        for j in 0..grads[t].len() {
            let original = probe.trainable_mut()[t].as_slice()[j];
            probe.trainable_mut()[t].as_mut_slice()[j] = original + epsilon;
            let (plus, mask_plus) = sentence_loss_with_mask(&probe, input, items);
            probe.trainable_mut()[t].as_mut_slice()[j] = original - epsilon;
            let (minus, mask_minus) = sentence_loss_with_mask(&probe, input, items);
            probe.trainable_mut()[t].as_mut_slice()[j] = original;
            if mask_plus != base_mask || mask_minus != base_mask {
                check.skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * epsilon);
            let err = relative_error(grads[t][j], numeric);
            check.max_relative_error = check.max_relative_error.max(err);
            check.checked += 1;
        }
        tensors.push(check);
    }
    GradCheck { tensors }
}
