//! Group losses over one positive score and its negative scores.
//!
//! Both return the loss and `d loss / d positive`, and write
//! `d loss / d negative_j` into the caller's buffer.

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Softmax cross-entropy of the positive against positive + negatives:
/// `-f+ + log(exp f+ + sum_j exp f-_j)`.
pub fn multiclass_nll(positive: f64, negatives: &[f64], grad_negatives: &mut [f64]) -> (f64, f64) {
    debug_assert!(!negatives.is_empty());
    debug_assert_eq!(negatives.len(), grad_negatives.len());
    let max = negatives.iter().copied().fold(positive, f64::max);
    let mut sum = libm::exp(positive - max);
    for &n in negatives {
        sum += libm::exp(n - max);
    }
    let lse = max + libm::log(sum);
    for (g, &n) in grad_negatives.iter_mut().zip(negatives) {
        *g = libm::exp(n - lse);
    }
    let loss = (lse - positive).max(0.0);
    (loss, libm::exp(positive - lse) - 1.0)
}

/// Softmax of `temperature * negatives` into `weights`.
pub fn adversarial_weights(negatives: &[f64], temperature: f64, weights: &mut [f64]) {
    let max = negatives.iter().map(|&n| temperature * n).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (w, &n) in weights.iter_mut().zip(negatives) {
        *w = libm::exp(temperature * n - max);
        sum += *w;
    }
    for w in weights.iter_mut() {
        *w /= sum;
    }
}

/// Self-adversarial negative log-sigmoid loss:
/// `-log s(margin + f+) - sum_j w_j log s(-margin - f-_j)` with
/// `w = softmax(temperature * f-)` held constant.
pub fn self_adversarial(
    positive: f64,
    negatives: &[f64],
    temperature: f64,
    margin: f64,
    grad_negatives: &mut [f64],
) -> (f64, f64) {
    debug_assert!(!negatives.is_empty());
    adversarial_weights(negatives, temperature, grad_negatives);
    let mut loss = softplus(-(margin + positive));
    for (w, &n) in grad_negatives.iter_mut().zip(negatives) {
        loss += *w * softplus(margin + n);
        *w *= sigmoid(margin + n);
    }
    (loss, -sigmoid(-(margin + positive)))
}
