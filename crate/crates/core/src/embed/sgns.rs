//! Skip-gram negative-sampling objective for one (center, context) pair.
//!
//! With `h` the mean of the center token's input rows, `o₀` the output row of
//! the observed context token and `o₁..o_k` the output rows of the sampled
//! negatives, the loss is
//!
//! ```text
//! L = -log σ(o₀·h) - Σᵢ log σ(-oᵢ·h)
//! ```
//!
//! The functions are generic over the float type so the trainer (`f32`) and
//! numerical checks (`f64`) share one implementation.

use num_traits::Float;

/// `log σ(x)` without overflow for large `|x|`.
pub fn log_sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Averages `rows` (row-major, `out.len()` columns) selected by `ids`.
pub fn mean_rows<F: Float>(matrix: &[F], ids: &[usize], out: &mut [F]) {
    let dim = out.len();
    out.iter_mut().for_each(|x| *x = F::zero());
    for &id in ids {
        for (o, &v) in out.iter_mut().zip(&matrix[id * dim..(id + 1) * dim]) {
            *o = *o + v;
        }
    }
    let scale = F::one() / F::from(ids.len()).unwrap();
    out.iter_mut().for_each(|x| *x = *x * scale);
}

/// Loss and gradients for one pair.
///
/// `outputs` holds one output row per entry of `labels`, row-major; `true`
/// marks the observed context, `false` a negative sample. Writes `∂L/∂h`
/// into `hidden_grad` and `∂L/∂oₜ` into row `t` of `output_grads`.
pub fn pair_loss_and_grad<F: Float>(
    hidden: &[F],
    outputs: &[F],
    labels: &[bool],
    hidden_grad: &mut [F],
    output_grads: &mut [F],
) -> F {
    let dim = hidden.len();
    debug_assert_eq!(outputs.len(), labels.len() * dim);
    debug_assert_eq!(output_grads.len(), outputs.len());
    hidden_grad.iter_mut().for_each(|g| *g = F::zero());
    let mut loss = F::zero();
    for ((&label, row), row_grad) in labels
        .iter()
        .zip(outputs.chunks_exact(dim))
        .zip(output_grads.chunks_exact_mut(dim))
    {
        let score = dot(row, hidden);
        // ∂L/∂score = σ(score) - label
        let g = if label {
            loss = loss - log_sigmoid(score);
            sigmoid(score) - F::one()
        } else {
            loss = loss - log_sigmoid(-score);
            sigmoid(score)
        };
        for ((hg, &o), (og, &h)) in hidden_grad.iter_mut().zip(row).zip(row_grad.iter_mut().zip(hidden)) {
            *hg = *hg + g * o;
            *og = g * h;
        }
    }
    loss
}

/// Exact gradient of the loss with respect to each distinct input row, given
/// `∂L/∂h` and the (possibly repeating) row ids averaged into `h`.
///
/// The trainer does not use this: following fastText, every input row is
/// moved by the full `∂L/∂h`. It exists so the objective can be checked
/// against finite differences.
pub fn input_row_gradients<F: Float>(ids: &[usize], hidden_grad: &[F]) -> Vec<(usize, Vec<F>)> {
    let k = F::from(ids.len()).unwrap();
    let mut distinct: Vec<usize> = ids.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .into_iter()
        .map(|id| {
            let multiplicity = F::from(ids.iter().filter(|&&x| x == id).count()).unwrap();
            let grad = hidden_grad.iter().map(|&g| g * multiplicity / k).collect();
            (id, grad)
        })
        .collect()
}
