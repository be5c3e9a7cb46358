import * as tf from "@tensorflow/tfjs";

export const DEFAULT_MARGIN = 0.1;

/** Hinged triplet ranking loss over descriptors.
 *
 * For each negative, the squared distance to the best (closest) positive
 * plus the margin must undercut the squared distance to the negative:
 *   sum_j max(0, min_i d2(q, p_i) + m - d2(q, n_j)).
 */
export function tripletLoss(
  query: tf.Tensor1D,
  positives: tf.Tensor2D,
  negatives: tf.Tensor2D,
  margin: number = DEFAULT_MARGIN
): tf.Scalar {
  if (positives.shape[0] === 0 || negatives.shape[0] === 0) {
    throw new Error("triplet loss needs at least one positive and one negative");
  }
  return tf.tidy(() => {
    const dPos = tf.sum(tf.square(tf.sub(positives, query)), 1); // [P]
    const dNeg = tf.sum(tf.square(tf.sub(negatives, query)), 1); // [N]
    const best = tf.min(dPos);
    return tf.sum(tf.relu(tf.add(tf.sub(best, dNeg), margin))) as tf.Scalar;
  });
}

/** Float64 reference of the same loss with its analytic query-gradient,
 * for oracle checks independent of the tensor library. */
export function tripletLossRef(
  query: Float64Array,
  positives: Float64Array[],
  negatives: Float64Array[],
  margin: number = DEFAULT_MARGIN
): { loss: number; gradQuery: Float64Array } {
  if (positives.length === 0 || negatives.length === 0) {
    throw new Error("triplet loss needs at least one positive and one negative");
  }
  const dim = query.length;
  const d2 = (a: Float64Array, b: Float64Array) => {
    let s = 0;
    for (let i = 0; i < dim; i++) {
      const d = a[i] - b[i];
      s += d * d;
    }
    return s;
  };
  let bestIdx = 0;
  let bestD2 = d2(query, positives[0]);
  for (let i = 1; i < positives.length; i++) {
    const v = d2(query, positives[i]);
    if (v < bestD2) {
      bestD2 = v;
      bestIdx = i;
    }
  }
  const best = positives[bestIdx];
  let loss = 0;
  const grad = new Float64Array(dim);
  for (const n of negatives) {
    const term = bestD2 + margin - d2(query, n);
    if (term > 0) {
      loss += term;
      for (let i = 0; i < dim; i++) {
        grad[i] += 2 * (query[i] - best[i]) - 2 * (query[i] - n[i]);
      }
    }
  }
  return { loss, gradQuery: grad };
}
