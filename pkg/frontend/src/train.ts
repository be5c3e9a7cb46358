import * as tf from "@tensorflow/tfjs";
import { tripletLoss, DEFAULT_MARGIN } from "./loss";
import { RetrievalModel } from "./model";

export interface TrainOptions {
  iterations: number;
  learningRate: number;
  margin?: number;
  negativesPerQuery?: number;
}

export interface TrainResult {
  losses: number[];
}

/** Cycle over the images as queries; same-place images are the potential
 * positives, a rotating sample of other places the definite negatives. */
export function trainTriplets(
  model: RetrievalModel,
  images: tf.Tensor4D,
  labels: number[],
  opts: TrainOptions
): TrainResult {
  const margin = opts.margin ?? DEFAULT_MARGIN;
  const negPerQuery = opts.negativesPerQuery ?? 4;
  const optimizer = tf.train.sgd(opts.learningRate);
  const n = labels.length;
  const losses: number[] = [];

  const byPlace = new Map<number, number[]>();
  labels.forEach((p, i) => {
    if (!byPlace.has(p)) byPlace.set(p, []);
    byPlace.get(p)!.push(i);
  });

  for (let iter = 0; iter < opts.iterations; iter++) {
    const q = iter % n;
    const positives = byPlace.get(labels[q])!.filter((i) => i !== q);
    const negatives: number[] = [];
    for (let j = 0; negatives.length < negPerQuery && j < n; j++) {
      const cand = (q + 1 + j * 3) % n;
      if (labels[cand] !== labels[q] && !negatives.includes(cand)) {
        negatives.push(cand);
      }
    }
    const batchIdx = [q, ...positives, ...negatives];
    const cost = optimizer.minimize(
      () =>
        tf.tidy(() => {
          const batch = tf.gather(images, batchIdx) as tf.Tensor4D;
          const desc = model.describe(batch);
          const qd = tf.squeeze(tf.slice(desc, [0, 0], [1, -1])) as tf.Tensor1D;
          const pd = tf.slice(desc, [1, 0], [positives.length, -1]) as tf.Tensor2D;
          const ndesc = tf.slice(
            desc,
            [1 + positives.length, 0],
            [negatives.length, -1]
          ) as tf.Tensor2D;
          return tripletLoss(qd, pd, ndesc, margin);
        }),
      true,
      model.variables()
    );
    losses.push(cost!.dataSync()[0]);
    cost!.dispose();
  }
  return { losses };
}
