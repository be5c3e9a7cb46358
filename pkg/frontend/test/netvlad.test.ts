import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { NetVlad } from "../src/netvlad";

describe("residual-aggregation pooling", () => {
  it("descriptors are unit norm for arbitrary inputs", () => {
    const pool = new NetVlad({ featureDim: 8, clusters: 4, seed: 2 });
    for (const seed of [1, 2, 3]) {
      const x = tf.randomNormal([2, 5, 5, 8], 0, 10, "float32", seed) as tf.Tensor4D;
      const d = pool.forward(x);
      const norms = tf.norm(d, "euclidean", 1).dataSync();
      for (const n of norms) expect(Math.abs(n - 1)).toBeLessThan(1e-6);
    }
  });

  it("single cluster, single feature: descriptor is the normalized residual", () => {
    const pool = new NetVlad({ featureDim: 4, clusters: 1, seed: 3 });
    const feature = [1.0, -2.0, 0.5, 3.0];
    const x = tf.tensor(feature, [1, 1, 1, 4]) as tf.Tensor4D;
    const center = pool.centers.dataSync();
    const residual = feature.map((v, i) => v - center[i]);
    const norm = Math.hypot(...residual);
    const expected = residual.map((v) => v / norm);
    const got = pool.forward(x).dataSync();
    for (let i = 0; i < 4; i++) {
      expect(Math.abs(got[i] - expected[i])).toBeLessThan(1e-6);
    }
  });

  it("duplicating every feature leaves the descriptor unchanged", () => {
    const pool = new NetVlad({ featureDim: 6, clusters: 3, seed: 4 });
    const base = tf.randomNormal([1, 2, 2, 6], 0, 1, "float32", 9) as tf.Tensor4D;
    const doubled = tf.concat([base, base], 1) as tf.Tensor4D; // same features twice
    const d1 = pool.forward(base).dataSync();
    const d2 = pool.forward(doubled).dataSync();
    let worst = 0;
    for (let i = 0; i < d1.length; i++) worst = Math.max(worst, Math.abs(d1[i] - d2[i]));
    expect(worst).toBeLessThan(1e-6);
  });

  it("descriptor dimension is clusters times feature dim", () => {
    const pool = new NetVlad({ featureDim: 8, clusters: 4 });
    expect(pool.descriptorDim).toBe(32);
    const d = pool.forward(tf.zeros([3, 4, 4, 8]));
    expect(d.shape).toEqual([3, 32]);
  });
});
