import * as tf from "@tensorflow/tfjs";
import { describe, expect, it } from "vitest";

import { Backbone } from "../src/msgc";
import { RetrievalModel } from "../src/model";

const PAPER_PARAM_TARGET = 1_110_000;

describe("four-block backbone", () => {
  it("builds at the default plan and reports its parameter budget", () => {
    const model = new RetrievalModel();
    const params = model.parameterCount();
    // eslint-disable-next-line no-console
    console.log(
      `parameters: ${params} (reference target ~${PAPER_PARAM_TARGET}, ` +
        `ratio ${(params / PAPER_PARAM_TARGET).toFixed(3)})`
    );
    expect(params).toBeLessThanOrEqual(1_500_000);
    expect(model.backbone.blocks).toHaveLength(4);
  });

  it("forward-passes a 224x224 image into a single unit descriptor", () => {
    const model = new RetrievalModel();
    const img = tf.randomNormal([1, 224, 224, 3], 0, 1, "float32", 17) as tf.Tensor4D;
    const d = model.describe(img);
    expect(d.shape).toEqual([1, model.descriptorDim]);
    expect(model.descriptorDim).toBe(16 * model.backbone.outChannels);
    const norm = tf.norm(d).dataSync()[0];
    expect(Math.abs(norm - 1)).toBeLessThan(1e-6);
  });

  it("alternating strides compress space as configured", () => {
    const backbone = new Backbone({
      channelPlan: [8, 8, 16, 16],
      groups: 2,
      dilations: [1, 2],
      strides: [2, 1, 2, 1],
      stemStride: 2,
      seed: 1,
    });
    const y = backbone.forward(tf.zeros([1, 64, 64, 3]));
    // stem /2 -> 32, block strides 2,1,2,1 -> 16,16,8,8
    expect(y.shape).toEqual([1, 8, 8, 16]);
  });
});
