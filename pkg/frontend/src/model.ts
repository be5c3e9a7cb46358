import * as tf from "@tensorflow/tfjs";
import { Backbone, BackboneConfig, DEFAULT_BACKBONE } from "./msgc";
import { NetVlad } from "./netvlad";

export interface ModelConfig {
  backbone?: BackboneConfig;
  clusters?: number;
}

/** Retrieval network: multi-scale group-convolution encoder feeding the
 * residual-aggregation pooling layer. */
export class RetrievalModel {
  backbone: Backbone;
  pool: NetVlad;

  constructor(cfg: ModelConfig = {}) {
    this.backbone = new Backbone(cfg.backbone ?? DEFAULT_BACKBONE);
    this.pool = new NetVlad({
      featureDim: this.backbone.outChannels,
      clusters: cfg.clusters ?? 16,
      seed: (cfg.backbone ?? DEFAULT_BACKBONE).seed,
    });
  }

  get descriptorDim(): number {
    return this.pool.descriptorDim;
  }

  /** [B,H,W,3] images to [B,D] unit-norm descriptors (differentiable). */
  describe(images: tf.Tensor4D): tf.Tensor2D {
    return tf.tidy(() => this.pool.forward(this.backbone.forward(images)));
  }

  /** Descriptors as plain arrays (inference convenience). */
  async describeToArrays(images: tf.Tensor4D): Promise<Float32Array[]> {
    const desc = this.describe(images);
    const data = (await desc.data()) as Float32Array;
    const dim = this.descriptorDim;
    const out: Float32Array[] = [];
    for (let i = 0; i < desc.shape[0]; i++) {
      out.push(data.slice(i * dim, (i + 1) * dim));
    }
    desc.dispose();
    return out;
  }

  variables(): tf.Variable[] {
    return [...this.backbone.variables(), ...this.pool.variables()];
  }

  parameterCount(): number {
    return this.variables().reduce((n, v) => n + v.size, 0);
  }
}
