import * as tf from "@tensorflow/tfjs";
import { gaussian, mulberry32 } from "./rng";

export interface NetVladConfig {
  featureDim: number;
  clusters: number;
  seed?: number;
}

/** Trainable residual-aggregation pooling.
 *
 * Each local feature is soft-assigned to learned cluster centers; the
 * assignment-weighted residuals (feature minus center) are summed per
 * cluster, L2-normalized within each cluster, flattened, and globally
 * L2-normalized into one descriptor of length clusters * featureDim.
 */
export class NetVlad {
  readonly cfg: NetVladConfig;
  assignKernel: tf.Variable; // [1,1,C,K]
  assignBias: tf.Variable; // [K]
  centers: tf.Variable; // [K,C]

  constructor(cfg: NetVladConfig) {
    this.cfg = cfg;
    const normal = gaussian(mulberry32(cfg.seed ?? 11));
    const { featureDim: c, clusters: k } = cfg;
    const wData = new Float32Array(c * k);
    for (let i = 0; i < wData.length; i++) wData[i] = normal() * Math.sqrt(2.0 / c);
    const cData = new Float32Array(k * c);
    for (let i = 0; i < cData.length; i++) cData[i] = normal();
    this.assignKernel = tf.variable(tf.tensor(wData, [1, 1, c, k]));
    this.assignBias = tf.variable(tf.zeros([k]));
    this.centers = tf.variable(tf.tensor(cData, [k, c]));
  }

  get descriptorDim(): number {
    return this.cfg.clusters * this.cfg.featureDim;
  }

  /** [B,H,W,C] feature maps to [B, K*C] unit-norm descriptors. */
  forward(x: tf.Tensor4D): tf.Tensor2D {
    return tf.tidy(() => {
      const [b, h, w, c] = x.shape;
      const k = this.cfg.clusters;
      const logits = tf.add(
        tf.conv2d(x, this.assignKernel as unknown as tf.Tensor4D, 1, "same"),
        this.assignBias
      );
      const assign = tf.softmax(tf.reshape(logits, [b, h * w, k]), 2); // [B,N,K]
      const feats = tf.reshape(x, [b, h * w, c]); // [B,N,C]
      const weighted = tf.matMul(assign, feats, true, false); // [B,K,C]
      const mass = tf.sum(assign, 1); // [B,K]
      const vlad = tf.sub(
        weighted,
        tf.mul(tf.reshape(mass, [b, k, 1]), tf.reshape(this.centers, [1, k, c]))
      );
      const intra = tf.div(
        vlad,
        tf.add(tf.norm(vlad, "euclidean", 2, true), 1e-12)
      );
      const flat = tf.reshape(intra, [b, k * c]);
      return tf.div(
        flat,
        tf.add(tf.norm(flat, "euclidean", 1, true), 1e-12)
      ) as tf.Tensor2D;
    });
  }

  variables(): tf.Variable[] {
    return [this.assignKernel, this.assignBias, this.centers];
  }

  parameterCount(): number {
    return this.variables().reduce((n, v) => n + v.size, 0);
  }
}
