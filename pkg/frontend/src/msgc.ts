import * as tf from "@tensorflow/tfjs";
import { gaussian, mulberry32 } from "./rng";

/** Multi-scale group-convolution module configuration.
 *
 * The module runs two parallel branches over the input feature map and
 * concatenates them along channels (half the output width each):
 *   - a 1x1 pointwise branch preserving the previous layer's information;
 *   - dilated 3x3 group convolutions, one per dilation rate, summed across
 *     rates so the channel count stays flat while the receptive field grows.
 * All convolutions are bias-free.
 */
export interface MsgcModuleConfig {
  inChannels: number;
  outChannels: number;
  groups: number;
  dilations: number[];
}

export function validateModuleConfig(cfg: MsgcModuleConfig): void {
  const { inChannels, outChannels, groups, dilations } = cfg;
  if (outChannels % 2 !== 0) {
    throw new Error(`outChannels must be even (pointwise/grouped split), got ${outChannels}`);
  }
  if (inChannels % groups !== 0 || (outChannels / 2) % groups !== 0) {
    throw new Error(
      `channels not divisible by groups: in=${inChannels}, out/2=${outChannels / 2}, g=${groups}`
    );
  }
  if (dilations.length === 0) {
    throw new Error("dilation set must be non-empty");
  }
  if (new Set(dilations).size !== dilations.length || dilations.some((d) => d < 1)) {
    throw new Error(`dilation rates must be distinct positive integers, got ${dilations}`);
  }
}

function heKernel(shape: number[], fanIn: number, normal: () => number): tf.Tensor {
  const size = shape.reduce((a, b) => a * b, 1);
  const std = Math.sqrt(2.0 / fanIn);
  const data = new Float32Array(size);
  for (let i = 0; i < size; i++) data[i] = std * normal();
  return tf.tensor(data, shape);
}

/** Expand a compact kernel to its dilated footprint by zero-stuffing.
 *
 * The tensor library cannot backpropagate through its dilated conv2d, but
 * a (k-1)*d+1 kernel with zeros between taps is arithmetically identical
 * (including 'same' padding) and keeps the graph differentiable.
 */
export function dilateKernel(kernel: tf.Tensor4D, dilation: number): tf.Tensor4D {
  if (dilation === 1) return kernel;
  const [kh, kw, ci, co] = kernel.shape;
  const khe = (kh - 1) * dilation + 1;
  const kwe = (kw - 1) * dilation + 1;
  return tf.tidy(() => {
    let x = tf.reshape(kernel, [kh, 1, kw, ci, co]);
    x = tf.pad(x, [[0, 0], [0, dilation - 1], [0, 0], [0, 0], [0, 0]]);
    x = tf.slice(tf.reshape(x, [kh * dilation, kw, ci, co]), [0, 0, 0, 0], [khe, kw, ci, co]);
    let y = tf.reshape(x, [khe, kw, 1, ci, co]);
    y = tf.pad(y, [[0, 0], [0, 0], [0, dilation - 1], [0, 0], [0, 0]]);
    return tf.slice(
      tf.reshape(y, [khe, kw * dilation, ci, co]),
      [0, 0, 0, 0],
      [khe, kwe, ci, co]
    ) as tf.Tensor4D;
  });
}

function dilatedConv(x: tf.Tensor4D, kernel: tf.Tensor4D, stride: number, dilation: number) {
  // The library's dilated conv2d has no registered gradient, so under an
  // active gradient tape the dilation is realized by zero-stuffing the
  // kernel instead (identical arithmetic, differentiable graph).
  if (dilation === 1 || !(tf.engine() as any).isTapeOn()) {
    return tf.conv2d(x, kernel, stride, "same", "NHWC", [dilation, dilation]);
  }
  return tf.conv2d(x, dilateKernel(kernel, dilation), stride, "same");
}

/** Split channels into g groups, convolve each with its own kernel, and
 * concatenate. Parameters are exactly 1/g of the dense equivalent. */
export function groupConv(
  x: tf.Tensor4D,
  kernels: tf.Variable[],
  stride: number,
  dilation: number
): tf.Tensor4D {
  const parts = tf.split(x, kernels.length, 3).map((xg, i) =>
    dilatedConv(xg as tf.Tensor4D, kernels[i] as unknown as tf.Tensor4D, stride, dilation)
  );
  return tf.concat(parts, 3) as tf.Tensor4D;
}

export class MsgcModule {
  readonly cfg: MsgcModuleConfig;
  pointwise: tf.Variable;
  /** branchKernels[d][g]: 3x3 kernel of group g at dilation dilations[d]. */
  branchKernels: tf.Variable[][];

  constructor(cfg: MsgcModuleConfig, normal: () => number) {
    validateModuleConfig(cfg);
    this.cfg = cfg;
    const half = cfg.outChannels / 2;
    const inG = cfg.inChannels / cfg.groups;
    const outG = half / cfg.groups;
    this.pointwise = tf.variable(
      heKernel([1, 1, cfg.inChannels, half], cfg.inChannels, normal)
    );
    this.branchKernels = cfg.dilations.map(() =>
      Array.from({ length: cfg.groups }, () =>
        tf.variable(heKernel([3, 3, inG, outG], 9 * inG, normal))
      )
    );
  }

  forward(x: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const pw = tf.conv2d(x, this.pointwise as unknown as tf.Tensor4D, 1, "same");
      let branch: tf.Tensor4D | null = null;
      for (let d = 0; d < this.cfg.dilations.length; d++) {
        const y = groupConv(x, this.branchKernels[d], 1, this.cfg.dilations[d]);
        branch = branch === null ? y : (tf.add(branch, y) as tf.Tensor4D);
      }
      return tf.concat([pw, branch!], 3) as tf.Tensor4D;
    });
  }

  variables(): tf.Variable[] {
    return [this.pointwise, ...this.branchKernels.flat()];
  }

  parameterCount(): number {
    return this.variables().reduce((n, v) => n + v.size, 0);
  }
}

/** Channel attention: sigmoid of a 1-D convolution over the globally
 * average-pooled channel vector, used as per-channel weights. */
export class EcaAttention {
  kernel: tf.Variable;

  constructor(kernelSize = 3, normal: () => number = gaussian(mulberry32(1))) {
    this.kernel = tf.variable(heKernel([kernelSize, 1, 1], kernelSize, normal));
  }

  /** Per-channel weights in (0, 1) for the given feature map. */
  channelWeights(x: tf.Tensor4D): tf.Tensor2D {
    return tf.tidy(() => {
      const gap = tf.mean(x, [1, 2]) as tf.Tensor2D; // [B, C]
      const y = tf.conv1d(
        gap.expandDims(2) as tf.Tensor3D,
        this.kernel as unknown as tf.Tensor3D,
        1,
        "same"
      );
      return tf.sigmoid(tf.squeeze(y, [2])) as tf.Tensor2D;
    });
  }

  forward(x: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      const w = this.channelWeights(x);
      const b = x.shape[0];
      const c = x.shape[3];
      return tf.mul(x, tf.reshape(w, [b, 1, 1, c])) as tf.Tensor4D;
    });
  }

  variables(): tf.Variable[] {
    return [this.kernel];
  }
}

export interface MsgcBlockConfig {
  inChannels: number;
  outChannels: number;
  stride: 1 | 2;
  groups: number;
  dilations: number[];
  attention?: boolean;
  residual?: boolean;
}

/** Bottleneck block: expand with one module, compress space with a strided
 * group convolution, refine with a second module, weight channels, and add
 * the (projected) residual. stride 2 halves the spatial dimensions. */
export class MsgcBlock {
  readonly cfg: MsgcBlockConfig;
  module1: MsgcModule;
  downKernels: tf.Variable[];
  module2: MsgcModule;
  eca: EcaAttention | null;
  projection: tf.Variable | null;

  constructor(cfg: MsgcBlockConfig, normal: () => number) {
    this.cfg = { attention: true, residual: true, ...cfg };
    const { inChannels, outChannels, groups, dilations } = cfg;
    this.module1 = new MsgcModule(
      { inChannels, outChannels, groups, dilations },
      normal
    );
    const outG = outChannels / groups;
    if (outChannels % groups !== 0) {
      throw new Error(`outChannels ${outChannels} not divisible by groups ${groups}`);
    }
    this.downKernels = Array.from({ length: groups }, () =>
      tf.variable(heKernel([3, 3, outG, outG], 9 * outG, normal))
    );
    this.module2 = new MsgcModule(
      { inChannels: outChannels, outChannels, groups, dilations },
      normal
    );
    this.eca = this.cfg.attention ? new EcaAttention(3, normal) : null;
    const needsProjection =
      this.cfg.residual && (cfg.stride !== 1 || inChannels !== outChannels);
    this.projection = needsProjection
      ? tf.variable(heKernel([1, 1, inChannels, outChannels], inChannels, normal))
      : null;
  }

  forward(x: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      let h = tf.relu(this.module1.forward(x)) as tf.Tensor4D;
      h = tf.relu(groupConv(h, this.downKernels, this.cfg.stride, 1)) as tf.Tensor4D;
      h = this.module2.forward(h);
      if (this.eca) h = this.eca.forward(h);
      if (this.cfg.residual) {
        const res = this.projection
          ? tf.conv2d(x, this.projection as unknown as tf.Tensor4D, this.cfg.stride, "same")
          : x;
        h = tf.add(h, res) as tf.Tensor4D;
      }
      return tf.relu(h) as tf.Tensor4D;
    });
  }

  variables(): tf.Variable[] {
    return [
      ...this.module1.variables(),
      ...this.downKernels,
      ...this.module2.variables(),
      ...(this.eca ? this.eca.variables() : []),
      ...(this.projection ? [this.projection] : []),
    ];
  }

  parameterCount(): number {
    return this.variables().reduce((n, v) => n + v.size, 0);
  }
}

export interface BackboneConfig {
  /** Stem width and the rising block widths; the fourth block keeps the
   * final width (plan [28,56,112,224] gives blocks 28->56->112->224->224). */
  channelPlan: [number, number, number, number];
  groups: number;
  dilations: number[];
  /** Per-block spatial strides; alternating compress/keep by default. */
  strides?: [1 | 2, 1 | 2, 1 | 2, 1 | 2];
  stemStride?: number;
  seed?: number;
}

export const DEFAULT_BACKBONE: BackboneConfig = {
  channelPlan: [28, 56, 112, 224],
  groups: 4,
  dilations: [1, 2, 3],
  strides: [2, 1, 2, 1],
  stemStride: 2,
  seed: 7,
};

/** Four cascaded blocks behind a small stem convolution. */
export class Backbone {
  readonly cfg: BackboneConfig;
  stem: tf.Variable;
  blocks: MsgcBlock[];

  constructor(cfg: BackboneConfig = DEFAULT_BACKBONE) {
    this.cfg = { ...DEFAULT_BACKBONE, ...cfg };
    const normal = gaussian(mulberry32(this.cfg.seed ?? 7));
    const plan = this.cfg.channelPlan;
    const strides = this.cfg.strides ?? [2, 1, 2, 1];
    this.stem = tf.variable(heKernel([3, 3, 3, plan[0]], 27, normal));
    this.blocks = [];
    const outs = [plan[1], plan[2], plan[3], plan[3]];
    let inCh = plan[0];
    for (let b = 0; b < 4; b++) {
      this.blocks.push(
        new MsgcBlock(
          {
            inChannels: inCh,
            outChannels: outs[b],
            stride: strides[b],
            groups: this.cfg.groups,
            dilations: this.cfg.dilations,
          },
          normal
        )
      );
      inCh = outs[b];
    }
  }

  get outChannels(): number {
    return this.blocks[3].cfg.outChannels;
  }

  forward(x: tf.Tensor4D): tf.Tensor4D {
    return tf.tidy(() => {
      let h = tf.relu(
        tf.conv2d(x, this.stem as unknown as tf.Tensor4D, this.cfg.stemStride ?? 2, "same")
      ) as tf.Tensor4D;
      for (const block of this.blocks) h = block.forward(h);
      return h;
    });
  }

  variables(): tf.Variable[] {
    return [this.stem, ...this.blocks.flatMap((b) => b.variables())];
  }

  parameterCount(): number {
    return this.variables().reduce((n, v) => n + v.size, 0);
  }
}
