/** Float64 reference implementations of the convolution arithmetic.
 *
 * Direct-loop convolutions with the same "same"-padding rule as the
 * tensor library (output ceil(in/stride), total pad split with the
 * smaller half on top). These are the oracles: slow, obvious, and in
 * double precision, so they can also back finite-difference gradient
 * checks that float32 autograd cannot.
 */

export interface Nd {
  shape: number[];
  data: Float64Array;
}

export function nd(shape: number[], data?: Float64Array | number[]): Nd {
  const size = shape.reduce((a, b) => a * b, 1);
  if (data === undefined) return { shape, data: new Float64Array(size) };
  const arr = data instanceof Float64Array ? data : Float64Array.from(data);
  if (arr.length !== size) {
    throw new Error(`data length ${arr.length} does not match shape ${shape}`);
  }
  return { shape, data: arr };
}

export function randomNd(shape: number[], normal: () => number): Nd {
  const out = nd(shape);
  for (let i = 0; i < out.data.length; i++) out.data[i] = normal();
  return out;
}

function samePad(inSize: number, kernel: number, stride: number, dilation: number) {
  const outSize = Math.ceil(inSize / stride);
  const effective = (kernel - 1) * dilation + 1;
  const total = Math.max((outSize - 1) * stride + effective - inSize, 0);
  return { outSize, before: Math.floor(total / 2) };
}

/** input [H,W,Ci] * kernel [kh,kw,Ci,Co] -> [H',W',Co], zero 'same' pad. */
export function conv2dRef(input: Nd, kernel: Nd, stride = 1, dilation = 1): Nd {
  const [h, w, ci] = input.shape;
  const [kh, kw, kci, co] = kernel.shape;
  if (kci !== ci) throw new Error(`channel mismatch: input ${ci}, kernel ${kci}`);
  const py = samePad(h, kh, stride, dilation);
  const px = samePad(w, kw, stride, dilation);
  const out = nd([py.outSize, px.outSize, co]);
  for (let oy = 0; oy < py.outSize; oy++) {
    for (let ox = 0; ox < px.outSize; ox++) {
      for (let ky = 0; ky < kh; ky++) {
        const iy = oy * stride - py.before + ky * dilation;
        if (iy < 0 || iy >= h) continue;
        for (let kx = 0; kx < kw; kx++) {
          const ix = ox * stride - px.before + kx * dilation;
          if (ix < 0 || ix >= w) continue;
          for (let c = 0; c < ci; c++) {
            const v = input.data[(iy * w + ix) * ci + c];
            if (v === 0) continue;
            const kBase = ((ky * kw + kx) * ci + c) * co;
            const oBase = (oy * px.outSize + ox) * co;
            for (let o = 0; o < co; o++) {
              out.data[oBase + o] += v * kernel.data[kBase + o];
            }
          }
        }
      }
    }
  }
  return out;
}

/** d(0.5*sum(upstream^2-style))/dW: correlate input with the upstream
 * signal over the same traversal as the forward pass. */
export function conv2dWeightGradRef(
  input: Nd,
  kernelShape: number[],
  upstream: Nd,
  stride = 1,
  dilation = 1
): Nd {
  const [h, w, ci] = input.shape;
  const [kh, kw, kci, co] = kernelShape;
  if (kci !== ci) throw new Error("channel mismatch");
  const py = samePad(h, kh, stride, dilation);
  const px = samePad(w, kw, stride, dilation);
  if (upstream.shape[0] !== py.outSize || upstream.shape[1] !== px.outSize) {
    throw new Error("upstream shape does not match the forward output");
  }
  const grad = nd(kernelShape);
  for (let oy = 0; oy < py.outSize; oy++) {
    for (let ox = 0; ox < px.outSize; ox++) {
      for (let ky = 0; ky < kh; ky++) {
        const iy = oy * stride - py.before + ky * dilation;
        if (iy < 0 || iy >= h) continue;
        for (let kx = 0; kx < kw; kx++) {
          const ix = ox * stride - px.before + kx * dilation;
          if (ix < 0 || ix >= w) continue;
          for (let c = 0; c < ci; c++) {
            const v = input.data[(iy * w + ix) * ci + c];
            if (v === 0) continue;
            const gBase = ((ky * kw + kx) * ci + c) * co;
            const uBase = (oy * px.outSize + ox) * co;
            for (let o = 0; o < co; o++) {
              grad.data[gBase + o] += v * upstream.data[uBase + o];
            }
          }
        }
      }
    }
  }
  return grad;
}

export function channelSlice(input: Nd, from: number, to: number): Nd {
  const [h, w, c] = input.shape;
  const width = to - from;
  const out = nd([h, w, width]);
  for (let i = 0; i < h * w; i++) {
    for (let j = 0; j < width; j++) {
      out.data[i * width + j] = input.data[i * c + from + j];
    }
  }
  return out;
}

export function channelConcat(parts: Nd[]): Nd {
  const [h, w] = parts[0].shape;
  const widths = parts.map((p) => p.shape[2]);
  const total = widths.reduce((a, b) => a + b, 0);
  const out = nd([h, w, total]);
  for (let i = 0; i < h * w; i++) {
    let offset = 0;
    for (let p = 0; p < parts.length; p++) {
      for (let j = 0; j < widths[p]; j++) {
        out.data[i * total + offset + j] = parts[p].data[i * widths[p] + j];
      }
      offset += widths[p];
    }
  }
  return out;
}

export function addInPlace(a: Nd, b: Nd): Nd {
  for (let i = 0; i < a.data.length; i++) a.data[i] += b.data[i];
  return a;
}

export interface MsgcRefWeights {
  pointwise: Nd; // [1,1,in,out/2]
  branches: Nd[][]; // [dilationIndex][group] of [3,3,in/g,(out/2)/g]
}

export interface MsgcRefConfig {
  inChannels: number;
  outChannels: number;
  groups: number;
  dilations: number[];
}

export function randomMsgcWeights(
  cfg: MsgcRefConfig,
  normal: () => number
): MsgcRefWeights {
  const half = cfg.outChannels / 2;
  const inG = cfg.inChannels / cfg.groups;
  const outG = half / cfg.groups;
  return {
    pointwise: randomNd([1, 1, cfg.inChannels, half], normal),
    branches: cfg.dilations.map(() =>
      Array.from({ length: cfg.groups }, () => randomNd([3, 3, inG, outG], normal))
    ),
  };
}

/** Reference forward: concat(pointwise 1x1, sum over dilations of the
 * grouped dilated 3x3), matching the module's channel layout. */
export function msgcForwardRef(input: Nd, weights: MsgcRefWeights, cfg: MsgcRefConfig): Nd {
  const inG = cfg.inChannels / cfg.groups;
  const pw = conv2dRef(input, weights.pointwise, 1, 1);
  let branch: Nd | null = null;
  for (let d = 0; d < cfg.dilations.length; d++) {
    const parts: Nd[] = [];
    for (let g = 0; g < cfg.groups; g++) {
      const part = conv2dRef(
        channelSlice(input, g * inG, (g + 1) * inG),
        weights.branches[d][g],
        1,
        cfg.dilations[d]
      );
      parts.push(part);
    }
    const merged = channelConcat(parts);
    branch = branch === null ? merged : addInPlace(branch, merged);
  }
  return channelConcat([pw, branch!]);
}

/** Analytic weight gradient of L = 0.5 * sum(forward(input)^2). */
export function msgcWeightGradRef(
  input: Nd,
  weights: MsgcRefWeights,
  cfg: MsgcRefConfig
): { loss: number; grads: MsgcRefWeights } {
  const y = msgcForwardRef(input, weights, cfg);
  let loss = 0;
  for (const v of y.data) loss += 0.5 * v * v;
  const half = cfg.outChannels / 2;
  const inG = cfg.inChannels / cfg.groups;
  const outG = half / cfg.groups;
  const upPw = channelSlice(y, 0, half);
  const upBranch = channelSlice(y, half, cfg.outChannels);
  const grads: MsgcRefWeights = {
    pointwise: conv2dWeightGradRef(input, weights.pointwise.shape, upPw, 1, 1),
    branches: cfg.dilations.map((dil, d) =>
      Array.from({ length: cfg.groups }, (_, g) =>
        conv2dWeightGradRef(
          channelSlice(input, g * inG, (g + 1) * inG),
          weights.branches[d][g].shape,
          channelSlice(upBranch, g * outG, (g + 1) * outG),
          1,
          dil
        )
      )
    ),
  };
  return { loss, grads };
}

export function flattenWeights(w: MsgcRefWeights): Float64Array {
  const parts = [w.pointwise.data, ...w.branches.flat().map((k) => k.data)];
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Float64Array(total);
  let off = 0;
  for (const p of parts) {
    out.set(p, off);
    off += p.length;
  }
  return out;
}

export function unflattenWeights(flat: Float64Array, template: MsgcRefWeights): MsgcRefWeights {
  let off = 0;
  const take = (t: Nd): Nd => {
    const size = t.data.length;
    const out = nd(t.shape, flat.slice(off, off + size));
    off += size;
    return out;
  };
  return {
    pointwise: take(template.pointwise),
    branches: template.branches.map((row) => row.map(take)),
  };
}
