/**
 * Minimal vision backbones with deterministic seeded weights.
 *
 * Three families share one interface: a single random conv layer with
 * global pooling, a strided convnet, and a compact vision transformer.
 * Weights are generated for a 3-channel stem (the pretrained-RGB
 * convention) and adapted to other channel counts separately, so the
 * adaptation identity at C=3 is exact. Forward passes capture the
 * requested intermediate stages and pool them into one vector per stage.
 */

import * as tf from "@tensorflow/tfjs";

import { Prng } from "./prng.js";

export type Family = "single-conv" | "convnet" | "vision-transformer";
export type Pooling = "class-token" | "token-mean" | "global-average";

export interface BackboneSpec {
  family: Family;
  size: "tiny" | "small";
  weights: { kind: "random"; seed: number } | { kind: "pretrained"; path: string };
  /** 1-based block/layer indices to export */
  stages: number[];
  pooling: Pooling;
}

export interface Param {
  shape: number[];
  data: Float32Array;
}

export type Weights = Map<string, Param>;

interface ConvnetArch {
  widths: number[];
}

interface VitArch {
  dim: number;
  heads: number;
  depth: number;
  patch: number;
  mlpRatio: number;
}

const CONVNET_SIZES: Record<string, ConvnetArch> = {
  tiny: { widths: [16, 32, 64, 128] },
  small: { widths: [32, 64, 128, 256] },
};

const VIT_SIZES: Record<string, VitArch> = {
  tiny: { dim: 64, heads: 4, depth: 4, patch: 8, mlpRatio: 4 },
  small: { dim: 128, heads: 4, depth: 8, patch: 8, mlpRatio: 4 },
};

const SINGLECONV_SIZES: Record<string, { filters: number; kernel: number }> = {
  tiny: { filters: 32, kernel: 7 },
  small: { filters: 64, kernel: 7 },
};

export function familyDepth(spec: BackboneSpec): number {
  if (spec.family === "single-conv") return 1;
  if (spec.family === "convnet") return CONVNET_SIZES[spec.size].widths.length;
  return VIT_SIZES[spec.size].depth;
}

export function validateStages(spec: BackboneSpec): void {
  const depth = familyDepth(spec);
  for (const s of spec.stages) {
    if (!Number.isInteger(s) || s < 1 || s > depth) {
      throw new Error(
        `stage ${s} invalid for ${spec.family}/${spec.size} with depth ${depth}`
      );
    }
  }
  if (spec.family !== "vision-transformer" && spec.pooling !== "global-average") {
    throw new Error(`${spec.family} supports only global-average pooling`);
  }
  if (spec.family === "vision-transformer" && spec.pooling === "global-average") {
    throw new Error("vision-transformer pooling must be class-token or token-mean");
  }
}

/** The parameter that consumes input channels; rebuilt by channel adaptation. */
export function stemParamName(family: Family): string {
  return family === "vision-transformer" ? "patch_embed.kernel" : "conv1.kernel";
}

// ----------------------------------------------------------------------
// Weight generation (fixed parameter order, fan-in scaled normals)
// ----------------------------------------------------------------------

function addConv(
  w: Weights,
  rng: Prng,
  name: string,
  kh: number,
  kw: number,
  cin: number,
  cout: number
): void {
  const fanIn = kh * kw * cin;
  w.set(`${name}.kernel`, {
    shape: [kh, kw, cin, cout],
    data: rng.normals(kh * kw * cin * cout, 1.0 / Math.sqrt(fanIn)),
  });
  w.set(`${name}.bias`, { shape: [cout], data: new Float32Array(cout) });
}

function addLinear(w: Weights, rng: Prng, name: string, din: number, dout: number): void {
  w.set(`${name}.kernel`, {
    shape: [din, dout],
    data: rng.normals(din * dout, 1.0 / Math.sqrt(din)),
  });
  w.set(`${name}.bias`, { shape: [dout], data: new Float32Array(dout) });
}

function addLayerNorm(w: Weights, name: string, dim: number): void {
  w.set(`${name}.gamma`, { shape: [dim], data: new Float32Array(dim).fill(1) });
  w.set(`${name}.beta`, { shape: [dim], data: new Float32Array(dim) });
}

export function buildRandomWeights(spec: BackboneSpec, seed: number): Weights {
  const rng = new Prng(seed);
  const w: Weights = new Map();
  const baseChannels = 3;
  if (spec.family === "single-conv") {
    const { filters, kernel } = SINGLECONV_SIZES[spec.size];
    addConv(w, rng, "conv1", kernel, kernel, baseChannels, filters);
    return w;
  }
  if (spec.family === "convnet") {
    const { widths } = CONVNET_SIZES[spec.size];
    let cin = baseChannels;
    widths.forEach((cout, i) => {
      addConv(w, rng, i === 0 ? "conv1" : `conv${i + 1}`, 3, 3, cin, cout);
      cin = cout;
    });
    return w;
  }
  const arch = VIT_SIZES[spec.size];
  addConv(w, rng, "patch_embed", arch.patch, arch.patch, baseChannels, arch.dim);
  w.set("cls_token", { shape: [1, arch.dim], data: rng.normals(arch.dim, 0.02) });
  // sized for 224/patch tokens; interpolated is out of scope, images must match
  const tokens = Math.pow(Math.floor(224 / arch.patch), 2) + 1;
  w.set("pos_embed", {
    shape: [tokens, arch.dim],
    data: rng.normals(tokens * arch.dim, 0.02),
  });
  for (let b = 0; b < arch.depth; b++) {
    addLayerNorm(w, `block${b + 1}.ln1`, arch.dim);
    addLinear(w, rng, `block${b + 1}.qkv`, arch.dim, 3 * arch.dim);
    addLinear(w, rng, `block${b + 1}.proj`, arch.dim, arch.dim);
    addLayerNorm(w, `block${b + 1}.ln2`, arch.dim);
    addLinear(w, rng, `block${b + 1}.fc1`, arch.dim, arch.mlpRatio * arch.dim);
    addLinear(w, rng, `block${b + 1}.fc2`, arch.mlpRatio * arch.dim, arch.dim);
  }
  return w;
}

// ----------------------------------------------------------------------
// Weight (de)serialization for the pretrained path
// ----------------------------------------------------------------------

export function weightsToJson(w: Weights): string {
  const out: Record<string, { shape: number[]; data: number[] }> = {};
  for (const [name, p] of w) out[name] = { shape: p.shape, data: Array.from(p.data) };
  return JSON.stringify(out);
}

export function weightsFromJson(text: string): Weights {
  const raw = JSON.parse(text) as Record<string, { shape: number[]; data: number[] }>;
  const w: Weights = new Map();
  for (const [name, p] of Object.entries(raw)) {
    w.set(name, { shape: p.shape, data: Float32Array.from(p.data) });
  }
  return w;
}

// ----------------------------------------------------------------------
// Forward passes with stage capture
// ----------------------------------------------------------------------

function tensorOf(w: Weights, name: string): tf.Tensor {
  const p = w.get(name);
  if (!p) throw new Error(`missing weight ${name}`);
  return tf.tensor(p.data, p.shape);
}

function layerNorm(x: tf.Tensor2D, gamma: tf.Tensor, beta: tf.Tensor): tf.Tensor2D {
  const { mean, variance } = tf.moments(x, -1, true);
  return x.sub(mean).div(variance.add(1e-6).sqrt()).mul(gamma).add(beta) as tf.Tensor2D;
}

function gelu(x: tf.Tensor): tf.Tensor {
  // tanh approximation of the Gaussian error linear unit
  const c = Math.sqrt(2 / Math.PI);
  return x.mul(
    x.mul(0.044715).mul(x).mul(x).add(x).mul(c).tanh().add(1).mul(0.5)
  );
}

/**
 * Run one NHWC image through the backbone and pool the requested stages.
 * Returns a map from 1-based stage index to the pooled embedding.
 */
export function forward(
  spec: BackboneSpec,
  weights: Weights,
  image: tf.Tensor4D
): Map<number, Float32Array> {
  validateStages(spec);
  const wanted = new Set(spec.stages);
  const out = new Map<number, Float32Array>();
  tf.tidy(() => {
    if (spec.family === "single-conv") {
      const conv = tf
        .conv2d(image, tensorOf(weights, "conv1.kernel") as tf.Tensor4D, 1, "valid")
        .add(tensorOf(weights, "conv1.bias"));
      if (wanted.has(1)) {
        out.set(1, new Float32Array(conv.mean([1, 2]).dataSync()));
      }
      return;
    }
    if (spec.family === "convnet") {
      const { widths } = CONVNET_SIZES[spec.size];
      let x = image;
      widths.forEach((_, i) => {
        const name = `conv${i + 1}`;
        x = tf
          .conv2d(x, tensorOf(weights, `${name}.kernel`) as tf.Tensor4D, 2, "same")
          .add(tensorOf(weights, `${name}.bias`))
          .relu() as tf.Tensor4D;
        if (wanted.has(i + 1)) {
          out.set(i + 1, new Float32Array(x.mean([1, 2]).dataSync()));
        }
      });
      return;
    }
    const arch = VIT_SIZES[spec.size];
    const patches = tf
      .conv2d(
        image,
        tensorOf(weights, "patch_embed.kernel") as tf.Tensor4D,
        arch.patch,
        "valid"
      )
      .add(tensorOf(weights, "patch_embed.bias"));
    const nTokens = patches.shape[1]! * patches.shape[2]!;
    let x = tf.concat(
      [tensorOf(weights, "cls_token") as tf.Tensor2D, patches.reshape([nTokens, arch.dim])],
      0
    ) as tf.Tensor2D;
    const pos = tensorOf(weights, "pos_embed") as tf.Tensor2D;
    if (pos.shape[0] !== nTokens + 1) {
      throw new Error(
        `image token count ${nTokens + 1} does not match pos_embed ${pos.shape[0]}; ` +
          "feed 224x224 inputs (or retrain positions)"
      );
    }
    x = x.add(pos) as tf.Tensor2D;
    const dh = arch.dim / arch.heads;
    for (let b = 1; b <= arch.depth; b++) {
      const ln1 = layerNorm(
        x,
        tensorOf(weights, `block${b}.ln1.gamma`),
        tensorOf(weights, `block${b}.ln1.beta`)
      );
      const qkv = ln1
        .matMul(tensorOf(weights, `block${b}.qkv.kernel`) as tf.Tensor2D)
        .add(tensorOf(weights, `block${b}.qkv.bias`));
      const t = x.shape[0];
      const parts = qkv
        .reshape([t, 3, arch.heads, dh])
        .transpose([1, 2, 0, 3]) as tf.Tensor4D; // [3, heads, T, dh]
      const [q, k, v] = tf.unstack(parts, 0);
      const attn = tf.softmax(
        tf.matMul(q as tf.Tensor3D, k as tf.Tensor3D, false, true).mul(1 / Math.sqrt(dh)),
        -1
      );
      const ctx = tf
        .matMul(attn as tf.Tensor3D, v as tf.Tensor3D)
        .transpose([1, 0, 2])
        .reshape([t, arch.dim]) as tf.Tensor2D;
      const proj = ctx
        .matMul(tensorOf(weights, `block${b}.proj.kernel`) as tf.Tensor2D)
        .add(tensorOf(weights, `block${b}.proj.bias`));
      x = x.add(proj) as tf.Tensor2D;
      const ln2 = layerNorm(
        x,
        tensorOf(weights, `block${b}.ln2.gamma`),
        tensorOf(weights, `block${b}.ln2.beta`)
      );
      const mlp = gelu(
        ln2
          .matMul(tensorOf(weights, `block${b}.fc1.kernel`) as tf.Tensor2D)
          .add(tensorOf(weights, `block${b}.fc1.bias`))
      )
        .matMul(tensorOf(weights, `block${b}.fc2.kernel`) as tf.Tensor2D)
        .add(tensorOf(weights, `block${b}.fc2.bias`));
      x = x.add(mlp) as tf.Tensor2D;
      if (wanted.has(b)) {
        const pooled =
          spec.pooling === "class-token"
            ? x.slice([0, 0], [1, arch.dim]).reshape([arch.dim])
            : x.slice([1, 0], [t - 1, arch.dim]).mean(0);
        out.set(b, new Float32Array(pooled.dataSync()));
      }
    }
  });
  return out;
}
