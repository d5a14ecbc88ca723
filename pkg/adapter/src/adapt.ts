/**
 * Channel adaptation of the stem convolution.
 *
 * Backbone weights are defined for 3-channel (RGB) input; microscopy
 * images carry 5 or 6 channels. The stem kernel [kh, kw, 3, out] is
 * expanded along its input-channel axis by cycling the original filters
 * (channel c uses source filter c mod 3); the bias is untouched. The
 * "rescaled" scheme additionally multiplies the expanded kernel by 3/C to
 * preserve the expected activation magnitude under channel summation.
 * For C = 3 both schemes reproduce the original stem exactly.
 */

import { Param, Weights, stemParamName, Family } from "./backbones.js";

export type AdaptScheme = "copy-preserve" | "rescaled";

export interface ChannelAdaptation {
  channels: number;
  scheme: AdaptScheme;
}

export function expandStemKernel(stem: Param, adaptation: ChannelAdaptation): Param {
  const [kh, kw, cin, cout] = stem.shape;
  const target = adaptation.channels;
  if (target < 1) throw new Error("target channel count must be >= 1");
  const scale = adaptation.scheme === "rescaled" ? cin / target : 1.0;
  const out = new Float32Array(kh * kw * target * cout);
  for (let y = 0; y < kh; y++) {
    for (let x = 0; x < kw; x++) {
      for (let c = 0; c < target; c++) {
        const src = c % cin;
        for (let f = 0; f < cout; f++) {
          const value = stem.data[((y * kw + x) * cin + src) * cout + f];
          out[((y * kw + x) * target + c) * cout + f] = Math.fround(value * scale);
        }
      }
    }
  }
  return { shape: [kh, kw, target, cout], data: out };
}

/** New weight map whose stem accepts `adaptation.channels` input channels. */
export function adaptWeights(
  family: Family,
  weights: Weights,
  adaptation: ChannelAdaptation
): Weights {
  const stemName = stemParamName(family);
  const stem = weights.get(stemName);
  if (!stem) throw new Error(`weights lack stem parameter ${stemName}`);
  const out: Weights = new Map(weights);
  out.set(stemName, expandStemKernel(stem, adaptation));
  return out;
}
