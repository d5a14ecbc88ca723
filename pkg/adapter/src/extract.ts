/**
 * Frozen-embedding extraction: images -> one interchange table per stage.
 *
 * Every emitted table carries metadata keys {model, stage, weights, seed,
 * pooling}; the stage index is embedded in both the filename suffix
 * (_stage<k>) and the metadata, and files always satisfy the consumer's
 * validation (unique ids, finite float32 payloads, consistent shapes).
 */

import * as fs from "node:fs";
import * as tf from "@tensorflow/tfjs";

import { adaptWeights, ChannelAdaptation } from "./adapt.js";
import {
  BackboneSpec,
  buildRandomWeights,
  forward,
  validateStages,
  Weights,
  weightsFromJson,
} from "./backbones.js";
import { EmbeddingTable, writeTable } from "./interchange.js";
import { readImageManifest, readRawImage, toNhwc } from "./rawimage.js";

export interface ExtractResult {
  /** base path per exported stage, in ascending stage order */
  tables: Array<{ stage: number; base: string }>;
}

export function modelLabel(spec: BackboneSpec): string {
  return `${spec.family}-${spec.size}`;
}

export function resolveWeights(spec: BackboneSpec): Weights {
  if (spec.weights.kind === "random") {
    return buildRandomWeights(spec, spec.weights.seed);
  }
  return weightsFromJson(fs.readFileSync(spec.weights.path, "utf-8"));
}

export function extractEmbeddings(
  spec: BackboneSpec,
  manifestPath: string,
  adaptation: ChannelAdaptation,
  outBase: string
): ExtractResult {
  validateStages(spec);
  const entries = readImageManifest(manifestPath);
  if (entries.length === 0) throw new Error("empty image manifest");
  const weights = adaptWeights(spec.family, resolveWeights(spec), adaptation);

  const perStage = new Map<number, Float32Array[]>();
  const ids: string[] = [];
  for (const entry of entries) {
    const img = readRawImage(entry.path);
    if (img.channels !== adaptation.channels) {
      throw new Error(
        `${entry.path}: image has ${img.channels} channels, adaptation expects ${adaptation.channels}`
      );
    }
    const nhwc = tf.tensor4d(toNhwc(img), [1, img.height, img.width, img.channels]);
    try {
      const stages = forward(spec, weights, nhwc);
      for (const [stage, vec] of stages) {
        if (!perStage.has(stage)) perStage.set(stage, []);
        perStage.get(stage)!.push(vec);
      }
    } finally {
      nhwc.dispose();
    }
    ids.push(entry.itemId);
  }

  const seed = spec.weights.kind === "random" ? String(spec.weights.seed) : "";
  const tables: Array<{ stage: number; base: string }> = [];
  for (const stage of [...perStage.keys()].sort((a, b) => a - b)) {
    const vectors = perStage.get(stage)!;
    const dim = vectors[0].length;
    const data = new Float32Array(ids.length * dim);
    vectors.forEach((v, i) => data.set(v, i * dim));
    const meta: Record<string, string[]> = {
      model: ids.map(() => modelLabel(spec)),
      stage: ids.map(() => String(stage)),
      weights: ids.map(() => spec.weights.kind),
      seed: ids.map(() => seed),
      pooling: ids.map(() => spec.pooling),
    };
    const table: EmbeddingTable = { ids, data, dim, meta };
    const base = `${outBase}_stage${stage}`;
    writeTable(table, base);
    tables.push({ stage, base });
  }
  return { tables };
}
