#!/usr/bin/env node
/**
 * Command line: export frozen embeddings into the interchange format.
 *
 *   scopebench-adapter --config spec.json --images manifest.csv --out out/name
 *
 * The config JSON holds the backbone spec and channel adaptation:
 * {
 *   "family": "vision-transformer" | "convnet" | "single-conv",
 *   "size": "tiny" | "small",
 *   "weights": {"kind": "random", "seed": 0} | {"kind": "pretrained", "path": "w.json"},
 *   "stages": [1, 2, 3, 4],
 *   "pooling": "class-token" | "token-mean" | "global-average",
 *   "adaptation": {"channels": 5, "scheme": "copy-preserve" | "rescaled"}
 * }
 */

import * as fs from "node:fs";

import { BackboneSpec } from "./backbones.js";
import { ChannelAdaptation } from "./adapt.js";
import { extractEmbeddings } from "./extract.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near ${argv[i]}`);
    }
    out.set(argv[i].slice(2), argv[i + 1]);
  }
  return out;
}

export function main(argv: string[]): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
    for (const key of ["config", "images", "out"]) {
      if (!args.has(key)) throw new Error(`missing --${key}`);
    }
  } catch (err) {
    console.error(`error [config]: ${(err as Error).message}`);
    return 2;
  }
  try {
    const raw = JSON.parse(fs.readFileSync(args.get("config")!, "utf-8"));
    const spec: BackboneSpec = {
      family: raw.family,
      size: raw.size ?? "tiny",
      weights: raw.weights ?? { kind: "random", seed: 0 },
      stages: raw.stages ?? [1],
      pooling: raw.pooling ?? (raw.family === "vision-transformer" ? "class-token" : "global-average"),
    };
    const adaptation: ChannelAdaptation = raw.adaptation ?? {
      channels: 3,
      scheme: "copy-preserve",
    };
    const result = extractEmbeddings(spec, args.get("images")!, adaptation, args.get("out")!);
    for (const t of result.tables) {
      console.log(`stage ${t.stage} -> ${t.base}.{manifest.json,f32,meta.csv}`);
    }
    return 0;
  } catch (err) {
    console.error(`error [data]: ${(err as Error).message}`);
    return 3;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
