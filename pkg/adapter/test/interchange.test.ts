import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { EmbeddingTable, readTable, tablePaths, writeTable } from "../src/interchange.js";

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "adapter-test-"));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function sampleTable(): EmbeddingTable {
  return {
    ids: ["a", "b", "c"],
    data: Float32Array.from([1, 2, 3, 4, 5, 6]),
    dim: 2,
    meta: { model: ["m", "m", "m"], stage: ["1", "1", "1"] },
  };
}

describe("interchange writer", () => {
  it("round-trips through its own reader", () => {
    writeTable(sampleTable(), path.join(dir, "t"));
    const back = readTable(path.join(dir, "t"));
    expect(back.ids).toEqual(["a", "b", "c"]);
    expect(Array.from(back.data)).toEqual([1, 2, 3, 4, 5, 6]);
    expect(back.meta.model).toEqual(["m", "m", "m"]);
  });

  it("rewrites byte-identically", () => {
    const base = path.join(dir, "t");
    writeTable(sampleTable(), base);
    const paths = tablePaths(base);
    const before = [
      fs.readFileSync(paths.manifest),
      fs.readFileSync(paths.payload),
      fs.readFileSync(paths.meta),
    ];
    writeTable(readTable(base), base);
    const after = [
      fs.readFileSync(paths.manifest),
      fs.readFileSync(paths.payload),
      fs.readFileSync(paths.meta),
    ];
    before.forEach((b, i) => expect(b.equals(after[i])).toBe(true));
  });

  it("rejects invalid tables", () => {
    const bad = sampleTable();
    bad.ids = ["a", "a", "c"];
    expect(() => writeTable(bad, path.join(dir, "x"))).toThrow(/duplicate/);
    const nan = sampleTable();
    nan.data[3] = Number.NaN;
    expect(() => writeTable(nan, path.join(dir, "y"))).toThrow(/non-finite/);
  });

  it("passes the consumer-side read_table validation", () => {
    const base = path.join(dir, "t");
    writeTable(sampleTable(), base);
    const script = [
      "from scopebench.interchange import read_table",
      `t = read_table(r'${base}')`,
      "assert t.n_items == 3 and t.dim == 2",
      "assert t.meta['model'] == ['m', 'm', 'm']",
      "print('CONSUMER-OK')",
    ].join("\n");
    const out = execFileSync("python3", ["-c", script], { encoding: "utf-8" });
    expect(out).toContain("CONSUMER-OK");
  });
});
