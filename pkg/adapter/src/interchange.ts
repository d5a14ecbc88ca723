/**
 * Writer (and verifying reader) for the embedding interchange triplet:
 *
 *   <name>.manifest.json  {"version":1,"n_items":N,"dim":D,"dtype":"f32le",
 *                          "ids":[...],"meta_keys":[...]}
 *   <name>.f32            N*D float32 little-endian, row-major
 *   <name>.meta.csv       item_id,key,value
 *
 * Byte conventions match the consumer: canonical JSON (sorted keys, no
 * spaces, trailing newline), meta rows ordered by (item order, key order),
 * atomic temp-file renames.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface EmbeddingTable {
  ids: string[];
  /** row-major, length ids.length * dim */
  data: Float32Array;
  dim: number;
  meta: Record<string, string[]>;
}

function canonicalJson(obj: unknown): string {
  const sort = (v: unknown): unknown => {
    if (Array.isArray(v)) return v.map(sort);
    if (v !== null && typeof v === "object") {
      const out: Record<string, unknown> = {};
      for (const k of Object.keys(v as Record<string, unknown>).sort()) {
        out[k] = sort((v as Record<string, unknown>)[k]);
      }
      return out;
    }
    return v;
  };
  return JSON.stringify(sort(obj)) + "\n";
}

function atomicWrite(file: string, payload: Buffer | string): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  const tmp = path.join(
    path.dirname(file),
    `.${path.basename(file)}.${process.pid}.tmp`
  );
  fs.writeFileSync(tmp, payload);
  fs.renameSync(tmp, file);
}

function csvField(value: string): string {
  if (/[",\n\r]/.test(value)) {
    return '"' + value.replace(/"/g, '""') + '"';
  }
  return value;
}

export function tablePaths(base: string): {
  manifest: string;
  payload: string;
  meta: string;
} {
  return {
    manifest: `${base}.manifest.json`,
    payload: `${base}.f32`,
    meta: `${base}.meta.csv`,
  };
}

export function validateTable(table: EmbeddingTable): void {
  const n = table.ids.length;
  if (table.dim < 1) throw new Error("dim must be positive");
  if (table.data.length !== n * table.dim) {
    throw new Error(
      `payload length ${table.data.length} != n_items*dim ${n * table.dim}`
    );
  }
  const seen = new Set<string>();
  for (const id of table.ids) {
    if (seen.has(id)) throw new Error(`duplicate item id ${id}`);
    seen.add(id);
  }
  for (let i = 0; i < table.data.length; i++) {
    if (!Number.isFinite(table.data[i])) {
      throw new Error(`non-finite value at flat index ${i}`);
    }
  }
  for (const [key, col] of Object.entries(table.meta)) {
    if (col.length !== n) throw new Error(`metadata column ${key} has wrong length`);
  }
}

export function writeTable(table: EmbeddingTable, base: string): void {
  validateTable(table);
  const metaKeys = Object.keys(table.meta).sort();
  const manifest = {
    version: 1,
    n_items: table.ids.length,
    dim: table.dim,
    dtype: "f32le",
    ids: table.ids,
    meta_keys: metaKeys,
  };
  const { manifest: mPath, payload: pPath, meta: cPath } = tablePaths(base);
  atomicWrite(mPath, canonicalJson(manifest));

  const buf = Buffer.alloc(table.data.length * 4);
  for (let i = 0; i < table.data.length; i++) {
    buf.writeFloatLE(table.data[i], i * 4);
  }
  atomicWrite(pPath, buf);

  const lines = ["item_id,key,value"];
  table.ids.forEach((id, i) => {
    for (const key of metaKeys) {
      lines.push(`${csvField(id)},${csvField(key)},${csvField(table.meta[key][i])}`);
    }
  });
  atomicWrite(cPath, lines.join("\n") + "\n");
}

/** Strict read-back used by tests; the Python toolkit is the reference reader. */
export function readTable(base: string): EmbeddingTable {
  const { manifest: mPath, payload: pPath, meta: cPath } = tablePaths(base);
  const manifest = JSON.parse(fs.readFileSync(mPath, "utf-8"));
  if (manifest.version !== 1) throw new Error(`unsupported version ${manifest.version}`);
  const n: number = manifest.n_items;
  const dim: number = manifest.dim;
  const blob = fs.readFileSync(pPath);
  if (blob.length !== n * dim * 4) {
    throw new Error(`payload holds ${blob.length} bytes, expected ${n * dim * 4}`);
  }
  const data = new Float32Array(n * dim);
  for (let i = 0; i < data.length; i++) data[i] = blob.readFloatLE(i * 4);
  const meta: Record<string, string[]> = {};
  for (const key of manifest.meta_keys as string[]) {
    meta[key] = new Array<string>(n).fill("");
  }
  const index = new Map<string, number>(manifest.ids.map((id: string, i: number) => [id, i]));
  const text = fs.readFileSync(cPath, "utf-8").split(/\r?\n/).filter((l) => l.length);
  for (const line of text.slice(1)) {
    const cells = line.split(",");
    if (cells.length < 3) throw new Error(`malformed meta row: ${line}`);
    const [id, key, ...rest] = cells;
    const row = index.get(id);
    if (row === undefined) throw new Error(`unknown item id ${id}`);
    meta[key][row] = rest.join(",");
  }
  return { ids: manifest.ids, data, dim, meta };
}
