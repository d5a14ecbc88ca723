/**
 * Reader for the planar raw image format and its manifest:
 * header C,H,W as u32le x3 followed by C*H*W float32 little-endian values,
 * plus a CSV manifest with header item_id,path (paths relative to the
 * manifest file).
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface RawImage {
  channels: number;
  height: number;
  width: number;
  /** planar, length C*H*W */
  data: Float32Array;
}

export function readRawImage(file: string): RawImage {
  const blob = fs.readFileSync(file);
  if (blob.length < 12) throw new Error(`${file}: missing raw image header`);
  const c = blob.readUInt32LE(0);
  const h = blob.readUInt32LE(4);
  const w = blob.readUInt32LE(8);
  const need = c * h * w * 4;
  if (blob.length - 12 !== need) {
    throw new Error(`${file}: payload holds ${blob.length - 12} bytes, expected ${need}`);
  }
  const data = new Float32Array(c * h * w);
  for (let i = 0; i < data.length; i++) data[i] = blob.readFloatLE(12 + i * 4);
  return { channels: c, height: h, width: w, data };
}

export function writeRawImage(img: RawImage, file: string): void {
  const buf = Buffer.alloc(12 + img.data.length * 4);
  buf.writeUInt32LE(img.channels, 0);
  buf.writeUInt32LE(img.height, 4);
  buf.writeUInt32LE(img.width, 8);
  for (let i = 0; i < img.data.length; i++) buf.writeFloatLE(img.data[i], 12 + i * 4);
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, buf);
}

export function readImageManifest(file: string): Array<{ itemId: string; path: string }> {
  const base = path.dirname(path.resolve(file));
  const lines = fs
    .readFileSync(file, "utf-8")
    .split(/\r?\n/)
    .filter((l) => l.length > 0);
  if (lines.length < 1 || lines[0].trim() !== "item_id,path") {
    throw new Error(`${file}: expected header item_id,path`);
  }
  return lines.slice(1).map((line) => {
    const comma = line.indexOf(",");
    if (comma < 0) throw new Error(`${file}: malformed row ${line}`);
    const itemId = line.slice(0, comma);
    const rel = line.slice(comma + 1);
    return { itemId, path: path.isAbsolute(rel) ? rel : path.join(base, rel) };
  });
}

/** NHWC float32 tensor data for a batch of one planar image. */
export function toNhwc(img: RawImage): Float32Array {
  const { channels: c, height: h, width: w, data } = img;
  const out = new Float32Array(h * w * c);
  for (let ch = 0; ch < c; ch++) {
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        out[(y * w + x) * c + ch] = data[ch * h * w + y * w + x];
      }
    }
  }
  return out;
}
