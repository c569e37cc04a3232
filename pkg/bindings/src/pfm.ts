/** Parsers for the CLI's float map formats: PFM (bottom-up scanlines) and
 *  binary PGM masks. */

import { readFileSync } from "node:fs";

export interface FloatMap {
  width: number;
  height: number;
  channels: number;
  /** Row-major, top row first (flipped from the on-disk PFM order). */
  data: Float32Array;
}

export function readPfm(path: string): FloatMap {
  const raw = readFileSync(path);
  const first = raw.indexOf(0x0a);
  const second = raw.indexOf(0x0a, first + 1);
  const third = raw.indexOf(0x0a, second + 1);
  if (first < 0 || second < 0 || third < 0) throw new Error(`${path}: truncated PFM header`);
  const magic = raw.subarray(0, first).toString("ascii");
  if (magic !== "Pf" && magic !== "PF") throw new Error(`${path}: bad PFM magic ${magic}`);
  const channels = magic === "PF" ? 3 : 1;
  const [w, h] = raw
    .subarray(first + 1, second)
    .toString("ascii")
    .trim()
    .split(/\s+/)
    .map(Number);
  const scale = Number(raw.subarray(second + 1, third).toString("ascii").trim());
  const littleEndian = scale < 0;
  const count = w * h * channels;
  const body = raw.subarray(third + 1, third + 1 + count * 4);
  if (body.length < count * 4) throw new Error(`${path}: truncated PFM payload`);
  const view = new DataView(body.buffer, body.byteOffset, body.byteLength);
  const data = new Float32Array(count);
  const rowLen = w * channels;
  for (let row = 0; row < h; row++) {
    const srcRow = h - 1 - row; // PFM stores bottom-up
    for (let i = 0; i < rowLen; i++) {
      data[row * rowLen + i] = view.getFloat32((srcRow * rowLen + i) * 4, littleEndian);
    }
  }
  return { width: w, height: h, channels, data };
}

export function readPgmMask(path: string): { width: number; height: number; data: Uint8Array } {
  const raw = readFileSync(path);
  if (raw.subarray(0, 2).toString("ascii") !== "P5") throw new Error(`${path}: not binary PGM`);
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    while (pos < raw.length && /\s/.test(String.fromCharCode(raw[pos]))) pos++;
    if (raw[pos] === 0x23) {
      pos = raw.indexOf(0x0a, pos) + 1;
      continue;
    }
    let start = pos;
    while (pos < raw.length && !/\s/.test(String.fromCharCode(raw[pos]))) pos++;
    fields.push(Number(raw.subarray(start, pos).toString("ascii")));
  }
  const [w, h, maxval] = fields;
  if (maxval !== 255) throw new Error(`${path}: expected maxval 255`);
  const body = raw.subarray(pos + 1, pos + 1 + w * h);
  const data = new Uint8Array(w * h);
  for (let i = 0; i < w * h; i++) data[i] = body[i] > 0 ? 1 : 0;
  return { width: w, height: h, data };
}
