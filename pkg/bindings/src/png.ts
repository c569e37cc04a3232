/** Minimal PNG decoder for the CLI's render output: 8-bit RGB (color type
 *  2) or RGBA (6), non-interlaced. Inflate comes from node:zlib; only the
 *  five standard scanline filters are implemented. */

import { readFileSync } from "node:fs";
import { inflateSync } from "node:zlib";

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB triples, 3 bytes per pixel. */
  data: Uint8Array;
}

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function readPng(path: string): RgbImage {
  const raw = readFileSync(path);
  if (!raw.subarray(0, 8).equals(PNG_SIGNATURE)) throw new Error(`${path}: not a PNG`);
  let pos = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  const idat: Buffer[] = [];
  while (pos < raw.length) {
    const len = raw.readUInt32BE(pos);
    const type = raw.subarray(pos + 4, pos + 8).toString("ascii");
    const body = raw.subarray(pos + 8, pos + 8 + len);
    if (type === "IHDR") {
      width = body.readUInt32BE(0);
      height = body.readUInt32BE(4);
      bitDepth = body[8];
      colorType = body[9];
      if (body[12] !== 0) throw new Error(`${path}: interlaced PNG unsupported`);
    } else if (type === "IDAT") {
      idat.push(Buffer.from(body));
    } else if (type === "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (bitDepth !== 8 || (colorType !== 2 && colorType !== 6)) {
    throw new Error(`${path}: only 8-bit RGB/RGBA supported (got depth ${bitDepth}, type ${colorType})`);
  }
  const bpp = colorType === 2 ? 3 : 4;
  const decompressed = inflateSync(Buffer.concat(idat));
  const stride = width * bpp;
  const out = new Uint8Array(width * height * 3);
  const prev = new Uint8Array(stride);
  const cur = new Uint8Array(stride);
  for (let row = 0; row < height; row++) {
    const filter = decompressed[row * (stride + 1)];
    const line = decompressed.subarray(row * (stride + 1) + 1, (row + 1) * (stride + 1));
    for (let i = 0; i < stride; i++) {
      const left = i >= bpp ? cur[i - bpp] : 0;
      const up = prev[i];
      const upLeft = i >= bpp ? prev[i - bpp] : 0;
      let value = line[i];
      switch (filter) {
        case 0:
          break;
        case 1:
          value = (value + left) & 0xff;
          break;
        case 2:
          value = (value + up) & 0xff;
          break;
        case 3:
          value = (value + ((left + up) >> 1)) & 0xff;
          break;
        case 4:
          value = (value + paeth(left, up, upLeft)) & 0xff;
          break;
        default:
          throw new Error(`${path}: unknown PNG filter ${filter}`);
      }
      cur[i] = value;
    }
    for (let x = 0; x < width; x++) {
      out[(row * width + x) * 3] = cur[x * bpp];
      out[(row * width + x) * 3 + 1] = cur[x * bpp + 1];
      out[(row * width + x) * 3 + 2] = cur[x * bpp + 2];
    }
    prev.set(cur);
  }
  return { width, height, data: out };
}
