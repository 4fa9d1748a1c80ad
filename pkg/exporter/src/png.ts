// Minimal PNG decoder for the mask/image files the pipeline produces:
// 8-bit depth, color types 0 (gray), 2 (RGB), 4 (gray+alpha), 6 (RGBA),
// no interlacing. Decompression uses node's built-in zlib.

import * as fs from 'node:fs';
import * as zlib from 'node:zlib';

export interface RgbImage {
  width: number;
  height: number;
  /** interleaved RGB, length width*height*3, values 0..255 */
  pixels: Uint8Array;
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

export function decodePng(path: string): RgbImage {
  const buf = fs.readFileSync(path);
  if (!buf.subarray(0, 8).equals(PNG_SIGNATURE)) {
    throw new Error(`not a PNG file: ${path}`);
  }

  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  let interlace = 0;
  const idat: Buffer[] = [];

  let off = 8;
  while (off < buf.length) {
    const len = buf.readUInt32BE(off);
    const type = buf.toString('ascii', off + 4, off + 8);
    const data = buf.subarray(off + 8, off + 8 + len);
    if (type === 'IHDR') {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      bitDepth = data[8];
      colorType = data[9];
      interlace = data[12];
    } else if (type === 'IDAT') {
      idat.push(data);
    } else if (type === 'IEND') {
      break;
    }
    off += 12 + len;
  }

  if (bitDepth !== 8) throw new Error(`unsupported PNG bit depth ${bitDepth}: ${path}`);
  if (interlace !== 0) throw new Error(`interlaced PNG unsupported: ${path}`);
  const channelsByType: Record<number, number> = { 0: 1, 2: 3, 4: 2, 6: 4 };
  const nch = channelsByType[colorType];
  if (nch === undefined) throw new Error(`unsupported PNG color type ${colorType}: ${path}`);

  const raw = zlib.inflateSync(Buffer.concat(idat));
  const stride = width * nch;
  if (raw.length < height * (stride + 1)) throw new Error(`truncated PNG data: ${path}`);

  const lines = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const src = (y * (stride + 1)) + 1;
    const dst = y * stride;
    for (let x = 0; x < stride; x++) {
      const v = raw[src + x];
      const left = x >= nch ? lines[dst + x - nch] : 0;
      const up = y > 0 ? lines[dst - stride + x] : 0;
      const upLeft = y > 0 && x >= nch ? lines[dst - stride + x - nch] : 0;
      let out: number;
      switch (filter) {
        case 0: out = v; break;
        case 1: out = v + left; break;
        case 2: out = v + up; break;
        case 3: out = v + ((left + up) >> 1); break;
        case 4: out = v + paeth(left, up, upLeft); break;
        default: throw new Error(`unknown PNG filter ${filter}: ${path}`);
      }
      lines[dst + x] = out & 0xff;
    }
  }

  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    const s = i * nch;
    if (nch <= 2) {
      const g = lines[s];
      pixels[i * 3] = g;
      pixels[i * 3 + 1] = g;
      pixels[i * 3 + 2] = g;
    } else {
      pixels[i * 3] = lines[s];
      pixels[i * 3 + 1] = lines[s + 1];
      pixels[i * 3 + 2] = lines[s + 2];
    }
  }
  return { width, height, pixels };
}
