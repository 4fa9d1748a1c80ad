// Convolution weight storage (CSWT): magic, version, then one record per
// layer with its name, shape, float32 kernel (out, in, kh, kw) and bias.
//
// Pretrained VGG-19 weights are not bundled; converting a published
// checkpoint into this format is an offline step. `synthesizeWeights`
// produces deterministic stand-in weights (He-style uniform fan-in
// scaling, zero bias) so the exporter runs self-contained.

import * as fs from 'node:fs';

export const WEIGHTS_MAGIC = 'CSWT';
export const WEIGHTS_VERSION = 1;

export interface ConvLayerWeights {
  name: string;
  outChannels: number;
  inChannels: number;
  kernel: Float32Array; // (out, in, 3, 3)
  bias: Float32Array; // (out)
}

export class ModelUnavailable extends Error {}

/** deterministic 32-bit PRNG (mulberry32) */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t = (t + Math.imul(t ^ (t >>> 7), t | 61)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function synthesizeWeights(
  shapes: { name: string; outChannels: number; inChannels: number }[],
  seed: number,
): ConvLayerWeights[] {
  return shapes.map((shape, index) => {
    const rand = mulberry32((seed + 0x9e3779b9 * (index + 1)) >>> 0);
    const fanIn = shape.inChannels * 9;
    const bound = Math.sqrt(6.0 / fanIn);
    const kernel = new Float32Array(shape.outChannels * shape.inChannels * 9);
    for (let i = 0; i < kernel.length; i++) {
      kernel[i] = Math.fround((rand() * 2 - 1) * bound);
    }
    return {
      name: shape.name,
      outChannels: shape.outChannels,
      inChannels: shape.inChannels,
      kernel,
      bias: new Float32Array(shape.outChannels),
    };
  });
}

export function writeWeights(path: string, layers: ConvLayerWeights[]): void {
  const chunks: Buffer[] = [];
  const head = Buffer.allocUnsafe(12);
  head.write(WEIGHTS_MAGIC, 0, 'ascii');
  head.writeUInt32LE(WEIGHTS_VERSION, 4);
  head.writeUInt32LE(layers.length, 8);
  chunks.push(head);
  for (const layer of layers) {
    const name = Buffer.from(layer.name, 'utf8');
    const meta = Buffer.allocUnsafe(4 + name.length + 8);
    meta.writeUInt32LE(name.length, 0);
    name.copy(meta, 4);
    meta.writeUInt32LE(layer.outChannels, 4 + name.length);
    meta.writeUInt32LE(layer.inChannels, 8 + name.length);
    chunks.push(meta);
    const payload = Buffer.allocUnsafe(4 * (layer.kernel.length + layer.bias.length));
    const view = new DataView(payload.buffer, payload.byteOffset);
    layer.kernel.forEach((v, i) => view.setFloat32(4 * i, v, true));
    layer.bias.forEach((v, i) => view.setFloat32(4 * (layer.kernel.length + i), v, true));
    chunks.push(payload);
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

export function readWeights(path: string): ConvLayerWeights[] {
  if (!fs.existsSync(path)) {
    throw new ModelUnavailable(`weights file not found: ${path}`);
  }
  const buf = fs.readFileSync(path);
  if (buf.length < 12 || buf.toString('ascii', 0, 4) !== WEIGHTS_MAGIC) {
    throw new Error(`bad weights header: ${path}`);
  }
  if (buf.readUInt32LE(4) !== WEIGHTS_VERSION) {
    throw new Error(`unsupported weights version: ${path}`);
  }
  const count = buf.readUInt32LE(8);
  const layers: ConvLayerWeights[] = [];
  let off = 12;
  for (let i = 0; i < count; i++) {
    const nameLen = buf.readUInt32LE(off);
    const name = buf.toString('utf8', off + 4, off + 4 + nameLen);
    const outChannels = buf.readUInt32LE(off + 4 + nameLen);
    const inChannels = buf.readUInt32LE(off + 8 + nameLen);
    off += 12 + nameLen;
    const kCount = outChannels * inChannels * 9;
    const kernel = new Float32Array(kCount);
    const bias = new Float32Array(outChannels);
    const view = new DataView(buf.buffer, buf.byteOffset + off);
    for (let j = 0; j < kCount; j++) kernel[j] = view.getFloat32(4 * j, true);
    for (let j = 0; j < outChannels; j++) bias[j] = view.getFloat32(4 * (kCount + j), true);
    off += 4 * (kCount + outChannels);
    layers.push({ name, outChannels, inChannels, kernel, bias });
  }
  return layers;
}
