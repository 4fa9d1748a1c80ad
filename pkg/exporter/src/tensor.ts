// CSFT tensor file format shared with the core pipeline: magic "CSFT",
// little-endian u32 version/width/height/channels, then float32 LE payload
// in planar channel-major order.

import * as fs from 'node:fs';

export const TENSOR_MAGIC = 'CSFT';
export const TENSOR_VERSION = 1;

export interface FeatureTensor {
  width: number;
  height: number;
  channels: number;
  /** planar channel-major: all of channel 0 row-major, then channel 1, ... */
  data: Float32Array;
}

export function writeTensor(path: string, t: FeatureTensor): void {
  const count = t.width * t.height * t.channels;
  if (t.data.length !== count) {
    throw new Error(`tensor payload length ${t.data.length} != ${count}`);
  }
  const buf = Buffer.allocUnsafe(20 + 4 * count);
  buf.write(TENSOR_MAGIC, 0, 'ascii');
  buf.writeUInt32LE(TENSOR_VERSION, 4);
  buf.writeUInt32LE(t.width, 8);
  buf.writeUInt32LE(t.height, 12);
  buf.writeUInt32LE(t.channels, 16);
  const view = new DataView(buf.buffer, buf.byteOffset + 20, 4 * count);
  for (let i = 0; i < count; i++) {
    view.setFloat32(4 * i, t.data[i], true);
  }
  fs.writeFileSync(path, buf);
}

export function readTensor(path: string): FeatureTensor {
  const buf = fs.readFileSync(path);
  if (buf.length < 20 || buf.toString('ascii', 0, 4) !== TENSOR_MAGIC) {
    throw new Error(`bad tensor header: ${path}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== TENSOR_VERSION) {
    throw new Error(`unsupported tensor version ${version}: ${path}`);
  }
  const width = buf.readUInt32LE(8);
  const height = buf.readUInt32LE(12);
  const channels = buf.readUInt32LE(16);
  const count = width * height * channels;
  if (buf.length !== 20 + 4 * count) {
    throw new Error(`tensor payload size mismatch: ${path}`);
  }
  const data = new Float32Array(count);
  const view = new DataView(buf.buffer, buf.byteOffset + 20, 4 * count);
  for (let i = 0; i < count; i++) {
    data[i] = view.getFloat32(4 * i, true);
  }
  return { width, height, channels, data };
}
