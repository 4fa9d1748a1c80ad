// Forward pass of the 19-layer convolutional stack (five blocks of 3x3
// convolutions with ReLU, 2x2 max pooling between blocks). Only the
// convolutional part exists here; features are taken at a named layer
// (post-activation), conv5_4 by default.

import { ConvLayerWeights } from './weights';
import { RgbImage } from './png';

/** blocks of (outChannels, repeats); block b layer i is named conv{b}_{i} */
export const VGG19_BLOCKS: ReadonlyArray<readonly [number, number]> = [
  [64, 2],
  [128, 2],
  [256, 4],
  [512, 4],
  [512, 4],
];

export const DEFAULT_LAYER = 'conv5_4';

/** published RGB channel means subtracted before the first convolution */
export const RGB_MEAN: readonly [number, number, number] = [123.68, 116.779, 103.939];

export interface FeatureMap {
  width: number;
  height: number;
  channels: number;
  data: Float32Array; // planar channel-major
}

export interface LayerShape {
  name: string;
  outChannels: number;
  inChannels: number;
}

export function layerShapes(): LayerShape[] {
  const shapes: LayerShape[] = [];
  let inChannels = 3;
  VGG19_BLOCKS.forEach(([channels, repeats], blockIdx) => {
    for (let i = 1; i <= repeats; i++) {
      shapes.push({ name: `conv${blockIdx + 1}_${i}`, outChannels: channels, inChannels });
      inChannels = channels;
    }
  });
  return shapes;
}

export function layerNames(): string[] {
  return layerShapes().map((s) => s.name);
}

export function preprocess(img: RgbImage): FeatureMap {
  const { width, height, pixels } = img;
  const plane = width * height;
  const data = new Float32Array(3 * plane);
  for (let i = 0; i < plane; i++) {
    data[i] = pixels[3 * i] - RGB_MEAN[0];
    data[plane + i] = pixels[3 * i + 1] - RGB_MEAN[1];
    data[2 * plane + i] = pixels[3 * i + 2] - RGB_MEAN[2];
  }
  return { width, height, channels: 3, data };
}

function padPlane(src: Float32Array, offset: number, w: number, h: number): Float32Array {
  const pw = w + 2;
  const out = new Float32Array(pw * (h + 2));
  for (let y = 0; y < h; y++) {
    out.set(src.subarray(offset + y * w, offset + (y + 1) * w), (y + 1) * pw + 1);
  }
  return out;
}

/** 3x3 same-padding convolution followed by ReLU */
export function convRelu(input: FeatureMap, layer: ConvLayerWeights): FeatureMap {
  const { width: w, height: h } = input;
  if (layer.inChannels !== input.channels) {
    throw new Error(
      `layer ${layer.name} expects ${layer.inChannels} channels, got ${input.channels}`,
    );
  }
  const plane = w * h;
  const pw = w + 2;
  const padded: Float32Array[] = [];
  for (let ic = 0; ic < input.channels; ic++) {
    padded.push(padPlane(input.data, ic * plane, w, h));
  }
  const out = new Float32Array(layer.outChannels * plane);
  const acc = new Float64Array(plane);
  for (let oc = 0; oc < layer.outChannels; oc++) {
    acc.fill(layer.bias[oc]);
    const kBase = oc * layer.inChannels * 9;
    for (let ic = 0; ic < layer.inChannels; ic++) {
      const p = padded[ic];
      const k = kBase + ic * 9;
      for (let ky = 0; ky < 3; ky++) {
        const w0 = layer.kernel[k + ky * 3];
        const w1 = layer.kernel[k + ky * 3 + 1];
        const w2 = layer.kernel[k + ky * 3 + 2];
        for (let y = 0; y < h; y++) {
          const rowIn = (y + ky) * pw;
          const rowOut = y * w;
          for (let x = 0; x < w; x++) {
            acc[rowOut + x] += w0 * p[rowIn + x] + w1 * p[rowIn + x + 1] + w2 * p[rowIn + x + 2];
          }
        }
      }
    }
    const base = oc * plane;
    for (let i = 0; i < plane; i++) {
      const v = acc[i];
      out[base + i] = v > 0 ? Math.fround(v) : 0;
    }
  }
  return { width: w, height: h, channels: layer.outChannels, data: out };
}

/** 2x2 max pooling with stride 2 (floor semantics) */
export function maxPool2(input: FeatureMap): FeatureMap {
  const ow = Math.floor(input.width / 2);
  const oh = Math.floor(input.height / 2);
  if (ow < 1 || oh < 1) {
    throw new Error(`feature map ${input.width}x${input.height} too small to pool`);
  }
  const out = new Float32Array(input.channels * ow * oh);
  for (let c = 0; c < input.channels; c++) {
    const inBase = c * input.width * input.height;
    const outBase = c * ow * oh;
    for (let y = 0; y < oh; y++) {
      for (let x = 0; x < ow; x++) {
        const i = inBase + 2 * y * input.width + 2 * x;
        const a = input.data[i];
        const b = input.data[i + 1];
        const cc = input.data[i + input.width];
        const d = input.data[i + input.width + 1];
        out[outBase + y * ow + x] = Math.max(Math.max(a, b), Math.max(cc, d));
      }
    }
  }
  return { width: ow, height: oh, channels: input.channels, data: out };
}

/** run the stack up to and including the named layer (post-ReLU) */
export function forwardTo(img: RgbImage, weights: ConvLayerWeights[], layer: string): FeatureMap {
  const byName = new Map(weights.map((l) => [l.name, l]));
  let current = preprocess(img);
  let blockOfTarget = -1;
  const shapes = layerShapes();
  if (!shapes.some((s) => s.name === layer)) {
    throw new Error(`unknown layer ${layer}; expected one of ${layerNames().join(', ')}`);
  }
  for (let blockIdx = 0; blockIdx < VGG19_BLOCKS.length; blockIdx++) {
    const repeats = VGG19_BLOCKS[blockIdx][1];
    for (let i = 1; i <= repeats; i++) {
      const name = `conv${blockIdx + 1}_${i}`;
      const layerWeights = byName.get(name);
      if (!layerWeights) {
        throw new Error(`weights file is missing layer ${name}`);
      }
      current = convRelu(current, layerWeights);
      if (name === layer) {
        blockOfTarget = blockIdx;
        return current;
      }
    }
    current = maxPool2(current);
  }
  throw new Error(`layer ${layer} not reached (block ${blockOfTarget})`);
}
