// Bilinear upsampling with the align-corners convention: the corner samples
// of the feature grid map exactly onto the corner pixels of the image, so
// pixel-coordinate lookups into the exported tensor are well defined.

import { FeatureMap } from './vgg';

export function upsampleBilinear(src: FeatureMap, outWidth: number, outHeight: number): FeatureMap {
  const { width: sw, height: sh, channels } = src;
  const out = new Float32Array(channels * outWidth * outHeight);
  const scaleX = outWidth > 1 ? (sw - 1) / (outWidth - 1) : 0;
  const scaleY = outHeight > 1 ? (sh - 1) / (outHeight - 1) : 0;

  const x0s = new Int32Array(outWidth);
  const x1s = new Int32Array(outWidth);
  const fxs = new Float64Array(outWidth);
  for (let x = 0; x < outWidth; x++) {
    const sx = x * scaleX;
    const x0 = Math.min(Math.floor(sx), sw - 1);
    x0s[x] = x0;
    x1s[x] = Math.min(x0 + 1, sw - 1);
    fxs[x] = sx - x0;
  }

  for (let c = 0; c < channels; c++) {
    const srcBase = c * sw * sh;
    const outBase = c * outWidth * outHeight;
    for (let y = 0; y < outHeight; y++) {
      const sy = y * scaleY;
      const y0 = Math.min(Math.floor(sy), sh - 1);
      const y1 = Math.min(y0 + 1, sh - 1);
      const fy = sy - y0;
      const row0 = srcBase + y0 * sw;
      const row1 = srcBase + y1 * sw;
      const outRow = outBase + y * outWidth;
      for (let x = 0; x < outWidth; x++) {
        const x0 = x0s[x];
        const x1 = x1s[x];
        const fx = fxs[x];
        const top = src.data[row0 + x0] * (1 - fx) + src.data[row0 + x1] * fx;
        const bottom = src.data[row1 + x0] * (1 - fx) + src.data[row1 + x1] * fx;
        out[outRow + x] = Math.fround(top * (1 - fy) + bottom * fy);
      }
    }
  }
  return { width: outWidth, height: outHeight, channels, data: out };
}
