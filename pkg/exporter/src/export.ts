// Export orchestration: image -> conv stack -> named layer -> bilinear
// upsample to image resolution -> CSFT tensor file.

import { decodePng } from './png';
import { writeTensor, FeatureTensor } from './tensor';
import { upsampleBilinear } from './upsample';
import { DEFAULT_LAYER, forwardTo } from './vgg';
import { ConvLayerWeights, readWeights } from './weights';

export interface ExportSpec {
  weightsPath: string;
  layer?: string;
}

export function exportFeatures(imagePath: string, outPath: string, spec: ExportSpec): FeatureTensor {
  const weights: ConvLayerWeights[] = readWeights(spec.weightsPath);
  const layer = spec.layer ?? DEFAULT_LAYER;
  const img = decodePng(imagePath);
  const features = forwardTo(img, weights, layer);
  const up = upsampleBilinear(features, img.width, img.height);
  const tensor: FeatureTensor = {
    width: up.width,
    height: up.height,
    channels: up.channels,
    data: up.data,
  };
  writeTensor(outPath, tensor);
  return tensor;
}
