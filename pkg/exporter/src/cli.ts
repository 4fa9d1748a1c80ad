#!/usr/bin/env node
// ctxsal-export export --image PATH --out PATH [--layer NAME] [--weights PATH]
// ctxsal-export make-weights --out PATH [--seed N]

import { exportFeatures } from './export';
import { DEFAULT_LAYER, layerNames, layerShapes } from './vgg';
import { ModelUnavailable, synthesizeWeights, writeWeights } from './weights';

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near '${key}'`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (v === undefined) throw new Error(`missing required flag --${name}`);
  return v;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'export') {
      const flags = parseFlags(rest);
      const layer = flags.get('layer') ?? DEFAULT_LAYER;
      const tensor = exportFeatures(need(flags, 'image'), need(flags, 'out'), {
        weightsPath: need(flags, 'weights'),
        layer,
      });
      console.log(
        `wrote ${tensor.width}x${tensor.height}x${tensor.channels} tensor from ${layer}`,
      );
      return 0;
    }
    if (command === 'make-weights') {
      const flags = parseFlags(rest);
      const seed = Number(flags.get('seed') ?? '0') >>> 0;
      const layers = synthesizeWeights(layerShapes(), seed);
      writeWeights(need(flags, 'out'), layers);
      console.log(`wrote synthesized weights for ${layers.length} layers (seed ${seed})`);
      return 0;
    }
    if (command === 'layers') {
      console.log(layerNames().join('\n'));
      return 0;
    }
    console.error(
      'usage: ctxsal-export export --image PATH --out PATH --weights PATH [--layer NAME]\n' +
        '       ctxsal-export make-weights --out PATH [--seed N]\n' +
        '       ctxsal-export layers',
    );
    return 2;
  } catch (err) {
    if (err instanceof ModelUnavailable) {
      console.error(`model unavailable: ${(err as Error).message}`);
      return 3;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
