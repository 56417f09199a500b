#!/usr/bin/env node
/**
 * tabfm-extract: turn raw series CSVs into a dataset embedding file via a
 * local pretrained tabular encoder. `--proxy-out` dumps the intermediate
 * proxy table (with only `--proxy-out`, the encoder is never touched).
 */

import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { loadModel } from './encoder.js';
import { extract, writeEmbeddingsCsv } from './extract.js';
import { buildProxy, writeProxyCsv } from './proxy.js';
import { loadSeries } from './series.js';

const DEFAULT_MODEL = join(
  dirname(fileURLToPath(import.meta.url)),
  '..',
  'models',
  'demo-encoder.json',
);

export async function run(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName('tabfm-extract')
    .option('series', {
      type: 'string',
      array: true,
      demandOption: true,
      describe: 'Raw series CSV (repeat for several datasets)',
    })
    .option('out', { type: 'string', describe: 'Embedding CSV to write' })
    .option('proxy-out', {
      type: 'string',
      describe: 'Also dump the proxy table CSV (single series only)',
    })
    .option('L', { type: 'number', default: 96, describe: 'Window length' })
    .option('K', { type: 'number', default: 10, describe: 'Label buckets' })
    .option('M', { type: 'number', default: 2048, describe: 'Sampled windows' })
    .option('seed', { type: 'number', default: 0 })
    .option('model', { type: 'string', default: DEFAULT_MODEL })
    .option('pooling', { type: 'string', choices: ['mean'] as const, default: 'mean' })
    .option('dataset-id', { type: 'string', describe: 'Defaults to the file stem' })
    .strict()
    .fail((msg) => {
      throw new Error(msg);
    })
    .parse();

  if (!args.out && !args.proxyOut) {
    throw new Error('nothing to do: pass --out and/or --proxy-out');
  }
  if (args.proxyOut && args.series.length !== 1) {
    throw new Error('--proxy-out needs exactly one --series');
  }

  if (args.proxyOut) {
    const series = loadSeries(args.series[0], args.datasetId);
    const table = buildProxy(series, args.L, args.K, args.M, args.seed);
    writeProxyCsv(table, args.proxyOut);
    for (const warning of table.warnings) {
      console.error(`warning: ${warning}`);
    }
  }
  if (args.out) {
    const model = loadModel(args.model);
    const rows = extract(model, {
      seriesFiles: args.series,
      window: args.L,
      bins: args.K,
      samples: args.M,
      seed: args.seed,
      pooling: 'mean',
      datasetId: args.datasetId,
    });
    writeEmbeddingsCsv(rows, args.out);
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;

if (invokedDirectly) {
  run(hideBin(process.argv))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((err: Error) => {
      console.error(`Error: ${err.message}`);
      process.exitCode = 1;
    });
}
