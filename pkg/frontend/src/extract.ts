/**
 * End-to-end extraction: series file(s) -> proxy table -> encoder ->
 * embedding CSV in the core's `dataset_id,v0..v{d-1}` schema. The output
 * must load through the core's embedding reader and re-emit byte-identically,
 * so formatting and line endings follow its conventions exactly.
 */

import { writeFileSync } from 'node:fs';
import { EncoderModel, encodeTable } from './encoder.js';
import { SchemaError } from './errors.js';
import { formatFloat } from './format.js';
import { buildProxy } from './proxy.js';
import { loadSeries } from './series.js';

export interface AdapterConfig {
  seriesFiles: string[];
  window: number;
  bins: number;
  samples: number;
  seed: number;
  pooling: 'mean';
  datasetId?: string;
}

export interface EmbeddingRow {
  datasetId: string;
  vector: number[];
}

export function extract(model: EncoderModel, config: AdapterConfig): EmbeddingRow[] {
  if (config.seriesFiles.length === 0) {
    throw new SchemaError('no series files given');
  }
  if (config.datasetId !== undefined && config.seriesFiles.length > 1) {
    throw new SchemaError('a dataset id override needs exactly one series file');
  }
  const rows: EmbeddingRow[] = [];
  const seen = new Set<string>();
  for (const file of config.seriesFiles) {
    const series = loadSeries(file, config.datasetId);
    if (seen.has(series.datasetId)) {
      throw new SchemaError(`duplicate dataset id '${series.datasetId}'`);
    }
    seen.add(series.datasetId);
    const table = buildProxy(
      series,
      config.window,
      config.bins,
      config.samples,
      config.seed,
    );
    rows.push({ datasetId: series.datasetId, vector: encodeTable(model, table) });
  }
  return rows;
}

/** Header dataset_id,v0..v{d-1}; CRLF rows to match the core's writer. */
export function embeddingsCsv(rows: EmbeddingRow[]): string {
  if (rows.length === 0) {
    throw new SchemaError('no embedding rows to write');
  }
  const d = rows[0].vector.length;
  for (const row of rows) {
    if (row.vector.length !== d) {
      throw new SchemaError(
        `vector for '${row.datasetId}' has d=${row.vector.length}, expected ${d}`,
      );
    }
    if (row.vector.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`vector for '${row.datasetId}' has non-finite entries`);
    }
  }
  const header = ['dataset_id'];
  for (let i = 0; i < d; i++) {
    header.push(`v${i}`);
  }
  const lines = [header.join(',')];
  for (const row of rows) {
    lines.push([row.datasetId, ...row.vector.map(formatFloat)].join(','));
  }
  return lines.join('\r\n') + '\r\n';
}

export function writeEmbeddingsCsv(rows: EmbeddingRow[], path: string): void {
  writeFileSync(path, embeddingsCsv(rows), 'utf-8');
}
