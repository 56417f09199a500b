/** Raw series CSV reader: header `timestamp,ch0,...,ch{C-1}`, one float per
 * channel per row. Mirrors the core's schema checks. */

import { readFileSync } from 'node:fs';
import { basename } from 'node:path';
import { SchemaError } from './errors.js';

export interface DatasetSeries {
  datasetId: string;
  /** N x C, N >= 2 */
  values: number[][];
}

function parseStrictFloat(cell: string): number {
  const trimmed = cell.trim();
  if (trimmed === '' || !/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(trimmed)) {
    return NaN;
  }
  return Number(trimmed);
}

export function loadSeries(path: string, datasetId?: string): DatasetSeries {
  let text: string;
  try {
    text = readFileSync(path, 'utf-8');
  } catch {
    throw new SchemaError(`${path}: cannot read series file`);
  }
  const lines = text.split(/\r?\n/);
  if (lines.length === 0 || lines[0] === '') {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = lines[0].split(',');
  if (header[0] !== 'timestamp' || header.length < 2) {
    throw new SchemaError(`${path}: header must be timestamp,ch0,...`);
  }
  const width = header.length;
  const values: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    if (lines[i] === '') {
      continue;
    }
    const row = lines[i].split(',');
    if (row.length !== width) {
      throw new SchemaError(`${path}:${i + 1}: expected ${width} fields`);
    }
    const parsed = row.slice(1).map(parseStrictFloat);
    if (parsed.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`${path}:${i + 1}: non-numeric channel value`);
    }
    values.push(parsed);
  }
  if (values.length < 2) {
    throw new SchemaError(`${path}: need at least 2 rows`);
  }
  const stem = basename(path).replace(/\.[^.]*$/, '');
  return { datasetId: datasetId ?? stem, values };
}
