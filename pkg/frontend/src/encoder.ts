/**
 * Local pretrained tabular encoder.
 *
 * The encoder is a fixed-weight MLP stored as JSON next to this package; no
 * training or fine-tuning happens here. A proxy row's feature vector is
 * aligned to the encoder's input width (most recent values kept, older side
 * zero-padded), pushed through the layer stack, and the per-row outputs are
 * mean-pooled into one dataset vector.
 *
 * Pooling choice: the pooled layer is the final pre-classifier
 * representation (the last layer in `layers`, applied linearly; hidden
 * layers use relu). The model file may carry a classification `head`, which
 * extraction ignores.
 */

import { readFileSync } from 'node:fs';
import { ModelUnavailableError, SchemaError } from './errors.js';
import { ProxyTable } from './proxy.js';

export interface EncoderLayer {
  /** out x in */
  w: number[][];
  b: number[];
}

export interface EncoderModel {
  name: string;
  width: number;
  layers: EncoderLayer[];
  /** output dimension of the last layer */
  d: number;
}

function checkLayer(layer: unknown, index: number, inputDim: number): EncoderLayer {
  const obj = layer as { w?: unknown; b?: unknown };
  if (!Array.isArray(obj.w) || !Array.isArray(obj.b)) {
    throw new SchemaError(`layer ${index}: expected w and b arrays`);
  }
  const w = obj.w as number[][];
  const b = obj.b as number[];
  if (w.length !== b.length || w.length === 0) {
    throw new SchemaError(`layer ${index}: w rows must match b length`);
  }
  for (const row of w) {
    if (!Array.isArray(row) || row.length !== inputDim) {
      throw new SchemaError(`layer ${index}: expected rows of length ${inputDim}`);
    }
    if (row.some((v) => typeof v !== 'number' || !Number.isFinite(v))) {
      throw new SchemaError(`layer ${index}: non-finite weight`);
    }
  }
  if (b.some((v) => typeof v !== 'number' || !Number.isFinite(v))) {
    throw new SchemaError(`layer ${index}: non-finite bias`);
  }
  return { w, b };
}

export function loadModel(path: string): EncoderModel {
  let text: string;
  try {
    text = readFileSync(path, 'utf-8');
  } catch {
    throw new ModelUnavailableError(`model file not found: ${path}`);
  }
  let doc: { name?: unknown; width?: unknown; layers?: unknown };
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ModelUnavailableError(`model file is not valid JSON: ${path}`);
  }
  if (typeof doc.name !== 'string' || !doc.name) {
    throw new SchemaError(`${path}: model name missing`);
  }
  if (typeof doc.width !== 'number' || !Number.isInteger(doc.width) || doc.width < 1) {
    throw new SchemaError(`${path}: width must be a positive integer`);
  }
  if (!Array.isArray(doc.layers) || doc.layers.length === 0) {
    throw new SchemaError(`${path}: layers must be a non-empty array`);
  }
  const layers: EncoderLayer[] = [];
  let dim = doc.width;
  doc.layers.forEach((raw, i) => {
    const layer = checkLayer(raw, i, dim);
    layers.push(layer);
    dim = layer.b.length;
  });
  return { name: doc.name, width: doc.width, layers, d: dim };
}

/** Keep the most recent `width` values; zero-pad the older side. */
export function alignWindow(features: number[], width: number): number[] {
  if (features.length === width) {
    return features;
  }
  if (features.length > width) {
    return features.slice(features.length - width);
  }
  return new Array(width - features.length).fill(0).concat(features);
}

function forwardRow(model: EncoderModel, features: number[]): number[] {
  let h = alignWindow(features, model.width);
  model.layers.forEach((layer, index) => {
    const out: number[] = [];
    const last = index === model.layers.length - 1;
    for (let i = 0; i < layer.b.length; i++) {
      let acc = layer.b[i];
      const row = layer.w[i];
      for (let j = 0; j < row.length; j++) {
        acc += row[j] * h[j];
      }
      out.push(last ? acc : Math.max(acc, 0));
    }
    h = out;
  });
  return h;
}

/** Mean-pool per-row representations into one vector of length d. */
export function encodeTable(model: EncoderModel, table: ProxyTable): number[] {
  if (table.rows.length === 0) {
    throw new SchemaError('proxy table has no rows to encode');
  }
  const pooled = new Array(model.d).fill(0);
  for (const row of table.rows) {
    const rep = forwardRow(model, row.features);
    for (let i = 0; i < model.d; i++) {
      pooled[i] += rep[i];
    }
  }
  return pooled.map((v) => v / table.rows.length);
}
