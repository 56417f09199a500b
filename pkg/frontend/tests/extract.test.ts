import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';
import { alignWindow, encodeTable, loadModel } from '../src/encoder.js';
import { ModelUnavailableError, SchemaError } from '../src/errors.js';
import { AdapterConfig, embeddingsCsv, extract } from '../src/extract.js';
import { buildProxy } from '../src/proxy.js';

const TOY_SERIES = fileURLToPath(
  new URL('../../tests/fixtures/toy_series.csv', import.meta.url),
);
const MODEL = fileURLToPath(new URL('../models/demo-encoder.json', import.meta.url));
const TOY_EMBEDDINGS = fileURLToPath(
  new URL('./fixtures/toy_embeddings.csv', import.meta.url),
);

function toyConfig(overrides: Partial<AdapterConfig> = {}): AdapterConfig {
  return {
    seriesFiles: [TOY_SERIES],
    window: 4,
    bins: 3,
    samples: 8,
    seed: 42,
    pooling: 'mean',
    datasetId: 'toy',
    ...overrides,
  };
}

describe('loadModel', () => {
  it('loads the bundled demo encoder', () => {
    const model = loadModel(MODEL);
    expect(model.name).toBe('demo-encoder');
    expect(model.width).toBe(16);
    expect(model.layers).toHaveLength(2);
    expect(model.d).toBe(8);
  });

  it('reports a missing model distinctly from a malformed one', () => {
    expect(() => loadModel('/nonexistent/model.json')).toThrow(ModelUnavailableError);
    const dir = mkdtempSync(join(tmpdir(), 'tabfm-'));
    const broken = join(dir, 'broken.json');
    writeFileSync(broken, '{not json');
    expect(() => loadModel(broken)).toThrow(ModelUnavailableError);
    const badShape = join(dir, 'bad.json');
    writeFileSync(badShape, JSON.stringify({ name: 'x', width: 4, layers: [] }));
    expect(() => loadModel(badShape)).toThrow(SchemaError);
  });
});

describe('alignWindow', () => {
  it('keeps the most recent values and zero-pads the older side', () => {
    expect(alignWindow([1, 2, 3], 3)).toEqual([1, 2, 3]);
    expect(alignWindow([1, 2, 3, 4, 5], 3)).toEqual([3, 4, 5]);
    expect(alignWindow([1, 2], 4)).toEqual([0, 0, 1, 2]);
  });
});

describe('extract', () => {
  it('emits one row per dataset with d+1 columns', () => {
    const model = loadModel(MODEL);
    const rows = extract(model, toyConfig());
    expect(rows).toHaveLength(1);
    expect(rows[0].datasetId).toBe('toy');
    expect(rows[0].vector).toHaveLength(model.d);

    const lines = embeddingsCsv(rows).split('\r\n');
    expect(lines[0]).toBe('dataset_id,v0,v1,v2,v3,v4,v5,v6,v7');
    expect(lines[1].split(',')).toHaveLength(model.d + 1);
    expect(lines[2]).toBe('');
  });

  it('pools the mean of per-row representations', () => {
    const model = loadModel(MODEL);
    const series = {
      datasetId: 'check',
      values: Array.from({ length: 12 }, (_, i) => [Math.sin(i), i * 0.25]),
    };
    const table = buildProxy(series, 4, 3, 8, 0);
    const pooled = encodeTable(model, table);
    const single = table.rows.map((row) =>
      encodeTable(model, { ...table, rows: [row] }),
    );
    for (let i = 0; i < model.d; i++) {
      const mean = single.reduce((acc, rep) => acc + rep[i], 0) / single.length;
      expect(pooled[i]).toBeCloseTo(mean, 12);
    }
  });

  it('is deterministic and reproduces the committed fixture byte for byte', () => {
    const model = loadModel(MODEL);
    const first = embeddingsCsv(extract(model, toyConfig()));
    const second = embeddingsCsv(extract(model, toyConfig()));
    expect(first).toBe(second);
    expect(first).toBe(readFileSync(TOY_EMBEDDINGS, 'utf-8'));
  });

  it('rejects duplicate dataset ids and a shared id override', () => {
    const model = loadModel(MODEL);
    expect(() =>
      extract(model, toyConfig({ seriesFiles: [TOY_SERIES, TOY_SERIES], datasetId: undefined })),
    ).toThrow(SchemaError);
    expect(() =>
      extract(model, toyConfig({ seriesFiles: [TOY_SERIES, TOY_SERIES] })),
    ).toThrow(SchemaError);
  });
});
