/**
 * Proxy classification table: sampled windows over a raw series, each window
 * labeled by the equal-frequency bucket of the next value. The construction
 * must be bit-equal to the consuming core's builder (same RNG draws, same
 * order-statistic boundaries, same tie rule), which the shared golden
 * fixtures pin down.
 */

import { writeFileSync } from 'node:fs';
import { TooShortError } from './errors.js';
import { formatFloat } from './format.js';
import { Xoshiro256StarStar } from './rng.js';
import { DatasetSeries } from './series.js';

export interface ProxyRow {
  /** 1-indexed */
  channel: number;
  /** 1-indexed sample position; window covers t-L+1 .. t */
  t: number;
  features: number[];
  target: number;
  label: number;
}

export interface ProxyTable {
  datasetId: string;
  window: number;
  bins: number;
  rows: ProxyRow[];
  boundaries: number[];
  warnings: string[];
}

/** Equal-frequency boundaries: the ceil(j*M/K)-th order statistics. */
export function quantileBoundaries(values: number[], bins: number): number[] {
  const s = [...values].sort((a, b) => a - b);
  const m = s.length;
  const out: number[] = [];
  for (let j = 1; j < bins; j++) {
    out.push(s[Math.ceil((j * m) / bins) - 1]);
  }
  return out;
}

/** 1 + count of boundaries <= value, so a boundary tie moves up. */
export function bucketLabel(value: number, boundaries: number[]): number {
  let count = 0;
  for (const b of boundaries) {
    if (b <= value) {
      count++;
    }
  }
  return count + 1;
}

export function buildProxy(
  series: DatasetSeries,
  window: number,
  bins: number,
  samples: number,
  seed: number,
): ProxyTable {
  if (window < 1) {
    throw new RangeError(`window must be >= 1, got ${window}`);
  }
  if (bins < 2) {
    throw new RangeError(`bins must be >= 2, got ${bins}`);
  }
  if (samples < 1) {
    throw new RangeError(`samples must be >= 1, got ${samples}`);
  }
  const n = series.values.length;
  const c = series.values[0].length;
  if (n <= window) {
    throw new TooShortError(
      `series length ${n} leaves no room for window ${window} plus target`,
    );
  }
  const rng = new Xoshiro256StarStar(seed);
  const picks: Array<[number, number]> = [];
  for (let i = 0; i < samples; i++) {
    const ch = rng.randbelow(c);
    const t0 = window - 1 + rng.randbelow(n - window); // 0-indexed window end
    picks.push([ch, t0]);
  }
  const targets = picks.map(([ch, t0]) => series.values[t0 + 1][ch]);
  const boundaries = quantileBoundaries(targets, bins);
  const warnings: string[] = [];
  if (Math.min(...targets) === Math.max(...targets)) {
    warnings.push(
      `dataset '${series.datasetId}': all sampled targets equal; labels collapse to bucket ${bins}`,
    );
  }
  const rows = picks.map(([ch, t0], i) => {
    const features: number[] = [];
    for (let j = t0 - window + 1; j <= t0; j++) {
      features.push(series.values[j][ch]);
    }
    return {
      channel: ch + 1,
      t: t0 + 1,
      features,
      target: targets[i],
      label: bucketLabel(targets[i], boundaries),
    };
  });
  return { datasetId: series.datasetId, window, bins, rows, boundaries, warnings };
}

/** Header channel,t,x0..x{L-1},target,label; CRLF rows to match the core. */
export function proxyCsv(table: ProxyTable): string {
  const header = ['channel', 't'];
  for (let i = 0; i < table.window; i++) {
    header.push(`x${i}`);
  }
  header.push('target', 'label');
  const lines = [header.join(',')];
  for (const row of table.rows) {
    const cells = [String(row.channel), String(row.t)];
    for (const x of row.features) {
      cells.push(formatFloat(x));
    }
    cells.push(formatFloat(row.target), String(row.label));
    lines.push(cells.join(','));
  }
  return lines.join('\r\n') + '\r\n';
}

export function writeProxyCsv(table: ProxyTable, path: string): void {
  writeFileSync(path, proxyCsv(table), 'utf-8');
}
