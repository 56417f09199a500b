"""Performance corpus storage and its derived views.

A corpus is an immutable bag of (dataset, horizon, config) performance
records. Downstream math never touches raw metric values directly; it works
on one of two per-group derivations:

* ``RankView``: metric values replaced by rank/m within each group, ties
  averaged, so 1.0 is the worst config of the group.
* ``StdView``: metric values z-scored within each group (sample sd).

Groups are (dataset x horizon) cells by default; ``collapse_horizons``
merges a dataset's horizons into one group. Groups with no spread cannot be
standardized and map to 0 with a recorded warning instead of aborting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DuplicateError, MissingMetricError, SchemaError
from .stats import average_ranks

METRIC_COLUMNS = ("mse", "mae", "smape", "mase", "owa")
KEY_COLUMNS = ("dataset", "horizon", "config_id")


@dataclass(frozen=True)
class PerfRecord:
    dataset_id: str
    horizon: int
    config_id: str
    metrics: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.dataset_id:
            raise SchemaError("dataset_id must be non-empty")
        if self.horizon < 1:
            raise SchemaError(f"horizon must be positive, got {self.horizon}")
        if not self.config_id:
            raise SchemaError("config_id must be non-empty")
        if not self.metrics:
            raise SchemaError("metric map must be non-empty")
        for name, value in self.metrics.items():
            if name not in METRIC_COLUMNS:
                raise SchemaError(f"unknown metric {name!r}")
            if not math.isfinite(value):
                raise SchemaError(f"metric {name} is not finite: {value}")
            if name in ("mse", "mae") and value < 0:
                raise SchemaError(f"metric {name} must be >= 0, got {value}")

    @property
    def triple(self) -> tuple[str, int, str]:
        return (self.dataset_id, self.horizon, self.config_id)


class PerformanceCorpus:
    """Immutable record collection indexed by group and by config."""

    def __init__(self, records: Iterable[PerfRecord]):
        self.records: tuple[PerfRecord, ...] = tuple(records)
        seen: set[tuple[str, int, str]] = set()
        groups: dict[tuple[str, int], list[PerfRecord]] = {}
        configs: dict[str, list[PerfRecord]] = {}
        for rec in self.records:
            if rec.triple in seen:
                raise DuplicateError(f"repeated record {rec.triple}")
            seen.add(rec.triple)
            groups.setdefault((rec.dataset_id, rec.horizon), []).append(rec)
            configs.setdefault(rec.config_id, []).append(rec)
        if not self.records:
            raise SchemaError("corpus must contain at least one record")
        self.groups = groups
        self.by_config = configs

    @property
    def datasets(self) -> tuple[str, ...]:
        return tuple(sorted({r.dataset_id for r in self.records}))

    @property
    def config_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.by_config))

    def summary(self) -> dict[str, int]:
        return {
            "records": len(self.records),
            "datasets": len(self.datasets),
            "configs": len(self.config_ids),
            "groups": len(self.groups),
        }


@dataclass
class View:
    """Per-record derived values plus the group maps they came from."""

    metric: str
    kind: str
    rows: tuple[tuple[str, int, str, float], ...]
    groups: dict[tuple, dict[str, float]]
    warnings: list[str] = field(default_factory=list)

    def value(self, dataset: str, horizon: int, config_id: str) -> float:
        for d, h, c, v in self.rows:
            if (d, h, c) == (dataset, horizon, config_id):
                return v
        raise KeyError((dataset, horizon, config_id))

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "horizon", "config_id", "value"])
            for d, h, c, v in self.rows:
                writer.writerow([d, h, c, format_float(v)])


def _group_key(rec: PerfRecord, collapse_horizons: bool) -> tuple:
    if collapse_horizons:
        return (rec.dataset_id,)
    return (rec.dataset_id, rec.horizon)


def _grouped(
    corpus: PerformanceCorpus, metric: str, collapse_horizons: bool
) -> dict[tuple, list[PerfRecord]]:
    groups: dict[tuple, list[PerfRecord]] = {}
    for rec in corpus.records:
        if metric not in rec.metrics:
            raise MissingMetricError(
                f"record {rec.triple} lacks metric {metric!r}"
            )
        groups.setdefault(_group_key(rec, collapse_horizons), []).append(rec)
    return groups


def rank_normalize(
    corpus: PerformanceCorpus, metric: str, collapse_horizons: bool = False
) -> View:
    """Rank/m per group, ascending in the metric, ties averaged."""
    groups = _grouped(corpus, metric, collapse_horizons)
    all_configs = set(corpus.config_ids)
    rows: list[tuple[str, int, str, float]] = []
    group_maps: dict[tuple, dict[str, float]] = {}
    warnings: list[str] = []
    for key in sorted(groups):
        recs = groups[key]
        ranks = average_ranks([r.metrics[metric] for r in recs])
        m = len(recs)
        values = [rank / m for rank in ranks]
        # a config can appear several times in a collapsed group (one record
        # per horizon); the per-config map carries its mean normalized rank
        per_config: dict[str, list[float]] = {}
        for rec, v in zip(recs, values):
            per_config.setdefault(rec.config_id, []).append(v)
        gmap = {c: sum(vs) / len(vs) for c, vs in per_config.items()}
        group_maps[key] = gmap
        missing = all_configs - set(gmap)
        if missing:
            warnings.append(
                f"group {key}: missing config(s) {sorted(missing)}, ranked over {m} record(s)"
            )
        for rec, v in zip(recs, values):
            rows.append((rec.dataset_id, rec.horizon, rec.config_id, v))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return View(metric=metric, kind="rank", rows=tuple(rows), groups=group_maps, warnings=warnings)


def standardize(
    corpus: PerformanceCorpus, metric: str, collapse_horizons: bool = False
) -> View:
    """Per-group z-scores with sample sd; degenerate groups map to 0."""
    groups = _grouped(corpus, metric, collapse_horizons)
    rows: list[tuple[str, int, str, float]] = []
    group_maps: dict[tuple, dict[str, float]] = {}
    warnings: list[str] = []
    for key in sorted(groups):
        recs = groups[key]
        values = [r.metrics[metric] for r in recs]
        m = len(values)
        mean = sum(values) / m
        if m < 2:
            sd = 0.0
        else:
            sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (m - 1))
        if sd == 0.0:
            warnings.append(f"group {key}: degenerate (size {m}, zero spread), mapped to 0")
            zs = [0.0 for _ in recs]
        else:
            zs = [(r.metrics[metric] - mean) / sd for r in recs]
        per_config: dict[str, list[float]] = {}
        for rec, z in zip(recs, zs):
            per_config.setdefault(rec.config_id, []).append(z)
        group_maps[key] = {c: sum(vs) / len(vs) for c, vs in per_config.items()}
        for rec, z in zip(recs, zs):
            rows.append((rec.dataset_id, rec.horizon, rec.config_id, z))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return View(metric=metric, kind="std", rows=tuple(rows), groups=group_maps, warnings=warnings)


def format_float(value: float) -> str:
    """Shortest round-trip decimal; integral values print as integers."""
    if math.isfinite(value) and value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def ingest(source: str | Path) -> PerformanceCorpus:
    """Load a corpus CSV (header ``dataset,horizon,config_id,mse[,...]``)."""
    path = Path(source)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        expected_keys = list(KEY_COLUMNS)
        if header[: len(expected_keys)] != expected_keys:
            raise SchemaError(
                f"{path}: header must start with {','.join(expected_keys)}"
            )
        metric_cols = header[len(expected_keys) :]
        if "mse" not in metric_cols:
            raise SchemaError(f"{path}: mse column is required")
        ordered = [c for c in METRIC_COLUMNS if c in metric_cols]
        if metric_cols != ordered or len(set(metric_cols)) != len(metric_cols):
            raise SchemaError(
                f"{path}: metric columns must be a subset of "
                f"{','.join(METRIC_COLUMNS)} in that order"
            )
        records: list[PerfRecord] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields")
            dataset, horizon_s, config_id = row[0], row[1], row[2]
            try:
                horizon = int(horizon_s)
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: bad horizon {horizon_s!r}") from None
            metrics: dict[str, float] = {}
            for name, cell in zip(metric_cols, row[3:]):
                if cell == "":
                    continue
                try:
                    metrics[name] = float(cell)
                except ValueError:
                    raise SchemaError(
                        f"{path}:{lineno}: bad {name} value {cell!r}"
                    ) from None
            if "mse" not in metrics:
                raise SchemaError(f"{path}:{lineno}: mse cell is empty")
            try:
                records.append(
                    PerfRecord(dataset_id=dataset, horizon=horizon, config_id=config_id, metrics=metrics)
                )
            except SchemaError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return PerformanceCorpus(records)


def export(corpus: PerformanceCorpus, path: str | Path) -> None:
    """Write the corpus back out; optional columns appear if any record has them."""
    present = [
        c
        for c in METRIC_COLUMNS
        if c == "mse" or any(c in r.metrics for r in corpus.records)
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(KEY_COLUMNS) + present)
        for rec in corpus.records:
            cells = [rec.dataset_id, str(rec.horizon), rec.config_id]
            for name in present:
                if name in rec.metrics:
                    cells.append(format_float(rec.metrics[name]))
                else:
                    cells.append("")
            writer.writerow(cells)
