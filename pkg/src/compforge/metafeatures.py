"""Dataset meta-features: proxy-task construction, fallback vector, ingest.

The preferred meta-feature path is an external embedding file produced by a
pretrained tabular encoder fed with the proxy classification task built
here. That encoder is deliberately not reimplemented; embeddings are opaque
vectors. The statistical fallback below guarantees the rest of the pipeline
runs standalone with a fixed 24-entry vector.

Proxy task: sample M (channel, time) positions, take the length-L history
window as features and the next value as the regression target, then
discretize targets into K equal-frequency buckets. Boundaries are the
j*M/K-th order statistics (lower rule) of the sampled targets and a value
equal to a boundary goes to the upper bucket, so an all-equal target set
collapses into bucket K.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimMismatchError, SchemaError, TooShortError
from .rng import Xoshiro256StarStar

DEFAULT_WINDOW = 96
DEFAULT_BINS = 10
DEFAULT_SAMPLES = 2048
FALLBACK_DIM = 24

# Entries 0-9: per-channel stats of the globally z-scored values, averaged
# over channels. Entries 10-19: population sd of the same stats across
# channels. Entries 20-23: log1p(N), log1p(C), median and IQR of the
# z-scored values. Frozen order; see FALLBACK_STAT_NAMES.
FALLBACK_STAT_NAMES = (
    "mean",
    "sd",
    "skewness",
    "kurtosis",
    "acf_lag1",
    "acf_lag7",
    "acf_lag24",
    "diff_sd",
    "trend_slope",
    "spectral_entropy",
)


class Source(Enum):
    EXTERNAL = "External"
    FALLBACK = "Fallback"


@dataclass(frozen=True)
class DatasetSeries:
    dataset_id: str
    values: np.ndarray  # N x C
    note: str = ""

    def __post_init__(self) -> None:
        if not self.dataset_id:
            raise SchemaError("dataset_id must be non-empty")
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise SchemaError("series values must be an N x C matrix")
        if v.shape[0] < 2 or v.shape[1] < 1:
            raise SchemaError(f"series must be at least 2 x 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise SchemaError("series contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def channels(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class ProxyRow:
    channel: int  # 1-indexed
    t: int  # 1-indexed sample position; window covers t-L+1 .. t
    features: tuple[float, ...]
    target: float
    label: int


@dataclass(frozen=True)
class ProxyTable:
    dataset_id: str
    window: int
    bins: int
    rows: tuple[ProxyRow, ...]
    boundaries: tuple[float, ...]
    warnings: tuple[str, ...] = ()

    def write_csv(self, path: str | Path) -> None:
        from .corpus import format_float

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["channel", "t"] + [f"x{i}" for i in range(self.window)] + ["target", "label"]
            )
            for row in self.rows:
                writer.writerow(
                    [row.channel, row.t]
                    + [format_float(x) for x in row.features]
                    + [format_float(row.target), row.label]
                )


@dataclass(frozen=True)
class MetaFeatureVector:
    dataset_id: str
    vector: tuple[float, ...]
    source: Source

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.vector):
            raise SchemaError(f"meta vector for {self.dataset_id!r} has non-finite entries")

    @property
    def d(self) -> int:
        return len(self.vector)


def quantile_boundaries(values: Sequence[float], bins: int) -> tuple[float, ...]:
    """Equal-frequency boundaries: the ceil(j*M/K)-th order statistics."""
    s = sorted(values)
    m = len(s)
    out = []
    for j in range(1, bins):
        idx = math.ceil(j * m / bins) - 1
        out.append(s[idx])
    return tuple(out)


def bucket_label(value: float, boundaries: Sequence[float]) -> int:
    """1 + count of boundaries <= value, so a boundary tie moves up."""
    b = np.asarray(boundaries, dtype=float)
    return int(np.searchsorted(b, value, side="right")) + 1


def build_proxy(
    series: DatasetSeries,
    window: int = DEFAULT_WINDOW,
    bins: int = DEFAULT_BINS,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> ProxyTable:
    """Sample the proxy classification table; deterministic given seed."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    n, c = series.n, series.channels
    if n <= window:
        raise TooShortError(
            f"series length {n} leaves no room for window {window} plus target"
        )
    rng = Xoshiro256StarStar(seed)
    picks: list[tuple[int, int]] = []
    for _ in range(samples):
        ch = rng.randbelow(c)
        t0 = (window - 1) + rng.randbelow(n - window)  # 0-indexed window end
        picks.append((ch, t0))
    targets = [float(series.values[t0 + 1, ch]) for ch, t0 in picks]
    boundaries = quantile_boundaries(targets, bins)
    warnings: tuple[str, ...] = ()
    if min(targets) == max(targets):
        warnings = (
            f"dataset {series.dataset_id!r}: all sampled targets equal; "
            f"labels collapse to bucket {bins}",
        )
    rows = []
    for (ch, t0), target in zip(picks, targets):
        feats = tuple(float(x) for x in series.values[t0 - window + 1 : t0 + 1, ch])
        rows.append(
            ProxyRow(
                channel=ch + 1,
                t=t0 + 1,
                features=feats,
                target=target,
                label=bucket_label(target, boundaries),
            )
        )
    return ProxyTable(
        dataset_id=series.dataset_id,
        window=window,
        bins=bins,
        rows=tuple(rows),
        boundaries=boundaries,
        warnings=warnings,
    )


def _acf(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if lag >= n:
        return 0.0
    mu = float(x.mean())
    denom = float(((x - mu) ** 2).sum())
    if denom == 0.0:
        return 0.0
    num = float(((x[lag:] - mu) * (x[:-lag] - mu)).sum())
    return num / denom


def _skewness(x: np.ndarray) -> float:
    m2 = float(((x - x.mean()) ** 2).mean())
    if m2 == 0.0:
        return 0.0
    m3 = float(((x - x.mean()) ** 3).mean())
    return m3 / m2**1.5


def _kurtosis(x: np.ndarray) -> float:
    m2 = float(((x - x.mean()) ** 2).mean())
    if m2 == 0.0:
        return 0.0
    m4 = float(((x - x.mean()) ** 4).mean())
    return m4 / m2**2 - 3.0


def _trend_slope(x: np.ndarray) -> float:
    n = len(x)
    t = np.arange(n, dtype=float)
    tc = t - t.mean()
    denom = float((tc**2).sum())
    if denom == 0.0:
        return 0.0
    return float((tc * (x - x.mean())).sum()) / denom


def _spectral_entropy(x: np.ndarray) -> float:
    power = np.abs(np.fft.rfft(x - x.mean())) ** 2
    power = power[1:]  # drop DC
    total = float(power.sum())
    if total == 0.0 or len(power) < 2:
        return 0.0
    p = power / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / math.log(len(power)))


def _channel_stats(x: np.ndarray) -> list[float]:
    sd = float(x.std(ddof=0))
    diff_sd = float(np.diff(x).std(ddof=0)) if len(x) > 1 else 0.0
    return [
        float(x.mean()),
        sd,
        _skewness(x),
        _kurtosis(x),
        _acf(x, 1),
        _acf(x, 7),
        _acf(x, 24),
        diff_sd,
        _trend_slope(x),
        _spectral_entropy(x),
    ]


def fallback_features(series: DatasetSeries) -> MetaFeatureVector:
    """Fixed 24-entry statistical vector; affine-invariant by global z-score."""
    if series.n < 8:
        raise TooShortError(f"need at least 8 samples, got {series.n}")
    raw = series.values
    mu = float(raw.mean())
    sd = float(raw.std(ddof=0))
    z = (raw - mu) / sd if sd > 0 else np.zeros_like(raw)

    per_channel = np.array([_channel_stats(z[:, c]) for c in range(series.channels)])
    means = per_channel.mean(axis=0)
    spreads = per_channel.std(axis=0, ddof=0)
    flat = np.sort(z, axis=None)
    q1 = float(np.quantile(flat, 0.25))
    q3 = float(np.quantile(flat, 0.75))
    vector = (
        list(means)
        + list(spreads)
        + [
            math.log1p(series.n),
            math.log1p(series.channels),
            float(np.median(flat)),
            q3 - q1,
        ]
    )
    assert len(vector) == FALLBACK_DIM
    return MetaFeatureVector(
        dataset_id=series.dataset_id,
        vector=tuple(float(v) for v in vector),
        source=Source.FALLBACK,
    )


def load_embeddings(path: str | Path) -> list[MetaFeatureVector]:
    """Read `dataset_id,v0,...,v{d-1}` rows; enforce one consistent d."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if not header or header[0] != "dataset_id":
            raise SchemaError(f"{path}: first column must be dataset_id")
        d = len(header) - 1
        if d < 1:
            raise SchemaError(f"{path}: no embedding columns")
        expected = [f"v{i}" for i in range(d)]
        if header[1:] != expected:
            raise SchemaError(f"{path}: embedding columns must be v0..v{d - 1}")
        out: list[MetaFeatureVector] = []
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) - 1 != d:
                raise DimMismatchError(
                    f"{path}:{lineno}: row has d={len(row) - 1}, header has d={d}"
                )
            dataset_id = row[0]
            if dataset_id in seen:
                raise SchemaError(f"{path}:{lineno}: duplicate dataset {dataset_id!r}")
            seen.add(dataset_id)
            try:
                vec = tuple(float(cell) for cell in row[1:])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric entry") from None
            out.append(MetaFeatureVector(dataset_id=dataset_id, vector=vec, source=Source.EXTERNAL))
    if not out:
        raise SchemaError(f"{path}: no embedding rows")
    return out


def write_embeddings(vectors: Sequence[MetaFeatureVector], path: str | Path) -> None:
    from .corpus import format_float

    if not vectors:
        raise SchemaError("no vectors to write")
    d = vectors[0].d
    for v in vectors:
        if v.d != d:
            raise DimMismatchError(f"vector for {v.dataset_id!r} has d={v.d}, expected {d}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id"] + [f"v{i}" for i in range(d)])
        for v in vectors:
            writer.writerow([v.dataset_id] + [format_float(x) for x in v.vector])


def load_series(path: str | Path, dataset_id: str | None = None) -> DatasetSeries:
    """Read a raw series CSV with header `timestamp,ch0,...,ch{C-1}`."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if not header or header[0] != "timestamp" or len(header) < 2:
            raise SchemaError(f"{path}: header must be timestamp,ch0,...")
        width = len(header)
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise SchemaError(f"{path}:{lineno}: expected {width} fields")
            try:
                rows.append([float(cell) for cell in row[1:]])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric channel value") from None
    if len(rows) < 2:
        raise SchemaError(f"{path}: need at least 2 rows")
    return DatasetSeries(
        dataset_id=dataset_id or path.stem,
        values=np.array(rows, dtype=float),
        note=f"loaded from {path.name}",
    )
