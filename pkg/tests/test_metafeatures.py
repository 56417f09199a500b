"""Proxy-task construction, fallback meta-features, and embedding file I/O."""

import math

import numpy as np
import pytest

from compforge.errors import DimMismatchError, SchemaError, TooShortError
from compforge.metafeatures import (
    FALLBACK_DIM,
    DatasetSeries,
    MetaFeatureVector,
    Source,
    bucket_label,
    build_proxy,
    fallback_features,
    load_embeddings,
    load_series,
    quantile_boundaries,
    write_embeddings,
)

GOLDEN = "tests/fixtures/proxy_toy_golden.csv"
TOY_SERIES = "tests/fixtures/toy_series.csv"


def _ramp(n=64, channels=1):
    values = np.arange(n, dtype=float).reshape(-1, 1)
    if channels > 1:
        values = np.tile(values, (1, channels))
    return DatasetSeries("ramp", values)


# ---------------------------------------------------------------- series type


def test_dataset_series_validation():
    with pytest.raises(SchemaError):
        DatasetSeries("ds", np.array([1.0]))  # single observation
    with pytest.raises(SchemaError):
        DatasetSeries("ds", np.array([[1.0, np.nan], [2.0, 3.0]]))
    with pytest.raises(SchemaError):
        DatasetSeries("", np.array([[1.0], [2.0]]))
    one_d = DatasetSeries("ds", np.array([1.0, 2.0, 3.0]))
    assert one_d.values.shape == (3, 1)
    assert one_d.n == 3
    assert one_d.channels == 1


# ---------------------------------------------------------------- boundaries


def test_quantile_boundaries_toy():
    # order statistics at ceil(j*M/K): for M=5, K=2 the single boundary is s[2]
    assert quantile_boundaries([1.0, 2.0, 3.0, 4.0, 5.0], 2) == (3.0,)
    assert quantile_boundaries([5.0, 1.0, 4.0, 2.0, 3.0], 2) == (3.0,)


def test_quantile_boundaries_counts():
    values = [float(v) for v in range(12)]
    assert quantile_boundaries(values, 3) == (3.0, 7.0)
    assert quantile_boundaries(values, 4) == (2.0, 5.0, 8.0)


def test_bucket_label_fixture():
    # toy sample [1..5], L=2 analog: boundary 4 with K=2 gives labels 1,2,2
    bounds = quantile_boundaries([2.0, 4.0, 6.0, 8.0], 2)
    assert bounds == (4.0,)
    assert [bucket_label(v, bounds) for v in (3.0, 4.0, 5.0)] == [1, 2, 2]


def test_bucket_label_boundary_tie_goes_up():
    bounds = (1.0, 2.0)
    assert bucket_label(0.5, bounds) == 1
    assert bucket_label(1.0, bounds) == 2
    assert bucket_label(2.0, bounds) == 3
    assert bucket_label(99.0, bounds) == 3


def test_equal_frequency_property(rng):
    for _ in range(10):
        m = int(rng.integers(50, 400))
        k = int(rng.integers(2, 9))
        values = [float(v) for v in rng.normal(size=m)]
        bounds = quantile_boundaries(values, k)
        assert len(bounds) == k - 1
        labels = [bucket_label(v, bounds) for v in values]
        counts = [labels.count(j) for j in range(1, k + 1)]
        for count in counts:
            assert abs(count - m / k) <= k


# ---------------------------------------------------------------- proxy table


def test_build_proxy_shapes_and_provenance():
    series = load_series(TOY_SERIES, dataset_id="toy")
    table = build_proxy(series, window=4, bins=3, samples=8, seed=42)
    assert len(table.rows) == 8
    assert len(table.boundaries) == 2
    for row in table.rows:
        assert 1 <= row.channel <= series.channels
        assert 4 <= row.t <= series.n - 1
        assert len(row.features) == 4
        col = row.channel - 1
        assert row.features == tuple(series.values[row.t - 4 : row.t, col])
        assert row.target == series.values[row.t, col]
        assert 1 <= row.label <= 3


def test_build_proxy_deterministic():
    series = load_series(TOY_SERIES)
    a = build_proxy(series, window=4, bins=3, samples=16, seed=9)
    b = build_proxy(series, window=4, bins=3, samples=16, seed=9)
    assert a.rows == b.rows
    c = build_proxy(series, window=4, bins=3, samples=16, seed=10)
    assert c.rows != a.rows


def test_build_proxy_golden_bytes(tmp_path):
    series = load_series(TOY_SERIES, dataset_id="toy")
    table = build_proxy(series, window=4, bins=3, samples=8, seed=42)
    out = tmp_path / "proxy.csv"
    table.write_csv(out)
    assert out.read_bytes() == open(GOLDEN, "rb").read()


def test_build_proxy_label_matches_boundaries():
    series = load_series(TOY_SERIES)
    table = build_proxy(series, window=4, bins=4, samples=64, seed=3)
    for row in table.rows:
        assert row.label == bucket_label(row.target, table.boundaries)


def test_build_proxy_window_edge():
    # shortest legal series: exactly window + 1 observations
    series = DatasetSeries("edge", np.arange(6, dtype=float))
    table = build_proxy(series, window=5, bins=2, samples=4, seed=0)
    for row in table.rows:
        assert row.t == 5
        assert row.target == 5.0


def test_build_proxy_errors():
    series = DatasetSeries("ds", np.arange(10, dtype=float))
    with pytest.raises(TooShortError):
        build_proxy(series, window=10, bins=2, samples=4, seed=0)
    with pytest.raises(ValueError):
        build_proxy(series, window=0, bins=2, samples=4, seed=0)
    with pytest.raises(ValueError):
        build_proxy(series, window=4, bins=1, samples=4, seed=0)
    with pytest.raises(ValueError):
        build_proxy(series, window=4, bins=2, samples=0, seed=0)


def test_build_proxy_constant_series_warns():
    series = DatasetSeries("flat", np.full(20, 3.5))
    table = build_proxy(series, window=4, bins=2, samples=8, seed=1)
    assert table.warnings
    for row in table.rows:
        assert row.label == 2  # all-equal sample collapses into the top bucket


# ---------------------------------------------------------------- fallback vector


def test_fallback_vector_shape_and_source():
    vec = fallback_features(_ramp())
    assert isinstance(vec, MetaFeatureVector)
    assert vec.source is Source.FALLBACK
    assert len(vec.vector) == FALLBACK_DIM
    assert all(math.isfinite(v) for v in vec.vector)


def test_fallback_ramp_analytic():
    """After the global z-scoring of a pure ramp, the per-channel stats are
    those of the standardized ramp: mean 0, population sd 1, trend slope
    1/sd(0..63), lag-k autocorrelations of a linear sequence."""
    n = 64
    vec = fallback_features(_ramp(n)).vector
    sd = math.sqrt((n * n - 1) / 12.0)
    assert vec[0] == pytest.approx(0.0, abs=1e-12)  # mean
    assert vec[1] == pytest.approx(1.0, abs=1e-12)  # sd
    assert vec[2] == pytest.approx(0.0, abs=1e-12)  # skewness
    assert vec[8] == pytest.approx(1.0 / sd, abs=1e-9)  # trend slope
    def acf_ramp(lag):
        x = np.arange(n, dtype=float)
        x = x - x.mean()
        return float(np.dot(x[:-lag], x[lag:]) / np.dot(x, x))
    assert vec[4] == pytest.approx(acf_ramp(1), abs=1e-12)
    assert vec[5] == pytest.approx(acf_ramp(7), abs=1e-12)
    assert vec[6] == pytest.approx(acf_ramp(24), abs=1e-12)
    # diff of the standardized ramp is constant 1/sd -> zero spread
    assert vec[7] == pytest.approx(0.0, abs=1e-12)


def test_fallback_single_channel_cross_stats_zero():
    vec = fallback_features(_ramp()).vector
    for i in range(10, 20):
        assert vec[i] == pytest.approx(0.0, abs=1e-12)


def test_fallback_tail_entries():
    series = _ramp(64, channels=3)
    vec = fallback_features(series).vector
    assert vec[20] == pytest.approx(math.log1p(64.0))
    assert vec[21] == pytest.approx(math.log1p(3.0))
    # median and IQR of the globally standardized values
    z = (series.values - series.values.mean()) / series.values.std()
    assert vec[22] == pytest.approx(float(np.median(z)), abs=1e-12)
    q75, q25 = np.percentile(z, [75, 25])
    assert vec[23] == pytest.approx(float(q75 - q25), abs=1e-9)


def test_fallback_affine_invariance(rng):
    base = rng.normal(size=(120, 2))
    a = fallback_features(DatasetSeries("x", base)).vector
    b = fallback_features(DatasetSeries("x", 12.5 * base + 3.0)).vector
    for va, vb in zip(a, b):
        assert va == pytest.approx(vb, abs=1e-9)


def test_fallback_constant_series_zeros():
    vec = fallback_features(DatasetSeries("flat", np.full((30, 2), 7.0))).vector
    for i in range(20):
        assert vec[i] == 0.0


def test_fallback_too_short():
    with pytest.raises(TooShortError):
        fallback_features(DatasetSeries("ds", np.arange(7, dtype=float)))


# ---------------------------------------------------------------- embeddings I/O


def test_embeddings_round_trip(tmp_path):
    vectors = [
        MetaFeatureVector("ds1", (0.5, -1.25, 3.0), Source.EXTERNAL),
        MetaFeatureVector("ds2", (1.0 / 3.0, 0.0, 2.0), Source.EXTERNAL),
    ]
    path = tmp_path / "emb.csv"
    write_embeddings(vectors, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dataset_id,v0,v1,v2"
    again = load_embeddings(path)
    assert [v.dataset_id for v in again] == ["ds1", "ds2"]
    for orig, back in zip(vectors, again):
        assert back.vector == orig.vector  # exact float round-trip
        assert back.source is Source.EXTERNAL


def test_load_embeddings_errors(tmp_path):
    path = tmp_path / "emb.csv"
    path.write_text("")
    with pytest.raises(SchemaError):
        load_embeddings(path)
    path.write_text("dataset_id,v0,v1\n")
    with pytest.raises(SchemaError):
        load_embeddings(path)  # no data rows
    path.write_text("id,v0\nds,1.0\n")
    with pytest.raises(SchemaError):
        load_embeddings(path)  # wrong key column
    path.write_text("dataset_id,v0,v2\nds,1.0,2.0\n")
    with pytest.raises(SchemaError):
        load_embeddings(path)  # non-contiguous vector columns
    path.write_text("dataset_id,v0,v1\nds,1.0\n")
    with pytest.raises(DimMismatchError):
        load_embeddings(path)  # row narrower than header
    path.write_text("dataset_id,v0\nds,1.0\nds,2.0\n")
    with pytest.raises(SchemaError):
        load_embeddings(path)  # duplicate dataset
    path.write_text("dataset_id,v0\nds,abc\n")
    with pytest.raises(SchemaError):
        load_embeddings(path)


def test_load_series_round_trip(tmp_path):
    series = load_series(TOY_SERIES)
    assert series.dataset_id == "toy_series"  # defaults to the file stem
    assert series.n == 32
    assert series.channels == 2
    path = tmp_path / "bad.csv"
    path.write_text("time,ch0\n0,1\n1,2\n")
    with pytest.raises(SchemaError):
        load_series(path)
    path.write_text("timestamp,ch0\n0,1\n1,x\n")
    with pytest.raises(SchemaError):
        load_series(path)
    path.write_text("timestamp,ch0\n0,1\n")
    with pytest.raises(SchemaError):
        load_series(path)
