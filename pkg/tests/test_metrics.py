"""Forecast error metrics: hand-computed fixtures plus structural properties."""

import numpy as np
import pytest

from compforge.errors import DegenerateError, ShapeError
from compforge.metrics import compute_metrics


# ---------------------------------------------------------------- fixtures


def test_perfect_forecast_is_zero():
    truth = [1.0, 2.0, 3.0, 4.0]
    out = compute_metrics(truth, truth)
    assert out["mse"] == 0.0
    assert out["mae"] == 0.0
    assert out["smape"] == 0.0
    assert out["mape"] == 0.0
    assert out["mase"] == 0.0


def test_single_step_smape_is_100():
    # |1 - 3| over the midpoint (1 + 3)/2 = 2, scaled by 100
    out = compute_metrics([1.0], [3.0])
    assert out["smape"] == pytest.approx(100.0)
    assert out["mse"] == pytest.approx(4.0)
    assert out["mae"] == pytest.approx(2.0)
    assert out["mape"] == pytest.approx(200.0)
    assert "mase" not in out
    assert "owa" not in out


def test_mape_fixture():
    out = compute_metrics([2.0, 4.0], [3.0, 5.0])
    # per-step percentage errors 50 and 25
    assert out["mape"] == pytest.approx(37.5)


def test_mape_omitted_on_zero_truth():
    out = compute_metrics([0.0, 2.0], [1.0, 1.0])
    assert "mape" not in out
    assert out["mae"] == pytest.approx(1.0)


def test_mase_fixture_m1():
    # naive scale = mean(|4-2|, |6-4|, |8-6|) = 2, MAE = 1
    out = compute_metrics([2.0, 4.0, 6.0, 8.0], [3.0, 5.0, 7.0, 9.0], periodicity=1)
    assert out["mase"] == pytest.approx(0.5)


def test_mase_fixture_seasonal():
    truth = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    pred = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
    # seasonal differences |x_j - x_{j-2}| are all 2, MAE = 1
    out = compute_metrics(truth, pred, periodicity=2)
    assert out["mase"] == pytest.approx(0.5)


def test_mase_omitted_when_horizon_too_short():
    out = compute_metrics([1.0, 2.0], [2.0, 3.0], periodicity=2)
    assert "mase" not in out
    assert "owa" not in out
    assert out["mae"] == pytest.approx(1.0)


def test_mase_two_channel_average():
    truth = np.array([[2.0, 10.0], [4.0, 30.0], [6.0, 50.0]])
    pred = truth + np.array([1.0, 10.0])
    # per-channel scales 2 and 20, per-channel MAE 1 and 10 -> both ratios 0.5
    out = compute_metrics(truth, pred, periodicity=1)
    assert out["mase"] == pytest.approx(0.5)
    asym = truth + np.array([1.0, 20.0])
    out2 = compute_metrics(truth, asym, periodicity=1)
    # ratios 0.5 and 1.0 average to 0.75
    assert out2["mase"] == pytest.approx(0.75)


def test_owa_fixture():
    out = compute_metrics([2.0, 4.0], [3.0, 5.0])
    refs = (2.0 * out["smape"], 2.0 * out["mase"])
    again = compute_metrics([2.0, 4.0], [3.0, 5.0], naive2_refs=refs)
    assert again["owa"] == pytest.approx(0.5)
    assert again["smape"] == out["smape"]
    assert again["mase"] == out["mase"]


def test_owa_formula(rng):
    truth = rng.uniform(1.0, 5.0, size=(12, 2))
    pred = truth + rng.normal(0.0, 0.5, size=truth.shape)
    refs = (13.0, 1.7)
    out = compute_metrics(truth, pred, periodicity=3, naive2_refs=refs)
    expected = 0.5 * (out["smape"] / refs[0] + out["mase"] / refs[1])
    assert out["owa"] == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------- errors


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        compute_metrics([1.0, 2.0], [1.0])
    with pytest.raises(ShapeError):
        compute_metrics(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        compute_metrics(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))


def test_owa_requires_mase_horizon():
    with pytest.raises(ShapeError):
        compute_metrics([1.0], [2.0], periodicity=1, naive2_refs=(10.0, 1.0))


def test_bad_periodicity():
    with pytest.raises(ValueError):
        compute_metrics([1.0, 2.0], [1.0, 2.0], periodicity=0)


def test_bad_refs():
    with pytest.raises(ValueError):
        compute_metrics([1.0, 2.0], [2.0, 3.0], naive2_refs=(0.0, 1.0))
    with pytest.raises(ValueError):
        compute_metrics([1.0, 2.0], [2.0, 3.0], naive2_refs=(1.0, -2.0))


def test_degenerate_smape():
    with pytest.raises(DegenerateError):
        compute_metrics([0.0, 1.0], [0.0, 1.0])


def test_degenerate_mase_scale():
    with pytest.raises(DegenerateError):
        compute_metrics([5.0, 5.0, 5.0], [6.0, 6.0, 6.0], periodicity=1)


# ---------------------------------------------------------------- properties


def test_matches_numpy_oracle(rng):
    for _ in range(25):
        h = int(rng.integers(2, 20))
        c = int(rng.integers(1, 4))
        truth = rng.uniform(0.5, 10.0, size=(h, c))
        pred = rng.uniform(0.5, 10.0, size=(h, c))
        out = compute_metrics(truth, pred)
        assert out["mse"] == pytest.approx(float(np.mean((truth - pred) ** 2)), rel=1e-12)
        assert out["mae"] == pytest.approx(float(np.mean(np.abs(truth - pred))), rel=1e-12)
        smape = float(
            np.mean(200.0 * np.abs(truth - pred) / (np.abs(truth) + np.abs(pred)))
        )
        assert out["smape"] == pytest.approx(smape, rel=1e-12)
        mape = float(np.mean(100.0 * np.abs(truth - pred) / np.abs(truth)))
        assert out["mape"] == pytest.approx(mape, rel=1e-12)


def test_symmetric_metrics(rng):
    truth = rng.uniform(0.5, 4.0, size=10)
    pred = rng.uniform(0.5, 4.0, size=10)
    a = compute_metrics(truth, pred)
    b = compute_metrics(pred, truth)
    assert a["mse"] == pytest.approx(b["mse"])
    assert a["mae"] == pytest.approx(b["mae"])
    assert a["smape"] == pytest.approx(b["smape"])


def test_one_dim_equals_single_channel(rng):
    truth = rng.uniform(1.0, 5.0, size=8)
    pred = rng.uniform(1.0, 5.0, size=8)
    flat = compute_metrics(truth, pred, periodicity=2)
    tall = compute_metrics(truth.reshape(-1, 1), pred.reshape(-1, 1), periodicity=2)
    assert flat == tall


def test_identity_is_zero_property(rng):
    for _ in range(10):
        x = rng.uniform(0.5, 9.0, size=(int(rng.integers(3, 15)), int(rng.integers(1, 3))))
        out = compute_metrics(x, x, periodicity=1)
        for key in ("mse", "mae", "smape", "mape", "mase"):
            assert out[key] == 0.0
