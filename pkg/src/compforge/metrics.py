"""Forecast accuracy metrics over (horizon x channel) arrays.

All metrics treat the inputs as H x C matrices (a 1-D series is a single
channel) and average over every entry. MASE scales each channel by the mean
absolute seasonal difference of the ground truth over the forecast window
and averages the per-channel ratios. OWA needs externally supplied
seasonal-naive reference values and is only emitted when they are given.
MAPE is included for completeness when the truth has no zeros; nothing
downstream consumes it.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError, ShapeError


def compute_metrics(
    truth,
    pred,
    periodicity: int = 1,
    naive2_refs: tuple[float, float] | None = None,
) -> dict[str, float]:
    """Metric map with keys mse, mae, smape plus mase/mape/owa when defined.

    MASE needs a horizon longer than the periodicity and is omitted
    otherwise (unless OWA was requested, which makes that a caller error).
    ``naive2_refs`` is (smape_ref, mase_ref) from the seasonal-naive baseline.
    """
    x = np.asarray(truth, dtype=float)
    y = np.asarray(pred, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or y.ndim != 2:
        raise ShapeError("truth and pred must be 1-D or 2-D arrays")
    if x.shape != y.shape:
        raise ShapeError(f"shape mismatch: truth {x.shape} vs pred {y.shape}")
    h, _ = x.shape
    m = int(periodicity)
    if m < 1:
        raise ValueError("periodicity must be >= 1")
    if h <= m and naive2_refs is not None:
        raise ShapeError(
            f"horizon {h} must exceed periodicity {m} for the MASE term of OWA"
        )

    err = x - y
    abs_err = np.abs(err)
    out: dict[str, float] = {
        "mse": float(np.mean(err**2)),
        "mae": float(np.mean(abs_err)),
    }

    denom = np.abs(x) + np.abs(y)
    if np.any(denom == 0.0):
        raise DegenerateError("SMAPE denominator is zero at some step")
    out["smape"] = float(200.0 * np.mean(abs_err / denom))

    if np.all(np.abs(x) > 0.0):
        out["mape"] = float(100.0 * np.mean(abs_err / np.abs(x)))

    if h > m:
        scale = np.mean(np.abs(x[m:, :] - x[:-m, :]), axis=0)
        if np.any(scale == 0.0):
            raise DegenerateError("MASE scaling denominator is zero on some channel")
        out["mase"] = float(np.mean(np.mean(abs_err, axis=0) / scale))

    if naive2_refs is not None:
        smape_ref, mase_ref = naive2_refs
        if smape_ref <= 0 or mase_ref <= 0:
            raise ValueError("naive2 reference values must be positive")
        out["owa"] = 0.5 * (out["smape"] / smape_ref + out["mase"] / mase_ref)

    return out
