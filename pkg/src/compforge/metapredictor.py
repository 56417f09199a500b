"""Meta-predictor: (meta vector, configuration) -> predicted normalized rank.

Architecture: a learnable codebook maps each component to an e-vector; a
configuration embeds as the concatenation of its k codebook rows; a
two-layer rectifier MLP regresses concat(meta, embedding) onto the rank
target. Training minimizes Pearson loss per dataset batch, so correlation
is always computed among configurations of a single dataset, matching the
within-dataset semantics of the rank targets.

Gradients are exact backpropagation written out against numpy; optimizer is
adaptive-moment gradient descent. Everything is deterministic given the
seed: weight init, dataset shuffling, and the validation split all draw
from one counter-based generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DivergenceError,
    EmptyCandidateError,
    FingerprintError,
    InsufficientError,
    SchemaError,
    ShapeError,
)
from .rng import Xoshiro256StarStar
from .space import Configuration, DesignSpace
from .stats import spearman

CHECKPOINT_VERSION = 1
DEFAULT_EMBED_DIM = 16
DEFAULT_HIDDEN = 128


@dataclass
class MetaPredictorModel:
    space_fingerprint: str
    dim_sizes: tuple[int, ...]
    d: int
    e: int
    h: int
    seed: int
    codebook: np.ndarray  # V x e
    w1: np.ndarray  # h x (d + k*e)
    b1: np.ndarray  # h
    w2: np.ndarray  # h
    b2: float
    activation: str = "relu"
    version: int = CHECKPOINT_VERSION

    @property
    def k(self) -> int:
        return len(self.dim_sizes)

    @property
    def v_total(self) -> int:
        return sum(self.dim_sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        out = []
        acc = 0
        for size in self.dim_sizes:
            out.append(acc)
            acc += size
        return tuple(out)

    def copy(self) -> "MetaPredictorModel":
        return replace(
            self,
            codebook=self.codebook.copy(),
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
        )


@dataclass(frozen=True)
class MetaExample:
    dataset_id: str
    meta: tuple[float, ...]
    assignment: Configuration
    target: float

    def __post_init__(self) -> None:
        if not 0.0 < self.target <= 1.0:
            raise SchemaError(f"target must be in (0, 1], got {self.target}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    seed: int = 0
    val_fraction: float = 0.2
    patience: int = 20
    epsilon: float = 1e-8

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("validation fraction must be in [0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def _uniform(rng: Xoshiro256StarStar, shape: tuple[int, ...], half_width: float) -> np.ndarray:
    flat = np.array(
        [(rng.uniform01() * 2.0 - 1.0) * half_width for _ in range(int(np.prod(shape)))]
    )
    return flat.reshape(shape)


def init_model(
    space: DesignSpace,
    d: int,
    e: int = DEFAULT_EMBED_DIM,
    h: int = DEFAULT_HIDDEN,
    seed: int = 0,
) -> MetaPredictorModel:
    """Uniform +/-1/sqrt(fan_in) layers, +/-0.1 codebook, from the seed."""
    if d < 1 or e < 1 or h < 1:
        raise ValueError("d, e, h must all be >= 1")
    dim_sizes = tuple(len(dim.components) for dim in space.dimensions)
    rng = Xoshiro256StarStar(seed)
    v_total = sum(dim_sizes)
    k = len(dim_sizes)
    fan1 = d + k * e
    codebook = _uniform(rng, (v_total, e), 0.1)
    w1 = _uniform(rng, (h, fan1), 1.0 / math.sqrt(fan1))
    b1 = _uniform(rng, (h,), 1.0 / math.sqrt(fan1))
    w2 = _uniform(rng, (h,), 1.0 / math.sqrt(h))
    b2 = float((rng.uniform01() * 2.0 - 1.0) / math.sqrt(h))
    return MetaPredictorModel(
        space_fingerprint=space.fingerprint(),
        dim_sizes=dim_sizes,
        d=d,
        e=e,
        h=h,
        seed=seed,
        codebook=codebook,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2,
    )


def _check_assignment(model: MetaPredictorModel, assignment: Sequence[int]) -> None:
    if len(assignment) != model.k:
        raise ShapeError(f"assignment length {len(assignment)} != k={model.k}")
    for i, (a, size) in enumerate(zip(assignment, model.dim_sizes)):
        if not 0 <= a < size:
            raise ShapeError(f"component index {a} out of range for dimension {i}")


def embed_config(model: MetaPredictorModel, assignment: Sequence[int]) -> np.ndarray:
    """Concatenate the k codebook rows selected by the assignment."""
    _check_assignment(model, assignment)
    rows = [model.codebook[off + a] for off, a in zip(model.offsets, assignment)]
    return np.concatenate(rows)


def forward(
    model: MetaPredictorModel, meta: Sequence[float], assignment: Sequence[int]
) -> float:
    """y = w2 . relu(w1 . concat(meta, embed) + b1) + b2."""
    meta_arr = np.asarray(meta, dtype=float)
    if meta_arr.shape != (model.d,):
        raise ShapeError(f"meta vector shape {meta_arr.shape} != ({model.d},)")
    z = np.concatenate([meta_arr, embed_config(model, assignment)])
    hidden = np.maximum(model.w1 @ z + model.b1, 0.0)
    return float(model.w2 @ hidden + model.b2)


def pearson_loss(
    pred: Sequence[float], target: Sequence[float], epsilon: float = 1e-8
) -> float:
    """1 - cov/(sd*sd + epsilon) with population statistics."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise ShapeError(f"pred {p.shape} and target {t.shape} must be equal 1-D")
    if len(p) < 2:
        raise ShapeError("need at least 2 points for a correlation")
    pc = p - p.mean()
    tc = t - t.mean()
    cov = float((pc * tc).mean())
    sd_p = math.sqrt(float((pc**2).mean()))
    sd_t = math.sqrt(float((tc**2).mean()))
    return 1.0 - cov / (sd_p * sd_t + epsilon)


@dataclass
class _Grads:
    codebook: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


def _batch_forward(
    model: MetaPredictorModel, metas: np.ndarray, assigns: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized forward over a batch; returns (z, hidden, y)."""
    n = len(metas)
    offsets = np.array(model.offsets)
    rows = model.codebook[offsets[None, :] + assigns]  # n x k x e
    z = np.concatenate([metas, rows.reshape(n, -1)], axis=1)
    pre = z @ model.w1.T + model.b1
    hidden = np.maximum(pre, 0.0)
    y = hidden @ model.w2 + model.b2
    return z, hidden, y


def _loss_and_grads(
    model: MetaPredictorModel,
    metas: np.ndarray,
    assigns: np.ndarray,
    targets: np.ndarray,
    epsilon: float,
) -> tuple[float, _Grads]:
    """Pearson loss over one batch plus exact parameter gradients."""
    n = len(targets)
    z, hidden, y = _batch_forward(model, metas, assigns)
    pc = y - y.mean()
    tc = targets - targets.mean()
    cov = float((pc * tc).mean())
    var_p = float((pc**2).mean())
    sd_p = math.sqrt(var_p)
    sd_t = math.sqrt(float((tc**2).mean()))
    denom = sd_p * sd_t + epsilon
    loss = 1.0 - cov / denom

    # dL/dy = -[dcov*denom - cov*sd_t*dsd_p]/denom^2, with dsd_p -> 0 when
    # the prediction is constant (cov is then 0 and the term vanishes).
    dcov = tc / n
    dsd_p = pc / (n * sd_p) if sd_p > 0 else np.zeros(n)
    dy = -(dcov * denom - cov * sd_t * dsd_p) / denom**2

    dw2 = hidden.T @ dy
    db2 = float(dy.sum())
    dh = np.outer(dy, model.w2) * (hidden > 0)
    dw1 = dh.T @ z
    db1 = dh.sum(axis=0)
    dz = dh @ model.w1
    dcodebook = np.zeros_like(model.codebook)
    blocks = dz[:, model.d :].reshape(n, model.k, model.e)
    offsets = np.array(model.offsets)
    np.add.at(dcodebook, (offsets[None, :] + assigns).ravel(), blocks.reshape(-1, model.e))
    return loss, _Grads(codebook=dcodebook, w1=dw1, b1=db1, w2=dw2, b2=db2)


class _Adam:
    def __init__(self, model: MetaPredictorModel, lr: float):
        self.lr = lr
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.t = 0
        self.m = {name: np.zeros_like(getattr(model, name)) for name in ("codebook", "w1", "b1", "w2")}
        self.v = {name: np.zeros_like(getattr(model, name)) for name in ("codebook", "w1", "b1", "w2")}
        self.m_b2 = 0.0
        self.v_b2 = 0.0

    def step(self, model: MetaPredictorModel, grads: _Grads) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name in ("codebook", "w1", "b1", "w2"):
            g = getattr(grads, name)
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g**2
            update = (self.m[name] / c1) / (np.sqrt(self.v[name] / c2) + self.eps)
            setattr(model, name, getattr(model, name) - self.lr * update)
        self.m_b2 = self.beta1 * self.m_b2 + (1 - self.beta1) * grads.b2
        self.v_b2 = self.beta2 * self.v_b2 + (1 - self.beta2) * grads.b2**2
        model.b2 -= self.lr * (self.m_b2 / c1) / (math.sqrt(self.v_b2 / c2) + self.eps)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_spearman: float | None


def _group_examples(
    model: MetaPredictorModel, examples: Sequence[MetaExample]
) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    groups: dict[str, list[MetaExample]] = {}
    for ex in examples:
        if len(ex.meta) != model.d:
            raise ShapeError(f"meta vector of {ex.dataset_id!r} has d={len(ex.meta)}")
        _check_assignment(model, ex.assignment)
        groups.setdefault(ex.dataset_id, []).append(ex)
    out = {}
    for dataset_id, group in groups.items():
        if len(group) < 2:
            raise InsufficientError(
                f"dataset {dataset_id!r} has {len(group)} example(s); Pearson needs >= 2"
            )
        out[dataset_id] = (
            np.array([ex.meta for ex in group], dtype=float),
            np.array([ex.assignment for ex in group], dtype=int),
            np.array([ex.target for ex in group], dtype=float),
        )
    return out


def _shuffle(rng: Xoshiro256StarStar, items: list) -> None:
    for i in range(len(items) - 1, 0, -1):
        j = rng.randbelow(i + 1)
        items[i], items[j] = items[j], items[i]


def train(
    model: MetaPredictorModel,
    examples: Sequence[MetaExample],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[MetaPredictorModel, list[EpochStats]]:
    """Per-dataset Adam steps with early stop on validation Spearman."""
    cfg.validate()
    groups = _group_examples(model, examples)
    model = model.copy()
    dataset_ids = sorted(groups)
    rng = Xoshiro256StarStar(cfg.seed)
    _shuffle(rng, dataset_ids)
    n_val = int(round(cfg.val_fraction * len(dataset_ids)))
    n_val = min(n_val, len(dataset_ids) - 1)
    val_ids = sorted(dataset_ids[:n_val])
    train_ids = sorted(dataset_ids[n_val:])

    opt = _Adam(model, cfg.learning_rate)
    history: list[EpochStats] = []
    best_spearman = -math.inf
    best_state: MetaPredictorModel | None = None
    since_best = 0
    for epoch in range(1, cfg.epochs + 1):
        order = list(train_ids)
        _shuffle(rng, order)
        losses = []
        for dataset_id in order:
            metas, assigns, targets = groups[dataset_id]
            loss, grads = _loss_and_grads(model, metas, assigns, targets, cfg.epsilon)
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch} on {dataset_id!r}")
            opt.step(model, grads)
            losses.append(loss)
        train_loss = sum(losses) / len(losses)

        val_rho: float | None = None
        if val_ids:
            rhos = []
            for dataset_id in val_ids:
                metas, assigns, targets = groups[dataset_id]
                _, _, y = _batch_forward(model, metas, assigns)
                rhos.append(spearman(list(y), list(targets)))
            val_rho = sum(rhos) / len(rhos)
            if val_rho > best_spearman:
                best_spearman = val_rho
                best_state = model.copy()
                since_best = 0
            else:
                since_best += 1
        history.append(EpochStats(epoch=epoch, train_loss=train_loss, val_spearman=val_rho))
        if val_ids and since_best >= cfg.patience:
            break
    if best_state is not None:
        model = best_state
    return model, history


def recommend(
    model: MetaPredictorModel,
    meta: Sequence[float],
    candidates: Sequence[Configuration],
    k_top: int,
) -> list[tuple[Configuration, float]]:
    """Top k_top candidates by ascending score; ties break lexicographically."""
    if not candidates:
        raise EmptyCandidateError("no candidate configurations")
    if k_top < 1:
        raise ValueError("k_top must be >= 1")
    scored = [(forward(model, meta, cand), tuple(cand)) for cand in candidates]
    scored.sort(key=lambda sc: (sc[0], sc[1]))
    return [(cand, score) for score, cand in scored[:k_top]]


def selection_quality(picks: Sequence[float]) -> dict:
    """Fractions of true ranks <= 0.25 and <= 0.5 plus a 10-bin histogram."""
    if not picks:
        raise ValueError("no picks to evaluate")
    for r in picks:
        if not 0.0 < r <= 1.0:
            raise ValueError(f"rank {r} outside (0, 1]")
    n = len(picks)
    hist = [0] * 10
    for r in picks:
        hist[min(int(math.ceil(r * 10)) - 1, 9)] += 1
    return {
        "count": n,
        "frac_top_quartile": sum(1 for r in picks if r <= 0.25) / n,
        "frac_top_half": sum(1 for r in picks if r <= 0.5) / n,
        "histogram": hist,
    }


def save_checkpoint(model: MetaPredictorModel, path: str | Path) -> None:
    """Versioned JSON with flat row-major weight arrays."""
    doc = {
        "version": model.version,
        "hyper": {
            "e": model.e,
            "h": model.h,
            "d": model.d,
            "activation": model.activation,
            "seed": model.seed,
        },
        "space_fingerprint": model.space_fingerprint,
        "dim_sizes": list(model.dim_sizes),
        "weights": {
            "codebook": model.codebook.ravel().tolist(),
            "w1": model.w1.ravel().tolist(),
            "b1": model.b1.tolist(),
            "w2": model.w2.tolist(),
            "b2": model.b2,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_checkpoint(path: str | Path, space: DesignSpace) -> MetaPredictorModel:
    """Load and bind to a space; fingerprints must match."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("version") != CHECKPOINT_VERSION:
        raise SchemaError(f"{path}: unsupported checkpoint version {doc.get('version')!r}")
    fingerprint = doc.get("space_fingerprint")
    if fingerprint != space.fingerprint():
        raise FingerprintError(
            f"{path}: checkpoint fingerprint {fingerprint!r} does not match space "
            f"{space.fingerprint()!r}"
        )
    hyper = doc["hyper"]
    dim_sizes = tuple(int(s) for s in doc["dim_sizes"])
    expected = tuple(len(dim.components) for dim in space.dimensions)
    if dim_sizes != expected:
        raise FingerprintError(f"{path}: dimension sizes {dim_sizes} != space {expected}")
    d, e, h = int(hyper["d"]), int(hyper["e"]), int(hyper["h"])
    k = len(dim_sizes)
    v_total = sum(dim_sizes)
    w = doc["weights"]
    try:
        codebook = np.array(w["codebook"], dtype=float).reshape(v_total, e)
        w1 = np.array(w["w1"], dtype=float).reshape(h, d + k * e)
        b1 = np.array(w["b1"], dtype=float).reshape(h)
        w2 = np.array(w["w2"], dtype=float).reshape(h)
        b2 = float(w["b2"])
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed weights: {exc}") from None
    model = MetaPredictorModel(
        space_fingerprint=fingerprint,
        dim_sizes=dim_sizes,
        d=d,
        e=e,
        h=h,
        seed=int(hyper["seed"]),
        codebook=codebook,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2,
        activation=str(hyper.get("activation", "relu")),
    )
    if not (
        np.all(np.isfinite(model.codebook))
        and np.all(np.isfinite(model.w1))
        and np.all(np.isfinite(model.b1))
        and np.all(np.isfinite(model.w2))
        and math.isfinite(model.b2)
    ):
        raise SchemaError(f"{path}: non-finite weights")
    return model
