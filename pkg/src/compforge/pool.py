"""Greedy construction of a constrained pairwise-covering configuration pool.

Each round draws a batch of valid random configurations by rejection
sampling, keeps the candidate that covers the most still-uncovered
component pairs (ties broken toward the lexicographically smallest
assignment), and stops when every reachable pair is covered, a round makes
no progress, or the round budget runs out. Pairs that no valid
configuration can witness (possible when rules span several dimensions)
surface in the uncovered-pair report rather than blocking termination.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ExhaustedError, SchemaError, ShapeError
from .rng import Xoshiro256StarStar
from .space import (
    Configuration,
    DesignSpace,
    Pair,
    all_pairs,
    is_valid,
    pairs_of_config,
)

DEFAULT_BATCH_SIZE = 64
DEFAULT_MAX_ROUNDS = 10_000
RETRY_FACTOR = 100  # rejection-sampling budget per round = RETRY_FACTOR * batch_size


@dataclass
class PoolParams:
    batch_size: int = DEFAULT_BATCH_SIZE
    max_rounds: int = DEFAULT_MAX_ROUNDS
    seed: int = 0
    initial_pool: list[Configuration] = field(default_factory=list)

    def validate(self, space: DesignSpace) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        for config in self.initial_pool:
            if not is_valid(space, config):
                raise ValueError(f"initial pool contains invalid configuration {config}")


@dataclass
class PoolResult:
    pool: list[Configuration]
    covered: int
    uncovered_pairs: list[Pair]
    rounds_used: int

    @property
    def total_pairs(self) -> int:
        return self.covered + len(self.uncovered_pairs)

    @property
    def coverage(self) -> float:
        """Fraction of pre-filter pairs covered; 1.0 when there is nothing to cover."""
        return self.covered / self.total_pairs if self.total_pairs else 1.0


def generate_pool(space: DesignSpace, params: PoolParams) -> PoolResult:
    """Run the greedy covering construction; deterministic for a given seed."""
    params.validate(space)
    rng = Xoshiro256StarStar(params.seed)
    target = all_pairs(space)
    remaining = set(target)
    pool: list[Configuration] = []
    seen: set[Configuration] = set()
    for config in params.initial_pool:
        if config in seen:
            continue
        pool.append(config)
        seen.add(config)
        remaining.difference_update(pairs_of_config(config))

    retry_budget = RETRY_FACTOR * params.batch_size
    rounds = 0
    while remaining and rounds < params.max_rounds:
        rounds += 1
        candidates = _draw_batch(space, rng, params.batch_size, retry_budget)
        best: Configuration | None = None
        best_gain = 0
        for cand in candidates:
            if cand in seen:
                continue
            gain = sum(1 for p in pairs_of_config(cand) if p in remaining)
            if gain > best_gain or (gain == best_gain and gain > 0 and (best is None or cand < best)):
                best, best_gain = cand, gain
        if best is None or best_gain == 0:
            break  # no progress this round
        pool.append(best)
        seen.add(best)
        remaining.difference_update(pairs_of_config(best))

    uncovered = sorted(remaining)
    return PoolResult(
        pool=pool,
        covered=len(target) - len(uncovered),
        uncovered_pairs=uncovered,
        rounds_used=rounds,
    )


def _draw_batch(
    space: DesignSpace,
    rng: Xoshiro256StarStar,
    batch_size: int,
    retry_budget: int,
) -> list[Configuration]:
    """Rejection-sample valid configurations, uniform per dimension."""
    sizes = [d.size for d in space.dimensions]
    out: list[Configuration] = []
    attempts = 0
    while len(out) < batch_size and attempts < retry_budget:
        attempts += 1
        cand = tuple(rng.randbelow(s) for s in sizes)
        if is_valid(space, cand):
            out.append(cand)
    if not out:
        raise ExhaustedError(
            f"no valid configuration found in {retry_budget} draws; space over-constrained"
        )
    return out


def coverage_report(
    space: DesignSpace, pool: Sequence[Configuration]
) -> tuple[float, list[Pair]]:
    """(fraction of pre-filter pairs covered, uncovered pairs in deterministic order)."""
    target = all_pairs(space)
    covered: set[Pair] = set()
    for config in pool:
        if len(config) != space.k:
            raise ShapeError(f"pool configuration length {len(config)} != {space.k}")
        covered.update(pairs_of_config(config))
    uncovered = sorted(p for p in target if p not in covered)
    fraction = (len(target) - len(uncovered)) / len(target) if target else 1.0
    return fraction, uncovered


# -- pool file I/O ---------------------------------------------------------


def config_id_for(ordinal: int, width: int = 4) -> str:
    return str(ordinal).zfill(width)


def write_pool_csv(path: str | Path, space: DesignSpace, pool: Sequence[Configuration]) -> None:
    """One configuration per line: config_id plus component ids in dimension order.

    config_id is the zero-padded ordinal (width 4, growing if the pool is
    larger than 9999 entries).
    """
    width = max(4, len(str(max(len(pool) - 1, 0))))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_id"] + [d.id for d in space.dimensions])
        for i, config in enumerate(pool):
            writer.writerow([config_id_for(i, width)] + list(space.config_to_ids(config)))


def read_pool_csv(path: str | Path, space: DesignSpace) -> dict[str, Configuration]:
    """config_id -> assignment mapping; validates header against the space."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("pool file is empty") from None
        expected = ["config_id"] + [d.id for d in space.dimensions]
        if header != expected:
            raise SchemaError(f"pool header {header} does not match space dimensions {expected}")
        pool: dict[str, Configuration] = {}
        for row in reader:
            if len(row) != space.k + 1:
                raise SchemaError(f"pool row has {len(row)} fields, expected {space.k + 1}")
            cid = row[0]
            if cid in pool:
                raise SchemaError(f"duplicate config_id {cid!r} in pool file")
            pool[cid] = space.config_from_ids(row[1:])
    return pool
