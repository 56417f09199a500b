"""Statistical battery over a standardized corpus joined with configurations.

The estimator here is fixed-effects least squares with dataset and horizon
dummy controls. The reference analysis uses a mixed-effects model; fixed
effects keep the same controlling-for-dataset/horizon semantics with a
closed-form fit, and every emitted report carries a banner saying so.

Variance shares are Type-II sums of squares normalized by the sum over
dimensions, so shares add to 100 by construction. That normalization choice
is also flagged in the banner.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import View, format_float
from .errors import (
    AliasError,
    DegenerateError,
    InsufficientError,
    UnknownConfigError,
)
from .space import Configuration, DesignSpace
from .stats import benjamini_hochberg, bh_adjusted, f_sf, t_two_sided_p

DEVIATIONS = (
    "estimator: fixed-effects least squares with dataset/horizon dummies "
    "(approximates a mixed-effects fit; random-effects structure not modelled)",
    "variance shares: Type-II SS normalized by the sum over dimensions "
    "(shares add to 100 by construction)",
)


@dataclass(frozen=True)
class JoinedTable:
    space: DesignSpace
    datasets: tuple[str, ...]
    horizons: tuple[int, ...]
    config_ids: tuple[str, ...]
    assignments: np.ndarray  # n x k component indices
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


def join(view: View, pool: Mapping[str, Configuration], space: DesignSpace) -> JoinedTable:
    """Attach the pool's assignment vectors to a view's per-record values."""
    datasets: list[str] = []
    horizons: list[int] = []
    config_ids: list[str] = []
    assignments: list[Configuration] = []
    values: list[float] = []
    for dataset, horizon, config_id, value in view.rows:
        if config_id not in pool:
            raise UnknownConfigError(f"config {config_id!r} not in pool")
        datasets.append(dataset)
        horizons.append(horizon)
        config_ids.append(config_id)
        assignments.append(pool[config_id])
        values.append(value)
    return JoinedTable(
        space=space,
        datasets=tuple(datasets),
        horizons=tuple(horizons),
        config_ids=tuple(config_ids),
        assignments=np.array(assignments, dtype=int).reshape(len(values), space.k),
        y=np.array(values, dtype=float),
    )


@dataclass(frozen=True)
class ComponentEffect:
    dimension_id: str
    component: str
    coefficient: float
    std_error: float
    p_value: float
    is_baseline: bool = False


@dataclass(frozen=True)
class DimensionEffect:
    dimension_id: str
    share: float
    ss: float
    df: int
    f_stat: float
    p_value: float


@dataclass(frozen=True)
class EffectReport:
    components: tuple[ComponentEffect, ...] = ()
    dimensions: tuple[DimensionEffect, ...] = ()
    deviations: tuple[str, ...] = DEVIATIONS

    def coefficient(self, dimension_id: str, component: str) -> float:
        for eff in self.components:
            if (eff.dimension_id, eff.component) == (dimension_id, component):
                return eff.coefficient
        raise KeyError((dimension_id, component))

    def share(self, dimension_id: str) -> float:
        for eff in self.dimensions:
            if eff.dimension_id == dimension_id:
                return eff.share
        raise KeyError(dimension_id)


def _dimension_columns(
    table: JoinedTable, dim_index: int
) -> tuple[list[np.ndarray], list[tuple[str, str]]]:
    dim = table.space.dimensions[dim_index]
    cols: list[np.ndarray] = []
    names: list[tuple[str, str]] = []
    for a, comp in enumerate(dim.components):
        if a == dim.baseline_index:
            continue
        cols.append((table.assignments[:, dim_index] == a).astype(float))
        names.append((dim.id, comp))
    return cols, names


def _control_columns(table: JoinedTable) -> list[np.ndarray]:
    cols: list[np.ndarray] = []
    datasets = np.array(table.datasets)
    for level in sorted(set(table.datasets))[1:]:
        cols.append((datasets == level).astype(float))
    horizons = np.array(table.horizons)
    for level in sorted(set(table.horizons))[1:]:
        cols.append((horizons == level).astype(float))
    return cols


def _design(
    table: JoinedTable,
    controls: bool,
    skip_dim: int | None = None,
) -> tuple[np.ndarray, list[tuple[str, str]]]:
    n = len(table)
    cols: list[np.ndarray] = [np.ones(n)]
    names: list[tuple[str, str]] = [("", "(intercept)")]
    for i in range(table.space.k):
        if i == skip_dim:
            continue
        c, nm = _dimension_columns(table, i)
        cols.extend(c)
        names.extend(nm)
    if controls:
        cols.extend(_control_columns(table))
        names.extend([("", f"control{j}") for j in range(len(cols) - len(names))])
    return np.column_stack(cols), names


def _rss(x: np.ndarray, y: np.ndarray) -> tuple[float, int]:
    """Residual sum of squares and matrix rank under a minimum-norm fit."""
    beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    return float(resid @ resid), int(rank)


def main_effects(table: JoinedTable, controls: bool = True) -> EffectReport:
    """Reference-coded least squares of y on component indicators."""
    x, names = _design(table, controls)
    n, p = x.shape
    rank = int(np.linalg.matrix_rank(x))
    if rank < p:
        raise AliasError(
            f"design matrix rank {rank} < {p} columns; "
            "a component is collinear (confounded or unobserved)"
        )
    if n <= p:
        raise InsufficientError(f"{n} rows cannot identify {p} coefficients with error")
    xtx_inv = np.linalg.inv(x.T @ x)
    beta = xtx_inv @ (x.T @ table.y)
    resid = table.y - x @ beta
    sigma2 = float(resid @ resid) / (n - p)
    ses = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))

    effects: list[ComponentEffect] = []
    df = n - p
    by_name = {name: j for j, name in enumerate(names)}
    for i, dim in enumerate(table.space.dimensions):
        for a, comp in enumerate(dim.components):
            if a == dim.baseline_index:
                effects.append(ComponentEffect(dim.id, comp, 0.0, 0.0, 1.0, is_baseline=True))
                continue
            j = by_name[(dim.id, comp)]
            coef = float(beta[j])
            se = float(ses[j])
            if se > 0:
                pv = t_two_sided_p(coef / se, df)
            else:
                pv = 1.0 if coef == 0.0 else 0.0
            effects.append(ComponentEffect(dim.id, comp, coef, se, pv))
    return EffectReport(components=tuple(effects))


def anova_shares(table: JoinedTable, controls: bool = True) -> EffectReport:
    """Per-dimension Type-II SS shares of the main-effects model."""
    y = table.y
    if len(y) < 2:
        raise InsufficientError("need at least 2 rows")
    if float(np.var(y)) == 0.0:
        raise DegenerateError("response has zero variance")
    x_full, _ = _design(table, controls)
    n, p_full = x_full.shape
    rss_full, rank_full = _rss(x_full, y)
    if rank_full < p_full:
        raise AliasError(
            f"design matrix rank {rank_full} < {p_full} columns; "
            "a component is collinear (confounded or unobserved)"
        )
    df_resid = n - rank_full
    if df_resid <= 0:
        raise InsufficientError(f"{n} rows leave no residual degrees of freedom")

    dims: list[DimensionEffect] = []
    raw: list[tuple[str, float, int]] = []
    for i, dim in enumerate(table.space.dimensions):
        x_wo, _ = _design(table, controls, skip_dim=i)
        rss_wo, _ = _rss(x_wo, y)
        ss = max(rss_wo - rss_full, 0.0)
        raw.append((dim.id, ss, len(dim.components) - 1))
    total = sum(ss for _, ss, _ in raw)
    if total <= 0.0:
        raise DegenerateError("no dimension explains any variance")
    ms_resid = rss_full / df_resid
    for dim_id, ss, df in raw:
        if df > 0 and ms_resid > 0:
            f_stat = (ss / df) / ms_resid
            pv = f_sf(f_stat, df, df_resid)
        elif df > 0:
            f_stat = math.inf if ss > 0 else 0.0
            pv = 0.0 if ss > 0 else 1.0
        else:
            f_stat = 0.0
            pv = 1.0
        dims.append(DimensionEffect(dim_id, 100.0 * ss / total, ss, df, f_stat, pv))
    return EffectReport(dimensions=tuple(dims))


def stage_shares(report: EffectReport, space: DesignSpace) -> dict[str, float]:
    """Sum dimension shares into per-stage totals."""
    by_dim = {d.dimension_id: d.share for d in report.dimensions}
    out: dict[str, float] = {}
    for dim in space.dimensions:
        out[dim.stage.value] = out.get(dim.stage.value, 0.0) + by_dim.get(dim.id, 0.0)
    return out


@dataclass(frozen=True)
class InteractionGrid:
    dim_a: str
    dim_b: str
    row_components: tuple[str, ...]
    col_components: tuple[str, ...]
    means: tuple[tuple[float | None, ...], ...]
    support: tuple[tuple[int, ...], ...]


def interaction_means(table: JoinedTable, dim_a: str, dim_b: str) -> InteractionGrid:
    """Mean y per (component_a, component_b) cell with support counts."""
    if dim_a == dim_b:
        raise ValueError("dimensions must be distinct")
    ia = table.space.dimension_index(dim_a)
    ib = table.space.dimension_index(dim_b)
    da = table.space.dimensions[ia]
    db = table.space.dimensions[ib]
    means: list[tuple[float | None, ...]] = []
    support: list[tuple[int, ...]] = []
    col_a = table.assignments[:, ia]
    col_b = table.assignments[:, ib]
    for a in range(len(da.components)):
        mrow: list[float | None] = []
        srow: list[int] = []
        for b in range(len(db.components)):
            mask = (col_a == a) & (col_b == b)
            count = int(mask.sum())
            srow.append(count)
            mrow.append(float(table.y[mask].mean()) if count else None)
        means.append(tuple(mrow))
        support.append(tuple(srow))
    return InteractionGrid(
        dim_a=dim_a,
        dim_b=dim_b,
        row_components=tuple(da.components),
        col_components=tuple(db.components),
        means=tuple(means),
        support=tuple(support),
    )


def cohens_d(
    group_hi: Sequence[float], group_lo: Sequence[float], welch: bool = False
) -> tuple[float, float, float]:
    """(Diff, d, p) for mean(hi) - mean(lo); equal-variance t by default."""
    a = np.asarray(group_hi, dtype=float)
    b = np.asarray(group_lo, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DegenerateError("each group needs at least 2 observations")
    diff = float(a.mean() - b.mean())
    v1 = float(a.var(ddof=1))
    v2 = float(b.var(ddof=1))
    pooled = math.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    if pooled == 0.0:
        raise DegenerateError("pooled standard deviation is zero")
    d = diff / pooled
    if welch:
        se = math.sqrt(v1 / n1 + v2 / n2)
        df = (v1 / n1 + v2 / n2) ** 2 / (
            (v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1)
        )
    else:
        se = pooled * math.sqrt(1.0 / n1 + 1.0 / n2)
        df = n1 + n2 - 2
    p = t_two_sided_p(diff / se, df) if se > 0 else (1.0 if diff == 0 else 0.0)
    return diff, d, p


def characteristic_split(
    characteristics: Mapping[str, float], j: int
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Top-j and bottom-j dataset ids by characteristic value.

    Boundary ties resolve in favour of the high group, lexicographically
    smaller id first.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if len(characteristics) < 2 * j:
        raise InsufficientError(
            f"need at least {2 * j} datasets, have {len(characteristics)}"
        )
    hi = tuple(
        ds for ds, _ in sorted(characteristics.items(), key=lambda kv: (-kv[1], kv[0]))[:j]
    )
    remaining = {ds: v for ds, v in characteristics.items() if ds not in hi}
    lo = tuple(
        ds for ds, _ in sorted(remaining.items(), key=lambda kv: (kv[1], kv[0]))[:j]
    )
    return hi, lo


@dataclass(frozen=True)
class PairInteraction:
    dim_a: str
    dim_b: str
    eta_squared: float
    f_stat: float
    df_int: int
    p_value: float
    significant: bool
    q_value: float
    estimable: bool = True


def pairwise_interaction_eta(
    table: JoinedTable, controls: bool = True, alpha: float = 0.05
) -> tuple[PairInteraction, ...]:
    """Partial eta-squared per dimension pair with BH-FDR significance."""
    y = table.y
    x_main, _ = _design(table, controls)
    rss_main, rank_main = _rss(x_main, y)
    if rank_main < x_main.shape[1]:
        raise AliasError("main-effects model is rank deficient")

    pending: list[tuple[str, str, float, float, int, int, float]] = []
    inestimable: list[tuple[str, str]] = []
    k = table.space.k
    n = len(table)
    for ia in range(k):
        cols_a, _ = _dimension_columns(table, ia)
        for ib in range(ia + 1, k):
            cols_b, _ = _dimension_columns(table, ib)
            inter = [ca * cb for ca in cols_a for cb in cols_b]
            x_int = np.column_stack([x_main] + inter)
            rss_int, rank_int = _rss(x_int, y)
            df_int = rank_int - rank_main
            df_resid = n - rank_int
            name_a = table.space.dimensions[ia].id
            name_b = table.space.dimensions[ib].id
            if df_int == 0 or df_resid <= 0:
                inestimable.append((name_a, name_b))
                continue
            ss_int = max(rss_main - rss_int, 0.0)
            eta2 = ss_int / (ss_int + rss_int) if (ss_int + rss_int) > 0 else 0.0
            if rss_int > 0:
                f_stat = (ss_int / df_int) / (rss_int / df_resid)
                pv = f_sf(f_stat, df_int, df_resid)
            else:
                f_stat = math.inf if ss_int > 0 else 0.0
                pv = 0.0 if ss_int > 0 else 1.0
            pending.append((name_a, name_b, eta2, f_stat, df_int, df_resid, pv))

    p_values = [row[-1] for row in pending]
    flags = benjamini_hochberg(p_values, alpha=alpha) if p_values else []
    q_values = bh_adjusted(p_values) if p_values else []
    out = [
        PairInteraction(
            dim_a=row[0],
            dim_b=row[1],
            eta_squared=row[2],
            f_stat=row[3],
            df_int=row[4],
            p_value=row[6],
            significant=flag,
            q_value=q,
        )
        for row, flag, q in zip(pending, flags, q_values)
    ]
    out.extend(
        PairInteraction(
            dim_a=a,
            dim_b=b,
            eta_squared=float("nan"),
            f_stat=float("nan"),
            df_int=0,
            p_value=float("nan"),
            significant=False,
            q_value=float("nan"),
            estimable=False,
        )
        for a, b in inestimable
    )
    return tuple(out)


@dataclass(frozen=True)
class PtvStat:
    config_id: str
    mu: float
    sigma: float
    ratio: float
    infinite: bool = False


def ptv_ratio(view: View) -> dict[str, PtvStat]:
    """Peak-to-volatility of S = 1 - rank/m per config across scenarios."""
    scores: dict[str, list[float]] = {}
    for gmap in view.groups.values():
        for config_id, r in gmap.items():
            scores.setdefault(config_id, []).append(1.0 - r)
    out: dict[str, PtvStat] = {}
    for config_id in sorted(scores):
        s = scores[config_id]
        if len(s) < 2:
            raise InsufficientError(
                f"config {config_id!r} has {len(s)} scenario(s); need >= 2"
            )
        mu = sum(s) / len(s)
        sigma = math.sqrt(sum((v - mu) ** 2 for v in s) / (len(s) - 1))
        if sigma == 0.0:
            out[config_id] = PtvStat(config_id, mu, 0.0, math.inf, infinite=True)
        else:
            out[config_id] = PtvStat(config_id, mu, sigma, mu / sigma)
    return out


def _write_banner(fh) -> None:
    for line in DEVIATIONS:
        fh.write(f"# {line}\n")


def write_effects_csv(report: EffectReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_banner(fh)
        writer = csv.writer(fh)
        writer.writerow(["dimension", "component", "coefficient", "std_error", "p_value", "baseline"])
        for eff in report.components:
            writer.writerow(
                [
                    eff.dimension_id,
                    eff.component,
                    format_float(eff.coefficient),
                    format_float(eff.std_error),
                    format_float(eff.p_value),
                    int(eff.is_baseline),
                ]
            )


def write_shares_csv(
    report: EffectReport, path: str | Path, space: DesignSpace | None = None
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_banner(fh)
        writer = csv.writer(fh)
        writer.writerow(["dimension", "stage", "share_percent", "f_stat", "p_value"])
        stages = {d.id: d.stage.value for d in space.dimensions} if space else {}
        for eff in report.dimensions:
            writer.writerow(
                [
                    eff.dimension_id,
                    stages.get(eff.dimension_id, ""),
                    format_float(eff.share),
                    format_float(eff.f_stat),
                    format_float(eff.p_value),
                ]
            )
        if space is not None:
            totals = stage_shares(report, space)
            for stage_name in sorted(totals):
                writer.writerow(
                    ["(stage total)", stage_name, format_float(totals[stage_name]), "", ""]
                )


def write_interactions_csv(rows: Sequence[PairInteraction], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_banner(fh)
        writer = csv.writer(fh)
        writer.writerow(
            ["dim_a", "dim_b", "partial_eta_sq", "f_stat", "df_int", "p_value", "q_value", "significant", "estimable"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.dim_a,
                    r.dim_b,
                    format_float(r.eta_squared),
                    format_float(r.f_stat),
                    r.df_int,
                    format_float(r.p_value),
                    format_float(r.q_value),
                    int(r.significant),
                    int(r.estimable),
                ]
            )


def write_ptv_csv(stats: Mapping[str, PtvStat], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_id", "mu", "sigma", "ratio", "infinite"])
        for config_id in sorted(stats):
            s = stats[config_id]
            writer.writerow(
                [
                    s.config_id,
                    format_float(s.mu),
                    format_float(s.sigma),
                    "inf" if s.infinite else format_float(s.ratio),
                    int(s.infinite),
                ]
            )
