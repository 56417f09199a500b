"""Command-line surface: one binary, subcommands, reproducible runs.

Data goes to files (or stdout for the few print-style commands);
diagnostics go to stderr. Mutating commands drop a `.manifest.json` next to
each output with input hashes, flags, seed and tool version. Config
precedence is flags > COMPFORGE_* environment variables > defaults.
"""

from __future__ import annotations

import json
import os

import click

from . import __version__
from .analysis import (
    anova_shares,
    interaction_means,
    join,
    main_effects,
    pairwise_interaction_eta,
    ptv_ratio,
    stage_shares,
    write_effects_csv,
    write_interactions_csv,
    write_ptv_csv,
    write_shares_csv,
)
from .corpus import format_float, ingest, rank_normalize, standardize
from .errors import CompforgeError
from .manifest import manifest_path_for, write_manifest
from .metafeatures import (
    DEFAULT_BINS,
    DEFAULT_SAMPLES,
    DEFAULT_WINDOW,
    build_proxy,
    fallback_features,
    load_embeddings,
    load_series,
    write_embeddings,
)
from .metapredictor import (
    MetaExample,
    TrainConfig,
    init_model,
    load_checkpoint,
    recommend,
    save_checkpoint,
    selection_quality,
    train,
)
from .pool import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MAX_ROUNDS,
    PoolParams,
    coverage_report,
    generate_pool,
    read_pool_csv,
    write_pool_csv,
)
from .space import enumerate_valid, load_space

SEED_ENV = "COMPFORGE_SEED"
THREADS_ENV = "COMPFORGE_THREADS"


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise click.ClickException(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def resolve_threads(flag: int | None) -> int:
    value = flag
    if value is None:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise click.ClickException(
                    f"{THREADS_ENV} must be an integer, got {env!r}"
                ) from None
    if value is None:
        value = 1
    if value < 1:
        raise click.ClickException("thread count must be >= 1")
    return value


def note(message: str) -> None:
    click.echo(message, err=True)


def guarded(fn):
    """Map domain errors to clean nonzero exits."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CompforgeError as exc:
            raise click.ClickException(str(exc)) from exc
        except OSError as exc:
            raise click.ClickException(str(exc)) from exc

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="compforge")
def main() -> None:
    """Component design-space tooling: pools, corpus analysis, recommendation."""


# -- space ------------------------------------------------------------------


@main.group()
def space() -> None:
    """Design-space file operations."""


@space.command("validate")
@click.argument("space_file", type=click.Path(exists=True, dir_okay=False))
@guarded
def space_validate(space_file: str) -> None:
    """Parse a space file and print its shape."""
    sp = load_space(space_file)
    click.echo(
        f"{sp.name}: {sp.k} dimensions, {sp.total_components} components, "
        f"{len(sp.rules)} rules"
    )
    click.echo(f"fingerprint: {sp.fingerprint()}")


@space.command("enumerate")
@click.argument("space_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--cap", type=int, default=1000, show_default=True, help="Max configurations to list.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write pool-format CSV here instead of stdout.")
@guarded
def space_enumerate(space_file: str, cap: int, out: str | None) -> None:
    """List valid configurations in lexicographic order (up to --cap)."""
    if cap < 0:
        raise click.ClickException("--cap must be >= 0")
    sp = load_space(space_file)
    configs = enumerate_valid(sp, cap=cap)
    if out is None:
        for config in configs:
            click.echo(",".join(sp.config_to_ids(config)))
    else:
        write_pool_csv(out, sp, configs)
        write_manifest(
            manifest_path_for(out),
            command="space enumerate",
            flags={"cap": cap, "out": out},
            inputs={"space": space_file},
        )
        note(f"wrote {len(configs)} configurations to {out}")


# -- pool -------------------------------------------------------------------


@main.group()
def pool() -> None:
    """Pairwise covering pool generation and inspection."""


@pool.command("generate")
@click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0).")
@click.option("--batch", type=int, default=DEFAULT_BATCH_SIZE, show_default=True, help="Candidates drawn per round.")
@click.option("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS, show_default=True)
@click.option("--initial", type=click.Path(exists=True, dir_okay=False), default=None, help="Pool CSV to extend.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def pool_generate(
    space_file: str,
    seed: int | None,
    batch: int,
    max_rounds: int,
    initial: str | None,
    out: str,
) -> None:
    """Generate a constrained pairwise covering pool."""
    sp = load_space(space_file)
    seed_value = resolve_seed(seed)
    initial_pool = ()
    inputs = {"space": space_file}
    if initial is not None:
        initial_pool = tuple(read_pool_csv(initial, sp).values())
        inputs["initial"] = initial
    params = PoolParams(
        seed=seed_value,
        batch_size=batch,
        max_rounds=max_rounds,
        initial_pool=list(initial_pool),
    )
    result = generate_pool(sp, params)
    write_pool_csv(out, sp, result.pool)
    write_manifest(
        manifest_path_for(out),
        command="pool generate",
        flags={"batch": batch, "max_rounds": max_rounds, "out": out, "initial": initial},
        inputs=inputs,
        seed=seed_value,
    )
    note(
        f"pool size {len(result.pool)}, coverage {result.coverage:.4%} "
        f"({result.covered}/{result.total_pairs} pairs), {result.rounds_used} rounds"
    )
    if result.uncovered_pairs:
        note(f"warning: {len(result.uncovered_pairs)} pairs uncovered")


@pool.command("report")
@click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pool", "pool_file", required=True, type=click.Path(exists=True, dir_okay=False))
@guarded
def pool_report(space_file: str, pool_file: str) -> None:
    """Print coverage fraction and any uncovered pairs."""
    sp = load_space(space_file)
    configs = list(read_pool_csv(pool_file, sp).values())
    fraction, uncovered = coverage_report(sp, configs)
    click.echo(f"pool size {len(configs)}")
    click.echo(f"coverage {fraction:.6f}")
    click.echo(f"uncovered {len(uncovered)}")
    for (i, a), (j, b) in uncovered:
        da, db = sp.dimensions[i], sp.dimensions[j]
        click.echo(f"  {da.id}={da.components[a]} x {db.id}={db.components[b]}")


# -- corpus -----------------------------------------------------------------


@main.group()
def corpus() -> None:
    """Performance corpus ingestion and views."""


@corpus.command("ingest")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@guarded
def corpus_ingest(corpus_file: str) -> None:
    """Validate a corpus CSV and print its counts."""
    c = ingest(corpus_file)
    for key, value in c.summary().items():
        click.echo(f"{key} {value}")


@corpus.command("rank")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="mse", show_default=True)
@click.option("--collapse-horizons", is_flag=True, help="Group by dataset only.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def corpus_rank(corpus_file: str, metric: str, collapse_horizons: bool, out: str) -> None:
    """Write the normalized-rank view (rank/m per group)."""
    view = rank_normalize(ingest(corpus_file), metric, collapse_horizons=collapse_horizons)
    view.write_csv(out)
    for line in view.warnings:
        note(f"warning: {line}")
    write_manifest(
        manifest_path_for(out),
        command="corpus rank",
        flags={"metric": metric, "collapse_horizons": collapse_horizons, "out": out},
        inputs={"corpus": corpus_file},
    )
    note(f"wrote {len(view.rows)} rows to {out}")


@corpus.command("standardize")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="mse", show_default=True)
@click.option("--collapse-horizons", is_flag=True, help="Group by dataset only.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def corpus_standardize(corpus_file: str, metric: str, collapse_horizons: bool, out: str) -> None:
    """Write the z-scored view (per-group standardization)."""
    view = standardize(ingest(corpus_file), metric, collapse_horizons=collapse_horizons)
    view.write_csv(out)
    for line in view.warnings:
        note(f"warning: {line}")
    write_manifest(
        manifest_path_for(out),
        command="corpus standardize",
        flags={"metric": metric, "collapse_horizons": collapse_horizons, "out": out},
        inputs={"corpus": corpus_file},
    )
    note(f"wrote {len(view.rows)} rows to {out}")


# -- analyze ----------------------------------------------------------------


def _joined(corpus_file: str, pool_file: str, space_file: str, metric: str, target: str):
    sp = load_space(space_file)
    c = ingest(corpus_file)
    if target == "rank":
        view = rank_normalize(c, metric)
    else:
        view = standardize(c, metric)
    for line in view.warnings:
        note(f"warning: {line}")
    pool_map = read_pool_csv(pool_file, sp)
    return join(view, pool_map, sp), sp


def _analysis_options(fn):
    fn = click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--pool", "pool_file", required=True, type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))(fn)
    fn = click.option("--metric", default="mse", show_default=True)(fn)
    fn = click.option(
        "--target",
        type=click.Choice(["std", "rank"]),
        default="std",
        show_default=True,
        help="Analyze standardized scores or normalized ranks.",
    )(fn)
    return fn


def _analysis_manifest(command: str, out: str, corpus_file: str, pool_file: str, space_file: str, **flags) -> None:
    write_manifest(
        manifest_path_for(out),
        command=command,
        flags={"out": out, **flags},
        inputs={"corpus": corpus_file, "pool": pool_file, "space": space_file},
    )


@main.group()
def analyze() -> None:
    """Statistical battery over corpus + pool."""


@analyze.command("effects")
@_analysis_options
@click.option("--no-controls", is_flag=True, help="Drop dataset/horizon dummies.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def analyze_effects(
    corpus_file: str, pool_file: str, space_file: str, metric: str, target: str,
    no_controls: bool, out: str,
) -> None:
    """Per-component coefficients (reference coding)."""
    table, _ = _joined(corpus_file, pool_file, space_file, metric, target)
    report = main_effects(table, controls=not no_controls)
    write_effects_csv(report, out)
    _analysis_manifest(
        "analyze effects", out, corpus_file, pool_file, space_file,
        metric=metric, target=target, controls=not no_controls,
    )
    note(f"wrote {len(report.components)} component effects to {out}")


@analyze.command("anova")
@_analysis_options
@click.option("--no-controls", is_flag=True, help="Drop dataset/horizon dummies.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def analyze_anova(
    corpus_file: str, pool_file: str, space_file: str, metric: str, target: str,
    no_controls: bool, out: str,
) -> None:
    """Per-dimension variance shares plus stage totals."""
    table, sp = _joined(corpus_file, pool_file, space_file, metric, target)
    report = anova_shares(table, controls=not no_controls)
    write_shares_csv(report, out, space=sp)
    _analysis_manifest(
        "analyze anova", out, corpus_file, pool_file, space_file,
        metric=metric, target=target, controls=not no_controls,
    )
    totals = stage_shares(report, sp)
    for stage_name in sorted(totals):
        note(f"stage {stage_name}: {totals[stage_name]:.1f}%")


@analyze.command("interactions")
@_analysis_options
@click.option("--alpha", type=float, default=0.05, show_default=True, help="BH-FDR level.")
@click.option("--threads", type=int, default=None, help=f"Worker cap (default: ${THREADS_ENV} or 1).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def analyze_interactions(
    corpus_file: str, pool_file: str, space_file: str, metric: str, target: str,
    alpha: float, threads: int | None, out: str,
) -> None:
    """Pairwise interaction partial eta-squared with FDR flags."""
    resolve_threads(threads)  # validated; current fits run sequentially
    table, _ = _joined(corpus_file, pool_file, space_file, metric, target)
    rows = pairwise_interaction_eta(table, alpha=alpha)
    write_interactions_csv(rows, out)
    _analysis_manifest(
        "analyze interactions", out, corpus_file, pool_file, space_file,
        metric=metric, target=target, alpha=alpha,
    )
    note(f"wrote {len(rows)} dimension pairs to {out}")


@analyze.command("cells")
@_analysis_options
@click.option("--dim-a", required=True)
@click.option("--dim-b", required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def analyze_cells(
    corpus_file: str, pool_file: str, space_file: str, metric: str, target: str,
    dim_a: str, dim_b: str, out: str,
) -> None:
    """Interaction cell means with support counts."""
    table, _ = _joined(corpus_file, pool_file, space_file, metric, target)
    grid = interaction_means(table, dim_a, dim_b)
    import csv as _csv

    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow([f"{dim_a}\\{dim_b}"] + list(grid.col_components) + ["support"])
        for comp, mrow, srow in zip(grid.row_components, grid.means, grid.support):
            writer.writerow(
                [comp]
                + ["" if v is None else format_float(v) for v in mrow]
                + [" ".join(str(s) for s in srow)]
            )
    _analysis_manifest(
        "analyze cells", out, corpus_file, pool_file, space_file,
        metric=metric, target=target, dim_a=dim_a, dim_b=dim_b,
    )
    note(f"wrote {len(grid.row_components)}x{len(grid.col_components)} grid to {out}")


@analyze.command("ptv")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="mse", show_default=True)
@click.option("--collapse-horizons", is_flag=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def analyze_ptv(corpus_file: str, metric: str, collapse_horizons: bool, out: str) -> None:
    """Peak-to-volatility ratio of S = 1 - rank/m per config."""
    view = rank_normalize(ingest(corpus_file), metric, collapse_horizons=collapse_horizons)
    stats = ptv_ratio(view)
    write_ptv_csv(stats, out)
    write_manifest(
        manifest_path_for(out),
        command="analyze ptv",
        flags={"metric": metric, "collapse_horizons": collapse_horizons, "out": out},
        inputs={"corpus": corpus_file},
    )
    note(f"wrote {len(stats)} configs to {out}")


# -- meta -------------------------------------------------------------------


@main.group()
def meta() -> None:
    """Meta-features and the rank meta-predictor."""


@meta.command("proxy")
@click.option("--series", "series_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset-id", default=None, help="Defaults to the series file stem.")
@click.option("--window", "-l", "window", type=int, default=DEFAULT_WINDOW, show_default=True)
@click.option("--bins", "-k", "bins", type=int, default=DEFAULT_BINS, show_default=True)
@click.option("--samples", "-m", "samples", type=int, default=DEFAULT_SAMPLES, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def meta_proxy(
    series_file: str, dataset_id: str | None, window: int, bins: int, samples: int,
    seed: int | None, out: str,
) -> None:
    """Build and dump the proxy classification table."""
    seed_value = resolve_seed(seed)
    series = load_series(series_file, dataset_id)
    table = build_proxy(series, window=window, bins=bins, samples=samples, seed=seed_value)
    for line in table.warnings:
        note(f"warning: {line}")
    table.write_csv(out)
    write_manifest(
        manifest_path_for(out),
        command="meta proxy",
        flags={"window": window, "bins": bins, "samples": samples, "out": out,
               "dataset_id": series.dataset_id},
        inputs={"series": series_file},
        seed=seed_value,
    )
    note(f"wrote {len(table.rows)} proxy rows to {out}")


@meta.command("features")
@click.option("--series", "series_files", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Repeatable; one dataset per file.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def meta_features(series_files: tuple[str, ...], out: str) -> None:
    """Write fallback statistical meta-features for one or more series."""
    vectors = [fallback_features(load_series(f)) for f in series_files]
    write_embeddings(vectors, out)
    write_manifest(
        manifest_path_for(out),
        command="meta features",
        flags={"out": out},
        inputs={f"series{i}": f for i, f in enumerate(series_files)},
    )
    note(f"wrote {len(vectors)} fallback vectors to {out}")


def _examples_from(corpus_file: str, pool_file: str, space_file: str,
                   embeddings_file: str, metric: str, collapse_horizons: bool):
    sp = load_space(space_file)
    pool_map = read_pool_csv(pool_file, sp)
    view = rank_normalize(ingest(corpus_file), metric, collapse_horizons=collapse_horizons)
    meta_by_dataset = {v.dataset_id: v for v in load_embeddings(embeddings_file)}
    examples = []
    skipped = set()
    for dataset, _horizon, config_id, r in view.rows:
        if dataset not in meta_by_dataset:
            skipped.add(dataset)
            continue
        if config_id not in pool_map:
            raise CompforgeError(f"config {config_id!r} not in pool")
        examples.append(
            MetaExample(
                dataset_id=dataset,
                meta=meta_by_dataset[dataset].vector,
                assignment=pool_map[config_id],
                target=r,
            )
        )
    for dataset in sorted(skipped):
        note(f"warning: dataset {dataset!r} has no embedding; skipped")
    d = len(next(iter(meta_by_dataset.values())).vector)
    return sp, pool_map, examples, d


@meta.command("train")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pool", "pool_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "embeddings_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="mse", show_default=True)
@click.option("--collapse-horizons", is_flag=True)
@click.option("--embed-dim", type=int, default=16, show_default=True)
@click.option("--hidden", type=int, default=128, show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--val-fraction", type=float, default=0.2, show_default=True)
@click.option("--patience", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--threads", type=int, default=None, help=f"Worker cap (default: ${THREADS_ENV} or 1).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@guarded
def meta_train(
    corpus_file: str, pool_file: str, space_file: str, embeddings_file: str,
    metric: str, collapse_horizons: bool, embed_dim: int, hidden: int,
    epochs: int, lr: float, val_fraction: float, patience: int,
    seed: int | None, threads: int | None, out: str,
) -> None:
    """Train the meta-predictor on rank targets and save a checkpoint."""
    resolve_threads(threads)  # validated; training itself is single-threaded
    seed_value = resolve_seed(seed)
    sp, _pool_map, examples, d = _examples_from(
        corpus_file, pool_file, space_file, embeddings_file, metric, collapse_horizons
    )
    model = init_model(sp, d=d, e=embed_dim, h=hidden, seed=seed_value)
    cfg = TrainConfig(
        learning_rate=lr, epochs=epochs, seed=seed_value,
        val_fraction=val_fraction, patience=patience,
    )
    model, history = train(model, examples, cfg)
    save_checkpoint(model, out)
    write_manifest(
        manifest_path_for(out),
        command="meta train",
        flags={"metric": metric, "collapse_horizons": collapse_horizons,
               "embed_dim": embed_dim, "hidden": hidden, "epochs": epochs,
               "lr": lr, "val_fraction": val_fraction, "patience": patience, "out": out},
        inputs={"corpus": corpus_file, "pool": pool_file, "space": space_file,
                "embeddings": embeddings_file},
        seed=seed_value,
    )
    last = history[-1]
    rho = "n/a" if last.val_spearman is None else f"{last.val_spearman:.4f}"
    note(f"trained {len(history)} epochs; final train loss {last.train_loss:.4f}, "
         f"val spearman {rho}")


@meta.command("recommend")
@click.option("--model", "model_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--meta", "meta_file", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Embedding CSV holding the target dataset's vector.")
@click.option("--dataset-id", default=None, help="Required when --meta has several rows.")
@click.option("--candidates", "candidates_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--top", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV output (default stdout).")
@guarded
def meta_recommend(
    model_file: str, space_file: str, meta_file: str, dataset_id: str | None,
    candidates_file: str, top: int, out: str | None,
) -> None:
    """Print/write the top-k candidates by ascending predicted score."""
    sp = load_space(space_file)
    model = load_checkpoint(model_file, sp)
    vectors = {v.dataset_id: v for v in load_embeddings(meta_file)}
    if dataset_id is None:
        if len(vectors) != 1:
            raise click.ClickException(
                "--dataset-id is required when the meta file has several rows"
            )
        dataset_id = next(iter(vectors))
    if dataset_id not in vectors:
        raise click.ClickException(f"dataset {dataset_id!r} not in {meta_file}")
    pool_map = read_pool_csv(candidates_file, sp)
    by_config = {tuple(cfg): cid for cid, cfg in pool_map.items()}
    picks = recommend(model, vectors[dataset_id].vector, list(pool_map.values()), top)
    lines = [
        f"{by_config[tuple(cfg)]},{format_float(score)}" for cfg, score in picks
    ]
    if out is None:
        click.echo("config_id,score")
        for line in lines:
            click.echo(line)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write("config_id,score\n")
            for line in lines:
                fh.write(line + "\n")
        write_manifest(
            manifest_path_for(out),
            command="meta recommend",
            flags={"dataset_id": dataset_id, "top": top, "out": out},
            inputs={"model": model_file, "space": space_file, "meta": meta_file,
                    "candidates": candidates_file},
        )
        note(f"wrote {len(picks)} recommendations to {out}")


@meta.command("eval")
@click.option("--model", "model_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pool", "pool_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--space", "space_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "embeddings_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="mse", show_default=True)
@click.option("--collapse-horizons", is_flag=True)
@click.option("--top", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON report (default stdout).")
@guarded
def meta_eval(
    model_file: str, corpus_file: str, pool_file: str, space_file: str,
    embeddings_file: str, metric: str, collapse_horizons: bool, top: int,
    out: str | None,
) -> None:
    """Score top-k picks per dataset group against true normalized ranks."""
    sp = load_space(space_file)
    model = load_checkpoint(model_file, sp)
    pool_map = read_pool_csv(pool_file, sp)
    view = rank_normalize(ingest(corpus_file), metric, collapse_horizons=collapse_horizons)
    meta_by_dataset = {v.dataset_id: v for v in load_embeddings(embeddings_file)}
    by_config = {tuple(cfg): cid for cid, cfg in pool_map.items()}
    picks: list[float] = []
    skipped = set()
    for key in sorted(view.groups):
        dataset = key[0]
        if dataset not in meta_by_dataset:
            skipped.add(dataset)
            continue
        gmap = view.groups[key]
        candidates = [pool_map[cid] for cid in sorted(gmap)]
        recs = recommend(model, meta_by_dataset[dataset].vector, candidates, top)
        picks.extend(gmap[by_config[tuple(cfg)]] for cfg, _score in recs)
    for dataset in sorted(skipped):
        note(f"warning: dataset {dataset!r} has no embedding; skipped")
    if not picks:
        raise click.ClickException("no groups could be evaluated")
    quality = selection_quality(picks)
    text = json.dumps(quality, indent=1, sort_keys=True)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        write_manifest(
            manifest_path_for(out),
            command="meta eval",
            flags={"metric": metric, "collapse_horizons": collapse_horizons,
                   "top": top, "out": out},
            inputs={"model": model_file, "corpus": corpus_file, "pool": pool_file,
                    "space": space_file, "embeddings": embeddings_file},
        )
        note(f"wrote evaluation report to {out}")
    note(
        f"top-quartile fraction {quality['frac_top_quartile']:.4f}, "
        f"top-half fraction {quality['frac_top_half']:.4f} over {quality['count']} picks"
    )


if __name__ == "__main__":
    main(prog_name="compforge")
