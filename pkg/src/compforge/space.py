"""Hierarchical component design space: vocabulary, validity rules, pair enumeration.

A space is a list of dimensions (each an ordered component vocabulary attached
to a pipeline stage) plus validity rules of two kinds:

* ``forbid`` — a conjunction of two or more (dimension, component) literals in
  distinct dimensions; a configuration containing all of them is invalid.
* ``require`` — if the antecedent (dimension, component) is present, the
  consequent dimension's component must lie in an allowed set.

Configurations are plain tuples of component indices, one per dimension, in
dimension order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import SchemaError, ShapeError, UnknownReferenceError

Configuration = tuple[int, ...]
"""One component index per dimension, in dimension order."""

Pair = tuple[tuple[int, int], tuple[int, int]]
"""((dim_i, comp_a), (dim_j, comp_b)) with dim_i < dim_j, all by index."""


class Stage(Enum):
    """The four pipeline stages a dimension can belong to."""

    SERIES_PREPROCESSING = "SeriesPreprocessing"
    SERIES_ENCODING = "SeriesEncoding"
    NETWORK_ARCHITECTURE = "NetworkArchitecture"
    NETWORK_OPTIMIZATION = "NetworkOptimization"


@dataclass(frozen=True)
class Dimension:
    """One axis of the design space holding an ordered component vocabulary."""

    id: str
    stage: Stage
    components: tuple[str, ...]
    baseline_index: int = 0

    def __post_init__(self):
        if not self.id:
            raise SchemaError("dimension id must be non-empty")
        if not self.components:
            raise SchemaError(f"dimension {self.id!r} has no components")
        if len(set(self.components)) != len(self.components):
            raise SchemaError(f"dimension {self.id!r} has duplicate component ids")
        if not 0 <= self.baseline_index < len(self.components):
            raise SchemaError(f"dimension {self.id!r}: baseline index out of range")

    @property
    def size(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class ForbidRule:
    """Configuration is invalid if it contains every literal (>= 2, distinct dims)."""

    literals: tuple[tuple[str, str], ...]  # (dimension_id, component_id)
    note: str = ""


@dataclass(frozen=True)
class RequireRule:
    """If the antecedent component is present, the consequent dimension must
    take a component from the allowed set."""

    antecedent: tuple[str, str]
    consequent_dim: str
    allowed: tuple[str, ...]
    note: str = ""


ValidityRule = ForbidRule | RequireRule


@dataclass
class DesignSpace:
    """Immutable after construction; lookup tables are built eagerly."""

    name: str
    dimensions: tuple[Dimension, ...]
    rules: tuple[ValidityRule, ...] = ()

    # index-level views, derived in __post_init__
    _dim_index: dict[str, int] = field(init=False, repr=False)
    _comp_index: tuple[dict[str, int], ...] = field(init=False, repr=False)
    _forbid_idx: list[tuple[tuple[int, int], ...]] = field(init=False, repr=False)
    _require_idx: list[tuple[int, int, int, frozenset[int]]] = field(init=False, repr=False)

    def __post_init__(self):
        ids = [d.id for d in self.dimensions]
        if len(set(ids)) != len(ids):
            raise SchemaError("dimension ids must be unique")
        self._dim_index = {d.id: i for i, d in enumerate(self.dimensions)}
        self._comp_index = tuple(
            {c: j for j, c in enumerate(d.components)} for d in self.dimensions
        )
        self._forbid_idx = []
        self._require_idx = []
        for rule in self.rules:
            if isinstance(rule, ForbidRule):
                if len(rule.literals) < 2:
                    raise SchemaError("forbid rule needs at least 2 literals")
                lits = tuple(self._resolve(dim, comp) for dim, comp in rule.literals)
                if len({d for d, _ in lits}) != len(lits):
                    raise SchemaError("forbid literals must name distinct dimensions")
                self._forbid_idx.append(lits)
            else:
                ant = self._resolve(*rule.antecedent)
                if rule.consequent_dim not in self._dim_index:
                    raise UnknownReferenceError(
                        f"require rule names unknown dimension {rule.consequent_dim!r}"
                    )
                cons = self._dim_index[rule.consequent_dim]
                if cons == ant[0]:
                    raise SchemaError("require rule antecedent and consequent dimension must differ")
                if not rule.allowed:
                    raise SchemaError("require rule allowed set must be non-empty")
                allowed = frozenset(
                    self._resolve(rule.consequent_dim, c)[1] for c in rule.allowed
                )
                self._require_idx.append((ant[0], ant[1], cons, allowed))

    def _resolve(self, dim_id: str, comp_id: str) -> tuple[int, int]:
        if dim_id not in self._dim_index:
            raise UnknownReferenceError(f"unknown dimension {dim_id!r}")
        d = self._dim_index[dim_id]
        if comp_id not in self._comp_index[d]:
            raise UnknownReferenceError(f"unknown component {comp_id!r} in dimension {dim_id!r}")
        return d, self._comp_index[d][comp_id]

    # -- basic queries ----------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.dimensions)

    @property
    def total_components(self) -> int:
        return sum(d.size for d in self.dimensions)

    def dimension_index(self, dim_id: str) -> int:
        if dim_id not in self._dim_index:
            raise UnknownReferenceError(f"unknown dimension {dim_id!r}")
        return self._dim_index[dim_id]

    def component_index(self, dim_id: str, comp_id: str) -> int:
        return self._resolve(dim_id, comp_id)[1]

    def config_from_ids(self, comp_ids: Sequence[str]) -> Configuration:
        """Build an index configuration from component ids in dimension order."""
        if len(comp_ids) != self.k:
            raise ShapeError(f"expected {self.k} components, got {len(comp_ids)}")
        return tuple(
            self._resolve(d.id, c)[1] for d, c in zip(self.dimensions, comp_ids)
        )

    def config_to_ids(self, config: Configuration) -> tuple[str, ...]:
        self._check_config(config)
        return tuple(d.components[i] for d, i in zip(self.dimensions, config))

    def _check_config(self, config: Sequence[int]) -> None:
        if len(config) != self.k:
            raise ShapeError(f"configuration length {len(config)} != {self.k} dimensions")
        for d, i in zip(self.dimensions, config):
            if not 0 <= i < d.size:
                raise ValueError(f"component index {i} out of range for dimension {d.id!r}")

    def to_document(self) -> dict:
        """Canonical document form (used for serialization and fingerprinting)."""
        rules = []
        for rule in self.rules:
            if isinstance(rule, ForbidRule):
                rules.append({
                    "kind": "forbid",
                    "literals": [{"dim": d, "comp": c} for d, c in rule.literals],
                })
            else:
                rules.append({
                    "kind": "require",
                    "if": {"dim": rule.antecedent[0], "comp": rule.antecedent[1]},
                    "then_dim": rule.consequent_dim,
                    "allowed": list(rule.allowed),
                })
        return {
            "name": self.name,
            "dimensions": [
                {
                    "id": d.id,
                    "stage": d.stage.value,
                    "components": list(d.components),
                    "baseline": d.components[d.baseline_index],
                }
                for d in self.dimensions
            ],
            "rules": rules,
        }

    def fingerprint(self) -> str:
        """SHA-256 of the canonical document; identifies the space for checkpoints."""
        import hashlib

        blob = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- operations -----------------------------------------------------------


def load_space(source: str | Path | Mapping) -> DesignSpace:
    """Load and validate a space document (JSON file path or parsed mapping).

    Raises SchemaError for structural problems and UnknownReferenceError when
    a rule names a dimension or component that does not exist. Top-level keys
    outside the schema ("notes", "disabled_rules") are ignored, which is where
    the shipped space files keep commented-out optional rules.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read space document: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, Mapping):
        raise SchemaError("space document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise SchemaError("space document needs a non-empty 'name'")
    dims_doc = doc.get("dimensions")
    if not isinstance(dims_doc, list) or not dims_doc:
        raise SchemaError("space document needs a non-empty 'dimensions' list")

    dimensions = []
    for entry in dims_doc:
        if not isinstance(entry, Mapping):
            raise SchemaError("each dimension must be an object")
        try:
            stage = Stage(entry.get("stage"))
        except ValueError:
            raise SchemaError(
                f"dimension {entry.get('id')!r}: unknown stage {entry.get('stage')!r}"
            ) from None
        comps = entry.get("components")
        if not isinstance(comps, list) or not all(isinstance(c, str) and c for c in comps):
            raise SchemaError(f"dimension {entry.get('id')!r}: components must be non-empty strings")
        baseline = entry.get("baseline", comps[0] if comps else None)
        if baseline not in comps:
            raise SchemaError(f"dimension {entry.get('id')!r}: baseline {baseline!r} not in components")
        dimensions.append(
            Dimension(
                id=entry.get("id", ""),
                stage=stage,
                components=tuple(comps),
                baseline_index=comps.index(baseline),
            )
        )

    rules: list[ValidityRule] = []
    for entry in doc.get("rules", []):
        if not isinstance(entry, Mapping) or "kind" not in entry:
            raise SchemaError("each rule must be an object with a 'kind'")
        note = entry.get("note", "")
        if entry["kind"] == "forbid":
            lits = entry.get("literals")
            if not isinstance(lits, list) or len(lits) < 2:
                raise SchemaError("forbid rule needs a list of >= 2 literals")
            rules.append(
                ForbidRule(
                    literals=tuple((lit["dim"], lit["comp"]) for lit in lits),
                    note=note,
                )
            )
        elif entry["kind"] == "require":
            if "if" not in entry or "then_dim" not in entry or "allowed" not in entry:
                raise SchemaError("require rule needs 'if', 'then_dim' and 'allowed'")
            rules.append(
                RequireRule(
                    antecedent=(entry["if"]["dim"], entry["if"]["comp"]),
                    consequent_dim=entry["then_dim"],
                    allowed=tuple(entry["allowed"]),
                    note=note,
                )
            )
        else:
            raise SchemaError(f"unknown rule kind {entry['kind']!r}")

    return DesignSpace(name=name, dimensions=tuple(dimensions), rules=tuple(rules))


def is_valid(space: DesignSpace, config: Sequence[int]) -> bool:
    """True unless a forbid conjunction is fully present or a require rule is violated."""
    space._check_config(config)
    for lits in space._forbid_idx:
        if all(config[d] == c for d, c in lits):
            return False
    for ant_dim, ant_comp, cons_dim, allowed in space._require_idx:
        if config[ant_dim] == ant_comp and config[cons_dim] not in allowed:
            return False
    return True


def enumerate_valid(space: DesignSpace, cap: int) -> list[Configuration]:
    """First ``cap`` valid configurations in lexicographic assignment order."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    out: list[Configuration] = []
    if cap == 0:
        return out
    for config in itertools.product(*(range(d.size) for d in space.dimensions)):
        if is_valid(space, config):
            out.append(config)
            if len(out) >= cap:
                break
    return out


def iter_all_configs(space: DesignSpace) -> Iterator[Configuration]:
    """All configurations (valid or not) in lexicographic order."""
    return itertools.product(*(range(d.size) for d in space.dimensions))


def _pair_refuted(space: DesignSpace, i: int, a: int, j: int, b: int) -> bool:
    """Two-dimension pre-filter: is the pair directly refuted by the rules
    restricted to dimensions i and j?"""
    assignment = {i: a, j: b}
    for lits in space._forbid_idx:
        if all(d in assignment and assignment[d] == c for d, c in lits):
            return True
    for ant_dim, ant_comp, cons_dim, allowed in space._require_idx:
        if (
            ant_dim in assignment
            and assignment[ant_dim] == ant_comp
            and cons_dim in assignment
            and assignment[cons_dim] not in allowed
        ):
            return True
    return False


def all_pairs(space: DesignSpace) -> list[Pair]:
    """All cross-dimension component pairs that survive the two-dimension
    rule pre-filter, ordered by (dim_i, dim_j, comp_a, comp_b).

    Forbid rules spanning more than two dimensions cannot refute any pair
    here; Algorithm-style greedy generation absorbs residual uncoverable
    pairs through its no-progress break and the uncovered-pair report.
    """
    pairs: list[Pair] = []
    k = space.k
    for i in range(k):
        for j in range(i + 1, k):
            for a in range(space.dimensions[i].size):
                for b in range(space.dimensions[j].size):
                    if not _pair_refuted(space, i, a, j, b):
                        pairs.append(((i, a), (j, b)))
    return pairs


def pairs_of_config(config: Sequence[int]) -> Iterable[Pair]:
    """The C(k,2) component pairs a configuration exhibits."""
    k = len(config)
    for i in range(k):
        for j in range(i + 1, k):
            yield ((i, config[i]), (j, config[j]))
