"""Design-space schema, validity semantics, enumeration, and pair pre-filter."""

import itertools
import json

import pytest

from compforge.errors import SchemaError, ShapeError, UnknownReferenceError
from compforge.space import (
    DesignSpace,
    Dimension,
    ForbidRule,
    RequireRule,
    Stage,
    all_pairs,
    enumerate_valid,
    is_valid,
    iter_all_configs,
    load_space,
    pairs_of_config,
)

SHIPPED = "spaces/tscomp_table1.json"


# ---------------------------------------------------------------- shipped space


def test_shipped_space_shape():
    sp = load_space(SHIPPED)
    assert sp.k == 11
    assert sp.total_components == 49
    assert len(sp.rules) == 7
    sizes = [d.size for d in sp.dimensions]
    rule_free = sum(a * b for a, b in itertools.combinations(sizes, 2))
    assert rule_free == 1010
    assert len(all_pairs(sp)) == 1003


def test_shipped_space_stage_partition():
    sp = load_space(SHIPPED)
    stages = {d.stage for d in sp.dimensions}
    assert stages == set(Stage)


def test_shipped_fingerprint_stable_across_loads():
    a = load_space(SHIPPED)
    b = load_space(SHIPPED)
    assert a.fingerprint() == b.fingerprint()
    assert len(a.fingerprint()) == 64
    assert all(c in "0123456789abcdef" for c in a.fingerprint())


# ---------------------------------------------------------------- construction


def test_dimension_validation():
    with pytest.raises(SchemaError):
        Dimension(id="", stage=Stage.SERIES_PREPROCESSING, components=("a",))
    with pytest.raises(SchemaError):
        Dimension(id="d", stage=Stage.SERIES_PREPROCESSING, components=())
    with pytest.raises(SchemaError):
        Dimension(id="d", stage=Stage.SERIES_PREPROCESSING, components=("a", "a"))
    with pytest.raises(SchemaError):
        Dimension(id="d", stage=Stage.SERIES_PREPROCESSING, components=("a",), baseline_index=1)


def test_duplicate_dimension_ids_rejected():
    d = Dimension(id="d", stage=Stage.SERIES_PREPROCESSING, components=("a", "b"))
    with pytest.raises(SchemaError):
        DesignSpace(name="s", dimensions=(d, d))


def test_forbid_rule_validation(space222):
    dims = space222.dimensions
    with pytest.raises(SchemaError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(ForbidRule(literals=(("dim0", "d0c0"),)),),
        )
    with pytest.raises(SchemaError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(ForbidRule(literals=(("dim0", "d0c0"), ("dim0", "d0c1"))),),
        )
    with pytest.raises(UnknownReferenceError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(ForbidRule(literals=(("dim0", "d0c0"), ("nope", "d1c0"))),),
        )
    with pytest.raises(UnknownReferenceError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(ForbidRule(literals=(("dim0", "d0c0"), ("dim1", "nope"))),),
        )


def test_require_rule_validation(space222):
    dims = space222.dimensions
    with pytest.raises(SchemaError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(RequireRule(("dim0", "d0c0"), "dim0", ("d0c1",)),),
        )
    with pytest.raises(SchemaError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(RequireRule(("dim0", "d0c0"), "dim1", ()),),
        )
    with pytest.raises(UnknownReferenceError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(RequireRule(("dim0", "d0c0"), "nope", ("d1c0",)),),
        )
    with pytest.raises(UnknownReferenceError):
        DesignSpace(
            name="s",
            dimensions=dims,
            rules=(RequireRule(("dim0", "d0c0"), "dim1", ("nope",)),),
        )


# ---------------------------------------------------------------- config mapping


def test_config_id_round_trip(space322):
    for config in iter_all_configs(space322):
        ids = space322.config_to_ids(config)
        assert space322.config_from_ids(ids) == tuple(config)


def test_config_from_ids_errors(space222):
    with pytest.raises(ShapeError):
        space222.config_from_ids(("d0c0",))
    with pytest.raises(UnknownReferenceError):
        space222.config_from_ids(("d0c0", "nope", "d2c0"))


def test_check_config_errors(space222):
    with pytest.raises(ShapeError):
        space222.config_to_ids((0, 0))
    with pytest.raises(ValueError):
        space222.config_to_ids((0, 0, 5))


# ---------------------------------------------------------------- validity


def _brute_valid(space, config):
    """Rule semantics restated from scratch: a config is invalid iff some
    forbid rule matches entirely or some require rule fires and is unmet."""
    by_dim = {d.id: d.components[c] for d, c in zip(space.dimensions, config)}
    for rule in space.rules:
        if isinstance(rule, ForbidRule):
            if all(by_dim[dim] == comp for dim, comp in rule.literals):
                return False
        else:
            ant_dim, ant_comp = rule.antecedent
            if by_dim[ant_dim] == ant_comp and by_dim[rule.consequent_dim] not in rule.allowed:
                return False
    return True


def _rule_space():
    return DesignSpace(
        name="ruled",
        dimensions=(
            Dimension(id="a", stage=Stage.SERIES_PREPROCESSING, components=("a0", "a1", "a2")),
            Dimension(id="b", stage=Stage.SERIES_ENCODING, components=("b0", "b1")),
            Dimension(id="c", stage=Stage.NETWORK_ARCHITECTURE, components=("c0", "c1", "c2")),
        ),
        rules=(
            ForbidRule(literals=(("a", "a0"), ("b", "b1"))),
            RequireRule(("a", "a2"), "c", ("c0", "c2")),
            ForbidRule(literals=(("a", "a1"), ("b", "b0"), ("c", "c1"))),
        ),
    )


def test_is_valid_matches_brute_force():
    sp = _rule_space()
    seen_invalid = 0
    for config in iter_all_configs(sp):
        expected = _brute_valid(sp, config)
        assert is_valid(sp, config) == expected
        seen_invalid += not expected
    assert seen_invalid > 0


def test_is_valid_no_rules(space322):
    for config in iter_all_configs(space322):
        assert is_valid(space322, config)


# ---------------------------------------------------------------- enumeration


def test_enumerate_valid_order_and_content():
    sp = _rule_space()
    got = enumerate_valid(sp, cap=1000)
    expected = [tuple(c) for c in iter_all_configs(sp) if _brute_valid(sp, c)]
    assert got == expected
    assert got == sorted(got)


def test_enumerate_valid_cap():
    sp = _rule_space()
    full = enumerate_valid(sp, cap=1000)
    assert enumerate_valid(sp, cap=0) == []
    assert enumerate_valid(sp, cap=3) == full[:3]
    with pytest.raises(ValueError):
        enumerate_valid(sp, cap=-1)


# ---------------------------------------------------------------- pair pre-filter


def test_all_pairs_unconstrained(space322):
    sizes = [d.size for d in space322.dimensions]
    expected = [
        ((i, a), (j, b))
        for i in range(len(sizes))
        for j in range(i + 1, len(sizes))
        for a in range(sizes[i])
        for b in range(sizes[j])
    ]
    assert all_pairs(space322) == expected
    assert len(expected) == sum(a * b for a, b in itertools.combinations(sizes, 2))


def test_all_pairs_bounds_witnessable():
    sp = _rule_space()
    pre = set(all_pairs(sp))
    witnessable = set()
    for config in enumerate_valid(sp, cap=10_000):
        witnessable.update(pairs_of_config(config))
    sizes = [d.size for d in sp.dimensions]
    rule_free = sum(a * b for a, b in itertools.combinations(sizes, 2))
    assert witnessable <= pre
    assert len(pre) < rule_free
    refuted = (
        (sp.dimension_index("a"), 0),
        (sp.dimension_index("b"), 1),
    )
    assert (refuted[0], refuted[1]) not in pre


def test_all_pairs_keeps_indirectly_dead_pair():
    # A0 is killed globally by the two forbids, so (A0, C0) is unwitnessable,
    # yet no rule restricted to dims a and c refutes it: the two-dimension
    # pre-filter must keep it and leave it to the uncovered-pair report.
    sp = DesignSpace(
        name="chained",
        dimensions=(
            Dimension(id="a", stage=Stage.SERIES_PREPROCESSING, components=("a0", "a1")),
            Dimension(id="b", stage=Stage.SERIES_ENCODING, components=("b0", "b1")),
            Dimension(id="c", stage=Stage.NETWORK_ARCHITECTURE, components=("c0", "c1")),
        ),
        rules=(
            ForbidRule(literals=(("a", "a0"), ("b", "b0"))),
            ForbidRule(literals=(("a", "a0"), ("b", "b1"))),
        ),
    )
    pre = set(all_pairs(sp))
    witnessable = set()
    for config in enumerate_valid(sp, cap=100):
        witnessable.update(pairs_of_config(config))
    dead = ((0, 0), (2, 0))
    assert dead in pre
    assert dead not in witnessable


def test_pairs_of_config():
    assert list(pairs_of_config((1, 0, 2))) == [
        ((0, 1), (1, 0)),
        ((0, 1), (2, 2)),
        ((1, 0), (2, 2)),
    ]


# ---------------------------------------------------------------- documents


def test_document_round_trip():
    sp = _rule_space()
    doc = sp.to_document()
    again = load_space(doc)
    assert again.fingerprint() == sp.fingerprint()
    assert again.to_document() == doc


def test_fingerprint_sensitivity():
    sp = _rule_space()
    doc = json.loads(json.dumps(sp.to_document()))
    doc["dimensions"][0]["components"][0] = "renamed"
    doc["dimensions"][0]["baseline"] = "renamed"
    doc["rules"] = []
    changed = load_space(doc)
    assert changed.fingerprint() != sp.fingerprint()


def test_fingerprint_ignores_rule_notes():
    base = _rule_space()
    noted = DesignSpace(
        name="ruled",
        dimensions=base.dimensions,
        rules=(
            ForbidRule(literals=(("a", "a0"), ("b", "b1")), note="why not"),
            RequireRule(("a", "a2"), "c", ("c0", "c2"), note="because"),
            ForbidRule(literals=(("a", "a1"), ("b", "b0"), ("c", "c1"))),
        ),
    )
    assert noted.fingerprint() == base.fingerprint()


def test_load_space_defaults_and_ignores_extras(tmp_path):
    doc = {
        "name": "tiny",
        "notes": "free text ignored",
        "disabled_rules": [{"kind": "forbid"}],
        "dimensions": [
            {"id": "x", "stage": "SeriesEncoding", "components": ["u", "v"]},
            {"id": "y", "stage": "NetworkOptimization", "components": ["p", "q"], "baseline": "q"},
        ],
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(doc))
    sp = load_space(path)
    assert sp.dimensions[0].baseline_index == 0
    assert sp.dimensions[1].baseline_index == 1
    assert sp.rules == ()


def test_load_space_schema_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_space(bad)
    with pytest.raises(SchemaError):
        load_space(tmp_path / "missing.json")
    with pytest.raises(SchemaError):
        load_space({"name": "", "dimensions": []})
    with pytest.raises(SchemaError):
        load_space({"name": "s", "dimensions": []})
    with pytest.raises(SchemaError):
        load_space(
            {
                "name": "s",
                "dimensions": [{"id": "x", "stage": "Nope", "components": ["u"]}],
            }
        )
    with pytest.raises(SchemaError):
        load_space(
            {
                "name": "s",
                "dimensions": [
                    {"id": "x", "stage": "SeriesEncoding", "components": ["u"], "baseline": "w"}
                ],
            }
        )
    with pytest.raises(SchemaError):
        load_space(
            {
                "name": "s",
                "dimensions": [{"id": "x", "stage": "SeriesEncoding", "components": ["u", "v"]}],
                "rules": [{"kind": "maybe"}],
            }
        )


def test_stage_values_have_no_spaces():
    for stage in Stage:
        assert " " not in stage.value
