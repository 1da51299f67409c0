from __future__ import annotations

import random

import pytest

from sbxkit.catalogue import (
    Catalogue,
    CatalogueError,
    ExpertRecord,
    ModuleDescriptor,
    Requirement,
    Resolution,
    ResolutionError,
    file_checksum,
    resolve_modules,
)
from sbxkit.semver import Range, Version
from sbxkit.store import Store

from resolver_oracle import (
    enumerate_solutions,
    greedy_optimum,
    make_module,
    random_scenario,
)


@pytest.fixture()
def catalogue(tmp_path) -> Catalogue:
    return Catalogue(Store(tmp_path / "ws"))


def descriptor(name="noise-perturbation", version="1.2.0", checksum="a" * 64,
               **overrides) -> ModuleDescriptor:
    base = make_module(name, version, [name])
    data = base.to_data()
    data["checksum"] = checksum
    data.update(overrides)
    return ModuleDescriptor.from_data(data)


def test_register_is_idempotent(catalogue):
    first = catalogue.register(descriptor())
    second = catalogue.register(descriptor())
    assert first == second == "noise-perturbation@1.2.0"


def test_register_conflicting_checksum_rejected(catalogue):
    catalogue.register(descriptor(checksum="a" * 64))
    with pytest.raises(CatalogueError, match="immutable"):
        catalogue.register(descriptor(checksum="b" * 64))


def test_version_must_have_three_components():
    with pytest.raises(Exception, match="major.minor.patch"):
        descriptor(version="1.2")


def test_checksum_must_be_hex(catalogue):
    with pytest.raises(CatalogueError, match="hex"):
        catalogue.register(descriptor(checksum="Z" * 64))


def test_entrypoint_checksum_verified(catalogue, tmp_path):
    script = tmp_path / "tool.py"
    script.write_text("print('hi')\n")
    good = descriptor(checksum=file_checksum(script), entrypoint=str(script))
    catalogue.register(good)
    bad = descriptor(name="other", checksum="c" * 64, entrypoint=str(script))
    with pytest.raises(CatalogueError, match="checksum mismatch"):
        catalogue.register(bad)


def test_query_sorted_descending_within_range(catalogue):
    for version in ("1.0.0", "1.2.0", "2.0.0"):
        catalogue.register(descriptor(version=version))
    hits = catalogue.query("noise-perturbation", "^1.0.0")
    assert [str(m.version) for m in hits] == ["1.2.0", "1.0.0"]
    assert catalogue.query("unknown-capability", "^1.0.0") == []
    exact = catalogue.query("noise-perturbation", "=2.0.0")
    assert [str(m.version) for m in exact] == ["2.0.0"]


def test_query_brute_force_over_all_versions(catalogue):
    versions = ["0.3.0", "1.0.0", "1.1.5", "2.0.0", "2.3.1", "3.0.0"]
    for version in versions:
        catalogue.register(descriptor(version=version))
    for range_text in ("^1.0.0", "~1.1.0", "=2.0.0", ">=1.1.5", "^0.3.0"):
        rng = Range.parse(range_text)
        expected = sorted((v for v in versions if rng.contains(Version.parse(v))),
                          key=lambda v: Version.parse(v).key(), reverse=True)
        hits = [str(m.version) for m in catalogue.query("noise-perturbation", range_text)]
        assert hits == expected, range_text


def test_resolve_transitive_example(catalogue):
    catalogue.register(make_module("a", "1.1.0", ["a"], [("b", "~2.0.0")]))
    catalogue.register(make_module("b", "2.0.3", ["b"]))
    resolution = catalogue.resolve([Requirement("a", Range.parse("^1.0.0"))])
    assert resolution.bindings == {"a": ("a", Version.parse("1.1.0")),
                                   "b": ("b", Version.parse("2.0.3"))}
    assert resolution.order == ["b", "a"]


def test_resolve_conflict_names_capability_and_ranges(catalogue):
    catalogue.register(make_module("b", "1.5.0", ["b"]))
    catalogue.register(make_module("b", "2.5.0", ["b"]))
    roots = [Requirement("b", Range.parse("^1.0.0")), Requirement("b", Range.parse("^2.0.0"))]
    with pytest.raises(ResolutionError) as excinfo:
        catalogue.resolve(roots)
    error = excinfo.value
    assert error.capability == "b"
    assert {c["range"] for c in error.conflicts} == {"^1.0.0", "^2.0.0"}


def test_resolve_without_requires_orders_roots_lexicographically(catalogue):
    catalogue.register(make_module("zeta", "1.0.0", ["zeta"]))
    catalogue.register(make_module("alpha", "1.0.0", ["alpha"]))
    resolution = catalogue.resolve([
        Requirement("zeta", Range.parse("^1.0.0")),
        Requirement("alpha", Range.parse("^1.0.0")),
    ])
    assert resolution.order == ["alpha", "zeta"]


def test_resolve_cycle_reported():
    modules = [
        make_module("a", "1.0.0", ["a"], [("b", "^1.0.0")]),
        make_module("b", "1.0.0", ["b"], [("a", "^1.0.0")]),
    ]
    with pytest.raises(ResolutionError, match="cycle"):
        resolve_modules(modules, [Requirement("a", Range.parse("^1.0.0"))])


def test_resolver_matches_oracle_on_random_small_catalogues():
    rng = random.Random(20260810)
    infeasible = feasible = 0
    for _ in range(250):
        modules, roots = random_scenario(rng)
        solutions = enumerate_solutions(modules, roots)
        expected = greedy_optimum(modules, roots, solutions)
        if expected is None:
            infeasible += 1
            with pytest.raises(ResolutionError):
                resolve_modules(modules, roots)
        else:
            feasible += 1
            resolution = resolve_modules(modules, roots)
            actual = {cap: (name, str(version))
                      for cap, (name, version) in resolution.bindings.items()}
            assert actual == expected
    # the scenario generator must exercise both outcomes meaningfully
    assert feasible >= 50
    assert infeasible >= 50


def test_resolver_version_tie_breaks_on_name():
    modules = [
        make_module("tool-b", "1.0.0", ["scan"]),
        make_module("tool-a", "1.0.0", ["scan"]),
    ]
    resolution = resolve_modules(modules, [Requirement("scan", Range.parse("^1.0.0"))])
    assert resolution.bindings["scan"] == ("tool-a", Version.parse("1.0.0"))


def test_resolution_invariant_under_insertion_order(tmp_path):
    mods = [
        make_module("a", "1.1.0", ["a"], [("b", "^2.0.0")]),
        make_module("a", "1.0.0", ["a"]),
        make_module("b", "2.0.3", ["b"]),
        make_module("b", "2.4.0", ["b"]),
    ]
    results = []
    for ordering, permuted in enumerate((mods, mods[::-1], [mods[2], mods[0], mods[3], mods[1]])):
        catalogue = Catalogue(Store(tmp_path / f"ws-{ordering}"))
        for module in permuted:
            catalogue.register(module)
        resolution = catalogue.resolve([Requirement("a", Range.parse("^1.0.0"))])
        results.append(resolution.to_data())
    assert results[0] == results[1] == results[2]


def test_match_experts(catalogue):
    catalogue.register(make_module("bias-detection", "1.0.0", ["bias-detection"]))
    catalogue.register(make_module("noise-perturbation", "1.0.0", ["noise-perturbation"]))
    resolution = catalogue.resolve([
        Requirement("bias-detection", Range.parse("^1.0.0")),
        Requirement("noise-perturbation", Range.parse("^1.0.0")),
    ])
    assert catalogue.match_experts(resolution) == {
        "bias-detection": [], "noise-perturbation": []}

    catalogue.register_expert(ExpertRecord(
        "citcom-lab", "CitCom Assessment Lab", ("smart-city testing",),
        ("bias-detection", "noise-perturbation")))
    catalogue.register_expert(ExpertRecord(
        "fair-audit", "Fairness Auditors", (), ("bias-detection",)))
    matches = catalogue.match_experts(resolution)
    assert matches["bias-detection"] == ["citcom-lab", "fair-audit"]
    assert matches["noise-perturbation"] == ["citcom-lab"]


def test_catalogue_export_import_round_trip(catalogue, tmp_path):
    catalogue.register(descriptor())
    catalogue.register_expert(ExpertRecord("e1", "Expert One", ("iso",), ("noise-perturbation",)))
    data = catalogue.export_data()
    assert data["metadata_schema_version"] == 1

    other = Catalogue(Store(tmp_path / "other"))
    other.import_data(data)
    assert other.export_data() == data


def test_import_rejects_unknown_schema(catalogue):
    with pytest.raises(CatalogueError, match="metadata_schema_version"):
        catalogue.import_data({"metadata_schema_version": 99, "modules": []})


def test_checksum_immutable_across_operations(catalogue):
    catalogue.register(descriptor(checksum="a" * 64))
    catalogue.register(descriptor(checksum="a" * 64))
    with pytest.raises(CatalogueError):
        catalogue.register(descriptor(checksum="d" * 64))
    assert catalogue.get("noise-perturbation", Version.parse("1.2.0")).checksum == "a" * 64
