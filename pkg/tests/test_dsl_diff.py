from __future__ import annotations

import random

from sbxkit.dsl import canonicalize, diff, parse, replay

from docgen import random_config_source

BASE = (
    'sandbox "m" { system { system_name: "x" risk_class: limited dimensions: [processes, final_product] } '
    "objectives { transparency {} robustness {} } "
    'tests { test t1 { objective: robustness method_query: "noise-perturbation@^1.0.0" '
    "dimension: final_product seed: 1 } } "
    'infrastructure { executors: ["local"] max_cpu_seconds: 60 max_storage_bytes: 1000000 } '
    "access { role provider { zones: [shared] } } reporting { formats: [json] } }"
)


def test_diff_of_identical_documents_is_empty():
    doc = parse(BASE)
    assert diff(doc, doc) == []


def test_adding_a_test_produces_one_added_entry():
    old = parse(BASE)
    new_source = BASE.replace(
        "seed: 1 } }",
        'seed: 1 } test t2 { objective: transparency '
        'method_query: "output-explainability@^1.0.0" dimension: final_product } }',
    )
    new = parse(new_source)
    changes = diff(old, new)
    assert len(changes) == 1
    change = changes[0]
    assert change.kind == "added"
    assert change.path == "tests/t2"
    assert change.before is None
    assert change.after["objective"] == "transparency"


def test_seed_change_produces_one_modified_entry():
    old = parse(BASE)
    new = parse(BASE.replace("seed: 1", "seed: 2"))
    changes = diff(old, new)
    assert len(changes) == 1
    change = changes[0]
    assert change.kind == "modified"
    assert change.path == "tests/t1/seed"
    assert change.before == 1
    assert change.after == 2


def test_empty_changeset_iff_canonical_texts_equal():
    shuffled = (
        'sandbox "m" { reporting { formats: [json] } '
        "objectives { robustness {} transparency {} } "
        'tests { test t1 { seed: 1 dimension: final_product '
        'method_query: "noise-perturbation@^1.0.0" objective: robustness } } '
        'system { dimensions: [final_product, processes] risk_class: limited system_name: "x" } '
        'infrastructure { max_storage_bytes: 1000000 max_cpu_seconds: 60 executors: ["local"] } '
        "access { role provider { zones: [shared] } } }"
    )
    a, b = parse(BASE), parse(shuffled)
    assert canonicalize(a) == canonicalize(b)
    assert diff(a, b) == []


def test_replay_reproduces_target_on_random_mutations():
    rng = random.Random(99)
    for _ in range(25):
        old = parse(random_config_source(rng))
        new = parse(random_config_source(rng))
        changes = diff(old, new)
        rebuilt = replay(old, changes)
        assert canonicalize(rebuilt) == canonicalize(new)


def test_removed_entry_for_dropped_control():
    old_source = BASE.replace(
        "tests {",
        'controls { control c1 { activity: "traceability" } } tests {',
    )
    old = parse(old_source)
    new = parse(BASE)
    changes = diff(old, new)
    assert [c.kind for c in changes] == ["removed"]
    assert changes[0].path == "controls/c1"
