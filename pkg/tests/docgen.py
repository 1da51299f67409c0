"""Seeded generator of valid configuration sources for round-trip tests."""

from __future__ import annotations

import random
import string

from sbxkit.dsl import BUILTIN_OBJECTIVES
from sbxkit.dsl.canonical import quote, render_literal

DIMENSIONS = ("data_models", "processes", "final_product")
ROLES = ("provider", "competent_authority", "technical_expert", "auditor")
ZONES = ("confidential", "shared", "regulatory")
RISK_CLASSES = ("minimal", "limited", "high")
PRIORITIES = ("low", "medium", "high")
STATUSES = ("declared", "inspected", "accepted", "rejected")
FORMATS = ("json", "markdown")
ACTIVITIES = ("traceability", "human-oversight", "data-governance",
              "risk-management", "documentation")
RANGE_OPS = ("^", "~", "=", ">=")


def ident(rng: random.Random, prefix: str = "") -> str:
    length = rng.randint(1, 8)
    body = "".join(rng.choice(string.ascii_lowercase + "0123456789-_") for _ in range(length))
    return (prefix + rng.choice(string.ascii_lowercase) + body).strip("-")


def text_value(rng: random.Random) -> str:
    alphabet = string.ascii_letters + string.digits + " .,:;!?@()/\\\"\n\t#{}[]"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))


def literal(rng: random.Random, depth: int = 0):
    kinds = ["int", "decimal", "bool", "string"]
    if depth == 0:
        kinds.append("list")
    kind = rng.choice(kinds)
    if kind == "int":
        return rng.randint(-1000, 100000)
    if kind == "decimal":
        return round(rng.uniform(-100, 100), rng.randint(1, 6))
    if kind == "bool":
        return rng.choice([True, False])
    if kind == "string":
        return text_value(rng)
    return [literal(rng, depth + 1) for _ in range(rng.randint(0, 3))]


def method_query(rng: random.Random) -> str:
    op = rng.choice(RANGE_OPS)
    return f"{ident(rng)}@{op}{rng.randint(0, 3)}.{rng.randint(0, 9)}.{rng.randint(0, 9)}"


def random_config_source(rng: random.Random) -> str:
    lines: list[str] = []
    name = ident(rng, "cfg-")
    lines.append(f"sandbox {quote(name)} {{")
    if rng.random() < 0.5:
        lines.append(' schema_version: "1.0.0"')
    if rng.random() < 0.3:
        lines.append(" allow_gaps: true")

    dims = rng.sample(DIMENSIONS, rng.randint(1, 3))
    lines.append(" system {")
    lines.append(f"  system_name: {quote(text_value(rng) or 'sys')}")
    lines.append(f"  risk_class: {rng.choice(RISK_CLASSES)}")
    lines.append(f"  dimensions: [{', '.join(dims)}]")
    if rng.random() < 0.5:
        lines.append(f"  domain_tag: {quote(ident(rng))}")
    lines.append(" }")

    objective_ids = rng.sample(BUILTIN_OBJECTIVES, rng.randint(1, 4))
    if rng.random() < 0.4:
        objective_ids.append("custom:" + ident(rng))
    lines.append(" objectives {")
    for oid in objective_ids:
        header = oid if oid in BUILTIN_OBJECTIVES else f"objective {quote(oid)}"
        lines.append(f"  {header} {{")
        if rng.random() < 0.6:
            lines.append(f"   priority: {rng.choice(PRIORITIES)}")
        if rng.random() < 0.5:
            lines.append("   parameters {")
            for _ in range(rng.randint(1, 3)):
                lines.append(f"    {ident(rng)}: {render_literal(literal(rng))}")
            lines.append("   }")
        lines.append("  }")
    lines.append(" }")

    lines.append(" controls {")
    control_ids = {ident(rng, "ctl-") for _ in range(rng.randint(0, 3))}
    for cid in sorted(control_ids):
        lines.append(f"  control {cid} {{")
        lines.append(f"   activity: {quote(rng.choice(ACTIVITIES))}")
        if rng.random() < 0.4:
            lines.append(f"   control_type: {quote(ident(rng))}")
        if rng.random() < 0.5:
            lines.append(f"   dimension: {rng.choice(DIMENSIONS)}")
        if rng.random() < 0.5:
            lines.append(f"   guideline {{ source: {quote(ident(rng))} clause: {quote(ident(rng))} }}")
        if rng.random() < 0.5:
            lines.append(f"   status: {rng.choice(STATUSES)}")
        lines.append("  }")
    lines.append(" }")

    lines.append(" tests {")
    test_ids = {ident(rng, "tst-") for _ in range(rng.randint(0, 3))}
    for tid in sorted(test_ids):
        lines.append(f"  test {tid} {{")
        lines.append(f"   objective: {_reference(rng.choice(objective_ids))}")
        lines.append(f"   method_query: {quote(method_query(rng))}")
        lines.append(f"   dimension: {rng.choice(dims)}")
        if rng.random() < 0.5:
            lines.append(f"   seed: {rng.randint(0, 2**31)}")
        if rng.random() < 0.4:
            lines.append("   inputs {")
            for _ in range(rng.randint(1, 2)):
                digest = "".join(rng.choice("0123456789abcdef") for _ in range(64))
                lines.append(f"    {ident(rng)}: {quote(digest)}")
            lines.append("   }")
        lines.append("  }")
    lines.append(" }")

    lines.append(" infrastructure {")
    executors = {ident(rng, "ex-") for _ in range(rng.randint(1, 3))}
    rendered = ", ".join(quote(e) for e in sorted(executors))
    lines.append(f"  executors: [{rendered}]")
    lines.append(f"  max_cpu_seconds: {rng.randint(1, 10_000)}")
    lines.append(f"  max_storage_bytes: {rng.randint(1, 10**9)}")
    lines.append(" }")

    lines.append(" access {")
    for role in rng.sample(ROLES, rng.randint(1, 4)):
        zones = rng.sample(ZONES, rng.randint(1, 3))
        lines.append(f"  role {role} {{ zones: [{', '.join(zones)}] }}")
    lines.append(" }")

    formats = rng.sample(FORMATS, rng.randint(1, 2))
    lines.append(f" reporting {{ formats: [{', '.join(formats)}] }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _reference(objective_id: str) -> str:
    from sbxkit.dsl.syntax import is_identifier

    return objective_id if is_identifier(objective_id) else quote(objective_id)
