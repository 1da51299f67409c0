"""Convenience composition of the translation chains and the planner."""

from __future__ import annotations

from .catalogue import Catalogue
from .dsl.model import ConfigDocument
from .mapping import (
    MappingTable,
    controls_to_control_types,
    objectives_to_test_types,
    test_types_to_methods,
)
from .planner import ExecutionPlan, assemble


def build_plan(config: ConfigDocument, table: MappingTable,
               catalogue: Catalogue) -> ExecutionPlan:
    """objectives -> test types -> methods, controls -> control types, then assemble."""
    pairs = objectives_to_test_types(config.objectives, table)
    coverage = test_types_to_methods(pairs, table, catalogue)
    control_rows = controls_to_control_types(config.controls, table)
    return assemble(config, coverage, control_rows, catalogue)
