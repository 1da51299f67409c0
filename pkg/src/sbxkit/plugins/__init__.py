"""Bundled reference assessment modules and their catalogue descriptors."""

from __future__ import annotations

from pathlib import Path

from ..catalogue import (
    Catalogue,
    ExpertRecord,
    ModuleDescriptor,
    ResourceEstimate,
    file_checksum,
)
from ..semver import Version

_PLUGIN_SPECS = (
    ("noise-perturbation", "noise_perturbation.py", "final_product",
     ("noise-perturbation",)),
    ("bias-detection", "bias_detection.py", "data_models",
     ("bias-detection",)),
    ("output-explainability", "output_explainability.py", "final_product",
     ("output-explainability",)),
)

REFERENCE_VERSION = "1.0.0"


def plugins_dir() -> Path:
    return Path(__file__).parent


def reference_descriptors() -> list[ModuleDescriptor]:
    """Descriptors for the bundled modules, checksummed against the installed files."""
    descriptors = []
    for name, filename, dimension, provides in _PLUGIN_SPECS:
        path = plugins_dir() / filename
        descriptors.append(ModuleDescriptor(
            name=name,
            version=Version.parse(REFERENCE_VERSION),
            provides=provides,
            test_types=(name,),
            dimension=dimension,
            requires=(),
            resource_estimate=ResourceEstimate(cpu_seconds=5, storage_bytes=262144),
            entrypoint=str(path),
            checksum=file_checksum(path),
        ))
    return descriptors


def reference_experts() -> list[ExpertRecord]:
    return [
        ExpertRecord(
            expert_id="citcom-assessment-lab",
            name="CitCom Assessment Lab",
            accreditations=("smart-city test facility",),
            operable_capabilities=("noise-perturbation", "bias-detection",
                                   "output-explainability"),
        ),
    ]


def seed_reference_catalogue(catalogue: Catalogue) -> list[str]:
    """Register every bundled module and expert; returns the catalogue ids."""
    ids = [catalogue.register(descriptor) for descriptor in reference_descriptors()]
    for expert in reference_experts():
        catalogue.register_expert(expert)
    return ids
