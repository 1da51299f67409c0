"""Catalogue of assessment modules and accredited experts.

Modules are versioned, checksummed executables that advertise capabilities;
`resolve` binds a set of capability requests to concrete module versions.
The policy is the familiar package-manager one: for each needed capability,
the highest version satisfying the intersection of every requesting range,
with transitive requirements closed and version conflicts reported as hard
errors (a regulatory evaluation gets one unambiguous toolchain, never two
versions of the same capability side by side).

Released versions are immutable: re-registering the same (name, version)
with a different checksum is a conflict.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .semver import Range, Version, VersionError
from .store import ConflictError, Store

METADATA_SCHEMA_VERSION = 1

_CHECKSUM_LEN = 64


class CatalogueError(Exception):
    pass


class ResolutionError(CatalogueError):
    def __init__(self, message: str, capability: str | None = None,
                 conflicts: list[dict[str, str]] | None = None):
        super().__init__(message)
        self.capability = capability
        self.conflicts = conflicts or []


@dataclass(frozen=True)
class Requirement:
    capability: str
    range: Range

    def to_data(self) -> dict[str, str]:
        return {"capability": self.capability, "range": str(self.range)}


@dataclass(frozen=True)
class ResourceEstimate:
    cpu_seconds: int = 1
    storage_bytes: int = 65536

    def to_data(self) -> dict[str, int]:
        return {"cpu_seconds": self.cpu_seconds, "storage_bytes": self.storage_bytes}


@dataclass(frozen=True)
class ModuleDescriptor:
    name: str
    version: Version
    provides: tuple[str, ...]
    test_types: tuple[str, ...]
    dimension: str  # data_models | processes | final_product
    requires: tuple[Requirement, ...]
    resource_estimate: ResourceEstimate
    entrypoint: str
    checksum: str
    license_class: str = "open"  # open | proprietary

    def catalogue_id(self) -> str:
        return f"{self.name}@{self.version}"

    def to_data(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "version": str(self.version),
            "provides": sorted(self.provides),
            "test_types": sorted(self.test_types),
            "dimension": self.dimension,
            "requires": [r.to_data() for r in self.requires],
            "resource_estimate": self.resource_estimate.to_data(),
            "entrypoint": self.entrypoint,
            "checksum": self.checksum,
            "license_class": self.license_class,
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "ModuleDescriptor":
        return cls(
            name=data["name"],
            version=Version.parse(data["version"]),
            provides=tuple(data.get("provides", ())),
            test_types=tuple(data.get("test_types", ())),
            dimension=data.get("dimension", "final_product"),
            requires=tuple(Requirement(r["capability"], Range.parse(r["range"]))
                           for r in data.get("requires", ())),
            resource_estimate=ResourceEstimate(**data.get("resource_estimate", {})),
            entrypoint=data.get("entrypoint", ""),
            checksum=data["checksum"],
            license_class=data.get("license_class", "open"),
        )

    def validate(self) -> None:
        if len(self.checksum) != _CHECKSUM_LEN or any(
                c not in "0123456789abcdef" for c in self.checksum):
            raise CatalogueError(
                f"module {self.name}: checksum must be {_CHECKSUM_LEN} lowercase hex chars")
        if not self.provides:
            raise CatalogueError(f"module {self.name}: must provide at least one capability")
        if self.license_class not in ("open", "proprietary"):
            raise CatalogueError(f"module {self.name}: unknown license_class "
                                 f"'{self.license_class}'")
        if self.dimension not in ("data_models", "processes", "final_product"):
            raise CatalogueError(f"module {self.name}: unknown dimension '{self.dimension}'")


@dataclass(frozen=True)
class ExpertRecord:
    expert_id: str
    name: str
    accreditations: tuple[str, ...]
    operable_capabilities: tuple[str, ...]

    def to_data(self) -> dict[str, Any]:
        return {
            "expert_id": self.expert_id,
            "name": self.name,
            "accreditations": list(self.accreditations),
            "operable_capabilities": sorted(self.operable_capabilities),
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "ExpertRecord":
        return cls(data["expert_id"], data.get("name", ""),
                   tuple(data.get("accreditations", ())),
                   tuple(data.get("operable_capabilities", ())))


@dataclass
class Resolution:
    bindings: dict[str, tuple[str, Version]]  # capability -> (module name, version)
    order: list[str]  # capabilities in dependency-consistent order

    def to_data(self) -> dict[str, Any]:
        return {
            "bindings": {cap: {"name": name, "version": str(version)}
                         for cap, (name, version) in sorted(self.bindings.items())},
            "order": list(self.order),
        }


def file_checksum(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Catalogue:
    """Store-backed module and expert registry."""

    MODULE_KIND = "module"
    EXPERT_KIND = "expert"

    def __init__(self, store: Store):
        self.store = store

    # -- registration --------------------------------------------------------

    def register(self, descriptor: ModuleDescriptor, verify_entrypoint: bool = True) -> str:
        descriptor.validate()
        if verify_entrypoint and descriptor.entrypoint:
            path = Path(descriptor.entrypoint)
            if path.exists():
                actual = file_checksum(path)
                if actual != descriptor.checksum:
                    raise CatalogueError(
                        f"checksum mismatch for {descriptor.catalogue_id()}: descriptor says "
                        f"{descriptor.checksum}, file hashes to {actual}")
        record_id = descriptor.catalogue_id()
        try:
            self.store.put_record(self.MODULE_KIND, record_id, descriptor.to_data())
        except ConflictError:
            existing = self.get(descriptor.name, descriptor.version)
            if existing.checksum != descriptor.checksum:
                raise CatalogueError(
                    f"{record_id} is already registered with checksum {existing.checksum}; "
                    "released versions are immutable") from None
            raise CatalogueError(
                f"{record_id} is already registered with different metadata") from None
        return record_id

    def register_expert(self, expert: ExpertRecord) -> str:
        self.store.put_record(self.EXPERT_KIND, expert.expert_id, expert.to_data(),
                              replace=True)
        return expert.expert_id

    # -- lookup ----------------------------------------------------------------

    def modules(self) -> list[ModuleDescriptor]:
        return [ModuleDescriptor.from_data(payload)
                for _, payload in self.store.list_records(self.MODULE_KIND)]

    def experts(self) -> list[ExpertRecord]:
        return [ExpertRecord.from_data(payload)
                for _, payload in self.store.list_records(self.EXPERT_KIND)]

    def get(self, name: str, version: Version) -> ModuleDescriptor:
        payload = self.store.get_record(self.MODULE_KIND, f"{name}@{version}")
        return ModuleDescriptor.from_data(payload)

    def query(self, capability: str, version_range: Range | str) -> list[ModuleDescriptor]:
        """All providers of `capability` within the range, highest version first."""
        if isinstance(version_range, str):
            version_range = Range.parse(version_range)
        hits = [m for m in self.modules()
                if capability in m.provides and version_range.contains(m.version)]
        hits.sort(key=lambda m: (m.version.key(), m.name), reverse=True)
        return hits

    # -- resolution --------------------------------------------------------------

    def resolve(self, roots: list[Requirement]) -> Resolution:
        return resolve_modules(self.modules(), roots)

    def match_experts(self, resolution: Resolution,
                      experts: Iterable[ExpertRecord] | None = None
                      ) -> dict[str, list[str]]:
        """capability -> sorted expert ids; empty list marks an uncovered capability."""
        pool = list(experts) if experts is not None else self.experts()
        matches: dict[str, list[str]] = {}
        for capability in sorted(resolution.bindings):
            matches[capability] = sorted(
                e.expert_id for e in pool if capability in e.operable_capabilities)
        return matches

    # -- import/export -------------------------------------------------------------

    def export_data(self) -> dict[str, Any]:
        return {
            "metadata_schema_version": METADATA_SCHEMA_VERSION,
            "modules": [m.to_data() for m in self.modules()],
            "experts": [e.to_data() for e in self.experts()],
        }

    def import_data(self, data: dict[str, Any]) -> int:
        if data.get("metadata_schema_version") != METADATA_SCHEMA_VERSION:
            raise CatalogueError(
                f"unsupported metadata_schema_version {data.get('metadata_schema_version')!r}")
        count = 0
        for module_data in data.get("modules", ()):
            self.register(ModuleDescriptor.from_data(module_data), verify_entrypoint=False)
            count += 1
        for expert_data in data.get("experts", ()):
            self.register_expert(ExpertRecord.from_data(expert_data))
            count += 1
        return count

    def import_json(self, text: str) -> int:
        return self.import_data(json.loads(text))


# --- the resolver search ----------------------------------------------------


def resolve_modules(modules: list[ModuleDescriptor],
                    roots: list[Requirement]) -> Resolution:
    """Resolve against an explicit module list (catalogue-independent core)."""
    if not roots:
        raise ResolutionError("resolve needs at least one root requirement")
    bindings, requirement_log, cyclic_witness = _search(modules, roots)
    if bindings is None:
        if cyclic_witness is not None:
            raise ResolutionError(
                "dependency cycle detected: " + " -> ".join(cyclic_witness),
                conflicts=[])
        capability, conflicts = _explain_failure(modules, requirement_log)
        ranges = ", ".join(f"{c['range']} (required by {c['requester']})"
                           for c in conflicts)
        raise ResolutionError(
            f"no version of capability '{capability}' satisfies all ranges: {ranges}",
            capability=capability, conflicts=conflicts)
    order = _dependency_order(modules, bindings)
    return Resolution(bindings, order)


def _candidates(modules: list[ModuleDescriptor], capability: str,
                ranges: list[Range]) -> list[ModuleDescriptor]:
    hits = [m for m in modules
            if capability in m.provides and all(r.contains(m.version) for r in ranges)]
    # highest version first; name ascending breaks version ties deterministically
    hits.sort(key=lambda m: (tuple(-c for c in m.version.key()), m.name))
    return hits


def _search(modules: list[ModuleDescriptor], roots: list[Requirement]
            ) -> tuple[dict[str, tuple[str, Version]] | None,
                       dict[str, list[tuple[Range, str]]],
                       list[str] | None]:
    """Backtracking search; returns (bindings, requirement log, cycle witness).

    Needed capabilities are bound in lexicographic order as they become
    needed, trying higher versions first, so the first complete acyclic
    assignment found is the greedy optimum.  Complete assignments whose
    requires graph is cyclic are rejected and remembered as a witness for
    error reporting.  The requirement log records every range ever requested
    per capability.
    """
    requirement_log: dict[str, list[tuple[Range, str]]] = {}
    cyclic_witness: list[list[str]] = []

    def log_requirement(capability: str, rng: Range, requester: str) -> None:
        requirement_log.setdefault(capability, []).append((rng, requester))

    for root in roots:
        log_requirement(root.capability, root.range, "roots")

    def recurse(bindings: dict[str, tuple[str, Version]],
                constraints: dict[str, list[tuple[Range, str]]]
                ) -> dict[str, tuple[str, Version]] | None:
        unbound = sorted(cap for cap in constraints if cap not in bindings)
        if not unbound:
            cycle = _binding_cycle(modules, bindings)
            if cycle is not None:
                if not cyclic_witness:
                    cyclic_witness.append(cycle)
                return None
            return dict(bindings)
        capability = unbound[0]
        ranges = [rng for rng, _ in constraints[capability]]
        for candidate in _candidates(modules, capability, ranges):
            new_constraints = {cap: list(reqs) for cap, reqs in constraints.items()}
            feasible = True
            for requirement in candidate.requires:
                log_requirement(requirement.capability, requirement.range,
                                candidate.catalogue_id())
                new_constraints.setdefault(requirement.capability, []).append(
                    (requirement.range, candidate.catalogue_id()))
                bound = bindings.get(requirement.capability)
                if bound is not None and not requirement.range.contains(bound[1]):
                    feasible = False
            if not feasible:
                continue
            bindings[capability] = (candidate.name, candidate.version)
            result = recurse(bindings, new_constraints)
            if result is not None:
                return result
            del bindings[capability]
        return None

    initial: dict[str, list[tuple[Range, str]]] = {}
    for root in roots:
        initial.setdefault(root.capability, []).append((root.range, "roots"))
    solution = recurse({}, initial)
    witness = cyclic_witness[0] if (solution is None and cyclic_witness) else None
    return solution, requirement_log, witness


def _binding_cycle(modules: list[ModuleDescriptor],
                   bindings: dict[str, tuple[str, Version]]) -> list[str] | None:
    by_id = {m.catalogue_id(): m for m in modules}
    graph: dict[str, set[str]] = {cap: set() for cap in bindings}
    for capability, (name, version) in bindings.items():
        for requirement in by_id[f"{name}@{version}"].requires:
            if requirement.capability in bindings and requirement.capability != capability:
                graph[capability].add(requirement.capability)
    remaining = {cap: set(deps) for cap, deps in graph.items()}
    while remaining:
        ready = [cap for cap, deps in remaining.items() if not deps]
        if not ready:
            return _find_cycle(remaining)
        for cap in ready:
            del remaining[cap]
        for deps in remaining.values():
            deps.difference_update(ready)
    return None


def _explain_failure(modules: list[ModuleDescriptor],
                     requirement_log: dict[str, list[tuple[Range, str]]]
                     ) -> tuple[str, list[dict[str, str]]]:
    """Pick the capability whose accumulated ranges admit no version at all;
    fall back to the first logged capability."""
    for capability in sorted(requirement_log):
        ranges = [rng for rng, _ in requirement_log[capability]]
        if not _candidates(modules, capability, ranges):
            return capability, [{"range": str(rng), "requester": requester}
                                for rng, requester in requirement_log[capability]]
    capability = sorted(requirement_log)[0]
    return capability, [{"range": str(rng), "requester": requester}
                        for rng, requester in requirement_log[capability]]


def _dependency_order(modules: list[ModuleDescriptor],
                      bindings: dict[str, tuple[str, Version]]) -> list[str]:
    """Topological order over bound capabilities with lexicographic tie-break."""
    by_id = {m.catalogue_id(): m for m in modules}
    # edge dep -> dependents: dep must appear before any capability whose
    # bound module requires it
    incoming: dict[str, set[str]] = {cap: set() for cap in bindings}
    for capability, (name, version) in bindings.items():
        descriptor = by_id[f"{name}@{version}"]
        for requirement in descriptor.requires:
            if requirement.capability in bindings and requirement.capability != capability:
                incoming[capability].add(requirement.capability)
    order: list[str] = []
    remaining = dict(incoming)
    while remaining:
        ready = sorted(cap for cap, deps in remaining.items() if not deps)
        if not ready:
            cycle = _find_cycle(remaining)
            raise ResolutionError("dependency cycle detected: " + " -> ".join(cycle))
        head = ready[0]
        order.append(head)
        del remaining[head]
        for deps in remaining.values():
            deps.discard(head)
    return order


def _find_cycle(graph: dict[str, set[str]]) -> list[str]:
    start = sorted(graph)[0]
    seen: list[str] = []
    node = start
    while node not in seen:
        seen.append(node)
        node = sorted(graph[node] & set(graph))[0]
    return seen[seen.index(node):] + [node]
